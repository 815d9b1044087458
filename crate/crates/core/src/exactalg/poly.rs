//! Sparse multivariate polynomials over Q(i) with named indeterminates.
//!
//! Two polynomials over different variable lists can be combined freely; the
//! result lives over the union of the lists (left operand's variables first).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::scalar::GQ;

pub type Monomial = Vec<u16>;
pub type VarList = Arc<Vec<String>>;

pub fn var_list<S: AsRef<str>>(names: &[S]) -> VarList {
    Arc::new(names.iter().map(|s| s.as_ref().to_string()).collect())
}

/// Name of the conjugate variable paired with `name`.
pub fn conj_name(name: &str) -> String {
    format!("conj({})", name)
}

/// Inverse of [`conj_name`], if `name` is a conjugate variable.
pub fn unconj_name(name: &str) -> Option<&str> {
    name.strip_prefix("conj(").and_then(|s| s.strip_suffix(')'))
}

#[derive(Clone)]
pub struct Poly {
    vars: VarList,
    terms: BTreeMap<Monomial, GQ>,
}

impl Poly {
    pub fn zero(vars: &VarList) -> Poly {
        Poly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &VarList, c: GQ) -> Poly {
        let mut p = Poly::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars.len()], c);
        }
        p
    }

    pub fn one(vars: &VarList) -> Poly {
        Poly::constant(vars, GQ::one())
    }

    /// The variable `name`, appended to the list if absent.
    pub fn var(vars: &VarList, name: &str) -> Poly {
        let (vars, k) = match vars.iter().position(|v| v == name) {
            Some(k) => (vars.clone(), k),
            None => {
                let mut v = (**vars).clone();
                v.push(name.to_string());
                let k = v.len() - 1;
                (Arc::new(v), k)
            }
        };
        let mut m = vec![0; vars.len()];
        m[k] = 1;
        Poly::from_terms(&vars, [(m, GQ::one())])
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, GQ)>>(vars: &VarList, terms: I) -> Poly {
        let mut p = Poly::zero(vars);
        for (m, c) in terms {
            assert_eq!(m.len(), vars.len(), "exponent vector length mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &VarList {
        &self.vars
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, GQ> {
        &self.terms
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: GQ) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn constant_term(&self) -> GQ {
        self.terms.get(&vec![0; self.vars.len()]).cloned().unwrap_or_else(GQ::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    pub fn coeff(&self, m: &[u16]) -> GQ {
        self.terms.get(m).cloned().unwrap_or_else(GQ::zero)
    }

    /// Coefficient of a monomial given as `(name, exponent)` pairs; other variables exponent 0.
    pub fn coeff_of(&self, mono: &[(&str, u16)]) -> GQ {
        let mut m = vec![0u16; self.vars.len()];
        for (name, e) in mono {
            match self.var_index(name) {
                Some(k) => m[k] = *e,
                None if *e == 0 => {}
                None => return GQ::zero(),
            }
        }
        self.coeff(&m)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| deg(m)).max()
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| deg(m)).min()
    }

    pub fn degree_in(&self, name: &str) -> u32 {
        match self.var_index(name) {
            Some(k) => self.terms.keys().map(|m| m[k] as u32).max().unwrap_or(0),
            None => 0,
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        self.degree_in(name) > 0
    }

    /// Names of variables that actually occur.
    pub fn used_vars(&self) -> Vec<String> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(k, _)| self.terms.keys().any(|m| m[*k] > 0))
            .map(|(_, v)| v.clone())
            .collect()
    }

    /// Re-express over `vars`, which must contain every used variable.
    pub fn with_vars(&self, vars: &VarList) -> Poly {
        if Arc::ptr_eq(vars, &self.vars) || **vars == *self.vars {
            return Poly { vars: vars.clone(), terms: self.terms.clone() };
        }
        let map: Vec<Option<usize>> =
            self.vars.iter().map(|v| vars.iter().position(|w| w == v)).collect();
        let mut out = Poly::zero(vars);
        for (m, c) in &self.terms {
            let mut nm = vec![0u16; vars.len()];
            for (k, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let t = map[k].unwrap_or_else(|| panic!("variable {} missing from target list", self.vars[k]));
                nm[t] = e;
            }
            out.terms.insert(nm, c.clone());
        }
        out
    }

    /// Union variable list with `other` (self's order first).
    pub fn union_vars(&self, other: &VarList) -> VarList {
        if Arc::ptr_eq(&self.vars, other) || *self.vars == **other {
            return self.vars.clone();
        }
        let mut v = (*self.vars).clone();
        for name in other.iter() {
            if !v.contains(name) {
                v.push(name.clone());
            }
        }
        if v.len() == self.vars.len() {
            self.vars.clone()
        } else {
            Arc::new(v)
        }
    }

    fn aligned(&self, other: &Poly) -> (Poly, Poly) {
        let vars = self.union_vars(&other.vars);
        (self.with_vars(&vars), other.with_vars(&vars))
    }

    pub fn map_coeffs<F: Fn(&GQ) -> GQ>(&self, f: F) -> Poly {
        let mut out = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn scale(&self, c: &GQ) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        self.map_coeffs(|x| x * c)
    }

    /// Coefficient-wise complex conjugation; exponents unchanged.
    pub fn bar(&self) -> Poly {
        self.map_coeffs(|c| c.conj())
    }

    /// Rename variables; names not in `map` are kept.
    pub fn rename(&self, map: &HashMap<String, String>) -> Poly {
        let names: Vec<String> =
            self.vars.iter().map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone())).collect();
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() == names.len() {
            return Poly { vars: Arc::new(names), terms: self.terms.clone() };
        }
        // collisions: merge through substitution
        let mut sub = HashMap::new();
        for (old, new) in self.vars.iter().zip(names.iter()) {
            if old != new {
                sub.insert(old.clone(), Poly::var(&self.vars, new));
            }
        }
        self.subs(&sub)
    }

    /// Conjugate coefficients and swap every variable `v` with `conj(v)`.
    pub fn bar_swap(&self) -> Poly {
        let mut map = HashMap::new();
        for v in self.vars.iter() {
            match unconj_name(v) {
                Some(base) => map.insert(v.clone(), base.to_string()),
                None => map.insert(v.clone(), conj_name(v)),
            };
        }
        self.bar().rename(&map)
    }

    /// Drop all terms of total degree greater than `order`.
    pub fn truncate(&self, order: u32) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| deg(m) <= order)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Homogeneous component of total degree `k`.
    pub fn homogeneous_part(&self, k: u32) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| deg(m) == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    fn mul_impl(&self, other: &Poly, order: Option<u32>) -> Poly {
        let (a, b) = self.aligned(other);
        let mut out = Poly::zero(&a.vars);
        if a.is_zero() || b.is_zero() {
            return out;
        }
        for (ma, ca) in &a.terms {
            let da = deg(ma);
            if let Some(o) = order {
                if da > o {
                    continue;
                }
            }
            for (mb, cb) in &b.terms {
                if let Some(o) = order {
                    if da + deg(mb) > o {
                        continue;
                    }
                }
                let m: Monomial = ma.iter().zip(mb.iter()).map(|(x, y)| x + y).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn mul_trunc(&self, other: &Poly, order: u32) -> Poly {
        self.mul_impl(other, Some(order))
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(&self.vars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn pow_trunc(&self, e: u32, order: u32) -> Poly {
        let mut acc = Poly::one(&self.vars);
        let mut base = self.truncate(order);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_trunc(&base, order);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_trunc(&base, order);
            }
        }
        acc
    }

    pub fn derivative(&self, name: &str) -> Poly {
        let k = match self.var_index(name) {
            Some(k) => k,
            None => return Poly::zero(&self.vars),
        };
        let mut out = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            if m[k] == 0 {
                continue;
            }
            let mut nm = m.clone();
            nm[k] -= 1;
            out.add_term(nm, c * &GQ::from(m[k] as i64));
        }
        out
    }

    /// Repeated partial derivative.
    pub fn derivative_multi(&self, names: &[(&str, u16)]) -> Poly {
        let mut p = self.clone();
        for (name, e) in names {
            for _ in 0..*e {
                p = p.derivative(name);
            }
        }
        p
    }

    fn subs_impl(&self, map: &HashMap<String, Poly>, order: Option<u32>) -> Poly {
        // result vars: unsubstituted vars of self + vars of images
        let mut names: Vec<String> =
            self.vars.iter().filter(|v| !map.contains_key(*v)).cloned().collect();
        for v in self.vars.iter() {
            if let Some(img) = map.get(v) {
                for w in img.vars.iter() {
                    if !names.contains(w) {
                        names.push(w.clone());
                    }
                }
            }
        }
        let vars: VarList = Arc::new(names);
        let images: Vec<Option<Poly>> =
            self.vars.iter().map(|v| map.get(v).map(|p| p.with_vars(&vars))).collect();
        let keep: Vec<Option<usize>> = self
            .vars
            .iter()
            .map(|v| if map.contains_key(v) { None } else { vars.iter().position(|w| w == v) })
            .collect();
        // cache of powers per substituted variable
        let mut powers: Vec<Vec<Poly>> = images
            .iter()
            .map(|img| match img {
                Some(p) => vec![Poly::one(&vars), p.clone()],
                None => Vec::new(),
            })
            .collect();
        let mut out = Poly::zero(&vars);
        for (m, c) in &self.terms {
            let mut base = vec![0u16; vars.len()];
            for (k, &e) in m.iter().enumerate() {
                if let Some(t) = keep[k] {
                    base[t] = e;
                }
            }
            let mut term = Poly::from_terms(&vars, [(base, c.clone())]);
            let base_deg = term.min_degree().unwrap_or(0);
            if let Some(o) = order {
                if base_deg > o {
                    continue;
                }
            }
            for (k, &e) in m.iter().enumerate() {
                if e == 0 || images[k].is_none() {
                    continue;
                }
                while powers[k].len() <= e as usize {
                    let last = powers[k].last().unwrap().clone();
                    let next = match order {
                        Some(o) => last.mul_trunc(images[k].as_ref().unwrap(), o),
                        None => &last * images[k].as_ref().unwrap(),
                    };
                    powers[k].push(next);
                }
                term = match order {
                    Some(o) => term.mul_trunc(&powers[k][e as usize], o),
                    None => &term * &powers[k][e as usize],
                };
                if term.is_zero() {
                    break;
                }
            }
            out = &out + &term;
        }
        out
    }

    /// Exact substitution of variables by polynomials.
    pub fn subs(&self, map: &HashMap<String, Poly>) -> Poly {
        self.subs_impl(map, None)
    }

    /// Substitution truncated at total degree `order`.
    pub fn subs_trunc(&self, map: &HashMap<String, Poly>, order: u32) -> Poly {
        self.subs_impl(map, Some(order))
    }

    /// Substitute constants for the named variables.
    pub fn eval_partial(&self, point: &[(String, GQ)]) -> Poly {
        let map: HashMap<String, Poly> =
            point.iter().map(|(v, c)| (v.clone(), Poly::constant(&self.vars, c.clone()))).collect();
        self.subs(&map).drop_unused()
    }

    /// Full evaluation; missing variables are treated as zero.
    pub fn eval(&self, point: &HashMap<String, GQ>) -> GQ {
        let vals: Vec<GQ> =
            self.vars.iter().map(|v| point.get(v).cloned().unwrap_or_else(GQ::zero)).collect();
        let mut acc = GQ::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (k, &e) in m.iter().enumerate() {
                if e > 0 {
                    if vals[k].is_zero() {
                        t = GQ::zero();
                        break;
                    }
                    t = &t * &vals[k].pow(e as u32);
                }
            }
            acc += &t;
        }
        acc
    }

    /// Remove variables that do not occur.
    pub fn drop_unused(&self) -> Poly {
        let used = self.used_vars();
        if used.len() == self.vars.len() {
            return self.clone();
        }
        self.with_vars(&Arc::new(used))
    }

    /// Split into coefficients with respect to the named variables:
    /// `self = Σ coeff_β · x^β` with `coeff_β` free of those variables.
    pub fn coefficients_in(&self, names: &[String]) -> BTreeMap<Monomial, Poly> {
        let idx: Vec<Option<usize>> = names.iter().map(|n| self.var_index(n)).collect();
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key: Monomial = idx.iter().map(|k| k.map(|k| m[k]).unwrap_or(0)).collect();
            let mut rest = m.clone();
            for k in idx.iter().flatten() {
                rest[*k] = 0;
            }
            out.entry(key).or_insert_with(|| Poly::zero(&self.vars)).add_term(rest, c.clone());
        }
        out
    }

    /// Coefficients as a polynomial in one variable, index = power.
    pub fn univariate_coeffs(&self, name: &str) -> Vec<Poly> {
        let d = self.degree_in(name) as usize;
        let mut out = vec![Poly::zero(&self.vars); d + 1];
        let k = self.var_index(name);
        for (m, c) in &self.terms {
            let e = k.map(|k| m[k] as usize).unwrap_or(0);
            let mut rest = m.clone();
            if let Some(k) = k {
                rest[k] = 0;
            }
            out[e].add_term(rest, c.clone());
        }
        out
    }

    /// Part of the polynomial whose monomials satisfy `pred`.
    pub fn filter_terms<F: Fn(&[u16]) -> bool>(&self, pred: F) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().filter(|(m, _)| pred(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Pretty form of a single monomial.
    pub fn monomial_string(&self, m: &[u16]) -> String {
        let mut parts = Vec::new();
        for (k, &e) in m.iter().enumerate() {
            if e == 1 {
                parts.push(self.vars[k].clone());
            } else if e > 1 {
                parts.push(format!("{}^{}", self.vars[k], e));
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    /// Lowest-degree monomial, used to report first failures.
    pub fn lowest_term(&self) -> Option<(Monomial, GQ)> {
        self.terms
            .iter()
            .min_by(|a, b| deg(a.0).cmp(&deg(b.0)).then_with(|| b.0.cmp(a.0)))
            .map(|(m, c)| (m.clone(), c.clone()))
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        let (mut rem, d) = self.aligned(d);
        let (lm, lc) = d.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone()))?;
        let lc_inv = lc.inv();
        let mut q = Poly::zero(&rem.vars);
        while let Some((m, c)) = rem.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
            if m.iter().zip(lm.iter()).any(|(a, b)| a < b) {
                return None;
            }
            let qm: Monomial = m.iter().zip(lm.iter()).map(|(a, b)| a - b).collect();
            let qc = &c * &lc_inv;
            let t = Poly::from_terms(&rem.vars, [(qm, qc)]);
            rem = &rem - &(&t * &d);
            q = &q + &t;
        }
        Some(q)
    }

    pub fn is_real_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.is_real())
    }
}

/// All exponent vectors in `nvars` variables of total degree at most `max_deg`,
/// ordered by degree and then lexicographically.
pub fn monomials_up_to(nvars: usize, max_deg: u32) -> Vec<Monomial> {
    let mut out = vec![vec![0u16; nvars]];
    let mut layer = out.clone();
    for _ in 0..max_deg {
        let mut next: BTreeSet<Monomial> = BTreeSet::new();
        for m in &layer {
            for i in 0..nvars {
                let mut e = m.clone();
                e[i] += 1;
                next.insert(e);
            }
        }
        layer = next.into_iter().collect();
        out.extend(layer.iter().cloned());
    }
    out
}

pub fn deg(m: &[u16]) -> u32 {
    m.iter().map(|&e| e as u32).sum()
}

impl PartialEq for Poly {
    fn eq(&self, other: &Poly) -> bool {
        if Arc::ptr_eq(&self.vars, &other.vars) || *self.vars == *other.vars {
            return self.terms == other.terms;
        }
        (self - other).is_zero()
    }
}

impl Eq for Poly {}

impl<'a, 'b> Add<&'b Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'b Poly) -> Poly {
        let (mut a, b) = self.aligned(rhs);
        for (m, c) in b.terms {
            a.add_term(m, c);
        }
        a
    }
}

impl<'a, 'b> Sub<&'b Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'b Poly) -> Poly {
        let (mut a, b) = self.aligned(rhs);
        for (m, c) in b.terms {
            a.add_term(m, -c);
        }
        a
    }
}

impl<'a, 'b> Mul<&'b Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'b Poly) -> Poly {
        self.mul_impl(rhs, None)
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.map_coeffs(|c| -c)
    }
}

impl<'a> Neg for &'a Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.map_coeffs(|c| -c)
    }
}

impl fmt::Display for Poly {
    /// Expression-grammar form, e.g. `w - conj(w) - 2*i*z*conj(z)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // descending total degree, then descending lex
        let mut ts: Vec<(&Monomial, &GQ)> = self.terms.iter().collect();
        ts.sort_by(|a, b| deg(b.0).cmp(&deg(a.0)).then_with(|| b.0.cmp(a.0)));
        let mut first = true;
        for (m, c) in ts {
            let mono = self.monomial_string(m);
            let (neg, cabs) = if c.is_imaginary() && c.im < num_rational::BigRational::zero()
                || c.is_real() && c.re < num_rational::BigRational::zero()
            {
                (true, -c)
            } else {
                (false, c.clone())
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let cs = cabs.to_string();
            if mono == "1" {
                write!(f, "{}", cs)?;
            } else if cabs.is_one() {
                write!(f, "{}", mono)?;
            } else {
                write!(f, "{}*{}", cs, mono)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}
