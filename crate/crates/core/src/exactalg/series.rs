//! Power series truncated at a total-degree order. Terms above the order are unknown.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};

use super::linalg::Matrix;
use super::poly::{Poly, VarList};
use super::scalar::GQ;
use crate::error::{CrError, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    base: Poly,
    order: u32,
}

impl Series {
    pub fn new(p: &Poly, order: u32) -> Series {
        Series { base: p.truncate(order), order }
    }

    pub fn zero(vars: &VarList, order: u32) -> Series {
        Series { base: Poly::zero(vars), order }
    }

    pub fn poly(&self) -> &Poly {
        &self.base
    }

    pub fn into_poly(self) -> Poly {
        self.base
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn vars(&self) -> &VarList {
        self.base.vars()
    }

    /// True when every known coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.base.is_zero()
    }

    pub fn truncate(&self, order: u32) -> Series {
        Series::new(&self.base, order.min(self.order))
    }

    pub fn add(&self, other: &Series) -> Series {
        let o = self.order.min(other.order);
        Series::new(&(&self.base + &other.base), o)
    }

    pub fn sub(&self, other: &Series) -> Series {
        let o = self.order.min(other.order);
        Series::new(&(&self.base - &other.base), o)
    }

    pub fn mul(&self, other: &Series) -> Series {
        let o = self.order.min(other.order);
        Series { base: self.base.mul_trunc(&other.base, o), order: o }
    }

    pub fn neg(&self) -> Series {
        Series { base: -&self.base, order: self.order }
    }

    pub fn scale(&self, c: &GQ) -> Series {
        Series { base: self.base.scale(c), order: self.order }
    }

    /// Formal derivative; one order of information is lost.
    pub fn derivative(&self, var: &str) -> Series {
        let o = self.order.saturating_sub(1);
        Series::new(&self.base.derivative(var), o)
    }

    pub fn bar(&self) -> Series {
        Series { base: self.base.bar(), order: self.order }
    }

    /// Truncation-correct substitution. Images with nonzero constant term are
    /// rejected unless `self` is exact (`order = u32::MAX`).
    pub fn compose(&self, map: &HashMap<String, Series>) -> Result<Series> {
        let mut o = self.order;
        for (v, s) in map {
            if !self.base.depends_on(v) {
                continue;
            }
            if !s.base.constant_term().is_zero() && self.order != u32::MAX {
                return Err(CrError::Composition);
            }
            o = o.min(s.order);
        }
        let pm: HashMap<String, Poly> = map.iter().map(|(k, v)| (k.clone(), v.base.clone())).collect();
        let base = if o == u32::MAX { self.base.subs(&pm) } else { self.base.subs_trunc(&pm, o) };
        Ok(Series { base, order: o })
    }

    /// `1/self` for a series with invertible constant term.
    pub fn inverse(&self) -> Result<Series> {
        let c0 = self.base.constant_term();
        if c0.is_zero() {
            return Err(CrError::Invalid("inverse of series with zero constant term".into()));
        }
        let inv0 = c0.inv();
        // 1/(c0 (1 + t)) = inv0 * Σ (-t)^k
        let t = Series::new(&(&self.base.scale(&inv0) - &Poly::one(self.vars())), self.order);
        let mut acc = Series::new(&Poly::one(self.vars()), self.order);
        let mut pw = acc.clone();
        let mt = t.neg();
        for _ in 0..self.order {
            pw = pw.mul(&mt);
            if pw.is_zero() {
                break;
            }
            acc = acc.add(&pw);
        }
        Ok(acc.scale(&inv0))
    }

    /// `exp(self)` for a series with zero constant term.
    pub fn exp(&self) -> Result<Series> {
        if !self.base.constant_term().is_zero() {
            return Err(CrError::Invalid("exp of series with nonzero constant term".into()));
        }
        let mut acc = Series::new(&Poly::one(self.vars()), self.order);
        let mut term = acc.clone();
        for k in 1..=self.order {
            term = term.mul(self).scale(&GQ::from(k as i64).inv());
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// `(1 + self)^(p/q)` by the binomial series; `self` must have zero constant term.
    pub fn binomial_pow(&self, p: i64, q: i64) -> Result<Series> {
        if !self.base.constant_term().is_zero() {
            return Err(CrError::Invalid("binomial series needs zero constant term".into()));
        }
        let a = GQ::from_frac(p, q);
        let mut acc = Series::new(&Poly::one(self.vars()), self.order);
        let mut term = acc.clone();
        let mut coef = GQ::one();
        for k in 1..=self.order {
            coef = &coef * &(&(&a - &GQ::from((k - 1) as i64)) / &GQ::from(k as i64));
            term = term.mul(self);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term.scale(&coef));
        }
        Ok(acc)
    }

    /// Agreement with another series on all degrees both know.
    pub fn agrees_with(&self, other: &Series) -> bool {
        let o = self.order.min(other.order);
        self.base.truncate(o) == other.base.truncate(o)
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({})", self.base, self.order + 1)
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Result of [`solve_implicit`].
#[derive(Clone, Debug)]
pub struct ImplicitSolution {
    /// One series per unknown, in the independent variables.
    pub values: Vec<Poly>,
    pub order: u32,
    /// The equations hold identically (no truncation needed).
    pub exact: bool,
}

/// Solve `F(x, y) = 0` for `y = y(x)` near the origin, where `F(0,0) = 0` and
/// `∂F/∂y(0)` is invertible. Every variable other than `unknowns` is independent.
///
/// Fixed-Jacobian iteration `y ← y − J⁻¹ F(x, y)` gains at least one order per
/// step; it stops once stable at `order`, then checks exactness of the result.
/// Jets with at most this many terms are re-solved to twice the order to detect
/// polynomial solutions of degree above the requested order.
const EXACT_PROBE_TERMS: usize = 24;

pub fn solve_implicit(eqs: &[Poly], unknowns: &[String], order: u32) -> Result<ImplicitSolution> {
    let d = unknowns.len();
    assert_eq!(eqs.len(), d, "square system expected");
    if d == 0 {
        return Ok(ImplicitSolution { values: vec![], order, exact: true });
    }
    let zero_pt: HashMap<String, GQ> = HashMap::new();
    for (k, f) in eqs.iter().enumerate() {
        if !f.eval(&zero_pt).is_zero() {
            return Err(CrError::ImplicitSolve(format!("equation {} does not vanish at the base point", k + 1)));
        }
    }
    let jac = Matrix::from_fn(d, d, |r, c| eqs[r].derivative(&unknowns[c]).eval(&zero_pt));
    let jinv = jac
        .inverse()
        .ok_or_else(|| CrError::ImplicitSolve("Jacobian in the solved variables is singular".into()))?;
    let vars = eqs.iter().fold(eqs[0].vars().clone(), |acc, e| Poly::zero(&acc).union_vars(e.vars()));
    let step = |y: &Vec<Poly>, trunc: Option<u32>| -> Vec<Poly> {
        let map: HashMap<String, Poly> = unknowns.iter().cloned().zip(y.iter().cloned()).collect();
        eqs.iter()
            .map(|f| match trunc {
                Some(o) => f.subs_trunc(&map, o),
                None => f.subs(&map),
            })
            .collect()
    };
    let iterate = |mut y: Vec<Poly>, o: u32| -> Vec<Poly> {
        for _ in 0..=o + 1 {
            let res = step(&y, Some(o));
            if res.iter().all(|r| r.is_zero()) {
                break;
            }
            let mut next = Vec::with_capacity(d);
            for r in 0..d {
                let mut corr = Poly::zero(&vars);
                for c in 0..d {
                    if !jinv.get(r, c).is_zero() {
                        corr = &corr + &res[c].scale(jinv.get(r, c));
                    }
                }
                next.push((&y[r] - &corr).truncate(o));
            }
            y = next;
        }
        y
    };
    let mut y = iterate(vec![Poly::zero(&vars); d], order);
    if !step(&y, Some(order)).iter().all(|r| r.is_zero()) {
        return Err(CrError::ImplicitSolve("iteration did not converge".into()));
    }
    // A polynomial solution shows up as a jet whose top degrees vanish. Small jets that
    // fill the whole range get one longer run to catch polynomials of slightly higher degree.
    let top = |y: &Vec<Poly>| y.iter().filter_map(|p| p.total_degree()).max().unwrap_or(0);
    let mut exact = false;
    if top(&y) < order {
        exact = step(&y, None).iter().all(|r| r.is_zero());
    } else if y.iter().map(|p| p.nterms()).sum::<usize>() <= EXACT_PROBE_TERMS {
        let longer = 2 * order;
        let y2 = iterate(y.clone(), longer);
        if top(&y2) < longer && step(&y2, None).iter().all(|r| r.is_zero()) {
            y = y2;
            exact = true;
        }
    }
    let values = y.into_iter().map(|p| p.drop_unused()).collect();
    Ok(ImplicitSolution { values, order, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::poly::var_list;

    #[test]
    fn inverse_of_one_minus_x() {
        let v = var_list(&["x"]);
        let x = Poly::var(&v, "x");
        let s = Series::new(&(&Poly::one(&v) - &x), 6);
        let inv = s.inverse().unwrap();
        for k in 0..=6u16 {
            assert_eq!(inv.poly().coeff(&[k]), GQ::one());
        }
        assert!(inv.mul(&s).agrees_with(&Series::new(&Poly::one(&v), 6)));
    }

    #[test]
    fn exp_coefficients_are_reciprocal_factorials() {
        let v = var_list(&["u"]);
        let e = Series::new(&Poly::var(&v, "u"), 8).exp().unwrap();
        let mut fact = 1i64;
        for k in 0..=8u16 {
            if k > 0 {
                fact *= k as i64;
            }
            assert_eq!(e.poly().coeff(&[k]), GQ::from_frac(1, fact));
        }
    }

    #[test]
    fn sqrt_squared() {
        let v = var_list(&["u"]);
        let s = Series::new(&Poly::var(&v, "u"), 10).binomial_pow(1, 2).unwrap();
        let sq = s.mul(&s);
        assert!(sq.agrees_with(&Series::new(&(&Poly::one(&v) + &Poly::var(&v, "u")), 10)));
    }

    #[test]
    fn compose_rejects_constant_terms() {
        let v = var_list(&["w"]);
        let f = Series::new(&Poly::var(&v, "w").pow(2), 5);
        let mut m = HashMap::new();
        m.insert("w".to_string(), Series::new(&Poly::one(&v), 5));
        assert_eq!(f.compose(&m), Err(CrError::Composition));
    }

    #[test]
    fn implicit_solve_circle_branch() {
        // y - x - y^2 = 0  =>  y = (1 - sqrt(1-4x))/2 = x + x^2 + 2x^3 + 5x^4 + ...
        let v = var_list(&["x", "y"]);
        let x = Poly::var(&v, "x");
        let y = Poly::var(&v, "y");
        let f = &(&y - &x) - &y.pow(2);
        let sol = solve_implicit(&[f], &["y".to_string()], 6).unwrap();
        let catalan = [0, 1, 1, 2, 5, 14, 42];
        for (k, c) in catalan.iter().enumerate() {
            assert_eq!(sol.values[0].coeff_of(&[("x", k as u16)]), GQ::from(*c));
        }
        assert!(!sol.exact);
    }

    #[test]
    fn implicit_solve_detects_exact() {
        let v = var_list(&["x", "y"]);
        let f = &Poly::var(&v, "y") - &(&Poly::var(&v, "x") * &Poly::var(&v, "x"));
        let sol = solve_implicit(&[f], &["y".to_string()], 8).unwrap();
        assert!(sol.exact);
        assert_eq!(sol.values[0], Poly::var(&v, "x").pow(2));
    }
}
