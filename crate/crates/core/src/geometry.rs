//! Real algebraic sets given by complexified defining polynomials, their
//! complexification, the involutions, local charts and pointwise classification.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{CrError, Result};
use crate::exactalg::linalg::Matrix;
use crate::exactalg::rank::random_coordinate;
use crate::exactalg::series::solve_implicit;
use crate::exactalg::weights::WeightVector;
use crate::exactalg::{conj_name, unconj_name, Poly, VarList, GQ};

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldSpec {
    pub name: String,
    /// Holomorphic coordinate names `Z_1..Z_N`.
    pub coords: Vec<String>,
    /// Defining polynomials in `coords` and their conjugates.
    pub rho: Vec<Poly>,
    pub weights: Option<WeightVector>,
    pub basepoint: Option<Vec<GQ>>,
}

impl ManifoldSpec {
    pub fn new(name: &str, coords: &[&str], rho: Vec<Poly>) -> ManifoldSpec {
        let coords: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        let vars = ambient_vars(&coords);
        let rho = rho.into_iter().map(|p| p.with_vars(&Poly::zero(&vars).union_vars(p.vars()))).collect();
        ManifoldSpec { name: name.to_string(), coords, rho, weights: None, basepoint: None }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn conj_coords(&self) -> Vec<String> {
        self.coords.iter().map(|c| conj_name(c)).collect()
    }

    /// `Z_1..Z_N, conj(Z_1)..conj(Z_N)`.
    pub fn all_vars(&self) -> Vec<String> {
        let mut v = self.coords.clone();
        v.extend(self.conj_coords());
        v
    }

    pub fn basepoint_or_origin(&self) -> Vec<GQ> {
        self.basepoint.clone().unwrap_or_else(|| vec![GQ::zero(); self.dim()])
    }

    /// The diagonal point `(p, conj p)` as a variable assignment.
    pub fn diagonal(&self, p: &[GQ]) -> HashMap<String, GQ> {
        let mut m = HashMap::new();
        for (k, c) in self.coords.iter().enumerate() {
            m.insert(c.clone(), p[k].clone());
            m.insert(conj_name(c), p[k].conj());
        }
        m
    }

    pub fn on_set(&self, p: &[GQ]) -> bool {
        let pt = self.diagonal(p);
        self.rho.iter().all(|r| r.eval(&pt).is_zero())
    }
}

pub fn ambient_vars(coords: &[String]) -> VarList {
    let mut v: Vec<String> = coords.to_vec();
    v.extend(coords.iter().map(|c| conj_name(c)));
    std::sync::Arc::new(v)
}

/// Checks reality of every defining polynomial and that the basepoint lies on the set.
pub fn validate(spec: &ManifoldSpec) -> Result<()> {
    if spec.rho.is_empty() {
        return Err(CrError::Invalid("at least one defining equation is required".into()));
    }
    for (j, r) in spec.rho.iter().enumerate() {
        if r.is_zero() {
            return Err(CrError::Invalid(format!("defining polynomial {} is zero", j + 1)));
        }
        let diff = &r.bar_swap() - r;
        if let Some((m, _)) = diff.lowest_term() {
            return Err(CrError::Reality { j: j + 1, monomial: diff.monomial_string(&m) });
        }
    }
    if let Some(p) = &spec.basepoint {
        if p.len() != spec.dim() {
            return Err(CrError::Invalid("basepoint has wrong length".into()));
        }
        if !spec.on_set(p) {
            return Err(CrError::NotOnSet);
        }
    }
    Ok(())
}

/// `(Z, ζ) ↦ (conj ζ, conj Z)`.
pub fn sharp(z: &[GQ], zeta: &[GQ]) -> (Vec<GQ>, Vec<GQ>) {
    (zeta.iter().map(|x| x.conj()).collect(), z.iter().map(|x| x.conj()).collect())
}

/// Transport of a set given by polynomials in `Z` to the conjugate side (and back).
pub fn star(hs: &[Poly]) -> Vec<Poly> {
    hs.iter().map(|h| h.bar_swap()).collect()
}

/// Local parametrization of the complexification `ℳ` near a diagonal point.
#[derive(Clone, Debug)]
pub struct Chart {
    /// Ambient variables (`Z` then `ζ`) and their values at the center.
    pub center: Vec<(String, GQ)>,
    /// Free local coordinates; each is the displacement of the ambient variable of the same name.
    pub params: Vec<String>,
    /// Displacement of every ambient variable as a series in `params`.
    pub local: HashMap<String, Poly>,
    /// Rows of `rho` used to build the chart.
    pub rows: Vec<usize>,
    pub order: u32,
    pub exact: bool,
}

impl Chart {
    /// Ambient variables expressed as center value plus local displacement.
    pub fn ambient_map(&self) -> HashMap<String, Poly> {
        let vars: VarList = std::sync::Arc::new(self.params.clone());
        self.center
            .iter()
            .map(|(v, c)| (v.clone(), &Poly::constant(&vars, c.clone()) + &self.local[v]))
            .collect()
    }

    /// Pull a polynomial in the ambient variables back to the chart, truncated at the chart order.
    pub fn pullback(&self, f: &Poly) -> Poly {
        f.subs_trunc(&self.ambient_map(), self.order)
    }
}

/// Rows of `rho` that are independent at the point, greedily in order.
fn independent_rows(rho: &[Poly], vars: &[String], pt: &HashMap<String, GQ>) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<GQ>> = Vec::new();
    for (j, r) in rho.iter().enumerate() {
        let row: Vec<GQ> = vars.iter().map(|v| r.derivative(v).eval(pt)).collect();
        rows.push(row);
        if Matrix::from_rows(&rows).rank() == chosen.len() + 1 {
            chosen.push(j);
        } else {
            rows.pop();
        }
    }
    chosen
}

/// Columns (by index into `vars`) making the chosen rows' Jacobian invertible, chosen greedily from the last.
fn pivot_columns(rows: &[Poly], vars: &[String], pt: &HashMap<String, GQ>, prefer: &[usize]) -> Option<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::new();
    for &c in prefer {
        if chosen.len() == rows.len() {
            break;
        }
        let mut cols = chosen.clone();
        cols.push(c);
        let m = Matrix::from_fn(rows.len(), cols.len(), |r, k| rows[r].derivative(&vars[cols[k]]).eval(pt));
        if m.rank() == cols.len() {
            chosen.push(c);
        }
    }
    (chosen.len() == rows.len()).then_some(chosen)
}

/// Chart of the complexification at the diagonal point over `p`, solving for as many
/// variables as there are independent defining polynomials.
pub fn chart_at(spec: &ManifoldSpec, p: &[GQ], order: u32) -> Result<Chart> {
    let vars = spec.all_vars();
    let pt = spec.diagonal(p);
    if !spec.on_set(p) {
        return Err(CrError::PointNotOnSet);
    }
    let rows = independent_rows(&spec.rho, &vars, &pt);
    let prefer: Vec<usize> = (0..vars.len()).rev().collect();
    let cols = pivot_columns(&rows.iter().map(|&j| spec.rho[j].clone()).collect::<Vec<_>>(), &vars, &pt, &prefer)
        .ok_or_else(|| CrError::ImplicitSolve("no invertible block".into()))?;
    chart_with(spec, p, &rows, &cols, order)
}

/// Chart solving the given rows for the given columns (indices into `all_vars`).
pub fn chart_with(spec: &ManifoldSpec, p: &[GQ], rows: &[usize], cols: &[usize], order: u32) -> Result<Chart> {
    let vars = spec.all_vars();
    let pt = spec.diagonal(p);
    let center: Vec<(String, GQ)> = vars.iter().map(|v| (v.clone(), pt[v].clone())).collect();
    // translate to local displacements
    let av = ambient_vars(&spec.coords);
    let shift: HashMap<String, Poly> =
        center.iter().map(|(v, c)| (v.clone(), &Poly::var(&av, v) + &Poly::constant(&av, c.clone()))).collect();
    let eqs: Vec<Poly> = rows.iter().map(|&j| spec.rho[j].subs(&shift)).collect();
    let unknowns: Vec<String> = cols.iter().map(|&c| vars[c].clone()).collect();
    let sol = solve_implicit(&eqs, &unknowns, order)?;
    let params: Vec<String> = vars.iter().filter(|v| !unknowns.contains(v)).cloned().collect();
    let pv: VarList = std::sync::Arc::new(params.clone());
    let mut local = HashMap::new();
    for v in &params {
        local.insert(v.clone(), Poly::var(&pv, v));
    }
    for (u, s) in unknowns.iter().zip(sol.values.iter()) {
        local.insert(u.clone(), s.with_vars(&Poly::zero(&pv).union_vars(s.vars())));
    }
    Ok(Chart { center, params, local, rows: rows.to_vec(), order, exact: sol.exact })
}

/// Does `f` vanish on the complexification near the diagonal point over `p`, to the chart order?
pub fn vanishes_on_complexification(chart: &Chart, f: &Poly) -> bool {
    chart.pullback(f).is_zero()
}

/// Cofactors `a_i` of degree at most `deg_bound` with `g = Σ a_i ρ_i`, if any exist.
/// A `None` only rules out cofactors of that degree.
pub fn ideal_cofactors(g: &Poly, gens: &[Poly], deg_bound: u32) -> Option<Vec<Poly>> {
    let mut vars = g.vars().clone();
    for r in gens {
        vars = Poly::zero(&vars).union_vars(r.vars());
    }
    let g = g.with_vars(&vars);
    let gens: Vec<Poly> = gens.iter().map(|r| r.with_vars(&vars)).collect();
    let monos = crate::exactalg::poly::monomials_up_to(vars.len(), deg_bound);
    // one column per (generator, monomial), the last column carries g
    let mut cols: Vec<Poly> = Vec::new();
    for r in &gens {
        for m in &monos {
            cols.push(r * &Poly::from_terms(&vars, [(m.clone(), GQ::one())]));
        }
    }
    cols.push(g.scale(&-GQ::one()));
    let mut keys: Vec<crate::exactalg::poly::Monomial> = cols.iter().flat_map(|c| c.terms().keys().cloned()).collect();
    keys.sort();
    keys.dedup();
    let rows: Vec<Vec<GQ>> = keys.iter().map(|k| cols.iter().map(|c| c.coeff(k)).collect()).collect();
    let last = cols.len() - 1;
    let v = Matrix::from_rows(&rows).kernel().into_iter().find(|v| !v[last].is_zero())?;
    let norm = v[last].inv();
    Some(
        (0..gens.len())
            .map(|i| {
                Poly::from_terms(
                    &vars,
                    monos.iter().enumerate().map(|(j, m)| (m.clone(), &v[i * monos.len() + j] * &norm)),
                )
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointClass {
    pub on_set: bool,
    pub regular: bool,
    pub codim: usize,
    pub cr: bool,
    pub generic: bool,
    pub cr_dim: Option<usize>,
    /// Jet order at which local constancy of ranks was established.
    pub proved_at_jet_order: u32,
}

/// Every `size × size` minor of a matrix of polynomials, each truncated at `order`.
fn minors_vanish(m: &[Vec<Poly>], size: usize, order: u32) -> bool {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    if size == 0 {
        return false;
    }
    if size > rows || size > cols {
        return true;
    }
    for rs in combinations(rows, size) {
        for cs in combinations(cols, size) {
            if !det_trunc(&rs.iter().map(|&r| cs.iter().map(|&c| m[r][c].clone()).collect()).collect::<Vec<Vec<Poly>>>(), order)
                .is_zero()
            {
                return false;
            }
        }
    }
    true
}

fn det_trunc(m: &[Vec<Poly>], order: u32) -> Poly {
    let n = m.len();
    if n == 1 {
        return m[0][0].truncate(order);
    }
    let mut acc = Poly::zero(m[0][0].vars());
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let sub: Vec<Vec<Poly>> =
            (1..n).map(|r| (0..n).filter(|&k| k != c).map(|k| m[r][k].clone()).collect()).collect();
        let t = m[0][c].mul_trunc(&det_trunc(&sub, order), order);
        acc = if c % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    acc
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Pointwise classification; local constancy of ranks is checked on jets of the given order.
pub fn classify_point(spec: &ManifoldSpec, p: &[GQ], order: u32) -> Result<PointClass> {
    if !spec.on_set(p) {
        return Err(CrError::PointNotOnSet);
    }
    let vars = spec.all_vars();
    let pt = spec.diagonal(p);
    let full_rank = |rows: &[Poly], cols: &[String]| {
        Matrix::from_fn(rows.len(), cols.len(), |r, c| rows[r].derivative(&cols[c]).eval(&pt)).rank()
    };
    let r_full = full_rank(&spec.rho, &vars);
    let chart = chart_at(spec, p, order)?;
    let order = order.max(1);
    // regular: full differential rank constant and every row vanishes on the chart
    let dfull: Vec<Vec<Poly>> =
        spec.rho.iter().map(|r| vars.iter().map(|v| chart.pullback(&r.derivative(v))).collect()).collect();
    let rows_ok = spec.rho.iter().all(|r| vanishes_on_complexification(&chart, r));
    let regular = rows_ok && minors_vanish(&dfull, r_full + 1, order);
    let r_del = full_rank(&spec.rho, &spec.coords);
    let ddel: Vec<Vec<Poly>> =
        spec.rho.iter().map(|r| spec.coords.iter().map(|v| chart.pullback(&r.derivative(v))).collect()).collect();
    let cr = regular && minors_vanish(&ddel, r_del + 1, order);
    let generic = cr && r_del == r_full;
    Ok(PointClass {
        on_set: true,
        regular,
        codim: r_full,
        cr,
        generic,
        cr_dim: cr.then(|| spec.dim() - r_del),
        proved_at_jet_order: order,
    })
}

/// An exact random point of the complexification, found by fixing random values for
/// all but `d` variables in which the equations are linear and solving.
pub fn random_complex_point<R: Rng + ?Sized>(spec: &ManifoldSpec, rng: &mut R) -> Option<HashMap<String, GQ>> {
    let vars = spec.all_vars();
    let d = spec.rho.len();
    for cols in combinations(vars.len(), d).into_iter().rev() {
        let unknowns: Vec<&String> = cols.iter().map(|&c| &vars[c]).collect();
        let linear = spec.rho.iter().all(|r| {
            let idx: Vec<usize> = unknowns.iter().filter_map(|u| r.var_index(u)).collect();
            r.terms().keys().all(|m| idx.iter().map(|&k| m[k] as u32).sum::<u32>() <= 1)
        });
        if !linear {
            continue;
        }
        for _ in 0..3 {
            let mut pt: HashMap<String, GQ> = HashMap::new();
            for v in &vars {
                if !unknowns.contains(&v) {
                    pt.insert(v.clone(), random_coordinate(rng));
                }
            }
            let fixed: Vec<(String, GQ)> = pt.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
            let reduced: Vec<Poly> = spec.rho.iter().map(|r| r.eval_partial(&fixed)).collect();
            let a = Matrix::from_fn(d, d, |r, c| reduced[r].coeff_of(&[(unknowns[c].as_str(), 1)]));
            let Some(inv) = a.inverse() else { continue };
            let b: Vec<GQ> = reduced.iter().map(|r| -r.constant_term()).collect();
            for (r, u) in unknowns.iter().enumerate() {
                let mut x = GQ::zero();
                for c in 0..d {
                    x += &(inv.get(r, c) * &b[c]);
                }
                pt.insert((*u).clone(), x);
            }
            return Some(pt);
        }
    }
    None
}

/// Split a complexified point into its `Z` and `ζ` coordinate vectors.
pub fn split_point(spec: &ManifoldSpec, pt: &HashMap<String, GQ>) -> (Vec<GQ>, Vec<GQ>) {
    let z = spec.coords.iter().map(|c| pt[c].clone()).collect();
    let zeta = spec.coords.iter().map(|c| pt[&conj_name(c)].clone()).collect();
    (z, zeta)
}

/// Inverse of [`split_point`].
pub fn join_point(spec: &ManifoldSpec, z: &[GQ], zeta: &[GQ]) -> HashMap<String, GQ> {
    let mut m = HashMap::new();
    for (k, c) in spec.coords.iter().enumerate() {
        m.insert(c.clone(), z[k].clone());
        m.insert(conj_name(c), zeta[k].clone());
    }
    m
}

/// Base name for a variable, stripping one conjugation.
pub fn base_name(v: &str) -> &str {
    unconj_name(v).unwrap_or(v)
}
