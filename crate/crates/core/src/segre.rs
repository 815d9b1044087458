//! Segre-set chains of a manifold in normal coordinates.
//!
//! Level `j` is parametrized by `(x_0, …, x_{j-1})`, each block of size `n`, through
//! `Z = (x_0, v^j)` with `v^1 = 0` and `v^{j+1}(x_0, …, x_j) = Q(x_0, x_1, v̄^j(x_1, …, x_j))`,
//! where `v̄^j` has conjugated coefficients. Unwinding the recursion gives the alternating
//! parametrizations of the odd and even Segre sets.

use std::collections::HashMap;

use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::error::{CrError, Result};
use crate::exactalg::rank::{generic_rank, jet_rank};
use crate::exactalg::resultant::{resultant, univariate_gcd};
use crate::exactalg::{var_list, Poly, VarList, GQ};
use crate::normalform::NormalModel;

#[derive(Clone, Debug, PartialEq)]
pub struct SegreLevel {
    pub j: usize,
    /// Parameter names, block `x_0` first. `x_0` reuses the model's `z` names.
    pub params: Vec<String>,
    /// `v^j` as polynomials in `params` (truncated when the model is).
    pub v: Vec<Poly>,
    pub dim: usize,
}

impl SegreLevel {
    /// The full map `Λ ↦ (x_0, v^j(Λ))`.
    pub fn components(&self, m: &NormalModel) -> Vec<Poly> {
        let vars = self.vars();
        let mut out: Vec<Poly> = m.z.iter().map(|z| Poly::var(&vars, z)).collect();
        out.extend(self.v.iter().map(|p| p.with_vars(&Poly::zero(&vars).union_vars(p.vars()))));
        out
    }

    fn vars(&self) -> VarList {
        var_list(&self.params)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegreChain {
    pub n: usize,
    pub d: usize,
    pub levels: Vec<SegreLevel>,
    pub dims: Vec<usize>,
    pub j0: usize,
    pub orbit_dim: usize,
    /// Truncation order the dimensions were computed at, if the model is a jet.
    pub order: Option<u32>,
}

impl SegreChain {
    pub fn minimal(&self) -> bool {
        self.orbit_dim == self.n + self.d
    }
}

/// Names of the parameter block `k` (`k ≥ 1`).
fn block_names(m: &NormalModel, k: usize) -> Vec<String> {
    let taken: Vec<String> = m.coords();
    let mut prefix = "s".to_string();
    while taken.iter().any(|c| c.starts_with(&prefix)) {
        prefix.insert(0, '_');
    }
    if m.n() == 1 {
        vec![format!("{}{}", prefix, k)]
    } else {
        (1..=m.n()).map(|i| format!("{}{}_{}", prefix, k, i)).collect()
    }
}

fn level_params(m: &NormalModel, j: usize) -> Vec<String> {
    let mut params = Vec::new();
    if j == 0 {
        return params;
    }
    params.extend(m.z.iter().cloned());
    for k in 1..j {
        params.extend(block_names(m, k));
    }
    params
}

/// `v^j` on the parameter blocks `(b_0, …, b_{j-1})`.
fn segre_v(m: &NormalModel, blocks: &[Vec<String>]) -> Vec<Poly> {
    let names: Vec<String> = blocks.iter().flatten().cloned().collect();
    let vars = var_list(&names);
    let j = blocks.len();
    if j <= 1 {
        return vec![Poly::zero(&vars); m.d()];
    }
    let inner = segre_v(m, &blocks[1..]);
    let mut map: HashMap<String, Poly> = HashMap::new();
    for (z, b) in m.z.iter().zip(blocks[0].iter()) {
        map.insert(z.clone(), Poly::var(&vars, b));
    }
    for (chi, b) in m.chi().iter().zip(blocks[1].iter()) {
        map.insert(chi.clone(), Poly::var(&vars, b));
    }
    for (tau, v) in m.tau().iter().zip(inner.iter()) {
        map.insert(tau.clone(), v.bar());
    }
    m.q.iter()
        .map(|q| {
            let r = match m.order() {
                None => q.subs(&map),
                Some(o) => q.subs_trunc(&map, o),
            };
            r.with_vars(&Poly::zero(&vars).union_vars(r.vars()))
        })
        .collect()
}

/// Parametrization of the Segre set `N_j`.
pub fn segre_param(m: &NormalModel, j: usize) -> SegreLevel {
    let params = level_params(m, j);
    let blocks: Vec<Vec<String>> = (0..j).map(|k| if k == 0 { m.z.clone() } else { block_names(m, k) }).collect();
    let v = segre_v(m, &blocks);
    let vars = var_list(&params);
    let v = v.into_iter().map(|p| p.with_vars(&Poly::zero(&vars).union_vars(p.vars()))).collect();
    SegreLevel { j, params, v, dim: 0 }
}

fn level_rank<R: Rng + ?Sized>(m: &NormalModel, level: &SegreLevel, rng: &mut R) -> usize {
    if level.j == 0 {
        return 0;
    }
    let comps = level.components(m);
    match m.order() {
        None => generic_rank(&comps, &level.params, rng),
        Some(o) => jet_rank(&comps, &level.params, o, rng),
    }
}

/// Dimensions `d_j` up to one level past stabilization (depth capped at `d + 2`).
pub fn segre_dims<R: Rng + ?Sized>(m: &NormalModel, rng: &mut R) -> SegreChain {
    let cap = m.d() + 2;
    let mut levels: Vec<SegreLevel> = Vec::new();
    let mut dims: Vec<usize> = Vec::new();
    for j in 0..=cap {
        let mut level = segre_param(m, j);
        level.dim = level_rank(m, &level, rng);
        dims.push(level.dim);
        levels.push(level);
        if j >= 2 && dims[j] == dims[j - 1] {
            break;
        }
    }
    // last strict increase, at least 1
    let mut j0 = 1;
    for j in 1..dims.len() {
        if dims[j] > dims[j - 1] {
            j0 = j;
        } else {
            break;
        }
    }
    let orbit_dim = dims[j0.min(dims.len() - 1)];
    SegreChain { n: m.n(), d: m.d(), levels, dims, j0, orbit_dim, order: m.order() }
}

pub fn minimal_via_segre<R: Rng + ?Sized>(m: &NormalModel, rng: &mut R) -> bool {
    segre_dims(m, rng).minimal()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Implicit {
    /// Defining polynomials in the model coordinates; empty when `N_j` is dense.
    Equations { equations: Vec<String> },
    Skipped { reason: String },
}

/// Eliminate the chain parameters of level `j` by iterated resultants (`n = 1`, exact `Q`).
/// Returns polynomials in the model coordinates `(z, w)`.
pub fn implicitize_polys(m: &NormalModel, j: usize) -> Result<Option<Vec<Poly>>> {
    if m.n() != 1 || !m.is_exact() || j == 0 {
        return Ok(None);
    }
    let level = segre_param(m, j);
    let mut names = m.coords();
    names.extend(level.params.iter().filter(|p| !m.z.contains(p)).cloned());
    let vars = var_list(&names);
    let mut eqs: Vec<Poly> = m
        .w
        .iter()
        .zip(level.v.iter())
        .map(|(w, v)| &Poly::var(&vars, w) - &v.with_vars(&Poly::zero(&vars).union_vars(v.vars())))
        .collect();
    for p in level.params.iter().filter(|p| !m.z.contains(p)) {
        let (with, without): (Vec<Poly>, Vec<Poly>) = eqs.into_iter().partition(|e| e.depends_on(p));
        eqs = without;
        let Some(pivot_idx) = (0..with.len()).min_by_key(|&k| (with[k].degree_in(p), with[k].nterms())) else {
            continue;
        };
        let pivot = &with[pivot_idx];
        for (k, e) in with.iter().enumerate() {
            if k == pivot_idx {
                continue;
            }
            let r = resultant(pivot, e, p)?;
            if r.is_zero() {
                return Err(CrError::ResultantVanished(format!("{} and {} share a factor in {}", pivot, e, p)));
            }
            eqs.push(r);
        }
    }
    let coords = m.coords();
    let mut out: Vec<Poly> = Vec::new();
    for e in eqs {
        if let Some(c) = clean_equation(&e, &m.z[0], &coords) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    Ok(Some(out))
}

/// Strip factors depending only on `z` (the discriminant locus off which the chain is a
/// graph) and normalize the leading coefficient to 1.
fn clean_equation(e: &Poly, z: &str, coords: &[String]) -> Option<Poly> {
    let cv = var_list(coords);
    let e = e.with_vars(&cv);
    if e.is_zero() {
        return None;
    }
    let others: Vec<String> = coords.iter().filter(|c| *c != z).cloned().collect();
    let parts = e.coefficients_in(&others);
    let mut g: Option<Poly> = None;
    for c in parts.values() {
        g = Some(match g {
            None => c.clone(),
            Some(acc) => univariate_gcd(&acc, c, z),
        });
    }
    let g = g?;
    let mut e = if g.is_constant() { e } else { e.div_exact(&g).unwrap_or(e) };
    // a pure function of z carries no information off the discriminant locus
    if others.iter().all(|v| !e.depends_on(v)) {
        return None;
    }
    // graph form w_k = f(…): unit coefficient on the last coordinate occurring as a bare linear term
    let lead = coords
        .iter()
        .rev()
        .map(|c| e.coeff_of(&[(c.as_str(), 1)]))
        .find(|c| !c.is_zero())
        .or_else(|| e.terms().iter().next_back().map(|(_, c)| c.clone()))?;
    e = e.scale(&lead.inv());
    Some(e)
}

pub fn implicitize(m: &NormalModel, j: usize) -> Result<Implicit> {
    if m.n() != 1 {
        return Ok(Implicit::Skipped { reason: format!("CR dimension {} (elimination implemented for n = 1)", m.n()) });
    }
    if !m.is_exact() {
        return Ok(Implicit::Skipped { reason: "truncated model".into() });
    }
    match implicitize_polys(m, j)? {
        Some(eqs) => Ok(Implicit::Equations { equations: eqs.iter().map(|e| e.to_string()).collect() }),
        None => Ok(Implicit::Skipped { reason: "level 0".into() }),
    }
}

/// Whether `N_j ⊂ N_{j+1}` at a parameter value: `v^{j+1}(x_0, …, x_{j-1}, 0) = v^j(x_0, …, x_{j-1})`.
pub fn inclusion_holds_at(m: &NormalModel, j: usize, values: &HashMap<String, GQ>) -> bool {
    let lo = segre_param(m, j);
    let hi = segre_param(m, j + 1);
    let mut pt = values.clone();
    for p in &hi.params {
        pt.entry(p.clone()).or_insert_with(GQ::zero);
    }
    lo.v.iter().zip(hi.v.iter()).all(|(a, b)| a.eval(&pt) == b.eval(&pt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::normalform::{from_rigid, solve_normal};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lewy() -> NormalModel {
        let v = var_list(&["z", "conj(z)"]);
        from_rigid("lewy", &["z"], &["w"], &[&Poly::var(&v, "z") * &Poly::var(&v, "conj(z)")]).unwrap()
    }

    fn model(name: &str) -> NormalModel {
        let s = corpus::manifold(name).unwrap();
        solve_normal(&s, &s.basepoint_or_origin(), 8).unwrap()
    }

    #[test]
    fn lewy_levels() {
        let m = lewy();
        let l1 = segre_param(&m, 1);
        assert!(l1.v[0].is_zero());
        let l2 = segre_param(&m, 2);
        let vars = var_list(&l2.params);
        let expect = (&Poly::var(&vars, "z") * &Poly::var(&vars, "s1")).scale(&GQ::from_ints(0, 2));
        assert_eq!(l2.v[0], expect);
    }

    #[test]
    fn ex223_level_two_and_dims() {
        let m = model("ex223");
        let l2 = segre_param(&m, 2);
        let vars = var_list(&l2.params);
        let z = Poly::var(&vars, "z");
        let s = Poly::var(&vars, "s1");
        assert_eq!(l2.v[0], (&z * &s).scale(&GQ::from_ints(0, 2)));
        assert_eq!(l2.v[1], (&z * &s).pow(2).scale(&GQ::from_ints(0, 2)));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = segre_dims(&m, &mut rng);
        assert_eq!(&c.dims[..4], &[0, 1, 2, 3]);
        assert_eq!(c.j0, 3);
        assert!(c.minimal());
    }

    #[test]
    fn ex224_not_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = segre_dims(&model("ex224"), &mut rng);
        assert_eq!(c.dims, vec![0, 1, 2, 2]);
        assert_eq!(c.j0, 2);
        assert!(!c.minimal());
    }

    #[test]
    fn rline_has_trivial_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = segre_dims(&model("rline"), &mut rng);
        assert_eq!(c.dims[..2], [0, 0]);
        assert_eq!(c.j0, 1);
        assert_eq!(c.orbit_dim, 0);
    }

    #[test]
    fn implicit_ex223() {
        let m = model("ex223");
        let eqs = implicitize_polys(&m, 2).unwrap().unwrap();
        let v = var_list(&m.coords());
        let w1 = Poly::var(&v, "w1");
        let w2 = Poly::var(&v, "w2");
        // independent check: w2 = -i w1^2 / 2 on the level-2 image
        let expect = &w2 + &w1.pow(2).scale(&GQ::new(crate::exactalg::rat(0, 1), crate::exactalg::rat(1, 2)));
        assert_eq!(eqs, vec![expect]);
    }

    #[test]
    fn implicit_lewy_is_dense() {
        assert_eq!(implicitize_polys(&lewy(), 2).unwrap().unwrap(), vec![]);
    }

    #[test]
    fn implicit_ex315() {
        let m = model("ex315");
        let eqs = implicitize_polys(&m, 2).unwrap().unwrap();
        let v = var_list(&m.coords());
        assert!(eqs.contains(&Poly::var(&v, "w2")));
        assert!(eqs.contains(&Poly::var(&v, "w3")));
        assert_eq!(eqs.len(), 2);
    }

    #[test]
    fn chain_inclusions() {
        let m = model("ex223");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for j in 1..4 {
            let l = segre_param(&m, j);
            let pt: HashMap<String, GQ> = l.params.iter().map(|p| (p.clone(), GQ::random_small(&mut rng))).collect();
            assert!(inclusion_holds_at(&m, j, &pt));
        }
    }
}
