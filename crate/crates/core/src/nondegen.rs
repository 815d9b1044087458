//! Holomorphic nondegeneracy: the vectors `V_{jα}`, k-nondegeneracy, the Levi number,
//! polynomial degeneracy witnesses and essential finiteness.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::exactalg::linalg::Matrix;
use crate::exactalg::poly::{deg, monomials_up_to};
use crate::exactalg::rank::{local_rank, random_coordinate};
use crate::exactalg::resultant::{resultant, univariate_gcd};
use crate::exactalg::{var_list, Monomial, Poly, VarList, GQ};
use crate::normalform::{q_alpha, NormalModel};

pub const DEFAULT_DEGREE_BOUND: u32 = 4;
pub const DEFAULT_ALPHA_BOUND: u32 = 6;
pub const DEFAULT_TRIALS: usize = 3;

/// Holomorphic vector field `Σ a_j ∂/∂v_j` over the named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldSpec {
    pub names: Vec<String>,
    pub coeffs: Vec<Poly>,
    pub frame: String,
}

impl VectorFieldSpec {
    pub fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

impl fmt::Display for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .names
            .iter()
            .zip(self.coeffs.iter())
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| if c.is_one() { format!("d/d{}", v) } else { format!("({})*d/d{}", c, v) })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

trait IsOne {
    fn is_one(&self) -> bool;
}

impl IsOne for Poly {
    fn is_one(&self) -> bool {
        self.is_constant() && self.constant_term().is_one()
    }
}

/// `L_j = ∂/∂χ_j + Σ_k ∂Q̄_k/∂χ_j (χ, z, w) ∂/∂τ_k` over the variables `(z, w, χ, τ)`.
pub fn cr_basis(m: &NormalModel) -> Vec<VectorFieldSpec> {
    let mut names = m.coords();
    names.extend(m.chi());
    names.extend(m.tau());
    let vars = var_list(&names);
    let (n, big_n) = (m.n(), m.big_n());
    let qbar = m.qbar();
    let chi = m.chi();
    (0..n)
        .map(|j| {
            let mut coeffs = vec![Poly::zero(&vars); 2 * big_n];
            coeffs[big_n + j] = Poly::one(&vars);
            for (k, qb) in qbar.iter().enumerate() {
                coeffs[big_n + n + k] = qb.derivative(&chi[j]).with_vars(&vars);
            }
            VectorFieldSpec { names: names.clone(), coeffs, frame: "model".into() }
        })
        .collect()
}

/// Multi-indices of length `n` and size at most `k`.
fn alphas(n: usize, k: u32) -> Vec<Monomial> {
    monomials_up_to(n, k)
}

/// `V_{jα} = −∇_Z ∂^α_χ Q̄_j(χ, z, w)` as polynomials in `(z, χ, w)`, for `|α| ≤ k`.
fn v_polys(m: &NormalModel, k: u32) -> Vec<(usize, Monomial, Vec<Poly>)> {
    let coords = m.coords();
    let chi = m.chi();
    let mut out = Vec::new();
    for alpha in alphas(m.n(), k) {
        for (j, qb) in m.qbar().iter().enumerate() {
            let spec: Vec<(&str, u16)> = chi.iter().zip(alpha.iter()).map(|(c, &a)| (c.as_str(), a)).collect();
            let da = qb.derivative_multi(&spec);
            let grad: Vec<Poly> = coords.iter().map(|v| -&da.derivative(v)).collect();
            out.push((j, alpha.clone(), grad));
        }
    }
    out
}

/// All `V_{jα}` at the origin for `|α| ≤ k`.
pub fn v_vectors(m: &NormalModel, k: u32) -> Vec<(usize, Monomial, Vec<GQ>)> {
    let zero = HashMap::new();
    v_polys(m, k).into_iter().map(|(j, a, g)| (j, a, g.iter().map(|p| p.eval(&zero)).collect())).collect()
}

fn span_rank(vs: &[Vec<GQ>]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    Matrix::from_rows(vs).rank()
}

/// Least `k ≤ kmax` for which the `V_{jα}(0)`, `|α| ≤ k`, span `C^N`.
pub fn k_nondeg_order(m: &NormalModel, kmax: u32) -> Option<u32> {
    let all = v_vectors(m, kmax);
    (0..=kmax).find(|&k| {
        let vs: Vec<Vec<GQ>> = all.iter().filter(|(_, a, _)| deg(a) <= k).map(|(_, _, v)| v.clone()).collect();
        span_rank(&vs) == m.big_n()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LeviNumber {
    Finite(u32),
    Degenerate,
}

/// Ranks of the spans `{V_{jα} : |α| ≤ k}`, `k = 0..=kmax`, at a generic point of the
/// complexification. Exact models are sampled at random exact points `(z, χ, τ)`,
/// `w = Q(z, χ, τ)`; jets along a random line through the origin, in the ring of
/// truncated power series.
fn generic_span_ranks<R: Rng + ?Sized>(m: &NormalModel, kmax: u32, rng: &mut R) -> Vec<usize> {
    let polys = v_polys(m, kmax);
    let mut out = Vec::new();
    match m.order() {
        None => {
            let mut pt: HashMap<String, GQ> = HashMap::new();
            for v in m.z.iter().chain(m.chi().iter()).chain(m.tau().iter()) {
                pt.insert(v.clone(), random_coordinate(rng));
            }
            for (w, q) in m.w.iter().zip(m.q.iter()) {
                let val = q.eval(&pt);
                pt.insert(w.clone(), val);
            }
            for k in 0..=kmax {
                let vs: Vec<Vec<GQ>> = polys
                    .iter()
                    .filter(|(_, a, _)| deg(a) <= k)
                    .map(|(_, _, g)| g.iter().map(|p| p.eval(&pt)).collect())
                    .collect();
                out.push(span_rank(&vs));
            }
        }
        Some(o) => {
            let tv: VarList = var_list(&["t"]);
            let t = Poly::var(&tv, "t");
            let mut line: HashMap<String, Poly> = HashMap::new();
            for v in m.z.iter().chain(m.chi().iter()).chain(m.tau().iter()) {
                line.insert(v.clone(), t.scale(&random_coordinate(rng)));
            }
            for (w, q) in m.w.iter().zip(m.q.iter()) {
                line.insert(w.clone(), q.subs_trunc(&line, o));
            }
            // one substitution per entry, shared by every k
            let series: Vec<(u32, Vec<Poly>)> = polys
                .iter()
                .map(|(_, a, g)| (deg(a), g.iter().map(|p| p.subs_trunc(&line, o)).collect()))
                .collect();
            for k in 0..=kmax {
                if out.last() == Some(&m.big_n()) {
                    out.push(m.big_n());
                    continue;
                }
                // entries lose |α| + 1 orders of precision
                let prec = o.saturating_sub(k + 1) as usize;
                let rows: Vec<Vec<Vec<GQ>>> = series
                    .iter()
                    .filter(|(d, _)| *d <= k)
                    .map(|(_, g)| {
                        g.iter().map(|s| (0..prec).map(|e| s.coeff_of(&[("t", e as u16)])).collect()).collect()
                    })
                    .collect();
                out.push(if rows.is_empty() || prec == 0 { 0 } else { local_rank(rows, prec) });
            }
        }
    }
    out
}

/// Levi number: least `ℓ ≤ N − d` with `ℓ`-nondegeneracy at a generic point, taking the
/// best span over `trials` samples. A totally real manifold (`n = 0`) has `ℓ = 0`.
pub fn levi_number<R: Rng + ?Sized>(m: &NormalModel, trials: usize, rng: &mut R) -> LeviNumber {
    let kmax = m.n() as u32;
    let mut best = vec![0usize; kmax as usize + 1];
    let lo = if m.n() == 0 { 0 } else { 1 };
    for _ in 0..trials.max(1) {
        for (b, r) in best.iter_mut().zip(generic_span_ranks(m, kmax, rng)) {
            *b = (*b).max(r);
        }
        if best[lo as usize] == m.big_n() {
            break;
        }
    }
    match (lo..=kmax).find(|&k| best[k as usize] == m.big_n()) {
        Some(k) => LeviNumber::Finite(k),
        None => LeviNumber::Degenerate,
    }
}

/// A polynomial `X = Σ a_j(z, w) ∂/∂z_j` with `Σ_j a_j q_{α, z_j} ≡ 0` for all `|α| ≤ alpha_bound`,
/// coefficients of degree at most `degree_bound`. For a jet model the identities are
/// imposed to the order the jet determines. Prefers the lowest-degree solution.
pub fn degeneracy_witness(m: &NormalModel, degree_bound: u32, alpha_bound: u32) -> Option<VectorFieldSpec> {
    let n = m.n();
    if n == 0 {
        return None;
    }
    let coords = m.coords();
    let cv = var_list(&coords);
    let alpha_bound = match m.order() {
        Some(o) => alpha_bound.min(o.saturating_sub(1)),
        None => alpha_bound,
    };
    let monos = monomials_up_to(coords.len(), degree_bound);
    // columns: highest degree first so that free columns favour low degree
    let mut cols: Vec<(usize, Monomial)> = Vec::new();
    for mono in &monos {
        for j in 0..n {
            cols.push((j, mono.clone()));
        }
    }
    cols.sort_by(|a, b| (deg(&b.1), b.0, &b.1).cmp(&(deg(&a.1), a.0, &a.1)));
    let qa = q_alpha(m, alpha_bound);
    let mut rows: Vec<Vec<GQ>> = Vec::new();
    for (alpha, comps) in &qa {
        if deg(alpha) == 0 {
            continue;
        }
        let cap = m.order().map(|o| o.saturating_sub(deg(alpha) + 1));
        for comp in comps {
            let c = comp.with_vars(&Poly::zero(&cv).union_vars(comp.vars())).with_vars(&cv);
            let dz: Vec<Poly> = m.z.iter().map(|z| c.derivative(z)).collect();
            if dz.iter().all(|p| p.is_zero()) {
                continue;
            }
            // coefficient of each product monomial, as a linear form in the unknowns
            let mut eqs: HashMap<Monomial, Vec<GQ>> = HashMap::new();
            for (ci, (j, mono)) in cols.iter().enumerate() {
                for (m2, v) in dz[*j].terms() {
                    let prod: Monomial = mono.iter().zip(m2.iter()).map(|(a, b)| a + b).collect();
                    if cap.map_or(false, |c| deg(&prod) > c) {
                        continue;
                    }
                    let row = eqs.entry(prod).or_insert_with(|| vec![GQ::zero(); cols.len()]);
                    row[ci] = &row[ci] + v;
                }
            }
            let mut keys: Vec<&Monomial> = eqs.keys().collect();
            keys.sort();
            rows.extend(keys.into_iter().map(|k| eqs[k].clone()));
        }
    }
    let kernel = if rows.is_empty() {
        (0..cols.len()).map(|c| (0..cols.len()).map(|i| if i == c { GQ::one() } else { GQ::zero() }).collect()).collect()
    } else {
        Matrix::from_rows(&rows).kernel()
    };
    // the free column of lowest degree gives the simplest witness
    let lead = |v: &Vec<GQ>| (0..cols.len()).rev().find(|&i| !v[i].is_zero()).map(|i| (deg(&cols[i].1), cols[i].0));
    let best = kernel.into_iter().min_by_key(|v| lead(v))?;
    let (li, _) = (0..cols.len()).rev().map(|i| (i, &best[i])).find(|(_, c)| !c.is_zero())?;
    let norm = best[li].inv();
    let mut coeffs = vec![Poly::zero(&cv); n];
    for (i, (j, mono)) in cols.iter().enumerate() {
        if !best[i].is_zero() {
            coeffs[*j] = &coeffs[*j] + &Poly::from_terms(&cv, [(mono.clone(), &best[i] * &norm)]);
        }
    }
    let mut full = coeffs;
    full.extend((0..m.d()).map(|_| Poly::zero(&cv)));
    Some(VectorFieldSpec { names: coords, coeffs: full, frame: "model".into() })
}

/// `X(τ_k − Q̄_k(χ, z, w)) = −Σ_j a_j ∂Q̄_k/∂z_j`, which must vanish identically on the
/// complexification (coordinates `z, χ, w`); for jets, to the order they determine.
pub fn witness_residuals(m: &NormalModel, x: &VectorFieldSpec) -> Vec<Poly> {
    m.qbar()
        .iter()
        .map(|qb| {
            let mut acc = Poly::zero(qb.vars());
            for (name, a) in x.names.iter().zip(x.coeffs.iter()) {
                if a.is_zero() {
                    continue;
                }
                acc = &acc + &(a * &qb.derivative(name));
            }
            match m.order() {
                Some(o) => acc.truncate(o.saturating_sub(1)),
                None => acc,
            }
        })
        .collect()
}

pub fn witness_is_tangent(m: &NormalModel, x: &VectorFieldSpec) -> bool {
    !x.is_trivial() && witness_residuals(m, x).iter().all(|r| r.is_zero())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "answer", rename_all = "lowercase")]
pub enum Finiteness {
    Yes { certificate: String },
    No { certificate: String },
    Undetermined { alpha_bound: u32 },
}

impl Finiteness {
    pub fn is_yes(&self) -> bool {
        matches!(self, Finiteness::Yes { .. })
    }
}

/// Coefficients `c_α(z)` of `Q(z, χ, 0) = Σ c_α(z) χ^α`, `|α| ≤ alpha_bound`, all components.
fn finiteness_family(m: &NormalModel, alpha_bound: u32) -> Vec<Poly> {
    let zv = var_list(&m.z);
    let zero_tau: Vec<(String, GQ)> = m.tau().into_iter().map(|t| (t, GQ::zero())).collect();
    let mut out = Vec::new();
    for q in &m.q {
        let q0 = q.eval_partial(&zero_tau);
        for (alpha, c) in q0.coefficients_in(&m.chi()) {
            if deg(&alpha) == 0 || deg(&alpha) > alpha_bound {
                continue;
            }
            let c = c.with_vars(&Poly::zero(&zv).union_vars(c.vars())).with_vars(&zv);
            if !c.is_zero() {
                out.push(c);
            }
        }
    }
    out
}

/// Lowest-degree homogeneous part.
fn initial_form(p: &Poly) -> Poly {
    match p.min_degree() {
        Some(k) => p.homogeneous_part(k),
        None => p.clone(),
    }
}

/// Whether elimination of all variables but `keep` reaches a nonzero polynomial in `keep` alone.
fn projects_finitely(family: &[Poly], vars: &[String], keep: &str) -> bool {
    const CAP: usize = 8;
    let mut fam: Vec<Poly> = family.iter().filter(|p| !p.is_zero()).take(CAP).cloned().collect();
    for v in vars.iter().filter(|v| *v != keep) {
        let (with, without): (Vec<Poly>, Vec<Poly>) = fam.into_iter().partition(|p| p.depends_on(v));
        let mut next = without;
        for a in 0..with.len() {
            for b in a + 1..with.len() {
                if let Ok(r) = resultant(&with[a], &with[b], v) {
                    if !r.is_zero() {
                        next.push(r);
                    }
                }
            }
        }
        next.truncate(CAP);
        fam = next;
    }
    fam.iter().any(|p| !p.is_zero() && vars.iter().all(|v| v == keep || !p.depends_on(v)))
}

/// Test lines through the origin in directions `e_i`, `e_i ± e_j`, `e_i ± i e_j`.
fn vanishing_line(family: &[Poly], vars: &[String], order: Option<u32>) -> Option<String> {
    let n = vars.len();
    let mut dirs: Vec<Vec<GQ>> = Vec::new();
    for i in 0..n {
        let mut e = vec![GQ::zero(); n];
        e[i] = GQ::one();
        dirs.push(e);
        for j in i + 1..n {
            for c in [GQ::one(), -GQ::one(), GQ::i(), -GQ::i()] {
                let mut e = vec![GQ::zero(); n];
                e[i] = GQ::one();
                e[j] = c;
                dirs.push(e);
            }
        }
    }
    let tv = var_list(&["t"]);
    let t = Poly::var(&tv, "t");
    for dir in dirs {
        let map: HashMap<String, Poly> = vars.iter().cloned().zip(dir.iter().map(|c| t.scale(c))).collect();
        let vanish = family.iter().all(|f| {
            let r = f.subs(&map);
            match order {
                Some(o) => r.truncate(o).is_zero(),
                None => r.is_zero(),
            }
        });
        if vanish {
            let desc: Vec<String> = dir.iter().map(|c| c.to_string()).collect();
            return Some(format!("all coefficients vanish on the line through 0 with direction ({})", desc.join(", ")));
        }
    }
    None
}

/// Whether `{z : Q(z, χ, 0) = 0 for all χ}` is `{0}` near the origin.
pub fn essentially_finite(m: &NormalModel, alpha_bound: u32) -> Finiteness {
    let n = m.n();
    if n == 0 {
        return Finiteness::Yes { certificate: "no z variables".into() };
    }
    let family = finiteness_family(m, alpha_bound);
    if family.is_empty() {
        return Finiteness::No { certificate: "Q(z, χ, 0) = 0 identically".into() };
    }
    if n == 1 {
        let z = &m.z[0];
        let g = family.iter().fold(Poly::zero(family[0].vars()), |acc, p| univariate_gcd(&acc, p, z));
        // a nonzero function of one variable has an isolated zero
        return Finiteness::Yes { certificate: format!("gcd of coefficients = {}", g) };
    }
    let exact = m.is_exact();
    let fam: Vec<Poly> = if exact { family.clone() } else { family.iter().map(initial_form).collect() };
    if m.z.iter().all(|v| projects_finitely(&fam, &m.z, v)) {
        let how = if exact { "coefficients" } else { "initial forms of coefficients" };
        return Finiteness::Yes { certificate: format!("elimination of the {} bounds every coordinate", how) };
    }
    if let Some(line) = vanishing_line(&family, &m.z, m.order()) {
        return Finiteness::No { certificate: line };
    }
    Finiteness::Undetermined { alpha_bound }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NondegReport {
    pub k_order: Option<u32>,
    pub levi_number: LeviNumber,
    pub essentially_finite: Finiteness,
    pub witness: Option<VectorFieldSpec>,
}

pub fn nondeg_report<R: Rng + ?Sized>(
    m: &NormalModel,
    degree_bound: u32,
    alpha_bound: u32,
    trials: usize,
    rng: &mut R,
) -> NondegReport {
    NondegReport {
        k_order: k_nondeg_order(m, m.n() as u32),
        levi_number: levi_number(m, trials, rng),
        essentially_finite: essentially_finite(m, alpha_bound),
        witness: degeneracy_witness(m, degree_bound, alpha_bound),
    }
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

    fn flat() -> NormalModel {
        let v = var_list(&["z", "conj(z)"]);
        from_rigid("flat", &["z"], &["w"], &[Poly::zero(&v)]).unwrap()
    }

    fn model(name: &str) -> NormalModel {
        let s = corpus::manifold(name).unwrap();
        solve_normal(&s, &s.basepoint_or_origin(), 8).unwrap()
    }

    fn gq(re: i64, im: i64) -> GQ {
        GQ::from_ints(re, im)
    }

    #[test]
    fn lewy_basis_and_vectors() {
        let m = lewy();
        let l = &cr_basis(&m)[0];
        let v = l.coeffs[0].vars().clone();
        // Q̄ = w − 2iχz, so the τ slot carries −2iz
        assert_eq!(l.coeffs[3], Poly::var(&v, "z").scale(&gq(0, -2)));
        let vs = v_vectors(&m, 1);
        assert_eq!(vs[0].2, vec![gq(0, 0), gq(-1, 0)]);
        assert_eq!(vs[1].2, vec![gq(0, 2), gq(0, 0)]);
        assert_eq!(k_nondeg_order(&m, 3), Some(1));
    }

    #[test]
    fn flat_is_degenerate() {
        let m = flat();
        assert_eq!(k_nondeg_order(&m, 4), None);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(levi_number(&m, 3, &mut rng), LeviNumber::Degenerate);
        let w = degeneracy_witness(&m, 2, 4).unwrap();
        assert!(witness_is_tangent(&m, &w));
    }

    #[test]
    fn ex223_spans_at_one() {
        let m = model("ex223");
        // V_{1,0}, V_{2,0} give the w directions and V_{1,1} = (2i, 0, 0) the z direction
        assert_eq!(k_nondeg_order(&m, 3), Some(1));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(levi_number(&m, 3, &mut rng), LeviNumber::Finite(1));
    }

    #[test]
    fn degen3_witness() {
        let m = model("degen3");
        let x = degeneracy_witness(&m, 4, 6).unwrap();
        let v = x.coeffs[0].vars().clone();
        assert_eq!(x.coeffs[0], Poly::zero(&v));
        assert_eq!(x.coeffs[1], Poly::one(&v));
        assert!(witness_is_tangent(&m, &x));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(levi_number(&m, 3, &mut rng), LeviNumber::Degenerate);
        assert!(matches!(essentially_finite(&m, 6), Finiteness::No { .. }));
    }

    #[test]
    fn lewy_has_no_witness() {
        assert_eq!(degeneracy_witness(&lewy(), 4, 6), None);
        assert!(essentially_finite(&lewy(), 6).is_yes());
    }

    #[test]
    fn ex223_essentially_finite() {
        assert!(essentially_finite(&model("ex223"), 6).is_yes());
    }
}
