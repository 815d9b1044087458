//! Weighted homogeneous models in triangular form, the finite-type condition on their
//! projections, extraction of the homogeneous part by scaling, real-valued holomorphic
//! polynomials on a set, and nonalgebraic self-maps built from them.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::dsl::Expr;
use crate::error::{CrError, Result};
use crate::exactalg::expseries::ExpSeries;
use crate::exactalg::linalg::Matrix;
use crate::exactalg::poly::{deg, monomials_up_to};
use crate::exactalg::weights::{weighted_part, WeightVector};
use crate::exactalg::{rat, var_list, Poly, GQ};
use crate::finitetype::{hormander, TypeVerdict};
use crate::geometry::{ambient_vars, chart_at, ManifoldSpec};
use crate::mapcheck::{jacobian_invertible_at, verify_map, verify_series_map, MapCheck, MapSpec};
use crate::normalform::{solve_normal, ModelKind, NormalModel};
use crate::segre::minimal_via_segre;

/// Default series order for exponential maps.
pub const DEFAULT_EXP_ORDER: u32 = 10;
/// Default degree bound for the real-witness ansatz.
pub const DEFAULT_WITNESS_DEGREE: u32 = 4;

/// A normal model `w_j = τ_j + q_j(z, χ, τ_1, …, τ_{j−1})` with each `q_j` weighted
/// homogeneous of the weight of `w_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousModel {
    pub base: NormalModel,
    pub weights: WeightVector,
    /// Index of the last row with `q_j ≢ 0`.
    pub r: usize,
    /// Weights `m_1, …, m_d` of the `w` coordinates.
    pub degrees: Vec<u32>,
}

impl HomogeneousModel {
    /// `q_j = Q_j − τ_j`.
    pub fn q_part(&self, j: usize) -> Poly {
        let m = &self.base;
        &m.q[j] - &Poly::var(&m.q_vars(), &m.tau()[j])
    }

    /// The projection onto `(z, w_1, …, w_{j−1})`, a model of codimension `j − 1`.
    pub fn projection(&self, j: usize) -> NormalModel {
        let m = &self.base;
        let mut p = NormalModel {
            name: format!("{}^{}", m.name, j),
            z: m.z.clone(),
            w: m.w[..j - 1].to_vec(),
            q: vec![],
            kind: m.kind,
            frame: None,
        };
        let vars = p.q_vars();
        p.q = m.q[..j - 1].iter().map(|q| q.drop_unused().with_vars(&Poly::zero(&vars).union_vars(q.drop_unused().vars())).with_vars(&vars)).collect();
        p
    }
}

fn weight_of_w(w: &WeightVector, name: &str) -> Result<u32> {
    if !w.names.iter().any(|n| n == name) {
        return Err(CrError::NotHomogeneous(format!("no weight given for {}", name)));
    }
    Ok(w.weight_of(name))
}

/// Checks the triangular shape and the weighted homogeneity of every row. Truncated
/// models are accepted; terms beyond their order are not examined.
pub fn check_homogeneous(m: &NormalModel, w: &WeightVector) -> Result<HomogeneousModel> {
    for z in &m.z {
        if w.names.iter().any(|n| n == z) && w.weight_of(z) != 1 {
            return Err(CrError::NotHomogeneous(format!("{} must have weight 1", z)));
        }
    }
    let degrees: Vec<u32> = m.w.iter().map(|v| weight_of_w(w, v)).collect::<Result<_>>()?;
    let tau = m.tau();
    let vars = m.q_vars();
    let mut r = 0;
    for (j, q) in m.q.iter().enumerate() {
        let qj = q - &Poly::var(&vars, &tau[j]);
        for t in &tau[j..] {
            if qj.depends_on(t) {
                let part = qj.filter_terms(|mono| mono[vars.iter().position(|v| v == t).unwrap()] > 0);
                let (mono, _) = part.lowest_term().unwrap();
                return Err(CrError::NotHomogeneous(format!(
                    "row {} depends on {} (monomial {})",
                    j + 1,
                    t,
                    part.monomial_string(&mono)
                )));
            }
        }
        for mono in qj.terms().keys() {
            let wt = w.monomial_weight(&qj, mono);
            if wt != degrees[j] {
                return Err(CrError::NotHomogeneous(format!(
                    "row {}: monomial {} has weight {}, expected {}",
                    j + 1,
                    qj.monomial_string(mono),
                    wt,
                    degrees[j]
                )));
            }
        }
        if !qj.is_zero() {
            r = j + 1;
        }
    }
    Ok(HomogeneousModel { base: m.clone(), weights: w.clone(), r, degrees })
}

/// Finite type of the projections `M^j`, `j = 2, …, r + 1`.
pub fn level_types(hm: &HomogeneousModel, length_max: u32) -> Result<Vec<(usize, TypeVerdict)>> {
    (2..=hm.r + 1).map(|j| Ok((j, hormander(&hm.projection(j), length_max)?.verdict))).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaledModel {
    pub model: HomogeneousModel,
    /// The scaling `z ↦ t z, w_j ↦ t^{m_j} w_j` under which the dropped terms vanish as `t → 0`.
    pub substitution: String,
}

/// The homogeneous part `M⁰`: every row keeps its terms of weight equal to that of its
/// `w` coordinate. Terms of lower weight are an error.
pub fn scale_model(m: &NormalModel, w: &WeightVector) -> Result<ScaledModel> {
    let degrees: Vec<u32> = m.w.iter().map(|v| weight_of_w(w, v)).collect::<Result<_>>()?;
    let vars = m.q_vars();
    let tau = m.tau();
    let mut q = Vec::new();
    for (j, qj) in m.q.iter().enumerate() {
        let t = Poly::var(&vars, &tau[j]);
        let rest = qj - &t;
        if let Some((mono, _)) = rest.terms().iter().find(|(mono, _)| w.monomial_weight(&rest, mono) < degrees[j]) {
            return Err(CrError::RemainderWeight(format!("row {}: {}", j + 1, rest.monomial_string(mono))));
        }
        q.push(&t + &weighted_part(&rest, w, degrees[j]));
    }
    let base = NormalModel { name: format!("{}_0", m.name.trim_end_matches("_0")), z: m.z.clone(), w: m.w.clone(), q, kind: ModelKind::Exact, frame: m.frame.clone() };
    let model = check_homogeneous(&base, w)?;
    let mut parts: Vec<String> = m.z.iter().map(|z| format!("{} -> t*{}", z, z)).collect();
    parts.extend(m.w.iter().zip(degrees.iter()).map(|(v, d)| format!("{} -> t^{}*{}", v, d, v)));
    Ok(ScaledModel { model, substitution: parts.join(", ") })
}

/// Outcome of an ideal-membership check on the complexification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealCheck {
    pub ok: bool,
    pub order: u32,
    pub residual: Option<String>,
}

/// Does the polynomial `g(Z, ζ)` vanish on the complexification near `p`, to `order`?
pub fn vanishes_on_set(g: &Poly, spec: &ManifoldSpec, p: &[GQ], order: u32) -> Result<RealCheck> {
    let chart = chart_at(spec, p, order)?;
    let av = ambient_vars(&spec.coords);
    let pulled = chart.pullback(&g.with_vars(&Poly::zero(&av).union_vars(g.vars())));
    let residual = pulled.lowest_term().map(|(m, c)| format!("{} * {}", c, pulled.monomial_string(&m)));
    Ok(RealCheck { ok: residual.is_none(), order, residual })
}

/// Is the holomorphic polynomial `h` real-valued on the set near `p`?
pub fn verify_real_on_m(h: &Poly, spec: &ManifoldSpec, p: &[GQ], order: u32) -> Result<RealCheck> {
    let av = ambient_vars(&spec.coords);
    let h = h.with_vars(&Poly::zero(&av).union_vars(h.vars()));
    vanishes_on_set(&(&h - &h.bar_swap()), spec, p, order)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Witness {
    Found {
        h: String,
        #[serde(skip)]
        poly: Poly,
        degree: u32,
        check: RealCheck,
    },
    Minimal,
}

/// A nonconstant holomorphic polynomial real-valued on the set near `p`, of least degree
/// (at most `max_degree`) in the displacement from `p`, or `Minimal` when none exists
/// and the set is minimal there.
pub fn real_witness<R: Rng + ?Sized>(spec: &ManifoldSpec, p: &[GQ], max_degree: u32, order: u32, rng: &mut R) -> Result<Witness> {
    let order = order.max(max_degree);
    let chart = chart_at(spec, p, order)?;
    let av = ambient_vars(&spec.coords);
    let n = spec.dim();
    let disp: Vec<Poly> =
        spec.coords.iter().zip(p.iter()).map(|(v, c)| &Poly::var(&av, v) - &Poly::constant(&av, c.clone())).collect();
    for dmax in 1..=max_degree {
        let monos: Vec<_> = monomials_up_to(n, dmax).into_iter().filter(|m| deg(m) > 0).collect();
        // h = Σ c_m ΔZ^m; columns are Re c_m and Im c_m
        let mut rows: HashMap<Vec<u16>, Vec<GQ>> = HashMap::new();
        let cols = 2 * monos.len();
        for (k, mono) in monos.iter().enumerate() {
            let mut hz = Poly::one(&av);
            for (i, &e) in mono.iter().enumerate() {
                hz = &hz * &disp[i].pow(e as u32);
            }
            let a = chart.pullback(&hz);
            let b = chart.pullback(&hz.bar_swap());
            // c·A − c̄·B with c = x + iy: x(A − B) + y·i(A + B)
            let re_part = &a - &b;
            let im_part = (&a + &b).scale(&GQ::i());
            for (col, part) in [(2 * k, re_part), (2 * k + 1, im_part)] {
                for (m, c) in part.terms() {
                    let row = rows.entry(m.clone()).or_insert_with(|| vec![GQ::zero(); 2 * cols]);
                    row[2 * col] = GQ::real(c.re.clone());
                    row[2 * col + 1] = GQ::real(c.im.clone());
                }
            }
        }
        // real and imaginary parts of each equation as separate real rows
        let mut keys: Vec<&Vec<u16>> = rows.keys().collect();
        keys.sort();
        let mut mat = Matrix::zeros(0, cols);
        for key in keys {
            let row = &rows[key];
            mat.push_row((0..cols).map(|c| row[2 * c].clone()).collect());
            mat.push_row((0..cols).map(|c| row[2 * c + 1].clone()).collect());
        }
        let ker = if mat.rows() == 0 { identity_kernel(cols) } else { mat.kernel() };
        if ker.is_empty() {
            continue;
        }
        let v = canonical_kernel_vector(&ker);
        let mut h = Poly::zero(&av);
        for (k, mono) in monos.iter().enumerate() {
            let c = GQ::new(v[2 * k].re.clone(), v[2 * k + 1].re.clone());
            if c.is_zero() {
                continue;
            }
            let mut t = Poly::constant(&av, c);
            for (i, &e) in mono.iter().enumerate() {
                t = &t * &disp[i].pow(e as u32);
            }
            h = &h + &t;
        }
        let h = normalize_witness(&h);
        let check = verify_real_on_m(&h, spec, p, order.max(8))?;
        let degree = h.total_degree().unwrap_or(0);
        return Ok(Witness::Found { h: h.drop_unused().to_string(), poly: h, degree, check });
    }
    let m = solve_normal(spec, p, order)?;
    if minimal_via_segre(&m, rng) {
        Ok(Witness::Minimal)
    } else {
        Err(CrError::AnsatzInsufficient(max_degree))
    }
}

fn identity_kernel(cols: usize) -> Vec<Vec<GQ>> {
    (0..cols).map(|c| (0..cols).map(|k| if k == c { GQ::one() } else { GQ::zero() }).collect()).collect()
}

/// The kernel vector whose last nonzero entry comes earliest, so lower-degree monomials win.
fn canonical_kernel_vector(ker: &[Vec<GQ>]) -> Vec<GQ> {
    let m = Matrix::from_rows(&ker.iter().map(|v| v.iter().rev().cloned().collect()).collect::<Vec<_>>());
    let (r, _) = m.rref();
    let last = r.rank().saturating_sub(1);
    r.row(last).into_iter().rev().collect()
}

/// Scale by a real number so the first coefficient (lowest degree, then coordinate order)
/// is `1`, or `−i` when it is purely imaginary; a real constant term is dropped.
fn normalize_witness(h: &Poly) -> Poly {
    let lead = h
        .terms()
        .iter()
        .filter(|(m, _)| deg(m) > 0)
        .min_by_key(|(m, _)| (deg(m), std::cmp::Reverse((*m).clone())))
        .map(|(_, c)| c.clone());
    let mut h = match lead {
        Some(c) if !c.re.is_zero() => h.scale(&GQ::real(c.re.recip())),
        Some(c) => h.scale(&GQ::real(-c.im.recip())),
        None => h.clone(),
    };
    let c0 = h.constant_term();
    if c0.is_real() {
        h = &h - &Poly::constant(h.vars(), c0);
    }
    h
}

/// `H_j(Z) = exp(s·ν_j·h(Z))·Z_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpTwist {
    pub h: Poly,
    pub factors: Vec<i64>,
    pub multiplier: GQ,
}

impl ExpTwist {
    pub fn to_map(&self, coords: &[String]) -> MapSpec {
        let he = Expr::from_poly(&self.h.drop_unused());
        let comps = coords
            .iter()
            .zip(self.factors.iter())
            .map(|(v, &nu)| {
                if nu == 0 || self.h.is_zero() {
                    return Expr::var(v);
                }
                let k = self.multiplier.scale(&rat(nu, 1));
                let arg = if k.is_one() { he.clone() } else { Expr::Mul(Box::new(Expr::Num(k)), Box::new(he.clone())) };
                Expr::Mul(Box::new(Expr::Exp(Box::new(arg))), Box::new(Expr::var(v)))
            })
            .collect();
        MapSpec::new(coords, comps)
    }

    /// Nonalgebraic exactly when the exponent is nonconstant and some factor is nonzero.
    pub fn nonalgebraic(&self) -> bool {
        !self.h.is_constant() && self.factors.iter().any(|&f| f != 0) && !self.multiplier.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfMap {
    pub components: Vec<String>,
    pub check: MapCheck,
    pub jacobian_invertible: bool,
    pub nonalgebraic: bool,
    pub construction: String,
}

/// The twist `exp(s ν_j h) Z_j` built from a real witness `h` vanishing at `p`, verified
/// tangent to `order`.
pub fn nonalgebraic_selfmap(spec: &ManifoldSpec, p: &[GQ], twist: &ExpTwist, order: u32) -> Result<SelfMap> {
    let real = verify_real_on_m(&twist.h, spec, p, order)?;
    if !real.ok {
        return Err(CrError::Invalid(format!("h is not real on the set: {}", real.residual.unwrap_or_default())));
    }
    let pt: HashMap<String, GQ> = spec.coords.iter().cloned().zip(p.iter().cloned()).collect();
    if !twist.h.eval(&pt).is_zero() {
        return Err(CrError::Invalid("h does not vanish at the base point".into()));
    }
    if twist.factors.len() != spec.dim() {
        return Err(CrError::Invalid("one factor per coordinate is required".into()));
    }
    let map = twist.to_map(&spec.coords);
    let check = verify_map(&map, spec, spec, p, order)?;
    let jacobian_invertible = jacobian_invertible_at(&map, p, 2)?;
    Ok(SelfMap {
        components: map.components.iter().map(|e| e.to_string()).collect(),
        check,
        jacobian_invertible,
        nonalgebraic: twist.nonalgebraic(),
        construction: format!("exp({}*nu*h) twist, h = {}, nu = {:?}", twist.multiplier, twist.h.drop_unused(), twist.factors),
    })
}

/// Candidate twists tried by [`find_selfmap`]: the declared weights with `s = 1`, unit
/// weights with `s = 1`, then a rotation `exp(i h)` of one coordinate at a time.
pub fn twist_candidates(spec: &ManifoldSpec, h: &Poly) -> Vec<ExpTwist> {
    let mut out = Vec::new();
    if let Some(w) = &spec.weights {
        let f: Vec<i64> = spec.coords.iter().map(|c| w.weight_of(c) as i64).collect();
        out.push(ExpTwist { h: h.clone(), factors: f, multiplier: GQ::one() });
    }
    out.push(ExpTwist { h: h.clone(), factors: vec![1; spec.dim()], multiplier: GQ::one() });
    for k in 0..spec.dim() {
        let f: Vec<i64> = (0..spec.dim()).map(|j| (j == k) as i64).collect();
        out.push(ExpTwist { h: h.clone(), factors: f, multiplier: GQ::i() });
    }
    out
}

/// A nonalgebraic self-map from the first tangent candidate twist built on `h − h(p)`, if any.
pub fn find_selfmap(spec: &ManifoldSpec, p: &[GQ], h: &Poly, order: u32) -> Result<Option<SelfMap>> {
    let pt: HashMap<String, GQ> = spec.coords.iter().cloned().zip(p.iter().cloned()).collect();
    let h = h - &Poly::constant(h.vars(), h.eval(&pt));
    for t in twist_candidates(spec, &h) {
        let s = nonalgebraic_selfmap(spec, p, &t, order)?;
        if s.check.ok && s.jacobian_invertible && s.nonalgebraic {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// How a degenerate self-map is built.
#[derive(Clone, Debug, PartialEq)]
pub enum Degeneracy {
    /// The set lies in `{Z_k = 0}`.
    Hyperplane(usize),
    /// A holomorphic field `Σ a_j ∂/∂Z_j` in the set's coordinates, multiplied by `f`.
    Field { names: Vec<String>, coeffs: Vec<Poly>, f: Expr },
}

/// Index of a coordinate vanishing identically on the set near `p`.
pub fn vanishing_coordinate(spec: &ManifoldSpec, p: &[GQ], order: u32) -> Result<Option<usize>> {
    let av = ambient_vars(&spec.coords);
    for k in (0..spec.dim()).rev() {
        if p[k].is_zero() && vanishes_on_set(&Poly::var(&av, &spec.coords[k]), spec, p, order)?.ok {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Does the field annihilate every defining polynomial on the complexification?
pub fn field_tangent(spec: &ManifoldSpec, names: &[String], coeffs: &[Poly], p: &[GQ], order: u32) -> Result<bool> {
    let av = ambient_vars(&spec.coords);
    for r in &spec.rho {
        let mut x = Poly::zero(&av);
        for (v, a) in names.iter().zip(coeffs.iter()) {
            x = &x + &(&a.with_vars(&Poly::zero(&av).union_vars(a.vars())).with_vars(&av) * &r.derivative(v));
        }
        if !vanishes_on_set(&x, spec, p, order)?.ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Self-maps of holomorphically degenerate or non-generic sets: `Z_k ↦ Z_k e^{Z_k}` when
/// the set lies in `{Z_k = 0}`, otherwise the time-one flow of `f·X` for a tangent field
/// `X`, as a Lie series that must terminate within the order.
pub fn degenerate_selfmap(spec: &ManifoldSpec, p: &[GQ], how: &Degeneracy, order: u32) -> Result<SelfMap> {
    match how {
        Degeneracy::Hyperplane(k) => {
            let av = ambient_vars(&spec.coords);
            if !vanishes_on_set(&Poly::var(&av, &spec.coords[*k]), spec, p, order)?.ok {
                return Err(CrError::Invalid(format!("the set does not lie in {{{} = 0}}", spec.coords[*k])));
            }
            let mut comps: Vec<Expr> = spec.coords.iter().map(|v| Expr::var(v)).collect();
            let zk = Expr::var(&spec.coords[*k]);
            comps[*k] = Expr::Mul(Box::new(zk.clone()), Box::new(Expr::Exp(Box::new(zk))));
            let map = MapSpec::new(&spec.coords, comps);
            let check = verify_map(&map, spec, spec, p, order)?;
            Ok(SelfMap {
                components: map.components.iter().map(|e| e.to_string()).collect(),
                check,
                jacobian_invertible: jacobian_invertible_at(&map, p, 2)?,
                nonalgebraic: true,
                construction: format!("{} -> {}*exp({}) on a set inside {{{} = 0}}", spec.coords[*k], spec.coords[*k], spec.coords[*k], spec.coords[*k]),
            })
        }
        Degeneracy::Field { names, coeffs, f } => {
            if !field_tangent(spec, names, coeffs, p, order)? {
                return Err(CrError::NotTangent(
                    names.iter().zip(coeffs.iter()).map(|(v, c)| format!("({})*d/d{}", c, v)).collect::<Vec<_>>().join(" + "),
                ));
            }
            let comps = lie_flow(spec, p, names, coeffs, f, order)?;
            let check = verify_series_map(&comps, spec, spec, p, order)?;
            let inv = series_jacobian_invertible(&comps, &spec.coords);
            let nonalgebraic = crate::dsl::has_exp(f) && coeffs.iter().any(|c| !c.is_zero());
            Ok(SelfMap {
                components: comps.iter().map(|s| s.to_string()).collect(),
                check,
                jacobian_invertible: inv,
                nonalgebraic,
                construction: format!("time-one flow of ({}) * X", f),
            })
        }
    }
}

fn series_jacobian_invertible(comps: &[ExpSeries], coords: &[String]) -> bool {
    let origin: HashMap<String, GQ> = coords.iter().map(|v| (v.clone(), GQ::zero())).collect();
    let mut rows = Vec::new();
    for s in comps {
        if s.groups().len() > 1 {
            return false;
        }
        rows.push(match s.groups().values().next() {
            None => vec![GQ::zero(); coords.len()],
            Some(p) => coords.iter().map(|v| p.derivative(v).eval(&origin)).collect(),
        });
    }
    Matrix::from_rows(&rows).rank() == coords.len()
}

/// `Σ_k D^k(Z_j)/k!` with `D = f·Σ a_i ∂/∂Z_i`, in displacements from `p`.
fn lie_flow(spec: &ManifoldSpec, p: &[GQ], names: &[String], coeffs: &[Poly], f: &Expr, order: u32) -> Result<Vec<ExpSeries>> {
    // each derivative costs one order of validity, so work with a margin
    let work = 2 * order + 2;
    let vars = var_list(&spec.coords);
    let shift: HashMap<String, Poly> = spec
        .coords
        .iter()
        .zip(p.iter())
        .map(|(v, c)| (v.clone(), &Poly::var(&vars, v) + &Poly::constant(&vars, c.clone())))
        .collect();
    let env: HashMap<String, ExpSeries> = shift.iter().map(|(v, q)| (v.clone(), ExpSeries::from_poly(q, work))).collect();
    let fs = crate::dsl::expr_to_series(f, &env, work, false)?;
    let a: Vec<ExpSeries> = coeffs
        .iter()
        .map(|c| ExpSeries::from_poly(&c.with_vars(&Poly::zero(&vars).union_vars(c.vars())).with_vars(&vars).subs(&shift), work))
        .collect();
    let fa: Vec<ExpSeries> = a.iter().map(|x| fs.mul(x)).collect();
    let apply = |g: &ExpSeries| -> ExpSeries {
        let mut acc = ExpSeries::zero(&vars, g.order().saturating_sub(1));
        for (v, c) in names.iter().zip(fa.iter()) {
            acc = acc.add(&c.mul(&g.derivative(v)));
        }
        acc
    };
    let mut out = Vec::new();
    for v in &spec.coords {
        let mut term = env[v].clone();
        let mut acc = term.clone();
        let mut k = 0i64;
        loop {
            k += 1;
            term = apply(&term).scale(&GQ::from_frac(1, k));
            if term.truncate(order).is_zero() {
                break;
            }
            if k as u32 > order + 1 {
                return Err(CrError::Invalid("flow series does not terminate within the order".into()));
            }
            acc = acc.add(&term);
        }
        // report displacements of the image, as for expanded maps
        out.push(acc.truncate(order));
    }
    Ok(out)
}

/// Convenience: the model at the base point, scaled to its homogeneous part when weights are declared.
pub fn homogeneous_model_of(spec: &ManifoldSpec, order: u32) -> Result<Option<HomogeneousModel>> {
    let w = match &spec.weights {
        Some(w) => w.clone(),
        None => return Ok(None),
    };
    let m = solve_normal(spec, &spec.basepoint_or_origin(), order)?;
    Ok(Some(scale_model(&m, &w)?.model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::normalform::from_rigid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zchi() -> crate::exactalg::VarList {
        var_list(&["z", "conj(z)"])
    }

    fn ex223_model(perturb: bool) -> NormalModel {
        let v = zchi();
        let zc = &Poly::var(&v, "z") * &Poly::var(&v, "conj(z)");
        let mut phi2 = zc.pow(2);
        if perturb {
            let z = Poly::var(&v, "z");
            let c = Poly::var(&v, "conj(z)");
            phi2 = &phi2 + &(&(&z.pow(3) * &c.pow(2)) + &(&z.pow(2) * &c.pow(3)));
        }
        from_rigid("ex223", &["z"], &["w1", "w2"], &[zc, phi2]).unwrap()
    }

    fn w124() -> WeightVector {
        WeightVector::new(&["z", "w1", "w2"], &[1, 2, 4]).unwrap()
    }

    #[test]
    fn ex223_is_homogeneous() {
        let hm = check_homogeneous(&ex223_model(false), &w124()).unwrap();
        assert_eq!((hm.r, hm.degrees.clone()), (2, vec![2, 4]));
        let c = level_types(&hm, 8).unwrap();
        assert_eq!(c, vec![(2, TypeVerdict::Minimal), (3, TypeVerdict::Minimal)]);
    }

    #[test]
    fn flat_model_has_r_zero() {
        let v = zchi();
        let m = from_rigid("flat", &["z"], &["w"], &[Poly::zero(&v)]).unwrap();
        let hm = check_homogeneous(&m, &WeightVector::new(&["z", "w"], &[1, 2]).unwrap()).unwrap();
        assert_eq!(hm.r, 0);
        assert!(level_types(&hm, 8).unwrap().is_empty());
    }

    #[test]
    fn flat_first_row_fails_condition() {
        let v = zchi();
        let zc = &Poly::var(&v, "z") * &Poly::var(&v, "conj(z)");
        let m = from_rigid("m", &["z"], &["w1", "w2"], &[Poly::zero(&v), zc]).unwrap();
        let hm = check_homogeneous(&m, &WeightVector::new(&["z", "w1", "w2"], &[1, 2, 2]).unwrap()).unwrap();
        assert_eq!(level_types(&hm, 8).unwrap()[0], (2, TypeVerdict::NotMinimal));
    }

    #[test]
    fn ex224_is_not_triangular() {
        let s = corpus::manifold("ex224").unwrap();
        let m = solve_normal(&s, &[GQ::zero(), GQ::zero(), GQ::zero()], 8).unwrap();
        let e = check_homogeneous(&m, &w124()).unwrap_err();
        match e {
            CrError::NotHomogeneous(msg) => assert!(msg.contains("conj(w2)"), "{}", msg),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn scaling_drops_higher_weight() {
        let s = scale_model(&ex223_model(true), &w124()).unwrap();
        assert_eq!(s.model.base.q, ex223_model(false).q);
        let again = scale_model(&s.model.base, &w124()).unwrap();
        assert_eq!(again.model.base.q, s.model.base.q);
        let same = scale_model(&ex223_model(false), &w124()).unwrap();
        assert_eq!(same.model.base.q, ex223_model(false).q);
    }

    #[test]
    fn lower_weight_remainder_rejected() {
        let w = WeightVector::new(&["z", "w1", "w2"], &[1, 2, 6]).unwrap();
        assert!(matches!(scale_model(&ex223_model(false), &w), Err(CrError::RemainderWeight(_))));
    }

    #[test]
    fn ex315_homogeneous_part_decouples() {
        let s = corpus::manifold("ex315").unwrap();
        let hm = homogeneous_model_of(&s, 8).unwrap().unwrap();
        let z = Poly::var(&hm.base.q_vars(), "z");
        let chi = Poly::var(&hm.base.q_vars(), "conj(z)");
        assert_eq!(hm.q_part(0), (&z * &chi).scale(&GQ::from_ints(0, 2)));
        assert!(hm.q_part(1).is_zero() && hm.q_part(2).is_zero());
        assert_eq!(hm.r, 1);
    }

    #[test]
    fn witnesses() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = corpus::manifold("ex315").unwrap();
        match real_witness(&s, &s.basepoint_or_origin(), 4, 8, &mut rng).unwrap() {
            Witness::Found { h, check, .. } => {
                assert_eq!(h, "w3");
                assert!(check.ok);
            }
            w => panic!("{:?}", w),
        }
        let s = corpus::manifold("ex35").unwrap();
        match real_witness(&s, &s.basepoint_or_origin(), 4, 8, &mut rng).unwrap() {
            Witness::Found { h, .. } => assert_eq!(h, "-i*Z3"),
            w => panic!("{:?}", w),
        }
        let s = corpus::manifold("ex223").unwrap();
        assert_eq!(real_witness(&s, &s.basepoint_or_origin(), 4, 8, &mut rng).unwrap(), Witness::Minimal);
    }

    #[test]
    fn reality_checks() {
        let s = corpus::manifold("lewy").unwrap();
        let av = ambient_vars(&s.coords);
        assert!(!verify_real_on_m(&Poly::var(&av, "z"), &s, &[GQ::zero(), GQ::zero()], 8).unwrap().ok);
        let flat = corpus::manifold("rline").unwrap();
        let av = ambient_vars(&flat.coords);
        assert!(verify_real_on_m(&Poly::var(&av, "Z"), &flat, &[GQ::zero()], 8).unwrap().ok);
    }

    #[test]
    fn ex315_twist_is_tangent() {
        let s = corpus::manifold("ex315").unwrap();
        let av = ambient_vars(&s.coords);
        let t = ExpTwist { h: Poly::var(&av, "w3"), factors: vec![1, 0, 0, 0], multiplier: GQ::i() };
        let m = nonalgebraic_selfmap(&s, &s.basepoint_or_origin(), &t, 6).unwrap();
        assert!(m.check.ok && m.jacobian_invertible && m.nonalgebraic);
        let zero = ExpTwist { h: Poly::zero(&av), factors: vec![1, 0, 0, 0], multiplier: GQ::i() };
        let id = nonalgebraic_selfmap(&s, &s.basepoint_or_origin(), &zero, 6).unwrap();
        assert_eq!(id.components, vec!["z", "w1", "w2", "w3"]);
        assert!(!id.nonalgebraic);
    }

    #[test]
    fn hyperplane_branch() {
        let spec = crate::dsl::parse_manifold("manifold a in C^2\nvars Z1 Z2\neq Im(Z1) = 0\neq Re(Z2) = 0\neq Im(Z2) = 0\n").unwrap();
        let p = [GQ::zero(), GQ::zero()];
        assert_eq!(vanishing_coordinate(&spec, &p, 6).unwrap(), Some(1));
        let m = degenerate_selfmap(&spec, &p, &Degeneracy::Hyperplane(1), 8).unwrap();
        assert!(m.check.ok && m.jacobian_invertible);
    }

    #[test]
    fn degen3_flow_is_translation() {
        let s = corpus::manifold("degen3").unwrap();
        let v = var_list(&s.coords);
        let p = s.basepoint_or_origin();
        let names: Vec<String> = s.coords.clone();
        let coeffs = vec![Poly::zero(&v), Poly::one(&v), Poly::zero(&v)];
        let f = Expr::Exp(Box::new(Expr::var("w")));
        let m = degenerate_selfmap(&s, &p, &Degeneracy::Field { names: names.clone(), coeffs: coeffs.clone(), f: f.clone() }, 8).unwrap();
        assert!(m.check.ok && m.jacobian_invertible && m.nonalgebraic);
        let comps = lie_flow(&s, &p, &names, &coeffs, &f, 6).unwrap();
        let ew = ExpSeries::from_poly(&Poly::var(&v, "w"), 6).exp().unwrap();
        assert_eq!(comps[1], ExpSeries::from_poly(&Poly::var(&v, "z2"), 6).add(&ew));
        let lewy_field = vec![Poly::one(&v), Poly::zero(&v), Poly::zero(&v)];
        assert!(matches!(
            degenerate_selfmap(&s, &p, &Degeneracy::Field { names: names.clone(), coeffs: lewy_field, f: f.clone() }, 6),
            Err(CrError::NotTangent(_))
        ));
        let zero = vec![Poly::zero(&v); 3];
        let id = degenerate_selfmap(&s, &p, &Degeneracy::Field { names, coeffs: zero, f }, 6).unwrap();
        assert!(id.check.ok && !id.nonalgebraic);
    }
}
