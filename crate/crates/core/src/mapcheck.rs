//! Holomorphic maps between real algebraic sets: tangency to series order on the
//! complexification, generic rank, leaves of a foliation by level sets, bounded
//! algebraic-dependence search and the reflection vector fields.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::dsl::{expr_as_poly, expr_to_series, has_exp, parse_map, Expr};
use crate::error::{CrError, Result};
use crate::exactalg::expseries::ExpSeries;
use crate::exactalg::linalg::Matrix;
use crate::exactalg::poly::{deg, monomials_up_to};
use crate::exactalg::rank::{generic_rank, jet_rank, rank_at};
use crate::exactalg::series::solve_implicit;
use crate::exactalg::{conj_name, var_list, Poly, VarList, GQ};
use crate::geometry::{ambient_vars, chart_at, classify_point, ManifoldSpec, PointClass};
use crate::normalform::NormalModel;

/// A holomorphic map given by one expression per target coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    /// Source coordinate names the components are written in.
    pub source: Vec<String>,
    pub components: Vec<Expr>,
    /// Set when some component involves `exp`; nonalgebraicity is asserted structurally.
    pub nonalgebraic: bool,
}

impl MapSpec {
    pub fn new(source: &[String], components: Vec<Expr>) -> MapSpec {
        let nonalgebraic = components.iter().any(has_exp);
        MapSpec { source: source.to_vec(), components, nonalgebraic }
    }

    pub fn parse(text: &str, source: &[String]) -> Result<MapSpec> {
        Ok(MapSpec::new(source, parse_map(text, source)?))
    }

    pub fn identity(source: &[String]) -> MapSpec {
        MapSpec::new(source, source.iter().map(|v| Expr::var(v)).collect())
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    /// `other ∘ self`, where `other` is written in the target coordinates `names`.
    pub fn then(&self, other: &MapSpec) -> Result<MapSpec> {
        if other.source.len() != self.components.len() {
            return Err(CrError::Composition);
        }
        let sub: HashMap<String, Expr> =
            other.source.iter().cloned().zip(self.components.iter().cloned()).collect();
        Ok(MapSpec::new(&self.source, other.components.iter().map(|e| e.substitute(&sub)).collect()))
    }

    /// Components expanded around `p` as series in the displacements of the source coordinates.
    pub fn expand_at(&self, p: &[GQ], order: u32) -> Result<Vec<ExpSeries>> {
        let vars = var_list(&self.source);
        let env: HashMap<String, ExpSeries> = self
            .source
            .iter()
            .zip(p.iter())
            .map(|(v, c)| (v.clone(), ExpSeries::from_poly(&(&Poly::var(&vars, v) + &Poly::constant(&vars, c.clone())), order)))
            .collect();
        self.components.iter().map(|e| expr_to_series(e, &env, order, false)).collect()
    }

    pub fn to_text(&self) -> String {
        self.components.iter().map(|e| format!("{}\n", e)).collect()
    }
}

/// Lowest surviving term of a residual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Residual {
    /// Index (from 1) of the target defining polynomial.
    pub row: usize,
    pub degree: u32,
    pub monomial: String,
    /// Exponent `c` of the `e^c` factor the term belongs to.
    pub exp_constant: GQ,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MapCheck {
    pub ok: bool,
    pub order: u32,
    /// Source chart variables the residual is expanded in.
    pub chart_params: Vec<String>,
    pub residual: Option<Residual>,
    pub nonalgebraic: bool,
}

/// Evaluate a polynomial on exponential-series values.
pub fn poly_on_series(p: &Poly, vals: &HashMap<String, ExpSeries>, vars: &VarList, order: u32) -> Result<ExpSeries> {
    let mut acc = ExpSeries::zero(vars, order);
    let mut powers: HashMap<(usize, u16), ExpSeries> = HashMap::new();
    for (m, c) in p.terms() {
        let mut t = ExpSeries::constant(vars, c.clone(), order);
        for (k, &e) in m.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let name = &p.vars()[k];
            let key = (k, e);
            if !powers.contains_key(&key) {
                let base = vals.get(name).ok_or_else(|| CrError::Invalid(format!("unbound variable {}", name)))?;
                powers.insert(key, base.pow(e as u32));
            }
            t = t.mul(&powers[&key]);
        }
        acc = acc.add(&t);
    }
    Ok(acc)
}

/// Does `H` map `src` into `tgt` near `p`? Every target defining polynomial composed with
/// `(H(Z), H̄(ζ))` is expanded on a chart of the source complexification and must vanish
/// to the given order.
pub fn verify_map(h: &MapSpec, src: &ManifoldSpec, tgt: &ManifoldSpec, p: &[GQ], order: u32) -> Result<MapCheck> {
    if h.source != src.coords {
        return Err(CrError::Invalid("map is not written in the source coordinates".into()));
    }
    let comps = h.expand_at(p, order)?;
    let mut r = verify_series_map(&comps, src, tgt, p, order)?;
    r.nonalgebraic = h.nonalgebraic;
    Ok(r)
}

/// As [`verify_map`], for components already expanded at `p` in the displacements of the
/// source coordinates (variables named like the coordinates).
pub fn verify_series_map(comps: &[ExpSeries], src: &ManifoldSpec, tgt: &ManifoldSpec, p: &[GQ], order: u32) -> Result<MapCheck> {
    if comps.len() != tgt.dim() {
        return Err(CrError::Invalid(format!("map has {} components, target dimension is {}", comps.len(), tgt.dim())));
    }
    let chart = chart_at(src, p, order)?;
    let pv: VarList = var_list(&chart.params);
    let holo: HashMap<String, Poly> = src.coords.iter().map(|v| (v.clone(), chart.local[v].clone())).collect();
    let anti: HashMap<String, Poly> = src.coords.iter().map(|v| (v.clone(), chart.local[&conj_name(v)].clone())).collect();
    let mut vals: HashMap<String, ExpSeries> = HashMap::new();
    for (k, s) in comps.iter().enumerate() {
        vals.insert(tgt.coords[k].clone(), compose_series(s, &holo, &pv, order));
        vals.insert(conj_name(&tgt.coords[k]), compose_series(&s.bar(), &anti, &pv, order));
    }
    let mut residual = None;
    for (j, r) in tgt.rho.iter().enumerate() {
        let s = poly_on_series(r, &vals, &pv, order)?;
        if let Some((degree, monomial, exp_constant)) = s.first_nonzero() {
            residual = Some(Residual { row: j + 1, degree, monomial, exp_constant });
            break;
        }
    }
    Ok(MapCheck { ok: residual.is_none(), order, chart_params: chart.params.clone(), residual, nonalgebraic: false })
}

/// Substitute series for the variables of every exponential group (constants stay put).
fn compose_series(s: &ExpSeries, map: &HashMap<String, Poly>, vars: &VarList, order: u32) -> ExpSeries {
    let mut out = ExpSeries::zero(vars, order);
    for (c, p) in s.groups() {
        let q = p.subs_trunc(map, order);
        out = out.add(&ExpSeries::group(c.clone(), &q.with_vars(&Poly::zero(vars).union_vars(q.vars())).with_vars(vars), order));
    }
    out
}

/// Generic rank of the Jacobian of `H` near `p`. Polynomial maps use the exact generic
/// rank; otherwise each component must carry a single exponential factor `e^c`, which
/// is a nonzero constant and is dropped, and the rank of the jet is taken.
pub fn map_rank<R: Rng + ?Sized>(h: &MapSpec, p: &[GQ], order: u32, rng: &mut R) -> Result<usize> {
    let vars = var_list(&h.source);
    let polys: Option<Vec<Poly>> = h.components.iter().map(|e| expr_as_poly(e, &vars)).collect();
    if let Some(ps) = polys {
        return Ok(generic_rank(&ps, &h.source, rng));
    }
    let mut comps = Vec::new();
    for s in h.expand_at(p, order)? {
        match s.groups().len() {
            0 => comps.push(Poly::zero(&vars)),
            1 => comps.push(s.groups().values().next().unwrap().with_vars(&vars)),
            _ => return Err(CrError::Invalid("component mixes several exponential factors".into())),
        }
    }
    Ok(jet_rank(&comps, &h.source, order, rng))
}

/// Is the Jacobian at `p` invertible? Each row may carry its own `e^c` factor, which does
/// not affect invertibility.
pub fn jacobian_invertible_at(h: &MapSpec, p: &[GQ], order: u32) -> Result<bool> {
    let comps = h.expand_at(p, order.max(2))?;
    let origin: HashMap<String, GQ> = h.source.iter().map(|v| (v.clone(), GQ::zero())).collect();
    let mut rows = Vec::new();
    for s in &comps {
        let groups: Vec<(&GQ, &Poly)> = s.groups().iter().collect();
        let row: Vec<GQ> = match groups.len() {
            0 => vec![GQ::zero(); h.source.len()],
            1 => h.source.iter().map(|v| groups[0].1.derivative(v).eval(&origin)).collect(),
            _ => return Err(CrError::Invalid("component mixes several exponential factors".into())),
        };
        rows.push(row);
    }
    Ok(rows.len() == h.source.len() && Matrix::from_rows(&rows).rank() == rows.len())
}

/// A leaf function `num/den`; polynomial leaf functions have `den = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafFunction {
    pub num: Poly,
    pub den: Poly,
}

impl LeafFunction {
    pub fn poly(p: Poly) -> LeafFunction {
        let den = Poly::one(p.vars());
        LeafFunction { num: p, den }
    }

    pub fn eval(&self, pt: &HashMap<String, GQ>) -> Result<GQ> {
        let d = self.den.eval(pt);
        if d.is_zero() {
            return Err(CrError::Invalid("leaf function has a pole at the point".into()));
        }
        Ok(&self.num.eval(pt) / &d)
    }
}

/// Parametrization of a level set `S_c = {h = c}` near a center point.
#[derive(Clone, Debug)]
pub struct LeafChart {
    pub center: Vec<GQ>,
    pub c: Vec<GQ>,
    /// Coordinates solved for.
    pub solved: Vec<String>,
    /// Free coordinates; their displacements parametrize the leaf.
    pub params: Vec<String>,
    /// Names of symbolic offsets `c − c(center)` for a family of leaves, else empty.
    pub offsets: Vec<String>,
    /// Displacement of every coordinate, in `params` and `offsets`.
    pub local: HashMap<String, Poly>,
    pub order: u32,
    pub exact: bool,
    /// `M ∩ S_c` in the leaf parameters, when `c` is real and the center lies on `M`.
    pub slice: Option<ManifoldSpec>,
    pub slice_class: Option<PointClass>,
}

impl LeafChart {
    /// Restrict a holomorphic map to the leaf.
    pub fn restrict(&self, h: &MapSpec) -> Result<Vec<ExpSeries>> {
        let mut names = self.params.clone();
        names.extend(self.offsets.iter().cloned());
        let lv = var_list(&names);
        let env: HashMap<String, ExpSeries> = self
            .solved
            .iter()
            .chain(self.params.iter())
            .map(|v| {
                let k = h.source.iter().position(|s| s == v).expect("coordinate of the map source");
                let p = &Poly::constant(&lv, self.center[k].clone()) + &self.local[v].with_vars(&lv);
                (v.clone(), ExpSeries::from_poly(&p, self.order))
            })
            .collect();
        h.components.iter().map(|e| expr_to_series(e, &env, self.order, false)).collect()
    }
}

/// Chart of the leaf `h = c` through `center` (which must satisfy `h(center) = c`).
pub fn leaf_chart(spec: &ManifoldSpec, h: &[LeafFunction], c: &[GQ], center: &[GQ], order: u32) -> Result<LeafChart> {
    leaf_chart_impl(spec, h, Some(c), center, order)
}

/// Charts of all leaves near the one through `center`, with the level offsets
/// `dc1, dc2, …` kept as extra series variables.
pub fn leaf_family(spec: &ManifoldSpec, h: &[LeafFunction], center: &[GQ], order: u32) -> Result<LeafChart> {
    leaf_chart_impl(spec, h, None, center, order)
}

fn leaf_chart_impl(spec: &ManifoldSpec, h: &[LeafFunction], c: Option<&[GQ]>, center: &[GQ], order: u32) -> Result<LeafChart> {
    let coords = &spec.coords;
    let q = h.len();
    let pt: HashMap<String, GQ> = coords.iter().cloned().zip(center.iter().cloned()).collect();
    let c0: Vec<GQ> = h.iter().map(|f| f.eval(&pt)).collect::<Result<_>>()?;
    if let Some(c) = c {
        if c != c0.as_slice() {
            return Err(CrError::Invalid("the center does not lie on the requested leaf".into()));
        }
    }
    let offsets: Vec<String> = if c.is_none() { (1..=q).map(|k| format!("dc{}", k)).collect() } else { vec![] };
    let mut names = coords.clone();
    names.extend(offsets.iter().cloned());
    let vars = var_list(&names);
    let shift: HashMap<String, Poly> = coords
        .iter()
        .zip(center.iter())
        .map(|(v, x)| (v.clone(), &Poly::var(&vars, v) + &Poly::constant(&vars, x.clone())))
        .collect();
    let eqs: Vec<Poly> = h
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let mut level = Poly::constant(&vars, c0[k].clone());
            if !offsets.is_empty() {
                level = &level + &Poly::var(&vars, &offsets[k]);
            }
            let num = f.num.with_vars(&Poly::zero(&vars).union_vars(f.num.vars())).subs(&shift);
            let den = f.den.with_vars(&Poly::zero(&vars).union_vars(f.den.vars())).subs(&shift);
            &num - &(&level * &den)
        })
        .collect();
    // pivot coordinates, greedily from the last
    let origin: HashMap<String, GQ> = names.iter().map(|v| (v.clone(), GQ::zero())).collect();
    let mut piv: Vec<usize> = Vec::new();
    for col in (0..coords.len()).rev() {
        if piv.len() == q {
            break;
        }
        let mut cols = piv.clone();
        cols.push(col);
        let m = Matrix::from_fn(q, cols.len(), |r, k| eqs[r].derivative(&coords[cols[k]]).eval(&origin));
        if m.rank() == cols.len() {
            piv.push(col);
        }
    }
    if piv.len() < q {
        return Err(CrError::NotIndependent);
    }
    piv.sort();
    let solved: Vec<String> = piv.iter().map(|&k| coords[k].clone()).collect();
    let params: Vec<String> = coords.iter().filter(|v| !solved.contains(v)).cloned().collect();
    let sol = solve_implicit(&eqs, &solved, order)?;
    let mut local_names = params.clone();
    local_names.extend(offsets.iter().cloned());
    let lv = var_list(&local_names);
    let mut local = HashMap::new();
    for v in &params {
        local.insert(v.clone(), Poly::var(&lv, v));
    }
    for (v, s) in solved.iter().zip(sol.values.iter()) {
        local.insert(v.clone(), s.with_vars(&Poly::zero(&lv).union_vars(s.vars())).with_vars(&lv));
    }
    let mut chart = LeafChart {
        center: center.to_vec(),
        c: c0.clone(),
        solved,
        params,
        offsets,
        local,
        order,
        exact: sol.exact,
        slice: None,
        slice_class: None,
    };
    if c.is_some() && c0.iter().all(|x| x.is_real()) && spec.on_set(center) {
        let slice = leaf_slice(spec, &chart)?;
        let origin = vec![GQ::zero(); slice.dim()];
        chart.slice_class = Some(classify_point(&slice, &origin, order.min(4))?);
        chart.slice = Some(slice);
    }
    Ok(chart)
}

/// `M ∩ S_c` written in the leaf parameters (displacements from the center).
fn leaf_slice(spec: &ManifoldSpec, chart: &LeafChart) -> Result<ManifoldSpec> {
    let av = ambient_vars(&chart.params);
    let mut map: HashMap<String, Poly> = HashMap::new();
    for (k, v) in spec.coords.iter().enumerate() {
        let disp = chart.local[v].with_vars(&Poly::zero(&av).union_vars(chart.local[v].vars())).with_vars(&av);
        let holo = &Poly::constant(&av, chart.center[k].clone()) + &disp;
        map.insert(conj_name(v), holo.bar_swap());
        map.insert(v.clone(), holo);
    }
    let rows: Vec<Poly> = spec
        .rho
        .iter()
        .map(|r| if chart.exact { r.subs(&map) } else { r.subs_trunc(&map, chart.order) })
        .filter(|r| !r.is_zero())
        .collect();
    if rows.is_empty() {
        return Err(CrError::Invalid("the leaf is contained in the set".into()));
    }
    let refs: Vec<&str> = chart.params.iter().map(|s| s.as_str()).collect();
    let mut s = ManifoldSpec::new(&format!("{}_leaf", spec.name), &refs, rows);
    s.basepoint = Some(vec![GQ::zero(); chart.params.len()]);
    Ok(s)
}

/// A polynomial relation `P(u, X)` with `P(u, e^{-γ} f(u)) ≡ 0` to `residual_order`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DependenceCertificate {
    /// `P` as a string in the variables `u` and `X`.
    pub relation: String,
    #[serde(skip)]
    pub p: Poly,
    pub deg_u: u32,
    pub deg_x: u32,
    pub residual_order: u32,
    /// The constant `γ` of the exponential factor divided out of `f`.
    pub exp_shift: GQ,
}

/// Search for `P(u, X) = Σ a_{α,k} u^α X^k`, `|α| ≤ deg_u`, `k ≤ deg_x`, vanishing on `X = f`.
/// Degree pairs are tried in increasing order; a pair is skipped when the coefficients
/// known to `order` do not outnumber the unknowns, since a kernel vector would then
/// carry no evidence. `None` is a bounded claim only.
pub fn algebraic_dependence(f: &ExpSeries, u: &[String], deg_u: u32, deg_x: u32, order: u32) -> Option<DependenceCertificate> {
    let order = order.min(f.order());
    let (gamma, s) = match f.groups().len() {
        0 => (GQ::zero(), Poly::zero(&var_list(u))),
        1 => {
            let (g, p) = f.groups().iter().next().unwrap();
            (g.clone(), p.clone())
        }
        _ => return None,
    };
    let uv = var_list(u);
    if s.used_vars().iter().any(|v| !u.contains(v)) {
        return None;
    }
    let s = s.with_vars(&Poly::zero(&uv).union_vars(s.vars())).with_vars(&uv);
    let rows = monomials_up_to(u.len(), order);
    let row_index: HashMap<_, usize> = rows.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let mut powers = vec![Poly::one(&uv)];
    for k in 1..=deg_x {
        powers.push(powers[k as usize - 1].mul_trunc(&s, order));
    }
    for dx in 1..=deg_x {
        for du in 0..=deg_u {
            let monos = monomials_up_to(u.len(), du);
            let unknowns: Vec<(usize, u32)> = (0..=dx).flat_map(|k| (0..monos.len()).map(move |a| (a, k))).collect();
            if rows.len() <= unknowns.len() {
                continue;
            }
            let mut mat = Matrix::zeros(rows.len(), unknowns.len());
            for (col, &(a, k)) in unknowns.iter().enumerate() {
                let um = Poly::from_terms(&uv, [(monos[a].clone(), GQ::one())]);
                let prod = um.mul_trunc(&powers[k as usize], order);
                for (m, c) in prod.terms() {
                    mat.set(row_index[m], col, c.clone());
                }
            }
            let ker = mat.kernel();
            if let Some(v) = ker.first() {
                let mut names = u.to_vec();
                names.push("X".into());
                let pv = var_list(&names);
                let x = Poly::var(&pv, "X");
                let mut p = Poly::zero(&pv);
                for (col, &(a, k)) in unknowns.iter().enumerate() {
                    if v[col].is_zero() {
                        continue;
                    }
                    let mut m = monos[a].clone();
                    m.push(0);
                    let t = &Poly::from_terms(&pv, [(m, v[col].clone())]) * &x.pow(k);
                    p = &p + &t;
                }
                let lead = leading_coefficient(&p, "X");
                let p = p.scale(&lead.inv());
                return Some(DependenceCertificate {
                    relation: p.to_string(),
                    p,
                    deg_u: du,
                    deg_x: dx,
                    residual_order: order,
                    exp_shift: gamma,
                });
            }
        }
    }
    None
}

/// Coefficient of the lowest monomial in the top `x`-degree part.
fn leading_coefficient(p: &Poly, x: &str) -> GQ {
    let top = p.degree_in(x);
    let part = p.univariate_coeffs(x)[top as usize].clone();
    part.terms().iter().min_by_key(|(m, _)| (deg(m), (*m).clone())).map(|(_, c)| c.clone()).unwrap_or_else(GQ::one)
}

/// A holomorphic vector field on `C^{2N}` with coordinates `z, w, χ, τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloField {
    pub label: String,
    pub coeffs: Vec<(String, Poly)>,
}

impl HoloField {
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut acc = Poly::zero(f.vars());
        for (v, c) in &self.coeffs {
            let d = f.derivative(v);
            if !d.is_zero() {
                acc = &acc + &(c * &d);
            }
        }
        acc
    }

    pub fn coefficient(&self, var: &str) -> Option<&Poly> {
        self.coeffs.iter().find(|(v, _)| v == var).map(|(_, c)| c)
    }
}

#[derive(Clone, Debug)]
pub struct ReflectionFields {
    /// `𝓛_j = ∂/∂χ_j + Σ_k Q̄_{k,χ_j}(χ, z, w) ∂/∂τ_k`.
    pub l: Vec<HoloField>,
    /// `𝓣_j = ∂/∂w_j + Σ_k Q̄_{k,w_j}(χ, z, w) ∂/∂τ_k`.
    pub t: Vec<HoloField>,
    /// `V_j = ∂/∂z_j + Σ_k Q_{k,z_j} ∂/∂w_k − Σ_k Q_{k,z_j} 𝓣_k`.
    pub v: Vec<HoloField>,
}

impl ReflectionFields {
    pub fn all(&self) -> impl Iterator<Item = &HoloField> {
        self.l.iter().chain(self.t.iter()).chain(self.v.iter())
    }
}

fn field_vars(m: &NormalModel) -> VarList {
    let mut v = m.coords();
    v.extend(m.chi());
    v.extend(m.tau());
    var_list(&v)
}

/// The reflection fields of a normal model; tangency is checked on the graph `w = Q`.
pub fn reflection_fields(m: &NormalModel) -> Result<ReflectionFields> {
    let fv = field_vars(m);
    let lift = |p: &Poly| p.with_vars(&Poly::zero(&fv).union_vars(p.vars())).with_vars(&fv);
    let q: Vec<Poly> = m.q.iter().map(|p| lift(p)).collect();
    let qbar: Vec<Poly> = m.qbar().iter().map(|p| lift(p)).collect();
    let one = Poly::one(&fv);
    let (z, w, chi, tau) = (m.z.clone(), m.w.clone(), m.chi(), m.tau());
    let l: Vec<HoloField> = chi
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let mut coeffs = vec![(c.clone(), one.clone())];
            coeffs.extend(tau.iter().zip(qbar.iter()).map(|(t, qb)| (t.clone(), qb.derivative(c))));
            HoloField { label: format!("L{}", j + 1), coeffs }
        })
        .collect();
    let t: Vec<HoloField> = w
        .iter()
        .enumerate()
        .map(|(j, wj)| {
            let mut coeffs = vec![(wj.clone(), one.clone())];
            coeffs.extend(tau.iter().zip(qbar.iter()).map(|(t, qb)| (t.clone(), qb.derivative(wj))));
            HoloField { label: format!("T{}", j + 1), coeffs }
        })
        .collect();
    let v: Vec<HoloField> = z
        .iter()
        .enumerate()
        .map(|(j, zj)| {
            let qz: Vec<Poly> = q.iter().map(|qk| qk.derivative(zj)).collect();
            let mut coeffs = vec![(zj.clone(), one.clone())];
            // the ∂/∂w parts cancel against those of Σ Q_{k,z_j} 𝓣_k
            for (l, tl) in tau.iter().enumerate() {
                let mut c = Poly::zero(&fv);
                for (k, wk) in w.iter().enumerate() {
                    c = &c - &(&qz[k] * &qbar[l].derivative(wk));
                }
                coeffs.push((tl.clone(), c));
            }
            HoloField { label: format!("V{}", j + 1), coeffs }
        })
        .collect();
    let fields = ReflectionFields { l, t, v };
    for f in fields.all() {
        if let Some(r) = tangency_residual(m, f) {
            return Err(CrError::Invalid(format!("field {} not tangent: {}", f.label, r)));
        }
    }
    Ok(fields)
}

/// Lowest term of `X(w − Q)` restricted to `w = Q`, if any.
pub fn tangency_residual(m: &NormalModel, x: &HoloField) -> Option<String> {
    let fv = field_vars(m);
    let wmap: HashMap<String, Poly> = m
        .w
        .iter()
        .zip(m.q.iter())
        .map(|(w, q)| (w.clone(), q.with_vars(&Poly::zero(&fv).union_vars(q.vars())).with_vars(&fv)))
        .collect();
    for (k, q) in m.q.iter().enumerate() {
        let rho = &Poly::var(&fv, &m.w[k]) - &q.with_vars(&Poly::zero(&fv).union_vars(q.vars())).with_vars(&fv);
        let xr = x.apply(&rho);
        let on = match m.order() {
            None => xr.subs(&wmap),
            Some(o) => xr.subs_trunc(&wmap, o.saturating_sub(1)),
        };
        if let Some((mono, c)) = on.lowest_term() {
            return Some(format!("{} at {}", c, on.monomial_string(&mono)));
        }
    }
    None
}

/// The first reflection step for a polynomial map `H = (f, g)` written in the model
/// coordinates: the matrix `(𝓛_j f̄_k)` is checked invertible at random points of the
/// complexification, produced by the graph substitution with random `(z, χ, τ)`.
pub fn reflection_step_solvable<R: Rng + ?Sized>(m: &NormalModel, f: &[Poly], points: usize, rng: &mut R) -> Result<bool> {
    if !m.is_exact() {
        return Err(CrError::Invalid("random points need an exact model".into()));
    }
    let fields = reflection_fields(m)?;
    let fv = field_vars(m);
    let n = m.n();
    if f.len() != n {
        return Err(CrError::Invalid("one f component per z coordinate is required".into()));
    }
    let fbar: Vec<Poly> = f.iter().map(|p| p.with_vars(&ambient_vars(&m.coords())).bar_swap().with_vars(&fv)).collect();
    let mat: Vec<Vec<Poly>> = fields.l.iter().map(|l| fbar.iter().map(|fb| l.apply(fb)).collect()).collect();
    let wmap: HashMap<String, Poly> =
        m.w.iter().zip(m.q.iter()).map(|(w, q)| (w.clone(), q.with_vars(&Poly::zero(&fv).union_vars(q.vars())).with_vars(&fv))).collect();
    let on: Vec<Vec<Poly>> = mat.iter().map(|row| row.iter().map(|e| e.subs(&wmap)).collect()).collect();
    let free: Vec<String> = m.z.iter().cloned().chain(m.chi()).chain(m.tau()).collect();
    for _ in 0..points {
        let pt = crate::exactalg::rank::random_point(&free, rng);
        if n > 0 && rank_at(&on, &pt) < n {
            return Ok(false);
        }
    }
    Ok(true)
}
