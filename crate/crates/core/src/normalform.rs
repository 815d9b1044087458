//! Normal coordinates `w = Q(z, χ, τ)` with `Q(z,0,τ) = Q(0,χ,τ) = τ`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{CrError, Result};
use crate::exactalg::linalg::Matrix;
use crate::exactalg::series::solve_implicit;
use crate::exactalg::{conj_name, var_list, Monomial, Poly, VarList, GQ};
use crate::geometry::{ambient_vars, classify_point, ManifoldSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    Exact,
    Truncated(u32),
}

/// How the model coordinates sit in the ambient space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Frame {
    pub basepoint: Vec<String>,
    /// Ambient coordinates used as the `w` block.
    pub w_coords: Vec<String>,
    /// Multiplier of the linear change making the `z = χ = 0` slice real, if one was needed.
    pub slice_multiplier: Option<String>,
    /// Whether the change `w ↦ Q̄(0, z, w)` was applied.
    pub normalized: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalModel {
    pub name: String,
    pub z: Vec<String>,
    pub w: Vec<String>,
    /// `Q_j(z, χ, τ)` with `χ = conj(z)`, `τ = conj(w)` as variable names.
    pub q: Vec<Poly>,
    pub kind: ModelKind,
    pub frame: Option<Frame>,
}

impl NormalModel {
    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn d(&self) -> usize {
        self.w.len()
    }

    pub fn big_n(&self) -> usize {
        self.n() + self.d()
    }

    pub fn chi(&self) -> Vec<String> {
        self.z.iter().map(|v| conj_name(v)).collect()
    }

    pub fn tau(&self) -> Vec<String> {
        self.w.iter().map(|v| conj_name(v)).collect()
    }

    /// `z` then `w`.
    pub fn coords(&self) -> Vec<String> {
        let mut v = self.z.clone();
        v.extend(self.w.iter().cloned());
        v
    }

    /// Variables of `Q`: `z, χ, τ`.
    pub fn q_vars(&self) -> VarList {
        let mut v = self.z.clone();
        v.extend(self.chi());
        v.extend(self.tau());
        std::sync::Arc::new(v)
    }

    pub fn order(&self) -> Option<u32> {
        match self.kind {
            ModelKind::Exact => None,
            ModelKind::Truncated(o) => Some(o),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.kind == ModelKind::Exact
    }

    /// `Q̄(χ, z, w)`: conjugated coefficients, `z ↔ χ`, `τ → w`.
    pub fn qbar(&self) -> Vec<Poly> {
        self.q.iter().map(|p| p.bar_swap()).collect()
    }

    fn trunc(&self, p: &Poly) -> Poly {
        match self.kind {
            ModelKind::Exact => p.clone(),
            ModelKind::Truncated(o) => p.truncate(o),
        }
    }

    fn subs(&self, p: &Poly, map: &HashMap<String, Poly>) -> Poly {
        match self.kind {
            ModelKind::Exact => p.subs(map),
            ModelKind::Truncated(o) => p.subs_trunc(map, o),
        }
    }

    /// Defining functions `w_j − Q_j(z, conj z, conj w)` of the model, in ambient form.
    pub fn defining_functions(&self) -> Vec<Poly> {
        let vars = ambient_vars(&self.coords());
        self.q.iter().zip(self.w.iter()).map(|(q, w)| &Poly::var(&vars, w) - &q.with_vars(&Poly::zero(&vars).union_vars(q.vars()))).collect()
    }

    /// The model as a real set, with reality-symmetrized defining functions.
    /// Only meaningful for exact models.
    pub fn to_spec(&self) -> ManifoldSpec {
        let owned = self.coords();
        let refs: Vec<&str> = owned.iter().map(|s| s.as_str()).collect();
        let rho: Vec<Poly> = self
            .defining_functions()
            .into_iter()
            .map(|f| (&f - &f.bar_swap()).scale(&GQ::from_ints(0, 2).inv()))
            .collect();
        let mut s = ManifoldSpec::new(&self.name, &refs, rho);
        s.basepoint = Some(vec![GQ::zero(); owned.len()]);
        s
    }
}

fn check_rigid(phi: &Poly, z: &[String], chi: &[String], j: usize) -> Result<()> {
    for block in [z, chi] {
        let zeroed: Vec<(String, GQ)> = block.iter().map(|v| (v.clone(), GQ::zero())).collect();
        let r = phi.eval_partial(&zeroed);
        if let Some((m, _)) = r.lowest_term() {
            return Err(CrError::Normality { j, monomial: r.monomial_string(&m) });
        }
    }
    Ok(())
}

/// Exact model of `Im w_j = φ_j(z, conj z)`: `Q_j = τ_j + 2i φ_j(z, χ)`.
pub fn from_rigid(name: &str, z: &[&str], w: &[&str], phi: &[Poly]) -> Result<NormalModel> {
    if phi.len() != w.len() {
        return Err(CrError::Invalid("one φ per w coordinate is required".into()));
    }
    let zs: Vec<String> = z.iter().map(|s| s.to_string()).collect();
    let ws: Vec<String> = w.iter().map(|s| s.to_string()).collect();
    let chi: Vec<String> = zs.iter().map(|v| conj_name(v)).collect();
    let mut m = NormalModel { name: name.to_string(), z: zs.clone(), w: ws.clone(), q: vec![], kind: ModelKind::Exact, frame: None };
    let vars = m.q_vars();
    for (j, f) in phi.iter().enumerate() {
        check_rigid(f, &zs, &chi, j + 1)?;
        let diff = &f.bar_swap() - f;
        if let Some((mono, _)) = diff.lowest_term() {
            return Err(CrError::Reality { j: j + 1, monomial: diff.monomial_string(&mono) });
        }
        let tau = Poly::var(&vars, &conj_name(&ws[j]));
        m.q.push(&tau + &f.with_vars(&Poly::zero(&vars).union_vars(f.vars())).scale(&GQ::from_ints(0, 2)));
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalCheck {
    pub ok: bool,
    /// `"normality"` or `"reality"`.
    pub identity: Option<String>,
    pub component: Option<usize>,
    pub monomial: Option<String>,
}

impl NormalCheck {
    fn pass() -> NormalCheck {
        NormalCheck { ok: true, identity: None, component: None, monomial: None }
    }

    fn fail(identity: &str, j: usize, p: &Poly) -> NormalCheck {
        let m = p.lowest_term().map(|(m, _)| p.monomial_string(&m));
        NormalCheck { ok: false, identity: Some(identity.into()), component: Some(j + 1), monomial: m }
    }
}

/// Checks normality and reality, exactly or to the model order.
pub fn verify_normal(m: &NormalModel) -> NormalCheck {
    let tau = m.tau();
    for (j, q) in m.q.iter().enumerate() {
        let t = Poly::var(q.vars(), &tau[j]);
        for block in [m.chi(), m.z.clone()] {
            let zeroed: Vec<(String, GQ)> = block.iter().map(|v| (v.clone(), GQ::zero())).collect();
            let r = m.trunc(&(&q.eval_partial(&zeroed) - &t));
            if !r.is_zero() {
                return NormalCheck::fail("normality", j, &r);
            }
        }
    }
    let qbar = m.qbar();
    let map: HashMap<String, Poly> = tau.iter().cloned().zip(qbar.iter().cloned()).collect();
    for (j, q) in m.q.iter().enumerate() {
        let lhs = m.subs(q, &map);
        let r = m.trunc(&(&lhs - &Poly::var(lhs.vars(), &m.w[j])));
        if !r.is_zero() {
            return NormalCheck::fail("reality", j, &r);
        }
    }
    NormalCheck::pass()
}

/// `Q̄(χ, z, w) = Σ_α q_α(z, w) χ^α`, for `|α| ≤ a_max`. Keys are multi-indices over `χ`.
pub fn q_alpha(m: &NormalModel, a_max: u32) -> BTreeMap<Monomial, Vec<Poly>> {
    let chi = m.chi();
    let mut out: BTreeMap<Monomial, Vec<Poly>> = BTreeMap::new();
    let d = m.d();
    for (j, qb) in m.qbar().iter().enumerate() {
        for (alpha, c) in qb.coefficients_in(&chi) {
            if crate::exactalg::poly::deg(&alpha) > a_max {
                continue;
            }
            let entry = out.entry(alpha).or_insert_with(|| vec![Poly::zero(c.vars()); d]);
            entry[j] = c.drop_unused();
        }
    }
    out
}

fn compose(p: &Poly, map: &HashMap<String, Poly>, exact: bool, order: u32) -> Poly {
    if exact {
        p.subs(map)
    } else {
        p.subs_trunc(map, order)
    }
}

/// Normal coordinates for `spec` at the generic point `p`, to the given order; the
/// result is marked exact when every step closed up without truncation.
pub fn solve_normal(spec: &ManifoldSpec, p: &[GQ], order: u32) -> Result<NormalModel> {
    if order < 2 {
        return Err(CrError::OrderTooSmall);
    }
    let class = classify_point(spec, p, 2)?;
    if !class.generic {
        return Err(CrError::ImplicitSolve("∂ρ/∂w singular at p".into()));
    }
    let pt = spec.diagonal(p);
    // independent rows
    let all = spec.all_vars();
    let mut rows: Vec<usize> = Vec::new();
    let mut mat: Vec<Vec<GQ>> = Vec::new();
    for (j, r) in spec.rho.iter().enumerate() {
        mat.push(spec.coords.iter().map(|v| r.derivative(v).eval(&pt)).collect());
        if Matrix::from_rows(&mat).rank() == rows.len() + 1 {
            rows.push(j);
        } else {
            mat.pop();
        }
    }
    let d = rows.len();
    // w block: greedy from the last coordinate
    let mut wcols: Vec<usize> = Vec::new();
    for c in (0..spec.dim()).rev() {
        if wcols.len() == d {
            break;
        }
        let mut cols = wcols.clone();
        cols.push(c);
        let m = Matrix::from_fn(d, cols.len(), |r, k| spec.rho[rows[r]].derivative(&spec.coords[cols[k]]).eval(&pt));
        if m.rank() == cols.len() {
            wcols.push(c);
        }
    }
    wcols.sort();
    let w: Vec<String> = wcols.iter().map(|&c| spec.coords[c].clone()).collect();
    let z: Vec<String> = (0..spec.dim()).filter(|c| !wcols.contains(c)).map(|c| spec.coords[c].clone()).collect();
    // translate
    let av = ambient_vars(&spec.coords);
    let shift: HashMap<String, Poly> = all
        .iter()
        .map(|v| (v.clone(), &Poly::var(&av, v) + &Poly::constant(&av, pt[v].clone())))
        .collect();
    let eqs: Vec<Poly> = rows.iter().map(|&j| spec.rho[j].subs(&shift)).collect();
    let sol = solve_implicit(&eqs, &w, order)?;
    let mut model = NormalModel {
        name: spec.name.clone(),
        z: z.clone(),
        w: w.clone(),
        q: vec![],
        kind: ModelKind::Exact,
        frame: Some(Frame {
            basepoint: p.iter().map(|x| x.to_string()).collect(),
            w_coords: w.clone(),
            slice_multiplier: None,
            normalized: false,
        }),
    };
    let qv = model.q_vars();
    let mut exact = sol.exact;
    let mut q: Vec<Poly> = sol.values.iter().map(|s| s.with_vars(&Poly::zero(&qv).union_vars(s.vars()))).collect();
    let tau = model.tau();
    let chi = model.chi();
    let zero_zchi: Vec<(String, GQ)> = z.iter().chain(chi.iter()).map(|v| (v.clone(), GQ::zero())).collect();

    // make the z = χ = 0 slice real
    let a: Vec<Poly> = q.iter().map(|qj| qj.eval_partial(&zero_zchi)).collect();
    let ident = a.iter().zip(tau.iter()).all(|(aj, t)| *aj == Poly::var(aj.vars(), t));
    if !ident {
        let (lambda, psi, psibar) = slice_change(&a, &w, &tau)?;
        // τ = ψ̄⁻¹(τ̃): solve τ̃ − ψ̄(τ) = 0 for τ, with τ̃ under temporary names
        let tmp: Vec<String> = (0..d).map(|k| format!("__t{}", k)).collect();
        let tv = var_list(&tmp);
        let inv_eqs: Vec<Poly> = psibar.iter().enumerate().map(|(k, f)| &Poly::var(&tv, &tmp[k]) - f).collect();
        let inv = solve_implicit(&inv_eqs, &tau, order)?;
        exact &= inv.exact;
        let wmap: HashMap<String, Poly> = w.iter().cloned().zip(q.iter().cloned()).collect();
        let outer: Vec<Poly> = psi.iter().map(|f| compose(f, &wmap, exact, order)).collect();
        let tmap: HashMap<String, Poly> = tau.iter().cloned().zip(inv.values.iter().cloned()).collect();
        let back: HashMap<String, String> = tmp.iter().cloned().zip(tau.iter().cloned()).collect();
        q = outer.iter().map(|f| compose(f, &tmap, exact, order).rename(&back).with_vars(&qv)).collect();
        if let Some(fr) = model.frame.as_mut() {
            fr.slice_multiplier = Some(lambda.to_string());
        }
    }
    // Φ(z, w) = Q̄(0, z, w); Q' = Φ(z, Q(z, χ, Φ̄⁻¹(χ, τ')))
    let zero_z: Vec<(String, GQ)> = z.iter().map(|v| (v.clone(), GQ::zero())).collect();
    let zero_chi: Vec<(String, GQ)> = chi.iter().map(|v| (v.clone(), GQ::zero())).collect();
    let normal = q.iter().zip(tau.iter()).all(|(qj, t)| {
        let tp = Poly::var(qj.vars(), t);
        qj.eval_partial(&zero_z) == tp && qj.eval_partial(&zero_chi) == tp
    });
    if !normal {
        let phibar: Vec<Poly> = q.iter().map(|qj| qj.eval_partial(&zero_z)).collect();
        let phi: Vec<Poly> = phibar.iter().map(|f| f.bar_swap()).collect();
        let tmp: Vec<String> = (0..d).map(|k| format!("__t{}", k)).collect();
        let tv = var_list(&tmp);
        let inv_eqs: Vec<Poly> = phibar.iter().enumerate().map(|(k, f)| &Poly::var(&tv, &tmp[k]) - f).collect();
        let inv = solve_implicit(&inv_eqs, &tau, order)?;
        exact &= inv.exact;
        let wmap: HashMap<String, Poly> = w.iter().cloned().zip(q.iter().cloned()).collect();
        let outer: Vec<Poly> = phi.iter().map(|f| compose(f, &wmap, exact, order)).collect();
        let tmap: HashMap<String, Poly> = tau.iter().cloned().zip(inv.values.iter().cloned()).collect();
        let back: HashMap<String, String> = tmp.iter().cloned().zip(tau.iter().cloned()).collect();
        q = outer.iter().map(|f| compose(f, &tmap, exact, order).rename(&back).with_vars(&qv)).collect();
        if let Some(fr) = model.frame.as_mut() {
            fr.normalized = true;
        }
    }
    model.q = q;
    model.kind = if exact { ModelKind::Exact } else { ModelKind::Truncated(order) };
    if exact && !verify_normal(&model).ok {
        model.kind = ModelKind::Truncated(order);
        model.q = model.q.iter().map(|p| p.truncate(order)).collect();
    }
    if !exact {
        model.q = model.q.iter().map(|p| p.truncate(order)).collect();
    }
    Ok(model)
}

/// `ψ(w) = λw + λ̄Ā(w)` and `ψ̄(τ) = λ̄τ + λA(τ)` for the first λ making the linear part invertible.
fn slice_change(a: &[Poly], w: &[String], tau: &[String]) -> Result<(GQ, Vec<Poly>, Vec<Poly>)> {
    let d = w.len();
    let wv = var_list(w);
    let to_w: HashMap<String, String> = tau.iter().cloned().zip(w.iter().cloned()).collect();
    let candidates = [GQ::one(), GQ::i(), GQ::from_ints(1, 2), GQ::from_ints(2, 1), GQ::from_ints(1, 3), GQ::from_ints(3, -1)];
    for lambda in candidates {
        let psibar: Vec<Poly> = (0..d)
            .map(|k| &Poly::var(&var_list(tau), &tau[k]).scale(&lambda.conj()) + &a[k].scale(&lambda))
            .collect();
        let psi: Vec<Poly> = psibar.iter().map(|f| f.bar().rename(&to_w).with_vars(&Poly::zero(&wv).union_vars(f.vars()).clone())).collect();
        let zero: HashMap<String, GQ> = HashMap::new();
        let lin = Matrix::from_fn(d, d, |r, c| psibar[r].derivative(&tau[c]).eval(&zero));
        if lin.inverse().is_some() {
            return Ok((lambda, psi, psibar));
        }
    }
    Err(CrError::ImplicitSolve("could not make the base slice real".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::var_list;

    fn lewy_model() -> NormalModel {
        let v = var_list(&["z", "conj(z)"]);
        from_rigid("lewy", &["z"], &["w"], &[&Poly::var(&v, "z") * &Poly::var(&v, "conj(z)")]).unwrap()
    }

    #[test]
    fn lewy_rigid() {
        let m = lewy_model();
        let v = m.q_vars();
        let expect = &Poly::var(&v, "conj(w)") + &(&Poly::var(&v, "z") * &Poly::var(&v, "conj(z)")).scale(&GQ::from_ints(0, 2));
        assert_eq!(m.q[0], expect);
        assert!(verify_normal(&m).ok);
        // Q̄(χ, z, w) = w − 2iχz
        let qb = &m.qbar()[0];
        assert_eq!(qb.coeff_of(&[("w", 1)]), GQ::one());
        assert_eq!(qb.coeff_of(&[("z", 1), ("conj(z)", 1)]), GQ::from_ints(0, -2));
    }

    #[test]
    fn tampered_model_fails_normality() {
        let mut m = lewy_model();
        let z2 = Poly::var(&m.q_vars(), "z").pow(2);
        m.q[0] = &m.q[0] + &z2;
        let c = verify_normal(&m);
        assert!(!c.ok);
        assert_eq!(c.identity.as_deref(), Some("normality"));
        assert_eq!(c.monomial.as_deref(), Some("z^2"));
    }

    #[test]
    fn lewy_q_alpha() {
        let t = q_alpha(&lewy_model(), 4);
        assert_eq!(t.len(), 2);
        let v = var_list(&["z", "w"]);
        assert_eq!(t[&vec![0]][0], Poly::var(&v, "w"));
        assert_eq!(t[&vec![1]][0], Poly::var(&v, "z").scale(&GQ::from_ints(0, -2)));
    }

    #[test]
    fn rigid_rejects_non_normal() {
        let v = var_list(&["z", "conj(z)"]);
        let phi = &Poly::var(&v, "z") + &Poly::var(&v, "conj(z)");
        assert!(matches!(from_rigid("x", &["z"], &["w"], &[phi]), Err(CrError::Normality { .. })));
    }

    #[test]
    fn solve_matches_rigid_for_lewy() {
        let s = crate::dsl::parse_manifold("manifold lewy in C^2\nvars z w\neq Im(w) = |z|^2\n").unwrap();
        let m = solve_normal(&s, &[GQ::zero(), GQ::zero()], 8).unwrap();
        assert!(m.is_exact());
        assert_eq!(m.q, lewy_model().q);
    }

    #[test]
    fn flat_model() {
        let s = crate::dsl::parse_manifold("manifold flat in C^1\nvars w\neq Im(w) = 0\n").unwrap();
        let m = solve_normal(&s, &[GQ::zero()], 4).unwrap();
        assert_eq!(m.q[0], Poly::var(&m.q_vars(), "conj(w)"));
    }

    #[test]
    fn order_guard() {
        let s = crate::dsl::parse_manifold("manifold flat in C^1\nvars w\neq Im(w) = 0\n").unwrap();
        assert_eq!(solve_normal(&s, &[GQ::zero()], 1), Err(CrError::OrderTooSmall));
    }
}
