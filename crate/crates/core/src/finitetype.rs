//! Hörmander numbers and minimality from iterated brackets of CR vector fields.
//!
//! On the complexification, in coordinates `(z, χ, τ)` with `w = Q(z, χ, τ)`, the complexified
//! CR bundle is spanned by `A_j = ∂/∂z_j` and `B_j = ∂/∂χ_j + Σ_k b_kj ∂/∂τ_k`, where
//! `b_kj = ∂Q̄_k/∂χ_j (χ, z, w)` at `w = Q(z, χ, τ)`. Complex dimensions of the spans of their
//! brackets at the origin equal the real dimensions of the real filtration.
//!
//! A bracket word of length `L` has a value at the origin depending only on the
//! `(length_max − L)`-jets of the words it is built from, so words are stored at that
//! precision and pruned by linear dependence at it.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{CrError, Result};
use crate::exactalg::linalg::Matrix;
use crate::exactalg::{Monomial, Poly, GQ};
use crate::normalform::NormalModel;

pub const DEFAULT_LENGTH_MAX: u32 = 8;

/// Vector field on the complexification: coefficients of `∂/∂v` for each model variable `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub coeffs: Vec<Poly>,
    /// Generator indices, innermost last: `[g_1, [g_2, …]]`.
    pub word: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeVerdict {
    Minimal,
    NotMinimal,
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeReport {
    /// `dim E_k` for `k = 1, …` (entry 0 is `E_1 = E_0`, of dimension `2n`).
    pub filtration_dims: Vec<usize>,
    /// `(μ_j, ℓ_j)`.
    pub hormander: Vec<(u32, usize)>,
    pub with_multiplicity: Vec<u32>,
    pub r: usize,
    pub verdict: TypeVerdict,
    pub bracket_bound: u32,
    /// Words whose values span the final space, as strings like `[A1,B1]`.
    pub certificate: Vec<String>,
}

impl TypeReport {
    pub fn minimal(&self) -> bool {
        self.verdict == TypeVerdict::Minimal
    }
}

/// The generators `A_1..A_n, B_1..B_n`, truncated to `order` (`None` keeps them exact).
pub fn cr_fields(m: &NormalModel, order: Option<u32>) -> Vec<Field> {
    let vars = m.q_vars();
    let n = m.n();
    let d = m.d();
    let dim = 2 * n + d;
    let chi = m.chi();
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        let mut coeffs = vec![Poly::zero(&vars); dim];
        coeffs[j] = Poly::one(&vars);
        out.push(Field { coeffs, word: vec![j] });
    }
    let wmap: HashMap<String, Poly> = m.w.iter().cloned().zip(m.q.iter().cloned()).collect();
    let qbar = m.qbar();
    let trunc = |p: Poly| match order {
        Some(o) => p.truncate(o),
        None => p,
    };
    for j in 0..n {
        let mut coeffs = vec![Poly::zero(&vars); dim];
        coeffs[n + j] = Poly::one(&vars);
        for k in 0..d {
            let dq = qbar[k].derivative(&chi[j]);
            let b = match order.or(m.order()) {
                None => dq.subs(&wmap),
                Some(o) => dq.subs_trunc(&wmap, o),
            };
            coeffs[2 * n + k] = trunc(b.with_vars(&vars));
        }
        out.push(Field { coeffs, word: vec![n + j] });
    }
    out
}

fn apply(x: &Field, f: &Poly, names: &[String], order: Option<u32>) -> Poly {
    let mut acc = Poly::zero(f.vars());
    for (c, v) in x.coeffs.iter().zip(names) {
        if c.is_zero() || !f.depends_on(v) {
            continue;
        }
        let df = f.derivative(v);
        acc = &acc + &match order {
            Some(o) => c.mul_trunc(&df, o),
            None => c * &df,
        };
    }
    acc
}

pub fn bracket(x: &Field, y: &Field, names: &[String], order: Option<u32>) -> Field {
    let coeffs = (0..names.len())
        .map(|k| &apply(x, &y.coeffs[k], names, order) - &apply(y, &x.coeffs[k], names, order))
        .collect();
    let mut word = x.word.clone();
    word.extend(y.word.iter().cloned());
    Field { coeffs, word }
}

fn value_at_origin(f: &Field) -> Vec<GQ> {
    f.coeffs.iter().map(|c| c.constant_term()).collect()
}

fn truncate_field(f: &Field, order: Option<u32>) -> Field {
    match order {
        Some(o) => Field { coeffs: f.coeffs.iter().map(|c| c.truncate(o)).collect(), word: f.word.clone() },
        None => f.clone(),
    }
}

/// Coefficient vectors of fields over a shared index of `(component, monomial)`.
fn coefficient_rank(fields: &[&Field]) -> usize {
    let mut index: BTreeMap<(usize, Monomial), usize> = BTreeMap::new();
    for f in fields {
        for (k, c) in f.coeffs.iter().enumerate() {
            for m in c.terms().keys() {
                let len = index.len();
                index.entry((k, m.clone())).or_insert(len);
            }
        }
    }
    let mut mat = Matrix::zeros(fields.len(), index.len());
    for (r, f) in fields.iter().enumerate() {
        for (k, c) in f.coeffs.iter().enumerate() {
            for (m, v) in c.terms() {
                mat.set(r, index[&(k, m.clone())], v.clone());
            }
        }
    }
    mat.rank()
}

pub fn word_string(word: &[usize], n: usize) -> String {
    let name = |g: usize| if g < n { format!("A{}", g + 1) } else { format!("B{}", g - n + 1) };
    match word.len() {
        0 => String::new(),
        1 => name(word[0]),
        _ => format!("[{},{}]", name(word[0]), word_string(&word[1..], n)),
    }
}

/// Hörmander filtration from the given generators.
pub fn hormander_from(m: &NormalModel, gens: &[Field], length_max: u32) -> TypeReport {
    let names: Vec<String> = m.q_vars().to_vec();
    let n = m.n();
    let full = 2 * n + m.d();
    let prec = |len: u32| Some(length_max.saturating_sub(len));
    let gens_t: Vec<Field> = gens.iter().map(|g| truncate_field(g, prec(1))).collect();
    let mut kept: Vec<(Field, u32)> = Vec::new();
    let mut values: Vec<Vec<GQ>> = Vec::new();
    let mut certificate: Vec<String> = Vec::new();
    let mut dims: Vec<usize> = Vec::new();
    let mut stabilized = false;
    let mut frontier: Vec<Field> = Vec::new();
    for len in 1..=length_max {
        let p = prec(len);
        let candidates: Vec<Field> = if len == 1 {
            gens_t.clone()
        } else {
            let mut c = Vec::new();
            for g in &gens_t {
                for w in &frontier {
                    c.push(truncate_field(&bracket(g, w, &names, p), p));
                }
            }
            c
        };
        let mut added = Vec::new();
        for cand in candidates {
            let base: Vec<Field> = kept.iter().map(|(f, _)| truncate_field(f, p)).chain(added.iter().cloned()).collect();
            let before = coefficient_rank(&base.iter().collect::<Vec<_>>());
            let mut with: Vec<&Field> = base.iter().collect();
            with.push(&cand);
            if coefficient_rank(&with) > before {
                let v = value_at_origin(&cand);
                let mut vals = values.clone();
                vals.push(v.clone());
                if Matrix::from_rows(&vals).rank() > Matrix::from_rows(&values).rank() {
                    values = vals;
                    certificate.push(word_string(&cand.word, n));
                }
                added.push(cand);
            }
        }
        let dim = if values.is_empty() { 0 } else { Matrix::from_rows(&values).rank() };
        dims.push(dim);
        if dim == full {
            break;
        }
        if added.is_empty() && len >= 2 && p.unwrap_or(0) >= 1 {
            stabilized = true;
            break;
        }
        kept.extend(added.iter().cloned().map(|f| (f, len)));
        frontier = added;
    }
    let mut hormander = Vec::new();
    let mut with_multiplicity = Vec::new();
    for k in 1..dims.len() {
        if dims[k] > dims[k - 1] {
            let l = dims[k] - dims[k - 1];
            hormander.push((k as u32 + 1, l));
            with_multiplicity.extend(std::iter::repeat(k as u32 + 1).take(l));
        }
    }
    let last = *dims.last().unwrap_or(&0);
    let r = last.saturating_sub(2 * n);
    let verdict = if last == full {
        TypeVerdict::Minimal
    } else if stabilized {
        TypeVerdict::NotMinimal
    } else {
        TypeVerdict::Truncated
    };
    TypeReport { filtration_dims: dims, hormander, with_multiplicity, r, verdict, bracket_bound: length_max, certificate }
}

/// Hörmander numbers at the model's base point.
pub fn hormander(m: &NormalModel, length_max: u32) -> Result<TypeReport> {
    if length_max < 1 {
        return Err(CrError::Invalid("bracket length must be at least 1".into()));
    }
    // a jet of order o gives generator coefficients to order o − 1
    let lmax = match m.order() {
        Some(o) => length_max.min(o),
        None => length_max,
    };
    let gens = cr_fields(m, Some(lmax.saturating_sub(1)));
    Ok(hormander_from(m, &gens, lmax))
}

pub fn is_minimal(m: &NormalModel, length_max: u32) -> Result<(TypeVerdict, Vec<String>)> {
    let r = hormander(m, length_max)?;
    Ok((r.verdict, r.certificate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::exactalg::var_list;
    use crate::normalform::{from_rigid, solve_normal};

    fn model(name: &str) -> NormalModel {
        let s = corpus::manifold(name).unwrap();
        solve_normal(&s, &s.basepoint_or_origin(), 8).unwrap()
    }

    #[test]
    fn lewy_needs_one_bracket() {
        let v = var_list(&["z", "conj(z)"]);
        let m = from_rigid("lewy", &["z"], &["w"], &[&Poly::var(&v, "z") * &Poly::var(&v, "conj(z)")]).unwrap();
        let r = hormander(&m, 8).unwrap();
        assert_eq!(r.hormander, vec![(2, 1)]);
        assert_eq!(r.verdict, TypeVerdict::Minimal);
        assert_eq!(r.certificate.len(), 3);
        assert_eq!(r.certificate[2].matches('[').count(), 1);
    }

    #[test]
    fn ex223_numbers() {
        let r = hormander(&model("ex223"), 8).unwrap();
        assert_eq!(r.hormander, vec![(2, 1), (4, 1)]);
        assert_eq!(r.with_multiplicity, vec![2, 4]);
        assert!(r.minimal());
    }

    #[test]
    fn ex224_single_number() {
        let r = hormander(&model("ex224"), 8).unwrap();
        assert_eq!(r.with_multiplicity, vec![2]);
        assert_eq!(r.verdict, TypeVerdict::NotMinimal);
    }

    #[test]
    fn ex315_not_minimal() {
        let r = hormander(&model("ex315"), 8).unwrap();
        assert_eq!(r.with_multiplicity, vec![2]);
        assert_eq!(r.verdict, TypeVerdict::NotMinimal);
    }

    #[test]
    fn rline_and_flat() {
        let r = hormander(&model("rline"), 8).unwrap();
        assert_eq!(r.r, 0);
        assert!(r.hormander.is_empty());
        assert!(!r.minimal());
        let v = var_list(&["z", "conj(z)"]);
        let flat = from_rigid("flat", &["z"], &["w"], &[Poly::zero(&v)]).unwrap();
        let r = hormander(&flat, 8).unwrap();
        assert_eq!(r.filtration_dims, vec![2, 2]);
        assert_eq!(r.verdict, TypeVerdict::NotMinimal);
    }

    #[test]
    fn multiplicity_bookkeeping() {
        for name in ["lewy", "ex223", "ex224", "ex315"] {
            let r = hormander(&model(name), 8).unwrap();
            let total: usize = r.hormander.iter().map(|h| h.1).sum();
            assert_eq!(total, r.filtration_dims.last().unwrap() - r.filtration_dims[0]);
            assert_eq!(r.with_multiplicity.len(), r.r);
        }
    }
}
