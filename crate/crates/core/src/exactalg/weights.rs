//! Weighted degrees. A conjugate variable `conj(v)` carries the weight of `v`.

use super::poly::{unconj_name, Monomial, Poly};
use crate::error::{CrError, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    pub names: Vec<String>,
    pub weights: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Homogeneity {
    Homogeneous(u32),
    /// Two distinct term degrees found.
    Mixed(u32, u32),
}

impl WeightVector {
    pub fn new(names: &[&str], weights: &[u32]) -> Result<WeightVector> {
        if names.len() != weights.len() {
            return Err(CrError::Invalid("weight count does not match variable count".into()));
        }
        if weights.iter().any(|&w| w == 0) {
            return Err(CrError::Invalid("weights must be positive".into()));
        }
        Ok(WeightVector { names: names.iter().map(|s| s.to_string()).collect(), weights: weights.to_vec() })
    }

    pub fn unit(names: &[String]) -> WeightVector {
        WeightVector { names: names.to_vec(), weights: vec![1; names.len()] }
    }

    /// Weight of a variable name; unknown variables weigh 1.
    pub fn weight_of(&self, var: &str) -> u32 {
        let base = unconj_name(var).unwrap_or(var);
        self.names.iter().position(|n| n == base).map(|k| self.weights[k]).unwrap_or(1)
    }

    pub fn monomial_weight(&self, p: &Poly, m: &Monomial) -> u32 {
        p.vars().iter().zip(m.iter()).map(|(v, &e)| self.weight_of(v) * e as u32).sum()
    }

    /// Per-variable weights aligned with `p`'s variable list.
    pub fn for_vars(&self, p: &Poly) -> Vec<u32> {
        p.vars().iter().map(|v| self.weight_of(v)).collect()
    }
}

pub fn weighted_degree(p: &Poly, w: &WeightVector) -> Result<Homogeneity> {
    let mut degs = p.terms().keys().map(|m| w.monomial_weight(p, m));
    let first = degs.next().ok_or(CrError::ZeroPolynomial)?;
    for d in degs {
        if d != first {
            return Ok(Homogeneity::Mixed(first.min(d), first.max(d)));
        }
    }
    Ok(Homogeneity::Homogeneous(first))
}

/// Part of `p` of weighted degree exactly `k`.
pub fn weighted_part(p: &Poly, w: &WeightVector, k: u32) -> Poly {
    let ws = w.for_vars(p);
    p.filter_terms(|m| m.iter().zip(ws.iter()).map(|(&e, &x)| e as u32 * x).sum::<u32>() == k)
}

/// Smallest weighted degree of a term together with that term's monomial, if nonzero.
pub fn min_weighted_term(p: &Poly, w: &WeightVector) -> Option<(u32, Monomial)> {
    p.terms().keys().map(|m| (w.monomial_weight(p, m), m.clone())).min_by_key(|(d, _)| *d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::poly::var_list;
    use crate::exactalg::scalar::GQ;

    #[test]
    fn examples() {
        let v = var_list(&["z", "w1", "w2", "conj(z)", "conj(w1)", "conj(w2)"]);
        let w = WeightVector::new(&["z", "w1", "w2"], &[1, 2, 4]).unwrap();
        let z = Poly::var(&v, "z");
        let chi = Poly::var(&v, "conj(z)");
        let p = &(&Poly::var(&v, "w2") - &Poly::var(&v, "conj(w2)"))
            - &(&z.pow(2) * &chi.pow(2)).scale(&GQ::from_ints(0, 2));
        assert_eq!(weighted_degree(&p, &w).unwrap(), Homogeneity::Homogeneous(4));
        let unit = WeightVector::unit(&["z".into()]);
        assert_eq!(weighted_degree(&(&z * &chi), &unit).unwrap(), Homogeneity::Homogeneous(2));
        assert_eq!(weighted_degree(&(&z + &z.pow(2)), &unit).unwrap(), Homogeneity::Mixed(1, 2));
        assert_eq!(weighted_degree(&Poly::zero(&v), &unit), Err(CrError::ZeroPolynomial));
    }
}
