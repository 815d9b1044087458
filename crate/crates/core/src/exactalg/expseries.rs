//! Finite sums `Σ e^{c} · s_c(x)` of truncated series weighted by exponentials of
//! Gaussian-rational constants. Distinct constants give linearly independent
//! exponentials over the algebraic numbers, so such a sum vanishes exactly when
//! every group does.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::poly::{Poly, VarList};
use super::scalar::GQ;
use super::series::Series;
use crate::error::{CrError, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct ExpSeries {
    groups: BTreeMap<GQ, Poly>,
    order: u32,
    vars: VarList,
}

impl ExpSeries {
    pub fn zero(vars: &VarList, order: u32) -> ExpSeries {
        ExpSeries { groups: BTreeMap::new(), order, vars: vars.clone() }
    }

    pub fn from_poly(p: &Poly, order: u32) -> ExpSeries {
        ExpSeries::group(GQ::zero(), p, order)
    }

    pub fn constant(vars: &VarList, c: GQ, order: u32) -> ExpSeries {
        ExpSeries::from_poly(&Poly::constant(vars, c), order)
    }

    /// `e^{c} · p`.
    pub fn group(c: GQ, p: &Poly, order: u32) -> ExpSeries {
        let mut out = ExpSeries::zero(p.vars(), order);
        out.insert(c, p.truncate(order));
        out
    }

    fn insert(&mut self, c: GQ, p: Poly) {
        if p.is_zero() {
            return;
        }
        self.vars = p.union_vars(&self.vars);
        let merged = match self.groups.remove(&c) {
            Some(q) => &q + &p,
            None => p,
        };
        if !merged.is_zero() {
            self.groups.insert(c, merged);
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn groups(&self) -> &BTreeMap<GQ, Poly> {
        &self.groups
    }

    pub fn is_zero(&self) -> bool {
        self.groups.is_empty()
    }

    /// The plain series if there is no exponential factor other than `e^0`.
    pub fn as_series(&self) -> Option<Series> {
        match self.groups.len() {
            0 => Some(Series::zero(&self.vars, self.order)),
            1 => self.groups.get(&GQ::zero()).map(|p| Series::new(p, self.order)),
            _ => None,
        }
    }

    /// Value at the origin of the local coordinates, as `(c, s_c(0))` pairs.
    pub fn constant_terms(&self) -> Vec<(GQ, GQ)> {
        self.groups
            .iter()
            .map(|(c, p)| (c.clone(), p.constant_term()))
            .filter(|(_, v)| !v.is_zero())
            .collect()
    }

    pub fn add(&self, other: &ExpSeries) -> ExpSeries {
        let mut out = self.truncate(self.order.min(other.order));
        for (c, p) in &other.groups {
            out.insert(c.clone(), p.truncate(out.order));
        }
        out
    }

    pub fn neg(&self) -> ExpSeries {
        ExpSeries {
            groups: self.groups.iter().map(|(c, p)| (c.clone(), -p)).collect(),
            order: self.order,
            vars: self.vars.clone(),
        }
    }

    pub fn sub(&self, other: &ExpSeries) -> ExpSeries {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &GQ) -> ExpSeries {
        let mut out = ExpSeries::zero(&self.vars, self.order);
        for (c, p) in &self.groups {
            out.insert(c.clone(), p.scale(k));
        }
        out
    }

    pub fn mul(&self, other: &ExpSeries) -> ExpSeries {
        let o = self.order.min(other.order);
        let mut out = ExpSeries::zero(&self.vars, o);
        for (c1, p1) in &self.groups {
            for (c2, p2) in &other.groups {
                out.insert(c1 + c2, p1.mul_trunc(p2, o));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> ExpSeries {
        let mut acc = ExpSeries::constant(&self.vars, GQ::from(1), self.order);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn truncate(&self, order: u32) -> ExpSeries {
        let o = order.min(self.order);
        let mut out = ExpSeries::zero(&self.vars, o);
        for (c, p) in &self.groups {
            out.insert(c.clone(), p.truncate(o));
        }
        out
    }

    /// `exp(self)`; the argument must not itself carry exponential factors.
    pub fn exp(&self) -> Result<ExpSeries> {
        let s = self
            .as_series()
            .ok_or_else(|| CrError::Invalid("exponential of an exponential is not supported".into()))?;
        let c0 = s.poly().constant_term();
        let rest = Series::new(&(s.poly() - &Poly::constant(s.vars(), c0.clone())), s.order());
        let e = rest.exp()?;
        Ok(ExpSeries::group(c0, e.poly(), s.order()))
    }

    /// `1/self`; allowed when exactly one exponential group is present.
    pub fn inverse(&self) -> Result<ExpSeries> {
        if self.groups.len() != 1 {
            return Err(CrError::Invalid("division by a sum of exponential terms".into()));
        }
        let (c, p) = self.groups.iter().next().unwrap();
        let inv = Series::new(p, self.order)
            .inverse()
            .map_err(|_| CrError::Invalid("division by a function vanishing at the base point".into()))?;
        Ok(ExpSeries::group(-c, inv.poly(), self.order))
    }

    /// Partial derivative; the exponential constants are unaffected and one order is lost.
    pub fn derivative(&self, var: &str) -> ExpSeries {
        let o = self.order.saturating_sub(1);
        let mut out = ExpSeries::zero(&self.vars, o);
        for (c, p) in &self.groups {
            out.insert(c.clone(), p.derivative(var).truncate(o));
        }
        out
    }

    /// Coefficient-wise conjugation, constants included.
    pub fn bar(&self) -> ExpSeries {
        let mut out = ExpSeries::zero(&self.vars, self.order);
        for (c, p) in &self.groups {
            out.insert(c.conj(), p.bar());
        }
        out
    }

    /// Lowest-degree nonzero term across all groups: `(degree, monomial string, constant)`.
    pub fn first_nonzero(&self) -> Option<(u32, String, GQ)> {
        self.groups
            .iter()
            .filter_map(|(c, p)| p.lowest_term().map(|(m, _)| (super::poly::deg(&m), p.monomial_string(&m), c.clone())))
            .min_by_key(|x| x.0)
    }
}

impl fmt::Display for ExpSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.groups.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|(c, p)| if c.is_zero() { format!("({})", p) } else { format!("exp({})*({})", c, p) })
            .collect();
        write!(f, "{} + O({})", parts.join(" + "), self.order + 1)
    }
}

impl fmt::Debug for ExpSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::poly::var_list;

    #[test]
    fn exp_splits_constant() {
        let v = var_list(&["x"]);
        let arg = &Poly::constant(&v, GQ::from_frac(1, 2)) + &Poly::var(&v, "x");
        let e = ExpSeries::from_poly(&arg, 4).exp().unwrap();
        assert_eq!(e.groups().len(), 1);
        assert!(e.groups().contains_key(&GQ::from_frac(1, 2)));
        // e^{a} e^{-a} = 1
        let back = e.mul(&ExpSeries::from_poly(&(-&arg), 4).exp().unwrap());
        assert_eq!(back, ExpSeries::constant(&v, GQ::from(1), 4));
    }

    #[test]
    fn independent_groups_do_not_cancel() {
        let v = var_list(&["x"]);
        let one = Poly::one(&v);
        let a = ExpSeries::group(GQ::from(1), &one, 3);
        let b = ExpSeries::group(GQ::zero(), &one, 3);
        assert!(!a.sub(&b).is_zero());
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn inverse_of_single_group() {
        let v = var_list(&["x"]);
        let p = &Poly::constant(&v, GQ::i()) + &Poly::var(&v, "x");
        let a = ExpSeries::group(GQ::i(), &p, 5);
        let prod = a.mul(&a.inverse().unwrap());
        assert_eq!(prod, ExpSeries::constant(&v, GQ::from(1), 5));
    }
}
