//! Sylvester resultants and univariate gcds.

use num_traits::Zero;

use super::poly::Poly;
use crate::error::{CrError, Result};

/// Sylvester matrix of `p` and `q` in `var` (rows of `p` first), entries in the other variables.
pub fn sylvester_matrix(p: &Poly, q: &Poly, var: &str) -> Vec<Vec<Poly>> {
    let pc = p.univariate_coeffs(var);
    let qc = q.univariate_coeffs(var);
    let m = pc.len() - 1;
    let n = qc.len() - 1;
    let size = m + n;
    let zero = Poly::zero(p.vars());
    let mut rows = Vec::with_capacity(size);
    for k in 0..n {
        let mut row = vec![zero.clone(); size];
        for (e, c) in pc.iter().enumerate() {
            row[k + (m - e)] = c.clone();
        }
        rows.push(row);
    }
    for k in 0..m {
        let mut row = vec![zero.clone(); size];
        for (e, c) in qc.iter().enumerate() {
            row[k + (n - e)] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// Fraction-free (Bareiss) determinant of a matrix of polynomials.
pub fn poly_determinant(mut a: Vec<Vec<Poly>>) -> Poly {
    let n = a.len();
    if n == 0 {
        return Poly::one(&super::poly::var_list::<&str>(&[]));
    }
    let mut sign = false;
    let mut prev = Poly::one(a[0][0].vars());
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = !sign;
                }
                None => return Poly::zero(a[0][0].vars()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
            a[i][k] = Poly::zero(a[i][k].vars());
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign {
        -det
    } else {
        det
    }
}

/// Resultant of `p` and `q` with respect to `var`.
pub fn resultant(p: &Poly, q: &Poly, var: &str) -> Result<Poly> {
    if p.degree_in(var) == 0 || q.degree_in(var) == 0 {
        return Err(CrError::NotInVariable);
    }
    let vars = p.union_vars(q.vars());
    let (p, q) = (p.with_vars(&vars), q.with_vars(&vars));
    Ok(poly_determinant(sylvester_matrix(&p, &q, var)).drop_unused())
}

/// Monic gcd of two polynomials in the single variable `var` (no other variables may occur).
pub fn univariate_gcd(a: &Poly, b: &Poly, var: &str) -> Poly {
    let mut a = a.clone();
    let mut b = b.clone();
    while !b.is_zero() {
        let r = univariate_rem(&a, &b, var);
        a = b;
        b = r;
    }
    if a.is_zero() {
        return a;
    }
    let lead = a.univariate_coeffs(var).last().unwrap().constant_term();
    a.scale(&lead.inv())
}

fn univariate_rem(a: &Poly, b: &Poly, var: &str) -> Poly {
    let db = b.degree_in(var);
    let bc = b.univariate_coeffs(var);
    let lb = bc[db as usize].constant_term();
    assert!(!lb.is_zero(), "univariate_gcd expects a polynomial in one variable");
    let x = Poly::var(b.vars(), var);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(var) >= db {
        let dr = r.degree_in(var);
        let lr = r.univariate_coeffs(var)[dr as usize].constant_term();
        let t = x.pow(dr - db).scale(&(&lr / &lb));
        r = &r - &(&t * b);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::poly::var_list;
    use crate::exactalg::scalar::GQ;

    #[test]
    fn simple_resultants() {
        let v = var_list(&["x", "a", "b"]);
        let x = Poly::var(&v, "x");
        let one = Poly::one(&v);
        let p = &x.pow(2) - &one;
        let q = &x - &one.scale(&GQ::from(2));
        assert_eq!(resultant(&p, &q, "x").unwrap().constant_term(), GQ::from(3));
        let a = Poly::var(&v, "a");
        let b = Poly::var(&v, "b");
        // det [[1, -a], [1, -b]] = a - b
        assert_eq!(resultant(&(&x - &a), &(&x - &b), "x").unwrap(), &a - &b);
        assert!(resultant(&p, &p, "x").unwrap().is_zero());
        assert_eq!(resultant(&a, &p, "x"), Err(CrError::NotInVariable));
    }

    #[test]
    fn gcd_of_monomials() {
        let v = var_list(&["z"]);
        let z = Poly::var(&v, "z");
        assert_eq!(univariate_gcd(&z.scale(&GQ::i()), &z.pow(2), "z"), z);
    }
}
