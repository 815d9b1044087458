//! Generic rank of polynomial maps.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use super::linalg::Matrix;
use super::poly::Poly;
use super::scalar::GQ;

/// Bound on numerators and denominators of sampled coordinates.
pub const SAMPLE_BOUND: i64 = 1_000_000;
/// Number of independent samples; the maximum rank is reported.
pub const RETRIES: usize = 3;
/// Symbolic rank is also computed when `#components · #variables` is at most this.
pub const SYMBOLIC_THRESHOLD: usize = 9;

pub fn random_coordinate<R: Rng + ?Sized>(rng: &mut R) -> GQ {
    let mut part = || {
        let n: i64 = rng.gen_range(-SAMPLE_BOUND..=SAMPLE_BOUND);
        let d: i64 = rng.gen_range(1..=SAMPLE_BOUND);
        BigRational::new(BigInt::from(n), BigInt::from(d))
    };
    let re = part();
    let im = part();
    GQ::new(re, im)
}

pub fn random_point<R: Rng + ?Sized>(vars: &[String], rng: &mut R) -> HashMap<String, GQ> {
    vars.iter().map(|v| (v.clone(), random_coordinate(rng))).collect()
}

/// Jacobian `∂f_i/∂x_j` evaluated at `point`.
pub fn jacobian_at(components: &[Poly], vars: &[String], point: &HashMap<String, GQ>) -> Matrix {
    Matrix::from_fn(components.len(), vars.len(), |r, c| components[r].derivative(&vars[c]).eval(point))
}

/// Rank of the Jacobian of `components` with respect to `vars` at a generic point.
pub fn generic_rank<R: Rng + ?Sized>(components: &[Poly], vars: &[String], rng: &mut R) -> usize {
    if components.is_empty() || vars.is_empty() {
        return 0;
    }
    let bound = components.len().min(vars.len());
    let mut best = 0;
    for _ in 0..RETRIES {
        let pt = random_point(vars, rng);
        best = best.max(jacobian_at(components, vars, &pt).rank());
        if best == bound {
            return best;
        }
    }
    if components.len() * vars.len() <= SYMBOLIC_THRESHOLD {
        let jac: Vec<Vec<Poly>> =
            components.iter().map(|f| vars.iter().map(|v| f.derivative(v)).collect()).collect();
        best = best.max(symbolic_rank(jac));
    }
    best
}

/// Rank over the rational function field, by fraction-free elimination.
pub fn symbolic_rank(mut a: Vec<Vec<Poly>>) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut rank = 0;
    let mut prev: Option<Poly> = None;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(sel) = (rank..rows).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, sel);
        for r in rank + 1..rows {
            for k in c + 1..cols {
                let num = &(&a[r][k] * &a[rank][c]) - &(&a[r][c] * &a[rank][k]);
                a[r][k] = match &prev {
                    Some(p) => num.div_exact(p).unwrap_or(num),
                    None => num,
                };
            }
            a[r][c] = Poly::zero(a[r][c].vars());
        }
        prev = Some(a[rank][c].clone());
        rank += 1;
    }
    rank
}

/// Evaluate a Jacobian row set at a point and return the rank; convenience for callers
/// that already hold derivative polynomials.
pub fn rank_at(rows: &[Vec<Poly>], point: &HashMap<String, GQ>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    Matrix::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c].eval(point)).rank()
}

/// Rank of the Jacobian of a jet: `components` are known only modulo terms of degree
/// above `order`. Along a random line `x = t·a` the entries are truncated power series
/// in `t` and elimination is carried out in that local ring, so a minor counts as
/// nonzero only if it has a term of degree below `order`. Can underestimate, never
/// overestimates the rank of the underlying germ.
pub fn jet_rank<R: Rng + ?Sized>(components: &[Poly], vars: &[String], order: u32, rng: &mut R) -> usize {
    if components.is_empty() || vars.is_empty() || order == 0 {
        return 0;
    }
    let bound = components.len().min(vars.len());
    let jac: Vec<Vec<Poly>> = components.iter().map(|f| vars.iter().map(|v| f.derivative(v)).collect()).collect();
    let mut best = 0;
    for _ in 0..RETRIES {
        let tv = std::sync::Arc::new(vec!["t".to_string()]);
        let t = Poly::var(&tv, "t");
        let line: HashMap<String, Poly> = vars.iter().map(|v| (v.clone(), t.scale(&random_coordinate(rng)))).collect();
        let prec = order as usize;
        let m: Vec<Vec<Vec<GQ>>> = jac
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| {
                        let u = e.subs_trunc(&line, order - 1);
                        (0..prec).map(|k| u.coeff_of(&[("t", k as u16)])).collect()
                    })
                    .collect()
            })
            .collect();
        best = best.max(local_rank(m, prec));
        if best == bound {
            break;
        }
    }
    best
}

fn valuation(s: &[GQ], prec: usize) -> Option<usize> {
    s.iter().take(prec).position(|c| !c.is_zero())
}

/// `a / b` for truncated series, `b` a unit.
fn series_div(a: &[GQ], b: &[GQ], prec: usize) -> Vec<GQ> {
    let inv0 = b[0].inv();
    let mut q = vec![GQ::zero(); prec];
    for k in 0..prec {
        let mut acc = a.get(k).cloned().unwrap_or_else(GQ::zero);
        for i in 1..=k {
            if let Some(bi) = b.get(i) {
                acc = &acc - &(bi * &q[k - i]);
            }
        }
        q[k] = &acc * &inv0;
    }
    q
}

/// Rank over truncated power series in one variable known to precision `prec`.
pub fn local_rank(mut m: Vec<Vec<Vec<GQ>>>, mut prec: usize) -> usize {
    let mut rows: Vec<usize> = (0..m.len()).collect();
    let mut cols: Vec<usize> = (0..m[0].len()).collect();
    let mut rank = 0;
    loop {
        let mut pick: Option<(usize, usize, usize)> = None;
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                if let Some(v) = valuation(&m[r][c], prec) {
                    if pick.map_or(true, |p| v < p.2) {
                        pick = Some((ri, ci, v));
                    }
                }
            }
        }
        let Some((ri, ci, v)) = pick else { break };
        let (pr, pc) = (rows.remove(ri), cols.remove(ci));
        let unit: Vec<GQ> = m[pr][pc][v..prec].to_vec();
        let new_prec = prec - v;
        for &r in &rows {
            let shifted: Vec<GQ> = m[r][pc][v..prec].to_vec();
            let f = series_div(&shifted, &unit, new_prec);
            for &c in &cols {
                let mut next = m[r][c].clone();
                next.truncate(new_prec);
                for i in 0..new_prec {
                    if f[i].is_zero() {
                        continue;
                    }
                    for j in 0..new_prec - i {
                        next[i + j] = &next[i + j] - &(&f[i] * &m[pr][c][j]);
                    }
                }
                m[r][c] = next;
            }
        }
        prec = new_prec;
        rank += 1;
        if rows.is_empty() || cols.is_empty() {
            break;
        }
    }
    rank
}

pub fn is_zero_vector(v: &[GQ]) -> bool {
    v.iter().all(|x| x.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::poly::var_list;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = var_list(&["z", "x"]);
        let names: Vec<String> = v.to_vec();
        let z = Poly::var(&v, "z");
        let x = Poly::var(&v, "x");
        let f = (&z * &x).scale(&GQ::from_ints(0, 2));
        assert_eq!(generic_rank(&[z.clone(), f], &names, &mut rng), 2);
        assert_eq!(generic_rank(&[z.clone(), x.clone()], &names, &mut rng), 2);
        assert_eq!(generic_rank(&[Poly::one(&v)], &names, &mut rng), 0);
        // dependent components
        assert_eq!(generic_rank(&[&z + &x, (&z + &x).pow(3)], &names, &mut rng), 1);
    }

    #[test]
    fn jet_rank_ignores_truncation_artifacts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = var_list(&["x", "y"]);
        let names: Vec<String> = v.to_vec();
        let f1 = &Poly::var(&v, "x") + &Poly::var(&v, "y").pow(2);
        // f1^2 truncated at degree 3 looks independent of f1 as a polynomial
        let f2 = f1.pow(2).truncate(3);
        assert_eq!(generic_rank(&[f1.clone(), f2.clone()], &names, &mut rng), 2);
        assert_eq!(jet_rank(&[f1.clone(), f2], &names, 3, &mut rng), 1);
        let g = &Poly::var(&v, "x") * &Poly::var(&v, "y");
        assert_eq!(jet_rank(&[f1, g], &names, 3, &mut rng), 2);
    }

    #[test]
    fn symbolic_rank_matches() {
        let v = var_list(&["a", "b"]);
        let a = Poly::var(&v, "a");
        let b = Poly::var(&v, "b");
        let jac = vec![vec![a.clone(), b.clone()], vec![a.pow(2), &a * &b]];
        assert_eq!(symbolic_rank(jac), 1);
    }
}
