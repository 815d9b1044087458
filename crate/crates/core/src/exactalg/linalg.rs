//! Dense exact linear algebra over Q(i).

use num_traits::{One, Zero};

use super::scalar::GQ;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<GQ>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![GQ::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        Matrix::from_fn(n, n, |r, c| if r == c { GQ::one() } else { GQ::zero() })
    }

    pub fn from_fn<F: FnMut(usize, usize) -> GQ>(rows: usize, cols: usize, mut f: F) -> Matrix {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<GQ>]) -> Matrix {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        Matrix::from_fn(rows.len(), cols, |r, c| rows[r][c].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &GQ {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: GQ) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> Vec<GQ> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn push_row(&mut self, row: Vec<GQ>) {
        if self.rows == 0 && self.cols == 0 {
            self.cols = row.len();
        }
        assert_eq!(row.len(), self.cols);
        self.data.extend(row);
        self.rows += 1;
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        Matrix::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = GQ::zero();
            for k in 0..self.cols {
                let a = self.get(r, k);
                if !a.is_zero() {
                    acc += &(a * other.get(k, c));
                }
            }
            acc
        })
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut prow = 0;
        for c in 0..m.cols {
            if prow == m.rows {
                break;
            }
            // cheapest nonzero pivot in the column
            let sel = (prow..m.rows)
                .filter(|&r| !m.get(r, c).is_zero())
                .min_by_key(|&r| m.get(r, c).height());
            let Some(sel) = sel else { continue };
            m.swap_rows(prow, sel);
            let inv = m.get(prow, c).inv();
            for k in c..m.cols {
                let v = m.get(prow, k) * &inv;
                m.set(prow, k, v);
            }
            for r in 0..m.rows {
                if r == prow || m.get(r, c).is_zero() {
                    continue;
                }
                let f = m.get(r, c).clone();
                for k in c..m.cols {
                    if m.get(prow, k).is_zero() {
                        continue;
                    }
                    let v = m.get(r, k) - &(&f * m.get(prow, k));
                    m.set(r, k, v);
                }
            }
            pivots.push(c);
            prow += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.cols {
            self.data.swap(a * self.cols + k, b * self.cols + k);
        }
    }

    pub fn rank(&self) -> usize {
        // forward elimination only
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let sel = (rank..m.rows).find(|&r| !m.get(r, c).is_zero());
            let Some(sel) = sel else { continue };
            m.swap_rows(rank, sel);
            let inv = m.get(rank, c).inv();
            for r in rank + 1..m.rows {
                if m.get(r, c).is_zero() {
                    continue;
                }
                let f = m.get(r, c) * &inv;
                for k in c..m.cols {
                    if m.get(rank, k).is_zero() {
                        continue;
                    }
                    let v = m.get(r, k) - &(&f * m.get(rank, k));
                    m.set(r, k, v);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Basis of the right kernel, one vector per free column (in column order).
    pub fn kernel(&self) -> Vec<Vec<GQ>> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec![GQ::zero(); self.cols];
            v[free] = GQ::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(i, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let aug = Matrix::from_fn(n, 2 * n, |r, c| {
            if c < n {
                self.get(r, c).clone()
            } else if c - n == r {
                GQ::one()
            } else {
                GQ::zero()
            }
        });
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(Matrix::from_fn(n, n, |r, c| red.get(r, c + n).clone()))
    }

    pub fn determinant(&self) -> GQ {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let mut det = GQ::one();
        for c in 0..m.cols {
            let Some(sel) = (c..m.rows).find(|&r| !m.get(r, c).is_zero()) else {
                return GQ::zero();
            };
            if sel != c {
                m.swap_rows(c, sel);
                det = -det;
            }
            let p = m.get(c, c).clone();
            det = &det * &p;
            let inv = p.inv();
            for r in c + 1..m.rows {
                if m.get(r, c).is_zero() {
                    continue;
                }
                let f = m.get(r, c) * &inv;
                for k in c..m.cols {
                    let v = m.get(r, k) - &(&f * m.get(c, k));
                    m.set(r, k, v);
                }
            }
        }
        det
    }

    /// Real form of a complex system in real unknowns: each row becomes its real
    /// and imaginary parts.
    pub fn realify(&self) -> Matrix {
        let mut out = Matrix::zeros(0, self.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            out.push_row(row.iter().map(|x| GQ::real(x.re.clone())).collect());
            out.push_row(row.iter().map(|x| GQ::real(x.im.clone())).collect());
        }
        out
    }
}
