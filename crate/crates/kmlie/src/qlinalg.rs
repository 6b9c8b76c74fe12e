//! Dense exact-rational matrices and row reduction.
//!
//! Windows at desk scale are dozens of dimensions, and every test in the
//! crate is an exact equality, so a small dense representation over
//! `BigRational` beats anything approximate or hashed.

use num::{One, Signed, Zero};

use crate::ratio::{rat_int, Rat};

/// Dense rational matrix, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<Rat>>,
}

impl Mat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![vec![Rat::zero(); cols]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            m.data[i][i] = Rat::one();
        }
        m
    }

    pub fn from_rows(data: Vec<Vec<Rat>>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        debug_assert!(data.iter().all(|r| r.len() == cols));
        Mat { rows, cols, data }
    }

    pub fn from_i64(data: &[Vec<i64>]) -> Self {
        Mat::from_rows(data.iter().map(|r| r.iter().map(|&x| rat_int(x)).collect()).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.iter().all(|x| x.is_zero()))
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.data[i][k].is_zero() {
                    continue;
                }
                let a = &self.data[i][k];
                for j in 0..other.cols {
                    if !other.data[k][j].is_zero() {
                        out.data[i][j] += a * &other.data[k][j];
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        self.data
            .iter()
            .map(|row| {
                let mut s = Rat::zero();
                for (a, b) in row.iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        s += a * b;
                    }
                }
                s
            })
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i][j] += &other.data[i][j];
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Mat {
        let mut out = self.clone();
        for row in &mut out.data {
            for x in row.iter_mut() {
                *x *= c;
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j][i] = self.data[i][j].clone();
            }
        }
        out
    }

    /// In-place reduced row echelon form. Returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.data[r][col].is_zero()) else {
                continue;
            };
            self.data.swap(row, p);
            let inv = self.data[row][col].clone().recip();
            for x in self.data[row].iter_mut() {
                *x *= &inv;
            }
            for r in 0..self.rows {
                if r != row && !self.data[r][col].is_zero() {
                    let f = self.data[r][col].clone();
                    for c in 0..self.cols {
                        let sub = &self.data[row][c] * &f;
                        self.data[r][c] -= sub;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// One solution of `self * x = b`, with free variables set to zero.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(self.rows, b.len());
        let mut aug = Mat::zero(self.rows, self.cols + 1);
        for i in 0..self.rows {
            aug.data[i][..self.cols].clone_from_slice(&self.data[i]);
            aug.data[i][self.cols] = b[i].clone();
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // inconsistent
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.data[r][self.cols].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Mat::zero(n, 2 * n);
        for i in 0..n {
            aug.data[i][..n].clone_from_slice(&self.data[i]);
            aug.data[i][n + i] = Rat::one();
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[..n] != (0..n).collect::<Vec<_>>()[..] {
            return None;
        }
        let mut out = Mat::zero(n, n);
        for i in 0..n {
            out.data[i].clone_from_slice(&aug.data[i][n..]);
        }
        Some(out)
    }

    /// Basis of the right kernel, one row per basis vector.
    pub fn kernel(&self) -> Vec<Vec<Rat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &f in &free {
            let mut v = vec![Rat::zero(); self.cols];
            v[f] = Rat::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -m.data[r][f].clone();
            }
            basis.push(v);
        }
        basis
    }

    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rat::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m.data[r][col].is_zero()) else {
                return Rat::zero();
            };
            if p != col {
                m.data.swap(col, p);
                det = -det;
            }
            det *= &m.data[col][col];
            let inv = m.data[col][col].clone().recip();
            for r in col + 1..n {
                if !m.data[r][col].is_zero() {
                    let f = &m.data[r][col] * &inv;
                    for c in col..n {
                        let sub = &m.data[col][c] * &f;
                        m.data[r][c] -= sub;
                    }
                }
            }
        }
        det
    }

    /// Coefficients of det(xI - self) by Faddeev-LeVerrier:
    /// `[c_0, ..., c_n]` with `c_n = 1` (coefficient of x^n).
    pub fn char_poly(&self) -> Vec<Rat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut coeffs = vec![Rat::zero(); n + 1];
        coeffs[n] = Rat::one();
        let mut m = Mat::zero(n, n);
        for k in 1..=n {
            // M_k = A * M_{k-1} + c_{n-k+1} * I
            let mut mk = self.mul(&m);
            for i in 0..n {
                mk.data[i][i] += &coeffs[n - k + 1];
            }
            let am = self.mul(&mk);
            let mut trace = Rat::zero();
            for i in 0..n {
                trace += &am.data[i][i];
            }
            coeffs[n - k] = -trace / rat_int(k as i64);
            m = mk;
        }
        coeffs
    }
}

/// Incremental reduced row echelon form over a fixed coordinate order,
/// used for ideal components and iterated-bracket layer spans.
///
/// Pivots are the leftmost coordinates, so with coordinates listed in
/// graded-lex Lyndon order the resulting quotient bases are deterministic
/// across runs.
#[derive(Debug, Clone, Default)]
pub struct RowSpace {
    pub dim: usize,
    /// Rows in RREF; `pivots[i]` is the pivot column of `rows[i]`.
    pub rows: Vec<Vec<Rat>>,
    pub pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(dim: usize) -> Self {
        RowSpace { dim, rows: Vec::new(), pivots: Vec::new() }
    }

    /// Reduce `v` against the span; the remainder has zeros in all pivot
    /// coordinates.
    pub fn reduce(&self, v: &[Rat]) -> Vec<Rat> {
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone();
                for (x, r) in v.iter_mut().zip(row) {
                    let sub = r * &f;
                    *x -= sub;
                }
            }
        }
        v
    }

    /// Insert a vector; returns true if it enlarged the span.
    pub fn insert(&mut self, v: &[Rat]) -> bool {
        let mut v = self.reduce(v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].clone().recip();
        for x in v.iter_mut() {
            *x *= &inv;
        }
        // clear the new pivot column in existing rows, keep full RREF
        for row in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (x, r) in row.iter_mut().zip(&v) {
                    let sub = r * &f;
                    *x -= sub;
                }
            }
        }
        let at = self.pivots.iter().position(|&q| q > p).unwrap_or(self.rows.len());
        self.rows.insert(at, v);
        self.pivots.insert(at, p);
        true
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Coordinates that are not pivots, i.e. a basis of the quotient.
    pub fn non_pivots(&self) -> Vec<usize> {
        (0..self.dim).filter(|c| !self.pivots.contains(c)).collect()
    }
}

/// True iff all coefficients are >= 0 (resp. > 0) in `e_j` position,
/// helper for definiteness tests elsewhere.
pub fn all_nonneg(v: &[Rat]) -> bool {
    v.iter().all(|x| !x.is_negative())
}

pub fn all_pos(v: &[Rat]) -> bool {
    v.iter().all(|x| x.is_positive())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;

    #[test]
    fn rref_and_rank() {
        let mut m = Mat::from_i64(&[vec![2, -2], vec![-2, 2]]);
        let p = m.rref();
        assert_eq!(p, vec![0]);
        assert_eq!(m.data[0], vec![rat_int(1), rat_int(-1)]);
        assert_eq!(Mat::from_i64(&[vec![2, -1], vec![-1, 2]]).rank(), 2);
    }

    #[test]
    fn solve_and_inverse() {
        let a = Mat::from_i64(&[vec![2, -1], vec![-1, 2]]);
        let x = a.solve(&[rat_int(1), rat_int(0)]).unwrap();
        assert_eq!(x, vec![rat(2, 3), rat(1, 3)]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Mat::identity(2));
        assert!(Mat::from_i64(&[vec![1, 1], vec![1, 1]]).inverse().is_none());
    }

    #[test]
    fn kernel_of_singular() {
        let a = Mat::from_i64(&[vec![2, -2], vec![-2, 2]]);
        let k = a.kernel();
        assert_eq!(k.len(), 1);
        assert_eq!(a.mul_vec(&k[0]), vec![Rat::zero(), Rat::zero()]);
    }

    #[test]
    fn determinants() {
        assert_eq!(Mat::from_i64(&[vec![2, -3], vec![-3, 2]]).det(), rat_int(-5));
        assert_eq!(Mat::from_i64(&[vec![2, -2], vec![-2, 2]]).det(), rat_int(0));
    }

    #[test]
    fn char_poly_small() {
        // det(xI - [[2,-1],[-1,2]]) = x^2 - 4x + 3
        let c = Mat::from_i64(&[vec![2, -1], vec![-1, 2]]).char_poly();
        assert_eq!(c, vec![rat_int(3), rat_int(-4), rat_int(1)]);
    }

    #[test]
    fn row_space_quotient_basis() {
        let mut s = RowSpace::new(3);
        assert!(s.insert(&[rat_int(0), rat_int(1), rat_int(2)]));
        assert!(s.insert(&[rat_int(0), rat_int(1), rat_int(3)]));
        assert!(!s.insert(&[rat_int(0), rat_int(2), rat_int(5)]));
        assert_eq!(s.non_pivots(), vec![0]);
        assert!(s.contains(&[rat_int(0), rat_int(5), rat_int(11)]));
        assert!(!s.contains(&[rat_int(1), rat_int(0), rat_int(0)]));
    }
}
