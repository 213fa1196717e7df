use std::fmt;

use crate::gf::{Elem, Field};

/// Dense row-major matrix over a finite field.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![Elem::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Elem::ONE);
        }
        m
    }

    /// Builds a matrix from integer rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[u32]>>(rows: &[R]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.as_ref().len(), c, "ragged matrix rows");
            data.extend(row.as_ref().iter().map(|&v| Elem(v)));
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Elem) -> Matrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    /// Horizontal concatenation `(A B C ...)`. All blocks must share a row count.
    pub fn hconcat(blocks: &[Matrix]) -> Matrix {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hconcat row mismatch");
            for i in 0..rows {
                for j in 0..b.cols {
                    out.set(i, offset + j, b.get(i, j));
                }
            }
            offset += b.cols;
        }
        out
    }

    /// Columns picked in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]))
    }

    pub fn mul(&self, field: &Field, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = field.mul_add(out.get(i, j), a, rhs.get(k, j));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Determinant by elimination. Square matrices only.
    pub fn det(&self, field: &Field) -> Elem {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Elem::ONE;
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a.get(r, c).is_zero()) else {
                return Elem::ZERO;
            };
            if p != c {
                a.swap_rows(p, c);
                det = field.neg(det);
            }
            let pivot = a.get(c, c);
            det = field.mul(det, pivot);
            let inv = field.inv(pivot).expect("pivot is nonzero");
            for r in c + 1..n {
                let factor = field.mul(a.get(r, c), inv);
                if factor.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = field.sub(a.get(r, j), field.mul(factor, a.get(c, j)));
                    a.set(r, j, v);
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|e| e.0.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Row rank over `F_q` by Gaussian elimination.
pub fn rank_fq(field: &Field, m: &Matrix) -> usize {
    let mut a = m.clone();
    let mut rank = 0;
    for c in 0..a.cols {
        if rank == a.rows {
            break;
        }
        let Some(p) = (rank..a.rows).find(|&r| !a.get(r, c).is_zero()) else {
            continue;
        };
        a.swap_rows(p, rank);
        let inv = field.inv(a.get(rank, c)).expect("pivot is nonzero");
        for r in rank + 1..a.rows {
            let factor = field.mul(a.get(r, c), inv);
            if factor.is_zero() {
                continue;
            }
            for j in c..a.cols {
                let v = field.sub(a.get(r, j), field.mul(factor, a.get(rank, j)));
                a.set(r, j, v);
            }
        }
        rank += 1;
    }
    rank
}

/// Incrementally maintained column space: vectors are inserted one at a time
/// and reduced against an echelon basis. Vectors may grow in length between
/// insertions; existing basis vectors are implicitly zero-padded.
#[derive(Debug, Clone, Default)]
pub struct EchelonBasis {
    // (pivot index, vector normalised so the pivot entry is one)
    basis: Vec<(usize, Vec<Elem>)>,
}

impl EchelonBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Inserts `v`; returns true when it was independent of the current span.
    pub fn insert(&mut self, field: &Field, mut v: Vec<Elem>) -> bool {
        let len = self.basis.iter().map(|(_, b)| b.len()).fold(v.len(), usize::max);
        v.resize(len, Elem::ZERO);
        for (pivot, b) in &self.basis {
            let coef = v[*pivot];
            if coef.is_zero() {
                continue;
            }
            for (x, &y) in v.iter_mut().zip(b.iter()) {
                *x = field.sub(*x, field.mul(coef, y));
            }
        }
        let Some(pivot) = v.iter().position(|e| !e.is_zero()) else {
            return false;
        };
        let inv = field.inv(v[pivot]).expect("pivot is nonzero");
        for x in v.iter_mut() {
            *x = field.mul(*x, inv);
        }
        // Keep the basis fully reduced at the new pivot.
        for (_, b) in self.basis.iter_mut() {
            b.resize(len, Elem::ZERO);
            let coef = b[pivot];
            if coef.is_zero() {
                continue;
            }
            for (x, &y) in b.iter_mut().zip(v.iter()) {
                *x = field.sub(*x, field.mul(coef, y));
            }
        }
        self.basis.push((pivot, v));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        let f2 = Field::with_order(2).unwrap();
        assert_eq!(rank_fq(&f2, &Matrix::identity(2)), 2);
        assert_eq!(rank_fq(&f2, &Matrix::from_rows(&[[1, 1], [1, 1]])), 1);
        // (F_0 F_1) of the r_6 sink in the 4-choose-2 walkthrough at t = 1
        let f0 = Matrix::from_rows(&[[1, 1], [1, 1]]);
        let f1 = Matrix::from_rows(&[[0, 1], [0, 0]]);
        assert_eq!(rank_fq(&f2, &Matrix::hconcat(&[f0, f1])), 2);
        assert_eq!(rank_fq(&f2, &Matrix::zeros(3, 0)), 0);
        assert_eq!(rank_fq(&f2, &Matrix::zeros(0, 3)), 0);
    }

    #[test]
    fn det_small() {
        let f5 = Field::with_order(5).unwrap();
        let m = Matrix::from_rows(&[[1, 2], [3, 4]]);
        // 4 - 6 = -2 = 3 mod 5
        assert_eq!(m.det(&f5), Elem(3));
        assert_eq!(Matrix::from_rows(&[[1, 2], [2, 4]]).det(&f5), Elem(0));
    }

    #[test]
    fn echelon_basis_tracks_rank() {
        let f3 = Field::with_order(3).unwrap();
        let mut b = EchelonBasis::new();
        assert!(b.insert(&f3, vec![Elem(1), Elem(2)]));
        assert!(!b.insert(&f3, vec![Elem(2), Elem(1)]));
        assert!(b.insert(&f3, vec![Elem(0), Elem(1), Elem(1)]));
        assert!(b.insert(&f3, vec![Elem(1), Elem(0)]));
        assert_eq!(b.rank(), 3);
        assert!(!b.insert(&f3, vec![Elem::ZERO; 4]));
    }
}
