use crate::gf::{Elem, Field};

use super::matrix::Matrix;
use super::poly::Poly;

/// Matrix of polynomials in `z`. Interconverts with the coefficient view
/// `F(z) = F_0 + F_1 z + ... + F_t z^t`.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl std::fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:?}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> PolyMatrix {
        PolyMatrix {
            rows,
            cols,
            entries: vec![Poly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> PolyMatrix {
        let mut m = PolyMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Poly::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Poly) -> PolyMatrix {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        PolyMatrix { rows, cols, entries }
    }

    /// Builds `F(z)` from its coefficient matrices `F_0, ..., F_t`.
    /// Returns `None` when the blocks disagree on shape.
    pub fn from_coefficients(blocks: &[Matrix]) -> Option<PolyMatrix> {
        let first = blocks.first()?;
        let (rows, cols) = (first.rows(), first.cols());
        if blocks.iter().any(|b| b.rows() != rows || b.cols() != cols) {
            return None;
        }
        Some(PolyMatrix::from_fn(rows, cols, |i, j| {
            Poly::from_coeffs(blocks.iter().map(|b| b.get(i, j)).collect())
        }))
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
    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.entries[i * self.cols + j] = p;
    }

    /// Maximum entry degree (-1 for the zero matrix).
    pub fn degree(&self) -> isize {
        self.entries.iter().map(Poly::degree).max().unwrap_or(-1)
    }

    /// Coefficient matrix `F_i`.
    pub fn coefficient(&self, i: usize) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).coeff(i))
    }

    /// Coefficient matrices `F_0..=F_t`.
    pub fn coefficients(&self, t: usize) -> Vec<Matrix> {
        (0..=t).map(|i| self.coefficient(i)).collect()
    }

    pub fn truncated(&self, t: usize) -> PolyMatrix {
        PolyMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).truncated(t))
    }

    pub fn select_columns(&self, cols: &[usize]) -> PolyMatrix {
        PolyMatrix::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]).clone())
    }

    pub fn eval(&self, field: &Field, x: Elem) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval(field, x))
    }

    /// Row vector times matrix: `sum_i v_i(z) F_{i,j}(z)` per column.
    pub fn left_mul_row(&self, field: &Field, v: &[Poly]) -> Vec<Poly> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols)
            .map(|j| (0..self.rows).fold(Poly::zero(), |acc, i| acc.add(field, &v[i].mul(field, self.get(i, j)))))
            .collect()
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> PolyMatrix {
        let rows: Vec<usize> = (0..self.rows).filter(|&r| r != skip_row).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&c| c != skip_col).collect();
        PolyMatrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Determinant by Laplace expansion along the first row.
    pub fn det_cofactor(&self, field: &Field) -> Poly {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        match self.rows {
            0 => Poly::one(),
            1 => self.get(0, 0).clone().trimmed(),
            2 => {
                let ad = self.get(0, 0).mul(field, self.get(1, 1));
                let bc = self.get(0, 1).mul(field, self.get(1, 0));
                ad.sub(field, &bc).trimmed()
            }
            n => {
                let mut acc = Poly::zero();
                for j in 0..n {
                    let a = self.get(0, j);
                    if a.is_zero() {
                        continue;
                    }
                    let term = a.mul(field, &self.minor(0, j).det_cofactor(field));
                    acc = if j % 2 == 0 {
                        acc.add(field, &term)
                    } else {
                        acc.sub(field, &term)
                    };
                }
                acc.trimmed()
            }
        }
    }

    /// Determinant by evaluating at `deg + 1` distinct points and
    /// interpolating; `None` when the field has too few elements.
    pub fn det_by_evaluation(&self, field: &Field) -> Option<Poly> {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let bound: usize = (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| self.get(i, j).degree())
                    .max()
                    .unwrap_or(-1)
                    .max(0) as usize
            })
            .sum();
        let points = bound + 1;
        if points > field.order() as usize {
            return None;
        }
        let xs: Vec<Elem> = (0..points as u32).map(Elem).collect();
        let ys: Vec<Elem> = xs.iter().map(|&x| self.eval(field, x).det(field)).collect();
        Some(interpolate(field, &xs, &ys).trimmed())
    }

    /// Cofactor expansion up to 4x4; larger matrices use evaluation and
    /// interpolation when the field is big enough.
    pub fn det(&self, field: &Field) -> Poly {
        if self.rows > 4 {
            if let Some(d) = self.det_by_evaluation(field) {
                return d;
            }
        }
        self.det_cofactor(field)
    }

    /// Classical adjugate: `F adj(F) = adj(F) F = det(F) I`.
    pub fn adjugate(&self, field: &Field) -> PolyMatrix {
        assert_eq!(self.rows, self.cols, "adjugate of a non-square matrix");
        let n = self.rows;
        if n == 1 {
            return PolyMatrix::identity(1);
        }
        PolyMatrix::from_fn(n, n, |i, j| {
            let c = self.minor(j, i).det(field);
            if (i + j) % 2 == 0 {
                c
            } else {
                Poly::zero().sub(field, &c)
            }
        })
    }
}

/// Exact determinant polynomial; the independent check for the rank tests.
pub fn det_oracle(field: &Field, f: &PolyMatrix) -> Poly {
    f.det(field)
}

/// Newton interpolation through `(xs[i], ys[i])`.
fn interpolate(field: &Field, xs: &[Elem], ys: &[Elem]) -> Poly {
    let n = xs.len();
    let mut coef = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            let num = field.sub(coef[i], coef[i - 1]);
            let den = field.sub(xs[i], xs[i - level]);
            coef[i] = field.div(num, den).expect("interpolation nodes are distinct");
        }
    }
    let mut out = Poly::zero();
    for i in (0..n).rev() {
        // out = out * (z - x_i) + coef_i
        let shifted = out.mul(field, &Poly::from_coeffs(vec![field.neg(xs[i]), Elem::ONE]));
        out = shifted.add(field, &Poly::constant(coef[i]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(rows: &[&[&[u32]]]) -> PolyMatrix {
        PolyMatrix::from_fn(rows.len(), rows[0].len(), |i, j| Poly::from_u32(rows[i][j]))
    }

    #[test]
    fn det_examples() {
        let f2 = Field::with_order(2).unwrap();
        let f = pm(&[&[&[1], &[1, 1]], &[&[1], &[1]]]);
        assert_eq!(det_oracle(&f2, &f), Poly::from_u32(&[0, 1]));
        assert_eq!(det_oracle(&f2, &PolyMatrix::identity(3)), Poly::one());
        assert!(det_oracle(&f2, &pm(&[&[&[1], &[1]], &[&[1], &[1]]])).is_zero());
    }

    #[test]
    fn coefficient_views_roundtrip() {
        let f = pm(&[&[&[1, 0, 2], &[0, 1]], &[&[2], &[1, 1, 1]]]);
        let blocks = f.coefficients(2);
        let back = PolyMatrix::from_coefficients(&blocks).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(back.get(i, j).clone().trimmed(), f.get(i, j).clone().trimmed());
            }
        }
        assert!(PolyMatrix::from_coefficients(&[Matrix::zeros(2, 2), Matrix::zeros(2, 3)]).is_none());
    }

    #[test]
    fn evaluation_route_matches_cofactor() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for q in [7u64, 16, 31] {
            let field = Field::with_order(q).unwrap();
            for _ in 0..50 {
                let n = rng.random_range(1..=5);
                let deg = rng.random_range(0..=2);
                let f = PolyMatrix::from_fn(n, n, |_, _| {
                    Poly::from_coeffs((0..=deg).map(|_| Elem(rng.random_range(0..q as u32))).collect())
                });
                if let Some(d) = f.det_by_evaluation(&field) {
                    assert_eq!(d, f.det_cofactor(&field));
                }
            }
        }
    }

    #[test]
    fn adjugate_identity() {
        let f3 = Field::with_order(3).unwrap();
        let f = pm(&[
            &[&[1, 2], &[0, 1], &[2]],
            &[&[1], &[1, 1], &[0, 0, 1]],
            &[&[2, 2], &[1], &[1, 2]],
        ]);
        let adj = f.adjugate(&f3);
        let det = f.det(&f3);
        for i in 0..3 {
            let row: Vec<Poly> = (0..3).map(|k| f.get(i, k).clone()).collect();
            let prod = adj.left_mul_row(&f3, &row);
            for (j, p) in prod.into_iter().enumerate() {
                let want = if i == j { det.clone() } else { Poly::zero() };
                assert_eq!(p.trimmed(), want.trimmed());
            }
        }
    }
}
