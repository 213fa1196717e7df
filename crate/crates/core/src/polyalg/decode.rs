use itertools::Itertools;

use crate::gf::{Elem, Field};

use super::poly::{poly_mul_trunc, series_inverse, Poly};
use super::polymatrix::PolyMatrix;
use super::PolyAlgError;

/// Output of [`sequential_decode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    /// z-adic valuation of `det F`; `x_t` is available once `y` through
    /// `t + delay` has arrived.
    pub delay: usize,
    /// `x_0 ..= x_{horizon - delay}`, one row vector per time.
    pub symbols: Vec<Vec<Elem>>,
}

/// Recovers the source stream from `y(z) = x(z) F(z)` for a square `F`.
///
/// Writes `det F = z^d u(z)` with `u(0) != 0` and evaluates
/// `x(z) = y(z) adj F(z) u(z)^{-1} z^{-d}` as truncated power series. The
/// delay is read from the whole of `F`; everything else only touches
/// coefficients up to `horizon`.
pub fn sequential_decode(
    field: &Field,
    f: &PolyMatrix,
    ys: &[Vec<Elem>],
    horizon: usize,
) -> Result<Decoded, PolyAlgError> {
    let m = f.rows();
    if f.cols() != m {
        return Err(PolyAlgError::NotSquare {
            rows: f.rows(),
            cols: f.cols(),
        });
    }
    if ys.len() <= horizon {
        return Err(PolyAlgError::StreamTooShort {
            needed: horizon + 1,
            found: ys.len(),
        });
    }
    if let Some(bad) = ys.iter().take(horizon + 1).find(|y| y.len() != m) {
        return Err(PolyAlgError::DimensionMismatch {
            expected: (1, m),
            found: (1, bad.len()),
        });
    }
    let full_det = f.det(field);
    let delay = match full_det.valuation() {
        Some(d) => d,
        None => return Err(PolyAlgError::Singular),
    };
    if delay > horizon {
        return Err(PolyAlgError::HorizonTooShort { delay, horizon });
    }
    let ft = f.truncated(horizon);
    let det = full_det.truncated(horizon);
    let keep = horizon - delay;
    let u = det.shift_down(delay);
    let u_inv = series_inverse(field, &u, keep + 1).ok_or(PolyAlgError::Singular)?;
    let adj = ft.adjugate(field);

    let y_cols: Vec<Poly> = (0..m)
        .map(|j| Poly::from_coeffs((0..=horizon).map(|t| ys[t][j]).collect()))
        .collect();
    // w(z) = y(z) adj F(z) = z^d u(z) x(z)
    let mut x_cols = Vec::with_capacity(m);
    for k in 0..m {
        let mut w = Poly::zero();
        for (j, yj) in y_cols.iter().enumerate() {
            w = w.add(field, &poly_mul_trunc(field, yj, adj.get(j, k), horizon));
        }
        if w.coeffs.iter().take(delay).any(|c| !c.is_zero()) {
            return Err(PolyAlgError::Inconsistent);
        }
        x_cols.push(poly_mul_trunc(field, &w.shift_down(delay), &u_inv, keep));
    }
    let symbols = (0..=keep)
        .map(|t| x_cols.iter().map(|p| p.coeff(t)).collect())
        .collect();
    Ok(Decoded { delay, symbols })
}

/// Re-encodes `x(z) F(z)` through `horizon`; one row vector per time.
pub fn encode(field: &Field, f: &PolyMatrix, xs: &[Vec<Elem>], horizon: usize) -> Vec<Vec<Elem>> {
    let x_rows: Vec<Poly> = (0..f.rows())
        .map(|i| {
            Poly::from_coeffs(
                xs.iter()
                    .take(horizon + 1)
                    .map(|x| x.get(i).copied().unwrap_or(Elem::ZERO))
                    .collect(),
            )
        })
        .collect();
    let cols: Vec<Poly> = (0..f.cols())
        .map(|j| {
            (0..f.rows()).fold(Poly::zero(), |acc, i| {
                acc.add(field, &poly_mul_trunc(field, &x_rows[i], f.get(i, j), horizon))
            })
        })
        .collect();
    (0..=horizon)
        .map(|t| cols.iter().map(|p| p.coeff(t)).collect())
        .collect()
}

/// First `m`-column subset, in lexicographic order, with a nonzero
/// determinant.
pub fn select_columns(field: &Field, f: &PolyMatrix) -> Result<Vec<usize>, PolyAlgError> {
    let m = f.rows();
    if f.cols() < m {
        return Err(PolyAlgError::TooFewColumns {
            rate: m,
            cols: f.cols(),
        });
    }
    if f.cols() == m {
        return if f.det(field).is_zero() {
            Err(PolyAlgError::NoFullRankSubset)
        } else {
            Ok((0..m).collect())
        };
    }
    (0..f.cols())
        .combinations(m)
        .find(|cols| !f.select_columns(cols).det(field).is_zero())
        .ok_or(PolyAlgError::NoFullRankSubset)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(rows: &[&[&[u32]]]) -> PolyMatrix {
        PolyMatrix::from_fn(rows.len(), rows[0].len(), |i, j| Poly::from_u32(rows[i][j]))
    }

    #[test]
    fn r6_recovers_with_delay_one() {
        let f2 = Field::with_order(2).unwrap();
        let f = pm(&[&[&[1], &[1, 1]], &[&[1], &[1]]]);
        let xs: Vec<Vec<Elem>> = (0..6u32).map(|t| vec![Elem(t & 1), Elem((t >> 1) & 1)]).collect();
        let ys = encode(&f2, &f, &xs, 5);
        for horizon in 1..=5 {
            let dec = sequential_decode(&f2, &f, &ys, horizon).unwrap();
            assert_eq!(dec.delay, 1);
            // at time `horizon` the sink holds (a_{horizon-1}, b_{horizon-1})
            assert_eq!(dec.symbols.len(), horizon);
            assert_eq!(dec.symbols[..], xs[..horizon]);
        }
        assert_eq!(
            sequential_decode(&f2, &f, &ys, 0),
            Err(PolyAlgError::HorizonTooShort { delay: 1, horizon: 0 })
        );
    }

    #[test]
    fn identity_is_transparent() {
        let f3 = Field::with_order(3).unwrap();
        let ys: Vec<Vec<Elem>> = (0..4u32).map(|t| vec![Elem(t % 3), Elem((t + 1) % 3)]).collect();
        let dec = sequential_decode(&f3, &PolyMatrix::identity(2), &ys, 3).unwrap();
        assert_eq!(dec.delay, 0);
        assert_eq!(dec.symbols, ys);
    }

    #[test]
    fn singular_is_rejected() {
        let f2 = Field::with_order(2).unwrap();
        let f = pm(&[&[&[1], &[1]], &[&[1], &[1]]]);
        let ys = vec![vec![Elem(0), Elem(0)]; 3];
        assert_eq!(sequential_decode(&f2, &f, &ys, 2), Err(PolyAlgError::Singular));
    }

    #[test]
    fn column_selection() {
        let f2 = Field::with_order(2).unwrap();
        let f = pm(&[&[&[1], &[1], &[0]], &[&[1], &[1], &[1]]]);
        assert_eq!(select_columns(&f2, &f).unwrap(), vec![0, 2]);
        assert_eq!(select_columns(&f2, &PolyMatrix::identity(2)).unwrap(), vec![0, 1]);
        let sq = pm(&[&[&[1], &[0, 1]], &[&[1], &[1]]]);
        assert_eq!(select_columns(&f2, &sq).unwrap(), vec![0, 1]);
        let dead = pm(&[&[&[1], &[1], &[1]], &[&[1], &[1], &[1]]]);
        assert_eq!(select_columns(&f2, &dead), Err(PolyAlgError::NoFullRankSubset));
    }
}
