use std::fmt;

use crate::gf::{Elem, Field};

/// Polynomial (or truncated power series) in the delay variable `z`;
/// `coeffs[i]` multiplies `z^i`. Trailing zeros are allowed.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<Elem>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Elem) -> Poly {
        Poly { coeffs: vec![c] }
    }

    pub fn one() -> Poly {
        Poly::constant(Elem::ONE)
    }

    pub fn from_coeffs(coeffs: Vec<Elem>) -> Poly {
        Poly { coeffs }
    }

    pub fn from_u32(coeffs: &[u32]) -> Poly {
        Poly {
            coeffs: coeffs.iter().map(|&c| Elem(c)).collect(),
        }
    }

    /// `z^k`
    pub fn monomial(k: usize) -> Poly {
        let mut coeffs = vec![Elem::ZERO; k + 1];
        coeffs[k] = Elem::ONE;
        Poly { coeffs }
    }

    #[inline]
    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(Elem::ZERO)
    }

    /// Degree, with the zero polynomial at -1.
    pub fn degree(&self) -> isize {
        self.coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .map_or(-1, |d| d as isize)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn trim(&mut self) {
        let len = (self.degree() + 1) as usize;
        self.coeffs.truncate(len);
    }

    pub fn trimmed(mut self) -> Poly {
        self.trim();
        self
    }

    /// Largest `k` with `z^k` dividing the polynomial; `None` for zero.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Keeps coefficients `0..=t`.
    pub fn truncated(&self, t: usize) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().take(t + 1).copied().collect(),
        }
    }

    pub fn add(&self, field: &Field, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly {
            coeffs: (0..n).map(|i| field.add(self.coeff(i), other.coeff(i))).collect(),
        }
    }

    pub fn sub(&self, field: &Field, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly {
            coeffs: (0..n).map(|i| field.sub(self.coeff(i), other.coeff(i))).collect(),
        }
    }

    pub fn scale(&self, field: &Field, c: Elem) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|&a| field.mul(a, c)).collect(),
        }
    }

    /// Full product.
    pub fn mul(&self, field: &Field, other: &Poly) -> Poly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![Elem::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = field.mul_add(out[i + j], a, b);
            }
        }
        Poly { coeffs: out }
    }

    /// Divides by `z^k`, dropping the low coefficients.
    pub fn shift_down(&self, k: usize) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().skip(k).copied().collect(),
        }
    }

    /// Evaluates at `z = x` by Horner's rule.
    pub fn eval(&self, field: &Field, x: Elem) -> Elem {
        self.coeffs
            .iter()
            .rev()
            .fold(Elem::ZERO, |acc, &c| field.add(field.mul(acc, x), c))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match (i, c.0) {
                (0, v) => v.to_string(),
                (1, 1) => "z".to_string(),
                (1, v) => format!("{v}z"),
                (i, 1) => format!("z^{i}"),
                (i, v) => format!("{v}z^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join("+"))
        }
    }
}

/// Coefficients `0..=t` of `a * b`: `c_i = sum_{j<=i} a_j b_{i-j}`.
pub fn poly_mul_trunc(field: &Field, a: &Poly, b: &Poly, t: usize) -> Poly {
    let mut out = vec![Elem::ZERO; t + 1];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut acc = Elem::ZERO;
        for j in 0..=i {
            let aj = a.coeff(j);
            if aj.is_zero() {
                continue;
            }
            acc = field.mul_add(acc, aj, b.coeff(i - j));
        }
        *slot = acc;
    }
    Poly { coeffs: out }
}

/// Power-series inverse of `u` modulo `z^n`; requires `u(0) != 0`.
pub fn series_inverse(field: &Field, u: &Poly, n: usize) -> Option<Poly> {
    let u0 = u.coeff(0);
    let inv0 = field.inv(u0).ok()?;
    let mut out = vec![Elem::ZERO; n];
    if n == 0 {
        return Some(Poly { coeffs: out });
    }
    out[0] = inv0;
    for k in 1..n {
        // sum_{j=1..k} u_j w_{k-j} + u_0 w_k = 0
        let mut acc = Elem::ZERO;
        for j in 1..=k {
            acc = field.mul_add(acc, u.coeff(j), out[k - j]);
        }
        out[k] = field.neg(field.mul(acc, inv0));
    }
    Some(Poly { coeffs: out })
}
