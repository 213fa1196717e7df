//! Arithmetic in small finite fields.
//!
//! Two families are supported: prime fields `F_p` (modular arithmetic on
//! `u64`) and binary extension fields `F_{2^k}` with `k <= 16`, where
//! elements are bit-packed polynomials over `F_2`. Binary fields multiply
//! through log/antilog tables built once at construction.
//!
//! Default reduction polynomials (all primitive):
//!
//! | k | modulus | k | modulus |
//! |---|---------|---|---------|
//! | 1 | x+1 | 9 | x^9+x^4+1 |
//! | 2 | x^2+x+1 | 10 | x^10+x^3+1 |
//! | 3 | x^3+x+1 | 11 | x^11+x^2+1 |
//! | 4 | x^4+x+1 | 12 | x^12+x^6+x^4+x+1 |
//! | 5 | x^5+x^2+1 | 13 | x^13+x^4+x^3+x+1 |
//! | 6 | x^6+x+1 | 14 | x^14+x^10+x^6+x+1 |
//! | 7 | x^7+x^3+1 | 15 | x^15+x+1 |
//! | 8 | x^8+x^4+x^3+x^2+1 | 16 | x^16+x^12+x^3+x+1 |

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported binary extension degree.
pub const MAX_BINARY_DEGREE: u32 = 16;

/// Largest supported prime order; keeps products inside `u64`.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

const DEFAULT_MODULI: [u32; 17] = [
    0, 0b11, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443, 0x8003, 0x1100B,
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("field order {0} is neither a prime nor a power of two up to 2^16")]
    UnsupportedOrder(u64),
    #[error("modulus {modulus:#b} does not have degree {degree}")]
    ModulusDegree { modulus: u32, degree: u32 },
    #[error("modulus {0:#b} is reducible over F_2")]
    Reducible(u32),
    #[error("a modulus was supplied for prime field F_{0}")]
    ModulusForPrime(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("value {value} is not an element of F_{order}")]
    OutOfRange { value: u64, order: u64 },
}

/// An element of some field, stored as its integer representative in `[0, q)`.
///
/// Elements carry no reference to their field; mixing elements of different
/// fields is a logic error that the arithmetic does not detect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, serde::Serialize)]
#[serde(transparent)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Prime,
    BinaryExtension { degree: u32, modulus: u32 },
}

#[derive(Debug)]
struct LogTables {
    // exp has 2(q-1) entries so log a + log b never needs a reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// A finite field `F_q`. Cloning is cheap; tables are shared.
#[derive(Clone)]
pub struct Field {
    order: u32,
    kind: FieldKind,
    tables: Option<Arc<LogTables>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("order", &self.order)
            .field("kind", &self.kind)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.kind == other.kind
    }
}

impl Eq for Field {}

impl Field {
    /// Builds `F_q`. Powers of two (including 2) become binary extension
    /// fields; `modulus` picks the reduction polynomial and defaults to the
    /// table in the module docs.
    pub fn new(q: u64, modulus: Option<u32>) -> Result<Field, FieldError> {
        if q >= 2 && q.is_power_of_two() {
            let degree = q.trailing_zeros();
            if degree > MAX_BINARY_DEGREE {
                return Err(FieldError::UnsupportedOrder(q));
            }
            let modulus = modulus.unwrap_or(DEFAULT_MODULI[degree as usize]);
            if poly_degree(modulus) != Some(degree) {
                return Err(FieldError::ModulusDegree { modulus, degree });
            }
            if !is_irreducible_gf2(modulus) {
                return Err(FieldError::Reducible(modulus));
            }
            let tables = build_tables(degree, modulus);
            return Ok(Field {
                order: q as u32,
                kind: FieldKind::BinaryExtension { degree, modulus },
                tables: Some(Arc::new(tables)),
            });
        }
        if q > MAX_PRIME || !is_prime(q) {
            return Err(FieldError::UnsupportedOrder(q));
        }
        if modulus.is_some() {
            return Err(FieldError::ModulusForPrime(q));
        }
        Ok(Field {
            order: q as u32,
            kind: FieldKind::Prime,
            tables: None,
        })
    }

    /// Shorthand for [`Field::new`] with the default modulus.
    pub fn with_order(q: u64) -> Result<Field, FieldError> {
        Field::new(q, None)
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// `log2(q)`; the number of bits one symbol occupies.
    pub fn bits_per_symbol(&self) -> f64 {
        (self.order as f64).log2()
    }

    pub fn elem(&self, value: u64) -> Result<Elem, FieldError> {
        if value < self.order as u64 {
            Ok(Elem(value as u32))
        } else {
            Err(FieldError::OutOfRange {
                value,
                order: self.order as u64,
            })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.order).map(Elem)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match self.kind {
            FieldKind::BinaryExtension { .. } => Elem(a.0 ^ b.0),
            FieldKind::Prime => {
                let s = a.0 as u64 + b.0 as u64;
                let p = self.order as u64;
                Elem(if s >= p { s - p } else { s } as u32)
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        match self.kind {
            FieldKind::BinaryExtension { .. } => a,
            FieldKind::Prime => {
                if a.0 == 0 {
                    a
                } else {
                    Elem(self.order - a.0)
                }
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        match &self.tables {
            Some(t) => Elem(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize]),
            None => Elem(((a.0 as u64 * b.0 as u64) % self.order as u64) as u32),
        }
    }

    /// `acc + a * b`, the multiply-accumulate of every convolution loop.
    #[inline]
    pub fn mul_add(&self, acc: Elem, a: Elem, b: Elem) -> Elem {
        self.add(acc, self.mul(a, b))
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(match &self.tables {
            Some(t) => {
                let n = self.order - 1;
                Elem(t.exp[((n - t.log[a.0 as usize]) % n) as usize])
            }
            None => Elem(pow_mod(a.0 as u64, self.order as u64 - 2, self.order as u64) as u32),
        })
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = Elem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn poly_degree(p: u32) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(31 - p.leading_zeros())
    }
}

/// Remainder of carry-less division `a mod b` over `F_2`.
fn gf2_rem(mut a: u64, b: u64) -> u64 {
    let db = 63 - b.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= db {
        a ^= b << (63 - a.leading_zeros() - db);
    }
    a
}

/// Trial division by every polynomial of degree `1..=deg/2`.
pub(crate) fn is_irreducible_gf2(p: u32) -> bool {
    let deg = match poly_degree(p) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    for d in 1..=deg / 2 {
        for low in 0..(1u64 << d) {
            let divisor = (1u64 << d) | low;
            if gf2_rem(p as u64, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

fn clmul_reduce(a: u32, b: u32, modulus: u32) -> u32 {
    let mut acc: u64 = 0;
    let mut b = b as u64;
    let mut a = a as u64;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    gf2_rem(acc, modulus as u64) as u32
}

fn build_tables(degree: u32, modulus: u32) -> LogTables {
    let q = 1u32 << degree;
    let n = q - 1;
    // x generates the group when the modulus is primitive; otherwise search.
    let generator = (1..q)
        .find(|&g| multiplicative_order(g, degree, modulus) == n)
        .expect("the multiplicative group of a finite field is cyclic");
    let mut exp = vec![0u32; 2 * n.max(1) as usize];
    let mut log = vec![0u32; q as usize];
    let mut x = 1u32;
    for i in 0..n {
        exp[i as usize] = x;
        log[x as usize] = i;
        x = clmul_reduce(x, generator, modulus);
    }
    for i in n..2 * n {
        exp[i as usize] = exp[(i - n) as usize];
    }
    LogTables { exp, log }
}

fn multiplicative_order(g: u32, degree: u32, modulus: u32) -> u32 {
    let mut x = g;
    let mut k = 1;
    while x != 1 {
        x = clmul_reduce(x, g, modulus);
        k += 1;
        if k > (1 << degree) {
            return 0;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_fields() -> Vec<Field> {
        [2u64, 3, 4, 5, 7, 8, 11, 13, 16]
            .iter()
            .map(|&q| Field::with_order(q).unwrap())
            .collect()
    }

    #[test]
    fn rejects_unsupported_orders() {
        assert_eq!(Field::with_order(6), Err(FieldError::UnsupportedOrder(6)));
        assert!(Field::with_order(0).is_err());
        assert!(Field::with_order(1).is_err());
        assert!(Field::with_order(9).is_err());
        assert!(Field::with_order(1 << 17).is_err());
    }

    #[test]
    fn rejects_reducible_modulus() {
        // x^3 + 1 = (x + 1)(x^2 + x + 1)
        assert_eq!(Field::new(8, Some(0b1001)), Err(FieldError::Reducible(0b1001)));
        assert!(matches!(
            Field::new(8, Some(0b111)),
            Err(FieldError::ModulusDegree { .. })
        ));
        assert!(Field::new(5, Some(0b111)).is_err());
    }

    #[test]
    fn f8_irreducibility_by_root_check() {
        // A cubic over F_2 is irreducible iff it has no root in F_2.
        let eval = |p: u32, x: u32| -> u32 { (0..4).map(|i| ((p >> i) & 1) * x.pow(i)).sum::<u32>() % 2 };
        assert_ne!(eval(0b1011, 0), 0);
        assert_ne!(eval(0b1011, 1), 0);
        assert!(Field::new(8, Some(0b1011)).is_ok());
    }

    #[test]
    fn default_moduli_are_primitive() {
        for k in 1..=MAX_BINARY_DEGREE {
            let m = DEFAULT_MODULI[k as usize];
            assert!(is_irreducible_gf2(m), "k={k}");
            assert_eq!(multiplicative_order(2 % (1 << k), k, m).max(1), (1 << k) - 1, "k={k}");
        }
    }

    #[test]
    fn worked_values() {
        let f2 = Field::with_order(2).unwrap();
        assert_eq!(f2.add(Elem(1), Elem(1)), Elem(0));
        let f8 = Field::new(8, Some(0b1011)).unwrap();
        assert_eq!(f8.mul(Elem(3), Elem(7)), Elem(2));
        assert_eq!(f8.inv(Elem(2)), Ok(Elem(5)));
        let f5 = Field::with_order(5).unwrap();
        assert_eq!(f5.inv(Elem(3)), Ok(Elem(2)));
        assert_eq!(f5.inv(Elem(0)), Err(FieldError::ZeroInverse));
    }

    #[test]
    fn f8_inverse_matches_exhaustive_search() {
        let f8 = Field::new(8, Some(0b1011)).unwrap();
        for a in 1..8 {
            let b = (1..8).find(|&b| f8.mul(Elem(a), Elem(b)) == Elem::ONE).unwrap();
            assert_eq!(f8.inv(Elem(a)).unwrap(), Elem(b));
        }
    }

    #[test]
    fn mul_agrees_with_carryless_reference() {
        for k in 1..=8 {
            let f = Field::with_order(1 << k).unwrap();
            let m = DEFAULT_MODULI[k as usize];
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.mul(a, b).0, clmul_reduce(a.0, b.0, m));
                }
            }
        }
    }

    #[test]
    fn axioms_exhaustive_small() {
        for f in small_fields() {
            let q = f.order();
            for a in f.elements() {
                assert_eq!(f.add(a, Elem::ZERO), a);
                assert_eq!(f.mul(a, Elem::ONE), a);
                assert_eq!(f.add(a, f.neg(a)), Elem::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Elem::ONE, "q={q} a={a}");
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn axioms_sampled_large() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for q in [32u64, 256, 1024, 1 << 16, 257, 65521] {
            let f = Field::with_order(q).unwrap();
            for _ in 0..10_000 {
                let a = Elem(rng.random_range(0..q as u32));
                let b = Elem(rng.random_range(0..q as u32));
                let c = Elem(rng.random_range(0..q as u32));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Elem::ONE);
                }
            }
        }
    }

    #[test]
    fn non_primitive_modulus_still_works() {
        // x^4+x^3+x^2+x+1 is irreducible but x has order 5.
        let f = Field::new(16, Some(0b11111)).unwrap();
        for a in 1..16 {
            assert_eq!(f.mul(Elem(a), f.inv(Elem(a)).unwrap()), Elem::ONE);
            for b in 0..16 {
                assert_eq!(f.mul(Elem(a), Elem(b)).0, clmul_reduce(a, b, 0b11111));
            }
        }
    }
}
