//! Closed-form bounds on stopping times and success probabilities.
//!
//! Rational quantities come in two flavours: `*_exact` returns a
//! [`BigRational`], the plain version its `f64` value. Infinite series are
//! float-only and truncated by an explicit tail bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("bound not applicable: q^(t+1) = {q}^{t_plus_one} <= d = {d}")]
    NotApplicable { d: u64, q: u64, t_plus_one: u32 },
    #[error("field order must be at least 2, got {0}")]
    FieldOrder(u64),
    #[error("rate must be at least 1")]
    ZeroRate,
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("shared-parent count {lambda} must satisfy 0 < lambda < m = {m}")]
    Lambda { lambda: u32, m: u32 },
    #[error("need n >= m >= 1, got n={n} m={m}")]
    Combination { n: u32, m: u32 },
    #[error("time index must be at least 1")]
    ZeroTime,
}

fn int(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn binom(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn pow(q: u64, e: u32) -> BigRational {
    num_traits::pow(int(q), e as usize)
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn check_q(q: u64) -> Result<(), BoundError> {
    if q < 2 {
        return Err(BoundError::FieldOrder(q));
    }
    Ok(())
}

fn check_m(m: u32) -> Result<(), BoundError> {
    if m == 0 {
        return Err(BoundError::ZeroRate);
    }
    Ok(())
}

/// `(1 - d/q^(t+1))^eta`, defined when `q^(t+1) > d`.
pub fn ho_bound_exact(d: u64, q: u64, eta: u64, t: u32) -> Result<BigRational, BoundError> {
    check_q(q)?;
    let qt = pow(q, t + 1);
    if d == 0 {
        return Ok(BigRational::one());
    }
    if qt <= int(d) {
        return Err(BoundError::NotApplicable {
            d,
            q,
            t_plus_one: t + 1,
        });
    }
    let base = BigRational::one() - int(d) / qt;
    Ok(num_traits::pow(base, eta as usize))
}

pub fn ho_bound(d: u64, q: u64, eta: u64, t: u32) -> Result<f64, BoundError> {
    ho_bound_exact(d, q, eta, t).map(|v| to_f64(&v))
}

/// Smallest horizon the success-probability bound guarantees for tolerance
/// `eps`: `ceil(log_q d - log_q(1 - (1-eps)^(1/eta))) - 1`, clamped at 0 and
/// bumped until the bound really reaches `1 - eps`.
pub fn t0_for_epsilon(d: u64, q: u64, eta: u64, eps: f64) -> Result<u32, BoundError> {
    check_q(q)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(BoundError::Epsilon(eps));
    }
    if d == 0 || eta == 0 {
        return Ok(0);
    }
    let lq = (q as f64).ln();
    let root = (1.0 - eps).powf(1.0 / eta as f64);
    let x = (d as f64).ln() / lq - (1.0 - root).ln() / lq;
    let nearest = x.round();
    let ceil = if (x - nearest).abs() < 1e-9 { nearest } else { x.ceil() };
    let mut t0 = (ceil - 1.0).max(0.0) as u32;
    loop {
        match ho_bound(d, q, eta, t0) {
            Ok(p) if p >= 1.0 - eps - 1e-12 => return Ok(t0),
            _ => t0 += 1,
        }
    }
}

/// `prod_{l=1..m} (1 - q^(-t l))`.
pub fn full_rank_prob_q_exact(q: u64, m: u32, t: u32) -> Result<BigRational, BoundError> {
    check_q(q)?;
    check_m(m)?;
    if t == 0 {
        return Err(BoundError::ZeroTime);
    }
    Ok((1..=m).fold(BigRational::one(), |acc, l| {
        acc * (BigRational::one() - pow(q, t * l).recip())
    }))
}

pub fn full_rank_prob_q(q: u64, m: u32, t: u32) -> Result<f64, BoundError> {
    full_rank_prob_q_exact(q, m, t).map(|v| to_f64(&v))
}

/// `1 - Q(q, m, t)` in floating point without cancellation.
fn tail_prob(q: u64, m: u32, t: u32) -> f64 {
    let lq = (q as f64).ln();
    let s: f64 = (1..=m).map(|l| (-(-(t as f64) * l as f64 * lq).exp()).ln_1p()).sum();
    -s.exp_m1()
}

/// `sum_{t>=1} (1 - Q(q, m, t))`, stopped once the tail bound
/// `m q^(-t) / (1 - 1/q)` drops below `tol`.
pub fn exact_et(q: u64, m: u32, tol: f64) -> Result<f64, BoundError> {
    check_q(q)?;
    check_m(m)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(BoundError::Tolerance(tol));
    }
    let qf = q as f64;
    let mut sum = 0.0;
    let mut t = 1u32;
    loop {
        sum += tail_prob(q, m, t);
        let tail = m as f64 * qf.powi(-(t as i32)) / (1.0 - 1.0 / qf);
        if tail < tol || t == u32::MAX {
            return Ok(sum);
        }
        t += 1;
    }
}

fn alternating(m: u32, mut term: impl FnMut(u32) -> BigRational) -> BigRational {
    (1..=m).fold(BigRational::zero(), |acc, k| {
        let c = BigRational::from_integer(binom(m, k)) * term(k);
        if k % 2 == 1 {
            acc + c
        } else {
            acc - c
        }
    })
}

/// `sum_k (-1)^(k-1) C(m,k) / (q^k - 1)`.
pub fn et_upper_exact(m: u32, q: u64) -> Result<BigRational, BoundError> {
    check_q(q)?;
    check_m(m)?;
    Ok(alternating(m, |k| (pow(q, k) - BigRational::one()).recip()))
}

pub fn et_upper(m: u32, q: u64) -> Result<f64, BoundError> {
    et_upper_exact(m, q).map(|v| to_f64(&v))
}

/// `sum_k (-1)^(k-1) C(m,k) / (q^(k m) - 1)`.
pub fn et_lower_exact(m: u32, q: u64) -> Result<BigRational, BoundError> {
    check_q(q)?;
    check_m(m)?;
    Ok(alternating(m, |k| (pow(q, k * m) - BigRational::one()).recip()))
}

pub fn et_lower(m: u32, q: u64) -> Result<f64, BoundError> {
    et_lower_exact(m, q).map(|v| to_f64(&v))
}

/// Bound on `E[T_i^2]`: `ET_UB + 2 sum_k (-1)^(k-1) C(m,k) (q^k/(q^k-1))^2`.
pub fn et2_upper_exact(m: u32, q: u64) -> Result<BigRational, BoundError> {
    let base = et_upper_exact(m, q)?;
    let double = alternating(m, |k| {
        let qk = pow(q, k);
        let r = qk.clone() / (qk - BigRational::one());
        r.clone() * r
    });
    Ok(base + int(2) * double)
}

pub fn et2_upper(m: u32, q: u64) -> Result<f64, BoundError> {
    et2_upper_exact(m, q).map(|v| to_f64(&v))
}

/// Bound on `E[T_i T_j]` for sinks sharing `lambda` parents, with the
/// unknown `E[T_i]` factor replaced by [`et_upper_exact`].
pub fn rho_lambda_upper_exact(m: u32, lambda: u32, q: u64) -> Result<BigRational, BoundError> {
    check_m(m)?;
    if lambda == 0 || lambda >= m {
        return Err(BoundError::Lambda { lambda, m });
    }
    Ok(et_upper_exact(m, q)? * et_upper_exact(m - lambda, q)?)
}

pub fn rho_lambda_upper(m: u32, lambda: u32, q: u64) -> Result<f64, BoundError> {
    rho_lambda_upper_exact(m, lambda, q).map(|v| to_f64(&v))
}

/// Largest `rho_lambda` bound over `lambda = 1..m-1`; `None` for `m = 1`.
pub fn rho_upper_exact(m: u32, q: u64) -> Result<Option<BigRational>, BoundError> {
    check_q(q)?;
    check_m(m)?;
    let mut best: Option<BigRational> = None;
    for lambda in 1..m {
        let v = rho_lambda_upper_exact(m, lambda, q)?;
        if best.as_ref().is_none_or(|b| v > *b) {
            best = Some(v);
        }
    }
    Ok(best)
}

pub fn rho_upper(m: u32, q: u64) -> Result<Option<f64>, BoundError> {
    rho_upper_exact(m, q).map(|v| v.map(|v| to_f64(&v)))
}

/// `C(n, m)`.
pub fn combination_sinks(n: u32, m: u32) -> Result<u64, BoundError> {
    if m == 0 || m > n {
        return Err(BoundError::Combination { n, m });
    }
    binom(n, m).to_u64().ok_or(BoundError::Combination { n, m })
}

/// Variance bound for the average stopping time on the `n choose m`
/// combination network:
/// `ET2_UB / d + (m/n) rho_UB - (1 + m/n) ET_LB^2` with `d = C(n, m)`; the
/// `rho` term is dropped when `m = 1`.
pub fn var_upper_exact(n: u32, m: u32, q: u64) -> Result<BigRational, BoundError> {
    let d = combination_sinks(n, m)?;
    let ratio = BigRational::new(BigInt::from(m), BigInt::from(n));
    let lb = et_lower_exact(m, q)?;
    let mut v = et2_upper_exact(m, q)? / int(d) - (BigRational::one() + ratio.clone()) * lb.clone() * lb;
    if let Some(rho) = rho_upper_exact(m, q)? {
        v += ratio * rho;
    }
    Ok(v)
}

pub fn var_upper(n: u32, m: u32, q: u64) -> Result<f64, BoundError> {
    var_upper_exact(n, m, q).map(|v| to_f64(&v))
}

/// `ceil(log_q d)` by integer arithmetic.
pub fn ceil_log(q: u64, d: u64) -> u32 {
    let mut c = 0;
    let mut p: u128 = 1;
    while p < d as u128 {
        p *= q as u128;
        c += 1;
    }
    c
}

/// Bound on `E[T_N]`:
/// `ceil(log_q d) - 1 + sum_{t >= s} [1 - (1 - d/q^t)^eta]`, `s = max(ceil(log_q d), 1)`,
/// summed term by term until the remaining tail (at most
/// `eta d q^(-t) / (1 - 1/q)`) falls below `tol`.
pub fn et_n_upper(d: u64, q: u64, eta: u64, tol: f64) -> Result<f64, BoundError> {
    check_q(q)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(BoundError::Tolerance(tol));
    }
    if d == 0 || eta == 0 {
        return Ok(0.0);
    }
    let c = ceil_log(q, d);
    let qf = q as f64;
    let mut sum = c.saturating_sub(1) as f64;
    let mut t = c.max(1);
    loop {
        let x = d as f64 * qf.powi(-(t as i32));
        sum += if x >= 1.0 {
            1.0
        } else {
            -(eta as f64 * (-x).ln_1p()).exp_m1()
        };
        let tail = eta as f64 * x / qf / (1.0 - 1.0 / qf);
        if tail < tol {
            return Ok(sum);
        }
        t += 1;
    }
}

/// Closed form of [`et_n_upper`]: the geometric tail
/// `sum_{t>=s} q^(-t k) = 1 / (q^((s-1)k) (q^k - 1))` gives
/// `ceil(log_q d) - 1 + sum_k (-1)^(k-1) C(eta,k) d^k / (q^((s-1)k) (q^k - 1))`.
pub fn et_n_upper_exact(d: u64, q: u64, eta: u32) -> Result<BigRational, BoundError> {
    check_q(q)?;
    if d == 0 || eta == 0 {
        return Ok(BigRational::zero());
    }
    let c = ceil_log(q, d);
    let s = c.max(1);
    let series = alternating(eta, |k| {
        pow(d, k) / (pow(q, (s - 1) * k) * (pow(q, k) - BigRational::one()))
    });
    Ok(int(c.saturating_sub(1) as u64) + series)
}

/// Inputs shared by the bound table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundInputs {
    pub d: u64,
    pub q: u64,
    pub eta: u64,
    pub m: u32,
    pub n: u32,
    pub epsilon: f64,
    pub t: u32,
    pub lambda: u32,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<(), BoundError> {
        check_q(self.q)?;
        check_m(self.m)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(BoundError::Epsilon(self.epsilon));
        }
        if self.lambda >= self.m {
            return Err(BoundError::Lambda {
                lambda: self.lambda,
                m: self.m,
            });
        }
        if self.n < self.m {
            return Err(BoundError::Combination { n: self.n, m: self.m });
        }
        Ok(())
    }

    /// Sinks sharing a parent with a given sink: `C(n-1, m-1)`.
    pub fn delta(&self) -> u64 {
        binom(self.n - 1, self.m - 1).to_u64().unwrap_or(u64::MAX)
    }

    /// `Delta / d = m / n`.
    pub fn delta_over_d(&self) -> BigRational {
        BigRational::new(BigInt::from(self.m), BigInt::from(self.n))
    }
}

/// Renders an exact value as `p/q` (or `p` when integral).
pub fn format_exact(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else if x.is_negative() {
        format!("-{}/{}", x.numer().abs(), x.denom())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn ho_bound_examples() {
        assert_eq!(ho_bound_exact(1, 8, 2, 0).unwrap(), r(49, 64));
        assert_eq!(ho_bound_exact(6, 2, 4, 2).unwrap(), r(1, 256));
        assert_eq!(ho_bound_exact(0, 2, 5, 0).unwrap(), r(1, 1));
        assert!(matches!(ho_bound(6, 2, 8, 1), Err(BoundError::NotApplicable { .. })));
        assert!(matches!(ho_bound(4, 2, 8, 1), Err(BoundError::NotApplicable { .. })));
    }

    #[test]
    fn ho_bound_monotone() {
        for q in [3u64, 4, 8] {
            for t in 1..4 {
                let a = ho_bound(3, q, 4, t).unwrap();
                assert!((0.0..=1.0).contains(&a));
                assert!(ho_bound(3, q, 4, t + 1).unwrap() >= a);
                assert!(ho_bound(3, q * 2, 4, t).unwrap() >= a);
                assert!(ho_bound(4, q, 4, t).unwrap() <= a);
                assert!(ho_bound(3, q, 5, t).unwrap() <= a);
            }
        }
    }

    #[test]
    fn t0_examples() {
        assert_eq!(t0_for_epsilon(2, 2, 1, 0.5).unwrap(), 1);
        assert_eq!(ho_bound_exact(2, 2, 1, 1).unwrap(), r(1, 2));
        let scan = (0..).find(|&t| ho_bound(1, 2, 1, t).is_ok_and(|p| p >= 0.5)).unwrap();
        assert_eq!(t0_for_epsilon(1, 2, 1, 0.5).unwrap(), scan);
        assert_eq!(t0_for_epsilon(1, 2, 1, 0.99).unwrap(), 0);
        assert_eq!(t0_for_epsilon(6, 2, 8, 0.99).unwrap(), ceil_log(2, 6) - 1 + 1);
        assert!(t0_for_epsilon(6, 2, 8, 0.01).unwrap() > t0_for_epsilon(6, 2, 8, 0.5).unwrap());
        assert!(t0_for_epsilon(6, 2, 8, 1.0).is_err());
        for (d, q, eta, eps) in [(6, 2, 8, 0.1), (10, 3, 12, 0.05), (1, 8, 2, 0.3)] {
            let t0 = t0_for_epsilon(d, q, eta, eps).unwrap();
            assert!(ho_bound(d, q, eta, t0).unwrap() >= 1.0 - eps);
        }
    }

    #[test]
    fn full_rank_examples() {
        assert_eq!(full_rank_prob_q_exact(2, 2, 1).unwrap(), r(3, 8));
        assert_eq!(full_rank_prob_q_exact(5, 1, 2).unwrap(), r(24, 25));
        assert_eq!(full_rank_prob_q_exact(8, 2, 1).unwrap(), r(441, 512));
        let mut prev = 0.0;
        for t in 1..12 {
            let v = full_rank_prob_q(3, 3, t).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(prev > 1.0 - 1e-5);
        assert!(full_rank_prob_q(2, 2, 0).is_err());
    }

    #[test]
    fn exact_et_values() {
        assert!((exact_et(2, 1, 1e-12).unwrap() - 1.0).abs() < 1e-9);
        let v = exact_et(2, 2, 1e-9).unwrap();
        // 1 + 1/3 - 1/7
        assert!((v - 25.0 / 21.0).abs() < 1e-8, "{v}");
        for q in [2u64, 3, 4, 5, 8] {
            for m in 1..=4 {
                let e = exact_et(q, m, 1e-12).unwrap();
                assert!(et_lower(m, q).unwrap() <= e + 1e-12, "q={q} m={m}");
                assert!(e <= et_upper(m, q).unwrap() + 1e-12, "q={q} m={m}");
            }
        }
    }

    #[test]
    fn expectation_bounds() {
        assert_eq!(et_upper_exact(2, 2).unwrap(), r(5, 3));
        assert_eq!(et_upper_exact(1, 7).unwrap(), r(1, 6));
        assert_eq!(et_lower_exact(2, 2).unwrap(), r(3, 5));
        for m in 1..=4 {
            assert!(et_upper(m, 1 << 16).unwrap() < 1e-3);
        }
        assert_eq!(et2_upper_exact(1, 2).unwrap(), r(9, 1));
        assert_eq!(et2_upper_exact(2, 2).unwrap(), r(127, 9));
        for q in [2u64, 3, 4, 5, 8] {
            for m in 1..=4 {
                let lb = et_lower(m, q).unwrap();
                assert!(et2_upper(m, q).unwrap() >= lb * lb);
            }
        }
    }

    #[test]
    fn covariance_and_variance() {
        assert_eq!(rho_lambda_upper_exact(2, 1, 2).unwrap(), r(5, 3));
        assert_eq!(rho_upper_exact(1, 2).unwrap(), None);
        assert!(rho_lambda_upper(3, 3, 2).is_err());
        assert!(rho_lambda_upper(3, 0, 2).is_err());
        let v = var_upper(6, 2, 2).unwrap();
        assert!((v - 1.0163).abs() < 1e-3, "{v}");
        let first = |n| to_f64(&(et2_upper_exact(2, 2).unwrap() / int(combination_sinks(n, 2).unwrap())));
        assert!(first(8) < first(6) && first(6) < first(4));
        assert!(var_upper(10, 1, 2).is_ok());
        assert!(var_upper(1, 2, 2).is_err());
    }

    #[test]
    fn tn_bound_forms_agree() {
        for (d, q, eta) in [(6u64, 2u64, 8u32), (1, 8, 2), (10, 3, 12), (6, 16, 8), (4, 2, 3)] {
            let series = et_n_upper(d, q, eta as u64, 1e-13).unwrap();
            let closed = to_f64(&et_n_upper_exact(d, q, eta).unwrap());
            assert!((series - closed).abs() < 1e-9, "d={d} q={q}: {series} vs {closed}");
        }
        assert!(et_n_upper(6, 1 << 16, 8, 1e-12).unwrap() < 1e-3);
    }

    #[test]
    fn inputs_and_formatting() {
        let b = BoundInputs {
            d: 10,
            q: 2,
            eta: 10,
            m: 2,
            n: 5,
            epsilon: 0.1,
            t: 2,
            lambda: 1,
        };
        b.validate().unwrap();
        assert_eq!(b.delta(), 4);
        assert_eq!(b.delta_over_d(), r(2, 5));
        assert_eq!(format_exact(&r(49, 64)), "49/64");
        assert_eq!(format_exact(&r(9, 1)), "9");
        assert_eq!(format_exact(&r(-1, 3)), "-1/3");
        assert_eq!(ceil_log(2, 6), 3);
        assert_eq!(ceil_log(2, 1), 0);
        assert_eq!(ceil_log(3, 9), 2);
    }
}
