//! Certified rational approximations of the exponential.
//!
//! The reduction generator needs a rational stand-in `t` for `2e^{y/2}`
//! whose error is provably below a requested bound, and the diagnostic
//! machinery evaluates expressions in `e^{-2x}` as certified intervals.
//! Both come from the Taylor series with an explicit Lagrange remainder:
//! after `K` terms at argument `0 <= x <= 2`,
//!
//! ```text
//! 0 <= e^x - S_K(x) <= e^x · x^{K+1}/(K+1)! <= 9 · x^{K+1}/(K+1)!
//! ```
//!
//! so `[S_K, S_K + 9·x^{K+1}/(K+1)!]` brackets `e^x`, and `K` grows until
//! the bracket is narrow enough.  Negative arguments go through the
//! reciprocal of the positive-argument interval.  Everything is exact
//! rational arithmetic; nothing here touches floating point.

use num_bigint::BigInt;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExpError {
    #[error("argument {0} outside supported range")]
    Domain(Scalar),
    #[error("requested error bound {0} is not positive")]
    BadBound(Scalar),
}

/// Partial sum `S_K(x)` together with the remainder bound `9·x^{K+1}/(K+1)!`,
/// growing `K` until the bound is at most `cap`.  Requires `0 <= x <= 2`.
fn series_with_bound(x: &Scalar, cap: &Scalar) -> (Scalar, Scalar) {
    let mut sum = Scalar::one();
    let mut term = Scalar::one(); // x^k / k!
    let mut k: u64 = 0;
    loop {
        // remainder after k terms, bounded via e^x <= e^2 < 9
        let next = &term * x / Scalar::from_bigint(BigInt::from(k + 1));
        let bound = Scalar::from(9u64) * &next;
        if &bound <= cap {
            return (sum, bound);
        }
        sum += &next;
        term = next;
        k += 1;
    }
}

/// Certified interval for `e^x`: returns `(lo, hi)` with
/// `lo <= e^x <= hi` and `hi - lo <= width`.  Supported for `|x| <= 2`.
pub fn exp_interval(x: &Scalar, width: &Scalar) -> Result<(Scalar, Scalar), ExpError> {
    if !width.is_positive() {
        return Err(ExpError::BadBound(width.clone()));
    }
    if x.abs() > Scalar::from(2u64) {
        return Err(ExpError::Domain(x.clone()));
    }
    if x.is_negative() {
        // e^x = 1 / e^{-x}; the positive-side lo is >= 1, so the
        // reciprocal interval is no wider than the inner one.
        let (lo, bound) = series_with_bound(&-x, width);
        let hi = &lo + &bound;
        return Ok((hi.recip(), lo.recip()));
    }
    let (lo, bound) = series_with_bound(x, width);
    let hi = &lo + &bound;
    Ok((lo, hi))
}

/// A rational `t` with certified `|t - 2e^{y/2}| <= err`, for `0 <= y <= 1`.
///
/// `t` is twice the truncated Taylor series of `e` at `y/2`; the truncation
/// order is chosen so the doubled remainder bound sits under `err`.  The
/// series only undershoots, so `t <= 2e^{y/2}` always.
pub fn rational_exp_half(y: &Scalar, err: &Scalar) -> Result<Scalar, ExpError> {
    if !err.is_positive() {
        return Err(ExpError::BadBound(err.clone()));
    }
    if y.is_negative() || y > &Scalar::one() {
        return Err(ExpError::Domain(y.clone()));
    }
    let x = y / Scalar::from(2u64);
    // need 2·remainder <= err, i.e. remainder bound <= err/2
    let cap = err / Scalar::from(2u64);
    let (sum, _) = series_with_bound(&x, &cap);
    Ok(Scalar::from(2u64) * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_zero_is_exact() {
        let (lo, hi) = exp_interval(&Scalar::zero(), &Scalar::pow2(-20)).unwrap();
        assert_eq!(lo, Scalar::one());
        assert_eq!(hi, Scalar::one());
    }

    #[test]
    fn exp_one_brackets_e() {
        let (lo, hi) = exp_interval(&Scalar::one(), &Scalar::pow2(-40)).unwrap();
        assert!(&hi - &lo <= Scalar::pow2(-40));
        let e = 1.0f64.exp();
        assert!(lo.to_f64() <= e && e <= hi.to_f64());
    }

    #[test]
    fn exp_negative_brackets_reciprocal() {
        let w = Scalar::pow2(-50);
        let (lo, hi) = exp_interval(&Scalar::frac(-1, 2), &w).unwrap();
        assert!(&hi - &lo <= w);
        let target = (-0.5f64).exp();
        assert!(lo.to_f64() <= target && target <= hi.to_f64());
        // product with the positive side straddles 1
        let (plo, phi) = exp_interval(&Scalar::frac(1, 2), &w).unwrap();
        assert!(&lo * &plo <= Scalar::one());
        assert!(&hi * &phi >= Scalar::one());
    }

    #[test]
    fn exp_half_zero_is_two() {
        assert_eq!(
            rational_exp_half(&Scalar::zero(), &Scalar::pow2(-10)).unwrap(),
            Scalar::from(2u64)
        );
    }

    #[test]
    fn exp_half_matches_interval_oracle() {
        // 2e^{1/4} = 2.5680508... to within 2^-40
        let y = Scalar::frac(1, 2);
        let err = Scalar::pow2(-40);
        let t = rational_exp_half(&y, &err).unwrap();
        let (lo, hi) = exp_interval(&Scalar::frac(1, 4), &Scalar::pow2(-60)).unwrap();
        let two = Scalar::from(2u64);
        assert!(&two * &lo - &err <= t && t <= &two * &hi + &err);
        assert!((t.to_f64() - 2.5680508337).abs() < 1e-8);
        // the truncated series undershoots
        assert!(t <= two * hi);
    }

    #[test]
    fn shrinking_err_tightens() {
        let y = Scalar::frac(1, 3);
        let loose = rational_exp_half(&y, &Scalar::pow2(-10)).unwrap();
        let tight = rational_exp_half(&y, &Scalar::pow2(-60)).unwrap();
        // both undershoot, so a tighter bound can only move the estimate up
        assert!(tight >= loose);
    }

    #[test]
    fn domain_checks() {
        assert!(exp_interval(&Scalar::from(3u64), &Scalar::one()).is_err());
        assert!(exp_interval(&Scalar::one(), &Scalar::zero()).is_err());
        assert!(rational_exp_half(&Scalar::from(2u64), &Scalar::one()).is_err());
        assert!(rational_exp_half(&Scalar::frac(-1, 2), &Scalar::one()).is_err());
    }
}
