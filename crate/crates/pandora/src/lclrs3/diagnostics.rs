//! Loss-approximation diagnostics for reduction instances.
//!
//! The reduction's correctness rests on `Loss(σ)` being governed, up to
//! σ-independent constants, by the convex function
//!
//! ```text
//! h(x) = e^{-2x}·(1 - (k₂/k₁)·e^{-y+x}),    x = Σ_{i before pivot} p_i + p_i²
//! ```
//!
//! with `k₂/k₁ = t` exactly by the choice of `τ_H`.  This module computes
//! the constants `k₁`, `k₂`, `C` as exact rationals, evaluates `h` and its
//! second derivative as certified intervals (default width `2^-64`; the
//! residuals under test are of order `Δ³`, far above that), and reports an
//! upper bound on the residual of the sandwich for a given permutation.
//!
//! One bookkeeping caveat, measured by exhaustive sweeps here: with the
//! constants exactly as displayed, `(Loss(σ) - C)/k₁` tracks not `h(x)` but
//! `h(x) - t·Σ_{i≤n} p_i²` — the second-order mass correction enters `C`
//! with the wrong weight.  The offset is the same for every permutation, so
//! nothing about the argmin (and hence the reduction) changes; the
//! diagnostics expose it as [`ReductionDiagnostics::sigma_free_shift`] and
//! calibrate the residual bound around the shifted target.
//! `z = Σ_{i after pivot} p_i²/2` rides along for analysis only.

use thiserror::Error;

use crate::exp::{exp_interval, ExpError};
use crate::lclrs3::normal::{loss, NormalError};
use crate::lclrs3::reduction::ReductionOutput;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Normal(#[from] NormalError),
    #[error(transparent)]
    Exp(#[from] ExpError),
    #[error("pivot box missing from permutation")]
    NoPivot,
}

/// Exact constants and certified evaluations for one permutation.
#[derive(Debug, Clone)]
pub struct ReductionDiagnostics {
    pub k1: Scalar,
    pub k2: Scalar,
    pub c_const: Scalar,
    /// `Σ_{i in T_Bef} p_i + p_i²` for the analyzed permutation.
    pub x: Scalar,
    pub y: Scalar,
    /// `Σ_{i in T_Aft} p_i² / 2`; analysis-only.
    pub z: Scalar,
    /// Certified interval around `h(x)`.
    pub h_lo: Scalar,
    pub h_hi: Scalar,
    /// Exact `(Loss(σ) - C)/k₁`.
    pub normalized_loss: Scalar,
    /// `t·Σ_{i≤n} p_i²`: the permutation-independent gap between the
    /// normalized loss and `h(x)` left open by the constant `C`.
    pub sigma_free_shift: Scalar,
    /// Upper bound on `|(Loss(σ) - C)/k₁ + sigma_free_shift - h(x)|`.
    pub residual_bound: Scalar,
}

impl ReductionOutput {
    /// `k₁ = -½·p_f(τ_f-τ_H)(p_v+q_v) + p_v[(1-p_f)(τ_H-τ_L) + p_f(τ_f-τ_L)]`
    /// with `v` the pivot box and `f` the final box.
    pub fn k1(&self) -> Scalar {
        let v = self.instance().box_at(self.pivot_box());
        let f = self.instance().box_at(self.final_box());
        let half = Scalar::frac(1, 2);
        -&half * &f.p * (&f.tau - self.tau_h()) * (&v.p + &v.q)
            + &v.p
                * ((Scalar::one() - &f.p) * (self.tau_h() - self.tau_l())
                    + &f.p * (&f.tau - self.tau_l()))
    }

    /// `k₂ = p_v(1-p_f)(τ_H-τ_L)`.
    pub fn k2(&self) -> Scalar {
        let v = self.instance().box_at(self.pivot_box());
        let f = self.instance().box_at(self.final_box());
        &v.p * (Scalar::one() - &f.p) * (self.tau_h() - self.tau_l())
    }

    /// `C = ½·p_f(τ_f-τ_H)(1 - Π_{i≤n+1} r_i) + ½·k₂·Σ_{i≤n} p_i²`.
    pub fn c_const(&self) -> Scalar {
        let n = self.n_source();
        let f = self.instance().box_at(self.final_box());
        let half = Scalar::frac(1, 2);
        let mut r_prod = Scalar::one();
        for i in 0..=n {
            r_prod *= &self.instance().box_at(i).r;
        }
        let mut p_sq = Scalar::zero();
        for i in 0..n {
            let p = &self.instance().box_at(i).p;
            p_sq += &(p * p);
        }
        &half * &f.p * (&f.tau - self.tau_h()) * (Scalar::one() - r_prod)
            + half * self.k2() * p_sq
    }

    /// Certified interval for `h(x) = e^{-2x} - t·e^{-y-x}`, of width at
    /// most `precision`.
    pub fn h_at(&self, x: &Scalar, precision: &Scalar) -> Result<(Scalar, Scalar), ExpError> {
        // split the width across both exponentials, scaled by t < 3
        let part = precision / Scalar::from(8u64);
        let (a_lo, a_hi) = exp_interval(&(Scalar::from(-2i64) * x), &part)?;
        let (b_lo, b_hi) = exp_interval(&(-(self.y() + x)), &part)?;
        Ok((&a_lo - self.t() * &b_hi, &a_hi - self.t() * &b_lo))
    }

    /// Certified interval for `h''(x) = 4e^{-2x} - t·e^{-y-x}`.
    pub fn h_second_derivative(
        &self,
        x: &Scalar,
        precision: &Scalar,
    ) -> Result<(Scalar, Scalar), ExpError> {
        let part = precision / Scalar::from(8u64);
        let (a_lo, a_hi) = exp_interval(&(Scalar::from(-2i64) * x), &part)?;
        let (b_lo, b_hi) = exp_interval(&(-(self.y() + x)), &part)?;
        let four = Scalar::from(4u64);
        Ok((
            &four * &a_lo - self.t() * &b_hi,
            &four * &a_hi - self.t() * &b_lo,
        ))
    }
}

/// Default interval width for `h` evaluations.
pub fn default_precision() -> Scalar {
    Scalar::pow2(-64)
}

/// Diagnostics for `red` under `sigma` (0-based permutation of all n+2
/// boxes), with `h` evaluated to the given interval width.
pub fn h_diagnostics(
    red: &ReductionOutput,
    sigma: &[usize],
    precision: &Scalar,
) -> Result<ReductionDiagnostics, DiagnosticsError> {
    let loss_value = loss(red.instance(), sigma)?;
    let n = red.n_source();
    let xi = sigma
        .iter()
        .position(|&b| b == red.pivot_box())
        .ok_or(DiagnosticsError::NoPivot)?;

    let mut x = Scalar::zero();
    let mut z = Scalar::zero();
    for (pos, &b) in sigma.iter().enumerate() {
        if b >= n {
            continue;
        }
        let p = &red.instance().box_at(b).p;
        if pos < xi {
            x += &(p + p * p);
        } else {
            z += &(p * p / Scalar::from(2u64));
        }
    }

    let k1 = red.k1();
    let k2 = red.k2();
    let c_const = red.c_const();
    let (h_lo, h_hi) = red.h_at(&x, precision)?;
    let normalized_loss = (&loss_value - &c_const) / &k1;
    let mut p_sq = Scalar::zero();
    for i in 0..n {
        let p = &red.instance().box_at(i).p;
        p_sq += &(p * p);
    }
    let sigma_free_shift = red.t() * p_sq;
    // |s + shift - h(x)| <= max over the interval endpoints
    let shifted = &normalized_loss + &sigma_free_shift;
    let residual_bound = (&shifted - &h_lo).abs().max((&shifted - &h_hi).abs());

    Ok(ReductionDiagnostics {
        k1,
        k2,
        c_const,
        x,
        y: red.y().clone(),
        z,
        h_lo,
        h_hi,
        normalized_loss,
        sigma_free_shift,
        residual_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lclrs3::normal::permutations;
    use crate::lclrs3::reduce_partition;

    #[test]
    fn k2_over_k1_equals_t_exactly() {
        for source in [vec![1u64, 1], vec![1, 2], vec![1, 1, 2]] {
            let red = reduce_partition(&source).unwrap();
            assert_eq!(red.k2() / red.k1(), *red.t());
        }
    }

    #[test]
    fn constants_are_positive() {
        let red = reduce_partition(&[1, 2]).unwrap();
        assert!(red.k1().is_positive());
        assert!(red.k2().is_positive());
        assert!(red.c_const().is_positive());
    }

    #[test]
    fn residual_small_when_final_box_last() {
        // calibrated bound: 64·n²·Δ³ over all pivot-respecting permutations
        let red = reduce_partition(&[1, 1]).unwrap();
        let n = red.n_source();
        let delta3 = red.delta() * red.delta() * red.delta();
        let bound = Scalar::from(64u64) * Scalar::from((n * n) as u64) * delta3;
        let precision = default_precision();
        for sigma in permutations(n + 2) {
            if *sigma.last().unwrap() != red.final_box() {
                continue;
            }
            let d = h_diagnostics(&red, &sigma, &precision).unwrap();
            assert!(
                d.residual_bound <= bound,
                "sigma {sigma:?}: residual {} > bound {}",
                d.residual_bound.to_f64(),
                bound.to_f64()
            );
        }
    }

    #[test]
    fn h_second_derivative_in_window() {
        // h'' stays in [1, 4] across the reachable window [-2^{-6n}, 2^{-6n}]
        let red = reduce_partition(&[1, 1, 2]).unwrap();
        let edge = Scalar::pow2(-6 * red.n_source() as i64);
        let precision = default_precision();
        let steps = 16i64;
        for k in -steps..=steps {
            let x = &edge * Scalar::frac(k, steps);
            let (lo, hi) = red.h_second_derivative(&x, &precision).unwrap();
            assert!(lo >= Scalar::one(), "h''({}) lower end {}", x, lo.to_f64());
            assert!(hi <= Scalar::from(4u64), "h''({}) upper end {}", x, hi.to_f64());
        }
    }

    #[test]
    fn x_and_z_track_the_pivot_split() {
        let red = reduce_partition(&[1, 2]).unwrap();
        let p1 = &red.instance().box_at(0).p;
        let p2 = &red.instance().box_at(1).p;
        // boxes 0 before the pivot, 1 after, final box last
        let sigma = vec![0, red.pivot_box(), 1, red.final_box()];
        let d = h_diagnostics(&red, &sigma, &default_precision()).unwrap();
        assert_eq!(d.x, p1 + p1 * p1);
        assert_eq!(d.z, p2 * p2 / Scalar::from(2u64));
        assert_eq!(d.y, *red.y());
    }
}
