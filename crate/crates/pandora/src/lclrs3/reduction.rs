//! The Partition-to-search reduction generator.
//!
//! Given a multiset `S = {s_1, …, s_n}` of integers in `[1, 2^n]`, build an
//! (n+2)-box LCLRS3 instance whose optimal normal-policy permutation splits
//! the first `n` boxes evenly around box `n+1` exactly when `S` admits an
//! even partition.  All parameters are exact rationals:
//!
//! - `Γ = 2^{8n}`, `Δ = 2^{-7n}`;
//! - box `i ∈ [n]`: `p_i = q_i = s_i/Γ`, index
//!   `τ_i = τ_H + p_i·p_{n+1}(1-p_{n+2})(τ_H-τ_L)/(2p_{n+2})`, cost
//!   `c_i = p_i(1-τ_i)` so the index identity holds by construction;
//! - box `n+1`: `p = 1/Γ`, `q = 1 - 41/Γ`, `c = 1/(2Γ)`, making
//!   `τ_{n+1} = τ_L = 1/2` and `r_{n+1} = 40/Γ`;
//! - box `n+2`: `p = q = 1/8`, `c = 1/32`, so `τ_{n+2} = 3/4`;
//! - `t` is a rational within a certified `Δ²/4` of `2e^{y/2}` for
//!   `y = Σ(s_i/Γ + (s_i/Γ)²)`, and
//!   `τ_H = (-3tΓ + 28 + 94t) / (-4tΓ + 56 + 104t)`,
//!   which forces `k₂/k₁ = t` exactly.
//!
//! Construction re-checks every family invariant and the index ordering
//! `τ_{n+2} > τ_i > τ_H > τ_L`; a parameter that lands outside its window is
//! an error, never a silently emitted instance.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::dist::DiscreteDistribution;
use crate::exact::SizeError;
use crate::exp::rational_exp_half;
use crate::index::compute_index;
use crate::instance::{PnoiBox, PnoiInstance};
use crate::lclrs3::{best_permutation, is_lclrs3, Lclrs3Instance};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("the source multiset is empty")]
    EmptySource,
    #[error("element s_{index} = {value} outside [1, 2^{n}]")]
    ElementOutOfRange { index: usize, value: u64, n: usize },
    #[error("construction check failed: {0}")]
    Construction(String),
}

/// A generated reduction instance with its certified parameters.
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    instance: Lclrs3Instance,
    source: Vec<u64>,
    gamma: Scalar,
    delta: Scalar,
    y: Scalar,
    t: Scalar,
    t_err: Scalar,
    tau_h: Scalar,
    tau_l: Scalar,
}

/// Sidecar metadata, serialized next to the instance file.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionMeta {
    pub source: Vec<u64>,
    pub gamma: Scalar,
    pub delta: Scalar,
    pub y: Scalar,
    pub t: Scalar,
    pub t_err_bound: Scalar,
    #[serde(rename = "tau_H")]
    pub tau_h: Scalar,
    #[serde(rename = "tau_L")]
    pub tau_l: Scalar,
    pub k1: Scalar,
    pub k2: Scalar,
    #[serde(rename = "C")]
    pub c_const: Scalar,
}

impl ReductionOutput {
    /// Source elements count (`n`); the instance has `n + 2` boxes.
    pub fn n_source(&self) -> usize {
        self.source.len()
    }

    pub fn source(&self) -> &[u64] {
        &self.source
    }

    pub fn instance(&self) -> &Lclrs3Instance {
        &self.instance
    }

    pub fn gamma(&self) -> &Scalar {
        &self.gamma
    }

    pub fn delta(&self) -> &Scalar {
        &self.delta
    }

    pub fn y(&self) -> &Scalar {
        &self.y
    }

    /// Rational approximation of `2e^{y/2}`, within [`Self::t_err_bound`].
    pub fn t(&self) -> &Scalar {
        &self.t
    }

    pub fn t_err_bound(&self) -> &Scalar {
        &self.t_err
    }

    pub fn tau_h(&self) -> &Scalar {
        &self.tau_h
    }

    pub fn tau_l(&self) -> &Scalar {
        &self.tau_l
    }

    /// 0-based index of the pivot box `n+1`.
    pub fn pivot_box(&self) -> usize {
        self.source.len()
    }

    /// 0-based index of the final box `n+2`.
    pub fn final_box(&self) -> usize {
        self.source.len() + 1
    }
}

/// Build the reduction instance for `source`, verifying every invariant.
pub fn reduce_partition(source: &[u64]) -> Result<ReductionOutput, ReductionError> {
    let n = source.len();
    if n == 0 {
        return Err(ReductionError::EmptySource);
    }
    let cap = BigInt::one() << (n as u32);
    for (idx, &s) in source.iter().enumerate() {
        if s == 0 || BigInt::from(s) > cap {
            return Err(ReductionError::ElementOutOfRange {
                index: idx + 1,
                value: s,
                n,
            });
        }
    }

    let gamma = Scalar::pow2(8 * n as i64);
    let delta = Scalar::pow2(-7 * n as i64);
    let half = Scalar::frac(1, 2);

    // y = Σ s_i/Γ + (s_i/Γ)²
    let mut y = Scalar::zero();
    for &s in source {
        let p = Scalar::from(s) / &gamma;
        y += &(&p + &p * &p);
    }

    let t_err = &delta * &delta / Scalar::from(4u64);
    let t = rational_exp_half(&y, &t_err)
        .map_err(|e| ReductionError::Construction(format!("t approximation: {e}")))?;

    // τ_H = (-3tΓ + 28 + 94t) / (-4tΓ + 56 + 104t)
    let tg = &t * &gamma;
    let tau_h = (Scalar::from(-3i64) * &tg + Scalar::from(28u64) + Scalar::from(94u64) * &t)
        / (Scalar::from(-4i64) * &tg + Scalar::from(56u64) + Scalar::from(104u64) * &t);
    let tau_l = half.clone();

    if !(tau_h > tau_l && tau_h < Scalar::frac(3, 4)) {
        return Err(ReductionError::Construction(format!(
            "tau_H = {tau_h} escapes (1/2, 3/4)"
        )));
    }

    let p_pivot = gamma.recip();
    let p_final = Scalar::frac(1, 8);
    // τ_i - τ_H, per unit of p_i
    let bump_rate =
        &p_pivot * (Scalar::one() - &p_final) * (&tau_h - &tau_l) / (Scalar::from(2u64) * &p_final);

    let mut boxes = Vec::with_capacity(n + 2);
    let mut taus = Vec::with_capacity(n + 2);
    for &s in source {
        let p = Scalar::from(s) / &gamma;
        let tau = &tau_h + &p * &bump_rate;
        let cost = &p * (Scalar::one() - &tau);
        boxes.push(three_point_box(p.clone(), p, cost)?);
        taus.push(tau);
    }
    // pivot box n+1: index exactly 1/2, huge mass at 1/2
    boxes.push(three_point_box(
        p_pivot.clone(),
        Scalar::one() - Scalar::from(41u64) / &gamma,
        &p_pivot / Scalar::from(2u64),
    )?);
    taus.push(tau_l.clone());
    // final box n+2: index 3/4, the only non-negligible cost
    boxes.push(three_point_box(p_final.clone(), p_final, Scalar::frac(1, 32))?);
    taus.push(Scalar::frac(3, 4));

    let inst = PnoiInstance::new(boxes)
        .map_err(|e| ReductionError::Construction(format!("instance build: {e}")))?;

    // every box must carry exactly the index it was designed for
    for (i, tau) in taus.iter().enumerate() {
        let actual = compute_index(inst.box_at(i));
        if &actual != tau {
            return Err(ReductionError::Construction(format!(
                "box {} has index {actual}, designed {tau}",
                i + 1
            )));
        }
    }
    // τ_{n+2} > τ_i > τ_H > τ_L for the first n boxes
    for tau in &taus[..n] {
        if !(tau < &Scalar::frac(3, 4) && tau > &tau_h) {
            return Err(ReductionError::Construction(format!(
                "index {tau} violates the ordering τ_final > τ_i > τ_H"
            )));
        }
    }
    let (ok, violations) = is_lclrs3(&inst);
    if !ok {
        return Err(ReductionError::Construction(format!(
            "family conditions failed: {}",
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ")
        )));
    }
    let instance = Lclrs3Instance::from_instance(inst).expect("just validated");

    Ok(ReductionOutput {
        instance,
        source: source.to_vec(),
        gamma,
        delta,
        y,
        t,
        t_err,
        tau_h,
        tau_l,
    })
}

fn three_point_box(p: Scalar, q: Scalar, cost: Scalar) -> Result<PnoiBox, ReductionError> {
    let r = Scalar::one() - &p - &q;
    let mut masses = vec![(Scalar::one(), p)];
    if q.is_positive() {
        masses.push((Scalar::frac(1, 2), q));
    }
    if r.is_positive() {
        masses.push((Scalar::zero(), r));
    }
    let dist = DiscreteDistribution::new(masses)
        .map_err(|e| ReductionError::Construction(format!("box masses: {e}")))?;
    PnoiBox::new(cost, dist).map_err(|e| ReductionError::Construction(format!("box build: {e}")))
}

/// Decide the Partition question through the optimal permutation: *yes*
/// exactly when the boxes before and after the pivot carry equal `p`-sums.
pub fn partition_answer(red: &ReductionOutput) -> Result<bool, SizeError> {
    let (sigma, _) = best_permutation(red.instance())?;
    let pivot = red.pivot_box();
    let xi = sigma
        .iter()
        .position(|&b| b == pivot)
        .expect("pivot is in the permutation");
    let n = red.n_source();
    let mut before = Scalar::zero();
    let mut after = Scalar::zero();
    for (pos, &b) in sigma.iter().enumerate() {
        if b >= n {
            continue;
        }
        if pos < xi {
            before += &red.instance().box_at(b).p;
        } else {
            after += &red.instance().box_at(b).p;
        }
    }
    Ok(before == after)
}
