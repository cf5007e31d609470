//! Normal-policy payoffs and the permutation objective.
//!
//! A normal policy is determined by a permutation σ: open boxes in σ-order;
//! a revealed 1 is taken on the spot; a revealed 1/2 forfeits the backup
//! option and hands the remaining boxes to the index policy with outside
//! option 1/2; an all-zero run through the first n-1 boxes takes the last
//! box unopened.  Its payoff relates to the index policy's through the exact
//! identity
//!
//! ```text
//! E[max κ] = P(σ) + Loss(σ) - c_{σ(n)} · Π_{i<n} r_{σ(i)}
//! ```
//!
//! where `Loss(σ) = Σ_i p_i · g(i, T_σ(i)) · Π_{j<σ⁻¹(i)} r_{σ(j)}` and
//! `g(i, T) = E[(max_{j∈T} κ_j - τ_i)_+]` over the boxes `T_σ(i)` that come
//! after `i` with strictly larger indices.  `Utility(σ)` shifts the payoff
//! by the σ-independent constant `E[max κ]`, so maximizing either picks the
//! same permutation.  All of it is exact rational arithmetic; the identity
//! is asserted as an equality in the test suites.

use rayon::prelude::*;
use thiserror::Error;

use crate::dist::DiscreteDistribution;
use crate::exact::SizeError;
use crate::index::{expected_best, kappa_distribution};
use crate::lclrs3::Lclrs3Instance;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalError {
    #[error("sigma is not a permutation of the {n} boxes")]
    BadPermutation { n: usize },
    #[error("box {i} appears in its own trailing set")]
    SelfInSet { i: usize },
}

fn check_permutation(inst: &Lclrs3Instance, sigma: &[usize]) -> Result<(), NormalError> {
    let n = inst.n();
    if sigma.len() != n {
        return Err(NormalError::BadPermutation { n });
    }
    let mut seen = vec![false; n];
    for &i in sigma {
        if i >= n || seen[i] {
            return Err(NormalError::BadPermutation { n });
        }
        seen[i] = true;
    }
    Ok(())
}

/// `g(i, T) = E[(max_{j in T} κ_j - τ_i)_+]`, with `g(i, ∅) = 0`.
/// `T` is a bitmask over 0-based box positions; `i` must not lie in `T`.
pub fn g_value(inst: &Lclrs3Instance, i: usize, t_mask: u32) -> Result<Scalar, NormalError> {
    if t_mask & (1 << i) != 0 {
        return Err(NormalError::SelfInSet { i });
    }
    let kappas: Vec<DiscreteDistribution> = (0..inst.n())
        .filter(|j| t_mask & (1 << j) != 0)
        .map(|j| kappa_distribution(&inst.inner().boxes()[j]))
        .collect();
    if kappas.is_empty() {
        return Ok(Scalar::zero());
    }
    let refs: Vec<&DiscreteDistribution> = kappas.iter().collect();
    let tau_i = &inst.box_at(i).tau;
    Ok(expected_best(&refs, tau_i) - tau_i)
}

/// Exact expected payoff of the normal policy with ordering `sigma`
/// (0-based permutation of the boxes).
pub fn evaluate_normal_policy(
    inst: &Lclrs3Instance,
    sigma: &[usize],
) -> Result<Scalar, NormalError> {
    check_permutation(inst, sigma)?;
    let n = inst.n();
    let half = Scalar::frac(1, 2);
    let kappas: Vec<DiscreteDistribution> = inst
        .inner()
        .boxes()
        .iter()
        .map(kappa_distribution)
        .collect();

    let mut total = Scalar::zero();
    let mut prefix_r = Scalar::one(); // probability the path so far was all zeros
    let mut costs = Scalar::zero(); // costs paid along that path
    let mut remaining: u32 = (1u32 << n) - 1;

    for &b in &sigma[..n - 1] {
        let bx = inst.box_at(b);
        remaining &= !(1 << b);
        costs += &bx.cost;
        // a revealed 1 is taken immediately
        total += &(&prefix_r * &bx.p * (Scalar::one() - &costs));
        // a revealed 1/2 switches to the index policy, outside option 1/2
        if bx.q.is_positive() {
            let tail: Vec<&DiscreteDistribution> = (0..n)
                .filter(|j| remaining & (1 << j) != 0)
                .map(|j| &kappas[j])
                .collect();
            let switch = expected_best(&tail, &half) - &costs;
            total += &(&prefix_r * &bx.q * switch);
        }
        prefix_r *= &bx.r;
    }
    // all-zero prefix: the last box is taken without inspection
    let last = sigma[n - 1];
    let backup = inst.inner().box_at(last).dist().expected_value();
    total += &(&prefix_r * (backup - &costs));
    Ok(total)
}

/// `Loss(σ)`: the probability-weighted sum of index-gaps `g(i, T_σ(i))`,
/// where `T_σ(i)` holds the boxes after `i` in σ with strictly larger index.
pub fn loss(inst: &Lclrs3Instance, sigma: &[usize]) -> Result<Scalar, NormalError> {
    check_permutation(inst, sigma)?;
    let mut total = Scalar::zero();
    let mut prefix_r = Scalar::one();
    for (pos, &i) in sigma.iter().enumerate() {
        let tau_i = &inst.box_at(i).tau;
        let mut t_mask: u32 = 0;
        for &j in &sigma[pos + 1..] {
            if &inst.box_at(j).tau > tau_i {
                t_mask |= 1 << j;
            }
        }
        let g = g_value(inst, i, t_mask)?;
        total += &(&inst.box_at(i).p * g * &prefix_r);
        prefix_r *= &inst.box_at(i).r;
    }
    Ok(total)
}

/// `Utility(σ) = c_{σ(n)} · Π_{i<n} r_{σ(i)} - Loss(σ)`: the normal policy's
/// payoff minus the σ-independent constant `E[max κ]`.
pub fn utility(inst: &Lclrs3Instance, sigma: &[usize]) -> Result<Scalar, NormalError> {
    check_permutation(inst, sigma)?;
    let n = inst.n();
    let mut saved = inst.box_at(sigma[n - 1]).cost.clone();
    for &i in &sigma[..n - 1] {
        saved *= &inst.box_at(i).r;
    }
    Ok(saved - loss(inst, sigma)?)
}

/// Exhaustive argmax of the normal-policy payoff over all permutations.
/// Ties go to the lexicographically first permutation.  Guarded at 8 boxes.
pub fn best_permutation(inst: &Lclrs3Instance) -> Result<(Vec<usize>, Scalar), SizeError> {
    let n = inst.n();
    if n > 8 {
        return Err(SizeError { n, limit: 8 });
    }
    let perms = permutations(n);
    let best = perms
        .par_iter()
        .enumerate()
        .map(|(idx, p)| {
            let v = evaluate_normal_policy(inst, p).expect("generated permutation");
            (v, idx)
        })
        .reduce_with(|a, b| {
            // max value; ties to the smaller (lexicographically first) index
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Greater => a,
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal => {
                    if a.1 <= b.1 {
                        a
                    } else {
                        b
                    }
                }
            }
        })
        .expect("n >= 1");
    Ok((perms[best.1].clone(), best.0))
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    build(n, &mut current, &mut used, &mut out);
    out
}

fn build(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
    if current.len() == n {
        out.push(current.clone());
        return;
    }
    for i in 0..n {
        if !used[i] {
            used[i] = true;
            current.push(i);
            build(n, current, used, out);
            current.pop();
            used[i] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::optimal_value;
    use crate::index::max_kappa_expectation;
    use crate::instance::PnoiInstance;
    use crate::lclrs3::test_box;

    fn sample_instance() -> Lclrs3Instance {
        let boxes = vec![
            test_box(Scalar::frac(1, 4), Scalar::frac(1, 8), Scalar::frac(1, 16)),
            test_box(Scalar::frac(1, 8), Scalar::frac(1, 2), Scalar::frac(1, 32)),
            test_box(Scalar::frac(3, 16), Scalar::frac(1, 4), Scalar::frac(1, 16)),
        ];
        Lclrs3Instance::from_instance(PnoiInstance::new(boxes).unwrap()).unwrap()
    }

    #[test]
    fn g_of_empty_set_is_zero() {
        let inst = sample_instance();
        assert_eq!(g_value(&inst, 0, 0).unwrap(), Scalar::zero());
        assert!(g_value(&inst, 0, 0b001).is_err());
    }

    #[test]
    fn g_single_box_closed_form() {
        let inst = sample_instance();
        // only v_j = 1 can push κ_j above τ_i, contributing p_j (τ_j - τ_i)
        for i in 0..inst.n() {
            for j in 0..inst.n() {
                if i == j {
                    continue;
                }
                let (ti, tj) = (&inst.box_at(i).tau, &inst.box_at(j).tau);
                let expect = if tj > ti {
                    &inst.box_at(j).p * (tj - ti)
                } else {
                    Scalar::zero()
                };
                assert_eq!(g_value(&inst, i, 1 << j).unwrap(), expect);
            }
        }
    }

    #[test]
    fn single_box_takes_unopened() {
        let inst = Lclrs3Instance::from_instance(
            PnoiInstance::new(vec![test_box(
                Scalar::frac(1, 4),
                Scalar::frac(1, 8),
                Scalar::frac(1, 16),
            )])
            .unwrap(),
        )
        .unwrap();
        // E[v] = p + q/2
        assert_eq!(
            evaluate_normal_policy(&inst, &[0]).unwrap(),
            Scalar::frac(5, 16)
        );
        assert_eq!(loss(&inst, &[0]).unwrap(), Scalar::zero());
    }

    #[test]
    fn payoff_identity_on_all_permutations() {
        let inst = sample_instance();
        let classic = max_kappa_expectation(inst.inner());
        for sigma in permutations(inst.n()) {
            let payoff = evaluate_normal_policy(&inst, &sigma).unwrap();
            let l = loss(&inst, &sigma).unwrap();
            let mut saved = inst.box_at(sigma[inst.n() - 1]).cost.clone();
            for &i in &sigma[..inst.n() - 1] {
                saved *= &inst.box_at(i).r;
            }
            assert_eq!(classic, &payoff + &l - &saved);
            // utility differs from the payoff by exactly the classic value
            assert_eq!(utility(&inst, &sigma).unwrap(), payoff - &classic);
        }
    }

    #[test]
    fn best_permutation_matches_dp_oracle() {
        let inst = sample_instance();
        let (_, value) = best_permutation(&inst).unwrap();
        let (opt, _) = optimal_value(inst.inner()).unwrap();
        assert_eq!(value, opt);
    }

    #[test]
    fn identical_boxes_tie_lexicographically() {
        let b = || test_box(Scalar::frac(1, 4), Scalar::frac(1, 8), Scalar::frac(1, 16));
        let inst =
            Lclrs3Instance::from_instance(PnoiInstance::new(vec![b(), b()]).unwrap()).unwrap();
        let (perm, _) = best_permutation(&inst).unwrap();
        assert_eq!(perm, vec![0, 1]);
    }

    proptest::proptest! {
        #[test]
        fn scheduling_identity(
            c in (1i64..64, 1i64..64),
            rs in proptest::collection::vec(1i64..64, 1..8),
        ) {
            // with p_i = c(1 - r_i) the weighted sum telescopes exactly
            let c = Scalar::frac(c.0, c.1);
            let rs: Vec<Scalar> = rs.into_iter().map(|r| Scalar::frac(r, 64)).collect();
            let ps: Vec<Scalar> = rs.iter().map(|r| &c * (Scalar::one() - r)).collect();
            let mut lhs = Scalar::zero();
            let mut prefix = Scalar::one();
            for (p, r) in ps.iter().zip(&rs) {
                lhs += &(p * &prefix);
                prefix *= r;
            }
            proptest::prop_assert_eq!(lhs, &c * (Scalar::one() - &prefix));
        }
    }

    #[test]
    fn loss_symmetric_for_identical_boxes() {
        let b = || test_box(Scalar::frac(1, 4), Scalar::frac(1, 8), Scalar::frac(1, 16));
        let inst =
            Lclrs3Instance::from_instance(PnoiInstance::new(vec![b(), b()]).unwrap()).unwrap();
        assert_eq!(
            loss(&inst, &[0, 1]).unwrap(),
            loss(&inst, &[1, 0]).unwrap()
        );
    }
}
