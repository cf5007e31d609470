//! Reservation indices and the clipped-value calculus.
//!
//! The index `τ` of a box solves `E[(v - τ)_+] = c` exactly.  The left side
//! is piecewise linear and continuous in `τ`, non-increasing everywhere and
//! strictly decreasing below the top of the support, so the solution is
//! found by a breakpoint sweep and is itself rational.  At `c = 0` the
//! solution set is the ray `[v_max, ∞)`; we return its smallest point
//! `v_max`, which makes the clipped value `κ = min(v, τ)` coincide with `v`
//! for a free box.
//!
//! The classic search problem is solved by opening boxes in decreasing index
//! order, and its optimal expected payoff has the closed form
//! `E[max(0, max_i κ_i)]`, computed here exactly from the product of the
//! independent `κ` distributions.

use std::collections::HashMap;

use crate::dist::DiscreteDistribution;
use crate::instance::{PnoiBox, PnoiInstance};
use crate::scalar::Scalar;

/// The index `τ`: unique solution of `E[(v - τ)_+] = cost`, with the
/// smallest-solution convention `τ = v_max` when `cost = 0`.
pub fn compute_index(pbox: &PnoiBox) -> Scalar {
    let dist = pbox.dist();
    let cost = pbox.cost();
    if cost.is_zero() {
        return dist.max_value().clone();
    }
    let support = dist.support();
    // Tail sums over segments: for τ in (v_j, v_{j+1}], the excess is
    // a_j - b_j·τ with b_j = Σ_{i>j} p_i and a_j = Σ_{i>j} p_i·v_i.
    let mut a = Scalar::zero();
    let mut b = Scalar::zero();
    for j in (0..support.len()).rev() {
        let (v_j, p_j) = &support[j];
        a += &(v_j * p_j);
        b += p_j;
        let tau = (&a - cost) / &b;
        let lower_ok = j == 0 || tau > support[j - 1].0;
        if lower_ok && tau <= *v_j {
            return tau;
        }
    }
    unreachable!("excess is continuous and unbounded below, a segment matches")
}

/// Distribution of `κ = min(v, τ)`: the pushforward of the box's
/// distribution under clipping at the index, colliding masses merged.
pub fn kappa_distribution(pbox: &PnoiBox) -> DiscreteDistribution {
    let tau = compute_index(pbox);
    pbox.dist().map_values(|v| v.clone().min(tau.clone()))
}

/// `E[max(floor, max_i over dists)]` for independent draws, exact.
///
/// With an empty list this is just `floor`.  The expectation multiplies the
/// per-distribution CDFs over the merged support above `floor`.
pub fn expected_best(dists: &[&DiscreteDistribution], floor: &Scalar) -> Scalar {
    let mut points: Vec<Scalar> = dists
        .iter()
        .flat_map(|d| d.iter().map(|(v, _)| v.clone()))
        .filter(|v| v > floor)
        .collect();
    crate::scalar::sort_dedup(&mut points);

    let cdf_product = |t: &Scalar| -> Scalar {
        let mut g = Scalar::one();
        for d in dists {
            g *= &d.cdf(t);
        }
        g
    };

    let mut total = floor * &cdf_product(floor);
    let mut prev = floor.clone();
    for u in points {
        let mass = cdf_product(&u) - cdf_product(&prev);
        total += &(&u * &mass);
        prev = u;
    }
    total
}

/// `E[max(0, max_i κ_i)]`: the optimal expected payoff of the classic
/// problem, where the outer max with 0 reflects quitting with nothing.
pub fn max_kappa_expectation(inst: &PnoiInstance) -> Scalar {
    let kappas: Vec<DiscreteDistribution> = inst.boxes().iter().map(kappa_distribution).collect();
    let refs: Vec<&DiscreteDistribution> = kappas.iter().collect();
    expected_best(&refs, &Scalar::zero())
}

/// `E[v]` of a distribution.  Re-exported here next to its siblings.
pub fn expected_value(dist: &DiscreteDistribution) -> Scalar {
    dist.expected_value()
}

/// Precomputed per-box indices and κ distributions, with a memo for the
/// index-policy continuation value `E[max(floor, max_{i in mask} κ_i)]`.
///
/// Subsets are bitmasks over 0-based box positions.  The memo is
/// single-assignment: a computed value never changes.
pub struct IndexContinuation {
    taus: Vec<Scalar>,
    kappas: Vec<DiscreteDistribution>,
    memo: HashMap<(u32, Scalar), Scalar>,
}

impl IndexContinuation {
    pub fn new(inst: &PnoiInstance) -> Self {
        let taus = inst.boxes().iter().map(compute_index).collect();
        let kappas = inst.boxes().iter().map(kappa_distribution).collect();
        IndexContinuation {
            taus,
            kappas,
            memo: HashMap::new(),
        }
    }

    pub fn tau(&self, i: usize) -> &Scalar {
        &self.taus[i]
    }

    pub fn kappa(&self, i: usize) -> &DiscreteDistribution {
        &self.kappas[i]
    }

    /// `E[max(floor, max_{i in mask} κ_i)]`, memoized.
    pub fn value(&mut self, mask: u32, floor: &Scalar) -> Scalar {
        let key = (mask, floor.clone());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let dists: Vec<&DiscreteDistribution> = (0..self.kappas.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &self.kappas[i])
            .collect();
        let v = expected_best(&dists, floor);
        self.memo.insert(key, v.clone());
        v
    }

    /// `E[(max_{i in mask} κ_i - t)_+]` = continuation above `t`, minus `t`.
    pub fn excess(&mut self, mask: u32, t: &Scalar) -> Scalar {
        self.value(mask, t) - t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDistribution;
    use crate::instance::PnoiBox;

    fn coin_box(cost: Scalar) -> PnoiBox {
        PnoiBox::new(
            cost,
            DiscreteDistribution::new(vec![
                (Scalar::zero(), Scalar::frac(1, 2)),
                (Scalar::one(), Scalar::frac(1, 2)),
            ])
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn index_closed_form_on_coin() {
        // τ = 1 - c/p on the top segment
        assert_eq!(compute_index(&coin_box(Scalar::frac(1, 4))), Scalar::frac(1, 2));
        assert_eq!(compute_index(&coin_box(Scalar::frac(1, 8))), Scalar::frac(3, 4));
    }

    #[test]
    fn index_free_box_is_max_value() {
        let b = PnoiBox::new(
            Scalar::zero(),
            DiscreteDistribution::deterministic(Scalar::from(5i64)),
        )
        .unwrap();
        assert_eq!(compute_index(&b), Scalar::from(5i64));
    }

    #[test]
    fn index_below_support() {
        // For τ < 0 the excess is 1/2 - τ, so c = 7/10 gives τ = -1/5.
        assert_eq!(
            compute_index(&coin_box(Scalar::frac(7, 10))),
            Scalar::frac(-1, 5)
        );
    }

    #[test]
    fn index_equation_holds() {
        for (num, den) in [(1i64, 8i64), (1, 4), (1, 2), (7, 10), (3, 2)] {
            let b = coin_box(Scalar::frac(num, den));
            let tau = compute_index(&b);
            assert_eq!(b.dist().expected_excess(&tau), *b.cost());
        }
    }

    #[test]
    fn kappa_clips_and_merges() {
        let b = coin_box(Scalar::frac(1, 8));
        let k = kappa_distribution(&b);
        assert_eq!(
            k,
            DiscreteDistribution::new(vec![
                (Scalar::zero(), Scalar::frac(1, 2)),
                (Scalar::frac(3, 4), Scalar::frac(1, 2)),
            ])
            .unwrap()
        );
        // free box clips nothing
        let free = coin_box(Scalar::zero());
        assert_eq!(kappa_distribution(&free), *free.dist());
    }

    #[test]
    fn kappa_of_worthless_box_is_negative_index() {
        let b = PnoiBox::new(
            Scalar::frac(1, 4),
            DiscreteDistribution::deterministic(Scalar::zero()),
        )
        .unwrap();
        // E[(0 - τ)_+] = -τ = c gives τ = -c
        assert_eq!(compute_index(&b), Scalar::frac(-1, 4));
        assert_eq!(
            kappa_distribution(&b),
            DiscreteDistribution::deterministic(Scalar::frac(-1, 4))
        );
    }

    #[test]
    fn two_coins_classic_payoff() {
        let inst = PnoiInstance::new(vec![
            coin_box(Scalar::frac(1, 8)),
            coin_box(Scalar::frac(1, 8)),
        ])
        .unwrap();
        // κ_i ∈ {0, 3/4} each with mass 1/2; E[max] = 3/4 · 3/4 = 9/16.
        assert_eq!(max_kappa_expectation(&inst), Scalar::frac(9, 16));
    }

    #[test]
    fn negative_index_floors_at_zero() {
        let b = PnoiBox::new(
            Scalar::one(),
            DiscreteDistribution::deterministic(Scalar::zero()),
        )
        .unwrap();
        let inst = PnoiInstance::new(vec![b]).unwrap();
        assert_eq!(max_kappa_expectation(&inst), Scalar::zero());
    }

    fn arb_box() -> impl proptest::strategy::Strategy<Value = PnoiBox> {
        use proptest::prelude::*;
        (
            proptest::collection::vec((0i64..24, 1u64..8), 1..4),
            0i64..40,
        )
            .prop_map(|(raw, cost_num)| {
                let mut masses: Vec<(Scalar, Scalar)> = Vec::new();
                let total: u64 = raw.iter().map(|(_, w)| w).sum();
                for (v, w) in &raw {
                    masses.push((
                        Scalar::frac(*v, 8),
                        Scalar::frac(*w as i64, total as i64),
                    ));
                }
                PnoiBox::new(
                    Scalar::frac(cost_num, 16),
                    DiscreteDistribution::new(masses).unwrap(),
                )
                .unwrap()
            })
    }

    proptest::proptest! {
        #[test]
        fn index_equation_holds_everywhere(bx in arb_box()) {
            let tau = compute_index(&bx);
            proptest::prop_assert_eq!(bx.dist().expected_excess(&tau), bx.cost().clone());
        }

        #[test]
        fn kappa_is_dominated_and_proper(bx in arb_box()) {
            let tau = compute_index(&bx);
            let kappa = kappa_distribution(&bx);
            let mass: Scalar = kappa.iter().map(|(_, p)| p).sum();
            proptest::prop_assert_eq!(mass, Scalar::one());
            proptest::prop_assert!(kappa.max_value() <= &tau);
            proptest::prop_assert!(kappa.max_value() <= bx.dist().max_value());
        }

        #[test]
        fn classic_payoff_permutation_invariant_and_monotone(
            boxes in proptest::collection::vec(arb_box(), 1..4),
        ) {
            let inst = PnoiInstance::new(boxes.clone()).unwrap();
            let forward = max_kappa_expectation(&inst);
            let reversed = PnoiInstance::new(boxes.iter().rev().cloned().collect()).unwrap();
            proptest::prop_assert_eq!(&forward, &max_kappa_expectation(&reversed));
            // adding a box never hurts the classic optimum
            if boxes.len() > 1 {
                let fewer = PnoiInstance::new(boxes[..boxes.len() - 1].to_vec()).unwrap();
                proptest::prop_assert!(max_kappa_expectation(&fewer) <= forward);
            }
        }
    }

    #[test]
    fn continuation_memo_matches_direct() {
        let inst = PnoiInstance::new(vec![
            coin_box(Scalar::frac(1, 8)),
            coin_box(Scalar::frac(1, 4)),
        ])
        .unwrap();
        let mut cont = IndexContinuation::new(&inst);
        let direct = max_kappa_expectation(&inst);
        assert_eq!(cont.value(0b11, &Scalar::zero()), direct);
        assert_eq!(cont.value(0b11, &Scalar::zero()), direct);
        assert_eq!(cont.value(0, &Scalar::frac(1, 3)), Scalar::frac(1, 3));
    }
}
