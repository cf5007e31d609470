//! Polynomial-time optimum for supports inside {0, 1}.
//!
//! With only the values 0 and 1 in play, an optimal policy either runs the
//! plain index policy, or commits to one backup box: it probes the boxes
//! whose indices reach the backup's expected value in decreasing index
//! order, stops the moment a 1 appears (nothing can beat it, so it is taken
//! immediately), and takes the backup unopened if everything came up 0.
//! There are only `n` commit candidates, so the best policy is found by
//! evaluating all of them in closed form.

use serde::Serialize;
use thiserror::Error;

use crate::index::{compute_index, max_kappa_expectation};
use crate::instance::PnoiInstance;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Support01Error {
    #[error("box {index} has support outside {{0, 1}}")]
    SupportNot01 { index: usize },
}

/// Commit to `commit`, probing `probe_order` first.  Indices 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommitPolicy {
    pub commit: usize,
    pub probe_order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Support01Policy {
    IndexOnly,
    Commit(CommitPolicy),
}

/// Exact optimum for a {0,1}-supported instance, with a witness policy.
pub fn support01_optimal(
    inst: &PnoiInstance,
) -> Result<(Support01Policy, Scalar), Support01Error> {
    for (i, b) in inst.boxes().iter().enumerate() {
        let ok = b
            .dist()
            .iter()
            .all(|(v, _)| v.is_zero() || *v == Scalar::one());
        if !ok {
            return Err(Support01Error::SupportNot01 { index: i + 1 });
        }
    }

    let taus: Vec<Scalar> = inst.boxes().iter().map(compute_index).collect();
    let one_prob: Vec<Scalar> = inst
        .boxes()
        .iter()
        .map(|b| {
            b.dist()
                .iter()
                .filter(|(v, _)| *v == Scalar::one())
                .map(|(_, p)| p.clone())
                .sum()
        })
        .collect();

    let mut best_value = max_kappa_expectation(inst);
    let mut best_policy = Support01Policy::IndexOnly;

    for commit in 0..inst.n() {
        let backup_ev = inst.box_at(commit).dist().expected_value();
        // probe boxes whose index reaches the backup's expected value,
        // highest index first, ties toward the lower box index
        let mut probe_order: Vec<usize> = (0..inst.n())
            .filter(|&j| j != commit && taus[j] >= backup_ev)
            .collect();
        probe_order.sort_by(|&a, &b| taus[b].cmp(&taus[a]).then(a.cmp(&b)));

        let mut value = Scalar::zero();
        let mut reach = Scalar::one();
        for &j in &probe_order {
            value += &(&reach * &(&one_prob[j] - inst.box_at(j).cost()));
            reach *= &(Scalar::one() - &one_prob[j]);
        }
        value += &(&reach * &backup_ev);

        if value > best_value {
            best_value = value;
            best_policy = Support01Policy::Commit(CommitPolicy {
                commit,
                probe_order,
            });
        }
    }
    Ok((best_policy, best_value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDistribution;
    use crate::exact::optimal_value;
    use crate::instance::PnoiBox;

    fn bernoulli(p: (i64, i64), cost: Scalar) -> PnoiBox {
        PnoiBox::new(
            cost,
            DiscreteDistribution::new(vec![
                (Scalar::zero(), Scalar::one() - Scalar::frac(p.0, p.1)),
                (Scalar::one(), Scalar::frac(p.0, p.1)),
            ])
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn two_coin_commit_beats_index() {
        let inst = PnoiInstance::new(vec![
            bernoulli((1, 2), Scalar::frac(1, 8)),
            bernoulli((1, 2), Scalar::frac(1, 8)),
        ])
        .unwrap();
        let (policy, value) = support01_optimal(&inst).unwrap();
        assert_eq!(value, Scalar::frac(5, 8));
        assert_eq!(value, optimal_value(&inst).unwrap().0);
        match policy {
            Support01Policy::Commit(c) => assert_eq!(c.probe_order.len(), 1),
            Support01Policy::IndexOnly => panic!("commit policy expected"),
        }
    }

    #[test]
    fn single_box_cases() {
        // expensive box: take unopened beats both opening and quitting
        let inst = PnoiInstance::new(vec![bernoulli((1, 2), Scalar::frac(2, 5))]).unwrap();
        let (_, value) = support01_optimal(&inst).unwrap();
        assert_eq!(value, Scalar::frac(1, 2));
        assert_eq!(value, optimal_value(&inst).unwrap().0);
    }

    #[test]
    fn worthless_instance_scores_zero() {
        let dead = PnoiBox::new(
            Scalar::frac(1, 3),
            DiscreteDistribution::deterministic(Scalar::zero()),
        )
        .unwrap();
        let inst = PnoiInstance::new(vec![dead.clone(), dead]).unwrap();
        let (_, value) = support01_optimal(&inst).unwrap();
        assert_eq!(value, Scalar::zero());
    }

    #[test]
    fn rejects_half_values() {
        let b = PnoiBox::new(
            Scalar::frac(1, 8),
            DiscreteDistribution::new(vec![
                (Scalar::frac(1, 2), Scalar::one()),
            ])
            .unwrap(),
        )
        .unwrap();
        let inst = PnoiInstance::new(vec![b]).unwrap();
        assert_eq!(
            support01_optimal(&inst),
            Err(Support01Error::SupportNot01 { index: 1 })
        );
    }
}
