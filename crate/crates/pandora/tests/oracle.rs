//! Independent oracles for the exact solvers.
//!
//! These re-derive the library's headline quantities along different
//! algorithmic routes and assert exact agreement:
//!
//! - the closed-form index payoff against plain outcome enumeration over
//!   the product of supports;
//! - the (subset, best-value) dynamic program against a *full-history*
//!   optimizer whose states are entire revealed-value maps, making no use
//!   of the state-merging insight under test;
//! - the index definition against its defining equation.
//!
//! The oracles are deliberately naive and live only in test code.

use std::collections::BTreeMap;

use pandora::exact::{classic_optimal_value, optimal_value};
use pandora::gen::{random_instance, GenConfig};
use pandora::index::{compute_index, max_kappa_expectation};
use pandora::instance::PnoiInstance;
use pandora::scalar::Scalar;

/// Every full value assignment with its probability.
fn outcomes(inst: &PnoiInstance) -> Vec<(Vec<Scalar>, Scalar)> {
    let mut acc: Vec<(Vec<Scalar>, Scalar)> = vec![(Vec::new(), Scalar::one())];
    for b in inst.boxes() {
        let mut next = Vec::with_capacity(acc.len() * b.dist().len());
        for (values, prob) in &acc {
            for (v, p) in b.dist().iter() {
                let mut vs = values.clone();
                vs.push(v.clone());
                next.push((vs, prob * p));
            }
        }
        acc = next;
    }
    acc
}

/// `E[max(0, max_i min(v_i, tau_i))]` straight from the definition.
fn kappa_payoff_by_enumeration(inst: &PnoiInstance) -> Scalar {
    let taus: Vec<Scalar> = inst.boxes().iter().map(compute_index).collect();
    let mut total = Scalar::zero();
    for (values, prob) in outcomes(inst) {
        let best = values
            .iter()
            .zip(&taus)
            .map(|(v, tau)| v.clone().min(tau.clone()))
            .max()
            .expect("nonempty");
        total += &(best.positive_part() * prob);
    }
    total
}

/// Unrestricted sequential optimum: the state is the full revealed-value
/// map, so policies may depend on any detail of the history.
fn full_history_optimum(
    inst: &PnoiInstance,
    opened: &BTreeMap<usize, Scalar>,
    allow_take_unopened: bool,
) -> Scalar {
    let best_revealed = opened
        .values()
        .cloned()
        .fold(Scalar::zero(), |acc, v| acc.max(v));
    let mut best = best_revealed; // quit with the best revealed value (or 0)
    for i in 0..inst.n() {
        if opened.contains_key(&i) {
            continue;
        }
        if allow_take_unopened {
            best = best.max(inst.box_at(i).dist().expected_value());
        }
        let mut open = -inst.box_at(i).cost();
        for (v, p) in inst.box_at(i).dist().iter() {
            let mut next = opened.clone();
            next.insert(i, v.clone());
            open += &(p * full_history_optimum(inst, &next, allow_take_unopened));
        }
        best = best.max(open);
    }
    best
}

fn coin_instance() -> PnoiInstance {
    PnoiInstance::from_json_str(
        r#"{ "boxes": [ { "cost": "1/8", "support": [ ["0", "1/2"], ["1", "1/2"] ] },
                        { "cost": "1/8", "support": [ ["0", "1/2"], ["1", "1/2"] ] } ] }"#,
    )
    .unwrap()
}

#[test]
fn frozen_values_from_the_oracles() {
    // expected values below were computed with these oracles and frozen
    let inst = coin_instance();
    assert_eq!(kappa_payoff_by_enumeration(&inst), Scalar::frac(9, 16));
    assert_eq!(
        full_history_optimum(&inst, &BTreeMap::new(), true),
        Scalar::frac(5, 8)
    );
    assert_eq!(
        full_history_optimum(&inst, &BTreeMap::new(), false),
        Scalar::frac(9, 16)
    );
}

#[test]
fn closed_form_index_payoff_matches_enumeration() {
    let cfg = GenConfig::default().with_boxes(4).with_support(3);
    for case in 0..60 {
        let inst = random_instance(101, case, &cfg);
        assert_eq!(
            max_kappa_expectation(&inst),
            kappa_payoff_by_enumeration(&inst),
            "case {case}"
        );
    }
}

#[test]
fn state_merged_dp_matches_full_history_search() {
    let cfg = GenConfig::default().with_boxes(3).with_support(3);
    for case in 0..40 {
        let inst = random_instance(202, case, &cfg);
        let (dp, _) = optimal_value(&inst).unwrap();
        assert_eq!(
            dp,
            full_history_optimum(&inst, &BTreeMap::new(), true),
            "case {case}"
        );
        assert_eq!(
            classic_optimal_value(&inst).unwrap(),
            full_history_optimum(&inst, &BTreeMap::new(), false),
            "case {case}"
        );
    }
}

#[test]
fn reduction_agrees_with_subset_sum_at_four_elements() {
    // past the acceptance sweep's n <= 3: 720-permutation exhaustion
    use pandora::lclrs3::{partition_answer, reduce_partition};
    use pandora::verify::partition_brute_force;
    for source in [vec![1u64, 2, 3, 4], vec![1, 1, 1, 2], vec![4, 7, 8, 11]] {
        let red = reduce_partition(&source).unwrap();
        assert_eq!(
            partition_answer(&red).unwrap(),
            partition_brute_force(&source),
            "S = {source:?}"
        );
    }
}

#[test]
fn index_satisfies_its_equation_and_bounds() {
    let cfg = GenConfig::default();
    for case in 0..200 {
        let inst = random_instance(303, case, &cfg);
        for b in inst.boxes() {
            let tau = compute_index(b);
            // defining equation, exactly
            assert_eq!(b.dist().expected_excess(&tau), *b.cost());
            // the index never exceeds the top of the support
            assert!(&tau <= b.dist().max_value());
            // and equals it exactly for free boxes
            if b.cost().is_zero() {
                assert_eq!(&tau, b.dist().max_value());
            }
        }
    }
}
