//! Deterministic random instance generators.
//!
//! Verification suites and tests draw instances from these generators so a
//! failure is reproducible from (seed, case index) alone.  The default
//! shape is the documented verification distribution: up to 6 boxes,
//! support size up to 4, probabilities with denominator up to 64, values
//! and costs small rationals.  Streams are SplitMix64-based and depend only
//! on the (seed, case) pair, never on global state.

use num_bigint::BigInt;

use crate::dist::DiscreteDistribution;
use crate::instance::{PnoiBox, PnoiInstance};
use crate::lclrs3::Lclrs3Instance;
use crate::scalar::Scalar;

/// Shape of generated instances.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_boxes: usize,
    pub max_support: usize,
    /// Probability denominators divide this (a power of two up to 64).
    pub prob_denominator: u64,
    /// Values are `k / value_denominator` with `k <= value_span`.
    pub value_span: u64,
    pub value_denominator: u64,
    /// Costs are `k / cost_denominator`, `k <= cost_span`; zero allowed.
    pub cost_span: u64,
    pub cost_denominator: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_boxes: 6,
            max_support: 4,
            prob_denominator: 64,
            value_span: 16,
            value_denominator: 8,
            cost_span: 32,
            cost_denominator: 32,
        }
    }
}

impl GenConfig {
    pub fn with_boxes(mut self, max_boxes: usize) -> Self {
        self.max_boxes = max_boxes;
        self
    }

    pub fn with_support(mut self, max_support: usize) -> Self {
        self.max_support = max_support;
        self
    }
}

/// SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
}

impl Stream {
    /// Independent stream for (seed, case).
    pub fn new(seed: u64, case: u64) -> Self {
        Stream {
            state: mix(mix(seed) ^ case),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix(self.state)
    }

    /// Uniform in `0..bound` (`bound > 0`).
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.below(hi - lo + 1)
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `k` positive masses with denominator `denom`, summing to exactly 1.
fn random_probabilities(rng: &mut Stream, k: usize, denom: u64) -> Vec<Scalar> {
    // distinct cut points partition denom units into k positive parts
    let mut cuts = Vec::with_capacity(k + 1);
    cuts.push(0);
    while cuts.len() < k {
        let c = rng.range(1, denom - 1);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.push(denom);
    cuts.sort_unstable();
    cuts.windows(2)
        .map(|w| Scalar::from_ratio(BigInt::from(w[1] - w[0]), BigInt::from(denom)))
        .collect()
}

fn random_values(rng: &mut Stream, k: usize, cfg: &GenConfig) -> Vec<Scalar> {
    let mut nums = Vec::with_capacity(k);
    while nums.len() < k {
        let v = rng.below(cfg.value_span + 1);
        if !nums.contains(&v) {
            nums.push(v);
        }
    }
    nums.into_iter()
        .map(|n| Scalar::from_ratio(BigInt::from(n), BigInt::from(cfg.value_denominator)))
        .collect()
}

fn random_box(rng: &mut Stream, cfg: &GenConfig) -> PnoiBox {
    let k = rng.range(1, cfg.max_support as u64) as usize;
    let values = random_values(rng, k, cfg);
    let probs = random_probabilities(rng, k, cfg.prob_denominator);
    let cost = Scalar::from_ratio(
        BigInt::from(rng.below(cfg.cost_span + 1)),
        BigInt::from(cfg.cost_denominator),
    );
    let dist = DiscreteDistribution::new(values.into_iter().zip(probs).collect())
        .expect("positive masses summing to one");
    PnoiBox::new(cost, dist).expect("nonnegative values and cost")
}

/// A general instance: the verification distribution.
pub fn random_instance(seed: u64, case: u64, cfg: &GenConfig) -> PnoiInstance {
    let mut rng = Stream::new(seed, case);
    let n = rng.range(1, cfg.max_boxes as u64) as usize;
    PnoiInstance::new((0..n).map(|_| random_box(&mut rng, cfg)).collect()).expect("n >= 1")
}

/// An instance with every support inside {0, 1}.
pub fn random_01_instance(seed: u64, case: u64, max_boxes: usize) -> PnoiInstance {
    let mut rng = Stream::new(seed, case ^ 0x5EED_0101);
    let n = rng.range(1, max_boxes as u64) as usize;
    let boxes = (0..n)
        .map(|_| {
            let denom = 64u64;
            let cost = Scalar::from_ratio(BigInt::from(rng.below(33)), BigInt::from(64u64));
            let dist = match rng.below(5) {
                0 => DiscreteDistribution::deterministic(Scalar::zero()),
                1 => DiscreteDistribution::deterministic(Scalar::one()),
                _ => {
                    let p = rng.range(1, denom - 1);
                    DiscreteDistribution::new(vec![
                        (
                            Scalar::zero(),
                            Scalar::from_ratio(BigInt::from(denom - p), BigInt::from(denom)),
                        ),
                        (
                            Scalar::one(),
                            Scalar::from_ratio(BigInt::from(p), BigInt::from(denom)),
                        ),
                    ])
                    .expect("two positive masses")
                }
            };
            PnoiBox::new(cost, dist).expect("valid box")
        })
        .collect();
    PnoiInstance::new(boxes).expect("n >= 1")
}

/// A random instance of the low-cost-low-return-support-3 family.
pub fn random_lclrs3_instance(seed: u64, case: u64, max_boxes: usize) -> Lclrs3Instance {
    let mut rng = Stream::new(seed, case ^ 0x5EED_3333);
    let n = rng.range(1, max_boxes as u64) as usize;
    let d = 64u64;
    let boxes = (0..n)
        .map(|_| {
            // p >= 1/64, expected value p + q/2 < 1/2, cost in (0, p/2]
            let a = rng.range(1, 31); // p = a/64
            let b = rng.below(64 - 2 * a); // q = b/64, 2a + b < 64
            let p = Scalar::from_ratio(BigInt::from(a), BigInt::from(d));
            let q = Scalar::from_ratio(BigInt::from(b), BigInt::from(d));
            let cost_num = rng.range(1, 32 * a); // cost = j/4096 <= a/128 = p/2
            let cost = Scalar::from_ratio(BigInt::from(cost_num), BigInt::from(4096u64));
            let r = Scalar::one() - &p - &q;
            let mut masses = vec![(Scalar::one(), p)];
            if q.is_positive() {
                masses.push((Scalar::frac(1, 2), q));
            }
            if r.is_positive() {
                masses.push((Scalar::zero(), r));
            }
            PnoiBox::new(cost, DiscreteDistribution::new(masses).expect("masses"))
                .expect("valid box")
        })
        .collect();
    Lclrs3Instance::from_instance(PnoiInstance::new(boxes).expect("n >= 1"))
        .expect("family conditions hold by construction")
}

/// An instance mixing ordinary boxes with rare-jackpot boxes whose values
/// land far above the discretization threshold.
pub fn random_large_value_instance(seed: u64, case: u64, max_boxes: usize) -> PnoiInstance {
    let mut rng = Stream::new(seed, case ^ 0x5EED_7A66);
    let cfg = GenConfig::default();
    let n = rng.range(2, max_boxes.max(2) as u64) as usize;
    let boxes = (0..n)
        .map(|_| {
            if rng.below(3) == 0 {
                // jackpot: huge value at probability 1/denom; the cap keeps
                // every value within 100x the instance optimum
                let denom = rng.range(16, 100);
                let jackpot = Scalar::from(rng.range(200, 2000));
                let cost = Scalar::from_ratio(BigInt::from(rng.range(0, 8)), BigInt::from(8u64));
                let dist = DiscreteDistribution::new(vec![
                    (
                        Scalar::zero(),
                        Scalar::from_ratio(BigInt::from(denom - 1), BigInt::from(denom)),
                    ),
                    (
                        jackpot,
                        Scalar::from_ratio(BigInt::from(1u64), BigInt::from(denom)),
                    ),
                ])
                .expect("two masses");
                PnoiBox::new(cost, dist).expect("valid box")
            } else {
                random_box(&mut rng, &cfg)
            }
        })
        .collect();
    PnoiInstance::new(boxes).expect("n >= 2")
}

/// All multisets `{s_1 <= … <= s_n}` with `n <= max_n` elements drawn from
/// `[1, 2^n]`, in deterministic order.  The reduction suite sweeps these.
pub fn small_multisets(max_n: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let cap = 1u64 << n;
        let mut current = Vec::with_capacity(n);
        enumerate_multisets(n, 1, cap, &mut current, &mut out);
    }
    out
}

fn enumerate_multisets(
    n: usize,
    lo: u64,
    cap: u64,
    current: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    if current.len() == n {
        out.push(current.clone());
        return;
    }
    for s in lo..=cap {
        current.push(s);
        enumerate_multisets(n, s, cap, current, out);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate_instance;
    use crate::lclrs3::is_lclrs3;

    #[test]
    fn general_instances_are_valid_and_reproducible() {
        let cfg = GenConfig::default();
        for case in 0..50 {
            let a = random_instance(7, case, &cfg);
            let b = random_instance(7, case, &cfg);
            assert_eq!(a, b);
            assert!(validate_instance(&a.to_raw()).is_empty());
            assert!(a.n() <= cfg.max_boxes);
        }
        assert_ne!(random_instance(7, 0, &cfg), random_instance(8, 0, &cfg));
    }

    #[test]
    fn zero_one_instances_stay_in_family() {
        for case in 0..50 {
            let inst = random_01_instance(3, case, 10);
            for b in inst.boxes() {
                for (v, _) in b.dist().iter() {
                    assert!(v.is_zero() || *v == Scalar::one());
                }
            }
        }
    }

    #[test]
    fn lclrs3_instances_satisfy_family_conditions() {
        for case in 0..50 {
            let inst = random_lclrs3_instance(11, case, 5);
            assert!(is_lclrs3(inst.inner()).0);
        }
    }

    #[test]
    fn large_value_instances_reach_past_theta() {
        use crate::policies::half_approx;
        let mut seen_large = false;
        for case in 0..30 {
            let inst = random_large_value_instance(5, case, 6);
            let alg = half_approx(&inst);
            if inst.max_value() > Scalar::from(8u64) * alg {
                seen_large = true;
            }
        }
        assert!(seen_large, "no case produced values past 2·ALG/(1/4)");
    }

    #[test]
    fn multiset_sweep_shape() {
        let sets = small_multisets(3);
        // n=1: 2, n=2: C(5,2)=10, n=3: C(10,3)=120
        assert_eq!(sets.iter().filter(|s| s.len() == 1).count(), 2);
        assert_eq!(sets.iter().filter(|s| s.len() == 2).count(), 10);
        assert_eq!(sets.iter().filter(|s| s.len() == 3).count(), 120);
        assert!(sets.iter().all(|s| s.windows(2).all(|w| w[0] <= w[1])));
    }
}
