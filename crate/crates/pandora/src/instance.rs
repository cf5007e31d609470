//! Problem instances and their JSON form.
//!
//! An instance is an ordered list of boxes, each carrying an opening cost
//! and a value distribution.  Box indices are 1-based everywhere a human or
//! a file sees them; slices inside the crate are 0-based as usual.
//!
//! The interchange format, consumed and produced verbatim by every tool in
//! this workspace:
//!
//! ```json
//! { "boxes": [ { "cost": "1/8", "support": [ ["0", "1/2"], ["1", "1/2"] ] } ] }
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{DiscreteDistribution, DistributionError};
use crate::scalar::Scalar;

/// One sealed box: an opening cost and a value distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PnoiBox {
    cost: Scalar,
    dist: DiscreteDistribution,
}

impl PnoiBox {
    /// Requires `cost >= 0` and all values `>= 0`.
    pub fn new(cost: Scalar, dist: DiscreteDistribution) -> Result<Self, Violations> {
        let raw = RawBox {
            cost: cost.to_string(),
            support: dist
                .iter()
                .map(|(v, p)| (v.to_string(), p.to_string()))
                .collect(),
        };
        let violations = check_box(1, &raw);
        if violations.is_empty() {
            Ok(PnoiBox { cost, dist })
        } else {
            Err(Violations(violations))
        }
    }

    pub fn cost(&self) -> &Scalar {
        &self.cost
    }

    pub fn dist(&self) -> &DiscreteDistribution {
        &self.dist
    }
}

/// An ordered, validated list of boxes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PnoiInstance {
    boxes: Vec<PnoiBox>,
}

impl PnoiInstance {
    pub fn new(boxes: Vec<PnoiBox>) -> Result<Self, Violations> {
        if boxes.is_empty() {
            return Err(Violations(vec![Violation {
                box_index: None,
                message: "instance has no boxes".into(),
            }]));
        }
        Ok(PnoiInstance { boxes })
    }

    pub fn n(&self) -> usize {
        self.boxes.len()
    }

    pub fn boxes(&self) -> &[PnoiBox] {
        &self.boxes
    }

    /// 0-based access; callers translate user-facing 1-based indices.
    pub fn box_at(&self, i: usize) -> &PnoiBox {
        &self.boxes[i]
    }

    /// Largest value in any support.
    pub fn max_value(&self) -> Scalar {
        self.boxes
            .iter()
            .map(|b| b.dist().max_value().clone())
            .max()
            .expect("nonempty instance")
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            boxes: self
                .boxes
                .iter()
                .map(|b| RawBox {
                    cost: b.cost.to_string(),
                    support: b
                        .dist
                        .iter()
                        .map(|(v, p)| (v.to_string(), p.to_string()))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_raw(raw: &RawInstance) -> Result<Self, Violations> {
        let violations = validate_instance(raw);
        if !violations.is_empty() {
            return Err(Violations(violations));
        }
        let boxes = raw
            .boxes
            .iter()
            .map(|rb| {
                let cost: Scalar = rb.cost.parse().expect("validated");
                let masses = rb
                    .support
                    .iter()
                    .map(|(v, p)| (v.parse().expect("validated"), p.parse().expect("validated")))
                    .collect();
                PnoiBox {
                    cost,
                    dist: DiscreteDistribution::new(masses).expect("validated"),
                }
            })
            .collect();
        Ok(PnoiInstance { boxes })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self, InstanceError> {
        let raw: RawInstance = serde_json::from_str(s)?;
        Ok(Self::from_raw(&raw)?)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, InstanceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InstanceError::Io(path.display().to_string(), e.to_string()))?;
        Self::from_json_str(&text)
    }
}

/// Unvalidated mirror of the JSON shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawInstance {
    pub boxes: Vec<RawBox>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawBox {
    pub cost: String,
    pub support: Vec<(String, String)>,
}

/// A single invariant violation, pointing at the offending box when there
/// is one.  `box_index` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub box_index: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.box_index {
            Some(i) => write!(f, "box {i}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid instance:\n{0}")]
    Invalid(#[from] Violations),
    #[error("cannot read {0}: {1}")]
    Io(String, String),
}

/// Check every type invariant of the raw instance, reporting each violation
/// with its box index rather than stopping at the first.
pub fn validate_instance(raw: &RawInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    if raw.boxes.is_empty() {
        out.push(Violation {
            box_index: None,
            message: "instance has no boxes".into(),
        });
    }
    for (i, rb) in raw.boxes.iter().enumerate() {
        out.extend(check_box(i + 1, rb));
    }
    out
}

fn check_box(index: usize, raw: &RawBox) -> Vec<Violation> {
    let mut out = Vec::new();
    let at = |message: String| Violation {
        box_index: Some(index),
        message,
    };
    let cost = match raw.cost.parse::<Scalar>() {
        Ok(c) => Some(c),
        Err(e) => {
            out.push(at(format!("bad cost: {e}")));
            None
        }
    };
    if let Some(c) = &cost {
        if c.is_negative() {
            out.push(at("cost < 0".into()));
        }
    }
    let mut masses = Vec::new();
    let mut parse_failed = false;
    for (v, p) in &raw.support {
        match (v.parse::<Scalar>(), p.parse::<Scalar>()) {
            (Ok(v), Ok(p)) => masses.push((v, p)),
            (v, p) => {
                if let Err(e) = v {
                    out.push(at(format!("bad support value: {e}")));
                }
                if let Err(e) = p {
                    out.push(at(format!("bad probability: {e}")));
                }
                parse_failed = true;
            }
        }
    }
    if parse_failed {
        return out;
    }
    for (v, _) in &masses {
        if v.is_negative() {
            out.push(at(format!("value {v} < 0")));
        }
    }
    let values: Vec<&Scalar> = masses.iter().map(|(v, _)| v).collect();
    let mut sorted = values.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != values.len() {
        out.push(at("duplicate support values".into()));
    }
    match DiscreteDistribution::new(masses) {
        Ok(_) => {}
        Err(DistributionError::EmptySupport) => out.push(at("empty support".into())),
        Err(DistributionError::NonPositiveProbability(p)) => {
            out.push(at(format!("probability {p} is not positive")))
        }
        Err(DistributionError::SumNotOne(s)) => {
            out.push(at(format!("probabilities sum to {s}, not 1 (sum ≠ 1)")))
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn coin_box(cost: Scalar) -> PnoiBox {
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
    fn json_roundtrip() {
        let inst = PnoiInstance::new(vec![coin_box(Scalar::frac(1, 8)), coin_box(Scalar::frac(1, 8))])
            .unwrap();
        let json = inst.to_json_string();
        let back = PnoiInstance::from_json_str(&json).unwrap();
        assert_eq!(back, inst);
        assert!(json.contains("\"1/8\""));
    }

    #[test]
    fn verbatim_spec_shape() {
        let json = r#"{ "boxes": [ { "cost": "1/8", "support": [ ["0", "1/2"], ["1", "1/2"] ] } ] }"#;
        let inst = PnoiInstance::from_json_str(json).unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.box_at(0).cost(), &Scalar::frac(1, 8));
    }

    #[test]
    fn violations_are_indexed() {
        let raw = RawInstance {
            boxes: vec![
                RawBox {
                    cost: "1/8".into(),
                    support: vec![("0".into(), "9/10".into())],
                },
                RawBox {
                    cost: "-1".into(),
                    support: vec![("0".into(), "1".into())],
                },
            ],
        };
        let vs = validate_instance(&raw);
        assert!(vs.iter().any(|v| v.box_index == Some(1) && v.message.contains("sum")));
        assert!(vs.iter().any(|v| v.box_index == Some(2) && v.message.contains("cost < 0")));
    }

    #[test]
    fn well_formed_is_clean() {
        let inst = PnoiInstance::new(vec![coin_box(Scalar::zero()), coin_box(Scalar::one())])
            .unwrap();
        assert!(validate_instance(&inst.to_raw()).is_empty());
    }

    #[test]
    fn negative_value_rejected() {
        let dist = DiscreteDistribution::new(vec![(Scalar::frac(-1, 2), Scalar::one())]).unwrap();
        assert!(PnoiBox::new(Scalar::zero(), dist).is_err());
    }
}
