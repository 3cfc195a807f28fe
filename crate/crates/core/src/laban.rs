//! Labanotation limb directions and the joint-range constraints they induce.
//!
//! Each limb direction is one of 26 canonical unit vectors in the robot base
//! frame (x forward, y left, z up): eight azimuths at three elevation levels,
//! plus straight up and straight down. A robot description carries a table
//! mapping `(limb, direction)` to joint intervals; [`joint_ranges`] turns a
//! pose into per-joint IK bounds.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::kinematics::{Interval, RobotModel};

const AZIMUTHS: [(&str, f64); 8] = [
    ("forward", 0.0),
    ("forward_right", -45.0),
    ("right", -90.0),
    ("back_right", -135.0),
    ("back", 180.0),
    ("back_left", 135.0),
    ("left", 90.0),
    ("forward_left", 45.0),
];

const LEVELS: [(&str, f64); 3] = [("high", 45.0), ("middle", 0.0), ("low", -45.0)];

/// One of the 26 canonical directions, stored as its canonical index.
///
/// Index 0 is `place_high`, 1 is `place_low`, then azimuth-major over
/// `AZIMUTHS` x `LEVELS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabanDirection(u8);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabanError {
    #[error("unknown Labanotation direction `{0}`")]
    UnknownDirection(String),
    #[error("direction vector has zero length")]
    ZeroVector,
    #[error("no joint-range entry for {limb} `{direction}`")]
    MissingTableEntry { limb: Limb, direction: LabanDirection },
}

impl LabanDirection {
    pub const COUNT: usize = 26;
    pub const PLACE_HIGH: Self = Self(0);
    pub const PLACE_LOW: Self = Self(1);

    pub fn from_index(index: usize) -> Option<Self> {
        (index < Self::COUNT).then_some(Self(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = Self> {
        (0..Self::COUNT as u8).map(Self)
    }

    /// Azimuth and elevation in degrees; `None` for the two vertical places.
    fn angles(self) -> Option<(f64, f64)> {
        let i = self.index();
        if i < 2 {
            return None;
        }
        let (az, lv) = ((i - 2) / 3, (i - 2) % 3);
        Some((AZIMUTHS[az].1, LEVELS[lv].1))
    }

    pub fn name(self) -> String {
        match self.index() {
            0 => "place_high".to_string(),
            1 => "place_low".to_string(),
            i => format!("{}_{}", AZIMUTHS[(i - 2) / 3].0, LEVELS[(i - 2) % 3].0),
        }
    }

    pub fn unit_vector(self) -> Vector3<f64> {
        match self.angles() {
            None if self == Self::PLACE_HIGH => Vector3::z(),
            None => -Vector3::z(),
            Some((az, el)) => {
                let (az, el) = (az.to_radians(), el.to_radians());
                Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
            }
        }
    }

    /// Nearest canonical direction by cosine similarity. Ties go to the
    /// lowest canonical index.
    ///
    /// Only the two vertical places and the three levels at the two
    /// azimuths bracketing `v` can win, so at most eight candidates are
    /// scored.
    pub fn quantize(v: &Vector3<f64>) -> Result<Self, LabanError> {
        if !(v.norm() >= 1e-6) {
            return Err(LabanError::ZeroVector);
        }
        let az = v.y.atan2(v.x).to_degrees();
        // Azimuth slot k covers angle -45k (forward=0, forward_right=1, ...).
        let slot = (-az / 45.0).rem_euclid(8.0);
        let lo = (slot.floor() as usize) % 8;
        let hi = (lo + 1) % 8;
        let mut candidates: Vec<Self> = vec![Self::PLACE_HIGH, Self::PLACE_LOW];
        for az_slot in [lo, hi] {
            for lv in 0..3 {
                candidates.push(Self((2 + az_slot * 3 + lv) as u8));
            }
        }
        candidates.sort();
        let mut best = candidates[0];
        let mut best_dot = v.dot(&best.unit_vector());
        for c in candidates.into_iter().skip(1) {
            let d = v.dot(&c.unit_vector());
            if d > best_dot {
                best = c;
                best_dot = d;
            }
        }
        Ok(best)
    }
}

impl fmt::Display for LabanDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for LabanDirection {
    type Err = LabanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::all()
            .find(|d| d.name() == s)
            .ok_or_else(|| LabanError::UnknownDirection(s.to_string()))
    }
}

impl Serialize for LabanDirection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for LabanDirection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Upper- and lower-arm directions of one arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabanPose {
    #[serde(rename = "upper")]
    pub upper_arm: LabanDirection,
    #[serde(rename = "lower")]
    pub lower_arm: LabanDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Limb {
    UpperArm,
    LowerArm,
}

impl fmt::Display for Limb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Limb::UpperArm => "upper_arm",
            Limb::LowerArm => "lower_arm",
        })
    }
}

/// How strongly a Labanotation pose narrows the IK search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintStrength {
    /// Hard joint limits only.
    None,
    /// Hard limits, with the labelled elbow joint restricted to values >= 0.
    Elbow,
    /// Hard limits intersected with the table entries of both limbs.
    Full,
}

impl ConstraintStrength {
    /// Arms with more than six degrees of freedom get the full constraint;
    /// six or fewer only keep the elbow on its positive side.
    pub fn default_for(model: &RobotModel) -> Self {
        if model.dof() > 6 {
            Self::Full
        } else if model.elbow_joint().is_some() {
            Self::Elbow
        } else {
            Self::None
        }
    }
}

impl FromStr for ConstraintStrength {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::None),
            "elbow" => Ok(Self::Elbow),
            "full" => Ok(Self::Full),
            other => Err(format!("unknown constraint strength `{other}` (none|elbow|full)")),
        }
    }
}

impl fmt::Display for ConstraintStrength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Elbow => "elbow",
            Self::Full => "full",
        })
    }
}

/// Manually calibrated joint intervals per `(limb, direction)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JointRangeTable {
    entries: BTreeMap<(Limb, LabanDirection), BTreeMap<String, Interval>>,
}

/// File form: `{"upper_arm": {"<dir>": {"<joint>": [lo, hi]}}, "lower_arm": {...}}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointRangeTableDoc {
    #[serde(default)]
    pub upper_arm: BTreeMap<String, BTreeMap<String, [f64; 2]>>,
    #[serde(default)]
    pub lower_arm: BTreeMap<String, BTreeMap<String, [f64; 2]>>,
}

impl JointRangeTable {
    pub fn insert(
        &mut self,
        limb: Limb,
        direction: LabanDirection,
        ranges: BTreeMap<String, Interval>,
    ) {
        self.entries.insert((limb, direction), ranges);
    }

    pub fn get(&self, limb: Limb, direction: LabanDirection) -> Option<&BTreeMap<String, Interval>> {
        self.entries.get(&(limb, direction))
    }

    pub fn iter(
        &self,
    ) -> impl Iterator<Item = (&(Limb, LabanDirection), &BTreeMap<String, Interval>)> {
        self.entries.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_doc(doc: &JointRangeTableDoc) -> Result<Self, LabanError> {
        let mut table = Self::default();
        for (limb, section) in [(Limb::UpperArm, &doc.upper_arm), (Limb::LowerArm, &doc.lower_arm)] {
            for (dir, joints) in section {
                let direction: LabanDirection = dir.parse()?;
                let ranges = joints
                    .iter()
                    .map(|(name, [lo, hi])| (name.clone(), Interval::new(*lo, *hi)))
                    .collect();
                table.insert(limb, direction, ranges);
            }
        }
        Ok(table)
    }

    pub fn to_doc(&self) -> JointRangeTableDoc {
        let mut doc = JointRangeTableDoc::default();
        for ((limb, dir), joints) in &self.entries {
            let section = match limb {
                Limb::UpperArm => &mut doc.upper_arm,
                Limb::LowerArm => &mut doc.lower_arm,
            };
            section.insert(
                dir.name(),
                joints.iter().map(|(n, iv)| (n.clone(), [iv.lo, iv.hi])).collect(),
            );
        }
        doc
    }
}

/// Per-joint IK bounds for a Labanotation pose, in the model's joint order.
///
/// The result is always contained in the model's hard limits.
pub fn joint_ranges(
    model: &RobotModel,
    pose: &LabanPose,
    strength: ConstraintStrength,
) -> Result<Vec<Interval>, LabanError> {
    let mut bounds = model.hard_limits();
    match strength {
        ConstraintStrength::None => {}
        ConstraintStrength::Elbow => {
            if let Some(i) = model.elbow_index() {
                let hard = bounds[i];
                bounds[i] = Interval::new(hard.lo.max(0.0).min(hard.hi), hard.hi);
            }
        }
        ConstraintStrength::Full => {
            let table = model.laban_table();
            for (limb, direction) in [(Limb::UpperArm, pose.upper_arm), (Limb::LowerArm, pose.lower_arm)] {
                let entry = table
                    .get(limb, direction)
                    .ok_or(LabanError::MissingTableEntry { limb, direction })?;
                for (name, iv) in entry {
                    // Table joints are checked against the model at load time.
                    if let Some(i) = model.joint_index(name) {
                        bounds[i] = bounds[i].intersect(iv).unwrap_or(bounds[i]);
                    }
                }
            }
        }
    }
    Ok(bounds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_six_distinct_names_roundtrip() {
        let names: Vec<String> = LabanDirection::all().map(|d| d.name()).collect();
        assert_eq!(names.len(), 26);
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 26);
        for d in LabanDirection::all() {
            assert_eq!(d.name().parse::<LabanDirection>().unwrap(), d);
        }
        assert_eq!(LabanDirection::from_index(5).unwrap().name(), "forward_right_high");
    }

    #[test]
    fn canonical_axes() {
        let up = LabanDirection::quantize(&Vector3::z()).unwrap();
        assert_eq!(up.name(), "place_high");
        let fwd = LabanDirection::quantize(&Vector3::x()).unwrap();
        assert_eq!(fwd.name(), "forward_middle");
        let right = LabanDirection::quantize(&-Vector3::y()).unwrap();
        assert_eq!(right.name(), "right_middle");
    }

    #[test]
    fn vectors_are_distinct_and_mirror_symmetric() {
        let vs: Vec<_> = LabanDirection::all().map(|d| d.unit_vector()).collect();
        for i in 0..vs.len() {
            assert!((vs[i].norm() - 1.0).abs() < 1e-12);
            for j in 0..i {
                assert!((vs[i] - vs[j]).norm() > 1e-3);
            }
            let mirrored = Vector3::new(-vs[i].x, -vs[i].y, vs[i].z);
            assert!(vs.iter().any(|w| (w - mirrored).norm() < 1e-12));
        }
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(
            LabanDirection::quantize(&Vector3::zeros()),
            Err(LabanError::ZeroVector)
        );
    }

    #[test]
    fn unknown_name() {
        let err = "forward_up".parse::<LabanDirection>().unwrap_err();
        assert!(err.to_string().contains("forward_up"));
    }
}
