use std::collections::BTreeMap;

use nalgebra::{Isometry3, Matrix6xX, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::laban::{JointRangeTable, JointRangeTableDoc};
use crate::pose::{self, Pose, PoseDoc};

use super::KinematicsError;

/// Closed interval `[lo, hi]` in joint units (rad or m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.lo >= self.lo && other.hi <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lo).min(self.hi)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointType {
    Revolute,
    Prismatic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub joint_type: JointType,
    pub axis: Unit<Vector3<f64>>,
    /// Fixed transform from the parent joint frame (or base) to this joint's frame.
    pub origin: Pose,
    pub limits: Interval,
}

impl Joint {
    fn motion(&self, value: f64) -> Pose {
        match self.joint_type {
            JointType::Revolute => Isometry3::from_parts(
                Translation3::identity(),
                UnitQuaternion::from_axis_angle(&self.axis, value),
            ),
            JointType::Prismatic => Isometry3::from_parts(
                Translation3::from(self.axis.into_inner() * value),
                UnitQuaternion::identity(),
            ),
        }
    }
}

/// Serial-chain robot arm with its Labanotation calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    name: String,
    joints: Vec<Joint>,
    end_effector: Pose,
    laban_table: JointRangeTable,
    elbow_joint: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDoc {
    name: String,
    #[serde(rename = "type")]
    joint_type: JointType,
    axis: [f64; 3],
    origin: PoseDoc,
    limits: [f64; 2],
    /// Optional explicit parent joint name; defaults to the previous joint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elbow_joint: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotDoc {
    name: String,
    joints: Vec<JointDoc>,
    end_effector: PoseDoc,
    #[serde(default)]
    laban_table: JointRangeTableDoc,
    #[serde(default)]
    labels: LabelsDoc,
}

/// Joint-space configuration, one value per joint.
pub type JointState = Vec<f64>;

impl RobotModel {
    /// Parses and validates a JSON robot description.
    pub fn from_json(source: &str) -> Result<Self, KinematicsError> {
        let value: serde_json::Value = serde_json::from_str(source)
            .map_err(|e| KinematicsError::MalformedFile(e.to_string()))?;
        let doc: RobotDoc = serde_json::from_value(value)
            .map_err(|e| KinematicsError::SchemaViolation(e.to_string()))?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: RobotDoc) -> Result<Self, KinematicsError> {
        if doc.joints.is_empty() {
            return Err(KinematicsError::SchemaViolation("robot has no joints".into()));
        }
        let mut children: BTreeMap<String, Vec<&str>> = BTreeMap::new();
        let mut joints = Vec::with_capacity(doc.joints.len());
        for (i, j) in doc.joints.iter().enumerate() {
            if doc.joints[..i].iter().any(|p| p.name == j.name) {
                return Err(KinematicsError::SchemaViolation(format!(
                    "duplicate joint name `{}`",
                    j.name
                )));
            }
            let parent = match (&j.parent, i) {
                (Some(p), _) => p.clone(),
                (None, 0) => "base".to_string(),
                (None, _) => doc.joints[i - 1].name.clone(),
            };
            children.entry(parent).or_default().push(&j.name);

            let axis = pose::vec3(j.axis);
            if !pose::is_unit(&axis) {
                return Err(KinematicsError::SchemaViolation(format!(
                    "joint `{}`: axis is not unit length",
                    j.name
                )));
            }
            let [lo, hi] = j.limits;
            if !(lo < hi) {
                return Err(KinematicsError::SchemaViolation(format!(
                    "joint `{}`: limits require lo < hi, got [{lo}, {hi}]",
                    j.name
                )));
            }
            let origin = j.origin.to_pose().map_err(|e| {
                KinematicsError::SchemaViolation(format!("joint `{}` origin: {e}", j.name))
            })?;
            joints.push(Joint {
                name: j.name.clone(),
                joint_type: j.joint_type,
                axis: Unit::new_normalize(axis),
                origin,
                limits: Interval::new(lo, hi),
            });
        }
        // Serial chain: base has one child, every joint has at most one child,
        // and each explicit parent must be the joint listed just before it.
        for (parent, kids) in &children {
            if kids.len() > 1 {
                return Err(KinematicsError::BranchingChain {
                    link: parent.clone(),
                    children: kids.iter().map(|s| s.to_string()).collect(),
                });
            }
        }
        for (i, j) in doc.joints.iter().enumerate() {
            let expected = if i == 0 { "base" } else { doc.joints[i - 1].name.as_str() };
            if let Some(p) = &j.parent {
                if p != expected {
                    return Err(KinematicsError::SchemaViolation(format!(
                        "joint `{}`: parent `{p}` must be `{expected}` (joints are listed root to tip)",
                        j.name
                    )));
                }
            }
        }

        let end_effector = doc
            .end_effector
            .to_pose()
            .map_err(|e| KinematicsError::SchemaViolation(format!("end_effector: {e}")))?;
        let laban_table = JointRangeTable::from_doc(&doc.laban_table)
            .map_err(|e| KinematicsError::SchemaViolation(format!("laban_table: {e}")))?;

        let model = Self {
            name: doc.name,
            joints,
            end_effector,
            laban_table,
            elbow_joint: doc.labels.elbow_joint,
        };

        if let Some(elbow) = &model.elbow_joint {
            if model.joint_index(elbow).is_none() {
                return Err(KinematicsError::SchemaViolation(format!(
                    "labels.elbow_joint `{elbow}` is not a joint"
                )));
            }
        }
        for ((limb, dir), ranges) in model.laban_table.iter() {
            for (name, iv) in ranges {
                let Some(i) = model.joint_index(name) else {
                    return Err(KinematicsError::SchemaViolation(format!(
                        "laban_table {limb} `{dir}`: unknown joint `{name}`"
                    )));
                };
                if !(iv.lo <= iv.hi) || !model.joints[i].limits.contains_interval(iv) {
                    return Err(KinematicsError::SchemaViolation(format!(
                        "laban_table {limb} `{dir}`: interval [{}, {}] for `{name}` is outside the hard limits",
                        iv.lo, iv.hi
                    )));
                }
            }
        }
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        let doc = RobotDoc {
            name: self.name.clone(),
            joints: self
                .joints
                .iter()
                .map(|j| JointDoc {
                    name: j.name.clone(),
                    joint_type: j.joint_type,
                    axis: pose::arr3(&j.axis),
                    origin: PoseDoc::from_pose(&j.origin),
                    limits: [j.limits.lo, j.limits.hi],
                    parent: None,
                })
                .collect(),
            end_effector: PoseDoc::from_pose(&self.end_effector),
            laban_table: self.laban_table.to_doc(),
            labels: LabelsDoc {
                elbow_joint: self.elbow_joint.clone(),
            },
        };
        serde_json::to_string_pretty(&doc).expect("robot description serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    pub fn hard_limits(&self) -> Vec<Interval> {
        self.joints.iter().map(|j| j.limits).collect()
    }

    pub fn end_effector_offset(&self) -> &Pose {
        &self.end_effector
    }

    pub fn laban_table(&self) -> &JointRangeTable {
        &self.laban_table
    }

    pub fn set_laban_table(&mut self, table: JointRangeTable) {
        self.laban_table = table;
    }

    pub fn elbow_joint(&self) -> Option<&str> {
        self.elbow_joint.as_deref()
    }

    pub fn elbow_index(&self) -> Option<usize> {
        self.elbow_joint.as_deref().and_then(|n| self.joint_index(n))
    }

    pub fn within_limits(&self, q: &[f64]) -> bool {
        q.len() == self.dof() && q.iter().zip(&self.joints).all(|(v, j)| j.limits.contains(*v))
    }

    fn check_input(&self, q: &[f64]) -> Result<(), KinematicsError> {
        if q.len() != self.dof() {
            return Err(KinematicsError::DimensionMismatch {
                expected: self.dof(),
                got: q.len(),
            });
        }
        for (i, (v, j)) in q.iter().zip(&self.joints).enumerate() {
            if !v.is_finite() || !j.limits.contains(*v) {
                return Err(KinematicsError::JointLimitViolation {
                    joint: i,
                    value: *v,
                    lo: j.limits.lo,
                    hi: j.limits.hi,
                });
            }
        }
        Ok(())
    }

    /// World frame of every joint (after its fixed origin, before its own
    /// motion), followed by the end-effector pose.
    pub fn joint_frames(&self, q: &[f64]) -> (Vec<Pose>, Pose) {
        let mut frames = Vec::with_capacity(self.dof());
        let mut current = Pose::identity();
        for (j, v) in self.joints.iter().zip(q) {
            let frame = current * j.origin;
            frames.push(frame);
            current = frame * j.motion(*v);
        }
        (frames, current * self.end_effector)
    }

    /// End-effector pose for an in-limit configuration.
    pub fn fk(&self, q: &[f64]) -> Result<Pose, KinematicsError> {
        self.check_input(q)?;
        Ok(self.fk_unchecked(q))
    }

    pub(crate) fn fk_unchecked(&self, q: &[f64]) -> Pose {
        self.joint_frames(q).1
    }

    /// Geometric Jacobian in the base frame: rows 0..3 linear velocity of the
    /// end-effector point, rows 3..6 angular velocity.
    pub fn jacobian(&self, q: &[f64]) -> Matrix6xX<f64> {
        let (frames, ee) = self.joint_frames(q);
        let p_ee = ee.translation.vector;
        let mut jac = Matrix6xX::zeros(self.dof());
        for (i, (joint, frame)) in self.joints.iter().zip(&frames).enumerate() {
            let axis = frame.rotation * joint.axis.into_inner();
            match joint.joint_type {
                JointType::Revolute => {
                    let lin = axis.cross(&(p_ee - frame.translation.vector));
                    jac.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
                    jac.fixed_view_mut::<3, 1>(3, i).copy_from(&axis);
                }
                JointType::Prismatic => {
                    jac.fixed_view_mut::<3, 1>(0, i).copy_from(&axis);
                }
            }
        }
        jac
    }
}
