//! Robot models, forward kinematics, and the generic IK solver.

mod ik;
mod model;

pub use ik::{pose_error, solve_ik, IkOptions, IkSolution};
pub use model::{Interval, Joint, JointState, JointType, RobotModel};

use crate::laban::{self, ConstraintStrength, LabanError, LabanPose};
use crate::pose::Pose;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KinematicsError {
    #[error("malformed robot description: {0}")]
    MalformedFile(String),
    #[error("robot description schema violation: {0}")]
    SchemaViolation(String),
    #[error("kinematic chain branches at `{link}` into {children:?}")]
    BranchingChain { link: String, children: Vec<String> },
    #[error("joint {joint} value {value} outside [{lo}, {hi}]")]
    JointLimitViolation { joint: usize, value: f64, lo: f64, hi: f64 },
    #[error("expected {expected} joint values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("IK did not converge (position error {pos_err:.4} m, orientation error {rot_err:.4} rad)")]
    NoConvergence { best_q: Vec<f64>, pos_err: f64, rot_err: f64 },
    #[error(transparent)]
    Laban(#[from] LabanError),
}

/// Solves IK for the first posture of a task, inside the joint ranges the
/// Labanotation pose allows, starting from the middle of those ranges.
pub fn initial_posture(
    model: &RobotModel,
    target: &Pose,
    pose: &LabanPose,
    strength: ConstraintStrength,
    opts: &IkOptions,
) -> Result<IkSolution, KinematicsError> {
    let bounds = laban::joint_ranges(model, pose, strength)?;
    let seed: Vec<f64> = bounds.iter().map(Interval::mid).collect();
    solve_ik(model, target, &seed, &bounds, opts)
}
