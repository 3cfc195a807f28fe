//! Hand-centric skill library.
//!
//! Skills only reason about the hand: given skill parameters and the current
//! hand state they emit target hand configurations. Turning those into body
//! motion is the executor's job, so the same skills run on any arm.

use std::f64::consts::PI;

use nalgebra::{Isometry3, Translation3, Unit, UnitQuaternion, Vector3};

use crate::pose::{self, Pose};
use crate::taskir::{GraspType, SkillParams};

/// Pre-grasp standoff and release retreat distance (m).
pub const STANDOFF: f64 = 0.10;
/// Maximum spacing between consecutive carry waypoints (m).
pub const VIA_SPACING: f64 = 0.10;
/// Landing descent per control step (m).
pub const DESCENT_STEP: f64 = 0.005;
/// Longest landing descent before giving up (m).
pub const MAX_DESCENT: f64 = 0.30;
/// Effort rise over baseline that counts as touching down.
pub const HIT_THRESHOLD: f64 = 0.5;
/// Effort reading with nothing touching.
pub const EFFORT_BASELINE: f64 = 0.1;

/// Descent steps that fit in [`MAX_DESCENT`].
pub const MAX_DESCENT_STEPS: usize = 60;

pub const HIT_EVENT: &str = "hit_detected";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandTarget {
    pub pose: Pose,
    /// 1 is fully open, 0 fully closed.
    pub aperture: f64,
}

impl HandTarget {
    pub fn new(pose: Pose, aperture: f64) -> Self {
        Self { pose, aperture: aperture.clamp(0.0, 1.0) }
    }

    pub fn position(&self) -> Vector3<f64> {
        self.pose.translation.vector
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkillState {
    pub hand_pose: Pose,
    /// Finger-joint effort reading, non-negative.
    pub effort: f64,
    pub step_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkillOutput {
    pub target: HandTarget,
    pub done: bool,
    pub note: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SkillError {
    #[error("skill parameter `{0}` is required")]
    MissingParam(&'static str),
    #[error("no touchdown within {travel} m ({steps} descent steps)")]
    NoHitWithinTravel { steps: usize, travel: f64 },
}

/// Closing aperture of each grasp type.
pub fn grasp_aperture(grasp: GraspType) -> f64 {
    match grasp {
        GraspType::PassiveForce => 0.15,
        GraspType::ActiveForce => 0.05,
        GraspType::Lazy => 0.35,
    }
}

fn translated(pose: &Pose, delta: Vector3<f64>) -> Pose {
    Isometry3::from_parts(
        Translation3::from(pose.translation.vector + delta),
        pose.rotation,
    )
}

fn same_position(a: &Pose, b: &Pose) -> bool {
    (a.translation.vector - b.translation.vector).norm() <= 1e-9
        && a.rotation.angle_to(&b.rotation) <= 1e-9
}

/// Number of equal segments needed so none exceeds `spacing`.
fn segment_count(length: f64, spacing: f64) -> usize {
    ((length / spacing) - 1e-9).ceil().max(1.0) as usize
}

/// Straight-line positions from `from` to `to`, excluding `from`, spaced at
/// most [`VIA_SPACING`] apart.
fn densify(from: &Vector3<f64>, to: &Vector3<f64>) -> Vec<Vector3<f64>> {
    let delta = to - from;
    let length = delta.norm();
    if length <= 1e-12 {
        return Vec::new();
    }
    let n = segment_count(length, VIA_SPACING);
    (1..=n)
        .map(|k| if k == n { *to } else { from + delta * (k as f64 / n as f64) })
        .collect()
}

/// Pre-grasp standoff, approach, then closure.
pub fn grasp_waypoints(params: &SkillParams, current: &HandTarget) -> Result<Vec<HandTarget>, SkillError> {
    let grasp = params.grasp_type.ok_or(SkillError::MissingParam("grasp_type"))?;
    let approach = params
        .approach_direction
        .ok_or(SkillError::MissingParam("approach_direction"))?;
    let grasp_pose = params.start_hand_pose;
    let pre = translated(&grasp_pose, -approach.normalize() * STANDOFF);

    let mut out = Vec::with_capacity(4);
    if !same_position(&current.pose, &pre) {
        out.push(*current);
    }
    out.push(HandTarget::new(pre, 1.0));
    out.push(HandTarget::new(grasp_pose, 1.0));
    out.push(HandTarget::new(grasp_pose, grasp_aperture(grasp)));
    Ok(out)
}

/// Where the hand waits before a grasp: the standoff pose, fully open.
pub fn pregrasp_target(params: &SkillParams) -> Result<HandTarget, SkillError> {
    let approach = params
        .approach_direction
        .ok_or(SkillError::MissingParam("approach_direction"))?;
    Ok(HandTarget::new(
        translated(&params.start_hand_pose, -approach.normalize() * STANDOFF),
        1.0,
    ))
}

/// Opens the hand where it is, then backs away.
pub fn release_waypoints(params: &SkillParams, current: &HandTarget) -> Vec<HandTarget> {
    let retreat = params
        .approach_direction
        .map(|a| -a.normalize())
        .unwrap_or_else(Vector3::z);
    vec![
        *current,
        HandTarget::new(current.pose, 1.0),
        HandTarget::new(translated(&current.pose, retreat * STANDOFF), 1.0),
    ]
}

/// Pick up: translate by the demonstrated displacement with the orientation
/// held.
pub fn ptg11_waypoints(params: &SkillParams, current: &HandTarget) -> Vec<HandTarget> {
    let start = current.position();
    let end = start + params.displacement;
    std::iter::once(*current)
        .chain(densify(&start, &end).into_iter().map(|p| {
            HandTarget::new(
                Isometry3::from_parts(Translation3::from(p), current.pose.rotation),
                current.aperture,
            )
        }))
        .collect()
}

/// Orientation whose image of the object's upright axis is world +z.
///
/// `upright_world` is the object's upright direction at the moment the
/// hand has orientation `hand`.
pub fn upright_orientation(
    hand: &UnitQuaternion<f64>,
    upright_world: &Vector3<f64>,
) -> UnitQuaternion<f64> {
    let fix = pose::rotation_between(&upright_world.normalize(), &Vector3::z());
    fix * hand
}

/// Bring: pass through the demonstrated via points to the displaced end
/// while keeping the object upright.
pub fn stg12_waypoints(params: &SkillParams, current: &HandTarget) -> Result<Vec<HandTarget>, SkillError> {
    let upright = params
        .object_upright_axis
        .ok_or(SkillError::MissingParam("object_upright_axis"))?;
    let orientation = upright_orientation(&current.pose.rotation, &upright);
    let start = current.position();
    let end = start + params.displacement;

    let mut corners: Vec<Vector3<f64>> = params
        .via_points
        .iter()
        .map(|v| v.translation.vector)
        .collect();
    corners.push(end);

    let hold = |p: Vector3<f64>| {
        HandTarget::new(Isometry3::from_parts(Translation3::from(p), orientation), current.aperture)
    };
    let mut out = vec![HandTarget::new(
        Isometry3::from_parts(current.pose.translation, orientation),
        current.aperture,
    )];
    let mut from = start;
    for corner in corners {
        out.extend(densify(&from, &corner).into_iter().map(hold));
        from = corner;
    }
    Ok(out)
}

/// Drawer: straight translation along the displacement axis, orientation held.
pub fn ptg3_waypoints(params: &SkillParams, current: &HandTarget) -> Vec<HandTarget> {
    ptg11_waypoints(params, current)
}

/// Revolute door: an arc of the hand about the hinge axis, with the hand
/// co-rotating.
///
/// The hinge axis direction is `surface_normal`, the hinge passes through
/// the first via point, and the opening angle is `|displacement|` radians
/// (positive about the axis).
pub fn ptg5_waypoints(params: &SkillParams, current: &HandTarget) -> Result<Vec<HandTarget>, SkillError> {
    let axis = params
        .surface_normal
        .ok_or(SkillError::MissingParam("surface_normal"))?;
    let hinge = params
        .via_points
        .first()
        .ok_or(SkillError::MissingParam("via_points"))?
        .translation
        .vector;
    let axis = Unit::new_normalize(axis);
    let angle = params.displacement.norm();
    let start = current.position();
    let radial = {
        let r = start - hinge;
        r - axis.into_inner() * axis.dot(&r)
    };
    let arc = radial.norm() * angle;
    let n = if arc <= 1e-12 {
        if angle <= 1e-12 {
            0
        } else {
            segment_count(angle, PI / 18.0)
        }
    } else {
        segment_count(arc, VIA_SPACING)
    };
    let mut out = vec![*current];
    for k in 1..=n {
        let rot = UnitQuaternion::from_axis_angle(&axis, angle * k as f64 / n as f64);
        let p = hinge + rot * (start - hinge);
        out.push(HandTarget::new(
            Isometry3::from_parts(Translation3::from(p), rot * current.pose.rotation),
            current.aperture,
        ));
    }
    Ok(out)
}

/// Landing start: the demonstrated midpoint height (along the surface
/// normal) above the column of the demonstrated placement.
pub fn landing_start(params: &SkillParams, current: &HandTarget) -> Result<Pose, SkillError> {
    let normal = params
        .surface_normal
        .ok_or(SkillError::MissingParam("surface_normal"))?
        .normalize();
    let start = params.start_hand_pose.translation.vector;
    let end = params.end_hand_pose.translation.vector;
    let mid = 0.5 * (start + end);
    let column = end - normal * normal.dot(&end);
    let p = column + normal * normal.dot(&mid);
    Ok(Isometry3::from_parts(Translation3::from(p), current.pose.rotation))
}

/// One control step of the placing skill.
///
/// Call `k` (`state.step_index == k`) commands the landing start lowered by
/// `k` descent steps along the surface normal. Before commanding, the effort
/// measured at the previous command is checked: a rise above
/// [`HIT_THRESHOLD`] finishes the skill in place with a hit note, and further
/// calls keep returning that same target. `landing` is the result of
/// [`landing_start`] for this task.
pub fn ptg13_step(
    params: &SkillParams,
    landing: &Pose,
    aperture: f64,
    state: &SkillState,
) -> Result<SkillOutput, SkillError> {
    let normal = params
        .surface_normal
        .ok_or(SkillError::MissingParam("surface_normal"))?
        .normalize();
    if state.effort - EFFORT_BASELINE > HIT_THRESHOLD {
        return Ok(SkillOutput {
            target: HandTarget::new(state.hand_pose, aperture),
            done: true,
            note: Some(HIT_EVENT),
        });
    }
    let k = state.step_index;
    if k > MAX_DESCENT_STEPS {
        return Err(SkillError::NoHitWithinTravel {
            steps: MAX_DESCENT_STEPS,
            travel: MAX_DESCENT,
        });
    }
    let pose = translated(landing, -normal * (DESCENT_STEP * k as f64));
    Ok(SkillOutput {
        target: HandTarget::new(pose, aperture),
        done: false,
        note: None,
    })
}
