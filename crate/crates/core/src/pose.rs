//! Rigid-transform helpers and the on-disk pose encoding.
//!
//! Poses are `nalgebra::Isometry3<f64>`. Files store them as a position plus a
//! unit quaternion in `(w, x, y, z)` order.

use nalgebra::{Isometry3, Quaternion, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

pub type Pose = Isometry3<f64>;

/// Accepted deviation of a stored quaternion from unit norm.
pub const QUATERNION_NORM_TOL: f64 = 1e-6;

/// Accepted deviation of a stored direction vector from unit norm.
pub const UNIT_VECTOR_TOL: f64 = 1e-6;

/// Serialized form of a pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseDoc {
    pub position: [f64; 3],
    pub quaternion: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("quaternion norm {norm} is not 1")]
pub struct NonUnitQuaternion {
    pub norm: f64,
}

impl PoseDoc {
    /// Converts to a pose. Quaternions within [`QUATERNION_NORM_TOL`] of unit
    /// norm are accepted; values already unit to 1e-12 are kept bit-for-bit.
    pub fn to_pose(&self) -> Result<Pose, NonUnitQuaternion> {
        let [w, x, y, z] = self.quaternion;
        let raw = Quaternion::new(w, x, y, z);
        let norm = raw.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > QUATERNION_NORM_TOL {
            return Err(NonUnitQuaternion { norm });
        }
        let rotation = if (norm - 1.0).abs() > 1e-12 {
            UnitQuaternion::from_quaternion(raw)
        } else {
            UnitQuaternion::new_unchecked(raw)
        };
        let [px, py, pz] = self.position;
        Ok(Isometry3::from_parts(Translation3::new(px, py, pz), rotation))
    }

    pub fn from_pose(pose: &Pose) -> Self {
        let t = pose.translation.vector;
        let q = pose.rotation.quaternion();
        Self {
            position: [t.x, t.y, t.z],
            quaternion: [q.w, q.i, q.j, q.k],
        }
    }
}

pub fn vec3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

pub fn arr3(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

pub fn is_unit(v: &Vector3<f64>) -> bool {
    (v.norm() - 1.0).abs() <= UNIT_VECTOR_TOL
}

/// Angle of the relative rotation between two orientations, in radians.
pub fn rotation_distance(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    a.rotation_to(b).angle()
}

/// Shortest rotation mapping `from` onto `to` (both unit). Antiparallel
/// inputs rotate by pi about an axis orthogonal to `from`.
pub fn rotation_between(from: &Vector3<f64>, to: &Vector3<f64>) -> UnitQuaternion<f64> {
    match UnitQuaternion::rotation_between(from, to) {
        Some(q) => q,
        None => {
            let helper = if from.x.abs() < 0.9 {
                Vector3::x()
            } else {
                Vector3::y()
            };
            let axis = nalgebra::Unit::new_normalize(from.cross(&helper));
            UnitQuaternion::from_axis_angle(&axis, std::f64::consts::PI)
        }
    }
}
