use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::pose::{self, Pose, PoseDoc};
use crate::skills::{HandTarget, EFFORT_BASELINE};

/// Effort reading while the hand or held object touches a support plane.
pub const EFFORT_CONTACT: f64 = 1.0;

const CONTACT_TOL: f64 = 1e-9;

/// Axis-aligned rectangle in the base-frame xy plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min[0] && x <= self.max[0] && y >= self.min[1] && y <= self.max[1]
    }
}

/// The plane `{p : normal·p = height}`, solid on the side opposite `normal`,
/// limited to `bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportPlane {
    #[serde(default)]
    pub name: String,
    pub height: f64,
    pub normal: [f64; 3],
    pub bounds: Rect,
}

/// Axis-aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    #[serde(default)]
    pub name: String,
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Obstacle {
    /// Strictly inside the box grown by `margin` on every side.
    pub fn contains_inflated(&self, p: &Vector3<f64>, margin: f64) -> bool {
        (0..3).all(|i| p[i] > self.min[i] - margin && p[i] < self.max[i] + margin)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvObject {
    pub name: String,
    pub pose: Pose,
    pub half_extents: Vector3<f64>,
}

impl EnvObject {
    pub fn center(&self) -> Vector3<f64> {
        self.pose.translation.vector
    }

    /// Smallest value of `direction·p` over the box.
    pub fn lowest_along(&self, direction: &Vector3<f64>) -> f64 {
        let r = self.pose.rotation.to_rotation_matrix();
        let reach: f64 = (0..3)
            .map(|i| direction.dot(&r.matrix().column(i)).abs() * self.half_extents[i])
            .sum();
        direction.dot(&self.center()) - reach
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    name: String,
    pose: PoseDoc,
    half_extents: [f64; 3],
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvironmentDoc {
    #[serde(default)]
    support_planes: Vec<SupportPlane>,
    #[serde(default)]
    obstacles: Vec<Obstacle>,
    #[serde(default)]
    objects: Vec<ObjectDoc>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Environment {
    pub support_planes: Vec<SupportPlane>,
    pub obstacles: Vec<Obstacle>,
    pub objects: Vec<EnvObject>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvironmentError {
    #[error("malformed environment file: {0}")]
    MalformedFile(String),
    #[error("environment schema violation: {0}")]
    SchemaViolation(String),
}

impl Environment {
    pub fn from_json(source: &str) -> Result<Self, EnvironmentError> {
        let value: serde_json::Value = serde_json::from_str(source)
            .map_err(|e| EnvironmentError::MalformedFile(e.to_string()))?;
        let doc: EnvironmentDoc = serde_json::from_value(value)
            .map_err(|e| EnvironmentError::SchemaViolation(e.to_string()))?;
        let mut objects = Vec::with_capacity(doc.objects.len());
        for o in doc.objects {
            if o.half_extents.iter().any(|h| !(*h > 0.0)) {
                return Err(EnvironmentError::SchemaViolation(format!(
                    "object `{}`: half_extents must be positive",
                    o.name
                )));
            }
            let pose = o.pose.to_pose().map_err(|e| {
                EnvironmentError::SchemaViolation(format!("object `{}`: {e}", o.name))
            })?;
            objects.push(EnvObject {
                name: o.name,
                pose,
                half_extents: pose::vec3(o.half_extents),
            });
        }
        for p in &doc.support_planes {
            if !pose::is_unit(&pose::vec3(p.normal)) {
                return Err(EnvironmentError::SchemaViolation(format!(
                    "support plane `{}`: normal is not unit length",
                    p.name
                )));
            }
        }
        for b in &doc.obstacles {
            if (0..3).any(|i| b.min[i] > b.max[i]) {
                return Err(EnvironmentError::SchemaViolation(format!(
                    "obstacle `{}`: min exceeds max",
                    b.name
                )));
            }
        }
        Ok(Self {
            support_planes: doc.support_planes,
            obstacles: doc.obstacles,
            objects,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = EnvironmentDoc {
            support_planes: self.support_planes.clone(),
            obstacles: self.obstacles.clone(),
            objects: self
                .objects
                .iter()
                .map(|o| ObjectDoc {
                    name: o.name.clone(),
                    pose: PoseDoc::from_pose(&o.pose),
                    half_extents: pose::arr3(&o.half_extents),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("environment serializes")
    }

    pub fn object(&self, name: &str) -> Option<&EnvObject> {
        self.objects.iter().find(|o| o.name == name)
    }
}

/// Simulated finger effort: [`EFFORT_CONTACT`] when the held object's lowest
/// point (or the empty hand's position) is at or below a support plane whose
/// bounds contain it horizontally, [`EFFORT_BASELINE`] otherwise.
pub fn simulate_effort(env: &Environment, hand: &HandTarget, held_object: Option<&EnvObject>) -> f64 {
    let touching = env.support_planes.iter().any(|plane| {
        let n = pose::vec3(plane.normal);
        let (lowest, reference) = match held_object {
            Some(obj) => (obj.lowest_along(&n), obj.center()),
            None => (n.dot(&hand.position()), hand.position()),
        };
        lowest <= plane.height + CONTACT_TOL && plane.bounds.contains(reference.x, reference.y)
    });
    if touching {
        EFFORT_CONTACT
    } else {
        EFFORT_BASELINE
    }
}
