#![allow(dead_code)]

use std::f64::consts::PI;

use lfo_core::bundled;
use lfo_core::kinematics::RobotModel;
use nalgebra::{Matrix3, Rotation3, SymmetricEigen, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn nextage() -> RobotModel {
    RobotModel::from_json(bundled::NEXTAGE_LIKE_ROBOT).unwrap()
}

pub fn fetch() -> RobotModel {
    RobotModel::from_json(bundled::FETCH_LIKE_ROBOT).unwrap()
}

pub fn bundled_models() -> Vec<RobotModel> {
    vec![nextage(), fetch()]
}

/// Planar arm in the xy plane: two z-axis revolute joints, unit links.
pub fn two_link() -> RobotModel {
    RobotModel::from_json(
        r#"{
        "name": "two_link",
        "joints": [
            {"name": "j1", "type": "revolute", "axis": [0, 0, 1],
             "origin": {"position": [0, 0, 0], "quaternion": [1, 0, 0, 0]},
             "limits": [-3.14159, 3.14159]},
            {"name": "j2", "type": "revolute", "axis": [0, 0, 1],
             "origin": {"position": [1, 0, 0], "quaternion": [1, 0, 0, 0]},
             "limits": [-3.14159, 3.14159]}
        ],
        "end_effector": {"position": [1, 0, 0], "quaternion": [1, 0, 0, 0]}
    }"#,
    )
    .unwrap()
}

pub fn random_q(model: &RobotModel, rng: &mut impl Rng) -> Vec<f64> {
    model
        .hard_limits()
        .iter()
        .map(|b| rng.gen_range(b.lo..=b.hi))
        .collect()
}

pub fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_rotation(rng: &mut impl Rng) -> Rotation3<f64> {
    let axis = Unit::new_normalize(random_unit(rng));
    Rotation3::from_axis_angle(&axis, rng.gen_range(0.0..PI))
}

// Monte-Carlo membership oracle for feasible-displacement cones.

pub const ORACLE_SAMPLES: usize = 100_000;
const SLACK: f64 = 0.04;
const EIGEN_FLOOR: f64 = 0.004;
const MIN_MEMBERS: usize = 20;

fn moment_rank(members: &[Vector3<f64>]) -> usize {
    if members.len() < MIN_MEMBERS {
        return 0;
    }
    let mut m = Matrix3::zeros();
    for v in members {
        m += v * v.transpose();
    }
    m /= members.len() as f64;
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .filter(|e| **e > EIGEN_FLOOR)
        .count()
}

/// `(lineality, span)` estimated from random unit directions: a direction is
/// a member when every constraint holds up to a small slack, and a lineality
/// member when every constraint is nearly tight. Each dimension is the
/// number of significant principal axes of its member set.
pub fn oracle_dims(normals: &[Vector3<f64>], samples: usize, rng: &mut impl Rng) -> (usize, usize) {
    let mut members = Vec::new();
    let mut lineal = Vec::new();
    for _ in 0..samples {
        let v = random_unit(rng);
        let dots = normals.iter().map(|n| n.dot(&v));
        if dots.clone().all(|d| d >= -SLACK) {
            members.push(v);
            if dots.clone().all(|d| d.abs() <= SLACK) {
                lineal.push(v);
            }
        }
    }
    (moment_rank(&lineal), moment_rank(&members))
}

fn about(axis: Vector3<f64>, angle: f64, v: Vector3<f64>) -> Vector3<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle) * v
}

/// One structured normal set per call, cycling through the ten classes, with
/// random shape parameters, optional redundant normals, and a random rotation.
/// Every 11th set is unstructured.
pub fn generated_normal_sets(count: usize, rng: &mut impl Rng) -> Vec<Vec<Vector3<f64>>> {
    let (x, y, z) = (Vector3::x(), Vector3::y(), Vector3::z());
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut set: Vec<Vector3<f64>> = match i % 11 {
            0 => vec![],
            1 => vec![z],
            2 => vec![z, -z],
            3 => vec![z, -z, y, -y],
            4 => {
                if rng.gen_bool(0.5) {
                    vec![x, -x, y, -y, z, -z]
                } else {
                    // Regular tetrahedron directions positively span space.
                    let s = 1.0 / 3f64.sqrt();
                    vec![
                        Vector3::new(s, s, s),
                        Vector3::new(s, -s, -s),
                        Vector3::new(-s, s, -s),
                        Vector3::new(-s, -s, s),
                    ]
                }
            }
            5 => vec![y, -y, z, -z, x],
            6 => vec![z, -z, y],
            7 => {
                let a = rng.gen_range(30f64..120.0).to_radians();
                vec![z, about(x, a, z)]
            }
            8 => {
                let a = rng.gen_range(0.0..2.0 * PI);
                let b = a + rng.gen_range(40f64..120.0).to_radians();
                vec![z, -z, Vector3::new(a.cos(), a.sin(), 0.0), Vector3::new(b.cos(), b.sin(), 0.0)]
            }
            9 => {
                let tilt = rng.gen_range(40f64..70.0).to_radians();
                let phase = rng.gen_range(0.0..2.0 * PI);
                (0..3)
                    .map(|k| {
                        let phi = phase + k as f64 * 2.0 * PI / 3.0;
                        Vector3::new(tilt.sin() * phi.cos(), tilt.sin() * phi.sin(), tilt.cos())
                    })
                    .collect()
            }
            _ => (0..rng.gen_range(1..=3)).map(|_| random_unit(rng)).collect(),
        };
        // Redundant copies: a normal implied by two existing ones.
        if set.len() >= 2 && rng.gen_bool(0.3) {
            let extra = (set[0] + set[1]).try_normalize(1e-6);
            if let Some(e) = extra {
                set.push(e);
            }
        }
        let r = random_rotation(rng);
        out.push(set.into_iter().map(|n| r * n).collect());
    }
    out
}
