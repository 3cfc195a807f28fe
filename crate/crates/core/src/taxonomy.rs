//! Feasible-displacement cones and their classification.
//!
//! Contacts restrict instantaneous motion to the polyhedral cone
//! `C = {v : n·v >= 0 for every constraint normal n}`. A cone is classified by
//! two numbers: the dimension of its lineality space `C ∩ -C` and the
//! dimension of its linear span. Ten pairs are admissible in three
//! dimensions, giving ten displacement classes. A task is then identified by
//! the class transition between its beginning and its end.

use std::fmt;

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::taskir::TaskKind;

/// Singular values below this are treated as zero.
pub const RANK_TOL: f64 = 1e-8;

const DUPLICATE_TOL: f64 = 1e-9;
const MEMBERSHIP_TOL: f64 = 1e-9;

/// Constraint normals point to the feasible side. Physical and semantic
/// normals constrain motion identically and differ only in where they came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContactModel {
    #[serde(default)]
    pub normals: Vec<Vector3<f64>>,
    #[serde(default)]
    pub semantic_normals: Vec<Vector3<f64>>,
}

impl ContactModel {
    pub fn physical(normals: Vec<Vector3<f64>>) -> Self {
        Self { normals, semantic_normals: Vec::new() }
    }
}

/// Irredundant H-representation of a polyhedral cone.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleCone {
    normals: Vec<Vector3<f64>>,
}

impl FeasibleCone {
    pub fn normals(&self) -> &[Vector3<f64>] {
        &self.normals
    }

    pub fn contains(&self, v: &Vector3<f64>, tol: f64) -> bool {
        self.normals.iter().all(|n| n.dot(v) >= -tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DisplacementType {
    Point,
    Ray,
    PlanarCone,
    SolidCone,
    Line,
    HalfPlane,
    WedgeSolid,
    Plane,
    HalfSpace,
    FullSpace,
}

impl DisplacementType {
    pub const ALL: [DisplacementType; 10] = [
        Self::Point,
        Self::Ray,
        Self::PlanarCone,
        Self::SolidCone,
        Self::Line,
        Self::HalfPlane,
        Self::WedgeSolid,
        Self::Plane,
        Self::HalfSpace,
        Self::FullSpace,
    ];

    /// `(lineality dimension, span dimension)`.
    pub fn dims(self) -> (usize, usize) {
        match self {
            Self::Point => (0, 0),
            Self::Ray => (0, 1),
            Self::PlanarCone => (0, 2),
            Self::SolidCone => (0, 3),
            Self::Line => (1, 1),
            Self::HalfPlane => (1, 2),
            Self::WedgeSolid => (1, 3),
            Self::Plane => (2, 2),
            Self::HalfSpace => (2, 3),
            Self::FullSpace => (3, 3),
        }
    }

    pub fn lineality_dim(self) -> usize {
        self.dims().0
    }

    pub fn span_dim(self) -> usize {
        self.dims().1
    }

    /// The class with the given dimensions. Every pair with
    /// `lineality <= span <= 3` is realizable by a polyhedral cone.
    pub fn from_dims(lineality: usize, span: usize) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.dims() == (lineality, span))
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Point => "Point",
            Self::Ray => "Ray",
            Self::PlanarCone => "PlanarCone",
            Self::SolidCone => "SolidCone",
            Self::Line => "Line",
            Self::HalfPlane => "HalfPlane",
            Self::WedgeSolid => "WedgeSolid",
            Self::Plane => "Plane",
            Self::HalfSpace => "HalfSpace",
            Self::FullSpace => "FullSpace",
        }
    }
}

impl fmt::Display for DisplacementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, s) = self.dims();
        write!(f, "{} ({l},{s})", self.name())
    }
}

fn rank(rows: &[Vector3<f64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]);
    m.svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s > RANK_TOL)
        .count()
}

/// Whether `b` is a nonnegative combination of `generators`.
///
/// By Carathéodory it suffices to try linearly independent subsets of at
/// most three generators.
pub fn cone_contains(generators: &[Vector3<f64>], b: &Vector3<f64>) -> bool {
    let scale = b.norm();
    if scale <= MEMBERSHIP_TOL {
        return true;
    }
    let m = generators.len();
    let fits = |cols: &[usize]| -> bool {
        let g = DMatrix::from_fn(3, cols.len(), |r, c| generators[cols[c]][r]);
        let gtg = g.transpose() * &g;
        if gtg.determinant().abs() < 1e-12 {
            return false;
        }
        let Some(chol) = gtg.cholesky() else {
            return false;
        };
        let rhs = g.transpose() * DMatrix::from_column_slice(3, 1, b.as_slice());
        let lambda = chol.solve(&rhs);
        if lambda.iter().any(|l| *l < -MEMBERSHIP_TOL * scale) {
            return false;
        }
        let residual = &g * &lambda - DMatrix::from_column_slice(3, 1, b.as_slice());
        residual.norm() <= 1e-9 * scale.max(1.0)
    };
    for i in 0..m {
        if fits(&[i]) {
            return true;
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            if fits(&[i, j]) {
                return true;
            }
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                if fits(&[i, j, k]) {
                    return true;
                }
            }
        }
    }
    false
}

/// Builds the feasible cone of a contact state, dropping duplicate normals
/// and normals implied by the others.
pub fn feasible_cone(contacts: &ContactModel) -> FeasibleCone {
    let mut normals: Vec<Vector3<f64>> = Vec::new();
    for n in contacts.normals.iter().chain(&contacts.semantic_normals) {
        if n.norm() <= MEMBERSHIP_TOL {
            continue;
        }
        if !normals.iter().any(|k| (k - n).norm() < DUPLICATE_TOL) {
            normals.push(*n);
        }
    }
    // An inequality n·v >= 0 is implied by the rest iff n lies in their cone.
    let mut i = 0;
    while i < normals.len() {
        let others: Vec<Vector3<f64>> = normals
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, n)| *n)
            .collect();
        if cone_contains(&others, &normals[i]) {
            normals.remove(i);
        } else {
            i += 1;
        }
    }
    FeasibleCone { normals }
}

/// Classifies a cone by its lineality and span dimensions.
///
/// The lineality space is the null space of all normals. A normal is an
/// implicit equality (holds with equality on the whole cone) iff its
/// negation lies in the cone generated by the normals; the span is the
/// null space of those.
pub fn classify(cone: &FeasibleCone) -> DisplacementType {
    let normals = &cone.normals;
    let lineality = 3 - rank(normals);
    let equalities: Vec<Vector3<f64>> = normals
        .iter()
        .filter(|n| cone_contains(normals, &(-*n)))
        .copied()
        .collect();
    let span = 3 - rank(&equalities);
    DisplacementType::from_dims(lineality, span)
        .expect("polyhedral cone dimensions are always admissible")
}

pub fn classify_contacts(contacts: &ContactModel) -> DisplacementType {
    classify(&feasible_cone(contacts))
}

/// Task identified by a translational class transition.
pub fn transition_task(
    begin: DisplacementType,
    end: DisplacementType,
    has_upright_semantic: bool,
) -> Option<TaskKind> {
    use DisplacementType::*;
    match (begin, end) {
        (HalfSpace, FullSpace) => Some(TaskKind::Ptg11),
        (FullSpace, HalfSpace) => Some(TaskKind::Ptg13),
        (FullSpace, FullSpace) if has_upright_semantic => Some(TaskKind::Stg12),
        (Line, Line) => Some(TaskKind::Ptg3),
        _ => None,
    }
}

/// Task identified by a transition of the angular-velocity cone, classified
/// with the same geometry as translation.
pub fn rotational_transition_task(begin: DisplacementType, end: DisplacementType) -> Option<TaskKind> {
    match (begin, end) {
        (DisplacementType::Line, DisplacementType::Line) => Some(TaskKind::Ptg5),
        _ => None,
    }
}

/// Applies a rotation to every normal of a contact model.
pub fn rotate_contacts(contacts: &ContactModel, r: &Matrix3<f64>) -> ContactModel {
    ContactModel {
        normals: contacts.normals.iter().map(|n| r * n).collect(),
        semantic_normals: contacts.semantic_normals.iter().map(|n| r * n).collect(),
    }
}
