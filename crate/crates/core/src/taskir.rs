//! Robot-agnostic task sequences recovered from a demonstration.
//!
//! A sequence always opens with a grasp, manipulates the held object through
//! one or more manipulation tasks, and ends with a release. Poses are stored
//! in the demonstration frame together with the transform into the robot
//! base frame; [`to_robot_frame`] applies it.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::laban::LabanPose;
use crate::pose::{self, Pose, PoseDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskKind {
    Grasp,
    Release,
    /// Open or close a drawer.
    Ptg3,
    /// Open or close a revolute door.
    Ptg5,
    /// Pick up.
    Ptg11,
    /// Bring, keeping the object upright.
    Stg12,
    /// Place with force-feedback landing.
    Ptg13,
}

impl TaskKind {
    pub const ALL: [TaskKind; 7] = [
        Self::Grasp,
        Self::Release,
        Self::Ptg3,
        Self::Ptg5,
        Self::Ptg11,
        Self::Stg12,
        Self::Ptg13,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Grasp => "Grasp",
            Self::Release => "Release",
            Self::Ptg3 => "PTG3",
            Self::Ptg5 => "PTG5",
            Self::Ptg11 => "PTG11",
            Self::Stg12 => "STG12",
            Self::Ptg13 => "PTG13",
        }
    }

    pub fn is_manipulation(self) -> bool {
        !matches!(self, Self::Grasp | Self::Release)
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown task kind `{s}`"))
    }
}

impl Serialize for TaskKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for TaskKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspType {
    PassiveForce,
    ActiveForce,
    Lazy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkillParams {
    pub start_hand_pose: Pose,
    pub end_hand_pose: Pose,
    pub displacement: Vector3<f64>,
    pub via_points: Vec<Pose>,
    pub laban_start: LabanPose,
    pub laban_end: LabanPose,
    pub grasp_type: Option<GraspType>,
    pub approach_direction: Option<Vector3<f64>>,
    pub surface_normal: Option<Vector3<f64>>,
    pub object_upright_axis: Option<Vector3<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskStep {
    pub kind: TaskKind,
    pub params: SkillParams,
    /// Spoken explanation captured with the demonstration; never interpreted.
    pub utterance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSequence {
    pub steps: Vec<TaskStep>,
    /// Maps demonstration-frame coordinates into the robot base frame.
    pub demo_to_robot: Pose,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TaskIrError {
    #[error("malformed demonstration file: {0}")]
    MalformedFile(String),
    #[error("schema violation at {}: {message}", location(*.step, field))]
    SchemaViolation { step: Option<usize>, field: String, message: String },
    #[error("invariant violation at {}: {message}", location(*.step, field))]
    InvariantViolation { step: Option<usize>, field: String, message: String },
}

fn location(step: Option<usize>, field: &str) -> String {
    match step {
        Some(i) => format!("step {i}, field `{field}`"),
        None => format!("field `{field}`"),
    }
}

/// One broken invariant found by [`validate_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationEntry {
    pub step: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", location(self.step, &self.field), self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub entries: Vec<ValidationEntry>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn push(&mut self, step: Option<usize>, field: &str, message: impl Into<String>) {
        self.entries.push(ValidationEntry {
            step,
            field: field.to_string(),
            message: message.into(),
        });
    }
}

const STEP_KEYS: &[&str] = &["kind", "utterance", "params"];
const PARAM_KEYS: &[&str] = &[
    "start_pose",
    "end_pose",
    "displacement",
    "via_points",
    "laban_start",
    "laban_end",
    "grasp_type",
    "approach_direction",
    "surface_normal",
    "object_upright_axis",
];
const REQUIRED_PARAM_KEYS: &[&str] = &[
    "start_pose",
    "end_pose",
    "displacement",
    "via_points",
    "laban_start",
    "laban_end",
];

struct Fields<'a> {
    obj: &'a Map<String, Value>,
    step: Option<usize>,
    prefix: &'a str,
}

impl<'a> Fields<'a> {
    fn new(
        value: &'a Value,
        step: Option<usize>,
        prefix: &'a str,
        allowed: &[&str],
        required: &[&str],
    ) -> Result<Self, TaskIrError> {
        let obj = value.as_object().ok_or_else(|| TaskIrError::SchemaViolation {
            step,
            field: prefix.trim_end_matches('.').to_string(),
            message: "expected an object".into(),
        })?;
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(TaskIrError::SchemaViolation {
                    step,
                    field: format!("{prefix}{key}"),
                    message: "unknown field".into(),
                });
            }
        }
        for key in required {
            if !obj.contains_key(*key) {
                return Err(TaskIrError::SchemaViolation {
                    step,
                    field: format!("{prefix}{key}"),
                    message: "missing field".into(),
                });
            }
        }
        Ok(Self { obj, step, prefix })
    }

    fn get<T: serde::de::DeserializeOwned>(&self, key: &str) -> Result<Option<T>, TaskIrError> {
        match self.obj.get(key) {
            None => Ok(None),
            Some(Value::Null) => Err(self.schema(key, "null is not allowed; omit the field".into())),
            Some(v) => T::deserialize(v)
                .map(Some)
                .map_err(|e| self.schema(key, e.to_string())),
        }
    }

    fn require<T: serde::de::DeserializeOwned>(&self, key: &str) -> Result<T, TaskIrError> {
        self.get(key)?
            .ok_or_else(|| self.schema(key, "missing field".into()))
    }

    fn pose(&self, key: &str, doc: PoseDoc) -> Result<Pose, TaskIrError> {
        doc.to_pose().map_err(|e| self.schema(key, e.to_string()))
    }

    fn schema(&self, key: &str, message: String) -> TaskIrError {
        TaskIrError::SchemaViolation {
            step: self.step,
            field: format!("{}{key}", self.prefix),
            message,
        }
    }
}

/// Parses a demonstration file without checking sequence invariants.
pub fn read_task_sequence(source: &[u8]) -> Result<TaskSequence, TaskIrError> {
    let text = std::str::from_utf8(source)
        .map_err(|e| TaskIrError::MalformedFile(format!("not UTF-8: {e}")))?;
    let root: Value =
        serde_json::from_str(text).map_err(|e| TaskIrError::MalformedFile(e.to_string()))?;
    let top = Fields::new(&root, None, "", &["frame_transform", "steps"], &["frame_transform", "steps"])?;
    let frame: PoseDoc = top.require("frame_transform")?;
    let demo_to_robot = top.pose("frame_transform", frame)?;
    let raw_steps: Vec<Value> = top.require("steps")?;

    let mut steps = Vec::with_capacity(raw_steps.len());
    for (i, raw) in raw_steps.iter().enumerate() {
        let step = Fields::new(raw, Some(i), "", STEP_KEYS, &["kind", "params"])?;
        let kind: TaskKind = step.require("kind")?;
        let utterance: String = step.get("utterance")?.unwrap_or_default();
        let raw_params = &raw["params"];
        let p = Fields::new(raw_params, Some(i), "params.", PARAM_KEYS, REQUIRED_PARAM_KEYS)?;

        let start_hand_pose = p.pose("start_pose", p.require("start_pose")?)?;
        let end_hand_pose = p.pose("end_pose", p.require("end_pose")?)?;
        let via_docs: Vec<PoseDoc> = p.require("via_points")?;
        let via_points = via_docs
            .iter()
            .map(|d| p.pose("via_points", *d))
            .collect::<Result<Vec<_>, _>>()?;
        let vector = |key: &str| -> Result<Option<Vector3<f64>>, TaskIrError> {
            Ok(p.get::<[f64; 3]>(key)?.map(pose::vec3))
        };
        let params = SkillParams {
            start_hand_pose,
            end_hand_pose,
            displacement: pose::vec3(p.require("displacement")?),
            via_points,
            laban_start: p.require("laban_start")?,
            laban_end: p.require("laban_end")?,
            grasp_type: p.get("grasp_type")?,
            approach_direction: vector("approach_direction")?,
            surface_normal: vector("surface_normal")?,
            object_upright_axis: vector("object_upright_axis")?,
        };
        steps.push(TaskStep { kind, params, utterance });
    }
    Ok(TaskSequence { steps, demo_to_robot })
}

/// Parses and validates a demonstration file.
pub fn parse_task_sequence(source: &[u8]) -> Result<TaskSequence, TaskIrError> {
    let seq = read_task_sequence(source)?;
    let report = validate_sequence(&seq);
    match report.entries.into_iter().next() {
        None => Ok(seq),
        Some(e) => Err(TaskIrError::InvariantViolation {
            step: e.step,
            field: e.field,
            message: e.message,
        }),
    }
}

#[derive(Serialize)]
struct ParamsOut {
    start_pose: PoseDoc,
    end_pose: PoseDoc,
    displacement: [f64; 3],
    via_points: Vec<PoseDoc>,
    laban_start: LabanPose,
    laban_end: LabanPose,
    #[serde(skip_serializing_if = "Option::is_none")]
    grasp_type: Option<GraspType>,
    #[serde(skip_serializing_if = "Option::is_none")]
    approach_direction: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    surface_normal: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    object_upright_axis: Option<[f64; 3]>,
}

#[derive(Serialize)]
struct StepOut {
    kind: TaskKind,
    utterance: String,
    params: ParamsOut,
}

#[derive(Serialize)]
struct SequenceOut {
    frame_transform: PoseDoc,
    steps: Vec<StepOut>,
}

/// Serializes a sequence in the demonstration-file format.
pub fn serialize_task_sequence(seq: &TaskSequence) -> String {
    let out = SequenceOut {
        frame_transform: PoseDoc::from_pose(&seq.demo_to_robot),
        steps: seq
            .steps
            .iter()
            .map(|s| {
                let p = &s.params;
                StepOut {
                    kind: s.kind,
                    utterance: s.utterance.clone(),
                    params: ParamsOut {
                        start_pose: PoseDoc::from_pose(&p.start_hand_pose),
                        end_pose: PoseDoc::from_pose(&p.end_hand_pose),
                        displacement: pose::arr3(&p.displacement),
                        via_points: p.via_points.iter().map(PoseDoc::from_pose).collect(),
                        laban_start: p.laban_start,
                        laban_end: p.laban_end,
                        grasp_type: p.grasp_type,
                        approach_direction: p.approach_direction.as_ref().map(pose::arr3),
                        surface_normal: p.surface_normal.as_ref().map(pose::arr3),
                        object_upright_axis: p.object_upright_axis.as_ref().map(pose::arr3),
                    },
                }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&out).expect("task sequence serializes")
}

/// Checks ordering, parameter presence, and unit-norm rules. An empty report
/// means the sequence is valid.
pub fn validate_sequence(seq: &TaskSequence) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = seq.steps.len();
    if n < 2 {
        report.push(None, "steps", format!("a sequence needs at least a Grasp and a Release, got {n} step(s)"));
    }
    for (i, step) in seq.steps.iter().enumerate() {
        let kind = step.kind;
        if i == 0 && kind != TaskKind::Grasp {
            report.push(Some(i), "kind", format!("first step must be Grasp, found {kind}"));
        } else if i + 1 == n && n > 1 && kind != TaskKind::Release {
            report.push(Some(i), "kind", format!("last step must be Release, found {kind}"));
        } else if i > 0 && i + 1 < n && !kind.is_manipulation() {
            report.push(
                Some(i),
                "kind",
                format!("{kind} is not allowed between the opening Grasp and the closing Release"),
            );
        }

        let p = &step.params;
        let is_grasp = kind == TaskKind::Grasp;
        let presence = [
            ("grasp_type", p.grasp_type.is_some(), is_grasp, is_grasp),
            ("approach_direction", p.approach_direction.is_some(), is_grasp, is_grasp),
            (
                "surface_normal",
                p.surface_normal.is_some(),
                matches!(kind, TaskKind::Ptg13 | TaskKind::Ptg5),
                matches!(kind, TaskKind::Ptg13 | TaskKind::Ptg5),
            ),
            ("object_upright_axis", p.object_upright_axis.is_some(), kind == TaskKind::Stg12, true),
        ];
        for (field, present, required, allowed) in presence {
            if required && !present {
                report.push(Some(i), field, format!("required for {kind}"));
            } else if present && !allowed {
                report.push(Some(i), field, format!("not allowed for {kind}"));
            }
        }
        if kind == TaskKind::Ptg5 && p.via_points.is_empty() {
            report.push(Some(i), "via_points", "PTG5 needs one via point on the hinge axis");
        }

        for (field, v) in [
            ("approach_direction", p.approach_direction),
            ("surface_normal", p.surface_normal),
            ("object_upright_axis", p.object_upright_axis),
        ] {
            if let Some(v) = v {
                if !pose::is_unit(&v) {
                    report.push(Some(i), field, format!("unit-norm violation (norm {})", v.norm()));
                }
            }
        }
        if !p.displacement.iter().all(|x| x.is_finite()) {
            report.push(Some(i), "displacement", "non-finite component");
        }
    }
    report
}

/// Expresses every pose and direction in the robot base frame. Positions
/// take the full rigid transform; displacements and direction vectors only
/// rotate. The returned sequence carries the identity transform.
pub fn to_robot_frame(seq: &TaskSequence) -> TaskSequence {
    let t = seq.demo_to_robot;
    let r = t.rotation;
    let steps = seq
        .steps
        .iter()
        .map(|s| {
            let p = &s.params;
            TaskStep {
                kind: s.kind,
                utterance: s.utterance.clone(),
                params: SkillParams {
                    start_hand_pose: t * p.start_hand_pose,
                    end_hand_pose: t * p.end_hand_pose,
                    displacement: r * p.displacement,
                    via_points: p.via_points.iter().map(|v| t * v).collect(),
                    laban_start: p.laban_start,
                    laban_end: p.laban_end,
                    grasp_type: p.grasp_type,
                    approach_direction: p.approach_direction.map(|v| r * v),
                    surface_normal: p.surface_normal.map(|v| r * v),
                    object_upright_axis: p.object_upright_axis.map(|v| r * v),
                },
            }
        })
        .collect();
    TaskSequence {
        steps,
        demo_to_robot: Pose::identity(),
    }
}
