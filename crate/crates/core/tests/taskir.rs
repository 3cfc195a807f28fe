use std::f64::consts::FRAC_PI_2;

use lfo_core::bundled;
use lfo_core::laban::{LabanDirection, LabanPose};
use lfo_core::pose::Pose;
use lfo_core::taskir::{
    self, GraspType, SkillParams, TaskIrError, TaskKind, TaskSequence, TaskStep,
};
use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use proptest::prelude::*;

fn parse(src: &str) -> TaskSequence {
    taskir::parse_task_sequence(src.as_bytes()).unwrap()
}

fn kinds(seq: &TaskSequence) -> Vec<TaskKind> {
    seq.steps.iter().map(|s| s.kind).collect()
}

#[test]
fn bundled_demos_have_demonstrated_kinds() {
    use TaskKind::*;
    assert_eq!(kinds(&parse(bundled::PLACE_ON_PLATE_DEMO)), [Grasp, Ptg11, Stg12, Ptg13, Release]);
    assert_eq!(
        kinds(&parse(bundled::SHELF_DEMO)),
        [Grasp, Ptg11, Stg12, Stg12, Stg12, Ptg13, Release]
    );
}

#[test]
fn first_step_must_be_grasp() {
    let src = std::fs::read_to_string(bundled::fixture_path("invalid/first_step_ptg11.demo")).unwrap();
    match taskir::parse_task_sequence(src.as_bytes()) {
        Err(TaskIrError::InvariantViolation { step, field, .. }) => {
            assert_eq!(step, Some(0));
            assert_eq!(field, "kind");
        }
        other => panic!("expected an invariant violation, got {other:?}"),
    }
}

#[test]
fn malformed_and_schema_errors() {
    assert!(matches!(
        taskir::parse_task_sequence(b"{not json"),
        Err(TaskIrError::MalformedFile(_))
    ));
    let mut v: serde_json::Value = serde_json::from_str(bundled::SHELF_DEMO).unwrap();
    v["steps"][2]["params"]["colour"] = serde_json::json!("red");
    match taskir::parse_task_sequence(v.to_string().as_bytes()) {
        Err(TaskIrError::SchemaViolation { step, field, .. }) => {
            assert_eq!(step, Some(2));
            assert!(field.contains("colour"), "{field}");
        }
        other => panic!("expected a schema violation, got {other:?}"),
    }
    let mut v: serde_json::Value = serde_json::from_str(bundled::SHELF_DEMO).unwrap();
    v["steps"][1]["params"].as_object_mut().unwrap().remove("displacement");
    assert!(matches!(
        taskir::parse_task_sequence(v.to_string().as_bytes()),
        Err(TaskIrError::SchemaViolation { step: Some(1), .. })
    ));
}

#[test]
fn unknown_direction_is_named() {
    let src = std::fs::read_to_string(bundled::fixture_path("invalid/unknown_direction.demo")).unwrap();
    let err = taskir::parse_task_sequence(src.as_bytes()).unwrap_err();
    assert!(err.to_string().contains("upward_spiral"), "{err}");
}

#[test]
fn validation_examples() {
    let shelf = taskir::read_task_sequence(bundled::SHELF_DEMO.as_bytes()).unwrap();
    assert!(taskir::validate_sequence(&shelf).is_empty());

    let mut seq = shelf.clone();
    seq.steps[0].params.approach_direction = None;
    let report = taskir::validate_sequence(&seq);
    assert_eq!(report.entries.len(), 1);
    assert_eq!(report.entries[0].field, "approach_direction");
    assert_eq!(report.entries[0].step, Some(0));

    let mut seq = shelf.clone();
    let last_place = seq.steps.iter().position(|s| s.kind == TaskKind::Ptg13).unwrap();
    seq.steps[last_place].params.surface_normal = Some(Vector3::new(0.0, 0.0, 2.0));
    let report = taskir::validate_sequence(&seq);
    assert_eq!(report.entries.len(), 1);
    assert!(report.entries[0].message.contains("unit-norm violation"));
}

#[test]
fn frame_transform_examples() {
    let mut seq = parse(bundled::PLACE_ON_PLATE_DEMO);
    seq.demo_to_robot = Pose::identity();
    assert_eq!(taskir::to_robot_frame(&seq), seq);

    let yaw = UnitQuaternion::from_euler_angles(0.0, 0.0, FRAC_PI_2);
    seq.demo_to_robot = Isometry3::from_parts(Translation3::identity(), yaw);
    seq.steps[0].params.start_hand_pose = Isometry3::translation(1.0, 0.0, 0.0);
    let out = taskir::to_robot_frame(&seq);
    let p = out.steps[0].params.start_hand_pose.translation.vector;
    assert!((p - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-12);

    seq.demo_to_robot = Isometry3::translation(0.3, -0.2, 0.1);
    seq.steps[1].params.displacement = Vector3::new(0.0, 0.0, 0.1);
    let out = taskir::to_robot_frame(&seq);
    assert_eq!(out.steps[1].params.displacement, Vector3::new(0.0, 0.0, 0.1));
    assert_eq!(out.demo_to_robot, Pose::identity());
}

fn finite() -> impl Strategy<Value = f64> {
    -2.0f64..2.0
}

fn arb_vec() -> impl Strategy<Value = Vector3<f64>> {
    (finite(), finite(), finite()).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn arb_unit() -> impl Strategy<Value = Vector3<f64>> {
    arb_vec()
        .prop_filter("non-zero", |v| v.norm() > 1e-3)
        .prop_map(|v| v.normalize())
}

fn arb_pose() -> impl Strategy<Value = Pose> {
    (arb_vec(), -3.0f64..3.0, -1.5f64..1.5, -3.0f64..3.0).prop_map(|(p, r, pi, y)| {
        Isometry3::from_parts(Translation3::from(p), UnitQuaternion::from_euler_angles(r, pi, y))
    })
}

fn arb_direction() -> impl Strategy<Value = LabanDirection> {
    (0usize..26).prop_map(|i| LabanDirection::from_index(i).unwrap())
}

fn arb_laban() -> impl Strategy<Value = LabanPose> {
    (arb_direction(), arb_direction()).prop_map(|(u, l)| LabanPose { upper_arm: u, lower_arm: l })
}

fn arb_step(kind: TaskKind) -> impl Strategy<Value = TaskStep> {
    (
        arb_pose(),
        arb_pose(),
        arb_vec(),
        prop::collection::vec(arb_pose(), 0..3),
        arb_laban(),
        arb_laban(),
        prop::sample::select(vec![GraspType::PassiveForce, GraspType::ActiveForce, GraspType::Lazy]),
        arb_unit(),
        arb_unit(),
        "[a-z ,.]{0,20}",
    )
        .prop_map(move |(s, e, d, mut via, ls, le, g, u1, u2, utterance)| {
            use TaskKind::*;
            if kind == Ptg5 && via.is_empty() {
                via.push(s);
            }
            TaskStep {
                kind,
                utterance,
                params: SkillParams {
                    start_hand_pose: s,
                    end_hand_pose: e,
                    displacement: d,
                    via_points: via,
                    laban_start: ls,
                    laban_end: le,
                    grasp_type: (kind == Grasp).then_some(g),
                    approach_direction: (kind == Grasp).then_some(u1),
                    surface_normal: matches!(kind, Ptg13 | Ptg5).then_some(u2),
                    object_upright_axis: (kind == Stg12).then_some(u1),
                },
            }
        })
}

fn arb_sequence() -> impl Strategy<Value = TaskSequence> {
    use TaskKind::*;
    let middle = prop::collection::vec(
        prop::sample::select(vec![Ptg3, Ptg5, Ptg11, Stg12, Ptg13]),
        0..4,
    );
    (middle, arb_pose())
        .prop_flat_map(|(middle, frame)| {
            let mut kinds = vec![Grasp];
            kinds.extend(middle);
            kinds.push(Release);
            let steps: Vec<_> = kinds.into_iter().map(arb_step).collect();
            (steps, Just(frame))
        })
        .prop_map(|(steps, demo_to_robot)| TaskSequence { steps, demo_to_robot })
}

fn positions(seq: &TaskSequence) -> Vec<Vector3<f64>> {
    seq.steps
        .iter()
        .flat_map(|s| {
            let p = &s.params;
            [p.start_hand_pose, p.end_hand_pose]
                .into_iter()
                .chain(p.via_points.iter().copied())
                .map(|x| x.translation.vector)
        })
        .collect()
}

fn vector_norms(seq: &TaskSequence) -> Vec<f64> {
    seq.steps
        .iter()
        .flat_map(|s| {
            let p = &s.params;
            [Some(p.displacement), p.approach_direction, p.surface_normal, p.object_upright_axis]
                .into_iter()
                .flatten()
                .map(|v| v.norm())
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_then_parse_is_identity(seq in arb_sequence()) {
        prop_assert!(taskir::validate_sequence(&seq).is_empty());
        let text = taskir::serialize_task_sequence(&seq);
        let back = taskir::parse_task_sequence(text.as_bytes()).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn robot_frame_is_idempotent(seq in arb_sequence()) {
        let once = taskir::to_robot_frame(&seq);
        prop_assert_eq!(taskir::to_robot_frame(&once), once);
    }

    #[test]
    fn robot_frame_is_rigid(seq in arb_sequence()) {
        let out = taskir::to_robot_frame(&seq);
        let (a, b) = (positions(&seq), positions(&out));
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                prop_assert!(((a[i] - a[j]).norm() - (b[i] - b[j]).norm()).abs() < 1e-9);
            }
        }
        for (x, y) in vector_norms(&seq).iter().zip(vector_norms(&out)) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}
