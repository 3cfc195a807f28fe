use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use lfo_core::bundled::fixture_path;
use lfo_core::executor::Trajectory;

fn lfo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfo")).args(args).output().unwrap()
}

fn classify(input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_lfo"))
        .arg("classify")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn fixture(name: &str) -> String {
    fixture_path(name).display().to_string()
}

fn execute(robot: &str, env: &str, trace: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "execute".to_string(),
        "--robot".into(),
        fixture(robot),
        "--demo".into(),
        fixture("place_on_plate.demo"),
        "--env".into(),
        env.to_string(),
        "--trace".into(),
        trace.display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    lfo(&args)
}

#[test]
fn execute_place_on_plate() {
    let dir = tempfile::tempdir().unwrap();
    let mut summaries = Vec::new();
    for robot in ["nextage_like.robot", "fetch_like.robot"] {
        let trace = dir.path().join(format!("{robot}.json"));
        let out = execute(robot, &fixture("table_plate.env"), &trace, &[]);
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
        let stdout = text(&out.stdout);
        let tasks = stdout.lines().find(|l| l.starts_with("tasks:")).unwrap().to_string();
        assert_eq!(tasks, "tasks: Grasp,PTG11,STG12,PTG13,Release");
        assert!(stdout.contains("hit_detected"));
        assert!(stdout.contains("object box"));
        let traj = Trajectory::from_json(&std::fs::read_to_string(&trace).unwrap()).unwrap();
        assert!(!traj.is_empty());
        summaries.push(tasks);
    }
    assert_eq!(summaries[0], summaries[1]);
}

#[test]
fn csv_trace_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = execute("fetch_like.robot", &fixture("table_plate.env"), &trace, &["--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let src = std::fs::read_to_string(&trace).unwrap();
    assert!(src.starts_with("t,q0,q1,q2,q3,q4,q5,q6,q7,px,py,pz,qw,qx,qy,qz,effort,task_index,event"));
    assert!(Trajectory::from_csv(&src).unwrap().len() > 10);
}

#[test]
fn missing_env_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.env").display().to_string();
    let out = execute("nextage_like.robot", &missing, &dir.path().join("t.json"), &[]);
    assert_ne!(out.status.code(), Some(0));
    assert!(text(&out.stderr).contains(&missing), "{}", text(&out.stderr));
}

#[test]
fn missing_surface_exits_with_no_hit_code() {
    let dir = tempfile::tempdir().unwrap();
    let bare = dir.path().join("bare.env");
    std::fs::write(&bare, r#"{"support_planes": [], "obstacles": [], "objects": []}"#).unwrap();
    let out = execute("fetch_like.robot", &bare.display().to_string(), &dir.path().join("t.json"), &[]);
    assert_eq!(out.status.code(), Some(3), "{}", text(&out.stderr));
}

#[test]
fn validate_examples() {
    let out = lfo(&["validate", "--demo", &fixture("shelf.demo")]);
    assert_eq!(out.status.code(), Some(0));

    let out = lfo(&["validate", "--demo", &fixture("invalid/first_step_ptg11.demo")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(text(&out.stdout).lines().count(), 1, "{}", text(&out.stdout));

    let out = lfo(&["validate", "--demo", &fixture("invalid/unknown_direction.demo")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("upward_spiral"), "{}", text(&out.stderr));
}

#[test]
fn classify_examples() {
    for (input, want) in [
        ("[[0,0,1]]", "HalfSpace (2,3)"),
        ("[]", "FullSpace (3,3)"),
        ("[[0,0,1],[0,0,-1],[1,0,0],[-1,0,0]]", "Line (1,1)"),
    ] {
        let out = classify(input);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(text(&out.stdout).trim(), want);
    }
    assert_eq!(classify("[[0,0,2]]").status.code(), Some(1));
    assert_eq!(classify("not json").status.code(), Some(1));
}
