//! Command-line front end: `execute`, `validate`, and `classify`.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::executor::{self, Environment, ExecError, ExecOptions, Trajectory};
use crate::kinematics::RobotModel;
use crate::laban::ConstraintStrength;
use crate::pose::{self, PoseDoc};
use crate::taskir::{self, TaskIrError};
use crate::taxonomy::{self, ContactModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_IK_FAILURE: i32 = 2;
pub const EXIT_NO_HIT: i32 = 3;

/// Default clearance margin for obstacle checks (m).
pub const DEFAULT_MARGIN: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "lfo", version, about = "Replay demonstrated task sequences on robot models")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a demonstration on a robot model and write the trace.
    Execute(ExecuteArgs),
    /// Check a demonstration file against the task-sequence rules.
    Validate(ValidateArgs),
    /// Classify contact normals read as JSON from standard input.
    Classify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ExecuteArgs {
    #[arg(long)]
    pub robot: PathBuf,
    #[arg(long)]
    pub demo: PathBuf,
    #[arg(long)]
    pub env: PathBuf,
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: TraceFormat,
    /// Seconds between trace samples.
    #[arg(long)]
    pub control_period: Option<f64>,
    /// none, elbow, or full; defaults to the model's own strength.
    #[arg(long)]
    pub laban_strength: Option<ConstraintStrength>,
    /// Obstacle clearance margin in meters.
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub demo: PathBuf,
}

/// Writers for the summary and for diagnostics.
pub struct Io<'a> {
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

pub fn run(cfg: &CliConfig, io: &mut Io<'_>) -> i32 {
    match &cfg.command {
        Command::Execute(args) => cmd_execute(args, io),
        Command::Validate(args) => cmd_validate(args, io),
        Command::Classify => cmd_classify(io),
    }
}

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn fail(io: &mut Io<'_>, message: impl std::fmt::Display) -> i32 {
    let _ = writeln!(io.stderr, "error: {message}");
    EXIT_FAILURE
}

/// Exit code for an execution error.
pub fn exit_code(err: &ExecError) -> i32 {
    match err {
        ExecError::IkFailure { .. } => EXIT_IK_FAILURE,
        ExecError::NoHitWithinTravel { .. } => EXIT_NO_HIT,
        _ => EXIT_FAILURE,
    }
}

pub fn cmd_execute(args: &ExecuteArgs, io: &mut Io<'_>) -> i32 {
    let loaded = (|| {
        let robot_src = read_file(&args.robot)?;
        let demo_src = read_file(&args.demo)?;
        let env_src = read_file(&args.env)?;
        let model = RobotModel::from_json(&robot_src)
            .map_err(|e| format!("{}: {e}", args.robot.display()))?;
        let seq = taskir::parse_task_sequence(demo_src.as_bytes())
            .map_err(|e| format!("{}: {e}", args.demo.display()))?;
        let env = Environment::from_json(&env_src)
            .map_err(|e| format!("{}: {e}", args.env.display()))?;
        Ok::<_, String>((model, seq, env))
    })();
    let (model, seq, env) = match loaded {
        Ok(v) => v,
        Err(e) => return fail(io, e),
    };

    let mut opts = ExecOptions { laban_strength: args.laban_strength, ..Default::default() };
    if let Some(dt) = args.control_period {
        opts.control_period = dt;
    }
    let seq = taskir::to_robot_frame(&seq);
    let (traj, report) = match executor::execute(&model, &seq, &env, &opts) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {}: {e}", args.demo.display());
            return exit_code(&e);
        }
    };

    let body = match args.format {
        TraceFormat::Json => Ok(traj.to_json()),
        TraceFormat::Csv => traj.to_csv().map_err(|e| e.to_string()),
    };
    if let Err(e) = body.and_then(|b| {
        std::fs::write(&args.trace, b).map_err(|e| format!("{}: {e}", args.trace.display()))
    }) {
        return fail(io, e);
    }

    let violations = executor::check_clearance(&traj, &env, args.margin);
    let _ = io.stdout.write_all(summary(&model, &traj, &report, violations.len(), args).as_bytes());
    for v in &violations {
        let _ = writeln!(
            io.stderr,
            "warning: sample {} inside obstacle `{}` (margin {} m)",
            v.sample, v.obstacle, args.margin
        );
    }
    EXIT_OK
}

fn summary(
    model: &RobotModel,
    traj: &Trajectory,
    report: &executor::ExecutionReport,
    violations: usize,
    args: &ExecuteArgs,
) -> String {
    let mut s = String::new();
    let kinds: Vec<&str> = report.steps.iter().map(|st| st.kind.as_str()).collect();
    let _ = writeln!(s, "robot: {} ({} joints, laban strength {})", model.name(), model.dof(), report.strength);
    let _ = writeln!(s, "tasks: {}", kinds.join(","));
    for st in &report.steps {
        let _ = writeln!(
            s,
            "  [{}] {:<7} waypoints {:>3}  ik solves {:>3}  iterations {:>4}  max pos err {:.2e} m  max rot err {:.2e} rad{}",
            st.task_index,
            st.kind.as_str(),
            st.waypoints,
            st.ik_solves,
            st.ik_iterations,
            st.max_pos_err,
            st.max_rot_err,
            if st.laban_relaxed { "  (laban relaxed)" } else { "" },
        );
    }
    let _ = writeln!(s, "ik iterations: {}", report.total_ik_iterations());
    let events: Vec<String> = report
        .events
        .iter()
        .map(|e| format!("{}@{} (task {})", e.name, e.sample, e.task_index))
        .collect();
    let _ = writeln!(s, "events: {}", events.join(", "));
    for obj in &report.final_objects {
        let d = PoseDoc::from_pose(&obj.pose);
        let _ = writeln!(
            s,
            "object {}: position [{:.4}, {:.4}, {:.4}] quaternion [{:.4}, {:.4}, {:.4}, {:.4}]",
            obj.name,
            d.position[0],
            d.position[1],
            d.position[2],
            d.quaternion[0],
            d.quaternion[1],
            d.quaternion[2],
            d.quaternion[3],
        );
    }
    let duration = traj.samples.last().map_or(0.0, |x| x.t);
    let _ = writeln!(s, "samples: {} ({duration:.2} s)", traj.len());
    let _ = writeln!(s, "clearance violations (margin {} m): {violations}", args.margin);
    let _ = writeln!(s, "trace: {}", args.trace.display());
    s
}

pub fn cmd_validate(args: &ValidateArgs, io: &mut Io<'_>) -> i32 {
    let src = match read_file(&args.demo) {
        Ok(s) => s,
        Err(e) => return fail(io, e),
    };
    let seq = match taskir::read_task_sequence(src.as_bytes()) {
        Ok(seq) => seq,
        Err(e @ (TaskIrError::MalformedFile(_)
        | TaskIrError::SchemaViolation { .. }
        | TaskIrError::InvariantViolation { .. })) => {
            return fail(io, format!("{}: {e}", args.demo.display()))
        }
    };
    let report = taskir::validate_sequence(&seq);
    if report.is_empty() {
        let _ = writeln!(io.stdout, "{}: valid ({} steps)", args.demo.display(), seq.steps.len());
        return EXIT_OK;
    }
    for entry in &report.entries {
        let _ = writeln!(io.stdout, "{entry}");
    }
    EXIT_FAILURE
}

pub fn cmd_classify(io: &mut Io<'_>) -> i32 {
    let mut input = String::new();
    if let Err(e) = io.stdin.read_to_string(&mut input) {
        return fail(io, format!("standard input: {e}"));
    }
    let normals: Vec<[f64; 3]> = match serde_json::from_str(&input) {
        Ok(n) => n,
        Err(e) => return fail(io, format!("expected a JSON list of 3-vectors: {e}")),
    };
    let normals: Vec<_> = normals.into_iter().map(pose::vec3).collect();
    if let Some(i) = normals.iter().position(|n| !pose::is_unit(n)) {
        return fail(io, format!("normal {i} is not unit length (norm {})", normals[i].norm()));
    }
    let class = taxonomy::classify_contacts(&ContactModel::physical(normals));
    let _ = writeln!(io.stdout, "{class}");
    EXIT_OK
}
