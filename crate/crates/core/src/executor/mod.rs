//! Runs a task sequence on a robot model in a kinematic environment.
//!
//! For every task the executor asks the skill for hand targets, converts
//! each target to joints with the IK solver, and connects consecutive
//! solutions by linear joint-space interpolation at the control period,
//! slowed so no joint exceeds the speed limit. Placing runs closed loop
//! against the simulated finger effort.

mod env;
mod trace;

pub use env::{
    simulate_effort, EnvObject, Environment, EnvironmentError, Obstacle, Rect, SupportPlane,
    EFFORT_CONTACT,
};
pub use trace::{Sample, TraceError, Trajectory};

use nalgebra::Vector3;

use crate::kinematics::{
    initial_posture, solve_ik, IkOptions, IkSolution, Interval, KinematicsError, RobotModel,
};
use crate::laban::{self, ConstraintStrength, LabanPose};
use crate::pose::Pose;
use crate::skills::{self, HandTarget, SkillError, SkillState};
use crate::taskir::{TaskKind, TaskSequence};

pub const LABAN_RELAXED_EVENT: &str = "laban_relaxed";
pub const GRASPED_EVENT: &str = "grasped";
pub const RELEASED_EVENT: &str = "released";

/// Objects farther than this from the closed hand are not picked up (m).
const GRASP_REACH: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct ExecOptions {
    /// Seconds between samples.
    pub control_period: f64,
    /// Per-joint speed limit (rad/s or m/s).
    pub joint_speed_limit: f64,
    /// Overrides the model's default constraint strength.
    pub laban_strength: Option<ConstraintStrength>,
    pub ik: IkOptions,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self {
            control_period: 0.01,
            joint_speed_limit: 1.0,
            laban_strength: None,
            ik: IkOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("task sequence is not in the robot frame; apply to_robot_frame first")]
    NotInRobotFrame,
    #[error("task {task_index}: sequence must start with a grasp")]
    MissingGrasp { task_index: usize },
    #[error("IK failed at task {task_index}, waypoint {waypoint_index} (position error {pos_err:.4} m, orientation error {rot_err:.4} rad)")]
    IkFailure { task_index: usize, waypoint_index: usize, pos_err: f64, rot_err: f64 },
    #[error("task {task_index}: no touchdown within {travel} m ({steps} descent steps)")]
    NoHitWithinTravel { task_index: usize, steps: usize, travel: f64 },
    #[error("sample {sample}: joint {joint} value {value} outside its hard limits")]
    JointLimitViolation { sample: usize, joint: usize, value: f64 },
    #[error("task {task_index}: {source}")]
    Skill { task_index: usize, source: SkillError },
    #[error("task {task_index}: {source}")]
    Kinematics { task_index: usize, source: KinematicsError },
}

/// IK statistics and outcome of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub task_index: usize,
    pub kind: TaskKind,
    pub waypoints: usize,
    pub ik_solves: usize,
    pub ik_iterations: usize,
    pub max_pos_err: f64,
    pub max_rot_err: f64,
    /// Whether the Labanotation bounds had to be dropped for this task.
    pub laban_relaxed: bool,
    /// Landing descent steps commanded (placing only).
    pub descent_steps: Option<usize>,
    pub first_sample: usize,
    pub last_sample: usize,
}

/// A sample at which the hand was commanded to a skill waypoint.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointSample {
    pub sample: usize,
    pub task_index: usize,
    pub target: Pose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub sample: usize,
    pub task_index: usize,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionReport {
    pub robot: String,
    pub strength: ConstraintStrength,
    pub steps: Vec<StepReport>,
    pub events: Vec<Event>,
    pub waypoint_samples: Vec<WaypointSample>,
    /// Name of the object picked up by the grasp, if any.
    pub grasped_object: Option<String>,
    /// Object poses after the last task.
    pub final_objects: Vec<EnvObject>,
    /// Configuration chosen as the sequence's initial posture.
    pub initial_q: Vec<f64>,
}

impl ExecutionReport {
    pub fn task_kinds(&self) -> Vec<TaskKind> {
        self.steps.iter().map(|s| s.kind).collect()
    }

    pub fn event_count(&self, name: &str) -> usize {
        self.events.iter().filter(|e| e.name == name).count()
    }

    pub fn final_object(&self, name: &str) -> Option<&EnvObject> {
        self.final_objects.iter().find(|o| o.name == name)
    }

    pub fn total_ik_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.ik_iterations).sum()
    }
}

struct Held {
    object: usize,
    /// Object pose in the hand frame.
    in_hand: Pose,
}

struct Runner<'a> {
    model: &'a RobotModel,
    opts: &'a ExecOptions,
    env: Environment,
    hard: Vec<Interval>,
    q: Vec<f64>,
    hand: HandTarget,
    held: Option<Held>,
    traj: Trajectory,
    events: Vec<Event>,
    waypoint_samples: Vec<WaypointSample>,
    grasped_object: Option<String>,
}

impl<'a> Runner<'a> {
    fn held_object(&self) -> Option<&EnvObject> {
        self.held.as_ref().map(|h| &self.env.objects[h.object])
    }

    fn push_sample(&mut self, q: Vec<f64>, aperture: f64, task_index: usize) -> Result<(), ExecError> {
        let index = self.traj.samples.len();
        for (j, (v, b)) in q.iter().zip(&self.hard).enumerate() {
            if !b.contains(*v) {
                return Err(ExecError::JointLimitViolation { sample: index, joint: j, value: *v });
            }
        }
        let ee_pose = self.model.fk_unchecked(&q);
        if let Some(h) = &self.held {
            self.env.objects[h.object].pose = ee_pose * h.in_hand;
        }
        let effort = simulate_effort(&self.env, &HandTarget::new(ee_pose, aperture), self.held_object());
        self.traj.samples.push(Sample {
            t: index as f64 * self.opts.control_period,
            q: q.clone(),
            ee_pose,
            effort,
            aperture,
            task_index,
            event: None,
        });
        self.q = q;
        Ok(())
    }

    /// Linear joint-space move, time-scaled so every joint respects the
    /// speed limit. The last sample is exactly `target`.
    fn move_to(&mut self, target: &[f64], aperture: f64, task_index: usize) -> Result<(), ExecError> {
        let start = self.q.clone();
        let start_aperture = self.hand.aperture;
        let largest = start
            .iter()
            .zip(target)
            .map(|(a, b)| (b - a).abs())
            .fold(0.0, f64::max);
        if largest == 0.0 && aperture == start_aperture {
            return Ok(());
        }
        let per_step = self.opts.joint_speed_limit * self.opts.control_period;
        let n = ((largest / per_step).ceil() as usize).max(1);
        for i in 1..=n {
            let s = i as f64 / n as f64;
            let (q, a) = if i == n {
                (target.to_vec(), aperture)
            } else {
                (
                    start.iter().zip(target).map(|(a, b)| a + (b - a) * s).collect(),
                    start_aperture + (aperture - start_aperture) * s,
                )
            };
            self.push_sample(q, a, task_index)?;
        }
        Ok(())
    }

    fn mark(&mut self, name: &str, task_index: usize) -> Result<(), ExecError> {
        let occupied = self.traj.samples.last().is_none_or(|s| s.event.is_some());
        if occupied {
            let (q, a) = (self.q.clone(), self.hand.aperture);
            self.push_sample(q, a, task_index)?;
        }
        let sample = self.traj.samples.len() - 1;
        self.traj.samples[sample].event = Some(name.to_string());
        self.events.push(Event { sample, task_index, name: name.to_string() });
        Ok(())
    }

    fn solve(
        &self,
        target: &Pose,
        task_index: usize,
        waypoint_index: usize,
        stats: &mut StepReport,
    ) -> Result<IkSolution, ExecError> {
        let sol = solve_ik(self.model, target, &self.q, &self.hard, &self.opts.ik).map_err(|e| match e {
            KinematicsError::NoConvergence { pos_err, rot_err, .. } => {
                ExecError::IkFailure { task_index, waypoint_index, pos_err, rot_err }
            }
            other => ExecError::Kinematics { task_index, source: other },
        })?;
        record(stats, &sol);
        Ok(sol)
    }

    /// Drives the hand through `targets`, which start at the current hand.
    fn follow(
        &mut self,
        targets: &[HandTarget],
        task_index: usize,
        stats: &mut StepReport,
    ) -> Result<(), ExecError> {
        stats.waypoints += targets.len();
        for (k, wp) in targets.iter().enumerate() {
            self.reach(wp, task_index, k, stats)?;
        }
        Ok(())
    }

    fn reach(
        &mut self,
        wp: &HandTarget,
        task_index: usize,
        waypoint_index: usize,
        stats: &mut StepReport,
    ) -> Result<(), ExecError> {
        let sol = self.solve(&wp.pose, task_index, waypoint_index, stats)?;
        self.move_to(&sol.q, wp.aperture, task_index)?;
        self.hand = *wp;
        self.waypoint_samples.push(WaypointSample {
            sample: self.traj.samples.len() - 1,
            task_index,
            target: wp.pose,
        });
        Ok(())
    }

    /// Re-establishes the Labanotation posture at the start of a task.
    ///
    /// The current posture is kept when it already satisfies the bounds;
    /// otherwise IK inside the bounds is tried from the current posture, then
    /// from the middle of the bounds. If both fail the bounds are dropped and
    /// the task is flagged.
    fn task_posture(
        &mut self,
        pose: &LabanPose,
        strength: ConstraintStrength,
        task_index: usize,
        stats: &mut StepReport,
    ) -> Result<(), ExecError> {
        let bounds = laban::joint_ranges(self.model, pose, strength)
            .map_err(|e| ExecError::Kinematics { task_index, source: e.into() })?;
        if self.q.iter().zip(&bounds).all(|(v, b)| b.contains(*v)) {
            return Ok(());
        }
        let target = self.hand.pose;
        let warm = solve_ik(self.model, &target, &self.q, &bounds, &self.opts.ik);
        let found = match warm {
            Ok(sol) => Some(sol),
            Err(_) => initial_posture(self.model, &target, pose, strength, &self.opts.ik).ok(),
        };
        match found {
            Some(sol) => {
                record(stats, &sol);
                let aperture = self.hand.aperture;
                self.move_to(&sol.q, aperture, task_index)
            }
            None => {
                stats.laban_relaxed = true;
                self.mark(LABAN_RELAXED_EVENT, task_index)
            }
        }
    }

    fn attach_nearest(&mut self, task_index: usize) -> Result<(), ExecError> {
        let hand_pose = self.model.fk_unchecked(&self.q);
        let p = hand_pose.translation.vector;
        let nearest = self
            .env
            .objects
            .iter()
            .enumerate()
            .map(|(i, o)| (i, (o.center() - p).norm()))
            .filter(|(_, d)| *d <= GRASP_REACH)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, _)) = nearest {
            let in_hand = hand_pose.inverse() * self.env.objects[i].pose;
            self.held = Some(Held { object: i, in_hand });
            self.grasped_object = Some(self.env.objects[i].name.clone());
        }
        self.mark(GRASPED_EVENT, task_index)
    }

    fn run_landing(
        &mut self,
        params: &crate::taskir::SkillParams,
        task_index: usize,
        stats: &mut StepReport,
    ) -> Result<(), ExecError> {
        let skill_err = |source| ExecError::Skill { task_index, source };
        let landing = skills::landing_start(params, &self.hand).map_err(skill_err)?;
        let aperture = self.hand.aperture;
        let mut k = 0;
        loop {
            let effort = self.traj.samples.last().map_or(skills::EFFORT_BASELINE, |s| s.effort);
            let state = SkillState { hand_pose: self.hand.pose, effort, step_index: k };
            let out = skills::ptg13_step(params, &landing, aperture, &state).map_err(|e| match e {
                SkillError::NoHitWithinTravel { steps, travel } => {
                    ExecError::NoHitWithinTravel { task_index, steps, travel }
                }
                other => skill_err(other),
            })?;
            if out.done {
                stats.descent_steps = Some(k.saturating_sub(1));
                return self.mark(out.note.unwrap_or(skills::HIT_EVENT), task_index);
            }
            stats.waypoints += 1;
            self.reach(&out.target, task_index, k, stats)?;
            k += 1;
        }
    }
}

fn record(stats: &mut StepReport, sol: &IkSolution) {
    stats.ik_solves += 1;
    stats.ik_iterations += sol.iterations;
    stats.max_pos_err = stats.max_pos_err.max(sol.pos_err);
    stats.max_rot_err = stats.max_rot_err.max(sol.rot_err);
}

fn is_identity(p: &Pose) -> bool {
    p.translation.vector.norm() <= 1e-12 && p.rotation.angle() <= 1e-12
}

/// Executes `seq` (already in the robot frame) on `model`.
pub fn execute(
    model: &RobotModel,
    seq: &TaskSequence,
    env: &Environment,
    opts: &ExecOptions,
) -> Result<(Trajectory, ExecutionReport), ExecError> {
    if !(opts.control_period > 0.0) || !(opts.joint_speed_limit > 0.0) {
        return Err(ExecError::InvalidOptions(
            "control_period and joint_speed_limit must be positive".into(),
        ));
    }
    if !is_identity(&seq.demo_to_robot) {
        return Err(ExecError::NotInRobotFrame);
    }
    let first = seq.steps.first().ok_or(ExecError::MissingGrasp { task_index: 0 })?;
    if first.kind != TaskKind::Grasp {
        return Err(ExecError::MissingGrasp { task_index: 0 });
    }
    let strength = opts.laban_strength.unwrap_or_else(|| ConstraintStrength::default_for(model));

    let start_hand = skills::pregrasp_target(&first.params)
        .map_err(|source| ExecError::Skill { task_index: 0, source })?;

    let mut runner = Runner {
        model,
        opts,
        env: env.clone(),
        hard: model.hard_limits(),
        q: Vec::new(),
        hand: start_hand,
        held: None,
        traj: Trajectory {
            robot: model.name().to_string(),
            joint_names: model.joints().iter().map(|j| j.name.clone()).collect(),
            control_period: opts.control_period,
            samples: Vec::new(),
        },
        events: Vec::new(),
        waypoint_samples: Vec::new(),
        grasped_object: None,
    };

    // Initial posture of the whole sequence, under the Labanotation bounds
    // when possible.
    let mut first_stats = new_stats(0, first.kind);
    let ik = &opts.ik;
    let (initial, relaxed) = match initial_posture(model, &start_hand.pose, &first.params.laban_start, strength, ik) {
        Ok(sol) => (sol, false),
        Err(KinematicsError::NoConvergence { .. }) => {
            let sol = initial_posture(model, &start_hand.pose, &first.params.laban_start, ConstraintStrength::None, ik)
                .map_err(|e| match e {
                    KinematicsError::NoConvergence { pos_err, rot_err, .. } => {
                        ExecError::IkFailure { task_index: 0, waypoint_index: 0, pos_err, rot_err }
                    }
                    other => ExecError::Kinematics { task_index: 0, source: other },
                })?;
            (sol, true)
        }
        Err(other) => return Err(ExecError::Kinematics { task_index: 0, source: other }),
    };
    record(&mut first_stats, &initial);
    let initial_q = initial.q.clone();
    runner.push_sample(initial.q, start_hand.aperture, 0)?;
    if relaxed {
        first_stats.laban_relaxed = true;
        runner.mark(LABAN_RELAXED_EVENT, 0)?;
    }

    let mut reports = Vec::with_capacity(seq.steps.len());
    for (i, step) in seq.steps.iter().enumerate() {
        let mut stats = if i == 0 {
            std::mem::replace(&mut first_stats, new_stats(0, step.kind))
        } else {
            new_stats(i, step.kind)
        };
        stats.first_sample = runner.traj.samples.len() - 1;
        if i > 0 {
            runner.task_posture(&step.params.laban_start, strength, i, &mut stats)?;
        }
        let p = &step.params;
        let skill_err = |source| ExecError::Skill { task_index: i, source };
        match step.kind {
            TaskKind::Grasp => {
                let wps = skills::grasp_waypoints(p, &runner.hand).map_err(skill_err)?;
                runner.follow(&wps, i, &mut stats)?;
                runner.attach_nearest(i)?;
            }
            TaskKind::Release => {
                let wps = skills::release_waypoints(p, &runner.hand);
                // Open in place, then retreat.
                runner.follow(&wps[..2], i, &mut stats)?;
                runner.held = None;
                runner.mark(RELEASED_EVENT, i)?;
                runner.follow(&wps[2..], i, &mut stats)?;
            }
            TaskKind::Ptg11 => {
                let wps = skills::ptg11_waypoints(p, &runner.hand);
                runner.follow(&wps, i, &mut stats)?;
            }
            TaskKind::Stg12 => {
                let wps = skills::stg12_waypoints(p, &runner.hand).map_err(skill_err)?;
                runner.follow(&wps, i, &mut stats)?;
            }
            TaskKind::Ptg3 => {
                let wps = skills::ptg3_waypoints(p, &runner.hand);
                runner.follow(&wps, i, &mut stats)?;
            }
            TaskKind::Ptg5 => {
                let wps = skills::ptg5_waypoints(p, &runner.hand).map_err(skill_err)?;
                runner.follow(&wps, i, &mut stats)?;
            }
            TaskKind::Ptg13 => runner.run_landing(p, i, &mut stats)?,
        }
        stats.last_sample = runner.traj.samples.len() - 1;
        reports.push(stats);
    }

    let report = ExecutionReport {
        robot: model.name().to_string(),
        strength,
        steps: reports,
        events: runner.events,
        waypoint_samples: runner.waypoint_samples,
        grasped_object: runner.grasped_object,
        final_objects: runner.env.objects,
        initial_q,
    };
    Ok((runner.traj, report))
}

fn new_stats(task_index: usize, kind: TaskKind) -> StepReport {
    StepReport {
        task_index,
        kind,
        waypoints: 0,
        ik_solves: 0,
        ik_iterations: 0,
        max_pos_err: 0.0,
        max_rot_err: 0.0,
        laban_relaxed: false,
        descent_steps: None,
        first_sample: 0,
        last_sample: 0,
    }
}

/// A trajectory sample whose end-effector point enters an inflated obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct ClearanceViolation {
    pub sample: usize,
    pub obstacle: String,
    pub position: Vector3<f64>,
}

/// End-effector point check against every obstacle grown by `margin`.
/// Touching the inflated boundary is not a violation.
pub fn check_clearance(traj: &Trajectory, env: &Environment, margin: f64) -> Vec<ClearanceViolation> {
    let mut out = Vec::new();
    for (i, s) in traj.samples.iter().enumerate() {
        let p = s.ee_pose.translation.vector;
        for b in &env.obstacles {
            if b.contains_inflated(&p, margin) {
                out.push(ClearanceViolation { sample: i, obstacle: b.name.clone(), position: p });
            }
        }
    }
    out
}
