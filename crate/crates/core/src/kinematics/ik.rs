//! Bound-constrained damped least-squares IK.

use nalgebra::{DVector, Matrix6, Matrix6xX, Vector6};

use super::{Interval, KinematicsError, RobotModel};
use crate::pose::Pose;

#[derive(Debug, Clone, PartialEq)]
pub struct IkOptions {
    /// Position tolerance (m).
    pub pos_tol: f64,
    /// Orientation tolerance (rad).
    pub rot_tol: f64,
    /// Correction iterations per attempt.
    pub max_iters: usize,
    /// Attempts after the one from the given seed.
    pub restarts: usize,
    pub damping: f64,
    /// Largest per-joint change in one iteration (rad or m).
    pub max_step: f64,
}

impl Default for IkOptions {
    fn default() -> Self {
        Self {
            pos_tol: 1e-3,
            rot_tol: 0.5_f64.to_radians(),
            max_iters: 200,
            restarts: 8,
            damping: 1e-2,
            max_step: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IkSolution {
    pub q: Vec<f64>,
    /// Correction iterations summed over all attempts.
    pub iterations: usize,
    /// Index of the attempt that converged (0 = the given seed).
    pub attempt: usize,
    pub pos_err: f64,
    pub rot_err: f64,
}

/// Position error (m), orientation error (rad), and the 6-D correction
/// vector (position difference, then rotation log-map), all in the base frame.
pub fn pose_error(current: &Pose, target: &Pose) -> (f64, f64, Vector6<f64>) {
    let dp = target.translation.vector - current.translation.vector;
    let dr = (target.rotation * current.rotation.inverse()).scaled_axis();
    let mut e = Vector6::zeros();
    e.fixed_rows_mut::<3>(0).copy_from(&dp);
    e.fixed_rows_mut::<3>(3).copy_from(&dr);
    (dp.norm(), dr.norm(), e)
}

/// Kronecker (R-sequence) step for `dims` dimensions: powers of the
/// reciprocal of the unique positive root of `x^(dims+1) = x + 1`.
fn kronecker_alpha(dims: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dims as f64 + 1.0));
    }
    (1..=dims).map(|j| (1.0 / phi).powi(j as i32).fract()).collect()
}

/// Seed for attempt `k`: the original seed shifted by the k-th point of a
/// low-discrepancy sequence, wrapped into the bounds.
fn restart_seed(seed: &[f64], bounds: &[Interval], k: usize) -> Vec<f64> {
    if k == 0 {
        return seed.to_vec();
    }
    let alpha = kronecker_alpha(seed.len());
    seed.iter()
        .zip(bounds)
        .zip(alpha)
        .map(|((s, b), a)| {
            let w = b.width();
            if w <= 0.0 {
                return b.lo;
            }
            let frac = (s - b.lo) / w + k as f64 * a;
            b.lo + frac.fract() * w
        })
        .collect()
}

fn dls_step(jac: &Matrix6xX<f64>, e: &Vector6<f64>, lambda2: f64) -> DVector<f64> {
    let jjt: Matrix6<f64> = jac * jac.transpose() + Matrix6::identity() * lambda2;
    let y = jjt
        .cholesky()
        .map(|c| c.solve(e))
        .unwrap_or_else(|| jjt.lu().solve(e).unwrap_or_else(Vector6::zeros));
    jac.transpose() * y
}

struct Attempt {
    q: Vec<f64>,
    iterations: usize,
    pos_err: f64,
    rot_err: f64,
    converged: bool,
}

fn attempt(
    model: &RobotModel,
    target: &Pose,
    seed: Vec<f64>,
    bounds: &[Interval],
    opts: &IkOptions,
) -> Attempt {
    let mut q = seed;
    let lambda2 = opts.damping * opts.damping;
    let rot_weight = if opts.rot_tol > 0.0 { opts.pos_tol / opts.rot_tol } else { 1.0 };
    let mut iterations = 0;
    loop {
        let current = model.fk_unchecked(&q);
        let (pos_err, rot_err, e) = pose_error(&current, target);
        let converged = pos_err < opts.pos_tol && rot_err < opts.rot_tol;
        if converged || iterations >= opts.max_iters {
            return Attempt { q, iterations, pos_err, rot_err, converged };
        }
        // Rotation rows are scaled so both tolerances weigh the same.
        let mut e = e;
        e.fixed_rows_mut::<3>(3).scale_mut(rot_weight);
        let mut jac = model.jacobian(&q);
        jac.rows_mut(3, 3).scale_mut(rot_weight);
        // Joints resting on a bound and pushed outward are frozen and the
        // step recomputed without them.
        let mut dq = dls_step(&jac, &e, lambda2);
        for _ in 0..q.len() {
            let mut frozen = false;
            for (j, b) in bounds.iter().enumerate() {
                let blocked = (q[j] <= b.lo && dq[j] < 0.0) || (q[j] >= b.hi && dq[j] > 0.0);
                if blocked {
                    jac.column_mut(j).fill(0.0);
                    frozen = true;
                }
            }
            if !frozen {
                break;
            }
            dq = dls_step(&jac, &e, lambda2);
        }
        let largest = dq.amax();
        if largest > opts.max_step {
            dq *= opts.max_step / largest;
        }
        for ((v, d), b) in q.iter_mut().zip(dq.iter()).zip(bounds) {
            *v = b.clamp(*v + d);
        }
        iterations += 1;
    }
}

/// Solves for a configuration inside `bounds` whose end-effector reaches
/// `target`.
///
/// Attempts start from `seed`, then from `opts.restarts` seeds shifted by a
/// Kronecker low-discrepancy sequence scaled to the bound widths.
/// A seed that is already within tolerance returns with zero iterations.
/// Every returned configuration, including `NoConvergence::best_q`, lies
/// inside `bounds`.
pub fn solve_ik(
    model: &RobotModel,
    target: &Pose,
    seed: &[f64],
    bounds: &[Interval],
    opts: &IkOptions,
) -> Result<IkSolution, KinematicsError> {
    if seed.len() != model.dof() || bounds.len() != model.dof() {
        return Err(KinematicsError::DimensionMismatch {
            expected: model.dof(),
            got: if seed.len() != model.dof() { seed.len() } else { bounds.len() },
        });
    }
    let seed: Vec<f64> = seed.iter().zip(bounds).map(|(s, b)| b.clamp(*s)).collect();
    let score = |a: &Attempt| (a.pos_err / opts.pos_tol).max(a.rot_err / opts.rot_tol);

    let mut total_iterations = 0;
    let mut best: Option<Attempt> = None;
    for k in 0..=opts.restarts {
        let a = attempt(model, target, restart_seed(&seed, bounds, k), bounds, opts);
        total_iterations += a.iterations;
        if a.converged {
            return Ok(IkSolution {
                q: a.q,
                iterations: total_iterations,
                attempt: k,
                pos_err: a.pos_err,
                rot_err: a.rot_err,
            });
        }
        if best.as_ref().is_none_or(|b| score(&a) < score(b)) {
            best = Some(a);
        }
    }
    let best = best.expect("at least one attempt");
    Err(KinematicsError::NoConvergence {
        best_q: best.q,
        pos_err: best.pos_err,
        rot_err: best.rot_err,
    })
}
