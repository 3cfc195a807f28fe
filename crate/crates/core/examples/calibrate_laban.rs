//! Fills a robot file's Labanotation joint-range table.
//!
//! Usage:
//!   cargo run --release --example calibrate_laban -- <robot-file> \
//!       --upper j1,j2 --lower j3[,j4] --points shoulder,elbow,wrist \
//!       [--neutral joint=value,...]
//!
//! `--points` names the joints whose origins mark the shoulder, elbow, and
//! wrist. For every canonical direction the limb's joints are searched on a
//! 1 degree grid, all other joints held at the neutral posture (zero unless
//! given), for the values that point the limb closest to the direction. The
//! entry is that posture widened by 30 degrees and clipped to the hard
//! limits. Directions the limb cannot get within 20 degrees of are left out.
//! Upper-arm entries are searched with the neutral lower arm and lower-arm
//! entries with the neutral shoulder.

use std::collections::BTreeMap;

use lfo_core::kinematics::{Interval, RobotModel};
use lfo_core::laban::{JointRangeTable, LabanDirection, Limb};

const STEP: f64 = std::f64::consts::PI / 180.0;
const WIDEN: f64 = 30.0 * STEP;
const MAX_MISS: f64 = 20.0 * STEP;

fn grid(iv: &Interval) -> Vec<f64> {
    let n = (iv.width() / STEP).ceil() as usize;
    (0..=n).map(|k| iv.lo + iv.width() * k as f64 / n as f64).collect()
}

fn list(arg: &str) -> Vec<String> {
    arg.split(',').map(str::to_string).collect()
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let flag = |name: &str| {
        args.iter()
            .position(|a| a == name)
            .map(|i| list(&args[i + 1]))
    };
    let path = &args[0];
    let upper = flag("--upper").expect("missing --upper");
    let lower = flag("--lower").expect("missing --lower");
    let points = flag("--points").expect("missing --points");

    let src = std::fs::read_to_string(path).expect("read robot file");
    let mut model = RobotModel::from_json(&src).expect("parse robot file");
    let idx = |n: &str| model.joint_index(n).unwrap_or_else(|| panic!("no joint `{n}`"));
    let hard = model.hard_limits();

    let mut neutral: Vec<f64> = hard.iter().map(|iv| iv.clamp(0.0)).collect();
    for item in flag("--neutral").unwrap_or_default() {
        let (name, value) = item.split_once('=').expect("neutral entries are joint=value");
        let j = idx(name);
        neutral[j] = hard[j].clamp(value.parse().expect("numeric neutral value"));
    }

    let [shoulder, elbow, wrist] = [idx(&points[0]), idx(&points[1]), idx(&points[2])];
    let point = |q: &[f64], j: usize| model.joint_frames(q).0[j].translation.vector;

    let mut table = JointRangeTable::default();
    for (limb, joints, from, to) in [
        (Limb::UpperArm, &upper, shoulder, elbow),
        (Limb::LowerArm, &lower, elbow, wrist),
    ] {
        let joints: Vec<usize> = joints.iter().map(|n| idx(n)).collect();
        let mut postures = vec![neutral.clone()];
        for &j in &joints {
            postures = postures
                .into_iter()
                .flat_map(|q| {
                    grid(&hard[j]).into_iter().map(move |v| {
                        let mut q = q.clone();
                        q[j] = v;
                        q
                    })
                })
                .collect();
        }
        let samples: Vec<_> = postures
            .iter()
            .map(|q| {
                let d = (point(q, to) - point(q, from)).normalize();
                let effort: f64 = joints.iter().map(|&j| (q[j] - neutral[j]).abs()).sum();
                (d, effort, q)
            })
            .collect();

        let mut found = 0;
        for dir in LabanDirection::all() {
            let u = dir.unit_vector();
            let mut best: Option<(f64, f64, &Vec<f64>)> = None;
            for (d, effort, q) in &samples {
                let cos = d.dot(&u);
                let better = match best {
                    None => true,
                    Some((bc, be, _)) => cos > bc + 1e-9 || (cos > bc - 1e-9 && *effort < be),
                };
                if better {
                    best = Some((cos, *effort, q));
                }
            }
            let (cos, _, q) = best.expect("non-empty grid");
            if cos.clamp(-1.0, 1.0).acos() > MAX_MISS {
                continue;
            }
            let entry: BTreeMap<String, Interval> = joints
                .iter()
                .map(|&j| {
                    let iv = Interval::new(
                        (q[j] - WIDEN).max(hard[j].lo),
                        (q[j] + WIDEN).min(hard[j].hi),
                    );
                    (model.joints()[j].name.clone(), iv)
                })
                .collect();
            table.insert(limb, dir, entry);
            found += 1;
        }
        eprintln!("{limb}: {found} of 26 directions");
    }
    model.set_laban_table(table);
    std::fs::write(path, model.to_json()).expect("write robot file");
}
