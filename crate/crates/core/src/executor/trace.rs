use serde::{Deserialize, Serialize};

use crate::pose::{Pose, PoseDoc};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub q: Vec<f64>,
    pub ee_pose: Pose,
    pub effort: f64,
    pub aperture: f64,
    pub task_index: usize,
    pub event: Option<String>,
}

/// Time-stamped joint trajectory at a fixed control period.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub robot: String,
    pub joint_names: Vec<String>,
    pub control_period: f64,
    pub samples: Vec<Sample>,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("malformed trace: {0}")]
    Malformed(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleDoc {
    t: f64,
    q: Vec<f64>,
    ee_pose: PoseDoc,
    effort: f64,
    aperture: f64,
    task_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    event: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryDoc {
    robot: String,
    joint_names: Vec<String>,
    control_period: f64,
    samples: Vec<SampleDoc>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = (usize, &Sample, &str)> {
        self.samples
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.event.as_deref().map(|e| (i, s, e)))
    }

    pub fn count_event(&self, name: &str) -> usize {
        self.events()
            .filter(|(_, _, e)| e.split(';').any(|x| x == name))
            .count()
    }

    pub fn to_json(&self) -> String {
        let doc = TrajectoryDoc {
            robot: self.robot.clone(),
            joint_names: self.joint_names.clone(),
            control_period: self.control_period,
            samples: self
                .samples
                .iter()
                .map(|s| SampleDoc {
                    t: s.t,
                    q: s.q.clone(),
                    ee_pose: PoseDoc::from_pose(&s.ee_pose),
                    effort: s.effort,
                    aperture: s.aperture,
                    task_index: s.task_index,
                    event: s.event.clone(),
                })
                .collect(),
        };
        let mut out = serde_json::to_string(&doc).expect("trajectory serializes");
        out.push('\n');
        out
    }

    pub fn from_json(source: &str) -> Result<Self, TraceError> {
        let doc: TrajectoryDoc =
            serde_json::from_str(source).map_err(|e| TraceError::Malformed(e.to_string()))?;
        let samples = doc
            .samples
            .into_iter()
            .map(|s| {
                Ok(Sample {
                    t: s.t,
                    q: s.q,
                    ee_pose: s
                        .ee_pose
                        .to_pose()
                        .map_err(|e| TraceError::Malformed(e.to_string()))?,
                    effort: s.effort,
                    aperture: s.aperture,
                    task_index: s.task_index,
                    event: s.event,
                })
            })
            .collect::<Result<Vec<_>, TraceError>>()?;
        Ok(Self {
            robot: doc.robot,
            joint_names: doc.joint_names,
            control_period: doc.control_period,
            samples,
        })
    }

    pub fn csv_header(dof: usize) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend((0..dof).map(|i| format!("q{i}")));
        h.extend(
            ["px", "py", "pz", "qw", "qx", "qy", "qz", "effort", "task_index", "event"]
                .into_iter()
                .map(String::from),
        );
        h
    }

    /// CSV rows `t,q0..qN,px,py,pz,qw,qx,qy,qz,effort,task_index,event`.
    /// Aperture is not part of the CSV layout.
    pub fn to_csv(&self) -> Result<String, TraceError> {
        let dof = self.joint_names.len();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::csv_header(dof))?;
        for s in &self.samples {
            let d = PoseDoc::from_pose(&s.ee_pose);
            let mut row: Vec<String> = Vec::with_capacity(dof + 11);
            row.push(s.t.to_string());
            row.extend(s.q.iter().map(f64::to_string));
            row.extend(d.position.iter().map(f64::to_string));
            row.extend(d.quaternion.iter().map(f64::to_string));
            row.push(s.effort.to_string());
            row.push(s.task_index.to_string());
            row.push(s.event.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| TraceError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Reads a CSV trace. Fields absent from the CSV layout (robot name,
    /// joint names, control period, aperture) come back empty or zero except
    /// the period, which is recovered from the first time step.
    pub fn from_csv(source: &str) -> Result<Self, TraceError> {
        let mut r = csv::Reader::from_reader(source.as_bytes());
        let header = r.headers()?.clone();
        let dof = header
            .len()
            .checked_sub(11)
            .ok_or_else(|| TraceError::Malformed("too few columns".into()))?;
        let expected = Self::csv_header(dof);
        if header.iter().ne(expected.iter().map(String::as_str)) {
            return Err(TraceError::Malformed("unexpected CSV header".into()));
        }
        let num = |s: &str| -> Result<f64, TraceError> {
            s.parse::<f64>()
                .map_err(|e| TraceError::Malformed(format!("`{s}`: {e}")))
        };
        let mut samples = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let f: Vec<&str> = rec.iter().collect();
            let q = f[1..1 + dof].iter().map(|s| num(s)).collect::<Result<Vec<_>, _>>()?;
            let o = 1 + dof;
            let doc = PoseDoc {
                position: [num(f[o])?, num(f[o + 1])?, num(f[o + 2])?],
                quaternion: [num(f[o + 3])?, num(f[o + 4])?, num(f[o + 5])?, num(f[o + 6])?],
            };
            let task_index = f[o + 8]
                .parse::<usize>()
                .map_err(|e| TraceError::Malformed(e.to_string()))?;
            samples.push(Sample {
                t: num(f[0])?,
                q,
                ee_pose: doc.to_pose().map_err(|e| TraceError::Malformed(e.to_string()))?,
                effort: num(f[o + 7])?,
                aperture: 0.0,
                task_index,
                event: (!f[o + 9].is_empty()).then(|| f[o + 9].to_string()),
            });
        }
        let control_period = if samples.len() > 1 { samples[1].t - samples[0].t } else { 0.0 };
        Ok(Self {
            robot: String::new(),
            joint_names: (0..dof).map(|i| format!("q{i}")).collect(),
            control_period,
            samples,
        })
    }
}
