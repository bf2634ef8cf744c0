use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rollout, sample_implausible_pair, sample_plausible_pair, OracleParams, SamplingStats};
use crate::datakit::BankPose;
use crate::error::{Error, Result};
use crate::humanoid::{HumanoidState, ObservableState, Pose};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairLabel {
    PlausiblePair,
    ImplausiblePair,
}

impl PairLabel {
    fn as_str(self) -> &'static str {
        match self {
            PairLabel::PlausiblePair => "plausible_pair",
            PairLabel::ImplausiblePair => "implausible_pair",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "plausible_pair" => Some(PairLabel::PlausiblePair),
            "implausible_pair" => Some(PairLabel::ImplausiblePair),
            _ => None,
        }
    }
}

/// One surrogate training triple: future trajectory, observable state and oracle reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlausibilitySample {
    pub trajectory: Trajectory,
    pub observable: ObservableState,
    /// Heading of the full oracle state; kept for the dataset file.
    pub heading: f64,
    pub reward: f64,
    pub label: PairLabel,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DatasetStats {
    pub sampling: SamplingStats,
    pub mean_reward_plausible: f64,
    pub mean_reward_implausible: f64,
}

/// Draws the requested pairs (plausible first), then labels every pair with the
/// oracle. Rollouts run in parallel; results keep sample order.
pub fn build_plausibility_dataset(
    pose_bank: &[BankPose],
    traj_bank: &[Trajectory],
    n_plausible: usize,
    n_implausible: usize,
    params: &OracleParams,
    seed: u64,
) -> Result<(Vec<PlausibilitySample>, DatasetStats)> {
    params.validate()?;
    if pose_bank.is_empty() || traj_bank.is_empty() {
        return Err(Error::input("pose bank and trajectory bank must be non-empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = SamplingStats::default();
    let mut pairs: Vec<(Trajectory, HumanoidState, PairLabel)> =
        Vec::with_capacity(n_plausible + n_implausible);
    for _ in 0..n_plausible {
        let (t, s) = sample_plausible_pair(pose_bank, traj_bank, &mut rng, &mut stats)?;
        pairs.push((t, s, PairLabel::PlausiblePair));
    }
    for _ in 0..n_implausible {
        let (t, s) = sample_implausible_pair(pose_bank, traj_bank, &mut rng, None, params, &mut stats)?;
        pairs.push((t, s, PairLabel::ImplausiblePair));
    }

    let samples = pairs
        .into_par_iter()
        .map(|(trajectory, state, label)| {
            let reward = rollout(&trajectory, &state, params)?;
            Ok(PlausibilitySample {
                observable: state.observable(),
                heading: state.heading,
                trajectory,
                reward,
                label,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mean_of = |label| {
        let v: Vec<f64> = samples.iter().filter(|s| s.label == label).map(|s| s.reward).collect();
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let stats = DatasetStats {
        mean_reward_plausible: mean_of(PairLabel::PlausiblePair),
        mean_reward_implausible: mean_of(PairLabel::ImplausiblePair),
        sampling: stats,
    };
    Ok((samples, stats))
}

/// Writes the dataset as CSV: label, omega, dt, t_f, trajectory x/y pairs,
/// heading, root velocity, then x/y/z for every joint in name order.
pub fn write_plausibility_csv(path: &Path, samples: &[PlausibilitySample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let Some(first) = samples.first() else {
        w.write_record(["label", "omega", "dt", "t_f", "heading", "root_vx", "root_vy"])
            .map_err(|e| csv_err(path, e))?;
        return w.flush().map_err(|e| Error::io(path, e));
    };
    let t_f = first.trajectory.len();
    let joint_names: Vec<String> = first
        .observable
        .joints
        .as_ref()
        .map(|p| p.names().map(str::to_string).collect())
        .unwrap_or_default();

    let mut header: Vec<String> = ["label", "omega", "dt", "t_f"].map(String::from).to_vec();
    for i in 0..t_f {
        header.push(format!("x{i}"));
        header.push(format!("y{i}"));
    }
    header.extend(["heading", "root_vx", "root_vy"].map(String::from));
    for n in &joint_names {
        for axis in ["x", "y", "z"] {
            header.push(format!("{n}_{axis}"));
        }
    }
    w.write_record(&header).map_err(|e| csv_err(path, e))?;

    for (row, s) in samples.iter().enumerate() {
        if s.trajectory.len() != t_f {
            return Err(Error::input(format!("sample {row} has a different trajectory length")));
        }
        let mut rec: Vec<String> = vec![
            s.label.as_str().to_string(),
            s.reward.to_string(),
            s.trajectory.dt().to_string(),
            t_f.to_string(),
        ];
        for p in s.trajectory.points() {
            rec.push(p[0].to_string());
            rec.push(p[1].to_string());
        }
        rec.push(s.heading.to_string());
        rec.push(s.observable.root_velocity[0].to_string());
        rec.push(s.observable.root_velocity[1].to_string());
        let pose = s.observable.joints.as_ref();
        let names: Vec<&str> = pose.map(|p| p.names().collect()).unwrap_or_default();
        if names != joint_names.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::input(format!("sample {row} has a different joint set")));
        }
        if let Some(p) = pose {
            for (_, c) in p.iter() {
                rec.extend(c.iter().map(f64::to_string));
            }
        }
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Parse { path: path.display().to_string(), line: 0, msg: e.to_string() }
}

pub fn read_plausibility_csv(path: &Path) -> Result<Vec<PlausibilitySample>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let (Some(c_heading), Some(_), Some(_)) = (col("heading"), col("omega"), col("t_f")) else {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            msg: "missing required columns".into(),
        });
    };
    let joint_cols = &header.iter().collect::<Vec<_>>()[c_heading + 3..];
    if joint_cols.len() % 3 != 0 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            msg: "joint columns must come in x/y/z triples".into(),
        });
    }
    let joint_names: Vec<String> = joint_cols
        .chunks(3)
        .map(|c| c[0].trim_end_matches("_x").to_string())
        .collect();

    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let perr = |msg: String| Error::Parse { path: path.display().to_string(), line, msg };
        let rec = rec.map_err(|e| perr(e.to_string()))?;
        let num = |j: usize| -> Result<f64> {
            rec.get(j)
                .ok_or_else(|| perr(format!("missing column {j}")))?
                .parse::<f64>()
                .map_err(|e| perr(format!("column {j}: {e}")))
        };
        let label = PairLabel::parse(&rec[0]).ok_or_else(|| perr(format!("bad label '{}'", &rec[0])))?;
        let reward = num(1)?;
        let dt = num(2)?;
        let t_f: usize = rec[3].parse().map_err(|e| perr(format!("t_f: {e}")))?;
        if 4 + 2 * t_f != c_heading {
            return Err(perr("t_f does not match the trajectory columns".into()));
        }
        let pts = (0..t_f).map(|k| Ok([num(4 + 2 * k)?, num(5 + 2 * k)?])).collect::<Result<Vec<_>>>()?;
        let heading = num(c_heading)?;
        let vel = [num(c_heading + 1)?, num(c_heading + 2)?];
        let mut joints = std::collections::BTreeMap::new();
        for (k, name) in joint_names.iter().enumerate() {
            let b = c_heading + 3 + 3 * k;
            joints.insert(name.clone(), [num(b)?, num(b + 1)?, num(b + 2)?]);
        }
        let pose = Pose::new(joints).map_err(|e| perr(e.to_string()))?;
        let trajectory = Trajectory::new(pts, dt).map_err(|e| perr(e.to_string()))?;
        if !(0.0..=1.0).contains(&reward) {
            return Err(perr(format!("reward {reward} outside [0, 1]")));
        }
        out.push(PlausibilitySample {
            trajectory,
            observable: ObservableState::with_pose(pose, vel),
            heading,
            reward,
            label,
        });
    }
    Ok(out)
}
