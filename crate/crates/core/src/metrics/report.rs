use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::PlausibilityBin;
use super::chi2::{chi2_distance, HistogramSpec, DEFAULT_CHI2_BINS};
use super::displacement::{fde, per_timestep_errors};
use super::primitives::{physics_primitives, PhysicsPrimitives};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::trajectory::Trajectory;

/// One evaluated sample: candidate futures, the true future and the last
/// observed position both start from.
#[derive(Debug, Clone)]
pub struct EvalCase {
    pub anchor: Vec2,
    pub preds: Vec<Trajectory>,
    pub gt: Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2Distances {
    pub velocity: f64,
    pub acceleration: f64,
    pub angular_velocity: f64,
    pub angular_acceleration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2Histograms {
    pub velocity: HistogramSpec,
    pub acceleration: HistogramSpec,
    pub angular_velocity: HistogramSpec,
    pub angular_acceleration: HistogramSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetrics {
    pub index: usize,
    pub n_heads: usize,
    pub ade: f64,
    pub fde: f64,
    pub min_ade: f64,
    pub min_fde: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Mean over every candidate trajectory of every sample.
    pub ade: f64,
    pub fde: f64,
    /// Mean over samples of the best candidate's error.
    pub min_ade: f64,
    pub min_fde: f64,
    pub chi2: Chi2Distances,
    pub histograms: Chi2Histograms,
    pub per_timestep: Vec<f64>,
    pub n_samples: usize,
    pub n_trajectories: usize,
    pub samples: Vec<SampleMetrics>,
}

struct CaseResult {
    errors: Vec<Vec<f64>>,
    fdes: Vec<f64>,
    pred_prims: Vec<PhysicsPrimitives>,
    gt_prims: PhysicsPrimitives,
}

fn anchored(anchor: Vec2, t: &Trajectory) -> Result<Trajectory> {
    let mut pts = Vec::with_capacity(t.len() + 1);
    pts.push(anchor);
    pts.extend_from_slice(t.points());
    Trajectory::new(pts, t.dt())
}

fn eval_case(case: &EvalCase) -> Result<CaseResult> {
    if case.preds.is_empty() {
        return Err(Error::input("evaluation case without candidates"));
    }
    let mut errors = Vec::with_capacity(case.preds.len());
    let mut fdes = Vec::with_capacity(case.preds.len());
    let mut pred_prims = Vec::with_capacity(case.preds.len());
    for p in &case.preds {
        errors.push(per_timestep_errors(p, &case.gt)?);
        fdes.push(fde(p, &case.gt)?);
        pred_prims.push(physics_primitives(&anchored(case.anchor, p)?)?);
    }
    let gt_prims = physics_primitives(&anchored(case.anchor, &case.gt)?)?;
    Ok(CaseResult { errors, fdes, pred_prims, gt_prims })
}

fn pooled(prims: &[&PhysicsPrimitives], pick: fn(&PhysicsPrimitives) -> &Vec<f64>) -> Vec<f64> {
    prims.iter().flat_map(|p| pick(p).iter().copied()).collect()
}

fn chi2_of(
    pred: &[&PhysicsPrimitives],
    gt: &[&PhysicsPrimitives],
    pick: fn(&PhysicsPrimitives) -> &Vec<f64>,
) -> Result<(f64, HistogramSpec)> {
    let g = pooled(gt, pick);
    let spec = HistogramSpec::from_samples(&g, DEFAULT_CHI2_BINS, 0.05)?;
    Ok((chi2_distance(&pooled(pred, pick), &g, &spec)?, spec))
}

/// Displacement errors and physics-primitive distances over a set of cases.
/// Histogram ranges come from the ground-truth primitives.
pub fn evaluate(cases: &[EvalCase]) -> Result<MetricsReport> {
    if cases.is_empty() {
        return Err(Error::input("nothing to evaluate"));
    }
    let t_f = cases[0].gt.len();
    if let Some(c) = cases.iter().find(|c| c.gt.len() != t_f) {
        return Err(Error::Shape { expected: t_f, got: c.gt.len() });
    }
    let results: Vec<CaseResult> = cases.par_iter().map(eval_case).collect::<Result<_>>()?;

    let mut per_timestep = vec![0.0; t_f];
    let mut n_traj = 0usize;
    let mut fde_sum = 0.0;
    let mut samples = Vec::with_capacity(results.len());
    for (i, r) in results.iter().enumerate() {
        let ades: Vec<f64> = r.errors.iter().map(|e| e.iter().sum::<f64>() / t_f as f64).collect();
        for e in &r.errors {
            for (acc, v) in per_timestep.iter_mut().zip(e) {
                *acc += v;
            }
        }
        n_traj += r.errors.len();
        fde_sum += r.fdes.iter().sum::<f64>();
        let k = ades.len() as f64;
        samples.push(SampleMetrics {
            index: i,
            n_heads: ades.len(),
            ade: ades.iter().sum::<f64>() / k,
            fde: r.fdes.iter().sum::<f64>() / k,
            min_ade: ades.iter().copied().fold(f64::INFINITY, f64::min),
            min_fde: r.fdes.iter().copied().fold(f64::INFINITY, f64::min),
        });
    }
    per_timestep.iter_mut().for_each(|v| *v /= n_traj as f64);
    let ade = per_timestep.iter().sum::<f64>() / t_f as f64;
    let n = samples.len() as f64;

    let pred: Vec<&PhysicsPrimitives> = results.iter().flat_map(|r| r.pred_prims.iter()).collect();
    let gt: Vec<&PhysicsPrimitives> = results.iter().map(|r| &r.gt_prims).collect();
    let (cv, hv) = chi2_of(&pred, &gt, |p| &p.velocity)?;
    let (ca, ha) = chi2_of(&pred, &gt, |p| &p.acceleration)?;
    let (cw, hw) = chi2_of(&pred, &gt, |p| &p.angular_velocity)?;
    let (cx, hx) = chi2_of(&pred, &gt, |p| &p.angular_acceleration)?;

    let report = MetricsReport {
        ade,
        fde: fde_sum / n_traj as f64,
        min_ade: samples.iter().map(|s| s.min_ade).sum::<f64>() / n,
        min_fde: samples.iter().map(|s| s.min_fde).sum::<f64>() / n,
        chi2: Chi2Distances { velocity: cv, acceleration: ca, angular_velocity: cw, angular_acceleration: cx },
        histograms: Chi2Histograms { velocity: hv, acceleration: ha, angular_velocity: hw, angular_acceleration: hx },
        per_timestep,
        n_samples: samples.len(),
        n_trajectories: n_traj,
        samples,
    };
    if !report.ade.is_finite() || !report.fde.is_finite() {
        return Err(Error::Numeric("non-finite displacement error".into()));
    }
    Ok(report)
}

fn create(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Io { path: path.to_path_buf(), source: std::io::Error::other(e.to_string()) }
}

impl MetricsReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// One row per sample followed by a `summary` row.
    pub fn write_samples_csv(&self, path: &Path) -> Result<()> {
        let mut w = create(path)?;
        let err = csv_err(path);
        w.write_record(["sample", "n_heads", "ade", "fde", "min_ade", "min_fde"]).map_err(&err)?;
        for s in &self.samples {
            w.write_record(&[
                s.index.to_string(),
                s.n_heads.to_string(),
                s.ade.to_string(),
                s.fde.to_string(),
                s.min_ade.to_string(),
                s.min_fde.to_string(),
            ])
            .map_err(&err)?;
        }
        w.write_record(&[
            "summary".to_string(),
            self.n_trajectories.to_string(),
            self.ade.to_string(),
            self.fde.to_string(),
            self.min_ade.to_string(),
            self.min_fde.to_string(),
        ])
        .map_err(&err)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_per_timestep_csv(&self, path: &Path) -> Result<()> {
        let mut w = create(path)?;
        let err = csv_err(path);
        w.write_record(["t", "error"]).map_err(&err)?;
        for (t, e) in self.per_timestep.iter().enumerate() {
            w.write_record(&[(t + 1).to_string(), e.to_string()]).map_err(&err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub fn write_bins_csv(bins: &[PlausibilityBin], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let err = csv_err(path);
    w.write_record(["lo", "hi", "count", "mean_ade"]).map_err(&err)?;
    for b in bins {
        w.write_record(&[b.lo.to_string(), b.hi.to_string(), b.count.to_string(), b.mean_ade.to_string()])
            .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
