use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;

use super::candidates::load_candidates;
use super::config::{stream, RunConfig};
use crate::datakit::{
    generate_pose_bank, generate_synthetic, load_pose_bank, load_tsv, make_training_instances, save_pose_bank,
    trajectory_bank, write_tsv, BankPose, TrainingInstance,
};
use crate::error::{Error, Result};
use crate::filter::{evaluate_at_lambda, locoval_filter, score_eval_set, FilterReport, LambdaSweepRow, ScoredEvalSet};
use crate::locoval::{train_locoval, LocoValModel};
use crate::metrics::{ade, bin_by_plausibility, bin_trend, evaluate, write_bins_csv, EvalCase, MetricsReport};
use crate::oracle::{build_plausibility_dataset, read_plausibility_csv, write_plausibility_csv, PairLabel};
use crate::predictor::{train_predictor, EpochLog, PredictorCheckpoint, PredictorModel};

pub const TRAIN_TRACKS: &str = "train_tracks.tsv";
pub const EVAL_TRACKS: &str = "eval_tracks.tsv";
pub const POSE_BANK: &str = "pose_bank.json";
pub const PLAUSIBILITY: &str = "plausibility.csv";
pub const LOCOVAL: &str = "locoval.json";

/// Resolved configuration plus the directory every file goes to.
pub struct Run {
    pub config: RunConfig,
    pub out: PathBuf,
}

impl Run {
    pub fn new(mut config: RunConfig) -> Result<Self> {
        config.resolve_seeds();
        config.validate()?;
        let out = config.output_dir();
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(Self { config, out })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Writes the resolved config next to the outputs of `command`.
    pub fn echo_config(&self, command: &str) -> Result<()> {
        write_json(&self.path(&format!("{command}.config.json")), &self.config)
    }

    fn pose_bank(&self) -> Result<Vec<BankPose>> {
        load_pose_bank(&self.path(POSE_BANK))
    }

    fn instances(&self, tracks: &str, t_p: usize, t_f: usize, stride: usize, stream: u64) -> Result<Vec<TrainingInstance>> {
        let ds = load_tsv(&self.path(tracks), self.config.data.scenario.dt)?;
        let bank = self.pose_bank()?;
        let (inst, stats) = make_training_instances(&ds, Some(&bank), t_p, t_f, stride, self.config.sub_seed(stream))?;
        if inst.is_empty() {
            return Err(Error::input(format!("{tracks}: no track is long enough for {t_p}+{t_f} frames")));
        }
        info!("{tracks}: {} instances, {} short tracks skipped", stats.instances, stats.skipped_short_tracks);
        Ok(inst)
    }

    fn load_locoval(&self, path: Option<&Path>) -> Result<Option<LocoValModel>> {
        let p = path.map(Path::to_path_buf).unwrap_or_else(|| self.path(LOCOVAL));
        if p.exists() {
            Ok(Some(LocoValModel::load(&p)?))
        } else if path.is_some() {
            Err(Error::io(&p, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file")))
        } else {
            Ok(None)
        }
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn write_lines(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
    let mut text = String::from(header);
    text.push('\n');
    for r in rows {
        text.push_str(&r);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Serialize)]
pub struct GenDataSummary {
    pub train_tracks: usize,
    pub eval_tracks: usize,
    pub poses: usize,
    pub bank_trajectories: usize,
    pub plausible: usize,
    pub implausible: usize,
    pub mean_reward_plausible: f64,
    pub mean_reward_implausible: f64,
}

pub fn gen_data(run: &Run) -> Result<GenDataSummary> {
    let c = &run.config;
    let d = &c.data;
    let train = generate_synthetic(&d.scenario, d.n_train_tracks, c.sub_seed(stream::TRAIN_TRACKS))?;
    let eval = generate_synthetic(&d.scenario, d.n_eval_tracks, c.sub_seed(stream::EVAL_TRACKS))?;
    let bank = generate_pose_bank(d.n_poses, d.pose_speed_range, c.sub_seed(stream::POSE_BANK))?;
    let trajs = trajectory_bank(&train, c.predictor.t_f, d.bank_stride)?;
    if trajs.is_empty() {
        return Err(Error::Config(format!("tracks are too short for {} future frames", c.predictor.t_f)));
    }
    let (samples, stats) =
        build_plausibility_dataset(&bank, &trajs, d.n_plausible, d.n_implausible, &c.oracle, c.sub_seed(stream::PAIRS))?;
    write_tsv(&run.path(TRAIN_TRACKS), &train)?;
    write_tsv(&run.path(EVAL_TRACKS), &eval)?;
    save_pose_bank(&run.path(POSE_BANK), &bank)?;
    write_plausibility_csv(&run.path(PLAUSIBILITY), &samples)?;
    let summary = GenDataSummary {
        train_tracks: train.tracks.len(),
        eval_tracks: eval.tracks.len(),
        poses: bank.len(),
        bank_trajectories: trajs.len(),
        plausible: samples.iter().filter(|s| s.label == PairLabel::PlausiblePair).count(),
        implausible: samples.iter().filter(|s| s.label == PairLabel::ImplausiblePair).count(),
        mean_reward_plausible: stats.mean_reward_plausible,
        mean_reward_implausible: stats.mean_reward_implausible,
    };
    write_json(&run.path("gen_data_summary.json"), &summary)?;
    run.echo_config("gen_data")?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct LocoValSummary {
    pub n_train: usize,
    pub n_holdout: usize,
    pub best_step: usize,
    pub holdout_pearson: Option<f64>,
    pub checksum: String,
}

pub fn cmd_train_locoval(run: &Run) -> Result<LocoValSummary> {
    let data = read_plausibility_csv(&run.path(PLAUSIBILITY))?;
    let cfg = &run.config.locoval;
    let (model, report) = train_locoval(&data, cfg)?;
    model.save(&run.path(LOCOVAL), Some(cfg.train.seed), Some(cfg.train.clone()))?;
    write_lines(
        &run.path("locoval_curve.csv"),
        "step,lr,train_mse,holdout_mse",
        report.curve.iter().map(|p| {
            format!("{},{},{},{}", p.step, p.lr, p.train_mse, p.holdout_mse.map_or(String::new(), |v| v.to_string()))
        }),
    )?;
    write_json(&run.path("locoval_report.json"), &report)?;
    run.echo_config("train_locoval")?;
    Ok(LocoValSummary {
        n_train: report.n_train,
        n_holdout: report.n_holdout,
        best_step: report.best_step,
        holdout_pearson: report.holdout_pearson,
        checksum: model.checksum(),
    })
}

pub fn cmd_train_predictor(run: &Run, name: &str) -> Result<(PathBuf, Vec<EpochLog>)> {
    let cfg = &run.config.predictor;
    let data = run.instances(TRAIN_TRACKS, cfg.t_p, cfg.t_f, run.config.data.train_stride, stream::TRAIN_INSTANCES)?;
    let locoval = if cfg.alpha > 0.0 {
        Some(
            run.load_locoval(None)?
                .ok_or_else(|| Error::Config(format!("alpha {} needs {LOCOVAL}; run train-locoval first", cfg.alpha)))?,
        )
    } else {
        None
    };
    let (model, logs) = train_predictor(&data, locoval.as_ref(), cfg)?;
    let path = run.path(&format!("{name}.json"));
    model
        .to_checkpoint(cfg.alpha, locoval.as_ref().map(LocoValModel::checksum), Some(cfg.train.seed))
        .save(&path)?;
    write_lines(
        &run.path(&format!("{name}_loss.csv")),
        "epoch,lr,l_t,l_e,weighted_ratio",
        logs.iter().map(|l| {
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
            format!("{},{},{},{},{}", l.epoch, l.lr, l.l_t, opt(l.l_e), opt(l.weighted_ratio))
        }),
    )?;
    run.echo_config(name)?;
    Ok((path, logs))
}

fn load_predictor(run: &Run, path: &Path) -> Result<PredictorModel> {
    let ck = PredictorCheckpoint::load(path)?;
    let model = ck.to_model()?;
    if let (Some(want), Some(lv)) = (&ck.locoval_checksum, run.load_locoval(None)?) {
        if *want != lv.checksum() {
            warn!("{} was trained against a different plausibility model", path.display());
        }
    }
    Ok(model)
}

#[derive(Debug, Clone, Serialize)]
pub struct FilterSummary {
    pub lambda: f64,
    pub rejection_rate: f64,
    pub fallback_rate: f64,
    pub kept_ade: f64,
    pub rejected_ade: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub report: MetricsReport,
    pub filter: Option<LambdaSweepRow>,
    pub bin_trend: Option<f64>,
}

fn write_report(run: &Run, prefix: &str, r: &MetricsReport) -> Result<()> {
    r.write_json(&run.path(&format!("{prefix}_metrics.json")))?;
    r.write_samples_csv(&run.path(&format!("{prefix}_samples.csv")))?;
    r.write_per_timestep_csv(&run.path(&format!("{prefix}_per_timestep.csv")))
}

fn scored_set(run: &Run, model: &PredictorModel, locoval: &LocoValModel) -> Result<ScoredEvalSet> {
    let l = model.layout();
    let eval = run.instances(EVAL_TRACKS, l.t_p, l.t_f, run.config.data.eval_stride, stream::EVAL_INSTANCES)?;
    score_eval_set(locoval, model, &eval)
}

pub fn cmd_eval(run: &Run, predictor: &Path, name: &str, lambda: Option<f64>) -> Result<EvalOutcome> {
    let model = load_predictor(run, predictor)?;
    let locoval = run.load_locoval(None)?;
    let l = model.layout();
    let report;
    let mut filter = None;
    let mut trend = None;
    match &locoval {
        Some(lv) => {
            let scored = scored_set(run, &model, lv)?;
            let cases: Vec<EvalCase> = scored
                .cases
                .iter()
                .map(|(s, _, gt)| EvalCase { anchor: s.anchor, preds: s.trajectories.clone(), gt: gt.clone() })
                .collect();
            report = evaluate(&cases)?;
            let mut pairs = Vec::new();
            for (s, scores, gt) in &scored.cases {
                for (t, &sc) in s.trajectories.iter().zip(scores) {
                    pairs.push((sc, ade(t, gt)?));
                }
            }
            let bins = bin_by_plausibility(&pairs, run.config.eval.n_bins);
            write_bins_csv(&bins, &run.path(&format!("{name}_bins.csv")))?;
            trend = bin_trend(&bins);
            if let Some(lambda) = lambda {
                let row = evaluate_at_lambda(&scored, lambda)?;
                write_report(run, &format!("{name}_kept"), &row.kept)?;
                if let Some(r) = &row.rejected {
                    write_report(run, &format!("{name}_rejected"), r)?;
                }
                write_json(
                    &run.path(&format!("{name}_filter.json")),
                    &FilterSummary {
                        lambda,
                        rejection_rate: row.rejection_rate,
                        fallback_rate: row.fallback_rate,
                        kept_ade: row.kept.ade,
                        rejected_ade: row.rejected.as_ref().map(|r| r.ade),
                    },
                )?;
                filter = Some(row);
            }
        }
        None => {
            if lambda.is_some() {
                return Err(Error::Config(format!("filtering needs {LOCOVAL}; run train-locoval first")));
            }
            let eval = run.instances(EVAL_TRACKS, l.t_p, l.t_f, run.config.data.eval_stride, stream::EVAL_INSTANCES)?;
            let cases = eval
                .iter()
                .map(|i| {
                    let s = model.predict_instance(i)?;
                    Ok(EvalCase { anchor: s.anchor, preds: s.trajectories, gt: i.future.clone() })
                })
                .collect::<Result<Vec<_>>>()?;
            report = evaluate(&cases)?;
        }
    }
    write_report(run, name, &report)?;
    run.echo_config(name)?;
    Ok(EvalOutcome { report, filter, bin_trend: trend })
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseFilterReport {
    pub case: String,
    #[serde(flatten)]
    pub report: FilterReport,
}

pub fn cmd_filter(
    run: &Run,
    candidates: &Path,
    locoval: Option<&Path>,
    lambda: f64,
    output: &Path,
) -> Result<Vec<CaseFilterReport>> {
    let lv = run
        .load_locoval(locoval)?
        .ok_or_else(|| Error::Config(format!("filtering needs {LOCOVAL}; run train-locoval first")))?;
    let cases = load_candidates(candidates, run.config.data.scenario.dt)?;
    let mut out = Vec::with_capacity(cases.len());
    for c in &cases {
        let set = crate::predictor::PredictionSet { anchor: c.past.last(), trajectories: c.candidates.clone() };
        let r = locoval_filter(&lv, &set, &c.observable(), lambda)?;
        out.push(CaseFilterReport { case: c.case.clone(), report: r.report(lambda) });
    }
    write_json(output, &out)?;
    run.echo_config("filter")?;
    Ok(out)
}

pub fn cmd_sweep_lambda(run: &Run, predictor: &Path, lambdas: &[f64]) -> Result<Vec<LambdaSweepRow>> {
    let model = load_predictor(run, predictor)?;
    let lv = run
        .load_locoval(None)?
        .ok_or_else(|| Error::Config(format!("a lambda sweep needs {LOCOVAL}")))?;
    let scored = scored_set(run, &model, &lv)?;
    let rows = lambdas.iter().map(|&l| evaluate_at_lambda(&scored, l)).collect::<Result<Vec<_>>>()?;
    let mut sorted: Vec<&LambdaSweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    if sorted.windows(2).any(|w| w[1].rejection_rate < w[0].rejection_rate) {
        warn!("rejection rate is not monotone in lambda");
    }
    write_lines(
        &run.path("sweep_lambda.csv"),
        "lambda,rejection_rate,fallback_rate,kept_ade,kept_fde,kept_min_ade,kept_min_fde,rejected_ade,rejected_fde",
        rows.iter().map(|r| {
            let (ra, rf) = r.rejected.as_ref().map_or((String::new(), String::new()), |x| (x.ade.to_string(), x.fde.to_string()));
            format!(
                "{},{},{},{},{},{},{},{ra},{rf}",
                r.lambda, r.rejection_rate, r.fallback_rate, r.kept.ade, r.kept.fde, r.kept.min_ade, r.kept.min_fde
            )
        }),
    )?;
    write_json(&run.path("sweep_lambda.json"), &rows)?;
    run.echo_config("sweep_lambda")?;
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaSweepRow {
    pub alpha: f64,
    pub final_l_t: f64,
    pub final_l_e: Option<f64>,
    pub report: MetricsReport,
}

pub fn cmd_sweep_alpha(run: &Run, alphas: &[f64]) -> Result<Vec<AlphaSweepRow>> {
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mut cfg = run.config.clone();
        cfg.predictor.alpha = alpha;
        let sub = Run { config: cfg, out: run.out.clone() };
        let name = format!("predictor_alpha_{alpha}");
        let (path, logs) = cmd_train_predictor(&sub, &name)?;
        let outcome = cmd_eval(&sub, &path, &name, None)?;
        let last = logs.last().expect("at least one epoch");
        rows.push(AlphaSweepRow { alpha, final_l_t: last.l_t, final_l_e: last.l_e, report: outcome.report });
    }
    write_lines(
        &run.path("sweep_alpha.csv"),
        "alpha,l_t,l_e,ade,fde,min_ade,min_fde,chi2_velocity,chi2_acceleration,chi2_angular_velocity,chi2_angular_acceleration",
        rows.iter().map(|r| {
            let c = &r.report.chi2;
            format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.alpha,
                r.final_l_t,
                r.final_l_e.map_or(String::new(), |v| v.to_string()),
                r.report.ade,
                r.report.fde,
                r.report.min_ade,
                r.report.min_fde,
                c.velocity,
                c.acceleration,
                c.angular_velocity,
                c.angular_acceleration
            )
        }),
    )?;
    write_json(&run.path("sweep_alpha.json"), &rows)?;
    run.echo_config("sweep_alpha")?;
    Ok(rows)
}
