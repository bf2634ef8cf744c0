//! Command-line front end: argument parsing and the pipeline commands.

pub mod candidates;
pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use crate::error::Result;
use commands::Run;
use config::{RunConfig, OUT_ENV};

#[derive(Debug, Parser)]
#[command(name = "trajplaus", version, about = "Plausibility-aware trajectory prediction toolkit")]
pub struct Cli {
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory (overrides the config and the environment).
    #[arg(long, global = true, env = OUT_ENV)]
    pub out: Option<PathBuf>,

    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic tracks, a pose bank and the oracle-labelled pair dataset.
    GenData {
        #[arg(long)]
        n_train_tracks: Option<usize>,
        #[arg(long)]
        n_eval_tracks: Option<usize>,
        /// Number of plausible and of implausible pairs.
        #[arg(long)]
        n_pairs: Option<usize>,
    },
    /// Fit the plausibility surrogate on the pair dataset.
    TrainLocoval {
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Train a multi-head predictor, optionally regularized by the surrogate.
    TrainPredictor {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Checkpoint name inside the output directory.
        #[arg(long, default_value = "predictor")]
        name: String,
        /// Train on the surrogate term alone.
        #[arg(long)]
        no_gt_loss: bool,
    },
    /// Evaluate a predictor on the held-out tracks.
    Eval {
        /// Predictor checkpoint; defaults to `<out>/predictor.json`.
        #[arg(long)]
        predictor: Option<PathBuf>,
        /// Also filter the heads at this threshold.
        #[arg(long)]
        filter: Option<f64>,
        /// Prefix for the written reports.
        #[arg(long, default_value = "eval")]
        name: String,
    },
    /// Score and filter candidate trajectories read from a file.
    Filter {
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        /// Surrogate checkpoint; defaults to `<out>/locoval.json`.
        #[arg(long)]
        locoval: Option<PathBuf>,
        /// Report path; defaults to `<out>/filter_report.json`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sweep the filter threshold or the regularization weight.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
        /// Comma-separated values; defaults to the config lists.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Predictor checkpoint for threshold sweeps.
        #[arg(long)]
        predictor: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Lambda,
    Alpha,
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out_dir = Some(o.clone());
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match &cli.command {
        Command::GenData { n_train_tracks, n_eval_tracks, n_pairs } => {
            if let Some(n) = n_train_tracks {
                cfg.data.n_train_tracks = *n;
            }
            if let Some(n) = n_eval_tracks {
                cfg.data.n_eval_tracks = *n;
            }
            if let Some(n) = n_pairs {
                cfg.data.n_plausible = *n;
                cfg.data.n_implausible = *n;
            }
        }
        Command::TrainLocoval { steps } => {
            if let Some(s) = steps {
                cfg.locoval.train.total_steps = *s;
            }
        }
        Command::TrainPredictor { alpha, k, epochs, no_gt_loss, .. } => {
            if let Some(a) = alpha {
                cfg.predictor.alpha = *a;
            }
            if let Some(k) = k {
                cfg.predictor.k = *k;
            }
            if let Some(e) = epochs {
                cfg.predictor.epochs = *e;
            }
            if *no_gt_loss {
                cfg.predictor.use_gt_loss = false;
            }
        }
        Command::Eval { filter, .. } => {
            if filter.is_some() {
                cfg.eval.lambda = *filter;
            }
        }
        Command::Filter { lambda, .. } => {
            if lambda.is_some() {
                cfg.eval.lambda = *lambda;
            }
        }
        Command::Sweep { kind, values: Some(v), .. } => match kind {
            SweepKind::Lambda => cfg.sweep.lambdas = v.clone(),
            SweepKind::Alpha => cfg.sweep.alphas = v.clone(),
        },
        Command::Sweep { .. } => {}
    }
    Ok(cfg)
}

/// Runs one parsed command.
pub fn run(cli: Cli) -> Result<()> {
    let run = Run::new(build_config(&cli)?)?;
    let default_predictor = || run.path("predictor.json");
    match &cli.command {
        Command::GenData { .. } => {
            let s = commands::gen_data(&run)?;
            println!(
                "{} train / {} eval tracks, {} poses, {} plausible + {} implausible pairs",
                s.train_tracks, s.eval_tracks, s.poses, s.plausible, s.implausible
            );
            println!(
                "mean oracle reward: plausible {:.3}, implausible {:.3}",
                s.mean_reward_plausible, s.mean_reward_implausible
            );
            if s.mean_reward_plausible <= s.mean_reward_implausible {
                warn!("plausible pairs do not score above implausible ones");
            }
        }
        Command::TrainLocoval { .. } => {
            let s = commands::cmd_train_locoval(&run)?;
            println!("trained on {} pairs ({} held out), best step {}", s.n_train, s.n_holdout, s.best_step);
            match s.holdout_pearson {
                Some(r) => println!("held-out Pearson {r:.4}"),
                None => println!("held-out Pearson undefined"),
            }
        }
        Command::TrainPredictor { name, .. } => {
            let (path, logs) = commands::cmd_train_predictor(&run, name)?;
            if let Some(l) = logs.last() {
                println!("final epoch {}: L_T {:.5}, L_E {}", l.epoch, l.l_t, l.l_e.map_or("-".into(), |v| format!("{v:.5}")));
            }
            println!("wrote {}", path.display());
        }
        Command::Eval { predictor, name, .. } => {
            let p = predictor.clone().unwrap_or_else(default_predictor);
            let o = commands::cmd_eval(&run, &p, name, run.config.eval.lambda)?;
            let r = &o.report;
            println!(
                "ADE {:.4} FDE {:.4} minADE {:.4} minFDE {:.4} over {} samples",
                r.ade, r.fde, r.min_ade, r.min_fde, r.n_samples
            );
            println!(
                "chi2 velocity {:.4} acceleration {:.4} angular velocity {:.4} angular acceleration {:.4}",
                r.chi2.velocity, r.chi2.acceleration, r.chi2.angular_velocity, r.chi2.angular_acceleration
            );
            if let Some(t) = o.bin_trend {
                info!("plausibility/ADE rank correlation {t:.3}");
            }
            if let Some(f) = &o.filter {
                println!(
                    "lambda {}: rejection rate {:.3}, kept ADE {:.4}, rejected ADE {}",
                    f.lambda,
                    f.rejection_rate,
                    f.kept.ade,
                    f.rejected.as_ref().map_or("-".into(), |r| format!("{:.4}", r.ade))
                );
            }
        }
        Command::Filter { candidates, locoval, output, .. } => {
            let lambda = run.config.eval.lambda.unwrap_or(crate::filter::DEFAULT_LAMBDA);
            let out = output.clone().unwrap_or_else(|| run.path("filter_report.json"));
            let reports = commands::cmd_filter(&run, candidates, locoval.as_deref(), lambda, &out)?;
            for r in &reports {
                println!(
                    "{}: kept {} rejected {}{}",
                    r.case,
                    r.report.kept.len(),
                    r.report.rejected.len(),
                    if r.report.fallback_used { " (fallback)" } else { "" }
                );
            }
        }
        Command::Sweep { kind: SweepKind::Lambda, predictor, .. } => {
            let p = predictor.clone().unwrap_or_else(default_predictor);
            for r in commands::cmd_sweep_lambda(&run, &p, &run.config.sweep.lambdas)? {
                println!("lambda {:.2}: rejection {:.3} kept ADE {:.4}", r.lambda, r.rejection_rate, r.kept.ade);
            }
        }
        Command::Sweep { kind: SweepKind::Alpha, .. } => {
            for r in commands::cmd_sweep_alpha(&run, &run.config.sweep.alphas)? {
                println!(
                    "alpha {}: ADE {:.4} minADE {:.4} chi2 velocity {:.4}",
                    r.alpha, r.report.ade, r.report.min_ade, r.report.chi2.velocity
                );
            }
        }
    }
    Ok(())
}

