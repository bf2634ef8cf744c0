#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use trajplaus::datakit::{generate_pose_bank, generate_synthetic, trajectory_bank, BankPose, ScenarioConfig};
use trajplaus::{Trajectory, DEFAULT_DT};

pub const T_F: usize = 12;

/// Pose bank and start-plus-future trajectory bank from seeded synthetic tracks.
pub fn banks(seed: u64, n_tracks: usize) -> (Vec<BankPose>, Vec<Trajectory>) {
    let ds = generate_synthetic(&ScenarioConfig::default(), n_tracks, seed).unwrap();
    let trajs = trajectory_bank(&ds, T_F, 4).unwrap();
    let poses = generate_pose_bank(100, (0.6, 1.8), seed + 1).unwrap();
    (poses, trajs)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_trajectory(rng: &mut impl Rng, len: usize) -> Trajectory {
    let pts = (0..len).map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]).collect();
    Trajectory::new(pts, DEFAULT_DT).unwrap()
}

/// Random walk with steps of roughly walking length.
pub fn random_walk(rng: &mut impl Rng, start: [f64; 2], len: usize) -> Trajectory {
    let mut p = start;
    let mut h: f64 = rng.random_range(-3.0..3.0);
    let pts = (0..len)
        .map(|_| {
            h += rng.random_range(-0.4..0.4);
            let s = rng.random_range(0.2..0.7);
            p = [p[0] + s * h.cos(), p[1] + s * h.sin()];
            p
        })
        .collect();
    Trajectory::new(pts, DEFAULT_DT).unwrap()
}

/// Double-loop reference implementations used as oracles for the metrics.
pub mod brute {
    use trajplaus::Trajectory;

    fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    pub fn ade(p: &Trajectory, g: &Trajectory) -> f64 {
        let mut s = 0.0;
        for t in 0..g.len() {
            s += dist(p.points()[t], g.points()[t]);
        }
        s / g.len() as f64
    }

    pub fn fde(p: &Trajectory, g: &Trajectory) -> f64 {
        dist(p.last(), g.last())
    }

    pub fn min_of(f: fn(&Trajectory, &Trajectory) -> f64, preds: &[Trajectory], g: &Trajectory) -> f64 {
        let mut best = f64::INFINITY;
        for p in preds {
            let v = f(p, g);
            if v < best {
                best = v;
            }
        }
        best
    }

    /// Chi-square distance with bins counted one by one. Bin edges use the
    /// same fractional-position rule as the library so edge samples agree.
    pub fn chi2(pred: &[f64], gt: &[f64], n_bins: usize, lo: f64, hi: f64) -> f64 {
        let bin_of = |x: f64| {
            let f = ((x - lo) / (hi - lo) * n_bins as f64).floor();
            if f < 0.0 {
                0
            } else if f >= n_bins as f64 {
                n_bins - 1
            } else {
                f as usize
            }
        };
        let mut cp = vec![0usize; n_bins];
        let mut cq = vec![0usize; n_bins];
        for &x in pred {
            cp[bin_of(x)] += 1;
        }
        for &x in gt {
            cq[bin_of(x)] += 1;
        }
        let mut d = 0.0;
        for b in 0..n_bins {
            let p = cp[b] as f64 / pred.len() as f64;
            let q = cq[b] as f64 / gt.len() as f64;
            if p + q > 0.0 {
                d += (p - q) * (p - q) / (p + q);
            }
        }
        d
    }
}

pub mod fixture {
    use trajplaus::datakit::{generate_pose_bank, generate_synthetic, make_training_instances, trajectory_bank, ScenarioConfig, TrainingInstance};
    use trajplaus::gradcore::TrainConfig;
    use trajplaus::locoval::{train_locoval, LocoValConfig, LocoValModel};
    use trajplaus::oracle::{build_plausibility_dataset, OracleParams};

    pub const T_P: usize = 8;
    pub const T_F: usize = 12;

    /// Seeded tracks cut into predictor instances, plus a surrogate trained
    /// on `n_pairs` plausible and `n_pairs` implausible pairs.
    pub struct Fixture {
        pub train: Vec<TrainingInstance>,
        pub eval: Vec<TrainingInstance>,
        pub locoval: LocoValModel,
    }

    pub fn build(seed: u64, n_tracks: usize, n_pairs: usize, locoval_steps: usize) -> Fixture {
        let sc = ScenarioConfig::default();
        let train_ds = generate_synthetic(&sc, n_tracks, seed * 10).unwrap();
        let eval_ds = generate_synthetic(&sc, (n_tracks / 4).max(4), seed * 10 + 1).unwrap();
        let poses = generate_pose_bank(200, (0.6, 1.8), seed * 10 + 2).unwrap();
        let bank = trajectory_bank(&train_ds, T_F, 4).unwrap();
        let (pairs, _) =
            build_plausibility_dataset(&poses, &bank, n_pairs, n_pairs, &OracleParams::default(), seed * 10 + 3).unwrap();
        let cfg = LocoValConfig {
            train: TrainConfig { total_steps: locoval_steps, seed: seed * 10 + 6, ..TrainConfig::default() },
            ..LocoValConfig::default()
        };
        let (locoval, _) = train_locoval(&pairs, &cfg).unwrap();
        let (train, _) = make_training_instances(&train_ds, Some(&poses), T_P, T_F, 2, seed * 10 + 4).unwrap();
        let (eval, _) = make_training_instances(&eval_ds, Some(&poses), T_P, T_F, 4, seed * 10 + 5).unwrap();
        Fixture { train, eval, locoval }
    }
}
