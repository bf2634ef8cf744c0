use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{walking_pose, Track, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::geometry::{heading_of, norm, sub, Vec2};
use crate::oracle::{rollout, OracleParams};
use crate::trajectory::{Trajectory, DEFAULT_DT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Straight,
    SpeedChange,
    Turn,
    StopAndGo,
}

/// Relative weights of the scenario templates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioMix {
    pub straight: f64,
    pub speed_change: f64,
    pub turn: f64,
    pub stop_and_go: f64,
}

impl Default for ScenarioMix {
    fn default() -> Self {
        Self { straight: 0.3, speed_change: 0.25, turn: 0.3, stop_and_go: 0.15 }
    }
}

impl ScenarioMix {
    pub fn only(s: Scenario) -> Self {
        let mut m = Self { straight: 0.0, speed_change: 0.0, turn: 0.0, stop_and_go: 0.0 };
        match s {
            Scenario::Straight => m.straight = 1.0,
            Scenario::SpeedChange => m.speed_change = 1.0,
            Scenario::Turn => m.turn = 1.0,
            Scenario::StopAndGo => m.stop_and_go = 1.0,
        }
        m
    }

    fn weights(&self) -> [(Scenario, f64); 4] {
        [
            (Scenario::Straight, self.straight),
            (Scenario::SpeedChange, self.speed_change),
            (Scenario::Turn, self.turn),
            (Scenario::StopAndGo, self.stop_and_go),
        ]
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Scenario {
        let total: f64 = self.weights().iter().map(|w| w.1).sum();
        let mut u = rng.random_range(0.0..total);
        for (s, w) in self.weights() {
            if u < w {
                return s;
            }
            u -= w;
        }
        Scenario::Straight
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub mix: ScenarioMix,
    /// Cruise speed range, m/s.
    pub speed_range: (f64, f64),
    /// Largest speed change rate for speed-change and stop-and-go tracks, m/s^2.
    pub max_accel: f64,
    /// Path curvature range for turning tracks, 1/m.
    pub curvature_range: (f64, f64),
    /// Positional noise standard deviation, m.
    pub noise_sigma: f64,
    pub track_len: usize,
    pub dt: f64,
    /// Every track must reach at least this oracle reward.
    pub min_reward: f64,
    pub oracle: OracleParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mix: ScenarioMix::default(),
            speed_range: (0.8, 1.6),
            max_accel: 0.6,
            curvature_range: (0.1, 0.5),
            noise_sigma: 0.02,
            track_len: 28,
            dt: DEFAULT_DT,
            min_reward: 0.7,
            oracle: OracleParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.oracle.validate()?;
        let gen = |m: String| Err(Error::Generation(m));
        let (v_lo, v_hi) = self.speed_range;
        if !(v_lo > 0.0 && v_lo <= v_hi) {
            return gen(format!("bad speed range {:?}", self.speed_range));
        }
        if v_hi > self.oracle.v_max {
            return gen(format!("speed {v_hi} exceeds the walker speed cap {}", self.oracle.v_max));
        }
        if !(self.max_accel >= 0.0) || self.max_accel > self.oracle.a_max {
            return gen(format!("acceleration {} exceeds the cap {}", self.max_accel, self.oracle.a_max));
        }
        let (k_lo, k_hi) = self.curvature_range;
        if !(k_lo >= 0.0 && k_lo <= k_hi) {
            return gen(format!("bad curvature range {:?}", self.curvature_range));
        }
        if v_hi * k_hi > self.oracle.turn_rate_max {
            return gen(format!(
                "curvature {k_hi} at speed {v_hi} needs turn rate {} > cap {}",
                v_hi * k_hi,
                self.oracle.turn_rate_max
            ));
        }
        if v_hi * v_hi * k_hi > self.oracle.a_max {
            return gen(format!("curvature {k_hi} at speed {v_hi} exceeds the acceleration cap"));
        }
        if self.track_len < 3 {
            return gen("tracks need at least 3 points".into());
        }
        if !(self.dt > 0.0) || !(self.noise_sigma >= 0.0) {
            return gen("dt must be positive and noise non-negative".into());
        }
        let total: f64 = self.mix.weights().iter().map(|w| w.1).sum();
        if self.mix.weights().iter().any(|w| w.1 < 0.0) || !(total > 0.0) {
            return gen("scenario weights must be non-negative with a positive sum".into());
        }
        Ok(())
    }
}

/// Speed and heading for each of the `n - 1` steps of a template.
fn profile<R: Rng + ?Sized>(s: Scenario, cfg: &ScenarioConfig, rng: &mut R) -> Vec<(f64, f64)> {
    let n = cfg.track_len - 1;
    let dt = cfg.dt;
    let (v_lo, v_hi) = cfg.speed_range;
    let cruise = if v_hi > v_lo { rng.random_range(v_lo..v_hi) } else { v_lo };
    let h0 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let accel = if cfg.max_accel > 0.0 { rng.random_range(0.3 * cfg.max_accel..=cfg.max_accel) } else { 0.0 };
    match s {
        Scenario::Straight => vec![(cruise, h0); n],
        Scenario::SpeedChange => {
            let target = if v_hi > v_lo { rng.random_range(v_lo..v_hi) } else { v_lo };
            let mut v = cruise;
            (0..n)
                .map(|_| {
                    let out = v;
                    let dv = (target - v).clamp(-accel * dt, accel * dt);
                    v += dv;
                    (out, h0)
                })
                .collect()
        }
        Scenario::Turn => {
            let (k_lo, k_hi) = cfg.curvature_range;
            let k = if k_hi > k_lo { rng.random_range(k_lo..k_hi) } else { k_lo };
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let onset = rng.random_range(0..n / 2 + 1);
            let mut h = h0;
            (0..n)
                .map(|i| {
                    let out = (cruise, h);
                    if i >= onset {
                        h += sign * k * cruise * dt;
                    }
                    out
                })
                .collect()
        }
        Scenario::StopAndGo => {
            let brake_at = rng.random_range(2..n / 2 + 3).min(n);
            let hold = rng.random_range(1..4);
            let mut v = cruise;
            let mut phase = 0; // 0 cruise, 1 braking, 2 stopped, 3 resuming
            let mut held = 0;
            (0..n)
                .map(|i| {
                    let out = (v, h0);
                    if i + 1 >= brake_at && phase == 0 {
                        phase = 1;
                    }
                    match phase {
                        1 => {
                            v = (v - accel * dt).max(0.0);
                            if v == 0.0 {
                                phase = 2;
                            }
                        }
                        2 => {
                            held += 1;
                            if held >= hold {
                                phase = 3;
                            }
                        }
                        3 => v = (v + accel * dt).min(cruise),
                        _ => {}
                    }
                    out
                })
                .collect()
        }
    }
}

fn build_points(start: Vec2, steps: &[(f64, f64)], dt: f64) -> Vec<Vec2> {
    let mut p = start;
    let mut pts = vec![p];
    for &(v, h) in steps {
        p = [p[0] + v * dt * h.cos(), p[1] + v * dt * h.sin()];
        pts.push(p);
    }
    pts
}

/// Oracle reward of following a whole track, starting from its first point
/// with the velocity of its first step.
fn track_reward(points: &[Vec2], cfg: &ScenarioConfig) -> Result<f64> {
    let d0 = sub(points[1], points[0]);
    let speed = norm(d0) / cfg.dt;
    let heading = heading_of(d0);
    let state = walking_pose(heading, speed, 0.0).to_state(points[0]);
    let future = Trajectory::new(points[1..].to_vec(), cfg.dt)?;
    rollout(&future, &state, &cfg.oracle)
}

/// Synthesizes `n_tracks` noisy pedestrian tracks from the scenario templates.
/// Tracks below the reward floor are redrawn.
pub fn generate_synthetic(cfg: &ScenarioConfig, n_tracks: usize, seed: u64) -> Result<TrajectoryDataset> {
    cfg.validate()?;
    if n_tracks == 0 {
        return Err(Error::Generation("n_tracks must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, cfg.noise_sigma.max(0.0))
        .map_err(|e| Error::Generation(e.to_string()))?;
    let mut tracks = Vec::with_capacity(n_tracks);
    for i in 0..n_tracks {
        let mut accepted = None;
        for _ in 0..100 {
            let scenario = cfg.mix.pick(&mut rng);
            let steps = profile(scenario, cfg, &mut rng);
            let start = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
            let mut pts = build_points(start, &steps, cfg.dt);
            if cfg.noise_sigma > 0.0 {
                for p in &mut pts {
                    p[0] += noise.sample(&mut rng);
                    p[1] += noise.sample(&mut rng);
                }
            }
            if track_reward(&pts, cfg)? >= cfg.min_reward {
                accepted = Some(pts);
                break;
            }
        }
        let points = accepted.ok_or_else(|| {
            Error::Generation(format!("track {i}: no draw reached reward {}", cfg.min_reward))
        })?;
        tracks.push(Track {
            ped_id: i.to_string(),
            start_frame: 0,
            points,
        });
    }
    Ok(TrajectoryDataset { tracks, dt: cfg.dt, frame_step: 1, source: format!("synthetic(seed={seed})") })
}

/// Cuts tracks into windows of `t_f + 1` points (a start point plus `t_f`
/// future points) for pairing with poses.
pub fn trajectory_bank(dataset: &TrajectoryDataset, t_f: usize, stride: usize) -> Result<Vec<Trajectory>> {
    let stride = stride.max(1);
    let mut out = Vec::new();
    for t in &dataset.tracks {
        let mut s = 0;
        while s + t_f + 1 <= t.points.len() {
            out.push(Trajectory::new(t.points[s..s + t_f + 1].to_vec(), dataset.dt)?);
            s += stride;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rotate;

    #[test]
    fn noiseless_straight_has_uniform_steps() {
        let cfg = ScenarioConfig {
            mix: ScenarioMix::only(Scenario::Straight),
            speed_range: (1.0, 1.0),
            noise_sigma: 0.0,
            ..Default::default()
        };
        let d = generate_synthetic(&cfg, 3, 4).unwrap();
        for t in &d.tracks {
            let disp: Vec<Vec2> = t.points.windows(2).map(|w| sub(w[1], w[0])).collect();
            let h = heading_of(disp[0]);
            for d in disp {
                let r = rotate(d, -h);
                assert!((r[0] - cfg.dt).abs() < 1e-12 && r[1].abs() < 1e-12, "{r:?}");
            }
        }
    }

    #[test]
    fn same_seed_same_data() {
        let cfg = ScenarioConfig::default();
        assert_eq!(generate_synthetic(&cfg, 10, 9).unwrap(), generate_synthetic(&cfg, 10, 9).unwrap());
    }

    #[test]
    fn infeasible_curvature_rejected() {
        let cfg = ScenarioConfig { curvature_range: (0.5, 2.0), ..Default::default() };
        assert!(matches!(generate_synthetic(&cfg, 1, 0), Err(Error::Generation(_))));
    }

    #[test]
    fn bank_windows() {
        let cfg = ScenarioConfig { track_len: 20, ..Default::default() };
        let d = generate_synthetic(&cfg, 2, 1).unwrap();
        let bank = trajectory_bank(&d, 12, 1).unwrap();
        assert_eq!(bank.len(), 2 * (20 - 13 + 1));
        assert!(bank.iter().all(|t| t.len() == 13));
    }
}
