mod common;

use proptest::prelude::*;
use rand::Rng;
use trajplaus::datakit::walking_pose;
use trajplaus::geometry::Rigid2;
use trajplaus::gradcore::TrainConfig;
use trajplaus::locoval::{canonicalize, train_locoval, FeatureLayout, LocoValConfig};
use trajplaus::metrics::mean;
use trajplaus::oracle::{build_plausibility_dataset, OracleParams, PairLabel, PlausibilitySample};
use trajplaus::ObservableState;

fn layout(include_pose: bool) -> FeatureLayout {
    let names = walking_pose(0.0, 1.0, 0.0).joints.names().map(String::from).collect();
    FeatureLayout { t_f: 8, joint_names: if include_pose { names } else { Vec::new() }, include_pose, include_velocity: true }
}

fn small_config(steps: usize, holdout: f64) -> LocoValConfig {
    LocoValConfig {
        hidden_layers: vec![32, 32],
        holdout_fraction: holdout,
        eval_every: 50,
        train: TrainConfig { total_steps: steps, batch_size: 16, learning_rate: 3e-3, ..TrainConfig::default() },
        ..LocoValConfig::default()
    }
}

fn sample(seed: u64, reward: f64) -> PlausibilitySample {
    let mut r = common::rng(seed);
    let pose = walking_pose(r.random_range(-3.0..3.0), 1.2, 0.0);
    let state = pose.to_state([r.random_range(-5.0..5.0), r.random_range(-5.0..5.0)]);
    PlausibilitySample {
        trajectory: common::random_walk(&mut r, state.root(), 8),
        observable: state.observable(),
        heading: state.heading,
        reward,
        label: PairLabel::PlausiblePair,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn features_are_rigid_invariant(
        seed in 0u64..100_000,
        angle in -3.2f64..3.2,
        dx in -100.0f64..100.0,
        dy in -100.0f64..100.0,
        pose in any::<bool>(),
    ) {
        let s = sample(seed, 0.5);
        let l = layout(pose);
        let obs = if pose { s.observable.clone() } else { ObservableState::pose_free(s.observable.root, s.observable.root_velocity) };
        let tf = Rigid2::new(angle, [dx, dy]);
        let a = canonicalize(&l, &s.trajectory, &obs).unwrap();
        let b = canonicalize(&l, &s.trajectory.transformed(&tf), &obs.transformed(&tf)).unwrap();
        prop_assert_eq!(a.len(), l.input_size());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
        }
    }
}

#[test]
fn single_sample_is_fitted() {
    let data = vec![sample(1, 0.37)];
    let (m, _) = train_locoval(&data, &small_config(400, 0.0)).unwrap();
    let s = m.score(&data[0].trajectory, &data[0].observable).unwrap();
    assert!((s - 0.37).powi(2) < 1e-4, "{s}");
}

#[test]
fn constant_target_is_reproduced() {
    let data: Vec<_> = (0..40).map(|i| sample(100 + i, 0.8)).collect();
    let (m, _) = train_locoval(&data, &small_config(600, 0.0)).unwrap();
    for s in &data {
        let v = m.score(&s.trajectory, &s.observable).unwrap();
        assert!((v - 0.8).abs() <= 0.02, "{v}");
    }
}

#[test]
fn scores_are_bounded_batched_and_rigid_invariant() {
    let data: Vec<_> = (0..20).map(|i| sample(200 + i, 0.5)).collect();
    let (m, _) = train_locoval(&data, &small_config(20, 0.0)).unwrap();
    let obs = &data[0].observable;
    let cands: Vec<_> = data.iter().map(|s| s.trajectory.clone()).collect();
    assert!(m.score_batch(&[], obs).unwrap().is_empty());
    assert_eq!(m.score_batch(&cands[..1], obs).unwrap(), vec![m.score(&cands[0], obs).unwrap()]);
    let batch = m.score_batch(&cands, obs).unwrap();
    let tf = Rigid2::new(1.1, [3.0, -7.0]);
    for (c, &b) in cands.iter().zip(&batch) {
        assert_eq!(b, m.score(c, obs).unwrap());
        assert!(b > 0.0 && b < 1.0);
        let moved = m.score(&c.transformed(&tf), &obs.transformed(&tf)).unwrap();
        assert!((moved - b).abs() < 1e-9);
    }
}

#[test]
fn trained_surrogate_separates_pair_kinds() {
    let (poses, trajs) = common::banks(31, 80);
    let p = OracleParams::default();
    let (train, _) = build_plausibility_dataset(&poses, &trajs, 200, 200, &p, 1).unwrap();
    let (test, _) = build_plausibility_dataset(&poses, &trajs, 100, 100, &p, 2).unwrap();
    let cfg = LocoValConfig { train: TrainConfig { total_steps: 1500, ..TrainConfig::default() }, ..LocoValConfig::default() };
    let (m, report) = train_locoval(&train, &cfg).unwrap();
    assert!(report.best_step > 0);
    let score = |label| {
        let v: Vec<f64> =
            test.iter().filter(|s| s.label == label).map(|s| m.score(&s.trajectory, &s.observable).unwrap()).collect();
        mean(&v)
    };
    let gap = score(PairLabel::PlausiblePair) - score(PairLabel::ImplausiblePair);
    assert!(gap >= 0.15, "gap {gap}");
}
