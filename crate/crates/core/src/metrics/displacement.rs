use crate::error::{Error, Result};
use crate::geometry::{norm, sub};
use crate::trajectory::Trajectory;

fn same_len(pred: &Trajectory, gt: &Trajectory) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::Shape { expected: gt.len(), got: pred.len() });
    }
    Ok(())
}

/// Euclidean error at every frame.
pub fn per_timestep_errors(pred: &Trajectory, gt: &Trajectory) -> Result<Vec<f64>> {
    same_len(pred, gt)?;
    Ok(pred.points().iter().zip(gt.points()).map(|(&p, &g)| norm(sub(p, g))).collect())
}

/// Average displacement error, m.
pub fn ade(pred: &Trajectory, gt: &Trajectory) -> Result<f64> {
    let e = per_timestep_errors(pred, gt)?;
    Ok(e.iter().sum::<f64>() / e.len() as f64)
}

/// Final displacement error, m.
pub fn fde(pred: &Trajectory, gt: &Trajectory) -> Result<f64> {
    same_len(pred, gt)?;
    Ok(norm(sub(pred.last(), gt.last())))
}

/// Smallest value of `metric` over all candidate trajectories.
pub fn min_over_heads(
    metric: impl Fn(&Trajectory, &Trajectory) -> Result<f64>,
    preds: &[Trajectory],
    gt: &Trajectory,
) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::input("need at least one prediction"));
    }
    let mut best = f64::INFINITY;
    for p in preds {
        best = best.min(metric(p, gt)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(pts: &[[f64; 2]]) -> Trajectory {
        Trajectory::new(pts.to_vec(), 0.4).unwrap()
    }

    #[test]
    fn zero_for_identical() {
        let a = t(&[[0.0, 0.0], [1.0, 1.0], [2.0, 3.0]]);
        assert_eq!(ade(&a, &a).unwrap(), 0.0);
        assert_eq!(fde(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn unit_offset() {
        let a = t(&[[0.0, 0.0], [1.0, 1.0], [2.0, 3.0]]);
        let b = t(&[[1.0, 0.0], [2.0, 1.0], [3.0, 3.0]]);
        assert_eq!(ade(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn hand_instance() {
        // per-frame distances 0, 5, 1
        let a = t(&[[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]]);
        let b = t(&[[0.0, 0.0], [0.0, 0.0], [1.0, 2.0]]);
        assert!((ade(&a, &b).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(fde(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn three_four_five() {
        let a = t(&[[0.0, 0.0], [3.0, 4.0]]);
        let b = t(&[[0.0, 0.0], [0.0, 0.0]]);
        assert_eq!(fde(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn length_mismatch() {
        let a = t(&[[0.0, 0.0], [3.0, 4.0]]);
        let b = t(&[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]);
        assert!(ade(&a, &b).is_err());
        assert!(fde(&a, &b).is_err());
    }

    #[test]
    fn min_over_single_head_is_plain_metric() {
        let a = t(&[[0.0, 0.0], [3.0, 4.0]]);
        let b = t(&[[0.5, 0.0], [0.0, 1.0]]);
        assert_eq!(min_over_heads(ade, &[a.clone()], &b).unwrap().to_bits(), ade(&a, &b).unwrap().to_bits());
        assert_eq!(min_over_heads(ade, &[a, b.clone()], &b).unwrap(), 0.0);
    }
}
