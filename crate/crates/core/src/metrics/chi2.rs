use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CHI2_BINS: usize = 50;

/// Uniform histogram over `[lo, hi]`; samples outside fall into the end bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub n_bins: usize,
    pub lo: f64,
    pub hi: f64,
}

impl HistogramSpec {
    pub fn new(n_bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::Config("histograms need at least 2 bins".into()));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("bad histogram range [{lo}, {hi}]")));
        }
        Ok(Self { n_bins, lo, hi })
    }

    /// Range of `samples` widened by `margin` of its span on each side.
    pub fn from_samples(samples: &[f64], n_bins: usize, margin: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::input("cannot derive a histogram range from no samples"));
        }
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        if span < 1e-9 {
            return Self::new(n_bins, lo - 0.5, hi + 0.5);
        }
        Self::new(n_bins, lo - margin * span, hi + margin * span)
    }

    pub fn bin(&self, x: f64) -> usize {
        let f = (x - self.lo) / (self.hi - self.lo) * self.n_bins as f64;
        if f.is_nan() || f < 0.0 {
            0
        } else {
            (f as usize).min(self.n_bins - 1)
        }
    }

    pub fn normalized(&self, samples: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.n_bins];
        for &x in samples {
            h[self.bin(x)] += 1.0;
        }
        let n = samples.len() as f64;
        h.iter_mut().for_each(|v| *v /= n);
        h
    }
}

/// Chi-square distance between the normalized histograms of two sample sets,
/// sum of (p - q)^2 / (p + q) with empty-empty bins contributing zero. Lies in [0, 2].
pub fn chi2_distance(pred: &[f64], gt: &[f64], spec: &HistogramSpec) -> Result<f64> {
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::input("chi-square distance needs non-empty sample sets"));
    }
    let p = spec.normalized(pred);
    let q = spec.normalized(gt);
    Ok(p.iter()
        .zip(&q)
        .map(|(&a, &b)| if a + b > 0.0 { (a - b).powi(2) / (a + b) } else { 0.0 })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sets_zero() {
        let s = HistogramSpec::new(10, 0.0, 1.0).unwrap();
        let x = [0.1, 0.2, 0.2, 0.9];
        assert_eq!(chi2_distance(&x, &x, &s).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_support_two() {
        let s = HistogramSpec::new(10, 0.0, 1.0).unwrap();
        let d = chi2_distance(&[0.05, 0.06], &[0.95, 0.51], &s).unwrap();
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hand_histogram() {
        // 4 bins over [0, 4): p = [1/2, 1/2, 0, 0], q = [1/4, 1/4, 1/2, 0]
        // chi2 = (1/4)^2/(3/4) * 2 + (1/2)^2/(1/2) = 1/6 + 1/2 = 2/3
        let s = HistogramSpec::new(4, 0.0, 4.0).unwrap();
        let d = chi2_distance(&[0.5, 1.5], &[0.2, 1.2, 2.2, 2.7], &s).unwrap();
        assert!((d - 2.0 / 3.0).abs() < 1e-15, "{d}");
    }

    #[test]
    fn empty_rejected() {
        let s = HistogramSpec::new(4, 0.0, 4.0).unwrap();
        assert!(chi2_distance(&[], &[1.0], &s).is_err());
    }

    #[test]
    fn bad_spec_rejected() {
        assert!(HistogramSpec::new(1, 0.0, 1.0).is_err());
        assert!(HistogramSpec::new(5, 1.0, 1.0).is_err());
    }
}
