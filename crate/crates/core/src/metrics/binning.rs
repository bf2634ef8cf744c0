use serde::{Deserialize, Serialize};

use super::stats::spearman;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Zero for empty bins.
    pub mean_ade: f64,
}

/// Groups `(score, ade)` pairs into `n_bins` uniform score bins over [0, 1].
pub fn bin_by_plausibility(scored: &[(f64, f64)], n_bins: usize) -> Vec<PlausibilityBin> {
    let n = n_bins.max(1);
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for &(s, a) in scored {
        let b = ((s.clamp(0.0, 1.0) * n as f64) as usize).min(n - 1);
        sums[b] += a;
        counts[b] += 1;
    }
    (0..n)
        .map(|b| PlausibilityBin {
            lo: b as f64 / n as f64,
            hi: (b + 1) as f64 / n as f64,
            count: counts[b],
            mean_ade: if counts[b] > 0 { sums[b] / counts[b] as f64 } else { 0.0 },
        })
        .collect()
}

/// Spearman correlation between bin index and mean ADE over non-empty bins.
/// Negative when low-score bins carry larger errors.
pub fn bin_trend(bins: &[PlausibilityBin]) -> Option<f64> {
    let (idx, ade): (Vec<f64>, Vec<f64>) = bins
        .iter()
        .enumerate()
        .filter(|(_, b)| b.count > 0)
        .map(|(i, b)| (i as f64, b.mean_ade))
        .unzip();
    spearman(&idx, &ade)
}
