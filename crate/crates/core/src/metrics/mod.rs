//! Evaluation: displacement errors, physics-primitive distributions and
//! plausibility-binned summaries.

mod binning;
mod chi2;
mod displacement;
mod primitives;
mod report;
mod stats;

pub use binning::{bin_by_plausibility, bin_trend, PlausibilityBin};
pub use chi2::{chi2_distance, HistogramSpec, DEFAULT_CHI2_BINS};
pub use displacement::{ade, fde, min_over_heads, per_timestep_errors};
pub use primitives::{physics_primitives, PhysicsPrimitives, STILL_STEP};
pub use report::{evaluate, write_bins_csv, Chi2Distances, Chi2Histograms, EvalCase, MetricsReport, SampleMetrics};
pub use stats::{mean, pearson, spearman};
