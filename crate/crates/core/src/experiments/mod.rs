//! Seeded Monte Carlo experiments: score means and variances, variance
//! orderings between corrections, and density curves of the score laws.

mod config;
mod density;
mod engine;
pub mod presets;
pub mod stats;

pub use config::{DensityGrid, ExperimentConfig, ModelSpec, ScoreStream};
pub use density::{
    cell_averaged_density, curve_label, default_bandwidth, density_curves, density_curves_from, kernel_density,
    needs_samples, CurveKind, DensityCurve, DensityReport,
};
pub use engine::{
    check_variance_inequality, expected_base_score, expected_orderings, run_experiment, simulate_scores,
    variance_inequality_report, ChunkScores, ExperimentRunner, InequalityReport, McSummary, ScoreSamples,
    StreamSummary, VarianceComparison,
};
pub use stats::{ks_statistic, pairwise_sum, Moments};
