//! Chunked Monte Carlo evaluation of score streams.

use alloc::vec::Vec;

#[allow(unused_imports)] // f64 methods when `std` is absent
use num_traits::Float;

use crate::distributions::{Draw, GammaParams, GaussianParams, RngSeed, CHUNK_LEN};
use crate::error::{config as config_error, domain, Result};
use crate::experiments::config::{ExperimentConfig, ModelSpec, ScoreStream};
use crate::experiments::stats::Moments;
use crate::models::{EivModel, ModelA, ModelB};
use crate::score_laws;
use crate::scores::{
    crps_expectation_gaussian, expected_crps_gamma, expected_log_score_gamma, expected_log_score_mv_gaussian,
    vee_crps_gamma, vee_crps_gaussian, vee_log_score_gamma, vee_log_score_gaussian, wedge_log_score_gaussian,
    EivLogScorer, Forecast, ScoreKind,
};

#[derive(Debug, Clone)]
enum Evaluator {
    Additive { f: GaussianParams, model: ModelA },
    Multiplicative { f: GammaParams, model: ModelB },
    Eiv { scorer: EivLogScorer, model: EivModel },
}

/// Scores of one chunk, one vector per requested stream (in config order).
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkScores {
    pub index: u64,
    pub values: Vec<Vec<f64>>,
}

/// Full score samples of an experiment, streams in config order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSamples {
    pub streams: Vec<(ScoreStream, Vec<f64>)>,
}

impl ScoreSamples {
    pub fn get(&self, stream: ScoreStream) -> Option<&[f64]> {
        self.streams.iter().find(|(s, _)| *s == stream).map(|(_, v)| v.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamSummary {
    pub stream: ScoreStream,
    pub mean: f64,
    pub variance: f64,
    pub mean_std_error: f64,
    pub variance_std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub records: Vec<StreamSummary>,
    pub n: usize,
    pub seed: RngSeed,
}

impl McSummary {
    pub fn get(&self, stream: ScoreStream) -> Option<&StreamSummary> {
        self.records.iter().find(|r| r.stream == stream)
    }
}

/// Prepared experiment. Chunks can be simulated independently (e.g. on a
/// thread pool) and reassembled with [`ExperimentRunner::collect`]; the
/// result does not depend on the order in which chunks were produced.
#[derive(Debug, Clone)]
pub struct ExperimentRunner {
    config: ExperimentConfig,
    evaluator: Evaluator,
}

impl ExperimentRunner {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let evaluator = match (&config.model, &config.forecast) {
            (ModelSpec::AdditiveGaussian(m), Forecast::Gaussian(f)) => Evaluator::Additive { f: *f, model: *m },
            (ModelSpec::MultiplicativeGamma(m), Forecast::Gamma(f)) => Evaluator::Multiplicative { f: *f, model: *m },
            (ModelSpec::Eiv(m), Forecast::MvGaussian(f)) => Evaluator::Eiv {
                scorer: EivLogScorer::new(f, m)?,
                model: m.clone(),
            },
            _ => return Err(config_error("forecast family does not match the model")),
        };
        Ok(Self {
            config: config.clone(),
            evaluator,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn chunk_count(&self) -> usize {
        self.config.n.div_ceil(CHUNK_LEN)
    }

    fn chunk_len(&self, k: u64) -> usize {
        let start = k as usize * CHUNK_LEN;
        CHUNK_LEN.min(self.config.n.saturating_sub(start))
    }

    pub fn simulate_chunk(&self, k: u64) -> Result<ChunkScores> {
        if k as usize >= self.chunk_count() {
            return Err(domain(alloc::format!("chunk {k} out of range")));
        }
        let len = self.chunk_len(k);
        let mut rng = self.config.seed.chunk_rng(k);
        let streams = &self.config.corrections;
        let mut values: Vec<Vec<f64>> = streams.iter().map(|_| Vec::with_capacity(len)).collect();
        let kind = self.config.score_kind;
        let forecast = &self.config.forecast;
        for _ in 0..len {
            match &self.evaluator {
                Evaluator::Additive { f, model } => {
                    let (x, y) = model.draw(&mut rng);
                    for (out, s) in values.iter_mut().zip(streams) {
                        out.push(match (s, kind) {
                            (ScoreStream::NoneOnTruth, _) => forecast.score(kind, x)?,
                            (ScoreStream::NoneOnObs, _) => forecast.score(kind, y)?,
                            (ScoreStream::Wedge, _) => wedge_log_score_gaussian(f, y, model.noise_variance)?.value,
                            (ScoreStream::Vee, ScoreKind::Log) => vee_log_score_gaussian(f, y, model)?.value,
                            (ScoreStream::Vee, ScoreKind::Crps) => vee_crps_gaussian(f, y, model)?.value,
                            (ScoreStream::VeeJoint, _) => unreachable!("rejected by validation"),
                        });
                    }
                }
                Evaluator::Multiplicative { f, model } => {
                    let (x, y) = model.draw(&mut rng);
                    for (out, s) in values.iter_mut().zip(streams) {
                        out.push(match (s, kind) {
                            (ScoreStream::NoneOnTruth, _) => forecast.score(kind, x)?,
                            (ScoreStream::NoneOnObs, _) => forecast.score(kind, y)?,
                            (ScoreStream::Vee, ScoreKind::Log) => vee_log_score_gamma(f, y, model)?.value,
                            (ScoreStream::Vee, ScoreKind::Crps) => {
                                vee_crps_gamma(f, y, model, &self.config.quadrature)?.value
                            }
                            (ScoreStream::Wedge | ScoreStream::VeeJoint, _) => unreachable!("rejected by validation"),
                        });
                    }
                }
                Evaluator::Eiv { scorer, model } => {
                    let d = model.draw(&mut rng);
                    for (out, s) in values.iter_mut().zip(streams) {
                        out.push(match s {
                            ScoreStream::NoneOnTruth => scorer.base(&d.x)?,
                            ScoreStream::NoneOnObs => scorer.base(&d.y)?,
                            ScoreStream::Vee => scorer.obs_only(&d.y)?,
                            ScoreStream::VeeJoint => scorer.joint(&d.y, &d.z)?,
                            ScoreStream::Wedge => unreachable!("rejected by validation"),
                        });
                    }
                }
            }
        }
        Ok(ChunkScores { index: k, values })
    }

    /// Concatenates chunks in index order. Every chunk must be present exactly once.
    pub fn collect(&self, mut chunks: Vec<ChunkScores>) -> Result<ScoreSamples> {
        chunks.sort_by_key(|c| c.index);
        if chunks.len() != self.chunk_count() || chunks.iter().enumerate().any(|(i, c)| c.index != i as u64) {
            return Err(domain("incomplete or duplicated chunk set"));
        }
        let mut streams: Vec<(ScoreStream, Vec<f64>)> = self
            .config
            .corrections
            .iter()
            .map(|s| (*s, Vec::with_capacity(self.config.n)))
            .collect();
        for chunk in chunks {
            for ((_, all), part) in streams.iter_mut().zip(chunk.values) {
                all.extend_from_slice(&part);
            }
        }
        Ok(ScoreSamples { streams })
    }

    pub fn summarize(&self, samples: &ScoreSamples) -> McSummary {
        let records = samples
            .streams
            .iter()
            .map(|(stream, v)| {
                let m = Moments::from_samples(v);
                StreamSummary {
                    stream: *stream,
                    mean: m.mean,
                    variance: m.variance,
                    mean_std_error: m.mean_std_error(),
                    variance_std_error: m.variance_std_error(),
                }
            })
            .collect();
        McSummary {
            records,
            n: self.config.n,
            seed: self.config.seed,
        }
    }

    /// Serial simulation of all chunks.
    pub fn simulate(&self) -> Result<ScoreSamples> {
        let chunks = (0..self.chunk_count() as u64)
            .map(|k| self.simulate_chunk(k))
            .collect::<Result<Vec<_>>>()?;
        self.collect(chunks)
    }
}

pub fn simulate_scores(config: &ExperimentConfig) -> Result<ScoreSamples> {
    ExperimentRunner::new(config)?.simulate()
}

/// Draws `n` joint samples, evaluates each requested score stream and
/// returns means and variances with standard errors. Deterministic in the seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<McSummary> {
    let runner = ExperimentRunner::new(config)?;
    let samples = runner.simulate()?;
    Ok(runner.summarize(&samples))
}

/// `E[s₀(f, X)]` under the truth law of the model: the mean shared by the
/// ideal score and every proper correction.
pub fn expected_base_score(config: &ExperimentConfig) -> Result<f64> {
    config.validate()?;
    match (&config.model, &config.forecast, config.score_kind) {
        (ModelSpec::AdditiveGaussian(m), Forecast::Gaussian(f), ScoreKind::Log) => score_laws::common_mean(f, m),
        (ModelSpec::AdditiveGaussian(m), Forecast::Gaussian(f), ScoreKind::Crps) => crps_expectation_gaussian(f, &m.truth),
        (ModelSpec::MultiplicativeGamma(m), Forecast::Gamma(f), ScoreKind::Log) => expected_log_score_gamma(f, &m.truth),
        (ModelSpec::MultiplicativeGamma(m), Forecast::Gamma(f), ScoreKind::Crps) => {
            Ok(expected_crps_gamma(f, &m.truth, &config.quadrature)?.value)
        }
        (ModelSpec::Eiv(m), Forecast::MvGaussian(f), ScoreKind::Log) => expected_log_score_mv_gaussian(f, m.truth()),
        _ => Err(config_error("unsupported model/forecast/score combination")),
    }
}

/// One ordered pair `V[larger] ≥ V[smaller]` checked on sample variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceComparison {
    pub larger: ScoreStream,
    pub smaller: ScoreStream,
    /// `V̂[larger] − V̂[smaller]`.
    pub difference: f64,
    pub combined_std_error: f64,
    /// `difference ≥ −2·combined_std_error`.
    pub holds: bool,
}

impl VarianceComparison {
    /// Difference in units of the combined standard error.
    pub fn margin(&self) -> f64 {
        if self.combined_std_error > 0.0 {
            self.difference / self.combined_std_error
        } else if self.difference >= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub holds: bool,
    pub comparisons: Vec<VarianceComparison>,
}

/// Orderings asserted for each model, as (larger, smaller).
pub fn expected_orderings(model: &ModelSpec) -> &'static [(ScoreStream, ScoreStream)] {
    use ScoreStream::*;
    match model {
        ModelSpec::AdditiveGaussian(_) => &[(Wedge, Vee), (Wedge, NoneOnTruth), (NoneOnTruth, Vee)],
        ModelSpec::MultiplicativeGamma(_) => &[(NoneOnTruth, Vee)],
        ModelSpec::Eiv(_) => &[(Vee, VeeJoint), (NoneOnTruth, Vee), (NoneOnTruth, VeeJoint)],
    }
}

/// Compares sample variances of the requested streams against the orderings
/// of [`expected_orderings`], allowing −2 combined standard errors of slack.
pub fn variance_inequality_report(model: &ModelSpec, summary: &McSummary) -> Result<InequalityReport> {
    if summary.records.len() < 2 {
        return Err(config_error("the variance inequality needs at least two corrections"));
    }
    let comparisons: Vec<VarianceComparison> = expected_orderings(model)
        .iter()
        .filter_map(|&(hi, lo)| {
            let (a, b) = (summary.get(hi)?, summary.get(lo)?);
            let difference = a.variance - b.variance;
            let combined_std_error = (a.variance_std_error.powi(2) + b.variance_std_error.powi(2)).sqrt();
            Some(VarianceComparison {
                larger: hi,
                smaller: lo,
                difference,
                combined_std_error,
                holds: difference >= -2.0 * combined_std_error,
            })
        })
        .collect();
    if comparisons.is_empty() {
        return Err(config_error("the requested corrections contain no comparable pair"));
    }
    Ok(InequalityReport {
        holds: comparisons.iter().all(|c| c.holds),
        comparisons,
    })
}

pub fn check_variance_inequality(config: &ExperimentConfig) -> Result<InequalityReport> {
    if config.corrections.len() < 2 {
        return Err(config_error("the variance inequality needs at least two corrections"));
    }
    let summary = run_experiment(config)?;
    variance_inequality_report(&config.model, &summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::MvGaussianParams;
    use crate::experiments::presets::{fig1, fig2, fig3, Panel};
    use nalgebra::{DMatrix, DVector};

    const SEED: RngSeed = RngSeed::new(77, 1);

    #[test]
    fn chunks_reassemble_in_any_order() {
        let cfg = fig1(Panel::Right, 1.0, 3 * CHUNK_LEN + 17, SEED).unwrap();
        let runner = ExperimentRunner::new(&cfg).unwrap();
        assert_eq!(runner.chunk_count(), 4);
        let mut chunks: Vec<_> = (0..4).rev().map(|k| runner.simulate_chunk(k).unwrap()).collect();
        chunks.swap(1, 2);
        let a = runner.collect(chunks).unwrap();
        assert_eq!(a, runner.simulate().unwrap());
        assert_eq!(a.get(ScoreStream::Vee).unwrap().len(), cfg.n);
        assert!(runner.simulate_chunk(4).is_err());
        assert!(runner.collect(Vec::new()).is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = fig2(Panel::Left, 1.0, 20_000, SEED).unwrap();
        assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
        let other = ExperimentConfig {
            seed: RngSeed::new(78, 1),
            ..cfg.clone()
        };
        assert_ne!(run_experiment(&cfg).unwrap(), run_experiment(&other).unwrap());
    }

    #[test]
    fn zero_noise_streams_coincide() {
        let cfg = ExperimentConfig::new(
            ModelSpec::AdditiveGaussian(ModelA::new(GaussianParams::new(1.0, 4.0).unwrap(), 0.0).unwrap()),
            Forecast::Gaussian(GaussianParams::new(0.0, 4.0).unwrap()),
            ScoreKind::Log,
            &[ScoreStream::NoneOnTruth, ScoreStream::NoneOnObs, ScoreStream::Wedge, ScoreStream::Vee],
            5_000,
            SEED,
        )
        .unwrap();
        let s = simulate_scores(&cfg).unwrap();
        let base = s.get(ScoreStream::NoneOnTruth).unwrap();
        for (_, v) in &s.streams {
            for (a, b) in v.iter().zip(base) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn means_agree_with_expected_base_score() {
        for cfg in [
            fig1(Panel::Right, 1.0, 200_000, SEED).unwrap(),
            fig2(Panel::Right, 1.0, 200_000, SEED).unwrap(),
            fig3(6.0, 200_000, SEED).unwrap(),
        ] {
            let target = expected_base_score(&cfg).unwrap();
            let summary = run_experiment(&cfg).unwrap();
            for r in &summary.records {
                if r.stream == ScoreStream::NoneOnObs {
                    continue;
                }
                assert!((r.mean - target).abs() < 4.0 * r.mean_std_error, "{:?} {} vs {}", r.stream, r.mean, target);
            }
        }
    }

    #[test]
    fn inequality_report_for_model_a() {
        let cfg = fig1(Panel::Right, 4.0, 100_000, SEED).unwrap();
        let report = check_variance_inequality(&cfg).unwrap();
        assert!(report.holds);
        assert_eq!(report.comparisons.len(), 1);
        assert_eq!(report.comparisons[0].larger, ScoreStream::Wedge);
        assert!(report.comparisons[0].margin() > 2.0);
    }

    #[test]
    fn inequality_needs_comparable_pair() {
        let mut cfg = fig1(Panel::Right, 1.0, 1_000, SEED).unwrap();
        cfg.corrections = alloc::vec![ScoreStream::Vee];
        assert!(matches!(check_variance_inequality(&cfg), Err(crate::Error::Config(_))));
        cfg.corrections = alloc::vec![ScoreStream::NoneOnObs, ScoreStream::Vee];
        assert!(matches!(check_variance_inequality(&cfg), Err(crate::Error::Config(_))));
    }

    #[test]
    fn eiv_streams_and_expected_score() {
        let one = |x: f64| DVector::from_element(1, x);
        let id = || DMatrix::from_element(1, 1, 1.0);
        let model = EivModel::new(MvGaussianParams::new(one(0.0), id()).unwrap(), one(0.0), id(), one(0.0), id()).unwrap();
        let f = MvGaussianParams::new(one(0.0), id()).unwrap();
        let cfg = ExperimentConfig::new(
            ModelSpec::Eiv(model),
            Forecast::MvGaussian(f),
            ScoreKind::Log,
            &[ScoreStream::NoneOnTruth, ScoreStream::Vee, ScoreStream::VeeJoint],
            200_000,
            SEED,
        )
        .unwrap();
        let target = expected_base_score(&cfg).unwrap();
        assert!((target - (0.5 + 0.918_938_533_204_672_8)).abs() < 1e-14);
        let summary = run_experiment(&cfg).unwrap();
        for r in &summary.records {
            assert!((r.mean - target).abs() < 4.0 * r.mean_std_error);
        }
        // V[s∨(Y)] = 1/8, V[s∨(Y,Z)] = 2/9 for this system
        let v = summary.get(ScoreStream::Vee).unwrap();
        let vj = summary.get(ScoreStream::VeeJoint).unwrap();
        assert!((v.variance - 0.125).abs() < 4.0 * v.variance_std_error);
        assert!((vj.variance - 2.0 / 9.0).abs() < 4.0 * vj.variance_std_error);
    }
}
