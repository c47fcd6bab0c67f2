//! `scorelab experiment` and `scorelab density`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use scorelab_core::experiments::{
    density_curves_from, needs_samples, variance_inequality_report, ExperimentConfig, ExperimentRunner,
    InequalityReport, McSummary, ScoreSamples,
};

use crate::args::{DensityArgs, ExperimentArgs, RunArgs};
use crate::config_file::{ConfigFile, OutputFormat};
use crate::error::{io_error, CliError, CliResult};
use crate::format::sig9;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance attached to every output.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub seed: u64,
    pub stream: u64,
    pub config_hash: String,
    pub version: &'static str,
    pub n: usize,
}

struct Prepared {
    file: ConfigFile,
    config: ExperimentConfig,
    meta: Metadata,
    out: PathBuf,
}

fn prepare(run: &RunArgs) -> CliResult<Prepared> {
    let file = ConfigFile::load(&run.config)?;
    let seed = run.seed.or(file.seed).unwrap_or(0);
    let config = file.to_experiment(seed)?;
    let out = run
        .out
        .clone()
        .or_else(|| file.out.clone())
        .ok_or_else(|| CliError::usage("no output path: pass --out or set \"out\" in the config"))?;
    if let Some(0) = run.threads {
        return Err(CliError::usage("--threads must be at least 1"));
    }
    let meta = Metadata {
        seed,
        stream: file.stream,
        config_hash: file.hash(seed),
        version: VERSION,
        n: config.n,
    };
    Ok(Prepared { file, config, meta, out })
}

/// Simulates all chunks on a pool of `threads` workers (default: all cores).
/// The result is identical for every thread count.
pub fn simulate_parallel(config: &ExperimentConfig, threads: Option<usize>) -> CliResult<ScoreSamples> {
    let runner = ExperimentRunner::new(config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    let chunks = pool.install(|| {
        (0..runner.chunk_count() as u64)
            .into_par_iter()
            .map(|k| runner.simulate_chunk(k))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(runner.collect(chunks)?)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> CliResult<()> {
    w.flush().map_err(|e| io_error(path, e))
}

/// `<dir>/<stem>.<suffix>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn write_summary_csv(path: &Path, summary: &McSummary, meta: &Metadata) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record([
        "correction",
        "mean",
        "variance",
        "mean_std_error",
        "variance_std_error",
        "n",
        "seed",
        "stream",
        "config_hash",
        "version",
    ])?;
    for r in &summary.records {
        w.write_record([
            r.stream.as_str().to_string(),
            sig9(r.mean),
            sig9(r.variance),
            sig9(r.mean_std_error),
            sig9(r.variance_std_error),
            summary.n.to_string(),
            meta.seed.to_string(),
            meta.stream.to_string(),
            meta.config_hash.clone(),
            meta.version.to_string(),
        ])?;
    }
    let inner = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    finish(inner, path)
}

fn write_inequality_csv(path: &Path, report: &InequalityReport, meta: &Metadata) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["larger", "smaller", "difference", "combined_std_error", "margin_in_se", "holds", "seed", "config_hash"])?;
    for c in &report.comparisons {
        w.write_record([
            c.larger.as_str().to_string(),
            c.smaller.as_str().to_string(),
            sig9(c.difference),
            sig9(c.combined_std_error),
            sig9(c.margin()),
            c.holds.to_string(),
            meta.seed.to_string(),
            meta.config_hash.clone(),
        ])?;
    }
    let inner = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    finish(inner, path)
}

#[derive(Serialize)]
struct SummaryRecordJson {
    correction: &'static str,
    mean: f64,
    variance: f64,
    mean_std_error: f64,
    variance_std_error: f64,
}

#[derive(Serialize)]
struct ComparisonJson {
    larger: &'static str,
    smaller: &'static str,
    difference: f64,
    combined_std_error: f64,
    holds: bool,
}

#[derive(Serialize)]
struct InequalityJson {
    holds: bool,
    comparisons: Vec<ComparisonJson>,
}

#[derive(Serialize)]
struct ExperimentJson<'a> {
    metadata: &'a Metadata,
    summary: Vec<SummaryRecordJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inequality: Option<InequalityJson>,
}

fn write_json(path: &Path, summary: &McSummary, report: Option<&InequalityReport>, meta: &Metadata) -> CliResult<()> {
    let doc = ExperimentJson {
        metadata: meta,
        summary: summary
            .records
            .iter()
            .map(|r| SummaryRecordJson {
                correction: r.stream.as_str(),
                mean: r.mean,
                variance: r.variance,
                mean_std_error: r.mean_std_error,
                variance_std_error: r.variance_std_error,
            })
            .collect(),
        inequality: report.map(|r| InequalityJson {
            holds: r.holds,
            comparisons: r
                .comparisons
                .iter()
                .map(|c| ComparisonJson {
                    larger: c.larger.as_str(),
                    smaller: c.smaller.as_str(),
                    difference: c.difference,
                    combined_std_error: c.combined_std_error,
                    holds: c.holds,
                })
                .collect(),
        }),
    };
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w).map_err(|e| io_error(path, e))?;
    finish(w, path)
}

pub fn run_experiment(args: &ExperimentArgs) -> CliResult<String> {
    let p = prepare(&args.run)?;
    let format = args.format.map(OutputFormat::from).or(p.file.format).unwrap_or(OutputFormat::Csv);
    let samples = simulate_parallel(&p.config, args.run.threads)?;
    let summary = ExperimentRunner::new(&p.config)?.summarize(&samples);
    let report = if p.file.inequality {
        Some(variance_inequality_report(&p.config.model, &summary)?)
    } else {
        None
    };
    let mut written = vec![p.out.display().to_string()];
    match format {
        OutputFormat::Csv => {
            write_summary_csv(&p.out, &summary, &p.meta)?;
            if let Some(r) = &report {
                let path = sibling(&p.out, "inequality.csv");
                write_inequality_csv(&path, r, &p.meta)?;
                written.push(path.display().to_string());
            }
        }
        OutputFormat::Json => write_json(&p.out, &summary, report.as_ref(), &p.meta)?,
    }
    let means: Vec<String> = summary.records.iter().map(|r| format!("{}={}", r.stream.as_str(), sig9(r.mean))).collect();
    let mut line = format!("n={} seed={} {} -> {}", summary.n, p.meta.seed, means.join(" "), written.join(", "));
    if let Some(r) = &report {
        line.push_str(&format!(" (variance ordering {})", if r.holds { "holds" } else { "violated" }));
    }
    Ok(line)
}

#[derive(Serialize)]
struct CurveMeta {
    label: String,
    kind: &'static str,
    bandwidth: Option<f64>,
    trapezoid_integral: f64,
}

#[derive(Serialize)]
struct DensityMeta<'a> {
    metadata: &'a Metadata,
    mean_marker: f64,
    curves: Vec<CurveMeta>,
    warnings: &'a [String],
}

pub fn run_density(args: &DensityArgs) -> CliResult<String> {
    let p = prepare(&args.run)?;
    if p.config.density_grid.is_none() {
        return Err(CliError::usage("the density command needs \"density_grid\" in the config"));
    }
    let samples = if needs_samples(&p.config) {
        Some(simulate_parallel(&p.config, args.run.threads)?)
    } else {
        None
    };
    let report = density_curves_from(&p.config, samples.as_ref())?;

    let mut w = csv::Writer::from_writer(create(&p.out)?);
    w.write_record(["label", "kind", "x", "density"])?;
    for c in &report.curves {
        for (x, y) in c.abscissae.iter().zip(&c.ordinates) {
            w.write_record([c.label.as_str(), c.kind.as_str(), &sig9(*x), &sig9(*y)])?;
        }
    }
    w.write_record(["common_mean", "mean_marker", &sig9(report.mean_marker), ""])?;
    for msg in &report.warnings {
        w.write_record([msg.as_str(), "warning", "", ""])?;
    }
    let inner = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    finish(inner, &p.out)?;

    let meta_path = PathBuf::from(format!("{}.meta.json", p.out.display()));
    let meta = DensityMeta {
        metadata: &p.meta,
        mean_marker: report.mean_marker,
        curves: report
            .curves
            .iter()
            .map(|c| CurveMeta {
                label: c.label.clone(),
                kind: c.kind.as_str(),
                bandwidth: c.bandwidth,
                trapezoid_integral: c.trapezoid(),
            })
            .collect(),
        warnings: &report.warnings,
    };
    let mut mw = create(&meta_path)?;
    serde_json::to_writer_pretty(&mut mw, &meta).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(mw).map_err(|e| io_error(&meta_path, e))?;
    finish(mw, &meta_path)?;

    for msg in &report.warnings {
        eprintln!("warning: {msg}");
    }
    Ok(format!(
        "{} curves, mean marker {} -> {}",
        report.curves.len(),
        sig9(report.mean_marker),
        p.out.display()
    ))
}
