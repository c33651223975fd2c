//! Runs a configured experiment and writes its CSV files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use semiplug::mcverify::{
    run_linearity_experiment, write_records, write_summaries, ExperimentSpec, RunMeta, SummaryStats,
};
use semiplug::pipelines::{build_pipeline, PipelineOptions};
use semiplug::rng::StreamKey;

use crate::config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("experiment failed: {0}")]
    Harness(#[from] semiplug::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: PathBuf,
    pub summary: PathBuf,
    pub summaries: Vec<SummaryStats>,
}

fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(
    path: PathBuf,
    write: impl FnOnce(&mut BufWriter<File>) -> semiplug::Result<()>,
) -> Result<PathBuf, RunError> {
    let mut out = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
    write(&mut out)?;
    out.flush().map_err(io_err(&path))?;
    Ok(path)
}

/// Builds the pipeline, simulates every n and writes `records.csv` and
/// `summary.csv` into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let opts = PipelineOptions {
        combiner: cfg.combiner,
        sub: cfg.estimator,
        baseline: cfg.baseline,
        mc_draws: cfg.mc_draws,
        key: StreamKey::root(cfg.master_seed)
            .child(&cfg.experiment)
            .child("pipeline"),
        exec: cfg.execution,
    };
    let pipeline = build_pipeline(cfg.model.clone(), cfg.functional, &opts)?;
    let spec = ExperimentSpec {
        name: cfg.experiment.clone(),
        n_list: cfg.n_list.clone(),
        reps: cfg.reps,
        drift_t: cfg.drift_t,
        seed: cfg.master_seed,
        exec: cfg.execution,
    };
    let out = run_linearity_experiment(&pipeline, &spec)?;
    fs::create_dir_all(&cfg.output).map_err(io_err(&cfg.output))?;
    let meta = RunMeta {
        experiment: cfg.experiment.clone(),
        model: pipeline.model_name().into(),
        combiner: cfg.combiner.name().into(),
    };
    let records = write_file(cfg.output.join("records.csv"), |w| {
        write_records(w, &meta, &out.records)
    })?;
    let summary = write_file(cfg.output.join("summary.csv"), |w| {
        write_summaries(w, &meta, &out.summaries)
    })?;
    Ok(RunOutput {
        records,
        summary,
        summaries: out.summaries,
    })
}

/// The summary as an aligned text table.
pub fn summary_table(summaries: &[SummaryStats]) -> String {
    let mut s = format!(
        "{:>8} {:>6} {:>8} {:>12} {:>12} {:>14} {:>10}\n",
        "n", "reps", "failed", "mean", "variance", "median resid", "mc se"
    );
    for r in summaries {
        s.push_str(&format!(
            "{:>8} {:>6} {:>8} {:>12.6} {:>12.6} {:>14.6} {:>10.6}\n",
            r.n, r.reps, r.failures, r.mean, r.variance, r.median_residual, r.mc_se
        ));
    }
    s
}
