//! Experiment pipeline: wires ingestion → filters → entropy → null models →
//! stats into reproducible experiments, emitting versioned report files.
//!
//! Every stochastic step draws from a sub-seed derived from the experiment
//! seed, per-user and per-replicate work runs in parallel, and report
//! assembly is a single ordered reduce - so (inputs, config) determine
//! every report byte regardless of thread count.

use std::path::PathBuf;

use thiserror::Error;

use crate::model::{
    ingest, load_scheme, IngestOptions, IngestStats, InteractionTable, ModelError,
    UnknownPagePolicy,
};
use crate::nullmodel::NullModelError;
use crate::stats::StatsError;
use crate::synthgen::{generate, CohortSpec, SynthError};

mod report;
mod runners;

pub use report::{fmt_f64, Report, Table, REPORT_FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    NullModel(#[from] NullModelError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("unknown interaction kind {requested:?}; table has: {available}")]
    UnknownKind {
        requested: String,
        available: String,
    },
    #[error("report i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    /// CLI exit code: 2 for configuration errors, 3 for data errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            _ => 3,
        }
    }
}

/// Where the interaction table comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Files {
        interactions: PathBuf,
        pages: PathBuf,
        scheme: Option<PathBuf>,
        separator: u8,
        /// Skip rows referencing unknown pages instead of failing.
        lenient: bool,
    },
    Synthetic(CohortSpec),
    /// The caller supplies the table directly (`run_on_table`).
    Preloaded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkEstimator {
    /// One histogram over all replicate values (default).
    Pooled,
    /// KL computed per replicate, then averaged.
    Averaged,
}

impl BenchmarkEstimator {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchmarkEstimator::Pooled => "pooled",
            BenchmarkEstimator::Averaged => "averaged",
        }
    }
}

/// Analysis sections mirroring the activity-concentration curves, the
/// bias-entropy eCDFs, the x-statistic quartiles, and the weak-randomization
/// benchmark with its KL table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Concentration,
    BiasEntropy,
    XStatistic,
    WeakBenchmark,
}

impl Section {
    pub fn as_str(self) -> &'static str {
        match self {
            Section::Concentration => "concentration",
            Section::BiasEntropy => "bias-entropy",
            Section::XStatistic => "x-stat",
            Section::WeakBenchmark => "weak-benchmark",
        }
    }
}

pub const ALL_SECTIONS: [Section; 4] = [
    Section::Concentration,
    Section::BiasEntropy,
    Section::XStatistic,
    Section::WeakBenchmark,
];

/// Full configuration of one experiment run over one interaction kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub input: InputSource,
    pub kind: String,
    /// Activity threshold; inclusive (`n ≥ threshold`) unless
    /// `strict_threshold` makes it exclusive (`n > threshold`).
    pub activity_threshold: u64,
    pub strict_threshold: bool,
    /// Restrict the weak benchmark to users touching at least two pages.
    pub multi_page_only: bool,
    pub seed: u64,
    pub replicates: u32,
    pub sample_fraction: f64,
    pub kl_bins: usize,
    pub pseudocount: f64,
    pub activity_bins: usize,
    pub estimator: BenchmarkEstimator,
}

impl ExperimentConfig {
    pub fn new(input: InputSource, kind: impl Into<String>) -> Self {
        ExperimentConfig {
            input,
            kind: kind.into(),
            activity_threshold: 5,
            strict_threshold: false,
            multi_page_only: true,
            seed: 0,
            replicates: 100,
            sample_fraction: 0.02,
            kl_bins: 50,
            pseudocount: 0.5,
            activity_bins: 12,
            estimator: BenchmarkEstimator::Pooled,
        }
    }

    /// Minimum interaction count implied by threshold and strictness.
    pub fn min_interactions(&self) -> u64 {
        if self.strict_threshold {
            self.activity_threshold + 1
        } else {
            self.activity_threshold
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.kind.is_empty() {
            return Err(PipelineError::Config("kind must be non-empty".into()));
        }
        if self.activity_threshold < 1 {
            return Err(PipelineError::Config("threshold must be >= 1".into()));
        }
        if self.replicates < 1 {
            return Err(PipelineError::Config("replicates must be >= 1".into()));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(PipelineError::Config(format!(
                "sample fraction must be in (0, 1], got {}",
                self.sample_fraction
            )));
        }
        if self.kl_bins < 2 {
            return Err(PipelineError::Config(
                "KL histogram needs at least 2 bins".into(),
            ));
        }
        if self.pseudocount <= 0.0 || self.pseudocount.is_nan() {
            return Err(PipelineError::Config("pseudocount must be positive".into()));
        }
        if self.activity_bins < 1 {
            return Err(PipelineError::Config(
                "activity binning needs at least 1 bin".into(),
            ));
        }
        if let InputSource::Synthetic(spec) = &self.input {
            spec.validate()?;
        }
        Ok(())
    }
}

/// Loads or generates the input table described by the config.
pub fn load_table(
    config: &ExperimentConfig,
) -> Result<(InteractionTable, Option<IngestStats>), PipelineError> {
    match &config.input {
        InputSource::Files {
            interactions,
            pages,
            scheme,
            separator,
            lenient,
        } => {
            let scheme = scheme.as_ref().map(|p| load_scheme(p)).transpose()?;
            let options = IngestOptions {
                separator: *separator,
                unknown_pages: if *lenient {
                    UnknownPagePolicy::Skip
                } else {
                    UnknownPagePolicy::Fail
                },
                scheme,
            };
            let out = ingest(interactions, pages, &options)?;
            Ok((out.table, Some(out.stats)))
        }
        InputSource::Synthetic(spec) => Ok((generate(spec)?, None)),
        InputSource::Preloaded => Err(PipelineError::Config(
            "preloaded input requires run_on_table".into(),
        )),
    }
}

/// Loads the input and runs `sections` in order into one report.
pub fn run(config: &ExperimentConfig, sections: &[Section]) -> Result<Report, PipelineError> {
    config.validate()?;
    let (table, _) = load_table(config)?;
    run_on_table(&table, config, sections)
}

/// Runs `sections` on an already-loaded table.
pub fn run_on_table(
    table: &InteractionTable,
    config: &ExperimentConfig,
    sections: &[Section],
) -> Result<Report, PipelineError> {
    config.validate()?;
    let kind = table
        .kind(&config.kind)
        .ok_or_else(|| PipelineError::UnknownKind {
            requested: config.kind.clone(),
            available: table
                .kind_names()
                .map(|(_, name)| name)
                .collect::<Vec<_>>()
                .join(","),
        })?;

    let mut report = Report::default();
    echo_config(&mut report, table, config, sections);
    for section in sections {
        match section {
            Section::Concentration => runners::run_concentration(table, kind, config, &mut report)?,
            Section::BiasEntropy => runners::run_bias_entropy(table, kind, config, &mut report)?,
            Section::XStatistic => runners::run_x_statistic(table, kind, config, &mut report)?,
            Section::WeakBenchmark => {
                runners::run_weak_benchmark(table, kind, config, &mut report)?
            }
        }
    }
    Ok(report)
}

fn echo_config(
    report: &mut Report,
    table: &InteractionTable,
    config: &ExperimentConfig,
    sections: &[Section],
) {
    report.push_meta("format_version", REPORT_FORMAT_VERSION);
    report.push_meta("tool", concat!("selexp ", env!("CARGO_PKG_VERSION")));
    let input = match &config.input {
        InputSource::Files { interactions, pages, scheme, separator, lenient } => {
            let scheme = scheme
                .as_ref()
                .map(|p| format!(" scheme={}", p.display()))
                .unwrap_or_default();
            format!(
                "files interactions={} pages={}{scheme} separator={} lenient={lenient}",
                interactions.display(),
                pages.display(),
                *separator as char,
            )
        }
        InputSource::Synthetic(spec) => format!(
            "synthetic users={} pages_per_label={} activity={} bias_affinity={} page_loyalty={} seed={} kind={}",
            spec.users,
            spec.pages_per_label.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("/"),
            spec.activity,
            fmt_f64(spec.bias_affinity),
            fmt_f64(spec.page_loyalty),
            spec.seed,
            spec.kind,
        ),
        InputSource::Preloaded => "preloaded".to_string(),
    };
    report.push_meta("input", input);
    report.push_meta(
        "sections",
        sections
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join(","),
    );
    report.push_meta("kind", &config.kind);
    report.push_meta(
        "scheme",
        table
            .scheme()
            .labels()
            .map(|l| table.scheme().name(l).to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    report.push_meta("users", table.n_users());
    report.push_meta("pages", table.n_pages());
    report.push_meta("activity_threshold", config.activity_threshold);
    report.push_meta("strict_threshold", config.strict_threshold);
    report.push_meta("effective_min_interactions", config.min_interactions());
    report.push_meta("multi_page_only", config.multi_page_only);
    report.push_meta("seed", config.seed);
    report.push_meta("replicates", config.replicates);
    report.push_meta("sample_fraction", fmt_f64(config.sample_fraction));
    report.push_meta("kl_bins", config.kl_bins);
    report.push_meta("pseudocount", fmt_f64(config.pseudocount));
    report.push_meta("activity_bins", config.activity_bins);
    report.push_meta("benchmark_estimator", config.estimator.as_str());
    report.push_meta("quartile_rule", "closest-ranks-linear-interpolation");
    report.push_meta("entropy_log_base", "e");
    report.push_meta("ecdf_max_points", runners::ECDF_MAX_POINTS);
}
