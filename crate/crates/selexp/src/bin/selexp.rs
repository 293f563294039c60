//! Command-line front end for the selective-exposure pipeline.
//!
//! Analyses read a config file (`key = value`, `#` comments) when given,
//! and every flag overrides its config key. Exit codes: 0 success, 2
//! configuration error, 3 data error.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use selexp::model::{ingest, load_scheme, BiasScheme, IngestOptions, UnknownPagePolicy};
use selexp::pipeline::{
    BenchmarkEstimator, ExperimentConfig, InputSource, PipelineError, Section, ALL_SECTIONS,
};
use selexp::synthgen::{generate, ActivityDist, CohortSpec};

#[derive(Parser)]
#[command(
    name = "selexp",
    version,
    about = "Selective-exposure analytics over labeled interaction logs",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate input files and print ingestion diagnostics.
    IngestCheck(InputArgs),
    /// Generate a synthetic cohort and write it in the ingestion formats.
    Synth(SynthArgs),
    /// Activity-concentration curves, real vs strong randomization.
    Concentration(AnalysisArgs),
    /// Per-leaning bias-entropy eCDFs, real vs strong randomization.
    BiasEntropy(AnalysisArgs),
    /// Quartiles of the x selectivity statistic.
    XStat(AnalysisArgs),
    /// Weak-randomization benchmark eCDFs and KL divergence table.
    WeakBenchmark(AnalysisArgs),
    /// All four analysis sections in one report.
    All(AnalysisArgs),
}

#[derive(Args, Default)]
struct InputArgs {
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Interaction log: user_id,page_id,kind[,count].
    #[arg(long)]
    interactions: Option<PathBuf>,
    /// Page labels: page_id,bias_label.
    #[arg(long)]
    pages: Option<PathBuf>,
    /// Ordered bias label names, one per line (default: 5-label scheme).
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Field separator character.
    #[arg(long)]
    sep: Option<char>,
    /// Skip rows referencing unknown pages instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct AnalysisArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Interaction kind to analyze.
    #[arg(long)]
    kind: Option<String>,
    /// Activity threshold (inclusive: n >= threshold).
    #[arg(long)]
    threshold: Option<u64>,
    /// Make the threshold exclusive (n > threshold).
    #[arg(long)]
    strict_threshold: bool,
    /// Master seed for every randomized step.
    #[arg(long)]
    seed: Option<u64>,
    /// Weak-randomization replicates.
    #[arg(long)]
    replicates: Option<u32>,
    /// Fraction of eligible users sampled for the weak benchmark.
    #[arg(long)]
    sample_fraction: Option<f64>,
    /// Histogram bins for the KL divergence.
    #[arg(long)]
    bins: Option<usize>,
    /// Laplace pseudocount added to every KL histogram bin.
    #[arg(long)]
    pseudocount: Option<f64>,
    /// Logarithmic activity bins for the concentration curve.
    #[arg(long)]
    activity_bins: Option<usize>,
    /// Benchmark eCDF/KL estimator.
    #[arg(long, value_enum)]
    benchmark_estimator: Option<EstimatorArg>,
    /// Report output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one CSV file per report table.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of users.
    #[arg(long)]
    users: Option<u64>,
    /// Pages per label: one number or a comma list matching the scheme.
    #[arg(long)]
    pages_per_label: Option<String>,
    /// Ordered bias label names, one per line (default: 5-label scheme).
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Per-user activity: fixed:N, uniform:MIN:MAX, powerlaw:EXP:MIN:MAX.
    #[arg(long)]
    activity: Option<String>,
    /// Probability an interaction targets the user's home label, in [1/K, 1].
    #[arg(long)]
    bias_affinity: Option<f64>,
    /// Page-taste concentration; 1 = uniform, larger = fewer favorites.
    #[arg(long)]
    page_loyalty: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Interaction kind tag written to the log.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    out_interactions: Option<PathBuf>,
    #[arg(long)]
    out_pages: Option<PathBuf>,
    /// Field separator character.
    #[arg(long)]
    sep: Option<char>,
}

#[derive(ValueEnum, Clone, Copy)]
enum EstimatorArg {
    Pooled,
    Averaged,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::IngestCheck(args) => ingest_check(args),
        Command::Synth(args) => synth(args),
        Command::Concentration(args) => analyze(args, &[Section::Concentration]),
        Command::BiasEntropy(args) => analyze(args, &[Section::BiasEntropy]),
        Command::XStat(args) => analyze(args, &[Section::XStatistic]),
        Command::WeakBenchmark(args) => analyze(args, &[Section::WeakBenchmark]),
        Command::All(args) => analyze(args, &ALL_SECTIONS),
    }
}

const CONFIG_KEYS: &[&str] = &[
    "interactions",
    "pages",
    "scheme",
    "separator",
    "lenient",
    "kind",
    "threshold",
    "strict_threshold",
    "seed",
    "replicates",
    "sample_fraction",
    "bins",
    "pseudocount",
    "activity_bins",
    "benchmark_estimator",
    "out",
    "csv",
    "synth_users",
    "synth_pages_per_label",
    "synth_activity",
    "synth_bias_affinity",
    "synth_page_loyalty",
    "synth_seed",
    "synth_kind",
];

struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self, PipelineError> {
        let mut values = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| {
                PipelineError::Config(format!("reading config {}: {e}", path.display()))
            })?;
            for (idx, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    PipelineError::Config(format!(
                        "{}:{}: expected key = value",
                        path.display(),
                        idx + 1
                    ))
                })?;
                let key = key.trim().to_string();
                if !CONFIG_KEYS.contains(&key.as_str()) {
                    return Err(PipelineError::Config(format!(
                        "{}:{}: unknown config key {key:?}",
                        path.display(),
                        idx + 1
                    )));
                }
                values.insert(key, value.trim().to_string());
            }
        }
        Ok(ConfigFile { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, PipelineError> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                PipelineError::Config(format!("config key {key} has invalid value {raw:?}"))
            }),
        }
    }

    fn flag(&self, key: &str) -> Result<bool, PipelineError> {
        Ok(self.parse::<bool>(key)?.unwrap_or(false))
    }
}

fn resolve_separator(flag: Option<char>, config: &ConfigFile) -> Result<u8, PipelineError> {
    let c = match flag {
        Some(c) => c,
        None => match config.get("separator") {
            Some(s) if s.chars().count() == 1 => s.chars().next().unwrap(),
            Some(s) => {
                return Err(PipelineError::Config(format!(
                    "separator must be one character, got {s:?}"
                )))
            }
            None => ',',
        },
    };
    if !c.is_ascii() {
        return Err(PipelineError::Config(format!(
            "separator must be a single byte, got {c:?}"
        )));
    }
    Ok(c as u8)
}

fn load_scheme_for(path: Option<&PathBuf>) -> Result<BiasScheme, PipelineError> {
    match path {
        Some(p) => Ok(load_scheme(p)?),
        None => Ok(BiasScheme::default_five()),
    }
}

fn resolve_input(
    args: &InputArgs,
    config: &ConfigFile,
    kind: &str,
    seed: u64,
) -> Result<InputSource, PipelineError> {
    let interactions = args
        .interactions
        .clone()
        .or_else(|| config.get("interactions").map(PathBuf::from));
    let pages = args
        .pages
        .clone()
        .or_else(|| config.get("pages").map(PathBuf::from));
    let scheme = args
        .scheme
        .clone()
        .or_else(|| config.get("scheme").map(PathBuf::from));
    let separator = resolve_separator(args.sep, config)?;
    let lenient = args.lenient || config.flag("lenient")?;

    match (interactions, pages) {
        (Some(interactions), Some(pages)) => Ok(InputSource::Files {
            interactions,
            pages,
            scheme,
            separator,
            lenient,
        }),
        (None, None) => {
            let Some(users) = config.parse::<u64>("synth_users")? else {
                return Err(PipelineError::Config(
                    "no input: pass --interactions/--pages or set synth_users in the config".into(),
                ));
            };
            let scheme = load_scheme_for(scheme.as_ref())?;
            let pages_per_label = parse_pages_per_label(
                config.get("synth_pages_per_label").unwrap_or("20"),
                scheme.len(),
            )?;
            let activity = config
                .get("synth_activity")
                .unwrap_or("powerlaw:2:5:500")
                .parse::<ActivityDist>()
                .map_err(PipelineError::Config)?;
            let spec = CohortSpec {
                users,
                pages_per_label,
                scheme,
                activity,
                bias_affinity: config.parse::<f64>("synth_bias_affinity")?.unwrap_or(0.5),
                page_loyalty: config.parse::<f64>("synth_page_loyalty")?.unwrap_or(1.0),
                kind: config.get("synth_kind").unwrap_or(kind).to_string(),
                seed: config.parse::<u64>("synth_seed")?.unwrap_or(seed),
            };
            Ok(InputSource::Synthetic(spec))
        }
        _ => Err(PipelineError::Config(
            "--interactions and --pages must be given together".into(),
        )),
    }
}

fn parse_pages_per_label(raw: &str, labels: usize) -> Result<Vec<u32>, PipelineError> {
    let parts: Vec<&str> = raw.split(',').collect();
    let parse = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| PipelineError::Config(format!("bad pages-per-label entry {s:?}")))
    };
    if parts.len() == 1 {
        return Ok(vec![parse(parts[0])?; labels]);
    }
    if parts.len() != labels {
        return Err(PipelineError::Config(format!(
            "pages-per-label has {} entries for {labels} labels",
            parts.len()
        )));
    }
    parts.into_iter().map(parse).collect()
}

fn resolve_analysis(
    args: &AnalysisArgs,
) -> Result<(ExperimentConfig, PathBuf, bool), PipelineError> {
    let config = ConfigFile::load(args.input.config.as_deref())?;
    let kind = args
        .kind
        .clone()
        .or_else(|| config.get("kind").map(str::to_string))
        .unwrap_or_else(|| "like".to_string());
    let seed = match args.seed {
        Some(s) => s,
        None => config.parse::<u64>("seed")?.unwrap_or(0),
    };
    let input = resolve_input(&args.input, &config, &kind, seed)?;

    let mut experiment = ExperimentConfig::new(input, kind);
    experiment.seed = seed;
    if let Some(v) = args.threshold.or(config.parse("threshold")?) {
        experiment.activity_threshold = v;
    }
    experiment.strict_threshold = args.strict_threshold || config.flag("strict_threshold")?;
    if let Some(v) = args.replicates.or(config.parse("replicates")?) {
        experiment.replicates = v;
    }
    if let Some(v) = args.sample_fraction.or(config.parse("sample_fraction")?) {
        experiment.sample_fraction = v;
    }
    if let Some(v) = args.bins.or(config.parse("bins")?) {
        experiment.kl_bins = v;
    }
    if let Some(v) = args.pseudocount.or(config.parse("pseudocount")?) {
        experiment.pseudocount = v;
    }
    if let Some(v) = args.activity_bins.or(config.parse("activity_bins")?) {
        experiment.activity_bins = v;
    }
    experiment.estimator = match args.benchmark_estimator {
        Some(EstimatorArg::Pooled) => BenchmarkEstimator::Pooled,
        Some(EstimatorArg::Averaged) => BenchmarkEstimator::Averaged,
        None => match config.get("benchmark_estimator") {
            Some("pooled") | None => BenchmarkEstimator::Pooled,
            Some("averaged") => BenchmarkEstimator::Averaged,
            Some(other) => {
                return Err(PipelineError::Config(format!(
                    "benchmark_estimator must be pooled or averaged, got {other:?}"
                )))
            }
        },
    };

    let out = args
        .out
        .clone()
        .or_else(|| config.get("out").map(PathBuf::from))
        .ok_or_else(|| PipelineError::Config("--out directory is required".into()))?;
    let csv = args.csv || config.flag("csv")?;
    Ok((experiment, out, csv))
}

fn analyze(args: AnalysisArgs, sections: &[Section]) -> Result<(), PipelineError> {
    let (experiment, out, csv) = resolve_analysis(&args)?;
    let report = selexp::pipeline::run(&experiment, sections)?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    let path = report.write(&out, csv)?;
    println!("report written to {}", path.display());
    Ok(())
}

fn ingest_check(args: InputArgs) -> Result<(), PipelineError> {
    let config = ConfigFile::load(args.config.as_deref())?;
    let input = resolve_input(&args, &config, "like", 0)?;
    let InputSource::Files {
        interactions,
        pages,
        scheme,
        separator,
        lenient,
    } = input
    else {
        return Err(PipelineError::Config(
            "ingest-check needs input files".into(),
        ));
    };
    let scheme = scheme.map(|p| load_scheme(&p)).transpose()?;
    let options = IngestOptions {
        separator,
        unknown_pages: if lenient {
            UnknownPagePolicy::Skip
        } else {
            UnknownPagePolicy::Fail
        },
        scheme,
    };
    let out = ingest(&interactions, &pages, &options)?;
    let stats = &out.stats;
    println!("interaction rows: {}", stats.interaction_rows);
    println!("skipped lines (comments/blank): {}", stats.skipped_lines);
    println!(
        "dropped rows (unknown page): {}",
        stats.skipped_unknown_page
    );
    println!("users: {}", stats.users);
    println!("pages: {}", stats.pages);
    for (kind, ks) in &stats.per_kind {
        println!(
            "kind {kind}: {} edges, {} interactions",
            ks.edges, ks.interactions
        );
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), PipelineError> {
    let config = ConfigFile::load(args.config.as_deref())?;
    let scheme_path = args
        .scheme
        .clone()
        .or_else(|| config.get("scheme").map(PathBuf::from));
    let scheme = load_scheme_for(scheme_path.as_ref())?;
    let users = args
        .users
        .or(config.parse("synth_users")?)
        .ok_or_else(|| PipelineError::Config("--users is required".into()))?;
    let pages_raw = args
        .pages_per_label
        .clone()
        .or_else(|| config.get("synth_pages_per_label").map(str::to_string))
        .unwrap_or_else(|| "20".to_string());
    let activity = args
        .activity
        .clone()
        .or_else(|| config.get("synth_activity").map(str::to_string))
        .unwrap_or_else(|| "powerlaw:2:5:500".to_string())
        .parse::<ActivityDist>()
        .map_err(PipelineError::Config)?;
    let spec = CohortSpec {
        users,
        pages_per_label: parse_pages_per_label(&pages_raw, scheme.len())?,
        scheme,
        activity,
        bias_affinity: args
            .bias_affinity
            .or(config.parse("synth_bias_affinity")?)
            .unwrap_or(0.5),
        page_loyalty: args
            .page_loyalty
            .or(config.parse("synth_page_loyalty")?)
            .unwrap_or(1.0),
        kind: args
            .kind
            .clone()
            .or_else(|| config.get("synth_kind").map(str::to_string))
            .unwrap_or_else(|| "like".to_string()),
        seed: match args.seed {
            Some(s) => s,
            None => config.parse::<u64>("synth_seed")?.unwrap_or(0),
        },
    };
    let out_interactions = args
        .out_interactions
        .ok_or_else(|| PipelineError::Config("--out-interactions is required".into()))?;
    let out_pages = args
        .out_pages
        .ok_or_else(|| PipelineError::Config("--out-pages is required".into()))?;
    let separator = resolve_separator(args.sep, &config)?;

    let table = generate(&spec)?;
    table.write_files(&out_interactions, &out_pages, separator)?;
    let kind = table.kind(&spec.kind).expect("generated kind exists");
    println!(
        "wrote {} users, {} pages, {} edges ({} interactions) to {} / {}",
        table.n_users(),
        table.n_pages(),
        table.edges(kind).edge_count(),
        table.edges(kind).total_interactions(),
        out_interactions.display(),
        out_pages.display(),
    );
    Ok(())
}
