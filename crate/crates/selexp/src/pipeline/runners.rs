//! Section runners: each appends its tables, metadata, and warnings to the
//! report being assembled.

use rayon::prelude::*;

use crate::entropy;
use crate::model::{BiasLabel, InteractionTable, KindId, UserId};
use crate::nullmodel::{monte_carlo_weak, strong_randomize, RandomizationMode, RandomizationSpec};
use crate::seed::derive;
use crate::stats;

use super::{fmt_f64, BenchmarkEstimator, ExperimentConfig, PipelineError, Report, Table};

const STREAM_CONCENTRATION_STRONG: u64 = 0x11;
const STREAM_BIAS_STRONG: u64 = 0x12;
const STREAM_WEAK_MC: u64 = 0x13;

/// Groups flagged low-power below this many sampled users.
const LOW_POWER_MIN: usize = 30;

/// eCDF tables are thinned to this many rows to stay plot-ready.
pub(super) const ECDF_MAX_POINTS: usize = 512;

struct UserSummary {
    n: u64,
    bias_norm: f64,
    leaning: Option<BiasLabel>,
}

/// Per-user totals and normalized bias entropy for every active user of
/// `kind`, ascending by user id.
fn summarize_users(table: &InteractionTable, kind: KindId) -> Vec<UserSummary> {
    let k = table.scheme().len();
    let labels = table.page_bias_raw();
    let edges = table.edges(kind);
    let lnk = (k as f64).ln();
    (0..table.n_users())
        .into_par_iter()
        .map_init(
            || vec![0u64; k],
            |scratch, user_idx| {
                let items = edges.user_items(UserId(user_idx as u32));
                if items.is_empty() {
                    return None;
                }
                scratch.iter_mut().for_each(|c| *c = 0);
                let mut n = 0u64;
                for pc in items {
                    scratch[labels[pc.page.index()] as usize] += pc.count as u64;
                    n += pc.count as u64;
                }
                let h = entropy::shannon_iter(scratch.iter().copied().filter(|&c| c > 0));
                let mut best = 0u64;
                let mut leaning = None;
                let mut tied = false;
                for (class, &count) in scratch.iter().enumerate() {
                    if count == 0 {
                        continue;
                    }
                    if count > best {
                        best = count;
                        leaning = Some(BiasLabel(class as u8));
                        tied = false;
                    } else if count == best {
                        tied = true;
                    }
                }
                Some(UserSummary {
                    n,
                    bias_norm: (h / lnk).min(1.0),
                    leaning: if tied { None } else { leaning },
                })
            },
        )
        .flatten()
        .collect()
}

fn curve_table(name: &str, curve: &stats::BinnedCurve) -> Table {
    let mut table = Table::new(name, &["bin", "lo", "hi", "users", "mean_distinct_pages"]);
    for (i, bin) in curve.bins.iter().enumerate() {
        table.push_row(vec![
            i.to_string(),
            fmt_f64(curve.edges[i]),
            fmt_f64(curve.edges[i + 1]),
            bin.users.to_string(),
            bin.mean_distinct_pages.map(fmt_f64).unwrap_or_default(),
        ]);
    }
    table
}

fn ecdf_table(name: &str, values: &[f64]) -> Result<Table, PipelineError> {
    let ecdf = stats::ecdf(values)?;
    let mut table = Table::new(name, &["value", "cum_prob"]);
    for (v, f) in ecdf.steps_capped(ECDF_MAX_POINTS) {
        table.push_row(vec![fmt_f64(v), fmt_f64(f)]);
    }
    Ok(table)
}

/// Group identifiers in report order: one per scheme label, then the
/// aggregate.
fn groups(table: &InteractionTable) -> Vec<(Option<BiasLabel>, String)> {
    let scheme = table.scheme();
    let mut out: Vec<(Option<BiasLabel>, String)> =
        scheme.labels().map(|l| (Some(l), scheme.slug(l))).collect();
    out.push((None, "all".to_string()));
    out
}

/// Activity-concentration curves for the real table and one strong
/// randomization. Strong randomization preserves every user's total, so
/// both curves share bin edges and per-bin cohorts.
pub(super) fn run_concentration(
    table: &InteractionTable,
    kind: KindId,
    config: &ExperimentConfig,
    report: &mut Report,
) -> Result<(), PipelineError> {
    let real = stats::activity_concentration(table, kind, config.activity_bins)?;
    let strong_seed = derive(config.seed, STREAM_CONCENTRATION_STRONG);
    let randomized = strong_randomize(table, kind, strong_seed);
    let strong = stats::activity_concentration(&randomized, kind, config.activity_bins)?;

    report.push_meta(
        "concentration.users",
        real.bins.iter().map(|b| b.users).sum::<u64>(),
    );
    report.push_meta("concentration.strong_seed", strong_seed);
    if real.collapsed {
        report.warn("concentration: all users share one activity level; single bin");
    }
    report.tables.push(curve_table("concentration.real", &real));
    report
        .tables
        .push(curve_table("concentration.strong", &strong));
    Ok(())
}

/// Per-leaning and aggregate eCDFs of normalized bias entropy, real vs one
/// strong randomization, with the even-spread reference abscissas.
pub(super) fn run_bias_entropy(
    table: &InteractionTable,
    kind: KindId,
    config: &ExperimentConfig,
    report: &mut Report,
) -> Result<(), PipelineError> {
    let min = config.min_interactions();
    let refs = stats::reference_abscissas(table.scheme().len());
    report.push_meta(
        "bias_entropy.reference_abscissas",
        refs.iter()
            .map(|&r| fmt_f64(r))
            .collect::<Vec<_>>()
            .join(","),
    );

    let summaries = summarize_users(table, kind);
    let eligible: Vec<&UserSummary> = summaries.iter().filter(|s| s.n >= min).collect();
    report.push_meta("bias_entropy.users_with_kind", summaries.len());
    report.push_meta(
        "bias_entropy.below_threshold",
        summaries.len() - eligible.len(),
    );
    report.push_meta("bias_entropy.eligible", eligible.len());
    report.push_meta(
        "bias_entropy.unresolved_leaning",
        eligible.iter().filter(|s| s.leaning.is_none()).count(),
    );

    let strong_seed = derive(config.seed, STREAM_BIAS_STRONG);
    report.push_meta("bias_entropy.strong_seed", strong_seed);
    let randomized = strong_randomize(table, kind, strong_seed);
    let strong_summaries = summarize_users(&randomized, kind);
    let strong_eligible: Vec<&UserSummary> =
        strong_summaries.iter().filter(|s| s.n >= min).collect();

    for (scenario, cohort) in [("real", &eligible), ("strong", &strong_eligible)] {
        for (group, slug) in groups(table) {
            let values: Vec<f64> = cohort
                .iter()
                .filter(|s| group.is_none() || s.leaning == group)
                .map(|s| s.bias_norm)
                .collect();
            if values.is_empty() {
                report.warn(format!(
                    "bias_entropy: group {slug} has no eligible users ({scenario})"
                ));
                continue;
            }
            report.tables.push(ecdf_table(
                &format!("bias_entropy.{scenario}.{slug}"),
                &values,
            )?);
        }
    }
    Ok(())
}

/// Quartiles of the x statistic over threshold-passing, non-degenerate
/// users.
pub(super) fn run_x_statistic(
    table: &InteractionTable,
    kind: KindId,
    config: &ExperimentConfig,
    report: &mut Report,
) -> Result<(), PipelineError> {
    enum XOutcome {
        BelowThreshold,
        Degenerate,
        Value(f64),
    }

    let min = config.min_interactions();
    let edges = table.edges(kind);
    let per_user: Vec<XOutcome> = (0..table.n_users())
        .into_par_iter()
        .filter_map(|user_idx| {
            let user = UserId(user_idx as u32);
            if edges.user_items(user).is_empty() {
                return None;
            }
            let v = table.user_vector(user, kind).expect("active user");
            if v.n() < min {
                return Some(XOutcome::BelowThreshold);
            }
            Some(match entropy::x_statistic(&v) {
                Some(x) => XOutcome::Value(x),
                None => XOutcome::Degenerate,
            })
        })
        .collect();

    let users_with_kind = per_user.len() as u64;
    let mut below_threshold = 0u64;
    let mut degenerate = 0u64;
    let mut xs: Vec<f64> = Vec::new();
    for entry in per_user {
        match entry {
            XOutcome::BelowThreshold => below_threshold += 1,
            XOutcome::Degenerate => degenerate += 1,
            XOutcome::Value(x) => xs.push(x),
        }
    }
    report.push_meta("x_stat.users_with_kind", users_with_kind);
    report.push_meta("x_stat.below_threshold", below_threshold);
    report.push_meta("x_stat.degenerate_bounds", degenerate);
    report.push_meta("x_stat.eligible", xs.len());

    let mut quartile_table = Table::new(
        "x_stat.quartiles",
        &["kind", "count", "min", "q1", "median", "q3", "max"],
    );
    if xs.is_empty() {
        report.push_meta(
            "x_stat.note",
            "all threshold-passing users have degenerate bounds; no x values",
        );
        report.warn("x_stat: no non-degenerate users; quartile table is empty");
    } else {
        let q = stats::quartiles(&xs)?;
        quartile_table.push_row(vec![
            config.kind.clone(),
            xs.len().to_string(),
            fmt_f64(q.min),
            fmt_f64(q.q1),
            fmt_f64(q.median),
            fmt_f64(q.q3),
            fmt_f64(q.max),
        ]);
    }
    report.tables.push(quartile_table);
    Ok(())
}

/// Real per-leaning eCDFs against the weak-randomization benchmark, with a
/// KL divergence table per leaning and in aggregate.
pub(super) fn run_weak_benchmark(
    table: &InteractionTable,
    kind: KindId,
    config: &ExperimentConfig,
    report: &mut Report,
) -> Result<(), PipelineError> {
    let min = config.min_interactions();
    let refs = stats::reference_abscissas(table.scheme().len());
    report.push_meta(
        "weak_benchmark.reference_abscissas",
        refs.iter()
            .map(|&r| fmt_f64(r))
            .collect::<Vec<_>>()
            .join(","),
    );

    // Exclusion funnel: below threshold first, then single-page among the
    // threshold-passing when multi_page_only is on.
    let edges = table.edges(kind);
    let mut users_with_kind = 0u64;
    let mut below_threshold = 0u64;
    let mut single_page = 0u64;
    let mut eligible = 0u64;
    for user_idx in 0..table.n_users() {
        let items = edges.user_items(UserId(user_idx as u32));
        if items.is_empty() {
            continue;
        }
        users_with_kind += 1;
        let n: u64 = items.iter().map(|pc| pc.count as u64).sum();
        if n < min {
            below_threshold += 1;
        } else if config.multi_page_only && items.len() < 2 {
            single_page += 1;
        } else {
            eligible += 1;
        }
    }
    report.push_meta("weak_benchmark.users_with_kind", users_with_kind);
    report.push_meta("weak_benchmark.below_threshold", below_threshold);
    report.push_meta("weak_benchmark.single_page", single_page);
    report.push_meta("weak_benchmark.eligible", eligible);

    let mc_seed = derive(config.seed, STREAM_WEAK_MC);
    let spec = RandomizationSpec {
        mode: RandomizationMode::Weak,
        seed: mc_seed,
        replicates: config.replicates,
        sample_fraction: config.sample_fraction,
    };
    let bench = monte_carlo_weak(table, kind, &spec, min, config.multi_page_only)?;
    report.push_meta("weak_benchmark.mc_seed", mc_seed);
    report.push_meta("weak_benchmark.sampled", bench.sampled.len());
    report.push_meta(
        "weak_benchmark.unresolved_in_sample",
        bench.sampled.iter().filter(|s| s.group.is_none()).count(),
    );

    let mut kl_table = Table::new(
        "weak_benchmark.kl",
        &["group", "n_real", "n_benchmark", "kl_nats", "low_power"],
    );
    let mut ecdf_tables: Vec<Table> = Vec::new();
    for (group, slug) in groups(table) {
        let real = bench.real(group);
        if real.is_empty() {
            report.warn(format!("weak_benchmark: group {slug} has no sampled users"));
            continue;
        }
        let pooled = bench.pooled(group);
        let low_power = real.len() < LOW_POWER_MIN;
        if low_power {
            report.warn(format!(
                "weak_benchmark: group {slug} has only {} sampled users; flagged low-power",
                real.len()
            ));
        }
        let kl = match config.estimator {
            BenchmarkEstimator::Pooled => {
                stats::kl_divergence(&real, &pooled, config.kl_bins, config.pseudocount)?
            }
            BenchmarkEstimator::Averaged => {
                let mut sum = 0.0;
                for k in 0..config.replicates as usize {
                    let replicate = bench.replicate(k, group);
                    sum += stats::kl_divergence(
                        &real,
                        &replicate,
                        config.kl_bins,
                        config.pseudocount,
                    )?;
                }
                sum / config.replicates as f64
            }
        };
        kl_table.push_row(vec![
            slug.clone(),
            real.len().to_string(),
            pooled.len().to_string(),
            fmt_f64(kl),
            low_power.to_string(),
        ]);
        ecdf_tables.push(ecdf_table(&format!("weak_benchmark.real.{slug}"), &real)?);
        ecdf_tables.push(ecdf_table(
            &format!("weak_benchmark.benchmark.{slug}"),
            &pooled,
        )?);
    }
    report.tables.push(kl_table);
    report.tables.append(&mut ecdf_tables);
    Ok(())
}
