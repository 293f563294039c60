//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers (run with `cargo test --test acceptance -- --nocapture`
//! to see them). Expected values come from independent oracles: plain
//! -Σ p ln p entropy sums, exhaustive enumeration of count assignments, and
//! exact marginal recomputation.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use selexp::entropy;
use selexp::model::{BiasScheme, InteractionTable, KindId};
use selexp::nullmodel::{strong_randomize, weak_randomize};
use selexp::pipeline::{
    run_on_table, ExperimentConfig, InputSource, Report, Section, ALL_SECTIONS,
};
use selexp::stats::{ks_critical, ks_statistic};
use selexp::synthgen::{generate, ActivityDist, CohortSpec};

fn preloaded_config(kind: &str) -> ExperimentConfig {
    ExperimentConfig::new(InputSource::Preloaded, kind)
}

fn cohort(
    users: u64,
    pages_per_label: u32,
    activity: ActivityDist,
    affinity: f64,
    loyalty: f64,
    seed: u64,
) -> InteractionTable {
    generate(&CohortSpec::new(
        users,
        pages_per_label,
        activity,
        affinity,
        loyalty,
        seed,
    ))
    .expect("cohort spec is valid")
}

fn like(table: &InteractionTable) -> KindId {
    table.kind("like").expect("cohort kind")
}

/// Parses the `weak_benchmark.kl` table into (group, n_real, kl) rows.
fn kl_rows(report: &Report) -> Vec<(String, u64, f64)> {
    report
        .table("weak_benchmark.kl")
        .expect("kl table present")
        .rows
        .iter()
        .map(|row| {
            (
                row[0].clone(),
                row[1].parse().unwrap(),
                row[3].parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn criterion_1_decomposition_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let v = random_user_vector(&mut rng, 8, 1000, 10);
        let lhs = entropy::page_entropy(&v);
        let rhs = entropy::decompose(&v).total();
        worst = worst.max((lhs - rhs).abs());
        assert!(
            (lhs - rhs).abs() < 1e-12,
            "identity violated: page {lhs} vs recombined {rhs}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!(
        "ACCEPTANCE PASS: criterion 1 - decomposition identity on 1e5 random vectors, \
         worst residual {worst:.3e}, {elapsed:?}"
    );
}

#[test]
fn criterion_2_bound_correctness() {
    let start = Instant::now();

    // Exhaustive product enumeration over all 1- and 2-class patterns with
    // n_i <= 12, c_i <= 4.
    let mut single: Vec<(u64, u64)> = Vec::new();
    for n in 1..=12u64 {
        for c in 1..=4u64 {
            single.push((n, c));
        }
    }
    let check_pattern = |totals: &[u64], pages: &[u64]| {
        let per_class: Vec<Vec<u64>> = totals.iter().map(|&t| vec![t]).collect();
        let v = selexp::model::UserVector::synthetic(&per_class, pages);
        let (bmin, bmax) = brute_force_bounds(totals, pages);
        let m = entropy::min_page_entropy(&v);
        let max = entropy::max_page_entropy(&v);
        assert!(
            (m - bmin).abs() < 1e-12,
            "min bound off for {totals:?}/{pages:?}: {m} vs brute {bmin}"
        );
        assert!(
            (max - bmax).abs() < 1e-12,
            "max bound off for {totals:?}/{pages:?}: {max} vs brute {bmax}"
        );
    };
    let mut patterns = 0u64;
    for &(n1, c1) in &single {
        check_pattern(&[n1], &[c1]);
        patterns += 1;
    }
    for &(n1, c1) in &single {
        for &(n2, c2) in &single {
            check_pattern(&[n1, n2], &[c1, c2]);
            patterns += 1;
        }
    }
    // Randomized 3-class patterns from the same grid, capped so each full
    // product enumeration stays tractable.
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut three_class = 0u64;
    while three_class < 100 {
        let totals: Vec<u64> = (0..3).map(|_| rng.random_range(1..=12u64)).collect();
        let pages: Vec<u64> = (0..3).map(|_| rng.random_range(1..=4u64)).collect();
        if brute_force_size(&totals, &pages) > 500_000 {
            continue;
        }
        check_pattern(&totals, &pages);
        patterns += 1;
        three_class += 1;
    }

    // Larger random vectors: bounds bracket the observed page entropy.
    let mut rng = ChaCha8Rng::seed_from_u64(203);
    for _ in 0..10_000 {
        let v = random_user_vector(&mut rng, 30, 2000, 40);
        let h = entropy::page_entropy(&v);
        let bounds = entropy::entropy_bounds(&v);
        assert!(bounds.min <= h + 1e-9, "m {} > H {h}", bounds.min);
        assert!(h <= bounds.max + 1e-9, "H {h} > M {}", bounds.max);
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "ACCEPTANCE PASS: criterion 2 - bounds match brute force on {patterns} exhaustive/random \
         patterns and bracket 1e4 random vectors, {elapsed:?}"
    );
}

#[test]
fn criterion_3_null_model_marginals() {
    let schemes: [&[&str]; 3] = [&["A", "B"], &["A", "B", "C"], &["L", "CL", "C", "CR", "R"]];
    for i in 0..1000u64 {
        let scheme = BiasScheme::new(schemes[(i % 3) as usize].to_vec()).unwrap();
        let k = scheme.len();
        let spec = CohortSpec {
            users: 2 + i % 37,
            pages_per_label: (0..k).map(|j| 1 + ((i + j as u64) % 5) as u32).collect(),
            scheme,
            activity: ActivityDist::Uniform { min: 1, max: 14 },
            bias_affinity: 1.0 / k as f64 + (i % 7) as f64 / 7.0 * (1.0 - 1.0 / k as f64),
            page_loyalty: 1.0 + (i % 5) as f64 * 4.0,
            kind: "like".to_string(),
            seed: 90_000 + i,
        };
        let table = generate(&spec).unwrap();
        let kind = like(&table);

        let strong = strong_randomize(&table, kind, 50_000 + i);
        assert_eq!(
            degree_sequences(&table, kind),
            degree_sequences(&strong, kind),
            "strong randomization changed a degree sequence (table {i})"
        );

        let weak = weak_randomize(&table, 60_000 + i);
        assert_eq!(
            table.edges(kind),
            weak.edges(kind),
            "weak changed edges (table {i})"
        );
        assert_eq!(
            table.pages_per_label(),
            weak.pages_per_label(),
            "weak changed the label histogram (table {i})"
        );
        for user in table.users() {
            let before = table
                .user_vector(user, kind)
                .map(|v| entropy::page_entropy(&v));
            let after = weak
                .user_vector(user, kind)
                .map(|v| entropy::page_entropy(&v));
            assert!(
                before == after,
                "page entropy not bit-identical under weak randomization (table {i}, user {})",
                user.index()
            );
        }
    }
    println!(
        "ACCEPTANCE PASS: criterion 3 - strong preserves both degree sequences and weak \
         preserves edges, label histogram, and per-user page entropy on 1000 random tables"
    );
}

#[test]
fn criterion_4_strong_implies_weak() {
    let table = cohort(
        10_000,
        20,
        ActivityDist::PowerLaw {
            exponent: 2.0,
            min: 5,
            max: 200,
        },
        0.75,
        3.0,
        777,
    );
    let kind = like(&table);
    let critical = ks_critical(0.01, 10_000, 10_000);
    for s in 1..=3u64 {
        let strong_alone = strong_randomize(&table, kind, 1000 + s);
        let strong_then_weak = weak_randomize(&strong_randomize(&table, kind, 2000 + s), 3000 + s);
        let a = bias_norms(&strong_alone, kind);
        let b = bias_norms(&strong_then_weak, kind);
        assert_eq!(a.len(), 10_000);
        assert_eq!(b.len(), 10_000);
        let d = ks_statistic(&a, &b);
        assert!(
            d < critical,
            "seed {s}: KS statistic {d:.5} rejects at alpha=0.01 (critical {critical:.5})"
        );
        println!("  seed {s}: KS {d:.5} < critical {critical:.5}");
    }
    println!(
        "ACCEPTANCE PASS: criterion 4 - strong-then-weak indistinguishable from strong alone \
         (two-sample KS, alpha=0.01, 1e4 users, 3 seeds)"
    );
}

#[test]
fn criterion_5_planted_signal_recovery() {
    let start = Instant::now();
    let mut config = preloaded_config("like");
    config.seed = 42;
    config.replicates = 100;
    config.sample_fraction = 1.0;

    let run_kl = |affinity: f64, loyalty: f64| -> Vec<(String, u64, f64)> {
        let table = cohort(10_000, 20, ActivityDist::Fixed(50), affinity, loyalty, 1001);
        let report = run_on_table(&table, &config, &[Section::WeakBenchmark]).unwrap();
        kl_rows(&report)
    };

    let planted = run_kl(0.9, 1.0);
    for (group, n, kl) in &planted {
        if group == "all" {
            continue;
        }
        assert!(*n >= 30, "group {group} under-sampled");
        assert!(
            *kl >= 0.3,
            "planted cohort: group {group} KL {kl} below 0.3"
        );
    }

    let null = run_kl(0.2, 1.0);
    for (group, _, kl) in &null {
        if group == "all" {
            continue;
        }
        assert!(*kl <= 0.05, "null cohort: group {group} KL {kl} above 0.05");
    }

    let page_only = run_kl(0.2, 30.0);
    for (group, _, kl) in &page_only {
        if group == "all" {
            continue;
        }
        assert!(
            *kl <= 0.05,
            "pure-page cohort: group {group} KL {kl} above 0.05"
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    let fmt = |rows: &[(String, u64, f64)]| {
        rows.iter()
            .filter(|(g, _, _)| g != "all")
            .map(|(_, _, kl)| format!("{kl:.3}"))
            .collect::<Vec<_>>()
            .join("/")
    };
    println!(
        "ACCEPTANCE PASS: criterion 5 - per-group KL planted {} (>=0.3), null {} (<=0.05), \
         pure-page-loyalty {} (<=0.05), {elapsed:?}",
        fmt(&planted),
        fmt(&null),
        fmt(&page_only)
    );
}

#[test]
fn criterion_6_concentration_curve_shape() {
    let table = cohort(
        10_000,
        20,
        ActivityDist::PowerLaw {
            exponent: 2.0,
            min: 5,
            max: 500,
        },
        0.6,
        25.0,
        4004,
    );
    let mut config = preloaded_config("like");
    config.seed = 45;
    let report = run_on_table(&table, &config, &[Section::Concentration]).unwrap();

    let parse = |name: &str| -> Vec<(u64, Option<f64>)> {
        report
            .table(name)
            .unwrap()
            .rows
            .iter()
            .map(|row| {
                let users: u64 = row[3].parse().unwrap();
                let mean = (!row[4].is_empty()).then(|| row[4].parse().unwrap());
                (users, mean)
            })
            .collect()
    };
    let real = parse("concentration.real");
    let strong = parse("concentration.strong");
    assert_eq!(real.len(), strong.len());
    let mut populated = 0;
    for (bin, ((n_real, m_real), (n_strong, m_strong))) in
        real.iter().zip(strong.iter()).enumerate()
    {
        // Strong randomization preserves user totals, so the bin cohorts
        // coincide exactly.
        assert_eq!(n_real, n_strong, "bin {bin} cohort mismatch");
        if *n_real == 0 {
            continue;
        }
        populated += 1;
        let (m_real, m_strong) = (m_real.unwrap(), m_strong.unwrap());
        assert!(
            m_real < m_strong,
            "bin {bin}: real mean {m_real} not below randomized mean {m_strong}"
        );
    }
    assert!(
        populated >= 8,
        "too few populated bins ({populated}) for a meaningful curve"
    );
    println!(
        "ACCEPTANCE PASS: criterion 6 - real activity-concentration curve lies strictly below \
         the strong-randomized curve in all {populated} populated bins"
    );
}

#[test]
fn criterion_7_x_quartile_shape() {
    let table = cohort(10_000, 20, ActivityDist::Fixed(40), 0.2, 200.0, 2002);
    let mut config = preloaded_config("like");
    config.seed = 43;
    let report = run_on_table(&table, &config, &[Section::XStatistic]).unwrap();
    let quartiles = report.table("x_stat.quartiles").unwrap();
    assert_eq!(quartiles.rows.len(), 1);
    let row = &quartiles.rows[0];
    let median: f64 = row[4].parse().unwrap();
    let q3: f64 = row[5].parse().unwrap();
    assert_eq!(
        median, 0.0,
        "median x must be exactly 0 on the high-loyalty cohort"
    );
    assert!(q3 <= 0.25, "q3 {q3} above 0.25");
    println!(
        "ACCEPTANCE PASS: criterion 7 - high-loyalty cohort x quartiles: median 0, q3 {q3:.4} <= 0.25 \
         over {} users",
        row[1]
    );
}

#[test]
fn criterion_8_determinism() {
    let table = cohort(
        3_000,
        10,
        ActivityDist::PowerLaw {
            exponent: 2.0,
            min: 5,
            max: 120,
        },
        0.7,
        4.0,
        888,
    );
    let mut config = preloaded_config("like");
    config.seed = 4242;
    config.replicates = 25;
    config.sample_fraction = 0.5;

    let render = || {
        run_on_table(&table, &config, &ALL_SECTIONS)
            .unwrap()
            .render()
    };
    let reference = render();
    assert_eq!(reference, render(), "rerun changed report bytes");
    for threads in [1usize, 4] {
        let pooled = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(render);
        assert_eq!(
            reference, pooled,
            "thread count {threads} changed report bytes"
        );
    }

    // The synthetic input itself is also schedule-independent.
    let again = cohort(
        3_000,
        10,
        ActivityDist::PowerLaw {
            exponent: 2.0,
            min: 5,
            max: 120,
        },
        0.7,
        4.0,
        888,
    );
    assert_eq!(table, again);

    let dir = std::env::temp_dir().join(format!("selexp-acc8-{}", std::process::id()));
    let a = run_on_table(&table, &config, &ALL_SECTIONS)
        .unwrap()
        .write(&dir.join("a"), true)
        .unwrap();
    let b = run_on_table(&table, &config, &ALL_SECTIONS)
        .unwrap()
        .write(&dir.join("b"), true)
        .unwrap();
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    println!(
        "ACCEPTANCE PASS: criterion 8 - identical config and seed give byte-identical reports \
         across reruns, thread counts, and report files"
    );
}

#[test]
fn criterion_9_throughput_floor() {
    // ~1e7-edge table; generation and serialization are setup, the timed
    // span is ingest plus a full per-user bias-entropy pass.
    let spec = CohortSpec::new(405_000, 1000, ActivityDist::Fixed(25), 0.5, 1.0, 99);
    let table = generate(&spec).unwrap();
    let kind = like(&table);
    let edges = table.edges(kind).edge_count();
    assert!(edges >= 10_000_000, "table has only {edges} edges");

    let dir = std::env::temp_dir().join(format!("selexp-acc9-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let interactions = dir.join("interactions.csv");
    let pages = dir.join("pages.csv");
    table.write_files(&interactions, &pages, b',').unwrap();
    drop(table);

    let start = Instant::now();
    let ingested = selexp::model::ingest(
        &interactions,
        &pages,
        &selexp::model::IngestOptions::default(),
    )
    .unwrap();
    let table = ingested.table;
    let kind = like(&table);
    let mut sum = 0.0f64;
    let mut active = 0u64;
    for user in table.users() {
        if let Some(v) = table.user_vector(user, kind) {
            sum += entropy::bias_entropy(&v).1;
            active += 1;
        }
    }
    let elapsed = start.elapsed();

    assert_eq!(active, 405_000);
    assert!(sum.is_finite());
    assert!(
        elapsed < Duration::from_secs(120),
        "ingest + bias-entropy pass took {elapsed:?} for {edges} edges"
    );
    let _ = std::fs::remove_dir_all(&dir);
    println!(
        "ACCEPTANCE PASS: criterion 9 - ingest + bias-entropy pass over {edges} edges \
         ({active} users) in {elapsed:?}"
    );
}
