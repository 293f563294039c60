//! Strong (edge-endpoint) and weak (label-permutation) randomizations with
//! exact marginal preservation, plus the Monte Carlo benchmark over weak
//! randomizations.
//!
//! * Strong: every interaction of one kind is re-paired uniformly between
//!   the user and page stub multisets, preserving each user's total and
//!   each page's total exactly (multi-edges allowed). Page labels are
//!   untouched.
//! * Weak: the multiset of bias labels is permuted across pages; every edge
//!   and the per-label page histogram are unchanged, so each user's page
//!   entropy is bit-identical before and after.
//!
//! Both are deterministic functions of (table, seed). Monte Carlo
//! replicates draw derived sub-seeds, so they can run in any order or in
//! parallel without changing the result.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{BiasLabel, InteractionTable, KindEdges, KindId, PageCount, PageId, UserId};
use crate::seed::derive;

#[derive(Debug, Error)]
pub enum NullModelError {
    #[error("table has no interactions of kind {0:?}")]
    EmptyKind(String),
    #[error("no eligible users for the Monte Carlo benchmark")]
    NoEligibleUsers,
    #[error("invalid randomization spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomizationMode {
    Strong,
    Weak,
}

impl RandomizationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RandomizationMode::Strong => "strong",
            RandomizationMode::Weak => "weak",
        }
    }
}

/// Mode, seed, replicate count, and user sampling fraction for a
/// randomization experiment. The seed fully determines every replicate
/// stream; replicate `k` uses a derived sub-seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizationSpec {
    pub mode: RandomizationMode,
    pub seed: u64,
    pub replicates: u32,
    /// Fraction of eligible users drawn (without replacement, once per
    /// experiment) for the weak-mode Monte Carlo.
    pub sample_fraction: f64,
}

impl RandomizationSpec {
    pub fn weak(seed: u64) -> Self {
        RandomizationSpec {
            mode: RandomizationMode::Weak,
            seed,
            replicates: 100,
            sample_fraction: 1.0,
        }
    }

    pub fn strong(seed: u64) -> Self {
        RandomizationSpec {
            mode: RandomizationMode::Strong,
            seed,
            replicates: 1,
            sample_fraction: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), NullModelError> {
        if self.replicates < 1 {
            return Err(NullModelError::InvalidSpec(
                "replicates must be >= 1".into(),
            ));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(NullModelError::InvalidSpec(format!(
                "sample fraction must be in (0, 1], got {}",
                self.sample_fraction
            )));
        }
        Ok(())
    }
}

/// Re-pairs every interaction of `kind` uniformly at random between the
/// user-stub and page-stub multisets, then re-merges counts. Every user's
/// total and every page's total are preserved exactly.
pub fn strong_randomize(table: &InteractionTable, kind: KindId, seed: u64) -> InteractionTable {
    let edges = table.edges(kind);
    let total = edges.total_interactions();
    assert!(total > 0, "strong_randomize requires a non-empty kind");

    let mut user_stubs: Vec<u32> = Vec::with_capacity(total as usize);
    let mut page_stubs: Vec<u32> = Vec::with_capacity(total as usize);
    for user_idx in 0..table.n_users() {
        for pc in edges.user_items(UserId(user_idx as u32)) {
            for _ in 0..pc.count {
                user_stubs.push(user_idx as u32);
                page_stubs.push(pc.page.0);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    page_stubs.shuffle(&mut rng);

    let mut pairs: Vec<(u32, u32)> = user_stubs.into_iter().zip(page_stubs).collect();
    pairs.sort_unstable();

    let mut offsets = vec![0u64; table.n_users() + 1];
    let mut items: Vec<PageCount> = Vec::new();
    let mut iter = pairs.into_iter().peekable();
    while let Some((user, page)) = iter.next() {
        let mut count = 1u64;
        while iter.peek() == Some(&(user, page)) {
            count += 1;
            iter.next();
        }
        let count = u32::try_from(count).expect("merged count fits u32");
        items.push(PageCount {
            page: PageId(page),
            count,
        });
        offsets[user as usize + 1] = items.len() as u64;
    }
    for i in 1..offsets.len() {
        if offsets[i] < offsets[i - 1] {
            offsets[i] = offsets[i - 1];
        }
    }
    table.with_kind_edges(kind, KindEdges::from_merged(offsets, items))
}

/// Permutes the multiset of bias labels across pages. All edges and the
/// per-label page histogram are unchanged.
pub fn weak_randomize(table: &InteractionTable, seed: u64) -> InteractionTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    table.with_page_bias(permuted_labels(table.page_bias_raw(), &mut rng))
}

fn permuted_labels(labels: &[u8], rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut out = labels.to_vec();
    out.shuffle(rng);
    out
}

/// One user of the sampled Monte Carlo cohort.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledUser {
    pub user: UserId,
    /// Modal leaning under the real labels; `None` when unresolved.
    pub group: Option<BiasLabel>,
    /// Normalized bias entropy under the real labels.
    pub real_value: f64,
}

/// Benchmark distribution of normalized bias entropies under repeated weak
/// randomization, for a fixed sampled cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkDistribution {
    pub kind: KindId,
    pub seed: u64,
    /// Sampled cohort, ascending by user id.
    pub sampled: Vec<SampledUser>,
    /// `values[replicate][i]` is the benchmark value of `sampled[i]`.
    pub values: Vec<Vec<f64>>,
}

impl BenchmarkDistribution {
    /// All benchmark values of users in `group` pooled across replicates;
    /// `None` pools the whole cohort.
    pub fn pooled(&self, group: Option<BiasLabel>) -> Vec<f64> {
        let mut out = Vec::new();
        for replicate in &self.values {
            for (i, &v) in replicate.iter().enumerate() {
                if group.is_none() || self.sampled[i].group == group {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Benchmark values of one replicate restricted to `group`.
    pub fn replicate(&self, k: usize, group: Option<BiasLabel>) -> Vec<f64> {
        self.values[k]
            .iter()
            .enumerate()
            .filter(|&(i, _)| group.is_none() || self.sampled[i].group == group)
            .map(|(_, &v)| v)
            .collect()
    }

    /// Real (un-randomized) values of the sampled cohort in `group`.
    pub fn real(&self, group: Option<BiasLabel>) -> Vec<f64> {
        self.sampled
            .iter()
            .filter(|s| group.is_none() || s.group == group)
            .map(|s| s.real_value)
            .collect()
    }
}

struct CohortUser {
    user: u32,
    group: Option<BiasLabel>,
    real_value: f64,
}

/// Runs the weak-randomization Monte Carlo of the benchmark bias-entropy
/// distribution: samples `⌈fraction · eligible⌉` users once (eligible:
/// at least `min_interactions` interactions of `kind` and, when
/// `multi_page_only`, at least two distinct pages), then for each replicate
/// permutes the page labels and records every sampled user's normalized
/// bias entropy.
pub fn monte_carlo_weak(
    table: &InteractionTable,
    kind: KindId,
    spec: &RandomizationSpec,
    min_interactions: u64,
    multi_page_only: bool,
) -> Result<BenchmarkDistribution, NullModelError> {
    spec.validate()?;
    if spec.mode != RandomizationMode::Weak {
        return Err(NullModelError::InvalidSpec(
            "Monte Carlo benchmark requires weak mode".into(),
        ));
    }
    let edges = table.edges(kind);
    if edges.total_interactions() == 0 {
        return Err(NullModelError::EmptyKind(table.kind_name(kind).to_string()));
    }

    let mut eligible: Vec<u32> = Vec::new();
    for user_idx in 0..table.n_users() {
        let items = edges.user_items(UserId(user_idx as u32));
        if items.is_empty() {
            continue;
        }
        if multi_page_only && items.len() < 2 {
            continue;
        }
        let total: u64 = items.iter().map(|pc| pc.count as u64).sum();
        if total >= min_interactions {
            eligible.push(user_idx as u32);
        }
    }
    if eligible.is_empty() {
        return Err(NullModelError::NoEligibleUsers);
    }

    let sample_size =
        ((spec.sample_fraction * eligible.len() as f64).ceil() as usize).clamp(1, eligible.len());
    let mut rng = ChaCha8Rng::seed_from_u64(derive(spec.seed, 0));
    let (sampled_ids, _) = eligible.partial_shuffle(&mut rng, sample_size);
    let mut sampled_ids = sampled_ids.to_vec();
    sampled_ids.sort_unstable();

    let k = table.scheme().len();
    let real_labels = table.page_bias_raw();
    let cohort: Vec<CohortUser> = sampled_ids
        .iter()
        .map(|&user| {
            let items = edges.user_items(UserId(user));
            let mut counts = vec![0u64; k];
            for pc in items {
                counts[real_labels[pc.page.index()] as usize] += pc.count as u64;
            }
            let v = table
                .user_vector(UserId(user), kind)
                .expect("sampled user has interactions");
            CohortUser {
                user,
                group: v.infer_leaning(),
                real_value: normalized_bias_entropy(&counts, k),
            }
        })
        .collect();

    let values = run_replicates(table, kind, &cohort, spec.replicates, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive(spec.seed, 1 + r as u64));
        permuted_labels(real_labels, &mut rng)
    });

    Ok(BenchmarkDistribution {
        kind,
        seed: spec.seed,
        sampled: cohort
            .iter()
            .map(|c| SampledUser {
                user: UserId(c.user),
                group: c.group,
                real_value: c.real_value,
            })
            .collect(),
        values,
    })
}

fn normalized_bias_entropy(counts: &[u64], k: usize) -> f64 {
    (crate::entropy::shannon_iter(counts.iter().copied().filter(|&c| c > 0)) / (k as f64).ln())
        .min(1.0)
}

/// Evaluates the cohort's normalized bias entropies under the label
/// assignment produced by `labels_for` for each replicate. Replicates run
/// in parallel; output order is replicate order regardless of scheduling.
fn run_replicates(
    table: &InteractionTable,
    kind: KindId,
    cohort: &[CohortUser],
    replicates: u32,
    labels_for: impl Fn(u32) -> Vec<u8> + Sync,
) -> Vec<Vec<f64>> {
    let k = table.scheme().len();
    let edges = table.edges(kind);
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let labels = labels_for(r);
            let mut scratch = vec![0u64; k];
            let mut touched: Vec<usize> = Vec::with_capacity(k);
            cohort
                .iter()
                .map(|user| {
                    for pc in edges.user_items(UserId(user.user)) {
                        let label = labels[pc.page.index()] as usize;
                        if scratch[label] == 0 {
                            touched.push(label);
                        }
                        scratch[label] += pc.count as u64;
                    }
                    let h = normalized_bias_entropy(&scratch, k);
                    for &t in &touched {
                        scratch[t] = 0;
                    }
                    touched.clear();
                    h
                })
                .collect()
        })
        .collect()
}
