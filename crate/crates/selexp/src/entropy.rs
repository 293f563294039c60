//! Shannon entropy over the bias and page partitions, the coarse/fine
//! decomposition, exact per-user page-entropy bounds, and the scaled
//! selectivity statistic `x`.
//!
//! Pages refine bias classes, so for any user
//!
//! ```text
//! H_page = H_bias + Σ_i p_i · H_i
//! ```
//!
//! where `p_i` is the share of the user's interactions in class `i` and
//! `H_i` the entropy of their per-page counts inside that class. With the
//! per-class totals fixed, each conditional term moves independently:
//! the minimum of `H_page` is `H_bias` (one page per class) and the maximum
//! adds, per class, the entropy of the most even integer split of the
//! class total over the pages the class contains. Rescaling the observed
//! page entropy into that interval gives `x ∈ [0, 1]`: 0 means one page
//! per class, 1 means maximal within-class spread.
//!
//! Everything here is a pure function of its inputs; natural log is used
//! throughout, and normalized quantities are base-free.

use crate::model::{BiasLabel, KindId, UserId, UserVector};

/// Bounds closer than this (in nats) count as degenerate: the user's
/// within-class spread carries no information, and `x` would be 0/0.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Shannon entropy, in nats, of the distribution induced by `counts`.
///
/// Zero counts contribute nothing (the `0·log 0 := 0` convention).
/// Panics on an empty slice or an all-zero one.
pub fn shannon(counts: &[u64]) -> f64 {
    assert!(
        !counts.is_empty(),
        "shannon requires a non-empty count list"
    );
    let h = shannon_iter(counts.iter().copied());
    assert!(h.is_finite(), "shannon requires a positive total count");
    h
}

/// Core entropy sum over an iterator of counts; NaN when the total is zero.
pub(crate) fn shannon_iter(counts: impl IntoIterator<Item = u64>) -> f64 {
    let mut n = 0u64;
    let mut sum_c_ln_c = 0.0f64;
    for c in counts {
        if c > 1 {
            let cf = c as f64;
            sum_c_ln_c += cf * cf.ln();
        }
        n += c;
    }
    if n == 0 {
        return f64::NAN;
    }
    let nf = n as f64;
    (nf.ln() - sum_c_ln_c / nf).max(0.0)
}

/// Entropy of the user's interaction distribution over bias classes,
/// in nats and normalized by `ln K`.
pub fn bias_entropy(v: &UserVector) -> (f64, f64) {
    let h = shannon_iter(v.bias_counts().iter().copied().filter(|&c| c > 0));
    let norm = (h / (v.class_count() as f64).ln()).min(1.0);
    (h, norm)
}

/// Entropy of the user's per-page interaction distribution, in nats.
pub fn page_entropy(v: &UserVector) -> f64 {
    shannon_iter(v.page_counts())
}

/// One class term of the coarse/fine decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassTerm {
    pub label: BiasLabel,
    /// Share of the user's interactions in this class, `p_i`.
    pub weight: f64,
    /// Entropy of the per-page counts inside the class, `H_i`.
    pub conditional: f64,
}

/// The decomposition `H_page = coarse + Σ weight·conditional`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// `H_bias`, entropy over class totals.
    pub coarse: f64,
    /// One term per non-empty class, in class order.
    pub terms: Vec<ClassTerm>,
}

impl Decomposition {
    /// Recombines the right-hand side of the identity.
    pub fn total(&self) -> f64 {
        self.coarse
            + self
                .terms
                .iter()
                .map(|t| t.weight * t.conditional)
                .sum::<f64>()
    }
}

/// Splits the user's page entropy into the class-level entropy plus the
/// weighted within-class conditionals.
pub fn decompose(v: &UserVector) -> Decomposition {
    let n = v.n() as f64;
    let coarse = shannon_iter(v.bias_counts().iter().copied().filter(|&c| c > 0));
    let mut terms = Vec::new();
    for (class, &total) in v.bias_counts().iter().enumerate() {
        if total == 0 {
            continue;
        }
        let label = BiasLabel(class as u8);
        let conditional = shannon_iter(v.per_bias(label).iter().map(|&(_, c)| c));
        terms.push(ClassTerm {
            label,
            weight: total as f64 / n,
            conditional,
        });
    }
    Decomposition { coarse, terms }
}

/// Minimum page entropy attainable with the user's per-class totals fixed:
/// every class concentrated on a single page, so all conditionals vanish
/// and only the class-level entropy remains.
pub fn min_page_entropy(v: &UserVector) -> f64 {
    shannon_iter(v.bias_counts().iter().copied().filter(|&c| c > 0))
}

/// Entropy of the most even split of `n` interactions over `slots` pages:
/// `ln n` when `n ≤ slots`, otherwise `r` pages get `q+1` and the rest get
/// `q`, with `q`, `r` the quotient and remainder of `n / slots`.
pub fn near_uniform_entropy(n: u64, slots: u64) -> f64 {
    assert!(slots >= 1, "a class must contain at least one page");
    if n <= 1 {
        return 0.0;
    }
    if n <= slots {
        return (n as f64).ln();
    }
    let q = n / slots;
    let r = n % slots;
    let nf = n as f64;
    let qf = q as f64;
    let mut sum_c_ln_c = (slots - r) as f64 * qf * qf.ln();
    if r > 0 {
        let q1 = qf + 1.0;
        sum_c_ln_c += r as f64 * q1 * q1.ln();
    }
    (nf.ln() - sum_c_ln_c / nf).max(0.0)
}

/// Maximum page entropy attainable with the user's per-class totals fixed:
/// the class-level entropy plus each class's most even split over the pages
/// that class contains.
pub fn max_page_entropy(v: &UserVector) -> f64 {
    let n = v.n() as f64;
    let mut h = min_page_entropy(v);
    for (class, &total) in v.bias_counts().iter().enumerate() {
        if total == 0 {
            continue;
        }
        let slots = v.class_pages()[class];
        h += (total as f64 / n) * near_uniform_entropy(total, slots);
    }
    h
}

/// The feasible interval `[m, M]` for a user's page entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBounds {
    /// Theoretical minimum, in nats.
    pub min: f64,
    /// Theoretical maximum, in nats.
    pub max: f64,
    /// `max − min < DEGENERACY_TOL`: the user makes at most one interaction
    /// per class, or every touched class offers only one page.
    pub degenerate: bool,
}

pub fn entropy_bounds(v: &UserVector) -> EntropyBounds {
    let min = min_page_entropy(v);
    let max = max_page_entropy(v);
    EntropyBounds {
        min,
        max,
        degenerate: max - min < DEGENERACY_TOL,
    }
}

/// Page entropy rescaled into its feasible interval: `(H_page − m)/(M − m)`,
/// or `None` when the interval is degenerate and the user must be excluded.
pub fn x_statistic(v: &UserVector) -> Option<f64> {
    let bounds = entropy_bounds(v);
    if bounds.degenerate {
        return None;
    }
    let x = (page_entropy(v) - bounds.min) / (bounds.max - bounds.min);
    Some(x.clamp(0.0, 1.0))
}

/// Everything the pipeline needs to know about one user's selectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyRecord {
    pub user: UserId,
    pub kind: KindId,
    pub bias_entropy: f64,
    pub bias_entropy_norm: f64,
    pub page_entropy: f64,
    pub bounds: EntropyBounds,
    pub x: Option<f64>,
    pub meets_activity_threshold: bool,
    pub multi_page: bool,
}

pub fn entropy_record(v: &UserVector, min_interactions: u64) -> EntropyRecord {
    let (bias, bias_norm) = bias_entropy(v);
    let bounds = entropy_bounds(v);
    EntropyRecord {
        user: v.user(),
        kind: v.kind(),
        bias_entropy: bias,
        bias_entropy_norm: bias_norm,
        page_entropy: page_entropy(v),
        bounds,
        x: x_statistic(v),
        meets_activity_threshold: v.n() >= min_interactions,
        multi_page: v.multi_page(),
    }
}
