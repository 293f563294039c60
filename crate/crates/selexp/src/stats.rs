//! Distribution machinery: eCDFs, logarithmic activity binning, quartiles,
//! histogram KL divergence, and a two-sample Kolmogorov–Smirnov statistic.

use thiserror::Error;

use crate::model::{InteractionTable, KindId, UserId};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample value {0} outside [0, 1]")]
    ValueOutOfRange(f64),
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("histogram needs at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("pseudocount must be positive, got {0}")]
    BadPseudocount(f64),
    #[error("no user has any interaction of kind {0:?}")]
    NoActiveUsers(String),
}

/// Empirical cumulative distribution function over a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    values: Vec<f64>,
}

impl Ecdf {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `F(x)`: fraction of sample values ≤ x. Right-continuous; `F(max) = 1`.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v <= x);
        idx as f64 / self.values.len() as f64
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.values
    }

    /// The step points `(value, F(value))`, one per distinct value.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.values.len() as f64;
        let mut steps = Vec::new();
        let mut i = 0;
        while i < self.values.len() {
            let v = self.values[i];
            let mut j = i + 1;
            while j < self.values.len() && self.values[j] == v {
                j += 1;
            }
            steps.push((v, j as f64 / n));
            i = j;
        }
        steps
    }

    /// Step points thinned to at most `max_points` rows: for large samples,
    /// actual sample values are taken on an even rank grid (endpoints
    /// included) with exact `F` at each. No interpolation is involved.
    pub fn steps_capped(&self, max_points: usize) -> Vec<(f64, f64)> {
        assert!(max_points >= 2);
        let full = self.steps();
        if full.len() <= max_points {
            return full;
        }
        let n = self.values.len();
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(max_points);
        for j in 0..max_points {
            let idx = j * (n - 1) / (max_points - 1);
            let v = self.values[idx];
            let f = self.eval(v);
            if out.last().map(|&(lv, _)| lv) != Some(v) {
                out.push((v, f));
            }
        }
        out
    }
}

/// Builds the eCDF of a non-empty sample of finite values.
pub fn ecdf(values: &[f64]) -> Result<Ecdf, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(Ecdf { values: sorted })
}

/// Normalized entropy levels of a user spreading evenly over 2, 3, ...,
/// K−1 classes: `ln j / ln K`. Reference lines for bias-entropy eCDF plots.
pub fn reference_abscissas(k: usize) -> Vec<f64> {
    let lnk = (k as f64).ln();
    (2..k).map(|j| (j as f64).ln() / lnk).collect()
}

/// Five-number summary with linear interpolation between closest ranks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn quartiles(values: &[f64]) -> Result<Quartiles, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let at = |p: f64| -> f64 {
        let h = (sorted.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let frac = h - lo as f64;
        if frac == 0.0 || lo + 1 == sorted.len() {
            sorted[lo]
        } else {
            sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
        }
    };
    Ok(Quartiles {
        min: sorted[0],
        q1: at(0.25),
        median: at(0.5),
        q3: at(0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// `D(real ‖ benchmark)` between two samples on `[0, 1]`, in nats.
///
/// Both samples are histogrammed on `bins` shared equal-width bins, every
/// bin gets `pseudocount` added, the histograms are normalized, and the
/// divergence `Σ p ln(p/q)` is returned. The smoothing keeps empty
/// benchmark bins from producing infinities.
pub fn kl_divergence(
    real: &[f64],
    benchmark: &[f64],
    bins: usize,
    pseudocount: f64,
) -> Result<f64, StatsError> {
    if real.is_empty() || benchmark.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if bins < 2 {
        return Err(StatsError::TooFewBins(bins));
    }
    if pseudocount <= 0.0 || pseudocount.is_nan() {
        return Err(StatsError::BadPseudocount(pseudocount));
    }
    let hist = |sample: &[f64]| -> Result<Vec<f64>, StatsError> {
        let mut counts = vec![0u64; bins];
        for &v in sample {
            if !v.is_finite() {
                return Err(StatsError::NonFinite);
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(StatsError::ValueOutOfRange(v));
            }
            let idx = ((v * bins as f64) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        let total = sample.len() as f64 + pseudocount * bins as f64;
        Ok(counts
            .iter()
            .map(|&c| (c as f64 + pseudocount) / total)
            .collect())
    };
    let p = hist(real)?;
    let q = hist(benchmark)?;
    let d: f64 = p.iter().zip(&q).map(|(&pi, &qi)| pi * (pi / qi).ln()).sum();
    Ok(d.max(0.0))
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    assert!(
        !a.is_empty() && !b.is_empty(),
        "ks_statistic requires non-empty samples"
    );
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(|u, v| u.partial_cmp(v).unwrap());
    ys.sort_unstable_by(|u, v| u.partial_cmp(v).unwrap());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        let fa = i as f64 / xs.len() as f64;
        let fb = j as f64 / ys.len() as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at level `alpha`:
/// `c(α)·sqrt((n+m)/(n·m))` with `c(α) = sqrt(-ln(α/2)/2)`.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0);
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * (((n + m) as f64) / ((n * m) as f64)).sqrt()
}

/// Mean distinct-page count by activity, on geometric activity bins.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedCurve {
    /// `bins + 1` strictly increasing edges spanning the observed activity
    /// range (except when `collapsed`).
    pub edges: Vec<f64>,
    pub bins: Vec<ActivityBin>,
    /// Every user has the same activity; a single bin holds them all.
    pub collapsed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityBin {
    pub users: u64,
    /// `None` flags an empty bin; nothing is interpolated.
    pub mean_distinct_pages: Option<f64>,
}

impl BinnedCurve {
    pub fn populated(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.bins
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.mean_distinct_pages.map(|m| (i, m)))
    }
}

/// Bins users of `kind` by total interaction count into `bins` geometric
/// bins spanning the observed min/max, and reports the mean number of
/// distinct pages per bin.
pub fn activity_concentration(
    table: &InteractionTable,
    kind: KindId,
    bins: usize,
) -> Result<BinnedCurve, StatsError> {
    assert!(bins >= 1);
    let edges_store = table.edges(kind);
    let mut per_user: Vec<(u64, u64)> = Vec::new();
    for user_idx in 0..table.n_users() {
        let items = edges_store.user_items(UserId(user_idx as u32));
        if items.is_empty() {
            continue;
        }
        let total: u64 = items.iter().map(|pc| pc.count as u64).sum();
        per_user.push((total, items.len() as u64));
    }
    if per_user.is_empty() {
        return Err(StatsError::NoActiveUsers(table.kind_name(kind).to_string()));
    }
    let min = per_user.iter().map(|&(t, _)| t).min().unwrap() as f64;
    let max = per_user.iter().map(|&(t, _)| t).max().unwrap() as f64;

    if min == max {
        let mean = per_user.iter().map(|&(_, d)| d as f64).sum::<f64>() / per_user.len() as f64;
        return Ok(BinnedCurve {
            edges: vec![min, min + 1.0],
            bins: vec![ActivityBin {
                users: per_user.len() as u64,
                mean_distinct_pages: Some(mean),
            }],
            collapsed: true,
        });
    }

    let ratio = (max / min).ln();
    let edges: Vec<f64> = (0..=bins)
        .map(|i| min * (ratio * i as f64 / bins as f64).exp())
        .collect();
    let mut counts = vec![0u64; bins];
    let mut sums = vec![0f64; bins];
    for &(total, distinct) in &per_user {
        let pos = ((total as f64 / min).ln() / ratio * bins as f64) as usize;
        let idx = pos.min(bins - 1);
        counts[idx] += 1;
        sums[idx] += distinct as f64;
    }
    let bins_out = counts
        .iter()
        .zip(&sums)
        .map(|(&users, &sum)| ActivityBin {
            users,
            mean_distinct_pages: (users > 0).then(|| sum / users as f64),
        })
        .collect();
    Ok(BinnedCurve {
        edges,
        bins: bins_out,
        collapsed: false,
    })
}
