#![allow(dead_code)] // each test binary uses its own subset

//! Shared oracles and generators for the integration suites. Everything
//! here is intentionally independent of the library's internal entropy
//! formulas: entropies are evaluated as plain -Σ p ln p sums and extreme
//! values by exhaustive enumeration.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use selexp::model::{InteractionTable, KindId, UserVector};

/// Independent entropy route: -Σ p ln p over the nonzero counts.
pub fn naive_entropy(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

/// All assignments of `total` interactions to `slots` pages, zeros allowed.
pub fn weak_compositions(total: u64, slots: u64) -> Vec<Vec<u64>> {
    if slots == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in weak_compositions(total - first, slots - 1) {
            let mut v = Vec::with_capacity(slots as usize);
            v.push(first);
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

/// Brute-force extreme page entropies over every combined count assignment
/// of each class total to that class's pages.
pub fn brute_force_bounds(class_totals: &[u64], class_pages: &[u64]) -> (f64, f64) {
    let per_class: Vec<Vec<Vec<u64>>> = class_totals
        .iter()
        .zip(class_pages)
        .map(|(&t, &p)| weak_compositions(t, p))
        .collect();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut index = vec![0usize; per_class.len()];
    let mut counts: Vec<u64> = Vec::new();
    loop {
        counts.clear();
        for (class, &i) in index.iter().enumerate() {
            counts.extend(per_class[class][i].iter().copied().filter(|&c| c > 0));
        }
        let h = naive_entropy(&counts);
        if h < min {
            min = h;
        }
        if h > max {
            max = h;
        }
        let mut pos = 0;
        loop {
            if pos == index.len() {
                return (min, max);
            }
            index[pos] += 1;
            if index[pos] < per_class[pos].len() {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
    }
}

/// Number of combined assignments `brute_force_bounds` would enumerate.
pub fn brute_force_size(class_totals: &[u64], class_pages: &[u64]) -> u64 {
    class_totals
        .iter()
        .zip(class_pages)
        .map(|(&t, &p)| {
            // C(t + p - 1, p - 1)
            let mut binom = 1.0f64;
            for i in 0..(p - 1) {
                binom *= (t + p - 1 - i) as f64 / (i + 1) as f64;
            }
            binom as u64
        })
        .product()
}

/// Random user vector: 2–6 classes, bounded pages per class and counts,
/// class page budgets at least the touched count.
pub fn random_user_vector(
    rng: &mut ChaCha8Rng,
    max_pages_per_class: u64,
    max_count: u64,
    max_extra_pages: u64,
) -> UserVector {
    loop {
        let classes = rng.random_range(2..=6usize);
        let mut per_class: Vec<Vec<u64>> = Vec::with_capacity(classes);
        let mut pages: Vec<u64> = Vec::with_capacity(classes);
        for _ in 0..classes {
            let touched = rng.random_range(0..=max_pages_per_class);
            per_class.push(
                (0..touched)
                    .map(|_| rng.random_range(1..=max_count))
                    .collect(),
            );
            pages.push((touched + rng.random_range(0..=max_extra_pages)).max(1));
        }
        if per_class.iter().any(|c| !c.is_empty()) {
            return UserVector::synthetic(&per_class, &pages);
        }
    }
}

/// Normalized bias entropy of every user with at least one interaction of
/// `kind`, ascending by user id.
pub fn bias_norms(table: &InteractionTable, kind: KindId) -> Vec<f64> {
    table
        .users()
        .filter_map(|u| table.user_vector(u, kind))
        .map(|v| selexp::entropy::bias_entropy(&v).1)
        .collect()
}

/// Per-user and per-page interaction totals for one kind.
pub fn degree_sequences(table: &InteractionTable, kind: KindId) -> (Vec<u64>, Vec<u64>) {
    let mut users = vec![0u64; table.n_users()];
    let mut pages = vec![0u64; table.n_pages()];
    for user in table.users() {
        for pc in table.user_items(user, kind) {
            users[user.index()] += pc.count as u64;
            pages[pc.page.index()] += pc.count as u64;
        }
    }
    (users, pages)
}
