//! Data model: bias schemes, interned interaction tables, per-user vectors.
//!
//! An [`InteractionTable`] is immutable after ingestion and cheap to share:
//! randomized variants produced by the null models reuse the interned name
//! tables (and, for label permutations, the edge store) through `Arc`s.

use std::sync::Arc;

use thiserror::Error;

mod ingest;

#[cfg(test)]
pub(crate) use ingest::table_from_rows;
pub use ingest::{
    ingest, load_scheme, IngestOptions, IngestStats, Ingested, KindStats, UnknownPagePolicy,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("bias scheme needs at least two labels, got {0}")]
    SchemeTooSmall(usize),
    #[error("duplicate bias label name {0:?}")]
    DuplicateLabel(String),
    #[error("bias scheme supports at most 256 labels, got {0}")]
    SchemeTooLarge(usize),
    #[error("{path}:{line}: malformed row: {reason}")]
    MalformedRow {
        path: String,
        line: u64,
        reason: String,
    },
    #[error("{path}:{line}: unknown page id {page:?}")]
    UnknownPage {
        path: String,
        line: u64,
        page: String,
    },
    #[error("{path}:{line}: unknown bias label {label:?}")]
    UnknownBiasLabel {
        path: String,
        line: u64,
        label: String,
    },
    #[error("{path}:{line}: page {page:?} already labeled")]
    DuplicatePage {
        path: String,
        line: u64,
        page: String,
    },
    #[error("merged count for user {user:?}, page {page:?} overflows")]
    CountOverflow { user: String, page: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// One of the K ordered bias classes of a [`BiasScheme`]. Labels are plain
/// ordinals; names live in the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BiasLabel(pub(crate) u8);

impl BiasLabel {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered set of K ≥ 2 bias class names; pages map onto these classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasScheme {
    names: Vec<String>,
}

impl BiasScheme {
    pub fn new<S: Into<String>>(names: Vec<S>) -> Result<Self, ModelError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(ModelError::SchemeTooSmall(names.len()));
        }
        if names.len() > 256 {
            return Err(ModelError::SchemeTooLarge(names.len()));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(ModelError::DuplicateLabel(name.clone()));
            }
        }
        Ok(BiasScheme { names })
    }

    /// The default five-class scheme, left to right.
    pub fn default_five() -> Self {
        BiasScheme::new(vec![
            "Left",
            "Center-Left",
            "Center",
            "Center-Right",
            "Right",
        ])
        .expect("default scheme is valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, index: usize) -> Option<BiasLabel> {
        (index < self.names.len()).then_some(BiasLabel(index as u8))
    }

    pub fn labels(&self) -> impl Iterator<Item = BiasLabel> + '_ {
        (0..self.names.len()).map(|i| BiasLabel(i as u8))
    }

    pub fn name(&self, label: BiasLabel) -> &str {
        &self.names[label.index()]
    }

    pub fn by_name(&self, name: &str) -> Option<BiasLabel> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| BiasLabel(i as u8))
    }

    /// Lowercase identifier used for report table names and CLI output.
    pub fn slug(&self, label: BiasLabel) -> String {
        self.names[label.index()]
            .chars()
            .map(|c| {
                if c.is_alphanumeric() {
                    c.to_ascii_lowercase()
                } else {
                    '-'
                }
            })
            .collect()
    }
}

/// Interned user id; dense index into the table's sorted user name list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UserId(pub(crate) u32);

impl UserId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned page id; dense index into the table's sorted page name list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PageId(pub(crate) u32);

impl PageId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interaction kind (`like`, `comment`, ...). Kinds form an open registry:
/// any tag seen at ingestion is accepted, and analyses never mix kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KindId(pub(crate) u16);

impl KindId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One merged edge: a page and the number of interactions the user left on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PageCount {
    pub page: PageId,
    pub count: u32,
}

/// Edges of one interaction kind in compressed sparse row form keyed by user;
/// within a user, entries are sorted by page and counts are merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KindEdges {
    offsets: Vec<u64>,
    items: Vec<PageCount>,
    total: u64,
}

impl KindEdges {
    pub(crate) fn from_merged(offsets: Vec<u64>, items: Vec<PageCount>) -> Self {
        debug_assert!(offsets.windows(2).all(|w| w[0] <= w[1]));
        let total = items.iter().map(|pc| pc.count as u64).sum();
        KindEdges {
            offsets,
            items,
            total,
        }
    }

    pub fn user_items(&self, user: UserId) -> &[PageCount] {
        let lo = self.offsets[user.index()] as usize;
        let hi = self.offsets[user.index() + 1] as usize;
        &self.items[lo..hi]
    }

    /// Number of merged (user, page) edges.
    pub fn edge_count(&self) -> u64 {
        self.items.len() as u64
    }

    /// Sum of interaction counts across all edges.
    pub fn total_interactions(&self) -> u64 {
        self.total
    }

    /// Users with at least one interaction of this kind.
    pub fn active_users(&self) -> u64 {
        self.offsets.windows(2).filter(|w| w[1] > w[0]).count() as u64
    }
}

/// Deduplicated weighted edge multiset over interned users and pages, plus
/// the page → bias label map. Immutable once built; shareable across threads.
#[derive(Debug, Clone)]
pub struct InteractionTable {
    users: Arc<Vec<String>>,
    pages: Arc<Vec<String>>,
    kinds: Arc<Vec<String>>,
    scheme: Arc<BiasScheme>,
    page_bias: Arc<Vec<u8>>,
    per_kind: Vec<Arc<KindEdges>>,
    pages_per_label: Arc<Vec<u64>>,
}

impl PartialEq for InteractionTable {
    fn eq(&self, other: &Self) -> bool {
        self.users == other.users
            && self.pages == other.pages
            && self.kinds == other.kinds
            && self.scheme == other.scheme
            && self.page_bias == other.page_bias
            && self.per_kind.len() == other.per_kind.len()
            && self
                .per_kind
                .iter()
                .zip(&other.per_kind)
                .all(|(a, b)| a == b)
    }
}

impl Eq for InteractionTable {}

impl InteractionTable {
    pub(crate) fn from_parts(
        users: Vec<String>,
        pages: Vec<String>,
        kinds: Vec<String>,
        scheme: BiasScheme,
        page_bias: Vec<u8>,
        per_kind: Vec<KindEdges>,
    ) -> Self {
        debug_assert_eq!(pages.len(), page_bias.len());
        debug_assert_eq!(kinds.len(), per_kind.len());
        let mut pages_per_label = vec![0u64; scheme.len()];
        for &b in &page_bias {
            pages_per_label[b as usize] += 1;
        }
        InteractionTable {
            users: Arc::new(users),
            pages: Arc::new(pages),
            kinds: Arc::new(kinds),
            scheme: Arc::new(scheme),
            page_bias: Arc::new(page_bias),
            per_kind: per_kind.into_iter().map(Arc::new).collect(),
            pages_per_label: Arc::new(pages_per_label),
        }
    }

    /// Same table with a permuted page → label assignment (weak null model).
    pub(crate) fn with_page_bias(&self, page_bias: Vec<u8>) -> Self {
        assert_eq!(page_bias.len(), self.pages.len());
        let mut pages_per_label = vec![0u64; self.scheme.len()];
        for &b in &page_bias {
            pages_per_label[b as usize] += 1;
        }
        InteractionTable {
            users: Arc::clone(&self.users),
            pages: Arc::clone(&self.pages),
            kinds: Arc::clone(&self.kinds),
            scheme: Arc::clone(&self.scheme),
            page_bias: Arc::new(page_bias),
            per_kind: self.per_kind.clone(),
            pages_per_label: Arc::new(pages_per_label),
        }
    }

    /// Same table with one kind's edges replaced (strong null model).
    pub(crate) fn with_kind_edges(&self, kind: KindId, edges: KindEdges) -> Self {
        let mut per_kind = self.per_kind.clone();
        per_kind[kind.index()] = Arc::new(edges);
        InteractionTable {
            users: Arc::clone(&self.users),
            pages: Arc::clone(&self.pages),
            kinds: Arc::clone(&self.kinds),
            scheme: Arc::clone(&self.scheme),
            page_bias: Arc::clone(&self.page_bias),
            per_kind,
            pages_per_label: Arc::clone(&self.pages_per_label),
        }
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_pages(&self) -> usize {
        self.pages.len()
    }

    /// All user ids in ascending order.
    pub fn users(&self) -> impl Iterator<Item = UserId> {
        (0..self.users.len() as u32).map(UserId)
    }

    /// All page ids in ascending order.
    pub fn page_ids(&self) -> impl Iterator<Item = PageId> {
        (0..self.pages.len() as u32).map(PageId)
    }

    pub fn scheme(&self) -> &BiasScheme {
        &self.scheme
    }

    pub fn kind_names(&self) -> impl Iterator<Item = (KindId, &str)> {
        self.kinds
            .iter()
            .enumerate()
            .map(|(i, n)| (KindId(i as u16), n.as_str()))
    }

    pub fn kind(&self, name: &str) -> Option<KindId> {
        self.kinds
            .iter()
            .position(|k| k == name)
            .map(|i| KindId(i as u16))
    }

    pub fn kind_name(&self, kind: KindId) -> &str {
        &self.kinds[kind.index()]
    }

    pub fn user(&self, name: &str) -> Option<UserId> {
        self.users
            .binary_search_by(|u| u.as_str().cmp(name))
            .ok()
            .map(|i| UserId(i as u32))
    }

    pub fn user_name(&self, user: UserId) -> &str {
        &self.users[user.index()]
    }

    pub fn page(&self, name: &str) -> Option<PageId> {
        self.pages
            .binary_search_by(|p| p.as_str().cmp(name))
            .ok()
            .map(|i| PageId(i as u32))
    }

    pub fn page_name(&self, page: PageId) -> &str {
        &self.pages[page.index()]
    }

    pub fn page_label(&self, page: PageId) -> BiasLabel {
        BiasLabel(self.page_bias[page.index()])
    }

    pub(crate) fn page_bias_raw(&self) -> &[u8] {
        &self.page_bias
    }

    /// Number of pages carrying each label, over the whole page universe.
    pub fn pages_per_label(&self) -> &[u64] {
        &self.pages_per_label
    }

    pub fn edges(&self, kind: KindId) -> &KindEdges {
        &self.per_kind[kind.index()]
    }

    pub fn user_items(&self, user: UserId, kind: KindId) -> &[PageCount] {
        self.per_kind[kind.index()].user_items(user)
    }

    /// Groups one user's interactions of `kind` by bias class. `None` when
    /// the user has no interactions of that kind (an empty result, not a
    /// fault).
    pub fn user_vector(&self, user: UserId, kind: KindId) -> Option<UserVector> {
        let items = self.user_items(user, kind);
        if items.is_empty() {
            return None;
        }
        let k = self.scheme.len();
        let mut per_bias: Vec<Vec<(PageId, u64)>> = vec![Vec::new(); k];
        for pc in items {
            per_bias[self.page_bias[pc.page.index()] as usize].push((pc.page, pc.count as u64));
        }
        Some(UserVector::new(
            user,
            kind,
            per_bias,
            self.pages_per_label.as_ref().clone(),
        ))
    }
}

/// One user's interactions of one kind, grouped by bias class and page.
///
/// `class_pages[i]` is the number of pages carrying label `i` in the whole
/// table - the reachable split of each class - which fixes the attainable
/// range of the user's page entropy given the per-class totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserVector {
    user: UserId,
    kind: KindId,
    per_bias: Vec<Vec<(PageId, u64)>>,
    /// All (page, count) pairs in page-id order; label-independent, so
    /// whole-vector reductions are bit-stable under label permutations.
    flat: Vec<(PageId, u64)>,
    bias_counts: Vec<u64>,
    class_pages: Vec<u64>,
    n: u64,
    pages_touched: u64,
}

impl UserVector {
    pub(crate) fn new(
        user: UserId,
        kind: KindId,
        per_bias: Vec<Vec<(PageId, u64)>>,
        class_pages: Vec<u64>,
    ) -> Self {
        assert_eq!(per_bias.len(), class_pages.len());
        let bias_counts: Vec<u64> = per_bias
            .iter()
            .map(|c| c.iter().map(|&(_, n)| n).sum())
            .collect();
        let n = bias_counts.iter().sum();
        let pages_touched = per_bias.iter().map(|c| c.len() as u64).sum();
        assert!(n >= 1, "user vector must hold at least one interaction");
        for (class, counts) in per_bias.iter().enumerate() {
            assert!(
                counts.len() as u64 <= class_pages[class],
                "class {class} touches more pages than it contains"
            );
            assert!(counts.iter().all(|&(_, c)| c >= 1));
        }
        let mut flat: Vec<(PageId, u64)> = per_bias.iter().flatten().copied().collect();
        flat.sort_unstable_by_key(|&(p, _)| p);
        UserVector {
            user,
            kind,
            per_bias,
            flat,
            bias_counts,
            class_pages,
            n,
            pages_touched,
        }
    }

    /// Builds a vector from bare per-class count lists; pages get fabricated
    /// ids. Intended for tests and oracles that need arbitrary vectors
    /// without a backing table.
    pub fn synthetic(per_class: &[Vec<u64>], class_pages: &[u64]) -> Self {
        let mut next_page = 0u32;
        let per_bias = per_class
            .iter()
            .map(|counts| {
                counts
                    .iter()
                    .map(|&c| {
                        let p = PageId(next_page);
                        next_page += 1;
                        (p, c)
                    })
                    .collect()
            })
            .collect();
        UserVector::new(UserId(0), KindId(0), per_bias, class_pages.to_vec())
    }

    pub fn user(&self) -> UserId {
        self.user
    }

    pub fn kind(&self) -> KindId {
        self.kind
    }

    /// K, the number of bias classes in the scheme.
    pub fn class_count(&self) -> usize {
        self.per_bias.len()
    }

    pub fn per_bias(&self, label: BiasLabel) -> &[(PageId, u64)] {
        &self.per_bias[label.index()]
    }

    /// Per-class interaction totals (the numerators of the class weights).
    pub fn bias_counts(&self) -> &[u64] {
        &self.bias_counts
    }

    /// Pages carrying each label anywhere in the table.
    pub fn class_pages(&self) -> &[u64] {
        &self.class_pages
    }

    /// Total interactions.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Distinct pages touched.
    pub fn pages_touched(&self) -> u64 {
        self.pages_touched
    }

    pub fn multi_page(&self) -> bool {
        self.pages_touched >= 2
    }

    /// Iterates all per-page counts in page-id order.
    pub fn page_counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.flat.iter().map(|&(_, c)| c)
    }

    /// The bias class with the strictly largest interaction count, or `None`
    /// when two or more classes tie for the maximum (an unresolved leaning).
    pub fn infer_leaning(&self) -> Option<BiasLabel> {
        let mut best = 0u64;
        let mut best_class = None;
        let mut tied = false;
        for (class, &count) in self.bias_counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            if count > best {
                best = count;
                best_class = Some(BiasLabel(class as u8));
                tied = false;
            } else if count == best {
                tied = true;
            }
        }
        if tied {
            None
        } else {
            best_class
        }
    }
}
