//! Selective-exposure analytics over labeled bipartite interaction data.
//!
//! The library ingests (user, page, kind, count) interaction logs where every
//! page carries one of K ordered bias labels, and quantifies how selectively
//! each user distributes attention:
//!
//! * [`model`] - immutable interaction tables, streaming ingestion, per-user
//!   grouped count vectors, and modal leaning inference.
//! * [`entropy`] - Shannon entropy, its coarse/fine decomposition over the
//!   bias and page partitions, exact per-user min/max page-entropy bounds,
//!   and the scaled selectivity statistic `x`.
//! * [`nullmodel`] - seeded strong (edge-endpoint) and weak (label
//!   permutation) randomizations plus a Monte Carlo benchmark over weak
//!   randomizations.
//! * [`stats`] - eCDFs, logarithmic activity binning, quartiles, KL
//!   divergence, and a two-sample Kolmogorov–Smirnov statistic.
//! * [`synthgen`] - synthetic cohorts with planted, parameterized
//!   selectivity for end-to-end validation.
//! * [`pipeline`] - experiment runners that wire everything into
//!   reproducible, versioned report files; the `selexp` binary is a thin CLI
//!   over this module.
//!
//! All randomized operations are deterministic functions of their explicit
//! seeds, independent of thread count.

pub mod entropy;
pub mod model;
pub mod nullmodel;
pub mod pipeline;
pub mod stats;
pub mod synthgen;

pub(crate) mod seed;
