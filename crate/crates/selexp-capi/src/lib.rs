//! C ABI over the selexp library: opaque table handles, status codes, and
//! plain-old-data records.
//!
//! Conventions:
//!
//! * Every function returns a [`SelexpStatus`]; `SELEXP_STATUS_OK` is 0.
//! * On failure, `selexp_last_error_message` returns a human-readable
//!   message for the current thread, valid until the next failing call on
//!   that thread.
//! * Handles produced by `selexp_table_*` constructors must be released
//!   with `selexp_table_free`. Handles are immutable and safe to share
//!   across threads; freeing must happen exactly once.
//! * Strings are NUL-terminated UTF-8.
//!
//! The generated header lives at `include/selexp.h`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use libc::c_char;

use selexp::entropy;
use selexp::model::{BiasScheme, IngestOptions, InteractionTable, UnknownPagePolicy};
use selexp::nullmodel;
use selexp::pipeline::{
    run_on_table, BenchmarkEstimator, ExperimentConfig, InputSource, PipelineError, ALL_SECTIONS,
};
use selexp::synthgen::{self, ActivityDist, CohortSpec};

/// Result code of every C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelexpStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Invalid configuration (bad parameter values).
    ConfigError = 3,
    /// Invalid or inconsistent input data.
    DataError = 4,
    /// A named kind, user, or page does not exist.
    NotFound = 5,
    /// Filesystem failure.
    IoError = 6,
    /// Internal panic; state is unspecified but memory-safe.
    Panic = 7,
}

/// Opaque immutable interaction table.
pub struct SelexpTable {
    inner: InteractionTable,
}

/// Per-user selectivity record.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SelexpEntropyRecord {
    /// Total interactions of the requested kind.
    pub n: u64,
    /// Distinct pages touched.
    pub distinct_pages: u64,
    /// Bias entropy in nats.
    pub bias_entropy: f64,
    /// Bias entropy divided by ln(K); in [0, 1].
    pub bias_entropy_norm: f64,
    /// Page entropy in nats.
    pub page_entropy: f64,
    /// Theoretical minimum page entropy given the per-class totals.
    pub min_bound: f64,
    /// Theoretical maximum page entropy given the per-class totals.
    pub max_bound: f64,
    /// Scaled selectivity statistic in [0, 1]; NaN when `has_x` is false.
    pub x: f64,
    pub has_x: bool,
    /// Bounds coincide; the user carries no within-class information.
    pub degenerate_bounds: bool,
    pub meets_activity_threshold: bool,
    pub multi_page: bool,
    /// Modal leaning as a scheme index, or -1 when unresolved.
    pub leaning: i32,
}

/// Per-user activity distribution selector for synthetic cohorts.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelexpActivityKind {
    /// Every user makes exactly `activity_min` interactions.
    Fixed = 0,
    /// Uniform on [activity_min, activity_max].
    Uniform = 1,
    /// p(n) proportional to n^(-activity_exponent) on [min, max].
    PowerLaw = 2,
}

/// Synthetic cohort parameters; see `selexp_table_synth`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SelexpSynthSpec {
    pub users: u64,
    /// Number of bias labels; 0 selects the default five-label scheme.
    pub labels: u32,
    pub pages_per_label: u32,
    pub activity_kind: SelexpActivityKind,
    /// Power-law exponent; ignored for fixed and uniform activity.
    pub activity_exponent: f64,
    pub activity_min: u64,
    /// Ignored for fixed activity.
    pub activity_max: u64,
    /// Probability an interaction targets the user's home label, in [1/K, 1].
    pub bias_affinity: f64,
    /// Page-taste concentration; 1 = uniform, larger = fewer favorites.
    pub page_loyalty: f64,
    pub seed: u64,
}

/// Experiment knobs for `selexp_run_experiment`; get defaults from
/// `selexp_experiment_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SelexpExperimentConfig {
    /// Activity threshold; inclusive unless `strict_threshold`.
    pub activity_threshold: u64,
    pub strict_threshold: bool,
    /// Restrict the weak benchmark to users touching at least two pages.
    pub multi_page_only: bool,
    pub seed: u64,
    pub replicates: u32,
    /// Fraction of eligible users sampled for the weak benchmark, in (0, 1].
    pub sample_fraction: f64,
    pub kl_bins: u32,
    pub pseudocount: f64,
    pub activity_bins: u32,
    /// Average per-replicate KL instead of pooling replicate values.
    pub averaged_estimator: bool,
    /// Also write one CSV file per report table.
    pub write_csv: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: SelexpStatus, message: &str) -> SelexpStatus {
    set_error(message);
    status
}

/// Human-readable message of the most recent failure on this thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn selexp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version string.
#[no_mangle]
pub extern "C" fn selexp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn guard(f: impl FnOnce() -> SelexpStatus) -> SelexpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(SelexpStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be NULL or a valid NUL-terminated string.
unsafe fn utf8_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, SelexpStatus> {
    if ptr.is_null() {
        return Err(fail(SelexpStatus::NullPointer, &format!("{name} is NULL")));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        fail(
            SelexpStatus::InvalidUtf8,
            &format!("{name} is not valid UTF-8"),
        )
    })
}

unsafe fn table_arg<'a>(ptr: *const SelexpTable) -> Result<&'a InteractionTable, SelexpStatus> {
    if ptr.is_null() {
        return Err(fail(SelexpStatus::NullPointer, "table handle is NULL"));
    }
    Ok(&(*ptr).inner)
}

fn emit_table(table: InteractionTable, out: *mut *mut SelexpTable) -> SelexpStatus {
    if out.is_null() {
        return fail(SelexpStatus::NullPointer, "output handle is NULL");
    }
    unsafe { *out = Box::into_raw(Box::new(SelexpTable { inner: table })) };
    SelexpStatus::Ok
}

fn pipeline_status(err: &PipelineError) -> SelexpStatus {
    match err {
        PipelineError::Config(_) => SelexpStatus::ConfigError,
        PipelineError::UnknownKind { .. } => SelexpStatus::NotFound,
        PipelineError::Io(_) => SelexpStatus::IoError,
        _ => SelexpStatus::DataError,
    }
}

/// Ingests an interaction log and a page-label file.
///
/// `scheme` may be NULL for the default five-label scheme, otherwise it
/// names a file with one ordered label per line. On success `*out` owns a
/// new table handle.
///
/// # Safety
/// String arguments must be NULL or valid NUL-terminated strings; `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn selexp_table_ingest(
    interactions: *const c_char,
    pages: *const c_char,
    scheme: *const c_char,
    separator: c_char,
    lenient: bool,
    out: *mut *mut SelexpTable,
) -> SelexpStatus {
    guard(|| {
        let interactions = match utf8_arg(interactions, "interactions path") {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        let pages = match utf8_arg(pages, "pages path") {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        let scheme = if scheme.is_null() {
            None
        } else {
            match utf8_arg(scheme, "scheme path") {
                Ok(s) => match selexp::model::load_scheme(std::path::Path::new(s)) {
                    Ok(scheme) => Some(scheme),
                    Err(e) => return fail(SelexpStatus::DataError, &e.to_string()),
                },
                Err(status) => return status,
            }
        };
        let options = IngestOptions {
            separator: separator as u8,
            unknown_pages: if lenient {
                UnknownPagePolicy::Skip
            } else {
                UnknownPagePolicy::Fail
            },
            scheme,
        };
        match selexp::model::ingest(&interactions, &pages, &options) {
            Ok(ingested) => emit_table(ingested.table, out),
            Err(e) => {
                let status = match &e {
                    selexp::model::ModelError::Io { .. } => SelexpStatus::IoError,
                    _ => SelexpStatus::DataError,
                };
                fail(status, &e.to_string())
            }
        }
    })
}

/// Generates a synthetic cohort table; `kind` may be NULL for `like`.
///
/// # Safety
/// `spec` and `out` must be valid pointers; `kind` NULL or a valid string.
#[no_mangle]
pub unsafe extern "C" fn selexp_table_synth(
    spec: *const SelexpSynthSpec,
    kind: *const c_char,
    out: *mut *mut SelexpTable,
) -> SelexpStatus {
    guard(|| {
        if spec.is_null() {
            return fail(SelexpStatus::NullPointer, "spec is NULL");
        }
        let spec = *spec;
        let kind = if kind.is_null() {
            "like".to_string()
        } else {
            match utf8_arg(kind, "kind") {
                Ok(s) => s.to_string(),
                Err(status) => return status,
            }
        };
        let scheme = if spec.labels == 0 {
            BiasScheme::default_five()
        } else {
            let names: Vec<String> = (0..spec.labels).map(|i| format!("class{i}")).collect();
            match BiasScheme::new(names) {
                Ok(s) => s,
                Err(e) => return fail(SelexpStatus::ConfigError, &e.to_string()),
            }
        };
        let activity = match spec.activity_kind {
            SelexpActivityKind::Fixed => ActivityDist::Fixed(spec.activity_min),
            SelexpActivityKind::Uniform => ActivityDist::Uniform {
                min: spec.activity_min,
                max: spec.activity_max,
            },
            SelexpActivityKind::PowerLaw => ActivityDist::PowerLaw {
                exponent: spec.activity_exponent,
                min: spec.activity_min,
                max: spec.activity_max,
            },
        };
        let cohort = CohortSpec {
            users: spec.users,
            pages_per_label: vec![spec.pages_per_label; scheme.len()],
            scheme,
            activity,
            bias_affinity: spec.bias_affinity,
            page_loyalty: spec.page_loyalty,
            kind,
            seed: spec.seed,
        };
        match synthgen::generate(&cohort) {
            Ok(table) => emit_table(table, out),
            Err(e) => fail(SelexpStatus::ConfigError, &e.to_string()),
        }
    })
}

/// Releases a table handle. NULL is a no-op.
///
/// # Safety
/// `table` must be NULL or a handle produced by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn selexp_table_free(table: *mut SelexpTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Reads the table dimensions.
///
/// # Safety
/// Pointer arguments must be valid or NULL (NULL outputs are skipped).
#[no_mangle]
pub unsafe extern "C" fn selexp_table_counts(
    table: *const SelexpTable,
    out_users: *mut u64,
    out_pages: *mut u64,
    out_labels: *mut u32,
) -> SelexpStatus {
    guard(|| {
        let table = match table_arg(table) {
            Ok(t) => t,
            Err(status) => return status,
        };
        if !out_users.is_null() {
            *out_users = table.n_users() as u64;
        }
        if !out_pages.is_null() {
            *out_pages = table.n_pages() as u64;
        }
        if !out_labels.is_null() {
            *out_labels = table.scheme().len() as u32;
        }
        SelexpStatus::Ok
    })
}

/// Merged-edge and interaction totals for one kind.
///
/// # Safety
/// Pointer arguments must be valid; `kind` a valid string.
#[no_mangle]
pub unsafe extern "C" fn selexp_table_kind_stats(
    table: *const SelexpTable,
    kind: *const c_char,
    out_edges: *mut u64,
    out_interactions: *mut u64,
) -> SelexpStatus {
    guard(|| {
        let table = match table_arg(table) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let kind_name = match utf8_arg(kind, "kind") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let Some(kind) = table.kind(kind_name) else {
            return fail(
                SelexpStatus::NotFound,
                &format!("kind {kind_name:?} not in table"),
            );
        };
        let edges = table.edges(kind);
        if !out_edges.is_null() {
            *out_edges = edges.edge_count();
        }
        if !out_interactions.is_null() {
            *out_interactions = edges.total_interactions();
        }
        SelexpStatus::Ok
    })
}

/// Writes the table back out in the ingestion file formats.
///
/// # Safety
/// Pointer arguments must be valid strings.
#[no_mangle]
pub unsafe extern "C" fn selexp_table_write(
    table: *const SelexpTable,
    interactions: *const c_char,
    pages: *const c_char,
    separator: c_char,
) -> SelexpStatus {
    guard(|| {
        let table = match table_arg(table) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let interactions = match utf8_arg(interactions, "interactions path") {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        let pages = match utf8_arg(pages, "pages path") {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        match table.write_files(&interactions, &pages, separator as u8) {
            Ok(()) => SelexpStatus::Ok,
            Err(e) => fail(SelexpStatus::IoError, &e.to_string()),
        }
    })
}

/// Strong randomization of one kind: interactions re-paired uniformly,
/// preserving user and page totals. `*out` owns a new handle.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn selexp_strong_randomize(
    table: *const SelexpTable,
    kind: *const c_char,
    seed: u64,
    out: *mut *mut SelexpTable,
) -> SelexpStatus {
    guard(|| {
        let table = match table_arg(table) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let kind_name = match utf8_arg(kind, "kind") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let Some(kind) = table.kind(kind_name) else {
            return fail(
                SelexpStatus::NotFound,
                &format!("kind {kind_name:?} not in table"),
            );
        };
        if table.edges(kind).total_interactions() == 0 {
            return fail(SelexpStatus::DataError, "kind has no interactions");
        }
        emit_table(nullmodel::strong_randomize(table, kind, seed), out)
    })
}

/// Weak randomization: bias labels permuted across pages, edges unchanged.
/// `*out` owns a new handle.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn selexp_weak_randomize(
    table: *const SelexpTable,
    seed: u64,
    out: *mut *mut SelexpTable,
) -> SelexpStatus {
    guard(|| {
        let table = match table_arg(table) {
            Ok(t) => t,
            Err(status) => return status,
        };
        emit_table(nullmodel::weak_randomize(table, seed), out)
    })
}

/// Computes one user's selectivity record for a kind.
///
/// `min_interactions` only feeds the `meets_activity_threshold` flag.
/// Returns `SELEXP_STATUS_NOT_FOUND` when the user is unknown or has no
/// interactions of that kind.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn selexp_user_entropy(
    table: *const SelexpTable,
    kind: *const c_char,
    user: *const c_char,
    min_interactions: u64,
    out: *mut SelexpEntropyRecord,
) -> SelexpStatus {
    guard(|| {
        let table = match table_arg(table) {
            Ok(t) => t,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(SelexpStatus::NullPointer, "output record is NULL");
        }
        let kind_name = match utf8_arg(kind, "kind") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let user_name = match utf8_arg(user, "user") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let Some(kind) = table.kind(kind_name) else {
            return fail(
                SelexpStatus::NotFound,
                &format!("kind {kind_name:?} not in table"),
            );
        };
        let Some(user) = table.user(user_name) else {
            return fail(
                SelexpStatus::NotFound,
                &format!("user {user_name:?} not in table"),
            );
        };
        let Some(vector) = table.user_vector(user, kind) else {
            return fail(
                SelexpStatus::NotFound,
                &format!("user {user_name:?} has no {kind_name:?} interactions"),
            );
        };
        let record = entropy::entropy_record(&vector, min_interactions);
        *out = SelexpEntropyRecord {
            n: vector.n(),
            distinct_pages: vector.pages_touched(),
            bias_entropy: record.bias_entropy,
            bias_entropy_norm: record.bias_entropy_norm,
            page_entropy: record.page_entropy,
            min_bound: record.bounds.min,
            max_bound: record.bounds.max,
            x: record.x.unwrap_or(f64::NAN),
            has_x: record.x.is_some(),
            degenerate_bounds: record.bounds.degenerate,
            meets_activity_threshold: record.meets_activity_threshold,
            multi_page: record.multi_page,
            leaning: vector
                .infer_leaning()
                .map(|l| l.index() as i32)
                .unwrap_or(-1),
        };
        SelexpStatus::Ok
    })
}

/// Default experiment configuration (threshold 5, 100 replicates, 2%
/// sample, 50 KL bins, pseudocount 0.5, 12 activity bins, pooled
/// estimator).
#[no_mangle]
pub extern "C" fn selexp_experiment_config_default() -> SelexpExperimentConfig {
    SelexpExperimentConfig {
        activity_threshold: 5,
        strict_threshold: false,
        multi_page_only: true,
        seed: 0,
        replicates: 100,
        sample_fraction: 0.02,
        kl_bins: 50,
        pseudocount: 0.5,
        activity_bins: 12,
        averaged_estimator: false,
        write_csv: false,
    }
}

/// Runs all four analysis sections on the table and writes `report.txt`
/// (plus per-table CSVs when configured) under `out_dir`.
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn selexp_run_experiment(
    table: *const SelexpTable,
    kind: *const c_char,
    config: *const SelexpExperimentConfig,
    out_dir: *const c_char,
) -> SelexpStatus {
    guard(|| {
        let table = match table_arg(table) {
            Ok(t) => t,
            Err(status) => return status,
        };
        if config.is_null() {
            return fail(SelexpStatus::NullPointer, "config is NULL");
        }
        let config = *config;
        let kind = match utf8_arg(kind, "kind") {
            Ok(s) => s.to_string(),
            Err(status) => return status,
        };
        let out_dir = match utf8_arg(out_dir, "output directory") {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        let experiment = ExperimentConfig {
            activity_threshold: config.activity_threshold,
            strict_threshold: config.strict_threshold,
            multi_page_only: config.multi_page_only,
            seed: config.seed,
            replicates: config.replicates,
            sample_fraction: config.sample_fraction,
            kl_bins: config.kl_bins as usize,
            pseudocount: config.pseudocount,
            activity_bins: config.activity_bins as usize,
            estimator: if config.averaged_estimator {
                BenchmarkEstimator::Averaged
            } else {
                BenchmarkEstimator::Pooled
            },
            ..ExperimentConfig::new(InputSource::Preloaded, kind)
        };
        let report = match run_on_table(table, &experiment, &ALL_SECTIONS) {
            Ok(report) => report,
            Err(e) => return fail(pipeline_status(&e), &e.to_string()),
        };
        match report.write(&out_dir, config.write_csv) {
            Ok(_) => SelexpStatus::Ok,
            Err(e) => fail(SelexpStatus::IoError, &e.to_string()),
        }
    })
}
