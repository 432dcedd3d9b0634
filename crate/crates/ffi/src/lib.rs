//! C ABI over `gbo-core`.
//!
//! Every fallible function returns a [`GboStatus`]; on failure the message
//! is available from [`gbo_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Strings
//! returned through out-pointers are owned by the caller and released
//! with [`gbo_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use gbo_core::bo::{expected_improvement, GboConfig, GboOptimizer as CoreOptimizer, Strategy};
use gbo_core::experiment::{run_experiment, ExperimentConfig, KernelSection};
use gbo_core::features::{FeatureGroupSpec, FeatureGroups};
use gbo_core::graph::{read_graphs, CandidateSet, Graph};
use gbo_core::hyperopt::{HyperoptOptions, Pins};
use gbo_core::kernels::{GraphKernelBank, GraphKernelConfig, KernelVariant};
use gbo_core::objectives::hartmann4;
use gbo_core::GboError;
use serde::Deserialize;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GboStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Config = 5,
    Numerical = 6,
    Exhausted = 7,
    Infeasible = 8,
    Objective = 9,
    Unsupported = 10,
    InvalidUtf8 = 11,
    Panic = 12,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &GboError) -> GboStatus {
    match e {
        GboError::Parameter(_)
        | GboError::UnknownFeature(_)
        | GboError::DimensionMismatch { .. }
        | GboError::Domain { .. } => GboStatus::InvalidArgument,
        GboError::Parse { .. } | GboError::Json(_) => GboStatus::Parse,
        GboError::Io(_) => GboStatus::Io,
        GboError::Config(_) => GboStatus::Config,
        GboError::DegenerateGraph(_) | GboError::IllConditioned { .. } | GboError::Fitting(_) => GboStatus::Numerical,
        GboError::Exhausted => GboStatus::Exhausted,
        GboError::Infeasible { .. } => GboStatus::Infeasible,
        GboError::Objective(_) => GboStatus::Objective,
        GboError::Unsupported(_) => GboStatus::Unsupported,
    }
}

struct Failure(GboStatus, String);

impl From<GboError> for Failure {
    fn from(e: GboError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(GboStatus::Parse, e.to_string())
    }
}

/// Runs `f`, records any failure or panic, and returns its status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GboStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GboStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            GboStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(GboStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(GboStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn gbo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gbo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Expected improvement of a Gaussian prediction over `y_max`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gbo_expected_improvement(mean: f64, variance: f64, y_max: f64, out: *mut f64) -> GboStatus {
    guard(|| {
        *out_arg(out, "out")? = expected_improvement(mean, variance, y_max);
        Ok(())
    })
}

/// Four-dimensional Hartmann function on the unit cube.
///
/// # Safety
/// `x` must point to `len` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gbo_hartmann4(x: *const f64, len: usize, out: *mut f64) -> GboStatus {
    guard(|| {
        if x.is_null() {
            return Err(null("x"));
        }
        let x = std::slice::from_raw_parts(x, len);
        *out_arg(out, "out")? = hartmann4(x)?;
        Ok(())
    })
}

/// A growing list of candidate graphs.
pub struct GboCandidates {
    ids: Vec<String>,
    graphs: Vec<Graph>,
}

impl GboCandidates {
    fn set(&self) -> Result<CandidateSet, GboError> {
        CandidateSet::new(self.ids.clone(), self.graphs.clone())
    }
}

/// Creates an empty candidate list.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gbo_candidates_new(out: *mut *mut GboCandidates) -> GboStatus {
    guard(|| {
        *out_arg(out, "out")? = Box::into_raw(Box::new(GboCandidates { ids: Vec::new(), graphs: Vec::new() }));
        Ok(())
    })
}

/// Reads candidates from a graph file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gbo_candidates_read(path: *const c_char, out: *mut *mut GboCandidates) -> GboStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let set = read_graphs(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(GboCandidates { ids: set.ids().to_vec(), graphs: set.graphs().to_vec() }));
        Ok(())
    })
}

/// Appends an undirected graph on nodes `0..node_count`. `edges` holds
/// `edge_count` pairs as `2 * edge_count` node indices.
///
/// # Safety
/// `candidates` must be a live handle, `id` a NUL-terminated string and
/// `edges` must point to `2 * edge_count` values (may be null when zero).
#[no_mangle]
pub unsafe extern "C" fn gbo_candidates_add(
    candidates: *mut GboCandidates,
    id: *const c_char,
    node_count: usize,
    edges: *const usize,
    edge_count: usize,
) -> GboStatus {
    guard(|| {
        let c = out_arg(candidates, "candidates")?;
        let id = str_arg(id, "id")?.to_string();
        let flat: &[usize] = if edge_count == 0 {
            &[]
        } else if edges.is_null() {
            return Err(null("edges"));
        } else {
            std::slice::from_raw_parts(edges, 2 * edge_count)
        };
        let graph = Graph::new(node_count, flat.chunks_exact(2).map(|p| (p[0], p[1])))?;
        if c.ids.contains(&id) {
            return Err(Failure(GboStatus::InvalidArgument, format!("duplicate candidate id `{id}`")));
        }
        c.ids.push(id);
        c.graphs.push(graph);
        Ok(())
    })
}

/// Number of candidates, or 0 for a null handle.
///
/// # Safety
/// `candidates` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gbo_candidates_len(candidates: *const GboCandidates) -> usize {
    candidates.as_ref().map_or(0, |c| c.ids.len())
}

/// # Safety
/// `candidates` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gbo_candidates_free(candidates: *mut GboCandidates) {
    if !candidates.is_null() {
        drop(Box::from_raw(candidates));
    }
}

fn default_strategy() -> Strategy {
    Strategy::Gbo
}
fn default_n_init() -> usize {
    GboConfig::default().n_init
}
fn default_refit() -> usize {
    GboConfig::default().refit_every
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizerOptions {
    #[serde(default = "default_strategy")]
    strategy: Strategy,
    feature_groups: Vec<FeatureGroupSpec>,
    #[serde(default)]
    feature_seed: u64,
    #[serde(default)]
    kernel: KernelSection,
    #[serde(default = "default_n_init")]
    n_init: usize,
    #[serde(default = "default_refit")]
    refit_every: usize,
    #[serde(default)]
    hyperopt: HyperoptOptions,
}

/// Ask/tell optimizer over a fixed candidate list.
pub struct GboOptimizer {
    inner: CoreOptimizer,
}

/// Builds an optimizer. `options_json` holds `feature_groups` and
/// optionally `strategy` (gbo, gbo_base, bo_f or bo_g), `feature_seed`,
/// `kernel`, `n_init`, `refit_every` and `hyperopt`, with the same
/// meaning as in experiment configs.
///
/// # Safety
/// `candidates` must be a live handle, `options_json` a NUL-terminated
/// string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gbo_optimizer_new(
    candidates: *const GboCandidates,
    options_json: *const c_char,
    seed: u64,
    out: *mut *mut GboOptimizer,
) -> GboStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let candidates = candidates.as_ref().ok_or_else(|| null("candidates"))?;
        let opts: OptimizerOptions = serde_json::from_str(str_arg(options_json, "options_json")?)?;
        let (variant, pins) = match opts.strategy {
            Strategy::Gbo => (KernelVariant::Deep, Pins::default()),
            Strategy::GboBase => (KernelVariant::Base, Pins::default()),
            Strategy::BoF => (KernelVariant::Deep, Pins { alpha_zero: true, betas_zero: false }),
            Strategy::BoG => (KernelVariant::Deep, Pins { alpha_zero: false, betas_zero: true }),
            other => {
                return Err(Failure(GboStatus::Unsupported, format!("{other} is not a model-based strategy")));
            }
        };
        let set = candidates.set()?;
        let features = FeatureGroups::extract(&set, &opts.feature_groups, opts.feature_seed)?;
        let k = &opts.kernel;
        let config = GraphKernelConfig {
            k: k.k,
            samples: k.samples,
            samples_per_node: k.samples_per_node,
            grid: k.grid.clone(),
            variant,
            seed: k.seed,
        };
        let bank = GraphKernelBank::build(&set, &config, None)?;
        let gbo = GboConfig { n_init: opts.n_init, refit_every: opts.refit_every, hyperopt: opts.hyperopt };
        let inner = CoreOptimizer::new(Arc::new(bank), Arc::new(features), gbo, pins, seed)?;
        *out = Box::into_raw(Box::new(GboOptimizer { inner }));
        Ok(())
    })
}

/// Index of the next candidate to evaluate.
///
/// # Safety
/// `optimizer` must be a live handle and `index` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gbo_optimizer_ask(optimizer: *mut GboOptimizer, index: *mut usize) -> GboStatus {
    guard(|| {
        let o = out_arg(optimizer, "optimizer")?;
        *out_arg(index, "index")? = o.inner.ask()?.index;
        Ok(())
    })
}

/// Reports the objective value of candidate `index`.
///
/// # Safety
/// `optimizer` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gbo_optimizer_tell(optimizer: *mut GboOptimizer, index: usize, y: f64) -> GboStatus {
    guard(|| {
        out_arg(optimizer, "optimizer")?.inner.tell(index, y)?;
        Ok(())
    })
}

/// Best observation so far; fails with `Exhausted` before any `tell`.
///
/// # Safety
/// `optimizer` must be a live handle; `index` and `y` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gbo_optimizer_best(optimizer: *const GboOptimizer, index: *mut usize, y: *mut f64) -> GboStatus {
    guard(|| {
        let o = optimizer.as_ref().ok_or_else(|| null("optimizer"))?;
        let (i, v) = o.inner.best().ok_or_else(|| Failure(GboStatus::Exhausted, "no observations yet".into()))?;
        *out_arg(index, "index")? = i;
        *out_arg(y, "y")? = v;
        Ok(())
    })
}

/// Current surrogate hyperparameters as JSON (`null` before the first
/// fit). Free the string with [`gbo_string_free`].
///
/// # Safety
/// `optimizer` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gbo_optimizer_params_json(optimizer: *const GboOptimizer, out: *mut *mut c_char) -> GboStatus {
    guard(|| {
        let o = optimizer.as_ref().ok_or_else(|| null("optimizer"))?;
        let out = out_arg(out, "out")?;
        *out = into_c_string(serde_json::to_string(&o.inner.params())?);
        Ok(())
    })
}

/// # Safety
/// `optimizer` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gbo_optimizer_free(optimizer: *mut GboOptimizer) {
    if !optimizer.is_null() {
        drop(Box::from_raw(optimizer));
    }
}

/// Runs an experiment config. Relative paths inside it resolve against
/// the config's directory. `out_dir` may be null to skip writing files;
/// `jobs` of 0 uses every core. The summary JSON is written to
/// `summary_json` when it is not null.
///
/// # Safety
/// String arguments must be NUL-terminated (or null where allowed) and
/// `summary_json` null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gbo_run_experiment(
    config_path: *const c_char,
    out_dir: *const c_char,
    jobs: usize,
    seed_base: u64,
    summary_json: *mut *mut c_char,
) -> GboStatus {
    guard(|| {
        let path = Path::new(str_arg(config_path, "config_path")?);
        let out = if out_dir.is_null() { None } else { Some(Path::new(str_arg(out_dir, "out_dir")?)) };
        let config = ExperimentConfig::read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let result = run_experiment(&config, base, out, (jobs > 0).then_some(jobs), seed_base)?;
        if let Some(s) = summary_json.as_mut() {
            *s = into_c_string(serde_json::to_string(&result.summary)?);
        }
        Ok(())
    })
}
