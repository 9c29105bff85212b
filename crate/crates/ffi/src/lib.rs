//! C interface to the `mhsbm` crate.
//!
//! Every function returns an [`MhsbmStatus`]; outputs go through pointer
//! arguments. On failure the message is kept per thread and can be read with
//! [`mhsbm_last_error`]. Handles are opaque and must be released with the
//! matching `*_free` function. Matrices are copied out row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mhsbm::inference::{fit, FitResult, InferenceConfig};
use mhsbm::io::Manifest;
use mhsbm::metrics::{auc, community_f1, nmi, PartitionPair};
use mhsbm::prediction::score_hyperedge;
use mhsbm::{Error, MultiHypergraph};
use ndarray::Array2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhsbmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    DimensionMismatch = 5,
    FitFailed = 6,
    Panic = 7,
}

impl From<&Error> for MhsbmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => MhsbmStatus::Io,
            Error::Parse { .. } | Error::Manifest(_) => MhsbmStatus::Parse,
            Error::DimensionMismatch(_) => MhsbmStatus::DimensionMismatch,
            Error::FitFailed(_) | Error::ZeroRate(_) | Error::NonFiniteUpdate(_) => MhsbmStatus::FitFailed,
            _ => MhsbmStatus::InvalidArgument,
        }
    }
}

/// A loaded multi-hypergraph.
pub struct MhsbmGraph {
    inner: MultiHypergraph,
}

/// A fitted model.
pub struct MhsbmFit {
    inner: FitResult,
}

/// Fit settings. Obtain defaults from [`mhsbm_fit_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MhsbmFitOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub check_every: usize,
    pub assortative: bool,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(MhsbmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(MhsbmStatus::from(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(MhsbmStatus::InvalidArgument, msg.into())
}

fn null(name: &str) -> Failure {
    Failure(MhsbmStatus::NullPointer, format!("`{name}` is null"))
}

/// Runs `f`, records any error and converts panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MhsbmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MhsbmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            MhsbmStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn mhsbm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mhsbm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads the layers, ground truth and inter-edges listed in a manifest.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_graph_load(path: *const c_char, out: *mut *mut MhsbmGraph) -> MhsbmStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| invalid("path is not UTF-8"))?;
        let inner = Manifest::load(path)?.load_multi_hypergraph()?;
        write(out, Box::into_raw(Box::new(MhsbmGraph { inner })), "out")
    })
}

/// # Safety
/// `graph` must come from [`mhsbm_graph_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_graph_free(graph: *mut MhsbmGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_graph_num_layers(graph: *const MhsbmGraph, out: *mut usize) -> MhsbmStatus {
    guard(|| write(out, as_ref(graph, "graph")?.inner.num_layers(), "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_graph_num_nodes(graph: *const MhsbmGraph, layer: usize, out: *mut usize) -> MhsbmStatus {
    guard(|| {
        let g = &as_ref(graph, "graph")?.inner;
        let l = g.layers().get(layer).ok_or_else(|| invalid(format!("no layer {layer}")))?;
        write(out, l.num_nodes(), "out")
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_graph_num_hyperedges(graph: *const MhsbmGraph, layer: usize, out: *mut usize) -> MhsbmStatus {
    guard(|| {
        let g = &as_ref(graph, "graph")?.inner;
        let l = g.layers().get(layer).ok_or_else(|| invalid(format!("no layer {layer}")))?;
        write(out, l.hyperedges().len(), "out")
    })
}

#[no_mangle]
pub extern "C" fn mhsbm_fit_options_default() -> MhsbmFitOptions {
    let d = InferenceConfig::new(vec![]);
    MhsbmFitOptions {
        restarts: d.restarts,
        max_iters: d.max_iters,
        tol: d.tol,
        check_every: d.check_every,
        assortative: d.assortative,
        seed: d.seed,
    }
}

/// Fits the model with `k[l]` communities on layer `l`; a single value
/// applies to every layer. A null `options` uses the defaults.
///
/// # Safety
/// `k` must hold `k_len` values; other pointers must be valid or null where
/// allowed.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_fit(
    graph: *const MhsbmGraph,
    k: *const usize,
    k_len: usize,
    options: *const MhsbmFitOptions,
    out: *mut *mut MhsbmFit,
) -> MhsbmStatus {
    guard(|| {
        let g = &as_ref(graph, "graph")?.inner;
        let ks = slice(k, k_len, "k")?;
        let ks = match ks {
            [] => return Err(invalid("at least one community count is required")),
            [one] => vec![*one; g.num_layers()],
            many => many.to_vec(),
        };
        let o = options.as_ref().copied().unwrap_or_else(|| mhsbm_fit_options_default());
        let cfg = InferenceConfig {
            restarts: o.restarts,
            max_iters: o.max_iters,
            tol: o.tol,
            check_every: o.check_every,
            assortative: o.assortative,
            seed: o.seed,
            ..InferenceConfig::new(ks)
        };
        let inner = fit(g, &cfg)?;
        write(out, Box::into_raw(Box::new(MhsbmFit { inner })), "out")
    })
}

/// # Safety
/// `fit` must come from [`mhsbm_fit`] or be null.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_fit_free(fit: *mut MhsbmFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Final objective of the selected restart.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_fit_objective(fit: *const MhsbmFit, out: *mut f64) -> MhsbmStatus {
    guard(|| write(out, as_ref(fit, "fit")?.inner.objective(), "out"))
}

/// Which fitted matrix to read.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MhsbmMatrix {
    /// `u` of a layer (nodes x communities).
    Membership = 0,
    /// `w` of a layer.
    Affinity = 1,
    /// Cross affinity of an inter-edge set, by set index.
    CrossAffinity = 2,
}

fn pick(fit: &FitResult, which: MhsbmMatrix, index: usize) -> Result<&Array2<f64>, Failure> {
    let s = &fit.state;
    let m = match which {
        MhsbmMatrix::Membership => s.u.get(index),
        MhsbmMatrix::Affinity => s.w.get(index),
        MhsbmMatrix::CrossAffinity => s.w_cross.get(index),
    };
    m.ok_or_else(|| invalid(format!("no {which:?} matrix at index {index}")))
}

/// Shape of a fitted matrix.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_fit_matrix_shape(
    fit: *const MhsbmFit,
    which: MhsbmMatrix,
    index: usize,
    rows: *mut usize,
    cols: *mut usize,
) -> MhsbmStatus {
    guard(|| {
        let m = pick(&as_ref(fit, "fit")?.inner, which, index)?;
        write(rows, m.nrows(), "rows")?;
        write(cols, m.ncols(), "cols")
    })
}

/// Copies a fitted matrix row-major into `buf`, which must hold exactly
/// rows x cols values.
///
/// # Safety
/// `buf` must be writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_fit_matrix_copy(
    fit: *const MhsbmFit,
    which: MhsbmMatrix,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> MhsbmStatus {
    guard(|| {
        let m = pick(&as_ref(fit, "fit")?.inner, which, index)?;
        if len != m.len() {
            return Err(Failure(
                MhsbmStatus::DimensionMismatch,
                format!("buffer holds {len} values, matrix has {}", m.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let dst = std::slice::from_raw_parts_mut(buf, len);
        for (d, s) in dst.iter_mut().zip(m.iter()) {
            *d = *s;
        }
        Ok(())
    })
}

/// Score of a candidate hyperedge on `layer`: its rate over the number of
/// node pairs, with internal degrees taken from the graph's hyperedges.
///
/// # Safety
/// `nodes` must hold `len` values; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_score_hyperedge(
    fit: *const MhsbmFit,
    graph: *const MhsbmGraph,
    layer: usize,
    nodes: *const usize,
    len: usize,
    out: *mut f64,
) -> MhsbmStatus {
    guard(|| {
        let f = &as_ref(fit, "fit")?.inner;
        let g = &as_ref(graph, "graph")?.inner;
        let train = g.layers().get(layer).ok_or_else(|| invalid(format!("no layer {layer}")))?;
        if f.state.u.len() != g.num_layers() || f.state.u[layer].nrows() != train.num_nodes() {
            return Err(Failure(MhsbmStatus::DimensionMismatch, "fit does not match graph".into()));
        }
        let score = score_hyperedge(slice(nodes, len, "nodes")?, train, &f.state, layer)?;
        write(out, score, "out")
    })
}

/// Probability that a positive outranks a negative, ties counted half.
///
/// # Safety
/// Arrays must hold the given number of values.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_auc(
    pos: *const f64,
    n_pos: usize,
    neg: *const f64,
    n_neg: usize,
    out: *mut f64,
) -> MhsbmStatus {
    guard(|| write(out, auc(slice(pos, n_pos, "pos")?, slice(neg, n_neg, "neg")?)?, "out"))
}

unsafe fn partition(predicted: *const usize, truth: *const usize, n: usize) -> Result<PartitionPair, Failure> {
    Ok(PartitionPair::new(slice(predicted, n, "predicted")?.to_vec(), slice(truth, n, "truth")?.to_vec())?)
}

/// Normalized mutual information of two hard partitions of `n` nodes.
///
/// # Safety
/// Arrays must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_nmi(predicted: *const usize, truth: *const usize, n: usize, out: *mut f64) -> MhsbmStatus {
    guard(|| write(out, nmi(&partition(predicted, truth, n)?), "out"))
}

/// Best-match community F1 averaged over both directions.
///
/// # Safety
/// Arrays must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn mhsbm_f1(predicted: *const usize, truth: *const usize, n: usize, out: *mut f64) -> MhsbmStatus {
    guard(|| write(out, community_f1(&partition(predicted, truth, n)?), "out"))
}
