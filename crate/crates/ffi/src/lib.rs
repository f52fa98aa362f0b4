//! C ABI over the `ccd` library.
//!
//! Objects are opaque handles created by `*_build`/`*_read` functions and
//! released with the matching `*_free`. Every fallible function returns a
//! [`CcdStatus`]; on failure [`ccd_last_error`] describes the problem.
//! Strings returned through out-parameters are owned by the caller and must
//! be released with [`ccd_string_free`]. Infinite credible levels are
//! reported as `INFINITY`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use ccd::ccd::{read_ccd, write_ccd, CcdGraph as Graph, Model};
use ccd::credible::{CredibleCcd, CredibleSet, FrequencyIndex, LevelGrid, ProbabilityIndex, DEFAULT_MAX_ATTEMPTS};
use ccd::trees::{parse_newick, parse_trees_file, parse_trees_str, rooted_rf, Clade, Tree, TreeSample};
use ccd::{Error, StreamRng};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcdStatus {
    Ok = 0,
    Parse = 1,
    MalformedTree = 2,
    Taxon = 3,
    EmptyInput = 4,
    DegenerateModel = 5,
    StructuralViolation = 6,
    RejectionBudgetExceeded = 7,
    Manifest = 8,
    InvalidArgument = 9,
    Format = 10,
    Io = 11,
    NullPointer = 12,
    InvalidUtf8 = 13,
    Panic = 14,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcdModel {
    Ccd0 = 0,
    Ccd1 = 1,
    Ccd2 = 2,
}

impl From<CcdModel> for Model {
    fn from(m: CcdModel) -> Model {
        match m {
            CcdModel::Ccd0 => Model::Ccd0,
            CcdModel::Ccd1 => Model::Ccd1,
            CcdModel::Ccd2 => Model::Ccd2,
        }
    }
}

/// A tree sample.
pub struct CcdSample(TreeSample);
/// A built CCD.
pub struct CcdGraph(Arc<Graph>);
/// Random stream seeded from a 64-bit seed.
pub struct CcdRng(StreamRng);
/// Frequency-based credible-set index.
pub struct CcdFrequencyIndex(FrequencyIndex);
/// Probability-based credible-set index.
pub struct CcdProbabilityIndex(ProbabilityIndex);
/// Clade/split-based credible CCD annotation.
pub struct CcdCredibleCcd(CredibleCcd);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CcdStatus {
    match e {
        Error::Parse { .. } => CcdStatus::Parse,
        Error::MalformedTree(_) => CcdStatus::MalformedTree,
        Error::Taxon(_) => CcdStatus::Taxon,
        Error::EmptyInput(_) => CcdStatus::EmptyInput,
        Error::DegenerateModel(_) => CcdStatus::DegenerateModel,
        Error::StructuralViolation(_) => CcdStatus::StructuralViolation,
        Error::RejectionBudgetExceeded { .. } => CcdStatus::RejectionBudgetExceeded,
        Error::Manifest(_) => CcdStatus::Manifest,
        Error::InvalidArgument(_) => CcdStatus::InvalidArgument,
        Error::Format { .. } => CcdStatus::Format,
        Error::Io { .. } => CcdStatus::Io,
    }
}

/// Failure inside a wrapper body.
enum Fail {
    Lib(Error),
    Null(&'static str),
    Utf8(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `body`, turning errors and panics into a status plus last-error message.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> CcdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CcdStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(format!("{}: {e}", e.code()));
            status_of(&e)
        }
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("NULL_POINTER: argument '{name}' is null"));
            CcdStatus::NullPointer
        }
        Ok(Err(Fail::Utf8(name))) => {
            set_error(format!("INVALID_UTF8: argument '{name}' is not valid UTF-8"));
            CcdStatus::InvalidUtf8
        }
        Err(_) => {
            set_error("PANIC: internal error".to_string());
            CcdStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8(name))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn mut_arg<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn put<T>(out: *mut T, value: T, name: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    put(out, CString::new(s).unwrap_or_default().into_raw(), "out")
}

unsafe fn put_box<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    put(out, Box::into_raw(Box::new(value)), "out")
}

unsafe fn drop_box<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn grid(step: f64) -> Result<LevelGrid, Fail> {
    Ok(LevelGrid::with_step(step)?)
}

fn level_value(l: ccd::credible::Level) -> f64 {
    l.value()
}

/// Message of the last failed call on this thread; empty when none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ccd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ccd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reads a tree sample (Newick lines or Nexus) from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ccd_sample_read_file(path: *const c_char, burnin: f64, out: *mut *mut CcdSample) -> CcdStatus {
    guard(|| put_box(out, CcdSample(parse_trees_file(str_arg(path, "path")?, burnin)?)))
}

/// Parses a tree sample from text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ccd_sample_parse(text: *const c_char, burnin: f64, out: *mut *mut CcdSample) -> CcdStatus {
    guard(|| put_box(out, CcdSample(parse_trees_str(str_arg(text, "text")?, burnin)?)))
}

/// Number of trees in the sample, or 0 for NULL.
///
/// # Safety
/// `sample` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccd_sample_len(sample: *const CcdSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `sample` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccd_sample_free(sample: *mut CcdSample) {
    drop_box(sample)
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ccd_rng_new(seed: u64, out: *mut *mut CcdRng) -> CcdStatus {
    guard(|| put_box(out, CcdRng(ccd::seeded_rng(seed))))
}

/// # Safety
/// `rng` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccd_rng_free(rng: *mut CcdRng) {
    drop_box(rng)
}

/// Builds a CCD of the given model from a sample.
///
/// # Safety
/// `sample` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ccd_graph_build(sample: *const CcdSample, model: CcdModel, out: *mut *mut CcdGraph) -> CcdStatus {
    guard(|| {
        let s = ref_arg(sample, "sample")?;
        put_box(out, CcdGraph(Arc::new(Graph::build(&s.0, model.into())?)))
    })
}

/// Reads a CCD from its text serialisation.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ccd_graph_read(text: *const c_char, out: *mut *mut CcdGraph) -> CcdStatus {
    guard(|| put_box(out, CcdGraph(Arc::new(read_ccd(str_arg(text, "text")?)?))))
}

/// Text serialisation of a CCD; free the result with `ccd_string_free`.
///
/// # Safety
/// `graph` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ccd_graph_write(graph: *const CcdGraph, out: *mut *mut c_char) -> CcdStatus {
    guard(|| put_string(out, write_ccd(&ref_arg(graph, "graph")?.0)))
}

/// # Safety
/// `graph` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccd_graph_free(graph: *mut CcdGraph) {
    drop_box(graph)
}

fn parse_for(graph: &Graph, newick: &str) -> Result<Tree, Fail> {
    Ok(parse_newick(newick, Some(graph.taxa()))?)
}

/// Probability of a Newick tree under the CCD; 0 if the CCD lacks it.
///
/// # Safety
/// Pointers must be valid; `newick` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ccd_graph_tree_probability(graph: *const CcdGraph, newick: *const c_char, out: *mut f64) -> CcdStatus {
    guard(|| {
        let g = &ref_arg(graph, "graph")?.0;
        let t = parse_for(g, str_arg(newick, "newick")?)?;
        put(out, g.tree_probability(&t), "out")
    })
}

/// Maximum-probability tree as Newick and its probability.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccd_graph_map_tree(graph: *const CcdGraph, out_newick: *mut *mut c_char, out_probability: *mut f64) -> CcdStatus {
    guard(|| {
        let (t, p) = ref_arg(graph, "graph")?.0.map_tree();
        put(out_probability, p, "out_probability")?;
        put_string(out_newick, t.to_newick())
    })
}

/// Draws one tree from the CCD.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccd_graph_sample_tree(graph: *const CcdGraph, rng: *mut CcdRng, out_newick: *mut *mut c_char) -> CcdStatus {
    guard(|| {
        let g = &ref_arg(graph, "graph")?.0;
        let r = mut_arg(rng, "rng")?;
        put_string(out_newick, g.sample_tree(&mut r.0).to_newick())
    })
}

/// Probability that a tree from the CCD contains the clade of the
/// `n_labels` given taxon labels.
///
/// # Safety
/// `labels` must point to `n_labels` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ccd_graph_clade_probability(
    graph: *const CcdGraph,
    labels: *const *const c_char,
    n_labels: usize,
    out: *mut f64,
) -> CcdStatus {
    guard(|| {
        let g = &ref_arg(graph, "graph")?.0;
        if labels.is_null() && n_labels > 0 {
            return Err(Fail::Null("labels"));
        }
        let n = g.taxa().len();
        let mut clade = Clade::empty(n);
        for i in 0..n_labels {
            let label = str_arg(*labels.add(i), "labels")?;
            let idx = g.taxa().index_of(label).ok_or_else(|| Error::Taxon(format!("unknown taxon '{label}'")))?;
            clade.insert(idx);
        }
        if clade.is_empty() {
            return Err(Error::InvalidArgument("empty clade".into()).into());
        }
        put(out, g.clade_probability(&clade), "out")
    })
}

/// Rooted Robinson-Foulds distance between two Newick trees on the same taxa.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ccd_rooted_rf(newick_a: *const c_char, newick_b: *const c_char, out: *mut usize) -> CcdStatus {
    guard(|| {
        let a = parse_newick(str_arg(newick_a, "newick_a")?, None)?;
        let b = parse_newick(str_arg(newick_b, "newick_b")?, Some(a.taxa()))?;
        put(out, rooted_rf(&a, &b)?, "out")
    })
}

/// Central binomial interval holding at least `mass` probability.
///
/// # Safety
/// Out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccd_binomial_interval(trials: u64, p: f64, mass: f64, out_lo: *mut u64, out_hi: *mut u64) -> CcdStatus {
    guard(|| {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&mass) {
            return Err(Error::InvalidArgument("p and mass must lie in [0, 1]".into()).into());
        }
        let (lo, hi) = ccd::calibrate::binomial_central_interval(trials, p, mass);
        put(out_lo, lo, "out_lo")?;
        put(out_hi, hi, "out_hi")
    })
}

/// Frequency index over a sample with a uniform level grid of `grid_step`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccd_frequency_index_build(sample: *const CcdSample, grid_step: f64, out: *mut *mut CcdFrequencyIndex) -> CcdStatus {
    guard(|| {
        let s = ref_arg(sample, "sample")?;
        put_box(out, CcdFrequencyIndex(FrequencyIndex::build(&s.0, grid(grid_step)?)?))
    })
}

/// Credible level of a Newick tree (`INFINITY` if outside every set).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccd_frequency_index_level(index: *const CcdFrequencyIndex, newick: *const c_char, out: *mut f64) -> CcdStatus {
    guard(|| {
        let idx = &ref_arg(index, "index")?.0;
        let taxa = idx.ranked()[0].0.taxa();
        let t = parse_newick(str_arg(newick, "newick")?, Some(taxa))?;
        put(out, level_value(idx.level(&t)), "out")
    })
}

/// # Safety
/// `index` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccd_frequency_index_free(index: *mut CcdFrequencyIndex) {
    drop_box(index)
}

/// Probability index from `k` trees drawn from the CCD.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccd_probability_index_build(
    graph: *const CcdGraph,
    k: usize,
    grid_step: f64,
    rng: *mut CcdRng,
    out: *mut *mut CcdProbabilityIndex,
) -> CcdStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?.0.clone();
        let r = mut_arg(rng, "rng")?;
        put_box(out, CcdProbabilityIndex(ProbabilityIndex::build(g, k, grid(grid_step)?, &mut r.0)?))
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccd_probability_index_level(index: *const CcdProbabilityIndex, newick: *const c_char, out: *mut f64) -> CcdStatus {
    guard(|| {
        let idx = &ref_arg(index, "index")?.0;
        let t = parse_for(idx.graph(), str_arg(newick, "newick")?)?;
        put(out, level_value(idx.level(&t)), "out")
    })
}

/// Draws a tree from the CCD restricted to the `alpha` credible set.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccd_probability_index_sample(
    index: *const CcdProbabilityIndex,
    alpha: f64,
    rng: *mut CcdRng,
    out_newick: *mut *mut c_char,
) -> CcdStatus {
    guard(|| {
        let idx = &ref_arg(index, "index")?.0;
        let r = mut_arg(rng, "rng")?;
        let t = idx.sample_within(alpha, &mut r.0, DEFAULT_MAX_ATTEMPTS)?;
        put_string(out_newick, t.to_newick())
    })
}

/// # Safety
/// `index` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccd_probability_index_free(index: *mut CcdProbabilityIndex) {
    drop_box(index)
}

/// Runs the greedy removal and annotates clades and splits with levels.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccd_credible_ccd_build(graph: *const CcdGraph, out: *mut *mut CcdCredibleCcd) -> CcdStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?.0.clone();
        put_box(out, CcdCredibleCcd(CredibleCcd::build(g)?))
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccd_credible_ccd_level(index: *const CcdCredibleCcd, newick: *const c_char, out: *mut f64) -> CcdStatus {
    guard(|| {
        let idx = &ref_arg(index, "index")?.0;
        let t = parse_for(idx.graph(), str_arg(newick, "newick")?)?;
        put(out, level_value(idx.level(&t)), "out")
    })
}

/// The credible CCD at level `alpha` as a new CCD handle.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccd_credible_ccd_materialize(index: *const CcdCredibleCcd, alpha: f64, out: *mut *mut CcdGraph) -> CcdStatus {
    guard(|| {
        let idx = &ref_arg(index, "index")?.0;
        put_box(out, CcdGraph(Arc::new(idx.materialize(alpha)?)))
    })
}

/// # Safety
/// `index` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccd_credible_ccd_free(index: *mut CcdCredibleCcd) {
    drop_box(index)
}
