//! C ABI for the bubbletree toolkit.
//!
//! Opaque handles wrap the sequence and tree types; every function returns a
//! [`BtStatus`] code (or a null pointer on failure) and the last error
//! message is retrievable per thread via [`bt_last_error_message`]. Strings
//! returned by `*_json` functions are owned by the caller and must be
//! released with [`bt_string_free`].

use bubbletree::bubble_tree::{build_tree, mass_accounting, serialize, thick_thin, BubbleTree};
use bubbletree::error::Error;
use bubbletree::field::MetricSequence;
use bubbletree::io::{load_btseq_file, save_btseq_file, to_json_string};
use bubbletree::metric_ops::functionals;
use bubbletree::pipeline::{exit_code_for, run_scenario};
use bubbletree::scenario::{parse_scenario, parse_scenario_file, AnalysisConfig, SequenceSource};
use libc::{c_char, c_double, c_int};
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::ptr;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Config = 4,
    Analysis = 5,
    Numeric = 6,
}

/// Opaque sequence handle.
pub struct BtSequence {
    inner: MetricSequence,
}

/// Opaque tree handle (keeps the sequence it was built from for the
/// decomposition and accounting calls).
pub struct BtTree {
    tree: BubbleTree,
    seq: MetricSequence,
    analysis: AnalysisConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(e: &Error) -> BtStatus {
    let msg = CString::new(e.to_string()).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
    match e {
        Error::Io(_) => BtStatus::Io,
        _ => match exit_code_for(e) {
            2 => BtStatus::Config,
            3 => BtStatus::Analysis,
            _ => BtStatus::Numeric,
        },
    }
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Message describing the most recent failure on this thread, or null.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(ptr::null())
    })
}

unsafe fn cstr_to_path(ptr: *const c_char) -> Result<PathBuf, BtStatus> {
    if ptr.is_null() {
        return Err(BtStatus::NullArgument);
    }
    let s = CStr::from_ptr(ptr).to_str().map_err(|_| BtStatus::InvalidUtf8)?;
    Ok(PathBuf::from(s))
}

unsafe fn cstr_to_str<'a>(ptr: *const c_char) -> Result<&'a str, BtStatus> {
    if ptr.is_null() {
        return Err(BtStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| BtStatus::InvalidUtf8)
}

fn leak_string(s: String) -> *mut c_char {
    CString::new(s)
        .map(|c| c.into_raw())
        .unwrap_or(ptr::null_mut())
}

/// Load a sequence from a BTSEQ file. Returns null on failure.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bt_sequence_load(path: *const c_char) -> *mut BtSequence {
    clear_error();
    let Ok(path) = cstr_to_path(path) else {
        return ptr::null_mut();
    };
    match load_btseq_file(&path) {
        Ok(seq) => Box::into_raw(Box::new(BtSequence { inner: seq })),
        Err(e) => {
            set_error(&e);
            ptr::null_mut()
        }
    }
}

/// Generate a sequence from scenario text containing `[domain]` and
/// `[sequence]` sections. Returns null on failure.
///
/// # Safety
/// `config_text` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bt_sequence_generate(config_text: *const c_char) -> *mut BtSequence {
    clear_error();
    let Ok(text) = cstr_to_str(config_text) else {
        return ptr::null_mut();
    };
    let scenario = match parse_scenario(text, Path::new(".")) {
        Ok(s) => s,
        Err(e) => {
            set_error(&e);
            return ptr::null_mut();
        }
    };
    let seq = match &scenario.sequence {
        SequenceSource::Family(spec) => spec.generate(),
        SequenceSource::File(p) => load_btseq_file(p),
    };
    match seq {
        Ok(s) => Box::into_raw(Box::new(BtSequence { inner: s })),
        Err(e) => {
            set_error(&e);
            ptr::null_mut()
        }
    }
}

/// Save a sequence as a BTSEQ file.
///
/// # Safety
/// `seq` must be a live handle from this library; `path` a valid string.
#[no_mangle]
pub unsafe extern "C" fn bt_sequence_save(seq: *const BtSequence, path: *const c_char) -> BtStatus {
    clear_error();
    if seq.is_null() {
        return BtStatus::NullArgument;
    }
    let path = match cstr_to_path(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match save_btseq_file(&(*seq).inner, &path) {
        Ok(()) => BtStatus::Ok,
        Err(e) => set_error(&e),
    }
}

/// Number of frames in a sequence, or -1 on a null handle.
///
/// # Safety
/// `seq` must be a live handle from this library (or null).
#[no_mangle]
pub unsafe extern "C" fn bt_sequence_frame_count(seq: *const BtSequence) -> c_int {
    if seq.is_null() {
        return -1;
    }
    (*seq).inner.frames.len() as c_int
}

/// Area and energy of one frame over the whole chart.
///
/// # Safety
/// `seq` must be a live handle; `out_area`/`out_energy` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bt_sequence_functionals(
    seq: *const BtSequence,
    frame: c_int,
    out_area: *mut c_double,
    out_energy: *mut c_double,
) -> BtStatus {
    clear_error();
    if seq.is_null() || out_area.is_null() || out_energy.is_null() {
        return BtStatus::NullArgument;
    }
    let s = &(*seq).inner;
    if frame < 0 || frame as usize >= s.frames.len() {
        return BtStatus::Config;
    }
    let chart = s.chart().clone();
    match functionals(&s.frames[frame as usize], &chart) {
        Ok(f) => {
            *out_area = f.area;
            *out_energy = f.energy;
            BtStatus::Ok
        }
        Err(e) => set_error(&e),
    }
}

/// Build the bubble tree of a sequence. `analysis_text` may be null (library
/// defaults) or a config snippet with an `[analysis]` section.
///
/// # Safety
/// `seq` must be a live handle; `analysis_text` null or a valid string.
#[no_mangle]
pub unsafe extern "C" fn bt_tree_build(
    seq: *const BtSequence,
    analysis_text: *const c_char,
) -> *mut BtTree {
    clear_error();
    if seq.is_null() {
        return ptr::null_mut();
    }
    let analysis = if analysis_text.is_null() {
        AnalysisConfig::default()
    } else {
        let Ok(text) = cstr_to_str(analysis_text) else {
            return ptr::null_mut();
        };
        // reuse the scenario parser with a stub domain/sequence
        let stub = format!(
            "[domain]\nkind = plane_window\nouter_radius = 1\n[sequence]\nfamily = flat\nn_values = 1 2\n{text}"
        );
        match parse_scenario(&stub, Path::new(".")) {
            Ok(s) => s.analysis,
            Err(e) => {
                set_error(&e);
                return ptr::null_mut();
            }
        }
    };
    let s = &(*seq).inner;
    match build_tree(s, &analysis.tree_config()) {
        Ok(tree) => Box::into_raw(Box::new(BtTree {
            tree,
            seq: s.clone(),
            analysis,
        })),
        Err(e) => {
            set_error(&e);
            ptr::null_mut()
        }
    }
}

/// Vertex count of a tree, or -1 on a null handle.
///
/// # Safety
/// `tree` must be a live handle from this library (or null).
#[no_mangle]
pub unsafe extern "C" fn bt_tree_vertex_count(tree: *const BtTree) -> c_int {
    if tree.is_null() {
        return -1;
    }
    (*tree).tree.vertices.len() as c_int
}

/// Edge count of a tree, or -1 on a null handle.
///
/// # Safety
/// `tree` must be a live handle from this library (or null).
#[no_mangle]
pub unsafe extern "C" fn bt_tree_edge_count(tree: *const BtTree) -> c_int {
    if tree.is_null() {
        return -1;
    }
    (*tree).tree.edges.len() as c_int
}

/// Tree document in the pinned JSON schema. Free with [`bt_string_free`].
///
/// # Safety
/// `tree` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bt_tree_to_json(tree: *const BtTree) -> *mut c_char {
    clear_error();
    if tree.is_null() {
        return ptr::null_mut();
    }
    match serialize(&(*tree).tree) {
        Ok(json) => leak_string(json),
        Err(e) => {
            set_error(&e);
            ptr::null_mut()
        }
    }
}

/// Thick-thin decomposition as JSON. Free with [`bt_string_free`].
///
/// # Safety
/// `tree` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bt_thick_thin_json(tree: *const BtTree, eps: c_double) -> *mut c_char {
    clear_error();
    if tree.is_null() {
        return ptr::null_mut();
    }
    let t = &*tree;
    match thick_thin(&t.tree, &t.seq, eps).and_then(|tt| to_json_string(&tt)) {
        Ok(json) => leak_string(json),
        Err(e) => {
            set_error(&e);
            ptr::null_mut()
        }
    }
}

/// Mass-accounting report as JSON. Free with [`bt_string_free`].
///
/// # Safety
/// `tree` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bt_mass_accounting_json(tree: *const BtTree) -> *mut c_char {
    clear_error();
    if tree.is_null() {
        return ptr::null_mut();
    }
    let t = &*tree;
    match mass_accounting(&t.tree, &t.seq, &t.analysis.tree_config())
        .and_then(|r| to_json_string(&r))
    {
        Ok(json) => leak_string(json),
        Err(e) => {
            set_error(&e);
            ptr::null_mut()
        }
    }
}

/// Run a scenario file end to end. Returns the same codes as the CLI's exit
/// status: 0 ok, 2 config error, 3 analysis assertion failure, 1 otherwise.
///
/// # Safety
/// `path` must be a valid string; `out_dir` null or a valid string.
#[no_mangle]
pub unsafe extern "C" fn bt_run_scenario(path: *const c_char, out_dir: *const c_char) -> c_int {
    clear_error();
    let Ok(path) = cstr_to_path(path) else {
        return 1;
    };
    let out = if out_dir.is_null() {
        None
    } else {
        match cstr_to_path(out_dir) {
            Ok(p) => Some(p),
            Err(_) => return 1,
        }
    };
    let run = || -> bubbletree::Result<()> {
        let scenario = parse_scenario_file(&path)?;
        run_scenario(&scenario, out.as_deref())?;
        Ok(())
    };
    match run() {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code_for(&e);
            set_error(&e);
            code
        }
    }
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from a `*_json` function of this library (or be null).
#[no_mangle]
pub unsafe extern "C" fn bt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a sequence handle.
///
/// # Safety
/// `seq` must come from this library (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bt_sequence_free(seq: *mut BtSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Release a tree handle.
///
/// # Safety
/// `tree` must come from this library (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bt_tree_free(tree: *mut BtTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    #[test]
    fn c_abi_round_trip() {
        let cfg = CString::new(
            "[domain]\nkind = plane_window\ncenter = 0 0\nouter_radius = 1.0\ngrid_n = 64\n\
             [sequence]\nfamily = flat\nn_values = 1 2 3\n",
        )
        .unwrap();
        unsafe {
            let seq = bt_sequence_generate(cfg.as_ptr());
            assert!(!seq.is_null(), "generate failed");
            assert_eq!(bt_sequence_frame_count(seq), 3);

            let mut area = 0.0;
            let mut energy = 0.0;
            let st = bt_sequence_functionals(seq, 0, &mut area, &mut energy);
            assert_eq!(st, BtStatus::Ok);
            assert!((area - 4.0).abs() < 1e-6, "flat window area {area}");
            assert_eq!(energy, 0.0);

            let tree = bt_tree_build(seq, ptr::null());
            assert!(!tree.is_null(), "tree build failed");
            assert_eq!(bt_tree_vertex_count(tree), 1);
            assert_eq!(bt_tree_edge_count(tree), 0);

            let json = bt_tree_to_json(tree);
            assert!(!json.is_null());
            let text = CStr::from_ptr(json).to_str().unwrap().to_string();
            assert!(text.contains("\"vertices\""));
            bt_string_free(json);

            let tt = bt_thick_thin_json(tree, 1.0);
            assert!(!tt.is_null());
            bt_string_free(tt);

            let acc = bt_mass_accounting_json(tree);
            assert!(!acc.is_null());
            bt_string_free(acc);

            bt_tree_free(tree);
            bt_sequence_free(seq);
        }
    }

    #[test]
    fn errors_set_message() {
        unsafe {
            let bad = CString::new("/nonexistent/nope.btseq").unwrap();
            let seq = bt_sequence_load(bad.as_ptr());
            assert!(seq.is_null());
            let msg = bt_last_error_message();
            assert!(!msg.is_null());
        }
    }
}
