//! C ABI over name-loom.
//!
//! Every function returns an [`NlStatus`]. On failure a message is kept per
//! thread and can be read with [`nl_last_error`]. Strings handed out by the
//! library must be released with [`nl_string_free`], index handles with
//! [`nl_index_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use name_loom::evaluation::alpha_minify;
use name_loom::index::BuildError;
use name_loom::{mvc, recover_file, tsc, CorpusIndex, IndexBuilder, RecoveryConfig, TscMode};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    MissingDir = 3,
    EmptyCorpus = 4,
    Io = 5,
    IndexFormat = 6,
    Parse = 7,
    InvalidConfig = 8,
    Panic = 9,
}

/// Opaque corpus index handle.
pub struct NlIndex {
    inner: CorpusIndex,
}

/// Recovery parameters. Start from [`nl_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NlConfig {
    pub phi: f64,
    pub beam_k: u32,
    pub assoc_j: u32,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub c_max: u32,
    /// Non-zero matches function names by tokens instead of in full.
    pub tsc_tokenized: u8,
    pub seed: u64,
}

impl From<&RecoveryConfig> for NlConfig {
    fn from(c: &RecoveryConfig) -> Self {
        NlConfig {
            phi: c.phi,
            beam_k: c.beam_k as u32,
            assoc_j: c.assoc_j as u32,
            alpha: c.alpha,
            beta: c.beta,
            gamma: c.gamma,
            theta: c.theta,
            c_max: c.c_max as u32,
            tsc_tokenized: (c.tsc_mode == TscMode::Tokenized) as u8,
            seed: c.seed,
        }
    }
}

impl From<&NlConfig> for RecoveryConfig {
    fn from(c: &NlConfig) -> Self {
        RecoveryConfig {
            phi: c.phi,
            beam_k: c.beam_k as usize,
            assoc_j: c.assoc_j as usize,
            alpha: c.alpha,
            beta: c.beta,
            gamma: c.gamma,
            theta: c.theta,
            c_max: c.c_max as usize,
            tsc_mode: if c.tsc_tokenized != 0 { TscMode::Tokenized } else { TscMode::FullName },
            seed: c.seed,
            ..RecoveryConfig::default()
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(NlStatus, String);

type Outcome = Result<(), Failure>;

fn fail<T>(status: NlStatus, msg: impl ToString) -> Result<T, Failure> {
    Err(Failure(status, msg.to_string()))
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Outcome) -> NlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NlStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(NlStatus::NullArgument, format!("{what} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(NlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn index_ref<'a>(p: *const NlIndex) -> Result<&'a CorpusIndex, Failure> {
    p.as_ref().map(|i| &i.inner).ok_or(Failure(NlStatus::NullArgument, "index is null".into()))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        fail(NlStatus::NullArgument, format!("{what} is null"))
    } else {
        Ok(())
    }
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

fn build_error(e: BuildError) -> Failure {
    let status = match e {
        BuildError::MissingDir(_) => NlStatus::MissingDir,
        BuildError::EmptyCorpus => NlStatus::EmptyCorpus,
        BuildError::Io { .. } => NlStatus::Io,
    };
    Failure(status, e.to_string())
}

/// Default recovery parameters.
#[no_mangle]
pub extern "C" fn nl_config_default() -> NlConfig {
    NlConfig::from(&RecoveryConfig::default())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn nl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next library call on the same thread.
#[no_mangle]
pub extern "C" fn nl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds an index from every `.js` file below `corpus_dir`.
///
/// # Safety
/// `corpus_dir` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_index_build(corpus_dir: *const c_char, out: *mut *mut NlIndex) -> NlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let dir = text(corpus_dir, "corpus_dir")?;
        let inner = IndexBuilder::new().build_dir(Path::new(dir)).map_err(build_error)?;
        *out = Box::into_raw(Box::new(NlIndex { inner }));
        Ok(())
    })
}

/// Loads an index saved with [`nl_index_save`].
///
/// # Safety
/// `dir` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_index_load(dir: *const c_char, out: *mut *mut NlIndex) -> NlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let dir = text(dir, "dir")?;
        let inner = CorpusIndex::load(Path::new(dir)).or_else(|e| fail(NlStatus::IndexFormat, e))?;
        *out = Box::into_raw(Box::new(NlIndex { inner }));
        Ok(())
    })
}

/// Writes the index into `dir`, creating it if needed.
///
/// # Safety
/// `index` must be a live handle and `dir` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn nl_index_save(index: *const NlIndex, dir: *const c_char) -> NlStatus {
    guard(|| {
        let index = index_ref(index)?;
        let dir = text(dir, "dir")?;
        index.save(Path::new(dir)).or_else(|e| fail(NlStatus::Io, e))
    })
}

/// Releases an index handle. Null is ignored.
///
/// # Safety
/// `index` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nl_index_free(index: *mut NlIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// Jaccard association between a variable name and a function name. Unknown
/// names score 0.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn nl_index_task_score(
    index: *const NlIndex,
    name: *const c_char,
    function_name: *const c_char,
    out: *mut f64,
) -> NlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let index = index_ref(index)?;
        let name = text(name, "name")?;
        let function_name = text(function_name, "function_name")?;
        *out = index.name_id(name).map_or(0.0, |id| tsc::task_score(index, id, function_name));
        Ok(())
    })
}

/// Fraction of functions containing any of `names` that contain all of them.
/// Any unknown name gives 0.
///
/// # Safety
/// `names` must point to `len` valid C strings.
#[no_mangle]
pub unsafe extern "C" fn nl_index_assoc(
    index: *const NlIndex,
    names: *const *const c_char,
    len: usize,
    out: *mut f64,
) -> NlStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let index = index_ref(index)?;
        if names.is_null() && len > 0 {
            return fail(NlStatus::NullArgument, "names is null");
        }
        let mut ids = Vec::with_capacity(len);
        for k in 0..len {
            match index.name_id(text(*names.add(k), "names[k]")?) {
                Some(id) => ids.push(id),
                None => {
                    *out = 0.0;
                    return Ok(());
                }
            }
        }
        *out = mvc::assoc(index, &ids);
        Ok(())
    })
}

/// Recovers variable names in `source`. `config` may be null for defaults.
/// `out_report` may be null; otherwise it receives the JSON report.
///
/// # Safety
/// Pointers must be valid; outputs are released with [`nl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn nl_recover(
    index: *const NlIndex,
    source: *const c_char,
    config: *const NlConfig,
    out_source: *mut *mut c_char,
    out_report: *mut *mut c_char,
) -> NlStatus {
    guard(|| {
        out_ptr(out_source, "out_source")?;
        let index = index_ref(index)?;
        let source = text(source, "source")?;
        let config = config.as_ref().map_or_else(RecoveryConfig::default, RecoveryConfig::from);
        config.validate().or_else(|e| fail(NlStatus::InvalidConfig, e))?;
        let result = recover_file(source, "input.js", index, &config, false).or_else(|e| fail(NlStatus::Parse, e))?;
        if !out_report.is_null() {
            *out_report = to_c(serde_json::to_string(&result.report).expect("report serializes"));
        }
        *out_source = to_c(result.source);
        Ok(())
    })
}

/// Renames every local to a short name. `out_truth` may be null; otherwise
/// it receives the JSON ground truth.
///
/// # Safety
/// Pointers must be valid; outputs are released with [`nl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn nl_minify(
    source: *const c_char,
    seed: u64,
    out_source: *mut *mut c_char,
    out_truth: *mut *mut c_char,
) -> NlStatus {
    guard(|| {
        out_ptr(out_source, "out_source")?;
        let source = text(source, "source")?;
        let minified = alpha_minify(source, "input.js", seed).or_else(|e| fail(NlStatus::Parse, e))?;
        if !out_truth.is_null() {
            *out_truth = to_c(serde_json::to_string(&minified.truth).expect("truth serializes"));
        }
        *out_source = to_c(minified.source);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn last_error() -> String {
        unsafe { CStr::from_ptr(nl_last_error()).to_string_lossy().into_owned() }
    }

    fn corpus() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("a.js"),
            "function getItem(list, index) { return list.items[index]; }\nfunction setItem(list, index, value) { list.items[index] = value; }\n",
        )
        .unwrap();
        dir
    }

    #[test]
    fn config_round_trips() {
        let c = nl_config_default();
        assert_eq!(RecoveryConfig::from(&c), RecoveryConfig::default());
        assert_eq!(c.beam_k, 30);
    }

    #[test]
    fn version_is_static() {
        let v = unsafe { CStr::from_ptr(nl_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn build_recover_save_load() {
        let dir = corpus();
        let path = c(dir.path().to_str().unwrap());
        let mut index = ptr::null_mut();
        unsafe {
            assert_eq!(nl_index_build(path.as_ptr(), &mut index), NlStatus::Ok);
            assert!(nl_last_error().is_null());

            let src = c("function getItem(a, b) { return a.items[b]; }");
            let (mut out, mut report) = (ptr::null_mut(), ptr::null_mut());
            assert_eq!(nl_recover(index, src.as_ptr(), ptr::null(), &mut out, &mut report), NlStatus::Ok);
            let recovered = CStr::from_ptr(out).to_str().unwrap().to_string();
            assert!(recovered.contains("getItem(list, index)"), "{recovered}");
            let json: serde_json::Value = serde_json::from_str(CStr::from_ptr(report).to_str().unwrap()).unwrap();
            assert_eq!(json["functions"][0]["variables"][0]["applied"], "list");
            nl_string_free(out);
            nl_string_free(report);

            let saved = tempfile::tempdir().unwrap();
            let saved_path = c(saved.path().join("idx").to_str().unwrap());
            assert_eq!(nl_index_save(index, saved_path.as_ptr()), NlStatus::Ok);
            let mut loaded = ptr::null_mut();
            assert_eq!(nl_index_load(saved_path.as_ptr(), &mut loaded), NlStatus::Ok);

            let (list, index_name, f) = (c("list"), c("index"), c("getItem"));
            let (mut a, mut b) = (0.0, 0.0);
            assert_eq!(nl_index_task_score(index, list.as_ptr(), f.as_ptr(), &mut a), NlStatus::Ok);
            assert_eq!(nl_index_task_score(loaded, list.as_ptr(), f.as_ptr(), &mut b), NlStatus::Ok);
            assert_eq!((a, b), (0.5, 0.5));

            let names = [list.as_ptr(), index_name.as_ptr()];
            assert_eq!(nl_index_assoc(loaded, names.as_ptr(), 2, &mut a), NlStatus::Ok);
            assert_eq!(a, 1.0);
            let value = c("value");
            let names = [list.as_ptr(), value.as_ptr()];
            assert_eq!(nl_index_assoc(loaded, names.as_ptr(), 2, &mut a), NlStatus::Ok);
            assert_eq!(a, 0.5);
            let unknown = c("nope");
            assert_eq!(nl_index_assoc(loaded, [unknown.as_ptr()].as_ptr(), 1, &mut a), NlStatus::Ok);
            assert_eq!(a, 0.0);

            nl_index_free(loaded);
            nl_index_free(index);
        }
    }

    #[test]
    fn error_codes_and_messages() {
        let mut index = ptr::null_mut();
        unsafe {
            assert_eq!(nl_index_build(ptr::null(), &mut index), NlStatus::NullArgument);
            assert!(last_error().contains("corpus_dir"));
            let missing = c("/definitely/not/here");
            assert_eq!(nl_index_build(missing.as_ptr(), &mut index), NlStatus::MissingDir);
            assert_eq!(nl_index_load(missing.as_ptr(), &mut index), NlStatus::IndexFormat);
            let empty = tempfile::tempdir().unwrap();
            let empty_path = c(empty.path().to_str().unwrap());
            assert_eq!(nl_index_build(empty_path.as_ptr(), &mut index), NlStatus::EmptyCorpus);
            assert!(index.is_null());

            let bad = [0xffu8, 0];
            let mut out = ptr::null_mut();
            assert_eq!(nl_minify(bad.as_ptr().cast(), 0, &mut out, ptr::null_mut()), NlStatus::InvalidUtf8);
            let broken = c("function (");
            assert_eq!(nl_minify(broken.as_ptr(), 0, &mut out, ptr::null_mut()), NlStatus::Parse);
            assert!(!last_error().is_empty());

            let dir = corpus();
            let path = c(dir.path().to_str().unwrap());
            assert_eq!(nl_index_build(path.as_ptr(), &mut index), NlStatus::Ok);
            let config = NlConfig { phi: 2.0, ..nl_config_default() };
            let src = c("function f(a) { return a; }");
            assert_eq!(nl_recover(index, src.as_ptr(), &config, &mut out, ptr::null_mut()), NlStatus::InvalidConfig);
            assert_eq!(nl_recover(ptr::null(), src.as_ptr(), ptr::null(), &mut out, ptr::null_mut()), NlStatus::NullArgument);
            nl_index_free(index);
            nl_index_free(ptr::null_mut());
            nl_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn minify_returns_truth() {
        let src = c("function getItem(list, index) { return list.items[index]; }");
        let (mut out, mut truth) = (ptr::null_mut(), ptr::null_mut());
        unsafe {
            assert_eq!(nl_minify(src.as_ptr(), 3, &mut out, &mut truth), NlStatus::Ok);
            let minified = CStr::from_ptr(out).to_str().unwrap();
            assert!(!minified.contains("list"));
            let t: serde_json::Value = serde_json::from_str(CStr::from_ptr(truth).to_str().unwrap()).unwrap();
            assert_eq!(t["functions"][0]["variables"].as_array().unwrap().len(), 2);
            nl_string_free(out);
            nl_string_free(truth);
        }
    }
}
