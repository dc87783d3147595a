//! C ABI over the `obforest` classifiers.
//!
//! Datasets and models are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns an
//! [`ObfStatus`]; on failure [`obf_last_error`] describes the cause for the
//! calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use obforest::dataset::{load_csv, NormalizationParams};
use obforest::ensemble::{ClassifierKind, ClassifierParams, Model, ModelArtifact};
use obforest::harness::run_in_pool;
use obforest::{Dataset, Error, LabelColumn};

/// Result of every fallible call. Values 1-3 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObfStatus {
    Ok = 0,
    /// Invalid configuration or parameter value.
    Config = 1,
    /// Unreadable, malformed or inconsistent data, including I/O failures.
    Data = 2,
    /// A linear-algebra kernel failed.
    Numeric = 3,
    /// Null pointer, bad UTF-8 or out-of-range argument.
    InvalidArgument = 4,
    /// Internal panic; the library state is still usable.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObfClassifier {
    /// Axis-parallel random forest.
    Raf = 0,
    /// Oblique random forest with MPSVM splits.
    ObrafM = 1,
    /// RVFL-routed hybrid of per-class oblique trees.
    ObrafL = 2,
}

impl From<ObfClassifier> for ClassifierKind {
    fn from(c: ObfClassifier) -> Self {
        match c {
            ObfClassifier::Raf => ClassifierKind::Raf,
            ObfClassifier::ObrafM => ClassifierKind::Obrafm,
            ObfClassifier::ObrafL => ClassifierKind::Obrafl,
        }
    }
}

/// Training settings. Start from [`obf_train_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ObfTrainOptions {
    pub classifier: ObfClassifier,
    pub n_trees: usize,
    /// Negative for unlimited depth.
    pub max_depth: i64,
    /// Features sampled per node; 0 for round(sqrt(d)).
    pub q: usize,
    pub seed: u64,
    /// Worker threads; 0 for the global pool.
    pub threads: usize,
}

/// Labelled feature matrix.
pub struct ObfDataset {
    data: Dataset,
}

/// Trained model with its class names.
pub struct ObfModel {
    artifact: ModelArtifact,
    class_names: Vec<CString>,
}

impl ObfModel {
    fn new(artifact: ModelArtifact) -> Self {
        let class_names = artifact
            .class_names
            .iter()
            .map(|n| CString::new(n.replace('\0', "")).unwrap_or_default())
            .collect();
        ObfModel { artifact, class_names }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(ObfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.exit_code() {
            1 => ObfStatus::Config,
            3 => ObfStatus::Numeric,
            _ => ObfStatus::Data,
        };
        Failure(status, e.to_string())
    }
}

impl From<obforest::DataError> for Failure {
    fn from(e: obforest::DataError) -> Self {
        Failure(ObfStatus::Data, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(ObfStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ObfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            ObfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            ObfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| invalid(format!("{what} is null")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(invalid("out is null"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

/// Message for the most recent failure on this thread; empty after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn obf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn obf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn obf_train_options_default() -> ObfTrainOptions {
    ObfTrainOptions {
        classifier: ObfClassifier::ObrafM,
        n_trees: obforest::ensemble::DEFAULT_TREES,
        max_depth: -1,
        q: 0,
        seed: 0,
        threads: 0,
    }
}

/// Loads a CSV file. `label_column` is `"last"`, a 0-based index or a
/// header name; null means `"last"`.
///
/// # Safety
/// `path` and a non-null `label_column` must be NUL-terminated strings;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn obf_dataset_load_csv(
    path: *const c_char,
    label_column: *const c_char,
    out: *mut *mut ObfDataset,
) -> ObfStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(path, "path")?);
        let label = if label_column.is_null() {
            LabelColumn::Last
        } else {
            match str_arg(label_column, "label_column")?.parse() {
                Ok(l) => l,
                Err(never) => match never {},
            }
        };
        let data = load_csv(&path, &label)?;
        write_handle(out, ObfDataset { data })
    })
}

/// Builds a dataset from a row-major `n_rows × n_features` matrix and labels
/// in `0..num_classes`.
///
/// # Safety
/// `features` must point to `n_rows * n_features` doubles and `labels` to
/// `n_rows` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn obf_dataset_from_arrays(
    features: *const f64,
    labels: *const usize,
    n_rows: usize,
    n_features: usize,
    num_classes: usize,
    out: *mut *mut ObfDataset,
) -> ObfStatus {
    guard(|| {
        let len = n_rows
            .checked_mul(n_features)
            .ok_or_else(|| invalid("n_rows * n_features overflows"))?;
        let x = slice_arg(features, len, "features")?.to_vec();
        let y = slice_arg(labels, n_rows, "labels")?.to_vec();
        let data = Dataset::new(x, n_features, y, num_classes)?;
        write_handle(out, ObfDataset { data })
    })
}

/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn obf_dataset_n_rows(dataset: *const ObfDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.data.n_rows())
}

/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn obf_dataset_n_features(dataset: *const ObfDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.data.n_features())
}

/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn obf_dataset_num_classes(dataset: *const ObfDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.data.num_classes())
}

/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn obf_dataset_free(dataset: *mut ObfDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Fits a z-score normalizer on `dataset` and trains a model on the
/// normalized rows. `options` may be null for the defaults.
///
/// # Safety
/// `dataset` must be a live handle, `options` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn obf_model_train(
    dataset: *const ObfDataset,
    options: *const ObfTrainOptions,
    out: *mut *mut ObfModel,
) -> ObfStatus {
    guard(|| {
        let raw = &ref_arg(dataset, "dataset")?.data;
        let opts = options.as_ref().copied().unwrap_or_else(|| obf_train_options_default());
        let params = ClassifierParams {
            max_depth: usize::try_from(opts.max_depth).ok(),
            q: (opts.q > 0).then_some(opts.q),
            ..ClassifierParams::default().with_trees(opts.n_trees)
        };
        let normalizer = NormalizationParams::fit(raw)?;
        let normalized = normalizer.apply(raw)?;
        let kind = ClassifierKind::from(opts.classifier);
        let model = run_in_pool(opts.threads, || {
            Model::train(kind, &normalized, normalizer, &params, opts.seed)
        })?;
        let artifact = ModelArtifact::new(
            model,
            raw.class_names().to_vec(),
            raw.feature_names().map(<[String]>::to_vec),
        );
        write_handle(out, ObfModel::new(artifact))
    })
}

/// Predicts class indices for a row-major `n_rows × n_features` matrix of
/// raw features, writing `n_rows` values to `out_labels`.
///
/// # Safety
/// `features` must point to `n_rows * n_features` doubles and `out_labels`
/// to room for `n_rows` values.
#[no_mangle]
pub unsafe extern "C" fn obf_model_predict(
    model: *const ObfModel,
    features: *const f64,
    n_rows: usize,
    n_features: usize,
    out_labels: *mut usize,
) -> ObfStatus {
    guard(|| {
        let model = &ref_arg(model, "model")?.artifact.model;
        if n_features != model.n_features() {
            return Err(Failure(
                ObfStatus::Data,
                format!(
                    "dimension mismatch: expected {}, found {n_features}",
                    model.n_features()
                ),
            ));
        }
        let len = n_rows
            .checked_mul(n_features)
            .ok_or_else(|| invalid("n_rows * n_features overflows"))?;
        let x = slice_arg(features, len, "features")?;
        if n_rows > 0 && out_labels.is_null() {
            return Err(invalid("out_labels is null"));
        }
        let mut predicted = Vec::with_capacity(n_rows);
        for row in x.chunks_exact(n_features.max(1)).take(n_rows) {
            predicted.push(model.predict(row)?);
        }
        if n_rows > 0 {
            ptr::copy_nonoverlapping(predicted.as_ptr(), out_labels, n_rows);
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn obf_model_save(model: *const ObfModel, path: *const c_char) -> ObfStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        model.artifact.save(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn obf_model_load(path: *const c_char, out: *mut *mut ObfModel) -> ObfStatus {
    guard(|| {
        let artifact = ModelArtifact::load(str_arg(path, "path")?)?;
        write_handle(out, ObfModel::new(artifact))
    })
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn obf_model_n_features(model: *const ObfModel) -> usize {
    model.as_ref().map_or(0, |m| m.artifact.model.n_features())
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn obf_model_num_classes(model: *const ObfModel) -> usize {
    model.as_ref().map_or(0, |m| m.artifact.model.num_classes())
}

/// Mean node count per tree; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn obf_model_mean_nodes(model: *const ObfModel) -> f64 {
    model.as_ref().map_or(0.0, |m| m.artifact.model.mean_nodes())
}

/// Name of class `index`, or null when out of range. Owned by the model.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn obf_model_class_name(model: *const ObfModel, index: usize) -> *const c_char {
    model
        .as_ref()
        .and_then(|m| m.class_names.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn obf_model_free(model: *mut ObfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
