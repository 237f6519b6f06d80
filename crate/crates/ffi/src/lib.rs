//! C ABI for the ecgtl pipeline. Handles are opaque pointers owned by the
//! caller and released through the matching `_free` function; every fallible
//! call returns an [`EcgtlStatus`] and stores a message retrievable with
//! [`ecgtl_last_error_message`] on failure.
//!
//! The generated header lives at `include/ecgtl.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};

use ecgtl_core::metrics;
use ecgtl_core::model::tensor::Tensor3;
use ecgtl_core::model::Mode;
use ecgtl_core::signal::{self, EcgMatrix, LEAD_COUNT, SAMPLES_PER_LEAD};
use ecgtl_core::toy::{gen_toy, ToySpec};
use ecgtl_core::training::checkpoint;
use ecgtl_core::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcgtlStatus {
    Ok = 0,
    /// Null pointer, wrong buffer length, or invalid configuration.
    InvalidArgument = 1,
    /// Raw input could not be parsed (bad row/column counts, tokens,
    /// headers, or unsupported storage formats).
    ParseError = 2,
    IoError = 3,
    /// A store or checkpoint file is corrupt.
    CorruptData = 4,
    /// A referenced artifact (record, checkpoint) does not exist.
    MissingArtifact = 5,
    InternalError = 6,
}

/// Opaque normalized 8 x 5000 signal matrix.
pub struct EcgtlMatrix {
    inner: EcgMatrix,
}

/// Opaque trained model loaded from a checkpoint.
pub struct EcgtlModel {
    network: ecgtl_core::model::Network,
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

fn status_of(error: &Error) -> EcgtlStatus {
    match error {
        Error::RowCountMismatch { .. }
        | Error::ColumnCountMismatch { .. }
        | Error::NonNumericToken { .. }
        | Error::MalformedHeader(_)
        | Error::UnsupportedFormat(_)
        | Error::LengthMismatch { .. }
        | Error::WrongLeadCount { .. } => EcgtlStatus::ParseError,
        Error::CorruptStore(_) => EcgtlStatus::CorruptData,
        Error::Io { .. } => EcgtlStatus::IoError,
        Error::MissingCheckpoint(_) | Error::MissingArtifact(_) => EcgtlStatus::MissingArtifact,
        Error::ConfigInvalid(_) | Error::InvalidSpec(_) | Error::ShapeMismatch(_) => {
            EcgtlStatus::InvalidArgument
        }
        _ => EcgtlStatus::InternalError,
    }
}

fn fail(error: &Error) -> EcgtlStatus {
    set_error(&error.to_string());
    status_of(error)
}

fn invalid(message: &str) -> EcgtlStatus {
    set_error(message);
    EcgtlStatus::InvalidArgument
}

unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, EcgtlStatus> {
    if ptr.is_null() {
        return Err(invalid("path is null"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => Err(invalid("path is not valid UTF-8")),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ecgtl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent failure on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn ecgtl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Number of values in a matrix buffer (8 leads x 5000 samples).
#[no_mangle]
pub extern "C" fn ecgtl_matrix_len() -> usize {
    LEAD_COUNT * SAMPLES_PER_LEAD
}

/// Parse a whitespace-separated ASCII matrix file (5000 rows x 8 columns)
/// and min-max normalize each lead.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_matrix_from_asc_file(
    path: *const c_char,
    out: *mut *mut EcgtlMatrix,
) -> EcgtlStatus {
    if out.is_null() {
        return invalid("out is null");
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    let file = match std::fs::File::open(&path) {
        Ok(f) => f,
        Err(e) => {
            set_error(&format!("{}: {e}", path.display()));
            return EcgtlStatus::IoError;
        }
    };
    let raw = match signal::parse_asc(std::io::BufReader::new(file)) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    match signal::normalize(&raw) {
        Ok(matrix) => {
            *out = Box::into_raw(Box::new(EcgtlMatrix { inner: matrix }));
            EcgtlStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Read a matrix from an `.ecg8` store file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_matrix_read(
    path: *const c_char,
    out: *mut *mut EcgtlMatrix,
) -> EcgtlStatus {
    if out.is_null() {
        return invalid("out is null");
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match signal::store::read_matrix(&path) {
        Ok(matrix) => {
            *out = Box::into_raw(Box::new(EcgtlMatrix { inner: matrix }));
            EcgtlStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Write a matrix to an `.ecg8` store file (bit-exact round trip).
///
/// # Safety
/// `matrix` must be a live handle; `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_matrix_write(
    matrix: *const EcgtlMatrix,
    path: *const c_char,
) -> EcgtlStatus {
    if matrix.is_null() {
        return invalid("matrix is null");
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match signal::store::write_matrix(&path, &(*matrix).inner) {
        Ok(()) => EcgtlStatus::Ok,
        Err(e) => fail(&e),
    }
}

/// Copy the matrix values (row-major, lead-major) into `out`, which must
/// hold exactly `ecgtl_matrix_len()` floats.
///
/// # Safety
/// `matrix` must be a live handle; `out` must point to `len` floats.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_matrix_values(
    matrix: *const EcgtlMatrix,
    out: *mut f32,
    len: usize,
) -> EcgtlStatus {
    if matrix.is_null() || out.is_null() {
        return invalid("matrix or out is null");
    }
    let values = (*matrix).inner.values();
    if len != values.len() {
        return invalid("out buffer must hold exactly 8 x 5000 values");
    }
    std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    EcgtlStatus::Ok
}

/// Release a matrix handle.
///
/// # Safety
/// `matrix` must be a handle from this library, released at most once.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_matrix_free(matrix: *mut EcgtlMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Load a trained model from a checkpoint file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_model_load(
    path: *const c_char,
    out: *mut *mut EcgtlModel,
) -> EcgtlStatus {
    if out.is_null() {
        return invalid("out is null");
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match checkpoint::load(Path::new(&path)) {
        Ok((state, _digest)) => {
            *out = Box::into_raw(Box::new(EcgtlModel {
                network: state.network,
            }));
            EcgtlStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Output width of a model: 1 for regression, the class count for
/// classification.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_model_output_len(model: *const EcgtlModel) -> usize {
    if model.is_null() {
        return 0;
    }
    (*model).network.output_dim()
}

/// Run eval-mode inference on one matrix. `out` receives
/// `ecgtl_model_output_len()` values: softmax class probabilities for
/// classification models, the predicted scalar for regression models.
///
/// # Safety
/// `model` and `matrix` must be live handles; `out` must point to `out_len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_model_predict(
    model: *mut EcgtlModel,
    matrix: *const EcgtlMatrix,
    out: *mut f64,
    out_len: usize,
) -> EcgtlStatus {
    if model.is_null() || matrix.is_null() || out.is_null() {
        return invalid("model, matrix, or out is null");
    }
    let network = &mut (*model).network;
    if out_len != network.output_dim() {
        return invalid("out buffer does not match the model output width");
    }
    let values = (*matrix).inner.values();
    let mut input = Tensor3::zeros(1, LEAD_COUNT, SAMPLES_PER_LEAD);
    for (dst, &src) in input.data.iter_mut().zip(values) {
        *dst = src as f64;
    }
    let mut rng = ecgtl_core::rng::seeded(0);
    let logits = match network.forward(&input, Mode::Eval, &mut rng) {
        Ok(l) => l,
        Err(e) => return fail(&e),
    };
    let row = logits.row(0);
    if network.output_dim() > 1 {
        let probs = ecgtl_core::model::softmax(row);
        std::ptr::copy_nonoverlapping(probs.as_ptr(), out, probs.len());
    } else {
        std::ptr::copy_nonoverlapping(row.as_ptr(), out, row.len());
    }
    EcgtlStatus::Ok
}

/// Release a model handle.
///
/// # Safety
/// `model` must be a handle from this library, released at most once.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_model_free(model: *mut EcgtlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Mean absolute error between two vectors of length `n`.
///
/// # Safety
/// `y` and `yhat` must point to `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_mae(
    y: *const f64,
    yhat: *const f64,
    n: usize,
    out: *mut f64,
) -> EcgtlStatus {
    if y.is_null() || yhat.is_null() || out.is_null() {
        return invalid("null argument");
    }
    let y = std::slice::from_raw_parts(y, n);
    let yhat = std::slice::from_raw_parts(yhat, n);
    match metrics::mae(y, yhat) {
        Ok(v) => {
            *out = v;
            EcgtlStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Fraction of positions where `predicted[i] == labels[i]`.
///
/// # Safety
/// `predicted` and `labels` must point to `n` u32 values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_accuracy(
    predicted: *const u32,
    labels: *const u32,
    n: usize,
    out: *mut f64,
) -> EcgtlStatus {
    if predicted.is_null() || labels.is_null() || out.is_null() {
        return invalid("null argument");
    }
    let predicted: Vec<usize> = std::slice::from_raw_parts(predicted, n)
        .iter()
        .map(|&v| v as usize)
        .collect();
    let labels: Vec<usize> = std::slice::from_raw_parts(labels, n)
        .iter()
        .map(|&v| v as usize)
        .collect();
    match metrics::accuracy(&predicted, &labels) {
        Ok(v) => {
            *out = v;
            EcgtlStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// One-vs-rest multi-class ROC AUC. `scores` is row-major `n x classes`;
/// `labels` holds class indices. `mean_out` receives the unweighted mean
/// over classes with a defined AUC. When `per_class_out` is non-null it
/// receives `classes` values, NaN for classes whose AUC is undefined.
///
/// # Safety
/// `scores` must point to `n * classes` doubles, `labels` to `n` u32 values;
/// `mean_out` must be valid; `per_class_out` must be null or point to
/// `classes` doubles.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_auc_ovr(
    scores: *const f64,
    n: usize,
    classes: usize,
    labels: *const u32,
    mean_out: *mut f64,
    per_class_out: *mut f64,
) -> EcgtlStatus {
    if scores.is_null() || labels.is_null() || mean_out.is_null() {
        return invalid("null argument");
    }
    let scores = std::slice::from_raw_parts(scores, n * classes).to_vec();
    let labels: Vec<usize> = std::slice::from_raw_parts(labels, n)
        .iter()
        .map(|&v| v as usize)
        .collect();
    let matrix = match metrics::ScoreMatrix::new(scores, classes, labels) {
        Ok(m) => m,
        Err(e) => return fail(&e),
    };
    match metrics::auc_ovr(&matrix) {
        Ok(ovr) => {
            *mean_out = ovr.mean;
            if !per_class_out.is_null() {
                for (i, auc) in ovr.per_class.iter().enumerate() {
                    *per_class_out.add(i) = auc.unwrap_or(f64::NAN);
                }
            }
            EcgtlStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Generate a synthetic toy dataset (record store plus metadata CSV) into
/// `out_dir`.
///
/// # Safety
/// `out_dir` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ecgtl_gen_toy(
    out_dir: *const c_char,
    count: usize,
    noise_amplitude: f64,
    seed: u64,
) -> EcgtlStatus {
    let dir = match path_arg(out_dir) {
        Ok(p) => p,
        Err(s) => return s,
    };
    let spec = ToySpec {
        count,
        noise_amplitude,
        seed,
        ..Default::default()
    };
    match gen_toy(&spec, &dir) {
        Ok(_) => EcgtlStatus::Ok,
        Err(e) => fail(&e),
    }
}
