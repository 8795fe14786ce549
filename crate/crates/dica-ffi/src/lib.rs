//! C ABI for the discrete independent-source engine.
//!
//! Models are opaque handles created by `dica_model_build` or
//! `dica_model_load` and released with `dica_model_free`. Every fallible
//! call returns a [`DicaStatus`]; on failure a human-readable message is
//! available from `dica_last_error_message` until the next call on the
//! same thread.
//!
//! Distributions cross the boundary flattened: per-variable probability
//! vectors concatenated in variable order. `dica_model_code_len` and
//! `dica_model_forward_len` give the required buffer sizes.
//!
//! The generated header lives at `include/dica.h`.

use dica_core::{
    DicaModel, Evidence, ModelConfig, Sample, TrainConfig, VarEvidence,
};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DicaStatus {
    Ok = 0,
    /// Hard evidence combinations with no support anywhere.
    ContradictoryEvidence = 1,
    /// Mismatched shapes or out-of-range indices.
    Dimension = 2,
    /// Product space above the supported limit.
    Capacity = 3,
    /// Unparseable or invalid file contents.
    Format = 4,
    /// The model has no label block.
    MissingLabelBlock = 5,
    /// Precondition violation in the supplied values.
    Invalid = 6,
    Io = 7,
    NullPointer = 8,
    InvalidUtf8 = 9,
    /// An internal panic was caught at the boundary.
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = CString::new(message.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = sanitized);
}

fn status_of(error: &dica_core::DicaError) -> DicaStatus {
    use dica_core::DicaError::*;
    match error {
        ContradictoryEvidence(_) => DicaStatus::ContradictoryEvidence,
        Dimension(_) => DicaStatus::Dimension,
        Capacity(_) => DicaStatus::Capacity,
        Format(_) => DicaStatus::Format,
        MissingLabelBlock => DicaStatus::MissingLabelBlock,
        Invalid(_) => DicaStatus::Invalid,
        Io(_) => DicaStatus::Io,
    }
}

fn fail(error: dica_core::DicaError) -> DicaStatus {
    set_error(&error.to_string());
    status_of(&error)
}

fn guard(f: impl FnOnce() -> DicaStatus) -> DicaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            DicaStatus::Panic
        }
    }
}

/// Last error message on this thread; empty until an error occurs. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dica_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Opaque model handle.
pub struct DicaModelHandle {
    model: DicaModel,
}

unsafe fn path_from(ptr: *const c_char) -> Result<PathBuf, DicaStatus> {
    if ptr.is_null() {
        set_error("null path");
        return Err(DicaStatus::NullPointer);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(DicaStatus::InvalidUtf8)
        }
    }
}

unsafe fn slice_from<'a, T>(ptr: *const T, len: usize) -> Result<&'a [T], DicaStatus> {
    if ptr.is_null() {
        set_error("null buffer");
        return Err(DicaStatus::NullPointer);
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn handle_ref<'a>(model: *const DicaModelHandle) -> Result<&'a DicaModelHandle, DicaStatus> {
    if model.is_null() {
        set_error("null model handle");
        return Err(DicaStatus::NullPointer);
    }
    // SAFETY: non-null handle created by this library.
    Ok(unsafe { &*model })
}

/// Build a freshly initialized model. `label_size` 0 means no label block.
/// On success writes a handle the caller must free with `dica_model_free`.
///
/// # Safety
/// `source_sizes`/`visible_sizes` must point to `num_sources`/`num_visible`
/// readable elements and `out_model` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn dica_model_build(
    source_sizes: *const usize,
    num_sources: usize,
    visible_sizes: *const usize,
    num_visible: usize,
    label_size: usize,
    seed: u64,
    out_model: *mut *mut DicaModelHandle,
) -> DicaStatus {
    guard(|| {
        if out_model.is_null() {
            set_error("null output handle");
            return DicaStatus::NullPointer;
        }
        let source_sizes = match slice_from(source_sizes, num_sources) {
            Ok(s) => s.to_vec(),
            Err(status) => return status,
        };
        let visible_sizes = match slice_from(visible_sizes, num_visible) {
            Ok(s) => s.to_vec(),
            Err(status) => return status,
        };
        let mut config = ModelConfig::new(source_sizes, visible_sizes).with_seed(seed);
        if label_size > 0 {
            config = config.with_label(label_size);
        }
        match DicaModel::build(&config) {
            Ok(model) => {
                *out_model = Box::into_raw(Box::new(DicaModelHandle { model }));
                DicaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Load a model document.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_model` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dica_model_load(
    path: *const c_char,
    out_model: *mut *mut DicaModelHandle,
) -> DicaStatus {
    guard(|| {
        if out_model.is_null() {
            set_error("null output handle");
            return DicaStatus::NullPointer;
        }
        let path = match path_from(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match dica_core::data::load_model(&path) {
            Ok(model) => {
                *out_model = Box::into_raw(Box::new(DicaModelHandle { model }));
                DicaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Save a model document.
///
/// # Safety
/// `model` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dica_model_save(
    model: *const DicaModelHandle,
    path: *const c_char,
) -> DicaStatus {
    guard(|| {
        let handle = match handle_ref(model) {
            Ok(h) => h,
            Err(status) => return status,
        };
        let path = match path_from(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match dica_core::data::save_model(&handle.model, &path) {
            Ok(()) => DicaStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Release a handle. Passing NULL is a no-op.
///
/// # Safety
/// `model` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dica_model_free(model: *mut DicaModelHandle) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[no_mangle]
pub extern "C" fn dica_model_num_sources(model: *const DicaModelHandle) -> usize {
    handle_ref(model).map_or(0, |h| h.model.num_sources())
}

#[no_mangle]
pub extern "C" fn dica_model_num_visible(model: *const DicaModelHandle) -> usize {
    handle_ref(model).map_or(0, |h| h.model.num_visible())
}

#[no_mangle]
pub extern "C" fn dica_model_product_size(model: *const DicaModelHandle) -> usize {
    handle_ref(model).map_or(0, |h| h.model.product_size())
}

/// Label alphabet size; 0 when the model has no label block.
#[no_mangle]
pub extern "C" fn dica_model_label_size(model: *const DicaModelHandle) -> usize {
    handle_ref(model).map_or(0, |h| h.model.label_size().unwrap_or(0))
}

/// Length of a flattened source-posterior buffer (sum of source sizes).
#[no_mangle]
pub extern "C" fn dica_model_code_len(model: *const DicaModelHandle) -> usize {
    handle_ref(model).map_or(0, |h| h.model.source_sizes().iter().sum())
}

/// Length of a flattened visible-forward buffer (sum of visible sizes).
#[no_mangle]
pub extern "C" fn dica_model_forward_len(model: *const DicaModelHandle) -> usize {
    handle_ref(model).map_or(0, |h| h.model.visible_sizes().iter().sum())
}

fn flatten_into(messages: &[dica_core::Message], out: &mut [f64]) {
    let mut cursor = 0;
    for msg in messages {
        out[cursor..cursor + msg.len()].copy_from_slice(msg.values());
        cursor += msg.len();
    }
}

unsafe fn observed_evidence(
    handle: &DicaModelHandle,
    observed: *const u32,
) -> Result<Evidence, DicaStatus> {
    let observed = slice_from(observed, handle.model.num_visible())?;
    let symbols: Vec<usize> = observed.iter().map(|&s| s as usize).collect();
    Ok(Evidence::hard(&symbols))
}

/// Train the model in place on hard examples. `examples` is row-major,
/// `num_examples` rows of `num_visible` symbols. `labels` must be NULL for
/// unsupervised training, or point to `num_examples` class indices to also
/// train the label block. On success, optionally writes the final epoch's
/// mean per-block log-likelihood to `out_mean_log_likelihood`.
///
/// # Safety
/// Buffers must match the documented lengths; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dica_model_train(
    model: *mut DicaModelHandle,
    examples: *const u32,
    num_examples: usize,
    labels: *const u32,
    epochs: usize,
    inner_cycles: usize,
    out_mean_log_likelihood: *mut f64,
) -> DicaStatus {
    guard(|| {
        if model.is_null() {
            set_error("null model handle");
            return DicaStatus::NullPointer;
        }
        let handle = &mut *model;
        let n = handle.model.num_visible();
        let flat = match slice_from(examples, num_examples.saturating_mul(n)) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let labels = if labels.is_null() {
            None
        } else {
            match slice_from(labels, num_examples) {
                Ok(s) => Some(s),
                Err(status) => return status,
            }
        };
        let dataset: Vec<Sample> = flat
            .chunks(n)
            .enumerate()
            .map(|(i, row)| Sample {
                visible: row.iter().map(|&s| s as usize).collect(),
                label: labels.map(|l| l[i] as usize),
            })
            .collect();
        let config = TrainConfig {
            epochs,
            inner_cycles,
            supervised: labels.is_some(),
            ..TrainConfig::default()
        };
        match dica_core::train(&mut handle.model, &dataset, &config) {
            Ok(report) => {
                if !out_mean_log_likelihood.is_null() {
                    *out_mean_log_likelihood = report
                        .epochs
                        .last()
                        .map_or(f64::NAN, |e| e.mean_log_likelihood);
                }
                DicaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Encode a fully observed input into its soft source code, written as
/// concatenated per-source posteriors (`dica_model_code_len` doubles).
///
/// # Safety
/// `observed` must hold `num_visible` symbols; `out_code` must hold
/// `dica_model_code_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dica_model_encode(
    model: *const DicaModelHandle,
    observed: *const u32,
    out_code: *mut f64,
) -> DicaStatus {
    guard(|| {
        let handle = match handle_ref(model) {
            Ok(h) => h,
            Err(status) => return status,
        };
        let evidence = match observed_evidence(handle, observed) {
            Ok(e) => e,
            Err(status) => return status,
        };
        let code_len: usize = handle.model.source_sizes().iter().sum();
        let out = match slice_from(out_code as *const f64, code_len) {
            Ok(_) => std::slice::from_raw_parts_mut(out_code, code_len),
            Err(status) => return status,
        };
        match handle.model.encode(&evidence) {
            Ok(posteriors) => {
                flatten_into(&posteriors, out);
                DicaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Generate the visible forwards for one source configuration, written as
/// concatenated per-variable distributions (`dica_model_forward_len`).
///
/// # Safety
/// `config` must hold `num_sources` symbols; `out_forwards` must hold
/// `dica_model_forward_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dica_model_generate(
    model: *const DicaModelHandle,
    config: *const u32,
    out_forwards: *mut f64,
) -> DicaStatus {
    guard(|| {
        let handle = match handle_ref(model) {
            Ok(h) => h,
            Err(status) => return status,
        };
        let config = match slice_from(config, handle.model.num_sources()) {
            Ok(s) => s.iter().map(|&c| c as usize).collect::<Vec<_>>(),
            Err(status) => return status,
        };
        let forward_len: usize = handle.model.visible_sizes().iter().sum();
        if out_forwards.is_null() {
            set_error("null output buffer");
            return DicaStatus::NullPointer;
        }
        let out = std::slice::from_raw_parts_mut(out_forwards, forward_len);
        match handle.model.generate(&config) {
            Ok(forwards) => {
                flatten_into(&forwards, out);
                DicaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Fill in erasures: `observed[j]` is the symbol at variable `j`, or -1
/// when it is missing. Writes the per-variable forwards (observed
/// variables echo their evidence).
///
/// # Safety
/// `observed` must hold `num_visible` entries; `out_forwards` must hold
/// `dica_model_forward_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dica_model_complete(
    model: *const DicaModelHandle,
    observed: *const i32,
    out_forwards: *mut f64,
) -> DicaStatus {
    guard(|| {
        let handle = match handle_ref(model) {
            Ok(h) => h,
            Err(status) => return status,
        };
        let observed = match slice_from(observed, handle.model.num_visible()) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let mut evidence = Evidence::none(handle.model.num_visible());
        for (j, &symbol) in observed.iter().enumerate() {
            if symbol >= 0 {
                evidence.set_visible(j, VarEvidence::Hard(symbol as usize));
            }
        }
        let forward_len: usize = handle.model.visible_sizes().iter().sum();
        if out_forwards.is_null() {
            set_error("null output buffer");
            return DicaStatus::NullPointer;
        }
        let out = std::slice::from_raw_parts_mut(out_forwards, forward_len);
        match handle.model.complete(&evidence) {
            Ok(completion) => {
                let mut cursor = 0;
                for var in &completion.variables {
                    let msg = match var {
                        dica_core::CompletedVar::Observed(msg) => msg,
                        dica_core::CompletedVar::Missing { forward, .. } => forward,
                    };
                    out[cursor..cursor + msg.len()].copy_from_slice(msg.values());
                    cursor += msg.len();
                }
                DicaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Error correction: fully observed (possibly corrupted) input in,
/// per-variable forwards out.
///
/// # Safety
/// `observed` must hold `num_visible` symbols; `out_forwards` must hold
/// `dica_model_forward_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dica_model_correct(
    model: *const DicaModelHandle,
    observed: *const u32,
    out_forwards: *mut f64,
) -> DicaStatus {
    guard(|| {
        let handle = match handle_ref(model) {
            Ok(h) => h,
            Err(status) => return status,
        };
        let evidence = match observed_evidence(handle, observed) {
            Ok(e) => e,
            Err(status) => return status,
        };
        let forward_len: usize = handle.model.visible_sizes().iter().sum();
        if out_forwards.is_null() {
            set_error("null output buffer");
            return DicaStatus::NullPointer;
        }
        let out = std::slice::from_raw_parts_mut(out_forwards, forward_len);
        match handle.model.correct(&evidence) {
            Ok(forwards) => {
                flatten_into(&forwards, out);
                DicaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Classify a fully observed input: writes the class posterior
/// (`dica_model_label_size` doubles).
///
/// # Safety
/// `observed` must hold `num_visible` symbols; `out_class_posterior` must
/// hold `dica_model_label_size` doubles.
#[no_mangle]
pub unsafe extern "C" fn dica_model_classify(
    model: *const DicaModelHandle,
    observed: *const u32,
    out_class_posterior: *mut f64,
) -> DicaStatus {
    guard(|| {
        let handle = match handle_ref(model) {
            Ok(h) => h,
            Err(status) => return status,
        };
        let evidence = match observed_evidence(handle, observed) {
            Ok(e) => e,
            Err(status) => return status,
        };
        let Some(label_size) = handle.model.label_size() else {
            return fail(dica_core::DicaError::MissingLabelBlock);
        };
        if out_class_posterior.is_null() {
            set_error("null output buffer");
            return DicaStatus::NullPointer;
        }
        let out = std::slice::from_raw_parts_mut(out_class_posterior, label_size);
        match handle.model.classify(&evidence) {
            Ok(result) => {
                out.copy_from_slice(result.class_posterior.values());
                DicaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Class prototype: inject a backward delta at the label and write the
/// per-variable forwards.
///
/// # Safety
/// `out_forwards` must hold `dica_model_forward_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dica_model_prototype(
    model: *const DicaModelHandle,
    class_index: usize,
    out_forwards: *mut f64,
) -> DicaStatus {
    guard(|| {
        let handle = match handle_ref(model) {
            Ok(h) => h,
            Err(status) => return status,
        };
        let forward_len: usize = handle.model.visible_sizes().iter().sum();
        if out_forwards.is_null() {
            set_error("null output buffer");
            return DicaStatus::NullPointer;
        }
        let out = std::slice::from_raw_parts_mut(out_forwards, forward_len);
        match handle.model.prototype(class_index) {
            Ok(prototype) => {
                flatten_into(&prototype.visible_forwards, out);
                DicaStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
