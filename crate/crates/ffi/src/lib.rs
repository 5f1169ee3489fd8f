//! C ABI for `winograd-core`.
//!
//! Plans are opaque heap handles created by [`wg_plan_new`] and released
//! with [`wg_plan_free`]. Every fallible call returns a [`WgStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`wg_last_error`]. Tensors cross the boundary as row-major `double`
//! buffers: inputs `[c_in, h, w]`, weights `[c_out, c_in, k, k]`, outputs
//! `[c_out, h - k + 1, w - k + 1]`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use winograd_core::harness::parse_points;
use winograd_core::quantization::fake_quant_slice;
use winograd_core::{
    build_plan, condition_number, conv2d_direct, conv2d_winograd, conv2d_winograd_quantized,
    plan_to_float, BaseMode, Error, FloatPlan, Matrix, Norm, QuantConfig, Tensor,
};

/// Opaque plan handle.
pub struct WgPlan {
    inner: FloatPlan,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidPoints = 2,
    Dimension = 3,
    InvalidArgument = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WgBaseMode {
    Canonical = 0,
    Legendre = 1,
}

impl From<WgBaseMode> for BaseMode {
    fn from(m: WgBaseMode) -> Self {
        match m {
            WgBaseMode::Canonical => BaseMode::Canonical,
            WgBaseMode::Legendre => BaseMode::Legendre,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WgMatrixKind {
    G = 0,
    B = 1,
    A = 2,
    P = 3,
    PInv = 4,
    GP = 5,
    BP = 6,
    AP = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WgNorm {
    Two = 0,
    Frobenius = 1,
}

/// Per-stage bit widths; mirrors the core `QuantConfig`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WgQuantConfig {
    pub input_bits: u32,
    pub weight_bits: u32,
    pub input_transform_bits: u32,
    pub weight_transform_bits: u32,
    pub base_change_bits: u32,
    pub hadamard_bits: u32,
    pub output_transform_bits: u32,
}

impl From<WgQuantConfig> for QuantConfig {
    fn from(c: WgQuantConfig) -> Self {
        QuantConfig {
            input_bits: c.input_bits,
            weight_bits: c.weight_bits,
            input_transform_bits: c.input_transform_bits,
            weight_transform_bits: c.weight_transform_bits,
            base_change_bits: c.base_change_bits,
            hadamard_bits: c.hadamard_bits,
            output_transform_bits: c.output_transform_bits,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(WgStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidPoints(_) => WgStatus::InvalidPoints,
            Error::Dimension(_) => WgStatus::Dimension,
            Error::Parse(_) | Error::Config(_) | Error::Json(_) => WgStatus::InvalidArgument,
            Error::Numeric(_) | Error::Io(_) => WgStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: WgStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            WgStatus::Internal
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(WgStatus::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return fail(WgStatus::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn plan_ref<'a>(plan: *const WgPlan) -> Result<&'a FloatPlan, Failure> {
    match plan.as_ref() {
        Some(p) => Ok(&p.inner),
        None => fail(WgStatus::NullPointer, "plan is null"),
    }
}

fn write_out(out: &mut [f64], y: &Tensor) -> Result<(), Failure> {
    if out.len() < y.len() {
        return fail(
            WgStatus::BufferTooSmall,
            format!("output needs {} values, buffer holds {}", y.len(), out.len()),
        );
    }
    out[..y.len()].copy_from_slice(y.data());
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds an `F(o, k)` plan. `points` is a NUL-terminated comma-separated
/// list (`inf` for infinity) or null for the default set. The Legendre base
/// change is always attached.
///
/// # Safety
/// `points` must be null or a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wg_plan_new(
    o: usize,
    k: usize,
    points: *const c_char,
    out: *mut *mut WgPlan,
) -> WgStatus {
    guard(|| {
        if out.is_null() {
            return fail(WgStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        if o == 0 || k == 0 {
            return fail(WgStatus::Dimension, "o and k must be >= 1");
        }
        let spec = if points.is_null() {
            "default".to_string()
        } else {
            match CStr::from_ptr(points).to_str() {
                Ok(s) => s.to_string(),
                Err(_) => return fail(WgStatus::InvalidArgument, "points is not UTF-8"),
            }
        };
        let pts = parse_points(&spec, o + k - 1)?;
        let plan = build_plan(o, k, pts, true)?;
        *out = Box::into_raw(Box::new(WgPlan {
            inner: plan_to_float(&plan),
        }));
        Ok(())
    })
}

/// # Safety
/// `plan` must come from [`wg_plan_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wg_plan_free(plan: *mut WgPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// # Safety
/// `plan` must be a live handle; the out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn wg_plan_dims(
    plan: *const WgPlan,
    o: *mut usize,
    k: *mut usize,
    m: *mut usize,
) -> WgStatus {
    guard(|| {
        let p = plan_ref(plan)?;
        for (dst, v) in [(o, p.o()), (k, p.k()), (m, p.m())] {
            if !dst.is_null() {
                *dst = v;
            }
        }
        Ok(())
    })
}

/// Copies one transform matrix (row-major, double precision) into `buf`.
/// `rows`/`cols` receive its shape even when the buffer is too small.
///
/// # Safety
/// `plan` must be live; `buf` must hold `len` doubles; `rows`/`cols` may be null.
#[no_mangle]
pub unsafe extern "C" fn wg_plan_matrix(
    plan: *const WgPlan,
    kind: WgMatrixKind,
    buf: *mut f64,
    len: usize,
    rows: *mut usize,
    cols: *mut usize,
) -> WgStatus {
    guard(|| {
        let t = plan_ref(plan)?.transforms();
        let base = || {
            t.base
                .as_ref()
                .ok_or_else(|| Failure(WgStatus::InvalidArgument, "plan has no base change".into()))
        };
        let m: &Matrix<f64> = match kind {
            WgMatrixKind::G => &t.g,
            WgMatrixKind::B => &t.b,
            WgMatrixKind::A => &t.a,
            WgMatrixKind::P => &base()?.p,
            WgMatrixKind::PInv => &base()?.p_inv,
            WgMatrixKind::GP => &base()?.g_p,
            WgMatrixKind::BP => &base()?.b_p,
            WgMatrixKind::AP => &base()?.a_p,
        };
        if !rows.is_null() {
            *rows = m.rows();
        }
        if !cols.is_null() {
            *cols = m.cols();
        }
        let n = m.data().len();
        if len < n {
            return fail(
                WgStatus::BufferTooSmall,
                format!("matrix needs {n} values, buffer holds {len}"),
            );
        }
        slice_mut(buf, n, "buf")?.copy_from_slice(m.data());
        Ok(())
    })
}

unsafe fn conv_inputs(
    input: *const f64,
    c_in: usize,
    h: usize,
    w: usize,
    weights: *const f64,
    c_out: usize,
    k: usize,
) -> Result<(Tensor, Tensor), Failure> {
    let x = slice(input, c_in * h * w, "input")?;
    let f = slice(weights, c_out * c_in * k * k, "weights")?;
    Ok((
        Tensor::new(vec![c_in, h, w], x.to_vec())?,
        Tensor::new(vec![c_out, c_in, k, k], f.to_vec())?,
    ))
}

/// Double-precision Winograd convolution; the kernel edge comes from the plan.
///
/// # Safety
/// Buffers must hold the sizes implied by the shape arguments; `out` holds `out_len`.
#[no_mangle]
pub unsafe extern "C" fn wg_conv2d(
    plan: *const WgPlan,
    mode: WgBaseMode,
    input: *const f64,
    c_in: usize,
    h: usize,
    w: usize,
    weights: *const f64,
    c_out: usize,
    out: *mut f64,
    out_len: usize,
) -> WgStatus {
    guard(|| {
        let p = plan_ref(plan)?;
        let (x, f) = conv_inputs(input, c_in, h, w, weights, c_out, p.k())?;
        let y = conv2d_winograd(&x, &f, p, mode.into())?;
        write_out(slice_mut(out, out_len, "out")?, &y)
    })
}

/// Fake-quantized Winograd convolution with the given per-stage widths.
///
/// # Safety
/// As [`wg_conv2d`]; `config` must point to a valid struct.
#[no_mangle]
pub unsafe extern "C" fn wg_conv2d_quantized(
    plan: *const WgPlan,
    mode: WgBaseMode,
    config: *const WgQuantConfig,
    input: *const f64,
    c_in: usize,
    h: usize,
    w: usize,
    weights: *const f64,
    c_out: usize,
    out: *mut f64,
    out_len: usize,
) -> WgStatus {
    guard(|| {
        let p = plan_ref(plan)?;
        let Some(cfg) = config.as_ref() else {
            return fail(WgStatus::NullPointer, "config is null");
        };
        let (x, f) = conv_inputs(input, c_in, h, w, weights, c_out, p.k())?;
        let r = conv2d_winograd_quantized(&x, &f, p, mode.into(), &(*cfg).into())?;
        write_out(slice_mut(out, out_len, "out")?, &r.output)
    })
}

/// Direct valid cross-correlation (the reference).
///
/// # Safety
/// Buffers must hold the sizes implied by the shape arguments; `out` holds `out_len`.
#[no_mangle]
pub unsafe extern "C" fn wg_conv2d_direct(
    input: *const f64,
    c_in: usize,
    h: usize,
    w: usize,
    weights: *const f64,
    c_out: usize,
    k: usize,
    out: *mut f64,
    out_len: usize,
) -> WgStatus {
    guard(|| {
        let (x, f) = conv_inputs(input, c_in, h, w, weights, c_out, k)?;
        let y = conv2d_direct(&x, &f)?;
        write_out(slice_mut(out, out_len, "out")?, &y)
    })
}

/// Writes the all-8-bit configuration.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wg_quant_config_default(out: *mut WgQuantConfig) -> WgStatus {
    guard(|| {
        let Some(dst) = out.as_mut() else {
            return fail(WgStatus::NullPointer, "out is null");
        };
        let d = QuantConfig::default();
        *dst = WgQuantConfig {
            input_bits: d.input_bits,
            weight_bits: d.weight_bits,
            input_transform_bits: d.input_transform_bits,
            weight_transform_bits: d.weight_transform_bits,
            base_change_bits: d.base_change_bits,
            hadamard_bits: d.hadamard_bits,
            output_transform_bits: d.output_transform_bits,
        };
        Ok(())
    })
}

/// Symmetric per-tensor fake quantization of `len` values; `out` may alias `values`.
///
/// # Safety
/// Both buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wg_fake_quant(
    values: *const f64,
    len: usize,
    bits: u32,
    out: *mut f64,
) -> WgStatus {
    guard(|| {
        let mut tmp = slice(values, len, "values")?.to_vec();
        fake_quant_slice(&mut tmp, bits)?;
        slice_mut(out, len, "out")?.copy_from_slice(&tmp);
        Ok(())
    })
}

/// Condition number of a row-major `rows × cols` matrix; infinity when singular.
///
/// # Safety
/// `data` must hold `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wg_condition_number(
    data: *const f64,
    rows: usize,
    cols: usize,
    norm: WgNorm,
    out: *mut f64,
) -> WgStatus {
    guard(|| {
        if out.is_null() {
            return fail(WgStatus::NullPointer, "out is null");
        }
        let m = Matrix::from_vec(rows, cols, slice(data, rows * cols, "data")?.to_vec());
        let norm = match norm {
            WgNorm::Two => Norm::Two,
            WgNorm::Frobenius => Norm::Frobenius,
        };
        *out = condition_number(&m, norm);
        Ok(())
    })
}
