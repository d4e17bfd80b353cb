//! C ABI over `wavegrid`.
//!
//! Every fallible call returns a [`WgStatus`]; on failure the message is
//! available from [`wg_last_error`] on the same thread. Handles are opaque
//! and must be released with their `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use wavegrid::codec::{Codec, CodecError, CompressedPatch, CHUNK_64K};
use wavegrid::pipeline::{PipelineError, Scheme, SimConfig, Simulation};
use wavegrid::threshold::{apply_threshold, ThresholdMode, ThresholdSpec};
use wavegrid::wavelet::{dwt_nd, idwt_nd, CoefficientSet, WaveletPlan};
use wavegrid::Field;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Corrupt = 5,
    Io = 6,
    Finished = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgThresholdMode {
    Constant = 0,
    Capped = 1,
    Accumulation = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgCodec {
    Csr = 0,
    Lz = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgScheme {
    Transport = 0,
    Swe = 1,
}

/// Compression settings shared by patches and simulations. `chunk_size` is
/// only read for the LZ codec; 0 selects the default.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WgCompression {
    pub levels: u32,
    pub mode: WgThresholdMode,
    pub threshold: f64,
    pub codec: WgCodec,
    pub chunk_size: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WgSimConfig {
    pub scheme: WgScheme,
    pub nx: usize,
    pub splits_x: usize,
    pub splits_y: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub alpha: f64,
    pub beta: f64,
    pub g: f64,
    /// Zero disables the compression cycle.
    pub compress: u8,
    pub compression: WgCompression,
    /// Zero uses every core.
    pub threads: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WgStepMetrics {
    pub step: usize,
    pub time: f64,
    pub dense_bytes: usize,
    pub compressed_bytes: usize,
    pub ratio: f64,
    pub nnz: usize,
    pub zeroed: usize,
    pub global_mass: f64,
    /// NaN for the shallow-water scheme.
    pub l2_error: f64,
}

pub struct WgPatch(CompressedPatch);

pub struct WgSimulation(Simulation);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(WgStatus, String);

impl Failure {
    fn arg(msg: impl Into<String>) -> Self {
        Failure(WgStatus::InvalidArgument, msg.into())
    }

    fn null(what: &str) -> Self {
        Failure(WgStatus::NullPointer, format!("`{what}` is null"))
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let status = match e.exit_code() {
            2 => WgStatus::Config,
            3 => WgStatus::Numerical,
            _ => match e {
                PipelineError::Io(_) | PipelineError::Snapshot(_) => WgStatus::Io,
                _ => WgStatus::Corrupt,
            },
        };
        Failure(status, e.to_string())
    }
}

impl From<CodecError> for Failure {
    fn from(e: CodecError) -> Self {
        let status = match e {
            CodecError::Corrupt(_) | CodecError::Truncated { .. } => WgStatus::Corrupt,
            _ => WgStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

macro_rules! failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::arg(e.to_string())
            }
        }
    )*};
}

failure_from!(
    wavegrid::wavelet::WaveletError,
    wavegrid::threshold::ThresholdError,
    wavegrid::field::FieldError
);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            WgStatus::Panic
        }
    }
}

unsafe fn slice_in<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn slice_out<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

fn spec(c: &WgCompression) -> Result<ThresholdSpec, Failure> {
    let mode = match c.mode {
        WgThresholdMode::Constant => ThresholdMode::Constant,
        WgThresholdMode::Capped => ThresholdMode::Capped,
        WgThresholdMode::Accumulation => ThresholdMode::Accumulation,
    };
    Ok(ThresholdSpec::new(mode, c.threshold)?)
}

fn codec(c: &WgCompression) -> Result<Codec, Failure> {
    Ok(match c.codec {
        WgCodec::Csr if c.chunk_size != 0 => return Err(Failure::arg("chunk_size applies to the LZ codec only")),
        WgCodec::Csr => Codec::Csr,
        WgCodec::Lz if c.chunk_size == 0 => Codec::Lz { chunk_size: CHUNK_64K },
        WgCodec::Lz => {
            if c.chunk_size > u32::MAX as usize {
                return Err(Failure::arg(format!("chunk size {} exceeds 32 bits", c.chunk_size)));
            }
            Codec::Lz { chunk_size: c.chunk_size }
        }
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, nul-terminated library version.
#[no_mangle]
pub extern "C" fn wg_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

unsafe fn plan_from(dims: *const usize, ndim: usize, levels: u32) -> Result<WaveletPlan, Failure> {
    let dims = slice_in(dims, ndim, "dims")?;
    if dims.is_empty() {
        return Err(Failure::arg("ndim must be at least 1"));
    }
    Ok(WaveletPlan::new(dims, levels)?)
}

/// Forward transform of a row-major array of shape `dims[0..ndim]` into
/// `output` (corner layout). Both buffers hold the product of `dims` values
/// and may alias.
#[no_mangle]
pub unsafe extern "C" fn wg_dwt(
    dims: *const usize,
    ndim: usize,
    levels: u32,
    input: *const f64,
    output: *mut f64,
) -> WgStatus {
    guard(|| {
        let plan = plan_from(dims, ndim, levels)?;
        let values = slice_in(input, plan.len(), "input")?.to_vec();
        let coeffs = dwt_nd(&Field::from_vec(plan.dims(), values)?, &plan)?;
        slice_out(output, plan.len(), "output")?.copy_from_slice(coeffs.values());
        Ok(())
    })
}

/// Inverse of [`wg_dwt`].
#[no_mangle]
pub unsafe extern "C" fn wg_idwt(
    dims: *const usize,
    ndim: usize,
    levels: u32,
    input: *const f64,
    output: *mut f64,
) -> WgStatus {
    guard(|| {
        let plan = plan_from(dims, ndim, levels)?;
        let values = slice_in(input, plan.len(), "input")?.to_vec();
        let field = idwt_nd(&CoefficientSet::from_parts(plan.clone(), values)?);
        slice_out(output, plan.len(), "output")?.copy_from_slice(field.data());
        Ok(())
    })
}

/// Zeroes small details of a corner-layout coefficient array in place.
/// `zeroed` may be null.
#[no_mangle]
pub unsafe extern "C" fn wg_threshold(
    dims: *const usize,
    ndim: usize,
    levels: u32,
    mode: WgThresholdMode,
    threshold: f64,
    coeffs: *mut f64,
    zeroed: *mut usize,
) -> WgStatus {
    guard(|| {
        let plan = plan_from(dims, ndim, levels)?;
        let data = slice_out(coeffs, plan.len(), "coeffs")?;
        let spec = spec(&WgCompression {
            levels,
            mode,
            threshold,
            codec: WgCodec::Csr,
            chunk_size: 0,
        })?;
        let mut set = CoefficientSet::from_parts(plan, data.to_vec())?;
        let n = apply_threshold(&mut set, &spec);
        data.copy_from_slice(set.values());
        if let Some(z) = zeroed.as_mut() {
            *z = n;
        }
        Ok(())
    })
}

/// Transforms, thresholds and encodes `components` arrays of shape `dims`,
/// stored one after another in `data`.
#[no_mangle]
pub unsafe extern "C" fn wg_patch_compress(
    dims: *const usize,
    ndim: usize,
    components: usize,
    data: *const f64,
    settings: *const WgCompression,
    out: *mut *mut WgPatch,
) -> WgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let settings = settings.as_ref().ok_or_else(|| Failure::null("settings"))?;
        let plan = plan_from(dims, ndim, settings.levels)?;
        if components == 0 {
            return Err(Failure::arg("at least one component is required"));
        }
        let n = plan.len();
        let total = n.checked_mul(components).ok_or_else(|| Failure::arg("size overflow"))?;
        let values = slice_in(data, total, "data")?;
        let spec = spec(settings)?;
        let mut coeffs = Vec::with_capacity(components);
        for chunk in values.chunks_exact(n) {
            let mut c = dwt_nd(&Field::from_vec(plan.dims(), chunk.to_vec())?, &plan)?;
            apply_threshold(&mut c, &spec);
            coeffs.push(c.into_values());
        }
        let refs: Vec<&[f64]> = coeffs.iter().map(Vec::as_slice).collect();
        let patch = CompressedPatch::encode(codec(settings)?, plan.dims(), settings.levels, &refs)?;
        *out = Box::into_raw(Box::new(WgPatch(patch)));
        Ok(())
    })
}

/// Decodes and inverse-transforms every component into `output`, which must
/// hold `len` values (components times cells).
#[no_mangle]
pub unsafe extern "C" fn wg_patch_decompress(patch: *const WgPatch, output: *mut f64, len: usize) -> WgStatus {
    guard(|| {
        let p = &patch.as_ref().ok_or_else(|| Failure::null("patch"))?.0;
        let plan = WaveletPlan::new(p.dims(), p.levels())?;
        let expected = plan.len() * p.components();
        if len != expected {
            return Err(Failure::arg(format!("output holds {len} values, patch has {expected}")));
        }
        let out = slice_out(output, len, "output")?;
        for (c, dst) in p.decode()?.into_iter().zip(out.chunks_exact_mut(plan.len())) {
            let field = idwt_nd(&CoefficientSet::from_parts(plan.clone(), c)?);
            dst.copy_from_slice(field.data());
        }
        Ok(())
    })
}

/// Size queries. Any output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn wg_patch_info(
    patch: *const WgPatch,
    values: *mut usize,
    dense_bytes: *mut usize,
    compressed_bytes: *mut usize,
) -> WgStatus {
    guard(|| {
        let p = &patch.as_ref().ok_or_else(|| Failure::null("patch"))?.0;
        if let Some(v) = values.as_mut() {
            *v = p.coefficient_count() * p.components();
        }
        if let Some(v) = dense_bytes.as_mut() {
            *v = p.dense_bytes();
        }
        if let Some(v) = compressed_bytes.as_mut() {
            *v = p.compressed_bytes();
        }
        Ok(())
    })
}

/// Serializes the patch container. Release the buffer with
/// [`wg_bytes_free`].
#[no_mangle]
pub unsafe extern "C" fn wg_patch_serialize(patch: *const WgPatch, bytes: *mut *mut u8, len: *mut usize) -> WgStatus {
    guard(|| {
        let p = &patch.as_ref().ok_or_else(|| Failure::null("patch"))?.0;
        let bytes = out_ptr(bytes, "bytes")?;
        let len = out_ptr(len, "len")?;
        let buf = p.to_bytes().into_boxed_slice();
        *len = buf.len();
        *bytes = Box::into_raw(buf) as *mut u8;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wg_patch_deserialize(bytes: *const u8, len: usize, out: *mut *mut WgPatch) -> WgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let data = slice_in(bytes, len, "bytes")?;
        *out = Box::into_raw(Box::new(WgPatch(CompressedPatch::from_bytes(data)?)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wg_patch_free(patch: *mut WgPatch) {
    if !patch.is_null() {
        drop(Box::from_raw(patch));
    }
}

#[no_mangle]
pub unsafe extern "C" fn wg_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(bytes, len)));
    }
}

/// Fills `out` with the defaults of `scheme`.
#[no_mangle]
pub unsafe extern "C" fn wg_sim_config_default(scheme: WgScheme, out: *mut WgSimConfig) -> WgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let base = match scheme {
            WgScheme::Transport => SimConfig::transport(),
            WgScheme::Swe => SimConfig::swe(),
        };
        let mode = match base.compression.threshold.mode() {
            ThresholdMode::Constant => WgThresholdMode::Constant,
            ThresholdMode::Capped => WgThresholdMode::Capped,
            ThresholdMode::Accumulation => WgThresholdMode::Accumulation,
        };
        *out = WgSimConfig {
            scheme,
            nx: base.nx,
            splits_x: base.splits[0],
            splits_y: base.splits[1],
            cfl: base.cfl,
            t_end: base.t_end,
            alpha: base.alpha,
            beta: base.beta,
            g: base.g,
            compress: base.compression.enabled as u8,
            compression: WgCompression {
                levels: base.compression.levels,
                mode,
                threshold: base.compression.threshold.c(),
                codec: WgCodec::Csr,
                chunk_size: 0,
            },
            threads: base.threads.unwrap_or(0),
        };
        Ok(())
    })
}

fn sim_config(c: &WgSimConfig) -> Result<SimConfig, Failure> {
    let mut cfg = match c.scheme {
        WgScheme::Transport => SimConfig::transport(),
        WgScheme::Swe => SimConfig::swe(),
    };
    cfg.nx = c.nx;
    cfg.splits = vec![c.splits_x, c.splits_y];
    cfg.cfl = c.cfl;
    cfg.t_end = c.t_end;
    cfg.alpha = c.alpha;
    cfg.beta = c.beta;
    cfg.g = c.g;
    cfg.compression.enabled = c.compress != 0;
    cfg.compression.levels = c.compression.levels;
    cfg.compression.threshold = spec(&c.compression)?;
    cfg.compression.codec = codec(&c.compression)?;
    cfg.threads = (c.threads > 0).then_some(c.threads);
    Ok(cfg)
}

#[no_mangle]
pub unsafe extern "C" fn wg_simulation_new(config: *const WgSimConfig, out: *mut *mut WgSimulation) -> WgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let cfg = sim_config(config.as_ref().ok_or_else(|| Failure::null("config"))?)?;
        *out = Box::into_raw(Box::new(WgSimulation(Simulation::new(cfg)?)));
        Ok(())
    })
}

/// Advances one step. Returns [`WgStatus::Finished`] once `t_end` is
/// reached. `metrics` may be null.
#[no_mangle]
pub unsafe extern "C" fn wg_simulation_step(sim: *mut WgSimulation, metrics: *mut WgStepMetrics) -> WgStatus {
    guard(|| {
        let s = &mut sim.as_mut().ok_or_else(|| Failure::null("sim"))?.0;
        if s.is_finished() {
            return Err(Failure(WgStatus::Finished, "simulation already reached t_end".into()));
        }
        let row = s.advance()?;
        if let Some(m) = metrics.as_mut() {
            *m = WgStepMetrics {
                step: row.step,
                time: row.time,
                dense_bytes: row.dense_bytes,
                compressed_bytes: row.compressed_bytes,
                ratio: row.ratio,
                nnz: row.nnz,
                zeroed: row.zeroed,
                global_mass: row.global_mass,
                l2_error: row.l2_error.unwrap_or(f64::NAN),
            };
        }
        Ok(())
    })
}

/// Simulated time, or NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn wg_simulation_time(sim: *const WgSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.0.time())
}

/// 1 once `t_end` is reached, 0 before, -1 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn wg_simulation_finished(sim: *const WgSimulation) -> i32 {
    sim.as_ref().map_or(-1, |s| s.0.is_finished() as i32)
}

/// Copies the assembled `nx * nx` logical grid of one component.
#[no_mangle]
pub unsafe extern "C" fn wg_simulation_copy_field(
    sim: *const WgSimulation,
    component: usize,
    output: *mut f64,
    len: usize,
) -> WgStatus {
    guard(|| {
        let s = &sim.as_ref().ok_or_else(|| Failure::null("sim"))?.0;
        let fields = s.fields()?;
        let f = fields
            .get(component)
            .ok_or_else(|| Failure::arg(format!("component {component} of {}", fields.len())))?;
        if len != f.len() {
            return Err(Failure::arg(format!("output holds {len} values, field has {}", f.len())));
        }
        slice_out(output, len, "output")?.copy_from_slice(f.data());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wg_simulation_free(sim: *mut WgSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Number of components of `scheme` (1 or 3).
#[no_mangle]
pub extern "C" fn wg_scheme_components(scheme: WgScheme) -> usize {
    match scheme {
        WgScheme::Transport => Scheme::Transport.components(),
        WgScheme::Swe => Scheme::Swe.components(),
    }
}
