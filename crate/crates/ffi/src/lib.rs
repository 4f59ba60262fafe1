//! C ABI for the partner-potential engine.
//!
//! The surface is deliberately small: build a partner construction into an
//! opaque handle, read back the tabulated curves and scalars, and eigensolve
//! the partner. Every function returns an [`SfStatus`]; results come out
//! through caller-provided buffers. Handles must be released with
//! [`sf_partner_free`].
//!
//! The generated header lives in `include/susy_forge.h` and is refreshed by
//! the build script.

use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use susy_forge::chain::Regime;
use susy_forge::error::Error;
use susy_forge::numerics::eigen::{eigensolve, EigenSolveConfig};
use susy_forge::pipeline::{ChainBase, ModelChoice, PartnerArtifacts};

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidConfig = 2,
    SingularTransformation = 3,
    EigensolveFailure = 4,
    BufferTooSmall = 5,
    InternalError = 6,
}

/// Base problem selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfModel {
    /// Free particle; `param` is the wave number k > 0.
    Free = 0,
    /// Radial Coulomb problem; `param` is the angular momentum l >= 0.
    Coulomb = 1,
}

/// Spectral regime of a constructed partner.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfRegime {
    Augmented = 0,
    Isospectral = 1,
    GroundDeleted = 2,
    Singular = 3,
}

/// Opaque partner construction.
pub struct SfPartner {
    base: ChainBase,
    artifacts: PartnerArtifacts,
}

fn status_of(err: &Error) -> SfStatus {
    match err {
        Error::NodeDetected { .. } | Error::ForbiddenWindow { .. } | Error::IntegrandBlowUp { .. } => {
            SfStatus::SingularTransformation
        }
        Error::NoEigenvalueInBracket { .. } => SfStatus::EigensolveFailure,
        _ => SfStatus::InvalidConfig,
    }
}

fn guarded(body: impl FnOnce() -> SfStatus) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => SfStatus::InternalError,
    }
}

/// Build a partner construction.
///
/// `model` selects the base problem, `param` its parameter (k or l), `f0`
/// the chain constant, and `grid_n` the number of samples (0 picks the
/// model default). On success `*out` owns the construction.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_partner_new(
    model: SfModel,
    param: f64,
    f0: f64,
    grid_n: usize,
    out: *mut *mut SfPartner,
) -> SfStatus {
    if out.is_null() {
        return SfStatus::NullArgument;
    }
    guarded(|| {
        let choice = match model {
            SfModel::Free => ModelChoice::Free { k: param },
            SfModel::Coulomb => {
                if param < 0.0 || param.fract() != 0.0 || param > 8.0 {
                    return SfStatus::InvalidConfig;
                }
                ModelChoice::Coulomb { l: param as u32 }
            }
        };
        let n = if grid_n == 0 { None } else { Some(grid_n) };
        let base = match ChainBase::build(choice, n, 0.0) {
            Ok(b) => b,
            Err(e) => return status_of(&e),
        };
        let artifacts = match base.with_f0(f0) {
            Ok(a) => a,
            Err(e) => return status_of(&e),
        };
        let handle = Box::new(SfPartner { base, artifacts });
        unsafe { *out = Box::into_raw(handle) };
        SfStatus::Ok
    })
}

/// Release a handle returned by [`sf_partner_new`]. A null pointer is a
/// no-op.
///
/// # Safety
/// `p` must be null or a pointer produced by [`sf_partner_new`] that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn sf_partner_free(p: *mut SfPartner) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Number of grid samples in the construction.
///
/// # Safety
/// `p` must be a live handle from [`sf_partner_new`].
#[no_mangle]
pub unsafe extern "C" fn sf_partner_len(p: *const SfPartner) -> usize {
    if p.is_null() {
        return 0;
    }
    unsafe { (*p).base.grid.len() }
}

/// Curves that can be copied out of a construction.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfCurve {
    GridX = 0,
    V0 = 1,
    V2 = 2,
    V3 = 3,
    V3Iterative = 4,
    SeedU1 = 5,
    WronskianW = 6,
    ProfileF = 7,
    MissingState = 8,
}

/// Copy a tabulated curve into `buf` (length `len` doubles). `len` must be
/// at least [`sf_partner_len`].
///
/// # Safety
/// `p` must be a live handle; `buf` must point to at least `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_partner_curve(
    p: *const SfPartner,
    curve: SfCurve,
    buf: *mut f64,
    len: usize,
) -> SfStatus {
    if p.is_null() || buf.is_null() {
        return SfStatus::NullArgument;
    }
    guarded(|| {
        let handle = unsafe { &*p };
        let n = handle.base.grid.len();
        if len < n {
            return SfStatus::BufferTooSmall;
        }
        let values: &[f64] = match curve {
            SfCurve::GridX => handle.base.grid.xs(),
            SfCurve::V0 => handle.base.v0.values(),
            SfCurve::V2 => handle.base.v2.values(),
            SfCurve::V3 => handle.artifacts.v3_direct.values(),
            SfCurve::V3Iterative => handle.artifacts.v3_iterative.values(),
            SfCurve::SeedU1 => handle.base.u1.values(),
            SfCurve::WronskianW => handle.base.w.values(),
            SfCurve::ProfileF => handle.artifacts.f.values(),
            SfCurve::MissingState => handle.artifacts.missing.state.values(),
        };
        unsafe { ptr::copy_nonoverlapping(values.as_ptr(), buf, n) };
        SfStatus::Ok
    })
}

/// Scalar summary of the construction.
///
/// # Safety
/// `p` must be a live handle; the out pointers must each be null or valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn sf_partner_summary(
    p: *const SfPartner,
    sigma_minus: *mut f64,
    f0: *mut f64,
    epsilon: *mut f64,
    regime: *mut SfRegime,
) -> SfStatus {
    if p.is_null() {
        return SfStatus::NullArgument;
    }
    let handle = unsafe { &*p };
    unsafe {
        if !sigma_minus.is_null() {
            *sigma_minus = handle.base.sigma_minus;
        }
        if !f0.is_null() {
            *f0 = handle.artifacts.f0;
        }
        if !epsilon.is_null() {
            *epsilon = handle.base.epsilon;
        }
        if !regime.is_null() {
            *regime = match handle.artifacts.regime {
                Regime::Augmented => SfRegime::Augmented,
                Regime::Isospectral => SfRegime::Isospectral,
                Regime::GroundDeleted => SfRegime::GroundDeleted,
                Regime::Singular { .. } => SfRegime::Singular,
            };
        }
    }
    SfStatus::Ok
}

/// Lowest eigenvalues of the partner potential inside `(e_lo, e_hi)`.
/// Writes up to `n_levels` energies into `energies` and the count found into
/// `n_found`.
///
/// # Safety
/// `p` must be a live handle; `energies` must point to at least `n_levels`
/// writable doubles; `n_found` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sf_partner_spectrum(
    p: *const SfPartner,
    n_levels: usize,
    e_lo: f64,
    e_hi: f64,
    energies: *mut f64,
    n_found: *mut usize,
) -> SfStatus {
    if p.is_null() || energies.is_null() || n_found.is_null() {
        return SfStatus::NullArgument;
    }
    guarded(|| {
        let handle = unsafe { &*p };
        if n_levels == 0 || e_lo >= e_hi {
            return SfStatus::InvalidConfig;
        }
        let cfg = EigenSolveConfig::new(n_levels, (e_lo, e_hi));
        match eigensolve(&handle.artifacts.v3_direct, &cfg) {
            Ok(rep) => {
                let count = rep.levels.len().min(n_levels);
                for (i, level) in rep.levels.iter().take(count).enumerate() {
                    unsafe { *energies.add(i) = level.energy };
                }
                unsafe { *n_found = count };
                SfStatus::Ok
            }
            Err(Error::NoEigenvalueInBracket { .. }) => {
                unsafe { *n_found = 0 };
                SfStatus::EigensolveFailure
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn sf_status_message(status: SfStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        SfStatus::Ok => b"ok\0",
        SfStatus::NullArgument => b"null argument\0",
        SfStatus::InvalidConfig => b"invalid configuration\0",
        SfStatus::SingularTransformation => b"singular transformation (node in the chain)\0",
        SfStatus::EigensolveFailure => b"no eigenvalue in bracket\0",
        SfStatus::BufferTooSmall => b"buffer too small\0",
        SfStatus::InternalError => b"internal error\0",
    };
    msg.as_ptr() as *const c_char
}
