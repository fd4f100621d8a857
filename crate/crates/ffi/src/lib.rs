//! C ABI over the `multiphase` library.
//!
//! Probes are opaque handles created by the `mp_probe_*` constructors and
//! released with [`mp_probe_free`]. Every fallible call returns an
//! [`MpStatus`]; on failure [`mp_last_error_message`] describes the cause.
//! Matrices are written row-major into caller buffers of d·d doubles, where
//! d is [`mp_probe_phases`]. Output pointers documented as optional may be
//! null.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use multiphase::baselines::{self, Regime};
use multiphase::cq_bounds::{self, DeltaGauge};
use multiphase::exact_qfi;
use multiphase::fock::{build_basis, BasisKind, ModeOccupation};
use multiphase::loss_channel::{apply_loss, LossChannel};
use multiphase::probes;
use multiphase::{Error, PureState};

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidEta = 3,
    Singular = 4,
    NoPhotons = 5,
    Indivisible = 6,
    DimensionMismatch = 7,
    OccupationNotInBasis = 8,
    ZeroVector = 9,
    NotDensityOperator = 10,
    DenseCapExceeded = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpRegime {
    Heisenberg = 0,
    Crossover = 1,
    Sql = 2,
}

impl From<Regime> for MpRegime {
    fn from(r: Regime) -> Self {
        match r {
            Regime::Heisenberg => MpRegime::Heisenberg,
            Regime::Crossover => MpRegime::Crossover,
            Regime::Sql => MpRegime::Sql,
        }
    }
}

/// Opaque normalized probe state.
pub struct MpProbe {
    state: PureState,
}

/// Largest photon number accepted by [`mp_qfi_exact`].
pub const MP_DENSE_CAP: u32 = 12;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Failure(MpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::ModeOutOfRange { .. } | Error::InvalidArgument(_) => MpStatus::InvalidArgument,
            Error::OccupationNotInBasis(_) => MpStatus::OccupationNotInBasis,
            Error::ZeroVector => MpStatus::ZeroVector,
            Error::InvalidEta(_) => MpStatus::InvalidEta,
            Error::DimensionMismatch { .. } => MpStatus::DimensionMismatch,
            Error::Singular { .. } => MpStatus::Singular,
            Error::NoPhotons(_) => MpStatus::NoPhotons,
            Error::Indivisible { .. } => MpStatus::Indivisible,
            Error::NotDensityOperator(_) => MpStatus::NotDensityOperator,
            Error::DenseCapExceeded { .. } => MpStatus::DenseCapExceeded,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MpStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> MpStatus {
    let outcome = catch_unwind(AssertUnwindSafe(body))
        .unwrap_or_else(|_| Err(Failure(MpStatus::Panic, "internal panic".into())));
    match outcome {
        Ok(()) => {
            set_last_error("");
            MpStatus::Ok
        }
        Err(Failure(status, message)) => {
            set_last_error(&message);
            status
        }
    }
}

unsafe fn probe_ref<'a>(probe: *const MpProbe) -> Result<&'a PureState, Failure> {
    probe.as_ref().map(|p| &p.state).ok_or_else(|| null("probe"))
}

unsafe fn slice<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn write<T>(out: *mut T, value: T) {
    if !out.is_null() {
        *out = value;
    }
}

unsafe fn write_matrix(out: *mut f64, m: &nalgebra::DMatrix<f64>) {
    if out.is_null() {
        return;
    }
    let d = m.nrows();
    for i in 0..d {
        for j in 0..d {
            *out.add(i * d + j) = m[(i, j)];
        }
    }
}

unsafe fn emit_probe(state: PureState, out: *mut *mut MpProbe) {
    *out = Box::into_raw(Box::new(MpProbe { state }));
}

/// Generalized N00N probe over d+1 modes with `n` photons.
///
/// # Safety
/// `out` must be a valid pointer to a probe handle slot.
#[no_mangle]
pub unsafe extern "C" fn mp_probe_gnoon(d: u32, n: u32, out: *mut *mut MpProbe) -> MpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let state = probes::ProbeSpec::GeneralizedNoon { d, n }.build()?;
        emit_probe(state, out);
        Ok(())
    })
}

/// Superposition of `terms` Fock components with `n` photons in total over
/// d+1 modes. `occupations` holds terms·(d+1) counts, reference mode first.
///
/// # Safety
/// `occupations` and `amplitudes` must point to buffers of the stated sizes
/// and `out` to a probe handle slot.
#[no_mangle]
pub unsafe extern "C" fn mp_probe_custom(
    d: u32,
    n: u32,
    occupations: *const u32,
    amplitudes: *const f64,
    terms: usize,
    out: *mut *mut MpProbe,
) -> MpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let modes = d as usize + 1;
        let counts = slice(occupations, terms * modes, "occupations")?;
        let amps = slice(amplitudes, terms, "amplitudes")?;
        let basis = build_basis(modes, n, BasisKind::FixedTotal);
        let spec: Vec<(ModeOccupation, f64)> = counts
            .chunks(modes)
            .zip(amps)
            .map(|(c, &a)| (ModeOccupation::new(c.to_vec()), a))
            .collect();
        emit_probe(probes::custom_probe(&basis, &spec)?, out);
        Ok(())
    })
}

/// Two-mode probe Σ_k c_k |k, m−k⟩ with `m + 1` coefficients.
///
/// # Safety
/// `coefficients` must hold `len` doubles and `out` be a probe handle slot.
#[no_mangle]
pub unsafe extern "C" fn mp_probe_ie2(
    m: u32,
    coefficients: *const f64,
    len: usize,
    out: *mut *mut MpProbe,
) -> MpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = slice(coefficients, len, "coefficients")?;
        emit_probe(probes::ie_two_mode(m, c)?, out);
        Ok(())
    })
}

/// Releases a probe. Null is ignored.
///
/// # Safety
/// `probe` must come from an `mp_probe_*` constructor and not be used after.
#[no_mangle]
pub unsafe extern "C" fn mp_probe_free(probe: *mut MpProbe) {
    if !probe.is_null() {
        drop(Box::from_raw(probe));
    }
}

/// Number of phase modes d of a probe, 0 for a null handle.
///
/// # Safety
/// `probe` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mp_probe_phases(probe: *const MpProbe) -> usize {
    probe.as_ref().map_or(0, |p| p.state.phases())
}

/// C_Q at explicit gauges. `eta` and `delta` hold d values each.
/// `out_matrix` is optional.
///
/// # Safety
/// Buffers must match d = [`mp_probe_phases`]; `out_trace_inverse` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn mp_cq_bound(
    probe: *const MpProbe,
    eta: *const f64,
    delta: *const f64,
    out_matrix: *mut f64,
    out_trace_inverse: *mut f64,
) -> MpStatus {
    guard(|| {
        let state = probe_ref(probe)?;
        let d = state.phases();
        let eta = slice(eta, d, "eta")?;
        let delta = DeltaGauge::new(slice(delta, d, "delta")?.to_vec())?;
        if out_trace_inverse.is_null() {
            return Err(null("out_trace_inverse"));
        }
        let bound = cq_bounds::cq_matrix(state, eta, &delta)?;
        write_matrix(out_matrix, bound.matrix());
        write(out_trace_inverse, cq_bounds::bound_total_variance(&bound)?);
        Ok(())
    })
}

/// Tightest Tr[C_Q⁻¹] over the gauge. With `uniform` a single δ is shared.
/// `out_delta` (d values) and `out_matrix` are optional.
///
/// # Safety
/// Buffers must match d = [`mp_probe_phases`]; `out_trace_inverse` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn mp_optimize_delta(
    probe: *const MpProbe,
    eta: *const f64,
    uniform: bool,
    out_delta: *mut f64,
    out_matrix: *mut f64,
    out_trace_inverse: *mut f64,
) -> MpStatus {
    guard(|| {
        let state = probe_ref(probe)?;
        let eta = slice(eta, state.phases(), "eta")?;
        if out_trace_inverse.is_null() {
            return Err(null("out_trace_inverse"));
        }
        let bound = cq_bounds::optimize_delta(state, eta, uniform)?;
        if !out_delta.is_null() {
            for (k, &v) in bound.delta().values().iter().enumerate() {
                *out_delta.add(k) = v;
            }
        }
        write_matrix(out_matrix, bound.matrix());
        write(out_trace_inverse, cq_bounds::bound_total_variance(&bound)?);
        Ok(())
    })
}

/// Lossless QFI matrix. Both outputs are optional; a singular matrix
/// reports [`MpStatus::Singular`] after writing `out_matrix`.
///
/// # Safety
/// `out_matrix` must hold d·d doubles when non-null.
#[no_mangle]
pub unsafe extern "C" fn mp_qfi_pure(
    probe: *const MpProbe,
    out_matrix: *mut f64,
    out_trace_inverse: *mut f64,
) -> MpStatus {
    guard(|| {
        let q = exact_qfi::qfi_pure(probe_ref(probe)?);
        write_matrix(out_matrix, q.matrix());
        write(out_trace_inverse, q.total_variance()?);
        Ok(())
    })
}

/// Exact QFI after uniform loss `eta` on every mode, reference included.
/// All outputs are optional. Probes above [`MP_DENSE_CAP`] photons are
/// rejected.
///
/// # Safety
/// `out_matrix` must hold d·d doubles when non-null.
#[no_mangle]
pub unsafe extern "C" fn mp_qfi_exact(
    probe: *const MpProbe,
    eta: f64,
    out_matrix: *mut f64,
    out_trace_inverse: *mut f64,
    out_residual: *mut f64,
) -> MpStatus {
    guard(|| {
        let state = probe_ref(probe)?;
        let n = state.max_photons();
        if n > MP_DENSE_CAP {
            return Err(Error::DenseCapExceeded { n, cap: MP_DENSE_CAP }.into());
        }
        let channel = LossChannel::uniform(state.modes(), eta, n)?;
        let q = exact_qfi::qfi_mixed(&apply_loss(state, &channel)?, state.phases())?;
        write_matrix(out_matrix, q.matrix());
        write(out_residual, q.saturation_residual());
        write(out_trace_inverse, q.total_variance()?);
        Ok(())
    })
}

/// Closed-form single-phase C_Q for phase-mode mean and variance.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_single_phase_bound(mean: f64, variance: f64, eta: f64, out: *mut f64) -> MpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        write(out, baselines::single_phase_bound(mean, variance, eta)?);
        Ok(())
    })
}

/// Total IE variance with N/d photons per phase.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_ie_total_variance(d: u32, n: u32, eta: f64, out: *mut f64) -> MpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        write(out, baselines::ie_total_variance(d, n, eta)?.total);
        Ok(())
    })
}

/// SE floor (1−η)/(4η)·d²/N.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_se_asymptotic(d: u32, n: u32, eta: f64, out: *mut f64) -> MpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        write(out, baselines::se_asymptotic(d, n, eta)?);
        Ok(())
    })
}

/// Large-N generalized N00N bound and its gauge. `out_delta` is optional.
///
/// # Safety
/// `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_psi_s_asymptotic(
    d: u32,
    n: u32,
    eta: f64,
    out_value: *mut f64,
    out_delta: *mut f64,
) -> MpStatus {
    guard(|| {
        if out_value.is_null() {
            return Err(null("out_value"));
        }
        let (value, delta) = baselines::psi_s_asymptotic(d, n, eta)?;
        write(out_value, value);
        write(out_delta, delta);
        Ok(())
    })
}

/// Loss regime of an N-photon probe at transmissivity `eta`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_regime(n: u32, eta: f64, out: *mut MpRegime) -> MpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        write(out, baselines::regime_classify(n, eta)?.into());
        Ok(())
    })
}

/// Message for the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
