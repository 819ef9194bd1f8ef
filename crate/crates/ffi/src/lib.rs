//! C interface to `adiametric`.
//!
//! Matrices and trajectories are opaque handles owned by the caller once
//! returned and released with the matching `*_free`. Every fallible function
//! returns an [`AmStatus`]; on failure [`am_last_error_message`] describes
//! what went wrong on the calling thread. Matrix data crosses the boundary as
//! row-major `re`/`im` arrays of length `dim * dim`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use adiametric::flow::{self, FlowConfig, MetricTrajectory, Solver};
use adiametric::linalg::{biorthogonal_decompose, c, identity, ComplexMatrix};
use adiametric::scattering::{s_matrix, ScatteringConfig};
use adiametric::schedule::HamiltonianSchedule;
use adiametric::two_level::{fig1_experiment, static_solution, FigOneConfig, FigOneParams, TwoLevelParams};
use adiametric::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The Hamiltonian has complex eigenvalues; no positive metric exists.
    ComplexSpectrum = 3,
    NotPseudoHermitian = 4,
    /// Integration, decomposition or convergence failure.
    SolverFailure = 5,
    SingularMatrix = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Metric solver selector for [`am_evolve`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmSolver {
    RungeKutta = 0,
    PropagatorConjugation = 1,
    Picard = 2,
    NormalOrderedSeries = 3,
}

/// Opaque square complex matrix.
pub struct AmMatrix {
    inner: ComplexMatrix,
}

/// Opaque sampled metric trajectory.
pub struct AmTrajectory {
    inner: MetricTrajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("no interior nul")));
}

fn status_of(e: &Error) -> AmStatus {
    match e {
        Error::ComplexSpectrum { .. } | Error::RealSpectrumViolated { .. } => AmStatus::ComplexSpectrum,
        Error::NotPseudoHermitian { .. } => AmStatus::NotPseudoHermitian,
        Error::SingularMetric => AmStatus::SingularMatrix,
        Error::NotSquare { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonFinite
        | Error::NonHermitianInput { .. }
        | Error::NotPositive { .. }
        | Error::NonpositiveWeight { .. }
        | Error::OutOfRange { .. }
        | Error::InvalidParameter(_) => AmStatus::InvalidArgument,
        _ => AmStatus::SolverFailure,
    }
}

enum Fail {
    Null(&'static str),
    Invalid(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AmStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            AmStatus::NullPointer
        }
        Ok(Err(Fail::Invalid(msg))) => {
            set_error(msg);
            AmStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(format!("{} ({})", e, e.kind()));
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            AmStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed_matrix(m: ComplexMatrix) -> *mut AmMatrix {
    Box::into_raw(Box::new(AmMatrix { inner: m }))
}

unsafe fn read_array<const N: usize>(p: *const f64, what: &'static str) -> Result<[f64; N], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    let mut out = [0.0; N];
    out.copy_from_slice(std::slice::from_raw_parts(p, N));
    Ok(out)
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn am_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next `am_*` call on the same thread.
#[no_mangle]
pub extern "C" fn am_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a `dim × dim` matrix from row-major real and imaginary parts.
/// `im` may be NULL for a real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `dim * dim` doubles; `out` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn am_matrix_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut AmMatrix,
) -> AmStatus {
    guard(|| {
        if dim == 0 {
            return Err(Fail::Invalid("dimension must be positive".into()));
        }
        if re.is_null() {
            return Err(Fail::Null("re"));
        }
        let n = dim.checked_mul(dim).ok_or(Fail::Invalid("dimension overflows".into()))?;
        let re = std::slice::from_raw_parts(re, n);
        let im = (!im.is_null()).then(|| std::slice::from_raw_parts(im, n));
        let m = ComplexMatrix::from_fn(dim, dim, |r, k| {
            c(re[r * dim + k], im.map_or(0.0, |v| v[r * dim + k]))
        });
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Fail::Lib(Error::NonFinite));
        }
        write_out(out, boxed_matrix(m), "out")
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn am_matrix_identity(dim: usize, out: *mut *mut AmMatrix) -> AmStatus {
    guard(|| {
        if dim == 0 {
            return Err(Fail::Invalid("dimension must be positive".into()));
        }
        write_out(out, boxed_matrix(identity(dim)), "out")
    })
}

/// Releases a matrix; NULL is ignored.
///
/// # Safety
/// `m` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn am_matrix_free(m: *mut AmMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of `m`, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn am_matrix_dim(m: *const AmMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.nrows())
}

/// Copies the entries into row-major `re`/`im` buffers of `dim * dim` doubles.
///
/// # Safety
/// `m` must be a live handle and both buffers large enough.
#[no_mangle]
pub unsafe extern "C" fn am_matrix_copy(m: *const AmMatrix, re: *mut f64, im: *mut f64) -> AmStatus {
    guard(|| {
        let m = &borrow(m, "matrix")?.inner;
        if re.is_null() || im.is_null() {
            return Err(Fail::Null("output buffer"));
        }
        let n = m.nrows();
        let re = std::slice::from_raw_parts_mut(re, n * n);
        let im = std::slice::from_raw_parts_mut(im, n * n);
        for r in 0..n {
            for k in 0..n {
                re[r * n + k] = m[(r, k)].re;
                im[r * n + k] = m[(r, k)].im;
            }
        }
        Ok(())
    })
}

/// Static metric `Σ wₙ |Ψⁿ⟩⟨Ψⁿ|` of a diagonalizable `h` with real spectrum.
/// `weights` may be NULL (all ones) or point to `dim` positive doubles.
///
/// # Safety
/// Pointers must be valid as described.
#[no_mangle]
pub unsafe extern "C" fn am_static_metric(
    h: *const AmMatrix,
    weights: *const f64,
    out: *mut *mut AmMatrix,
) -> AmStatus {
    guard(|| {
        let h = &borrow(h, "h")?.inner;
        let n = h.nrows();
        let w = if weights.is_null() {
            vec![1.0; n]
        } else {
            std::slice::from_raw_parts(weights, n).to_vec()
        };
        let system = biorthogonal_decompose(h)?;
        let theta = flow::static_metric(&system, &w)?;
        write_out(out, boxed_matrix(theta), "out")
    })
}

/// `‖h†Θ − Θh‖` (Frobenius).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn am_quasi_hermiticity_residual(
    h: *const AmMatrix,
    theta: *const AmMatrix,
    out: *mut f64,
) -> AmStatus {
    guard(|| {
        let h = &borrow(h, "h")?.inner;
        let theta = &borrow(theta, "theta")?.inner;
        if h.nrows() != theta.nrows() {
            return Err(Fail::Lib(Error::DimensionMismatch {
                expected: h.nrows(),
                actual: theta.nrows(),
            }));
        }
        write_out(out, flow::quasi_hermiticity_residual(h, theta), "out")
    })
}

/// Evolves `theta0` under a schedule given as JSON (the `schedule` object of
/// the CLI configuration), sampling `samples + 1` uniform times on `[t0, t1]`.
///
/// # Safety
/// `schedule_json` must be a nul-terminated UTF-8 string; other pointers valid.
#[no_mangle]
pub unsafe extern "C" fn am_evolve(
    schedule_json: *const c_char,
    theta0: *const AmMatrix,
    t0: f64,
    t1: f64,
    samples: usize,
    solver: AmSolver,
    out: *mut *mut AmTrajectory,
) -> AmStatus {
    guard(|| {
        if schedule_json.is_null() {
            return Err(Fail::Null("schedule_json"));
        }
        let text = CStr::from_ptr(schedule_json)
            .to_str()
            .map_err(|_| Fail::Invalid("schedule is not UTF-8".into()))?;
        let schedule: HamiltonianSchedule =
            serde_json::from_str(text).map_err(|e| Fail::Invalid(format!("schedule: {e}")))?;
        let theta0 = &borrow(theta0, "theta0")?.inner;
        if samples == 0 {
            return Err(Fail::Invalid("samples must be positive".into()));
        }
        let config = FlowConfig {
            solver: match solver {
                AmSolver::RungeKutta => Solver::RungeKutta,
                AmSolver::PropagatorConjugation => Solver::PropagatorConjugation,
                AmSolver::Picard => Solver::Picard,
                AmSolver::NormalOrderedSeries => Solver::NormalOrderedSeries,
            },
            samples,
            ..FlowConfig::default()
        };
        let traj = flow::evolve(&schedule, theta0, t0, t1, &config)?;
        write_out(out, Box::into_raw(Box::new(AmTrajectory { inner: traj })), "out")
    })
}

/// Number of samples, or 0 for NULL.
///
/// # Safety
/// `t` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn am_trajectory_len(t: *const AmTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.inner.len())
}

/// Time and a fresh copy of the metric at sample `index`. `metric` may be NULL
/// when only the time is wanted.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn am_trajectory_sample(
    t: *const AmTrajectory,
    index: usize,
    time: *mut f64,
    metric: *mut *mut AmMatrix,
) -> AmStatus {
    guard(|| {
        let traj = &borrow(t, "trajectory")?.inner;
        if index >= traj.len() {
            return Err(Fail::Invalid(format!("index {index} out of {} samples", traj.len())));
        }
        write_out(time, traj.times[index], "time")?;
        if !metric.is_null() {
            metric.write(boxed_matrix(traj.metrics[index].clone()));
        }
        Ok(())
    })
}

/// # Safety
/// `t` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn am_trajectory_free(t: *mut AmTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Static two-level metric components `(ϑ₀, ϑ₁, ϑ₂, ϑ₃)` for
/// `H = (v_μ + i w_μ)σ_μ / 2` on the branch `(theta0, alpha)`.
///
/// # Safety
/// `v`, `w` and `out` must each point to 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn am_two_level_static(
    v: *const f64,
    w: *const f64,
    theta0: f64,
    alpha: f64,
    out: *mut f64,
) -> AmStatus {
    guard(|| {
        let params = TwoLevelParams::new(read_array::<4>(v, "v")?, read_array::<4>(w, "w")?);
        let m = static_solution(&params, theta0, alpha)?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        std::slice::from_raw_parts_mut(out, 4).copy_from_slice(&m.as_array());
        Ok(())
    })
}

/// Deviation from the final static metric after the two-level ramp
/// `v₁ = a t/T`, `v₂ = a(T−t)/T`, `w₃` fixed (default settings otherwise).
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn am_ramp_deviation(duration: f64, amplitude: f64, w3: f64, out: *mut f64) -> AmStatus {
    guard(|| {
        let params = FigOneParams {
            duration,
            amplitude,
            w3,
            ..FigOneParams::default()
        };
        let res = fig1_experiment(&params, &FigOneConfig::default())?;
        write_out(out, res.deviation, "out")
    })
}

/// Adiabatic S-matrix for `H₀ + e^{−ε|t|}H_I` with initial metric `theta0`
/// (NULL for the identity). `unitarity_defect` may be NULL.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn am_s_matrix(
    h0: *const AmMatrix,
    interaction: *const AmMatrix,
    epsilon: f64,
    theta0: *const AmMatrix,
    s_out: *mut *mut AmMatrix,
    unitarity_defect: *mut f64,
) -> AmStatus {
    guard(|| {
        let h0 = &borrow(h0, "h0")?.inner;
        let hi = &borrow(interaction, "interaction")?.inner;
        let theta0 = match theta0.as_ref() {
            Some(t) => t.inner.clone(),
            None => identity(h0.nrows()),
        };
        let schedule = HamiltonianSchedule::exponential(h0.clone(), hi.clone(), epsilon);
        let res = s_matrix(&schedule, &theta0, &ScatteringConfig::default())?;
        if s_out.is_null() {
            return Err(Fail::Null("s_out"));
        }
        if !unitarity_defect.is_null() {
            unitarity_defect.write(res.unitarity_defect);
        }
        s_out.write(boxed_matrix(res.s));
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_slot_is_cleared_on_success() {
        let mut m = ptr::null_mut();
        unsafe {
            assert_eq!(am_matrix_identity(0, &mut m), AmStatus::InvalidArgument);
            assert!(!am_last_error_message().is_null());
            assert_eq!(am_matrix_identity(2, &mut m), AmStatus::Ok);
            assert!(am_last_error_message().is_null());
            am_matrix_free(m);
        }
    }

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::ComplexSpectrum { max_imag: 1.0 }), AmStatus::ComplexSpectrum);
        assert_eq!(status_of(&Error::NoConvergence { change: 1.0 }), AmStatus::SolverFailure);
        assert_eq!(status_of(&Error::InvalidParameter("x".into())), AmStatus::InvalidArgument);
    }
}
