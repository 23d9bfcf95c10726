//! C ABI for `openqs`.
//!
//! Objects cross the boundary as opaque handles created by `oqs_*_new`/
//! constructor functions and released with the matching `oqs_*_free`.
//! Every fallible call returns an [`OqsStatus`]; on failure a description is
//! available from [`oqs_last_error`] on the same thread. Complex arrays are
//! interleaved `(re, im)` doubles in row-major order, layout-compatible with
//! C99 `double complex`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use ndarray::Array2;
use openqs::config::Scenario;
use openqs::evolve::{evolve, EvolveOptions};
use openqs::states::{chapman_kolmogorov_check, purity, reduced_density, CompositeState, DensityOperator};
use openqs::unravel::{mc_density_estimate, Representation, Streams};
use openqs::wigner::wigner_from_density;
use openqs::{Error, C64};

/// Result code of every fallible call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OqsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed configuration or argument.
    InvalidArgument = 2,
    /// Array length or grid mismatch.
    Shape = 3,
    /// Allocation cap exceeded.
    Resource = 4,
    /// Norm drift, failed eigensolve or zero-mass sampling.
    Numerical = 5,
    InvalidDensity = 6,
    Io = 7,
    /// A Rust panic was caught at the boundary.
    Internal = 8,
}

/// Scenario parsed from TOML: grids, Hamiltonian, initial state, options.
pub struct OqsScenario {
    inner: Scenario,
}

/// Composite wavefunction on the product lattice.
pub struct OqsState {
    inner: CompositeState,
}

/// Density operator of the system.
pub struct OqsDensity {
    inner: DensityOperator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn status_of(err: &Error) -> OqsStatus {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::MissingSnapshot(_) => OqsStatus::InvalidArgument,
        Error::Shape { .. } => OqsStatus::Shape,
        Error::Resource { .. } => OqsStatus::Resource,
        Error::NumericalInstability { .. } | Error::ZeroMass { .. } | Error::Eigen(_) => OqsStatus::Numerical,
        Error::InvalidDensity(_) => OqsStatus::InvalidDensity,
        Error::Io { .. } => OqsStatus::Io,
    }
}

struct Fail(OqsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OqsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            OqsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            OqsStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(OqsStatus::NullPointer, format!("{name} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(OqsStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, needed: usize, name: &str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(Fail(OqsStatus::NullPointer, format!("{name} is null")));
    }
    if len < needed {
        return Err(Fail(OqsStatus::Shape, format!("{name}: buffer holds {len} doubles, {needed} needed")));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    let slot = deref_mut(out, "out")?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(OqsStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(OqsStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

fn copy_complex(src: impl Iterator<Item = C64>, dst: &mut [f64]) {
    for (z, pair) in src.zip(dst.chunks_exact_mut(2)) {
        pair[0] = z.re;
        pair[1] = z.im;
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `oqs_*` call on the thread.
#[no_mangle]
pub extern "C" fn oqs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn oqs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a scenario. `base_dir` (nullable) resolves relative CSV paths.
///
/// # Safety
/// `toml` must be a NUL-terminated string, `base_dir` null or one, and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oqs_scenario_from_toml(
    toml: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut OqsScenario,
) -> OqsStatus {
    guard(|| {
        let text = c_str(toml, "toml")?;
        let base = if base_dir.is_null() { "." } else { c_str(base_dir, "base_dir")? };
        let inner = Scenario::from_toml_str(text, Path::new(base))?;
        put(out, OqsScenario { inner })
    })
}

/// # Safety
/// `s` must be null or a handle from [`oqs_scenario_from_toml`], freed once.
#[no_mangle]
pub unsafe extern "C" fn oqs_scenario_free(s: *mut OqsScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Lattice sizes `(n1, n2)` of system and environment.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oqs_scenario_dims(s: *const OqsScenario, n1: *mut usize, n2: *mut usize) -> OqsStatus {
    guard(|| {
        let s = deref(s, "scenario")?;
        *deref_mut(n1, "n1")? = s.inner.grid1.n();
        *deref_mut(n2, "n2")? = s.inner.grid2.n();
        Ok(())
    })
}

/// A fresh copy of the configured initial state.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oqs_scenario_initial_state(s: *const OqsScenario, out: *mut *mut OqsState) -> OqsStatus {
    guard(|| {
        let s = deref(s, "scenario")?;
        put(out, OqsState { inner: s.inner.initial.clone() })
    })
}

/// Builds a state on the scenario lattices from `2·n1·n2` interleaved doubles.
/// The amplitudes are normalized to unit mass.
///
/// # Safety
/// `amplitudes` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn oqs_state_from_amplitudes(
    s: *const OqsScenario,
    amplitudes: *const f64,
    len: usize,
    out: *mut *mut OqsState,
) -> OqsStatus {
    guard(|| {
        let s = deref(s, "scenario")?;
        let (g1, g2) = (s.inner.grid1, s.inner.grid2);
        let needed = 2 * g1.n() * g2.n();
        if amplitudes.is_null() {
            return Err(Fail(OqsStatus::NullPointer, "amplitudes is null".into()));
        }
        if len != needed {
            return Err(Fail(OqsStatus::Shape, format!("amplitudes: expected {needed} doubles, got {len}")));
        }
        let raw = std::slice::from_raw_parts(amplitudes, len);
        let amps = Array2::from_shape_fn((g1.n(), g2.n()), |(k, l)| {
            let i = 2 * (k * g2.n() + l);
            C64::new(raw[i], raw[i + 1])
        });
        put(out, OqsState { inner: CompositeState::normalized(g1, g2, amps)? })
    })
}

/// # Safety
/// `st` must be null or a state handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn oqs_state_free(st: *mut OqsState) {
    if !st.is_null() {
        drop(Box::from_raw(st));
    }
}

/// Copies `2·n1·n2` interleaved doubles into `out`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn oqs_state_copy_amplitudes(st: *const OqsState, out: *mut f64, len: usize) -> OqsStatus {
    guard(|| {
        let st = deref(st, "state")?;
        let (n1, n2) = st.inner.dims();
        let dst = out_slice(out, len, 2 * n1 * n2, "out")?;
        copy_complex(st.inner.amplitudes().iter().copied(), dst);
        Ok(())
    })
}

/// Advances `st` in place by `steps` product steps over total time `t`,
/// using the scenario Hamiltonian, splitting and sign.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oqs_evolve(s: *const OqsScenario, st: *mut OqsState, t: f64, steps: usize) -> OqsStatus {
    guard(|| {
        let s = deref(s, "scenario")?;
        let st = deref_mut(st, "state")?;
        let options = EvolveOptions { step: s.inner.options.step, snapshot_every: None };
        st.inner = evolve(&st.inner, &s.inner.spec, t, steps, options)?.state;
        Ok(())
    })
}

/// Reduced density operator of the system.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oqs_reduced_density(st: *const OqsState, out: *mut *mut OqsDensity) -> OqsStatus {
    guard(|| {
        let st = deref(st, "state")?;
        put(out, OqsDensity { inner: reduced_density(&st.inner) })
    })
}

/// Monte-Carlo estimate of the reduced density from `samples` conditional
/// states. `momentum` selects the environment representation. Writes the
/// Hilbert–Schmidt norm of the entrywise standard error to `stderr_norm`
/// when it is non-null.
///
/// # Safety
/// `st` and `out` must be valid; `stderr_norm` may be null.
#[no_mangle]
pub unsafe extern "C" fn oqs_mc_density(
    st: *const OqsState,
    seed: u64,
    time_index: usize,
    samples: usize,
    momentum: bool,
    out: *mut *mut OqsDensity,
    stderr_norm: *mut f64,
) -> OqsStatus {
    guard(|| {
        let st = deref(st, "state")?;
        let repr = if momentum { Representation::Momentum } else { Representation::Position };
        let est = mc_density_estimate(&st.inner, &Streams::new(seed), time_index, samples, repr)?;
        if let Some(e) = stderr_norm.as_mut() {
            *e = est.stderr_norm();
        }
        put(out, OqsDensity { inner: est.estimate })
    })
}

/// # Safety
/// `d` must be null or a density handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn oqs_density_free(d: *mut OqsDensity) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Lattice size of the density.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oqs_density_dim(d: *const OqsDensity, n: *mut usize) -> OqsStatus {
    guard(|| {
        *deref_mut(n, "n")? = deref(d, "density")?.inner.grid().n();
        Ok(())
    })
}

/// Copies the kernel `ϱ(q_i, q_j)` (trace `Σ ϱ(q_i,q_i)Δq = 1`) as `2n²`
/// interleaved doubles.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn oqs_density_copy_kernel(d: *const OqsDensity, out: *mut f64, len: usize) -> OqsStatus {
    guard(|| {
        let d = deref(d, "density")?;
        let n = d.inner.grid().n();
        copy_complex(d.inner.kernel().iter().copied(), out_slice(out, len, 2 * n * n, "out")?);
        Ok(())
    })
}

/// `tr(ρ²)`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oqs_density_purity(d: *const OqsDensity, out: *mut f64) -> OqsStatus {
    guard(|| {
        *deref_mut(out, "out")? = purity(&deref(d, "density")?.inner);
        Ok(())
    })
}

/// Hilbert–Schmidt distance between two densities on the same lattice.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oqs_density_distance(a: *const OqsDensity, b: *const OqsDensity, out: *mut f64) -> OqsStatus {
    guard(|| {
        let v = deref(a, "a")?.inner.hs_distance(&deref(b, "b")?.inner)?;
        *deref_mut(out, "out")? = v;
        Ok(())
    })
}

/// Wigner function of the density on its `n × n` phase-space lattice:
/// positions to `q` (n), ascending momenta to `p` (n), `W(q_k, p_j)` to `w`
/// (n², row-major in `k`).
///
/// # Safety
/// `q`, `p` must hold `n` doubles and `w` must hold `len_w` doubles.
#[no_mangle]
pub unsafe extern "C" fn oqs_reduced_wigner(
    d: *const OqsDensity,
    q: *mut f64,
    p: *mut f64,
    w: *mut f64,
    n: usize,
    len_w: usize,
) -> OqsStatus {
    guard(|| {
        let d = deref(d, "density")?;
        let m = d.inner.grid().n();
        if n != m {
            return Err(Fail(OqsStatus::Shape, format!("n: lattice has {m} points, got {n}")));
        }
        let table = wigner_from_density(&d.inner)?;
        out_slice(q, n, m, "q")?.copy_from_slice(table.q.as_slice().expect("contiguous"));
        out_slice(p, n, m, "p")?.copy_from_slice(table.p.as_slice().expect("contiguous"));
        for (dst, v) in out_slice(w, len_w, m * m, "w")?.iter_mut().zip(table.values.iter()) {
            *dst = *v;
        }
        Ok(())
    })
}

/// Largest deviation between the two ways of forming the system marginal
/// (directly, and through the environment law and conditional states).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oqs_chapman_kolmogorov(st: *const OqsState, out: *mut f64) -> OqsStatus {
    guard(|| {
        *deref_mut(out, "out")? = chapman_kolmogorov_check(&deref(st, "state")?.inner);
        Ok(())
    })
}
