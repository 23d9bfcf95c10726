//! Lie–Trotter product propagation of the composite state.
//!
//! One step applies, in order, the system factor `e^{−i dt Ĥ₁⊗I}`, the
//! environment factor `e^{−i dt I⊗Ĥ₂}` and the coupling factor
//! `e^{−i dt V₁₂}`. The subsystem factors are exact exponentials of
//! `Ĥ_j = p²/2m_j + V_j` (precomputed per step size), so for `V₁₂ = 0` the
//! product is exact and all splitting error comes from the coupling.
//! [`SubsystemFactor::PhaseSplit`] replaces each subsystem factor by its
//! kinetic and potential phases, which avoids the dense `n×n` unitaries.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::hamiltonian::{
    apply_kinetic_phase, apply_potential_phase, subsystem_hamiltonian, Axis, HamiltonianSpec, PotentialTerm, Sign,
};
use crate::linalg;
use crate::oracle::ExactPropagator;
use crate::states::{position_observable, expectation, purity, reduced_density, CompositeState, RENORM_LIMIT};
use crate::C64;

/// Composite dimension above which snapshots keep derived quantities only.
pub const SNAPSHOT_STATE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    /// Plain Lie product `(A·B·C)ⁿ`.
    #[default]
    Lie,
    /// Symmetric `A½·B½·C·B½·A½`, second order.
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubsystemFactor {
    /// `e^{−i dt Ĥ_j}` from the diagonalized subsystem Hamiltonian.
    #[default]
    Exact,
    /// Kinetic phase followed by potential phase.
    PhaseSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepOptions {
    pub splitting: Splitting,
    pub subsystem: SubsystemFactor,
    pub sign: Sign,
}

/// One subsystem factor for a fixed step size.
#[derive(Debug, Clone)]
enum Factor {
    Dense(Array2<C64>),
    Phases { mass: f64, dt: f64 },
}

/// Precomputed factors for repeated steps of size `dt`.
#[derive(Debug, Clone)]
pub struct TrotterStepper<'a> {
    spec: &'a HamiltonianSpec,
    dt: f64,
    options: StepOptions,
    system: Factor,
    environment: Factor,
    system_inv: Factor,
    environment_inv: Factor,
}

impl<'a> TrotterStepper<'a> {
    pub fn new(spec: &'a HamiltonianSpec, dt: f64, options: StepOptions) -> Result<Self> {
        if !dt.is_finite() {
            return Err(Error::Domain(format!("time step must be finite, got {dt}")));
        }
        let sub_dt = match options.splitting {
            Splitting::Lie => dt,
            Splitting::Strang => 0.5 * dt,
        };
        let build = |axis: Axis, h: f64| -> Result<Factor> {
            Ok(match options.subsystem {
                SubsystemFactor::Exact => {
                    let ham = subsystem_hamiltonian(spec.grid(axis), spec.mass(axis), spec.potential(axis));
                    let (vals, vecs) = linalg::eigh(ham.view())?;
                    let s = options.sign.factor() * h;
                    Factor::Dense(linalg::spectral_apply(&vals, &vecs, |e| C64::from_polar(1.0, s * e)))
                }
                SubsystemFactor::PhaseSplit => Factor::Phases { mass: spec.mass(axis), dt: h },
            })
        };
        Ok(Self {
            spec,
            dt,
            options,
            system: build(Axis::System, sub_dt)?,
            environment: build(Axis::Environment, sub_dt)?,
            system_inv: build(Axis::System, -sub_dt)?,
            environment_inv: build(Axis::Environment, -sub_dt)?,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn apply(&self, phi: &mut CompositeState, axis: Axis, factor: &Factor, kinetic_first: bool) {
        match factor {
            Factor::Dense(u) => {
                let amps = phi.amplitudes_mut();
                let out = match axis {
                    Axis::System => u.dot(&*amps),
                    Axis::Environment => amps.dot(&u.t()),
                };
                *amps = out;
            }
            Factor::Phases { mass, dt } => {
                let v = match axis {
                    Axis::System => PotentialTerm::System(self.spec.v1()),
                    Axis::Environment => PotentialTerm::Environment(self.spec.v2()),
                };
                if kinetic_first {
                    apply_kinetic_phase(phi, axis, *mass, *dt, self.options.sign);
                    apply_potential_phase(phi, v, *dt, self.options.sign).expect("spec shapes");
                } else {
                    apply_potential_phase(phi, v, *dt, self.options.sign).expect("spec shapes");
                    apply_kinetic_phase(phi, axis, *mass, *dt, self.options.sign);
                }
            }
        }
    }

    fn coupling(&self, phi: &mut CompositeState, dt: f64) {
        apply_potential_phase(phi, PotentialTerm::Joint(self.spec.v12()), dt, self.options.sign).expect("spec shapes");
    }

    /// One product step, in place.
    pub fn step(&self, phi: &mut CompositeState) {
        match self.options.splitting {
            Splitting::Lie => {
                self.apply(phi, Axis::System, &self.system, true);
                self.apply(phi, Axis::Environment, &self.environment, true);
                self.coupling(phi, self.dt);
            }
            Splitting::Strang => {
                self.apply(phi, Axis::System, &self.system, true);
                self.apply(phi, Axis::Environment, &self.environment, true);
                self.coupling(phi, self.dt);
                self.apply(phi, Axis::Environment, &self.environment, false);
                self.apply(phi, Axis::System, &self.system, false);
            }
        }
    }

    /// Exact inverse of [`step`](Self::step): inverse factors in reverse order.
    pub fn step_adjoint(&self, phi: &mut CompositeState) {
        match self.options.splitting {
            Splitting::Lie => {
                self.coupling(phi, -self.dt);
                self.apply(phi, Axis::Environment, &self.environment_inv, false);
                self.apply(phi, Axis::System, &self.system_inv, false);
            }
            Splitting::Strang => {
                self.apply(phi, Axis::System, &self.system_inv, true);
                self.apply(phi, Axis::Environment, &self.environment_inv, true);
                self.coupling(phi, -self.dt);
                self.apply(phi, Axis::Environment, &self.environment_inv, false);
                self.apply(phi, Axis::System, &self.system_inv, false);
            }
        }
    }
}

/// Single product step of size `dt`.
pub fn trotter_step(
    phi: &CompositeState,
    spec: &HamiltonianSpec,
    dt: f64,
    options: StepOptions,
) -> Result<CompositeState> {
    check_compatible(phi, spec)?;
    let stepper = TrotterStepper::new(spec, dt, options)?;
    let mut out = phi.clone();
    stepper.step(&mut out);
    let mut drift = 0.0;
    check_norm(&mut out, 1, &mut drift)?;
    Ok(out)
}

fn check_compatible(phi: &CompositeState, spec: &HamiltonianSpec) -> Result<()> {
    if phi.grid1() != spec.grid1() || phi.grid2() != spec.grid2() {
        return Err(Error::shape("state and hamiltonian on the same grids", "different grids"));
    }
    Ok(())
}

/// Renormalizes after a step, accumulating the removed drift. Fails when one
/// step or the whole run has drifted more than [`RENORM_LIMIT`].
pub(crate) fn check_norm(phi: &mut CompositeState, step: usize, cumulative: &mut f64) -> Result<()> {
    let norm = phi.norm_sqr().sqrt();
    let drift = (norm - 1.0).abs();
    *cumulative += drift;
    if !norm.is_finite() || drift > RENORM_LIMIT || *cumulative > RENORM_LIMIT {
        return Err(Error::NumericalInstability { step, drift: if norm.is_finite() { *cumulative } else { f64::INFINITY } });
    }
    phi.renormalize();
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvolveOptions {
    pub step: StepOptions,
    /// Record a snapshot every this many steps (and at step 0 and the end).
    pub snapshot_every: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    /// Full amplitudes when `n₁·n₂ ≤ SNAPSHOT_STATE_CAP`.
    pub state: Option<CompositeState>,
    pub purity: f64,
    pub mean_q1: f64,
    pub mean_q1_sq: f64,
}

impl Snapshot {
    fn record(step: usize, time: f64, phi: &CompositeState) -> Self {
        let rho = reduced_density(phi);
        let q = position_observable(phi.grid1(), |q| q);
        let q2 = position_observable(phi.grid1(), |q| q * q);
        let (n1, n2) = phi.dims();
        Snapshot {
            step,
            time,
            state: (n1 * n2 <= SNAPSHOT_STATE_CAP).then(|| phi.clone()),
            purity: purity(&rho),
            mean_q1: expectation(&rho, q.view()).expect("diagonal observable"),
            mean_q1_sq: expectation(&rho, q2.view()).expect("diagonal observable"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: CompositeState,
    pub snapshots: Vec<Snapshot>,
}

/// `n` product steps of size `t/n` starting from `phi0`.
pub fn evolve(
    phi0: &CompositeState,
    spec: &HamiltonianSpec,
    t: f64,
    n: usize,
    options: EvolveOptions,
) -> Result<Evolution> {
    run(phi0, spec, t, n, options, false)
}

/// Undoes [`evolve`] with the same `(t, n, options)`: applies the adjoint
/// product steps, so `reverse(evolve(φ)) = φ` up to roundoff for either
/// splitting. For Strang splitting this coincides with `evolve(φ, −t, n)`.
pub fn reverse(
    phi: &CompositeState,
    spec: &HamiltonianSpec,
    t: f64,
    n: usize,
    options: EvolveOptions,
) -> Result<Evolution> {
    run(phi, spec, t, n, options, true)
}

fn run(
    phi0: &CompositeState,
    spec: &HamiltonianSpec,
    t: f64,
    n: usize,
    options: EvolveOptions,
    adjoint: bool,
) -> Result<Evolution> {
    if n == 0 {
        return Err(Error::Config("step count must be at least 1".into()));
    }
    if !t.is_finite() {
        return Err(Error::Domain(format!("evolution time must be finite, got {t}")));
    }
    if options.snapshot_every == Some(0) {
        return Err(Error::Config("snapshot cadence must be at least 1".into()));
    }
    check_compatible(phi0, spec)?;
    let dt = t / n as f64;
    let stepper = TrotterStepper::new(spec, dt, options.step)?;
    let mut phi = phi0.clone();
    let mut snapshots = Vec::new();
    let sign = if adjoint { -1.0 } else { 1.0 };
    if options.snapshot_every.is_some() {
        snapshots.push(Snapshot::record(0, 0.0, &phi));
    }
    let mut drift = 0.0;
    for k in 1..=n {
        if adjoint {
            stepper.step_adjoint(&mut phi);
        } else {
            stepper.step(&mut phi);
        }
        check_norm(&mut phi, k, &mut drift)?;
        if let Some(every) = options.snapshot_every {
            if k % every == 0 || k == n {
                snapshots.push(Snapshot::record(k, sign * k as f64 * dt, &phi));
            }
        }
    }
    Ok(Evolution { state: phi, snapshots })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dt: f64,
    pub l2_error: f64,
    /// `log(e_prev/e)/log(n/n_prev)` relative to the previous row.
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `−log e` against `log n`.
    pub fitted_order: f64,
}

impl ConvergenceStudy {
    /// Errors never grow by more than `slack` (relative) from one row to the next.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].l2_error <= w[0].l2_error * (1.0 + slack))
    }
}

/// Quadrature L² error of the product propagator against the exact
/// propagator for each step count in `n_list`.
pub fn convergence_study(
    phi0: &CompositeState,
    spec: &HamiltonianSpec,
    t: f64,
    n_list: &[usize],
    options: StepOptions,
) -> Result<ConvergenceStudy> {
    let exact = ExactPropagator::new(spec)?.propagate(phi0, t, options.sign)?;
    convergence_against(phi0, spec, t, n_list, options, &exact)
}

/// As [`convergence_study`] with a precomputed reference state.
pub fn convergence_against(
    phi0: &CompositeState,
    spec: &HamiltonianSpec,
    t: f64,
    n_list: &[usize],
    options: StepOptions,
    exact: &CompositeState,
) -> Result<ConvergenceStudy> {
    if n_list.is_empty() {
        return Err(Error::Config("convergence study needs at least one step count".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let approx = evolve(phi0, spec, t, n, EvolveOptions { step: options, snapshot_every: None })?.state;
        let err = approx.distance(exact)?;
        let observed_order = rows.last().map(|prev| (prev.l2_error / err).ln() / (n as f64 / prev.n as f64).ln());
        rows.push(ConvergenceRow { n, dt: t / n as f64, l2_error: err, observed_order });
    }
    let fitted_order = fit_order(&rows);
    Ok(ConvergenceStudy { rows, fitted_order })
}

fn fit_order(rows: &[ConvergenceRow]) -> f64 {
    if rows.len() < 2 {
        return f64::NAN;
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.l2_error.ln()).collect();
    -linalg::least_squares_slope(&xs, &ys)
}
