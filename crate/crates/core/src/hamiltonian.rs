//! Kinetic-plus-potential Hamiltonians on the product lattice,
//! `H = p₁²/2m₁ + V₁(q₁) + p₂²/2m₂ + V₂(q₂) + V₁₂(q₁,q₂)`,
//! and the phase factors the split-operator propagator is built from.
//!
//! Potentials quantize to multiplication operators and `p²/2m` to a Fourier
//! multiplier, so every phase here is an exact exponential of its term.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::lattice::{unitary_fft_axis, unitary_fft_in_place, Grid};
use crate::states::CompositeState;
use crate::C64;

/// Default cap on the composite dimension `n₁·n₂` of dense matrices.
pub const DENSE_CAP: usize = 4096;

/// Sign convention of the propagator exponent.
///
/// `Minus` is `e^{−itĤ}`; `Plus` is `e^{+itĤ}`, i.e. the same dynamics run
/// backwards in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sign {
    #[default]
    Minus,
    Plus,
}

impl Sign {
    /// Multiplier `s` in `e^{s·i·dt·H}`.
    pub fn factor(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "-" | "minus" | "−" => Ok(Sign::Minus),
            "+" | "plus" => Ok(Sign::Plus),
            other => Err(Error::Config(format!("sign must be '+' or '-', got '{other}'"))),
        }
    }
}

/// Lattice axis of the composite amplitude matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    System,
    Environment,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::System => 0,
            Axis::Environment => 1,
        }
    }
}

/// Named model Hamiltonians.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// `V_j = ½ m_j ω_j² q_j²`, `V₁₂ = λ q₁ q₂`.
    CoupledHarmonic { m1: f64, m2: f64, omega1: f64, omega2: f64, lambda: f64 },
    /// Free system particle, harmonic environment, `V₁₂ = λ q₁ q₂`.
    FreePlusHarmonicEnv { m1: f64, m2: f64, omega2: f64, lambda: f64 },
    /// `V₁ = h((q/b)² − 1)²`, harmonic environment, `V₁₂ = λ q₁ q₂`.
    DoubleWellSystem { m1: f64, m2: f64, barrier: f64, well: f64, omega2: f64, lambda: f64 },
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::CoupledHarmonic { .. } => "coupled_harmonic",
            Preset::FreePlusHarmonicEnv { .. } => "free_plus_harmonic_env",
            Preset::DoubleWellSystem { .. } => "double_well_system",
        }
    }

    /// Builds a preset from its name and a parameter map; parameters not
    /// given take their defaults, unknown parameters are rejected.
    pub fn from_params(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "coupled_harmonic" => &["m1", "m2", "omega1", "omega2", "lambda"],
            "free_plus_harmonic_env" => &["m1", "m2", "omega2", "lambda"],
            "double_well_system" => &["m1", "m2", "barrier", "well", "omega2", "lambda"],
            other => return Err(Error::Config(format!("unknown hamiltonian preset '{other}'"))),
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!("hamiltonian.params: unknown key '{k}' for preset '{name}'")));
        }
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        let preset = match name {
            "coupled_harmonic" => Preset::CoupledHarmonic {
                m1: get("m1", 1.0),
                m2: get("m2", 1.0),
                omega1: get("omega1", 1.0),
                omega2: get("omega2", 1.0),
                lambda: get("lambda", 0.1),
            },
            "free_plus_harmonic_env" => Preset::FreePlusHarmonicEnv {
                m1: get("m1", 1.0),
                m2: get("m2", 1.0),
                omega2: get("omega2", 1.0),
                lambda: get("lambda", 0.1),
            },
            _ => Preset::DoubleWellSystem {
                m1: get("m1", 1.0),
                m2: get("m2", 1.0),
                barrier: get("barrier", 1.0),
                well: get("well", 1.5),
                omega2: get("omega2", 1.0),
                lambda: get("lambda", 0.1),
            },
        };
        for (k, v) in params {
            if !v.is_finite() {
                return Err(Error::Config(format!("hamiltonian.params.{k} must be finite")));
            }
        }
        Ok(preset)
    }

    pub fn build(&self, grid1: Grid, grid2: Grid) -> Result<HamiltonianSpec> {
        let q1 = grid1.points();
        let q2 = grid2.points();
        let coupling = |lambda: f64| Array2::from_shape_fn((grid1.n(), grid2.n()), |(k, l)| lambda * q1[k] * q2[l]);
        let harmonic = |q: &Array1<f64>, m: f64, w: f64| q.mapv(|x| 0.5 * m * w * w * x * x);
        let (m1, m2, v1, v2, v12) = match *self {
            Preset::CoupledHarmonic { m1, m2, omega1, omega2, lambda } => {
                (m1, m2, harmonic(&q1, m1, omega1), harmonic(&q2, m2, omega2), coupling(lambda))
            }
            Preset::FreePlusHarmonicEnv { m1, m2, omega2, lambda } => {
                (m1, m2, Array1::zeros(grid1.n()), harmonic(&q2, m2, omega2), coupling(lambda))
            }
            Preset::DoubleWellSystem { m1, m2, barrier, well, omega2, lambda } => {
                if !(well > 0.0) {
                    return Err(Error::Config("double_well_system: well must be positive".into()));
                }
                let v1 = q1.mapv(|x| barrier * ((x / well).powi(2) - 1.0).powi(2));
                (m1, m2, v1, harmonic(&q2, m2, omega2), coupling(lambda))
            }
        };
        HamiltonianSpec::tabulated(grid1, grid2, m1, m2, v1, v2, v12, self.name())
    }
}

/// Tabulated Hamiltonian on a product lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    grid1: Grid,
    grid2: Grid,
    m1: f64,
    m2: f64,
    v1: Array1<f64>,
    v2: Array1<f64>,
    v12: Array2<f64>,
    preset: String,
}

impl HamiltonianSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn tabulated(
        grid1: Grid,
        grid2: Grid,
        m1: f64,
        m2: f64,
        v1: Array1<f64>,
        v2: Array1<f64>,
        v12: Array2<f64>,
        preset: &str,
    ) -> Result<Self> {
        for (name, m) in [("m1", m1), ("m2", m2)] {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::Config(format!("mass {name} must be positive, got {m}")));
            }
        }
        if v1.len() != grid1.n() {
            return Err(Error::shape(format!("V1 of length {}", grid1.n()), v1.len()));
        }
        if v2.len() != grid2.n() {
            return Err(Error::shape(format!("V2 of length {}", grid2.n()), v2.len()));
        }
        if v12.dim() != (grid1.n(), grid2.n()) {
            return Err(Error::shape(
                format!("V12 of shape {}x{}", grid1.n(), grid2.n()),
                format!("{}x{}", v12.nrows(), v12.ncols()),
            ));
        }
        if v1.iter().chain(v2.iter()).chain(v12.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("potential tables must be finite".into()));
        }
        Ok(Self { grid1, grid2, m1, m2, v1, v2, v12, preset: preset.to_string() })
    }

    pub fn grid1(&self) -> &Grid {
        &self.grid1
    }
    pub fn grid2(&self) -> &Grid {
        &self.grid2
    }
    pub fn m1(&self) -> f64 {
        self.m1
    }
    pub fn m2(&self) -> f64 {
        self.m2
    }
    pub fn v1(&self) -> &Array1<f64> {
        &self.v1
    }
    pub fn v2(&self) -> &Array1<f64> {
        &self.v2
    }
    pub fn v12(&self) -> &Array2<f64> {
        &self.v12
    }
    pub fn preset(&self) -> &str {
        &self.preset
    }

    pub fn is_uncoupled(&self) -> bool {
        self.v12.iter().all(|&v| v == 0.0)
    }

    /// Same potentials with the coupling table replaced.
    pub fn with_coupling(&self, v12: Array2<f64>) -> Result<Self> {
        Self::tabulated(self.grid1, self.grid2, self.m1, self.m2, self.v1.clone(), self.v2.clone(), v12, &self.preset)
    }

    pub fn mass(&self, axis: Axis) -> f64 {
        match axis {
            Axis::System => self.m1,
            Axis::Environment => self.m2,
        }
    }

    pub fn grid(&self, axis: Axis) -> &Grid {
        match axis {
            Axis::System => &self.grid1,
            Axis::Environment => &self.grid2,
        }
    }

    pub fn potential(&self, axis: Axis) -> &Array1<f64> {
        match axis {
            Axis::System => &self.v1,
            Axis::Environment => &self.v2,
        }
    }
}

/// Converts complex samples into a real potential table, rejecting any
/// sample with a nonzero imaginary part.
pub fn real_potential(values: &[C64]) -> Result<Array1<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(k, z)| {
            if z.im != 0.0 {
                Err(Error::Domain(format!("potential must be real, sample {k} is {z}")))
            } else {
                Ok(z.re)
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(Array1::from)
}

/// A potential acting on the composite lattice.
#[derive(Debug, Clone, Copy)]
pub enum PotentialTerm<'a> {
    System(&'a Array1<f64>),
    Environment(&'a Array1<f64>),
    Joint(&'a Array2<f64>),
}

/// Multiplies amplitudes by `e^{s·i·dt·V}` pointwise (`s` from `sign`).
pub fn apply_potential_phase(phi: &mut CompositeState, v: PotentialTerm<'_>, dt: f64, sign: Sign) -> Result<()> {
    let (n1, n2) = phi.dims();
    let a = sign.factor() * dt;
    let amps = phi.amplitudes_mut();
    match v {
        PotentialTerm::System(v1) => {
            if v1.len() != n1 {
                return Err(Error::shape(n1, v1.len()));
            }
            for (mut row, &vk) in amps.rows_mut().into_iter().zip(v1.iter()) {
                let ph = C64::from_polar(1.0, a * vk);
                row.mapv_inplace(|z| z * ph);
            }
        }
        PotentialTerm::Environment(v2) => {
            if v2.len() != n2 {
                return Err(Error::shape(n2, v2.len()));
            }
            let ph = v2.mapv(|vl| C64::from_polar(1.0, a * vl));
            for mut row in amps.rows_mut() {
                row.zip_mut_with(&ph, |z, p| *z *= p);
            }
        }
        PotentialTerm::Joint(v12) => {
            if v12.dim() != (n1, n2) {
                return Err(Error::shape(format!("{n1}x{n2}"), format!("{:?}", v12.dim())));
            }
            amps.zip_mut_with(v12, |z, &v| *z *= C64::from_polar(1.0, a * v));
        }
    }
    Ok(())
}

/// Applies `e^{s·i·dt·p²/2m}` along one axis through the momentum
/// representation.
pub fn apply_kinetic_phase(phi: &mut CompositeState, axis: Axis, mass: f64, dt: f64, sign: Sign) {
    let grid = match axis {
        Axis::System => *phi.grid1(),
        Axis::Environment => *phi.grid2(),
    };
    let a = sign.factor() * dt / (2.0 * mass);
    let mult = grid.momenta().mapv(|p| C64::from_polar(1.0, a * p * p));
    let ax = axis.index();
    let amps = phi.amplitudes_mut();
    unitary_fft_axis(amps, ax, true);
    for mut lane in amps.lanes_mut(ndarray::Axis(ax)) {
        lane.zip_mut_with(&mult, |z, m| *z *= m);
    }
    unitary_fft_axis(amps, ax, false);
}

/// Single-subsystem Hamiltonian matrix `T + diag(V)`, with the kinetic part
/// obtained by pushing unit vectors through the FFT multiplier.
pub fn subsystem_hamiltonian(grid: &Grid, mass: f64, v: &Array1<f64>) -> Array2<C64> {
    let n = grid.n();
    let p2 = grid.momenta().mapv(|p| p * p / (2.0 * mass));
    let mut h = Array2::zeros((n, n));
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for l in 0..n {
        buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        buf[l] = C64::new(1.0, 0.0);
        unitary_fft_in_place(&mut buf, true);
        buf.iter_mut().zip(p2.iter()).for_each(|(z, &e)| *z *= e);
        unitary_fft_in_place(&mut buf, false);
        h.column_mut(l).iter_mut().zip(buf.iter()).for_each(|(d, &s)| *d = s);
    }
    for k in 0..n {
        h[[k, k]] += v[k];
    }
    h
}

/// Kinetic matrix `F† diag(p²/2m) F` from explicit DFT sums:
/// `T_kl = (1/n) Σ_j p_j²/2m · e^{2πi j(k−l)/n}`.
fn dft_kinetic_matrix(grid: &Grid, mass: f64) -> Array2<C64> {
    let n = grid.n();
    // T depends only on (k − l) mod n
    let col: Vec<C64> = (0..n)
        .map(|d| {
            (0..n)
                .map(|j| {
                    let e = grid.momentum(j).powi(2) / (2.0 * mass);
                    C64::from_polar(e, 2.0 * PI * (j * d) as f64 / n as f64)
                })
                .sum::<C64>()
                / n as f64
        })
        .collect();
    Array2::from_shape_fn((n, n), |(k, l)| col[(k + n - l) % n])
}

/// Dense composite Hamiltonian
/// `T₁⊗I + I⊗T₂ + diag(V₁)⊗I + I⊗diag(V₂) + diag(V₁₂)`
/// in row-major `(k, l) ↦ k·n₂ + l` ordering.
pub fn build_dense_hamiltonian(spec: &HamiltonianSpec, cap: usize) -> Result<Array2<C64>> {
    let (n1, n2) = (spec.grid1.n(), spec.grid2.n());
    let dim = n1 * n2;
    if dim > cap {
        return Err(Error::Resource { what: "dense hamiltonian", requested: dim, cap });
    }
    let t1 = dft_kinetic_matrix(&spec.grid1, spec.m1);
    let t2 = dft_kinetic_matrix(&spec.grid2, spec.m2);
    let mut h = Array2::<C64>::zeros((dim, dim));
    for k in 0..n1 {
        for kp in 0..n1 {
            let t = t1[[k, kp]];
            for l in 0..n2 {
                h[[k * n2 + l, kp * n2 + l]] += t;
            }
        }
    }
    for k in 0..n1 {
        for l in 0..n2 {
            for lp in 0..n2 {
                h[[k * n2 + l, k * n2 + lp]] += t2[[l, lp]];
            }
            h[[k * n2 + l, k * n2 + l]] += spec.v1[k] + spec.v2[l] + spec.v12[[k, l]];
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lattice::make_grid;
    use crate::linalg;
    use crate::states::product_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> (Grid, Grid) {
        (make_grid(16, 10.0, 0.0).unwrap(), make_grid(8, 8.0, 0.0).unwrap())
    }

    fn harmonic_spec(g1: Grid, g2: Grid, lambda: f64) -> HamiltonianSpec {
        Preset::CoupledHarmonic { m1: 1.0, m2: 1.3, omega1: 1.0, omega2: 0.8, lambda }.build(g1, g2).unwrap()
    }

    fn max_diff(a: &CompositeState, b: &CompositeState) -> f64 {
        linalg::max_abs_diff(a.amplitudes(), b.amplitudes())
    }

    #[test]
    fn potential_phase_identities() {
        let (g1, g2) = small();
        let phi = fixtures::random_composite(&g1, &g2, &mut ChaCha8Rng::seed_from_u64(2));
        let zero = Array2::zeros((16, 8));
        let mut a = phi.clone();
        apply_potential_phase(&mut a, PotentialTerm::Joint(&zero), 0.3, Sign::Minus).unwrap();
        assert_eq!(a, phi);
        let spec = harmonic_spec(g1, g2, 0.2);
        let mut b = phi.clone();
        apply_potential_phase(&mut b, PotentialTerm::Joint(spec.v12()), 0.0, Sign::Minus).unwrap();
        assert_eq!(b, phi);
    }

    #[test]
    fn potential_phase_matches_diagonal_exponential() {
        let (g1, g2) = small();
        let phi = fixtures::random_composite(&g1, &g2, &mut ChaCha8Rng::seed_from_u64(4));
        let spec = harmonic_spec(g1, g2, 0.0);
        let dt = 0.01;
        let mut fast = phi.clone();
        apply_potential_phase(&mut fast, PotentialTerm::System(spec.v1()), dt, Sign::Minus).unwrap();
        // oracle: e^{-i dt diag(V)} via the Hermitian eigensolver
        let hv = Array2::from_diag(&spec.v1().mapv(|v| C64::new(v, 0.0)));
        let (vals, vecs) = linalg::eigh(hv.view()).unwrap();
        let u = linalg::spectral_apply(&vals, &vecs, |e| C64::from_polar(1.0, -dt * e));
        let want = u.dot(&phi.amplitudes());
        assert!(linalg::max_abs_diff(fast.amplitudes(), want.view()) < 1e-12);
        assert!((fast.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn potential_shape_and_reality_errors() {
        let (g1, g2) = small();
        let mut phi = fixtures::random_composite(&g1, &g2, &mut ChaCha8Rng::seed_from_u64(4));
        let wrong = Array1::zeros(3);
        assert!(apply_potential_phase(&mut phi, PotentialTerm::System(&wrong), 0.1, Sign::Minus).is_err());
        let complex = vec![C64::new(1.0, 0.0), C64::new(2.0, 0.5)];
        assert!(matches!(real_potential(&complex), Err(Error::Domain(_))));
        let real = vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)];
        assert_eq!(real_potential(&real).unwrap(), ndarray::array![1.0, 2.0]);
    }

    #[test]
    fn kinetic_phase_composition_and_identity() {
        let (g1, g2) = small();
        let phi = fixtures::random_composite(&g1, &g2, &mut ChaCha8Rng::seed_from_u64(5));
        let mut zero = phi.clone();
        apply_kinetic_phase(&mut zero, Axis::System, 1.0, 0.0, Sign::Minus);
        assert!(max_diff(&zero, &phi) < 1e-14);
        let mut halves = phi.clone();
        apply_kinetic_phase(&mut halves, Axis::Environment, 0.7, 0.05, Sign::Minus);
        apply_kinetic_phase(&mut halves, Axis::Environment, 0.7, 0.05, Sign::Minus);
        let mut full = phi.clone();
        apply_kinetic_phase(&mut full, Axis::Environment, 0.7, 0.1, Sign::Minus);
        assert!(max_diff(&halves, &full) < 1e-12);
        assert!((full.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_gaussian_spreads_as_closed_form() {
        // σ(t)² = σ₀² + (t/(2mσ₀))² for a free packet with ħ = 1.
        let g1 = make_grid(1024, 80.0, 0.0).unwrap();
        let g2 = make_grid(2, 2.0, 0.0).unwrap();
        let (m, s0, t) = (1.0, 0.8, 2.5);
        let psi1 = fixtures::gaussian_packet(&g1, 0.0, s0, 0.0);
        let psi2 = fixtures::delta(&g2, 0);
        let mut phi = product_state(&g1, psi1.view(), &g2, psi2.view()).unwrap();
        apply_kinetic_phase(&mut phi, Axis::System, m, t, Sign::Minus);
        let q = g1.points();
        let dens: Vec<f64> = (0..1024).map(|k| phi.amplitudes()[[k, 0]].norm_sqr() * g1.step() * g2.step()).collect();
        let var: f64 = dens.iter().zip(q.iter()).map(|(d, x)| d * x * x).sum();
        let want = s0 * s0 + (t / (2.0 * m * s0)).powi(2);
        assert!((var - want).abs() < 1e-6, "{var} vs {want}");
        // the full profile, not just its width
        for (k, x) in q.iter().enumerate() {
            let closed = (-x * x / (2.0 * want)).exp() / (2.0 * PI * want).sqrt();
            assert!((dens[k] / g1.step() - closed).abs() < 1e-6);
        }
    }

    #[test]
    fn phases_on_disjoint_axes_commute() {
        let (g1, g2) = small();
        let spec = harmonic_spec(g1, g2, 0.0);
        let phi = fixtures::random_composite(&g1, &g2, &mut ChaCha8Rng::seed_from_u64(9));
        let mut a = phi.clone();
        apply_potential_phase(&mut a, PotentialTerm::Environment(spec.v2()), 0.3, Sign::Minus).unwrap();
        apply_kinetic_phase(&mut a, Axis::System, 1.0, 0.3, Sign::Minus);
        let mut b = phi.clone();
        apply_kinetic_phase(&mut b, Axis::System, 1.0, 0.3, Sign::Minus);
        apply_potential_phase(&mut b, PotentialTerm::Environment(spec.v2()), 0.3, Sign::Minus).unwrap();
        assert!(max_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn dense_hamiltonian_structure() {
        let (g1, g2) = small();
        let spec = harmonic_spec(g1, g2, 0.3);
        let h = build_dense_hamiltonian(&spec, DENSE_CAP).unwrap();
        assert!(linalg::hermitian_residual(h.view()) < 1e-10);
        // FFT-built and DFT-sum kinetic matrices agree
        let hs = subsystem_hamiltonian(&g1, 1.0, spec.v1());
        let t1 = dft_kinetic_matrix(&g1, 1.0) + Array2::from_diag(&spec.v1().mapv(|v| C64::new(v, 0.0)));
        assert!(linalg::max_abs_diff(hs.view(), t1.view()) < 1e-12);
        assert!(matches!(build_dense_hamiltonian(&spec, 100), Err(Error::Resource { .. })));
    }

    #[test]
    fn uncoupled_dense_hamiltonian_is_kronecker_sum() {
        let (g1, g2) = small();
        let spec = harmonic_spec(g1, g2, 0.0);
        let h = build_dense_hamiltonian(&spec, DENSE_CAP).unwrap();
        let e_full = linalg::eigvalsh(h.view()).unwrap();
        let e1 = linalg::eigvalsh(subsystem_hamiltonian(&g1, 1.0, spec.v1()).view()).unwrap();
        let e2 = linalg::eigvalsh(subsystem_hamiltonian(&g2, 1.3, spec.v2()).view()).unwrap();
        let mut sums: Vec<f64> = e1.iter().flat_map(|a| e2.iter().map(move |b| a + b)).collect();
        sums.sort_by(f64::total_cmp);
        assert!(sums.iter().zip(e_full.iter()).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn harmonic_spectrum_at_high_resolution() {
        let g = make_grid(128, 24.0, 0.0).unwrap();
        let omega = 1.3;
        let v = g.points().mapv(|x| 0.5 * omega * omega * x * x);
        let e = linalg::eigvalsh(subsystem_hamiltonian(&g, 1.0, &v).view()).unwrap();
        for k in 0..5 {
            assert!((e[k] - (k as f64 + 0.5) * omega).abs() < 1e-4, "level {k}: {}", e[k]);
        }
    }

    #[test]
    fn preset_parameter_validation() {
        let mut p = BTreeMap::new();
        p.insert("lambda".to_string(), 0.5);
        assert!(matches!(
            Preset::from_params("coupled_harmonic", &p).unwrap(),
            Preset::CoupledHarmonic { lambda, .. } if lambda == 0.5
        ));
        p.insert("lamda".to_string(), 0.5);
        assert!(matches!(Preset::from_params("coupled_harmonic", &p), Err(Error::Config(_))));
        assert!(matches!(Preset::from_params("nope", &BTreeMap::new()), Err(Error::Config(_))));
        let (g1, g2) = small();
        for name in ["coupled_harmonic", "free_plus_harmonic_env", "double_well_system"] {
            let spec = Preset::from_params(name, &BTreeMap::new()).unwrap().build(g1, g2).unwrap();
            assert_eq!(spec.preset(), name);
            assert!(!spec.is_uncoupled());
        }
    }

    #[test]
    fn sign_parsing() {
        assert_eq!(Sign::parse("+").unwrap(), Sign::Plus);
        assert_eq!(Sign::parse("-").unwrap(), Sign::Minus);
        assert!(Sign::parse("x").is_err());
        assert_eq!(Sign::Minus.flipped(), Sign::Plus);
    }
}
