//! Composite pure states of system ⊗ environment, their marginals, the
//! conditional system states obtained by fixing an environment coordinate, and
//! reduced density operators.
//!
//! Conventions. Amplitudes `φ(k, l)` are samples of the flat wave function at
//! `(q₁ₖ, q₂ₗ)` with `Σ |φ|² Δq₁ Δq₂ = 1`. A density operator is stored as its
//! integral kernel `ϱ(q₁ₖ, q₁ₖ′)`, so `tr(K)·Δq = 1`; the operator matrix acting
//! on amplitude vectors is `K·Δq`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::lattice::{quadrature_norm_sqr, Grid};
use crate::linalg;
use crate::C64;

/// Norm tolerance a state must meet after construction or a propagation step.
pub const NORM_TOL: f64 = 1e-10;
/// Largest norm drift that is silently renormalized away.
pub const RENORM_LIMIT: f64 = 1e-8;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigensolver noise floor for positivity checks (operator scale).
pub const PSD_TOL: f64 = 1e-9;
/// Columns with quadrature norm below this are treated as zero-probability.
pub const ZERO_COLUMN: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    grid1: Grid,
    grid2: Grid,
    amplitudes: Array2<C64>,
}

impl CompositeState {
    /// Wraps amplitudes that are already normalized. Drift up to
    /// [`RENORM_LIMIT`] is renormalized; anything larger is rejected.
    pub fn new(grid1: Grid, grid2: Grid, amplitudes: Array2<C64>) -> Result<Self> {
        check_dims(&grid1, &grid2, &amplitudes)?;
        let mut s = Self { grid1, grid2, amplitudes };
        let drift = (s.norm_sqr() - 1.0).abs();
        if drift > RENORM_LIMIT {
            return Err(Error::Domain(format!("composite state norm drift {drift:.3e} exceeds {RENORM_LIMIT:e}")));
        }
        s.renormalize();
        Ok(s)
    }

    /// Scales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(grid1: Grid, grid2: Grid, amplitudes: Array2<C64>) -> Result<Self> {
        check_dims(&grid1, &grid2, &amplitudes)?;
        let mut s = Self { grid1, grid2, amplitudes };
        if !(s.norm_sqr() > 0.0) || !s.norm_sqr().is_finite() {
            return Err(Error::Domain("cannot normalize a zero or non-finite state".into()));
        }
        s.renormalize();
        Ok(s)
    }

    pub(crate) fn from_parts_unchecked(grid1: Grid, grid2: Grid, amplitudes: Array2<C64>) -> Self {
        Self { grid1, grid2, amplitudes }
    }

    pub fn grid1(&self) -> &Grid {
        &self.grid1
    }

    pub fn grid2(&self) -> &Grid {
        &self.grid2
    }

    pub fn amplitudes(&self) -> ArrayView2<'_, C64> {
        self.amplitudes.view()
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut Array2<C64> {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Array2<C64> {
        self.amplitudes
    }

    pub fn dims(&self) -> (usize, usize) {
        self.amplitudes.dim()
    }

    /// `Σ |φ|² Δq₁ Δq₂`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid1.step() * self.grid2.step()
    }

    pub(crate) fn renormalize(&mut self) {
        let s = 1.0 / self.norm_sqr().sqrt();
        self.amplitudes.mapv_inplace(|z| z * s);
    }

    /// `⟨self|other⟩` with quadrature weights.
    pub fn inner(&self, other: &CompositeState) -> Result<C64> {
        if self.dims() != other.dims() {
            return Err(Error::shape(format!("{:?}", self.dims()), format!("{:?}", other.dims())));
        }
        let s: C64 = self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid1.step() * self.grid2.step())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &CompositeState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Quadrature L² distance `‖self − other‖`.
    pub fn distance(&self, other: &CompositeState) -> Result<f64> {
        if self.dims() != other.dims() {
            return Err(Error::shape(format!("{:?}", self.dims()), format!("{:?}", other.dims())));
        }
        let s: f64 = self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.grid1.step() * self.grid2.step()).sqrt())
    }
}

fn check_dims(grid1: &Grid, grid2: &Grid, amplitudes: &Array2<C64>) -> Result<()> {
    if amplitudes.dim() != (grid1.n(), grid2.n()) {
        return Err(Error::shape(
            format!("{}x{}", grid1.n(), grid2.n()),
            format!("{}x{}", amplitudes.nrows(), amplitudes.ncols()),
        ));
    }
    Ok(())
}

/// Probability density on one subsystem lattice, `Σ wₖ Δq = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDensity {
    grid: Grid,
    weights: Array1<f64>,
}

impl MarginalDensity {
    pub fn new(grid: Grid, weights: Array1<f64>) -> Result<Self> {
        if weights.len() != grid.n() {
            return Err(Error::shape(format!("length {}", grid.n()), format!("length {}", weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::Domain(format!("marginal weight {w} is negative or not finite")));
        }
        let mass = weights.sum() * grid.step();
        if (mass - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("marginal mass {mass} is not 1")));
        }
        Ok(Self { grid, weights })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Density values `ρ(qₖ)`.
    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    /// Point masses `ρ(qₖ)Δq`.
    pub fn masses(&self) -> Array1<f64> {
        &self.weights * self.grid.step()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.sum() * self.grid.step()
    }
}

/// Density-operator kernel on a single subsystem lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    grid: Grid,
    kernel: Array2<C64>,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(grid: Grid, kernel: Array2<C64>) -> Result<Self> {
        let d = Self::from_kernel_unchecked(grid, kernel)?;
        d.validate()?;
        Ok(d)
    }

    pub(crate) fn from_kernel_unchecked(grid: Grid, kernel: Array2<C64>) -> Result<Self> {
        if kernel.dim() != (grid.n(), grid.n()) {
            return Err(Error::shape(
                format!("{0}x{0}", grid.n()),
                format!("{}x{}", kernel.nrows(), kernel.ncols()),
            ));
        }
        Ok(Self { grid, kernel })
    }

    /// Rank-one projector `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(grid: Grid, psi: ArrayView1<C64>) -> Result<Self> {
        if psi.len() != grid.n() {
            return Err(Error::shape(format!("length {}", grid.n()), format!("length {}", psi.len())));
        }
        let norm = quadrature_norm_sqr(psi, &grid);
        if (norm - 1.0).abs() > RENORM_LIMIT {
            return Err(Error::Domain(format!("pure state norm {norm} is not 1")));
        }
        let n = grid.n();
        let kernel = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj() / norm);
        Ok(Self { grid, kernel })
    }

    /// Checks all density-operator invariants.
    pub fn validate(&self) -> Result<()> {
        let h = self.hermitian_residual();
        if h > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("hermiticity residual {h:.3e}")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kernel(&self) -> ArrayView2<'_, C64> {
        self.kernel.view()
    }

    pub fn into_kernel(self) -> Array2<C64> {
        self.kernel
    }

    /// Operator matrix `K·Δq` acting on amplitude vectors (unit trace).
    pub fn operator(&self) -> Array2<C64> {
        &self.kernel * self.grid.step()
    }

    /// `tr(K)·Δq`.
    pub fn trace(&self) -> f64 {
        self.kernel.diag().iter().map(|z| z.re).sum::<f64>() * self.grid.step()
    }

    /// `max |M − M†|` on the operator scale.
    pub fn hermitian_residual(&self) -> f64 {
        linalg::hermitian_residual(self.kernel.view()) * self.grid.step()
    }

    /// Eigenvalues of the operator `K·Δq`, ascending; they sum to one.
    pub fn eigenvalues(&self) -> Result<Array1<f64>> {
        linalg::eigvalsh(self.operator().view())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// Diagonal `ϱ(q, q)` as a position density.
    pub fn diagonal(&self) -> Array1<f64> {
        self.kernel.diag().mapv(|z| z.re)
    }

    /// `a·self + (1 − a)·other`.
    pub fn mix(&self, other: &DensityOperator, a: f64) -> Result<DensityOperator> {
        if self.grid != other.grid {
            return Err(Error::shape("matching grids", "different grids"));
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Domain(format!("mixing weight {a} outside [0, 1]")));
        }
        Ok(Self { grid: self.grid, kernel: &self.kernel * a + &other.kernel * (1.0 - a) })
    }

    /// Hilbert–Schmidt distance between the operators, `‖K − K′‖_F·Δq`.
    pub fn hs_distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::shape("matching grids", "different grids"));
        }
        Ok(linalg::frobenius((&self.kernel - &other.kernel).view()) * self.grid.step())
    }
}

fn check_normalized(grid: &Grid, psi: ArrayView1<C64>, which: &str) -> Result<()> {
    if psi.len() != grid.n() {
        return Err(Error::shape(format!("length {}", grid.n()), format!("length {}", psi.len())));
    }
    let norm = quadrature_norm_sqr(psi, grid);
    if (norm - 1.0).abs() > RENORM_LIMIT {
        return Err(Error::Domain(format!("{which} has norm {norm}, expected 1")));
    }
    Ok(())
}

/// `(ψ₁⊗ψ₂)(q₁,q₂) = ψ₁(q₁)ψ₂(q₂)`.
pub fn product_state(
    grid1: &Grid,
    psi1: ArrayView1<C64>,
    grid2: &Grid,
    psi2: ArrayView1<C64>,
) -> Result<CompositeState> {
    check_normalized(grid1, psi1, "system state")?;
    check_normalized(grid2, psi2, "environment state")?;
    let amps = Array2::from_shape_fn((grid1.n(), grid2.n()), |(k, l)| psi1[k] * psi2[l]);
    CompositeState::new(*grid1, *grid2, amps)
}

/// `ρ₁(q₁ₖ) = Σₗ |φ(k,l)|² Δq₂`.
pub fn marginal_density_1(phi: &CompositeState) -> MarginalDensity {
    let dq2 = phi.grid2.step();
    let w = phi.amplitudes.map_axis(Axis(1), |row| row.iter().map(|z| z.norm_sqr()).sum::<f64>() * dq2);
    MarginalDensity { grid: phi.grid1, weights: w }
}

/// `ρ₂(q₂ₗ) = Σₖ |φ(k,l)|² Δq₁`; the law of the environment coordinate.
pub fn marginal_density_2(phi: &CompositeState) -> MarginalDensity {
    let dq1 = phi.grid1.step();
    let w = phi.amplitudes.map_axis(Axis(0), |col| col.iter().map(|z| z.norm_sqr()).sum::<f64>() * dq1);
    MarginalDensity { grid: phi.grid2, weights: w }
}

/// System state conditioned on environment lattice point `l`: the normalized
/// column `φ(·, q₂ₗ)` and its probability mass `ρ₂(q₂ₗ)Δq₂`.
pub fn conditional_state(phi: &CompositeState, l: usize) -> Result<(Array1<C64>, f64)> {
    let n2 = phi.grid2.n();
    if l >= n2 {
        return Err(Error::shape(format!("index < {n2}"), l));
    }
    let col = phi.amplitudes.column(l);
    let norm_sqr = quadrature_norm_sqr(col, &phi.grid1);
    if norm_sqr.sqrt() <= ZERO_COLUMN {
        return Err(Error::ZeroMass { index: l });
    }
    let s = 1.0 / norm_sqr.sqrt();
    Ok((col.mapv(|z| z * s), norm_sqr * phi.grid2.step()))
}

/// Partial trace over the environment:
/// `ϱ(q₁ₖ, q₁ₖ′) = Σₗ φ(k,l)·conj(φ(k′,l))·Δq₂`.
pub fn reduced_density(phi: &CompositeState) -> DensityOperator {
    let a = &phi.amplitudes;
    let kernel = a.dot(&linalg::adjoint(a.view())) * phi.grid2.step();
    DensityOperator { grid: phi.grid1, kernel }
}

/// Partial trace over the system, giving the environment's reduced state.
pub fn reduced_density_environment(phi: &CompositeState) -> DensityOperator {
    let a = &phi.amplitudes;
    let kernel = a.t().dot(&a.mapv(|z| z.conj())) * phi.grid1.step();
    DensityOperator { grid: phi.grid2, kernel }
}

/// `tr(ρ A)` for an observable given as a Hermitian operator matrix on the
/// subsystem lattice.
pub fn expectation(rho: &DensityOperator, a: ArrayView2<C64>) -> Result<f64> {
    let n = rho.grid.n();
    if a.dim() != (n, n) {
        return Err(Error::shape(format!("{n}x{n}"), format!("{}x{}", a.nrows(), a.ncols())));
    }
    let h = linalg::hermitian_residual(a);
    if h > HERMITIAN_TOL {
        return Err(Error::Domain(format!("observable is not Hermitian (residual {h:.3e})")));
    }
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            tr += rho.kernel[[i, j]] * a[[j, i]];
        }
    }
    Ok(tr.re * rho.grid.step())
}

/// `tr(ρ²)`.
pub fn purity(rho: &DensityOperator) -> f64 {
    let dq = rho.grid.step();
    rho.kernel.iter().map(|z| z.norm_sqr()).sum::<f64>() * dq * dq
}

/// Largest pointwise gap between `ρ₁` computed directly and as the
/// `ℙ₂`-average of the conditional densities `|Ψ(l)|²`.
pub fn chapman_kolmogorov_check(phi: &CompositeState) -> f64 {
    let direct = marginal_density_1(phi);
    let mut averaged = Array1::<f64>::zeros(phi.grid1.n());
    for l in 0..phi.grid2.n() {
        match conditional_state(phi, l) {
            Ok((state, weight)) => {
                averaged.zip_mut_with(&state, |acc, z| *acc += z.norm_sqr() * weight);
            }
            Err(_) => continue,
        }
    }
    direct
        .weights
        .iter()
        .zip(averaged.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Momentum density `⟨p|ρ|p⟩` at the ascending lattice momenta, normalized so
/// that `Σ ρ̃(p)Δp = 1`.
pub fn momentum_density(rho: &DensityOperator) -> Array1<f64> {
    let mut k = rho.kernel.clone();
    crate::lattice::unitary_fft_axis(&mut k, 0, true);
    crate::lattice::unitary_fft_axis(&mut k, 1, false);
    let g = rho.grid;
    let scale = g.step() / g.momentum_step();
    Array1::from_shape_fn(g.n(), |s| {
        let j = g.dft_slot_of_sorted(s);
        k[[j, j]].re * scale
    })
}

/// Diagonal operator `diag(f(qₖ))`, e.g. position powers.
pub fn position_observable(grid: &Grid, f: impl Fn(f64) -> f64) -> Array2<C64> {
    Array2::from_diag(&grid.points().mapv(|q| C64::new(f(q), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lattice::make_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grids() -> (Grid, Grid) {
        (make_grid(16, 12.0, 0.0).unwrap(), make_grid(16, 10.0, 0.0).unwrap())
    }

    #[test]
    fn product_state_is_rank_one_and_pure() {
        let (g1, g2) = grids();
        let a = fixtures::gaussian_packet(&g1, 0.5, 1.0, 0.3);
        let b = fixtures::gaussian_packet(&g2, -0.2, 0.8, 0.0);
        let phi = product_state(&g1, a.view(), &g2, b.view()).unwrap();
        assert!((phi.norm_sqr() - 1.0).abs() < 1e-10);
        let amps = phi.amplitudes();
        // 2x2 minors vanish for an outer product
        for (i, j) in [(0usize, 3usize), (5, 9), (7, 8)] {
            let minor = amps[[i, i]] * amps[[j, j]] - amps[[i, j]] * amps[[j, i]];
            assert!(minor.norm() < 1e-14);
        }
        let rho = reduced_density(&phi);
        rho.validate().unwrap();
        assert!((purity(&rho) - 1.0).abs() < 1e-9);
        let m1 = marginal_density_1(&phi);
        assert!(m1.weights().iter().zip(a.iter()).all(|(w, z)| (w - z.norm_sqr()).abs() < 1e-12));
        let m2 = marginal_density_2(&phi);
        assert!(m2.weights().iter().zip(b.iter()).all(|(w, z)| (w - z.norm_sqr()).abs() < 1e-12));
        assert!((m2.total_mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn product_state_rejects_unnormalized_factors() {
        let (g1, g2) = grids();
        let a = fixtures::gaussian_packet(&g1, 0.0, 1.0, 0.0) * C64::new(1.01, 0.0);
        let b = fixtures::gaussian_packet(&g2, 0.0, 1.0, 0.0);
        assert!(matches!(product_state(&g1, a.view(), &g2, b.view()), Err(Error::Domain(_))));
    }

    #[test]
    fn composite_norm_drift_policy() {
        let (g1, g2) = grids();
        let phi = fixtures::random_composite(&g1, &g2, &mut ChaCha8Rng::seed_from_u64(1));
        let slightly_off = phi.amplitudes().mapv(|z| z * (1.0 + 1e-9));
        let fixed = CompositeState::new(g1, g2, slightly_off).unwrap();
        assert!((fixed.norm_sqr() - 1.0).abs() < 1e-14);
        let far_off = phi.amplitudes().mapv(|z| z * 1.001);
        assert!(matches!(CompositeState::new(g1, g2, far_off), Err(Error::Domain(_))));
    }

    #[test]
    fn entangled_two_peak_state() {
        let (g1, g2) = grids();
        let phi = fixtures::two_peak_delta(&g1, &g2, (4, 11), (2, 13));
        let m1 = marginal_density_1(&phi);
        let masses = m1.masses();
        assert!((masses[4] - 0.5).abs() < 1e-12 && (masses[11] - 0.5).abs() < 1e-12);
        let rho = reduced_density(&phi);
        rho.validate().unwrap();
        assert!((purity(&rho) - 0.5).abs() < 1e-12);
        // off-diagonal coherences vanish: orthogonal environment columns
        assert!(rho.kernel()[[4, 11]].norm() < 1e-15);
        let (state, weight) = conditional_state(&phi, 2).unwrap();
        assert!((state[4].norm_sqr() * g1.step() - 1.0).abs() < 1e-12);
        assert!((weight - 0.5).abs() < 1e-12);
    }

    #[test]
    fn conditional_state_of_product() {
        let (g1, g2) = grids();
        let a = fixtures::gaussian_packet(&g1, 0.5, 1.0, 0.3);
        let b = fixtures::gaussian_packet(&g2, -0.2, 0.8, 0.0);
        let phi = product_state(&g1, a.view(), &g2, b.view()).unwrap();
        let mut total = 0.0;
        for l in 0..g2.n() {
            let (state, weight) = conditional_state(&phi, l).unwrap();
            // ψ₂ is real and positive, so the conditional state is ψ₁ exactly
            assert!(state.iter().zip(a.iter()).all(|(x, y)| (x - y).norm() < 1e-12));
            assert!((weight - b[l].norm_sqr() * g2.step()).abs() < 1e-15);
            total += weight;
        }
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_column_is_refused() {
        let (g1, g2) = grids();
        let phi = fixtures::two_peak_delta(&g1, &g2, (4, 11), (2, 13));
        assert!(matches!(conditional_state(&phi, 0), Err(Error::ZeroMass { index: 0 })));
        assert!(matches!(conditional_state(&phi, 99), Err(Error::Shape { .. })));
    }

    #[test]
    fn expectation_basics() {
        let (g1, g2) = grids();
        let a = fixtures::gaussian_packet(&g1, 0.0, 0.7, 0.0);
        let b = fixtures::gaussian_packet(&g2, 0.0, 1.0, 0.0);
        let rho = reduced_density(&product_state(&g1, a.view(), &g2, b.view()).unwrap());
        let id = Array2::<C64>::eye(g1.n());
        assert!((expectation(&rho, id.view()).unwrap() - 1.0).abs() < 1e-12);
        // grid is symmetric about 0 only up to the extra left point; the
        // packet has negligible weight there.
        let q = position_observable(&g1, |q| q);
        assert!(expectation(&rho, q.view()).unwrap().abs() < 1e-9);
        let mut bad = id.clone();
        bad[[0, 1]] = C64::new(0.0, 1.0);
        assert!(matches!(expectation(&rho, bad.view()), Err(Error::Domain(_))));
    }

    #[test]
    fn mixture_purity() {
        let (g1, g2) = grids();
        let phi = fixtures::two_peak_delta(&g1, &g2, (3, 9), (1, 14));
        let rho = reduced_density(&phi);
        let pure_a = DensityOperator::pure(g1, fixtures::delta(&g1, 3).view()).unwrap();
        let pure_b = DensityOperator::pure(g1, fixtures::delta(&g1, 9).view()).unwrap();
        let mix = pure_a.mix(&pure_b, 0.5).unwrap();
        assert!(rho.hs_distance(&mix).unwrap() < 1e-12);
        assert!((purity(&pure_a) - 1.0).abs() < 1e-12);
        assert!((purity(&mix) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_density_detected() {
        let g = make_grid(4, 4.0, 0.0).unwrap();
        let mut k = Array2::<C64>::eye(4) * C64::new(0.25, 0.0);
        k[[0, 0]] = C64::new(-0.25, 0.0);
        k[[1, 1]] = C64::new(0.75, 0.0);
        assert!(matches!(DensityOperator::new(g, k), Err(Error::InvalidDensity(_))));
        let mut k = Array2::<C64>::eye(4) * C64::new(0.25, 0.0);
        k[[0, 1]] = C64::new(0.1, 0.0);
        assert!(matches!(DensityOperator::new(g, k), Err(Error::InvalidDensity(_))));
        let k = Array2::<C64>::eye(4) * C64::new(0.5, 0.0);
        assert!(matches!(DensityOperator::new(g, k), Err(Error::InvalidDensity(_))));
        let k = Array2::<C64>::eye(4) * C64::new(0.25, 0.0);
        DensityOperator::new(g, k).unwrap();
    }

    #[test]
    fn chapman_kolmogorov_on_product_and_random() {
        let (g1, g2) = grids();
        let a = fixtures::gaussian_packet(&g1, 0.5, 1.0, 0.3);
        let b = fixtures::gaussian_packet(&g2, -0.2, 0.8, 0.0);
        let phi = product_state(&g1, a.view(), &g2, b.view()).unwrap();
        assert!(chapman_kolmogorov_check(&phi) <= 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let phi = fixtures::random_composite(&g1, &g2, &mut rng);
            assert!(chapman_kolmogorov_check(&phi) <= 1e-10);
        }
        // zero-mass columns are skipped
        let phi = fixtures::two_peak_delta(&g1, &g2, (4, 11), (2, 13));
        assert!(chapman_kolmogorov_check(&phi) <= 1e-12);
    }

    #[test]
    fn schmidt_purities_agree() {
        let (g1, g2) = grids();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let phi = fixtures::random_composite(&g1, &g2, &mut rng);
            let p1 = purity(&reduced_density(&phi));
            let p2 = purity(&reduced_density_environment(&phi));
            assert!((p1 - p2).abs() < 1e-9);
        }
    }
}
