//! Stochastic pure-state description of the reduced dynamics.
//!
//! At each time the environment coordinate is sampled from its marginal law
//! `ℙ_t` (density `ρ_t`), and the system is assigned the normalized
//! conditional state `Ψ = φ(t)(·, q₂)/‖φ(t)(·, q₂)‖`. The covariance
//! `E[|Ψ⟩⟨Ψ|]` is the reduced density operator; this module estimates it and
//! expectations by Monte Carlo.
//!
//! Randomness comes from [`Streams`]: every `(time index, trajectory)` pair
//! owns its own ChaCha stream, so results do not depend on evaluation order
//! or thread count. Estimates are assembled from per-index counts, which makes
//! the reduction itself order-independent.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolve::Snapshot;
use crate::lattice::unitary_fft_axis;
use crate::linalg;
use crate::states::{
    conditional_state, marginal_density_2, CompositeState, DensityOperator, MarginalDensity, HERMITIAN_TOL, NORM_TOL,
};
use crate::C64;

/// Seeded family of independent random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(time_index: usize, trajectory: usize) -> u64 {
        ((time_index as u64) << 40) | trajectory as u64
    }

    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }
}

/// Which coordinate of the environment is "measured".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Representation {
    #[default]
    Position,
    /// Condition on the environment momentum instead; a different unraveling
    /// of the same reduced state.
    Momentum,
}

/// One draw of the environment coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentSample {
    pub time: f64,
    pub env_index: usize,
    /// `ρ_t(q₂)Δq₂` at the sampled lattice point.
    pub weight: f64,
    pub stream_id: u64,
}

/// The composite state with its environment axis expressed in the chosen
/// representation. The momentum variant applies a unitary DFT along the
/// environment axis, so marginals and conditionals are taken over momenta.
pub fn in_representation(phi: &CompositeState, repr: Representation) -> CompositeState {
    match repr {
        Representation::Position => phi.clone(),
        Representation::Momentum => {
            let mut amps = phi.amplitudes().to_owned();
            unitary_fft_axis(&mut amps, 1, true);
            CompositeState::from_parts_unchecked(*phi.grid1(), *phi.grid2(), amps)
        }
    }
}

/// Law `ρ_t(q₂) = Σₖ |φ_t(k, ·)|² Δq₁` of the environment coordinate.
pub fn environment_distribution(phi_t: &CompositeState) -> MarginalDensity {
    marginal_density_2(phi_t)
}

/// Cumulative lattice masses `Σ_{l' ≤ l} ρ(q_l')Δq`.
pub fn lattice_cdf(dist: &MarginalDensity) -> Array1<f64> {
    let mut acc = 0.0;
    dist.masses().mapv(|m| {
        acc += m;
        acc
    })
}

fn invert_cdf(cdf: &Array1<f64>, u: f64) -> usize {
    // first index with cdf > u; zero-mass points never win a tie
    let idx = cdf.as_slice().expect("contiguous").partition_point(|&c| c <= u);
    if idx < cdf.len() {
        idx
    } else {
        // u beyond the rounded total: last point carrying mass
        (0..cdf.len()).rev().find(|&l| l == 0 || cdf[l] > cdf[l - 1]).unwrap_or(0)
    }
}

/// Inverse-CDF samples of lattice indices, one stream per trajectory.
pub fn sample_environment(dist: &MarginalDensity, streams: &Streams, time_index: usize, count: usize) -> Result<Vec<usize>> {
    let mass = dist.total_mass();
    if (mass - 1.0).abs() > NORM_TOL {
        return Err(Error::Domain(format!("environment distribution has mass {mass}, expected 1")));
    }
    if count == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let cdf = lattice_cdf(dist);
    Ok((0..count)
        .into_par_iter()
        .map(|j| {
            let u: f64 = streams.stream(Streams::stream_id(time_index, j)).gen();
            invert_cdf(&cdf, u)
        })
        .collect())
}

/// The random pure state `Ψ = φ_t(·, q₂ₗ)` normalized.
pub fn random_pure_state(phi_t: &CompositeState, env_index: usize) -> Result<Array1<C64>> {
    conditional_state(phi_t, env_index).map(|(s, _)| s)
}

fn counts(indices: &[usize], n: usize) -> Vec<usize> {
    let mut c = vec![0usize; n];
    for &l in indices {
        c[l] += 1;
    }
    c
}

/// Monte-Carlo estimate of the reduced density operator.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    pub estimate: DensityOperator,
    /// Entrywise standard error of the kernel estimate.
    pub stderr: Array2<f64>,
    pub samples: usize,
}

impl DensityEstimate {
    /// Hilbert–Schmidt norm of the standard-error matrix, `‖σ‖_F·Δq`.
    pub fn stderr_norm(&self) -> f64 {
        self.stderr.iter().map(|s| s * s).sum::<f64>().sqrt() * self.estimate.grid().step()
    }
}

/// `(1/N) Σ |Ψ⟩⟨Ψ|` over `N` conditional states drawn from `ℙ_t`.
pub fn mc_density_estimate(
    phi_t: &CompositeState,
    streams: &Streams,
    time_index: usize,
    n: usize,
    repr: Representation,
) -> Result<DensityEstimate> {
    if n < 2 {
        return Err(Error::Config("Monte-Carlo estimates need at least 2 samples".into()));
    }
    let phi = in_representation(phi_t, repr);
    let idx = sample_environment(&environment_distribution(&phi), streams, time_index, n)?;
    density_from_indices(&phi, &idx)
}

fn density_from_indices(phi: &CompositeState, idx: &[usize]) -> Result<DensityEstimate> {
    let n1 = phi.grid1().n();
    let c = counts(idx, phi.grid2().n());
    let total = idx.len() as f64;
    let mut states = Vec::new();
    let mut kernel = Array2::<C64>::zeros((n1, n1));
    for (l, &cl) in c.iter().enumerate().filter(|(_, &cl)| cl > 0) {
        let psi = random_pure_state(phi, l)?;
        let f = cl as f64 / total;
        for i in 0..n1 {
            for j in 0..n1 {
                kernel[[i, j]] += psi[i] * psi[j].conj() * f;
            }
        }
        states.push((cl, psi));
    }
    let mut var = Array2::<f64>::zeros((n1, n1));
    for (cl, psi) in &states {
        for i in 0..n1 {
            for j in 0..n1 {
                var[[i, j]] += *cl as f64 * (psi[i] * psi[j].conj() - kernel[[i, j]]).norm_sqr();
            }
        }
    }
    let stderr = var.mapv(|v| (v / (total - 1.0)).sqrt() / total.sqrt());
    let estimate = DensityOperator::from_kernel_unchecked(*phi.grid1(), kernel)?;
    Ok(DensityEstimate { estimate, stderr, samples: idx.len() })
}

/// Sample mean and standard error of `⟨Ψ|A|Ψ⟩` over `N` draws.
pub fn mc_expectation(
    phi_t: &CompositeState,
    a: &Array2<C64>,
    streams: &Streams,
    time_index: usize,
    n: usize,
) -> Result<(f64, f64)> {
    let n1 = phi_t.grid1().n();
    if a.dim() != (n1, n1) {
        return Err(Error::shape(format!("{n1}x{n1}"), format!("{:?}", a.dim())));
    }
    let h = linalg::hermitian_residual(a.view());
    if h > HERMITIAN_TOL {
        return Err(Error::Domain(format!("observable is not Hermitian (residual {h:.3e})")));
    }
    if n < 2 {
        return Err(Error::Config("Monte-Carlo estimates need at least 2 samples".into()));
    }
    let idx = sample_environment(&environment_distribution(phi_t), streams, time_index, n)?;
    let c = counts(&idx, phi_t.grid2().n());
    let dq = phi_t.grid1().step();
    let mut values = Vec::new();
    for (l, &cl) in c.iter().enumerate().filter(|(_, &cl)| cl > 0) {
        let psi = random_pure_state(phi_t, l)?;
        let apsi = a.dot(&psi);
        let v: f64 = psi.iter().zip(apsi.iter()).map(|(x, y)| (x.conj() * y).re).sum::<f64>() * dq;
        values.push((cl as f64, v));
    }
    let total = n as f64;
    let mean = values.iter().map(|(c, v)| c * v).sum::<f64>() / total;
    let var = values.iter().map(|(c, v)| c * (v - mean).powi(2)).sum::<f64>() / (total - 1.0);
    Ok((mean, (var / total).sqrt()))
}

#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub sample: EnvironmentSample,
    pub state: Array1<C64>,
}

/// Random pure states at a sequence of times. Sampling at different times is
/// independent (product law over times).
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub times: Vec<f64>,
    pub members: Vec<Vec<EnsembleMember>>,
    pub seed: u64,
    pub count: usize,
    pub representation: Representation,
    pub grid1: crate::lattice::Grid,
}

impl TrajectoryEnsemble {
    /// `(1/N) Σ |Ψ⟩⟨Ψ|` over the members at time slot `i`.
    pub fn density_at(&self, i: usize) -> Result<DensityEstimate> {
        let members = self.members.get(i).ok_or_else(|| Error::shape(format!("slot < {}", self.times.len()), i))?;
        let first = members.first().ok_or_else(|| Error::Config("empty ensemble".into()))?;
        let n1 = first.state.len();
        let total = members.len() as f64;
        let mut kernel = Array2::<C64>::zeros((n1, n1));
        for m in members {
            for i in 0..n1 {
                for j in 0..n1 {
                    kernel[[i, j]] += m.state[i] * m.state[j].conj();
                }
            }
        }
        kernel.mapv_inplace(|z| z / total);
        let mut var = Array2::<f64>::zeros((n1, n1));
        for m in members {
            for i in 0..n1 {
                for j in 0..n1 {
                    var[[i, j]] += (m.state[i] * m.state[j].conj() - kernel[[i, j]]).norm_sqr();
                }
            }
        }
        let stderr = var.mapv(|v| (v / (total - 1.0).max(1.0)).sqrt() / total.sqrt());
        Ok(DensityEstimate {
            estimate: DensityOperator::from_kernel_unchecked(self.grid1, kernel)?,
            stderr,
            samples: members.len(),
        })
    }
}

/// Samples `n` random pure states at each requested time from recorded
/// snapshots of an evolution.
pub fn process_snapshots(
    snapshots: &[Snapshot],
    times: &[f64],
    streams: &Streams,
    n: usize,
    repr: Representation,
) -> Result<TrajectoryEnsemble> {
    let mut members = Vec::with_capacity(times.len());
    let mut grid1 = None;
    for (ti, &t) in times.iter().enumerate() {
        let snap = snapshots
            .iter()
            .find(|s| (s.time - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or(Error::MissingSnapshot(t))?;
        let state = snap.state.as_ref().ok_or(Error::MissingSnapshot(t))?;
        grid1 = Some(*state.grid1());
        let phi = in_representation(state, repr);
        let dist = environment_distribution(&phi);
        let idx = sample_environment(&dist, streams, ti, n)?;
        let masses = dist.masses();
        let mut row = Vec::with_capacity(n);
        for (j, &l) in idx.iter().enumerate() {
            row.push(EnsembleMember {
                sample: EnvironmentSample { time: t, env_index: l, weight: masses[l], stream_id: Streams::stream_id(ti, j) },
                state: random_pure_state(&phi, l)?,
            });
        }
        members.push(row);
    }
    let grid1 = grid1.ok_or_else(|| Error::Config("no sampling times requested".into()))?;
    Ok(TrajectoryEnsemble { times: times.to_vec(), members, seed: streams.seed(), count: n, representation: repr, grid1 })
}

/// Exact covariance `Σₗ ρ(q₂ₗ)Δq₂ |Ψₗ⟩⟨Ψₗ|` by enumerating every lattice value
/// of the environment coordinate.
pub fn exhaustive_density(phi_t: &CompositeState, repr: Representation) -> DensityOperator {
    crate::oracle::enumerate_unraveling(&in_representation(phi_t, repr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::random_composite;
    use crate::lattice::Grid;
    use crate::states::reduced_density;
    use rand::SeedableRng;

    fn grids() -> (Grid, Grid) {
        (Grid::new(16, 8.0, 0.0).unwrap(), Grid::new(16, 8.0, 0.0).unwrap())
    }

    fn state(seed: u64) -> CompositeState {
        let (g1, g2) = grids();
        random_composite(&g1, &g2, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn cdf_ends_at_one_and_skips_zero_mass() {
        let g = Grid::new(8, 8.0, 0.0).unwrap();
        let mut w = Array1::zeros(8);
        w[3] = 0.5 / g.step();
        w[5] = 0.5 / g.step();
        let dist = MarginalDensity::new(g, w).unwrap();
        let cdf = lattice_cdf(&dist);
        assert!((cdf[7] - 1.0).abs() < 1e-12);
        let idx = sample_environment(&dist, &Streams::new(3), 0, 2000).unwrap();
        assert!(idx.iter().all(|&l| l == 3 || l == 5));
        assert_eq!(invert_cdf(&cdf, 0.5), 5);
        assert_eq!(invert_cdf(&cdf, 0.0), 3);
        assert_eq!(invert_cdf(&cdf, 1.0), 5);
    }

    #[test]
    fn unnormalized_distribution_rejected() {
        let g = Grid::new(8, 8.0, 0.0).unwrap();
        assert!(matches!(MarginalDensity::new(g, Array1::from_elem(8, 0.1)), Err(Error::Domain(_))));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let phi = state(1);
        let a = mc_density_estimate(&phi, &Streams::new(42), 0, 500, Representation::Position).unwrap();
        let b = mc_density_estimate(&phi, &Streams::new(42), 0, 500, Representation::Position).unwrap();
        assert_eq!(a.estimate.kernel(), b.estimate.kernel());
        let c = mc_density_estimate(&phi, &Streams::new(43), 0, 500, Representation::Position).unwrap();
        assert_ne!(a.estimate.kernel(), c.estimate.kernel());
    }

    #[test]
    fn exhaustive_matches_partial_trace_in_both_representations() {
        let phi = state(2);
        let exact = reduced_density(&phi);
        for repr in [Representation::Position, Representation::Momentum] {
            let d = exhaustive_density(&phi, repr).hs_distance(&exact).unwrap();
            assert!(d < 1e-12, "{repr:?}: {d}");
        }
    }

    #[test]
    fn estimate_within_four_standard_errors() {
        let phi = state(3);
        let exact = reduced_density(&phi);
        for seed in 0..100 {
            let est = mc_density_estimate(&phi, &Streams::new(seed), 0, 400, Representation::Position).unwrap();
            let err = est.estimate.hs_distance(&exact).unwrap();
            assert!(err <= 4.0 * est.stderr_norm(), "seed {seed}: {err} vs {}", est.stderr_norm());
        }
    }

    #[test]
    fn error_decays_like_inverse_sqrt_n() {
        let phi = state(4);
        let exact = reduced_density(&phi);
        let ns = [100usize, 400, 1600, 6400];
        let rms: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let s: f64 = (0..16)
                    .map(|seed| {
                        let e = mc_density_estimate(&phi, &Streams::new(seed), 0, n, Representation::Position).unwrap();
                        e.estimate.hs_distance(&exact).unwrap().powi(2)
                    })
                    .sum();
                (s / 16.0).sqrt()
            })
            .collect();
        let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let y: Vec<f64> = rms.iter().map(|r| r.ln()).collect();
        let slope = linalg::least_squares_slope(&x, &y);
        assert!((slope + 0.5).abs() < 0.15, "slope {slope}");
    }

    #[test]
    fn expectation_tracks_exact_value() {
        let phi = state(5);
        let rho = reduced_density(&phi);
        let q = crate::states::position_observable(phi.grid1(), |q| q);
        let exact = crate::states::expectation(&rho, q.view()).unwrap();
        let (m, s) = mc_expectation(&phi, &q, &Streams::new(9), 0, 4000).unwrap();
        assert!((m - exact).abs() < 5.0 * s, "{m} vs {exact} ± {s}");
    }

    #[test]
    fn missing_snapshot_is_reported() {
        let phi = state(6);
        let snaps = vec![Snapshot { step: 0, time: 0.0, state: Some(phi), purity: 1.0, mean_q1: 0.0, mean_q1_sq: 0.0 }];
        let e = process_snapshots(&snaps, &[0.5], &Streams::new(0), 10, Representation::Position);
        assert!(matches!(e, Err(Error::MissingSnapshot(t)) if t == 0.5));
        let ok = process_snapshots(&snaps, &[0.0], &Streams::new(0), 10, Representation::Position).unwrap();
        assert_eq!(ok.members[0].len(), 10);
        assert!(ok.density_at(0).is_ok());
    }

    #[test]
    fn two_point_frequencies_and_total_variation() {
        let g = Grid::new(8, 8.0, 0.0).unwrap();
        let mut w = Array1::zeros(8);
        w[2] = 0.5 / g.step();
        w[6] = 0.5 / g.step();
        let dist = MarginalDensity::new(g, w).unwrap();
        let idx = sample_environment(&dist, &Streams::new(2024), 0, 10_000).unwrap();
        let f2 = idx.iter().filter(|&&l| l == 2).count() as f64 / 1e4;
        assert!((0.45..=0.55).contains(&f2), "{f2}");

        let phi = state(8);
        let dist = environment_distribution(&phi);
        let n = 10_000;
        let c = counts(&sample_environment(&dist, &Streams::new(8), 0, n).unwrap(), 16);
        let tv: f64 = c.iter().zip(dist.masses().iter()).map(|(&k, m)| (k as f64 / n as f64 - m).abs()).sum::<f64>() / 2.0;
        assert!(tv <= 5.0 * (16.0 / n as f64).sqrt(), "{tv}");
    }

    #[test]
    fn product_state_distribution_is_environment_density() {
        let (g1, g2) = grids();
        let a = crate::fixtures::gaussian_packet(&g1, 0.3, 0.8, 0.0);
        let b = crate::fixtures::gaussian_packet(&g2, -0.5, 1.1, 0.4);
        let phi = crate::states::product_state(&g1, a.view(), &g2, b.view()).unwrap();
        let dist = environment_distribution(&phi);
        assert!(dist.weights().iter().zip(b.iter()).all(|(w, z)| (w - z.norm_sqr()).abs() < 1e-12));
    }

    #[test]
    fn two_peak_estimate_within_binomial_band() {
        let (g1, g2) = grids();
        let phi = crate::fixtures::two_peak_delta(&g1, &g2, (3, 11), (4, 12));
        let exact = reduced_density(&phi);
        let n = 10_000;
        let est = mc_density_estimate(&phi, &Streams::new(77), 0, n, Representation::Position).unwrap();
        let err = est.estimate.hs_distance(&exact).unwrap();
        assert!(err <= 5.0 * 2f64.sqrt() / (n as f64).sqrt(), "{err}");
    }

    #[test]
    fn expectation_covered_in_most_seeds() {
        let phi = state(5);
        let rho = reduced_density(&phi);
        let q = crate::states::position_observable(phi.grid1(), |q| q);
        let exact = crate::states::expectation(&rho, q.view()).unwrap();
        let hits = (0..100)
            .filter(|&seed| {
                let (m, s) = mc_expectation(&phi, &q, &Streams::new(seed), 0, 1000).unwrap();
                (m - exact).abs() <= 4.0 * s
            })
            .count();
        assert!(hits >= 99, "{hits}");
    }
}
