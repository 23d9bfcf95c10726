//! Standard and randomized states used by the verification suite, the CLI
//! and the tests.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::lattice::{quadrature_norm_sqr, Grid};
use crate::states::CompositeState;
use crate::C64;

/// Gaussian wave packet with position standard deviation `sigma` and mean
/// momentum `momentum`, normalized on the lattice.
pub fn gaussian_packet(grid: &Grid, center: f64, sigma: f64, momentum: f64) -> Array1<C64> {
    let psi = grid.points().mapv(|q| {
        let d = q - center;
        C64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), momentum * q)
    });
    normalize(grid, psi)
}

/// Oscillator ground state for mass `m` and frequency `omega`.
pub fn harmonic_ground_state(grid: &Grid, m: f64, omega: f64) -> Array1<C64> {
    gaussian_packet(grid, 0.0, (0.5 / (m * omega)).sqrt(), 0.0)
}

/// On-grid delta at lattice index `k`, unit quadrature norm.
pub fn delta(grid: &Grid, k: usize) -> Array1<C64> {
    let mut v = Array1::from_elem(grid.n(), C64::new(0.0, 0.0));
    v[k] = C64::new(1.0 / grid.step().sqrt(), 0.0);
    v
}

pub fn normalize(grid: &Grid, psi: Array1<C64>) -> Array1<C64> {
    let s = 1.0 / quadrature_norm_sqr(psi.view(), grid).sqrt();
    psi.mapv(|z| z * s)
}

/// `(e_a⊗f_a + e_b⊗f_b)/√2` with on-grid delta profiles: system peaks at
/// `sys.0, sys.1`, environment peaks at `env.0, env.1`.
pub fn two_peak_delta(g1: &Grid, g2: &Grid, sys: (usize, usize), env: (usize, usize)) -> CompositeState {
    let amps = outer(&delta(g1, sys.0), &delta(g2, env.0)) + outer(&delta(g1, sys.1), &delta(g2, env.1));
    CompositeState::normalized(*g1, *g2, amps).expect("nonzero")
}

/// Two-peak entangled state with smooth Gaussian profiles centred at `±sep/2`
/// on both axes.
pub fn two_peak_gaussian(g1: &Grid, g2: &Grid, sep: f64, sigma: f64) -> CompositeState {
    let a1 = gaussian_packet(g1, -sep / 2.0, sigma, 0.0);
    let b1 = gaussian_packet(g1, sep / 2.0, sigma, 0.0);
    let a2 = gaussian_packet(g2, -sep / 2.0, sigma, 0.0);
    let b2 = gaussian_packet(g2, sep / 2.0, sigma, 0.0);
    CompositeState::normalized(*g1, *g2, outer(&a1, &a2) + outer(&b1, &b2)).expect("nonzero")
}

pub fn outer(a: &Array1<C64>, b: &Array1<C64>) -> Array2<C64> {
    Array2::from_shape_fn((a.len(), b.len()), |(i, j)| a[i] * b[j])
}

/// A smooth random packet well inside the box: centre within the middle half,
/// width a few lattice steps or more, modest momentum.
pub fn random_packet<R: Rng + ?Sized>(grid: &Grid, rng: &mut R) -> Array1<C64> {
    let l = grid.length();
    let center = grid.center() + rng.gen_range(-0.15..0.15) * l;
    let sigma = rng.gen_range(0.06..0.1) * l;
    let pmax = 0.15 * PI / grid.step();
    let momentum = rng.gen_range(-pmax..pmax);
    gaussian_packet(grid, center, sigma, momentum)
}

/// A random packet localized well inside the box: every kernel entry at
/// separation `L/2` is negligible, so periodic wrap-around plays no role.
pub fn random_localized_packet<R: Rng + ?Sized>(grid: &Grid, rng: &mut R) -> Array1<C64> {
    let l = grid.length();
    let center = grid.center() + rng.gen_range(-0.05..0.05) * l;
    let sigma = rng.gen_range(0.04..0.05) * l;
    let pmax = 0.1 * PI / grid.step();
    gaussian_packet(grid, center, sigma, rng.gen_range(-pmax..pmax))
}

/// Entangled superposition of three products of localized packets.
pub fn random_localized_composite<R: Rng + ?Sized>(g1: &Grid, g2: &Grid, rng: &mut R) -> CompositeState {
    let mut amps = Array2::zeros((g1.n(), g2.n()));
    for _ in 0..3 {
        let w = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        amps = amps + outer(&random_localized_packet(g1, rng), &random_localized_packet(g2, rng)) * w;
    }
    CompositeState::normalized(*g1, *g2, amps).expect("nonzero")
}

/// Random entangled composite state: a normalized superposition of three
/// products of random packets with random complex weights.
pub fn random_composite<R: Rng + ?Sized>(g1: &Grid, g2: &Grid, rng: &mut R) -> CompositeState {
    let mut amps = Array2::zeros((g1.n(), g2.n()));
    for _ in 0..3 {
        let w = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        amps = amps + outer(&random_packet(g1, rng), &random_packet(g2, rng)) * w;
    }
    CompositeState::normalized(*g1, *g2, amps).expect("nonzero")
}

/// Unstructured random state: independent complex entries. Not band-limited,
/// so only suitable for identities that hold entry by entry.
pub fn random_rough_composite<R: Rng + ?Sized>(g1: &Grid, g2: &Grid, rng: &mut R) -> CompositeState {
    let amps = Array2::from_shape_fn((g1.n(), g2.n()), |_| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    CompositeState::normalized(*g1, *g2, amps).expect("nonzero")
}
