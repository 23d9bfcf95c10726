//! Position lattices, their reciprocal momentum lattices, and the unitary
//! transforms between the two representations.
//!
//! A [`Grid`] with `n` points on a box of length `L` has spacing `Δq = L/n`
//! and momentum spacing `Δp = 2π/L`, so `Δq·Δp·n = 2π`. Momenta are kept in
//! DFT frequency order internally; [`Grid::momenta_sorted`] is what users see.
//!
//! All functions over the environment are stored in flat (Lebesgue) form. A
//! function `f` in `L²(ν)` for a Gaussian reference measure `ν` enters the
//! flat representation as `f·√(dν/dq)` through [`embed_gaussian`].

use std::cell::RefCell;
use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
    center: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64, center: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid point count must be a power of two >= 2, got {n}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Config(format!(
                "grid length must be positive and finite, got {length}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::Config(format!("grid center must be finite, got {center}")));
        }
        Ok(Self { n, length, center })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Position spacing `Δq = L/n`.
    pub fn step(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Momentum spacing `Δp = 2π/L`.
    pub fn momentum_step(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Leftmost lattice point `center − L/2`.
    pub fn origin(&self) -> f64 {
        self.center - 0.5 * self.length
    }

    pub fn point(&self, k: usize) -> f64 {
        self.origin() + k as f64 * self.step()
    }

    pub fn points(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.n, |k| self.point(k))
    }

    /// Signed frequency index of DFT slot `j`: `0, 1, …, n/2−1, −n/2, …, −1`.
    pub fn signed_index(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Momentum of DFT slot `j`.
    pub fn momentum(&self, j: usize) -> f64 {
        self.signed_index(j) as f64 * self.momentum_step()
    }

    /// Momenta in DFT frequency order.
    pub fn momenta(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.n, |j| self.momentum(j))
    }

    /// Momenta sorted ascending, `−n/2·Δp … (n/2−1)·Δp`.
    pub fn momenta_sorted(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.n, |s| (s as f64 - (self.n / 2) as f64) * self.momentum_step())
    }

    /// DFT slot holding the `s`-th momentum in ascending order.
    pub fn dft_slot_of_sorted(&self, s: usize) -> usize {
        (s + self.n / 2) % self.n
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::shape(format!("length {}", self.n), format!("length {len}")));
        }
        Ok(())
    }
}

/// Builds a lattice of `n` points on a box of length `length` centred at `center`.
pub fn make_grid(n: usize, length: f64, center: f64) -> Result<Grid> {
    Grid::new(n, length, center)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

/// In-place unitary DFT (`1/√n` normalization) of a contiguous buffer.
pub(crate) fn unitary_fft_in_place(buf: &mut [C64], forward: bool) {
    let n = buf.len();
    fft_plan(n, forward).process(buf);
    let scale = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|x| *x *= scale);
}

/// Unitary DFT of every lane of `values` along `axis`.
pub(crate) fn unitary_fft_axis(values: &mut Array2<C64>, axis: usize, forward: bool) {
    let n = values.len_of(Axis(axis));
    let plan = fft_plan(n, forward);
    let scale = 1.0 / (n as f64).sqrt();
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for mut lane in values.lanes_mut(Axis(axis)) {
        buf.iter_mut().zip(lane.iter()).for_each(|(b, &v)| *b = v);
        plan.process(&mut buf);
        lane.iter_mut().zip(buf.iter()).for_each(|(v, &b)| *v = b * scale);
    }
}

/// Position amplitudes to momentum amplitudes (DFT order), norm-preserving
/// under counting measure.
pub fn to_momentum(values: ArrayView1<C64>, grid: &Grid) -> Result<Array1<C64>> {
    grid.check_len(values.len())?;
    let mut buf = values.to_vec();
    unitary_fft_in_place(&mut buf, true);
    Ok(Array1::from(buf))
}

/// Inverse of [`to_momentum`].
pub fn from_momentum(values: ArrayView1<C64>, grid: &Grid) -> Result<Array1<C64>> {
    grid.check_len(values.len())?;
    let mut buf = values.to_vec();
    unitary_fft_in_place(&mut buf, false);
    Ok(Array1::from(buf))
}

/// `Σ conj(f_k) g_k Δq`.
pub fn quadrature_inner(f: ArrayView1<C64>, g: ArrayView1<C64>, grid: &Grid) -> Result<C64> {
    grid.check_len(f.len())?;
    grid.check_len(g.len())?;
    let s: C64 = f.iter().zip(g.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(s * grid.step())
}

/// `Σ |f_k|² Δq`.
pub fn quadrature_norm_sqr(f: ArrayView1<C64>, grid: &Grid) -> f64 {
    f.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.step()
}

/// Normal reference measure `N(mean, variance)` on one environment coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMeasureSpec {
    mean: f64,
    variance: f64,
}

impl GaussianMeasureSpec {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() || !mean.is_finite() {
            return Err(Error::Config(format!(
                "gaussian measure needs finite mean and positive variance, got ({mean}, {variance})"
            )));
        }
        Ok(Self { mean, variance })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Lebesgue density `dν/dq` at `q`.
    pub fn density(&self, q: f64) -> f64 {
        let d = q - self.mean;
        (-0.5 * d * d / self.variance).exp() / (2.0 * PI * self.variance).sqrt()
    }

    pub fn density_on(&self, grid: &Grid) -> Array1<f64> {
        grid.points().mapv(|q| self.density(q))
    }

    /// `Σ |f_k|² ρ_ν(q_k) Δq`, the on-grid `L²(ν)` norm squared.
    pub fn norm_sqr(&self, f: ArrayView1<C64>, grid: &Grid) -> Result<f64> {
        grid.check_len(f.len())?;
        let dens = self.density_on(grid);
        Ok(f.iter().zip(dens.iter()).map(|(z, d)| z.norm_sqr() * d).sum::<f64>() * grid.step())
    }
}

/// Unitary map `L²(ν) → L²(dq)`: `f ↦ f·√(dν/dq)`.
pub fn embed_gaussian(
    f: ArrayView1<C64>,
    spec: &GaussianMeasureSpec,
    grid: &Grid,
) -> Result<Array1<C64>> {
    grid.check_len(f.len())?;
    let dens = spec.density_on(grid);
    Ok(Array1::from_shape_fn(grid.n(), |k| f[k] * dens[k].sqrt()))
}

/// Inverse of [`embed_gaussian`]. Fails where the reference density
/// underflows to zero, since the map is not invertible there.
pub fn unembed_gaussian(
    g: ArrayView1<C64>,
    spec: &GaussianMeasureSpec,
    grid: &Grid,
) -> Result<Array1<C64>> {
    grid.check_len(g.len())?;
    let dens = spec.density_on(grid);
    if let Some(k) = dens.iter().position(|&d| d == 0.0) {
        return Err(Error::Domain(format!(
            "reference density vanishes at lattice point {k} (q = {}); shrink the box",
            grid.point(k)
        )));
    }
    Ok(Array1::from_shape_fn(grid.n(), |k| g[k] / dens[k].sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn four_point_grid() {
        let g = make_grid(4, 4.0, 0.0).unwrap();
        assert_eq!(g.points(), array![-2.0, -1.0, 0.0, 1.0]);
        assert_eq!(g.step(), 1.0);
        assert!((g.momentum_step() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_momenta_in_dft_order() {
        let g = make_grid(2, 2.0 * PI, 0.0).unwrap();
        let p = g.momenta();
        assert!((p[0] - 0.0).abs() < 1e-15);
        assert!((p[1] + 1.0).abs() < 1e-15);
        assert_eq!(g.momenta_sorted(), array![-1.0, 0.0]);
    }

    #[test]
    fn reciprocity() {
        for &(n, l) in &[(64usize, 20.0), (2, 0.1), (1024, 333.3), (32, 14.2)] {
            let g = make_grid(n, l, 1.5).unwrap();
            let r = g.step() * g.momentum_step() * n as f64;
            assert!((r - 2.0 * PI).abs() < 4.0 * f64::EPSILON * 2.0 * PI, "{n} {l}: {r}");
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(make_grid(6, 1.0, 0.0), Err(Error::Config(_))));
        assert!(matches!(make_grid(1, 1.0, 0.0), Err(Error::Config(_))));
        assert!(matches!(make_grid(8, 0.0, 0.0), Err(Error::Config(_))));
        assert!(matches!(make_grid(8, -2.0, 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn constant_maps_to_zero_momentum_delta() {
        let g = make_grid(16, 5.0, 0.0).unwrap();
        let v = Array1::from_elem(16, c(1.0 / 4.0));
        let m = to_momentum(v.view(), &g).unwrap();
        assert!((m[0] - c(1.0)).norm() < 1e-14);
        assert!(m.iter().skip(1).all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn plane_wave_maps_to_its_momentum() {
        let g = make_grid(32, 7.0, 0.3).unwrap();
        for j in [0usize, 3, 16, 31] {
            let pj = g.momentum(j);
            let wave = g.points().mapv(|q| C64::from_polar(1.0, pj * q));
            let m = to_momentum(wave.view(), &g).unwrap();
            // Direct DFT evaluation: only slot j survives, with modulus √n.
            for (i, z) in m.iter().enumerate() {
                let want = if i == j { (32f64).sqrt() } else { 0.0 };
                assert!((z.norm() - want).abs() < 1e-12, "slot {i} for wave {j}");
            }
        }
    }

    #[test]
    fn momentum_round_trip_and_norm() {
        let g = make_grid(64, 10.0, 0.0).unwrap();
        let v = Array1::from_shape_fn(64, |k| C64::new((k as f64 * 0.37).sin(), (k as f64).cos()));
        let m = to_momentum(v.view(), &g).unwrap();
        let back = from_momentum(m.view(), &g).unwrap();
        let n0: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let n1: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        assert!((n0 - n1).abs() / n0 < 1e-12);
        let err = (&back - &v).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12 * n0.sqrt());
    }

    #[test]
    fn length_mismatch() {
        let g = make_grid(8, 1.0, 0.0).unwrap();
        let v = Array1::from_elem(4, c(1.0));
        assert!(matches!(to_momentum(v.view(), &g), Err(Error::Shape { .. })));
        assert!(matches!(quadrature_inner(v.view(), v.view(), &g), Err(Error::Shape { .. })));
    }

    #[test]
    fn embedded_unit_function() {
        let g = make_grid(256, 20.0, 0.0).unwrap();
        let spec = GaussianMeasureSpec::new(0.0, 1.0).unwrap();
        let one = Array1::from_elem(256, c(1.0));
        let e = embed_gaussian(one.view(), &spec, &g).unwrap();
        assert!((quadrature_norm_sqr(e.view(), &g) - 1.0).abs() < 1e-9);
        let want = g.points().mapv(|q| ((-q * q / 2.0).exp() / (2.0 * PI).sqrt()).sqrt());
        assert!(e.iter().zip(want.iter()).all(|(a, b)| (a.re - b).abs() < 1e-15));
    }

    #[test]
    fn embed_round_trip_and_norm() {
        let g = make_grid(128, 16.0, 0.5).unwrap();
        let spec = GaussianMeasureSpec::new(0.5, 2.0).unwrap();
        let f = Array1::from_shape_fn(128, |k| C64::new(1.0 + 0.1 * k as f64, -0.05 * k as f64));
        let e = embed_gaussian(f.view(), &spec, &g).unwrap();
        let lhs = quadrature_norm_sqr(e.view(), &g);
        let rhs = spec.norm_sqr(f.view(), &g).unwrap();
        assert!((lhs - rhs).abs() / rhs < 1e-10);
        let back = unembed_gaussian(e.view(), &spec, &g).unwrap();
        let err = (&back - &f).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn hermite_one_embeds_to_first_excited_profile() {
        // h1(q) = q/σ is unit-norm in L²(N(0,σ²)); embedded it becomes the
        // first excited oscillator profile.
        let g = make_grid(512, 40.0, 0.0).unwrap();
        let sigma2: f64 = 1.5;
        let spec = GaussianMeasureSpec::new(0.0, sigma2).unwrap();
        let h1 = g.points().mapv(|q| c(q / sigma2.sqrt()));
        let norm_nu = spec.norm_sqr(h1.view(), &g).unwrap();
        assert!((norm_nu - 1.0).abs() < 1e-9);
        let e = embed_gaussian(h1.view(), &spec, &g).unwrap();
        assert!((quadrature_norm_sqr(e.view(), &g) - norm_nu).abs() < 1e-12);
        // closed form: (q/σ)·(2πσ²)^{-1/4} e^{-q²/4σ²}
        let want = g
            .points()
            .mapv(|q| q / sigma2.sqrt() * (2.0 * PI * sigma2).powf(-0.25) * (-q * q / (4.0 * sigma2)).exp());
        assert!(e.iter().zip(want.iter()).all(|(a, b)| (a.re - b).abs() < 1e-14));
        // odd profile: orthogonal to the embedded constant
        let one = embed_gaussian(Array1::from_elem(512, c(1.0)).view(), &spec, &g).unwrap();
        assert!(quadrature_inner(one.view(), e.view(), &g).unwrap().norm() < 1e-12);
    }

    #[test]
    fn unembed_fails_where_density_underflows() {
        let g = make_grid(64, 200.0, 0.0).unwrap();
        let spec = GaussianMeasureSpec::new(0.0, 1.0).unwrap();
        let v = Array1::from_elem(64, c(1.0));
        assert!(matches!(unembed_gaussian(v.view(), &spec, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn gaussian_overlap_matches_closed_form() {
        let g = make_grid(1024, 40.0, 0.0).unwrap();
        let s: f64 = 0.8;
        let packet = |a: f64| {
            g.points()
                .mapv(|q| c((2.0 * PI * s * s).powf(-0.25) * (-(q - a).powi(2) / (4.0 * s * s)).exp()))
        };
        for d in [0.0, 0.5, 1.7, 3.0] {
            let ov = quadrature_inner(packet(0.0).view(), packet(d).view(), &g).unwrap();
            let want = (-d * d / (8.0 * s * s)).exp();
            assert!((ov.re - want).abs() < 1e-6 && ov.im.abs() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn delta_functions_are_orthogonal() {
        let g = make_grid(8, 2.0, 0.0).unwrap();
        let mut a = Array1::from_elem(8, c(0.0));
        let mut b = a.clone();
        a[2] = c(1.0 / g.step().sqrt());
        b[5] = c(1.0 / g.step().sqrt());
        assert!((quadrature_inner(a.view(), a.view(), &g).unwrap() - c(1.0)).norm() < 1e-15);
        assert_eq!(quadrature_inner(a.view(), b.view(), &g).unwrap(), c(0.0));
    }

    #[test]
    fn sorted_momenta_map_to_dft_slots() {
        let g = make_grid(8, 3.0, 0.0).unwrap();
        let sorted = g.momenta_sorted();
        for s in 0..8 {
            assert!((g.momentum(g.dft_slot_of_sorted(s)) - sorted[s]).abs() < 1e-15);
        }
        assert!(sorted.windows(2).into_iter().all(|w| w[1] > w[0]));
    }
}
