//! Phase-space (Wigner) representation on the lattice.
//!
//! The kernel is lifted to the half-step lattice by band-limited (zero-padded
//! spectral) interpolation, after which
//!
//! `W(q_k, p_j) = (Δq/2π) Σ_m ϱ(q_k + mΔq/2, q_k − mΔq/2) e^{−i p_j m Δq}`
//!
//! with `m ∈ [−n/2, n/2)`. The `m = −n/2` term is replaced by the mean of the
//! `±n/2` terms, which keeps `W` real and both lattice marginals exact.
//!
//! The characteristic function uses the dual lattice `u_a = aΔp`,
//! `v_b = bΔq`, `a, b ∈ [−n/2, n/2]`. It is the symplectic Fourier transform
//! of the table above, so the two routes to `W` agree to roundoff.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, Array4, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{fft_plan, Grid};
use crate::states::{CompositeState, DensityOperator};
use crate::C64;

/// Default cap on the number of entries of a joint four-dimensional table.
pub const JOINT_ENTRY_CAP: usize = 1 << 20;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct WignerTable {
    pub q: Array1<f64>,
    /// Ascending momenta.
    pub p: Array1<f64>,
    /// `values[[k, j]] = W(q_k, p_j)`.
    pub values: Array2<f64>,
}

impl WignerTable {
    pub fn dq(&self) -> f64 {
        self.q[1] - self.q[0]
    }

    pub fn dp(&self) -> f64 {
        self.p[1] - self.p[0]
    }

    /// `(Σ_j W Δp, Σ_k W Δq)`: position and momentum densities.
    pub fn marginals(&self) -> (Array1<f64>, Array1<f64>) {
        (self.values.sum_axis(Axis(1)) * self.dp(), self.values.sum_axis(Axis(0)) * self.dq())
    }

    /// `2π ΣΣ W·W′ ΔqΔp`, approximating `tr(ρσ)`.
    pub fn overlap(&self, other: &WignerTable) -> Result<f64> {
        if self.values.dim() != other.values.dim() {
            return Err(Error::shape(format!("{:?}", self.values.dim()), format!("{:?}", other.values.dim())));
        }
        Ok(2.0 * PI * (&self.values * &other.values).sum() * self.dq() * self.dp())
    }

    pub fn max_abs_diff(&self, other: &WignerTable) -> f64 {
        self.values.iter().zip(other.values.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Joint table indexed `[k₁, j₁, k₂, j₂]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointWignerTable {
    pub q1: Array1<f64>,
    pub p1: Array1<f64>,
    pub q2: Array1<f64>,
    pub p2: Array1<f64>,
    pub values: Array4<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicTable {
    pub u: Array1<f64>,
    pub v: Array1<f64>,
    /// `values[[a, b]] = χ(u_a, v_b)`.
    pub values: Array2<C64>,
}

fn require_even(grid: &Grid) -> Result<()> {
    if grid.n() < 2 {
        return Err(Error::Domain("phase-space tables need at least two lattice points".into()));
    }
    Ok(())
}

/// Band-limited interpolation of a periodic lattice function onto the grid of
/// twice the density; even samples reproduce the input.
pub fn interpolate_half_step(values: ArrayView1<C64>) -> Array1<C64> {
    let n = values.len();
    let mut spec: Vec<C64> = values.to_vec();
    fft_plan(n, true).process(&mut spec);
    let mut padded = vec![ZERO; 2 * n];
    for (i, &c) in spec.iter().enumerate() {
        if i < n / 2 {
            padded[i] = c;
        } else if i == n / 2 {
            padded[i] = c * 0.5;
            padded[2 * n - i] = c * 0.5;
        } else {
            padded[n + i] = c;
        }
    }
    fft_plan(2 * n, false).process(&mut padded);
    Array1::from_iter(padded.into_iter().map(|z| z / n as f64))
}

fn interpolate_axis(values: &Array2<C64>, axis: usize) -> Array2<C64> {
    let mut shape = [values.nrows(), values.ncols()];
    shape[axis] *= 2;
    let mut out = Array2::zeros(shape);
    for (lane, mut dst) in values.lanes(Axis(axis)).into_iter().zip(out.lanes_mut(Axis(axis))) {
        dst.assign(&interpolate_half_step(lane));
    }
    out
}

/// Kernel on the half-step lattice, `I K Iᵀ`.
pub fn fine_kernel(kernel: ArrayView2<C64>) -> Array2<C64> {
    interpolate_axis(&interpolate_axis(&kernel.to_owned(), 0), 1)
}

fn fold(x: i64, n: usize) -> usize {
    x.rem_euclid(n as i64) as usize
}

/// Signed offsets contributing to DFT slot `s`; the Nyquist slot takes the
/// mean of both ends.
fn offsets(s: usize, n: usize) -> ([i64; 2], usize) {
    let h = (n / 2) as i64;
    if s as i64 == h {
        ([-h, h], 2)
    } else if (s as i64) < h {
        ([s as i64, 0], 1)
    } else {
        ([s as i64 - n as i64, 0], 1)
    }
}

fn sorted_from_dft<'a>(row: &'a [C64], grid: &Grid) -> impl Iterator<Item = f64> + 'a {
    let grid = *grid;
    (0..row.len()).map(move |s| row[grid.dft_slot_of_sorted(s)].re)
}

/// Discrete Wigner function of a density operator.
pub fn wigner_from_density(rho: &DensityOperator) -> Result<WignerTable> {
    wigner_on(rho, 1)
}

/// The same transform evaluated at every half-step position (`2n` rows). On
/// this lattice the quadrature `2π ΣΣ W·W′ ΔqΔp` reproduces `tr(ρσ)` without
/// the aliasing that the coarse rows incur.
pub fn wigner_half_step(rho: &DensityOperator) -> Result<WignerTable> {
    wigner_on(rho, 2)
}

fn wigner_on(rho: &DensityOperator, refine: usize) -> Result<WignerTable> {
    let grid = *rho.grid();
    require_even(&grid)?;
    let n = grid.n();
    let kf = fine_kernel(rho.kernel());
    let scale = grid.step() / (2.0 * PI);
    let rows: Vec<Vec<f64>> = (0..refine * n)
        .into_par_iter()
        .map(|k| {
            let c = (2 / refine * k) as i64;
            let mut a: Vec<C64> = (0..n)
                .map(|s| {
                    let (ms, cnt) = offsets(s, n);
                    let sum: C64 = ms[..cnt].iter().map(|&m| kf[[fold(c + m, 2 * n), fold(c - m, 2 * n)]]).sum();
                    sum / cnt as f64
                })
                .collect();
            fft_plan(n, true).process(&mut a);
            sorted_from_dft(&a, &grid).map(|w| w * scale).collect()
        })
        .collect();
    let values = Array2::from_shape_fn((refine * n, n), |(k, j)| rows[k][j]);
    let h = grid.step() / refine as f64;
    let q = Array1::from_shape_fn(refine * n, |k| grid.origin() + k as f64 * h);
    Ok(WignerTable { q, p: grid.momenta_sorted(), values })
}

pub fn wigner_from_state(grid: &Grid, psi: ArrayView1<C64>) -> Result<WignerTable> {
    wigner_from_density(&DensityOperator::pure(*grid, psi)?)
}

/// Four-dimensional Wigner function of the composite pure state, refusing
/// tables above `cap` entries.
pub fn joint_wigner(phi: &CompositeState, cap: usize) -> Result<JointWignerTable> {
    let (g1, g2) = (*phi.grid1(), *phi.grid2());
    require_even(&g1)?;
    require_even(&g2)?;
    let (n1, n2) = phi.dims();
    let entries = (n1 * n2).saturating_mul(n1 * n2);
    if entries > cap {
        return Err(Error::Resource { what: "joint Wigner table", requested: entries, cap });
    }
    let ff = interpolate_axis(&interpolate_axis(&phi.amplitudes().to_owned(), 0), 1);
    let scale = g1.step() * g2.step() / (4.0 * PI * PI);
    let blocks: Vec<Array2<f64>> = (0..n1 * n2)
        .into_par_iter()
        .map(|idx| {
            let (c1, c2) = (2 * (idx / n2) as i64, 2 * (idx % n2) as i64);
            let mut a = Array2::from_shape_fn((n1, n2), |(s1, s2)| {
                let (m1s, k1) = offsets(s1, n1);
                let (m2s, k2) = offsets(s2, n2);
                let mut sum = ZERO;
                for &m1 in &m1s[..k1] {
                    for &m2 in &m2s[..k2] {
                        sum += ff[[fold(c1 + m1, 2 * n1), fold(c2 + m2, 2 * n2)]]
                            * ff[[fold(c1 - m1, 2 * n1), fold(c2 - m2, 2 * n2)]].conj();
                    }
                }
                sum / (k1 * k2) as f64
            });
            fft2(&mut a);
            Array2::from_shape_fn((n1, n2), |(s1, s2)| {
                a[[g1.dft_slot_of_sorted(s1), g2.dft_slot_of_sorted(s2)]].re * scale
            })
        })
        .collect();
    let mut values = Array4::zeros((n1, n1, n2, n2));
    for (idx, b) in blocks.iter().enumerate() {
        let (k1, k2) = (idx / n2, idx % n2);
        for j1 in 0..n1 {
            for j2 in 0..n2 {
                values[[k1, j1, k2, j2]] = b[[j1, j2]];
            }
        }
    }
    Ok(JointWignerTable { q1: g1.points(), p1: g1.momenta_sorted(), q2: g2.points(), p2: g2.momenta_sorted(), values })
}

fn fft2(a: &mut Array2<C64>) {
    for axis in 0..2 {
        let n = a.len_of(Axis(axis));
        let plan = fft_plan(n, true);
        let mut buf = vec![ZERO; n];
        for mut lane in a.lanes_mut(Axis(axis)) {
            buf.iter_mut().zip(lane.iter()).for_each(|(b, &v)| *b = v);
            plan.process(&mut buf);
            lane.assign(&ArrayView1::from(&buf[..]));
        }
    }
}

/// Integrates out the environment phase-space coordinates.
pub fn marginalize_wigner(joint: &JointWignerTable) -> WignerTable {
    let dq2 = joint.q2[1] - joint.q2[0];
    let dp2 = joint.p2[1] - joint.p2[0];
    let values = joint.values.sum_axis(Axis(3)).sum_axis(Axis(2)) * (dq2 * dp2);
    WignerTable { q: joint.q1.clone(), p: joint.p1.clone(), values }
}

/// Position and momentum densities of a table.
pub fn wigner_marginals(table: &WignerTable) -> (Array1<f64>, Array1<f64>) {
    table.marginals()
}

/// `χ(u_a, v_b) = Σ_k Δq e^{−i u_a q_k} ϱ(q_k − v_b/2, q_k + v_b/2)` on the dual
/// lattice, i.e. `tr(ρ e^{−i(uq̂ + vp̂)})`.
pub fn weyl_characteristic(rho: &DensityOperator) -> Result<CharacteristicTable> {
    let grid = *rho.grid();
    require_even(&grid)?;
    let n = grid.n();
    let h = (n / 2) as i64;
    let kf = fine_kernel(rho.kernel());
    let q = grid.points();
    let dq = grid.step();
    let u = Array1::from_shape_fn(n + 1, |a| (a as i64 - h) as f64 * grid.momentum_step());
    let v = Array1::from_shape_fn(n + 1, |b| (b as i64 - h) as f64 * dq);
    let rows: Vec<Vec<C64>> = (0..=n)
        .into_par_iter()
        .map(|ai| {
            (0..=n)
                .map(|bi| {
                    let b = bi as i64 - h;
                    (0..n)
                        .map(|k| {
                            let c = 2 * k as i64;
                            C64::from_polar(dq, -u[ai] * q[k]) * kf[[fold(c - b, 2 * n), fold(c + b, 2 * n)]]
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    let values = Array2::from_shape_fn((n + 1, n + 1), |(a, b)| rows[a][b]);
    Ok(CharacteristicTable { u, v, values })
}

/// `tr(ρ D)` at an arbitrary point, with
/// `D = e^{−iuq̂/2} e^{−ivp̂} e^{−iuq̂/2}` built from lattice FFTs.
pub fn characteristic_at(rho: &DensityOperator, u: f64, v: f64) -> C64 {
    let grid = rho.grid();
    let n = grid.n();
    let half: Vec<C64> = grid.points().iter().map(|&q| C64::from_polar(1.0, -u * q / 2.0)).collect();
    let shift: Vec<C64> = grid.momenta().iter().map(|&p| C64::from_polar(1.0, -v * p)).collect();
    let fwd = fft_plan(n, true);
    let inv = fft_plan(n, false);
    let k = rho.kernel();
    let mut trace = ZERO;
    let mut col = vec![ZERO; n];
    for x in 0..n {
        col.iter_mut().zip(k.column(x)).zip(&half).for_each(|((c, &kv), &h)| *c = kv * h);
        fwd.process(&mut col);
        col.iter_mut().zip(&shift).for_each(|(c, &s)| *c *= s);
        inv.process(&mut col);
        trace += col[x] * half[x] / n as f64;
    }
    trace * grid.step()
}

/// Inverse symplectic Fourier transform of a characteristic table, with half
/// weights on the edges of the dual lattice.
pub fn wigner_from_characteristic(chi: &CharacteristicTable, grid: &Grid) -> Result<WignerTable> {
    let n = grid.n();
    if chi.values.dim() != (n + 1, n + 1) {
        return Err(Error::shape(format!("({}, {})", n + 1, n + 1), format!("{:?}", chi.values.dim())));
    }
    let w = |i: usize| if i == 0 || i == n { 0.5 } else { 1.0 };
    let q = grid.points();
    let p = grid.momenta_sorted();
    let du = grid.momentum_step();
    let dv = grid.step();
    let scale = du * dv / (4.0 * PI * PI);
    // partial sums over u first: g[k, b] = Σ_a w_a χ(u_a, v_b) e^{i u_a q_k}
    let g = Array2::from_shape_fn((n, n + 1), |(k, b)| {
        (0..=n).map(|a| chi.values[[a, b]] * C64::from_polar(w(a), chi.u[a] * q[k])).sum::<C64>()
    });
    let values = Array2::from_shape_fn((n, n), |(k, j)| {
        let s: C64 = (0..=n).map(|b| g[[k, b]] * C64::from_polar(w(b), chi.v[b] * p[j])).sum();
        s.re * scale
    });
    Ok(WignerTable { q, p, values })
}
