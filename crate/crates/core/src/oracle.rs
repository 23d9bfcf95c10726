//! Brute-force reference paths: dense Hamiltonian diagonalization, dense
//! displacement operators, exhaustive unraveling and matrix partial traces.
//!
//! Nothing here calls into the FFT or split-operator code; only grid
//! construction and the Hermitian eigensolver are shared.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_dense_hamiltonian, HamiltonianSpec, Sign, DENSE_CAP};
use crate::lattice::Grid;
use crate::linalg;
use crate::states::{CompositeState, DensityOperator, ZERO_COLUMN};
use crate::C64;

/// Largest single-subsystem lattice the dense displacement oracle accepts.
pub const SUBSYSTEM_CAP: usize = 256;

/// Spectral decomposition of the dense composite Hamiltonian, reusable for
/// propagation to any time.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    grid1: Grid,
    grid2: Grid,
    energies: Array1<f64>,
    vectors: Array2<C64>,
}

impl ExactPropagator {
    pub fn new(spec: &HamiltonianSpec) -> Result<Self> {
        Self::with_cap(spec, DENSE_CAP)
    }

    pub fn with_cap(spec: &HamiltonianSpec, cap: usize) -> Result<Self> {
        let h = build_dense_hamiltonian(spec, cap)?;
        let (energies, vectors) = linalg::eigh(h.view())?;
        Ok(Self { grid1: *spec.grid1(), grid2: *spec.grid2(), energies, vectors })
    }

    pub fn energies(&self) -> &Array1<f64> {
        &self.energies
    }

    /// `e^{s·i·t·H} φ` evaluated exactly in the eigenbasis.
    pub fn propagate(&self, phi: &CompositeState, t: f64, sign: Sign) -> Result<CompositeState> {
        let (n1, n2) = (self.grid1.n(), self.grid2.n());
        if phi.dims() != (n1, n2) {
            return Err(Error::shape(format!("{n1}x{n2}"), format!("{:?}", phi.dims())));
        }
        let flat = Array1::from_iter(phi.amplitudes().iter().copied());
        let mut coeffs = linalg::adjoint(self.vectors.view()).dot(&flat);
        let s = sign.factor() * t;
        coeffs.iter_mut().zip(self.energies.iter()).for_each(|(c, &e)| *c *= C64::from_polar(1.0, s * e));
        let out = self.vectors.dot(&coeffs);
        let amps = Array2::from_shape_vec((n1, n2), out.to_vec()).expect("shape");
        Ok(CompositeState::from_parts_unchecked(self.grid1, self.grid2, amps))
    }
}

/// `e^{−itĤ} φ₀` (or `e^{+itĤ}` with [`Sign::Plus`]) by dense diagonalization.
pub fn exact_propagate(phi0: &CompositeState, spec: &HamiltonianSpec, t: f64, sign: Sign) -> Result<CompositeState> {
    ExactPropagator::new(spec)?.propagate(phi0, t, sign)
}

/// Unitary DFT matrix `F_jk = e^{−2πi jk/n}/√n`.
fn dft_matrix(n: usize) -> Array2<C64> {
    let s = 1.0 / (n as f64).sqrt();
    Array2::from_shape_fn((n, n), |(j, k)| C64::from_polar(s, -2.0 * PI * ((j * k) % n) as f64 / n as f64))
}

/// Momentum operator `F† diag(p) F` as a dense matrix.
pub fn momentum_matrix(grid: &Grid) -> Array2<C64> {
    let f = dft_matrix(grid.n());
    let mut dp = f.clone();
    for (j, mut row) in dp.rows_mut().into_iter().enumerate() {
        let p = grid.momentum(j);
        row.mapv_inplace(|z| z * p);
    }
    linalg::adjoint(f.view()).dot(&dp)
}

/// Dense `e^{−i(u q̂ + v p̂)}` on the lattice.
pub fn exact_displacement(grid: &Grid, u: f64, v: f64) -> Result<Array2<C64>> {
    let n = grid.n();
    if n > SUBSYSTEM_CAP {
        return Err(Error::Resource { what: "dense displacement", requested: n, cap: SUBSYSTEM_CAP });
    }
    let mut g = momentum_matrix(grid) * C64::new(v, 0.0);
    for (k, q) in grid.points().iter().enumerate() {
        g[[k, k]] += u * q;
    }
    let (vals, vecs) = linalg::eigh(g.view())?;
    Ok(linalg::spectral_apply(&vals, &vecs, |e| C64::from_polar(1.0, -e)))
}

/// `Σₗ wₗ |Ψ(l)⟩⟨Ψ(l)|` over every environment lattice point, with exact
/// weights `wₗ = ρ₂(q₂ₗ)Δq₂`.
pub fn enumerate_unraveling(phi: &CompositeState) -> DensityOperator {
    let (n1, n2) = phi.dims();
    let (dq1, dq2) = (phi.grid1().step(), phi.grid2().step());
    let amps = phi.amplitudes();
    let mut kernel = Array2::<C64>::zeros((n1, n1));
    for l in 0..n2 {
        let col = amps.column(l);
        let col_norm: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>() * dq1;
        if col_norm.sqrt() <= ZERO_COLUMN {
            continue;
        }
        let weight = col_norm * dq2;
        // |Ψ⟩⟨Ψ| for the normalized column, times its probability
        for i in 0..n1 {
            for j in 0..n1 {
                kernel[[i, j]] += col[i] * col[j].conj() / col_norm * weight;
            }
        }
    }
    DensityOperator::from_kernel_unchecked(*phi.grid1(), kernel).expect("shape")
}

/// Reduced density from the full composite projector `|φ⟩⟨φ|` by an explicit
/// matrix partial trace over the environment index.
pub fn partial_trace_dense(phi: &CompositeState) -> Result<DensityOperator> {
    let (n1, n2) = phi.dims();
    let dim = n1 * n2;
    if dim > DENSE_CAP {
        return Err(Error::Resource { what: "dense partial trace", requested: dim, cap: DENSE_CAP });
    }
    let flat: Vec<C64> = phi.amplitudes().iter().copied().collect();
    let full = Array2::from_shape_fn((dim, dim), |(a, b)| flat[a] * flat[b].conj());
    let dq2 = phi.grid2().step();
    let kernel = Array2::from_shape_fn((n1, n1), |(k, kp)| {
        (0..n2).map(|l| full[[k * n2 + l, kp * n2 + l]]).sum::<C64>() * dq2
    });
    DensityOperator::from_kernel_unchecked(*phi.grid1(), kernel)
}
