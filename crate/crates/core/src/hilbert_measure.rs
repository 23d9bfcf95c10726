//! Gaussian measures on the system state space whose correlation operator is
//! a given density operator.
//!
//! With `T = Σ λ_k |e_k⟩⟨e_k|` (quadrature-orthonormal `e_k`), a sample is
//! `z = Σ √λ_k ξ_k e_k` with `ξ_k` circular complex normals, so `E[zz†] = T`.

use ndarray::{Array1, Array2};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Grid;
use crate::linalg;
use crate::states::{purity, DensityOperator, PSD_TOL};
use crate::unravel::Streams;
use crate::C64;

#[derive(Debug, Clone)]
pub struct GaussianStateMeasure {
    covariance: DensityOperator,
    /// Operator-scale eigenvalues, clipped at zero.
    eigenvalues: Array1<f64>,
    /// Counting-orthonormal eigenvectors (columns).
    eigenvectors: Array2<C64>,
}

impl GaussianStateMeasure {
    pub fn from_density(t: &DensityOperator) -> Result<Self> {
        t.validate()?;
        let (vals, vecs) = linalg::eigh(t.operator().view())?;
        if let Some(&bad) = vals.iter().find(|&&l| l < -PSD_TOL) {
            return Err(Error::InvalidDensity(format!("eigenvalue {bad:.3e} below -{PSD_TOL:e}")));
        }
        Ok(Self { covariance: t.clone(), eigenvalues: vals.mapv(|l| l.max(0.0)), eigenvectors: vecs })
    }

    pub fn covariance(&self) -> &DensityOperator {
        &self.covariance
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn grid(&self) -> &Grid {
        self.covariance.grid()
    }

    /// One draw from the stream `id`.
    pub fn sample_with(&self, streams: &Streams, id: u64) -> Array1<C64> {
        let mut rng = streams.stream(id);
        let n = self.eigenvalues.len();
        let amp = (0.5 / self.grid().step()).sqrt();
        let mut z = Array1::<C64>::zeros(n);
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let c = C64::new(re, im) * (l.sqrt() * amp);
            if l > 0.0 {
                z.scaled_add(c, &self.eigenvectors.column(k));
            }
        }
        z
    }
}

/// `N` independent samples, sample `j` drawn from stream `(time_index, j)`.
pub fn sample_states(measure: &GaussianStateMeasure, streams: &Streams, time_index: usize, n: usize) -> Vec<Array1<C64>> {
    (0..n).into_par_iter().map(|j| measure.sample_with(streams, Streams::stream_id(time_index, j))).collect()
}

/// `(1/N) Σ z z†` as a kernel on the lattice.
pub fn empirical_covariance(samples: &[Array1<C64>]) -> Result<Array2<C64>> {
    let first = samples.first().ok_or_else(|| Error::Domain("empty sample list".into()))?;
    let n = first.len();
    let mut k = Array2::<C64>::zeros((n, n));
    for z in samples {
        if z.len() != n {
            return Err(Error::shape(format!("length {n}"), format!("length {}", z.len())));
        }
        for i in 0..n {
            let zi = z[i];
            for j in 0..n {
                k[[i, j]] += zi * z[j].conj();
            }
        }
    }
    let inv = 1.0 / samples.len() as f64;
    k.mapv_inplace(|c| c * inv);
    Ok(k)
}

/// `‖K − K′‖_F·Δq` between a sampled kernel and the exact density.
pub fn covariance_residual(kernel: &Array2<C64>, exact: &DensityOperator) -> Result<f64> {
    if kernel.dim() != exact.kernel().dim() {
        return Err(Error::shape(format!("{:?}", exact.kernel().dim()), format!("{:?}", kernel.dim())));
    }
    Ok(linalg::frobenius((kernel - &exact.kernel()).view()) * exact.grid().step())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub time: f64,
    pub samples: usize,
    pub residual: f64,
    pub purity_exact: f64,
}

/// Empirical-vs-exact covariance residual at every time of a density trajectory.
pub fn track_evolution(trajectory: &[(f64, DensityOperator)], streams: &Streams, n: usize) -> Result<Vec<ResidualRow>> {
    trajectory
        .iter()
        .enumerate()
        .map(|(i, (t, rho))| {
            let m = GaussianStateMeasure::from_density(rho)?;
            let cov = empirical_covariance(&sample_states(&m, streams, i, n))?;
            Ok(ResidualRow { time: *t, samples: n, residual: covariance_residual(&cov, rho)?, purity_exact: purity(rho) })
        })
        .collect()
}
