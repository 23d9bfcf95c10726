//! Dense complex linear algebra helpers over `ndarray` storage.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::C64;

/// Eigendecomposition of a Hermitian matrix. Eigenvalues ascending, columns
/// of the returned matrix are the matching orthonormal eigenvectors.
pub fn eigh(m: ArrayView2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::shape(format!("square matrix"), format!("{r}x{c}")));
    }
    let n = r;
    let dm = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let eig = dm.try_symmetric_eigen(f64::EPSILON, 0).ok_or(Error::Eigen(n))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = Array1::from_shape_fn(n, |k| eig.eigenvalues[order[k]]);
    let vecs = Array2::from_shape_fn((n, n), |(i, k)| eig.eigenvectors[(i, order[k])]);
    Ok((vals, vecs))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: ArrayView2<C64>) -> Result<Array1<f64>> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::shape(format!("square matrix"), format!("{r}x{c}")));
    }
    let dm = DMatrix::from_fn(r, r, |i, j| m[[i, j]]);
    let eig = dm.try_symmetric_eigen(f64::EPSILON, 0).ok_or(Error::Eigen(r))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(Array1::from(vals))
}

/// `V · diag(f(λ)) · V†`.
pub fn spectral_apply(vals: &Array1<f64>, vecs: &Array2<C64>, f: impl Fn(f64) -> C64) -> Array2<C64> {
    let n = vals.len();
    let mut scaled = vecs.clone();
    for k in 0..n {
        let fk = f(vals[k]);
        scaled.column_mut(k).mapv_inplace(|z| z * fk);
    }
    scaled.dot(&adjoint(vecs.view()))
}

pub fn adjoint(m: ArrayView2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// `max |M − M†|`.
pub fn hermitian_residual(m: ArrayView2<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn frobenius(m: ArrayView2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: ArrayView2<C64>, b: ArrayView2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn eigh_reconstructs_hermitian() {
        let m = array![
            [C64::new(2.0, 0.0), C64::new(0.5, -1.0), C64::new(0.0, 0.3)],
            [C64::new(0.5, 1.0), C64::new(-1.0, 0.0), C64::new(0.2, 0.0)],
            [C64::new(0.0, -0.3), C64::new(0.2, 0.0), C64::new(0.7, 0.0)]
        ];
        let (vals, vecs) = eigh(m.view()).unwrap();
        assert!(vals.windows(2).into_iter().all(|w| w[0] <= w[1]));
        let back = spectral_apply(&vals, &vecs, |x| C64::new(x, 0.0));
        assert!(max_abs_diff(back.view(), m.view()) < 1e-13);
        let gram = adjoint(vecs.view()).dot(&vecs);
        assert!(max_abs_diff(gram.view(), Array2::eye(3).mapv(|x: f64| C64::new(x, 0.0)).view()) < 1e-13);
        assert!(eigvalsh(m.view()).unwrap().iter().zip(vals.iter()).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn non_square_is_a_shape_error() {
        let m = Array2::<C64>::zeros((2, 3));
        assert!(matches!(eigh(m.view()), Err(Error::Shape { .. })));
    }
}

/// Slope of the ordinary least-squares line through `(x, y)`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
