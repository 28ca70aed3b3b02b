use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub(crate) fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in i + 1..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Nearest positive semidefinite matrix in Frobenius norm (negative eigenvalues set to zero).
pub fn psd_project(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.amax().max(1.0);
    let asym = asymmetry(a);
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(project_symmetric(a))
}

/// Projection without the symmetry check; only the lower triangle is read.
pub(crate) fn project_symmetric(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    if n == 1 {
        return DMatrix::from_element(1, 1, a[(0, 0)].max(0.0));
    }
    let eig = a.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return a.clone();
    }
    let mut out = DMatrix::zeros(n, n);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 0.0 {
            let v = eig.eigenvectors.column(k);
            out.ger(l, &v, &v, 1.0);
        }
    }
    out
}

/// Eigenvalues of a symmetric matrix. nalgebra's QR iteration can return
/// infinities on some sparse 0/1 matrices; a diagonal shift avoids the bad
/// deflation path, and the full decomposition is the last resort.
pub(crate) fn symmetric_eigenvalues(m: &DMatrix<f64>) -> nalgebra::DVector<f64> {
    let finite = |v: &nalgebra::DVector<f64>| v.iter().all(|x| x.is_finite());
    let fast = m.clone().symmetric_eigenvalues();
    if finite(&fast) {
        return fast;
    }
    let k = m.nrows();
    let shift = 1.0 + m.diagonal().amax();
    let shifted = m + DMatrix::identity(k, k) * shift;
    let mut ev = shifted.clone().symmetric_eigenvalues();
    if !finite(&ev) {
        ev = shifted.symmetric_eigen().eigenvalues;
    }
    ev.add_scalar(-shift)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    symmetric_eigenvalues(m)
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
