//! Small wrappers around nalgebra's symmetric eigensolver.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigen-decomposition of a real symmetric matrix, rejecting non-finite input.
pub fn sym_eigen(m: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    if let Some(v) = m.iter().find(|v| !v.is_finite()) {
        return Err(Error::Eigensolve(format!("non-finite matrix entry {v}")));
    }
    let eig = m.symmetric_eigen();
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolve("eigenvalues did not converge".into()));
    }
    Ok(eig)
}

#[cfg(test)]
pub fn sym_eigenvalues(m: DMatrix<f64>) -> Result<nalgebra::DVector<f64>> {
    sym_eigen(m).map(|e| e.eigenvalues)
}

/// `f(M)` for symmetric `M`, via its eigenbasis.
pub fn sym_apply(m: DMatrix<f64>, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    let eig = sym_eigen(m)?;
    let q = &eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        scaled.column_mut(j).scale_mut(f(lambda));
    }
    Ok(&scaled * q.transpose())
}

/// `(M + M^T) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
