//! Thin helpers over `faer` for the dense kernels used across the crate.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `y = M x` for a general column-major matrix.
pub fn matvec(m: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(m.ncols(), x.len());
    let mut y = vec![0.0; m.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += m[(i, j)] * xj;
        }
    }
    y
}

/// `y = S x` for symmetric `S`, computed as column dot products.
pub fn sym_matvec(s: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(s.ncols(), x.len());
    (0..s.ncols()).map(|i| dot(s.col_as_slice(i), x)).collect()
}

pub fn frobenius(m: MatRef<'_, f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)] * m[(i, j)];
        }
    }
    acc.sqrt()
}

pub fn trace(m: MatRef<'_, f64>) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

pub fn is_symmetric(m: MatRef<'_, f64>) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    for j in 0..m.ncols() {
        for i in (j + 1)..m.nrows() {
            if m[(i, j)] != m[(j, i)] {
                return false;
            }
        }
    }
    true
}

/// Full symmetric eigendecomposition, eigenvalues in nondecreasing order.
pub fn sym_eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| {
        Error::Numeric(format!(
            "symmetric eigensolver failed on a {}x{} matrix (frobenius norm {:.6e}): {e:?}",
            m.nrows(),
            m.ncols(),
            frobenius(m.as_ref())
        ))
    })?;
    let vals = evd.S().column_vector().iter().copied().collect();
    Ok((vals, evd.U().to_owned()))
}

/// Eigenvalues only, nondecreasing.
pub fn sym_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower).map_err(|e| {
        Error::Numeric(format!(
            "symmetric eigenvalue solver failed on a {}x{} matrix: {e:?}",
            m.nrows(),
            m.ncols()
        ))
    })
}

/// Largest eigenvalue magnitude of a symmetric matrix.
pub fn spectral_radius(m: &Mat<f64>) -> Result<f64> {
    Ok(sym_eigenvalues(m)?
        .into_iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs())))
}
