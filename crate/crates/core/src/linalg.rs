//! Dense eigensolver wrappers and small vector helpers.
//!
//! Storage is `nalgebra`; the symmetric / Hermitian eigensolves are delegated
//! to `faer`, which is several times faster at the (2n-1)-dimensional sizes
//! the search simulations reach.

use faer::{Mat, Side};
use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Eigensystem of a real symmetric matrix, eigenvalues ascending, eigenvectors
/// as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn sym_eigen(m: &DMatrix<f64>) -> Result<SymEigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::EigensolveFailure(format!("non-square {}x{}", n, m.ncols())));
    }
    let fm = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = fm
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::EigensolveFailure(format!("{e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let values: Vec<f64> = order.iter().map(|&k| s[k]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigensolveFailure("non-finite eigenvalue".into()));
    }
    let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok(SymEigen { values, vectors })
}

/// Eigenvalues (ascending) and eigenvectors of a complex Hermitian matrix.
pub fn herm_eigen(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = m.nrows();
    let fm = Mat::<faer::c64>::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = fm
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::EigensolveFailure(format!("{e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let values: Vec<f64> = order.iter().map(|&k| s[k].re).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok((values, vectors))
}

/// Re-orthonormalizes eigenvectors inside every cluster of eigenvalues closer
/// than `tol` (values must be sorted).
pub fn reorthonormalize_clusters(values: &[f64], vectors: &mut DMatrix<f64>, tol: f64) {
    let n = values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end] - values[end - 1]).abs() < tol {
            end += 1;
        }
        if end - start > 1 {
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for j in start..end {
                    for k in start..j {
                        let proj = vectors.column(k).dot(&vectors.column(j));
                        let ck = vectors.column(k).clone_owned();
                        vectors.column_mut(j).axpy(-proj, &ck, 1.0);
                    }
                    let norm = vectors.column(j).norm();
                    vectors.column_mut(j).scale_mut(1.0 / norm);
                }
            }
        }
        start = end;
    }
}

/// Flips each column so its largest-magnitude entry is positive. Ties within
/// 1e-12 resolve to the lowest index.
pub fn fix_signs(vectors: &mut DMatrix<f64>) {
    for j in 0..vectors.ncols() {
        let col = vectors.column(j);
        let max = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let pivot = col.iter().position(|v| v.abs() >= max - 1e-12).unwrap_or(0);
        if col[pivot] < 0.0 {
            vectors.column_mut(j).neg_mut();
        }
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_c(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_eigen_sorted_and_orthonormal() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let e = sym_eigen(&m).unwrap();
        let s2 = 2f64.sqrt();
        let expect = [2.0 - s2, 2.0, 2.0 + s2];
        for (a, b) in e.values.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let gram = e.vectors.transpose() * &e.vectors;
        assert!(max_abs(&(gram - DMatrix::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn hermitian_eigenvalues_of_pauli_y() {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        let m = DMatrix::from_row_slice(2, 2, &[z, -i, i, z]);
        let (vals, _) = herm_eigen(&m).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sign_convention_is_largest_entry_positive() {
        let mut m = DMatrix::from_row_slice(2, 2, &[0.6, -0.1, -0.8, 0.2]);
        fix_signs(&mut m);
        assert_eq!(m[(1, 0)], 0.8);
        assert_eq!(m[(1, 1)], 0.2);
    }

    #[test]
    fn sinc_limit() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(1e-9) - 1.0).abs() < 1e-15);
        assert!((sinc(std::f64::consts::PI)).abs() < 1e-15);
    }
}
