//! Discriminant matrices D(P)_xy = sqrt(p_xy p_yx) and their eigensystems.

use nalgebra::{DMatrix, DVector, DVectorView};
use serde::{Deserialize, Serialize};

use crate::chain::{interpolated_matrix, stationary_interpolated, StochasticChain};
use crate::config;
use crate::error::{Error, Result};
use crate::linalg::{fix_signs, reorthonormalize_clusters, sym_eigen};

/// A discriminant matrix with its full eigensystem, eigenvalues ascending.
///
/// The last eigenvector is the principal one, sqrt(pi(s)), with positive
/// entries. Other eigenvectors have their largest-magnitude entry positive.
#[derive(Debug, Clone)]
pub struct DiscriminantSpectrum {
    pub d: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub gap: f64,
    pub s_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumExport {
    pub eigenvalues: Vec<f64>,
    pub gap: f64,
}

impl DiscriminantSpectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> DVectorView<'_, f64> {
        self.eigenvectors.column(i)
    }

    pub fn principal(&self) -> DVectorView<'_, f64> {
        self.eigenvectors.column(self.n() - 1)
    }

    pub fn export(&self) -> SpectrumExport {
        SpectrumExport { eigenvalues: self.eigenvalues.clone(), gap: self.gap }
    }

    /// max |D - sum_i lambda_i v_i v_i^T|.
    pub fn reconstruction_error(&self) -> f64 {
        let v = &self.eigenvectors;
        let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * self.eigenvalues[j]);
        (scaled * v.transpose() - &self.d).amax()
    }

    /// max |V^T V - I|.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.n();
        (self.eigenvectors.tr_mul(&self.eigenvectors) - DMatrix::identity(n, n)).amax()
    }
}

pub fn discriminant_matrix(p: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    DMatrix::from_fn(n, n, |x, y| {
        if x == y {
            p[(x, x)]
        } else {
            (p[(x, y)] * p[(y, x)]).sqrt()
        }
    })
}

/// Eigensystem of an arbitrary symmetric discriminant-like matrix with the
/// crate's ordering and sign conventions. The top vector is flipped to have a
/// positive sum.
pub fn spectrum_of(d: DMatrix<f64>, s_value: f64) -> Result<DiscriminantSpectrum> {
    let eig = sym_eigen(&d)?;
    let mut vectors = eig.vectors;
    let values = eig.values;
    reorthonormalize_clusters(&values, &mut vectors, config::DEGENERACY_TOL);
    fix_signs(&mut vectors);
    let n = values.len();
    if vectors.column(n - 1).sum() < 0.0 {
        vectors.column_mut(n - 1).neg_mut();
    }
    let gap = if n >= 2 { values[n - 1] - values[n - 2] } else { 0.0 };
    Ok(DiscriminantSpectrum { d, eigenvalues: values, eigenvectors: vectors, gap, s_value })
}

/// D(P(s)) and its eigensystem. `s = 0` gives the base chain.
pub fn discriminant(chain: &StochasticChain, s: f64) -> Result<DiscriminantSpectrum> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::SRange(s));
    }
    let d = if s == 0.0 {
        discriminant_matrix(chain.p())
    } else {
        chain.require_marked()?;
        discriminant_matrix(&interpolated_matrix(chain, s))
    };
    let spec = spectrum_of(d, s)?;
    let top = spec.eigenvalues[spec.n() - 1];
    if (top - 1.0).abs() > config::TOP_EIGENVALUE_TOL {
        return Err(Error::EigensolveFailure(format!(
            "top discriminant eigenvalue {top} differs from 1"
        )));
    }
    Ok(spec)
}

/// sqrt(pi), the eigenvalue-1 eigenvector of D(P).
pub fn principal_vector(chain: &StochasticChain) -> DVector<f64> {
    let v = DVector::from_iterator(chain.n(), chain.pi().iter().map(|p| p.sqrt()));
    debug_assert!({
        let d = discriminant_matrix(chain.p());
        (&d * &v - &v).amax() <= 1e-9
    });
    v
}

/// The split sqrt(pi(s)) = cos(theta) |U> + sin(theta) |M>.
#[derive(Debug, Clone)]
pub struct MarkedDecomposition {
    pub u_vec: DVector<f64>,
    pub m_vec: DVector<f64>,
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub s_value: f64,
}

impl MarkedDecomposition {
    pub fn principal(&self) -> DVector<f64> {
        &self.u_vec * self.cos_theta + &self.m_vec * self.sin_theta
    }
}

/// |U> restricted to unmarked nodes, sqrt(pi_x / (1 - p_M)).
pub fn unmarked_state(chain: &StochasticChain) -> Result<DVector<f64>> {
    chain.require_marked()?;
    let rest = 1.0 - chain.p_m();
    if chain.marked().len() == chain.n() || rest <= 0.0 {
        return Err(Error::EmptyUnmarkedSet);
    }
    Ok(DVector::from_fn(chain.n(), |x, _| {
        if chain.is_marked(x) {
            0.0
        } else {
            (chain.pi()[x] / rest).sqrt()
        }
    }))
}

pub fn marked_decomposition(chain: &StochasticChain, s: f64) -> Result<MarkedDecomposition> {
    let u_vec = unmarked_state(chain)?;
    let pi_s = stationary_interpolated(chain, s)?;
    let p_m = chain.p_m();
    let m_vec = DVector::from_fn(chain.n(), |x, _| {
        if chain.is_marked(x) {
            (chain.pi()[x] / p_m).sqrt()
        } else {
            0.0
        }
    });
    let norm = 1.0 - s * (1.0 - p_m);
    let cos_theta = ((1.0 - s) * (1.0 - p_m) / norm).sqrt();
    let sin_theta = (p_m / norm).sqrt();
    debug_assert!((pi_s.p_m - sin_theta * sin_theta).abs() < 1e-12);
    Ok(MarkedDecomposition { u_vec, m_vec, cos_theta, sin_theta, s_value: s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{make_lazy, validate_chain};

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        let n = rows.len();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    fn lazy_complete(n: usize) -> StochasticChain {
        let off = 1.0 / (n as f64 - 1.0);
        let p = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { off });
        make_lazy(&crate::chain::validate_chain_allow_periodic(p, &[0]).unwrap())
    }

    #[test]
    fn symmetric_chain_discriminant_is_p() {
        let c = validate_chain(m(&[&[0.5, 0.3, 0.2], &[0.3, 0.4, 0.3], &[0.2, 0.3, 0.5]]), &[]).unwrap();
        let spec = discriminant(&c, 0.0).unwrap();
        assert_eq!(spec.d, *c.p());
    }

    #[test]
    fn biased_two_node_discriminant() {
        let c = validate_chain(m(&[&[0.5, 0.5], &[0.75, 0.25]]), &[]).unwrap();
        let spec = discriminant(&c, 0.0).unwrap();
        assert!((spec.d[(0, 1)] - 0.375f64.sqrt()).abs() < 1e-15);
        assert!((spec.d[(0, 1)] - 0.612372).abs() < 1e-6);
        let v = principal_vector(&c);
        assert!((v[0] - 0.6f64.sqrt()).abs() < 1e-12 && (v[1] - 0.4f64.sqrt()).abs() < 1e-12);
        assert!((spec.principal() - &v).amax() < 1e-9);
    }

    #[test]
    fn lazy_k4_spectrum() {
        let spec = discriminant(&lazy_complete(4), 0.0).unwrap();
        let expect = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0];
        for (a, b) in spec.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((spec.gap - 2.0 / 3.0).abs() < 1e-12);
        assert!(spec.orthonormality_error() < 1e-12);
        assert!(spec.reconstruction_error() < 1e-12);
        assert!(spec.principal().iter().all(|&x| (x - 0.5).abs() < 1e-12));
    }

    #[test]
    fn decomposition_at_zero_and_s_star() {
        let c = lazy_complete(8);
        let p_m = c.p_m();
        let d0 = marked_decomposition(&c, 0.0).unwrap();
        assert!((d0.cos_theta - (1.0 - p_m).sqrt()).abs() < 1e-15);
        assert!((d0.sin_theta - p_m.sqrt()).abs() < 1e-15);
        let s_star = 1.0 - p_m / (1.0 - p_m);
        let ds = marked_decomposition(&c, s_star).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((ds.cos_theta - h).abs() < 1e-12 && (ds.sin_theta - h).abs() < 1e-12);
        let spec = discriminant(&c, s_star).unwrap();
        assert!((spec.principal() - ds.principal()).amax() < 1e-10);
    }

    #[test]
    fn two_node_half_mass_split() {
        let c = validate_chain(m(&[&[0.75, 0.25], &[0.25, 0.75]]), &[1]).unwrap();
        let d = marked_decomposition(&c, 0.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.cos_theta - h).abs() < 1e-15 && (d.sin_theta - h).abs() < 1e-15);
        assert_eq!(d.u_vec.as_slice(), &[1.0, 0.0]);
        assert_eq!(d.m_vec.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn empty_marked_set_rejected() {
        let c = validate_chain(m(&[&[0.75, 0.25], &[0.25, 0.75]]), &[]).unwrap();
        assert!(matches!(marked_decomposition(&c, 0.0), Err(Error::EmptyMarkedSet)));
    }

    #[test]
    fn export_is_json() {
        let spec = discriminant(&lazy_complete(4), 0.0).unwrap();
        let text = serde_json::to_string(&spec.export()).unwrap();
        assert!(text.starts_with("{\"eigenvalues\":["));
        assert!(text.contains("\"gap\":"));
    }
}
