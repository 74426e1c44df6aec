//! The edge-walk search: evolve |v_n,0> under a Hamiltonian that decouples
//! the marked edge state |w,0>, then rotate onto |w,0> with the oracle
//! H_oracle = -H|w,0><w,0| - |w,0><w,0|H.
//!
//! Everything runs in the reduced basis of [`crate::edge`], rewritten with
//! |v_k,0>_perp replaced by i|v_k,0>_perp so that H is real symmetric.
//!
//! Two normalisations coexist. `mu` and `coupling_norm_formula` carry an
//! extra factor sqrt(2) relative to the eigenvalue-equation quantities:
//! `coupling_norm_formula = sqrt(2) * ||H|w,0>||`, and the root-bracketing
//! check uses `mu / sqrt(2)`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chain::{ensure_lazy, StochasticChain};
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::spectral::{discriminant, DiscriminantSpectrum};

pub const DEFAULT_C: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CGPrimeDiagnostics {
    pub n: usize,
    pub w: usize,
    /// a_i = <w|v_i>, eigenvalues ascending; the last entry is a_n.
    pub overlaps: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub epsilon_overlap: f64,
    pub mu: f64,
    pub coupling_norm_formula: f64,
    pub coupling_norm_numeric: f64,
    pub gap: f64,
    pub condition_ratio: f64,
    pub s1: f64,
    pub s2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCondition {
    pub ok: bool,
    pub c: f64,
    /// Smallest c for which the condition holds.
    pub minimal_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CGPrimeResult {
    pub t1: f64,
    pub t2: f64,
    pub nu_final: f64,
    pub nu_predicted: f64,
    pub success_probability: f64,
    pub amplification_rounds: u64,
    pub condition_ok: bool,
    pub condition: SpectralCondition,
    /// |<w_tilde|f_tilde>| just before the oracle step.
    pub overlap_before_oracle: f64,
    pub norm_drift: f64,
    /// ||H_search |w,0>||.
    pub decoupling_residual: f64,
    pub diagnostics: CGPrimeDiagnostics,
}

fn check_node(chain: &StochasticChain, w: usize) -> Result<()> {
    if w >= chain.n() {
        Err(Error::NodeOutOfRange { node: w, n: chain.n() })
    } else {
        Ok(())
    }
}

/// Search parameters of a (lazy) chain for marked node `w`.
pub fn diagnostics(chain: &StochasticChain, w: usize) -> Result<CGPrimeDiagnostics> {
    check_node(chain, w)?;
    let lazy = ensure_lazy(chain);
    let spec = discriminant(&lazy, 0.0)?;
    diagnostics_from(&spec, w)
}

pub fn diagnostics_from(spec: &DiscriminantSpectrum, w: usize) -> Result<CGPrimeDiagnostics> {
    let n = spec.n();
    let overlaps: Vec<f64> = (0..n).map(|i| spec.eigenvectors[(w, i)]).collect();
    let lambdas = spec.eigenvalues.clone();
    let (mut mu2, mut coupling2, mut numeric2, mut s1, mut s2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..n - 1 {
        let (a2, l) = (overlaps[k] * overlaps[k], lambdas[k]);
        let phi2 = 1.0 - l * l;
        if phi2 <= 1e-24 {
            return Err(Error::DegenerateTopEigenvalue { index: k + 1, value: l });
        }
        mu2 += 2.0 * a2 / phi2;
        coupling2 += 2.0 * a2 * phi2;
        numeric2 += a2 * phi2;
        s1 += a2 / (1.0 - l);
        s2 += a2 / (1.0 - l).powi(2);
    }
    let epsilon_overlap = overlaps[n - 1] * overlaps[n - 1];
    let mu = mu2.sqrt();
    let gap = spec.gap;
    Ok(CGPrimeDiagnostics {
        n,
        w,
        overlaps,
        lambdas,
        epsilon_overlap,
        mu,
        coupling_norm_formula: coupling2.sqrt(),
        coupling_norm_numeric: numeric2.sqrt(),
        gap,
        condition_ratio: epsilon_overlap.sqrt() / (gap.sqrt() * mu),
        s1,
        s2,
    })
}

/// sqrt(eps) <= c sqrt(gap) mu.
pub fn check_spectral_condition(diag: &CGPrimeDiagnostics, c: f64) -> SpectralCondition {
    SpectralCondition { ok: diag.condition_ratio <= c, c, minimal_c: diag.condition_ratio }
}

/// Rounds of amplitude amplification to boost overlap `nu` to about 1.
pub fn amplification_rounds(nu: f64) -> u64 {
    if !(nu > 0.0) {
        return u64::MAX;
    }
    let r = (PI / (4.0 * nu.min(1.0).asin()) - 0.5).ceil();
    r.max(0.0) as u64
}

/// Precomputed eigensystem of the reduced H_search.
pub struct SearchEvolution {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    /// Coefficients of |v_n,0> in the eigenbasis.
    start: DVector<f64>,
    /// |w,0> and H|w,0>/||H|w,0>|| in the reduced real basis.
    pub w: DVector<f64>,
    pub w_tilde: DVector<f64>,
    pub coupling: f64,
    pub decoupling_residual: f64,
}

impl SearchEvolution {
    pub fn new(spec: &DiscriminantSpectrum, w: usize) -> Result<Self> {
        let n = spec.n();
        let dim = 2 * n - 1;
        let mut h = DMatrix::zeros(dim, dim);
        let mut wv = DVector::zeros(dim);
        wv[0] = spec.eigenvectors[(w, n - 1)];
        for k in 1..n {
            let l = spec.eigenvalues[k - 1];
            if l.abs() > 1.0 - 1e-12 {
                return Err(Error::DegenerateTopEigenvalue { index: k, value: l });
            }
            let phi = (1.0 - l * l).sqrt();
            h[(2 * k, 2 * k - 1)] = phi;
            h[(2 * k - 1, 2 * k)] = phi;
            wv[2 * k - 1] = spec.eigenvectors[(w, k - 1)];
        }
        let hw = &h * &wv;
        let coupling = hw.norm();
        let h_search = &h - &hw * wv.transpose() - &wv * hw.transpose();
        let decoupling_residual = (&h_search * &wv).norm();
        let eig = sym_eigen(&h_search)?;
        let start = eig.vectors.row(0).transpose();
        Ok(Self {
            values: eig.values,
            vectors: eig.vectors,
            start,
            w: wv,
            w_tilde: hw / coupling,
            coupling,
            decoupling_residual,
        })
    }

    /// exp(-i H_search t)|v_n,0> as (real part, imaginary part).
    pub fn state(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        let cos = DVector::from_fn(self.values.len(), |j, _| self.start[j] * (self.values[j] * t).cos());
        let sin = DVector::from_fn(self.values.len(), |j, _| -self.start[j] * (self.values[j] * t).sin());
        (&self.vectors * cos, &self.vectors * sin)
    }

    /// |<w,0| exp(-i H_search t) |v_n,0>|.
    pub fn marked_overlap(&self, t: f64) -> f64 {
        let (re, im) = self.state(t);
        re.dot(&self.w).hypot(im.dot(&self.w))
    }
}

pub fn run_cg_prime(chain: &StochasticChain, w: usize) -> Result<CGPrimeResult> {
    run_cg_prime_with(chain, w, DEFAULT_C)
}

/// Runs the search for marked node `w`. A failed spectral condition is
/// reported in the result, not raised.
pub fn run_cg_prime_with(chain: &StochasticChain, w: usize, c: f64) -> Result<CGPrimeResult> {
    check_node(chain, w)?;
    if chain.marked().len() > 1 {
        return Err(Error::UnsupportedMultiMarked(chain.marked().len()));
    }
    let lazy = ensure_lazy(chain);
    let spec = discriminant(&lazy, 0.0)?;
    let diag = diagnostics_from(&spec, w)?;
    let condition = check_spectral_condition(&diag, c);
    if !condition.ok {
        log::warn!(
            "spectral condition fails at c = {c}: needs c >= {:.4}; result is outside the perturbative regime",
            condition.minimal_c
        );
    }
    let evo = SearchEvolution::new(&spec, w)?;
    let t1 = FRAC_PI_2 * diag.mu / diag.epsilon_overlap.sqrt();
    let t2 = FRAC_PI_2 / diag.coupling_norm_numeric;
    let (re, im) = evo.state(t1);
    let norm_drift = ((re.norm_squared() + im.norm_squared()).sqrt() - 1.0).abs();
    // exp(-i H_oracle t2) on span{w, w_tilde}: cos + i sin sigma_x
    let (ct, st) = ((evo.coupling * t2).cos(), (evo.coupling * t2).sin());
    let (w_re, w_im) = (re.dot(&evo.w), im.dot(&evo.w));
    let (wt_re, wt_im) = (re.dot(&evo.w_tilde), im.dot(&evo.w_tilde));
    let f_re = ct * w_re - st * wt_im;
    let f_im = ct * w_im + st * wt_re;
    let nu_final = f_re.hypot(f_im);
    Ok(CGPrimeResult {
        t1,
        t2,
        nu_final,
        nu_predicted: 1.0 / (diag.mu * diag.coupling_norm_formula),
        success_probability: nu_final * nu_final,
        amplification_rounds: amplification_rounds(nu_final),
        condition_ok: condition.ok,
        condition,
        overlap_before_oracle: wt_re.hypot(wt_im),
        norm_drift,
        decoupling_residual: evo.decoupling_residual,
        diagnostics: diag,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaBracketing {
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub delta0: f64,
    pub eta: f64,
    pub mu_lemma: f64,
    pub delta_prime: f64,
    pub lower: f64,
    pub upper: f64,
    pub within: bool,
    pub condition_ok: bool,
}

/// Finds the eigenvalues of H_search closest to zero and checks they lie in
/// [(1 - eta) delta0 (1 - tol), (1 + eta) delta0 (1 + tol)], tol = 0.05.
///
/// The secular function over the 2n-1 reduced eigenstates collapses, pairing
/// the +-phi_k terms, to F(d) = sum_k a_k^2 phi_k^2 / (phi_k^2 - d^2) - 1.
pub fn lemma_bracketing(chain: &StochasticChain, w: usize) -> Result<LemmaBracketing> {
    check_node(chain, w)?;
    let lazy = ensure_lazy(chain);
    let spec = discriminant(&lazy, 0.0)?;
    let diag = diagnostics_from(&spec, w)?;
    let n = diag.n;

    // cluster degenerate phi values so weights inside a cluster add up
    let mut terms: Vec<(f64, f64)> = (0..n - 1)
        .map(|k| ((1.0 - diag.lambdas[k].powi(2)).sqrt(), diag.overlaps[k].powi(2)))
        .collect();
    terms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    for (phi, a2) in terms {
        match clusters.last_mut() {
            Some(last) if (phi - last.0).abs() < 1e-9 => last.1 += a2,
            _ => clusters.push((phi, a2)),
        }
    }
    let delta_prime = clusters.first().map(|c| c.0).unwrap_or(0.0);
    let clusters: Vec<(f64, f64)> = clusters.into_iter().filter(|c| c.1 > 1e-24).collect();
    let phi_lo = clusters
        .first()
        .map(|c| c.0)
        .ok_or_else(|| Error::BisectionFailure("marked node has no weight off the principal vector".into()))?;
    let f = |d: f64| -> f64 {
        clusters.iter().map(|&(phi, a2)| a2 * phi * phi / (phi * phi - d * d)).sum::<f64>() - 1.0
    };
    let bisect = |mut lo: f64, mut hi: f64| -> Result<f64> {
        // F rises from -eps at 0 to +inf at +-phi_lo
        let (flo, fhi) = (f(lo), f(hi));
        if !(flo < 0.0 && fhi > 0.0) && !(flo > 0.0 && fhi < 0.0) {
            return Err(Error::BisectionFailure(format!("no sign change on [{lo:e}, {hi:e}]")));
        }
        let rising = flo < 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let edge = phi_lo * (1.0 - 1e-14);
    let delta_plus = bisect(0.0, edge)?;
    let delta_minus = bisect(-edge, 0.0)?;

    let mu_lemma = diag.mu / 2f64.sqrt();
    let a_n = diag.epsilon_overlap.sqrt();
    let delta0 = a_n / mu_lemma;
    let eta = diag.epsilon_overlap / (mu_lemma * mu_lemma * delta_prime * delta_prime);
    let lower = (1.0 - eta) * delta0 * 0.95;
    let upper = (1.0 + eta) * delta0 * 1.05;
    let within = [delta_plus, delta_minus].iter().all(|d| (lower..=upper).contains(&d.abs()));
    Ok(LemmaBracketing {
        delta_plus,
        delta_minus,
        delta0,
        eta,
        mu_lemma,
        delta_prime,
        lower,
        upper,
        within,
        condition_ok: check_spectral_condition(&diag, DEFAULT_C).ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{make_lazy, validate_chain, validate_chain_allow_periodic};

    fn lazy_complete(n: usize) -> StochasticChain {
        let off = 1.0 / (n as f64 - 1.0);
        let p = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { off });
        make_lazy(&validate_chain_allow_periodic(p, &[0]).unwrap())
    }

    #[test]
    fn lazy_k4_diagnostics() {
        let d = diagnostics(&lazy_complete(4), 2).unwrap();
        assert!((d.epsilon_overlap - 0.25).abs() < 1e-12);
        assert!((d.mu - (27.0f64 / 16.0).sqrt()).abs() < 1e-12);
        assert!((d.coupling_norm_formula - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((d.mu * d.coupling_norm_formula - 1.5).abs() < 1e-12);
        assert!((d.coupling_norm_formula - 2f64.sqrt() * d.coupling_norm_numeric).abs() < 1e-10);
        let c = check_spectral_condition(&d, 0.1);
        assert!(!c.ok);
        assert!((c.minimal_c - 0.471).abs() < 1e-3);
    }

    #[test]
    fn two_node_diagnostics() {
        let c = validate_chain(DMatrix::from_row_slice(2, 2, &[0.75, 0.25, 0.25, 0.75]), &[1]).unwrap();
        let d = diagnostics(&c, 1).unwrap();
        assert!((d.epsilon_overlap - 0.5).abs() < 1e-12);
        assert!((d.mu - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((d.mu * d.coupling_norm_formula - 1.0).abs() < 1e-12);
    }

    #[test]
    fn condition_passes_on_large_complete_graph() {
        let d = diagnostics(&lazy_complete(400), 0).unwrap();
        assert!((d.epsilon_overlap.sqrt() - 0.05).abs() < 1e-12);
        assert!(check_spectral_condition(&d, 0.1).ok);
    }

    #[test]
    fn evolution_starts_at_sqrt_eps_and_decouples() {
        let c = lazy_complete(16);
        let spec = discriminant(&c, 0.0).unwrap();
        let evo = SearchEvolution::new(&spec, 3).unwrap();
        assert!((evo.marked_overlap(0.0) - 0.25).abs() < 1e-12);
        assert!(evo.decoupling_residual < 1e-10);
    }

    #[test]
    fn run_on_complete_graph() {
        let r = run_cg_prime(&lazy_complete(64), 0).unwrap();
        assert!(r.t2 <= r.t1);
        assert!(r.norm_drift < 1e-9);
        assert!(r.nu_final > r.nu_predicted / 3.0 && r.nu_final < 3.0 * r.nu_predicted);
        assert_eq!(r.amplification_rounds, amplification_rounds(r.nu_final));
    }

    #[test]
    fn multi_marked_rejected() {
        let c = lazy_complete(8).with_marked(&[0, 1]).unwrap();
        assert!(matches!(run_cg_prime(&c, 0), Err(Error::UnsupportedMultiMarked(2))));
        assert!(matches!(diagnostics(&c, 8), Err(Error::NodeOutOfRange { node: 8, n: 8 })));
    }

    #[test]
    fn bracketing_on_two_node_chain() {
        let c = validate_chain(DMatrix::from_row_slice(2, 2, &[0.75, 0.25, 0.25, 0.75]), &[1]).unwrap();
        let b = lemma_bracketing(&c, 1).unwrap();
        // single term: a^2 phi^2 / (phi^2 - d^2) = 1  ->  d^2 = phi^2 (1 - a^2)
        let phi2 = 0.75;
        assert!((b.delta_plus - (phi2 * 0.5f64).sqrt()).abs() < 1e-12);
        assert!((b.delta_plus + b.delta_minus).abs() < 1e-12);
        assert!(b.delta_plus >= (1.0 - b.eta) * b.delta0 && b.delta_plus <= (1.0 + b.eta) * b.delta0);
    }

    #[test]
    fn amplification_round_count() {
        assert_eq!(amplification_rounds(1.0), 0);
        assert_eq!(amplification_rounds(0.5), 1);
        assert_eq!(amplification_rounds(0.1), 8);
    }

    #[test]
    fn bracketing_on_k400_matches_closed_form() {
        // all non-principal eigenvalues coincide, so F(d) = 0 gives d = phi sqrt(eps)
        let n = 400.0_f64;
        let lambda = 0.5 - 0.5 / (n - 1.0);
        let phi = (1.0 - lambda * lambda).sqrt();
        let eps = 1.0 / n;
        let b = lemma_bracketing(&lazy_complete(400), 0).unwrap();
        assert!((b.delta_plus - phi * eps.sqrt()).abs() < 1e-12);
        assert!((b.delta_minus + phi * eps.sqrt()).abs() < 1e-12);
        assert!((b.delta0 - phi * (eps / (1.0 - eps)).sqrt()).abs() < 1e-12);
        assert!(b.within && b.condition_ok);
        assert!(b.eta <= DEFAULT_C * DEFAULT_C);
    }
}
