//! Search by phase randomization on the interpolated chain P(s*).
//!
//! Start in |v_n(0), 0>, evolve under H(s*) for a time drawn uniformly from
//! [0, T], then measure the first register. At s* = 1 - p_M/(1 - p_M) the
//! principal eigenvector of D(P(s*)) splits evenly between marked and
//! unmarked nodes.
//!
//! In the reduced basis the evolved state stays real:
//! |v_k,0> -> cos(phi_k t)|v_k,0> + sin(phi_k t)|v_k,0>_perp, so the time
//! average over [0, T] has a closed form in terms of
//! C(w) = sin(wT)/(wT) and S(w) = (1 - cos(wT))/(wT).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ensure_lazy, StochasticChain};
use crate::edge::{build_reduced, dense_parts, Completion, ReducedHamiltonian};
use crate::error::{Error, Result};
use crate::hitting::extended_hitting_time;
use crate::linalg::{herm_eigen, sinc, C64};
use crate::spectral::principal_vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ExactAverage,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRandomConfig {
    pub epsilon_precision: f64,
    /// Overrides the automatic T = sqrt(HT+/2) / epsilon.
    #[serde(default)]
    pub t: Option<f64>,
    pub mode: Mode,
    #[serde(default)]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for PhaseRandomConfig {
    fn default() -> Self {
        Self { epsilon_precision: 0.1, t: None, mode: Mode::ExactAverage, samples: 10_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRandomResult {
    pub s_star: f64,
    pub p_m: f64,
    pub t: f64,
    pub epsilon_precision: Option<f64>,
    pub mode: Mode,
    pub success_probability: f64,
    pub success_stderr: Option<f64>,
    pub samples: usize,
    /// |<v_n(s*)|v_n(0)>|^2
    pub alpha_n_sq: f64,
    /// |<v_n(s*)|M>|^2, 1/2 at s*.
    pub marked_overlap_sq: f64,
    pub dephasing_error: f64,
    /// alpha_n_sq * marked_overlap_sq - dephasing_error
    pub lower_bound: f64,
    pub ht_plus: f64,
    /// False when p_M >= 1/4 and the walk was skipped.
    pub evolved: bool,
    pub notice: Option<String>,
}

/// s* = 1 - p_M / (1 - p_M), defined for 0 < p_M <= 1/2.
pub fn s_star(p_m: f64) -> Result<f64> {
    if !(p_m > 0.0 && p_m <= 0.5) {
        return Err(Error::PMRange(p_m));
    }
    Ok((1.0 - p_m / (1.0 - p_m)).max(0.0))
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.25 {
        Ok(())
    } else {
        Err(Error::EpsilonRange(eps))
    }
}

/// The bare formula sqrt(HT+ / 2) / epsilon; only requires epsilon > 0.
pub fn required_time_from_ht_plus(ht_plus: f64, epsilon_precision: f64) -> Result<f64> {
    if !(epsilon_precision > 0.0) {
        return Err(Error::EpsilonRange(epsilon_precision));
    }
    Ok((ht_plus / 2.0).sqrt() / epsilon_precision)
}

/// T = sqrt(HT+ / 2) / epsilon for the lazy version of `chain`.
pub fn required_time(chain: &StochasticChain, epsilon_precision: f64) -> Result<f64> {
    check_epsilon(epsilon_precision)?;
    let lazy = ensure_lazy(chain);
    required_time_from_ht_plus(extended_hitting_time(&lazy)?, epsilon_precision)
}

/// Everything about H(s*) the success probabilities need.
pub struct PhaseRandomSetup {
    pub chain: StochasticChain,
    pub p_m: f64,
    pub s_star: f64,
    pub ht_plus: f64,
    pub reduced: ReducedHamiltonian,
    /// Coefficients of |v_n(0), 0> in the reduced basis.
    pub coeffs: DVector<f64>,
    /// Pi_M (x) I in the reduced basis.
    pub g: DMatrix<f64>,
}

impl PhaseRandomSetup {
    pub fn new(chain: &StochasticChain) -> Result<Self> {
        let lazy = ensure_lazy(chain);
        lazy.require_marked()?;
        let p_m = lazy.p_m();
        let s = s_star(p_m)?;
        let ht_plus = extended_hitting_time(&lazy)?;
        let reduced = build_reduced(&lazy, s)?;
        let coeffs = reduced.coefficients(&principal_vector(&lazy));
        let g = reduced.measurement_matrix(lazy.marked());
        Ok(Self { chain: lazy, p_m, s_star: s, ht_plus, reduced, coeffs, g })
    }

    pub fn alpha_n_sq(&self) -> f64 {
        self.coeffs[0] * self.coeffs[0]
    }

    /// The evolved state in the reduced basis at time t.
    pub fn state(&self, t: f64) -> DVector<f64> {
        let mut psi = DVector::zeros(self.reduced.dim);
        psi[0] = self.coeffs[0];
        for (i, &phi) in self.reduced.phis.iter().enumerate() {
            let k = i + 1;
            let c = self.coeffs[2 * k - 1];
            psi[2 * k - 1] = c * (phi * t).cos();
            psi[2 * k] = c * (phi * t).sin();
        }
        psi
    }

    /// Probability of measuring a marked node after evolving for time t.
    pub fn success_at(&self, t: f64) -> f64 {
        let psi = self.state(t);
        psi.dot(&(&self.g * &psi))
    }

    /// Success probability averaged over t uniform in [0, T], exactly.
    pub fn averaged(&self, t_max: f64) -> f64 {
        let c_avg = |w: f64| sinc(w * t_max);
        let s_avg = |w: f64| {
            let h = 0.5 * w * t_max;
            h.sin() * sinc(h)
        };
        let g = &self.g;
        let phis = &self.reduced.phis;
        let c0 = self.coeffs[0];
        let m = phis.len();
        let ck = |k: usize| self.coeffs[2 * k + 1];
        let (v, p) = (|k: usize| 2 * k + 1, |k: usize| 2 * k + 2);

        let mut total = c0 * c0 * g[(0, 0)];
        for k in 0..m {
            total += 2.0 * c0 * ck(k) * (c_avg(phis[k]) * g[(0, v(k))] + s_avg(phis[k]) * g[(0, p(k))]);
        }
        for k in 0..m {
            for l in 0..m {
                let (a, b) = (phis[k], phis[l]);
                let weight = ck(k) * ck(l);
                if weight == 0.0 {
                    continue;
                }
                let (cm, cp) = (c_avg(a - b), c_avg(a + b));
                let cc = 0.5 * (cm + cp);
                let ss = 0.5 * (cm - cp);
                // time average of cos(a t) sin(b t)
                let cs = 0.5 * (s_avg(a + b) - s_avg(a - b));
                total += weight * (cc * g[(v(k), v(l))] + ss * g[(p(k), p(l))] + 2.0 * cs * g[(v(k), p(l))]);
            }
        }
        total
    }

    /// The same average from the energy eigenbasis with weights
    /// exp(-i w T/2) sinc(w T/2), w = E_a - E_b.
    pub fn averaged_eigenbasis(&self, t_max: f64) -> f64 {
        let (energies, psi) = self.reduced.eigenbasis();
        let gc = self.g.map(|v| C64::new(v, 0.0));
        let gt = psi.adjoint() * gc * &psi;
        let alpha = psi.adjoint() * self.coeffs.map(|v| C64::new(v, 0.0));
        let mut total = C64::new(0.0, 0.0);
        for a in 0..energies.len() {
            for b in 0..energies.len() {
                let half = 0.5 * (energies[a] - energies[b]) * t_max;
                let w = C64::new(half.cos(), -half.sin()) * sinc(half);
                total += alpha[a] * alpha[b].conj() * w * gt[(b, a)];
            }
        }
        total.re
    }

    /// 2 sqrt(2 sum_{j,+-} |alpha_j alpha_n|^2 sin^2(phi_j T/2) / (phi_j T)^2).
    pub fn dephasing_error(&self, t_max: f64) -> f64 {
        let an2 = self.alpha_n_sq();
        let mut sum = 0.0;
        for (i, &phi) in self.reduced.phis.iter().enumerate() {
            let c2 = self.coeffs[2 * i + 1].powi(2);
            // sin^2(x/2)/x^2 = sinc(x/2)^2 / 4; two branches of weight c^2/2 each
            let q = sinc(0.5 * phi * t_max).powi(2) / 4.0;
            sum += c2 * an2 * q;
        }
        2.0 * (2.0 * sum).sqrt()
    }

    /// Upper envelope of [`Self::dephasing_error`] with sin^2 replaced by 1.
    pub fn dephasing_envelope(&self, t_max: f64) -> f64 {
        let sum: f64 = self
            .reduced
            .phis
            .iter()
            .enumerate()
            .map(|(i, &phi)| self.coeffs[2 * i + 1].powi(2) / (phi * phi * t_max * t_max))
            .sum();
        2.0 * 2f64.sqrt() * self.alpha_n_sq().sqrt() * sum.sqrt()
    }

    fn result(&self, t: f64, mode: Mode, success: f64, stderr: Option<f64>, samples: usize) -> PhaseRandomResult {
        let dephasing = self.dephasing_error(t);
        PhaseRandomResult {
            s_star: self.s_star,
            p_m: self.p_m,
            t,
            epsilon_precision: None,
            mode,
            success_probability: success,
            success_stderr: stderr,
            samples,
            alpha_n_sq: self.alpha_n_sq(),
            marked_overlap_sq: 0.5,
            dephasing_error: dephasing,
            lower_bound: 0.5 * self.alpha_n_sq() - dephasing,
            ht_plus: self.ht_plus,
            evolved: true,
            notice: None,
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParams(format!("evolution time must be finite and >= 0 (got {t})")))
    }
}

/// Result for p_M >= 1/4: measuring the stationary state already succeeds
/// with probability p_M.
fn stationary_only(chain: &StochasticChain, t: f64, mode: Mode) -> Result<PhaseRandomResult> {
    let lazy = ensure_lazy(chain);
    let p_m = lazy.p_m();
    let ht_plus = extended_hitting_time(&lazy)?;
    let notice = format!("p_M = {p_m} >= 1/4: measuring the stationary state directly, no evolution");
    log::info!("{notice}");
    Ok(PhaseRandomResult {
        s_star: if p_m <= 0.5 { s_star(p_m)? } else { 0.0 },
        p_m,
        t,
        epsilon_precision: None,
        mode,
        success_probability: p_m,
        success_stderr: None,
        samples: 0,
        alpha_n_sq: 1.0,
        marked_overlap_sq: p_m,
        dephasing_error: 0.0,
        lower_bound: p_m,
        ht_plus,
        evolved: false,
        notice: Some(notice),
    })
}

fn needs_evolution(chain: &StochasticChain) -> Result<bool> {
    chain.require_marked()?;
    Ok(chain.p_m() < 0.25)
}

/// Exact time-averaged success probability for evolution time T.
pub fn averaged_success(chain: &StochasticChain, t: f64) -> Result<PhaseRandomResult> {
    check_t(t)?;
    if !needs_evolution(chain)? {
        return stationary_only(chain, t, Mode::ExactAverage);
    }
    let setup = PhaseRandomSetup::new(chain)?;
    let success = setup.averaged(t);
    Ok(setup.result(t, Mode::ExactAverage, success, None, 0))
}

/// Monte-Carlo estimate: draw t uniformly from [0, T] per trajectory
/// (ChaCha8 stream = trajectory index) and average the marked probability.
pub fn sampled_run(chain: &StochasticChain, t: f64, samples: usize, seed: u64) -> Result<PhaseRandomResult> {
    check_t(t)?;
    if samples == 0 {
        return Err(Error::BadParams("samples must be >= 1".into()));
    }
    if !needs_evolution(chain)? {
        return stationary_only(chain, t, Mode::Sampled);
    }
    let setup = PhaseRandomSetup::new(chain)?;
    let (mean, stderr) = sample_mean(&setup, t, samples, seed);
    Ok(setup.result(t, Mode::Sampled, mean, Some(stderr), samples))
}

fn sample_mean(setup: &PhaseRandomSetup, t: f64, samples: usize, seed: u64) -> (f64, f64) {
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            setup.success_at(t * rng.random::<f64>())
        })
        .collect();
    let n = samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if samples > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, (var / n).sqrt())
}

pub fn dephasing_error(chain: &StochasticChain, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(PhaseRandomSetup::new(chain)?.dephasing_error(t))
}

/// Full run: schedules T from HT+ unless overridden, then averages exactly
/// or by sampling.
pub fn run_phase_random(chain: &StochasticChain, cfg: &PhaseRandomConfig) -> Result<PhaseRandomResult> {
    check_epsilon(cfg.epsilon_precision)?;
    let t = match cfg.t {
        Some(t) => t,
        None => required_time(chain, cfg.epsilon_precision)?,
    };
    let mut result = match cfg.mode {
        Mode::ExactAverage => averaged_success(chain, t)?,
        Mode::Sampled => sampled_run(chain, t, cfg.samples, cfg.seed)?,
    };
    result.epsilon_precision = Some(cfg.epsilon_precision);
    Ok(result)
}

/// Time-averaged success computed from the dense n^2 x n^2 H(s*) built with
/// the given completion of V. Validation only (n <= 64, practical n <= 16).
pub fn averaged_success_dense(chain: &StochasticChain, t: f64, completion: Completion) -> Result<f64> {
    check_t(t)?;
    let lazy = ensure_lazy(chain);
    lazy.require_marked()?;
    let n = lazy.n();
    let s = s_star(lazy.p_m())?;
    let parts = dense_parts(&lazy, s, completion)?;
    let (energies, u) = herm_eigen(&parts.hamiltonian())?;
    let pi = lazy.pi();
    let dim = n * n;
    let psi0 = DVector::from_fn(dim, |i, _| C64::new(if i % n == 0 { pi[i / n].sqrt() } else { 0.0 }, 0.0));
    let alpha = u.adjoint() * psi0;
    let rows: Vec<usize> = lazy.marked().iter().flat_map(|&x| (x * n)..(x * n + n)).collect();
    let b = u.select_rows(&rows);
    let gt = b.adjoint() * b;
    let mut total = C64::new(0.0, 0.0);
    for a in 0..dim {
        if alpha[a].norm() < 1e-300 {
            continue;
        }
        for bb in 0..dim {
            let half = 0.5 * (energies[a] - energies[bb]) * t;
            let w = C64::new(half.cos(), -half.sin()) * sinc(half);
            total += alpha[a] * alpha[bb].conj() * w * gt[(bb, a)];
        }
    }
    Ok(total.re)
}
