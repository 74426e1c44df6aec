//! Hitting times from discriminant spectra, plus a random-walk oracle.
//!
//! Every spectral formula here uses |U>, the stationary state conditioned on
//! the unmarked set. The classical meaning is the expected number of steps to
//! reach M when the start node is drawn from pi restricted to unmarked nodes,
//! and that is what [`monte_carlo_hitting_time`] simulates.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{absorbing_matrix, StochasticChain};
use crate::config;
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::spectral::{discriminant, discriminant_matrix, unmarked_state, DiscriminantSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolatedPoint {
    pub s: f64,
    pub ht: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingReport {
    pub ht: f64,
    pub ht_s: Vec<InterpolatedPoint>,
    pub ht_plus: f64,
    pub p_m: f64,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub mc_samples: usize,
    pub seed: u64,
}

/// HT(P, M) from the eigensystem of D(P'), P' the absorbing chain.
pub fn hitting_time(chain: &StochasticChain) -> Result<f64> {
    let u = unmarked_state(chain)?;
    let d = discriminant_matrix(&absorbing_matrix(chain));
    let eig = sym_eigen(&d)?;
    let mut ht = 0.0;
    for (j, &lambda) in eig.values.iter().enumerate() {
        let overlap = eig.vectors.column(j).dot(&u);
        if lambda > 1.0 - config::ABSORBED_TOL {
            if overlap.abs() > 1e-8 {
                return Err(Error::EigensolveFailure(format!(
                    "absorbed eigenvector {j} overlaps |U> by {overlap:e}"
                )));
            }
            continue;
        }
        let denom = 1.0 - lambda;
        if denom < config::DENOMINATOR_TOL {
            return Err(Error::DegenerateDenominator(denom));
        }
        ht += overlap * overlap / denom;
    }
    Ok(ht)
}

/// sum_{j<n} <v_j(s)|U>^2 / (1 - lambda_j(s)) for an already computed spectrum.
pub fn interpolated_hitting_time_from(spec: &DiscriminantSpectrum, u: &DVector<f64>) -> Result<f64> {
    let n = spec.n();
    let mut ht = 0.0;
    for j in 0..n - 1 {
        let denom = 1.0 - spec.eigenvalues[j];
        if denom < config::DENOMINATOR_TOL {
            return Err(Error::DegenerateDenominator(denom));
        }
        let overlap = spec.vector(j).dot(u);
        ht += overlap * overlap / denom;
    }
    Ok(ht)
}

/// HT(s), the interpolated hitting time.
pub fn interpolated_hitting_time(chain: &StochasticChain, s: f64) -> Result<f64> {
    let u = unmarked_state(chain)?;
    let spec = discriminant(chain, s)?;
    interpolated_hitting_time_from(&spec, &u)
}

/// Converts HT(s) into HT+ using HT+ = HT(s) (1 - s(1 - p_M))^2 / p_M^2.
pub fn extended_from_interpolated(ht_s: f64, s: f64, p_m: f64) -> f64 {
    let k = 1.0 - s * (1.0 - p_m);
    ht_s * k * k / (p_m * p_m)
}

/// HT+ from HT(0), cross-checked at s = 0.5 and s = 0.9.
pub fn extended_hitting_time(chain: &StochasticChain) -> Result<f64> {
    let p_m = chain.p_m();
    let ht_plus = extended_from_interpolated(interpolated_hitting_time(chain, 0.0)?, 0.0, p_m);
    for s in [0.5, 0.9] {
        let other = extended_from_interpolated(interpolated_hitting_time(chain, s)?, s, p_m);
        let rel = (other - ht_plus).abs() / ht_plus;
        if rel > config::HT_IDENTITY_RTOL {
            return Err(Error::IdentityViolation(rel));
        }
    }
    Ok(ht_plus)
}

/// HT+ from HT(0) alone, without the cross-check.
pub fn extended_hitting_time_unchecked(chain: &StochasticChain) -> Result<f64> {
    let p_m = chain.p_m();
    Ok(interpolated_hitting_time(chain, 0.0)? / (p_m * p_m))
}

/// Cumulative transition table of one row, restricted to its support.
struct Row {
    targets: Vec<usize>,
    cumulative: Vec<f64>,
}

impl Row {
    fn sample(&self, u: f64) -> usize {
        let total = *self.cumulative.last().unwrap();
        let i = self.cumulative.partition_point(|&c| c <= u * total);
        self.targets[i.min(self.targets.len() - 1)]
    }
}

fn rows_of(chain: &StochasticChain) -> Vec<Row> {
    let p = chain.p();
    (0..chain.n())
        .map(|x| {
            let mut targets = Vec::new();
            let mut cumulative = Vec::new();
            let mut acc = 0.0;
            for y in 0..chain.n() {
                if p[(x, y)] > 0.0 {
                    acc += p[(x, y)];
                    targets.push(y);
                    cumulative.push(acc);
                }
            }
            Row { targets, cumulative }
        })
        .collect()
}

/// Mean and standard error of the number of steps until a marked node is hit,
/// starting from pi restricted to the unmarked set.
///
/// Trajectory `i` uses ChaCha8 stream `i` of `seed`, so the result does not
/// depend on how rayon schedules the work.
pub fn monte_carlo_hitting_time(chain: &StochasticChain, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::BadParams("samples must be >= 1".into()));
    }
    let u = unmarked_state(chain)?;
    let start = Row {
        targets: (0..chain.n()).filter(|&x| u[x] > 0.0).collect(),
        cumulative: u
            .iter()
            .filter(|&&v| v > 0.0)
            .scan(0.0, |acc, v| {
                *acc += v * v;
                Some(*acc)
            })
            .collect(),
    };
    let rows = rows_of(chain);
    let steps: Vec<u64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut x = start.sample(rng.random::<f64>());
            let mut count = 0u64;
            while !chain.is_marked(x) {
                x = rows[x].sample(rng.random::<f64>());
                count += 1;
            }
            count
        })
        .collect();
    let n = samples as f64;
    let mean = steps.iter().map(|&s| s as f64).sum::<f64>() / n;
    let var = if samples > 1 {
        steps.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok((mean, (var / n).sqrt()))
}

/// HT, HT(s) over `s_grid`, HT+, and optionally a Monte-Carlo estimate.
pub fn hitting_report(
    chain: &StochasticChain,
    s_grid: &[f64],
    mc: Option<(usize, u64)>,
) -> Result<HittingReport> {
    let ht = hitting_time(chain)?;
    let ht_plus = extended_hitting_time(chain)?;
    let ht_s = s_grid
        .iter()
        .map(|&s| Ok(InterpolatedPoint { s, ht: interpolated_hitting_time(chain, s)? }))
        .collect::<Result<Vec<_>>>()?;
    let (mc_estimate, mc_stderr, mc_samples, seed) = match mc {
        Some((samples, seed)) => {
            let (mean, se) = monte_carlo_hitting_time(chain, samples, seed)?;
            (Some(mean), Some(se), samples, seed)
        }
        None => (None, None, 0, 0),
    };
    Ok(HittingReport { ht, ht_s, ht_plus, p_m: chain.p_m(), mc_estimate, mc_stderr, mc_samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{make_lazy, validate_chain, validate_chain_allow_periodic};
    use nalgebra::DMatrix;

    fn two_node() -> StochasticChain {
        validate_chain(DMatrix::from_row_slice(2, 2, &[0.75, 0.25, 0.25, 0.75]), &[1]).unwrap()
    }

    fn complete(n: usize, marked: &[usize]) -> StochasticChain {
        let off = 1.0 / (n as f64 - 1.0);
        let p = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { off });
        validate_chain_allow_periodic(p, marked).unwrap()
    }

    #[test]
    fn two_node_values() {
        let c = two_node();
        assert!((hitting_time(&c).unwrap() - 4.0).abs() < 1e-12);
        assert!((interpolated_hitting_time(&c, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((extended_hitting_time(&c).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn two_node_monte_carlo() {
        let (mean, se) = monte_carlo_hitting_time(&two_node(), 100_000, 7).unwrap();
        assert!((mean - 4.0).abs() < 0.05, "mean {mean}");
        assert!(se > 0.005 && se < 0.02);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let c = make_lazy(&complete(8, &[0]));
        let a = monte_carlo_hitting_time(&c, 2000, 42).unwrap();
        let b = monte_carlo_hitting_time(&c, 2000, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, monte_carlo_hitting_time(&c, 2000, 43).unwrap());
    }

    #[test]
    fn lazy_doubles_hitting_time() {
        let c = complete(8, &[3]);
        let plain = hitting_time(&c).unwrap();
        let lazy = hitting_time(&make_lazy(&c)).unwrap();
        assert!((lazy - 2.0 * plain).abs() < 1e-9 * lazy);
        // K_8, one marked node, start uniform on the other 7: geometric with rate 1/7
        assert!((plain - 7.0).abs() < 1e-9);
        let (mc, se) = monte_carlo_hitting_time(&make_lazy(&c), 100_000, 1).unwrap();
        assert!((mc - lazy).abs() < 4.0 * se);
    }

    #[test]
    fn extended_at_least_ht_for_two_marked() {
        let c = make_lazy(&complete(8, &[0, 5]));
        let ht = hitting_time(&c).unwrap();
        let plus = extended_hitting_time(&c).unwrap();
        assert!(plus >= ht * (1.0 - 1e-6));
    }

    #[test]
    fn report_fields() {
        let r = hitting_report(&two_node(), &[0.0, 0.5], Some((1000, 3))).unwrap();
        assert_eq!(r.ht_s.len(), 2);
        assert_eq!(r.mc_samples, 1000);
        assert!(r.mc_estimate.is_some());
        for pt in &r.ht_s {
            assert!((extended_from_interpolated(pt.ht, pt.s, r.p_m) - r.ht_plus).abs() < 1e-9);
        }
    }

    #[test]
    fn errors() {
        let c = two_node().with_marked(&[]).unwrap();
        assert!(matches!(hitting_time(&c), Err(Error::EmptyMarkedSet)));
        let all = two_node().with_marked(&[0, 1]).unwrap();
        assert!(matches!(hitting_time(&all), Err(Error::EmptyUnmarkedSet)));
        assert!(matches!(monte_carlo_hitting_time(&two_node(), 0, 1), Err(Error::BadParams(_))));
    }
}
