//! Ergodic reversible Markov chains: validation, the lazy transform, and
//! interpolation towards the absorbing chain.
//!
//! Node indices are 0-based everywhere, including the marked set in chain
//! files.

use std::collections::VecDeque;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::{self, Tolerances};
use crate::error::{Error, Result};

/// Stationary distribution together with the marked stationary mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    pub p_m: f64,
}

impl StationaryDistribution {
    fn new(pi: Vec<f64>, marked: &[usize]) -> Self {
        let p_m = marked.iter().fold(0.0, |acc, &x| acc + pi[x]);
        Self { pi, p_m }
    }
}

/// A validated row-stochastic, irreducible, reversible transition matrix with
/// a (possibly empty) marked set.
///
/// Chains built by [`validate_chain`] are also aperiodic. Graph generators may
/// produce periodic walks (even cycles, tori, hypercubes); those carry
/// `aperiodic() == false` until [`make_lazy`] is applied.
#[derive(Debug, Clone)]
pub struct StochasticChain {
    p: DMatrix<f64>,
    marked: Vec<usize>,
    lazy_applied: bool,
    aperiodic: bool,
    stationary: StationaryDistribution,
}

impl StochasticChain {
    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn marked(&self) -> &[usize] {
        &self.marked
    }

    pub fn is_marked(&self, x: usize) -> bool {
        self.marked.binary_search(&x).is_ok()
    }

    pub fn unmarked(&self) -> Vec<usize> {
        (0..self.n()).filter(|&x| !self.is_marked(x)).collect()
    }

    pub fn lazy_applied(&self) -> bool {
        self.lazy_applied
    }

    pub fn aperiodic(&self) -> bool {
        self.aperiodic
    }

    pub fn stationary(&self) -> &StationaryDistribution {
        &self.stationary
    }

    pub fn pi(&self) -> &[f64] {
        &self.stationary.pi
    }

    pub fn p_m(&self) -> f64 {
        self.stationary.p_m
    }

    /// Same transition matrix with a different marked set.
    pub fn with_marked(mut self, marked: &[usize]) -> Result<Self> {
        self.marked = normalize_marked(marked, self.n())?;
        self.stationary.p_m = self.marked.iter().fold(0.0, |acc, &x| acc + self.stationary.pi[x]);
        Ok(self)
    }

    pub fn require_marked(&self) -> Result<()> {
        if self.marked.is_empty() {
            Err(Error::EmptyMarkedSet)
        } else {
            Ok(())
        }
    }

    pub fn to_file(&self) -> ChainFile {
        ChainFile {
            n: self.n(),
            p: crate::linalg::to_rows(&self.p),
            marked: self.marked.clone(),
            lazy_applied: Some(self.lazy_applied),
        }
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_file())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ChainFile = serde_json::from_str(&text)?;
        file.into_chain()
    }
}

/// On-disk chain format: `{"n": int, "p": [[...]], "marked": [ints]}`.
///
/// `lazy_applied` is optional. Without it a chain counts as lazy exactly when
/// every diagonal entry is at least 1/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFile {
    pub n: usize,
    pub p: Vec<Vec<f64>>,
    pub marked: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lazy_applied: Option<bool>,
}

impl ChainFile {
    pub fn into_chain(self) -> Result<StochasticChain> {
        if self.p.len() != self.n || self.p.iter().any(|r| r.len() != self.n) {
            let cols = self.p.first().map_or(0, Vec::len);
            return Err(Error::BadShape { rows: self.p.len(), cols });
        }
        let flat: Vec<f64> = self.p.iter().flatten().copied().collect();
        let p = DMatrix::from_row_slice(self.n, self.n, &flat);
        let mut chain = validate_chain(p, &self.marked)?;
        if self.lazy_applied == Some(true) {
            if let Some(x) = (0..chain.n()).find(|&x| chain.p[(x, x)] < 0.5 - config::ROW_SUM_TOL) {
                return Err(Error::BadParams(format!(
                    "chain file claims lazy_applied but p[{x}][{x}] < 1/2"
                )));
            }
            chain.lazy_applied = true;
        }
        Ok(chain)
    }
}

fn normalize_marked(marked: &[usize], n: usize) -> Result<Vec<usize>> {
    if let Some(&index) = marked.iter().find(|&&x| x >= n) {
        return Err(Error::MarkedOutOfRange { index, n });
    }
    let mut m = marked.to_vec();
    m.sort_unstable();
    m.dedup();
    Ok(m)
}

/// Validates `p` as an ergodic reversible chain and computes its stationary
/// distribution.
pub fn validate_chain(p: DMatrix<f64>, marked: &[usize]) -> Result<StochasticChain> {
    validate_chain_with(p, marked, &Tolerances::default())
}

pub fn validate_chain_with(
    p: DMatrix<f64>,
    marked: &[usize],
    tol: &Tolerances,
) -> Result<StochasticChain> {
    build_chain(p, marked, tol, true)
}

/// Like [`validate_chain`] but accepts periodic (e.g. bipartite) walks.
pub fn validate_chain_allow_periodic(p: DMatrix<f64>, marked: &[usize]) -> Result<StochasticChain> {
    build_chain(p, marked, &Tolerances::default(), false)
}

fn build_chain(
    p: DMatrix<f64>,
    marked: &[usize],
    tol: &Tolerances,
    require_aperiodic: bool,
) -> Result<StochasticChain> {
    let (rows, cols) = p.shape();
    if rows != cols || rows < 2 {
        return Err(Error::BadShape { rows, cols });
    }
    let n = rows;
    for i in 0..n {
        for j in 0..n {
            let v = p[(i, j)];
            if !(v >= 0.0) {
                return Err(Error::NegativeEntry { row: i, col: j, value: v });
            }
        }
        let sum: f64 = p.row(i).iter().sum();
        if (sum - 1.0).abs() > tol.row_sum {
            return Err(Error::RowSumViolation { row: i, sum, deviation: (sum - 1.0).abs() });
        }
    }
    let marked = normalize_marked(marked, n)?;
    check_irreducible(&p)?;
    let period = period(&p);
    if require_aperiodic && period != 1 {
        return Err(Error::NotAperiodic { period });
    }
    let pi = solve_stationary_with(&p, tol.stationary)?;
    let residual = detailed_balance_residual(&p, &pi);
    if residual > tol.reversibility {
        return Err(Error::NotReversible { residual });
    }
    let stationary = StationaryDistribution::new(pi, &marked);
    // p_xx >= 1/2 everywhere means P = (I + Q)/2 for the stochastic Q = 2P - I
    let lazy_applied = (0..n).all(|x| p[(x, x)] >= 0.5 - tol.row_sum);
    Ok(StochasticChain { p, marked, lazy_applied, aperiodic: period == 1, stationary })
}

fn reachable(p: &DMatrix<f64>, transpose: bool) -> Vec<bool> {
    let n = p.nrows();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            let w = if transpose { p[(v, u)] } else { p[(u, v)] };
            if w > 0.0 && !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

fn check_irreducible(p: &DMatrix<f64>) -> Result<()> {
    for transpose in [false, true] {
        if let Some(node) = reachable(p, transpose).iter().position(|&s| !s) {
            return Err(Error::NotIrreducible { node });
        }
    }
    Ok(())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of an irreducible chain: gcd over edges (u, v) of
/// level(u) + 1 - level(v), with BFS levels from node 0.
pub fn period(p: &DMatrix<f64>) -> usize {
    let n = p.nrows();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if p[(u, v)] > 0.0 && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0;
    for u in 0..n {
        for v in 0..n {
            if p[(u, v)] > 0.0 && level[u] != usize::MAX && level[v] != usize::MAX {
                let d = (level[u] + 1) as i64 - level[v] as i64;
                g = gcd(g, d.unsigned_abs() as usize);
            }
        }
    }
    g.max(1)
}

/// max |pi_x p_xy - pi_y p_yx|.
pub fn detailed_balance_residual(p: &DMatrix<f64>, pi: &[f64]) -> f64 {
    let n = p.nrows();
    let mut worst = 0.0_f64;
    for x in 0..n {
        for y in (x + 1)..n {
            worst = worst.max((pi[x] * p[(x, y)] - pi[y] * p[(y, x)]).abs());
        }
    }
    worst
}

fn stationary_residual(p: &DMatrix<f64>, pi: &DVector<f64>) -> f64 {
    let pi_p = p.tr_mul(pi);
    (pi_p - pi).amax()
}

/// Solves pi P = pi, sum(pi) = 1.
pub fn solve_stationary(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    solve_stationary_with(p, config::STATIONARY_TOL)
}

fn solve_stationary_with(p: &DMatrix<f64>, tol: f64) -> Result<Vec<f64>> {
    let n = p.nrows();
    let pi = if n <= config::DIRECT_SOLVE_MAX_N {
        direct_stationary(p)
    } else {
        power_stationary(p, tol)
    };
    let pi = pi.ok_or(Error::ConvergenceFailure { residual: f64::NAN })?;
    let residual = stationary_residual(p, &pi);
    if !(residual <= tol) || pi.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::ConvergenceFailure { residual });
    }
    Ok(pi.iter().copied().collect())
}

fn direct_stationary(p: &DMatrix<f64>) -> Option<DVector<f64>> {
    let n = p.nrows();
    let mut a = p.transpose() - DMatrix::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let mut pi = a.lu().solve(&b)?;
    let sum = pi.sum();
    pi /= sum;
    Some(pi)
}

/// Power iteration on the lazy chain, warm-started from the detailed-balance
/// ratios along a BFS tree (exact when the chain is reversible).
fn power_stationary(p: &DMatrix<f64>, tol: f64) -> Option<DVector<f64>> {
    let n = p.nrows();
    let mut pi = DVector::from_element(n, 0.0);
    pi[0] = 1.0;
    let mut queue = VecDeque::from([0usize]);
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut tree_ok = true;
    while let Some(x) = queue.pop_front() {
        for y in 0..n {
            if !seen[y] && p[(x, y)] > 0.0 {
                seen[y] = true;
                if p[(y, x)] > 0.0 {
                    pi[y] = pi[x] * p[(x, y)] / p[(y, x)];
                } else {
                    tree_ok = false;
                }
                queue.push_back(y);
            }
        }
    }
    if !tree_ok || seen.iter().any(|s| !s) {
        pi.fill(1.0);
    }
    pi /= pi.sum();
    for _ in 0..200_000 {
        if stationary_residual(p, &pi) <= tol * 0.5 {
            return Some(pi);
        }
        let next = (p.tr_mul(&pi) + &pi) * 0.5;
        pi = &next / next.sum();
    }
    Some(pi)
}

/// Returns the stationary distribution computed during validation.
pub fn stationary_distribution(chain: &StochasticChain) -> StationaryDistribution {
    chain.stationary.clone()
}

/// P -> (I + P) / 2. The stationary distribution is carried over unchanged.
pub fn make_lazy(chain: &StochasticChain) -> StochasticChain {
    let n = chain.n();
    let p = (DMatrix::identity(n, n) + &chain.p) * 0.5;
    StochasticChain {
        p,
        marked: chain.marked.clone(),
        lazy_applied: true,
        aperiodic: true,
        stationary: chain.stationary.clone(),
    }
}

/// Returns the chain itself if it is already lazy, otherwise its lazy version.
pub fn ensure_lazy(chain: &StochasticChain) -> StochasticChain {
    if chain.lazy_applied {
        chain.clone()
    } else {
        log::info!("applying lazy transform P -> (I + P)/2 before search (n = {})", chain.n());
        make_lazy(chain)
    }
}

fn check_s(s: f64) -> Result<()> {
    if (0.0..1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::SRange(s))
    }
}

/// The transition matrix of P(s) = (1-s) P + s P', where P' turns every
/// outgoing edge of a marked node into a self-loop.
pub fn interpolated_matrix(chain: &StochasticChain, s: f64) -> DMatrix<f64> {
    let mut p = chain.p.clone();
    for &m in &chain.marked {
        let mut row = p.row_mut(m);
        row *= 1.0 - s;
        row[m] += s;
    }
    p
}

/// The absorbing chain P' (rows of marked nodes replaced by self-loops).
pub fn absorbing_matrix(chain: &StochasticChain) -> DMatrix<f64> {
    let mut p = chain.p.clone();
    for &m in &chain.marked {
        p.row_mut(m).fill(0.0);
        p[(m, m)] = 1.0;
    }
    p
}

/// Builds and validates P(s) for 0 <= s < 1. Its stationary state is solved
/// numerically; [`stationary_interpolated`] gives the closed form.
pub fn interpolate_chain(chain: &StochasticChain, s: f64) -> Result<StochasticChain> {
    check_s(s)?;
    chain.require_marked()?;
    if s == 0.0 {
        return Ok(chain.clone());
    }
    let p = interpolated_matrix(chain, s);
    let mut out = build_chain(p, &chain.marked, &Tolerances::default(), false)?;
    out.lazy_applied = chain.lazy_applied;
    Ok(out)
}

/// Closed-form stationary state of P(s):
/// pi(s) = ((1-s) pi_U, pi_M) / (1 - s (1 - p_M)).
pub fn stationary_interpolated(chain: &StochasticChain, s: f64) -> Result<StationaryDistribution> {
    check_s(s)?;
    let p_m = chain.p_m();
    let norm = 1.0 - s * (1.0 - p_m);
    let pi = chain
        .pi()
        .iter()
        .enumerate()
        .map(|(x, &v)| if chain.is_marked(x) { v / norm } else { (1.0 - s) * v / norm })
        .collect();
    Ok(StationaryDistribution::new(pi, &chain.marked))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        let n = rows.len();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    #[test]
    fn symmetric_two_node_chain_has_uniform_pi() {
        let c = validate_chain(m(&[&[0.5, 0.5], &[0.5, 0.5]]), &[1]).unwrap();
        assert!((c.pi()[0] - 0.5).abs() < 1e-15 && (c.pi()[1] - 0.5).abs() < 1e-15);
        assert!((c.p_m() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_is_not_irreducible() {
        let err = validate_chain(m(&[&[1.0, 0.0], &[0.0, 1.0]]), &[]).unwrap_err();
        assert!(matches!(err, Error::NotIrreducible { .. }));
    }

    #[test]
    fn biased_two_node_chain() {
        // pi P = pi by hand: 0.5 a + 0.75 b = a, a + b = 1 -> a = 0.6
        let c = validate_chain(m(&[&[0.5, 0.5], &[0.75, 0.25]]), &[]).unwrap();
        assert!((c.pi()[0] - 0.6).abs() < 1e-14);
        assert!((c.pi()[1] - 0.4).abs() < 1e-14);
    }

    #[test]
    fn error_paths() {
        let e = validate_chain(m(&[&[0.5, 0.6], &[0.5, 0.5]]), &[]).unwrap_err();
        assert!(matches!(e, Error::RowSumViolation { row: 0, .. }));
        let e = validate_chain(m(&[&[0.0, 1.0], &[1.0, 0.0]]), &[]).unwrap_err();
        assert!(matches!(e, Error::NotAperiodic { period: 2 }));
        let e = validate_chain(m(&[&[0.5, 0.5], &[0.5, 0.5]]), &[2]).unwrap_err();
        assert!(matches!(e, Error::MarkedOutOfRange { index: 2, n: 2 }));
        let e = validate_chain(m(&[&[1.5, -0.5], &[0.5, 0.5]]), &[]).unwrap_err();
        assert!(matches!(e, Error::NegativeEntry { .. }));
        // directed 3-cycle with laziness: ergodic, uniform pi, not reversible
        let e = validate_chain(
            m(&[&[0.5, 0.5, 0.0], &[0.0, 0.5, 0.5], &[0.5, 0.0, 0.5]]),
            &[],
        )
        .unwrap_err();
        assert!(matches!(e, Error::NotReversible { .. }));
    }

    #[test]
    fn lazy_transform_formula() {
        let c = validate_chain(m(&[&[0.5, 0.5], &[0.5, 0.5]]), &[]).unwrap();
        let l = make_lazy(&c);
        assert!(l.lazy_applied());
        assert_eq!(l.p()[(0, 0)], 0.75);
        assert_eq!(l.p()[(0, 1)], 0.25);
        let ll = make_lazy(&l);
        assert_eq!(ll.p()[(0, 0)], 0.875);
        assert_eq!(ll.p()[(1, 0)], 0.125);
        assert_eq!(ll.pi(), c.pi());
    }

    #[test]
    fn interpolation_of_lazy_two_node_chain() {
        let c = validate_chain(m(&[&[0.75, 0.25], &[0.25, 0.75]]), &[1]).unwrap();
        assert_eq!(interpolate_chain(&c, 0.0).unwrap().p(), c.p());
        let half = interpolate_chain(&c, 0.5).unwrap();
        assert_eq!(half.p()[(1, 0)], 0.125);
        assert_eq!(half.p()[(1, 1)], 0.875);
        let closed = stationary_interpolated(&c, 0.5).unwrap();
        assert!((closed.pi[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((closed.pi[1] - 2.0 / 3.0).abs() < 1e-15);
        for (a, b) in closed.pi.iter().zip(half.pi()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn interpolation_rejects_bad_inputs() {
        let c = validate_chain(m(&[&[0.75, 0.25], &[0.25, 0.75]]), &[1]).unwrap();
        assert!(matches!(interpolate_chain(&c, 1.0), Err(Error::SRange(_))));
        assert!(matches!(interpolate_chain(&c, -0.1), Err(Error::SRange(_))));
        let unmarked = c.clone().with_marked(&[]).unwrap();
        assert!(matches!(interpolate_chain(&unmarked, 0.5), Err(Error::EmptyMarkedSet)));
        assert!(matches!(stationary_interpolated(&c, 1.0), Err(Error::SRange(_))));
    }

    #[test]
    fn power_iteration_path_matches_direct_solve() {
        let c = validate_chain(m(&[&[0.5, 0.3, 0.2], &[0.3, 0.4, 0.3], &[0.2, 0.3, 0.5]]), &[]).unwrap();
        // non-symmetric reversible chain: weighted path
        let p = m(&[&[0.5, 0.5, 0.0], &[0.25, 0.5, 0.25], &[0.0, 0.5, 0.5]]);
        let direct = direct_stationary(&p).unwrap();
        let power = power_stationary(&p, 1e-12).unwrap();
        assert!((direct - power).amax() < 1e-12);
        assert!((c.pi()[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn chain_file_round_trip_and_lazy_flag() {
        let c = make_lazy(&validate_chain(m(&[&[0.5, 0.5], &[0.75, 0.25]]), &[0]).unwrap());
        let text = serde_json::to_string(&c.to_file()).unwrap();
        let back: ChainFile = serde_json::from_str(&text).unwrap();
        let c2 = back.into_chain().unwrap();
        assert!(c2.lazy_applied());
        assert_eq!(c2.p(), c.p());
        assert_eq!(c2.marked(), &[0]);

        let plain: ChainFile =
            serde_json::from_str(r#"{"n": 2, "p": [[0.25, 0.75], [0.75, 0.25]], "marked": [1]}"#).unwrap();
        assert!(!plain.into_chain().unwrap().lazy_applied());
        // a diagonal of at least 1/2 is recognised as lazy without the flag
        let implicit: ChainFile =
            serde_json::from_str(r#"{"n": 2, "p": [[0.75, 0.25], [0.25, 0.75]], "marked": [1]}"#).unwrap();
        assert!(implicit.into_chain().unwrap().lazy_applied());

        let bad: ChainFile =
            serde_json::from_str(r#"{"n": 3, "p": [[0.5, 0.5], [0.5, 0.5]], "marked": []}"#).unwrap();
        assert!(matches!(bad.into_chain(), Err(Error::BadShape { .. })));
    }
}
