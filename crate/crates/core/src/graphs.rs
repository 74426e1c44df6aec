//! Benchmark graph families as (non-lazy) random-walk chains.
//!
//! Node numbering: tori are row-major with the first coordinate most
//! significant, hypercube nodes are bit patterns, Rook boards use
//! `row * n2 + col`.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{validate_chain_allow_periodic, StochasticChain};
use crate::error::{Error, Result};

pub const MAX_NODES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Complete { n: usize },
    Cycle { n: usize },
    Torus { d: usize, side: usize },
    Hypercube { d: usize },
    /// Simple random walk on the n1 x n2 Rook's graph.
    Rook { n1: usize, n2: usize },
    /// Moves along a column with probability p, along a row with 1 - p.
    WeightedRook { n1: usize, n2: usize, p: f64 },
    /// Connected weighted graph with edge probability `edge_prob` and
    /// weights uniform in (0, 1].
    RandomReversible {
        n: usize,
        seed: u64,
        #[serde(default = "default_edge_prob")]
        edge_prob: f64,
    },
}

fn default_edge_prob() -> f64 {
    0.5
}

impl FamilySpec {
    pub fn node_count(&self) -> Option<usize> {
        match *self {
            FamilySpec::Complete { n } | FamilySpec::Cycle { n } | FamilySpec::RandomReversible { n, .. } => Some(n),
            FamilySpec::Torus { d, side } => side.checked_pow(d as u32),
            FamilySpec::Hypercube { d } => 1usize.checked_shl(d as u32),
            FamilySpec::Rook { n1, n2 } | FamilySpec::WeightedRook { n1, n2, .. } => n1.checked_mul(n2),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            FamilySpec::Complete { n } => format!("complete(n={n})"),
            FamilySpec::Cycle { n } => format!("cycle(n={n})"),
            FamilySpec::Torus { d, side } => format!("torus(d={d},side={side})"),
            FamilySpec::Hypercube { d } => format!("hypercube(d={d})"),
            FamilySpec::Rook { n1, n2 } => format!("rook({n1}x{n2})"),
            FamilySpec::WeightedRook { n1, n2, p } => format!("weighted_rook({n1}x{n2},p={p})"),
            FamilySpec::RandomReversible { n, seed, edge_prob } => {
                format!("random_reversible(n={n},seed={seed},q={edge_prob})")
            }
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadParams(msg.into())
}

/// Builds the non-lazy chain of a family; the marked set is empty.
pub fn generate(spec: &FamilySpec) -> Result<StochasticChain> {
    let n = spec.node_count().ok_or_else(|| bad("node count overflows"))?;
    if n < 2 {
        return Err(bad(format!("{} has fewer than 2 nodes", spec.label())));
    }
    if n > MAX_NODES {
        return Err(bad(format!("{} has {n} nodes, limit is {MAX_NODES}", spec.label())));
    }
    match *spec {
        FamilySpec::Complete { n } => {
            from_adjacency(&DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 }))
        }
        FamilySpec::Cycle { n } => {
            let mut a = DMatrix::zeros(n, n);
            for i in 0..n {
                a[(i, (i + 1) % n)] += 1.0;
                a[((i + 1) % n, i)] += 1.0;
            }
            from_adjacency(&a)
        }
        FamilySpec::Torus { d, side } => {
            if d == 0 || side < 2 {
                return Err(bad("torus needs d >= 1 and side >= 2"));
            }
            let mut a = DMatrix::zeros(n, n);
            for x in 0..n {
                let mut stride = 1;
                for _ in 0..d {
                    let coord = (x / stride) % side;
                    let up = x - coord * stride + ((coord + 1) % side) * stride;
                    a[(x, up)] += 1.0;
                    a[(up, x)] += 1.0;
                    stride *= side;
                }
            }
            from_adjacency(&a)
        }
        FamilySpec::Hypercube { d } => {
            let mut a = DMatrix::zeros(n, n);
            for x in 0..n {
                for b in 0..d {
                    a[(x, x ^ (1 << b))] = 1.0;
                }
            }
            from_adjacency(&a)
        }
        FamilySpec::Rook { n2, .. } => {
            let a = DMatrix::from_fn(n, n, |i, j| {
                let (r1, c1, r2, c2) = (i / n2, i % n2, j / n2, j % n2);
                if i != j && (r1 == r2 || c1 == c2) {
                    1.0
                } else {
                    0.0
                }
            });
            from_adjacency(&a)
        }
        FamilySpec::WeightedRook { n1, n2, p } => {
            if n1 < 2 || n2 < 2 || !(p > 0.0 && p < 1.0) {
                return Err(bad("weighted rook needs n1, n2 >= 2 and 0 < p < 1"));
            }
            let vert = p / (n1 as f64 - 1.0);
            let horiz = (1.0 - p) / (n2 as f64 - 1.0);
            let m = DMatrix::from_fn(n, n, |i, j| {
                let (r1, c1, r2, c2) = (i / n2, i % n2, j / n2, j % n2);
                if i == j {
                    0.0
                } else if c1 == c2 {
                    vert
                } else if r1 == r2 {
                    horiz
                } else {
                    0.0
                }
            });
            validate_chain_allow_periodic(m, &[])
        }
        FamilySpec::RandomReversible { n, seed, edge_prob } => {
            if !(edge_prob > 0.0 && edge_prob <= 1.0) {
                return Err(bad("edge_prob must lie in (0, 1]"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..10_000 {
                let mut a = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in (i + 1)..n {
                        if rng.random::<f64>() < edge_prob {
                            let w = 1.0 - rng.random::<f64>();
                            a[(i, j)] = w;
                            a[(j, i)] = w;
                        }
                    }
                }
                if is_connected(&a) {
                    return from_adjacency(&a);
                }
            }
            Err(bad("could not draw a connected graph; raise edge_prob"))
        }
    }
}

fn is_connected(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if a[(u, v)] > 0.0 && !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Random walk p_xy = a_xy / d_x on a symmetric nonnegative weight matrix.
pub fn from_adjacency(a: &DMatrix<f64>) -> Result<StochasticChain> {
    let (rows, cols) = a.shape();
    if rows != cols || rows < 2 {
        return Err(Error::BadShape { rows, cols });
    }
    let n = rows;
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)];
            if !(v >= 0.0) {
                return Err(Error::NegativeWeight { row: i, col: j, value: v });
            }
            if (v - a[(j, i)]).abs() > 1e-12 * v.abs().max(1.0) {
                return Err(bad(format!("adjacency not symmetric at ({i}, {j})")));
            }
        }
    }
    if !is_connected(a) {
        return Err(Error::Disconnected);
    }
    let degrees: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let p = DMatrix::from_fn(n, n, |i, j| a[(i, j)] / degrees[i]);
    validate_chain_allow_periodic(p, &[])
}
