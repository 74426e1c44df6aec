//! Numerical tolerances shared across the crate.
//!
//! The defaults are the values every validation and acceptance check is pinned
//! to. `Tolerances` is plain data so callers can loosen or tighten a check for
//! an experiment without touching the algorithms.

use serde::{Deserialize, Serialize};

/// Maximum allowed |row sum - 1|.
pub const ROW_SUM_TOL: f64 = 1e-10;
/// Maximum allowed detailed-balance residual max |pi_x p_xy - pi_y p_yx|.
pub const REVERSIBILITY_TOL: f64 = 1e-9;
/// Maximum allowed ||pi P - pi||_inf for a stationary solve.
pub const STATIONARY_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Allowed deviation of the top discriminant eigenvalue from 1.
pub const TOP_EIGENVALUE_TOL: f64 = 1e-10;
/// Eigenvalues of D(P') above 1 - this are treated as absorbed states.
pub const ABSORBED_TOL: f64 = 1e-10;
/// Smallest admissible 1 - lambda in a hitting-time sum.
pub const DENOMINATOR_TOL: f64 = 1e-12;
/// Relative tolerance of the interpolated / extended hitting-time identity.
pub const HT_IDENTITY_RTOL: f64 = 1e-8;
/// Chains above this size use power iteration for the stationary state.
pub const DIRECT_SOLVE_MAX_N: usize = 2000;
/// Largest n for which n^2 x n^2 edge-space operators are materialized.
pub const DENSE_EDGE_MAX_N: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub row_sum: f64,
    pub reversibility: f64,
    pub stationary: f64,
    pub degeneracy: f64,
    pub top_eigenvalue: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            row_sum: ROW_SUM_TOL,
            reversibility: REVERSIBILITY_TOL,
            stationary: STATIONARY_TOL,
            degeneracy: DEGENERACY_TOL,
            top_eigenvalue: TOP_EIGENVALUE_TOL,
        }
    }
}
