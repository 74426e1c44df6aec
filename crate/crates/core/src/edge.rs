//! The edge-space Hamiltonian H(s) = i[V^T S V, Pi_0].
//!
//! States live on pairs |x, y> (index `x * n + y`). V rotates |x, 0> to
//! |x> (x) sum_y sqrt(p_xy(s)) |y>, S swaps the two registers and Pi_0
//! projects the second register onto |0>.
//!
//! All search dynamics stay in a (2n-1)-dimensional invariant subspace,
//! represented by [`ReducedHamiltonian`] with basis
//!
//! ```text
//! 0      |v_n, 0>
//! 2k-1   |v_k, 0>         k = 1..n-1, ascending eigenvalue order
//! 2k     |v_k, 0>_perp
//! ```
//!
//! where H maps |v_k,0> to i phi_k |v_k,0>_perp and |v_k,0>_perp to
//! -i phi_k |v_k,0>, phi_k = sqrt(1 - lambda_k^2).
//!
//! Dense n^2 x n^2 builds ([`build_dense`]) are for cross-validation only.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{interpolated_matrix, StochasticChain};
use crate::config;
use crate::error::{Error, Result};
use crate::linalg::{herm_eigen, C64};
use crate::spectral::{discriminant, DiscriminantSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisLabel {
    /// |v_n, 0>
    Principal,
    /// |v_k, 0>, k 1-based
    Vertex(usize),
    /// |v_k, 0>_perp
    Perp(usize),
}

#[derive(Debug, Clone)]
pub struct ReducedHamiltonian {
    pub s_value: f64,
    pub dim: usize,
    pub basis_labels: Vec<BasisLabel>,
    /// phi_k = sqrt(1 - lambda_k^2) for k = 1..n-1 (index k-1).
    pub phis: Vec<f64>,
    /// Sorted: 0 and +-phi_k.
    pub energies: Vec<f64>,
    pub spectrum: DiscriminantSpectrum,
    /// P(s), needed to map basis vectors into the edge picture.
    pub p: DMatrix<f64>,
    /// n^2 x (2n-1) matrix of V-rotated basis vectors; only for small n.
    pub edge_images: Option<DMatrix<f64>>,
}

impl ReducedHamiltonian {
    pub fn n(&self) -> usize {
        self.spectrum.n()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    /// Complex matrix of H in the reduced basis.
    pub fn matrix(&self) -> DMatrix<C64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for (i, &phi) in self.phis.iter().enumerate() {
            let k = i + 1;
            h[(2 * k, 2 * k - 1)] = C64::new(0.0, phi);
            h[(2 * k - 1, 2 * k)] = C64::new(0.0, -phi);
        }
        h
    }

    /// H in the real basis (|v_k,0>, i|v_k,0>_perp): real symmetric with
    /// phi_k on the off-diagonal of each 2x2 block.
    pub fn real_matrix(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for (i, &phi) in self.phis.iter().enumerate() {
            let k = i + 1;
            h[(2 * k, 2 * k - 1)] = phi;
            h[(2 * k - 1, 2 * k)] = phi;
        }
        h
    }

    /// Eigenbasis {zero state, Psi+_k, Psi-_k} as (energies, columns). Order:
    /// index 0 the zero state, then 2k-1 -> Psi+_k, 2k -> Psi-_k.
    pub fn eigenbasis(&self) -> (Vec<f64>, DMatrix<C64>) {
        let mut e = vec![0.0; self.dim];
        let mut psi = DMatrix::zeros(self.dim, self.dim);
        psi[(0, 0)] = C64::new(1.0, 0.0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for (i, &phi) in self.phis.iter().enumerate() {
            let k = i + 1;
            e[2 * k - 1] = phi;
            e[2 * k] = -phi;
            psi[(2 * k - 1, 2 * k - 1)] = C64::new(r, 0.0);
            psi[(2 * k, 2 * k - 1)] = C64::new(0.0, r);
            psi[(2 * k - 1, 2 * k)] = C64::new(r, 0.0);
            psi[(2 * k, 2 * k)] = C64::new(0.0, -r);
        }
        (e, psi)
    }

    /// Coefficients of |x, 0> for a real node-space vector x in this basis.
    pub fn coefficients(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n();
        let mut c = DVector::zeros(self.dim);
        c[0] = self.spectrum.vector(n - 1).dot(x);
        for k in 1..n {
            c[2 * k - 1] = self.spectrum.vector(k - 1).dot(x);
        }
        c
    }

    /// Rows of the edge-image matrix for first-register nodes in `nodes`,
    /// each node contributing n consecutive rows (second register y).
    pub fn image_rows(&self, nodes: &[usize]) -> DMatrix<f64> {
        let n = self.n();
        let spec = &self.spectrum;
        let p = &self.p;
        let mut out = DMatrix::zeros(nodes.len() * n, self.dim);
        for (r, &x) in nodes.iter().enumerate() {
            for y in 0..n {
                let row = r * n + y;
                let fwd = p[(x, y)].sqrt();
                let back = p[(y, x)].sqrt();
                out[(row, 0)] = spec.eigenvectors[(x, n - 1)] * fwd;
                for k in 1..n {
                    let vx = spec.eigenvectors[(x, k - 1)];
                    let vy = spec.eigenvectors[(y, k - 1)];
                    let lambda = spec.eigenvalues[k - 1];
                    out[(row, 2 * k - 1)] = vx * fwd;
                    out[(row, 2 * k)] = (vy * back - lambda * vx * fwd) / self.phis[k - 1];
                }
            }
        }
        out
    }

    /// G_ab = <image_a| (Pi_M (x) I) |image_b>. Real symmetric.
    ///
    /// Pi_M (x) I commutes with V, so G is the same whether computed before
    /// or after the rotation, and independent of how V is completed.
    pub fn measurement_matrix(&self, marked: &[usize]) -> DMatrix<f64> {
        let rows = match &self.edge_images {
            Some(img) => {
                let n = self.n();
                let idx: Vec<usize> = marked.iter().flat_map(|&x| (x * n)..(x * n + n)).collect();
                img.select_rows(&idx)
            }
            None => self.image_rows(marked),
        };
        rows.tr_mul(&rows)
    }
}

fn check_s(s: f64) -> Result<()> {
    if (0.0..1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::SRange(s))
    }
}

fn chain_matrix(chain: &StochasticChain, s: f64) -> DMatrix<f64> {
    if s == 0.0 {
        chain.p().clone()
    } else {
        interpolated_matrix(chain, s)
    }
}

/// Reduced (2n-1)-dimensional Hamiltonian H(s) from the spectrum of D(P(s)).
pub fn build_reduced(chain: &StochasticChain, s: f64) -> Result<ReducedHamiltonian> {
    check_s(s)?;
    let spectrum = discriminant(chain, s)?;
    reduced_from_spectrum(spectrum, chain_matrix(chain, s))
}

pub fn reduced_from_spectrum(spectrum: DiscriminantSpectrum, p: DMatrix<f64>) -> Result<ReducedHamiltonian> {
    let n = spectrum.n();
    let dim = 2 * n - 1;
    let mut phis = Vec::with_capacity(n - 1);
    for (k, &lambda) in spectrum.eigenvalues[..n - 1].iter().enumerate() {
        if lambda.abs() > 1.0 - 1e-12 {
            return Err(Error::DegenerateTopEigenvalue { index: k + 1, value: lambda });
        }
        phis.push((1.0 - lambda * lambda).sqrt());
    }
    let mut basis_labels = vec![BasisLabel::Principal];
    for k in 1..n {
        basis_labels.push(BasisLabel::Vertex(k));
        basis_labels.push(BasisLabel::Perp(k));
    }
    let mut energies: Vec<f64> = std::iter::once(0.0).chain(phis.iter().flat_map(|&f| [f, -f])).collect();
    energies.sort_by(f64::total_cmp);
    let mut red = ReducedHamiltonian {
        s_value: spectrum.s_value,
        dim,
        basis_labels,
        phis,
        energies,
        spectrum,
        p,
        edge_images: None,
    };
    if n <= config::DENSE_EDGE_MAX_N {
        let all: Vec<usize> = (0..n).collect();
        red.edge_images = Some(red.image_rows(&all));
    }
    Ok(red)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    Hamiltonian,
    SzegedyWalk,
    RotatedHamiltonian,
}

/// How the isometry |x,0> -> |x>|phi_x> is extended to a full unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    /// A Householder reflection per node.
    Householder,
    /// The reflection followed by a seeded random rotation fixing |0>.
    Randomized(u64),
}

#[derive(Debug, Clone)]
pub struct DenseEdgeOperator {
    pub matrix: DMatrix<C64>,
    pub kind: OperatorKind,
}

/// The real pieces every dense operator is assembled from.
#[derive(Debug, Clone)]
pub struct DenseParts {
    pub n: usize,
    /// Block-diagonal orthogonal V.
    pub v: DMatrix<f64>,
    /// V^T S V.
    pub a: DMatrix<f64>,
    /// Diagonal of Pi_0.
    pub pi0: Vec<f64>,
}

impl DenseParts {
    /// K with H = i K: K = A Pi_0 - Pi_0 A.
    pub fn k(&self) -> DMatrix<f64> {
        let n2 = self.n * self.n;
        DMatrix::from_fn(n2, n2, |i, j| self.a[(i, j)] * (self.pi0[j] - self.pi0[i]))
    }

    pub fn hamiltonian(&self) -> DMatrix<C64> {
        self.k().map(|v| C64::new(0.0, v))
    }

    /// W = V^T S V (2 Pi_0 - I).
    pub fn szegedy(&self) -> DMatrix<f64> {
        let n2 = self.n * self.n;
        DMatrix::from_fn(n2, n2, |i, j| self.a[(i, j)] * (2.0 * self.pi0[j] - 1.0))
    }

    /// V S V^T (2 Pi_0 - I), the other operator ordering.
    pub fn szegedy_swapped(&self) -> DMatrix<f64> {
        let n2 = self.n * self.n;
        let svt = swap_rows(&self.v.transpose(), self.n);
        let b = &self.v * svt;
        DMatrix::from_fn(n2, n2, |i, j| b[(i, j)] * (2.0 * self.pi0[j] - 1.0))
    }

    /// K_bar with rotated Hamiltonian V H V^T = i K_bar.
    pub fn rotated_k(&self) -> DMatrix<f64> {
        &self.v * self.k() * self.v.transpose()
    }
}

/// Applies the register swap S to the rows of `m`.
fn swap_rows(m: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[((r % n) * n + r / n, c)])
}

fn householder_to(phi: &DVector<f64>) -> DMatrix<f64> {
    let n = phi.len();
    let mut u = -phi.clone();
    u[0] += 1.0;
    let norm2 = u.norm_squared();
    if norm2 < 1e-28 {
        return DMatrix::identity(n, n);
    }
    DMatrix::identity(n, n) - (&u * u.transpose()) * (2.0 / norm2)
}

fn random_rotation_fixing_first(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut q = DMatrix::identity(n, n);
    if n > 1 {
        let g = DMatrix::from_fn(n - 1, n - 1, |_, _| rng.random_range(-1.0..1.0));
        let qr = g.qr().q();
        q.view_mut((1, 1), (n - 1, n - 1)).copy_from(&qr);
    }
    q
}

/// Builds V, V^T S V and Pi_0 for P(s).
pub fn dense_parts(chain: &StochasticChain, s: f64, completion: Completion) -> Result<DenseParts> {
    check_s(s)?;
    let n = chain.n();
    if n > config::DENSE_EDGE_MAX_N {
        return Err(Error::TooLargeForDense { n, limit: config::DENSE_EDGE_MAX_N });
    }
    let p = chain_matrix(chain, s);
    let n2 = n * n;
    let mut v = DMatrix::zeros(n2, n2);
    let mut rng = match completion {
        Completion::Randomized(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Completion::Householder => None,
    };
    for x in 0..n {
        let phi = DVector::from_fn(n, |y, _| p[(x, y)].sqrt());
        let mut r = householder_to(&phi);
        if let Some(rng) = rng.as_mut() {
            r *= random_rotation_fixing_first(n, rng);
        }
        if (r.column(0) - &phi).amax() > 1e-12 || r.iter().any(|v| !v.is_finite()) {
            return Err(Error::CompletionFailure(x));
        }
        v.view_mut((x * n, x * n), (n, n)).copy_from(&r);
    }
    let a = v.tr_mul(&swap_rows(&v, n));
    let pi0 = (0..n2).map(|i| if i % n == 0 { 1.0 } else { 0.0 }).collect();
    Ok(DenseParts { n, v, a, pi0 })
}

pub fn build_dense(chain: &StochasticChain, s: f64, kind: OperatorKind) -> Result<DenseEdgeOperator> {
    build_dense_with(chain, s, kind, Completion::Householder)
}

pub fn build_dense_with(
    chain: &StochasticChain,
    s: f64,
    kind: OperatorKind,
    completion: Completion,
) -> Result<DenseEdgeOperator> {
    let parts = dense_parts(chain, s, completion)?;
    let matrix = match kind {
        OperatorKind::Hamiltonian => parts.hamiltonian(),
        OperatorKind::SzegedyWalk => parts.szegedy().map(|v| C64::new(v, 0.0)),
        OperatorKind::RotatedHamiltonian => parts.rotated_k().map(|v| C64::new(0.0, v)),
    };
    Ok(DenseEdgeOperator { matrix, kind })
}

/// Sorted eigenvalues of the dense Hamiltonian.
pub fn dense_energies(chain: &StochasticChain, s: f64) -> Result<Vec<f64>> {
    let h = build_dense(chain, s, OperatorKind::Hamiltonian)?;
    Ok(herm_eigen(&h.matrix)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityReport {
    /// max |computed - formula| over all entries.
    pub max_deviation: f64,
    /// Entries the formula allows to be nonzero.
    pub allowed_entries: usize,
    /// Entries above 1e-10 in the computed operator.
    pub nonzero_entries: usize,
}

/// Checks every entry of the rotated Hamiltonian against
/// <x',y'|H_bar|x,y> = i (d(x,y') sqrt(p_y'x' p_xy) - d(x',y) sqrt(p_x'y' p_yx)).
pub fn verify_edge_locality(chain: &StochasticChain) -> Result<LocalityReport> {
    let n = chain.n();
    let parts = dense_parts(chain, 0.0, Completion::Householder)?;
    let kbar = parts.rotated_k();
    let p = chain.p();
    let mut report = LocalityReport { max_deviation: 0.0, allowed_entries: 0, nonzero_entries: 0 };
    for xp in 0..n {
        for yp in 0..n {
            for x in 0..n {
                for y in 0..n {
                    let mut expect = 0.0;
                    let mut allowed = false;
                    if x == yp {
                        expect += (p[(yp, xp)] * p[(x, y)]).sqrt();
                        allowed = true;
                    }
                    if xp == y {
                        expect -= (p[(xp, yp)] * p[(y, x)]).sqrt();
                        allowed = true;
                    }
                    let got = kbar[(xp * n + yp, x * n + y)];
                    let dev = (got - expect).abs();
                    report.max_deviation = report.max_deviation.max(dev);
                    if allowed {
                        report.allowed_entries += 1;
                    }
                    if got.abs() > 1e-10 {
                        report.nonzero_entries += 1;
                        if !allowed {
                            return Err(Error::LocalityViolation(format!(
                                "entry <{xp},{yp}|H|{x},{y}> = {got:e} outside the edge pattern"
                            )));
                        }
                    }
                }
            }
        }
    }
    if report.max_deviation > 1e-10 {
        return Err(Error::LocalityViolation(format!(
            "max deviation from the edge formula {:e}",
            report.max_deviation
        )));
    }
    Ok(report)
}

/// max |H - (i/2)(W - W^T)| with W = V^T S V (2 Pi_0 - I).
pub fn szegedy_identity_check(chain: &StochasticChain, s: f64) -> Result<f64> {
    szegedy_identity_check_with(chain, s, Completion::Householder)
}

pub fn szegedy_identity_check_with(chain: &StochasticChain, s: f64, completion: Completion) -> Result<f64> {
    let parts = dense_parts(chain, s, completion)?;
    let k = parts.k();
    let w = parts.szegedy();
    Ok((k - (&w - w.transpose()) * 0.5).amax())
}

/// Same check with the swapped ordering V S V^T (2 Pi_0 - I).
///
/// Householder blocks are symmetric, so V = V^T and both orderings agree.
/// Any non-symmetric completion exposes an O(1) deviation.
pub fn szegedy_swapped_deviation(chain: &StochasticChain, s: f64, completion: Completion) -> Result<f64> {
    let parts = dense_parts(chain, s, completion)?;
    let k = parts.k();
    let w = parts.szegedy_swapped();
    Ok((k - (&w - w.transpose()) * 0.5).amax())
}
