//! The DiMMSB generative model: `Omega = Pi_r P Pi_c'`, Bernoulli sampling,
//! planted memberships and identifiability checks.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::CellStream;
use crate::types::{sorted_singular_values, BiAdjacency, MembershipMatrix, ProbabilityMatrix};
use crate::Matrix;

/// Tolerance used to call a membership entry "equal to one".
pub const PURE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub p: ProbabilityMatrix,
    pub pi_r: MembershipMatrix,
    pub pi_c: MembershipMatrix,
}

impl ModelParams {
    /// Checks dimension agreement between `P` and both membership matrices.
    pub fn new(p: ProbabilityMatrix, pi_r: MembershipMatrix, pi_c: MembershipMatrix) -> Result<Self> {
        for (what, found) in [("row membership K", pi_r.k()), ("column membership K", pi_c.k())] {
            if found != p.k() {
                return Err(Error::DimensionMismatch { what, expected: p.k(), found });
            }
        }
        Ok(Self { p, pi_r, pi_c })
    }

    pub fn n_rows(&self) -> usize {
        self.pi_r.n()
    }

    pub fn n_cols(&self) -> usize {
        self.pi_c.n()
    }

    pub fn k(&self) -> usize {
        self.p.k()
    }
}

/// Planted mixed rows: each `(pmf, count)` pair contributes `count` nodes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MixedProfileSpec {
    pub profiles: Vec<(Vec<f64>, usize)>,
}

impl MixedProfileSpec {
    pub fn new(profiles: Vec<(Vec<f64>, usize)>) -> Self {
        Self { profiles }
    }

    /// Splits `total` nodes evenly across `pmfs`; `total` must divide exactly.
    pub fn even_split(pmfs: Vec<Vec<f64>>, total: usize) -> Result<Self> {
        if pmfs.is_empty() {
            return if total == 0 {
                Ok(Self::default())
            } else {
                Err(Error::CountMismatch { expected: total, found: 0 })
            };
        }
        let per = total / pmfs.len();
        if per * pmfs.len() != total {
            return Err(Error::CountMismatch { expected: total, found: per * pmfs.len() });
        }
        Ok(Self { profiles: pmfs.into_iter().map(|p| (p, per)).collect() })
    }

    pub fn total(&self) -> usize {
        self.profiles.iter().map(|(_, c)| c).sum()
    }
}

/// Population adjacency `Omega = Pi_r P Pi_c'`.
pub fn build_omega(params: &ModelParams) -> Result<Matrix> {
    let k = params.k();
    if params.pi_r.k() != k || params.pi_c.k() != k {
        return Err(Error::DimensionMismatch {
            what: "membership K",
            expected: k,
            found: params.pi_r.k().max(params.pi_c.k()),
        });
    }
    let omega = params.pi_r.weights() * params.p.entries() * params.pi_c.weights().transpose();
    // Rounding can push products of probabilities a hair outside [0, 1].
    Ok(omega.map(|x| x.clamp(0.0, 1.0)))
}

/// Draws `A(i, j) ~ Bernoulli(Omega(i, j))` independently.
///
/// Cell `(i, j)` always consumes draw number `i * n_cols + j` of the seeded
/// stream, so the result depends only on `(omega, seed)`.
pub fn sample_adjacency(omega: &Matrix, seed: u64) -> Result<BiAdjacency> {
    let (n_rows, n_cols) = omega.shape();
    for i in 0..n_rows {
        for j in 0..n_cols {
            let value = omega[(i, j)];
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ProbabilityOutOfRange { row: i, col: j, value });
            }
        }
    }
    let mut stream = CellStream::new(seed);
    let mut edges = Vec::new();
    for i in 0..n_rows {
        for j in 0..n_cols {
            if stream.next_uniform() < omega[(i, j)] {
                edges.push((i, j));
            }
        }
    }
    BiAdjacency::with_index_labels(n_rows, n_cols, edges)
}

/// Removes zero out-degree rows and zero in-degree columns in a single pass,
/// filtering the membership matrices to match.
pub fn prune_zero_degree(
    a: &BiAdjacency,
    pi_r: &MembershipMatrix,
    pi_c: &MembershipMatrix,
) -> Result<(BiAdjacency, MembershipMatrix, MembershipMatrix)> {
    if pi_r.n() != a.nrows() {
        return Err(Error::DimensionMismatch { what: "row memberships", expected: a.nrows(), found: pi_r.n() });
    }
    if pi_c.n() != a.ncols() {
        return Err(Error::DimensionMismatch { what: "column memberships", expected: a.ncols(), found: pi_c.n() });
    }
    let rows: Vec<usize> = a.out_degrees().iter().enumerate().filter(|(_, &d)| d > 0).map(|(i, _)| i).collect();
    let cols: Vec<usize> = a.in_degrees().iter().enumerate().filter(|(_, &d)| d > 0).map(|(j, _)| j).collect();
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::AllNodesRemoved);
    }
    Ok((a.submatrix(&rows, &cols), pi_r.select_rows(&rows), pi_c.select_rows(&cols)))
}

/// Pure nodes first (`n_pure` per community, in community order), then the
/// mixed profiles in the order listed.
pub fn make_planted_memberships(
    n: usize,
    k: usize,
    n_pure: usize,
    profiles: &MixedProfileSpec,
) -> Result<MembershipMatrix> {
    let found = k * n_pure + profiles.total();
    if found != n {
        return Err(Error::CountMismatch { expected: n, found });
    }
    for (pmf, _) in &profiles.profiles {
        if pmf.len() != k {
            return Err(Error::DimensionMismatch { what: "profile length", expected: k, found: pmf.len() });
        }
    }
    let mut w = Matrix::zeros(n, k);
    let mut row = 0;
    for c in 0..k {
        for _ in 0..n_pure {
            w[(row, c)] = 1.0;
            row += 1;
        }
    }
    for (pmf, count) in &profiles.profiles {
        for _ in 0..*count {
            for (c, &x) in pmf.iter().enumerate() {
                w[(row, c)] = x;
            }
            row += 1;
        }
    }
    MembershipMatrix::new(w)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentifiabilityReport {
    /// `sigma_K(P) / sigma_1(P)`.
    pub sigma_ratio: f64,
    pub full_rank: bool,
    pub row_pure_counts: Vec<usize>,
    pub col_pure_counts: Vec<usize>,
    pub pure_nodes_present: bool,
}

impl IdentifiabilityReport {
    pub fn passes(&self) -> bool {
        self.full_rank && self.pure_nodes_present
    }

    pub fn describe(&self) -> alloc::string::String {
        format!(
            "rank condition {} (sigma_K/sigma_1 = {:.3e}); pure-node condition {} (rows {:?}, cols {:?})",
            if self.full_rank { "pass" } else { "FAIL" },
            self.sigma_ratio,
            if self.pure_nodes_present { "pass" } else { "FAIL" },
            self.row_pure_counts,
            self.col_pure_counts
        )
    }
}

/// Counts nodes whose membership puts weight one on each community.
pub fn pure_counts(pi: &MembershipMatrix) -> Vec<usize> {
    let mut counts = alloc::vec![0; pi.k()];
    for i in 0..pi.n() {
        for (c, count) in counts.iter_mut().enumerate() {
            if (pi.weights()[(i, c)] - 1.0).abs() <= PURE_TOL {
                *count += 1;
            }
        }
    }
    counts
}

/// Full-rank `P` and at least one pure node per community on both sides.
pub fn check_identifiability(params: &ModelParams) -> IdentifiabilityReport {
    let s = sorted_singular_values(params.p.entries());
    let sigma_ratio = if s[0] > 0.0 { s[s.len() - 1] / s[0] } else { 0.0 };
    let row_pure_counts = pure_counts(&params.pi_r);
    let col_pure_counts = pure_counts(&params.pi_c);
    let pure_nodes_present = row_pure_counts.iter().chain(&col_pure_counts).all(|&c| c > 0);
    IdentifiabilityReport {
        sigma_ratio,
        full_rank: sigma_ratio > 1e-10,
        row_pure_counts,
        col_pure_counts,
        pure_nodes_present,
    }
}
