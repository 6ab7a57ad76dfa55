//! Domain types shared by every stage of the pipeline.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, MembershipViolation, Result};
use crate::Matrix;

/// Tolerance on row sums of a membership matrix.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Row-stochastic `n x K` matrix of community memberships.
///
/// Every row is a probability mass function over the `K` communities.
/// Optional node labels travel with the rows so that filtered or
/// re-ordered estimates can still be aligned with ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipMatrix {
    weights: Matrix,
    labels: Option<Vec<String>>,
}

/// Checks every membership invariant and reports all violations at once.
pub fn validate_membership(weights: Matrix) -> Result<MembershipMatrix> {
    let (n, k) = weights.shape();
    let mut violations = Vec::new();
    if k == 0 || n < k {
        violations.push(MembershipViolation::Shape { n, k });
    }
    for i in 0..n {
        let mut sum = 0.0;
        let mut finite = true;
        for j in 0..k {
            let w = weights[(i, j)];
            if !w.is_finite() {
                violations.push(MembershipViolation::NonFinite { row: i, col: j });
                finite = false;
                continue;
            }
            if w < 0.0 {
                violations.push(MembershipViolation::NegativeEntry { row: i, col: j, value: w });
            } else if w > 1.0 {
                violations.push(MembershipViolation::EntryAboveOne { row: i, col: j, value: w });
            }
            sum += w;
        }
        if finite && k > 0 && (sum - 1.0).abs() > ROW_SUM_TOL {
            violations.push(MembershipViolation::RowSumMismatch { row: i, sum });
        }
    }
    if violations.is_empty() {
        Ok(MembershipMatrix { weights, labels: None })
    } else {
        Err(Error::InvalidMembership(violations))
    }
}

impl MembershipMatrix {
    pub fn new(weights: Matrix) -> Result<Self> {
        validate_membership(weights)
    }

    /// Construction helper: divides each row by its sum before validating.
    /// Rows must be nonnegative with a positive sum.
    pub fn from_unnormalized(mut weights: Matrix) -> Result<Self> {
        for i in 0..weights.nrows() {
            let s: f64 = weights.row(i).iter().sum();
            if s > 0.0 && s.is_finite() {
                weights.row_mut(i).scale_mut(1.0 / s);
            }
        }
        validate_membership(weights)
    }

    /// Builds a membership matrix from per-row PMFs.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(Error::DimensionMismatch { what: "membership row length", expected: k, found: bad.len() });
        }
        validate_membership(Matrix::from_fn(rows.len(), k, |i, j| rows[i][j]))
    }

    /// Attaches node labels (one per row, unique).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        check_labels("membership", &labels, self.n())?;
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn k(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn into_weights(self) -> Matrix {
        self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.weights.row(i).iter().copied().collect()
    }

    /// True when some entry of row `i` is within `tol` of one.
    pub fn is_pure_row(&self, i: usize, tol: f64) -> bool {
        self.weights.row(i).iter().any(|&w| w >= 1.0 - tol)
    }

    /// Restricts to the given rows, keeping their labels.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let weights = self.weights.select_rows(rows.iter());
        let labels = self.labels.as_ref().map(|l| rows.iter().map(|&i| l[i].clone()).collect());
        Self { weights, labels }
    }

    /// Reorders communities: column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let weights = Matrix::from_fn(self.n(), self.k(), |i, j| self.weights[(i, perm[j])]);
        Self { weights, labels: self.labels.clone() }
    }
}

fn check_labels(what: &str, labels: &[String], expected: usize) -> Result<()> {
    if labels.len() != expected {
        return Err(Error::InvalidLabels(format!("{what}: expected {expected} labels, found {}", labels.len())));
    }
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidLabels(format!("{what}: duplicate label {l:?}")));
        }
    }
    Ok(())
}

/// `1`-based index labels, the default for synthesized nodes.
pub fn index_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// Block connectivity matrix `P = rho * P_tilde` with `max P_tilde = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMatrix {
    entries: Matrix,
    rho: f64,
    p_tilde: Matrix,
}

impl ProbabilityMatrix {
    /// Factors an explicit probability matrix; `rho` is its largest entry.
    pub fn from_entries(entries: Matrix) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::InvalidProbabilityMatrix(format!(
                "expected a nonempty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for ((row, col), &value) in indexed(&entries) {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ProbabilityOutOfRange { row, col, value });
            }
        }
        let rho = entries.max();
        if rho <= 0.0 {
            return Err(Error::InvalidProbabilityMatrix("all entries are zero".into()));
        }
        let p_tilde = &entries / rho;
        Ok(Self { entries, rho, p_tilde })
    }

    /// Builds `rho * p_tilde`; `p_tilde` must be nonnegative with maximum one.
    pub fn from_scaled(rho: f64, p_tilde: Matrix) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidProbabilityMatrix(format!("rho={rho} is not in (0, 1]")));
        }
        if !p_tilde.is_square() || p_tilde.nrows() == 0 {
            return Err(Error::InvalidProbabilityMatrix("p_tilde must be square".into()));
        }
        if p_tilde.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidProbabilityMatrix("p_tilde has a negative entry".into()));
        }
        let max = p_tilde.max();
        if (max - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbabilityMatrix(format!("max entry of p_tilde is {max}, expected 1")));
        }
        let entries = &p_tilde * rho;
        Ok(Self { entries, rho, p_tilde })
    }

    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn p_tilde(&self) -> &Matrix {
        &self.p_tilde
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        sorted_singular_values(&self.entries)
    }

    /// Full rank check: `sigma_K > 1e-10 * sigma_1`.
    pub fn is_full_rank(&self) -> bool {
        let s = self.singular_values();
        s[s.len() - 1] > 1e-10 * s[0]
    }
}

pub(crate) fn sorted_singular_values(m: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn indexed(m: &Matrix) -> impl Iterator<Item = ((usize, usize), &f64)> {
    let nrows = m.nrows();
    m.iter().enumerate().map(move |(idx, v)| ((idx % nrows, idx / nrows), v))
}

/// Sparse binary directed adjacency between `n_rows` source nodes and
/// `n_cols` target nodes, stored row-compressed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiAdjacency {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl BiAdjacency {
    /// Builds an adjacency from `(row, col)` pairs; duplicate pairs collapse.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        check_labels("row", &row_labels, n_rows)?;
        check_labels("column", &col_labels, n_cols)?;
        let mut pairs: Vec<(usize, usize)> = edges.into_iter().collect();
        if let Some(&(row, col)) = pairs.iter().find(|&&(r, c)| r >= n_rows || c >= n_cols) {
            return Err(Error::EdgeOutOfRange { row, col, n_rows, n_cols });
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut row_ptr = alloc::vec![0usize; n_rows + 1];
        for &(r, _) in &pairs {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = pairs.into_iter().map(|(_, c)| c).collect();
        Ok(Self { n_rows, n_cols, row_ptr, col_idx, row_labels, col_labels })
    }

    /// Same as [`BiAdjacency::new`] with `1..=n` labels on each axis.
    pub fn with_index_labels(
        n_rows: usize,
        n_cols: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        Self::new(n_rows, n_cols, edges, index_labels(n_rows), index_labels(n_cols))
    }

    /// Every nonzero entry of `dense` becomes an edge.
    pub fn from_dense(dense: &Matrix) -> Self {
        let (n_rows, n_cols) = dense.shape();
        let edges = (0..n_rows).flat_map(|i| (0..n_cols).map(move |j| (i, j))).filter(|&(i, j)| dense[(i, j)] != 0.0);
        Self::with_index_labels(n_rows, n_cols, edges).expect("indices are in range")
    }

    pub fn nrows(&self) -> usize {
        self.n_rows
    }

    pub fn ncols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// No rows or no columns left.
    pub fn is_empty(&self) -> bool {
        self.n_rows == 0 || self.n_cols == 0
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// Column indices of the edges leaving row node `i`, ascending.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&j).is_ok()
    }

    /// Edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).iter().map(move |&j| (i, j)))
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.n_rows).map(|i| self.row_ptr[i + 1] - self.row_ptr[i]).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = alloc::vec![0usize; self.n_cols];
        for &j in &self.col_idx {
            d[j] += 1;
        }
        d
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n_rows, self.n_cols);
        for (i, j) in self.edges() {
            m[(i, j)] = 1.0;
        }
        m
    }

    /// Induced submatrix on the listed rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = alloc::vec![usize::MAX; self.n_cols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let edges = rows.iter().enumerate().flat_map(|(new_i, &old_i)| {
            let col_map = &col_map;
            self.row(old_i).iter().filter(move |&&j| col_map[j] != usize::MAX).map(move |&j| (new_i, col_map[j]))
        });
        let row_labels = rows.iter().map(|&i| self.row_labels[i].clone()).collect();
        let col_labels = cols.iter().map(|&j| self.col_labels[j].clone()).collect();
        Self::new(rows.len(), cols.len(), edges.collect::<Vec<_>>(), row_labels, col_labels)
            .expect("submatrix of a valid adjacency is valid")
    }

    /// Square with the same label sequence on both axes.
    pub fn is_square_aligned(&self) -> bool {
        self.n_rows == self.n_cols && self.row_labels == self.col_labels
    }
}

/// Top-`K` singular triplets `U diag(sigma) V'`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdFactor {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

impl SvdFactor {
    pub fn k(&self) -> usize {
        self.singular_values.len()
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.v.transpose()
    }
}

/// Row indices chosen by vertex hunting and the corresponding input rows.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexSet {
    pub indices: Vec<usize>,
    pub corners: Matrix,
}
