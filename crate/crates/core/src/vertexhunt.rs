//! Successive projection (SP) corner finding.
//!
//! Repeatedly picks the residual row of largest Euclidean norm, then
//! projects every row onto the orthogonal complement of that residual row.
//! Ties go to the smallest row index.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::VertexSet;
use crate::Matrix;

/// Residual rows below this fraction of the initial largest row norm count as zero.
pub const COLLAPSE_TOL: f64 = 1e-12;

fn hunt(mut residual: Matrix, k: usize) -> Result<Vec<usize>> {
    let n = residual.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("SP needs 1 <= k <= n, got k={k}, n={n}")));
    }
    let mut picked: Vec<usize> = Vec::with_capacity(k);
    let mut initial = None;
    for step in 0..k {
        let mut best = (usize::MAX, -1.0f64);
        for i in 0..n {
            if picked.contains(&i) {
                continue;
            }
            let norm2 = residual.row(i).norm_squared();
            if norm2 > best.1 {
                best = (i, norm2);
            }
        }
        let (idx, norm2) = best;
        let norm = libm::sqrt(norm2);
        let scale = *initial.get_or_insert(norm);
        if !(norm > COLLAPSE_TOL * scale) || scale == 0.0 {
            return Err(Error::RankCollapse { picked: step, k });
        }
        picked.push(idx);
        // R <- R (I - u'u / |u|^2) with u the selected residual row.
        let u = residual.row(idx).transpose();
        let coef = &residual * &u / norm2;
        residual.ger(-1.0, &coef, &u, 1.0);
    }
    Ok(picked)
}

/// Runs SP on the rows of `y` and returns `k` distinct row indices in
/// selection order, together with the original rows at those indices.
pub fn successive_projection(y: &Matrix, k: usize) -> Result<VertexSet> {
    let indices = hunt(y.clone(), k)?;
    let corners = y.select_rows(indices.iter());
    Ok(VertexSet { indices, corners })
}

/// SP on the rows of `left * right'` without forming the product.
///
/// `right` must have orthonormal columns; then row norms and projections of
/// the product agree with those of `left`, and only the `k` selected rows of
/// the product are materialized as corners.
pub fn successive_projection_factored(left: &Matrix, right: &Matrix, k: usize) -> Result<VertexSet> {
    if left.ncols() != right.ncols() {
        return Err(Error::DimensionMismatch {
            what: "factor inner dimension",
            expected: left.ncols(),
            found: right.ncols(),
        });
    }
    let indices = hunt(left.clone(), k)?;
    let corners = left.select_rows(indices.iter()) * right.transpose();
    Ok(VertexSet { indices, corners })
}
