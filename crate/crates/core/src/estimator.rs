//! Spectral membership estimation: DiSP, its noiseless (ideal) form, and the
//! projection-matrix variant that works on `U U'` instead of `U`.
//!
//! Each side runs the same three stages:
//! 1. PCA: top-`K` SVD of the adjacency;
//! 2. vertex hunting: SP on the rows of the singular vectors gives the
//!    near-corner matrix `B`;
//! 3. membership reconstruction: `Y = U B' (B B')^-1`, negatives clipped to
//!    zero, rows scaled to sum to one.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Axis, Error, Result};
use crate::linalg::{top_k_svd, SvdOptions};
use crate::types::{validate_membership, BiAdjacency, MembershipMatrix, SvdFactor, VertexSet};
use crate::vertexhunt::{successive_projection, successive_projection_factored};
use crate::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct DispOptions {
    pub svd: SvdOptions,
    /// Largest accepted condition number of the corner Gram matrix `B B'`.
    pub max_condition: f64,
    /// The projection-matrix variant forms `U U'` explicitly only up to this many rows.
    pub materialize_limit: usize,
}

impl Default for DispOptions {
    fn default() -> Self {
        Self { svd: SvdOptions::default(), max_condition: 1e12, materialize_limit: 2000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispResult {
    pub pi_r_hat: MembershipMatrix,
    pub pi_c_hat: MembershipMatrix,
    pub vertex_r: VertexSet,
    pub vertex_c: VertexSet,
    pub svd: SvdFactor,
    pub diagnostics: BTreeMap<String, f64>,
}

struct Reconstruction {
    memberships: MembershipMatrix,
    fallback_rows: usize,
    clipped_entries: usize,
    gram_condition: f64,
}

fn check_degrees(a: &BiAdjacency) -> Result<()> {
    if a.is_empty() {
        return Err(Error::InvalidArgument("adjacency has no rows or no columns".into()));
    }
    if let Some(i) = a.out_degrees().iter().position(|&d| d == 0) {
        return Err(Error::ZeroDegreeNode { axis: Axis::Row, index: i, label: a.row_labels()[i].clone() });
    }
    if let Some(j) = a.in_degrees().iter().position(|&d| d == 0) {
        return Err(Error::ZeroDegreeNode { axis: Axis::Column, index: j, label: a.col_labels()[j].clone() });
    }
    Ok(())
}

fn gram_condition(gram: &Matrix) -> f64 {
    let s = gram.singular_values();
    let (min, max) = (s.min(), s.max());
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// `Y = projected * gram^-1`, then clip, normalize and fall back on empty rows.
///
/// `projected` is `X C'` and `gram` is `C C'` for rows `X` and corners `C`.
fn reconstruct_from_products(projected: &Matrix, gram: &Matrix, max_condition: f64) -> Result<Reconstruction> {
    let condition = gram_condition(gram);
    if !(condition <= max_condition) {
        return Err(Error::SingularCornerMatrix { condition });
    }
    let solved = gram.clone().lu().solve(&projected.transpose()).ok_or(Error::SingularCornerMatrix { condition })?;
    // gram is symmetric, so (gram^-1 projected')' = projected gram^-1.
    let mut y = solved.transpose();
    let (n, k) = y.shape();
    let mut fallback_rows = 0;
    let mut clipped_entries = 0;
    for i in 0..n {
        let mut argmax = 0;
        for j in 1..k {
            if y[(i, j)] > y[(i, argmax)] {
                argmax = j;
            }
        }
        let mut sum = 0.0;
        for j in 0..k {
            if y[(i, j)] < 0.0 {
                y[(i, j)] = 0.0;
                clipped_entries += 1;
            }
            sum += y[(i, j)];
        }
        if sum > 0.0 {
            y.row_mut(i).scale_mut(1.0 / sum);
        } else {
            y.row_mut(i).fill(0.0);
            y[(i, argmax)] = 1.0;
            fallback_rows += 1;
        }
    }
    Ok(Reconstruction {
        memberships: validate_membership(y)?,
        fallback_rows,
        clipped_entries,
        gram_condition: condition,
    })
}

/// Membership reconstruction from rows `u` (`n x m`) and corners (`K x m`).
///
/// Returns the memberships and how many rows clipped to all-zero and fell
/// back to the pure vertex at the argmax of their unclipped weights.
pub fn reconstruct_memberships(u: &Matrix, corners: &Matrix, max_condition: f64) -> Result<(MembershipMatrix, usize)> {
    if u.ncols() != corners.ncols() {
        return Err(Error::DimensionMismatch { what: "corner width", expected: u.ncols(), found: corners.ncols() });
    }
    let rec = reconstruct_from_products(&(u * corners.transpose()), &(corners * corners.transpose()), max_condition)?;
    Ok((rec.memberships, rec.fallback_rows))
}

fn smallest_singular_value(m: &Matrix) -> f64 {
    m.singular_values().min()
}

fn record(diag: &mut BTreeMap<String, f64>, side: &str, vs: &VertexSet, rec: &Reconstruction) {
    diag.insert(["sigma_k_corner_", side].concat(), smallest_singular_value(&vs.corners));
    diag.insert(["gram_condition_", side].concat(), rec.gram_condition);
    diag.insert(["clipped_entries_", side].concat(), rec.clipped_entries as f64);
    diag.insert(["fallback_rows_", side].concat(), rec.fallback_rows as f64);
}

fn svd_diagnostics(svd: &SvdFactor) -> BTreeMap<String, f64> {
    let mut diag = BTreeMap::new();
    diag.insert("sigma_1".to_string(), svd.singular_values[0]);
    diag.insert("sigma_k".to_string(), svd.singular_values[svd.k() - 1]);
    diag
}

/// Vertex hunting and membership reconstruction on given singular vectors.
pub fn estimate_from_factor(svd: SvdFactor, opts: &DispOptions) -> Result<DispResult> {
    let k = svd.k();
    let vertex_r = successive_projection(&svd.u, k)?;
    let rec_r = reconstruct_from_products(
        &(&svd.u * vertex_r.corners.transpose()),
        &(&vertex_r.corners * vertex_r.corners.transpose()),
        opts.max_condition,
    )?;
    let vertex_c = successive_projection(&svd.v, k)?;
    let rec_c = reconstruct_from_products(
        &(&svd.v * vertex_c.corners.transpose()),
        &(&vertex_c.corners * vertex_c.corners.transpose()),
        opts.max_condition,
    )?;
    let mut diagnostics = svd_diagnostics(&svd);
    record(&mut diagnostics, "r", &vertex_r, &rec_r);
    record(&mut diagnostics, "c", &vertex_c, &rec_c);
    Ok(DispResult { pi_r_hat: rec_r.memberships, pi_c_hat: rec_c.memberships, vertex_r, vertex_c, svd, diagnostics })
}

fn attach_labels(mut res: DispResult, a: &BiAdjacency) -> Result<DispResult> {
    res.pi_r_hat = res.pi_r_hat.with_labels(a.row_labels().to_vec())?;
    res.pi_c_hat = res.pi_c_hat.with_labels(a.col_labels().to_vec())?;
    Ok(res)
}

/// DiSP on an observed adjacency. Every node needs degree at least one;
/// the caller is expected to preprocess, nothing is dropped here.
pub fn disp(a: &BiAdjacency, k: usize, opts: &DispOptions) -> Result<DispResult> {
    check_degrees(a)?;
    let svd = top_k_svd(a, k, &opts.svd)?;
    attach_labels(estimate_from_factor(svd, opts)?, a)
}

/// Ideal DiSP on a population matrix `Omega`; recovers `(Pi_r, Pi_c)` up to
/// a permutation of communities when the model is identifiable.
pub fn ideal_disp(omega: &Matrix, k: usize, opts: &DispOptions) -> Result<(MembershipMatrix, MembershipMatrix)> {
    let svd = top_k_svd(omega, k, &opts.svd)?;
    let res = estimate_from_factor(svd, opts)?;
    Ok((res.pi_r_hat, res.pi_c_hat))
}

/// Vertex hunting and reconstruction on the rows of `U U'`.
fn projection_side(u: &Matrix, opts: &DispOptions) -> Result<(VertexSet, Reconstruction)> {
    let k = u.ncols();
    if u.nrows() <= opts.materialize_limit {
        let u2 = u * u.transpose();
        let vs = successive_projection(&u2, k)?;
        let rec = reconstruct_from_products(
            &(&u2 * vs.corners.transpose()),
            &(&vs.corners * vs.corners.transpose()),
            opts.max_condition,
        )?;
        Ok((vs, rec))
    } else {
        // Corners C = U(I,:) U', so U2 C' = U (C U)' and no n x n product is formed.
        let vs = successive_projection_factored(u, u, k)?;
        let projected = u * (&vs.corners * u).transpose();
        let rec = reconstruct_from_products(&projected, &(&vs.corners * vs.corners.transpose()), opts.max_condition)?;
        Ok((vs, rec))
    }
}

/// The projection-matrix form of DiSP: SP and reconstruction run on the
/// rows of `U U'` and `V V'`. Returns the same memberships as [`disp`].
pub fn disp_equivalence(a: &BiAdjacency, k: usize, opts: &DispOptions) -> Result<DispResult> {
    check_degrees(a)?;
    let svd = top_k_svd(a, k, &opts.svd)?;
    let (vertex_r, rec_r) = projection_side(&svd.u, opts)?;
    let (vertex_c, rec_c) = projection_side(&svd.v, opts)?;
    let mut diagnostics = svd_diagnostics(&svd);
    record(&mut diagnostics, "r", &vertex_r, &rec_r);
    record(&mut diagnostics, "c", &vertex_c, &rec_c);
    let res =
        DispResult { pi_r_hat: rec_r.memberships, pi_c_hat: rec_c.memberships, vertex_r, vertex_c, svd, diagnostics };
    attach_labels(res, a)
}

/// Row indices of `pi` whose membership is a unit vector, one per community.
pub fn pure_index_set(pi: &MembershipMatrix) -> Option<Vec<usize>> {
    (0..pi.k()).map(|c| (0..pi.n()).find(|&i| pi.weights()[(i, c)] == 1.0)).collect()
}
