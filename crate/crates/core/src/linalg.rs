//! Truncated SVD and spectral norms for sparse and dense matrices.
//!
//! Small problems go through a dense Golub-Kahan SVD. Larger ones use
//! seeded randomized subspace iteration: a Gaussian range finder, a few
//! power iterations with re-orthonormalization, then Rayleigh-Ritz on the
//! projected matrix, repeated until every kept triplet has a small residual.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::CellStream;
use crate::types::{BiAdjacency, SvdFactor};
use crate::Matrix;

/// Anything that can multiply a dense block from the left, with and without transpose.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `A * x`.
    fn apply(&self, x: &Matrix) -> Matrix;
    /// `A' * x`.
    fn apply_transpose(&self, x: &Matrix) -> Matrix;
    fn to_dense(&self) -> Matrix;
}

impl LinearOperator for Matrix {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &Matrix) -> Matrix {
        self * x
    }

    fn apply_transpose(&self, x: &Matrix) -> Matrix {
        self.tr_mul(x)
    }

    fn to_dense(&self) -> Matrix {
        self.clone()
    }
}

impl LinearOperator for BiAdjacency {
    fn nrows(&self) -> usize {
        BiAdjacency::nrows(self)
    }

    fn ncols(&self) -> usize {
        BiAdjacency::ncols(self)
    }

    fn apply(&self, x: &Matrix) -> Matrix {
        let b = x.ncols();
        let mut out = Matrix::zeros(BiAdjacency::nrows(self), b);
        for c in 0..b {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for i in 0..BiAdjacency::nrows(self) {
                oc[i] = self.row(i).iter().map(|&j| xc[j]).sum();
            }
        }
        out
    }

    fn apply_transpose(&self, x: &Matrix) -> Matrix {
        let b = x.ncols();
        let mut out = Matrix::zeros(BiAdjacency::ncols(self), b);
        for c in 0..b {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for i in 0..BiAdjacency::nrows(self) {
                let xi = xc[i];
                if xi != 0.0 {
                    for &j in self.row(i) {
                        oc[j] += xi;
                    }
                }
            }
        }
        out
    }

    fn to_dense(&self) -> Matrix {
        BiAdjacency::to_dense(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvdOptions {
    /// Extra columns carried by the randomized range finder.
    pub oversampling: usize,
    /// Power iterations before the first convergence check.
    pub power_iterations: usize,
    /// Converged when `max_k ||A v_k - sigma_k u_k|| <= tolerance * sigma_1`.
    pub tolerance: f64,
    /// Use the dense SVD when `min(n_rows, n_cols)` does not exceed this.
    pub max_dense_dim: usize,
    /// Cap on subspace iterations for the randomized path.
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            oversampling: 10,
            power_iterations: 5,
            tolerance: 1e-8,
            max_dense_dim: 512,
            max_iterations: 1000,
            seed: 0x5eed_5eed,
        }
    }
}

impl SvdOptions {
    /// Options that always take the randomized path.
    pub fn iterative() -> Self {
        Self { max_dense_dim: 0, ..Self::default() }
    }

    /// Options that always take the dense path.
    pub fn dense() -> Self {
        Self { max_dense_dim: usize::MAX, ..Self::default() }
    }
}

/// Top-`k` singular triplets of `a`, ordered by descending singular value.
///
/// Each column of `U` is signed so its first non-negligible entry is
/// positive (the matching column of `V` is flipped with it).
pub fn top_k_svd<A: LinearOperator + ?Sized>(a: &A, k: usize, opts: &SvdOptions) -> Result<SvdFactor> {
    let (m, n) = (a.nrows(), a.ncols());
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > m.min(n) {
        // rank cannot exceed the smaller dimension
        return Err(Error::RankDeficient { k, sigma_k: 0.0, sigma_1: spectral_norm(a) });
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::InvalidArgument("SVD tolerance must be positive".into()));
    }
    let mut factor =
        if m.min(n) <= opts.max_dense_dim { dense_top_k(&a.to_dense(), k)? } else { randomized_top_k(a, k, opts)? };
    let sigma_1 = factor.singular_values[0];
    if sigma_1 == 0.0 {
        return Err(Error::InvalidArgument("matrix is zero".into()));
    }
    let sigma_k = factor.singular_values[k - 1];
    if sigma_k < 1e-12 * sigma_1 {
        return Err(Error::RankDeficient { k, sigma_k, sigma_1 });
    }
    normalize_signs(&mut factor);
    Ok(factor)
}

fn dense_top_k(a: &Matrix, k: usize) -> Result<SvdFactor> {
    let svd = a
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(Error::ConvergenceFailure { iterations: 0, residual: f64::NAN })?;
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V'");
    let order = descending_order(svd.singular_values.as_slice());
    let keep = &order[..k];
    Ok(SvdFactor {
        u: u.select_columns(keep.iter()),
        singular_values: keep.iter().map(|&i| svd.singular_values[i]).collect(),
        v: vt.select_rows(keep.iter()).transpose(),
    })
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

fn orthonormalize(y: Matrix) -> Matrix {
    y.qr().q()
}

fn gaussian_block(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut stream = CellStream::new(seed);
    let rng = stream.rng_mut();
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

fn randomized_top_k<A: LinearOperator + ?Sized>(a: &A, k: usize, opts: &SvdOptions) -> Result<SvdFactor> {
    let (m, n) = (a.nrows(), a.ncols());
    let l = (k + opts.oversampling).min(m.min(n));
    let mut q = orthonormalize(a.apply(&gaussian_block(n, l, opts.seed)));
    for _ in 0..opts.power_iterations {
        q = orthonormalize(a.apply(&orthonormalize(a.apply_transpose(&q))));
    }
    let mut iterations = opts.power_iterations;
    loop {
        // B' = A' Q, so A ~ Q B = (Q X) S W' with B' = W S X'.
        let bt = a.apply_transpose(&q);
        let small = dense_top_k(&bt, l)?;
        let factor = SvdFactor {
            u: (&q * &small.v).columns(0, k).into_owned(),
            singular_values: small.singular_values[..k].to_vec(),
            v: small.u.columns(0, k).into_owned(),
        };
        let sigma_1 = factor.singular_values[0];
        let av = a.apply(&factor.v);
        let residual =
            (0..k).map(|j| (av.column(j) - factor.u.column(j) * factor.singular_values[j]).norm()).fold(0.0, f64::max);
        if sigma_1 == 0.0 || residual <= opts.tolerance * sigma_1 {
            return Ok(factor);
        }
        if iterations >= opts.max_iterations {
            return Err(Error::ConvergenceFailure { iterations, residual: residual / sigma_1 });
        }
        iterations += 1;
        q = orthonormalize(a.apply(&orthonormalize(bt)));
    }
}

fn normalize_signs(f: &mut SvdFactor) {
    for j in 0..f.k() {
        let col = f.u.column(j);
        let scale = col.amax();
        let first = col.iter().copied().find(|x| x.abs() > 1e-12 * scale).unwrap_or(0.0);
        if first < 0.0 {
            f.u.column_mut(j).neg_mut();
            f.v.column_mut(j).neg_mut();
        }
    }
}

/// Largest singular value, by block power iteration on `A'A` from a fixed start.
pub fn spectral_norm<A: LinearOperator + ?Sized>(a: &A) -> f64 {
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 {
        return 0.0;
    }
    let b = 8.min(m.min(n));
    let mut q = orthonormalize(gaussian_block(n, b, 0x0005_9ec7));
    let mut prev = 0.0;
    for _ in 0..5000 {
        let aq = a.apply(&q);
        let est = aq.clone().try_svd(false, false, f64::EPSILON, 0).map_or(0.0, |s| s.singular_values.max());
        if est == 0.0 {
            // Either A = 0 or the start block is orthogonal to its row space.
            return dense_norm(a);
        }
        if (est - prev).abs() <= 1e-13 * est {
            return est;
        }
        prev = est;
        q = orthonormalize(a.apply_transpose(&aq));
    }
    prev
}

fn dense_norm<A: LinearOperator + ?Sized>(a: &A) -> f64 {
    a.to_dense().singular_values().max()
}
