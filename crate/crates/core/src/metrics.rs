//! Permutation-matched mixed-Hamming errors and membership statistics.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::MembershipMatrix;
use crate::Matrix;

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, `O(K^3)`). Returns `assignment[row] = col`.
pub fn solve_assignment(cost: &Matrix) -> Vec<usize> {
    let n = cost.nrows();
    assert!(cost.is_square(), "assignment needs a square cost matrix");
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays; index 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    assignment
}

fn check_dims(pi_hat: &MembershipMatrix, pi: &MembershipMatrix) -> Result<()> {
    if pi_hat.n() != pi.n() {
        return Err(Error::DimensionMismatch { what: "membership rows", expected: pi.n(), found: pi_hat.n() });
    }
    if pi_hat.k() != pi.k() {
        return Err(Error::DimensionMismatch { what: "membership K", expected: pi.k(), found: pi_hat.k() });
    }
    Ok(())
}

/// `C(a, b) = sum_i |pi_hat(i, a) - pi(i, b)|`.
pub fn column_cost_matrix(pi_hat: &MembershipMatrix, pi: &MembershipMatrix) -> Result<Matrix> {
    check_dims(pi_hat, pi)?;
    let (x, y) = (pi_hat.weights(), pi.weights());
    Ok(Matrix::from_fn(pi.k(), pi.k(), |a, b| {
        x.column(a).iter().zip(y.column(b).iter()).map(|(p, q)| (p - q).abs()).sum()
    }))
}

/// Sums `cost(a, perm[a])` over `a` in ascending order.
pub fn permutation_cost(cost: &Matrix, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(a, &b)| cost[(a, b)]).sum()
}

/// Best column matching between an estimate and the truth.
///
/// `perm[a] = b` sends estimated community `a` to true community `b`; the
/// cost is the entrywise L1 distance `||pi_hat * Perm - pi||_1` under it.
/// Because the L1 objective splits over columns, this is an assignment
/// problem on the `K x K` column-cost matrix and is solved exactly.
pub fn match_permutation(pi_hat: &MembershipMatrix, pi: &MembershipMatrix) -> Result<(Vec<usize>, f64)> {
    let cost = column_cost_matrix(pi_hat, pi)?;
    let perm = solve_assignment(&cost);
    let total = permutation_cost(&cost, &perm);
    Ok((perm, total))
}

/// `min_P ||pi_hat P - pi||_1 / n`, in `[0, 2]`.
pub fn mixed_hamming(pi_hat: &MembershipMatrix, pi: &MembershipMatrix) -> Result<f64> {
    let (_, cost) = match_permutation(pi_hat, pi)?;
    Ok(cost / pi.n() as f64)
}

/// Row and column costs matched independently, over `n_r + n_c`.
pub fn di_mixed_hamming(
    pi_r_hat: &MembershipMatrix,
    pi_r: &MembershipMatrix,
    pi_c_hat: &MembershipMatrix,
    pi_c: &MembershipMatrix,
) -> Result<f64> {
    let (_, row_cost) = match_permutation(pi_r_hat, pi_r)?;
    let (_, col_cost) = match_permutation(pi_c_hat, pi_c)?;
    Ok((row_cost + col_cost) / (pi_r.n() + pi_c.n()) as f64)
}

/// Second-largest entry over largest entry of a PMF row.
pub fn diversity(row: &[f64]) -> f64 {
    let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &x in row {
        if x > first {
            second = first;
            first = x;
        } else if x > second {
            second = x;
        }
    }
    if row.len() < 2 || !(first > 0.0) {
        return 0.0;
    }
    second / first
}

/// Nodes with diversity at or above this are "highly mixed".
pub const HIGHLY_MIXED: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkStats {
    pub n_r: usize,
    pub n_c: usize,
    pub pure_r: usize,
    pub pure_c: usize,
    pub mixed_r: usize,
    pub mixed_c: usize,
    pub mu_r: f64,
    pub mu_c: f64,
    pub nu_r: f64,
    pub nu_c: f64,
    /// Row-vs-column structural difference; only for square, label-aligned estimates.
    pub mhamm: Option<f64>,
}

fn count_pure_and_mixed(pi: &MembershipMatrix, pure_tol: f64) -> (usize, usize) {
    let mut pure = 0;
    let mut mixed = 0;
    for i in 0..pi.n() {
        if pi.is_pure_row(i, pure_tol) {
            pure += 1;
        }
        if diversity(&pi.row(i)) >= HIGHLY_MIXED {
            mixed += 1;
        }
    }
    (pure, mixed)
}

/// Estimated-pure fractions, highly-mixed fractions and (square case) MHamm.
///
/// A node counts as pure when its largest weight is at least `1 - pure_tol`.
pub fn network_stats(pi_r_hat: &MembershipMatrix, pi_c_hat: &MembershipMatrix, pure_tol: f64) -> NetworkStats {
    let (pure_r, mixed_r) = count_pure_and_mixed(pi_r_hat, pure_tol);
    let (pure_c, mixed_c) = count_pure_and_mixed(pi_c_hat, pure_tol);
    let (n_r, n_c) = (pi_r_hat.n(), pi_c_hat.n());
    let aligned = n_r == n_c && pi_r_hat.k() == pi_c_hat.k() && pi_r_hat.labels() == pi_c_hat.labels();
    let mhamm = aligned.then(|| mixed_hamming(pi_r_hat, pi_c_hat).expect("dimensions checked"));
    let frac = |c: usize, n: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    NetworkStats {
        n_r,
        n_c,
        pure_r,
        pure_c,
        mixed_r,
        mixed_c,
        mu_r: frac(pure_r, n_r),
        mu_c: frac(pure_c, n_c),
        nu_r: frac(mixed_r, n_r),
        nu_c: frac(mixed_c, n_c),
        mhamm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CellStream;

    fn random_membership(n: usize, k: usize, stream: &mut CellStream) -> MembershipMatrix {
        let w = Matrix::from_fn(n, k, |_, _| stream.next_uniform() + 1e-3);
        MembershipMatrix::from_unnormalized(w).unwrap()
    }

    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(k - 1) {
            for pos in 0..k {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }

    fn brute_force(pi_hat: &MembershipMatrix, pi: &MembershipMatrix) -> f64 {
        let cost = column_cost_matrix(pi_hat, pi).unwrap();
        permutations(pi.k()).iter().map(|p| permutation_cost(&cost, p)).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn identity_and_swap() {
        let pi = MembershipMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.2, 0.5, 0.3], vec![0.0, 0.0, 1.0]]).unwrap();
        let (perm, cost) = match_permutation(&pi, &pi).unwrap();
        assert_eq!(perm, vec![0, 1, 2]);
        assert_eq!(cost, 0.0);
        let swapped = pi.permute_columns(&[1, 0, 2]);
        let (perm, cost) = match_permutation(&swapped, &pi).unwrap();
        assert_eq!(perm, vec![1, 0, 2]);
        assert_eq!(cost, 0.0);
        assert_eq!(mixed_hamming(&swapped, &pi).unwrap(), 0.0);
    }

    #[test]
    fn random_six_by_three_matches_enumeration() {
        let mut s = CellStream::new(8);
        for _ in 0..20 {
            let a = random_membership(6, 3, &mut s);
            let b = random_membership(6, 3, &mut s);
            assert_eq!(match_permutation(&a, &b).unwrap().1, brute_force(&a, &b));
        }
    }

    #[test]
    fn one_node_half_off() {
        let mut truth = vec![vec![1.0, 0.0]; 10];
        truth[9] = vec![0.0, 1.0];
        let mut est = truth.clone();
        est[0] = vec![0.5, 0.5];
        let t = MembershipMatrix::from_rows(&truth).unwrap();
        let e = MembershipMatrix::from_rows(&est).unwrap();
        assert!((mixed_hamming(&e, &t).unwrap() - 0.1).abs() < 1e-15);
        assert!((di_mixed_hamming(&t, &t, &e, &t).unwrap() - 0.05).abs() < 1e-15);
        let swapped = t.permute_columns(&[1, 0]);
        assert_eq!(di_mixed_hamming(&swapped, &t, &t, &t).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = MembershipMatrix::new(Matrix::identity(3, 3)).unwrap();
        let b = MembershipMatrix::new(Matrix::identity(2, 2)).unwrap();
        assert!(matches!(mixed_hamming(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn diversity_examples() {
        assert_eq!(diversity(&[1.0, 0.0, 0.0]), 0.0);
        assert_eq!(diversity(&[1.0 / 3.0; 3]), 1.0);
        assert!((diversity(&[0.5, 0.3, 0.2]) - 0.6).abs() < 1e-15);
        assert_eq!(diversity(&[0.3, 0.5, 0.2]), 0.6);
    }

    #[test]
    fn stats_examples() {
        let rows = [vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let p = MembershipMatrix::from_rows(&rows).unwrap().with_labels(crate::types::index_labels(4)).unwrap();
        let s = network_stats(&p, &p, 1e-6);
        assert_eq!((s.mu_r, s.mu_c, s.nu_r, s.nu_c, s.mhamm), (1.0, 1.0, 0.0, 0.0, Some(0.0)));

        let half =
            MembershipMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5], vec![1.0, 0.0], vec![0.9, 0.1]]).unwrap();
        let s = network_stats(&half, &p, 1e-6);
        assert_eq!(s.nu_r, 0.5);
        assert_eq!(s.mu_r, 0.25);
        assert_eq!(s.mhamm, None);

        let swapped = p.permute_columns(&[1, 0]);
        assert_eq!(network_stats(&p, &swapped, 1e-6).mhamm, Some(0.0));
    }
}
