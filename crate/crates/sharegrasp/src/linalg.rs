//! SVD-backed subspace helpers.
//!
//! The velocity decomposition needs null spaces, row spaces, orthonormal
//! complements and minimum-norm least-squares solutions of small dense
//! matrices (at most a dozen rows over R^6). All of it is derived from one
//! SVD per matrix with the shared relative rank cutoff from [`crate::tol`].
//! Sign conventions of singular vectors are canonicalized so that repeated
//! runs (and reordered but equal inputs) produce identical bytes downstream.

use nalgebra::{DMatrix, DVector};

use crate::tol;

/// Threshold on singular values: relative to the largest, with an absolute
/// floor so the zero matrix has rank zero.
fn sv_cutoff(svals: &[f64]) -> f64 {
    let max = svals.iter().cloned().fold(0.0f64, f64::max);
    (max * tol::RANK_REL).max(1e-14)
}

/// Flip the sign of each row so its first significantly nonzero entry is
/// positive. Basis choices out of an SVD are sign-ambiguous; pinning the
/// sign keeps reports byte-stable.
pub fn canonicalize_row_signs(m: &mut DMatrix<f64>) {
    for r in 0..m.nrows() {
        let lead = (0..m.ncols()).find(|&c| m[(r, c)].abs() > 1e-12);
        if let Some(c) = lead {
            if m[(r, c)] < 0.0 {
                for k in 0..m.ncols() {
                    m[(r, k)] = -m[(r, k)];
                }
            }
        }
    }
}

/// Numerical rank with the shared cutoff.
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let cut = sv_cutoff(svd.singular_values.as_slice());
    svd.singular_values.iter().filter(|&&s| s > cut).count()
}

/// Orthonormal basis of the (right) null space, returned as columns.
///
/// An empty matrix (no rows) constrains nothing: the identity is returned.
pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let cut = sv_cutoff(svd.singular_values.as_slice());
    let r = svd.singular_values.iter().filter(|&&s| s > cut).count();
    // Rows r.. of V^T span the null space (plus rows beyond the stored
    // min(nrows, ncols) block, which nalgebra does not return: complete
    // the basis through the orthonormal complement of the row space).
    let row_basis = v_t.rows(0, r).into_owned();
    orthonormal_complement(&row_basis).transpose()
}

/// Orthonormal basis of the row space, returned as rows (sign-canonical).
pub fn row_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::zeros(0, n);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let cut = sv_cutoff(svd.singular_values.as_slice());
    let r = svd.singular_values.iter().filter(|&&s| s > cut).count();
    let mut rows = v_t.rows(0, r).into_owned();
    canonicalize_row_signs(&mut rows);
    rows
}

/// Orthonormal basis (as rows, sign-canonical) of the subspace orthogonal to
/// the given rows. The input rows need not be orthonormal.
pub fn orthonormal_complement(rows: &DMatrix<f64>) -> DMatrix<f64> {
    let n = rows.ncols();
    if rows.nrows() == 0 {
        let mut id = DMatrix::identity(n, n);
        canonicalize_row_signs(&mut id);
        return id;
    }
    // Gram-Schmidt the coordinate directions against the row space.
    let basis = row_space(rows);
    let r = basis.nrows();
    let mut out: Vec<DVector<f64>> = Vec::new();
    for k in 0..n {
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        for i in 0..r {
            let row = basis.row(i).transpose();
            let proj = row.dot(&v);
            v -= row * proj;
        }
        for prev in &out {
            let proj = prev.dot(&v);
            v -= prev * proj;
        }
        let norm = v.norm();
        if norm > 1e-9 {
            out.push(v / norm);
        }
        if out.len() == n - r {
            break;
        }
    }
    let mut m = DMatrix::zeros(out.len(), n);
    for (i, v) in out.iter().enumerate() {
        m.set_row(i, &v.transpose());
    }
    canonicalize_row_signs(&mut m);
    m
}

/// Moore-Penrose pseudo-inverse with the shared cutoff.
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let cut = sv_cutoff(svd.singular_values.as_slice());
    svd.pseudo_inverse(cut).expect("svd computed")
}

/// Minimum-norm solution of `A x = b` along with the residual norm
/// `|A x - b|` (zero for consistent systems).
pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    if a.nrows() == 0 {
        return (DVector::zeros(a.ncols()), 0.0);
    }
    let x = pinv(a) * b;
    let residual = (a * &x - b).norm();
    (x, residual)
}
