//! Dense linear-algebra helpers built on nalgebra's SVD and symmetric
//! eigensolver. All rank decisions use the same rule: a singular value is
//! zero when it is at most `zero_rel` times the largest one.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

fn rank_threshold(singular_values: &DVector<f64>, zero_rel: f64) -> f64 {
    let max = singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    zero_rel * max
}

pub fn numerical_rank(m: &DMatrix<f64>, zero_rel: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    let threshold = rank_threshold(&sv, zero_rel);
    sv.iter().filter(|&&s| s > threshold).count()
}

/// Orthonormal basis (as columns) of `ker(m)`.
pub fn null_space(m: &DMatrix<f64>, zero_rel: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Thin SVD only yields min(rows, cols) right singular vectors; pad with
    // zero rows so that V is square.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.rows_mut(0, rows).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let max = svd.singular_values.max();
    let threshold = if max == 0.0 {
        0.0
    } else {
        rank_threshold(&svd.singular_values, zero_rel)
    };
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= threshold)
        .collect();
    let mut basis = DMatrix::zeros(cols, kept.len());
    for (c, &k) in kept.iter().enumerate() {
        basis.set_column(c, &v_t.row(k).transpose());
    }
    basis
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn range_basis(m: &DMatrix<f64>, zero_rel: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let max = svd.singular_values.max();
    if max == 0.0 {
        return DMatrix::zeros(rows, 0);
    }
    let threshold = rank_threshold(&svd.singular_values, zero_rel);
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > threshold)
        .collect();
    let mut basis = DMatrix::zeros(rows, kept.len());
    for (c, &k) in kept.iter().enumerate() {
        basis.set_column(c, &u.column(k));
    }
    basis
}

/// Eigenvalues in ascending order with matching eigenvector columns.
/// The input is symmetrized first.
pub fn symmetric_eigen_ascending(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// Minimum-norm least-squares solution of `m x = rhs` via the pseudo-inverse,
/// followed by one step of iterative refinement.
pub fn min_norm_solve(m: &DMatrix<f64>, rhs: &DVector<f64>, zero_rel: f64) -> DVector<f64> {
    let cols = m.ncols();
    if m.is_empty() {
        return DVector::zeros(cols);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let threshold = rank_threshold(&svd.singular_values, zero_rel);
    let apply_pinv = |b: &DVector<f64>| {
        let mut x = DVector::zeros(cols);
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s > threshold && s > 0.0 {
                let coeff = u.column(k).dot(b) / s;
                x += v_t.row(k).transpose() * coeff;
            }
        }
        x
    };
    let x = apply_pinv(rhs);
    let correction = apply_pinv(&(rhs - m * &x));
    x + correction
}

/// Largest column norm of `(I - Q Q^T) X` for an orthonormal `Q`.
pub fn projection_residual(orthonormal: &DMatrix<f64>, vectors: &DMatrix<f64>) -> f64 {
    let residual = if orthonormal.ncols() == 0 {
        vectors.clone()
    } else {
        vectors - orthonormal * (orthonormal.transpose() * vectors)
    };
    residual.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Largest column norm of `m`.
pub fn max_column_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
}
