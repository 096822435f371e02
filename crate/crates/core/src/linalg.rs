//! Small dense helpers shared by the operator modules.
//!
//! Matrices are vectorized column-major everywhere, which is nalgebra's
//! native storage order, so `vectorize` is a plain copy.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub fn vectorize(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    debug_assert_eq!(v.len(), rows * cols);
    DMatrix::from_column_slice(rows, cols, v)
}

/// Frobenius inner product.
pub fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

pub fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn sym_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(symmetric_part(m));
    eig.eigenvalues
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().iter().sum()
}

/// Orthonormal basis of the orthogonal complement of the column span of `u`
/// (columns of `u` assumed orthonormal).
pub fn orthogonal_complement(u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u.nrows();
    let k = u.ncols();
    if k >= n {
        return DMatrix::zeros(n, 0);
    }
    let proj = DMatrix::identity(n, n) - u * u.transpose();
    let eig = SymmetricEigen::new(symmetric_part(&proj));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let cols: Vec<DVector<f64>> = order[..n - k]
        .iter()
        .map(|&j| eig.eigenvectors.column(j).into_owned())
        .collect();
    DMatrix::from_columns(&cols)
}

/// Thin SVD `m = U diag(s) Vᵀ` with `s` sorted in decreasing order.
///
/// nalgebra's bidiagonal SVD occasionally returns factors that do not
/// recompose to `m` on rank-deficient input. The result is checked and, on
/// failure, recomputed from the symmetric eigendecomposition of
/// `[[0, M], [Mᵀ, 0]]`, whose eigenpairs are `(±σ, [u; ±v]/√2)`.
pub fn thin_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (p, q) = m.shape();
    let k = p.min(q);
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v = svd.v_t.expect("right singular vectors requested").transpose();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let u = u.select_columns(&order);
    let v = v.select_columns(&order);
    let s = DVector::from_iterator(k, order.iter().map(|&j| svd.singular_values[j]));
    let scale = m.norm().max(f64::MIN_POSITIVE);
    if (&u * DMatrix::from_diagonal(&s) * v.transpose() - m).norm() <= 1e-10 * scale {
        return (u, s, v);
    }
    jordan_wielandt_svd(m)
}

fn jordan_wielandt_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (p, q) = m.shape();
    let k = p.min(q);
    let mut jw = DMatrix::zeros(p + q, p + q);
    jw.view_mut((0, p), (p, q)).copy_from(m);
    jw.view_mut((p, 0), (q, p)).copy_from(&m.transpose());
    let eig = SymmetricEigen::new(jw);
    let mut order: Vec<usize> = (0..p + q).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut u = DMatrix::zeros(p, k);
    let mut v = DMatrix::zeros(q, k);
    let mut s = DVector::zeros(k);
    for (c, &j) in order[..k].iter().enumerate() {
        let x = eig.eigenvectors.column(j);
        let (xu, xv) = (x.rows(0, p), x.rows(p, q));
        s[c] = eig.eigenvalues[j].max(0.0);
        if xu.norm() > 0.0 {
            u.set_column(c, &(xu / xu.norm()));
        }
        if xv.norm() > 0.0 {
            v.set_column(c, &(xv / xv.norm()));
        }
    }
    (u, s, v)
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
