//! Random low-rank truths that lie in the span of each built-in family.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index::sample;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::{BasisSet, Family};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_part, vectorize};
use crate::rng::{rng_from_seed, Rng};

fn gaussian(rows: usize, cols: usize, rng: &mut Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

fn check_rank(r: usize, limit: usize) -> Result<()> {
    if r == 0 || r > limit {
        return Err(Error::InvalidInput(format!("rank {r} must lie in 1..={limit}")));
    }
    Ok(())
}

/// `A Bᵀ` with standard Gaussian factors.
pub fn low_rank(rows: usize, cols: usize, r: usize, seed: u64) -> Result<DMatrix<f64>> {
    check_rank(r, rows.min(cols))?;
    let mut rng = rng_from_seed(seed);
    let a = gaussian(rows, r, &mut rng);
    let b = gaussian(cols, r, &mut rng);
    Ok(a * b.transpose())
}

/// `n` Gaussian points in `ℝʳ`, translated so their centroid is the origin.
pub fn centered_points(n: usize, r: usize, seed: u64) -> Result<DMatrix<f64>> {
    if n < r + 1 {
        return Err(Error::InvalidInput(format!("need n >= r + 1, got n={n}, r={r}")));
    }
    check_rank(r, n)?;
    let mut rng = rng_from_seed(seed);
    let mut p = gaussian(n, r, &mut rng);
    for mut col in p.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    Ok(p)
}

/// Gram matrix `P Pᵀ` of a point configuration.
pub fn gram_of_points(p: &DMatrix<f64>) -> DMatrix<f64> {
    p * p.transpose()
}

/// Squared distances `D_ij = X_ii + X_jj − 2 X_ij` from a Gram matrix.
pub fn distances_from_gram(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    DMatrix::from_fn(n, n, |i, j| x[(i, j)].mul_add(-2.0, x[(i, i)] + x[(j, j)]))
}

/// Classical multidimensional scaling: the `r` leading eigenpairs of a Gram
/// matrix, returned as an `n × r` point matrix.
pub fn points_from_gram(x: &DMatrix<f64>, r: usize) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetric_part(x));
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut p = DMatrix::zeros(x.nrows(), r);
    for (k, &idx) in order.iter().take(r).enumerate() {
        let scale = eig.eigenvalues[idx].max(0.0).sqrt();
        p.set_column(k, &(eig.eigenvectors.column(idx) * scale));
    }
    p
}

/// Centered Gram matrix of random points, the EDG truth.
pub fn edg_truth(n: usize, r: usize, seed: u64) -> Result<DMatrix<f64>> {
    Ok(gram_of_points(&centered_points(n, r, seed)?))
}

/// Hankel matrix of `x_k = Σ_j a_j ρ_j^k` with distinct real nodes
/// `ρ_j ∈ (−0.95, 0.95)`.
pub fn hankel_truth(n1: usize, n2: usize, r: usize, seed: u64) -> Result<DMatrix<f64>> {
    check_rank(r, n1.min(n2))?;
    let mut rng = rng_from_seed(seed);
    // evenly spread nodes with jitter keeps them distinct
    let nodes: Vec<f64> = (0..r)
        .map(|j| {
            let centre = -0.9 + 1.8 * (j as f64 + 0.5) / r as f64;
            centre + rng.random_range(-0.3..0.3) * 0.9 / r as f64
        })
        .collect();
    let amps: Vec<f64> = (0..r)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            a.signum() * (0.5 + a.abs())
        })
        .collect();
    let seq: Vec<f64> = (0..n1 + n2 - 1)
        .map(|k| amps.iter().zip(&nodes).map(|(a, p)| a * p.powi(k as i32)).sum())
        .collect();
    Ok(DMatrix::from_fn(n1, n2, |i, j| seq[i + j]))
}

/// `Σ_j c_j w_{α_j}` over `r` distinct basis elements with `c_j ∈ [0.5, 1.5]`.
pub fn basis_combination_truth(basis: &BasisSet, r: usize, seed: u64) -> Result<DMatrix<f64>> {
    check_rank(r, basis.len())?;
    let mut rng = rng_from_seed(seed);
    let picks = sample(&mut rng, basis.len(), r).into_vec();
    let mut m = DMatrix::zeros(basis.rows(), basis.cols());
    for alpha in picks {
        m += basis.element(alpha) * rng.random_range(0.5..1.5);
    }
    Ok(m)
}

/// `‖M − W H⁻¹ Wᵀ vec M‖_F`, the distance of `m` from the span of `basis`.
pub fn span_residual(basis: &BasisSet, h_inv: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let v = vectorize(m);
    let coef: DVector<f64> = h_inv * basis.w().tr_mul(&v);
    let proj = basis.w() * coef;
    (v - proj).norm()
}

/// A rank-`r` truth in the span of `basis`.
///
/// Weighted and custom bases get a generic Gaussian low-rank matrix; the
/// call fails if that matrix is not in the span.
pub fn planted_truth(
    basis: &BasisSet,
    h_inv: &DMatrix<f64>,
    r: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let (rows, cols) = (basis.rows(), basis.cols());
    let m = match basis.family() {
        Family::Entry => low_rank(rows, cols, r, seed)?,
        Family::Edg => edg_truth(rows, r, seed)?,
        Family::Hankel => hankel_truth(rows, cols, r, seed)?,
        Family::RankOne => basis_combination_truth(basis, r, seed)?,
        Family::Weighted | Family::Custom => {
            let mut rng = rng_from_seed(seed);
            let m = if basis.constraints().symmetric {
                let g = gaussian(rows, r, &mut rng);
                &g * g.transpose()
            } else {
                gaussian(rows, r, &mut rng) * gaussian(cols, r, &mut rng).transpose()
            };
            let res = span_residual(basis, h_inv, &m);
            if res > 1e-8 * m.norm() {
                return Err(Error::InvalidInput(format!(
                    "no generic rank-{r} truth lies in this span (residual {res:e})"
                )));
            }
            m
        }
    };
    Ok(m)
}

/// Measurements `b_α = <M, w_α>` for every draw, in draw order.
pub fn measurements(basis: &BasisSet, indices: &[usize], m: &DMatrix<f64>) -> Vec<f64> {
    let v = vectorize(m);
    indices.iter().map(|&a| basis.w().column(a).dot(&v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{make_edg_basis, make_entry_basis, make_hankel_basis, make_rank_one_basis};
    use crate::dual::dual_set;

    fn rank(m: &DMatrix<f64>) -> usize {
        let s = m.singular_values();
        let top = s.max();
        s.iter().filter(|&&x| x > 1e-9 * top).count()
    }

    #[test]
    fn truths_have_rank_and_lie_in_span() {
        let n = 8;
        let mut rng = rng_from_seed(5);
        let vs: Vec<DVector<f64>> = (0..n * (n + 1) / 2)
            .map(|_| DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng)))
            .collect();
        let bases = [
            make_entry_basis(n).unwrap(),
            make_edg_basis(n).unwrap(),
            make_hankel_basis(n, n).unwrap(),
            make_rank_one_basis(&vs).unwrap(),
        ];
        for b in &bases {
            let d = dual_set(b).unwrap();
            let m = planted_truth(b, d.h_inv(), 2, 11).unwrap();
            assert!(rank(&m) <= 2, "{}", b.family());
            assert!(span_residual(b, d.h_inv(), &m) < 1e-8 * m.norm(), "{}", b.family());
        }
    }

    #[test]
    fn edg_truth_is_centered() {
        let g = edg_truth(10, 3, 1).unwrap();
        let ones = DVector::from_element(10, 1.0);
        assert!((&g * ones).norm() < 1e-10);
        assert_eq!(rank(&g), 3);
    }

    #[test]
    fn mds_recovers_distances() {
        let p = centered_points(12, 2, 4).unwrap();
        let g = gram_of_points(&p);
        let q = points_from_gram(&g, 2);
        let d1 = distances_from_gram(&g);
        let d2 = distances_from_gram(&gram_of_points(&q));
        assert!((d1 - d2).amax() < 1e-9);
    }

    #[test]
    fn hankel_truth_has_exact_rank() {
        assert_eq!(rank(&hankel_truth(10, 10, 3, 2).unwrap()), 3);
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(centered_points(2, 2, 0).is_err());
    }
}
