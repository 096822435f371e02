//! Nuclear-norm minimization under basis-coefficient constraints.
//!
//! Douglas–Rachford splitting between the nuclear-norm prox (singular value
//! soft-thresholding, or eigenvalue soft-thresholding when the subspace is
//! PSD) and the projection onto the affine feasible set inside `span(W)`.
//! The feasible-set side is returned, so `X̂` satisfies the constraints to
//! rounding error even before convergence.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::basis::BasisSet;
use crate::dual::DualBasisData;
use crate::error::{Error, Result};
use crate::linalg::{nuclear_norm, sym_extremes, symmetric_part, thin_svd, unvectorize, vectorize};
use crate::sampling::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub feas_tol: f64,
    pub rel_change_tol: f64,
    pub max_iter: usize,
    /// Initial step, relative to the scale of the data.
    pub rho: f64,
    /// Rebalance the step only during the first `adapt_until` iterations.
    pub adapt_until: usize,
    pub adapt_every: usize,
    /// Tolerance used to tell apart duplicated measurements of one index.
    pub duplicate_tol: f64,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            rel_change_tol: 1e-10,
            max_iter: 5000,
            rho: 1.0,
            adapt_until: 500,
            adapt_every: 10,
            duplicate_tol: 1e-9,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompletionProblem<'a> {
    pub basis: &'a BasisSet,
    pub dual: &'a DualBasisData,
    pub samples: &'a SampleSet,
    /// One value per draw, in draw order.
    pub measurements: Vec<f64>,
    pub noise_level: f64,
    pub truth: Option<DMatrix<f64>>,
    /// Rank used for the under-sampling flag; defaults to the rank of the
    /// truth when one is attached, else 1.
    pub rank: Option<usize>,
}

impl<'a> CompletionProblem<'a> {
    pub fn new(
        basis: &'a BasisSet,
        dual: &'a DualBasisData,
        samples: &'a SampleSet,
        measurements: Vec<f64>,
    ) -> Result<Self> {
        if measurements.len() != samples.m() {
            return Err(Error::InvalidInput(format!(
                "{} measurements for {} draws",
                measurements.len(),
                samples.m()
            )));
        }
        if samples.basis_len() != basis.len() || dual.len() != basis.len() {
            return Err(Error::InvalidInput("sample set, dual and basis disagree on L".into()));
        }
        Ok(Self {
            basis,
            dual,
            samples,
            measurements,
            noise_level: 0.0,
            truth: None,
            rank: None,
        })
    }

    /// Exact measurements of `truth`, kept for error reporting.
    pub fn from_truth(
        basis: &'a BasisSet,
        dual: &'a DualBasisData,
        samples: &'a SampleSet,
        truth: &DMatrix<f64>,
    ) -> Result<Self> {
        basis.check_shape(truth)?;
        let v = vectorize(truth);
        let b = samples
            .indices()
            .iter()
            .map(|&a| basis.w().column(a).dot(&v))
            .collect();
        Ok(Self::new(basis, dual, samples, b)?.with_truth(truth.clone()))
    }

    pub fn with_noise(mut self, delta: f64) -> Self {
        self.noise_level = delta;
        self
    }

    pub fn with_truth(mut self, truth: DMatrix<f64>) -> Self {
        self.truth = Some(truth);
        self
    }

    pub fn with_rank(mut self, r: usize) -> Self {
        self.rank = Some(r);
        self
    }

    fn rank_hint(&self) -> usize {
        if let Some(r) = self.rank {
            return r.max(1);
        }
        self.truth.as_ref().map_or(1, |m| {
            let s = m.singular_values();
            let top = s.max();
            s.iter().filter(|&&x| x > 1e-9 * top).count().max(1)
        })
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryReport {
    pub x_hat: DMatrix<f64>,
    pub rel_err_vs_truth: Option<f64>,
    /// Exact program: `max |<X̂, w_α> − b_α|` over draws. Noisy program:
    /// amount by which `‖R_Ω X̂ − R_Ω M‖_F` exceeds `δ`.
    pub constraint_residual: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Fewer distinct measurements than `dim T`.
    pub undersampled: bool,
    pub distinct_constraints: usize,
    /// Iterations at which the step was rescaled.
    pub step_changes: Vec<usize>,
    /// `‖y_k − x_k‖_F` per iteration when tracing is on.
    pub merit_trace: Vec<f64>,
}

/// Soft-thresholds singular values by `tau`.
pub fn svt_prox(x: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let (u, s, v) = thin_svd(x);
    let s = s.map(|s| (s - tau).max(0.0));
    u * DMatrix::from_diagonal(&s) * v.transpose()
}

/// Prox of `tau·tr(X)` plus the PSD indicator, applied to the symmetric part.
pub fn psd_prox(x: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let mut eig = SymmetricEigen::new(symmetric_part(x));
    for l in eig.eigenvalues.iter_mut() {
        *l = (*l - tau).max(0.0);
    }
    eig.recompose()
}

/// Orthonormal coordinates for `span(W)`, `W = Q R`, computed once per basis.
#[derive(Debug, Clone)]
pub struct SpanFactor {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl SpanFactor {
    pub fn new(basis: &BasisSet) -> Self {
        let qr = basis.w().clone().qr();
        Self {
            q: qr.q(),
            r: qr.r(),
        }
    }

    fn coords(&self, x: &DMatrix<f64>) -> DVector<f64> {
        self.q.tr_mul(&vectorize(x))
    }
}

/// Per distinct index: draw count and summed measurement.
struct Aggregated {
    indices: Vec<usize>,
    counts: Vec<f64>,
    sums: Vec<f64>,
    means: Vec<f64>,
}

fn aggregate(p: &CompletionProblem, check_consistent: bool, tol: f64) -> Result<Aggregated> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (&a, &b) in p.samples.indices().iter().zip(&p.measurements) {
        groups.entry(a).or_default().push(b);
    }
    if groups.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut agg = Aggregated {
        indices: Vec::with_capacity(groups.len()),
        counts: Vec::with_capacity(groups.len()),
        sums: Vec::with_capacity(groups.len()),
        means: Vec::with_capacity(groups.len()),
    };
    for (a, vals) in groups {
        let sum: f64 = vals.iter().sum();
        let mean = sum / vals.len() as f64;
        if check_consistent {
            let spread = vals.iter().fold(0.0_f64, |acc, v| acc.max((v - mean).abs()));
            if spread > tol * mean.abs().max(1.0) {
                return Err(Error::Infeasible(format!(
                    "index {a} measured with inconsistent values {vals:?}"
                )));
            }
        }
        agg.indices.push(a);
        agg.counts.push(vals.len() as f64);
        agg.sums.push(sum);
        agg.means.push(mean);
    }
    Ok(agg)
}

/// Projection onto `{c : A c = b}` in span coordinates, `A = R[:, Ω]ᵀ`.
struct AffineProjector {
    a: DMatrix<f64>,
    b: DVector<f64>,
    chol: Cholesky<f64, nalgebra::Dyn>,
}

impl AffineProjector {
    fn new(factor: &SpanFactor, agg: &Aggregated) -> Result<Self> {
        let k = agg.indices.len();
        let mut a = DMatrix::zeros(k, factor.r.nrows());
        for (row, &alpha) in agg.indices.iter().enumerate() {
            a.set_row(row, &factor.r.column(alpha).transpose());
        }
        let gram = symmetric_part(&(&a * a.transpose()));
        let chol = Cholesky::new(gram).ok_or(Error::SingularBasis {
            condition: f64::INFINITY,
            limit: crate::dual::DEFAULT_CONDITION_LIMIT,
        })?;
        Ok(Self {
            a,
            b: DVector::from_vec(agg.means.clone()),
            chol,
        })
    }

    fn project(&self, c: &DVector<f64>) -> DVector<f64> {
        let resid = &self.a * c - &self.b;
        let lam = self.chol.solve(&resid);
        c - self.a.tr_mul(&lam)
    }
}

/// Projection onto `{c : ‖B c − d‖ ≤ δ}` with `BᵀB = V Λ Vᵀ` precomputed.
struct BallProjector {
    v: DMatrix<f64>,
    lambda: DVector<f64>,
    /// `Vᵀ Bᵀ d`.
    e: DVector<f64>,
    d_norm_sq: f64,
    delta: f64,
}

impl BallProjector {
    fn new(
        factor: &SpanFactor,
        dual: &DualBasisData,
        agg: &Aggregated,
        scale: f64,
        delta: f64,
    ) -> Self {
        let k = agg.indices.len();
        let dim = factor.r.nrows();
        // K = (L/m)² H⁻¹ restricted to the sampled indices
        let kmat = DMatrix::from_fn(k, k, |i, j| {
            scale * scale * dual.h_inv()[(agg.indices[i], agg.indices[j])]
        });
        let mut ca = DMatrix::zeros(k, dim);
        for (row, &alpha) in agg.indices.iter().enumerate() {
            ca.set_row(row, &(factor.r.column(alpha).transpose() * agg.counts[row]));
        }
        let s = DVector::from_vec(agg.sums.clone());
        let btb = symmetric_part(&(ca.tr_mul(&(&kmat * &ca))));
        let btd = ca.tr_mul(&(&kmat * &s));
        let d_norm_sq = s.dot(&(&kmat * &s));
        let eig = SymmetricEigen::new(btb);
        let lambda = eig.eigenvalues.map(|l| l.max(0.0));
        let e = eig.eigenvectors.tr_mul(&btd);
        Self {
            v: eig.eigenvectors,
            lambda,
            e,
            d_norm_sq,
            delta,
        }
    }

    fn residual_sq(&self, ch: &DVector<f64>) -> f64 {
        let quad: f64 = ch.iter().zip(self.lambda.iter()).map(|(c, l)| l * c * c).sum();
        (quad - 2.0 * ch.dot(&self.e) + self.d_norm_sq).max(0.0)
    }

    fn residual(&self, c: &DVector<f64>) -> f64 {
        self.residual_sq(&self.v.tr_mul(c)).sqrt()
    }

    fn project(&self, c: &DVector<f64>) -> DVector<f64> {
        let c0 = self.v.tr_mul(c);
        let target = self.delta * self.delta;
        if self.residual_sq(&c0) <= target {
            return c.clone();
        }
        let at = |t: f64| {
            DVector::from_fn(c0.len(), |i, _| (c0[i] + t * self.e[i]) / (1.0 + t * self.lambda[i]))
        };
        let mut hi = 1.0;
        while self.residual_sq(&at(hi)) > target && hi < 1e300 {
            hi *= 4.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = if lo == 0.0 { hi / 2.0 } else { (lo * hi).sqrt() };
            if self.residual_sq(&at(mid)) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        &self.v * at(hi)
    }
}

enum Feasible {
    Exact(AffineProjector),
    Ball(BallProjector),
}

impl Feasible {
    fn project(&self, c: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Exact(p) => p.project(c),
            Self::Ball(p) => p.project(c),
        }
    }
}

pub fn solve_exact(p: &CompletionProblem, cfg: &SolverConfig) -> Result<RecoveryReport> {
    let factor = SpanFactor::new(p.basis);
    solve_exact_with(p, cfg, &factor)
}

/// As [`solve_exact`], reusing a precomputed span factorization.
pub fn solve_exact_with(
    p: &CompletionProblem,
    cfg: &SolverConfig,
    factor: &SpanFactor,
) -> Result<RecoveryReport> {
    let agg = aggregate(p, true, cfg.duplicate_tol)?;
    let proj = AffineProjector::new(factor, &agg)?;
    let mut rep = run(p, cfg, factor, &Feasible::Exact(proj))?;
    rep.constraint_residual = max_constraint_violation(p, &rep.x_hat);
    rep.distinct_constraints = agg.indices.len();
    Ok(rep)
}

pub fn solve_noisy(p: &CompletionProblem, cfg: &SolverConfig) -> Result<RecoveryReport> {
    let factor = SpanFactor::new(p.basis);
    solve_noisy_with(p, cfg, &factor)
}

pub fn solve_noisy_with(
    p: &CompletionProblem,
    cfg: &SolverConfig,
    factor: &SpanFactor,
) -> Result<RecoveryReport> {
    if p.noise_level == 0.0 {
        return solve_exact_with(p, cfg, factor);
    }
    if !(p.noise_level > 0.0 && p.noise_level.is_finite()) {
        return Err(Error::InvalidInput(format!("noise level {} must be positive", p.noise_level)));
    }
    let agg = aggregate(p, false, cfg.duplicate_tol)?;
    let scale = p.basis.len() as f64 / p.samples.m() as f64;
    let ball = BallProjector::new(factor, p.dual, &agg, scale, p.noise_level);
    let feasible = Feasible::Ball(ball);
    let mut rep = run(p, cfg, factor, &feasible)?;
    let Feasible::Ball(ball) = &feasible else { unreachable!() };
    rep.constraint_residual = (ball.residual(&factor.coords(&rep.x_hat)) - p.noise_level).max(0.0);
    rep.distinct_constraints = agg.indices.len();
    Ok(rep)
}

fn run(
    p: &CompletionProblem,
    cfg: &SolverConfig,
    factor: &SpanFactor,
    feasible: &Feasible,
) -> Result<RecoveryReport> {
    let psd = p.basis.constraints().psd;
    let (rows, cols) = (p.basis.rows(), p.basis.cols());
    let r = p.rank_hint();
    let dim_t = r * (rows + cols) - r * r;
    let distinct = p.samples.distinct().len();
    // iterate in the ambient space; only the feasible side lives in span(W)
    let project = |v: &DVector<f64>| -> DVector<f64> {
        &factor.q * feasible.project(&factor.q.tr_mul(v))
    };
    let y0 = project(&DVector::zeros(rows * cols));
    let scale = y0.norm();

    let finish = |y: DVector<f64>, iterations, converged, step_changes, merit_trace| {
        let x_hat = unvectorize(y.as_slice(), rows, cols);
        let objective = nuclear_norm(&x_hat);
        let rel_err_vs_truth = p.truth.as_ref().map(|m| (&x_hat - m).norm() / m.norm());
        RecoveryReport {
            x_hat,
            rel_err_vs_truth,
            constraint_residual: 0.0,
            objective,
            iterations,
            converged,
            undersampled: distinct < dim_t,
            distinct_constraints: distinct,
            step_changes,
            merit_trace,
        }
    };
    if scale == 0.0 {
        return Ok(finish(y0, 0, true, Vec::new(), Vec::new()));
    }

    // steps are measured relative to the minimum-norm feasible point
    let mut t = cfg.rho * scale / (rows.min(cols) as f64).sqrt();
    let prox = |z: &DVector<f64>, t: f64| -> DVector<f64> {
        let zm = unvectorize(z.as_slice(), rows, cols);
        let xm = if psd { psd_prox(&zm, t) } else { svt_prox(&zm, t) };
        vectorize(&xm)
    };

    let mut z = y0.clone();
    let mut y = y0;
    let mut x_prev: Option<DVector<f64>> = None;
    let mut step_changes = Vec::new();
    let mut merit_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=cfg.max_iter {
        iterations = k;
        let x = prox(&z, t);
        let y_new = project(&(2.0 * &x - &z));
        let diff = &y_new - &x;
        let merit = diff.norm();
        z += &diff;
        if cfg.record_trace {
            merit_trace.push(merit);
        }
        let dual_res = (&y_new - &y).norm();
        y = y_new;
        let ynorm = y.norm().max(1.0);
        if merit <= cfg.feas_tol * ynorm {
            converged = true;
            break;
        }
        let change = x_prev
            .as_ref()
            .map_or(f64::INFINITY, |xp| (&x - xp).norm() / ynorm);
        if change <= cfg.rel_change_tol && merit <= cfg.feas_tol.sqrt() * ynorm {
            break;
        }
        if k <= cfg.adapt_until && k % cfg.adapt_every == 0 {
            let factor_t = if merit > 10.0 * dual_res {
                0.5
            } else if dual_res > 10.0 * merit {
                2.0
            } else {
                1.0
            };
            if factor_t != 1.0 {
                // keeps the prox point fixed: z = x + t g with g in the subdifferential at x
                z = &x + (&z - &x) * factor_t;
                t *= factor_t;
                step_changes.push(k);
            }
        }
        x_prev = Some(x);
    }
    Ok(finish(y, iterations, converged, step_changes, merit_trace))
}

/// `max |<X, w_α> − b_α|` over the draws of a problem.
pub fn max_constraint_violation(p: &CompletionProblem, x: &DMatrix<f64>) -> f64 {
    let v = vectorize(x);
    p.samples
        .indices()
        .iter()
        .zip(&p.measurements)
        .map(|(&a, &b)| (p.basis.w().column(a).dot(&v) - b).abs())
        .fold(0.0, f64::max)
}

/// Largest violation of the declared subspace constraints.
pub fn subspace_violation(basis: &BasisSet, x: &DMatrix<f64>) -> f64 {
    let c = basis.constraints();
    let mut worst = 0.0_f64;
    if c.symmetric {
        worst = worst.max((x - x.transpose()).norm());
    }
    if c.row_sum_zero {
        worst = worst.max((x * DVector::from_element(x.ncols(), 1.0)).norm());
    }
    if c.psd {
        worst = worst.max((-sym_extremes(&symmetric_part(x)).0).max(0.0));
    }
    worst
}
