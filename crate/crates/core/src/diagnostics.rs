//! Correlation parameter, coherence profile, sample-count bound and the
//! failure probabilities of the golfing argument.

use nalgebra::DMatrix;

use crate::basis::BasisSet;
use crate::dual::{DualBasisData, GramSpectrum};
use crate::error::{Error, Result};
use crate::linalg::{sym_extremes, symmetric_part, vectorize};
use crate::tangent::{TangentSpace, DEFAULT_RANK_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub mu: f64,
    /// `λ_max(Σ w_αᵀ w_α)`.
    pub lambda_max_wtw: f64,
    /// `λ_max(Σ w_α w_αᵀ)`.
    pub lambda_max_wwt: f64,
    /// Both maxima are at most `(μ + 1)·n`.
    pub bound_holds: bool,
}

/// `μ = max(‖(1/n) Σ w_αᵀ w_α − I‖, ‖(1/n) Σ w_α w_αᵀ − I‖)` in operator
/// norm. For an `n1 × n2` basis the first sum is scaled by `1/n1` and the
/// second by `1/n2`, which keeps the entry basis at `μ = 0`.
pub fn correlation_parameter(basis: &BasisSet) -> CorrelationReport {
    let (rows, cols) = (basis.rows(), basis.cols());
    let mut wtw = DMatrix::zeros(cols, cols);
    let mut wwt = DMatrix::zeros(rows, rows);
    for w in basis.elements() {
        wtw += w.tr_mul(&w);
        wwt += &w * w.transpose();
    }
    let deviation = |sum: &DMatrix<f64>, scale: usize| {
        let k = sum.nrows();
        let shifted = symmetric_part(sum) / scale as f64 - DMatrix::identity(k, k);
        let (lo, hi) = sym_extremes(&shifted);
        lo.abs().max(hi.abs())
    };
    let mu = deviation(&wtw, rows).max(deviation(&wwt, cols));
    let lambda_max_wtw = sym_extremes(&symmetric_part(&wtw)).1;
    let lambda_max_wwt = sym_extremes(&symmetric_part(&wwt)).1;
    let bound_holds = lambda_max_wtw <= (mu + 1.0) * rows as f64 + 1e-8
        && lambda_max_wwt <= (mu + 1.0) * cols as f64 + 1e-8;
    CorrelationReport {
        mu,
        lambda_max_wtw,
        lambda_max_wwt,
        bound_holds,
    }
}

/// One simplified coherence inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplifiedCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl SimplifiedCheck {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceProfile {
    pub nu_w: f64,
    pub nu_z: f64,
    pub nu_joint: f64,
    pub nu: f64,
    /// `max ‖P_T w_α‖² ≤ λ_max(H⁻¹) ν r / n`.
    pub simplified_w: SimplifiedCheck,
    /// `max ‖P_T z_α‖² ≤ ‖H⁻¹‖_∞² λ_max(H⁻¹) ν r / n`.
    pub simplified_z: SimplifiedCheck,
    /// `max <z_α, U Vᵀ>² ≤ ‖H⁻¹‖_∞² ν r / n²`.
    pub simplified_joint: SimplifiedCheck,
}

pub fn coherence_profile(
    m: &DMatrix<f64>,
    basis: &BasisSet,
    dual: &DualBasisData,
) -> Result<CoherenceProfile> {
    basis.check_shape(m)?;
    let ts = TangentSpace::of(m, DEFAULT_RANK_TOL)?;
    coherence_profile_at(&ts, basis, dual)
}

/// Coherence of the tangent space `ts` with respect to `basis`. `n` is the
/// larger side of the matrix.
pub fn coherence_profile_at(
    ts: &TangentSpace,
    basis: &BasisSet,
    dual: &DualBasisData,
) -> Result<CoherenceProfile> {
    let (rows, cols) = (basis.rows(), basis.cols());
    if ts.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch {
            expected: (rows, cols),
            got: ts.shape(),
        });
    }
    if dual.len() != basis.len() {
        return Err(Error::InvalidInput("dual set does not match basis".into()));
    }
    let n = basis.n() as f64;
    let r = ts.rank() as f64;
    let len = basis.len();
    let spectrum = dual.spectrum();

    let mut pw = DMatrix::zeros(rows * cols, len);
    for alpha in 0..len {
        let p = ts.project_unchecked(&basis.element(alpha));
        pw.column_mut(alpha).copy_from(&vectorize(&p));
    }
    // P_T is linear, so P_T z_α = Σ_β H^{αβ} P_T w_β
    let pz = &pw * dual.h_inv();
    let gw = basis.w().tr_mul(&pw);
    let gz = basis.w().tr_mul(&pz);
    let col_max = |g: &DMatrix<f64>| {
        g.column_iter()
            .map(|c| c.norm_squared())
            .fold(0.0_f64, f64::max)
    };
    let nu_w = n / r * col_max(&gw);
    let nu_z = n / (spectrum.c_v * r) * col_max(&gz);

    let uvt = vectorize(&ts.uvt());
    let joint_w = basis.w().tr_mul(&uvt).amax();
    let joint_z = dual.z().tr_mul(&uvt).amax();
    let nu_joint = n * n / r * joint_w * joint_w;
    let nu = nu_w.max(nu_z).max(nu_joint);

    let h = spectrum.hinv_inf_norm;
    let lmax = spectrum.lambda_max_hinv;
    Ok(CoherenceProfile {
        nu_w,
        nu_z,
        nu_joint,
        nu,
        simplified_w: SimplifiedCheck {
            lhs: col_max(&pw),
            rhs: lmax * nu * r / n,
        },
        simplified_z: SimplifiedCheck {
            lhs: col_max(&pz),
            rhs: h * h * lmax * nu * r / n,
        },
        simplified_joint: SimplifiedCheck {
            lhs: joint_z * joint_z,
            rhs: h * h * nu * r / (n * n),
        },
    })
}

/// Which first term enters the constant `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CDefinition {
    /// `λ_max(H⁻¹)·‖H⁻¹‖_∞`, the form the bound calculation uses.
    #[default]
    Proof,
    /// `λ_max(H⁻¹)³`, as printed in the main theorem.
    Statement,
}

/// `C = max(first, c_v, (μ+1)‖H⁻¹‖_∞ / min((μ+1)‖H⁻¹‖_∞, 1/4)²)`.
pub fn constant_c(spectrum: &GramSpectrum, mu: f64, which: CDefinition) -> f64 {
    let first = match which {
        CDefinition::Proof => spectrum.lambda_max_hinv * spectrum.hinv_inf_norm,
        CDefinition::Statement => spectrum.lambda_max_hinv.powi(3),
    };
    let a = (mu + 1.0) * spectrum.hinv_inf_norm;
    let t = a.min(0.25);
    first.max(spectrum.c_v).max(a / (t * t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub n: usize,
    pub r: usize,
    pub nu: f64,
    pub mu: f64,
    /// Number of basis elements `L`.
    pub basis_len: usize,
    pub beta: f64,
    pub c_definition: CDefinition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremConstants {
    pub n: usize,
    pub r: usize,
    pub basis_len: usize,
    pub nu: f64,
    pub mu: f64,
    pub beta: f64,
    pub c: f64,
    /// `log₂(4√(2L)·(λ_max(H)/λ_min(H))·√r)` before rounding.
    pub l_real: f64,
    /// Batch count, `⌈l_real⌉`.
    pub l: usize,
    /// Sample count bound, rounded up.
    pub m_bound: u64,
    /// `48(Cν + 1/(nr))(β ln n + ln 4l)`.
    pub kappa_i: f64,
    /// `⌈κ_i L r / n⌉`.
    pub m_i: u64,
    /// `m n / (L r)` at `m = l·m_i`.
    pub kappa: f64,
    pub probabilities: FailureProbabilities,
}

impl TheoremConstants {
    /// Total draws when every batch uses `m_i`.
    pub fn m_batches(&self) -> u64 {
        self.l as u64 * self.m_i
    }

    pub fn pairs(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("n", self.n as f64),
            ("r", self.r as f64),
            ("L", self.basis_len as f64),
            ("nu", self.nu),
            ("mu", self.mu),
            ("beta", self.beta),
            ("C", self.c),
            ("l_real", self.l_real),
            ("l", self.l as f64),
            ("m_bound", self.m_bound as f64),
            ("kappa_i", self.kappa_i),
            ("m_i", self.m_i as f64),
            ("kappa", self.kappa),
            ("p_total", self.probabilities.total),
        ]
    }
}

pub fn sample_bound(inputs: &BoundInputs, spectrum: &GramSpectrum) -> Result<TheoremConstants> {
    let BoundInputs {
        n,
        r,
        nu,
        mu,
        basis_len,
        beta,
        c_definition,
    } = *inputs;
    if !(beta > 1.0) {
        return Err(Error::InvalidConfidence(beta));
    }
    if n == 0 || r == 0 || basis_len == 0 {
        return Err(Error::InvalidInput("n, r and L must be at least 1".into()));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidInput(format!("ν must be positive, got {nu}")));
    }
    let (nf, rf, lf) = (n as f64, r as f64, basis_len as f64);
    let c = constant_c(spectrum, mu, c_definition);
    let arg = 4.0 * (2.0 * lf).sqrt() * spectrum.condition_number() * rf.sqrt();
    let l_real = arg.log2();
    let l = l_real.ceil().max(1.0) as usize;

    let m_bound = l_real
        * nf
        * rf
        * 48.0
        * (c * nu + nf / (lf * rf))
        * (beta * nf.ln() + (4.0 * l_real).ln());
    let kappa_i = 48.0 * (c * nu + 1.0 / (nf * rf)) * (beta * nf.ln() + (4.0 * l as f64).ln());
    let m_i = (kappa_i * lf * rf / nf).ceil() as u64;
    let m_i_list = vec![m_i; l];
    let m_total = l as u64 * m_i;
    let probabilities = failure_probabilities(spectrum, nu, mu, n, basis_len, r, m_total, &m_i_list);
    Ok(TheoremConstants {
        n,
        r,
        basis_len,
        nu,
        mu,
        beta,
        c,
        l_real,
        l,
        m_bound: m_bound.ceil() as u64,
        kappa_i,
        m_i,
        kappa: m_total as f64 * nf / (lf * rf),
        probabilities,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureProbabilities {
    pub p1: f64,
    pub p2: Vec<f64>,
    pub p3: Vec<f64>,
    pub p4: Vec<f64>,
    /// `p1 + Σ (p2 + p3 + p4)` over the clamped values.
    pub total: f64,
}

impl FailureProbabilities {
    pub fn max_term(&self) -> f64 {
        self.p2
            .iter()
            .chain(&self.p3)
            .chain(&self.p4)
            .fold(self.p1, |a, &b| a.max(b))
    }
}

/// Failure probabilities for total draw count `m` and per-batch sizes
/// `m_i`, each clamped to at most 1.
#[allow(clippy::too_many_arguments)]
pub fn failure_probabilities(
    spectrum: &GramSpectrum,
    nu: f64,
    mu: f64,
    n: usize,
    basis_len: usize,
    r: usize,
    m: u64,
    m_i: &[u64],
) -> FailureProbabilities {
    let (nf, rf, lf) = (n as f64, r as f64, basis_len as f64);
    let h = spectrum.hinv_inf_norm;
    let extra = nf / (lf * rf);
    let kappa = m as f64 * nf / (lf * rf);
    let clamp = |p: f64| p.min(1.0);
    let p1 = clamp(nf * (-spectrum.lambda_min_h.powi(2) * kappa / (8.0 * nu)).exp());
    let a = (mu + 1.0) * h;
    let t = a.min(0.25);
    let mut p2 = Vec::with_capacity(m_i.len());
    let mut p3 = Vec::with_capacity(m_i.len());
    let mut p4 = Vec::with_capacity(m_i.len());
    for &mi in m_i {
        let k = mi as f64 * nf / (lf * rf);
        p2.push(clamp(
            (-k / (32.0 * (spectrum.lambda_max_hinv * h * nu + extra)) + 0.25).exp(),
        ));
        p3.push(clamp(
            2.0 * nf * (-3.0 * t * t * k / (8.0 * (mu + 1.0) * h * h * nu)).exp(),
        ));
        p4.push(clamp(
            nf * nf * (-3.0 * k / (32.0 * (spectrum.c_v * nu + extra))).exp(),
        ));
    }
    let total = p1 + p2.iter().chain(&p3).chain(&p4).sum::<f64>();
    FailureProbabilities {
        p1,
        p2,
        p3,
        p4,
        total,
    }
}
