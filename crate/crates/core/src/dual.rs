//! Gram matrix, its inverse, the biorthogonal dual set and the spectral
//! constants consumed by the recovery bounds.

use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::linalg::{inf_norm, symmetric_part, sym_extremes};

/// Largest `L` for which dense `L × L` Gram matrices are formed.
pub const MAX_DENSE_COUNT: usize = 20_000;
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e12;

/// `H = WᵀW`, `H_{αβ} = <w_α, w_β>`.
pub fn gram_matrix(basis: &BasisSet) -> DMatrix<f64> {
    symmetric_part(&basis.w().tr_mul(basis.w()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramSpectrum {
    pub lambda_min_h: f64,
    pub lambda_max_h: f64,
    pub lambda_min_hinv: f64,
    pub lambda_max_hinv: f64,
    /// Maximum absolute row sum of `H⁻¹`.
    pub hinv_inf_norm: f64,
    pub c_v: f64,
}

impl GramSpectrum {
    /// Smallest admissible `c_v`, `λ_max(H⁻¹)·‖H⁻¹‖_∞`.
    pub fn min_c_v(&self) -> f64 {
        self.lambda_max_hinv * self.hinv_inf_norm
    }

    /// Replace `c_v`; values below the admissible minimum are rejected.
    pub fn with_c_v(mut self, c_v: f64) -> Result<Self> {
        let floor = self.min_c_v();
        if !(c_v >= floor * (1.0 - 1e-12)) {
            return Err(Error::InvalidInput(format!(
                "c_v = {c_v} is below λ_max(H⁻¹)·‖H⁻¹‖_∞ = {floor}"
            )));
        }
        self.c_v = c_v;
        Ok(self)
    }

    pub fn condition_number(&self) -> f64 {
        self.lambda_max_h / self.lambda_min_h
    }

    /// Flat `key=value` block, one pair per line.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.pairs() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn pairs(&self) -> [(&'static str, f64); 6] {
        [
            ("lambda_min_h", self.lambda_min_h),
            ("lambda_max_h", self.lambda_max_h),
            ("lambda_min_hinv", self.lambda_min_hinv),
            ("lambda_max_hinv", self.lambda_max_hinv),
            ("hinv_inf_norm", self.hinv_inf_norm),
            ("c_v", self.c_v),
        ]
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut vals = [None; 6];
        let keys = [
            "lambda_min_h",
            "lambda_max_h",
            "lambda_min_hinv",
            "lambda_max_hinv",
            "hinv_inf_norm",
            "c_v",
        ];
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{line}`")))?;
            let Some(slot) = keys.iter().position(|&key| key == k.trim()) else {
                continue;
            };
            vals[slot] = Some(
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{k}: {e}")))?,
            );
        }
        let get = |i: usize| vals[i].ok_or_else(|| Error::Parse(format!("missing key {}", keys[i])));
        Ok(Self {
            lambda_min_h: get(0)?,
            lambda_max_h: get(1)?,
            lambda_min_hinv: get(2)?,
            lambda_max_hinv: get(3)?,
            hinv_inf_norm: get(4)?,
            c_v: get(5)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct DualBasisData {
    w: DMatrix<f64>,
    h: DMatrix<f64>,
    h_inv: DMatrix<f64>,
    z: DMatrix<f64>,
    spectrum: GramSpectrum,
    rows: usize,
    cols: usize,
}

impl DualBasisData {
    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn h_inv(&self) -> &DMatrix<f64> {
        &self.h_inv
    }

    /// Vectorized dual elements, one per column.
    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn spectrum(&self) -> &GramSpectrum {
        &self.spectrum
    }

    pub fn len(&self) -> usize {
        self.z.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.z.ncols() == 0
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn dual_element(&self, alpha: usize) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.rows, self.cols, self.z.column(alpha).as_slice())
    }

    /// Override `c_v` in the stored spectrum.
    pub fn set_c_v(&mut self, c_v: f64) -> Result<()> {
        self.spectrum = self.spectrum.with_c_v(c_v)?;
        Ok(())
    }
}

/// Dual set with the default condition-number guard.
pub fn dual_set(basis: &BasisSet) -> Result<DualBasisData> {
    dual_set_with_limit(basis, DEFAULT_CONDITION_LIMIT)
}

pub fn dual_set_with_limit(basis: &BasisSet, condition_limit: f64) -> Result<DualBasisData> {
    let count = basis.len();
    if count > MAX_DENSE_COUNT {
        return Err(Error::TooLarge {
            count,
            limit: MAX_DENSE_COUNT,
        });
    }
    let h = gram_matrix(basis);
    let (lo, hi) = sym_extremes(&h);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= condition_limit) {
        return Err(Error::SingularBasis {
            condition,
            limit: condition_limit,
        });
    }
    let h_inv = invert_spd(&h, lo.max(hi * f64::EPSILON));
    let z = basis.w() * &h_inv;
    let mut data = DualBasisData {
        w: basis.w().clone(),
        h,
        h_inv,
        z,
        spectrum: GramSpectrum {
            lambda_min_h: lo,
            lambda_max_h: hi,
            lambda_min_hinv: 0.0,
            lambda_max_hinv: 0.0,
            hinv_inf_norm: 0.0,
            c_v: 0.0,
        },
        rows: basis.rows(),
        cols: basis.cols(),
    };
    data.spectrum = gram_spectrum(&data);
    Ok(data)
}

/// Cholesky inverse; falls back to an eigen-decomposition with eigenvalues
/// floored at `floor` when the factorization breaks down.
fn invert_spd(h: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    if let Some(chol) = Cholesky::new(h.clone()) {
        return symmetric_part(&chol.inverse());
    }
    let eig = SymmetricEigen::new(h.clone());
    let inv_vals = eig.eigenvalues.map(|x| 1.0 / x.max(floor));
    let v = &eig.eigenvectors;
    symmetric_part(&(v * DMatrix::from_diagonal(&inv_vals) * v.transpose()))
}

/// Extreme eigenvalues of `H` and `H⁻¹`, `‖H⁻¹‖_∞` and the default `c_v`.
pub fn gram_spectrum(dual: &DualBasisData) -> GramSpectrum {
    let (lambda_min_h, lambda_max_h) = sym_extremes(&dual.h);
    let (lambda_min_hinv, lambda_max_hinv) = sym_extremes(&dual.h_inv);
    let hinv_inf_norm = inf_norm(&dual.h_inv);
    GramSpectrum {
        lambda_min_h,
        lambda_max_h,
        lambda_min_hinv,
        lambda_max_hinv,
        hinv_inf_norm,
        c_v: lambda_max_hinv * hinv_inf_norm,
    }
}

/// `max_{α,β} |<z_α, w_β> − δ_{αβ}|`.
pub fn biorthogonality_residual(dual: &DualBasisData) -> f64 {
    let prod = dual.z.tr_mul(&dual.w);
    let mut worst = 0.0_f64;
    for j in 0..prod.ncols() {
        for i in 0..prod.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - target).abs());
        }
    }
    worst
}
