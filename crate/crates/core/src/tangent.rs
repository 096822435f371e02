//! Tangent space of the rank-`r` variety at `M` and its projectors.
//!
//! Only invariant objects (`P_T`, `P_{T⊥}`, `U Vᵀ`) are exposed to callers
//! that compare results; the raw singular vectors carry an arbitrary sign.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{orthogonal_complement, thin_svd};

pub const DEFAULT_RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct TangentSpace {
    u: DMatrix<f64>,
    v: DMatrix<f64>,
}

impl TangentSpace {
    /// Singular vectors for every singular value above `rank_tol · σ_max`.
    pub fn of(m: &DMatrix<f64>, rank_tol: f64) -> Result<Self> {
        if m.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroMatrix);
        }
        let (u, s, v) = thin_svd(m);
        let r = s.iter().filter(|&&x| x > rank_tol * s[0]).count();
        Ok(Self::leading(u, v, r))
    }

    /// Uses the `rank` leading singular directions regardless of tolerance.
    pub fn with_rank(m: &DMatrix<f64>, rank: usize) -> Result<Self> {
        if m.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroMatrix);
        }
        if rank == 0 || rank > m.nrows().min(m.ncols()) {
            return Err(Error::InvalidInput(format!("rank {rank} out of range")));
        }
        let (u, _, v) = thin_svd(m);
        Ok(Self::leading(u, v, rank))
    }

    fn leading(u: DMatrix<f64>, v: DMatrix<f64>, r: usize) -> Self {
        Self {
            u: u.columns(0, r).into_owned(),
            v: v.columns(0, r).into_owned(),
        }
    }

    /// Builds from explicit orthonormal factors.
    pub fn from_factors(u: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        if u.ncols() != v.ncols() || u.ncols() == 0 {
            return Err(Error::InvalidInput("factor ranks disagree or are zero".into()));
        }
        Ok(Self { u, v })
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.u.nrows(), self.v.nrows())
    }

    /// `dim T = r(n1 + n2) − r²`.
    pub fn dim(&self) -> usize {
        let r = self.rank();
        let (n1, n2) = self.shape();
        r * (n1 + n2) - r * r
    }

    /// `U Vᵀ`, the sign matrix of `M`.
    pub fn uvt(&self) -> DMatrix<f64> {
        &self.u * self.v.transpose()
    }

    fn check(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.shape() != self.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.shape(),
                got: x.shape(),
            });
        }
        Ok(())
    }

    /// `P_U X + X P_V − P_U X P_V`.
    pub fn project(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        // P_U X + (I − P_U) X P_V
        let ut_x = self.u.tr_mul(x);
        let pu_x = &self.u * &ut_x;
        let rest = x - &pu_x;
        let rest_v = &rest * &self.v;
        pu_x + rest_v * self.v.transpose()
    }

    /// `X − P_T X`.
    pub fn project_perp(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(x - self.project_unchecked(x))
    }

    /// `P_{U⊥} X P_{V⊥}`, the factored form of the complement projector.
    pub fn project_perp_factored(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check(x)?;
        let (n1, n2) = self.shape();
        let pu_perp = DMatrix::identity(n1, n1) - &self.u * self.u.transpose();
        let pv_perp = DMatrix::identity(n2, n2) - &self.v * self.v.transpose();
        Ok(pu_perp * x * pv_perp)
    }

    /// Orthonormal basis of `T`: `u_i v_jᵀ`, `u_i q_kᵀ`, `p_k v_jᵀ` where `p`, `q`
    /// complete `U`, `V`. Returned vectorized, one element per column.
    pub fn orthonormal_basis(&self) -> DMatrix<f64> {
        let (n1, n2) = self.shape();
        let p = orthogonal_complement(&self.u);
        let q = orthogonal_complement(&self.v);
        let mut out = DMatrix::zeros(n1 * n2, self.dim());
        let mut k = 0;
        let mut push = |a: nalgebra::DVectorView<f64>, b: nalgebra::DVectorView<f64>| {
            let outer = a * b.transpose();
            out.column_mut(k).copy_from_slice(outer.as_slice());
            k += 1;
        };
        let r = self.rank();
        for i in 0..r {
            for j in 0..r {
                push(self.u.column(i), self.v.column(j));
            }
            for j in 0..q.ncols() {
                push(self.u.column(i), q.column(j));
            }
        }
        for i in 0..p.ncols() {
            for j in 0..r {
                push(p.column(i), self.v.column(j));
            }
        }
        out
    }
}

pub fn tangent_space_of(m: &DMatrix<f64>, rank_tol: f64) -> Result<TangentSpace> {
    TangentSpace::of(m, rank_tol)
}

pub fn project_t(ts: &TangentSpace, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    ts.project(x)
}

pub fn project_tperp(ts: &TangentSpace, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    ts.project_perp(x)
}

/// `Sgn M = U Vᵀ` over the retained rank.
pub fn sign_matrix(m: &DMatrix<f64>, rank_tol: f64) -> Result<DMatrix<f64>> {
    Ok(TangentSpace::of(m, rank_tol)?.uvt())
}
