//! Matrix basis families and the textual basis format.
//!
//! A [`BasisSet`] holds `L` unit-Frobenius-norm matrices of a fixed shape,
//! each vectorized column-major into one column of the matrix `W`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_part, unvectorize};

const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Entry,
    Edg,
    Hankel,
    RankOne,
    Weighted,
    Custom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Entry => "entry",
            Family::Edg => "edg",
            Family::Hankel => "hankel",
            Family::RankOne => "rank_one",
            Family::Weighted => "weighted",
            Family::Custom => "custom",
        }
    }

    /// Constraints implied by the family when nothing else is declared.
    pub fn default_constraints(self) -> SubspaceConstraints {
        match self {
            Family::Edg => SubspaceConstraints {
                symmetric: true,
                row_sum_zero: true,
                psd: true,
            },
            Family::RankOne => SubspaceConstraints {
                symmetric: true,
                row_sum_zero: false,
                psd: true,
            },
            _ => SubspaceConstraints::default(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "entry" => Family::Entry,
            "edg" => Family::Edg,
            "hankel" => Family::Hankel,
            "rank_one" => Family::RankOne,
            "weighted" => Family::Weighted,
            "custom" => Family::Custom,
            other => return Err(Error::Parse(format!("unknown basis family `{other}`"))),
        })
    }
}

/// Linear (and conic) constraints describing the feasible subspace.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SubspaceConstraints {
    pub symmetric: bool,
    pub row_sum_zero: bool,
    /// Feasible points are additionally restricted to the PSD cone.
    pub psd: bool,
}

impl SubspaceConstraints {
    /// Whether `m` satisfies the declared linear constraints to `tol`.
    /// The PSD flag is a property of feasible points, not of basis
    /// elements, so it is not checked here.
    pub fn linear_holds(&self, m: &DMatrix<f64>, tol: f64) -> bool {
        if self.symmetric && (m - m.transpose()).norm() > tol {
            return false;
        }
        if self.row_sum_zero {
            let ones = DVector::from_element(m.ncols(), 1.0);
            if (m * ones).norm() > tol {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    rows: usize,
    cols: usize,
    family: Family,
    w: DMatrix<f64>,
    constraints: SubspaceConstraints,
    /// Per-element normalization factors for weighted families.
    scales: Option<Vec<f64>>,
}

impl BasisSet {
    /// Wraps raw vectorized columns. No invariant is enforced beyond shape;
    /// run [`validate_basis`] to inspect norms, rank and constraints.
    pub fn from_columns(
        rows: usize,
        cols: usize,
        w: DMatrix<f64>,
        family: Family,
        constraints: SubspaceConstraints,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension("matrix shape must be nonzero".into()));
        }
        if w.nrows() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "columns have length {}, expected {}",
                w.nrows(),
                rows * cols
            )));
        }
        if w.ncols() == 0 || w.ncols() > rows * cols {
            return Err(Error::InvalidDimension(format!(
                "basis count {} must lie in 1..={}",
                w.ncols(),
                rows * cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            family,
            w,
            constraints,
            scales: None,
        })
    }

    pub fn custom(
        rows: usize,
        cols: usize,
        w: DMatrix<f64>,
        constraints: SubspaceConstraints,
    ) -> Result<Self> {
        Self::from_columns(rows, cols, w, Family::Custom, constraints)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Side length used in the recovery constants; `max(rows, cols)` for
    /// rectangular shapes.
    pub fn n(&self) -> usize {
        self.rows.max(self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Number of basis elements `L`.
    pub fn len(&self) -> usize {
        self.w.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.w.ncols() == 0
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn constraints(&self) -> SubspaceConstraints {
        self.constraints
    }

    /// The `n² × L` matrix of vectorized elements.
    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn scales(&self) -> Option<&[f64]> {
        self.scales.as_deref()
    }

    /// Element `alpha` as a matrix.
    pub fn element(&self, alpha: usize) -> DMatrix<f64> {
        unvectorize(self.w.column(alpha).as_slice(), self.rows, self.cols)
    }

    pub fn elements(&self) -> impl Iterator<Item = DMatrix<f64>> + '_ {
        (0..self.len()).map(|a| self.element(a))
    }

    /// Coefficients `<X, w_alpha>` for every alpha.
    pub fn coefficients(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        self.check_shape(x)?;
        let v = DVector::from_column_slice(x.as_slice());
        Ok(self.w.tr_mul(&v))
    }

    pub fn check_shape(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.shape() != (self.rows, self.cols) {
            return Err(Error::DimensionMismatch {
                expected: (self.rows, self.cols),
                got: x.shape(),
            });
        }
        Ok(())
    }
}

/// The `n²` elementary matrices `e_{i,j}`, ordered column-major so that
/// `W` is the identity.
pub fn make_entry_basis(n: usize) -> Result<BasisSet> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    BasisSet::from_columns(
        n,
        n,
        DMatrix::identity(n * n, n * n),
        Family::Entry,
        Family::Entry.default_constraints(),
    )
}

/// Pairs `(a, b)` with `a < b`, in lexicographic order.
pub fn edg_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((a, b));
        }
    }
    pairs
}

/// Distance-geometry basis `½(e_aa + e_bb − e_ab − e_ba)` over all pairs.
pub fn make_edg_basis(n: usize) -> Result<BasisSet> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "distance-geometry basis needs n >= 2, got {n}"
        )));
    }
    let pairs = edg_pairs(n);
    let mut w = DMatrix::zeros(n * n, pairs.len());
    for (alpha, &(a, b)) in pairs.iter().enumerate() {
        w[(a + a * n, alpha)] = 0.5;
        w[(b + b * n, alpha)] = 0.5;
        w[(a + b * n, alpha)] = -0.5;
        w[(b + a * n, alpha)] = -0.5;
    }
    BasisSet::from_columns(n, n, w, Family::Edg, Family::Edg.default_constraints())
}

/// Normalized anti-diagonal indicator matrices of shape `n1 × n2`. Element
/// `alpha` is supported on `i + j = alpha` (0-based).
pub fn make_hankel_basis(n1: usize, n2: usize) -> Result<BasisSet> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidDimension("Hankel shape must be nonzero".into()));
    }
    let count = n1 + n2 - 1;
    let mut w = DMatrix::zeros(n1 * n2, count);
    for alpha in 0..count {
        let support: Vec<(usize, usize)> = (0..n2)
            .filter_map(|j| alpha.checked_sub(j).filter(|&i| i < n1).map(|i| (i, j)))
            .collect();
        let value = 1.0 / (support.len() as f64).sqrt();
        for (i, j) in support {
            w[(i + j * n1, alpha)] = value;
        }
    }
    BasisSet::from_columns(n1, n2, w, Family::Hankel, Family::Hankel.default_constraints())
}

/// Rank-one family `v vᵀ / ‖v‖²` (quadratic measurements).
pub fn make_rank_one_basis(vectors: &[DVector<f64>]) -> Result<BasisSet> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::InvalidInput("no vectors supplied".into()))?;
    let n = first.len();
    if n == 0 {
        return Err(Error::InvalidDimension("vectors must be nonempty".into()));
    }
    if vectors.len() > n * n {
        return Err(Error::InvalidDimension(format!(
            "{} rank-one matrices cannot be independent in dimension {n}",
            vectors.len()
        )));
    }
    let mut w = DMatrix::zeros(n * n, vectors.len());
    for (alpha, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(Error::InvalidInput(format!(
                "vector {alpha} has length {}, expected {n}",
                v.len()
            )));
        }
        let sq = v.norm_squared();
        if sq == 0.0 {
            return Err(Error::InvalidInput(format!("vector {alpha} is zero")));
        }
        let outer = v * v.transpose() / sq;
        w.column_mut(alpha).copy_from_slice(outer.as_slice());
    }
    let basis = BasisSet::from_columns(n, n, w, Family::RankOne, Family::RankOne.default_constraints())?;
    let gram = basis.w.tr_mul(&basis.w);
    let eig = SymmetricEigen::new(gram);
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if lo <= hi * 1e-12 {
        return Err(Error::SingularBasis {
            condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
            limit: 1e12,
        });
    }
    Ok(basis)
}

/// Reweighted family `D⁻¹ w_alpha / ‖D⁻¹ w_alpha‖_F` for a positive diagonal
/// `D` acting on rows. The normalization factors `‖D⁻¹ w_alpha‖_F` are kept so
/// that `<D M, w'_alpha> = <M, w_alpha> / scale_alpha`.
pub fn make_weighted_basis(weights: &[f64], base: &BasisSet) -> Result<BasisSet> {
    if weights.len() != base.rows {
        return Err(Error::InvalidWeights(format!(
            "expected {} weights, got {}",
            base.rows,
            weights.len()
        )));
    }
    if let Some((i, d)) = weights.iter().enumerate().find(|(_, &d)| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::InvalidWeights(format!("weight {i} = {d} is not positive")));
    }
    let rows = base.rows;
    let mut w = base.w.clone();
    let mut scales = Vec::with_capacity(base.len());
    for mut col in w.column_iter_mut() {
        for (k, x) in col.iter_mut().enumerate() {
            *x /= weights[k % rows];
        }
        let s = col.norm();
        col /= s;
        scales.push(s);
    }
    let uniform = weights.iter().all(|&d| d == weights[0]);
    let constraints = if uniform {
        base.constraints
    } else {
        SubspaceConstraints::default()
    };
    let mut out = BasisSet::from_columns(rows, base.cols, w, Family::Weighted, constraints)?;
    out.scales = Some(scales);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub max_norm_deviation: f64,
    pub rank: usize,
    pub count: usize,
    pub full_rank: bool,
    pub count_within_ambient: bool,
    /// Indices of elements violating the declared linear constraints.
    pub constraint_violations: Vec<usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.max_norm_deviation <= UNIT_NORM_TOL
            && self.full_rank
            && self.count_within_ambient
            && self.constraint_violations.is_empty()
    }
}

/// Inspects a basis without failing.
pub fn validate_basis(basis: &BasisSet) -> ValidationReport {
    let max_norm_deviation = basis
        .w
        .column_iter()
        .map(|c| (c.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let gram = symmetric_part(&basis.w.tr_mul(&basis.w));
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, &x| a.max(x));
    let rank = eig
        .eigenvalues
        .iter()
        .filter(|&&x| x > top * 1e-10)
        .count();
    let constraint_violations = (0..basis.len())
        .filter(|&a| !basis.constraints.linear_holds(&basis.element(a), 1e-12))
        .collect();
    ValidationReport {
        max_norm_deviation,
        rank,
        count: basis.len(),
        full_rank: rank == basis.len(),
        count_within_ambient: basis.len() <= basis.rows * basis.cols,
        constraint_violations,
    }
}

/// Writes the textual format: a header `n L family` (or `n1xn2 L family`
/// for rectangular shapes) followed by one line of `n²` values per element.
pub fn write_basis(basis: &BasisSet) -> String {
    let mut out = String::new();
    if basis.is_square() {
        out.push_str(&format!("{} {} {}\n", basis.rows, basis.len(), basis.family));
    } else {
        out.push_str(&format!(
            "{}x{} {} {}\n",
            basis.rows,
            basis.cols,
            basis.len(),
            basis.family
        ));
    }
    for col in basis.w.column_iter() {
        let line: Vec<String> = col.iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_basis(text: &str) -> Result<BasisSet> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("missing header line".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Parse(format!("bad header `{header}`")));
    }
    let parse_usize = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
    };
    let (rows, cols) = match fields[0].split_once('x') {
        Some((a, b)) => (parse_usize(a)?, parse_usize(b)?),
        None => {
            let n = parse_usize(fields[0])?;
            (n, n)
        }
    };
    let count = parse_usize(fields[1])?;
    let family: Family = fields[2].parse()?;
    let mut w = DMatrix::zeros(rows * cols, count);
    for alpha in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing element line {}", alpha + 1)))?;
        let values = line
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != rows * cols {
            return Err(Error::Parse(format!(
                "element line {} has {} values, expected {}",
                alpha + 1,
                values.len(),
                rows * cols
            )));
        }
        w.column_mut(alpha).copy_from_slice(&values);
    }
    BasisSet::from_columns(rows, cols, w, family, family.default_constraints())
}
