//! Uniform index sampling with replacement, batch partitions, and the
//! sampling, adjoint and restricted frame operators.
//!
//! Indices are 0-based in memory. The textual sample format writes them
//! 1-based.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;

use crate::basis::BasisSet;
use crate::dual::DualBasisData;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_part, unvectorize, vectorize};
use crate::rng::rng_from_seed;
use crate::tangent::TangentSpace;

pub const DEFAULT_TANGENT_DIM_CAP: usize = 4000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    indices: Vec<usize>,
    basis_len: usize,
    batch_sizes: Vec<usize>,
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DuplicateStats {
    pub distinct: usize,
    pub repeated_draws: usize,
    pub max_multiplicity: usize,
}

impl SampleSet {
    pub fn from_indices(indices: Vec<usize>, basis_len: usize, seed: u64) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= basis_len) {
            return Err(Error::InvalidInput(format!(
                "index {bad} out of range for {basis_len} basis elements"
            )));
        }
        let m = indices.len();
        Ok(Self {
            indices,
            basis_len,
            batch_sizes: vec![m],
            seed,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn m(&self) -> usize {
        self.indices.len()
    }

    pub fn basis_len(&self) -> usize {
        self.basis_len
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn batch_sizes(&self) -> &[usize] {
        &self.batch_sizes
    }

    pub fn batch_count(&self) -> usize {
        self.batch_sizes.len()
    }

    pub fn batch(&self, i: usize) -> &[usize] {
        let start: usize = self.batch_sizes[..i].iter().sum();
        &self.indices[start..start + self.batch_sizes[i]]
    }

    pub fn batches(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.batch_count()).map(|i| self.batch(i))
    }

    /// Multiplicity of every basis index.
    pub fn index_counts(&self) -> Vec<usize> {
        counts_of(&self.indices, self.basis_len)
    }

    /// Sorted distinct indices.
    pub fn distinct(&self) -> Vec<usize> {
        let mut d = self.indices.clone();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn duplicate_stats(&self) -> DuplicateStats {
        let counts = self.index_counts();
        let distinct = counts.iter().filter(|&&c| c > 0).count();
        DuplicateStats {
            distinct,
            repeated_draws: self.m() - distinct,
            max_multiplicity: counts.into_iter().max().unwrap_or(0),
        }
    }

    /// `seed m l` header, the batch sizes, then the 1-based indices.
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        let one_based: Vec<usize> = self.indices.iter().map(|i| i + 1).collect();
        format!(
            "{} {} {}\n{}\n{}\n",
            self.seed,
            self.m(),
            self.batch_count(),
            join(&self.batch_sizes),
            join(&one_based)
        )
    }

    pub fn from_text(text: &str, basis_len: usize) -> Result<Self> {
        let mut lines = text.lines();
        let mut next_numbers = |what: &str| -> Result<Vec<u64>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing {what} line")))?;
            line.split_whitespace()
                .map(|t| t.parse::<u64>().map_err(|e| Error::Parse(format!("`{t}`: {e}"))))
                .collect()
        };
        let header = next_numbers("header")?;
        let [seed, m, l] = header[..] else {
            return Err(Error::Parse("header must be `seed m l`".into()));
        };
        let sizes: Vec<usize> = next_numbers("batch size")?.into_iter().map(|x| x as usize).collect();
        let idx = next_numbers("index")?;
        if idx.len() as u64 != m || sizes.len() as u64 != l {
            return Err(Error::Parse("counts in header disagree with body".into()));
        }
        let indices = idx
            .into_iter()
            .map(|i| {
                (i as usize)
                    .checked_sub(1)
                    .ok_or_else(|| Error::Parse("indices are 1-based".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let set = Self::from_indices(indices, basis_len, seed)?;
        partition_omega(&set, sizes.len(), Some(&sizes))
    }
}

fn counts_of(indices: &[usize], basis_len: usize) -> Vec<usize> {
    let mut counts = vec![0; basis_len];
    for &i in indices {
        counts[i] += 1;
    }
    counts
}

/// `m` i.i.d. uniform draws from `0..L`.
pub fn draw_omega(basis_len: usize, m: usize, seed: u64) -> Result<SampleSet> {
    if basis_len == 0 || m == 0 {
        return Err(Error::InvalidInput("need L >= 1 and m >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let indices = (0..m).map(|_| rng.random_range(0..basis_len)).collect();
    SampleSet::from_indices(indices, basis_len, seed)
}

/// Splits the draws into `l` consecutive batches, order preserving. Without
/// explicit sizes the split is near-equal with the remainder going to the
/// leading batches.
pub fn partition_omega(s: &SampleSet, l: usize, sizes: Option<&[usize]>) -> Result<SampleSet> {
    if l == 0 {
        return Err(Error::Partition("batch count must be positive".into()));
    }
    let m = s.m();
    let batch_sizes = match sizes {
        Some(sizes) => {
            if sizes.len() != l || sizes.iter().sum::<usize>() != m {
                return Err(Error::Partition(format!(
                    "sizes {sizes:?} do not split {m} draws into {l} batches"
                )));
            }
            sizes.to_vec()
        }
        None => equal_sizes(m, l),
    };
    Ok(SampleSet {
        batch_sizes,
        ..s.clone()
    })
}

/// A multiset of basis indices, given either as draws or as counts.
pub trait Multiset {
    /// Multiplicity of every index in `0..basis_len`.
    fn counts(&self, basis_len: usize) -> Result<Vec<usize>>;

    /// `(L / m) · multiplicity` per basis index.
    fn scaled_counts(&self, basis_len: usize) -> Result<DVector<f64>> {
        let counts = self.counts(basis_len)?;
        let m: usize = counts.iter().sum();
        if m == 0 {
            return Err(Error::EmptySample);
        }
        let scale = basis_len as f64 / m as f64;
        Ok(DVector::from_iterator(
            basis_len,
            counts.into_iter().map(|c| c as f64 * scale),
        ))
    }
}

impl Multiset for [usize] {
    fn counts(&self, basis_len: usize) -> Result<Vec<usize>> {
        if let Some(&bad) = self.iter().find(|&&i| i >= basis_len) {
            return Err(Error::InvalidInput(format!(
                "index {bad} out of range for {basis_len} basis elements"
            )));
        }
        Ok(counts_of(self, basis_len))
    }
}

impl<const N: usize> Multiset for [usize; N] {
    fn counts(&self, basis_len: usize) -> Result<Vec<usize>> {
        self[..].counts(basis_len)
    }
}

impl Multiset for Vec<usize> {
    fn counts(&self, basis_len: usize) -> Result<Vec<usize>> {
        self[..].counts(basis_len)
    }
}

/// Multiplicities indexed by basis element.
#[derive(Debug, Clone, Copy)]
pub struct Counts<'a>(pub &'a [usize]);

impl Multiset for Counts<'_> {
    fn counts(&self, basis_len: usize) -> Result<Vec<usize>> {
        if self.0.len() != basis_len {
            return Err(Error::InvalidInput(format!(
                "{} counts for {basis_len} basis elements",
                self.0.len()
            )));
        }
        Ok(self.0.to_vec())
    }
}

/// Per-batch multiplicities; the compact form of a partitioned sample when
/// `m` is far larger than `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchCounts {
    basis_len: usize,
    seed: u64,
    batches: Vec<Vec<usize>>,
}

impl BatchCounts {
    pub fn basis_len(&self) -> usize {
        self.basis_len
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn batch_count(&self) -> usize {
        self.batches.len()
    }

    pub fn batch(&self, i: usize) -> Counts<'_> {
        Counts(&self.batches[i])
    }

    pub fn batches(&self) -> impl Iterator<Item = Counts<'_>> + '_ {
        self.batches.iter().map(|b| Counts(b))
    }

    pub fn batch_sizes(&self) -> Vec<usize> {
        self.batches.iter().map(|b| b.iter().sum()).collect()
    }

    pub fn m(&self) -> usize {
        self.batch_sizes().iter().sum()
    }

    pub fn total(&self) -> Vec<usize> {
        let mut t = vec![0; self.basis_len];
        for b in &self.batches {
            for (acc, c) in t.iter_mut().zip(b) {
                *acc += c;
            }
        }
        t
    }

    /// Indices drawn at least once, ascending.
    pub fn distinct(&self) -> Vec<usize> {
        (0..self.basis_len).filter(|&a| self.batches.iter().any(|b| b[a] > 0)).collect()
    }
}

impl SampleSet {
    pub fn batch_counts(&self) -> BatchCounts {
        BatchCounts {
            basis_len: self.basis_len,
            seed: self.seed,
            batches: self.batches().map(|b| counts_of(b, self.basis_len)).collect(),
        }
    }
}

/// Same draws as [`draw_omega`] followed by [`partition_omega`] with the
/// given sizes, kept only as counts.
pub fn draw_batch_counts(basis_len: usize, sizes: &[usize], seed: u64) -> Result<BatchCounts> {
    if basis_len == 0 || sizes.is_empty() || sizes.iter().sum::<usize>() == 0 {
        return Err(Error::InvalidInput("need L >= 1 and at least one draw".into()));
    }
    let mut rng = rng_from_seed(seed);
    let batches = sizes
        .iter()
        .map(|&k| {
            let mut c = vec![0; basis_len];
            for _ in 0..k {
                c[rng.random_range(0..basis_len)] += 1;
            }
            c
        })
        .collect();
    Ok(BatchCounts {
        basis_len,
        seed,
        batches,
    })
}

/// Near-equal split of `m` into `l` sizes, remainder to the leading batches.
pub fn equal_sizes(m: usize, l: usize) -> Vec<usize> {
    let base = m / l;
    let extra = m % l;
    (0..l).map(|i| base + usize::from(i < extra)).collect()
}

fn check_shape(shape: (usize, usize), x: &DMatrix<f64>) -> Result<()> {
    if x.shape() != shape {
        return Err(Error::DimensionMismatch {
            expected: shape,
            got: x.shape(),
        });
    }
    Ok(())
}

/// `R_Ω X = (L/m) Σ_{α∈Ω} <X, w_α> z_α`. Pass a single batch to get `R_i`.
pub fn sampling_apply<S: Multiset + ?Sized>(
    dual: &DualBasisData,
    omega: &S,
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_shape(dual.shape(), x)?;
    let c = omega.scaled_counts(dual.len())?;
    let coef = dual.w().tr_mul(&vectorize(x)).component_mul(&c);
    let (rows, cols) = dual.shape();
    Ok(unvectorize((dual.z() * coef).as_slice(), rows, cols))
}

/// `R*_Ω X = (L/m) Σ_{α∈Ω} <X, z_α> w_α`.
pub fn sampling_adjoint_apply<S: Multiset + ?Sized>(
    dual: &DualBasisData,
    omega: &S,
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_shape(dual.shape(), x)?;
    let c = omega.scaled_counts(dual.len())?;
    let coef = dual.z().tr_mul(&vectorize(x)).component_mul(&c);
    let (rows, cols) = dual.shape();
    Ok(unvectorize((dual.w() * coef).as_slice(), rows, cols))
}

/// Restricted frame operator `F X = (L/m) Σ_{α∈Ω} <X, w_α> w_α`.
pub fn frame_apply<S: Multiset + ?Sized>(
    basis: &BasisSet,
    omega: &S,
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    basis.check_shape(x)?;
    let c = omega.scaled_counts(basis.len())?;
    let coef = basis.w().tr_mul(&vectorize(x)).component_mul(&c);
    Ok(unvectorize((basis.w() * coef).as_slice(), basis.rows(), basis.cols()))
}

/// Domain on which `P_T F P_T` is examined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TangentDomain {
    /// All of `T`.
    Full,
    /// `T ∩ span(W)`. This is where the norm-equivalence lower bound applies
    /// and coincides with `T` whenever the basis spans the ambient space.
    #[default]
    InSpan,
}

/// `λ_min` of `P_T F P_T` on `T ∩ span(W)`, computed on an explicit
/// orthonormal basis of that space. Outside `T` the operator vanishes
/// identically, so only the restriction is meaningful.
pub fn ptfpt_min_eig<S: Multiset + ?Sized>(
    ts: &TangentSpace,
    basis: &BasisSet,
    omega: &S,
) -> Result<f64> {
    ptfpt_min_eig_on(ts, basis, omega, TangentDomain::InSpan, DEFAULT_TANGENT_DIM_CAP)
}

pub fn ptfpt_min_eig_capped<S: Multiset + ?Sized>(
    ts: &TangentSpace,
    basis: &BasisSet,
    omega: &S,
    cap: usize,
) -> Result<f64> {
    ptfpt_min_eig_on(ts, basis, omega, TangentDomain::InSpan, cap)
}

pub fn ptfpt_min_eig_on<S: Multiset + ?Sized>(
    ts: &TangentSpace,
    basis: &BasisSet,
    omega: &S,
    domain: TangentDomain,
    cap: usize,
) -> Result<f64> {
    if ts.shape() != (basis.rows(), basis.cols()) {
        return Err(Error::DimensionMismatch {
            expected: (basis.rows(), basis.cols()),
            got: ts.shape(),
        });
    }
    let dim = ts.dim();
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let c = omega.scaled_counts(basis.len())?;
    let tb = match domain {
        TangentDomain::Full => ts.orthonormal_basis(),
        TangentDomain::InSpan => tangent_in_span(ts, basis),
    };
    if tb.ncols() == 0 {
        return Ok(0.0);
    }
    let touched: Vec<usize> = (0..basis.len()).filter(|&a| c[a] > 0.0).collect();
    // rows sqrt(c_α) w_αᵀ B over sampled α
    let mut a = DMatrix::zeros(touched.len(), tb.ncols());
    for (row, &alpha) in touched.iter().enumerate() {
        let proj = basis.w().column(alpha).tr_mul(&tb) * c[alpha].sqrt();
        a.row_mut(row).copy_from(&proj);
    }
    let g = symmetric_part(&a.tr_mul(&a));
    let eig = SymmetricEigen::new(g);
    let lo = eig.eigenvalues.iter().fold(f64::INFINITY, |acc, &x| acc.min(x));
    Ok(lo.max(0.0))
}

/// Orthonormal basis (vectorized columns) of `T ∩ span(W)`.
pub fn tangent_in_span(ts: &TangentSpace, basis: &BasisSet) -> DMatrix<f64> {
    let tb = ts.orthonormal_basis();
    if basis.len() == basis.rows() * basis.cols() {
        return tb;
    }
    let q = basis.w().clone().qr().q();
    // eigenvalue 1 of Bᵀ Q Qᵀ B marks directions of T inside the span
    let qtb = q.tr_mul(&tb);
    let eig = SymmetricEigen::new(symmetric_part(&qtb.tr_mul(&qtb)));
    let keep: Vec<usize> = (0..tb.ncols())
        .filter(|&i| eig.eigenvalues[i] > 1.0 - 1e-8)
        .collect();
    let mut out = DMatrix::zeros(tb.nrows(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &(&tb * eig.eigenvectors.column(i)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{make_edg_basis, make_entry_basis, make_hankel_basis};
    use crate::dual::dual_set;
    use crate::linalg::inner;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(rows: usize, cols: usize, rng: &mut crate::rng::Rng) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn single_element_basis_draws() {
        let s = draw_omega(1, 5, 3).unwrap();
        assert_eq!(s.indices(), &[0; 5]);
        assert_eq!(s.duplicate_stats().max_multiplicity, 5);
    }

    #[test]
    fn draws_are_reproducible() {
        assert_eq!(draw_omega(50, 200, 9).unwrap(), draw_omega(50, 200, 9).unwrap());
        assert_ne!(draw_omega(50, 200, 9).unwrap(), draw_omega(50, 200, 10).unwrap());
    }

    #[test]
    fn frequencies_within_binomial_band() {
        let (l, m) = (100, 10_000);
        let s = draw_omega(l, m, 12345).unwrap();
        let p = 1.0 / l as f64;
        let mean = m as f64 * p;
        let sd = (m as f64 * p * (1.0 - p)).sqrt();
        for c in s.index_counts() {
            assert!((c as f64 - mean).abs() <= 5.0 * sd, "count {c}");
        }
    }

    #[test]
    fn counted_draws_match_indexed_draws() {
        let s = partition_omega(&draw_omega(36, 100, 42).unwrap(), 3, None).unwrap();
        let c = draw_batch_counts(36, &[34, 33, 33], 42).unwrap();
        assert_eq!(s.batch_counts(), c);
        assert_eq!(c.m(), 100);
        assert_eq!(c.distinct(), s.distinct());
        let b = make_edg_basis(9).unwrap();
        let d = dual_set(&b).unwrap();
        let x = DMatrix::from_fn(9, 9, |i, j| (i * 9 + j) as f64);
        let a = sampling_adjoint_apply(&d, s.batch(1), &x).unwrap();
        let e = sampling_adjoint_apply(&d, &c.batch(1), &x).unwrap();
        assert!((a - e).amax() < 1e-12);
    }

    #[test]
    fn partitions() {
        let s = draw_omega(7, 10, 1).unwrap();
        assert_eq!(partition_omega(&s, 2, None).unwrap().batch_sizes(), &[5, 5]);
        let p = partition_omega(&s, 3, None).unwrap();
        assert_eq!(p.batch_sizes(), &[4, 3, 3]);
        let flat: Vec<usize> = p.batches().flatten().copied().collect();
        assert_eq!(flat, s.indices());
        assert_eq!(partition_omega(&s, 2, Some(&[7, 3])).unwrap().batch_sizes(), &[7, 3]);
        assert!(matches!(partition_omega(&s, 2, Some(&[7, 4])), Err(Error::Partition(_))));
        assert!(partition_omega(&s, 0, None).is_err());
    }

    #[test]
    fn sample_text_round_trip() {
        let s = partition_omega(&draw_omega(20, 13, 77).unwrap(), 3, None).unwrap();
        let text = s.to_text();
        assert!(text.starts_with("77 13 3\n"));
        assert_eq!(SampleSet::from_text(&text, 20).unwrap(), s);
    }

    #[test]
    fn full_sampling_reproduces_span_elements() {
        let b = make_edg_basis(6).unwrap();
        let d = dual_set(&b).unwrap();
        let mut rng = rng_from_seed(1);
        let coef = DVector::from_fn(b.len(), |_, _| StandardNormal.sample(&mut rng));
        let x = unvectorize((b.w() * coef).as_slice(), 6, 6);
        let all: Vec<usize> = (0..b.len()).collect();
        let rx = sampling_apply(&d, &all, &x).unwrap();
        assert!((rx - &x).amax() < 1e-8);
    }

    #[test]
    fn orthonormal_singleton() {
        let b = make_entry_basis(3).unwrap();
        let d = dual_set(&b).unwrap();
        let mut rng = rng_from_seed(2);
        let x = gaussian(3, 3, &mut rng);
        let rx = sampling_apply(&d, &[4], &x).unwrap();
        let expected = b.element(4) * (9.0 * inner(&x, &b.element(4)));
        assert!((rx - expected).amax() < 1e-12);
        let rsx = sampling_adjoint_apply(&d, &[4, 4, 0], &x).unwrap();
        let rx = sampling_apply(&d, &[4, 4, 0], &x).unwrap();
        assert!((rsx - rx).amax() < 1e-12);
    }

    fn brute_force(
        omega: &[usize],
        l: usize,
        x: &DMatrix<f64>,
        left: impl Fn(usize) -> DMatrix<f64>,
        right: impl Fn(usize) -> DMatrix<f64>,
    ) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(x.nrows(), x.ncols());
        for &a in omega {
            acc += right(a) * inner(x, &left(a));
        }
        acc * (l as f64 / omega.len() as f64)
    }

    #[test]
    fn operators_match_brute_force() {
        let b = make_edg_basis(6).unwrap();
        let d = dual_set(&b).unwrap();
        let mut rng = rng_from_seed(3);
        let omega = draw_omega(b.len(), 10, 4).unwrap();
        let om = omega.indices();
        let x = gaussian(6, 6, &mut rng);
        let w = |a| b.element(a);
        let z = |a| d.dual_element(a);
        let r = sampling_apply(&d, om, &x).unwrap();
        assert!((r - brute_force(om, b.len(), &x, w, z)).amax() < 1e-12);
        let rs = sampling_adjoint_apply(&d, om, &x).unwrap();
        assert!((rs - brute_force(om, b.len(), &x, z, w)).amax() < 1e-12);
        let om8 = &draw_omega(10, 8, 5).unwrap();
        let b5 = make_edg_basis(5).unwrap();
        let x5 = gaussian(5, 5, &mut rng);
        let f = frame_apply(&b5, om8.indices(), &x5).unwrap();
        let w5 = |a| b5.element(a);
        assert!((f - brute_force(om8.indices(), 10, &x5, w5, w5)).amax() < 1e-12);
    }

    #[test]
    fn empty_sample_rejected() {
        let b = make_entry_basis(2).unwrap();
        let d = dual_set(&b).unwrap();
        let x = DMatrix::zeros(2, 2);
        assert!(matches!(sampling_apply(&d, &[], &x), Err(Error::EmptySample)));
        assert!(matches!(frame_apply(&b, &[], &x), Err(Error::EmptySample)));
    }

    #[test]
    fn frame_is_identity_under_full_orthonormal_sampling() {
        let b = make_entry_basis(3).unwrap();
        let all: Vec<usize> = (0..9).collect();
        let mut rng = rng_from_seed(4);
        let x = gaussian(3, 3, &mut rng);
        assert!((frame_apply(&b, &all, &x).unwrap() - &x).amax() < 1e-12);
    }

    #[test]
    fn averaged_singletons_give_full_frame() {
        let b = make_edg_basis(5).unwrap();
        let mut rng = rng_from_seed(6);
        let x = gaussian(5, 5, &mut rng);
        let l = b.len();
        let avg = (0..l).fold(DMatrix::zeros(5, 5), |acc, a| acc + frame_apply(&b, &[a], &x).unwrap()) / l as f64;
        let full = (0..l).fold(DMatrix::zeros(5, 5), |acc, a| acc + b.element(a) * inner(&x, &b.element(a)));
        assert!((avg - full).amax() < 1e-10);
    }

    #[test]
    fn min_eig_full_orthonormal_is_one() {
        let b = make_entry_basis(4).unwrap();
        let mut rng = rng_from_seed(7);
        let m = gaussian(4, 1, &mut rng) * gaussian(4, 1, &mut rng).transpose();
        let ts = TangentSpace::of(&m, 1e-9).unwrap();
        let all: Vec<usize> = (0..16).collect();
        assert!((ptfpt_min_eig(&ts, &b, &all).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn min_eig_zero_when_nothing_touches_t() {
        let b = make_entry_basis(3).unwrap();
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 0)] = 1.0;
        let ts = TangentSpace::of(&m, 1e-9).unwrap();
        // e_{1,1} (column-major index 4) is orthogonal to T
        assert_eq!(ptfpt_min_eig(&ts, &b, &[4, 4]).unwrap(), 0.0);
    }

    #[test]
    fn edg_tangent_space_leaves_the_span() {
        let n = 6;
        let b = make_edg_basis(n).unwrap();
        let m = crate::planted::edg_truth(n, 1, 3).unwrap();
        let ts = TangentSpace::of(&m, 1e-9).unwrap();
        let all: Vec<usize> = (0..b.len()).collect();
        let full = ptfpt_min_eig_on(&ts, &b, &all, TangentDomain::Full, 100).unwrap();
        assert!(full < 1e-10);
        // T ∩ S for S = symmetric, zero row sums: dim r(n-1) - r(r-1)/2
        assert_eq!(tangent_in_span(&ts, &b).ncols(), n - 1);
        let lam_min_h = crate::dual::dual_set(&b).unwrap().spectrum().lambda_min_h;
        assert!(ptfpt_min_eig(&ts, &b, &all).unwrap() >= lam_min_h - 1e-10);
    }

    #[test]
    fn min_eig_dimension_cap() {
        let b = make_hankel_basis(6, 6).unwrap();
        let ts = TangentSpace::of(&DMatrix::identity(6, 6), 1e-9).unwrap();
        assert!(matches!(
            ptfpt_min_eig_capped(&ts, &b, &[0], 10),
            Err(Error::DimensionCap { dim: 36, cap: 10 })
        ));
    }
}
