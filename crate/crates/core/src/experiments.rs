//! Experiment configuration and the CSV-producing drivers behind the
//! command-line tool: phase-transition sweeps, the EDG demo, certificate
//! audits, and the `diagnose` / `bound` reports.
//!
//! Every trial draws from a seed derived from the master seed and its
//! position in the grid, and rows are emitted in grid order, so output is
//! byte-identical across runs and thread counts.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;

use crate::basis::{
    make_edg_basis, make_entry_basis, make_hankel_basis, make_rank_one_basis, make_weighted_basis,
    read_basis, BasisSet, Family,
};
use crate::certificate::golfing_build_counts;
use crate::diagnostics::{
    coherence_profile, correlation_parameter, sample_bound, BoundInputs, CDefinition,
    CoherenceProfile, TheoremConstants,
};
use crate::dual::{dual_set, DualBasisData, GramSpectrum};
use crate::error::{Error, Result};
use crate::planted::{distances_from_gram, planted_truth};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sampling::{draw_batch_counts, draw_omega, equal_sizes, SampleSet};
use crate::solver::{solve_exact_with, solve_noisy_with, CompletionProblem, SolverConfig, SpanFactor};

pub const CSV_VERSION: &str = "v1";

/// How the certificate audit splits its samples into batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BatchMode {
    /// `l` and `m_i` from the sample bound for each trial's truth.
    #[default]
    Theorem,
    /// `batches` batches of `batch_size` draws.
    Fixed,
    /// Every basis index exactly once per batch.
    Full,
}

impl FromStr for BatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" => Ok(Self::Theorem),
            "fixed" => Ok(Self::Fixed),
            "full" => Ok(Self::Full),
            _ => Err(Error::Parse(format!("unknown batch mode `{s}`"))),
        }
    }
}

impl BatchMode {
    fn as_str(self) -> &'static str {
        match self {
            Self::Theorem => "theorem",
            Self::Fixed => "fixed",
            Self::Full => "full",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: Family,
    pub n: Vec<usize>,
    pub r: Vec<usize>,
    /// Absolute sample counts.
    pub m: Vec<usize>,
    /// Factors `c` in `m = c·n·r·⌈ln n⌉²`.
    pub oversample: Vec<f64>,
    /// Factors `c` in `m = c·dim T`.
    pub dimt_factor: Vec<f64>,
    /// Adds a cell in which every basis index is sampled exactly once.
    pub full_cell: bool,
    pub trials: usize,
    pub seed: u64,
    pub beta: f64,
    pub success_tol: f64,
    pub solver: SolverConfig,
    /// Standard deviation of additive Gaussian measurement noise.
    pub noise_sigma: f64,
    pub c_v: Option<f64>,
    pub c_definition: CDefinition,
    pub batch_mode: BatchMode,
    pub batch_size: usize,
    pub batches: usize,
    pub weights: Option<Vec<f64>>,
    pub basis_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            family: Family::Entry,
            n: vec![10],
            r: vec![1],
            m: Vec::new(),
            oversample: Vec::new(),
            dimt_factor: Vec::new(),
            full_cell: false,
            trials: 10,
            seed: 0,
            beta: 1.5,
            success_tol: 1e-4,
            solver: SolverConfig::default(),
            noise_sigma: 0.0,
            c_v: None,
            c_definition: CDefinition::Proof,
            batch_mode: BatchMode::Theorem,
            batch_size: 0,
            batches: 1,
            weights: None,
            basis_file: None,
            out: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("{key}: `{value}`: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Flat `key = value` text; `#` starts a comment, lists are
    /// comma-separated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "family" => self.family = parse_value(key, value)?,
            "n" => self.n = parse_list(key, value)?,
            "r" => self.r = parse_list(key, value)?,
            "m" => self.m = parse_list(key, value)?,
            "oversample" => self.oversample = parse_list(key, value)?,
            "dimt_factor" => self.dimt_factor = parse_list(key, value)?,
            "full_cell" => self.full_cell = parse_value(key, value)?,
            "trials" => self.trials = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "beta" => self.beta = parse_value(key, value)?,
            "success_tol" => self.success_tol = parse_value(key, value)?,
            "feas_tol" => self.solver.feas_tol = parse_value(key, value)?,
            "rel_change_tol" => self.solver.rel_change_tol = parse_value(key, value)?,
            "max_iter" => self.solver.max_iter = parse_value(key, value)?,
            "rho" => self.solver.rho = parse_value(key, value)?,
            "noise_sigma" => self.noise_sigma = parse_value(key, value)?,
            "c_v" => self.c_v = Some(parse_value(key, value)?),
            "c_definition" => {
                self.c_definition = match value {
                    "proof" => CDefinition::Proof,
                    "statement" => CDefinition::Statement,
                    _ => return Err(Error::Parse(format!("c_definition: `{value}`"))),
                }
            }
            "batch_mode" => self.batch_mode = value.parse()?,
            "batch_size" => self.batch_size = parse_value(key, value)?,
            "batches" => self.batches = parse_value(key, value)?,
            "weights" => self.weights = Some(parse_list(key, value)?),
            "basis_file" => self.basis_file = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(Error::Parse(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("{what} must be positive")));
        if self.n.is_empty() || self.n.contains(&0) {
            return bad("n grid");
        }
        if self.r.is_empty() || self.r.contains(&0) {
            return bad("r grid");
        }
        if self.m.contains(&0) {
            return bad("m grid");
        }
        if self.oversample.iter().chain(&self.dimt_factor).any(|&c| !(c > 0.0)) {
            return bad("sampling factors");
        }
        if self.trials == 0 {
            return bad("trials");
        }
        if !(self.success_tol > 0.0) || self.noise_sigma < 0.0 {
            return Err(Error::InvalidInput("success_tol > 0 and noise_sigma >= 0 required".into()));
        }
        if self.batch_mode == BatchMode::Fixed && (self.batch_size == 0 || self.batches == 0) {
            return bad("batch_size and batches");
        }
        Ok(())
    }

    /// Echo of every setting as `key=value` pairs.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = vec![
            ("family", self.family.to_string()),
            ("n", join(&self.n)),
            ("r", join(&self.r)),
            ("m", join(&self.m)),
            ("oversample", join(&self.oversample)),
            ("dimt_factor", join(&self.dimt_factor)),
            ("full_cell", self.full_cell.to_string()),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("beta", self.beta.to_string()),
            ("success_tol", self.success_tol.to_string()),
            ("feas_tol", self.solver.feas_tol.to_string()),
            ("rel_change_tol", self.solver.rel_change_tol.to_string()),
            ("max_iter", self.solver.max_iter.to_string()),
            ("rho", self.solver.rho.to_string()),
            ("noise_sigma", self.noise_sigma.to_string()),
            (
                "c_definition",
                match self.c_definition {
                    CDefinition::Proof => "proof".into(),
                    CDefinition::Statement => "statement".into(),
                },
            ),
            ("batch_mode", self.batch_mode.as_str().into()),
            ("batch_size", self.batch_size.to_string()),
            ("batches", self.batches.to_string()),
        ];
        if let Some(c) = self.c_v {
            v.push(("c_v", c.to_string()));
        }
        if let Some(w) = &self.weights {
            v.push(("weights", join(w)));
        }
        if let Some(p) = &self.basis_file {
            v.push(("basis_file", p.display().to_string()));
        }
        v
    }

    /// Sample counts for one `(n, r)` cell, ascending and deduplicated.
    pub fn m_values(&self, n: usize, r: usize, basis_len: usize, rows: usize, cols: usize) -> Vec<usize> {
        let dim_t = r * (rows + cols) - r * r;
        let mut ms: Vec<usize> = self.m.clone();
        ms.extend(self.oversample.iter().map(|&c| oversampled_m(c, n, r)));
        ms.extend(self.dimt_factor.iter().map(|&c| ((c * dim_t as f64).round() as usize).max(1)));
        if ms.is_empty() && !self.full_cell {
            ms.push(basis_len);
        }
        ms.sort_unstable();
        ms.dedup();
        ms
    }
}

/// `round(c·n·r·⌈ln n⌉²)`, at least 1.
pub fn oversampled_m(c: f64, n: usize, r: usize) -> usize {
    let log = (n as f64).ln().ceil().max(1.0);
    ((c * (n * r) as f64 * log * log).round() as usize).max(1)
}

/// Opens (truncating) the output file; called before any computation so an
/// unwritable path fails fast.
pub fn open_output(path: &Path) -> Result<File> {
    Ok(File::create(path)?)
}

/// Builds the configured family at size `n`.
pub fn build_basis(cfg: &ExperimentConfig, n: usize) -> Result<BasisSet> {
    match cfg.family {
        Family::Entry => make_entry_basis(n),
        Family::Edg => make_edg_basis(n),
        Family::Hankel => make_hankel_basis(n, n),
        Family::RankOne => {
            let mut rng = rng_from_seed(derive_seed(cfg.seed, &[0x0b, n as u64]));
            let vs: Vec<DVector<f64>> = (0..n * (n + 1) / 2)
                .map(|_| DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng)))
                .collect();
            make_rank_one_basis(&vs)
        }
        Family::Weighted => {
            let weights = match &cfg.weights {
                Some(w) => w.clone(),
                None => (0..n).map(|i| 1.0 + i as f64 / n as f64).collect(),
            };
            make_weighted_basis(&weights, &make_entry_basis(n)?)
        }
        Family::Custom => {
            let path = cfg
                .basis_file
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("custom family needs basis_file".into()))?;
            let b = read_basis(&std::fs::read_to_string(path)?)?;
            if b.n() != n {
                return Err(Error::InvalidInput(format!(
                    "basis file has n = {}, grid asks for {n}",
                    b.n()
                )));
            }
            Ok(b)
        }
    }
}

fn dual_with_config(cfg: &ExperimentConfig, basis: &BasisSet) -> Result<DualBasisData> {
    let mut d = dual_set(basis)?;
    if let Some(c_v) = cfg.c_v {
        d.set_c_v(c_v)?;
    }
    Ok(d)
}

/// Formats a float with the shortest representation that round-trips.
fn num(x: f64) -> String {
    format!("{x}")
}

fn header_lines(kind: &str, cfg: &ExperimentConfig) -> String {
    let mut s = format!("# gencomp-{kind} {CSV_VERSION}\n");
    for (k, v) in cfg.pairs() {
        let _ = writeln!(s, "# {k}={v}");
    }
    s
}

fn spectrum_lines(n: usize, mu: f64, gs: &GramSpectrum) -> String {
    let mut s = format!("# n={n} mu={}", num(mu));
    for (k, v) in gs.pairs() {
        let _ = write!(s, " {k}={}", num(v));
    }
    s.push('\n');
    s
}

struct Cell {
    n: usize,
    basis: BasisSet,
    dual: DualBasisData,
    factor: SpanFactor,
    mu: f64,
}

fn build_cells(cfg: &ExperimentConfig) -> Result<Vec<Cell>> {
    cfg.n
        .iter()
        .map(|&n| {
            let basis = build_basis(cfg, n)?;
            let dual = dual_with_config(cfg, &basis)?;
            let factor = SpanFactor::new(&basis);
            let mu = correlation_parameter(&basis).mu;
            Ok(Cell {
                n,
                basis,
                dual,
                factor,
                mu,
            })
        })
        .collect()
}

/// Truth and coherence for one `(n, r, trial)`; shared across the m grid.
struct Truth {
    m: DMatrix<f64>,
    profile: Option<CoherenceProfile>,
}

fn make_truth(cfg: &ExperimentConfig, cell: &Cell, r: usize, trial: usize) -> Result<Truth> {
    let seed = derive_seed(cfg.seed, &[1, cell.n as u64, r as u64, trial as u64]);
    let m = planted_truth(&cell.basis, cell.dual.h_inv(), r, seed)?;
    let profile = coherence_profile(&m, &cell.basis, &cell.dual).ok();
    Ok(Truth { m, profile })
}

fn noisy_measurements(
    cfg: &ExperimentConfig,
    p: &mut CompletionProblem,
    seed: u64,
) -> Result<()> {
    if cfg.noise_sigma == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, cfg.noise_sigma)
        .map_err(|e| Error::InvalidInput(format!("noise_sigma: {e}")))?;
    let mut rng = rng_from_seed(seed);
    for b in p.measurements.iter_mut() {
        *b += normal.sample(&mut rng);
    }
    // δ = (L/m)·σ·sqrt(Σ_draws ‖z_α‖²), the root-mean-square noise norm
    let l = p.basis.len() as f64;
    let m = p.samples.m() as f64;
    let zsq: f64 = p
        .samples
        .indices()
        .iter()
        .map(|&a| p.dual.z().column(a).norm_squared())
        .sum();
    p.noise_level = l / m * cfg.noise_sigma * zsq.sqrt();
    Ok(())
}

struct TrialRow {
    m: usize,
    distinct: usize,
    trial: usize,
    seed: u64,
    rel_err: f64,
    success: bool,
    iterations: usize,
    converged: bool,
    nu: f64,
}

const PHASE_HEADER: &str = "row_type,family,n,r,m,m_distinct,trial,seed,rel_err,success,iterations,converged,mu,nu,lambda_min_h,lambda_max_h,lambda_min_hinv,lambda_max_hinv,hinv_inf_norm,success_rate";

/// Phase-transition sweep over the `(n, r, m)` grid.
pub fn run_phase_transition(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let cells = build_cells(cfg)?;
    let mut out = header_lines("phase", cfg);
    for cell in &cells {
        out.push_str(&spectrum_lines(cell.n, cell.mu, cell.dual.spectrum()));
    }
    out.push_str(PHASE_HEADER);
    out.push('\n');
    for cell in &cells {
        for &r in &cfg.r {
            let mut specs: Vec<Option<usize>> = cfg
                .m_values(cell.n, r, cell.basis.len(), cell.basis.rows(), cell.basis.cols())
                .into_iter()
                .map(Some)
                .collect();
            if cfg.full_cell {
                specs.push(None);
            }
            let truths: Vec<Truth> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| make_truth(cfg, cell, r, t))
                .collect::<Result<_>>()?;
            let jobs: Vec<(Option<usize>, usize)> = specs
                .iter()
                .flat_map(|&m| (0..cfg.trials).map(move |t| (m, t)))
                .collect();
            let rows: Vec<TrialRow> = jobs
                .par_iter()
                .map(|&(m, t)| phase_trial(cfg, cell, r, m, t, &truths[t]))
                .collect::<Result<_>>()?;
            let gs = cell.dual.spectrum();
            let spectrum_cols = [
                gs.lambda_min_h,
                gs.lambda_max_h,
                gs.lambda_min_hinv,
                gs.lambda_max_hinv,
                gs.hinv_inf_norm,
            ]
            .map(num)
            .join(",");
            for chunk in rows.chunks(cfg.trials) {
                for row in chunk {
                    let _ = writeln!(
                        out,
                        "trial,{},{},{r},{},{},{},{},{},{},{},{},{},{},{spectrum_cols},",
                        cfg.family,
                        cell.n,
                        row.m,
                        row.distinct,
                        row.trial,
                        row.seed,
                        num(row.rel_err),
                        u8::from(row.success),
                        row.iterations,
                        u8::from(row.converged),
                        num(cell.mu),
                        num(row.nu),
                    );
                }
                let rate = chunk.iter().filter(|r| r.success).count() as f64 / chunk.len() as f64;
                let mut errs: Vec<f64> = chunk.iter().map(|r| r.rel_err).collect();
                errs.sort_by(f64::total_cmp);
                let _ = writeln!(
                    out,
                    "summary,{},{},{r},{},,,,{},,,,{},,{spectrum_cols},{}",
                    cfg.family,
                    cell.n,
                    chunk[0].m,
                    num(errs[errs.len() / 2]),
                    num(cell.mu),
                    num(rate),
                );
            }
        }
    }
    Ok(out)
}

fn phase_trial(
    cfg: &ExperimentConfig,
    cell: &Cell,
    r: usize,
    m: Option<usize>,
    trial: usize,
    truth: &Truth,
) -> Result<TrialRow> {
    let len = cell.basis.len();
    // m = 0 in the seed path marks the full cell
    let seed = derive_seed(cfg.seed, &[2, cell.n as u64, r as u64, m.unwrap_or(0) as u64, trial as u64]);
    let s = match m {
        Some(m) => draw_omega(len, m, seed)?,
        None => SampleSet::from_indices((0..len).collect(), len, seed)?,
    };
    let m = s.m();
    let mut p = CompletionProblem::from_truth(&cell.basis, &cell.dual, &s, &truth.m)?.with_rank(r);
    noisy_measurements(cfg, &mut p, derive_seed(seed, &[3]))?;
    let rep = if p.noise_level > 0.0 {
        solve_noisy_with(&p, &cfg.solver, &cell.factor)?
    } else {
        solve_exact_with(&p, &cfg.solver, &cell.factor)?
    };
    let rel_err = rep.rel_err_vs_truth.unwrap_or(f64::NAN);
    Ok(TrialRow {
        m,
        distinct: rep.distinct_constraints,
        trial,
        seed,
        rel_err,
        success: rel_err <= cfg.success_tol,
        iterations: rep.iterations,
        converged: rep.converged,
        nu: truth.profile.map_or(f64::NAN, |p| p.nu),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgTrial {
    pub trial: usize,
    pub seed: u64,
    pub m: usize,
    pub m_distinct: usize,
    /// `‖X̂ − X*‖_F / ‖X*‖_F` on Gram matrices.
    pub rel_err: f64,
    /// Relative Frobenius error of the recovered squared-distance matrix.
    pub dist_rel_err: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct EdgDemo {
    pub trials: Vec<EdgTrial>,
    pub csv: String,
}

impl EdgDemo {
    pub fn success_rate(&self, tol: f64) -> f64 {
        self.trials.iter().filter(|t| t.rel_err <= tol).count() as f64 / self.trials.len() as f64
    }
}

/// End-to-end EDG run: centered points in `ℝʳ`, squared distances of `m`
/// random pairs, Gram recovery. Uses `cfg.trials`, `cfg.seed` and the
/// solver settings; `m` is absolute.
pub fn run_edg_demo(n: usize, r: usize, m: usize, cfg: &ExperimentConfig) -> Result<EdgDemo> {
    if n < r + 1 {
        return Err(Error::InvalidInput(format!("need n >= r + 1, got n={n}, r={r}")));
    }
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    let basis = make_edg_basis(n)?;
    let dual = dual_with_config(cfg, &basis)?;
    let factor = SpanFactor::new(&basis);
    let trials: Vec<EdgTrial> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| edg_trial(n, r, m, t, cfg, &basis, &dual, &factor))
        .collect::<Result<_>>()?;

    let mut csv = header_lines("edg", cfg);
    let _ = writeln!(csv, "# demo_n={n} demo_r={r} demo_m={m}");
    csv.push_str(&spectrum_lines(n, 1.0, dual.spectrum()));
    csv.push_str("row_type,n,r,m,m_distinct,trial,seed,rel_err,dist_rel_err,success,iterations,converged,success_rate\n");
    for t in &trials {
        let _ = writeln!(
            csv,
            "trial,{n},{r},{},{},{},{},{},{},{},{},{},",
            t.m,
            t.m_distinct,
            t.trial,
            t.seed,
            num(t.rel_err),
            num(t.dist_rel_err),
            u8::from(t.rel_err <= cfg.success_tol),
            t.iterations,
            u8::from(t.converged),
        );
    }
    let demo = EdgDemo { trials, csv };
    let rate = demo.success_rate(cfg.success_tol);
    let mut csv = demo.csv;
    let _ = writeln!(csv, "summary,{n},{r},{m},,,,,,,,,{}", num(rate));
    Ok(EdgDemo {
        trials: demo.trials,
        csv,
    })
}

#[allow(clippy::too_many_arguments)]
fn edg_trial(
    n: usize,
    r: usize,
    m: usize,
    trial: usize,
    cfg: &ExperimentConfig,
    basis: &BasisSet,
    dual: &DualBasisData,
    factor: &SpanFactor,
) -> Result<EdgTrial> {
    let truth_seed = derive_seed(cfg.seed, &[4, n as u64, r as u64, trial as u64]);
    let points = crate::planted::centered_points(n, r, truth_seed)?;
    let gram = crate::planted::gram_of_points(&points);
    let dist = distances_from_gram(&gram);
    let seed = derive_seed(cfg.seed, &[5, n as u64, r as u64, m as u64, trial as u64]);
    let s = draw_omega(basis.len(), m, seed)?;
    // <X, w_ab> = (X_aa + X_bb − 2 X_ab) / 2 = D_ab / 2
    let pairs = crate::basis::edg_pairs(n);
    let b: Vec<f64> = s.indices().iter().map(|&a| 0.5 * dist[pairs[a]]).collect();
    let mut p = CompletionProblem::new(basis, dual, &s, b)?
        .with_truth(gram)
        .with_rank(r);
    noisy_measurements(cfg, &mut p, derive_seed(seed, &[3]))?;
    let rep = if p.noise_level > 0.0 {
        solve_noisy_with(&p, &cfg.solver, factor)?
    } else {
        solve_exact_with(&p, &cfg.solver, factor)?
    };
    let dist_hat = distances_from_gram(&rep.x_hat);
    Ok(EdgTrial {
        trial,
        seed,
        m,
        m_distinct: rep.distinct_constraints,
        rel_err: rep.rel_err_vs_truth.unwrap_or(f64::NAN),
        dist_rel_err: (&dist_hat - &dist).norm() / dist.norm(),
        iterations: rep.iterations,
        converged: rep.converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditTrial {
    pub n: usize,
    pub r: usize,
    pub trial: usize,
    pub seed: u64,
    pub nu: f64,
    pub batch_sizes: Vec<usize>,
    pub q_norms: Vec<f64>,
    pub eta_trace: Vec<f64>,
    pub cond1_lhs: f64,
    pub cond1_rhs: f64,
    pub cond2_lhs: f64,
    pub min_eig: f64,
    pub half_lambda_min_h: f64,
    pub cond1: bool,
    pub cond2: bool,
    pub min_eig_ok: bool,
    pub recursion_gap: f64,
    /// Analytic total failure probability for this trial's sizes.
    pub p_total: f64,
}

impl AuditTrial {
    pub fn certificate(&self) -> bool {
        self.cond1 && self.cond2
    }

    pub fn verdict(&self) -> bool {
        self.certificate() && self.min_eig_ok
    }
}

#[derive(Debug, Clone)]
pub struct Audit {
    pub trials: Vec<AuditTrial>,
    pub csv: String,
}

/// Golfing certificate audit over the `(n, r)` grid.
pub fn run_certificate_audit(cfg: &ExperimentConfig) -> Result<Audit> {
    cfg.validate()?;
    if !(cfg.beta > 1.0) {
        return Err(Error::InvalidConfidence(cfg.beta));
    }
    let cells = build_cells(cfg)?;
    let mut csv = header_lines("audit", cfg);
    for cell in &cells {
        csv.push_str(&spectrum_lines(cell.n, cell.mu, cell.dual.spectrum()));
    }
    csv.push_str("row_type,n,r,trial,seed,nu,l,batch_sizes,q_norms,eta_trace,cond1_lhs,cond1_rhs,cond2_lhs,min_eig,half_lambda_min_h,cond1,cond2,min_eig_ok,verdict,recursion_gap,p_total,failure_rate,failure_slack\n");
    let mut all = Vec::new();
    for cell in &cells {
        for &r in &cfg.r {
            let trials: Vec<AuditTrial> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| audit_trial(cfg, cell, r, t))
                .collect::<Result<_>>()?;
            let semi = |xs: &[f64]| xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";");
            for t in &trials {
                let sizes = t.batch_sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
                let _ = writeln!(
                    csv,
                    "trial,{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},,",
                    t.n,
                    t.r,
                    t.trial,
                    t.seed,
                    num(t.nu),
                    t.batch_sizes.len(),
                    sizes,
                    semi(&t.q_norms),
                    semi(&t.eta_trace),
                    num(t.cond1_lhs),
                    num(t.cond1_rhs),
                    num(t.cond2_lhs),
                    num(t.min_eig),
                    num(t.half_lambda_min_h),
                    u8::from(t.cond1),
                    u8::from(t.cond2),
                    u8::from(t.min_eig_ok),
                    u8::from(t.verdict()),
                    num(t.recursion_gap),
                    num(t.p_total),
                );
            }
            let k = trials.len() as f64;
            let failures = trials.iter().filter(|t| !t.verdict()).count() as f64;
            let mut ps: Vec<f64> = trials.iter().map(|t| t.p_total.min(1.0)).collect();
            ps.sort_by(f64::total_cmp);
            let p = ps[ps.len() / 2];
            let slack = p + 3.0 * (p * (1.0 - p) / k).sqrt();
            let _ = writeln!(
                csv,
                "summary,{},{r},,,,,,,,,,,,,,,,,,{},{},{}",
                cell.n,
                num(p),
                num(failures / k),
                num(slack),
            );
            all.extend(trials);
        }
    }
    Ok(Audit { trials: all, csv })
}

fn audit_trial(cfg: &ExperimentConfig, cell: &Cell, r: usize, trial: usize) -> Result<AuditTrial> {
    let truth = make_truth(cfg, cell, r, trial)?;
    let nu = truth.profile.map_or(f64::NAN, |p| p.nu);
    let len = cell.basis.len();
    let seed = derive_seed(cfg.seed, &[6, cell.n as u64, r as u64, trial as u64]);
    let spectrum = cell.dual.spectrum();
    let (counts, p_total) = match cfg.batch_mode {
        BatchMode::Theorem => {
            let tc = theorem_constants(cfg, cell.n, r, nu, cell.mu, len, spectrum)?;
            let sizes = vec![tc.m_i as usize; tc.l];
            (draw_batch_counts(len, &sizes, seed)?, tc.probabilities.total)
        }
        BatchMode::Fixed => {
            let sizes = vec![cfg.batch_size; cfg.batches];
            (draw_batch_counts(len, &sizes, seed)?, f64::NAN)
        }
        BatchMode::Full => {
            let idx: Vec<usize> = (0..cfg.batches).flat_map(|_| 0..len).collect();
            let s = SampleSet::from_indices(idx, len, seed)?;
            let s = crate::sampling::partition_omega(&s, cfg.batches, Some(&equal_sizes(cfg.batches * len, cfg.batches)))?;
            (s.batch_counts(), f64::NAN)
        }
    };
    let rep = golfing_build_counts(&truth.m, &cell.basis, &cell.dual, &counts)?;
    let (min_eig, half) = rep.min_eig.unwrap_or((f64::NAN, 0.5 * spectrum.lambda_min_h));
    Ok(AuditTrial {
        n: cell.n,
        r,
        trial,
        seed,
        nu,
        batch_sizes: counts.batch_sizes(),
        q_norms: rep.q_norms.clone(),
        eta_trace: rep.eta_trace.clone(),
        cond1_lhs: rep.cond1_lhs,
        cond1_rhs: rep.cond1_rhs,
        cond2_lhs: rep.cond2_lhs,
        min_eig,
        half_lambda_min_h: half,
        cond1: rep.verdict.cond1,
        cond2: rep.verdict.cond2,
        min_eig_ok: rep.verdict.min_eig.unwrap_or(false),
        recursion_gap: rep.recursion_gap,
        p_total,
    })
}

fn theorem_constants(
    cfg: &ExperimentConfig,
    n: usize,
    r: usize,
    nu: f64,
    mu: f64,
    basis_len: usize,
    spectrum: &GramSpectrum,
) -> Result<TheoremConstants> {
    sample_bound(
        &BoundInputs {
            n,
            r,
            nu,
            mu,
            basis_len,
            beta: cfg.beta,
            c_definition: cfg.c_definition,
        },
        spectrum,
    )
}

fn kv_block(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

/// `μ`, the Gram spectrum and the coherence profile of a planted rank-`r`
/// truth, for the first `n` and `r` in the grids.
pub fn diagnose(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let (n, r) = (cfg.n[0], cfg.r[0]);
    let basis = build_basis(cfg, n)?;
    let dual = dual_with_config(cfg, &basis)?;
    let corr = correlation_parameter(&basis);
    let seed = derive_seed(cfg.seed, &[1, n as u64, r as u64, 0]);
    let truth = planted_truth(&basis, dual.h_inv(), r, seed)?;
    let prof = coherence_profile(&truth, &basis, &dual)?;
    let mut pairs: Vec<(&str, String)> = vec![
        ("family", cfg.family.to_string()),
        ("n", n.to_string()),
        ("r", r.to_string()),
        ("L", basis.len().to_string()),
        ("mu", num(corr.mu)),
        ("lambda_max_wtw", num(corr.lambda_max_wtw)),
        ("lambda_max_wwt", num(corr.lambda_max_wwt)),
        ("correlation_bound_holds", corr.bound_holds.to_string()),
    ];
    pairs.extend(dual.spectrum().pairs().iter().map(|&(k, v)| (k, num(v))));
    pairs.extend([
        ("nu_w", num(prof.nu_w)),
        ("nu_z", num(prof.nu_z)),
        ("nu_joint", num(prof.nu_joint)),
        ("nu", num(prof.nu)),
        ("simplified_w_slack", num(prof.simplified_w.slack())),
        ("simplified_z_slack", num(prof.simplified_z.slack())),
        ("simplified_joint_slack", num(prof.simplified_joint.slack())),
    ]);
    Ok(kv_block(&pairs))
}

/// Sample bound and failure probabilities for the first `n`, `r` of the
/// grids, with `ν` taken from a planted truth.
pub fn bound_report(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let (n, r) = (cfg.n[0], cfg.r[0]);
    let basis = build_basis(cfg, n)?;
    let dual = dual_with_config(cfg, &basis)?;
    let mu = correlation_parameter(&basis).mu;
    let seed = derive_seed(cfg.seed, &[1, n as u64, r as u64, 0]);
    let truth = planted_truth(&basis, dual.h_inv(), r, seed)?;
    let nu = coherence_profile(&truth, &basis, &dual)?.nu;
    let tc = theorem_constants(cfg, n, r, nu, mu, basis.len(), dual.spectrum())?;
    let mut pairs: Vec<(&str, String)> = vec![("family", cfg.family.to_string())];
    pairs.extend(tc.pairs().into_iter().map(|(k, v)| (k, num(v))));
    let p = &tc.probabilities;
    pairs.push(("m_batches", tc.m_batches().to_string()));
    pairs.push(("p1", num(p.p1)));
    pairs.push(("p2", num(p.p2[0])));
    pairs.push(("p3", num(p.p3[0])));
    pairs.push(("p4", num(p.p4[0])));
    let target = (4.0 * tc.l as f64).recip() * (n as f64).powf(-cfg.beta);
    pairs.push(("per_term_target", num(target)));
    Ok(kv_block(&pairs))
}

/// Parses `key=value` lines (as written by [`diagnose`]) into a map.
pub fn parse_kv(text: &str) -> HashMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}
