//! Python bindings. Matrices cross the boundary as lists of rows.

use gencomp_core::basis::{self, BasisSet};
use gencomp_core::diagnostics::{self, BoundInputs, CDefinition};
use gencomp_core::dual::{biorthogonality_residual, dual_set, DualBasisData};
use gencomp_core::sampling::{self, SampleSet};
use gencomp_core::{certificate, planted, solver, Error};
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[pyclass(name = "Basis", frozen)]
struct PyBasis(BasisSet);

#[pymethods]
impl PyBasis {
    #[staticmethod]
    fn entry(n: usize) -> PyResult<Self> {
        basis::make_entry_basis(n).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn edg(n: usize) -> PyResult<Self> {
        basis::make_edg_basis(n).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn hankel(n1: usize, n2: usize) -> PyResult<Self> {
        basis::make_hankel_basis(n1, n2).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn rank_one(vectors: Vec<Vec<f64>>) -> PyResult<Self> {
        let vs: Vec<DVector<f64>> = vectors.into_iter().map(DVector::from_vec).collect();
        basis::make_rank_one_basis(&vs).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn weighted(weights: Vec<f64>, base: &PyBasis) -> PyResult<Self> {
        basis::make_weighted_basis(&weights, &base.0).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        basis::read_basis(text).map(Self).map_err(py_err)
    }

    fn to_text(&self) -> String {
        basis::write_basis(&self.0)
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.0.family().as_str()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.rows(), self.0.cols())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn element(&self, alpha: usize) -> PyResult<Vec<Vec<f64>>> {
        if alpha >= self.0.len() {
            return Err(PyValueError::new_err(format!("index {alpha} out of range")));
        }
        Ok(from_matrix(&self.0.element(alpha)))
    }

    fn coefficients(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let c = self.0.coefficients(&to_matrix(x)?).map_err(py_err)?;
        Ok(c.iter().copied().collect())
    }
}

#[pyclass(name = "Dual", frozen)]
struct PyDual(DualBasisData);

#[pymethods]
impl PyDual {
    #[new]
    fn new(basis: &PyBasis) -> PyResult<Self> {
        dual_set(&basis.0).map(Self).map_err(py_err)
    }

    fn element(&self, alpha: usize) -> PyResult<Vec<Vec<f64>>> {
        if alpha >= self.0.len() {
            return Err(PyValueError::new_err(format!("index {alpha} out of range")));
        }
        Ok(from_matrix(&self.0.dual_element(alpha)))
    }

    fn gram(&self) -> Vec<Vec<f64>> {
        from_matrix(self.0.h())
    }

    fn gram_inverse(&self) -> Vec<Vec<f64>> {
        from_matrix(self.0.h_inv())
    }

    fn spectrum<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in self.0.spectrum().pairs() {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn biorthogonality_residual(&self) -> f64 {
        biorthogonality_residual(&self.0)
    }
}

#[pyfunction]
fn correlation<'py>(py: Python<'py>, basis: &PyBasis) -> PyResult<Bound<'py, PyDict>> {
    let c = diagnostics::correlation_parameter(&basis.0);
    let d = PyDict::new(py);
    d.set_item("mu", c.mu)?;
    d.set_item("lambda_max_wtw", c.lambda_max_wtw)?;
    d.set_item("lambda_max_wwt", c.lambda_max_wwt)?;
    d.set_item("bound_holds", c.bound_holds)?;
    Ok(d)
}

#[pyfunction]
fn coherence<'py>(
    py: Python<'py>,
    m: Vec<Vec<f64>>,
    basis: &PyBasis,
    dual: &PyDual,
) -> PyResult<Bound<'py, PyDict>> {
    let p = diagnostics::coherence_profile(&to_matrix(m)?, &basis.0, &dual.0).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("nu_w", p.nu_w)?;
    d.set_item("nu_z", p.nu_z)?;
    d.set_item("nu_joint", p.nu_joint)?;
    d.set_item("nu", p.nu)?;
    Ok(d)
}

#[pyfunction]
fn planted_truth(basis: &PyBasis, dual: &PyDual, r: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    planted::planted_truth(&basis.0, dual.0.h_inv(), r, seed)
        .map(|m| from_matrix(&m))
        .map_err(py_err)
}

/// `m` indices drawn uniformly with replacement from `0..basis_len`.
#[pyfunction]
fn draw_omega(basis_len: usize, m: usize, seed: u64) -> PyResult<Vec<usize>> {
    sampling::draw_omega(basis_len, m, seed)
        .map(|s| s.indices().to_vec())
        .map_err(py_err)
}

#[pyfunction]
fn sampling_apply(dual: &PyDual, omega: Vec<usize>, x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    sampling::sampling_apply(&dual.0, &omega, &to_matrix(x)?)
        .map(|m| from_matrix(&m))
        .map_err(py_err)
}

#[pyfunction]
fn sampling_adjoint_apply(dual: &PyDual, omega: Vec<usize>, x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    sampling::sampling_adjoint_apply(&dual.0, &omega, &to_matrix(x)?)
        .map(|m| from_matrix(&m))
        .map_err(py_err)
}

/// Nuclear-norm recovery from `measurements[k] = <M, w_{omega[k]}>`.
#[pyfunction]
#[pyo3(signature = (basis, dual, omega, measurements, noise_level=0.0, truth=None, max_iter=5000, feas_tol=1e-8))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    basis: &PyBasis,
    dual: &PyDual,
    omega: Vec<usize>,
    measurements: Vec<f64>,
    noise_level: f64,
    truth: Option<Vec<Vec<f64>>>,
    max_iter: usize,
    feas_tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = SampleSet::from_indices(omega, basis.0.len(), 0).map_err(py_err)?;
    let mut p = solver::CompletionProblem::new(&basis.0, &dual.0, &s, measurements)
        .map_err(py_err)?
        .with_noise(noise_level);
    if let Some(t) = truth {
        p = p.with_truth(to_matrix(t)?);
    }
    let cfg = solver::SolverConfig {
        max_iter,
        feas_tol,
        ..solver::SolverConfig::default()
    };
    let rep = py
        .detach(|| {
            if noise_level > 0.0 {
                solver::solve_noisy(&p, &cfg)
            } else {
                solver::solve_exact(&p, &cfg)
            }
        })
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("x_hat", from_matrix(&rep.x_hat))?;
    d.set_item("rel_err", rep.rel_err_vs_truth)?;
    d.set_item("constraint_residual", rep.constraint_residual)?;
    d.set_item("objective", rep.objective)?;
    d.set_item("iterations", rep.iterations)?;
    d.set_item("converged", rep.converged)?;
    d.set_item("undersampled", rep.undersampled)?;
    Ok(d)
}

/// Sample bound and failure probabilities.
#[pyfunction]
#[pyo3(signature = (dual, n, r, nu, mu, beta=1.5, statement_c=false))]
#[allow(clippy::too_many_arguments)]
fn sample_bound<'py>(
    py: Python<'py>,
    dual: &PyDual,
    n: usize,
    r: usize,
    nu: f64,
    mu: f64,
    beta: f64,
    statement_c: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let inputs = BoundInputs {
        n,
        r,
        nu,
        mu,
        basis_len: dual.0.len(),
        beta,
        c_definition: if statement_c { CDefinition::Statement } else { CDefinition::Proof },
    };
    let tc = diagnostics::sample_bound(&inputs, dual.0.spectrum()).map_err(py_err)?;
    let d = PyDict::new(py);
    for (k, v) in tc.pairs() {
        d.set_item(k, v)?;
    }
    let p = &tc.probabilities;
    d.set_item("p1", p.p1)?;
    d.set_item("p2", p.p2.clone())?;
    d.set_item("p3", p.p3.clone())?;
    d.set_item("p4", p.p4.clone())?;
    Ok(d)
}

/// Golfing construction for `m` with batches drawn at the given sizes.
#[pyfunction]
fn golfing<'py>(
    py: Python<'py>,
    m: Vec<Vec<f64>>,
    basis: &PyBasis,
    dual: &PyDual,
    batch_sizes: Vec<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let m = to_matrix(m)?;
    let rep = py
        .detach(|| {
            let counts = sampling::draw_batch_counts(basis.0.len(), &batch_sizes, seed)?;
            certificate::golfing_build_counts(&m, &basis.0, &dual.0, &counts)
        })
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("y", from_matrix(&rep.y))?;
    d.set_item("q_norms", rep.q_norms.clone())?;
    d.set_item("cond1", rep.verdict.cond1)?;
    d.set_item("cond2", rep.verdict.cond2)?;
    d.set_item("min_eig", rep.min_eig.map(|(v, _)| v))?;
    d.set_item("certificate", rep.verdict.certificate())?;
    Ok(d)
}

#[pymodule]
fn gencomp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBasis>()?;
    m.add_class::<PyDual>()?;
    m.add_function(wrap_pyfunction!(correlation, m)?)?;
    m.add_function(wrap_pyfunction!(coherence, m)?)?;
    m.add_function(wrap_pyfunction!(planted_truth, m)?)?;
    m.add_function(wrap_pyfunction!(draw_omega, m)?)?;
    m.add_function(wrap_pyfunction!(sampling_apply, m)?)?;
    m.add_function(wrap_pyfunction!(sampling_adjoint_apply, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(sample_bound, m)?)?;
    m.add_function(wrap_pyfunction!(golfing, m)?)?;
    Ok(())
}
