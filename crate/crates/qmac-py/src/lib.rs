//! Python bindings: density operators, channels, capacity regions, and the
//! packing simulation, exposed through a thin wrapper layer. Reports that
//! are JSON documents on the Rust side come back as JSON strings here.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qmac::capacity::{self, OptimizerConfig};
use qmac::channels;
use qmac::codesim;
use qmac::entropy;
use qmac::qmath;

fn to_py_err(e: qmac::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_to_nested(m: &qmath::CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn nested_to_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<qmath::CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    if nrows == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("matrix rows must be equal length"));
    }
    Ok(qmath::CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Density operator with a declared subsystem factorization.
#[pyclass(name = "DensityOperator", from_py_object)]
#[derive(Clone)]
struct PyDensityOperator {
    inner: qmath::DensityOperator,
}

#[pymethods]
impl PyDensityOperator {
    /// Validate a matrix (given as nested lists of complex numbers) as a
    /// density operator.
    #[new]
    #[pyo3(signature = (matrix, subsystem_dims=None))]
    fn new(matrix: Vec<Vec<Complex64>>, subsystem_dims: Option<Vec<usize>>) -> PyResult<Self> {
        let m = nested_to_matrix(matrix)?;
        let dims = subsystem_dims.unwrap_or_else(|| vec![m.nrows()]);
        Ok(Self {
            inner: qmath::DensityOperator::new(m, dims).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn maximally_mixed(dim: usize) -> Self {
        Self {
            inner: qmath::DensityOperator::maximally_mixed(dim),
        }
    }

    #[staticmethod]
    fn from_probabilities(probs: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: qmath::DensityOperator::from_probabilities(&probs).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn subsystem_dims(&self) -> Vec<usize> {
        self.inner.subsystem_dims().to_vec()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        matrix_to_nested(self.inner.matrix())
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    /// Von Neumann entropy in bits.
    fn entropy(&self) -> f64 {
        entropy::von_neumann_entropy(&self.inner)
    }

    fn tensor(&self, other: &PyDensityOperator) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.tensor(&other.inner).map_err(to_py_err)?,
        })
    }

    fn partial_trace(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.partial_trace(&keep).map_err(to_py_err)?,
        })
    }

    fn with_subsystems(&self, dims: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.clone().with_subsystems(dims).map_err(to_py_err)?,
        })
    }

    fn trace_distance(&self, other: &PyDensityOperator) -> PyResult<f64> {
        qmath::trace_distance(&self.inner, &other.inner).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityOperator(dim={}, subsystems={:?})",
            self.inner.dim(),
            self.inner.subsystem_dims()
        )
    }
}

/// CPTP map as a Kraus list.
#[pyclass(name = "QuantumChannel", from_py_object)]
#[derive(Clone)]
struct PyQuantumChannel {
    inner: channels::QuantumChannel,
}

#[pymethods]
impl PyQuantumChannel {
    #[new]
    fn new(kraus: Vec<Vec<Vec<Complex64>>>) -> PyResult<Self> {
        let ops = kraus
            .into_iter()
            .map(nested_to_matrix)
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: channels::QuantumChannel::new(ops).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn identity(dim: usize) -> Self {
        Self {
            inner: channels::QuantumChannel::identity(dim),
        }
    }

    #[staticmethod]
    fn phase_flip(dim: usize, probs: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: channels::make_collective_phase_flip(dim, &probs).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn dephasing(dim: usize) -> Self {
        Self {
            inner: channels::make_completely_dephasing(dim),
        }
    }

    #[staticmethod]
    fn depolarizing(dim: usize) -> Self {
        Self {
            inner: channels::make_completely_depolarizing(dim),
        }
    }

    #[getter]
    fn dim_in(&self) -> usize {
        self.inner.dim_in()
    }

    #[getter]
    fn dim_out(&self) -> usize {
        self.inner.dim_out()
    }

    fn kraus(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.inner.kraus().iter().map(matrix_to_nested).collect()
    }

    fn apply(&self, rho: &PyDensityOperator) -> PyResult<PyDensityOperator> {
        Ok(PyDensityOperator {
            inner: self.inner.apply(&rho.inner).map_err(to_py_err)?,
        })
    }

    fn tensor_power(&self, n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: channels::tensor_power_channel(&self.inner, n).map_err(to_py_err)?,
        })
    }

    fn complementary(&self) -> Self {
        Self {
            inner: channels::complementary_channel(&self.inner),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "QuantumChannel(dim_in={}, dim_out={}, kraus={})",
            self.inner.dim_in(),
            self.inner.dim_out(),
            self.inner.kraus().len()
        )
    }
}

/// Rate pentagon `(r1, r2, rsum)` with its vertex list.
#[pyclass(name = "RegionPentagon", from_py_object)]
#[derive(Clone)]
struct PyRegionPentagon {
    inner: capacity::RegionPentagon,
}

#[pymethods]
impl PyRegionPentagon {
    #[getter]
    fn r1(&self) -> f64 {
        self.inner.r1
    }

    #[getter]
    fn r2(&self) -> f64 {
        self.inner.r2
    }

    #[getter]
    fn rsum(&self) -> f64 {
        self.inner.rsum
    }

    #[getter]
    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices.clone()
    }

    fn contains(&self, rate1: f64, rate2: f64) -> bool {
        self.inner.contains(rate1, rate2, 1e-9)
    }

    fn __repr__(&self) -> String {
        format!(
            "RegionPentagon(r1={:.6}, r2={:.6}, rsum={:.6})",
            self.inner.r1, self.inner.r2, self.inner.rsum
        )
    }
}

/// Pentagon of a two-sender channel at fixed product inputs.
#[pyfunction]
fn region_for_inputs(
    channel: &PyQuantumChannel,
    rho1: &PyDensityOperator,
    rho2: &PyDensityOperator,
) -> PyResult<PyRegionPentagon> {
    Ok(PyRegionPentagon {
        inner: capacity::region_for_inputs(&channel.inner, &rho1.inner, &rho2.inner)
            .map_err(to_py_err)?,
    })
}

/// Closed-form region of the collective phase-flip channel.
#[pyfunction]
fn phase_flip_region_closed_form(dim: usize, probs: Vec<f64>) -> PyResult<PyRegionPentagon> {
    Ok(PyRegionPentagon {
        inner: capacity::phase_flip_region_closed_form(dim, &probs).map_err(to_py_err)?,
    })
}

/// Entanglement-assisted capacity of a single-sender channel; returns
/// `(value, converged)`.
#[pyfunction]
#[pyo3(signature = (channel, starts=8, seed=0))]
fn ea_capacity_single(channel: &PyQuantumChannel, starts: usize, seed: u64) -> PyResult<(f64, bool)> {
    let cfg = OptimizerConfig {
        starts,
        seed,
        ..OptimizerConfig::default()
    };
    let res = capacity::ea_capacity_single(&channel.inner, &cfg).map_err(to_py_err)?;
    Ok((res.value, res.converged))
}

/// Max sum rate over product inputs; returns `(value, converged)`.
#[pyfunction]
#[pyo3(signature = (channel, d1, d2, starts=8, seed=0))]
fn sum_rate_bound(
    channel: &PyQuantumChannel,
    d1: usize,
    d2: usize,
    starts: usize,
    seed: u64,
) -> PyResult<(f64, bool)> {
    let cfg = OptimizerConfig {
        starts,
        seed,
        ..OptimizerConfig::default()
    };
    let res = capacity::sum_rate_bound(&channel.inner, (d1, d2), &cfg).map_err(to_py_err)?;
    Ok((res.value, res.converged))
}

/// Successive-decoding corner rates `(I(A;C), I(B;C|A))`.
#[pyfunction]
fn successive_decode_rates(
    channel: &PyQuantumChannel,
    rho1: &PyDensityOperator,
    rho2: &PyDensityOperator,
) -> PyResult<(f64, f64)> {
    let dec = codesim::successive_decode_rates(&channel.inner, &rho1.inner, &rho2.inner)
        .map_err(to_py_err)?;
    Ok(dec.rates)
}

/// Von Neumann entropy in bits.
#[pyfunction]
fn von_neumann_entropy(rho: &PyDensityOperator) -> f64 {
    entropy::von_neumann_entropy(&rho.inner)
}

/// Run the packing-lemma simulation; returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (channel, rho, n, rate, gamma=0.01, delta=0.25, trials=5, seed=0))]
#[allow(clippy::too_many_arguments)]
fn simulate_packing(
    channel: &PyQuantumChannel,
    rho: &PyDensityOperator,
    n: usize,
    rate: f64,
    gamma: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> PyResult<String> {
    let cfg = codesim::PackingConfig {
        n,
        rate,
        n_codewords: None,
        gamma,
        delta,
        trials,
        seed,
    };
    let report = codesim::simulate_packing(&channel.inner, &rho.inner, &cfg).map_err(to_py_err)?;
    serde_json::to_string_pretty(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Randomized check of the entropy lemmas; returns the report as a JSON
/// string.
#[pyfunction]
#[pyo3(signature = (trials=200, max_dim=4, seed=0))]
fn verify_entropy_lemmas(trials: usize, max_dim: usize, seed: u64) -> PyResult<String> {
    let report = entropy::verify_entropy_lemmas(trials, max_dim, seed);
    serde_json::to_string_pretty(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn qmac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityOperator>()?;
    m.add_class::<PyQuantumChannel>()?;
    m.add_class::<PyRegionPentagon>()?;
    m.add_function(wrap_pyfunction!(region_for_inputs, m)?)?;
    m.add_function(wrap_pyfunction!(phase_flip_region_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(ea_capacity_single, m)?)?;
    m.add_function(wrap_pyfunction!(sum_rate_bound, m)?)?;
    m.add_function(wrap_pyfunction!(successive_decode_rates, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_packing, m)?)?;
    m.add_function(wrap_pyfunction!(verify_entropy_lemmas, m)?)?;
    Ok(())
}
