//! Python bindings. Structured results cross the boundary as JSON strings in
//! the same schemas the CLI writes.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use subsec::harness::{self, AlgorithmConfig, TrialMode};
use subsec::instance::Instance;
use subsec::io::{self, ExperimentConfig, InstanceFile, ReportFile};
use subsec::online::ArrivalOrder;
use subsec::oracle::{self, CheckMode, ValueOracle};

fn to_py(e: subsec::Error) -> PyErr {
    match e {
        subsec::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

fn parse<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("invalid {what}: {e}")))
}

/// A monotone submodular set function over `0..n`.
#[pyclass(name = "Oracle", module = "subsec_py", frozen)]
struct PyOracle {
    inner: ValueOracle,
}

#[pymethods]
impl PyOracle {
    /// Weighted coverage: item `j` covers the elements `covers[j]`.
    #[staticmethod]
    fn coverage(covers: Vec<Vec<usize>>, element_weights: Vec<f64>) -> PyResult<Self> {
        Ok(PyOracle {
            inner: ValueOracle::coverage(covers, element_weights).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn modular(weights: Vec<f64>) -> PyResult<Self> {
        Ok(PyOracle {
            inner: ValueOracle::modular(weights).map_err(to_py)?,
        })
    }

    /// Oracle from a family description in the instance-file schema.
    #[staticmethod]
    fn from_json(family: &str) -> PyResult<Self> {
        Ok(PyOracle {
            inner: ValueOracle::new(parse(family, "family")?).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn eval(&self, items: Vec<usize>) -> PyResult<f64> {
        self.inner.eval(&items).map_err(to_py)
    }

    fn marginal(&self, j: usize, items: Vec<usize>) -> PyResult<f64> {
        self.inner.marginal(j, &items).map_err(to_py)
    }

    /// Exact multilinear extension (small `n`).
    fn multilinear(&self, x: Vec<f64>) -> PyResult<f64> {
        let point = oracle::FractionalPoint::new(x).map_err(to_py)?;
        oracle::multilinear_exact(&self.inner, &point).map_err(to_py)
    }

    /// Monotonicity and submodularity reports as a JSON list.
    #[pyo3(signature = (trials=None, seed=0))]
    fn check(&self, trials: Option<usize>, seed: u64) -> PyResult<String> {
        let mode = match trials {
            None => CheckMode::Exhaustive,
            Some(trials) => CheckMode::Randomized { trials, seed },
        };
        let reports = [
            oracle::check_monotone(&self.inner, mode).map_err(to_py)?,
            oracle::check_submodular(&self.inner, mode).map_err(to_py)?,
        ];
        Ok(json(&reports))
    }

    fn __repr__(&self) -> String {
        format!("Oracle(family={:?}, n={})", self.inner.family().tag(), self.inner.n())
    }
}

/// A validated problem instance.
#[pyclass(name = "Instance", module = "subsec_py", frozen)]
struct PyInstance {
    file: InstanceFile,
    inner: Instance,
}

impl PyInstance {
    fn from_file(file: InstanceFile) -> PyResult<Self> {
        let inner = file.to_instance().map_err(to_py)?;
        Ok(PyInstance { file, inner })
    }
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Self::from_file(InstanceFile::from_json(text).map_err(to_py)?)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Self::from_file(io::load_instance_file(path).map_err(to_py)?)
    }

    /// Seeded random instance; `family` is coverage, modular, concave-sqrt or concave-cap.
    #[staticmethod]
    #[pyo3(signature = (variant, n, family="coverage", seed=0, k=2, r_size=None, edge_probability=0.5, m=5, capacity_ratio=2.0, column_sparsity=2))]
    #[allow(clippy::too_many_arguments)]
    fn generate(
        variant: &str,
        n: usize,
        family: &str,
        seed: u64,
        k: usize,
        r_size: Option<usize>,
        edge_probability: f64,
        m: usize,
        capacity_ratio: f64,
        column_sparsity: usize,
    ) -> PyResult<Self> {
        let variant = parse(&format!("{variant:?}"), "variant")?;
        let mut spec = io::GenSpec::new(variant, n, family.parse().map_err(to_py)?);
        spec.k = k;
        if let Some(r) = r_size {
            spec.r_size = r;
        }
        spec.edge_probability = edge_probability;
        spec.m = m;
        spec.capacity_ratio = capacity_ratio;
        spec.column_sparsity = column_sparsity;
        Self::from_file(io::gen_instance(&spec, seed).map_err(to_py)?)
    }

    fn to_json(&self) -> String {
        self.file.to_json()
    }

    fn save(&self, path: &str) -> PyResult<()> {
        io::save_instance_file(&self.file, path).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn variant(&self) -> String {
        self.inner.variant().to_string()
    }

    #[getter]
    fn oracle(&self) -> PyOracle {
        PyOracle {
            inner: self.inner.oracle().clone(),
        }
    }

    /// One run of the online algorithm; returns the run record as JSON.
    /// `algorithm` is a JSON algorithm config, e.g.
    /// `{"algorithm": "k-secretary", "solver": "greedy"}`.
    #[pyo3(signature = (algorithm, order=None, seed=0))]
    fn run(&self, algorithm: &str, order: Option<Vec<usize>>, seed: u64) -> PyResult<String> {
        let config: AlgorithmConfig = parse(algorithm, "algorithm config")?;
        let (random_order, run_seed) = harness::estimate::trial_inputs(self.inner.n(), seed, 0);
        let order = match order {
            Some(o) => ArrivalOrder::new(o).map_err(to_py)?,
            None => random_order,
        };
        Ok(json(&config.run(&self.inner, &order, run_seed).map_err(to_py)?))
    }

    /// Monte Carlo estimate; returns a full report as JSON.
    #[pyo3(signature = (algorithm, trials=1000, seed=0, exhaustive=false))]
    fn estimate(&self, algorithm: &str, trials: usize, seed: u64, exhaustive: bool) -> PyResult<String> {
        let config = ExperimentConfig {
            instance: self.file.clone(),
            algorithm: parse(algorithm, "algorithm config")?,
            mode: if exhaustive {
                TrialMode::Exhaustive
            } else {
                TrialMode::Sampled { trials }
            },
            master_seed: seed,
        };
        Ok(io::run_experiment(&config).map_err(to_py)?.to_json())
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(variant={:?}, n={})",
            self.inner.variant().to_string(),
            self.inner.n()
        )
    }
}

/// Re-executes a report; returns `(identical, differing_fields)`.
#[pyfunction]
fn replay(report: &str) -> PyResult<(bool, Vec<String>)> {
    let report = ReportFile::from_json(report).map_err(to_py)?;
    let outcome = io::replay(&report).map_err(to_py)?;
    Ok((outcome.identical, outcome.differences))
}

#[pyfunction]
#[pyo3(signature = (k, alpha=1.0, n=None))]
fn bound_k_secretary(k: usize, alpha: f64, n: Option<usize>) -> PyResult<String> {
    let b = harness::bound_k_secretary(k, alpha).map_err(to_py)?;
    Ok(json(&match n {
        Some(n) => b.with_n(n),
        None => b,
    }))
}

#[pyfunction]
#[pyo3(signature = (k, n=None))]
fn bound_greedy_k_secretary(k: usize, n: Option<usize>) -> PyResult<String> {
    let b = harness::bound_greedy_k_secretary(k).map_err(to_py)?;
    Ok(json(&match n {
        Some(n) => b.with_n(n),
        None => b,
    }))
}

#[pyfunction]
#[pyo3(signature = (alpha, n=None))]
fn bound_matching(alpha: f64, n: Option<usize>) -> PyResult<String> {
    let b = harness::bound_matching(alpha).map_err(to_py)?;
    Ok(json(&match n {
        Some(n) => b.with_n(n),
        None => b,
    }))
}

#[pyfunction]
#[pyo3(signature = (alpha, capacity_ratio, column_sparsity, known=false))]
fn bound_packing(alpha: f64, capacity_ratio: f64, column_sparsity: usize, known: bool) -> PyResult<String> {
    Ok(json(
        &harness::bound_packing(alpha, capacity_ratio, column_sparsity, known).map_err(to_py)?,
    ))
}

#[pymodule]
fn subsec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOracle>()?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(bound_k_secretary, m)?)?;
    m.add_function(wrap_pyfunction!(bound_greedy_k_secretary, m)?)?;
    m.add_function(wrap_pyfunction!(bound_matching, m)?)?;
    m.add_function(wrap_pyfunction!(bound_packing, m)?)?;
    Ok(())
}
