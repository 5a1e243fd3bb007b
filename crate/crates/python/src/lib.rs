//! Python bindings: problems, the two neural models and the optimizer
//! driver. Bit strings cross the boundary as `"0101"` strings or lists of
//! bools; results come back as strings.

use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use nneda::models::{DaModel, NadeModel};
use nneda::optimizers::{run as run_optimizer, OptimizerConfig};
use nneda::problems::{
    CnfFormula, Hiff, Knapsack, KnapsackInstance, MaxSat, OneMax, Problem, RoyalRoad,
    RoyalRoadSpec, RrLinkSpec, RrLinkages,
};
use nneda::{Error, Genotype, RngStream};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(format!("{}: {e}", e.kind())),
    }
}

#[derive(FromPyObject)]
enum Bits {
    Str(String),
    List(Vec<bool>),
}

impl Bits {
    fn genotype(self) -> PyResult<Genotype> {
        match self {
            Bits::Str(s) => Genotype::from_bitstring(&s).map_err(py_err),
            Bits::List(v) => Ok(Genotype::new(v)),
        }
    }
}

/// A benchmark objective.
#[pyclass(name = "Problem", module = "nneda_py", frozen)]
struct PyProblem {
    inner: Arc<dyn Problem>,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn onemax(length: usize) -> Self {
        Self {
            inner: Arc::new(OneMax::new(length)),
        }
    }

    #[staticmethod]
    fn hiff(length: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(Hiff::new(length).map_err(py_err)?),
        })
    }

    #[staticmethod]
    fn royal_road(length: usize, block: usize) -> PyResult<Self> {
        let spec = RoyalRoadSpec::new(length, block).map_err(py_err)?;
        Ok(Self {
            inner: Arc::new(RoyalRoad::new(spec)),
        })
    }

    #[staticmethod]
    fn rr_linkages(k: usize, n: usize) -> PyResult<Self> {
        let spec = RrLinkSpec::new(k, n).map_err(py_err)?;
        Ok(Self {
            inner: Arc::new(RrLinkages::new(spec)),
        })
    }

    /// MaxSat over a DIMACS CNF file.
    #[staticmethod]
    fn maxsat(path: &str) -> PyResult<Self> {
        let formula = CnfFormula::from_path(path).map_err(py_err)?;
        Ok(Self {
            inner: Arc::new(MaxSat::new(formula, path)),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, optimum=None))]
    fn knapsack(path: &str, optimum: Option<i64>) -> PyResult<Self> {
        let mut inst = KnapsackInstance::from_path(path).map_err(py_err)?;
        if optimum.is_some() {
            inst = inst.with_optimum(optimum);
        }
        Ok(Self {
            inner: Arc::new(Knapsack::new(inst, path)),
        })
    }

    fn evaluate(&self, bits: Bits) -> PyResult<f64> {
        self.inner.evaluate(bits.genotype()?.bits()).map_err(py_err)
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn optimum(&self) -> Option<f64> {
        self.inner.optimum()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name()
    }

    fn __repr__(&self) -> String {
        format!("Problem({})", self.inner.name())
    }
}

fn batch(py_batch: Vec<Bits>) -> PyResult<Vec<Vec<bool>>> {
    py_batch
        .into_iter()
        .map(|b| b.genotype().map(Genotype::into_bits))
        .collect()
}

/// Denoising autoencoder density model.
#[pyclass(name = "DaModel", module = "nneda_py")]
struct PyDaModel {
    model: DaModel,
    rng: RngStream,
}

#[pymethods]
impl PyDaModel {
    #[new]
    #[pyo3(signature = (dim, hidden, corruption=0.1, learning_rate=0.1, seed=0))]
    fn new(dim: usize, hidden: usize, corruption: f64, learning_rate: f64, seed: u64) -> Self {
        let root = RngStream::new(seed);
        let model = DaModel::new(
            dim,
            hidden,
            corruption,
            learning_rate,
            &mut root.substream("init"),
        );
        Self {
            model,
            rng: root.substream("model"),
        }
    }

    /// One SGD step on a minibatch; returns the mean per-bit cross-entropy.
    fn train(&mut self, batch_bits: Vec<Bits>) -> PyResult<f64> {
        let b = batch(batch_bits)?;
        self.model
            .train_minibatch(&b, &mut self.rng)
            .map_err(py_err)
    }

    /// Output probabilities for a clean input.
    fn reconstruct(&self, bits: Bits) -> PyResult<Vec<f64>> {
        self.model
            .forward_bits(bits.genotype()?.bits())
            .map_err(py_err)
    }

    fn sample(&mut self, bits: Bits) -> PyResult<String> {
        let g = self
            .model
            .sample(bits.genotype()?.bits(), &mut self.rng)
            .map_err(py_err)?;
        Ok(g.to_bitstring())
    }

    #[getter]
    fn num_parameters(&self) -> usize {
        self.model.num_parameters()
    }
}

/// Neural autoregressive distribution estimator.
#[pyclass(name = "NadeModel", module = "nneda_py")]
struct PyNadeModel {
    model: NadeModel,
    rng: RngStream,
}

#[pymethods]
impl PyNadeModel {
    #[new]
    #[pyo3(signature = (dim, hidden, learning_rate=0.1, seed=0))]
    fn new(dim: usize, hidden: usize, learning_rate: f64, seed: u64) -> Self {
        let root = RngStream::new(seed);
        let model = NadeModel::new(dim, hidden, learning_rate, &mut root.substream("init"));
        Self {
            model,
            rng: root.substream("model"),
        }
    }

    /// One SGD step; returns the mean negative log-likelihood before it.
    fn train(&mut self, batch_bits: Vec<Bits>) -> PyResult<f64> {
        let b = batch(batch_bits)?;
        self.model.train_minibatch(&b).map_err(py_err)
    }

    fn log_likelihood(&self, bits: Bits) -> PyResult<f64> {
        self.model
            .log_likelihood(bits.genotype()?.bits())
            .map_err(py_err)
    }

    /// Ancestral sample; `clamp` maps locus index to a fixed bit.
    #[pyo3(signature = (clamp=None))]
    fn sample(
        &mut self,
        clamp: Option<std::collections::HashMap<usize, bool>>,
    ) -> PyResult<String> {
        let c = clamp
            .map(|m| {
                let mut c = vec![None; self.model.dim];
                for (i, v) in m {
                    *c.get_mut(i).ok_or_else(|| {
                        PyValueError::new_err(format!("clamp index {i} out of range"))
                    })? = Some(v);
                }
                Ok::<_, PyErr>(c)
            })
            .transpose()?;
        let g = self
            .model
            .sample(&mut self.rng, c.as_deref())
            .map_err(py_err)?;
        Ok(g.to_bitstring())
    }

    /// Probability of every string; entry n has bit i equal to bit i of n.
    fn exact_distribution(&self) -> PyResult<Vec<f64>> {
        self.model.exact_distribution().map_err(py_err)
    }

    #[getter]
    fn num_parameters(&self) -> usize {
        self.model.num_parameters()
    }
}

fn to_toml(value: &Bound<'_, PyAny>) -> PyResult<toml::Value> {
    if let Ok(b) = value.extract::<bool>() {
        Ok(toml::Value::Boolean(b))
    } else if let Ok(i) = value.extract::<i64>() {
        Ok(toml::Value::Integer(i))
    } else if let Ok(f) = value.extract::<f64>() {
        Ok(toml::Value::Float(f))
    } else if let Ok(s) = value.extract::<String>() {
        Ok(toml::Value::String(s))
    } else if let Ok(list) = value.downcast::<PyList>() {
        list.iter()
            .map(|v| to_toml(&v))
            .collect::<PyResult<Vec<_>>>()
            .map(toml::Value::Array)
    } else {
        Err(PyValueError::new_err(format!(
            "unsupported config value {value}"
        )))
    }
}

/// Runs one optimizer. Keyword arguments are optimizer config fields.
/// Returns a dict with the best genotype, its fitness, success, the
/// evaluations used and the best-so-far history.
#[pyfunction]
#[pyo3(signature = (problem, algorithm="nade", seed=0, **config))]
fn run<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    algorithm: &str,
    seed: u64,
    config: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut table = toml::Table::new();
    table.insert("algorithm".into(), toml::Value::String(algorithm.into()));
    if let Some(c) = config {
        for (k, v) in c.iter() {
            table.insert(k.extract::<String>()?, to_toml(&v)?);
        }
    }
    let cfg: OptimizerConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| PyValueError::new_err(format!("config: {e}")))?;
    let inner = problem.inner.clone();
    let record = py
        .detach(|| run_optimizer(&cfg, inner.as_ref(), seed))
        .map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("best", record.best.to_bitstring())?;
    out.set_item("best_fitness", record.best_fitness())?;
    out.set_item("success", record.success)?;
    out.set_item("evals_used", record.evals_used)?;
    out.set_item("evals_to_optimum", record.evals_to_optimum)?;
    let history: Vec<(usize, usize, f64)> = record
        .history
        .iter()
        .map(|s| (s.generation, s.evals, s.best_fitness))
        .collect();
    out.set_item("history", history)?;
    Ok(out)
}

#[pyfunction]
fn hamming(a: Bits, b: Bits) -> PyResult<usize> {
    nneda::hamming_distance(&a.genotype()?, &b.genotype()?).map_err(py_err)
}

#[pymodule]
fn nneda_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyDaModel>()?;
    m.add_class::<PyNadeModel>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(hamming, m)?)?;
    Ok(())
}
