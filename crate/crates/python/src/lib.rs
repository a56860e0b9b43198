//! Python bindings: graph sampling, motif counts, the analytic oracles and the
//! verification suite.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use paretonet::graphgen::{EpsilonRule, GraphSample, ModelParams};
use paretonet::harness::{
    self, derive_substream, Cell, EnsembleSpec, Purpose, Sampler, Statistic, VerifyLevel,
    VerifyOptions,
};
use paretonet::heavytail::TailIndex;
use paretonet::motifs::{self, WedgeConvention};
use paretonet::oracles::{self, MixedPoissonLaw, MomentMode};
use paretonet::{specfun, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::Parse(_) | Error::Pole(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for paretonet::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn tail(alpha: f64) -> PyResult<TailIndex> {
    TailIndex::new(alpha).py()
}

fn params(
    n: usize,
    alpha: f64,
    eps: Option<f64>,
    k_critical: Option<f64>,
) -> PyResult<ModelParams> {
    let rule = match (eps, k_critical) {
        (Some(_), Some(_)) => {
            return Err(PyValueError::new_err(
                "give either eps or k_critical, not both",
            ))
        }
        (Some(epsilon), None) => EpsilonRule::Explicit { epsilon },
        (None, Some(k)) => EpsilonRule::Critical { k },
        (None, None) => EpsilonRule::Critical { k: 1.0 },
    };
    ModelParams::new(n, tail(alpha)?, rule).py()
}

fn sampler(name: &str) -> PyResult<Sampler> {
    match name {
        "fast" => Ok(Sampler::Fast),
        "naive" => Ok(Sampler::Naive),
        other => Err(PyValueError::new_err(format!("unknown sampler {other:?}"))),
    }
}

fn mode(name: &str) -> PyResult<MomentMode> {
    match name {
        "exact_factorized" => Ok(MomentMode::ExactFactorized),
        "asymptotic" => Ok(MomentMode::Asymptotic),
        "exact" => Ok(MomentMode::Exact),
        other => Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    }
}

/// An immutable sampled graph.
#[pyclass(frozen, name = "Graph")]
struct PyGraph {
    inner: GraphSample,
}

#[pymethods]
impl PyGraph {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.params().epsilon()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.params().alpha.get()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn neighbors(&self, i: usize) -> PyResult<Vec<u32>> {
        if i >= self.inner.n() {
            return Err(PyIndexError::new_err(format!("node {i} out of range")));
        }
        Ok(self.inner.neighbors(i).to_vec())
    }

    fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.inner.n() && j < self.inner.n() && self.inner.has_edge(i, j)
    }

    fn isolated_count(&self) -> usize {
        motifs::isolated_count(&self.inner)
    }

    #[pyo3(signature = (convention = "definition"))]
    fn wedge_counts(&self, convention: &str) -> PyResult<Vec<u64>> {
        let conv = match convention {
            "definition" => WedgeConvention::Definition,
            "theorem" => WedgeConvention::Theorem,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown convention {other:?}"
                )))
            }
        };
        Ok(motifs::wedge_counts(&self.inner, conv))
    }

    /// `(per-node counts of triangles containing each node, total triangles)`.
    fn triangle_counts(&self) -> (Vec<u64>, u64) {
        let t = motifs::triangle_counts(&self.inner);
        (t.containing, t.total)
    }

    fn write_edge_list(&self, path: &str) -> PyResult<()> {
        harness::write_atomic(std::path::Path::new(path), |w| {
            self.inner.write_edge_list(w)
        })
        .py()
    }

    #[staticmethod]
    fn read_edge_list(path: &str) -> PyResult<Self> {
        let file = std::fs::File::open(path).map_err(|e| py_err(e.into()))?;
        let inner = GraphSample::read_edge_list(std::io::BufReader::new(file)).py()?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(n={}, edges={}, alpha={}, epsilon={:e})",
            self.inner.n(),
            self.inner.edge_count(),
            self.alpha(),
            self.epsilon()
        )
    }
}

#[pyfunction]
fn sample_weights(n: usize, alpha: f64, seed: u64) -> PyResult<Vec<f64>> {
    Ok(paretonet::heavytail::sample_weights(n, tail(alpha)?, seed)
        .py()?
        .values()
        .to_vec())
}

/// One replica of the ensemble, seeded exactly as `run_ensemble` seeds it.
#[pyfunction]
#[pyo3(signature = (n, alpha, seed = 0, eps = None, k_critical = None, replica = 0, sampler = "fast"))]
fn generate(
    n: usize,
    alpha: f64,
    seed: u64,
    eps: Option<f64>,
    k_critical: Option<f64>,
    replica: u64,
    sampler: &str,
) -> PyResult<PyGraph> {
    let mut spec = EnsembleSpec::new(params(n, alpha, eps, k_critical)?, 1, seed);
    spec.sampler = self::sampler(sampler)?;
    let (_, graph) = spec.realize(replica).py()?;
    Ok(PyGraph { inner: graph })
}

/// Runs an ensemble and returns its table as `{column: [values]}`.
#[pyfunction]
#[pyo3(signature = (n, alpha, replicas, seed = 0, statistics = vec!["degree".to_string()], eps = None, k_critical = None, sampler = "fast", threads = None))]
#[allow(clippy::too_many_arguments)]
fn run_ensemble(
    n: usize,
    alpha: f64,
    replicas: usize,
    seed: u64,
    statistics: Vec<String>,
    eps: Option<f64>,
    k_critical: Option<f64>,
    sampler: &str,
    threads: Option<usize>,
) -> PyResult<BTreeMap<String, Vec<f64>>> {
    let stats = statistics
        .iter()
        .map(|s| Statistic::parse(s))
        .collect::<paretonet::Result<Vec<_>>>()
        .py()?;
    let mut spec = EnsembleSpec::new(params(n, alpha, eps, k_critical)?, replicas, seed)
        .with_statistics(&stats);
    spec.sampler = self::sampler(sampler)?;
    spec.threads = threads;
    let table = harness::run_ensemble(&spec).py()?;
    // Every ensemble column is numeric or boolean; booleans come back as 0/1.
    let mut out = BTreeMap::new();
    for (i, c) in table.columns.iter().enumerate() {
        let values = table
            .rows
            .iter()
            .map(|row| match &row[i] {
                Cell::Bool(b) => f64::from(u8::from(*b)),
                cell => cell.as_f64().unwrap_or(f64::NAN),
            })
            .collect();
        out.insert(c.name.clone(), values);
    }
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (master, replica, purpose = "graph"))]
fn substream_seed(master: u64, replica: u64, purpose: &str) -> PyResult<u64> {
    let p = match purpose {
        "weights" => Purpose::Weights,
        "graph" => Purpose::Graph,
        "grid_point" => Purpose::GridPoint,
        other => return Err(PyValueError::new_err(format!("unknown purpose {other:?}"))),
    };
    Ok(derive_substream(master, replica, p))
}

#[pyfunction]
fn hill_estimator(sample: Vec<f64>, k: usize) -> PyResult<f64> {
    motifs::hill_estimator(&sample, k).py()
}

#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    specfun::gamma(x).py()
}

#[pyfunction]
fn upper_incomplete_gamma(s: f64, x: f64) -> PyResult<f64> {
    specfun::upper_incomplete_gamma(s, x).py()
}

#[pyfunction]
fn exp_integral_e1(x: f64) -> PyResult<f64> {
    specfun::exp_integral_e1(x).py()
}

#[pyfunction]
fn expected_degree_exact(n: usize, epsilon: f64, alpha: f64) -> PyResult<f64> {
    oracles::expected_degree_exact(n, epsilon, tail(alpha)?).py()
}

#[pyfunction]
fn expected_degree_asymptotic(n: usize, epsilon: f64, alpha: f64) -> PyResult<f64> {
    oracles::expected_degree_asymptotic(n, epsilon, tail(alpha)?).py()
}

#[pyfunction]
fn mixed_poisson_pmf(k: u64, alpha: f64) -> PyResult<f64> {
    MixedPoissonLaw::new(tail(alpha)?).py()?.pmf(k).py()
}

/// `P(D > k)` for the limiting degree.
#[pyfunction]
fn mixed_poisson_ccdf(k: u64, alpha: f64) -> PyResult<f64> {
    MixedPoissonLaw::new(tail(alpha)?).py()?.ccdf(k).py()
}

#[pyfunction]
fn mixed_poisson_pgf(t: f64, alpha: f64) -> PyResult<f64> {
    MixedPoissonLaw::new(tail(alpha)?).py()?.pgf(t).py()
}

/// `(joint, product of marginals)` of the limiting joint degree PGF.
#[pyfunction]
fn joint_pgf_limit(t: f64, s: f64, alpha: f64) -> PyResult<(f64, f64)> {
    let j = oracles::joint_pgf_limit(t, s, tail(alpha)?).py()?;
    Ok((j.joint, j.product))
}

#[pyfunction]
fn joint_pgf_gap_bound(eta: f64, gamma_: f64, alpha: f64) -> PyResult<f64> {
    oracles::joint_pgf_gap_bound(eta, gamma_, tail(alpha)?).py()
}

#[pyfunction]
#[pyo3(signature = (n, epsilon, alpha, mode = "exact_factorized"))]
fn expected_wedges(n: usize, epsilon: f64, alpha: f64, mode: &str) -> PyResult<f64> {
    oracles::expected_wedges(n, epsilon, tail(alpha)?, self::mode(mode)?).py()
}

#[pyfunction]
#[pyo3(signature = (n, epsilon, alpha, mode = "exact_factorized"))]
fn expected_triangles(n: usize, epsilon: f64, alpha: f64, mode: &str) -> PyResult<f64> {
    oracles::expected_triangles(n, epsilon, tail(alpha)?, self::mode(mode)?).py()
}

#[pyfunction]
fn triangle_limit_constant(alpha: f64) -> PyResult<f64> {
    oracles::triangle_limit_constant(tail(alpha)?).py()
}

#[pyfunction]
fn dust_expectation(n: usize, epsilon: f64, alpha: f64) -> PyResult<f64> {
    oracles::dust_expectation(n, epsilon, tail(alpha)?).py()
}

/// `(k1, k2)` critical-scale constants of the isolated-node transition.
#[pyfunction]
fn dust_thresholds(alpha: f64) -> PyResult<(f64, f64)> {
    let t = oracles::dust_thresholds(tail(alpha)?).py()?;
    Ok((t.k1, t.k2))
}

/// Runs the acceptance suite and returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (level = "fast", only = vec![]))]
fn verify(py: Python<'_>, level: &str, only: Vec<u32>) -> PyResult<String> {
    let level = match level {
        "fast" => VerifyLevel::Fast,
        "full" => VerifyLevel::Full,
        other => return Err(PyValueError::new_err(format!("unknown level {other:?}"))),
    };
    let opts = VerifyOptions {
        level,
        threads: None,
        only,
    };
    let report = py.detach(|| harness::verify(&opts)).py()?;
    report.to_json().py()
}

#[pymodule]
fn paretonet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", paretonet::VERSION)?;
    m.add("REPORT_SCHEMA", harness::REPORT_SCHEMA)?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(sample_weights, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(run_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(substream_seed, m)?)?;
    m.add_function(wrap_pyfunction!(hill_estimator, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(upper_incomplete_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(exp_integral_e1, m)?)?;
    m.add_function(wrap_pyfunction!(expected_degree_exact, m)?)?;
    m.add_function(wrap_pyfunction!(expected_degree_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_poisson_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_poisson_ccdf, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_poisson_pgf, m)?)?;
    m.add_function(wrap_pyfunction!(joint_pgf_limit, m)?)?;
    m.add_function(wrap_pyfunction!(joint_pgf_gap_bound, m)?)?;
    m.add_function(wrap_pyfunction!(expected_wedges, m)?)?;
    m.add_function(wrap_pyfunction!(expected_triangles, m)?)?;
    m.add_function(wrap_pyfunction!(triangle_limit_constant, m)?)?;
    m.add_function(wrap_pyfunction!(dust_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(dust_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
