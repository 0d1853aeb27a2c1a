//! Python bindings. Sizes map to counts as plain dicts; experiment reports
//! come back as JSON strings.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use supergraph::config::{PowerLawScheme, SizeConfiguration as CoreConfig};
use supergraph::graph;
use supergraph::montecarlo::{self, ExperimentKind, ExperimentPlan};
use supergraph::sampler::{self, ModelParams, Regime, SuperGraph as CoreGraph};
use supergraph::theory::{self, ConnectivityRegime};
use supergraph::Seed;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Multiset of super-vertex sizes.
#[pyclass(module = "supergraph", frozen)]
struct SizeConfiguration {
    inner: CoreConfig,
}

#[pymethods]
impl SizeConfiguration {
    /// Build from a `{size: count}` dict.
    #[new]
    fn new(counts: BTreeMap<u64, u64>) -> PyResult<Self> {
        CoreConfig::new(counts)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CoreConfig::from_json(text)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    /// Parse the `1x1000,2x500` shorthand.
    #[staticmethod]
    fn from_inline(text: &str) -> PyResult<Self> {
        CoreConfig::from_inline(text)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    /// `scheme` is "density" or "tail-matched".
    #[staticmethod]
    #[pyo3(signature = (n_super, alpha, max_size, scheme = "density"))]
    fn power_law(n_super: u64, alpha: f64, max_size: u64, scheme: &str) -> PyResult<Self> {
        let scheme: PowerLawScheme = scheme.parse().map_err(value_error)?;
        CoreConfig::power_law_with(n_super, alpha, max_size, scheme)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    fn counts(&self) -> BTreeMap<u64, u64> {
        self.inner.counts().clone()
    }

    #[getter]
    fn n_super(&self) -> u64 {
        self.inner.n_super()
    }

    #[getter]
    fn n_vertices(&self) -> u64 {
        self.inner.n_vertices()
    }

    #[getter]
    fn max_size(&self) -> u64 {
        self.inner.max_size()
    }

    /// `(mu, u, s2)` of the empirical size profile.
    fn profile(&self) -> (BTreeMap<u64, f64>, f64, f64) {
        let p = self.inner.empirical_profile();
        (p.mu, p.u, p.s2)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_inline(&self) -> String {
        self.inner.to_inline()
    }

    fn __repr__(&self) -> String {
        format!("SizeConfiguration('{}')", self.inner.to_inline())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// A sampled super-graph.
#[pyclass(module = "supergraph", frozen)]
struct SuperGraph {
    inner: CoreGraph,
}

#[pymethods]
impl SuperGraph {
    #[new]
    fn new(sizes: Vec<u64>, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        CoreGraph::new(sizes, edges)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    #[staticmethod]
    fn from_edge_list(text: &str) -> PyResult<Self> {
        CoreGraph::from_edge_list(text)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    fn to_edge_list(&self) -> String {
        self.inner.to_edge_list()
    }

    #[getter]
    fn sizes(&self) -> Vec<u64> {
        self.inner.sizes().to_vec()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    #[getter]
    fn n_super(&self) -> usize {
        self.inner.n_super()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    /// Component sizes, largest first.
    fn component_sizes(&self) -> Vec<usize> {
        graph::connected_components(&self.inner).sizes_desc
    }

    fn is_connected(&self) -> bool {
        graph::is_connected(&self.inner)
    }

    fn isolated_count(&self) -> usize {
        graph::isolated_count(&self.inner)
    }

    fn degree_histogram(&self) -> BTreeMap<usize, u64> {
        graph::degree_histogram(&self.inner)
    }

    fn largest_component_fraction(&self) -> f64 {
        graph::largest_component_fraction(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "SuperGraph(n_super={}, edges={})",
            self.inner.n_super(),
            self.inner.edge_count()
        )
    }
}

fn params(config: &CoreConfig, regime: &str, c: f64) -> PyResult<ModelParams> {
    let regime: Regime = regime.parse().map_err(value_error)?;
    ModelParams::resolve(regime, c, config).map_err(value_error)
}

/// `1 - (1-p)^(i j)`.
#[pyfunction]
fn edge_probability(i: u64, j: u64, p: f64) -> f64 {
    sampler::edge_probability(i, j, p)
}

#[pyfunction]
fn resolve_p(config: &SizeConfiguration, regime: &str, c: f64) -> PyResult<f64> {
    Ok(params(&config.inner, regime, c)?.p)
}

#[pyfunction]
#[pyo3(signature = (config, regime, c, seed))]
fn sample_direct(
    config: &SizeConfiguration,
    regime: &str,
    c: f64,
    seed: u64,
) -> PyResult<SuperGraph> {
    let params = params(&config.inner, regime, c)?;
    Ok(SuperGraph {
        inner: sampler::sample_direct(&config.inner, &params, Seed(seed)),
    })
}

#[pyfunction]
#[pyo3(signature = (config, regime, c, seed))]
fn sample_constructive(
    config: &SizeConfiguration,
    regime: &str,
    c: f64,
    seed: u64,
) -> PyResult<SuperGraph> {
    let params = params(&config.inner, regime, c)?;
    Ok(SuperGraph {
        inner: sampler::sample_constructive(&config.inner, &params, Seed(seed)),
    })
}

#[pyfunction]
fn expected_isolated(config: &SizeConfiguration, p: f64) -> PyResult<f64> {
    theory::expected_isolated(&config.inner, p).map_err(value_error)
}

#[pyfunction]
fn variance_isolated(config: &SizeConfiguration, p: f64) -> PyResult<f64> {
    theory::variance_isolated(&config.inner, p).map_err(value_error)
}

/// Limiting connection probability for `p = (ln N + c)/N` at fixed `c`.
#[pyfunction]
fn limit_connectivity_probability(c: f64, u: f64) -> PyResult<f64> {
    theory::limit_connectivity_probability(ConnectivityRegime::FixedC(c), u).map_err(value_error)
}

#[pyfunction]
fn critical_threshold(config: &SizeConfiguration) -> f64 {
    theory::critical_threshold(&config.inner.empirical_profile())
}

/// `(rho, rho_by_size)` for the sparse regime `p = c/n`.
#[pyfunction]
#[pyo3(signature = (config, c, tol = theory::DEFAULT_TOLERANCE, max_iter = theory::DEFAULT_MAX_ITER))]
fn solve_giant_fraction(
    config: &SizeConfiguration,
    c: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<(f64, BTreeMap<u64, f64>)> {
    let sol = theory::solve_giant_fraction(&config.inner.empirical_profile(), c, tol, max_iter)
        .map_err(value_error)?;
    Ok((sol.rho, sol.rho_by_size))
}

#[pyfunction]
fn mixed_poisson_pmf(config: &SizeConfiguration, c: f64, k: u64) -> f64 {
    theory::mixed_poisson_pmf(&config.inner.empirical_profile(), c, k)
}

#[pyfunction]
fn mixed_poisson_tail(config: &SizeConfiguration, c: f64, k: u64) -> f64 {
    theory::mixed_poisson_tail(&config.inner.empirical_profile(), c, k)
}

#[pyfunction]
fn degree_pmf(config: &SizeConfiguration, c: f64, k_max: u64) -> Vec<f64> {
    theory::degree_pmf(&config.inner.empirical_profile(), c, k_max)
}

#[pyfunction]
fn total_variation(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    montecarlo::total_variation(&a, &b).map_err(value_error)
}

/// Runs `experiment` ("connectivity", "giant" or "degree") and returns the
/// report as JSON. The GIL is released while trials run.
#[pyfunction]
#[pyo3(signature = (experiment, config, regime, c, trials, seed, threads = None))]
#[allow(clippy::too_many_arguments)]
fn run_experiment(
    py: Python<'_>,
    experiment: &str,
    config: &SizeConfiguration,
    regime: &str,
    c: f64,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> PyResult<String> {
    let plan = ExperimentPlan {
        config: config.inner.clone(),
        regime: regime.parse().map_err(value_error)?,
        c,
        trials,
        seed: Seed(seed),
        experiment: experiment.parse::<ExperimentKind>().map_err(value_error)?,
    };
    let report = py
        .detach(|| montecarlo::run_experiment(&plan, threads))
        .map_err(value_error)?;
    serde_json::to_string(&report).map_err(value_error)
}

#[pymodule]
#[pyo3(name = "supergraph")]
fn supergraph_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SizeConfiguration>()?;
    m.add_class::<SuperGraph>()?;
    m.add_function(wrap_pyfunction!(edge_probability, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_p, m)?)?;
    m.add_function(wrap_pyfunction!(sample_direct, m)?)?;
    m.add_function(wrap_pyfunction!(sample_constructive, m)?)?;
    m.add_function(wrap_pyfunction!(expected_isolated, m)?)?;
    m.add_function(wrap_pyfunction!(variance_isolated, m)?)?;
    m.add_function(wrap_pyfunction!(limit_connectivity_probability, m)?)?;
    m.add_function(wrap_pyfunction!(critical_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(solve_giant_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_poisson_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(mixed_poisson_tail, m)?)?;
    m.add_function(wrap_pyfunction!(degree_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(total_variation, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
