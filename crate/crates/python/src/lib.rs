//! Python bindings: channels, regions and the main solvers.
//!
//! Matrices cross the boundary as lists of rows.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use secnoma::baselines;
use secnoma::io;
use secnoma::multicast;
use secnoma::rates;
use secnoma::region::RateRegion;
use secnoma::search::SolverOptions;
use secnoma::split;
use secnoma::types::{ChannelPair, CovarianceTriple, EncodingOrder, Scenario, ScenarioKind};
use secnoma::waterfill as wf;
use secnoma::wiretap;
use secnoma::wsr;
use secnoma::Error;

type Rows = Vec<Vec<f64>>;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Internal(_) | Error::Bracket { .. } | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Row lists to a matrix; every row must have the same length.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, String> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err("all rows must have the same length".into());
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    matrix_from_rows(rows).map_err(PyValueError::new_err)
}

fn scenario(kind: &str, common: bool) -> PyResult<Scenario> {
    let kind: ScenarioKind = kind.parse().map_err(to_py)?;
    Ok(Scenario::new(kind, common))
}

fn order(tag: &str) -> PyResult<EncodingOrder> {
    match tag {
        "12" => Ok(EncodingOrder::OneTwo),
        "21" => Ok(EncodingOrder::TwoOne),
        other => Err(PyValueError::new_err(format!("encoding order must be \"12\" or \"21\", got {other:?}"))),
    }
}

#[pyclass(name = "ChannelPair", module = "pysecnoma", from_py_object)]
#[derive(Clone)]
pub struct PyChannelPair {
    inner: ChannelPair,
}

#[pymethods]
impl PyChannelPair {
    #[new]
    fn new(h1: Rows, h2: Rows) -> PyResult<Self> {
        let inner = ChannelPair::new(matrix(&h1)?, matrix(&h2)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Reads the plain-text channel format.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: io::load_channels(path).map_err(to_py)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        io::write_channels(path, &self.inner).map_err(to_py)
    }

    #[getter]
    fn h1(&self) -> Rows {
        matrix_to_rows(self.inner.h1())
    }

    #[getter]
    fn h2(&self) -> Rows {
        matrix_to_rows(self.inner.h2())
    }

    #[getter]
    fn nt(&self) -> usize {
        self.inner.nt()
    }

    fn __repr__(&self) -> String {
        format!("ChannelPair(h1={:?}, h2={:?})", self.h1(), self.h2())
    }
}

/// Pareto points of a rate region.
#[pyclass(name = "RateRegion", module = "pysecnoma", skip_from_py_object)]
pub struct PyRateRegion {
    inner: RateRegion,
}

#[pymethods]
impl PyRateRegion {
    /// `(r0, r1, r2, order, (alpha0, alpha1, alpha2) or None)` per point.
    #[getter]
    fn points(&self) -> Vec<(f64, f64, f64, String, Option<(f64, f64, f64)>)> {
        self.inner
            .points
            .iter()
            .map(|p| {
                let r = p.rates.clamped();
                let split = p.split.map(|s| (s.alpha0(), s.alpha1(), s.alpha2()));
                (r.r0, r.r1, r.r2, r.order.tag().to_string(), split)
            })
            .collect()
    }

    fn margin(&self, r0: f64, r1: f64, r2: f64) -> f64 {
        self.inner.margin(&secnoma::types::RateTriple::new(r0, r1, r2, EncodingOrder::NotApplicable))
    }

    #[pyo3(signature = (r0, r1, r2, tol = 1e-9))]
    fn contains(&self, r0: f64, r1: f64, r2: f64, tol: f64) -> bool {
        self.margin(r0, r1, r2) >= -tol
    }

    fn max_rate(&self, axis: usize) -> PyResult<f64> {
        if axis > 2 {
            return Err(PyValueError::new_err("axis must be 0, 1 or 2"));
        }
        Ok(self.inner.max_rate(axis))
    }

    /// The points as CSV text.
    fn to_csv(&self) -> String {
        io::format_points(&self.inner.points)
    }

    fn __len__(&self) -> usize {
        self.inner.points.len()
    }
}

/// Optimal covariance and rate of a point-to-point link.
#[pyfunction]
fn waterfill(h: Rows, p: f64) -> PyResult<(Rows, f64)> {
    let w = wf::waterfill(&matrix(&h)?, p).map_err(to_py)?;
    Ok((matrix_to_rows(&w.covariance), w.rate))
}

#[pyfunction]
#[pyo3(signature = (hm, he, p, seed = 0))]
fn solve_wiretap(hm: Rows, he: Rows, p: f64, seed: u64) -> PyResult<(Rows, f64)> {
    let (hm, he) = (matrix(&hm)?, matrix(&he)?);
    let w = wiretap::solve_wiretap(&hm, &he, p, &SolverOptions::with_seed(seed)).map_err(to_py)?;
    Ok((matrix_to_rows(&w.covariance), w.rate))
}

/// Covariance, rate and case label (`"1"`, `"2"` or `"3"`).
#[pyfunction]
#[pyo3(signature = (h1, h2, p, seed = 0))]
fn solve_multicast(h1: Rows, h2: Rows, p: f64, seed: u64) -> PyResult<(Rows, f64, String)> {
    let (h1, h2) = (matrix(&h1)?, matrix(&h2)?);
    let m = multicast::solve_multicast(&h1, &h2, p, &SolverOptions::with_seed(seed)).map_err(to_py)?;
    let case = match m.case {
        multicast::MulticastCase::Case1 => "1",
        multicast::MulticastCase::Case2 => "2",
        multicast::MulticastCase::Case3 => "3",
    };
    Ok((matrix_to_rows(&m.covariance), m.rate, case.to_string()))
}

/// Unclamped `(r0, r1, r2)` of a covariance triple.
#[pyfunction]
#[pyo3(signature = (ch, scenario_kind, q0, q1, q2, p, order_tag = "12", common = true))]
#[allow(clippy::too_many_arguments)]
fn evaluate_triple(
    ch: &PyChannelPair,
    scenario_kind: &str,
    q0: Rows,
    q1: Rows,
    q2: Rows,
    p: f64,
    order_tag: &str,
    common: bool,
) -> PyResult<(f64, f64, f64)> {
    let q = CovarianceTriple::new(matrix(&q0)?, matrix(&q1)?, matrix(&q2)?, p).map_err(to_py)?;
    let r = rates::evaluate_triple(&ch.inner, scenario(scenario_kind, common)?, &q, order(order_tag)?).map_err(to_py)?;
    Ok((r.r0, r.r1, r.r2))
}

/// Power-splitting region on the `eps1` grid.
#[pyfunction]
#[pyo3(signature = (ch, scenario_kind, common, p, eps1 = 0.05, seed = 0))]
fn sweep_region(
    py: Python<'_>,
    ch: &PyChannelPair,
    scenario_kind: &str,
    common: bool,
    p: f64,
    eps1: f64,
    seed: u64,
) -> PyResult<PyRateRegion> {
    let sc = scenario(scenario_kind, common)?;
    let ch = ch.inner.clone();
    let sweep = py
        .detach(|| split::sweep_region(&ch, sc, p, eps1, &SolverOptions::with_seed(seed)))
        .map_err(to_py)?;
    Ok(PyRateRegion { inner: sweep.region })
}

/// Weighted-sum-rate frontier without a common message.
#[pyfunction]
#[pyo3(signature = (ch, scenario_kind, p, sigma = 0.05))]
fn wsr_frontier(py: Python<'_>, ch: &PyChannelPair, scenario_kind: &str, p: f64, sigma: f64) -> PyResult<PyRateRegion> {
    let sc = scenario(scenario_kind, false)?;
    let ch = ch.inner.clone();
    let (region, _) = py.detach(|| wsr::wsr_frontier(&ch, sc, p, sigma)).map_err(to_py)?;
    Ok(PyRateRegion { inner: region })
}

#[pyfunction]
#[pyo3(signature = (ch, scenario_kind, common, p, seed = 0))]
fn tdma_point(ch: &PyChannelPair, scenario_kind: &str, common: bool, p: f64, seed: u64) -> PyResult<(f64, f64, f64)> {
    let sc = scenario(scenario_kind, common)?;
    let r = baselines::tdma_point(&ch.inner, sc, p, &SolverOptions::with_seed(seed)).map_err(to_py)?;
    Ok((r.r0, r.r1, r.r2))
}

#[pyfunction]
#[pyo3(signature = (ch, scenario_kind, p, seed = 0))]
fn oma_timeshare(ch: &PyChannelPair, scenario_kind: &str, p: f64, seed: u64) -> PyResult<PyRateRegion> {
    let sc = scenario(scenario_kind, false)?;
    let region = baselines::oma_timeshare(&ch.inner, sc, p, &SolverOptions::with_seed(seed)).map_err(to_py)?;
    Ok(PyRateRegion { inner: region })
}

/// Monte-Carlo reference region from `samples` random covariance triples.
#[pyfunction]
#[pyo3(signature = (ch, scenario_kind, common, p, samples = 10_000, seed = 0))]
fn random_search_region(
    py: Python<'_>,
    ch: &PyChannelPair,
    scenario_kind: &str,
    common: bool,
    p: f64,
    samples: usize,
    seed: u64,
) -> PyResult<PyRateRegion> {
    let sc = scenario(scenario_kind, common)?;
    let ch = ch.inner.clone();
    let region = py
        .detach(|| baselines::random_search_region(&ch, sc, p, samples, seed))
        .map_err(to_py)?;
    Ok(PyRateRegion { inner: region })
}

#[pymodule]
fn pysecnoma(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannelPair>()?;
    m.add_class::<PyRateRegion>()?;
    m.add_function(wrap_pyfunction!(waterfill, m)?)?;
    m.add_function(wrap_pyfunction!(solve_wiretap, m)?)?;
    m.add_function(wrap_pyfunction!(solve_multicast, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_triple, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_region, m)?)?;
    m.add_function(wrap_pyfunction!(wsr_frontier, m)?)?;
    m.add_function(wrap_pyfunction!(tdma_point, m)?)?;
    m.add_function(wrap_pyfunction!(oma_timeshare, m)?)?;
    m.add_function(wrap_pyfunction!(random_search_region, m)?)?;
    Ok(())
}
