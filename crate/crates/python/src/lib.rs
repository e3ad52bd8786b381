//! Python bindings. Pairs are passed as `PositivePair` objects or
//! `(past, present)` tuples, λ as a float; library errors surface as
//! `ChangekitError`, a subclass of `ValueError`.

use changekit::approximation::{self, TaylorOrder};
use changekit::axioms::{self, SampleConfig, Target, VerifiedCheck};
use changekit::calibration::{self, CalibrationInput};
use changekit::elasticity::{self, EconFunction};
use changekit::indicator::{self, Lambda};
use changekit::report::{self, Format, IndicatorKind, OutputFormat};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(changekit_py, ChangekitError, PyValueError);

fn py_err(e: changekit::Error) -> PyErr {
    ChangekitError::new_err(format!("[{}] {e}", e.code()))
}

fn lambda(value: f64) -> PyResult<Lambda> {
    Lambda::new(value).map_err(py_err)
}

#[pyclass(name = "PositivePair", frozen, eq, from_py_object)]
#[derive(Clone, Copy, PartialEq)]
pub struct PyPositivePair(pub indicator::PositivePair);

#[pymethods]
impl PyPositivePair {
    #[new]
    fn new(x: f64, y: f64) -> PyResult<Self> {
        indicator::PositivePair::new(x, y).map(Self).map_err(py_err)
    }

    #[getter]
    fn x(&self) -> f64 {
        self.0.x()
    }

    #[getter]
    fn y(&self) -> f64 {
        self.0.y()
    }

    fn reversed(&self) -> Self {
        Self(self.0.reversed())
    }

    fn scaled(&self, c: f64) -> PyResult<Self> {
        self.0.scaled(c).map(Self).map_err(py_err)
    }

    fn is_stagnant(&self) -> bool {
        self.0.is_stagnant()
    }

    fn __repr__(&self) -> String {
        format!("PositivePair(x={}, y={})", self.0.x(), self.0.y())
    }
}

/// A pair argument: a `PositivePair` or a `(past, present)` tuple.
#[derive(FromPyObject)]
pub enum PairArg {
    Pair(PyPositivePair),
    Tuple((f64, f64)),
}

impl PairArg {
    pub fn get(&self) -> PyResult<indicator::PositivePair> {
        match *self {
            PairArg::Pair(p) => Ok(p.0),
            PairArg::Tuple((x, y)) => indicator::PositivePair::new(x, y).map_err(py_err),
        }
    }
}

#[pyfunction]
fn abs_change(p: PairArg) -> PyResult<f64> {
    Ok(indicator::abs_change(p.get()?))
}

#[pyfunction]
fn rel_change(p: PairArg) -> PyResult<f64> {
    Ok(indicator::rel_change(p.get()?))
}

#[pyfunction]
fn log_ratio(p: PairArg) -> PyResult<f64> {
    Ok(indicator::log_ratio(p.get()?))
}

/// `f_λ(x, y) = (y − x) / x^λ`
#[pyfunction]
fn eval_f(lam: f64, p: PairArg) -> PyResult<f64> {
    Ok(indicator::eval_f(lambda(lam)?, p.get()?))
}

/// `F_λ(x, y) = (y^{1−λ} − x^{1−λ}) / (1 − λ)`, `ln(y/x)` at λ = 1.
#[pyfunction]
#[pyo3(name = "eval_F")]
fn eval_big_f(lam: f64, p: PairArg) -> PyResult<f64> {
    Ok(indicator::eval_big_f(lambda(lam)?, p.get()?))
}

#[pyfunction]
fn cobb_douglas_f(lam: f64, p: PairArg) -> PyResult<f64> {
    indicator::cobb_douglas_f(lambda(lam)?, p.get()?).map_err(py_err)
}

#[pyfunction]
fn quantity_indicator(lam: f64, x: f64, y: f64) -> PyResult<f64> {
    indicator::quantity_indicator(lambda(lam)?, x, y).map_err(py_err)
}

#[pyfunction]
fn relative_comparison(lam: f64, reference: PairArg, comparison: PairArg) -> PyResult<f64> {
    indicator::relative_comparison(lambda(lam)?, reference.get()?, comparison.get()?)
        .map_err(py_err)
}

#[pyfunction]
fn calibrate_lambda(reference: PairArg, comparison: PairArg) -> PyResult<f64> {
    let input = CalibrationInput::new(reference.get()?, comparison.get()?).map_err(py_err)?;
    calibration::calibrate_lambda(&input)
        .map(Lambda::value)
        .map_err(py_err)
}

#[pyfunction]
fn doubling_example(lam: f64) -> PyResult<(f64, f64)> {
    Ok(calibration::doubling_example(lambda(lam)?))
}

#[pyfunction]
fn symmetric_scaling_residual(lam: f64, p: PairArg, c: f64) -> PyResult<f64> {
    calibration::symmetric_scaling_residual(lambda(lam)?, p.get()?, c).map_err(py_err)
}

#[pyfunction]
fn mrs_cobb_douglas(lam: f64, p: PairArg) -> PyResult<f64> {
    calibration::mrs_cobb_douglas(lambda(lam)?, p.get()?).map_err(py_err)
}

#[pyfunction]
fn taylor_coefficient(lam: f64, k: u32, x: f64) -> PyResult<f64> {
    approximation::taylor_coefficient(lambda(lam)?, k, x).map_err(py_err)
}

/// Taylor polynomial of `F_λ` around `x`, truncated after order `n`.
#[pyfunction]
#[pyo3(name = "taylor_F")]
fn taylor_big_f(lam: f64, p: PairArg, n: u32) -> PyResult<f64> {
    let order = TaylorOrder::new(n).map_err(py_err)?;
    Ok(approximation::taylor_big_f(lambda(lam)?, p.get()?, order))
}

#[pyfunction]
fn remainder_bound(lam: f64, p: PairArg) -> PyResult<f64> {
    approximation::remainder_bound(lambda(lam)?, p.get()?).map_err(py_err)
}

#[pyfunction]
fn box_cox(lam: f64, y: f64) -> PyResult<f64> {
    approximation::box_cox(lambda(lam)?, y).map_err(py_err)
}

/// CSV of `F_λ(1, y)` columns; defaults to λ ∈ {0, 0.2, 0.5, 1} on 500 points
/// of [0.01, 5].
#[pyfunction]
#[pyo3(signature = (lambdas=None, ys=None))]
fn curve_table_csv(lambdas: Option<Vec<f64>>, ys: Option<Vec<f64>>) -> PyResult<String> {
    let lambdas = match lambdas {
        Some(v) => v.into_iter().map(lambda).collect::<PyResult<Vec<_>>>()?,
        None => approximation::default_curve_lambdas(),
    };
    let ys = ys.unwrap_or_else(approximation::default_curve_grid);
    Ok(approximation::curve_table(&lambdas, &ys)
        .map_err(py_err)?
        .to_csv())
}

#[pyclass(name = "IndicatorReport", frozen, get_all)]
pub struct PyIndicatorReport {
    label: String,
    past: f64,
    present: f64,
    abs: f64,
    rel: f64,
    f: f64,
    #[pyo3(name = "F")]
    big_f: f64,
    rank: usize,
}

#[pymethods]
impl PyIndicatorReport {
    fn __repr__(&self) -> String {
        format!(
            "IndicatorReport(label={:?}, f={}, F={}, rank={})",
            self.label, self.f, self.big_f, self.rank
        )
    }
}

impl From<report::IndicatorReport> for PyIndicatorReport {
    fn from(r: report::IndicatorReport) -> Self {
        PyIndicatorReport {
            label: r.label,
            past: r.past,
            present: r.present,
            abs: r.abs,
            rel: r.rel,
            f: r.f,
            big_f: r.big_f,
            rank: r.rank,
        }
    }
}

fn ranked(
    csv: &str,
    lam: f64,
    indicator: &str,
) -> PyResult<(Vec<report::IndicatorReport>, Lambda, IndicatorKind)> {
    let lam = lambda(lam)?;
    let kind: IndicatorKind = indicator.parse().map_err(py_err)?;
    let ds = report::parse_csv(csv.as_bytes()).map_err(py_err)?;
    Ok((report::rank(&ds, lam, kind), lam, kind))
}

/// Ranks the observations of a `label,past,present` CSV text.
#[pyfunction]
#[pyo3(signature = (csv, lam=0.5, indicator="f"))]
fn rank(csv: &str, lam: f64, indicator: &str) -> PyResult<Vec<PyIndicatorReport>> {
    let (reports, _, _) = ranked(csv, lam, indicator)?;
    Ok(reports.into_iter().map(Into::into).collect())
}

/// Ranks a CSV text and renders it as `table`, `csv` or `json`.
#[pyfunction]
#[pyo3(signature = (csv, lam=0.5, indicator="f", format="table", precision=2, unit="u"))]
fn render_rank(
    csv: &str,
    lam: f64,
    indicator: &str,
    format: &str,
    precision: u8,
    unit: &str,
) -> PyResult<String> {
    let (reports, lam, kind) = ranked(csv, lam, indicator)?;
    let out =
        OutputFormat::new(format.parse::<Format>().map_err(py_err)?, precision).map_err(py_err)?;
    Ok(report::render(&reports, kind, lam, out, unit))
}

#[pyclass(name = "CheckReport", frozen)]
pub struct PyCheckReport(VerifiedCheck);

#[pymethods]
impl PyCheckReport {
    #[getter]
    fn property(&self) -> &str {
        &self.0.report.property
    }

    #[getter]
    fn samples(&self) -> usize {
        self.0.report.samples
    }

    #[getter]
    fn max_residual(&self) -> f64 {
        self.0.report.max_residual
    }

    #[getter]
    fn passed(&self) -> bool {
        self.0.report.pass
    }

    #[getter]
    fn expected_pass(&self) -> bool {
        self.0.expected_pass
    }

    #[getter]
    fn as_expected(&self) -> bool {
        self.0.as_expected()
    }

    #[getter]
    fn worst_case<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in self.0.report.worst_case.fields() {
            d.set_item(*k, *v)?;
        }
        Ok(d)
    }

    fn to_json(&self) -> String {
        self.0.report.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "CheckReport(property={:?}, passed={}, expected_pass={}, max_residual={:e})",
            self.0.report.property,
            self.0.report.pass,
            self.0.expected_pass,
            self.0.report.max_residual
        )
    }
}

/// Runs the property checks for `target` (`f`, `F`, `rel`, `abs`, `log`).
#[pyfunction]
#[pyo3(signature = (target, lam=0.5, seed=None, samples=10_000))]
fn verify(
    py: Python<'_>,
    target: &str,
    lam: f64,
    seed: Option<u64>,
    samples: usize,
) -> PyResult<Vec<PyCheckReport>> {
    let target: Target = target.parse().map_err(py_err)?;
    let lam = lambda(lam)?;
    let cfg = SampleConfig {
        count: samples,
        ..SampleConfig::with_seed(seed.unwrap_or(axioms::DEFAULT_SEED))
    };
    cfg.validate().map_err(py_err)?;
    let checks = py
        .detach(|| axioms::verify(target, lam, &cfg))
        .map_err(py_err)?;
    Ok(checks.into_iter().map(PyCheckReport).collect())
}

/// A differentiable function of one variable, built from a specification
/// such as `power:A=5,k=0.3`, `exp:A=1,b=2` or `affine:a=1,b=0.5`.
#[pyclass(name = "EconFunction", frozen)]
pub struct PyEconFunction(EconFunction);

#[pymethods]
impl PyEconFunction {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        spec.parse().map(Self).map_err(py_err)
    }

    #[getter]
    fn name(&self) -> &str {
        self.0.name()
    }

    fn __call__(&self, x: f64) -> PyResult<f64> {
        self.0.eval(x).map_err(py_err)
    }

    fn marginal(&self, x: f64) -> PyResult<f64> {
        elasticity::marginal(&self.0, x).map_err(py_err)
    }

    fn classical_elasticity(&self, x: f64) -> PyResult<f64> {
        elasticity::classical_elasticity(&self.0, x).map_err(py_err)
    }

    fn generalized_elasticity(&self, lam: f64, x: f64) -> PyResult<f64> {
        elasticity::generalized_elasticity(lambda(lam)?, &self.0, x).map_err(py_err)
    }

    fn elasticity_quotient(&self, lam: f64, x: f64, h: f64) -> PyResult<f64> {
        elasticity::elasticity_quotient(lambda(lam)?, &self.0, x, h).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("EconFunction({:?})", self.0.name())
    }
}

#[pymodule]
pub fn changekit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ChangekitError", m.py().get_type::<ChangekitError>())?;
    m.add_class::<PyPositivePair>()?;
    m.add_class::<PyIndicatorReport>()?;
    m.add_class::<PyCheckReport>()?;
    m.add_class::<PyEconFunction>()?;
    m.add_function(wrap_pyfunction!(abs_change, m)?)?;
    m.add_function(wrap_pyfunction!(rel_change, m)?)?;
    m.add_function(wrap_pyfunction!(log_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(eval_f, m)?)?;
    m.add_function(wrap_pyfunction!(eval_big_f, m)?)?;
    m.add_function(wrap_pyfunction!(cobb_douglas_f, m)?)?;
    m.add_function(wrap_pyfunction!(quantity_indicator, m)?)?;
    m.add_function(wrap_pyfunction!(relative_comparison, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(doubling_example, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_scaling_residual, m)?)?;
    m.add_function(wrap_pyfunction!(mrs_cobb_douglas, m)?)?;
    m.add_function(wrap_pyfunction!(taylor_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(taylor_big_f, m)?)?;
    m.add_function(wrap_pyfunction!(remainder_bound, m)?)?;
    m.add_function(wrap_pyfunction!(box_cox, m)?)?;
    m.add_function(wrap_pyfunction!(curve_table_csv, m)?)?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(render_rank, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
