//! Python module `pybisym`.
//!
//! Rational parameters (`alpha`, `beta`, `lam`, coefficients) accept `str`,
//! `int` or `float`; each is read through its decimal text, so `0.1` means
//! exactly 1/10. Exact results come back as `"num/den"` strings.

use bisym::bounds::{bound_alpha_exact, bound_beta_exact};
use bisym::classfun::{check_membership, FunctionHandle, MembershipGrid, MembershipOptions};
use bisym::derivation::{bound_consistency, solve_coefficients};
use bisym::explore::{hill_climb, sweep, ClimbStart, SampleMode};
use bisym::mfold::MFoldFunction;
use bisym::scalar::{format_rational, parse_rational, rational, rational_to_f64};
use bisym::{ClassKind, ClassSpec, TruncatedSeries};
use num_complex::Complex64;
use num_rational::BigRational;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rational(obj: &Bound<'_, PyAny>) -> PyResult<BigRational> {
    let text = obj.str()?.to_string();
    parse_rational(&text).map_err(value_error)
}

fn spec(kind: &str, m: usize, param: &Bound<'_, PyAny>, lam: Option<&Bound<'_, PyAny>>) -> PyResult<ClassSpec> {
    let kind = ClassKind::parse(kind).map_err(value_error)?;
    let lambda = match lam {
        Some(l) => to_rational(l)?,
        None => rational(1, 1),
    };
    ClassSpec::new(kind, m, to_rational(param)?, lambda).map_err(value_error)
}

/// Serializes a report through JSON into plain Python objects.
fn to_python<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Bounds on `|a_{m+1}|` and `|a_{2m+1}|`, as floats and exactly.
#[pyfunction]
#[pyo3(signature = (kind, m, param, lam=None))]
fn bounds<'py>(
    py: Python<'py>,
    kind: &str,
    m: usize,
    param: &Bound<'py, PyAny>,
    lam: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = spec(kind, m, param, lam)?;
    let exact = match s.kind {
        ClassKind::Arg => bound_alpha_exact(m, &s.param, &s.lambda),
        ClassKind::Re => bound_beta_exact(m, &s.param, &s.lambda),
    }
    .map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("a_m1", rational_to_f64(&exact.a_m1_squared).sqrt())?;
    d.set_item("a_2m1", rational_to_f64(&exact.a_2m1))?;
    d.set_item("a_m1_squared_exact", format_rational(&exact.a_m1_squared))?;
    d.set_item("a_2m1_exact", format_rational(&exact.a_2m1))?;
    Ok(d)
}

/// Inverse coefficients `b_{m+1}, b_{2m+1}, b_{3m+1}` of
/// `z + a_{m+1} z^{m+1} + a_{2m+1} z^{2m+1} + ...`.
#[pyfunction]
fn invert<'py>(py: Python<'py>, m: usize, coeffs: Vec<Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyDict>> {
    let mut a = coeffs.iter().map(to_rational).collect::<PyResult<Vec<_>>>()?;
    if a.len() < 3 {
        a.resize(3, rational(0, 1));
    }
    let f = MFoldFunction::new(m, a).map_err(value_error)?;
    let closed = f.inverse_closed_form().map_err(value_error)?;
    let reverted = f.inverse_by_reversion().map_err(value_error)?;
    let strings = |b: &bisym::InverseCoefficients<BigRational>| -> Vec<String> {
        b.as_array().iter().map(|x| format_rational(x)).collect()
    };
    let d = PyDict::new(py);
    d.set_item("closed_form", strings(&closed))?;
    d.set_item("reversion", strings(&reverted))?;
    d.set_item("agree", closed == reverted)?;
    Ok(d)
}

/// Compositional inverse of `[0, 1, c_2, c_3, ...]` in floating point.
#[pyfunction]
fn revert(coeffs: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let g = TruncatedSeries::new(coeffs).revert().map_err(value_error)?;
    Ok(g.into_coeffs())
}

/// Samples the class condition for a catalog function and its inverse.
#[pyfunction]
#[pyo3(signature = (function, kind, param, m=1, lam=None, order=30, angles=720))]
#[allow(clippy::too_many_arguments)]
fn membership<'py>(
    py: Python<'py>,
    function: &str,
    kind: &str,
    param: &Bound<'py, PyAny>,
    m: usize,
    lam: Option<&Bound<'py, PyAny>>,
    order: usize,
    angles: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let s = spec(kind, m, param, lam)?;
    let handle = FunctionHandle::Catalog { name: function.to_string(), m };
    let options = MembershipOptions { order, grid: MembershipGrid { angles, ..Default::default() } };
    let report = py.detach(|| check_membership(&handle, &s, &options)).map_err(value_error)?;
    to_python(py, &report)
}

/// Solves `a_{m+1}`, `a_{2m+1}` from the leading coefficients of a pair
/// `(p, q)`; `q_m` must equal `-p_m`.
#[pyfunction]
#[pyo3(signature = (kind, param, p_m, p_2m, q_m, q_2m, m=1, lam=None))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    kind: &str,
    param: &Bound<'py, PyAny>,
    p_m: Complex64,
    p_2m: Complex64,
    q_m: Complex64,
    q_2m: Complex64,
    m: usize,
    lam: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = spec(kind, m, param, lam)?;
    let sol = solve_coefficients(&s, p_m, p_2m, q_m, q_2m).map_err(value_error)?;
    let consistency = bound_consistency(&sol).map_err(value_error)?;
    let residuals = PyDict::new(py);
    for (name, value) in sol.residuals.magnitudes() {
        residuals.set_item(name, value)?;
    }
    let d = PyDict::new(py);
    d.set_item("a_m1", sol.a_m1)?;
    d.set_item("a_2m1", sol.a_2m1)?;
    d.set_item("residuals", residuals)?;
    d.set_item("bounds", to_python(py, &consistency)?)?;
    d.set_item("within_bounds", consistency.within_bounds())?;
    Ok(d)
}

fn sample_mode(mode: &str) -> PyResult<SampleMode> {
    match mode {
        "free" => Ok(SampleMode::Free),
        "realizable" => Ok(SampleMode::Realizable),
        other => Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    }
}

/// Ensemble maxima of `|a_{m+1}|`, `|a_{2m+1}|` for one parameter cell.
#[pyfunction]
#[pyo3(signature = (kind, param, m=1, lam=None, samples=10_000, seed=0, mode="realizable"))]
#[allow(clippy::too_many_arguments)]
fn search<'py>(
    py: Python<'py>,
    kind: &str,
    param: &Bound<'py, PyAny>,
    m: usize,
    lam: Option<&Bound<'py, PyAny>>,
    samples: usize,
    seed: u64,
    mode: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let s = spec(kind, m, param, lam)?;
    let mode = sample_mode(mode)?;
    let records = py.detach(|| sweep(std::slice::from_ref(&s), samples, seed, mode)).map_err(value_error)?;
    to_python(py, &records[0])
}

/// Hill climb on `|a_{m+1}|` over pair parameters.
#[pyfunction]
#[pyo3(signature = (kind, param, m=1, lam=None, iterations=500, seed=0, start="zero", mode="realizable"))]
#[allow(clippy::too_many_arguments)]
fn climb<'py>(
    py: Python<'py>,
    kind: &str,
    param: &Bound<'py, PyAny>,
    m: usize,
    lam: Option<&Bound<'py, PyAny>>,
    iterations: usize,
    seed: u64,
    start: &str,
    mode: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let s = spec(kind, m, param, lam)?;
    let start = match start {
        "zero" => ClimbStart::Zero,
        "extremal" => ClimbStart::Extremal,
        "random" => ClimbStart::Random,
        other => return Err(PyValueError::new_err(format!("unknown start {other:?}"))),
    };
    let mode = sample_mode(mode)?;
    let record = py.detach(|| hill_climb(&s, seed, iterations, start, mode)).map_err(value_error)?;
    to_python(py, &record)
}

/// Runs the built-in check suites; one dict per suite.
#[pyfunction]
#[pyo3(signature = (quick=true, seed=0))]
fn selftest(py: Python<'_>, quick: bool, seed: u64) -> PyResult<Bound<'_, PyList>> {
    let results = py.detach(|| bisym::cli::run_suites(seed, quick, false)).map_err(value_error)?;
    let out = PyList::empty(py);
    for r in results {
        let d = PyDict::new(py);
        d.set_item("suite", r.name)?;
        d.set_item("cases", r.cases)?;
        d.set_item("failures", r.failures)?;
        d.set_item("passed", r.passed())?;
        d.set_item("first_failure", r.first_failure)?;
        out.append(d)?;
    }
    Ok(out)
}

/// Runs the command-line interface with `args` (without the program name)
/// and returns its exit code.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> u8 {
    let argv = std::iter::once("bisym".to_string()).chain(args);
    py.detach(|| bisym::cli::run(argv))
}

#[pymodule]
pub fn pybisym(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(invert, m)?)?;
    m.add_function(wrap_pyfunction!(revert, m)?)?;
    m.add_function(wrap_pyfunction!(membership, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(climb, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
