//! Python bindings for the steerharvest core crate.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use steerharvest::analysis::{self, Axis, Measure};
use steerharvest::{harvest, oracle, specfun, Complex, Error};

fn to_py(err: Error) -> PyErr {
    let message = format!("{}: {err}", err.kind());
    if err.is_numerical() {
        PyRuntimeError::new_err(message)
    } else {
        PyValueError::new_err(message)
    }
}

/// Detector pair in units of the switching width.
#[pyclass(name = "DetectorPairParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: harvest::DetectorPairParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (omega_a, omega_b, separation, coupling = 0.1))]
    fn new(omega_a: f64, omega_b: f64, separation: f64, coupling: f64) -> PyResult<Self> {
        let inner = harvest::DetectorPairParams::new(coupling, omega_a, omega_b, separation).map_err(to_py)?;
        Ok(PyParams { inner })
    }

    /// Builds the pair from omega_a and r = (omega_b - omega_a) / omega_a.
    #[staticmethod]
    #[pyo3(signature = (omega_a, gap_ratio, separation, coupling = 0.1))]
    fn from_gap_ratio(omega_a: f64, gap_ratio: f64, separation: f64, coupling: f64) -> PyResult<Self> {
        let inner =
            harvest::DetectorPairParams::with_gap_ratio(coupling, omega_a, gap_ratio, separation).map_err(to_py)?;
        Ok(PyParams { inner })
    }

    #[getter]
    fn omega_a(&self) -> f64 {
        self.inner.omega_a
    }

    #[getter]
    fn omega_b(&self) -> f64 {
        self.inner.omega_b
    }

    #[getter]
    fn separation(&self) -> f64 {
        self.inner.separation
    }

    #[getter]
    fn coupling(&self) -> f64 {
        self.inner.coupling
    }

    #[getter]
    fn gap_ratio(&self) -> f64 {
        self.inner.gap_ratio()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "DetectorPairParams(omega_a={}, omega_b={}, separation={}, coupling={})",
            p.omega_a, p.omega_b, p.separation, p.coupling
        )
    }
}

/// Every pointwise output as a dict.
#[pyfunction]
fn evaluate<'py>(py: Python<'py>, params: PyRef<'py, PyParams>) -> PyResult<Bound<'py, PyDict>> {
    let v = analysis::evaluate(&params.inner).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("p_a", v.p_a)?;
    out.set_item("p_b", v.p_b)?;
    out.set_item("abs_x", v.abs_x)?;
    out.set_item("abs_c", v.abs_c)?;
    out.set_item("s_a_to_b", v.steering.s_a_to_b)?;
    out.set_item("s_b_to_a", v.steering.s_b_to_a)?;
    out.set_item("asymmetry", v.steering.asymmetry)?;
    out.set_item("concurrence", v.concurrence)?;
    out.set_item("regime", v.steering.regime.label())?;
    Ok(out)
}

/// Returns (s_a_to_b, s_b_to_a, asymmetry).
#[pyfunction]
fn steering(params: PyRef<'_, PyParams>) -> PyResult<(f64, f64, f64)> {
    let s = harvest::steering_closed_form(&params.inner).map_err(to_py)?;
    Ok((s.s_a_to_b, s.s_b_to_a, s.asymmetry))
}

#[pyfunction]
fn concurrence(params: PyRef<'_, PyParams>) -> PyResult<f64> {
    harvest::concurrence_harvested(&params.inner).map_err(to_py)
}

/// Returns (p_a, p_b, x, c) with complex correlations.
#[pyfunction]
fn amplitudes(params: PyRef<'_, PyParams>) -> PyResult<(f64, f64, Complex, Complex)> {
    let s = harvest::PerturbativeState::compute(&params.inner).map_err(to_py)?;
    Ok((s.p_a, s.p_b, s.corr_x, s.corr_c))
}

/// Location where the measure ("a_to_b", "b_to_a" or "concurrence") vanishes.
#[pyfunction]
fn death_point(params: PyRef<'_, PyParams>, measure: &str, axis: &str, lo: f64, hi: f64) -> PyResult<(f64, f64)> {
    let measure: Measure = measure.parse().map_err(to_py)?;
    let axis: Axis = axis.parse().map_err(to_py)?;
    let dp = analysis::find_death_point(measure, &params.inner, axis, [lo, hi]).map_err(to_py)?;
    Ok((dp.location, dp.bracket_width))
}

/// Returns (location, asymmetry) of the largest asymmetry on [lo, hi].
#[pyfunction]
fn asymmetry_peak(params: PyRef<'_, PyParams>, axis: &str, lo: f64, hi: f64) -> PyResult<(f64, f64)> {
    let axis: Axis = axis.parse().map_err(to_py)?;
    let peak = analysis::find_asymmetry_peak(&params.inner, axis, [lo, hi]).map_err(to_py)?;
    Ok((peak.location, peak.value))
}

/// Returns (passed, worst relative error, comparisons) for the default panel.
#[pyfunction]
fn verify() -> PyResult<(bool, f64, usize)> {
    let report = oracle::verify(&oracle::default_panel(), &oracle::QuadratureSpec::default()).map_err(to_py)?;
    let worst = report.rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok((report.passed, worst, report.rows.len()))
}

#[pyfunction]
fn faddeeva(z: Complex) -> PyResult<Complex> {
    specfun::faddeeva(z).map_err(to_py)
}

#[pyfunction]
fn erf(z: Complex) -> PyResult<Complex> {
    specfun::erf_complex(z).map_err(to_py)
}

#[pyfunction]
fn erfi(z: Complex) -> PyResult<Complex> {
    specfun::erfi_complex(z).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "steerharvest")]
fn steerharvest_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(steering, m)?)?;
    m.add_function(wrap_pyfunction!(concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(amplitudes, m)?)?;
    m.add_function(wrap_pyfunction!(death_point, m)?)?;
    m.add_function(wrap_pyfunction!(asymmetry_peak, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(faddeeva, m)?)?;
    m.add_function(wrap_pyfunction!(erf, m)?)?;
    m.add_function(wrap_pyfunction!(erfi, m)?)?;
    Ok(())
}
