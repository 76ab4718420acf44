//! Python bindings: the `HenonMap` class plus module-level functions for
//! dynamics, normal forms and rigidity checks.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::Value;

use henon_core::dynamics::{Dynamics, GridJob, GridMode, Sign, Slice};
use henon_core::io::{polymap_json, MapSpec};
use henon_core::normal_form::{self, NormalChain};
use henon_core::{fixtures, rigidity, ElementaryFactor, Error, HenonChain, Point2, Polynomial};

fn to_py_err(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        Value::Null => Ok(py.None().into_bound(py)),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py),
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py),
        },
        Value::String(s) => s.into_bound_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            Ok(list.into_any())
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            Ok(dict.into_any())
        }
    }
}

fn parse_sign(sign: &str) -> PyResult<Option<Sign>> {
    match sign {
        "max" => Ok(None),
        other => other.parse::<Sign>().map(Some).map_err(to_py_err),
    }
}

fn point(x: Complex64, y: Complex64) -> Point2 {
    Point2::new(x, y)
}

/// A composition of Hénon factors `(x, y) ↦ (b·y + c, p(y) − δ·x)`, first-applied first.
#[pyclass(
    name = "HenonMap",
    module = "henon_rigidity",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyHenonMap {
    inner: HenonChain,
}

#[pymethods]
impl PyHenonMap {
    /// Single factor with `p` given by ascending coefficients.
    #[new]
    #[pyo3(signature = (p, b = Complex64::new(1.0, 0.0), c = Complex64::new(0.0, 0.0), delta = Complex64::new(1.0, 0.0)))]
    fn new(p: Vec<Complex64>, b: Complex64, c: Complex64, delta: Complex64) -> PyResult<Self> {
        let p = Polynomial::new(p).map_err(to_py_err)?;
        let factor = ElementaryFactor::new(b, c, delta, p).map_err(to_py_err)?;
        Ok(Self {
            inner: HenonChain::single(factor),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = MapSpec::from_json(text)
            .and_then(|s| s.to_chain())
            .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    /// `(y, y² − x)`.
    #[staticmethod]
    fn basic() -> Self {
        Self {
            inner: fixtures::basic_map(),
        }
    }

    /// `C_ω ∘ (y, y² − x)` with `ω = e^{2πi/3}`.
    #[staticmethod]
    fn twisted_basic() -> Self {
        Self {
            inner: fixtures::twisted_basic_map(),
        }
    }

    fn to_json(&self) -> String {
        MapSpec::from_chain(&self.inner, None).to_json()
    }

    /// `outer ∘ self`.
    fn then(&self, outer: &PyHenonMap) -> Self {
        Self {
            inner: self.inner.then(&outer.inner),
        }
    }

    /// `self ∘ inner`.
    fn compose(&self, inner: &PyHenonMap) -> Self {
        Self {
            inner: inner.inner.then(&self.inner),
        }
    }

    fn power(&self, n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.power(n).map_err(to_py_err)?,
        })
    }

    fn __call__(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        let z = self.inner.forward(point(x, y));
        (z.x, z.y)
    }

    fn inverse(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        let z = self.inner.inverse(point(x, y));
        (z.x, z.y)
    }

    /// `Hⁿ(x, y)`, negative `n` for the inverse; `None` if the orbit overflows.
    fn iterate(&self, x: Complex64, y: Complex64, n: i64) -> Option<(Complex64, Complex64)> {
        self.inner.iterate(point(x, y), n).ok().map(|z| (z.x, z.y))
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn jacobian(&self) -> Complex64 {
        self.inner.jacobian_det()
    }

    #[getter]
    fn num_factors(&self) -> usize {
        self.inner.len()
    }

    /// Expanded map as `{"first": [...], "second": [...]}` term lists.
    fn expand<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let m = self.inner.expand().map_err(to_py_err)?;
        json_to_py(py, &polymap_json(&m))
    }

    /// `A_p⁻¹ ∘ H ∘ A_p` with `A_p(x, y) = (x + px, y + py)`.
    fn conjugate_by_translation(&self, px: Complex64, py_: Complex64) -> Self {
        Self {
            inner: self.inner.conjugate_by_translation(point(px, py_)),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("HenonMap({})", self.inner)
    }
}

#[pyfunction]
#[pyo3(signature = (h, x, y, sign = "plus", budget = 200))]
fn green<'py>(
    py: Python<'py>,
    h: &PyHenonMap,
    x: Complex64,
    y: Complex64,
    sign: &str,
    budget: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let dy = Dynamics::new(&h.inner).map_err(to_py_err)?;
    let z = point(x, y);
    let g = match parse_sign(sign)? {
        Some(s) => dy.green(z, s, budget),
        None => dy.green_max(z, budget),
    };
    let dict = PyDict::new(py);
    dict.set_item("value", g.value)?;
    dict.set_item("error_bound", g.error_bound)?;
    dict.set_item("iterations", g.iterations_used)?;
    dict.set_item("escaped", g.escaped)?;
    Ok(dict.into_any())
}

#[pyfunction]
#[pyo3(signature = (h, x, y, budget = 200, sign = "max"))]
fn classify(
    h: &PyHenonMap,
    x: Complex64,
    y: Complex64,
    budget: usize,
    sign: &str,
) -> PyResult<String> {
    let dy = Dynamics::new(&h.inner).map_err(to_py_err)?;
    let z = point(x, y);
    let class = match parse_sign(sign)? {
        Some(s) => dy.classify_one_sided(z, s, budget),
        None => dy.classify(z, budget),
    };
    Ok(class.to_string())
}

#[pyfunction]
fn filtration_radius(h: &PyHenonMap) -> PyResult<f64> {
    Ok(henon_core::filtration_radius(&h.inner)
        .map_err(to_py_err)?
        .radius)
}

#[pyfunction]
#[pyo3(signature = (h, r0 = 1e3, samples = 100, budget = 200, seed = 0))]
fn verify_domination<'py>(
    py: Python<'py>,
    h: &PyHenonMap,
    r0: f64,
    samples: usize,
    budget: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let dy = Dynamics::new(&h.inner).map_err(to_py_err)?;
    let r = dy
        .verify_green_domination(r0, samples, budget, seed)
        .map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("radius", r.radius)?;
    dict.set_item("d2_certified", r.plus_region.certified)?;
    dict.set_item("d1_certified", r.minus_region.certified)?;
    dict.set_item("samples", samples)?;
    dict.set_item("worst_margin_d2", r.plus_region.worst_margin)?;
    dict.set_item("worst_margin_d1", r.minus_region.worst_margin)?;
    dict.set_item("all_certified", r.all_certified())?;
    Ok(dict.into_any())
}

/// Grid values over the real slice, row 0 at the top.
#[pyfunction]
#[pyo3(signature = (h, mode = "gmax", window = (0.0, 0.0, 5.0, 5.0), resolution = (64, 64), budget = 200, workers = 0))]
fn render(
    h: &PyHenonMap,
    mode: &str,
    window: (f64, f64, f64, f64),
    resolution: (usize, usize),
    budget: usize,
    workers: usize,
) -> PyResult<Vec<Vec<f64>>> {
    let job = GridJob {
        center: (window.0, window.1),
        width: window.2,
        height: window.3,
        resolution,
        slice: Slice::default(),
        mode: mode.parse::<GridMode>().map_err(to_py_err)?,
        budget,
    };
    let grid = Dynamics::new(&h.inner)
        .and_then(|dy| dy.rasterize(&job, workers))
        .map_err(to_py_err)?;
    Ok(grid
        .values
        .chunks(grid.columns)
        .map(|r| r.to_vec())
        .collect())
}

#[pyfunction]
#[pyo3(signature = (h, order = 1))]
fn fixed_points(h: &PyHenonMap, order: usize) -> PyResult<Vec<(Complex64, Complex64)>> {
    let set = rigidity::fixed_points(&h.inner, order).map_err(to_py_err)?;
    Ok(set.points.iter().map(|p| (p.x, p.y)).collect())
}

/// `{"eta", "residual", "right"}` for `F∘H = C_η∘H∘F`, or `None`.
#[pyfunction]
#[pyo3(signature = (f, h, tol = 1e-9))]
fn find_twist<'py>(
    py: Python<'py>,
    f: &PyHenonMap,
    h: &PyHenonMap,
    tol: f64,
) -> PyResult<Option<Bound<'py, PyAny>>> {
    match rigidity::find_twist(&f.inner, &h.inner, tol) {
        Ok(Some(t)) => {
            let dict = PyDict::new(py);
            dict.set_item("eta", t.eta)?;
            dict.set_item("residual", t.residual)?;
            dict.set_item("right", t.right.to_string())?;
            Ok(Some(dict.into_any()))
        }
        Ok(None) | Err(Error::DegreeMismatch(_)) => Ok(None),
        Err(e) => Err(to_py_err(e)),
    }
}

#[pyfunction]
#[pyo3(signature = (f, h, tol = 1e-9))]
fn check_commute(f: &PyHenonMap, h: &PyHenonMap, tol: f64) -> PyResult<(bool, f64)> {
    let c = rigidity::check_commute(&f.inner, &h.inner, tol).map_err(to_py_err)?;
    Ok((c.commute, c.residual))
}

#[pyfunction]
#[pyo3(signature = (f, h, tol = 1e-9))]
fn verify_squares_commute(f: &PyHenonMap, h: &PyHenonMap, tol: f64) -> PyResult<(bool, f64)> {
    let c = rigidity::verify_squares_commute(&f.inner, &h.inner, tol).map_err(to_py_err)?;
    Ok((c.commute, c.residual))
}

#[pyfunction]
#[pyo3(signature = (f, h, tol = 1e-9))]
fn rigidity_report<'py>(
    py: Python<'py>,
    f: &PyHenonMap,
    h: &PyHenonMap,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    json_to_py(
        py,
        &rigidity::rigidity_report(&f.inner, &h.inner, tol).to_json(),
    )
}

#[pyfunction]
#[pyo3(signature = (f, h, tol = 1e-9))]
fn rigidity_report_text(f: &PyHenonMap, h: &PyHenonMap, tol: f64) -> String {
    rigidity::rigidity_report(&f.inner, &h.inner, tol).to_text()
}

#[pyfunction]
fn square_normal_form(h: &PyHenonMap) -> PyHenonMap {
    PyHenonMap {
        inner: normal_form::square_normal_form(&h.inner).to_chain(),
    }
}

#[pyfunction]
fn chain_normalize_b_only(h: &PyHenonMap) -> PyResult<PyHenonMap> {
    let n = normal_form::chain_normalize_b_only(&h.inner).map_err(to_py_err)?;
    Ok(PyHenonMap {
        inner: n.to_chain(),
    })
}

#[pyfunction]
fn origin_fixed_form(h: &PyHenonMap) -> PyResult<PyHenonMap> {
    Ok(PyHenonMap {
        inner: normal_form::origin_fixed_form(&h.inner).map_err(to_py_err)?,
    })
}

/// Elements of the admissible twist group of a chain in normal form.
#[pyfunction]
fn twist_group(h: &PyHenonMap) -> PyResult<Vec<Complex64>> {
    let normal = NormalChain::from_chain(&h.inner)
        .ok_or_else(|| PyValueError::new_err("map is not in normal form (b = 1, c = 0)"))?;
    Ok(normal_form::admissible_twist_group(&normal)
        .map_err(to_py_err)?
        .elements())
}

#[pymodule]
fn henon_rigidity(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHenonMap>()?;
    m.add_function(wrap_pyfunction!(green, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(filtration_radius, m)?)?;
    m.add_function(wrap_pyfunction!(verify_domination, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_points, m)?)?;
    m.add_function(wrap_pyfunction!(find_twist, m)?)?;
    m.add_function(wrap_pyfunction!(check_commute, m)?)?;
    m.add_function(wrap_pyfunction!(verify_squares_commute, m)?)?;
    m.add_function(wrap_pyfunction!(rigidity_report, m)?)?;
    m.add_function(wrap_pyfunction!(rigidity_report_text, m)?)?;
    m.add_function(wrap_pyfunction!(square_normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(chain_normalize_b_only, m)?)?;
    m.add_function(wrap_pyfunction!(origin_fixed_form, m)?)?;
    m.add_function(wrap_pyfunction!(twist_group, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_names() {
        assert_eq!(parse_sign("plus").unwrap(), Some(Sign::Plus));
        assert_eq!(parse_sign("minus").unwrap(), Some(Sign::Minus));
        assert_eq!(parse_sign("max").unwrap(), None);
    }

    #[test]
    fn wrapper_composition_order() {
        let h = PyHenonMap::basic();
        let f = PyHenonMap::twisted_basic();
        let fh = f.compose(&h);
        let also = h.then(&f);
        let z = (Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4));
        assert_eq!(fh.__call__(z.0, z.1), also.__call__(z.0, z.1));
        let (hx, hy) = h.__call__(z.0, z.1);
        assert_eq!(fh.__call__(z.0, z.1), f.__call__(hx, hy));
    }

    #[test]
    fn constructor_validates() {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        assert!(PyHenonMap::new(vec![zero, zero, one], one, zero, one).is_ok());
        assert!(PyHenonMap::new(vec![zero, one], one, zero, one).is_err());
        assert!(PyHenonMap::new(vec![zero, zero, one], zero, zero, one).is_err());
    }
}
