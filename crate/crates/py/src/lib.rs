//! Python bindings. Record-valued results come back as plain dicts with the same
//! field names as the JSON artifacts of the command-line tool; exact rationals
//! are strings such as `"4/5"`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use tracelab_core::adelic::{self, FactoredTestFunction, RationalAdele, TruncationSet};
use tracelab_core::ffl::{self, DirichletCharacterFF, FqPolynomial};
use tracelab_core::localfield::classify_torus_sl2;
use tracelab_core::rootdata::RootSystem;
use tracelab_core::{orbital, steinberg, suite, PAdicApprox};

fn err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_rational(s: &str) -> PyResult<BigRational> {
    s.trim().parse().map_err(|_| err(format!("{s:?} is not a rational number")))
}

/// Element of ℚ_p known modulo p^prec.
#[pyclass(name = "PAdic", frozen)]
struct PyPAdic(PAdicApprox);

#[pymethods]
impl PyPAdic {
    /// `PAdic(p, "a/b", prec)`.
    #[new]
    fn new(p: u64, value: &str, prec: i64) -> PyResult<Self> {
        PAdicApprox::from_rational(p, &parse_rational(value)?, prec).map(Self).map_err(err)
    }

    #[getter]
    fn prime(&self) -> u64 {
        self.0.prime()
    }

    #[getter]
    fn valuation(&self) -> Option<i64> {
        self.0.valuation()
    }

    #[getter]
    fn precision(&self) -> i64 {
        self.0.precision()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Rational representative as a string.
    fn to_fraction(&self) -> String {
        self.0.to_rational().to_string()
    }

    fn principal_part(&self) -> PyResult<String> {
        self.0.principal_part().map(|q| q.to_string()).map_err(err)
    }

    fn is_square(&self) -> PyResult<bool> {
        self.0.is_square().map_err(err)
    }

    /// Torus class of the SL2 trace `self`.
    fn torus_class(&self) -> PyResult<String> {
        classify_torus_sl2(&self.0).map(|t| t.to_string()).map_err(err)
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        self.0.add(&other.0).map(Self).map_err(err)
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        self.0.sub(&other.0).map(Self).map_err(err)
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        self.0.mul(&other.0).map(Self).map_err(err)
    }

    fn __neg__(&self) -> Self {
        Self(self.0.neg())
    }

    fn __eq__(&self, other: &Self) -> PyResult<bool> {
        self.0.agrees_with(&other.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("PAdic({})", self.0)
    }
}

/// Dirichlet character of `F_q[t]` modulo a monic polynomial.
#[pyclass(name = "Character", frozen)]
struct PyCharacter(DirichletCharacterFF);

#[pymethods]
impl PyCharacter {
    /// `Character(q, "t^2+1", index)`.
    #[new]
    fn new(q: u64, modulus: &str, index: usize) -> PyResult<Self> {
        let f = FqPolynomial::parse(q, modulus).map_err(err)?;
        DirichletCharacterFF::by_index(&f, index).map(Self).map_err(err)
    }

    /// Number of characters modulo `modulus`.
    #[staticmethod]
    fn count(q: u64, modulus: &str) -> PyResult<usize> {
        let f = FqPolynomial::parse(q, modulus).map_err(err)?;
        DirichletCharacterFF::all(&f).map(|v| v.len()).map_err(err)
    }

    #[getter]
    fn is_even(&self) -> bool {
        self.0.is_even()
    }

    #[getter]
    fn is_trivial(&self) -> bool {
        self.0.is_trivial()
    }

    #[getter]
    fn order(&self) -> u64 {
        self.0.character_order()
    }

    #[getter]
    fn conductor(&self) -> String {
        self.0.conductor().to_string()
    }

    /// Euler coefficients `a_0..a_dmax` on the affine line as complex numbers.
    fn euler_coeffs(&self, dmax: u32) -> PyResult<Vec<(f64, f64)>> {
        let c = ffl::euler_coeffs(&self.0, dmax, ffl::Domain::Affine).map_err(err)?;
        Ok(c.into_iter().map(|z| (z.re, z.im)).collect())
    }

    /// Divisor sums `Σ_{deg g = d} χ(g)` for `d = 0..=dmax`.
    fn divisor_sums(&self, dmax: u32) -> PyResult<Vec<(f64, f64)>> {
        let c = ffl::divisor_sums(&self.0, dmax, ffl::Domain::Affine).map_err(err)?;
        Ok(c.into_iter().map(|z| (z.re, z.im)).collect())
    }

    fn l_polynomial<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &ffl::l_polynomial(&self.0).map_err(err)?)
    }

    fn symmetric_power_check<'py>(&self, py: Python<'py>, dmax: u32) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &ffl::symmetric_power_check(&self.0, dmax).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        self.0.to_string()
    }
}

/// `(holds, residual)` for the Jacobian identity of type "A1" or "A2".
#[pyfunction]
fn hc1_check(cartan: &str) -> PyResult<(bool, String)> {
    let rs = RootSystem::from_label(cartan).map_err(err)?;
    let rep = steinberg::verify_hc1(&rs);
    Ok((rep.holds, rep.residual.to_string()))
}

#[pyfunction]
#[pyo3(signature = (p, b, n, s = 1.0))]
fn theta<'py>(py: Python<'py>, p: u64, b: i64, n: u32, s: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &orbital::theta_at(p, n, b, s).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (p, n, s = 1.0))]
fn theta_hat_zero<'py>(py: Python<'py>, p: u64, n: u32, s: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &orbital::theta_hat_zero(p, n, s).map_err(err)?)
}

#[pyfunction]
fn transversal_lemma<'py>(py: Python<'py>, p: u64, n: u32) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &orbital::verify_transversal_lemma(p, n).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (p, n = 2))]
fn torus_breakdown<'py>(py: Python<'py>, p: u64, n: u32) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &orbital::torus_breakdown(p, n).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (pmax, s = 1.0))]
fn dominant_product<'py>(py: Python<'py>, pmax: u64, s: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &orbital::dominant_product(pmax, s).map_err(err)?)
}

/// Decomposes the adele `(real, {p: (x, prec)})` along `sp` (e.g. "inf,2").
/// Returns `(b, verified)`.
#[pyfunction]
fn getz_decompose(sp: &str, real: f64, finite: BTreeMap<u64, (String, i64)>) -> PyResult<(String, bool)> {
    let sp = TruncationSet::parse(sp).map_err(err)?;
    let mut comps = BTreeMap::new();
    for (p, (x, prec)) in finite {
        comps.insert(p, PAdicApprox::from_rational(p, &parse_rational(&x)?, prec).map_err(err)?);
    }
    let a = RationalAdele::new(real, comps).map_err(err)?;
    let d = adelic::getz_decompose(&a, &sp).map_err(err)?;
    let ok = d.verify(&a, &sp).map_err(err)?;
    Ok((d.b.to_string(), ok))
}

/// Truncated Poisson summation for `exp(−π t x²) · Π_p 1_{p^k ℤ_p}`.
#[pyfunction]
#[pyo3(signature = (sp, t = 1.0, levels = BTreeMap::new()))]
fn poisson<'py>(py: Python<'py>, sp: &str, t: f64, levels: BTreeMap<u64, i32>) -> PyResult<Bound<'py, PyAny>> {
    let sp = TruncationSet::parse(sp).map_err(err)?;
    let f = levels.into_iter().fold(FactoredTestFunction::gaussian(t), |f, (p, k)| f.with_level(p, k));
    to_py(py, &adelic::poisson_truncated(&f, &sp).map_err(err)?)
}

/// Runs acceptance criteria (all when `only` is empty) and returns the report.
#[pyfunction]
#[pyo3(signature = (only = Vec::new()))]
fn verify_all<'py>(py: Python<'py>, only: Vec<u8>) -> PyResult<Bound<'py, PyAny>> {
    let ids: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only };
    let criteria = ids
        .into_iter()
        .map(|id| suite::criterion(id).ok_or_else(|| err(format!("no criterion {id}"))))
        .collect::<PyResult<Vec<_>>>()?;
    let passed = criteria.iter().all(|c| c.passed);
    to_py(py, &suite::SuiteReport { criteria, passed })
}

#[pymodule]
fn tracelab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPAdic>()?;
    m.add_class::<PyCharacter>()?;
    m.add_function(wrap_pyfunction!(hc1_check, m)?)?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(theta_hat_zero, m)?)?;
    m.add_function(wrap_pyfunction!(transversal_lemma, m)?)?;
    m.add_function(wrap_pyfunction!(torus_breakdown, m)?)?;
    m.add_function(wrap_pyfunction!(dominant_product, m)?)?;
    m.add_function(wrap_pyfunction!(getz_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(poisson, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    Ok(())
}
