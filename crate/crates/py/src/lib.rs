//! Python bindings: cyclotomic integers, Jacobi sums, curves, local factors
//! and the bias series at one level.

use std::collections::BTreeMap;

use fermat_bias::curves::{
    ap_from_jacobi, count_points_bruteforce, local_factor_over_f, local_factor_over_q, DEFAULT_ORACLE_CAP,
};
use fermat_bias::fields::{primes_above, DEFAULT_TABLE_CAP};
use fermat_bias::jacobi::{compute_jacobi_prime, Strategy};
use fermat_bias::lfunc::{
    bias_decomposition, bias_sum, default_grid, loglog_fit, partial_euler_product, predicted_slope,
    second_moment_over_f, second_moment_over_q,
};
use fermat_bias::verify::{verify_level, VerifyOptions};
use fermat_bias::{CurveId, CycInt, Error, EulerTarget, GaloisElement, JacobiCache, LevelData, SeriesSample};
use num_bigint::BigInt;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Inconsistent(_) | Error::VanishingFactor { .. } | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for fermat_bias::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// An element of `Z[zeta_l]` in the power basis `1, zeta, ..., zeta^(l-2)`.
#[pyclass(name = "CycInt", module = "fermat_bias", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyCycInt(CycInt);

#[pymethods]
impl PyCycInt {
    #[new]
    fn new(ell: u32, coeffs: Vec<BigInt>) -> PyResult<Self> {
        Ok(PyCycInt(CycInt::from_coeffs(ell, coeffs).py()?))
    }

    #[staticmethod]
    fn zeta(ell: u32, j: i64) -> Self {
        PyCycInt(CycInt::zeta_pow(ell, j))
    }

    #[getter]
    fn ell(&self) -> u32 {
        self.0.ell()
    }

    #[getter]
    fn coeffs(&self) -> Vec<BigInt> {
        self.0.coeffs().to_vec()
    }

    fn __add__(&self, other: &PyCycInt) -> PyResult<Self> {
        Ok(PyCycInt(self.0.checked_add(&other.0).py()?))
    }

    fn __sub__(&self, other: &PyCycInt) -> PyResult<Self> {
        Ok(PyCycInt(self.0.checked_sub(&other.0).py()?))
    }

    fn __mul__(&self, other: &PyCycInt) -> PyResult<Self> {
        Ok(PyCycInt(self.0.checked_mul(&other.0).py()?))
    }

    fn __neg__(&self) -> Self {
        PyCycInt(-&self.0)
    }

    fn __pow__(&self, e: u32, _modulo: Option<Bound<'_, PyAny>>) -> Self {
        PyCycInt(self.0.pow(e))
    }

    /// `sigma_t`, sending `zeta` to `zeta^t`.
    fn galois(&self, t: i64) -> PyResult<Self> {
        let sigma = GaloisElement::new(t, self.0.ell()).py()?;
        Ok(PyCycInt(self.0.galois(sigma).py()?))
    }

    fn conj(&self) -> Self {
        PyCycInt(self.0.conj())
    }

    fn abs_square(&self) -> Self {
        PyCycInt(self.0.abs_square())
    }

    /// The integer this is, if it lies in `Z`.
    fn as_integer(&self) -> Option<BigInt> {
        self.0.as_integer().cloned()
    }

    /// Trace down to `Q`.
    fn trace(&self) -> BigInt {
        self.0.trace()
    }

    /// Complex value under `zeta -> exp(2 pi i t / l)`.
    #[pyo3(signature = (t = 1))]
    fn embed(&self, t: i64) -> PyResult<Complex64> {
        Ok(self.0.embed(GaloisElement::new(t, self.0.ell()).py()?))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("CycInt({}, {:?})", self.0.ell(), self.0.to_decimal_strings())
    }
}

/// The Fermat curve `x^l + y^l = 1` or one of its quotients `C_k`.
#[pyclass(name = "Curve", module = "fermat_bias", frozen, eq, skip_from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct PyCurve(CurveId);

#[pymethods]
impl PyCurve {
    #[staticmethod]
    fn fermat(ell: u32) -> Self {
        PyCurve(CurveId::fermat(ell))
    }

    #[staticmethod]
    fn quotient(ell: u32, k: u32) -> PyResult<Self> {
        Ok(PyCurve(CurveId::quotient(ell, k).py()?))
    }

    /// Accepts `fermat`, `quotientK` or `K`.
    #[staticmethod]
    fn parse(ell: u32, name: &str) -> PyResult<Self> {
        Ok(PyCurve(CurveId::parse(ell, name).py()?))
    }

    #[staticmethod]
    fn all(ell: u32) -> Vec<Self> {
        CurveId::all(ell).into_iter().map(PyCurve).collect()
    }

    #[getter]
    fn ell(&self) -> u32 {
        self.0.ell
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name()
    }

    #[getter]
    fn genus(&self) -> u32 {
        self.0.genus()
    }

    /// Characters `(k, t)` whose L-functions multiply to this curve's.
    fn characters(&self) -> Vec<(u32, u32)> {
        self.0.characters()
    }

    /// `#C(F_{p^n})` by enumeration.
    #[pyo3(signature = (p, n = 1))]
    fn count_points(&self, p: u64, n: u32) -> PyResult<u64> {
        count_points_bruteforce(self.0, p, n).py()
    }

    /// `a_p` from Jacobi sums; 0 unless `p = 1 mod l`.
    #[pyo3(signature = (p, table_cap = DEFAULT_TABLE_CAP))]
    fn ap(&self, p: u64, table_cap: u64) -> PyResult<i64> {
        let data = compute_jacobi_prime(p, self.0.ell, table_cap, Strategy::Auto).py()?;
        ap_from_jacobi(&data, self.0).py()
    }

    /// Integer coefficients of the local factor at `p` over `Q`, lowest
    /// degree first.
    #[pyo3(signature = (p, table_cap = DEFAULT_TABLE_CAP))]
    fn local_factor_over_q(&self, p: u64, table_cap: u64) -> PyResult<Vec<BigInt>> {
        let data = compute_jacobi_prime(p, self.0.ell, table_cap, Strategy::Auto).py()?;
        let factor = local_factor_over_q(&data, self.0).py()?;
        factor
            .integer_coeffs()
            .ok_or_else(|| PyRuntimeError::new_err("local factor over Q has non-rational coefficients"))
    }

    /// Local factors over `Q(zeta_l)` at every prime above `p`, keyed by
    /// the twist `t` of the prime.
    #[pyo3(signature = (p, table_cap = DEFAULT_TABLE_CAP))]
    fn local_factors_over_f(&self, p: u64, table_cap: u64) -> PyResult<BTreeMap<u32, Vec<PyCycInt>>> {
        let data = compute_jacobi_prime(p, self.0.ell, table_cap, Strategy::Auto).py()?;
        primes_above(p, self.0.ell)
            .iter()
            .map(|pr| {
                let factor = local_factor_over_f(&data, pr, self.0).py()?;
                Ok((pr.t, factor.coeffs.into_iter().map(PyCycInt).collect()))
            })
            .collect()
    }

    fn __str__(&self) -> String {
        self.0.name()
    }

    fn __repr__(&self) -> String {
        format!("Curve({}, {:?})", self.0.ell, self.0.name())
    }
}

/// Every Jacobi sum above `p`, keyed by `(t, k1, k2)` where `t` names the
/// prime `sigma_t` of the canonical one.
#[pyfunction]
#[pyo3(signature = (p, ell, table_cap = DEFAULT_TABLE_CAP))]
fn jacobi_sums(p: u64, ell: u32, table_cap: u64) -> PyResult<BTreeMap<(u32, u32, u32), PyCycInt>> {
    let data = compute_jacobi_prime(p, ell, table_cap, Strategy::Auto).py()?;
    Ok(data
        .all_values()
        .into_iter()
        .map(|((pr, (k1, k2)), v)| ((pr.t, k1, k2), PyCycInt(v)))
        .collect())
}

/// `J(chi^k1, chi^k2)` at the canonical prime above `p`.
#[pyfunction]
#[pyo3(signature = (p, ell, k1, k2, table_cap = DEFAULT_TABLE_CAP))]
fn jacobi_sum(p: u64, ell: u32, k1: u64, k2: u64, table_cap: u64) -> PyResult<PyCycInt> {
    let data = compute_jacobi_prime(p, ell, table_cap, Strategy::Auto).py()?;
    Ok(PyCycInt(data.value(k1, k2).py()?))
}

/// Slope `(g - m) / (l - 1)` expected for the bias sum against `log log x`.
#[pyfunction]
#[pyo3(signature = (curve, m = 0))]
fn expected_slope(curve: &PyCurve, m: u32) -> f64 {
    predicted_slope(curve.0, m)
}

/// Least squares `y = A log log x + c` over `x` in `[lo, hi]`; returns
/// `(A, c, residual_rms)`.
#[pyfunction]
fn fit_loglog(xs: Vec<f64>, ys: Vec<f64>, lo: f64, hi: f64) -> PyResult<(f64, f64, f64)> {
    if xs.len() != ys.len() {
        return Err(PyValueError::new_err("xs and ys differ in length"));
    }
    let samples: Vec<SeriesSample> = xs
        .into_iter()
        .zip(ys)
        .map(|(x, value)| SeriesSample { x, value })
        .collect();
    let fit = loglog_fit(&samples, lo, hi).py()?;
    Ok((fit.slope, fit.intercept, fit.residual_rms))
}

fn pairs(samples: Vec<SeriesSample>) -> Vec<(f64, f64)> {
    samples.into_iter().map(|s| (s.x, s.value)).collect()
}

/// Jacobi data for every prime up to `x_max` at level `l`.
#[pyclass(name = "Level", module = "fermat_bias", frozen)]
struct PyLevel(LevelData);

impl PyLevel {
    fn grid(&self, grid: Option<Vec<f64>>) -> Vec<f64> {
        grid.unwrap_or_else(|| default_grid(self.0.x_max))
    }

    fn check(&self, curve: &PyCurve) -> PyResult<()> {
        if curve.0.ell != self.0.ell {
            return Err(PyValueError::new_err(format!(
                "curve has level {}, data has level {}",
                curve.0.ell, self.0.ell
            )));
        }
        Ok(())
    }
}

#[pymethods]
impl PyLevel {
    /// `cache` is an optional JSONL file that is read and extended.
    #[new]
    #[pyo3(signature = (ell, x_max, cache = None, table_cap = DEFAULT_TABLE_CAP))]
    fn new(py: Python<'_>, ell: u32, x_max: u64, cache: Option<std::path::PathBuf>, table_cap: u64) -> PyResult<Self> {
        py.detach(|| {
            let mut c = match cache {
                Some(path) => JacobiCache::open(path).py()?,
                None => JacobiCache::in_memory(),
            };
            Ok(PyLevel(LevelData::compute(ell, x_max, table_cap, Some(&mut c)).py()?))
        })
    }

    #[getter]
    fn ell(&self) -> u32 {
        self.0.ell
    }

    #[getter]
    fn x_max(&self) -> u64 {
        self.0.x_max
    }

    #[getter]
    fn tables_built(&self) -> usize {
        self.0.stats.tables_built
    }

    #[getter]
    fn cache_hits(&self) -> usize {
        self.0.stats.cache_hits
    }

    /// `(x, sum_{p <= x} a_p / p)` along the grid.
    #[pyo3(signature = (curve, grid = None))]
    fn bias_sum(&self, curve: &PyCurve, grid: Option<Vec<f64>>) -> PyResult<Vec<(f64, f64)>> {
        self.check(curve)?;
        Ok(pairs(bias_sum(&self.0, curve.0, &self.grid(grid)).py()?))
    }

    #[pyo3(signature = (curve, grid = None))]
    fn second_moment_over_f(&self, curve: &PyCurve, grid: Option<Vec<f64>>) -> PyResult<Vec<(f64, f64)>> {
        self.check(curve)?;
        Ok(pairs(second_moment_over_f(&self.0, curve.0, &self.grid(grid)).py()?))
    }

    #[pyo3(signature = (curve, grid = None))]
    fn second_moment_over_q(&self, curve: &PyCurve, grid: Option<Vec<f64>>) -> PyResult<Vec<(f64, f64)>> {
        self.check(curve)?;
        Ok(pairs(second_moment_over_q(&self.0, curve.0, &self.grid(grid)).py()?))
    }

    /// Partial Euler product of the curve over primes of `Q(zeta_l)` with
    /// norm at most `x`, normalized so the center is `s = 1/2`.
    fn euler_product(&self, curve: &PyCurve, s: Complex64, x: f64) -> PyResult<Complex64> {
        self.check(curve)?;
        partial_euler_product(&self.0, EulerTarget::Curve(curve.0), s, x, 0).py()
    }

    /// The terms of `-log` of the partial product at the center, as a dict.
    #[pyo3(signature = (curve, x, m = 0))]
    fn decomposition(&self, curve: &PyCurve, x: f64, m: u32) -> PyResult<BTreeMap<&'static str, Complex64>> {
        self.check(curve)?;
        let d = bias_decomposition(&self.0, EulerTarget::Curve(curve.0), x, m).py()?;
        Ok(BTreeMap::from([
            ("term_i", d.term_i),
            ("term_ii", d.term_ii),
            ("term_iii", d.term_iii),
            ("bound_iii", Complex64::new(d.bound_iii, 0.0)),
            ("neg_log_product", d.neg_log_product),
            ("log_normalized_product", d.log_normalized_product()),
        ]))
    }

    /// Runs every invariant family; maps family name to
    /// `(checks, failures, witnesses)`.
    #[pyo3(signature = (oracle_cap = DEFAULT_ORACLE_CAP))]
    fn verify(&self, py: Python<'_>, oracle_cap: u64) -> PyResult<BTreeMap<&'static str, (usize, usize, Vec<String>)>> {
        let opts = VerifyOptions {
            oracle_cap,
            ..Default::default()
        };
        let report = py.detach(|| verify_level(&self.0, &opts)).py()?;
        Ok(report
            .families
            .into_iter()
            .map(|f| (f.name, (f.checks, f.failures, f.witnesses)))
            .collect())
    }
}

#[pymodule]
#[pyo3(name = "fermat_bias")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCycInt>()?;
    m.add_class::<PyCurve>()?;
    m.add_class::<PyLevel>()?;
    m.add_function(wrap_pyfunction!(jacobi_sum, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_sums, m)?)?;
    m.add_function(wrap_pyfunction!(expected_slope, m)?)?;
    m.add_function(wrap_pyfunction!(fit_loglog, m)?)?;
    Ok(())
}
