//! Python bindings. Reports come back as plain dicts and lists.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;

use twistmoments::arith::{self, Discriminant, Sign};
use twistmoments::charsum::{self, Method};
use twistmoments::hecke::{self, EigenvalueTable};
use twistmoments::lmoments::{self, PeterssonConfig};
use twistmoments::randmodel;
use twistmoments::special::{AFEWeight, WeightFunction};

fn err(e: twistmoments::Error) -> PyErr {
    use twistmoments::Error as E;
    match e {
        E::Check(_) | E::Io(_) | E::TermCap(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (_, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let items = a.iter().map(|x| json_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, json_to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

#[pyfunction]
fn kronecker(a: i64, n: i64) -> i32 {
    arith::kronecker(a, n)
}

/// `[(p, e), ...]` for `n >= 1`.
#[pyfunction]
fn factor(n: u64) -> PyResult<Vec<(u64, u32)>> {
    Ok(arith::factor(n).map_err(err)?.factors().to_vec())
}

/// Odd fundamental discriminants with `lo <= |d| <= hi`; `sign` is +1 or -1.
#[pyfunction]
#[pyo3(signature = (lo, hi, sign = 1))]
fn fundamental_discriminants(lo: u64, hi: u64, sign: i32) -> PyResult<Vec<i64>> {
    let s = match sign {
        1 => Sign::Positive,
        -1 => Sign::Negative,
        _ => return Err(PyValueError::new_err("sign must be 1 or -1")),
    };
    Ok(arith::enumerate_odd_fundamental(lo, hi, s).iter().map(|d| d.value()).collect())
}

#[pyfunction]
fn kloosterman(m: i64, n: i64, c: u64) -> PyResult<f64> {
    if c == 0 {
        return Err(PyValueError::new_err("c must be positive"));
    }
    Ok(charsum::kloosterman(m, n, c))
}

#[pyfunction]
#[pyo3(signature = (d, c, u, v, eta, closed_form = false))]
fn twisted_kloosterman_sum(d: i64, c: u64, u: i64, v: i64, eta: i64, closed_form: bool) -> PyResult<Complex64> {
    let method = if closed_form { Method::ClosedForm } else { Method::BruteForce };
    Ok(charsum::twisted_kloosterman_sum(d, c, u, v, eta, method).map_err(err)?.value)
}

#[pyfunction]
fn chebyshev_h(alpha: u32, c: u32) -> PyResult<u128> {
    if alpha > hecke::MAX_CHEBYSHEV_ALPHA {
        return Err(PyValueError::new_err(format!("alpha must be at most {}", hecke::MAX_CHEBYSHEV_ALPHA)));
    }
    Ok(hecke::chebyshev_h(alpha, c))
}

/// `tau(0..=n_max)`, using the on-disk cache in `$MM_CACHE_DIR`.
#[pyfunction]
fn ramanujan_tau(n_max: usize) -> PyResult<Vec<i128>> {
    hecke::ramanujan_tau(n_max).map_err(err)
}

/// The AFE weight `V_k(xi)`.
#[pyfunction]
#[pyo3(signature = (k, xi, sigma = None))]
fn afe_weight(k: u32, xi: f64, sigma: Option<f64>) -> PyResult<f64> {
    let mut w = AFEWeight::new(k);
    if let Some(s) = sigma {
        w = w.with_sigma(s);
    }
    w.eval(xi).map_err(err)
}

/// `L(1/2, Delta x chi_d)` for positive odd fundamental `d`.
#[pyfunction]
#[pyo3(signature = (d, v_tol = lmoments::AFE_V_TOL))]
fn central_value<'py>(py: Python<'py>, d: i64, v_tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let disc = Discriminant::new(d).map_err(err)?;
    let v = lmoments::afe_table(6).map_err(err)?;
    let m = (lmoments::afe_cutoff(&v, v_tol) * disc.abs() as f64).ceil() as usize;
    let table = EigenvalueTable::ramanujan(m).map_err(err)?;
    let r = lmoments::afe_central_value(&table, &disc, &v, v_tol).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (weight2k = 12, c_max = 64, size = 10, tol = 1e-8))]
fn petersson_grid<'py>(py: Python<'py>, weight2k: u32, c_max: u64, size: u64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let cfg = PeterssonConfig { weight2k, c_max, tol };
    to_py(py, &lmoments::petersson_grid(&cfg, size).map_err(err)?)
}

#[pyfunction]
fn density_check<'py>(py: Python<'py>, n: u64, u: u64, x: f64) -> PyResult<Bound<'py, PyAny>> {
    let v = lmoments::afe_table(6).map_err(err)?;
    let phi = WeightFunction::bump(1.0, 2.0).map_err(err)?;
    to_py(py, &lmoments::density_check(n, u, x, &v, &phi).map_err(err)?)
}

/// `(primes, thetas)` of one Sato-Tate realization.
#[pyfunction]
#[pyo3(signature = (seed, p_max, realization = 0))]
fn sato_tate_sample(seed: u64, p_max: u64, realization: u64) -> PyResult<(Vec<u64>, Vec<f64>)> {
    let r = randmodel::sample_realization_indexed(seed, realization, p_max).map_err(err)?;
    Ok((r.primes, r.thetas))
}

/// `E(X(m_1) ... X(m_r))` as an exact fraction string.
#[pyfunction]
fn exact_expectation(ms: Vec<u64>) -> PyResult<String> {
    Ok(randmodel::exact_expectation(&ms).map_err(err)?.to_string())
}

/// `(detected, margin)` for `[(d, value), ...]` in the window `[x, x + h]`.
#[pyfunction]
fn sign_change_detect(values: Vec<(i64, f64)>, x: f64, h: f64) -> (bool, f64) {
    let r = lmoments::sign_change_detect(&values, x, h);
    (r.detected, r.margin)
}

#[pymodule]
fn twistmoments_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(kronecker, m)?)?;
    m.add_function(wrap_pyfunction!(factor, m)?)?;
    m.add_function(wrap_pyfunction!(fundamental_discriminants, m)?)?;
    m.add_function(wrap_pyfunction!(kloosterman, m)?)?;
    m.add_function(wrap_pyfunction!(twisted_kloosterman_sum, m)?)?;
    m.add_function(wrap_pyfunction!(chebyshev_h, m)?)?;
    m.add_function(wrap_pyfunction!(ramanujan_tau, m)?)?;
    m.add_function(wrap_pyfunction!(afe_weight, m)?)?;
    m.add_function(wrap_pyfunction!(central_value, m)?)?;
    m.add_function(wrap_pyfunction!(petersson_grid, m)?)?;
    m.add_function(wrap_pyfunction!(density_check, m)?)?;
    m.add_function(wrap_pyfunction!(sato_tate_sample, m)?)?;
    m.add_function(wrap_pyfunction!(exact_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(sign_change_detect, m)?)?;
    Ok(())
}
