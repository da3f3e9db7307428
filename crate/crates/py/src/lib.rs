//! Python bindings for the confounded-mediator model toolkit.
//!
//! Exposes the samplers, the estimator suite, the closed-form bias/variance
//! expressions, the power-series machinery, cohort ingestion and the grid
//! harness with plain Python types (floats, lists, dicts).

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cmm::analytic;
use cmm::estimators;
use cmm::grid;
use cmm::ingest;
use cmm::model;
use cmm::regress;
use cmm::series;

fn err(e: cmm::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Labels, mean vector and covariance rows of a Gaussian family.
type PyFamily = (Vec<String>, Vec<f64>, Vec<Vec<f64>>);

/// Structural coefficients and noise moments of the model.
#[pyclass(name = "ModelParams", module = "cmm_py", skip_from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    inner: model::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (a=1.0, b=1.0, c=1.0, d=1.0, eps=1.0, g=0.0, mu_w=1.0,
                        var_w=1.0, var_x=1.0, var_m=1.0, var_y=1.0, var_v=1.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        eps: f64,
        g: f64,
        mu_w: f64,
        var_w: f64,
        var_x: f64,
        var_m: f64,
        var_y: f64,
        var_v: f64,
    ) -> PyResult<Self> {
        let inner = model::ModelParams {
            a,
            b,
            c,
            d,
            eps,
            g,
            mu_w,
            var_w,
            var_x,
            var_m,
            var_y,
            var_v,
        };
        inner.validate().map_err(err)?;
        Ok(PyModelParams { inner })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }
    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }
    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }
    #[getter]
    fn d(&self) -> f64 {
        self.inner.d
    }
    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps
    }
    #[getter]
    fn g(&self) -> f64 {
        self.inner.g
    }
    #[getter]
    fn mu_w(&self) -> f64 {
        self.inner.mu_w
    }
    #[getter]
    fn var_w(&self) -> f64 {
        self.inner.var_w
    }
    #[getter]
    fn var_x(&self) -> f64 {
        self.inner.var_x
    }
    #[getter]
    fn var_m(&self) -> f64 {
        self.inner.var_m
    }
    #[getter]
    fn var_y(&self) -> f64 {
        self.inner.var_y
    }
    #[getter]
    fn var_v(&self) -> f64 {
        self.inner.var_v
    }

    fn replace(
        &self,
        py: Python<'_>,
        kwargs: Option<Bound<'_, pyo3::types::PyDict>>,
    ) -> PyResult<Self> {
        let _ = py;
        let mut p = self.inner;
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                let value: f64 = v.extract()?;
                match key.as_str() {
                    "a" => p.a = value,
                    "b" => p.b = value,
                    "c" => p.c = value,
                    "d" => p.d = value,
                    "eps" => p.eps = value,
                    "g" => p.g = value,
                    "mu_w" => p.mu_w = value,
                    "var_w" => p.var_w = value,
                    "var_x" => p.var_x = value,
                    "var_m" => p.var_m = value,
                    "var_y" => p.var_y = value,
                    "var_v" => p.var_v = value,
                    other => return Err(PyValueError::new_err(format!("unknown field '{other}'"))),
                }
            }
        }
        p.validate().map_err(err)?;
        Ok(PyModelParams { inner: p })
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ModelParams(a={}, b={}, c={}, d={}, eps={}, g={}, mu_w={}, var_w={}, var_x={}, var_m={}, var_y={}, var_v={})",
            p.a, p.b, p.c, p.d, p.eps, p.g, p.mu_w, p.var_w, p.var_x, p.var_m, p.var_y, p.var_v
        )
    }
}

/// Column-major sample table.
#[pyclass(name = "Dataset", module = "cmm_py", skip_from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: model::Dataset,
}

#[pymethods]
impl PyDataset {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }
    #[getter]
    fn w(&self) -> Vec<f64> {
        self.inner.w.clone()
    }
    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x.clone()
    }
    #[getter]
    fn m(&self) -> Vec<f64> {
        self.inner.m.clone()
    }
    #[getter]
    fn y(&self) -> Vec<f64> {
        self.inner.y.clone()
    }
    #[getter]
    fn v(&self) -> Option<Vec<f64>> {
        self.inner.v.clone()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n={}, prior_instrument={})",
            self.inner.n,
            self.inner.v.is_some()
        )
    }
}

/// A point estimate with diagnostics.
#[pyclass(name = "Estimate", module = "cmm_py", skip_from_py_object)]
#[derive(Clone)]
struct PyEstimate {
    #[pyo3(get)]
    estimator: String,
    #[pyo3(get)]
    value: f64,
    #[pyo3(get)]
    denom: f64,
    #[pyo3(get)]
    near_pole: bool,
    #[pyo3(get)]
    aux: BTreeMap<String, f64>,
}

impl From<estimators::EstimateResult> for PyEstimate {
    fn from(r: estimators::EstimateResult) -> Self {
        PyEstimate {
            estimator: r.estimator.to_string(),
            value: r.value,
            denom: r.denom,
            near_pole: r.near_pole,
            aux: r.aux,
        }
    }
}

#[pymethods]
impl PyEstimate {
    fn __repr__(&self) -> String {
        format!(
            "Estimate({}={}, near_pole={})",
            self.estimator, self.value, self.near_pole
        )
    }
}

/// Real covariate columns, raw and normalized.
#[pyclass(name = "Cohort", module = "cmm_py", skip_from_py_object)]
#[derive(Clone)]
struct PyCohort {
    inner: ingest::CohortTable,
}

#[pymethods]
impl PyCohort {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }
    #[getter]
    fn dropped(&self) -> usize {
        self.inner.dropped
    }
    #[getter]
    fn w(&self) -> Vec<f64> {
        self.inner.w.clone()
    }
    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x.clone()
    }
    #[getter]
    fn w_raw(&self) -> Vec<f64> {
        self.inner.w_raw.clone()
    }
    #[getter]
    fn x_raw(&self) -> Vec<f64> {
        self.inner.x_raw.clone()
    }

    fn __repr__(&self) -> String {
        format!("Cohort(n={}, dropped={})", self.inner.n, self.inner.dropped)
    }
}

/// One grid summary row.
#[pyclass(name = "GridRow", module = "cmm_py", skip_from_py_object)]
#[derive(Clone)]
struct PyGridRow {
    #[pyo3(get)]
    estimator: String,
    #[pyo3(get)]
    axis1_name: String,
    #[pyo3(get)]
    axis1_value: f64,
    #[pyo3(get)]
    axis2_name: Option<String>,
    #[pyo3(get)]
    axis2_value: Option<f64>,
    #[pyo3(get)]
    mean: f64,
    #[pyo3(get)]
    bias: f64,
    #[pyo3(get)]
    variance: f64,
    #[pyo3(get)]
    near_pole_frac: f64,
    #[pyo3(get)]
    n_samples: usize,
    #[pyo3(get)]
    n_runs: usize,
    #[pyo3(get)]
    seed: u64,
    #[pyo3(get)]
    failed: bool,
}

impl From<grid::GridRow> for PyGridRow {
    fn from(r: grid::GridRow) -> Self {
        PyGridRow {
            estimator: r.estimator.to_string(),
            axis1_name: r.axis1_name,
            axis1_value: r.axis1_value,
            axis2_name: r.axis2_name,
            axis2_value: r.axis2_value,
            mean: r.mean,
            bias: r.bias,
            variance: r.variance,
            near_pole_frac: r.near_pole_frac,
            n_samples: r.n_samples,
            n_runs: r.n_runs,
            seed: r.seed,
            failed: r.failed,
        }
    }
}

#[pymethods]
impl PyGridRow {
    fn __repr__(&self) -> String {
        format!(
            "GridRow({} @ {}={}, bias={})",
            self.estimator, self.axis1_name, self.axis1_value, self.bias
        )
    }
}

#[pyfunction]
#[pyo3(signature = (params, n, seed, retain_noise=false))]
fn sample_linear_cmm(
    params: &PyModelParams,
    n: usize,
    seed: u64,
    retain_noise: bool,
) -> PyResult<PyDataset> {
    model::sample_linear_cmm_opts(&params.inner, n, seed, retain_noise)
        .map(|inner| PyDataset { inner })
        .map_err(err)
}

#[pyfunction]
fn sample_partial_cmm(
    params: &PyModelParams,
    d_poly: Vec<f64>,
    eps_poly: Vec<f64>,
    n: usize,
    seed: u64,
) -> PyResult<PyDataset> {
    let d_poly = model::PolyCoeffs::new(d_poly).map_err(err)?;
    let eps_poly = model::PolyCoeffs::new(eps_poly).map_err(err)?;
    model::sample_partial_cmm(&params.inner, &d_poly, &eps_poly, n, seed)
        .map(|inner| PyDataset { inner })
        .map_err(err)
}

#[pyfunction]
fn population_covariance(params: &PyModelParams) -> PyResult<PyFamily> {
    let fam = model::population_covariance(&params.inner).map_err(err)?;
    let k = fam.dim();
    let cov = (0..k)
        .map(|i| (0..k).map(|j| fam.cov[(i, j)]).collect())
        .collect();
    Ok((fam.labels.clone(), fam.mean.iter().copied().collect(), cov))
}

#[pyfunction]
fn dot(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    regress::dot(&u, &v).map_err(err)
}

#[pyfunction]
fn ols_slope(y: Vec<f64>, x: Vec<f64>) -> PyResult<f64> {
    regress::ols_slope(&y, &x).map_err(err)
}

#[pyfunction]
fn residual(y: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<f64>> {
    regress::residual(&y, &x).map(|r| r.values).map_err(err)
}

#[pyfunction]
fn ratio_eps_over_d(m: Vec<f64>, x: Vec<f64>, c: f64) -> PyResult<f64> {
    regress::ratio_eps_over_d(&m, &x, c).map_err(err)
}

#[pyfunction]
fn poly_regress(r: Vec<f64>, x: Vec<f64>, order: usize) -> PyResult<Vec<f64>> {
    regress::poly_regress(&r, &x, order)
        .map(|p| p.coeffs().to_vec())
        .map_err(err)
}

#[pyfunction]
fn ols_c(x: Vec<f64>, m: Vec<f64>) -> PyResult<PyEstimate> {
    estimators::ols_c(&x, &m).map(Into::into).map_err(err)
}

#[pyfunction]
fn fdc(x: Vec<f64>, m: Vec<f64>, y: Vec<f64>) -> PyResult<PyEstimate> {
    estimators::fdc(&x, &m, &y).map(Into::into).map_err(err)
}

#[pyfunction]
fn ifdc(x: Vec<f64>, m: Vec<f64>, y: Vec<f64>) -> PyResult<PyEstimate> {
    estimators::ifdc(&x, &m, &y).map(Into::into).map_err(err)
}

#[pyfunction]
fn improved_ifdc(x: Vec<f64>, m: Vec<f64>, y: Vec<f64>, c: f64) -> PyResult<PyEstimate> {
    estimators::improved_ifdc(&x, &m, &y, c)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn improved_ifdc_with_ratio(
    x: Vec<f64>,
    m: Vec<f64>,
    y: Vec<f64>,
    c: f64,
    ratio: f64,
) -> PyResult<PyEstimate> {
    estimators::improved_ifdc_with_ratio(&x, &m, &y, c, ratio)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn improved_ifdc_prior(v: Vec<f64>, x: Vec<f64>, m: Vec<f64>, y: Vec<f64>) -> PyResult<PyEstimate> {
    estimators::improved_ifdc_prior(&v, &x, &m, &y)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (x, m, y, c, order, intercept=false))]
fn improved_ifdc_nonlinear(
    x: Vec<f64>,
    m: Vec<f64>,
    y: Vec<f64>,
    c: f64,
    order: usize,
    intercept: bool,
) -> PyResult<PyEstimate> {
    estimators::improved_ifdc_nonlinear_opts(&x, &m, &y, c, order, intercept)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn invert_series(d: Vec<f64>, order: usize) -> PyResult<Vec<f64>> {
    let d = series::Series::new(d).map_err(err)?;
    series::invert_series(&d, order)
        .map(|s| s.coeffs().to_vec())
        .map_err(err)
}

#[pyfunction]
fn compose_series(outer: Vec<f64>, inner: Vec<f64>, order: usize) -> PyResult<Vec<f64>> {
    let outer = series::Series::new(outer).map_err(err)?;
    let inner = series::Series::new(inner).map_err(err)?;
    Ok(series::compose_series(&outer, &inner, order)
        .coeffs()
        .to_vec())
}

#[pyfunction]
fn eps_over_d_series(eps: Vec<f64>, d: Vec<f64>, order: usize) -> PyResult<Vec<f64>> {
    let eps = series::Series::new(eps).map_err(err)?;
    let d = series::Series::new(d).map_err(err)?;
    series::eps_over_d_series(&eps, &d, order)
        .map(|s| s.coeffs().to_vec())
        .map_err(err)
}

#[pyfunction]
fn check_invertible_cubic(d1: f64, d2: f64, d3: f64) -> (bool, String) {
    let w = series::check_invertible_cubic(d1, d2, d3);
    (w.invertible, w.witness)
}

#[pyfunction]
fn bias_ols_c(params: &PyModelParams) -> PyResult<f64> {
    analytic::bias_ols_c(&params.inner).map_err(err)
}

#[pyfunction]
fn bias_ifdc(params: &PyModelParams) -> PyResult<f64> {
    analytic::bias_ifdc(&params.inner).map_err(err)
}

#[pyfunction]
fn improved_expectations(params: &PyModelParams, c: f64) -> PyResult<(f64, f64)> {
    analytic::improved_expectations(&params.inner, c).map_err(err)
}

#[pyfunction]
fn pole_location(c: f64, g: f64) -> PyResult<f64> {
    analytic::pole_location(c, g).map_err(err)
}

#[pyfunction]
fn var_fdc(params: &PyModelParams) -> PyResult<f64> {
    analytic::var_fdc(&params.inner).map_err(err)
}

#[pyfunction]
fn var_c(params: &PyModelParams) -> PyResult<f64> {
    analytic::var_c(&params.inner).map_err(err)
}

#[pyfunction]
fn var_total(params: &PyModelParams) -> PyResult<f64> {
    analytic::var_total(&params.inner).map_err(err)
}

#[pyfunction]
fn var_improved(params: &PyModelParams, c: f64) -> PyResult<f64> {
    analytic::var_improved(&params.inner, c).map_err(err)
}

#[pyfunction]
fn bias_rv_naive(params: &PyModelParams, c: f64) -> PyResult<f64> {
    analytic::bias_rv_naive(&params.inner, c).map_err(err)
}

#[pyfunction]
fn bias_cubic_d(d2: f64, d3: f64) -> PyResult<f64> {
    analytic::bias_cubic_d(d2, d3).map_err(err)
}

#[pyfunction]
fn bias_cubic_eps(e2: f64, e3: f64) -> PyResult<f64> {
    analytic::bias_cubic_eps(e2, e3).map_err(err)
}

fn family_from_py(
    labels: Vec<String>,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
) -> PyResult<analytic::GaussianFamily> {
    let k = labels.len();
    let mut flat = Vec::with_capacity(k * k);
    for row in &cov {
        if row.len() != k {
            return Err(PyValueError::new_err("covariance must be square"));
        }
        flat.extend_from_slice(row);
    }
    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    analytic::GaussianFamily::from_rows(label_refs, mean, flat).map_err(err)
}

#[pyfunction]
fn condition_gaussian(
    labels: Vec<String>,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
    keep: Vec<usize>,
    given: Vec<usize>,
    values: Vec<f64>,
) -> PyResult<PyFamily> {
    let fam = family_from_py(labels, mean, cov)?;
    let cond = analytic::condition_gaussian(&fam, &keep, &given, &values).map_err(err)?;
    let k = cond.dim();
    let cov_out = (0..k)
        .map(|i| (0..k).map(|j| cond.cov[(i, j)]).collect())
        .collect();
    Ok((
        cond.labels.clone(),
        cond.mean.iter().copied().collect(),
        cov_out,
    ))
}

#[pyfunction]
fn isserlis_moment(cov: Vec<Vec<f64>>, indices: Vec<usize>) -> PyResult<f64> {
    let k = cov.len();
    let mut flat = Vec::with_capacity(k * k);
    for row in &cov {
        if row.len() != k {
            return Err(PyValueError::new_err("covariance must be square"));
        }
        flat.extend_from_slice(row);
    }
    if indices.iter().any(|&i| i >= k) {
        return Err(PyValueError::new_err("moment index out of range"));
    }
    let m = nalgebra_matrix(k, &flat);
    Ok(analytic::isserlis_moment(&m, &indices))
}

fn nalgebra_matrix(k: usize, flat: &[f64]) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(k, k, flat)
}

#[pyfunction]
#[pyo3(signature = (path, age_col="AGE", x_col="RSBP", delimiter=","))]
fn load_cohort_csv(path: &str, age_col: &str, x_col: &str, delimiter: &str) -> PyResult<PyCohort> {
    let delim = delimiter.as_bytes().first().copied().unwrap_or(b',');
    ingest::load_cohort_csv_opts(path, age_col, x_col, delim)
        .map(|inner| PyCohort { inner })
        .map_err(err)
}

#[pyfunction]
fn load_fixture_cohort() -> PyResult<PyCohort> {
    ingest::load_fixture_cohort()
        .map(|inner| PyCohort { inner })
        .map_err(err)
}

#[pyfunction]
fn gen_semi_synthetic(cohort: &PyCohort, params: &PyModelParams, seed: u64) -> PyResult<PyDataset> {
    ingest::gen_semi_synthetic(&cohort.inner, &params.inner, seed)
        .map(|inner| PyDataset { inner })
        .map_err(err)
}

#[allow(clippy::too_many_arguments)]
fn build_grid_spec(
    params: &PyModelParams,
    axis1_name: &str,
    axis1_values: Vec<f64>,
    axis2_name: Option<&str>,
    axis2_values: Option<Vec<f64>>,
    n_samples: usize,
    n_runs: usize,
    base_seed: u64,
    c_hat: Option<f64>,
) -> PyResult<grid::GridSpec> {
    let axis2 = match (axis2_name, axis2_values) {
        (Some(name), Some(values)) => Some(grid::GridAxis::new(name, values)),
        (None, None) => None,
        _ => {
            return Err(PyValueError::new_err(
                "axis2_name and axis2_values must be given together",
            ))
        }
    };
    Ok(grid::GridSpec {
        base: params.inner,
        axis1: grid::GridAxis::new(axis1_name, axis1_values),
        axis2,
        n_samples,
        n_runs,
        base_seed,
        c_hat,
    })
}

fn parse_estimators(names: Vec<String>) -> PyResult<Vec<estimators::EstimatorId>> {
    names
        .iter()
        .map(|n| estimators::EstimatorId::parse(n).map_err(err))
        .collect()
}

fn parallelism(parallel: bool) -> grid::Parallelism {
    if parallel {
        grid::Parallelism::Rayon
    } else {
        grid::Parallelism::Serial
    }
}

#[pyfunction]
#[pyo3(signature = (params, axis1_name, axis1_values, estimators, n_samples=10_000,
                    n_runs=100, base_seed=42, axis2_name=None, axis2_values=None,
                    c_hat=None, parallel=true))]
#[allow(clippy::too_many_arguments)]
fn run_grid_linear(
    params: &PyModelParams,
    axis1_name: &str,
    axis1_values: Vec<f64>,
    estimators: Vec<String>,
    n_samples: usize,
    n_runs: usize,
    base_seed: u64,
    axis2_name: Option<&str>,
    axis2_values: Option<Vec<f64>>,
    c_hat: Option<f64>,
    parallel: bool,
) -> PyResult<Vec<PyGridRow>> {
    let spec = build_grid_spec(
        params,
        axis1_name,
        axis1_values,
        axis2_name,
        axis2_values,
        n_samples,
        n_runs,
        base_seed,
        c_hat,
    )?;
    let ests = parse_estimators(estimators)?;
    grid::run_grid_linear(&spec, &ests, parallelism(parallel))
        .map(|rows| rows.into_iter().map(Into::into).collect())
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (params, d_poly, eps_poly, axis1_name, axis1_values, estimators,
                    n_samples=1_000, n_runs=100, base_seed=42, axis2_name=None,
                    axis2_values=None, order=None, intercept=false, c_hat=None,
                    parallel=true))]
#[allow(clippy::too_many_arguments)]
fn run_grid_nonlinear(
    params: &PyModelParams,
    d_poly: Vec<f64>,
    eps_poly: Vec<f64>,
    axis1_name: &str,
    axis1_values: Vec<f64>,
    estimators: Vec<String>,
    n_samples: usize,
    n_runs: usize,
    base_seed: u64,
    axis2_name: Option<&str>,
    axis2_values: Option<Vec<f64>>,
    order: Option<usize>,
    intercept: bool,
    c_hat: Option<f64>,
    parallel: bool,
) -> PyResult<Vec<PyGridRow>> {
    let nspec = grid::NonlinearGridSpec {
        grid: build_grid_spec(
            params,
            axis1_name,
            axis1_values,
            axis2_name,
            axis2_values,
            n_samples,
            n_runs,
            base_seed,
            c_hat,
        )?,
        d_poly: model::PolyCoeffs::new(d_poly).map_err(err)?,
        eps_poly: model::PolyCoeffs::new(eps_poly).map_err(err)?,
        order,
        intercept,
    };
    let ests = parse_estimators(estimators)?;
    grid::run_grid_nonlinear(&nspec, &ests, parallelism(parallel))
        .map(|rows| rows.into_iter().map(Into::into).collect())
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (cohort, params, axis1_name, axis1_values, estimators, n_runs=200,
                    base_seed=42, axis2_name=None, axis2_values=None, c_hat=None,
                    parallel=true))]
#[allow(clippy::too_many_arguments)]
fn run_grid_ist(
    cohort: &PyCohort,
    params: &PyModelParams,
    axis1_name: &str,
    axis1_values: Vec<f64>,
    estimators: Vec<String>,
    n_runs: usize,
    base_seed: u64,
    axis2_name: Option<&str>,
    axis2_values: Option<Vec<f64>>,
    c_hat: Option<f64>,
    parallel: bool,
) -> PyResult<Vec<PyGridRow>> {
    let spec = build_grid_spec(
        params,
        axis1_name,
        axis1_values,
        axis2_name,
        axis2_values,
        cohort.inner.n,
        n_runs,
        base_seed,
        c_hat,
    )?;
    let ests = parse_estimators(estimators)?;
    grid::run_ist(&cohort.inner, &spec, &ests, parallelism(parallel))
        .map(|rows| rows.into_iter().map(Into::into).collect())
        .map_err(err)
}

#[pymodule]
fn cmm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyEstimate>()?;
    m.add_class::<PyCohort>()?;
    m.add_class::<PyGridRow>()?;
    m.add_function(wrap_pyfunction!(sample_linear_cmm, m)?)?;
    m.add_function(wrap_pyfunction!(sample_partial_cmm, m)?)?;
    m.add_function(wrap_pyfunction!(population_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(dot, m)?)?;
    m.add_function(wrap_pyfunction!(ols_slope, m)?)?;
    m.add_function(wrap_pyfunction!(residual, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_eps_over_d, m)?)?;
    m.add_function(wrap_pyfunction!(poly_regress, m)?)?;
    m.add_function(wrap_pyfunction!(ols_c, m)?)?;
    m.add_function(wrap_pyfunction!(fdc, m)?)?;
    m.add_function(wrap_pyfunction!(ifdc, m)?)?;
    m.add_function(wrap_pyfunction!(improved_ifdc, m)?)?;
    m.add_function(wrap_pyfunction!(improved_ifdc_with_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(improved_ifdc_prior, m)?)?;
    m.add_function(wrap_pyfunction!(improved_ifdc_nonlinear, m)?)?;
    m.add_function(wrap_pyfunction!(invert_series, m)?)?;
    m.add_function(wrap_pyfunction!(compose_series, m)?)?;
    m.add_function(wrap_pyfunction!(eps_over_d_series, m)?)?;
    m.add_function(wrap_pyfunction!(check_invertible_cubic, m)?)?;
    m.add_function(wrap_pyfunction!(bias_ols_c, m)?)?;
    m.add_function(wrap_pyfunction!(bias_ifdc, m)?)?;
    m.add_function(wrap_pyfunction!(improved_expectations, m)?)?;
    m.add_function(wrap_pyfunction!(pole_location, m)?)?;
    m.add_function(wrap_pyfunction!(var_fdc, m)?)?;
    m.add_function(wrap_pyfunction!(var_c, m)?)?;
    m.add_function(wrap_pyfunction!(var_total, m)?)?;
    m.add_function(wrap_pyfunction!(var_improved, m)?)?;
    m.add_function(wrap_pyfunction!(bias_rv_naive, m)?)?;
    m.add_function(wrap_pyfunction!(bias_cubic_d, m)?)?;
    m.add_function(wrap_pyfunction!(bias_cubic_eps, m)?)?;
    m.add_function(wrap_pyfunction!(condition_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(isserlis_moment, m)?)?;
    m.add_function(wrap_pyfunction!(load_cohort_csv, m)?)?;
    m.add_function(wrap_pyfunction!(load_fixture_cohort, m)?)?;
    m.add_function(wrap_pyfunction!(gen_semi_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(run_grid_linear, m)?)?;
    m.add_function(wrap_pyfunction!(run_grid_nonlinear, m)?)?;
    m.add_function(wrap_pyfunction!(run_grid_ist, m)?)?;
    Ok(())
}
