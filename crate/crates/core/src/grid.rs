//! Seeded Monte-Carlo grid experiments and their CSV summaries.
//!
//! A grid is up to two axes of parameter values over a fixed baseline. Every
//! cell derives its seed from a stable hash of the base seed and the axis
//! indices, and every run within a cell from the cell seed and the run
//! index, so results are independent of evaluation order and grids can be
//! extended without perturbing existing cells. Cells may run in parallel;
//! output row order is fixed by cell index, which makes serial and parallel
//! execution byte-identical.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{self, EstimateResult, EstimatorId};
use crate::ingest::{gen_semi_synthetic, CohortTable};
use crate::model::{sample_linear_cmm, sample_partial_cmm, Dataset, ModelParams, PolyCoeffs};

/// Execution strategy for grid runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Serial,
    Rayon,
}

/// One grid axis: a parameter name and the values it sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl GridAxis {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        GridAxis {
            name: name.into(),
            values,
        }
    }

    /// Inclusive linspace with `count` points.
    pub fn linspace(name: impl Into<String>, start: f64, stop: f64, count: usize) -> Self {
        let values = if count <= 1 {
            vec![start]
        } else {
            (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect()
        };
        GridAxis {
            name: name.into(),
            values,
        }
    }
}

/// Grid experiment specification.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub base: ModelParams,
    pub axis1: GridAxis,
    pub axis2: Option<GridAxis>,
    pub n_samples: usize,
    pub n_runs: usize,
    pub base_seed: u64,
    /// Mediator-effect value handed to the improved estimators; defaults to
    /// the cell's true c (the synthetic stand-in for an experimental
    /// estimate).
    pub c_hat: Option<f64>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.n_runs < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_runs = {} (variance needs at least 2)",
                self.n_runs
            )));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_samples = {}",
                self.n_samples
            )));
        }
        for axis in std::iter::once(&self.axis1).chain(self.axis2.as_ref()) {
            if axis.values.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "axis '{}' has no values",
                    axis.name
                )));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "axis '{}' has a non-finite value",
                    axis.name
                )));
            }
        }
        Ok(())
    }
}

/// Nonlinear grid: adds baseline polynomial couplings and the regression
/// order of the nonlinear estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearGridSpec {
    pub grid: GridSpec,
    pub d_poly: PolyCoeffs,
    pub eps_poly: PolyCoeffs,
    /// Polynomial regression order; defaults to the larger coupling degree.
    pub order: Option<usize>,
    /// Fit an intercept in the coefficient regression.
    pub intercept: bool,
}

/// Per-cell, per-estimator summary row.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub estimator: EstimatorId,
    pub axis1_name: String,
    pub axis1_value: f64,
    pub axis2_name: Option<String>,
    pub axis2_value: Option<f64>,
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub near_pole_frac: f64,
    pub n_samples: usize,
    pub n_runs: usize,
    pub seed: u64,
    /// All runs failed (or the cell was skipped); statistics are NaN.
    pub failed: bool,
}

/// Outcome of one estimator application in one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunOutcome {
    Estimate { value: f64, near_pole: bool },
    Failed,
}

impl From<Result<EstimateResult>> for RunOutcome {
    fn from(r: Result<EstimateResult>) -> Self {
        match r {
            Ok(e) if e.value.is_finite() => RunOutcome::Estimate {
                value: e.value,
                near_pole: e.near_pole,
            },
            _ => RunOutcome::Failed,
        }
    }
}

/// Mean, bias, unbiased variance and exclusion fraction over the usable
/// runs of a cell. Near-pole and failed runs are excluded from the mean and
/// variance but counted in `near_pole_frac`.
pub struct CellStats {
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub near_pole_frac: f64,
    pub failed: bool,
}

pub fn summarize(outcomes: &[RunOutcome], true_a: f64) -> CellStats {
    let total = outcomes.len();
    let usable: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| match o {
            RunOutcome::Estimate {
                value,
                near_pole: false,
            } => Some(*value),
            _ => None,
        })
        .collect();
    let excluded = total - usable.len();
    let near_pole_frac = if total == 0 {
        f64::NAN
    } else {
        excluded as f64 / total as f64
    };
    if usable.len() < 2 {
        return CellStats {
            mean: f64::NAN,
            bias: f64::NAN,
            variance: f64::NAN,
            near_pole_frac,
            failed: true,
        };
    }
    let k = usable.len() as f64;
    let mean = usable.iter().sum::<f64>() / k;
    let variance = usable.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    CellStats {
        mean,
        bias: mean - true_a,
        variance,
        near_pole_frac,
        failed: false,
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Stable cell seed from the base seed and axis indices.
pub fn cell_seed(base_seed: u64, i: usize, j: usize) -> u64 {
    let s = splitmix64(base_seed);
    let s = splitmix64(s ^ (i as u64).wrapping_mul(0xA24BAED4963EE407));
    splitmix64(s ^ (j as u64).wrapping_mul(0x9FB21C651E98DF25))
}

/// Stable per-run seed within a cell.
pub fn run_seed(cell_seed: u64, run: usize) -> u64 {
    splitmix64(cell_seed ^ (run as u64).wrapping_mul(0xD6E8FEB86659FD93))
}

/// Mutable view of one cell's configuration while axes are applied.
struct CellConfig {
    params: ModelParams,
    d_poly: Option<PolyCoeffs>,
    eps_poly: Option<PolyCoeffs>,
}

impl CellConfig {
    fn apply_axis(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "a" => self.params.a = value,
            "b" => self.params.b = value,
            "c" => self.params.c = value,
            "d" => self.params.d = value,
            "eps" => self.params.eps = value,
            "g" => self.params.g = value,
            "mu_w" => self.params.mu_w = value,
            "var_w" => self.params.var_w = value,
            "var_x" => self.params.var_x = value,
            "var_m" => self.params.var_m = value,
            "var_y" => self.params.var_y = value,
            "var_v" => self.params.var_v = value,
            "sigma2" => {
                self.params.var_w = value;
                self.params.var_x = value;
                self.params.var_m = value;
                self.params.var_y = value;
                self.params.var_v = value;
            }
            "d1" | "d2" | "d3" => {
                let k = name[1..].parse::<usize>().unwrap();
                set_poly_coeff(&mut self.d_poly, k, value, "d_poly")?;
            }
            "e1" | "e2" | "e3" => {
                let k = name[1..].parse::<usize>().unwrap();
                set_poly_coeff(&mut self.eps_poly, k, value, "eps_poly")?;
            }
            other => {
                return Err(Error::InvalidConfig(format!("unknown grid axis '{other}'")));
            }
        }
        Ok(())
    }
}

fn set_poly_coeff(poly: &mut Option<PolyCoeffs>, k: usize, value: f64, which: &str) -> Result<()> {
    let current = poly
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("axis over {which} requires a {which}")))?;
    let mut coeffs = current.coeffs().to_vec();
    if coeffs.len() < k {
        coeffs.resize(k, 0.0);
    }
    coeffs[k - 1] = value;
    *poly = Some(PolyCoeffs::new(coeffs)?);
    Ok(())
}

fn apply_estimator(
    est: EstimatorId,
    ds: &Dataset,
    c_for_improved: f64,
    order: usize,
    intercept: bool,
) -> Result<EstimateResult> {
    match est {
        EstimatorId::OlsC => estimators::ols_c(&ds.x, &ds.m),
        EstimatorId::Fdc => estimators::fdc(&ds.x, &ds.m, &ds.y),
        EstimatorId::Ifdc => estimators::ifdc(&ds.x, &ds.m, &ds.y),
        EstimatorId::Improved => estimators::improved_ifdc(&ds.x, &ds.m, &ds.y, c_for_improved),
        EstimatorId::ImprovedPrior => {
            let v = ds.v.as_ref().ok_or(Error::InvalidParameter(
                "dataset has no prior-instrument column".into(),
            ))?;
            estimators::improved_ifdc_prior(v, &ds.x, &ds.m, &ds.y)
        }
        EstimatorId::ImprovedNonlinear => estimators::improved_ifdc_nonlinear_opts(
            &ds.x,
            &ds.m,
            &ds.y,
            c_for_improved,
            order,
            intercept,
        ),
    }
}

/// The (i, j, axis values) enumeration shared by all grid runners.
fn cells(spec: &GridSpec) -> Vec<(usize, usize, f64, Option<f64>)> {
    let mut out = Vec::new();
    for (i, &a1) in spec.axis1.values.iter().enumerate() {
        match &spec.axis2 {
            Some(axis2) => {
                for (j, &a2) in axis2.values.iter().enumerate() {
                    out.push((i, j, a1, Some(a2)));
                }
            }
            None => out.push((i, 0, a1, None)),
        }
    }
    out
}

fn run_cells<F>(
    spec: &GridSpec,
    estimators: &[EstimatorId],
    parallelism: Parallelism,
    per_cell: F,
) -> Result<Vec<GridRow>>
where
    F: Fn(usize, usize, f64, Option<f64>) -> Result<Vec<GridRow>> + Sync,
{
    spec.validate()?;
    if estimators.is_empty() {
        return Err(Error::InvalidConfig("no estimators requested".into()));
    }
    let cell_list = cells(spec);
    let nested: Result<Vec<Vec<GridRow>>> = match parallelism {
        Parallelism::Serial => cell_list
            .iter()
            .map(|&(i, j, a1, a2)| per_cell(i, j, a1, a2))
            .collect(),
        Parallelism::Rayon => cell_list
            .par_iter()
            .map(|&(i, j, a1, a2)| per_cell(i, j, a1, a2))
            .collect(),
    };
    Ok(nested?.into_iter().flatten().collect())
}

fn summarize_cell(
    spec: &GridSpec,
    estimators: &[EstimatorId],
    cell: (usize, usize, f64, Option<f64>),
    true_a: f64,
    outcomes: &[Vec<RunOutcome>],
) -> Vec<GridRow> {
    let (i, j, a1, a2) = cell;
    let seed = cell_seed(spec.base_seed, i, j);
    estimators
        .iter()
        .zip(outcomes)
        .map(|(&est, runs)| {
            let stats = summarize(runs, true_a);
            GridRow {
                estimator: est,
                axis1_name: spec.axis1.name.clone(),
                axis1_value: a1,
                axis2_name: spec.axis2.as_ref().map(|a| a.name.clone()),
                axis2_value: a2,
                mean: stats.mean,
                bias: stats.bias,
                variance: stats.variance,
                near_pole_frac: stats.near_pole_frac,
                n_samples: spec.n_samples,
                n_runs: spec.n_runs,
                seed,
                failed: stats.failed,
            }
        })
        .collect()
}

/// Run a linear-model grid experiment.
pub fn run_grid_linear(
    spec: &GridSpec,
    estimators: &[EstimatorId],
    parallelism: Parallelism,
) -> Result<Vec<GridRow>> {
    if estimators.contains(&EstimatorId::ImprovedNonlinear) {
        return Err(Error::InvalidConfig(
            "improved_nonlinear requires the nonlinear grid runner".into(),
        ));
    }
    run_cells(spec, estimators, parallelism, |i, j, a1, a2| {
        let mut cfg = CellConfig {
            params: spec.base,
            d_poly: None,
            eps_poly: None,
        };
        cfg.apply_axis(&spec.axis1.name, a1)?;
        if let (Some(axis2), Some(v2)) = (&spec.axis2, a2) {
            cfg.apply_axis(&axis2.name, v2)?;
        }
        let c_hat = spec.c_hat.unwrap_or(cfg.params.c);
        let cs = cell_seed(spec.base_seed, i, j);
        let mut outcomes: Vec<Vec<RunOutcome>> =
            vec![Vec::with_capacity(spec.n_runs); estimators.len()];
        for r in 0..spec.n_runs {
            let ds = sample_linear_cmm(&cfg.params, spec.n_samples, run_seed(cs, r))?;
            for (k, &est) in estimators.iter().enumerate() {
                outcomes[k].push(apply_estimator(est, &ds, c_hat, 1, false).into());
            }
        }
        Ok(summarize_cell(
            spec,
            estimators,
            (i, j, a1, a2),
            cfg.params.a,
            &outcomes,
        ))
    })
}

/// Run a partially-linear grid experiment over polynomial coefficients.
///
/// Cells whose treatment coupling fails the invertibility check are emitted
/// as failed rows (NaN statistics) rather than aborting the grid.
pub fn run_grid_nonlinear(
    nspec: &NonlinearGridSpec,
    estimators: &[EstimatorId],
    parallelism: Parallelism,
) -> Result<Vec<GridRow>> {
    let spec = &nspec.grid;
    if estimators.contains(&EstimatorId::ImprovedPrior) {
        return Err(Error::InvalidConfig(
            "improved_prior is not available in the partial linear model".into(),
        ));
    }
    run_cells(spec, estimators, parallelism, |i, j, a1, a2| {
        let mut cfg = CellConfig {
            params: spec.base,
            d_poly: Some(nspec.d_poly.clone()),
            eps_poly: Some(nspec.eps_poly.clone()),
        };
        cfg.apply_axis(&spec.axis1.name, a1)?;
        if let (Some(axis2), Some(v2)) = (&spec.axis2, a2) {
            cfg.apply_axis(&axis2.name, v2)?;
        }
        let d_poly = cfg.d_poly.clone().unwrap();
        let eps_poly = cfg.eps_poly.clone().unwrap();
        let order = nspec
            .order
            .unwrap_or_else(|| d_poly.degree().max(eps_poly.degree()));
        let c_hat = spec.c_hat.unwrap_or(cfg.params.c);
        let cs = cell_seed(spec.base_seed, i, j);

        if d_poly
            .check_invertible(cfg.params.mu_w, cfg.params.var_w)
            .is_err()
        {
            // skipped cell: flag every estimator row as failed
            let outcomes: Vec<Vec<RunOutcome>> =
                vec![vec![RunOutcome::Failed; spec.n_runs]; estimators.len()];
            return Ok(summarize_cell(
                spec,
                estimators,
                (i, j, a1, a2),
                cfg.params.a,
                &outcomes,
            ));
        }

        let mut outcomes: Vec<Vec<RunOutcome>> =
            vec![Vec::with_capacity(spec.n_runs); estimators.len()];
        for r in 0..spec.n_runs {
            let ds = sample_partial_cmm(
                &cfg.params,
                &d_poly,
                &eps_poly,
                spec.n_samples,
                run_seed(cs, r),
            )?;
            for (k, &est) in estimators.iter().enumerate() {
                outcomes[k].push(apply_estimator(est, &ds, c_hat, order, nspec.intercept).into());
            }
        }
        Ok(summarize_cell(
            spec,
            estimators,
            (i, j, a1, a2),
            cfg.params.a,
            &outcomes,
        ))
    })
}

/// Run a semi-synthetic grid over a fixed cohort: the real covariate
/// columns are reused in every run, only the mediator and outcome noises
/// are redrawn.
pub fn run_ist(
    cohort: &CohortTable,
    spec: &GridSpec,
    estimators: &[EstimatorId],
    parallelism: Parallelism,
) -> Result<Vec<GridRow>> {
    if estimators.iter().any(|e| {
        matches!(
            e,
            EstimatorId::ImprovedPrior | EstimatorId::ImprovedNonlinear
        )
    }) {
        return Err(Error::InvalidConfig(
            "semi-synthetic grids support ols_c, fdc, ifdc and improved".into(),
        ));
    }
    run_cells(spec, estimators, parallelism, |i, j, a1, a2| {
        let mut cfg = CellConfig {
            params: spec.base,
            d_poly: None,
            eps_poly: None,
        };
        cfg.apply_axis(&spec.axis1.name, a1)?;
        if let (Some(axis2), Some(v2)) = (&spec.axis2, a2) {
            cfg.apply_axis(&axis2.name, v2)?;
        }
        let c_hat = spec.c_hat.unwrap_or(cfg.params.c);
        let cs = cell_seed(spec.base_seed, i, j);
        let mut outcomes: Vec<Vec<RunOutcome>> =
            vec![Vec::with_capacity(spec.n_runs); estimators.len()];
        for r in 0..spec.n_runs {
            let ds = gen_semi_synthetic(cohort, &cfg.params, run_seed(cs, r))?;
            for (k, &est) in estimators.iter().enumerate() {
                outcomes[k].push(apply_estimator(est, &ds, c_hat, 1, false).into());
            }
        }
        Ok(summarize_cell(
            spec,
            estimators,
            (i, j, a1, a2),
            cfg.params.a,
            &outcomes,
        ))
    })
}

/// Render rows as CSV with the fixed column order
/// `estimator,axis1_name,axis1_value,axis2_name,axis2_value,mean,bias,variance,near_pole_frac,n_samples,n_runs,seed`.
pub fn render_csv(rows: &[GridRow]) -> String {
    let mut out = String::from(
        "estimator,axis1_name,axis1_value,axis2_name,axis2_value,mean,bias,variance,near_pole_frac,n_samples,n_runs,seed\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.estimator,
            row.axis1_name,
            row.axis1_value,
            row.axis2_name.as_deref().unwrap_or(""),
            row.axis2_value.map(|v| v.to_string()).unwrap_or_default(),
            row.mean,
            row.bias,
            row.variance,
            row.near_pole_frac,
            row.n_samples,
            row.n_runs,
            row.seed,
        ));
    }
    out
}
