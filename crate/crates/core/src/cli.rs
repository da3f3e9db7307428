//! Command-line surface: simulation, single-shot estimation, closed-form
//! evaluation, grid experiments and fixture emission.
//!
//! Every subcommand reads an optional `--config FILE` of `key=value` lines
//! and accepts the same keys as command-line overrides, either bare
//! (`eps=2`) or flag-style (`--eps 2`). Exit codes: 0 success, 2 validation
//! or I/O error, 3 a single-shot estimate hit a near-pole or degenerate
//! denominator.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analytic;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::estimators::{self, EstimateResult, EstimatorId};
use crate::grid::{self, Parallelism};
use crate::ingest;
use crate::model::{self, PolyCoeffs};
use crate::series::{eps_over_d_series, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NEAR_POLE: i32 = 3;

const USAGE: &str = "\
usage: cmm <subcommand> [--config FILE] [--out FILE] [key=value ...]

subcommands:
  simulate        emit a sampled dataset as CSV (keys: n, seed, model keys,
                  optionally d_poly/eps_poly for the partial model,
                  debug_noise=true to retain noise columns)
  estimate        apply the estimator suite to a dataset CSV
                  (keys: input=FILE, c_hat, order, eps_over_d)
  analytic        print closed-form bias/variance values for the model keys
  grid-linear     run a linear-model grid (axis1_*/axis2_*, n_samples,
                  n_runs, base_seed, estimators, parallel)
  grid-nonlinear  run a partial-linear grid (additionally d_poly, eps_poly,
                  order, intercept)
  grid-ist        run a semi-synthetic grid over a cohort CSV
                  (cohort=FILE, age_col, x_col, delimiter)
  fixtures        emit the bundled cohort fixture CSV

model keys: a b c d eps g mu_w var_w var_x var_m var_y var_v sigma2
axis keys:  axis1_name, axis1_values (list or start:stop:count), axis2_*
";

/// Entry point; returns the process exit code.
pub fn run(args: impl IntoIterator<Item = String>) -> i32 {
    match dispatch(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_VALIDATION
        }
    }
}

struct Invocation {
    config: Config,
    out: Option<PathBuf>,
}

fn parse_invocation(args: &[String]) -> Result<Invocation> {
    let mut config_path: Option<PathBuf> = None;
    let mut out = None;
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut it = args.iter().peekable();
    while let Some(arg) = it.next() {
        if let Some(flag) = arg.strip_prefix("--") {
            let (key, value) = match flag.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it.next().ok_or_else(|| {
                        Error::InvalidConfig(format!("flag --{flag} needs a value"))
                    })?;
                    (flag.to_string(), v.clone())
                }
            };
            match key.as_str() {
                "config" => config_path = Some(PathBuf::from(value)),
                "out" => out = Some(PathBuf::from(value)),
                _ => overrides.push((key, value)),
            }
        } else if let Some((k, v)) = arg.split_once('=') {
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        } else {
            return Err(Error::InvalidConfig(format!("unexpected argument '{arg}'")));
        }
    }
    let mut config = match config_path {
        Some(p) => Config::from_file(p)?,
        None => Config::new(),
    };
    for (k, v) in overrides {
        config.set(&k, &v);
    }
    Ok(Invocation { config, out })
}

fn dispatch(args: impl IntoIterator<Item = String>) -> Result<i32> {
    let args: Vec<String> = args.into_iter().collect();
    let Some(subcommand) = args.first() else {
        eprint!("{USAGE}");
        return Ok(EXIT_VALIDATION);
    };
    let inv = parse_invocation(&args[1..])?;
    match subcommand.as_str() {
        "simulate" => cmd_simulate(&inv),
        "estimate" => cmd_estimate(&inv),
        "analytic" => cmd_analytic(&inv),
        "grid-linear" => cmd_grid_linear(&inv),
        "grid-nonlinear" => cmd_grid_nonlinear(&inv),
        "grid-ist" => cmd_grid_ist(&inv),
        "fixtures" => cmd_fixtures(&inv),
        other => {
            eprintln!("unknown subcommand '{other}'");
            eprint!("{USAGE}");
            Ok(EXIT_VALIDATION)
        }
    }
}

fn write_out(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}

fn cmd_simulate(inv: &Invocation) -> Result<i32> {
    let cfg = &inv.config;
    let params = cfg.model_params()?;
    let n = cfg.get_usize("n")?.unwrap_or(1000);
    let seed = cfg.get_u64("seed")?.unwrap_or(42);
    let retain = cfg.get_bool("debug_noise")?.unwrap_or(false);
    let d_poly = cfg.get_poly("d_poly")?;
    let eps_poly = cfg.get_poly("eps_poly")?;
    let ds = if d_poly.is_some() || eps_poly.is_some() {
        let d_poly = d_poly.unwrap_or_else(|| PolyCoeffs::linear(params.d));
        let eps_poly = eps_poly.unwrap_or_else(|| PolyCoeffs::linear(params.eps));
        model::sample_partial_cmm_opts(&params, &d_poly, &eps_poly, n, seed, retain)?
    } else {
        model::sample_linear_cmm_opts(&params, n, seed, retain)?
    };
    write_out(inv.out.as_deref(), &ds.to_csv())?;
    Ok(EXIT_OK)
}

/// x, m, y and optional v columns of a dataset CSV.
type DatasetColumns = (Vec<f64>, Vec<f64>, Vec<f64>, Option<Vec<f64>>);

/// Columns of a dataset CSV, matched case-insensitively by header name.
fn read_dataset_columns(path: &Path) -> Result<DatasetColumns> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let xi = find("x").ok_or_else(|| Error::InvalidConfig("dataset needs an 'x' column".into()))?;
    let mi = find("m").ok_or_else(|| Error::InvalidConfig("dataset needs an 'm' column".into()))?;
    let yi = find("y").ok_or_else(|| Error::InvalidConfig("dataset needs a 'y' column".into()))?;
    let vi = find("v");
    let (mut x, mut m, mut y) = (Vec::new(), Vec::new(), Vec::new());
    let mut v = vi.map(|_| Vec::new());
    for record in reader.records() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|f| f.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::InvalidConfig("non-numeric dataset field".into()))
        };
        x.push(parse(xi)?);
        m.push(parse(mi)?);
        y.push(parse(yi)?);
        if let (Some(v), Some(vi)) = (v.as_mut(), vi) {
            v.push(parse(vi)?);
        }
    }
    Ok((x, m, y, v))
}

fn cmd_estimate(inv: &Invocation) -> Result<i32> {
    let cfg = &inv.config;
    let input = cfg
        .get("input")
        .ok_or_else(|| Error::InvalidConfig("estimate needs input=FILE".into()))?;
    let (x, m, y, v) = read_dataset_columns(Path::new(input))?;

    let c_hat = cfg.get_f64("c_hat")?;
    let ratio = cfg.get_f64("eps_over_d")?;
    let order = cfg.get_usize("order")?;
    let intercept = cfg.get_bool("intercept")?.unwrap_or(false);

    let mut results: Vec<EstimateResult> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut push = |label: &str, r: Result<EstimateResult>| match r {
        Ok(res) => results.push(res),
        Err(e) => warnings.push(format!("{label}: {e}")),
    };
    push("ols_c", estimators::ols_c(&x, &m));
    push("fdc", estimators::fdc(&x, &m, &y));
    push("ifdc", estimators::ifdc(&x, &m, &y));
    if let Some(c) = c_hat {
        match ratio {
            Some(r) => push(
                "improved",
                estimators::improved_ifdc_with_ratio(&x, &m, &y, c, r),
            ),
            None => push("improved", estimators::improved_ifdc(&x, &m, &y, c)),
        }
        if let Some(ord) = order {
            push(
                "improved_nonlinear",
                estimators::improved_ifdc_nonlinear_opts(&x, &m, &y, c, ord, intercept),
            );
        }
    }
    if let Some(v) = &v {
        push(
            "improved_prior",
            estimators::improved_ifdc_prior(v, &x, &m, &y),
        );
    }

    let mut outp = String::from("estimator,value\n");
    for res in &results {
        outp.push_str(&format!("{},{}\n", res.estimator, res.value));
    }
    write_out(inv.out.as_deref(), &outp)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let near_pole = results.iter().any(|r| r.near_pole);
    if near_pole || !warnings.is_empty() {
        if near_pole {
            eprintln!("warning: at least one estimate is near-pole");
        }
        return Ok(EXIT_NEAR_POLE);
    }
    Ok(EXIT_OK)
}

fn cmd_analytic(inv: &Invocation) -> Result<i32> {
    let cfg = &inv.config;
    let params = cfg.model_params()?;
    let c_hat = cfg.get_f64("c_hat")?.unwrap_or(params.c);

    let mut rows: Vec<(String, f64)> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    fn push(rows: &mut Vec<(String, f64)>, warnings: &mut Vec<String>, name: &str, r: Result<f64>) {
        match r {
            Ok(v) => rows.push((name.to_string(), v)),
            Err(e) => {
                rows.push((name.to_string(), f64::NAN));
                warnings.push(format!("{name}: {e}"));
            }
        }
    }
    push(
        &mut rows,
        &mut warnings,
        "bias_ols_c",
        analytic::bias_ols_c(&params),
    );
    push(
        &mut rows,
        &mut warnings,
        "bias_ifdc",
        analytic::bias_ifdc(&params),
    );
    match analytic::improved_expectations(&params, c_hat) {
        Ok((num, den)) => {
            rows.push(("improved_numer".into(), num));
            rows.push(("improved_denom".into(), den));
        }
        Err(e) => {
            rows.push(("improved_numer".into(), f64::NAN));
            rows.push(("improved_denom".into(), f64::NAN));
            warnings.push(format!("improved_expectations: {e}"));
        }
    }
    push(
        &mut rows,
        &mut warnings,
        "pole_location",
        analytic::pole_location(c_hat, params.g),
    );
    push(
        &mut rows,
        &mut warnings,
        "var_fdc",
        analytic::var_fdc(&params),
    );
    push(&mut rows, &mut warnings, "var_c", analytic::var_c(&params));
    push(
        &mut rows,
        &mut warnings,
        "var_total",
        analytic::var_total(&params),
    );
    push(
        &mut rows,
        &mut warnings,
        "var_improved",
        analytic::var_improved(&params, c_hat),
    );
    push(
        &mut rows,
        &mut warnings,
        "bias_rv_naive",
        analytic::bias_rv_naive(&params, c_hat),
    );

    if let (Some(d_poly), Some(eps_poly)) = (cfg.get_poly("d_poly")?, cfg.get_poly("eps_poly")?) {
        push(
            &mut rows,
            &mut warnings,
            "bias_cubic_d",
            analytic::bias_cubic_d(d_poly.coeff(2), d_poly.coeff(3)),
        );
        push(
            &mut rows,
            &mut warnings,
            "bias_cubic_eps",
            analytic::bias_cubic_eps(eps_poly.coeff(2), eps_poly.coeff(3)),
        );
        let order = cfg
            .get_usize("order")?
            .unwrap_or_else(|| d_poly.degree().max(eps_poly.degree()));
        // report two consecutive truncation orders so series stability is
        // visible to the caller
        let d_series = Series::from(&d_poly);
        let e_series = Series::from(&eps_poly);
        for (tag, ord) in [("", order), ("_next", order + 1)] {
            match eps_over_d_series(&e_series, &d_series, ord) {
                Ok(s) => {
                    for (k, &ck) in s.coeffs().iter().enumerate() {
                        rows.push((format!("backdoor{tag}_coef{}", k + 1), ck));
                    }
                }
                Err(e) => warnings.push(format!("backdoor{tag} series: {e}")),
            }
        }
    }

    let mut outp = String::from("quantity,value\n");
    for (name, value) in &rows {
        outp.push_str(&format!("{name},{value}\n"));
    }
    write_out(inv.out.as_deref(), &outp)?;
    for w in &warnings {
        eprintln!("note: {w}");
    }
    Ok(EXIT_OK)
}

fn estimator_list(cfg: &Config, default: &str) -> Result<Vec<EstimatorId>> {
    cfg.get("estimators")
        .unwrap_or(default)
        .split(',')
        .map(EstimatorId::parse)
        .collect()
}

fn parallelism(cfg: &Config) -> Result<Parallelism> {
    Ok(if cfg.get_bool("parallel")?.unwrap_or(true) {
        Parallelism::Rayon
    } else {
        Parallelism::Serial
    })
}

fn cmd_grid_linear(inv: &Invocation) -> Result<i32> {
    let spec = inv.config.grid_spec()?;
    let ests = estimator_list(&inv.config, "ifdc,improved")?;
    let rows = grid::run_grid_linear(&spec, &ests, parallelism(&inv.config)?)?;
    write_out(inv.out.as_deref(), &grid::render_csv(&rows))?;
    Ok(EXIT_OK)
}

fn cmd_grid_nonlinear(inv: &Invocation) -> Result<i32> {
    let nspec = inv.config.nonlinear_grid_spec()?;
    let ests = estimator_list(&inv.config, "ifdc,improved_nonlinear")?;
    let rows = grid::run_grid_nonlinear(&nspec, &ests, parallelism(&inv.config)?)?;
    write_out(inv.out.as_deref(), &grid::render_csv(&rows))?;
    Ok(EXIT_OK)
}

fn cmd_grid_ist(inv: &Invocation) -> Result<i32> {
    let cfg = &inv.config;
    let cohort = match cfg.get("cohort") {
        Some(path) => {
            let delim = cfg.get("delimiter").unwrap_or(",");
            let delim = delim.as_bytes().first().copied().unwrap_or(b',');
            ingest::load_cohort_csv_opts(
                path,
                cfg.get("age_col").unwrap_or("AGE"),
                cfg.get("x_col").unwrap_or("RSBP"),
                delim,
            )?
        }
        None => ingest::load_fixture_cohort()?,
    };
    let mut spec = cfg.grid_spec()?;
    spec.n_samples = cohort.n;
    let ests = estimator_list(cfg, "ifdc,improved")?;
    let rows = grid::run_ist(&cohort, &spec, &ests, parallelism(cfg)?)?;
    write_out(inv.out.as_deref(), &grid::render_csv(&rows))?;
    Ok(EXIT_OK)
}

fn cmd_fixtures(inv: &Invocation) -> Result<i32> {
    write_out(inv.out.as_deref(), ingest::FIXTURE_CSV)?;
    Ok(EXIT_OK)
}
