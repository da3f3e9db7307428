//! Flat key=value configuration shared by the CLI subcommands.
//!
//! A config file holds one `key = value` pair per line; `#` starts a
//! comment. Command-line overrides use the same keys and always win. Axis
//! values accept either a comma list (`0.1,0.5,1.0`) or an inclusive
//! linspace `start:stop:count`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridAxis, GridSpec, NonlinearGridSpec};
use crate::model::{ModelParams, PolyCoeffs};

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Config::default()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::InvalidConfig(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        Self::from_str_contents(&text)
    }

    pub fn from_str_contents(text: &str) -> Result<Self> {
        let mut cfg = Config::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim());
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("{key} = '{v}' is not a number")))
            })
            .transpose()
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| Error::InvalidConfig(format!("{key} = '{v}' is not an integer")))
            })
            .transpose()
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        Ok(self.get_u64(key)?.map(|v| v as usize))
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => Err(Error::InvalidConfig(format!(
                    "{key} = '{other}' is not a bool"
                ))),
            })
            .transpose()
    }

    /// Comma-separated list of floats.
    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|t| {
                        t.trim().parse::<f64>().map_err(|_| {
                            Error::InvalidConfig(format!("{key}: '{t}' is not a number"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    /// Axis values: `start:stop:count` linspace or a comma list.
    pub fn get_axis_values(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        if raw.contains(':') {
            let parts: Vec<&str> = raw.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::InvalidConfig(format!(
                    "{key}: expected start:stop:count, got '{raw}'"
                )));
            }
            let start: f64 = parts[0].trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("{key}: bad linspace start '{}'", parts[0]))
            })?;
            let stop: f64 = parts[1].trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("{key}: bad linspace stop '{}'", parts[1]))
            })?;
            let count: usize = parts[2].trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("{key}: bad linspace count '{}'", parts[2]))
            })?;
            if count == 0 {
                return Err(Error::InvalidConfig(format!("{key}: linspace count 0")));
            }
            Ok(Some(GridAxis::linspace("", start, stop, count).values))
        } else {
            self.get_f64_list(key)
        }
    }

    pub fn get_poly(&self, key: &str) -> Result<Option<PolyCoeffs>> {
        self.get_f64_list(key)?.map(PolyCoeffs::new).transpose()
    }

    /// Model parameters from the `a,b,c,d,eps,g,mu_w,var_*` keys over the
    /// unit baseline. `sigma2` sets all noise variances at once; individual
    /// `var_*` keys override it.
    pub fn model_params(&self) -> Result<ModelParams> {
        let mut p = ModelParams::unit();
        if let Some(s2) = self.get_f64("sigma2")? {
            p.var_w = s2;
            p.var_x = s2;
            p.var_m = s2;
            p.var_y = s2;
            p.var_v = s2;
        }
        let take = |key: &str, field: &mut f64| -> Result<()> {
            if let Some(v) = self.get_f64(key)? {
                *field = v;
            }
            Ok(())
        };
        take("a", &mut p.a)?;
        take("b", &mut p.b)?;
        take("c", &mut p.c)?;
        take("d", &mut p.d)?;
        take("eps", &mut p.eps)?;
        take("g", &mut p.g)?;
        take("mu_w", &mut p.mu_w)?;
        take("var_w", &mut p.var_w)?;
        take("var_x", &mut p.var_x)?;
        take("var_m", &mut p.var_m)?;
        take("var_y", &mut p.var_y)?;
        take("var_v", &mut p.var_v)?;
        p.validate()?;
        Ok(p)
    }

    /// Grid specification from `axis1_name/axis1_values`,
    /// `axis2_name/axis2_values`, `n_samples`, `n_runs`, `base_seed`, `c_hat`.
    pub fn grid_spec(&self) -> Result<GridSpec> {
        let axis1_name = self
            .get("axis1_name")
            .ok_or_else(|| Error::InvalidConfig("missing axis1_name".into()))?
            .to_string();
        let axis1_values = self
            .get_axis_values("axis1_values")?
            .ok_or_else(|| Error::InvalidConfig("missing axis1_values".into()))?;
        let axis2 = match (
            self.get("axis2_name"),
            self.get_axis_values("axis2_values")?,
        ) {
            (Some(name), Some(values)) => Some(GridAxis::new(name, values)),
            (None, None) => None,
            _ => {
                return Err(Error::InvalidConfig(
                    "axis2_name and axis2_values must be given together".into(),
                ))
            }
        };
        let spec = GridSpec {
            base: self.model_params()?,
            axis1: GridAxis::new(axis1_name, axis1_values),
            axis2,
            n_samples: self.get_usize("n_samples")?.unwrap_or(10_000),
            n_runs: self.get_usize("n_runs")?.unwrap_or(100),
            base_seed: self.get_u64("base_seed")?.unwrap_or(42),
            c_hat: self.get_f64("c_hat")?,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Nonlinear grid specification; requires `d_poly` and `eps_poly`.
    pub fn nonlinear_grid_spec(&self) -> Result<NonlinearGridSpec> {
        let d_poly = self
            .get_poly("d_poly")?
            .ok_or_else(|| Error::InvalidConfig("missing d_poly".into()))?;
        let eps_poly = self
            .get_poly("eps_poly")?
            .ok_or_else(|| Error::InvalidConfig("missing eps_poly".into()))?;
        Ok(NonlinearGridSpec {
            grid: self.grid_spec()?,
            d_poly,
            eps_poly,
            order: self.get_usize("order")?,
            intercept: self.get_bool("intercept")?.unwrap_or(false),
        })
    }
}
