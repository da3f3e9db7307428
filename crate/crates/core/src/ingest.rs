//! Cohort CSV ingestion and semi-synthetic outcome generation.
//!
//! Reads patient-style CSVs (header required, UTF-8, configurable
//! delimiter, case-insensitive column names), min-max normalizes the
//! confounder and treatment columns to [0,1], and regenerates mediator and
//! outcome columns by propagating the structural equations over the fixed
//! real covariates with fresh noise per run.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{draw_column, stream, Dataset, ModelParams};

/// A 100-row synthetic cohort mimicking the AGE/RSBP marginals of a stroke
/// trial export, bundled so the test suites never require the real data.
pub const FIXTURE_CSV: &str = include_str!("../data/cohort_fixture.csv");

/// Real covariate columns, raw and normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortTable {
    pub n: usize,
    /// Rows discarded for missing or non-numeric values.
    pub dropped: usize,
    pub w_raw: Vec<f64>,
    pub x_raw: Vec<f64>,
    /// Min-max normalized confounder column, exactly in [0,1].
    pub w: Vec<f64>,
    /// Min-max normalized treatment column, exactly in [0,1].
    pub x: Vec<f64>,
}

/// Min-max normalize to [0,1]; the minimum maps to exactly 0 and the
/// maximum to exactly 1. A constant column cannot be normalized.
pub fn minmax_normalize(v: &[f64]) -> Result<Vec<f64>> {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if v.is_empty() || !min.is_finite() || !max.is_finite() {
        return Err(Error::Ingest("empty or non-finite column".into()));
    }
    if min == max {
        return Err(Error::Ingest(format!(
            "constant column (min = max = {min})"
        )));
    }
    let range = max - min;
    Ok(v.iter().map(|&x| (x - min) / range).collect())
}

/// Load a cohort from CSV, keeping the named confounder (e.g. AGE) and
/// treatment (e.g. RSBP) columns. Rows with missing or non-numeric values
/// in either column are dropped and counted.
pub fn load_cohort_csv(path: impl AsRef<Path>, age_col: &str, x_col: &str) -> Result<CohortTable> {
    load_cohort_csv_opts(path, age_col, x_col, b',')
}

/// As [`load_cohort_csv`] with an explicit field delimiter.
pub fn load_cohort_csv_opts(
    path: impl AsRef<Path>,
    age_col: &str,
    x_col: &str,
    delimiter: u8,
) -> Result<CohortTable> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Ingest(format!("cannot open {}: {e}", path.as_ref().display())))?;
    cohort_from_reader(file, age_col, x_col, delimiter)
}

/// Parse the bundled fixture cohort.
pub fn load_fixture_cohort() -> Result<CohortTable> {
    cohort_from_reader(FIXTURE_CSV.as_bytes(), "AGE", "RSBP", b',')
}

/// Core reader shared by file and fixture paths.
pub fn cohort_from_reader(
    reader: impl Read,
    age_col: &str,
    x_col: &str,
    delimiter: u8,
) -> Result<CohortTable> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(reader);

    let headers = csv_reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name.trim()))
            .ok_or_else(|| Error::Ingest(format!("column '{name}' not found in header")))
    };
    let wi = find(age_col)?;
    let xi = find(x_col)?;

    let mut w_raw = Vec::new();
    let mut x_raw = Vec::new();
    let mut dropped = 0usize;
    for record in csv_reader.records() {
        let record = record?;
        let parse = |i: usize| -> Option<f64> {
            record.get(i).and_then(|f| {
                let t = f.trim();
                if t.is_empty() {
                    None
                } else {
                    t.parse::<f64>().ok().filter(|v| v.is_finite())
                }
            })
        };
        match (parse(wi), parse(xi)) {
            (Some(w), Some(x)) => {
                w_raw.push(w);
                x_raw.push(x);
            }
            _ => dropped += 1,
        }
    }
    if w_raw.is_empty() {
        return Err(Error::Ingest("no usable rows".into()));
    }
    let w = minmax_normalize(&w_raw)?;
    let x = minmax_normalize(&x_raw)?;
    Ok(CohortTable {
        n: w_raw.len(),
        dropped,
        w_raw,
        x_raw,
        w,
        x,
    })
}

/// Generate semi-synthetic mediator and outcome columns over the fixed
/// cohort covariates:
///
/// ```text
/// M_i = c x_i + eps w_i + u_M,   Y_i = a M_i + b w_i + u_Y
/// ```
///
/// The W and X columns are reused bit-identically across seeds; only the
/// mediator and outcome noises are redrawn, on the same per-node streams as
/// the synthetic sampler.
pub fn gen_semi_synthetic(
    cohort: &CohortTable,
    params: &ModelParams,
    seed: u64,
) -> Result<Dataset> {
    params.validate()?;
    if cohort.n < 2 {
        return Err(Error::SampleSize {
            n: cohort.n,
            min: 2,
        });
    }
    let n = cohort.n;
    let u_m = draw_column(seed, stream::M, n, 0.0, params.var_m);
    let u_y = draw_column(seed, stream::Y, n, 0.0, params.var_y);
    let mut m = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let mi = params.c * cohort.x[i] + params.eps * cohort.w[i] + u_m[i];
        let yi = params.a * mi + params.b * cohort.w[i] + u_y[i];
        m.push(mi);
        y.push(yi);
    }
    Ok(Dataset {
        n,
        v: None,
        w: cohort.w.clone(),
        x: cohort.x.clone(),
        m,
        y,
        u_x: None,
        u_m: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn fixture_loads_and_normalizes() {
        let cohort = load_fixture_cohort().unwrap();
        assert_eq!(cohort.n, 100);
        assert_eq!(cohort.dropped, 0);
        for col in [&cohort.w, &cohort.x] {
            assert!(col.iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert_eq!(col.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
            assert_eq!(col.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
    }

    #[test]
    fn malformed_rows_are_dropped_and_counted() {
        let tmp = tempfile_path("cohort_malformed");
        {
            let mut f = std::fs::File::create(&tmp).unwrap();
            writeln!(f, "AGE,RSBP").unwrap();
            writeln!(f, "60,150").unwrap();
            writeln!(f, ",140").unwrap();
            writeln!(f, "70,not_a_number").unwrap();
            writeln!(f, "80").unwrap();
            writeln!(f, "65,160").unwrap();
        }
        let cohort = load_cohort_csv(&tmp, "age", "rsbp").unwrap();
        assert_eq!(cohort.n, 2);
        assert_eq!(cohort.dropped, 3);
        std::fs::remove_file(&tmp).unwrap();
    }

    #[test]
    fn missing_column_and_constant_column_errors() {
        let tmp = tempfile_path("cohort_bad");
        {
            let mut f = std::fs::File::create(&tmp).unwrap();
            writeln!(f, "AGE,RSBP").unwrap();
            writeln!(f, "60,150").unwrap();
            writeln!(f, "60,160").unwrap();
        }
        assert!(matches!(
            load_cohort_csv(&tmp, "AGE", "SBP"),
            Err(Error::Ingest(_))
        ));
        // AGE is constant: normalization must fail
        assert!(matches!(
            load_cohort_csv(&tmp, "AGE", "RSBP"),
            Err(Error::Ingest(_))
        ));
        std::fs::remove_file(&tmp).unwrap();
    }

    #[test]
    fn normalization_is_idempotent() {
        let cohort = load_fixture_cohort().unwrap();
        let again = minmax_normalize(&cohort.w).unwrap();
        assert_eq!(again, cohort.w);
    }

    #[test]
    fn semi_synthetic_reuses_covariates_and_redraws_noise() {
        let cohort = load_fixture_cohort().unwrap();
        let p = ModelParams {
            eps: 1.5,
            ..ModelParams::unit()
        };
        let a = gen_semi_synthetic(&cohort, &p, 1).unwrap();
        let b = gen_semi_synthetic(&cohort, &p, 2).unwrap();
        assert_eq!(a.w, b.w);
        assert_eq!(a.x, b.x);
        assert_ne!(a.m, b.m);
        assert_ne!(a.y, b.y);
        // and identical seeds reproduce bit-identically
        let c = gen_semi_synthetic(&cohort, &p, 1).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn semi_synthetic_noiseless_is_deterministic_function() {
        let cohort = load_fixture_cohort().unwrap();
        let p = ModelParams {
            var_m: 0.0,
            var_y: 0.0,
            ..ModelParams::unit()
        };
        let ds = gen_semi_synthetic(&cohort, &p, 9).unwrap();
        for i in 0..ds.n {
            let m = p.c * cohort.x[i] + p.eps * cohort.w[i];
            assert!((ds.m[i] - m).abs() < 1e-15);
            assert!((ds.y[i] - (p.a * m + p.b * cohort.w[i])).abs() < 1e-15);
        }
        // a = b = 0 with no outcome noise pins Y to zero
        let zero = ModelParams {
            a: 0.0,
            b: 0.0,
            var_y: 0.0,
            ..ModelParams::unit()
        };
        let ds0 = gen_semi_synthetic(&cohort, &zero, 9).unwrap();
        assert!(ds0.y.iter().all(|&v| v == 0.0));
    }

    fn tempfile_path(tag: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("cmm_test_{tag}_{}.csv", std::process::id()));
        p
    }
}
