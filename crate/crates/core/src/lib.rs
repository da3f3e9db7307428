//! Confounded-mediator models and long-term effect estimation.
//!
//! This crate simulates the linear (and partially linear) confounded-mediator
//! model, a four-node structural causal model in which a latent confounder W
//! drives the treatment X, the short-term mediator M, and the long-term
//! outcome Y. It implements the full family of front-door / instrumental
//! estimators for the effect `a: M -> Y` — the front-door estimator, its
//! instrumental formulation, the ratio-improved variant that stays unbiased
//! under mediator confounding, a prior-instrument variant, and a nonlinear
//! extension — together with closed-form bias and variance oracles and a
//! deterministic Monte-Carlo grid harness for bias/variance studies.
//!
//! Entry points:
//! - [`model`]: model parameters, samplers, exact population moments
//! - [`regress`]: inner products, OLS slopes/residuals, the ratio estimator
//! - [`estimators`]: the estimator suite for `a`
//! - [`series`]: power-series inversion and composition for polynomial couplings
//! - [`analytic`]: closed-form bias/variance expressions and Gaussian
//!   covariance algebra (conditioning, higher-order moments)
//! - [`ingest`]: cohort CSV ingestion and semi-synthetic outcome generation
//! - [`grid`]: seeded grid experiments and CSV summaries

pub mod analytic;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod ingest;
pub mod model;
pub mod regress;
pub mod series;

pub use error::{Error, Result};
pub use estimators::{EstimateResult, EstimatorId};
pub use model::{Dataset, ModelParams, PolyCoeffs};
