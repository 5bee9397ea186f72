//! Soliton scattering by a point impurity for the cubic Schrödinger
//! equation `i u_t + u_xx / 2 - q δ(x) u + |u|² u = 0`.
//!
//! * [`fem`]: piecewise-linear mesh, matrices and fields.
//! * [`stepper`]: conservative midpoint time stepping.
//! * [`theory`]: closed-form scattering and splitting predictions.
//! * [`measure`]: mass partition, profile distance, amplitude resolution.
//! * [`fitting`]: regressions of the asymptotic rates.
//! * [`experiments`], [`output`], [`config`], [`snapshot`], [`cli`]: the
//!   experiment runner.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod fitting;
pub mod measure;
pub mod output;
pub mod snapshot;
pub mod stepper;
pub mod theory;

pub use error::{Error, Result};
