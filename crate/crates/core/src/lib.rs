//! Periodic atomistic chains and their higher-order continuum approximations.
//!
//! Everything is computed in lattice units: spacing 1, sites `−N..N−1`,
//! period `2N`. Scaled quantities (spacing `ε = 1/N`) appear only in reports.

pub mod analysis;
pub mod atomistic;
pub mod continuum;
pub mod error;
pub mod fem;
pub mod field;
pub mod harness;
pub mod lattice;
pub mod linalg;
pub mod optimize;
pub mod poly;
pub mod potentials;
pub mod splines;

pub use error::{Error, Result};
