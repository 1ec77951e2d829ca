//! Numerical toolkit for fronts of `u_t = (u^m)_xx + f(u)` with a monostable
//! reaction `f(s) ~ s^beta` near zero and front-like initial data.
//!
//! The crate covers regime classification, explicit sub/super-solution
//! envelopes, a finite-difference solver, travelling-wave shooting and
//! front-position analysis.

pub mod analysis;
pub mod closedform;
pub mod error;
pub mod model;
pub mod regimes;
pub mod solver;
pub mod waves;

pub use error::{Error, Result};
pub use model::{Field, Grid, GridKind, InitialData, Model, ModelParams, ReactionFn};
