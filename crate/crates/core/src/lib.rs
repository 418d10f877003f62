//! Simulation and parameter estimation for the non-ergodic fractional
//! Ornstein-Uhlenbeck process with periodic mean,
//! `dX_t = (L(t) + alpha X_t) dt + dB^H_t`, `X_0 = 0`, `alpha > 0`,
//! where `L = sum_i mu_i phi_i` is 1-periodic and `B^H` is a fractional
//! Brownian motion with Hurst index `H` in `[1/2, 1)`.
//!
//! The pipeline is: [`fbm`] draws driving noise, [`process`] turns it into a
//! trajectory, [`estimator`] recovers `(mu, alpha)` from the trajectory, and
//! [`asymptotics`] provides the limit laws the estimation error is compared
//! against. [`harness`] wires these into seeded Monte Carlo experiments.

// `!(x > 0.0)` is used deliberately so that NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod estimator;
pub mod exec;
pub mod fbm;
pub mod harness;
pub mod linalg;
pub mod periodic_basis;
pub mod process;
pub mod quad;
pub mod rng;
pub mod statkit;

pub use error::{FouError, Result};
pub use exec::Backend;
pub use fbm::Hurst;
pub use periodic_basis::{BasisFunction, PeriodicDrift};
