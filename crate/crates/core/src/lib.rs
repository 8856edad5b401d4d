// SPDX-License-Identifier: Apache-2.0

//! Valuation of energy-inefficient dwellings under deterministic carbon-price
//! transition scenarios.
//!
//! * [`economy`]: multisector Ornstein–Uhlenbeck productivity and its
//!   integral, exact conditional laws and Euler–Maruyama paths.
//! * [`scenario`]: carbon-price trajectories, energy prices, renovation costs.
//! * [`valuation`]: housing index, conditional price law, optimal renovation
//!   date, transition cost and climate-adjusted value.
//! * [`calibration`]: estimators for the productivity and housing parameters.
//! * [`sweep`]: Monte Carlo scenario sweeps and result files.
//! * [`config`]: the TOML run configuration.

pub mod calibration;
pub mod config;
pub mod economy;
pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod scenario;
pub mod sweep;
pub mod valuation;

pub use error::{Error, Result};
