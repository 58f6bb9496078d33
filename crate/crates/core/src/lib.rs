//! UAV air-to-ground link analysis.
//!
//! * [`channel`]: power-delay profile statistics and Jakes tap processes.
//! * [`ofdm`]: numerology, Doppler ICI, SINR and QAM bit loading.
//! * [`optimizer`]: spectral-efficiency driven subcarrier-spacing selection.
//! * [`forecast`]: fleet growth, UAV densities and CNPC bandwidth.
//! * [`config`]: the TOML run configuration shared by the CLI.

// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod error;
pub mod forecast;
pub mod ofdm;
pub mod optimizer;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
