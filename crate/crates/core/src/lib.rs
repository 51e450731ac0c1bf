//! A desk-scale laboratory for the single-particle Szilard engine.
//!
//! - [`spectrum`]: particle-in-a-box thermodynamics with certified truncation.
//! - [`engine`]: the insert / measure / extract / erase cycle and its ledger.
//! - [`sampler`]: gas compression, thermostatted piston sampling, histograms.
//! - [`surrogate`]: least-squares and small-network entropy surrogates.
//! - [`optimizer`]: bandit optimization of the wall position.
//! - [`cli`]: the `szilard` command line driver.

pub mod cli;
pub mod engine;
pub mod error;
pub mod optimizer;
pub mod sampler;
pub mod spectrum;
pub mod surrogate;
pub mod stats;
pub mod svg;

pub use error::{Error, Result};
