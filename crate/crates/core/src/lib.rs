//! Exact martingale-coboundary decomposition of stochastic processes on
//! finite probability spaces, with the counterexample, deviation and
//! limit-theorem diagnostics built on top of it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod decomposition;
pub mod error;
pub mod measure;
pub mod orlicz;
pub mod process;

pub use error::{Error, Result};
