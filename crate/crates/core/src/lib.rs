//! Soft-aided hard-decision decoding (dynamic reliability scores) for
//! product-like codes, with staircase and OFEC instantiations and a
//! Monte-Carlo BER harness.

pub mod bch;
pub mod channel;
pub mod drs;
pub mod eaed;
pub mod error;
pub mod gf;
pub mod harness;
pub mod ofec;
pub mod selftest;
pub mod staircase;
pub mod tuner;

pub use error::{Error, Result};
