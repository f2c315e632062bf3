#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod characteristic;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod mode;
pub mod models;
pub mod params;
pub mod plot;
pub mod profile;
pub mod region;
pub mod resolvent;
pub mod spectrum;
pub mod witness;

pub use error::{Error, Result};
