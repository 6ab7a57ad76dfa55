//! File formats, the simulation harness and the command line on top of
//! [`dimmsb_core`].

pub mod cli;
pub mod error;
pub mod experiments;
pub mod graphio;
pub mod provenance;

pub use dimmsb_core as core;
pub use error::{Error, Result};
