//! Swept-wavelength homodyne link: configuration, link simulation and the
//! command-line front end around `sweepguard-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod link;
pub mod output;

pub use error::{Error, Result};
