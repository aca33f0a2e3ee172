pub mod approx;
pub mod bohr;
pub mod builder;
pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod quadratic;
pub mod rational;
pub mod torus;

pub use error::{Error, Result};
