pub mod analytic;
pub mod cli;
pub mod error;
pub mod numeric;
pub mod protocols;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;
