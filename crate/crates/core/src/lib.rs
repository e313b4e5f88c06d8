pub mod analytic;
pub mod error;
pub mod gibbs;
pub mod padic;
pub mod potts;
pub mod tree;

pub use error::{Error, Result};
pub use padic::{Approx, PadicNumber, Prime, Valuation, DEFAULT_PRECISION};
pub use potts::Tolerance;
