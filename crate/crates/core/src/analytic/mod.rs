//! Analytic functions on `Q_p` and polynomial root finding.

mod hensel;
mod series;

pub use hensel::{hensel_roots_in_disk, PadicPolynomial, HENSEL_MARGIN};
pub use series::{exp_p, exp_p_minus_one, log_one_plus, log_p, ConvergenceDisk, DiskKind};
