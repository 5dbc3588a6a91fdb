pub mod asymptotic;
pub mod carleman;
pub mod error;
pub mod exact_coeffs;
pub mod integral_repr;
pub mod quadrature;
pub mod rational;
pub mod real;

pub use error::{Error, Result};
pub use rational::ExactRational;
pub use real::{PrecisionContext, Real};
