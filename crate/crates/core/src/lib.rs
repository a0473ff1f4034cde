//! Sparsity-path analysis for logistic regression under generalized-t
//! priors.
//!
//! The crate sweeps the prior scale over a geometric schedule with a
//! sequential Monte Carlo sampler, tracks evidence ratios between scales,
//! finds posterior modes by EM, and summarizes the whole path.

pub mod data;
pub mod emmap;
pub mod error;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod smc;
pub mod summary;

pub use data::{Dataset, Effects, Matrix, SimSpec};
pub use error::{Result, SpaError};
pub use model::GtPrior;
