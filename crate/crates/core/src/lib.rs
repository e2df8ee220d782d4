//! Unbiased Monte Carlo estimators for the density of a sum S = X₁ + … + Xₙ of
//! dependent random variables.
//!
//! The crate provides
//! - a likelihood-ratio (sensitivity) estimator with a control variate,
//! - conditional Monte Carlo and Asmussen–Kroese density estimators, optionally
//!   conditioning on the frailty of a Marshall–Olkin copula,
//! - a smooth sequential estimator for positive summands under a Gaussian copula,
//! - posterior marginal-density estimation from MCMC output,
//!
//! together with the distributions, copulas and an experiment harness to
//! compare them.

pub mod bayes;
pub mod copulas;
pub mod error;
pub mod estimators;
pub mod gauss_seq;
pub mod harness;
pub mod joint;
pub mod marginals;
pub mod replicates;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use joint::{Dependence, JointModel};
pub use marginals::Marginal;
pub use replicates::Replicates;
