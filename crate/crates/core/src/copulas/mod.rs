//! Dependence structures: exchangeable Archimedean copulas with their frailty
//! (Marshall–Olkin) samplers, and the Gaussian copula.

mod archimedean;
mod frailty;
mod gaussian;

pub use archimedean::{Archimedean, ArchimedeanKind, GeneratorEval, K_MAX};
pub use frailty::{sample_log_series, sample_positive_stable};
pub(crate) use gaussian::equicorr_conditional;
pub use gaussian::{CondNormal, GaussianCopula};
