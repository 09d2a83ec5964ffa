//! Marginalized zero-inflated Poisson regression and counterfactual mediation
//! analysis for zero-inflated count outcomes.
//!
//! The crate fits MZIP models by Newton–Raphson, derives natural direct,
//! natural indirect, controlled direct and total effects on the ratio and
//! difference scales with delta-method or bootstrap uncertainty, and runs
//! Monte Carlo studies of estimator performance.

pub mod data;
pub mod error;
pub mod glm;
pub mod linalg;
pub mod mediation;
pub mod mzip;
pub mod optimizer;
pub mod parallel;
pub mod simulation;
pub mod special;

pub use data::{Dataset, MediationData, Roles};
pub use error::{Error, Result};
pub use mediation::{
    mediate, Effect, EffectKind, EffectSet, MediationResult, MediationSpec, MediatorType, OutcomeModel, Scale,
    SeMethod,
};
pub use mzip::{mzip_fit, MzipFit};
pub use optimizer::{OptimResult, OptimSettings};
