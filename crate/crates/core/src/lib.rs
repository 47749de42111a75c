//! Parameterized ergodic Markov chains and Bayesian estimation of their
//! parameter.
//!
//! The crate covers the whole estimation pipeline for finite-state chains:
//!
//! - [`chain_model`]: families `θ ↦ P^θ`, structural ergodicity, the pair
//!   chain `(X_n, X_{n+1})`;
//! - [`stationary`]: invariant measures, the stationary pair law and its
//!   distribution function, total-variation decay;
//! - [`sampling`]: reproducible per-replication random streams and trajectory
//!   simulation;
//! - [`empirical`]: transition counts, sample pair distribution functions and
//!   their sup-discrepancy;
//! - [`metrics`]: total variation and exact Prokhorov distances;
//! - [`bayes`]: grid posteriors, the posterior-mean estimator, the Dirichlet
//!   closed form and the martingale diagnostic;
//! - [`experiment`]: identifiability checks, consistency / LLN / ergodicity
//!   experiments and their CSV output.
//!
//! ```
//! use chain_bayes::chain_model::{build_family, FamilySpec, ParamPoint};
//! use chain_bayes::stationary::invariant_measure;
//!
//! let family = build_family(&FamilySpec { family: "two_state".into(), size: None, domain: None }).unwrap();
//! let p = family.transition_matrix(&ParamPoint::new(vec![0.2, 0.3]).unwrap()).unwrap();
//! let pi = invariant_measure(&p).unwrap();
//! assert!((pi.weights()[0] - 0.6).abs() < 1e-12);
//! ```

pub mod bayes;
pub mod chain_model;
pub mod empirical;
mod error;
pub mod experiment;
pub mod export;
pub mod metrics;
pub mod sampling;
pub mod stationary;

pub use error::{Error, Result};
