//! Robustness analysis of hypergraphs under node attacks, and a learned
//! surrogate that predicts it.
//!
//! The crate covers the whole labeling-and-learning loop:
//!
//! * [`hypergraph`]: incidence storage, liveness masks, largest connected component.
//! * [`generators`]: seeded ER, WS, SF, SBM and uniform hypergraph families.
//! * [`cascade`]: static targeted attacks and the load-redistribution cascade.
//! * [`robustness`]: discrete and adaptive-Simpson robustness labels.
//! * [`hwl`]: exact hypergraph Weisfeiler-Lehman refinement.
//! * [`model`]: the injective hypergraph isomorphism network, its gradients and training.

pub mod cascade;
pub mod error;
pub mod generators;
pub mod hwl;
pub mod hypergraph;
pub mod model;
pub mod robustness;

pub use error::{Error, Result};
pub use hypergraph::{ActivityMask, Hypergraph};
