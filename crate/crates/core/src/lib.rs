//! Approval elections: statistical cultures, distances between elections,
//! committee statistics and two-dimensional maps of elections.

pub mod assignment;
pub mod committees;
pub mod correlation;
pub mod cultures;
pub mod election;
pub mod embedding;
pub mod error;
pub mod experiments;
pub mod files;
pub mod ingest;
pub mod metrics;
pub mod render;
pub mod reproduce;
pub mod rng;

pub use election::{ApprovalwiseVector, Ballot, Election};
pub use error::{Error, Result};
pub use rng::RngSeed;
