//! Depth-based clustering of directional data.
//!
//! Points live on the unit hypersphere `S^{d-1}` ([`sphere`]). Angular depths
//! ([`depth`]) score how central a point is within a sample and induce a
//! pairwise similarity, which drives the depth-based medoids clustering in
//! [`dbmca`]. [`vmf`] provides von Mises-Fisher sampling, [`validation`] the
//! external agreement indices, [`simharness`] the factorial simulation study
//! and [`ingest`] sparse document-term input.

pub mod dbmca;
pub mod depth;
pub mod error;
pub mod ingest;
pub mod partition;
pub mod seed;
pub mod simharness;
pub mod special;
pub mod sphere;
pub mod validation;
pub mod vmf;

pub use depth::DepthKind;
pub use error::{Error, Result};
pub use partition::Partition;
pub use sphere::{SparseUnitVector, SpherePoint, UnitVector};
