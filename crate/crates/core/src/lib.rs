//! Exact combinatorics of infinitely near points on a smooth surface germ.
//!
//! The crate models weighted clusters over an append-only arena of points,
//! the Enriques-style ordering of satellite points, the `(n, m)` invariants
//! attached to the polar morphism of a pencil, and the recovery of the
//! singular points of a plane curve (with their values) from the base points
//! of its generic polar. A separate oracle computes the same data forward
//! from the curve, which is how recovery is cross-checked.
//!
//! All arithmetic is exact. The numeric core is generic over [`Scalar`];
//! the aliases below fix it to [`BigInt`].

pub mod arena;
pub mod cluster;
pub mod document;
pub mod dot;
pub mod error;
pub mod morphism;
pub mod oracle;
pub mod ordering;
pub mod recovery;
pub mod scalar;
pub mod similarity;

pub use num_bigint::BigInt;

pub use arena::{ArenaTree, PointId, PointRecord, RawArena, RawPoint};
pub use cluster::{WeightKind, WeightedCluster};
pub use error::{Diagnostic, Error, Result};
pub use scalar::Scalar;

pub type Cluster = cluster::WeightedCluster<BigInt>;
pub type Invariants = morphism::MorphismInvariants<BigInt>;
pub type Quotient = num_rational::Ratio<BigInt>;
pub type Recovery = recovery::RecoveryResult<BigInt>;


pub type Cluster64 = cluster::WeightedCluster<i64>;
pub type Invariants64 = morphism::MorphismInvariants<i64>;
pub type Recovery64 = recovery::RecoveryResult<i64>;
