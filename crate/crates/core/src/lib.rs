//! Braid-valued invariants of area-preserving disc maps.

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod braid;
pub mod error;
pub mod estimate;
pub mod flow;
pub mod toolkit;
pub mod trace;

pub use braid::{BraidLetter, BraidWord, BrooksQm, FreeLetter, FreeWord, IntMatrix2, QmCombination};
pub use error::{Error, Result};
pub use estimate::{BraidQm, Domain, Estimate, Homogenized, Sampling, Schedule};
pub use flow::{Disc, FlowSpec, HamiltonianField, Point, RigidMotion, TwistSystem, ZkSystem};
pub use toolkit::{Certificate, DualBasis, EvalMatrix};
pub use trace::{Configuration, StrandBundle};
