//! Boundary-law solutions of the two-state hard-core model on Cayley trees
//! under alternating `(m, r)` boundary schemes.
//!
//! The crate is organised bottom-up:
//!
//! - [`polyroot`]: exact polynomials, Sturm isolation, Cardano/Ferrari.
//! - [`model`]: the fixed-point system for a pair of boundary-law values,
//!   its full solution set, and the translation-invariant and weakly
//!   periodic special systems.
//! - [`criticality`]: critical activities, closed forms and numeric.
//! - [`tree`]: finite half-trees, field labelling, exact finite-volume
//!   measures and their consistency.
//! - [`free_energy`]: the alternating-boundary free energy.

pub mod criticality;
pub mod error;
pub mod free_energy;
pub mod model;
pub mod polyroot;
pub mod tree;

pub use error::{Error, Result};
