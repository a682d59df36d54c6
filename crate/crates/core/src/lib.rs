//! Sparse coordinate-wise monotone regression.
//!
//! A function is *s-sparse coordinate-wise monotone* when it is
//! non-decreasing in each of `s` active coordinates and ignores the rest.
//! This crate estimates such functions from samples under two observation
//! models, recovers the active coordinates with linear programs, generates
//! synthetic benchmarks, and checks combinatorial facts about monotone
//! labelings of point sets by exhaustive counting.
//!
//! Module map:
//! - [`model`]: datasets, active sets and the dominance order.
//! - [`exact`]: exact fits for a fixed active set (min-cut and L2 isotonic).
//! - [`flow`]: max-flow / min-cut.
//! - [`lp`]: dense bounded-variable simplex.
//! - [`algorithms`]: subset-enumeration fitting, LP support recovery,
//!   two-stage fitting and prediction.
//! - [`synthetic`], [`metrics`], [`experiment`]: generators, Monte-Carlo
//!   metrics and the recovery-rate harness.
//! - [`combinatorics`]: labeling counts and grid-cell bounds.

pub mod algorithms;
mod bitset;
pub mod combinatorics;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod flow;
pub mod lp;
pub mod metrics;
pub mod model;
mod order;
pub mod par;
pub mod rng;
pub mod synthetic;

pub use bitset::BitMatrix;
pub use error::{Error, Result};
pub use model::{ActiveSet, Dataset, NoiseModel};
