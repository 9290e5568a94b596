//! Random walks on convex bodies built around Coordinate Hit-and-Run (the
//! random-scan Gibbs sampler for uniform and Gaussian targets), together with
//! the analytic one-step kernel, conductance estimators, isoperimetry
//! harnesses for axis-disjoint sets and mixing diagnostics.
//!
//! Module map:
//!
//! * [`geometry`]: bodies with exact membership and chord oracles.
//! * [`samplers`]: CHAR, Hit-and-Run, Ball walk, lazy wrappers, warm starts.
//! * [`kernel`]: exact CHAR transition probabilities, flows, conductance.
//! * [`isoperimetry`]: axis-disjointness, grid searches, boundary measure.
//! * [`diagnostics`]: TV curves, coupon collector, discrete chains, ESS,
//!   the prism lower-bound sweep.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod isoperimetry;
pub mod kernel;
pub mod rng;
pub mod samplers;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{Body, Bounds, Chord};
pub use samplers::{ChainState, Target, WalkKind};
