//! Shape-based analog computing (S-AC) behavioral core.
//!
//! The central object is the generalized margin-propagation (GMP) constraint
//!
//! ```text
//!     sum_k g(z_k - h) = C
//! ```
//!
//! solved for the scalar `h`, where `g` is a monotone shape function standing in
//! for a transistor operating regime and the `z_k` are spline-offset copies of the
//! inputs. Everything else in the crate (activation blocks, winner-take-all,
//! the four-quadrant multiplier, the shape-domain MLP and the experiment
//! harnesses) is composed from that solver.
//!
//! The crate is `no_std` (it needs `alloc`); IO, file formats and the command
//! line live in the `sac-cli` companion crate.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod blocks;
pub mod dataset;
pub mod error;
pub mod family;
mod math;
pub mod mismatch;
pub mod network;
pub mod solver;
pub mod spline;
mod table;
pub mod unit;

pub use blocks::{BlockParams, WtaResult};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use family::{ShapeFamily, ShapeKind};
pub use mismatch::MismatchSpec;
pub use network::{Activation, Layer, SacNetwork, TrainConfig};
pub use solver::{GmpSolution, Tolerance};
pub use spline::SplineSet;
pub use unit::{Polarity, SacUnit};
