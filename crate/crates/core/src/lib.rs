//! Capacity and secrecy bounds for heterogeneous distributed storage systems.
//!
//! Every closed form in [`capacity`] and [`secrecy`] is paired with an
//! independent check: the permutation lift in [`lift`], min-cuts of information
//! flow graphs in [`flowgraph`], and a random linear coding simulator in
//! [`rlncsim`]. All quantities are exact rationals.

pub mod capacity;
pub mod error;
pub mod flowgraph;
pub mod lift;
pub mod model;
pub mod rlncsim;
pub mod secrecy;

pub use error::{Error, Result};
pub use model::rational::Rational;
pub use model::{DssConfig, RepairBandwidthModel, RepairKey, SystemParams};
