//! Deterministic-code capacity regions for semi-arbitrarily-varying
//! broadcast channels (SAVBC): one transmitter, an ordinary receiver
//! behind a fixed DMC, and a robust receiver behind an arbitrarily
//! varying channel, with degraded message sets.
//!
//! The crate computes per-auxiliary rate polytopes and the full capacity
//! region, decides symmetrizability of the AVC branch, evaluates the
//! binary-symmetric instance in closed form, and runs a desk-scale
//! superposition-coding simulator against adversarial state sequences.

pub mod bsc_example;
pub mod channels;
pub mod geometry;
mod lp;
pub mod measures;
pub mod regions;
pub mod simulator;
pub mod symmetrizability;
mod util;

pub use channels::{ChannelError, SavbcSpec, StateFamily, StateWeights, StochasticMatrix};
pub use geometry::{region_distance, RatePair, RateRegion};
pub use measures::{AuxiliaryJoint, Bits, JointPmf, MeasureError};
pub use regions::{RegionError, RegionResult, SearchBudget};
