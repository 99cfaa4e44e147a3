//! Full-duplex hybrid analog/digital beamforming with reduced-complexity
//! multi-tap analog self-interference cancellation.
//!
//! A full-duplex node `k` serves a downlink node `q` and an uplink node `m`
//! simultaneously through partially-connected analog beamformers, an `N`-tap
//! canceller between its RF chains, and digital precoders/combiners. The
//! crate generates channels, designs every stage, evaluates achievable rates
//! and runs Monte-Carlo power sweeps.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the double-precision build used by the sweep harness.

pub mod beamforming;
pub mod canceller;
pub mod channel;
pub mod codebook;
pub mod error;
pub mod numerics;
pub mod orchestrator;
pub mod rates;
pub mod rng;
pub mod scalar;
pub mod sweep;

pub use error::{Error, Result};
pub use numerics::ComplexMatrix;
pub use scalar::{dbm_to_watts, watts_to_dbm, Real};

/// Double-precision complex matrix.
pub type CMatrix = ComplexMatrix<f64>;
/// Single-precision complex matrix.
pub type CMatrix32 = ComplexMatrix<f32>;
pub type Svd = numerics::SvdResult<f64>;
pub type Codebook = codebook::BeamCodebook<f64>;
pub type Channels = channel::ChannelRealization<f64>;
pub type Design = beamforming::HybridDesign<f64>;
pub type Trial = orchestrator::TrialResult<f64>;
pub type Rates = rates::RateRecord<f64>;
