//! Performance analysis of a downlink MIMO system in which one base-station
//! waveform serves both radar-like sensing and multiuser communication.
//!
//! The library covers:
//!
//! - system/channel modelling: sensing correlation matrices, Rayleigh-faded
//!   user channels, zero-forcing effective gains ([`model`]);
//! - power allocation: water-filling for sensing and communication,
//!   frequency-division (FDSAC) splits, and a rate-profile Pareto solver
//!   ([`allocation`]);
//! - rate evaluation: sensing rate, sum communication rate, a closed-form
//!   ergodic communication rate built on exponential integrals, and
//!   high-SNR asymptotes ([`rates`], [`specfun`]);
//! - Monte Carlo estimation of ergodic rates and outage probability with
//!   reproducible trial-parallel execution, plus slope/diversity fitting
//!   ([`montecarlo`]);
//! - sensing-communication rate-region boundaries and containment checks
//!   ([`region`]).
//!
//! All randomized operations are deterministic functions of an explicit
//! 64-bit seed and reproduce bit-identically under any thread count.

pub mod allocation;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod rates;
pub mod region;
pub mod rng;
pub mod specfun;

pub use allocation::{Design, ParetoPoint, PowerAllocation};
pub use model::{ChannelDraw, ChannelSampler, SensingCorrelation, SystemConfig, TargetScene};
pub use montecarlo::{McDesign, McEstimate, SlopeFit};
pub use rates::RateTuple;
pub use region::{RegionBoundary, RegionLabel};
