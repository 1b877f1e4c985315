//! Throughput bounds and slotted-time Monte Carlo simulation for
//! energy-harvesting point-to-point links over Rayleigh fading.
//!
//! The crate is split the way the computation flows:
//!
//! - [`numerics`]: exponential integral, fading log-moments, series and root finding.
//! - [`model`]: arrival processes, the fading channel, batteries and RNG streams.
//! - [`bounds`]: closed-form upper/lower throughput bounds and gap constants.
//! - [`policies`]: per-slot decision rules (constant fraction, common threshold, baselines).
//! - [`sim`]: the seeded replication engine and its statistics.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! at the crate root fix the scalar to `f64`, which is what the simulator and
//! the command line use.

// `!(x > 0)` is how domain checks reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod model;
pub mod numerics;
pub mod policies;
pub mod sim;

#[cfg(test)]
mod testutil;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub use error::{Error, Result};

/// Floating point scalar the numerical core is written against.
pub trait Scalar: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy widening used when feeding statistics accumulators.
    fn widen(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {}

pub type Real = f64;

pub type Tolerance = numerics::Tolerance<Real>;
pub type ArrivalModel = model::ArrivalModel<Real>;
pub type BatteryState = model::BatteryState<Real>;
pub type MedianQuantizer = model::MedianQuantizer<Real>;
pub type BoundsReport = bounds::BoundsReport<Real>;
pub type RxBoundsReport = bounds::RxBoundsReport<Real>;
pub type CapacityBracket = bounds::CapacityBracket<Real>;
pub type GapRecursion = bounds::GapRecursion<Real>;
pub type CfpState = policies::CfpState<Real>;
pub type CtpState = policies::CtpState<Real>;
pub type TxPolicy = policies::TxPolicy<Real>;
pub type RxPolicy = policies::RxPolicy<Real>;
pub type SimConfig = sim::SimConfig<Real>;
pub type ReceiverConfig = sim::ReceiverConfig<Real>;

pub use model::{ChannelModel, RngStream, StreamRole};
pub use numerics::LogBase;
pub use sim::ThroughputEstimate;
