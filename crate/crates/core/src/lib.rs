//! Secondary-user power control over a temporally correlated Rayleigh primary link.
//!
//! The primary transmitter sends at constant power and rate while its channel
//! gain evolves as a first-order Gauss-Markov process. A secondary transmitter
//! overhears link-layer feedback (either the delayed gain itself or a one-bit
//! ACK/NACK) and picks its transmit power each packet to maximize a weighted
//! sum of primary and secondary throughput.
//!
//! Modules:
//! - [`fading`]: outage thresholds, the conditional gain pdf and its Marcum-Q
//!   CDF, the weighted-sum objective, and the Bessel/Marcum numerics behind them.
//! - [`channel`]: seeded generation of AR(1) and Jakes sum-of-sinusoids gain
//!   traces.
//! - [`belief`]: grid-discretized Bayesian filter over the primary gain driven
//!   by ACK/NACK observations.
//! - [`policy`]: greedy weighted-sum power selection and the constrained
//!   delayed-CSI policy via Lagrangian dual bisection.
//! - [`sim`]: Monte Carlo harness and Pareto sweeps over the weighting
//!   parameter.
//! - [`validate`]: the named invariant checks behind `cogpower validate`.
//!
//! With the default `parallel` feature, realizations and per-node searches run
//! on rayon. Disabling it yields a sequential build with identical outputs.

pub mod belief;
pub mod channel;
pub mod fading;
pub mod policy;
pub mod sim;
pub mod validate;

mod par;
pub(crate) mod quad;

pub use belief::{ArqObservation, Belief, GammaGrid, TransitionKernel};
pub use channel::{ChannelModel, ChannelTrace, ComplexGain};
pub use fading::{FadingParams, LinkBudget};
pub use policy::{PowerGrid, PowerPolicy};
pub use sim::{PacketCount, ParetoPoint, PolicyKind, SimConfig, Simulator, TraceStats};

/// Library error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A belief and a kernel (or two beliefs) were built on different grids.
    #[error("grid mismatch between belief and transition kernel")]
    GridMismatch,
    /// The outage constraint cannot be met even with zero secondary power.
    #[error(
        "outage target {target:.6} is infeasible: natural outage floor is {natural_outage:.6}"
    )]
    Infeasible { natural_outage: f64, target: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
