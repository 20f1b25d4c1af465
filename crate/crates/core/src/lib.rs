//! Exact capacity region and constructive achievability for the linear shift
//! deterministic Y-channel: three users exchanging six unicast messages
//! through a full-duplex relay.
//!
//! The crate is `no_std` (with `alloc`). File formats, JSON, and the command
//! line live in the `ychannel` companion crate.
//!
//! * [`channel`]: bit-exact shift model, relay level conventions.
//! * [`region`]: the outer-bound polytope, membership, vertices, redundancy.
//! * [`scheme`]: the three-stage relay level planner and symbol extension.
//! * [`simulator`]: end-to-end execution of a plan over the channel.
//! * [`oracle`]: independent brute-force cross-checks (exact LP, scans).

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod channel;
pub mod oracle;
pub mod rate;
pub mod region;
pub mod scheme;
pub mod simulator;

pub use channel::{ChannelConfig, ChannelError, Direction, LevelIndex, Signal};
pub use rate::{IntegerRates, ParseRationalError, RateError, RateTuple, Rational, Stream, User};
pub use region::{BoundLabel, Inequality, ParseLabelError, Region, Vertex};
pub use scheme::{LevelPlan, SchemeError, StreamAssignment};
pub use simulator::{MessageSet, SimulationReport, VerifyMode};
