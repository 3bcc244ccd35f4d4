//! Contact-trace-driven simulation of social-aware named-data content
//! retrieval between mobile devices.
//!
//! The crate is organised bottom-up:
//!
//! * [`naming`]: namespace interning, data and interest names, matching.
//! * [`traces`]: contact-trace and preference-profile ingestion, synthetic
//!   community traces.
//! * [`social`]: component freshness, logical/physical/social strength and
//!   windowed degree centrality.
//! * [`circle`]: neighbour sets, two-hop Friendship Circles and their names.
//! * [`sndn`]: FIB count records, PIT, and the Interest/Data forwarding rules.
//! * [`baselines`]: Flood, Direct, FC-BubbleRap and the synopsis-based scheme.
//! * [`engine`]: the deterministic discrete-event simulator and its metrics.

pub mod baselines;
pub mod circle;
pub mod engine;
pub mod error;
pub mod naming;
pub mod sndn;
pub mod social;
pub mod traces;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};

/// Simulation time in whole seconds.
pub type Time = u64;

/// A length of simulation time in whole seconds.
pub type Duration = u64;

/// Trace node identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
