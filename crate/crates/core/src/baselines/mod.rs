//! Comparison schemes sharing the engine's scheme interface: Flood, Direct,
//! FC-BubbleRap and a synopsis-based (STCR-style) scheme.
//!
//! Flood is copy-based and lives in the engine's flood router; the other
//! schemes are single-copy and expose pure decision rules here. Data routing
//! for FC-BubbleRap and STCR reuses [`crate::sndn::data_forward_decision`].

pub mod bloom;
pub mod stcr;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::sndn::{
    DataDecision, DataPacket, DropReason, InterestDecision, InterestPacket, InterestPhase,
};
use crate::{NodeId, Time};

pub use bloom::BloomFilter;
pub use stcr::{ContentSynopsis, StcrDecision, StcrView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeId {
    Sndn,
    Flood,
    Direct,
    FcBubblerap,
    Stcr,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] = [
        SchemeId::Sndn,
        SchemeId::Flood,
        SchemeId::Direct,
        SchemeId::FcBubblerap,
        SchemeId::Stcr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Sndn => "sndn",
            SchemeId::Flood => "flood",
            SchemeId::Direct => "direct",
            SchemeId::FcBubblerap => "fc_bubblerap",
            SchemeId::Stcr => "stcr",
        }
    }

    /// Whether at most one copy of a request's packet exists at a time.
    pub fn single_copy(self) -> bool {
        self != SchemeId::Flood
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme `{s}`")))
    }
}

/// Direct: the consumer keeps its Interest and only a provider met in person
/// satisfies it.
pub fn direct_interest_decision(peer_holds_match: bool, packet: &InterestPacket, at: Time) -> InterestDecision {
    if packet.expired(at) {
        InterestDecision::Drop(DropReason::Expired)
    } else if peer_holds_match {
        InterestDecision::Satisfy
    } else {
        InterestDecision::Keep
    }
}

/// Direct: Data stays at the provider until handed to the consumer.
pub fn direct_data_decision(peer: NodeId, packet: &DataPacket, at: Time) -> DataDecision {
    if packet.expired(at) {
        DataDecision::Drop(DropReason::Expired)
    } else if peer == packet.consumer {
        DataDecision::Deliver
    } else {
        DataDecision::Keep
    }
}

/// What a node looks like to the FC-BubbleRap Interest rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BubbleView {
    pub node: NodeId,
    pub holds_match: bool,
    /// The node's circle name covers the interest.
    pub covers: bool,
    /// Windowed degree over all users.
    pub global: u32,
    /// Windowed degree among the packet's anchor circle (0 when unanchored).
    pub local: u32,
    /// Membership in the packet's anchor circle.
    pub in_anchor: bool,
}

/// FC-BubbleRap Interest rule: global-centrality ascent until a covering
/// circle, then local-centrality ascent restricted to that circle.
///
/// `Transfer(Micro)` out of macro phase means the peer's circle becomes the
/// anchor.
pub fn fc_bubblerap_interest_decision(
    carrier: &BubbleView,
    peer: &BubbleView,
    packet: &InterestPacket,
    at: Time,
) -> InterestDecision {
    if packet.expired(at) {
        return InterestDecision::Drop(DropReason::Expired);
    }
    if peer.holds_match {
        return InterestDecision::Satisfy;
    }
    let phase = if packet.anchor.is_some() {
        InterestPhase::Micro
    } else {
        InterestPhase::Macro
    };
    match phase {
        InterestPhase::Macro => {
            if peer.covers {
                InterestDecision::Transfer(InterestPhase::Micro)
            } else if peer.global > carrier.global {
                InterestDecision::Transfer(InterestPhase::Macro)
            } else {
                InterestDecision::Keep
            }
        }
        InterestPhase::Micro => {
            if peer.in_anchor && peer.local > carrier.local {
                InterestDecision::Transfer(InterestPhase::Micro)
            } else {
                InterestDecision::Keep
            }
        }
    }
}
