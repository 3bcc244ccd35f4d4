//! The sNDN forwarding engine: FIB count records, PIT with consumer identity
//! and centrality stamps, two-phase Interest routing and two-step Data
//! routing.
//!
//! Decision functions are pure: the caller builds a small view of the carrier
//! and the peer at contact time and applies the returned action.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circle::ComponentCounts;
use crate::naming::{ComponentId, ComponentSet, DataName, InterestName};
use crate::{Duration, NodeId, Time};

/// Monotone request identifier, assigned in creation order.
pub type RequestId = u64;

/// D2D interface tag stored in the FIB next-hop face field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Face {
    #[default]
    D2d,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FibEntry {
    pub face: Face,
    /// Peer → last time its circle name carried this component.
    pub contributors: BTreeMap<NodeId, Time>,
}

/// FIB whose cost field holds, per component, the number of distinct circles
/// (the owner's own included) seen carrying it within the window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fib {
    window: Duration,
    own_name: ComponentSet,
    entries: BTreeMap<ComponentId, FibEntry>,
}

impl Fib {
    pub fn new(window: Duration) -> Self {
        Self {
            window,
            own_name: ComponentSet::new(),
            entries: BTreeMap::new(),
        }
    }

    /// The owner's current circle name, which always contributes one.
    pub fn set_own_name(&mut self, name: &ComponentSet) {
        if &self.own_name != name {
            self.own_name = name.clone();
        }
    }

    pub fn own_name(&self) -> &ComponentSet {
        &self.own_name
    }

    /// Records `peer` as a contributor for every component of its circle name.
    pub fn update_on_encounter(&mut self, peer: NodeId, peer_circle_name: &ComponentSet, at: Time) {
        for c in peer_circle_name {
            let e = self.entries.entry(*c).or_default();
            e.contributors.insert(peer, at);
        }
        self.prune(at);
    }

    /// Drops contributors last seen before the window.
    pub fn prune(&mut self, at: Time) {
        let lo = at.saturating_sub(self.window);
        self.entries.retain(|_, e| {
            e.contributors.retain(|_, seen| *seen >= lo);
            !e.contributors.is_empty()
        });
    }

    /// Count record for `c` at time `at`.
    pub fn count(&self, c: ComponentId, at: Time) -> u32 {
        let lo = at.saturating_sub(self.window);
        let peers = self
            .entries
            .get(&c)
            .map(|e| e.contributors.values().filter(|t| **t >= lo && **t <= at).count())
            .unwrap_or(0);
        peers as u32 + u32::from(self.own_name.contains(&c))
    }

    /// Every non-zero count record at `at`.
    pub fn counts(&self, at: Time) -> BTreeMap<ComponentId, u32> {
        let keys: BTreeSet<ComponentId> = self
            .entries
            .keys()
            .chain(self.own_name.iter())
            .copied()
            .collect();
        keys.into_iter()
            .map(|c| (c, self.count(c, at)))
            .filter(|(_, n)| *n > 0)
            .collect()
    }

    pub fn entry(&self, c: ComponentId) -> Option<&FibEntry> {
        self.entries.get(&c)
    }
}

/// `U_I`: the smallest count record over the interest's components, zero if
/// any component is missing.
pub fn data_directionality(fib: &Fib, interest: &InterestName, at: Time) -> u32 {
    interest
        .components()
        .iter()
        .map(|c| fib.count(*c, at))
        .min()
        .unwrap_or(0)
}

/// `U'_I`: the smallest neighbour-component-map count over the interest's
/// components, zero if any component is missing.
pub fn data_location(ncm: &ComponentCounts, interest: &InterestName) -> u32 {
    interest
        .components()
        .iter()
        .map(|c| ncm.get(c).copied().unwrap_or(0))
        .min()
        .unwrap_or(0)
}

/// PIT in-record. The face field keeps the consumer identity and is never
/// rewritten along the path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitEntry {
    pub interest: InterestName,
    pub consumer: NodeId,
    pub created: Time,
    pub ttl: Duration,
    pub centrality_stamp: u32,
}

/// The dummy-`sNDN` entry a Data custodian keeps; the nonce field carries the
/// custodian's centrality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPitEntry {
    pub consumer: NodeId,
    pub centrality_stamp: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pit {
    interests: BTreeMap<RequestId, PitEntry>,
    data: BTreeMap<RequestId, DataPitEntry>,
}

impl Pit {
    pub fn install_interest(&mut self, id: RequestId, entry: PitEntry) {
        self.interests.insert(id, entry);
    }

    pub fn remove_interest(&mut self, id: RequestId) -> Option<PitEntry> {
        self.interests.remove(&id)
    }

    pub fn interest(&self, id: RequestId) -> Option<&PitEntry> {
        self.interests.get(&id)
    }

    pub fn install_data(&mut self, id: RequestId, entry: DataPitEntry) {
        self.data.insert(id, entry);
    }

    pub fn remove_data(&mut self, id: RequestId) -> Option<DataPitEntry> {
        self.data.remove(&id)
    }

    pub fn data(&self, id: RequestId) -> Option<&DataPitEntry> {
        self.data.get(&id)
    }

    pub fn len(&self) -> usize {
        self.interests.len() + self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InterestPhase {
    /// Searching for a circle whose name covers the interest.
    Macro,
    /// Searching inside such a circle.
    Micro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DataPhase {
    Centrality,
    Circle,
    Hold,
}

impl fmt::Display for InterestPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InterestPhase::Macro => "macro",
            InterestPhase::Micro => "micro",
        })
    }
}

impl fmt::Display for DataPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataPhase::Centrality => "centrality",
            DataPhase::Circle => "circle",
            DataPhase::Hold => "hold",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterestPacket {
    pub id: RequestId,
    pub name: InterestName,
    pub consumer: NodeId,
    pub created: Time,
    pub ttl: Duration,
    pub hops: u32,
    pub custodian: NodeId,
    pub phase: InterestPhase,
    /// Provider this request is bound to (synopsis-based scheme only).
    pub bound_provider: Option<NodeId>,
    /// Members of the covering circle the packet entered (community-ranked
    /// scheme only).
    pub anchor: Option<Arc<BTreeSet<NodeId>>>,
}

impl InterestPacket {
    pub fn new(id: RequestId, name: InterestName, consumer: NodeId, created: Time, ttl: Duration) -> Self {
        Self {
            id,
            name,
            consumer,
            created,
            ttl,
            hops: 0,
            custodian: consumer,
            phase: InterestPhase::Macro,
            bound_provider: None,
            anchor: None,
        }
    }

    pub fn deadline(&self) -> Time {
        self.created + self.ttl
    }

    pub fn expired(&self, at: Time) -> bool {
        at > self.deadline()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPacket {
    pub id: RequestId,
    pub name: DataName,
    pub consumer: NodeId,
    pub provider: NodeId,
    pub interest_created: Time,
    pub ttl: Duration,
    /// Relays used on the Interest leg.
    pub interest_hops: u32,
    pub hops: u32,
    pub custodian: NodeId,
    pub phase: DataPhase,
}

impl DataPacket {
    pub fn deadline(&self) -> Time {
        self.interest_created + self.ttl
    }

    pub fn expired(&self, at: Time) -> bool {
        at > self.deadline()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DropReason {
    Expired,
}

/// What a carrier and a peer look like to the Interest rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterestView {
    pub node: NodeId,
    /// The node's content store holds an item matching the interest.
    pub holds_match: bool,
    /// The node's circle name covers the interest.
    pub covers: bool,
    /// `U_I` at the node.
    pub directionality: u32,
    /// `U'_I` at the node.
    pub location: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterestDecision {
    Keep,
    Transfer(InterestPhase),
    Satisfy,
    Drop(DropReason),
}

/// The phase a packet has at a custodian: macro packets switch to micro as
/// soon as they sit in a covering circle.
pub fn settle_interest_phase(phase: InterestPhase, custodian_covers: bool) -> InterestPhase {
    match phase {
        InterestPhase::Macro if custodian_covers => InterestPhase::Micro,
        p => p,
    }
}

/// Interest rule at a contact between the packet's carrier and a peer.
///
/// Providers satisfy unconditionally. In macro phase the packet moves into a
/// covering circle, or up strictly higher data directionality. In micro phase
/// it moves up strictly higher data location, or from a non-covering carrier
/// to a covering peer. Ties keep.
pub fn interest_forward_decision(
    carrier: &InterestView,
    peer: &InterestView,
    packet: &InterestPacket,
    at: Time,
) -> InterestDecision {
    if packet.expired(at) {
        return InterestDecision::Drop(DropReason::Expired);
    }
    if peer.holds_match {
        return InterestDecision::Satisfy;
    }
    match settle_interest_phase(packet.phase, carrier.covers) {
        InterestPhase::Macro => {
            if peer.covers {
                InterestDecision::Transfer(InterestPhase::Micro)
            } else if peer.directionality > carrier.directionality {
                InterestDecision::Transfer(InterestPhase::Macro)
            } else {
                InterestDecision::Keep
            }
        }
        InterestPhase::Micro => {
            if peer.location > carrier.location || (peer.covers && !carrier.covers) {
                InterestDecision::Transfer(InterestPhase::Micro)
            } else {
                InterestDecision::Keep
            }
        }
    }
}

/// Builds the Data packet at a provider and swaps the provider's PIT
/// in-record for the dummy data entry carrying its centrality.
///
/// The consumer comes from the in-record when present, falling back to the
/// packet header.
pub fn provider_satisfy(
    pit: &mut Pit,
    provider: NodeId,
    provider_centrality: u32,
    packet: &InterestPacket,
    item: DataName,
    initial_phase: DataPhase,
) -> DataPacket {
    let consumer = pit
        .remove_interest(packet.id)
        .map(|e| e.consumer)
        .unwrap_or(packet.consumer);
    pit.install_data(
        packet.id,
        DataPitEntry {
            consumer,
            centrality_stamp: provider_centrality,
        },
    );
    DataPacket {
        id: packet.id,
        name: item,
        consumer,
        provider,
        interest_created: packet.created,
        ttl: packet.ttl,
        interest_hops: packet.hops,
        hops: 0,
        custodian: provider,
        phase: initial_phase,
    }
}

/// What a carrier and a peer look like to the Data rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataView {
    pub node: NodeId,
    pub centrality: u32,
    /// The consumer is in the node's neighbour set.
    pub consumer_is_neighbour: bool,
    /// The consumer is anywhere in the node's two-hop circle.
    pub consumer_in_circle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataDecision {
    Keep,
    Transfer(DataPhase),
    Deliver,
    Drop(DropReason),
}

/// Phase a freshly created Data packet starts in at its provider.
pub fn initial_data_phase(provider: &DataView) -> DataPhase {
    if provider.consumer_is_neighbour {
        DataPhase::Hold
    } else if provider.consumer_in_circle {
        DataPhase::Circle
    } else {
        DataPhase::Centrality
    }
}

/// Data rule: centrality ascent until a circle containing the consumer, then
/// into the consumer's neighbour set, then hold until the consumer is met.
pub fn data_forward_decision(
    carrier: &DataView,
    peer: &DataView,
    packet: &DataPacket,
    at: Time,
) -> DataDecision {
    if packet.expired(at) {
        return DataDecision::Drop(DropReason::Expired);
    }
    if peer.node == packet.consumer {
        return DataDecision::Deliver;
    }
    match packet.phase {
        DataPhase::Hold => DataDecision::Keep,
        DataPhase::Circle => {
            if peer.consumer_is_neighbour {
                DataDecision::Transfer(DataPhase::Hold)
            } else {
                DataDecision::Keep
            }
        }
        DataPhase::Centrality => {
            if peer.consumer_is_neighbour {
                DataDecision::Transfer(DataPhase::Hold)
            } else if peer.consumer_in_circle {
                DataDecision::Transfer(DataPhase::Circle)
            } else if peer.centrality > carrier.centrality {
                DataDecision::Transfer(DataPhase::Centrality)
            } else {
                DataDecision::Keep
            }
        }
    }
}
