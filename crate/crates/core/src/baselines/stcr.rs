//! Synopsis-based retrieval: nodes collect Bloom-filter advertisements from
//! lower-centrality peers and bind requests to advertised providers.

use std::collections::BTreeMap;

use super::bloom::BloomFilter;
use crate::naming::DataName;
use crate::sndn::{InterestDecision, InterestPacket, InterestPhase};
use crate::{Duration, NodeId, Time};

pub const DEFAULT_BLOOM_BITS: u32 = 4096;
pub const DEFAULT_BLOOM_HASHES: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advertisement {
    pub filter: BloomFilter,
    pub at: Time,
}

/// Advertisements a node has collected, one filter per advertiser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentSynopsis {
    pub owner: NodeId,
    m: u32,
    k: u32,
    adverts: BTreeMap<NodeId, Advertisement>,
}

impl ContentSynopsis {
    pub fn new(owner: NodeId, m: u32, k: u32) -> Self {
        Self {
            owner,
            m,
            k,
            adverts: BTreeMap::new(),
        }
    }

    /// Replaces `advertiser`'s entry with a filter over `names`.
    pub fn advertise<'a>(&mut self, advertiser: NodeId, names: impl IntoIterator<Item = &'a DataName>, at: Time) {
        let mut filter = BloomFilter::new(self.m, self.k);
        for n in names {
            filter.insert(n);
        }
        self.adverts.insert(advertiser, Advertisement { filter, at });
    }

    /// Installs a ready-made filter (used by fixtures forcing collisions).
    pub fn insert_filter(&mut self, advertiser: NodeId, filter: BloomFilter, at: Time) {
        self.adverts.insert(advertiser, Advertisement { filter, at });
    }

    /// Drops advertisements older than `window`.
    pub fn expire(&mut self, at: Time, window: Duration) {
        let lo = at.saturating_sub(window);
        self.adverts.retain(|_, a| a.at >= lo);
    }

    /// Live advertisers whose filter claims `name`, with advertisement times.
    pub fn query(&self, name: &DataName, at: Time, window: Duration) -> Vec<(NodeId, Time)> {
        let lo = at.saturating_sub(window);
        self.adverts
            .iter()
            .filter(|(_, a)| a.at >= lo && a.at <= at && a.filter.contains(name))
            .map(|(n, a)| (*n, a.at))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.adverts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adverts.is_empty()
    }
}

/// Picks a provider for any of `candidates` from the given synopses: the most
/// recently advertised one, lowest id on ties. `exclude` nodes are skipped.
pub fn discover<'a>(
    synopses: &[&ContentSynopsis],
    candidates: impl IntoIterator<Item = &'a DataName> + Clone,
    at: Time,
    window: Duration,
    exclude: &[NodeId],
) -> Option<NodeId> {
    let mut best: Option<(Time, NodeId)> = None;
    for s in synopses {
        for item in candidates.clone() {
            for (p, t) in s.query(item, at, window) {
                if exclude.contains(&p) {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bt, bp)) => t > bt || (t == bt && p < bp),
                };
                if better {
                    best = Some((t, p));
                }
            }
        }
    }
    best.map(|(_, p)| p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StcrView {
    pub node: NodeId,
    pub holds_match: bool,
    pub centrality: u32,
}

/// Binding change plus the action to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StcrDecision {
    /// `Some(b)` replaces the packet's binding with `b`.
    pub rebind: Option<Option<NodeId>>,
    pub action: InterestDecision,
}

/// Interest rule: satisfy on any provider; a bound request that meets its
/// provider without the data unbinds; unbound requests try to bind through
/// the carrier's and the peer's synopses; bound requests ascend centrality.
pub fn stcr_interest_decision(
    carrier: &StcrView,
    peer: &StcrView,
    packet: &InterestPacket,
    at: Time,
    discover: impl FnOnce() -> Option<NodeId>,
) -> StcrDecision {
    use crate::sndn::DropReason;
    let plain = |action| StcrDecision { rebind: None, action };
    if packet.expired(at) {
        return plain(InterestDecision::Drop(DropReason::Expired));
    }
    if peer.holds_match {
        return plain(InterestDecision::Satisfy);
    }
    let mut binding = packet.bound_provider;
    let mut rebind = None;
    if binding == Some(peer.node) {
        binding = None;
        rebind = Some(None);
    }
    if binding.is_none() {
        match discover() {
            Some(p) => {
                binding = Some(p);
                rebind = Some(Some(p));
            }
            None => {
                return StcrDecision {
                    rebind,
                    action: InterestDecision::Keep,
                }
            }
        }
    }
    let action = if peer.centrality > carrier.centrality {
        InterestDecision::Transfer(InterestPhase::Micro)
    } else {
        InterestDecision::Keep
    };
    debug_assert!(binding.is_some());
    StcrDecision { rebind, action }
}

/// Phase label for a binding state.
pub fn binding_phase(bound: Option<NodeId>) -> InterestPhase {
    if bound.is_some() {
        InterestPhase::Micro
    } else {
        InterestPhase::Macro
    }
}
