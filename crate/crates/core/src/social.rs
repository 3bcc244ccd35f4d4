//! Component freshness, logical/physical/social strength and windowed degree
//! centrality.
//!
//! Every quantity is evaluated over the backoff window `[T - T_p, T]`
//! (clamped at time zero).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::naming::{ComponentId, DataName};
use crate::traces::ContactEvent;
use crate::{Duration, NodeId, Time};

/// Parameters shared by strength evaluation and circle admission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrengthParams {
    /// Weight of logical strength; physical strength gets `1 - alpha`.
    pub alpha: f64,
    /// Backoff window `T_p` in seconds.
    pub window: Duration,
    /// Social strength a pair must strictly exceed to become friends.
    pub circle_threshold: f64,
    /// Length of one freshness tick in seconds.
    pub freshness_tick: Duration,
}

impl Default for StrengthParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            window: 3 * 3600,
            circle_threshold: 0.18,
            freshness_tick: 600,
        }
    }
}

fn window_start(at: Time, window: Duration) -> Time {
    at.saturating_sub(window)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Acquisition {
    pub at: Time,
    pub name: DataName,
}

/// One user's content-acquisition history, ordered by time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcquisitionLog {
    records: Vec<Acquisition>,
}

impl AcquisitionLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, at: Time, name: DataName) {
        let pos = self.records.partition_point(|r| r.at <= at);
        self.records.insert(pos, Acquisition { at, name });
    }

    pub fn records(&self) -> &[Acquisition] {
        &self.records
    }

    /// Records with `at - window <= time <= at`.
    pub fn in_window(&self, at: Time, window: Duration) -> &[Acquisition] {
        let lo = self
            .records
            .partition_point(|r| r.at < window_start(at, window));
        let hi = self.records.partition_point(|r| r.at <= at);
        &self.records[lo..hi.max(lo)]
    }
}

/// Contribution of an acquisition made at `acquired` to freshness at `at`:
/// `1 / (elapsed ticks)`, capped at 1 for a same-tick acquisition.
fn decay(at: Time, acquired: Time, tick: Duration) -> f64 {
    let tick = tick.max(1);
    let elapsed = at / tick - acquired / tick;
    if elapsed == 0 {
        1.0
    } else {
        1.0 / elapsed as f64
    }
}

/// Freshness of `component` for the log's owner at time `at`.
pub fn freshness(
    log: &AcquisitionLog,
    component: ComponentId,
    at: Time,
    window: Duration,
    tick: Duration,
) -> f64 {
    log.in_window(at, window)
        .iter()
        .filter(|r| r.name.contains(component))
        .map(|r| decay(at, r.at, tick))
        .sum()
}

/// All non-zero component freshness values of one user at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreshnessVector {
    pub at: Time,
    pub window: Duration,
    pub values: BTreeMap<ComponentId, f64>,
}

impl FreshnessVector {
    pub fn compute(log: &AcquisitionLog, at: Time, window: Duration, tick: Duration) -> Self {
        let mut values = BTreeMap::new();
        for r in log.in_window(at, window) {
            let d = decay(at, r.at, tick);
            for c in r.name.sorted() {
                *values.entry(*c).or_insert(0.0) += d;
            }
        }
        Self { at, window, values }
    }

    pub fn from_values(at: Time, window: Duration, values: BTreeMap<ComponentId, f64>) -> Self {
        Self { at, window, values }
    }

    pub fn get(&self, c: ComponentId) -> f64 {
        self.values.get(&c).copied().unwrap_or(0.0)
    }
}

/// Freshness-weighted Jaccard ratio: sum of minima over sum of maxima across
/// the union of both supports. Zero when both vectors are empty.
pub fn logical_strength(fi: &FreshnessVector, fj: &FreshnessVector) -> f64 {
    debug_assert_eq!((fi.at, fi.window), (fj.at, fj.window));
    let mut num = 0.0;
    let mut den = 0.0;
    let union: BTreeSet<&ComponentId> = fi.values.keys().chain(fj.values.keys()).collect();
    for c in union {
        let (a, b) = (fi.get(*c), fj.get(*c));
        num += a.min(b);
        den += a.max(b);
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Physical strength from a pair's disjoint, sorted contact intervals.
///
/// Contact durations inside the window count in full; every inter-contact gap
/// inside the window (including the leading and trailing partial gaps)
/// contributes `ln(gap + 1)`. The sum is divided by the evaluated window
/// length, which is shorter than `window` only near time zero.
pub fn physical_strength(intervals: &[(Time, Time)], at: Time, window: Duration) -> f64 {
    let ws = window_start(at, window);
    let len = at - ws;
    if len == 0 {
        return 0.0;
    }
    let first = intervals.partition_point(|(_, e)| *e <= ws);
    let mut total = 0.0;
    let mut cursor = ws;
    for &(s, e) in &intervals[first..] {
        if s >= at {
            break;
        }
        let (s, e) = (s.max(ws), e.min(at));
        total += ((s - cursor) as f64).ln_1p();
        total += (e - s) as f64;
        cursor = e;
    }
    total += ((at - cursor) as f64).ln_1p();
    total / len as f64
}

/// `alpha * wl + (1 - alpha) * wp`.
pub fn social_strength(wl: f64, wp: f64, alpha: f64) -> f64 {
    alpha * wl + (1.0 - alpha) * wp
}

#[derive(Debug, Clone, Default)]
struct NodeContacts {
    /// `(start, end, peer)` sorted by start.
    spans: Vec<(Time, Time, NodeId)>,
    max_duration: Duration,
}

/// Undirected per-pair and per-node contact timelines.
///
/// The full trace is loaded up front; queries at time `T` only see contacts
/// that have started by `T`, clipped at `T`, which is exactly what a device
/// recording its own encounters would have.
#[derive(Debug, Clone, Default)]
pub struct ContactHistory {
    pairs: HashMap<(NodeId, NodeId), Vec<(Time, Time)>>,
    nodes: HashMap<NodeId, NodeContacts>,
}

fn pair_key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ContactHistory {
    /// Builds the history from normalized events.
    pub fn from_events<'a>(events: impl IntoIterator<Item = &'a ContactEvent>) -> Self {
        let mut h = ContactHistory::default();
        for e in events {
            h.pairs
                .entry(pair_key(e.a, e.b))
                .or_default()
                .push((e.start, e.end));
            for (me, peer) in [(e.a, e.b), (e.b, e.a)] {
                let n = h.nodes.entry(me).or_default();
                n.spans.push((e.start, e.end, peer));
                n.max_duration = n.max_duration.max(e.end - e.start);
            }
        }
        for v in h.pairs.values_mut() {
            v.sort_unstable();
        }
        for n in h.nodes.values_mut() {
            n.spans.sort_unstable();
        }
        h
    }

    pub fn intervals(&self, a: NodeId, b: NodeId) -> &[(Time, Time)] {
        self.pairs
            .get(&pair_key(a, b))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn physical_strength(&self, a: NodeId, b: NodeId, at: Time, window: Duration) -> f64 {
        physical_strength(self.intervals(a, b), at, window)
    }

    /// Peers `node` was in contact with at some point of `[T - T_p, T]`.
    pub fn peers_in_window(&self, node: NodeId, at: Time, window: Duration) -> BTreeSet<NodeId> {
        let Some(n) = self.nodes.get(&node) else {
            return BTreeSet::new();
        };
        let ws = window_start(at, window);
        let hi = n.spans.partition_point(|(s, _, _)| *s <= at);
        let lo_start = ws.saturating_sub(n.max_duration);
        let lo = n.spans.partition_point(|(s, _, _)| *s < lo_start);
        n.spans[lo..hi]
            .iter()
            .filter(|(_, e, _)| *e > ws)
            .map(|(_, _, p)| *p)
            .collect()
    }

    /// Windowed degree centrality: distinct peers contacted within the window.
    pub fn degree_centrality(&self, node: NodeId, at: Time, window: Duration) -> u32 {
        self.peers_in_window(node, at, window).len() as u32
    }

    /// Degree counted only among `members`.
    pub fn degree_among(
        &self,
        node: NodeId,
        at: Time,
        window: Duration,
        members: &BTreeSet<NodeId>,
    ) -> u32 {
        self.peers_in_window(node, at, window)
            .iter()
            .filter(|p| members.contains(p))
            .count() as u32
    }
}
