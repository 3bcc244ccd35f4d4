//! Neighbour sets, two-hop Friendship Circles and the circle naming policy.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::naming::{ComponentId, ComponentSet, DataName, Namespace};
use crate::{Duration, NodeId, Time};

/// Component → number of stored items carrying that component.
pub type ComponentCounts = BTreeMap<ComponentId, u32>;

/// Default key-component threshold κ.
pub const DEFAULT_KAPPA: f64 = 0.25;

/// Per-owner count of stored items per component.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameComponentMap {
    counts: ComponentCounts,
}

impl NameComponentMap {
    pub fn from_items<'a>(items: impl IntoIterator<Item = &'a DataName>) -> Self {
        let mut m = Self::default();
        for item in items {
            m.add(item);
        }
        m
    }

    pub fn add(&mut self, item: &DataName) {
        for c in item.sorted() {
            *self.counts.entry(*c).or_insert(0) += 1;
        }
    }

    pub fn remove(&mut self, item: &DataName) {
        for c in item.sorted() {
            if let Some(n) = self.counts.get_mut(c) {
                *n -= 1;
                if *n == 0 {
                    self.counts.remove(c);
                }
            }
        }
    }

    pub fn counts(&self) -> &ComponentCounts {
        &self.counts
    }

    pub fn get(&self, c: ComponentId) -> u32 {
        self.counts.get(&c).copied().unwrap_or(0)
    }
}

/// What an owner remembers about one friend.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FriendAttributes {
    pub friend: NodeId,
    /// Social strength at admission.
    pub strength: f64,
    pub admitted_at: Time,
    /// Remaining lifetime; the entry is removed when this reaches zero.
    pub fresh_timer: Duration,
    /// The friend's component map as of the last encounter.
    pub component_map: ComponentCounts,
    /// The friend's neighbour-set name as of the last encounter.
    pub neighbour_set_name: ComponentSet,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighbourSet {
    pub entries: BTreeMap<NodeId, FriendAttributes>,
}

/// Two-hop circle: for every friend, a snapshot of that friend's neighbour-set
/// membership.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FriendshipCircle {
    pub branches: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

/// Result of processing one encounter on the circle layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EncounterOutcome {
    /// Already mutual friends; caches refreshed, no strength evaluation.
    Refreshed,
    Admitted { strength: f64 },
    Rejected { strength: f64 },
}

/// Per-node circle state: own component map, neighbour set, circle branches
/// and the derived names.
#[derive(Debug, Clone)]
pub struct CircleState {
    owner: NodeId,
    own_map: NameComponentMap,
    neighbours: NeighbourSet,
    circle: FriendshipCircle,
    neighbour_set_name: ComponentSet,
    circle_name: ComponentSet,
    last_tick: Time,
}

impl CircleState {
    pub fn new(owner: NodeId) -> Self {
        Self {
            owner,
            own_map: NameComponentMap::default(),
            neighbours: NeighbourSet::default(),
            circle: FriendshipCircle::default(),
            neighbour_set_name: ComponentSet::new(),
            circle_name: ComponentSet::new(),
            last_tick: 0,
        }
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn own_map(&self) -> &NameComponentMap {
        &self.own_map
    }

    pub fn neighbours(&self) -> &NeighbourSet {
        &self.neighbours
    }

    pub fn circle(&self) -> &FriendshipCircle {
        &self.circle
    }

    pub fn is_neighbour(&self, n: NodeId) -> bool {
        self.neighbours.entries.contains_key(&n)
    }

    /// Membership anywhere in the two-hop circle (friends or friends of
    /// friends).
    pub fn in_circle(&self, n: NodeId) -> bool {
        self.is_neighbour(n) || self.circle.branches.values().any(|b| b.contains(&n))
    }

    /// Every node id reachable through the circle, owner excluded.
    pub fn circle_members(&self) -> BTreeSet<NodeId> {
        let mut out: BTreeSet<NodeId> = self.neighbours.entries.keys().copied().collect();
        for b in self.circle.branches.values() {
            out.extend(b.iter().copied());
        }
        out.remove(&self.owner);
        out
    }

    pub fn neighbour_set_name(&self) -> &ComponentSet {
        &self.neighbour_set_name
    }

    pub fn circle_name(&self) -> &ComponentSet {
        &self.circle_name
    }

    /// Replaces the owner's component map without renaming.
    pub fn set_own_map(&mut self, map: NameComponentMap) {
        self.own_map = map;
    }

    /// Inserts a friend entry with its branch snapshot without renaming.
    pub fn insert_friend(&mut self, attrs: FriendAttributes, branch: BTreeSet<NodeId>) {
        self.circle.branches.insert(attrs.friend, branch);
        self.neighbours.entries.insert(attrs.friend, attrs);
    }

    /// Records a newly stored item and renames.
    pub fn add_item(&mut self, item: &DataName, kappa: f64) {
        self.own_map.add(item);
        self.recompute_names(kappa);
    }

    /// Pointwise sum of the owner's map and every friend's cached map.
    pub fn neighbour_component_map(&self) -> ComponentCounts {
        let mut out = self.own_map.counts.clone();
        for f in self.neighbours.entries.values() {
            for (c, n) in &f.component_map {
                *out.entry(*c).or_insert(0) += n;
            }
        }
        out
    }

    /// Components with `f_u * f_d > kappa` over the neighbour set (owner
    /// included).
    pub fn compute_neighbour_set_name(&self, kappa: f64) -> ComponentSet {
        let ncm = self.neighbour_component_map();
        let total: u64 = ncm.values().map(|n| *n as u64).sum();
        if total == 0 {
            return ComponentSet::new();
        }
        let members = 1 + self.neighbours.entries.len();
        ncm.iter()
            .filter(|(c, n)| {
                let holders = usize::from(self.own_map.get(**c) > 0)
                    + self
                        .neighbours
                        .entries
                        .values()
                        .filter(|f| f.component_map.get(c).copied().unwrap_or(0) > 0)
                        .count();
                let f_u = holders as f64 / members as f64;
                let f_d = **n as f64 / total as f64;
                f_u * f_d > kappa
            })
            .map(|(c, _)| *c)
            .collect()
    }

    fn compute_circle_name(&self) -> ComponentSet {
        let mut name = self.neighbour_set_name.clone();
        for f in self.neighbours.entries.values() {
            name.extend(f.neighbour_set_name.iter().copied());
        }
        name
    }

    /// Recomputes both names from the current own map and cached friend data.
    pub fn recompute_names(&mut self, kappa: f64) {
        self.neighbour_set_name = self.compute_neighbour_set_name(kappa);
        self.circle_name = self.compute_circle_name();
    }

    /// Counts every fresh timer down by `elapsed`; expired friends leave the
    /// neighbour set and the circle, and the names are recomputed.
    pub fn tick_timers(&mut self, elapsed: Duration, kappa: f64) -> Vec<NodeId> {
        self.last_tick += elapsed;
        if elapsed == 0 || self.neighbours.entries.is_empty() {
            return Vec::new();
        }
        let mut removed = Vec::new();
        for (id, f) in self.neighbours.entries.iter_mut() {
            f.fresh_timer = f.fresh_timer.saturating_sub(elapsed);
            if f.fresh_timer == 0 {
                removed.push(*id);
            }
        }
        for id in &removed {
            self.neighbours.entries.remove(id);
            self.circle.branches.remove(id);
        }
        if !removed.is_empty() {
            self.recompute_names(kappa);
        }
        removed
    }

    /// Ticks timers forward to absolute time `at`.
    pub fn advance_to(&mut self, at: Time, kappa: f64) -> Vec<NodeId> {
        if at <= self.last_tick {
            return Vec::new();
        }
        self.tick_timers(at - self.last_tick, kappa)
    }

    pub fn last_tick(&self) -> Time {
        self.last_tick
    }

    fn admit(&mut self, friend: NodeId, strength: f64, at: Time, window: Duration) {
        self.neighbours.entries.insert(
            friend,
            FriendAttributes {
                friend,
                strength,
                admitted_at: at,
                fresh_timer: window,
                component_map: ComponentCounts::new(),
                neighbour_set_name: ComponentSet::new(),
            },
        );
        self.circle.branches.insert(friend, BTreeSet::new());
    }

    /// One-line JSON snapshot with stable key order.
    pub fn dump_line(&self, ns: &Namespace) -> String {
        #[derive(Serialize)]
        struct Friend<'a> {
            strength: f64,
            fresh_timer: Duration,
            component_map: BTreeMap<&'a str, u32>,
            neighbour_set_name: Vec<&'a str>,
        }
        #[derive(Serialize)]
        struct Snapshot<'a> {
            node: u32,
            neighbours: BTreeMap<u32, Friend<'a>>,
            circle: BTreeMap<u32, Vec<u32>>,
            neighbour_set_name: Vec<&'a str>,
            circle_name: Vec<&'a str>,
        }
        let names = |s: &ComponentSet| -> Vec<&str> {
            let mut v: Vec<&str> = s.iter().map(|c| ns.token(*c)).collect();
            v.sort_unstable();
            v
        };
        let snap = Snapshot {
            node: self.owner.0,
            neighbours: self
                .neighbours
                .entries
                .iter()
                .map(|(id, f)| {
                    (
                        id.0,
                        Friend {
                            strength: f.strength,
                            fresh_timer: f.fresh_timer,
                            component_map: f
                                .component_map
                                .iter()
                                .map(|(c, n)| (ns.token(*c), *n))
                                .collect(),
                            neighbour_set_name: names(&f.neighbour_set_name),
                        },
                    )
                })
                .collect(),
            circle: self
                .circle
                .branches
                .iter()
                .map(|(id, b)| (id.0, b.iter().map(|n| n.0).collect()))
                .collect(),
            neighbour_set_name: names(&self.neighbour_set_name),
            circle_name: names(&self.circle_name),
        };
        serde_json::to_string(&snap).expect("snapshot serializes")
    }
}

/// Swaps current component maps, neighbour-set names and membership between
/// two friends, then renames both.
fn exchange(a: &mut CircleState, b: &mut CircleState, kappa: f64) {
    if let Some(f) = a.neighbours.entries.get_mut(&b.owner) {
        f.component_map = b.own_map.counts.clone();
    }
    if let Some(f) = b.neighbours.entries.get_mut(&a.owner) {
        f.component_map = a.own_map.counts.clone();
    }
    a.neighbour_set_name = a.compute_neighbour_set_name(kappa);
    b.neighbour_set_name = b.compute_neighbour_set_name(kappa);
    let a_members: BTreeSet<NodeId> = a.neighbours.entries.keys().copied().collect();
    let b_members: BTreeSet<NodeId> = b.neighbours.entries.keys().copied().collect();
    if let Some(f) = a.neighbours.entries.get_mut(&b.owner) {
        f.neighbour_set_name = b.neighbour_set_name.clone();
        a.circle.branches.insert(b.owner, b_members);
    }
    if let Some(f) = b.neighbours.entries.get_mut(&a.owner) {
        f.neighbour_set_name = a.neighbour_set_name.clone();
        b.circle.branches.insert(a.owner, a_members);
    }
    a.circle_name = a.compute_circle_name();
    b.circle_name = b.compute_circle_name();
}

/// Processes an encounter between two users on the circle layer.
///
/// Both states must already be advanced to `at`. Mutual friends only refresh
/// their caches; otherwise `strength` is evaluated once and both sides admit
/// each other iff it strictly exceeds `threshold`. Fresh timers are not reset
/// on re-encounter.
pub fn on_encounter(
    a: &mut CircleState,
    b: &mut CircleState,
    at: Time,
    window: Duration,
    threshold: f64,
    kappa: f64,
    strength: impl FnOnce() -> f64,
) -> EncounterOutcome {
    debug_assert_ne!(a.owner, b.owner);
    if a.is_neighbour(b.owner) && b.is_neighbour(a.owner) {
        exchange(a, b, kappa);
        return EncounterOutcome::Refreshed;
    }
    let ws = strength();
    if ws > threshold {
        a.admit(b.owner, ws, at, window);
        b.admit(a.owner, ws, at, window);
        exchange(a, b, kappa);
        EncounterOutcome::Admitted { strength: ws }
    } else {
        EncounterOutcome::Rejected { strength: ws }
    }
}
