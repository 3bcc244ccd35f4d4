//! The event loop and the two routers (single-copy custody and Flood copies).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::SimConfig;
use super::log::{EventKind, PacketEvent, PhaseTag};
use super::metrics::{Request, RequestStatus};
use super::sampler::{request_rng, ItemSampler};
use crate::baselines::stcr::{self, ContentSynopsis, StcrView};
use crate::baselines::{self, BubbleView, SchemeId};
use crate::circle::{self, CircleState};
use crate::error::{Error, Result};
use crate::naming::{matches, name_covers, Catalog, DataName, InterestName};
use crate::sndn::{
    self, data_directionality, data_location, initial_data_phase, provider_satisfy, settle_interest_phase,
    DataDecision, DataPacket, DataPitEntry, DataView, Fib, InterestDecision, InterestPacket, InterestPhase,
    InterestView, PitEntry, RequestId,
};
use crate::social::{logical_strength, social_strength, ContactHistory, FreshnessVector};
use crate::traces::{PreferenceProfile, TraceBundle};
use crate::{NodeId, Time};

const RANK_END: u8 = 0;
const RANK_START: u8 = 1;
const RANK_EXPIRY: u8 = 2;
const RANK_GENERATE: u8 = 3;

/// Queue key: time, kind rank, then two ids (node pair, request id or
/// user/slot).
type Ev = (Time, u8, u64, u64);

pub(crate) struct Node {
    pub id: NodeId,
    pub is_station: bool,
    pub store: BTreeSet<DataName>,
    /// Items obtained from base stations or already requested. Resampling
    /// checks this set instead of the store so the request stream is the
    /// same under every scheme.
    pub known: BTreeSet<DataName>,
    pub log: crate::social::AcquisitionLog,
    pub circle: CircleState,
    pub fib: Fib,
    pub pit: sndn::Pit,
    pub synopsis: ContentSynopsis,
    pub peers: BTreeSet<NodeId>,
    pub stations: u32,
    pub held: BTreeSet<RequestId>,
    /// Warm-up requests waiting for a base station: (deadline, item).
    pub warm_pending: Vec<(Time, DataName)>,
}

enum Live {
    Interest(InterestPacket),
    Data(DataPacket),
}

impl Live {
    fn custodian(&self) -> NodeId {
        match self {
            Live::Interest(p) => p.custodian,
            Live::Data(p) => p.custodian,
        }
    }
}

#[derive(Default)]
struct FloodCopies {
    interest: BTreeMap<NodeId, u32>,
    data: BTreeMap<NodeId, u32>,
    satisfied: BTreeSet<NodeId>,
    interest_transfers: u32,
    data_transfers: u32,
}

enum Step {
    Stay,
    Moved { to: NodeId, fresh: bool },
    Done,
}

pub(crate) struct Simulator<'a> {
    cfg: &'a SimConfig,
    catalog: &'a Catalog,
    horizon: Time,
    history: ContactHistory,
    pub nodes: Vec<Node>,
    index: HashMap<NodeId, usize>,
    samplers: BTreeMap<NodeId, ItemSampler>,
    pub requests: Vec<Request>,
    live: BTreeMap<RequestId, Live>,
    flood: BTreeMap<RequestId, FloodCopies>,
    pub events: Vec<PacketEvent>,
    queue: BinaryHeap<Reverse<Ev>>,
    link_used: HashMap<(NodeId, NodeId), u32>,
    pub warmup_requests: u64,
    pub warmup_served: u64,
}

fn pair(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl<'a> Simulator<'a> {
    pub fn new(
        cfg: &'a SimConfig,
        bundle: &'a TraceBundle,
        catalog: &'a Catalog,
        profiles: &BTreeMap<NodeId, PreferenceProfile>,
    ) -> Result<Self> {
        cfg.validate()?;
        if catalog.items.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        if bundle.horizon < cfg.warmup {
            return Err(Error::HorizonBeforeWarmup {
                horizon: bundle.horizon,
                warmup: cfg.warmup,
            });
        }
        for p in profiles.values() {
            if let Some(c) = p.weights.keys().find(|c| !catalog.namespace.contains(**c)) {
                return Err(Error::UnknownComponent(format!("{c} in profile of node {}", p.user)));
            }
        }

        let users: Vec<NodeId> = bundle.users().collect();
        let mut assigned: Vec<PreferenceProfile> = users
            .iter()
            .map(|u| {
                profiles
                    .get(u)
                    .cloned()
                    .unwrap_or_else(|| PreferenceProfile::uniform(*u, &catalog.namespace))
            })
            .collect();
        if cfg.shuffle_profiles {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5bd1_e995);
            assigned.shuffle(&mut rng);
        }
        let mut samplers = BTreeMap::new();
        for (u, p) in users.iter().zip(&assigned) {
            samplers.insert(*u, ItemSampler::new(p, catalog)?);
        }

        let history = ContactHistory::from_events(
            bundle
                .events
                .iter()
                .filter(|e| !bundle.is_station(e.a) && !bundle.is_station(e.b)),
        );
        let mut nodes = Vec::new();
        let mut index = HashMap::new();
        for n in &bundle.nodes {
            index.insert(*n, nodes.len());
            nodes.push(Node {
                id: *n,
                is_station: bundle.is_station(*n),
                store: BTreeSet::new(),
                known: BTreeSet::new(),
                log: Default::default(),
                circle: CircleState::new(*n),
                fib: Fib::new(cfg.params.window),
                pit: Default::default(),
                synopsis: ContentSynopsis::new(*n, cfg.bloom_bits, cfg.bloom_hashes),
                peers: BTreeSet::new(),
                stations: 0,
                held: BTreeSet::new(),
                warm_pending: Vec::new(),
            });
        }

        let mut queue = BinaryHeap::new();
        for e in &bundle.events {
            queue.push(Reverse((e.start, RANK_START, e.a.0 as u64, e.b.0 as u64)));
            queue.push(Reverse((e.end, RANK_END, e.a.0 as u64, e.b.0 as u64)));
        }
        for u in &users {
            queue.push(Reverse((0, RANK_GENERATE, u.0 as u64, 0)));
        }

        Ok(Self {
            cfg,
            catalog,
            horizon: bundle.horizon,
            history,
            nodes,
            index,
            samplers,
            requests: Vec::new(),
            live: BTreeMap::new(),
            flood: BTreeMap::new(),
            events: Vec::new(),
            queue,
            link_used: HashMap::new(),
            warmup_requests: 0,
            warmup_served: 0,
        })
    }

    /// Processes every event with time `<= until` (capped at the horizon).
    pub fn run_until(&mut self, until: Time) {
        let until = until.min(self.horizon);
        while let Some(Reverse(ev)) = self.queue.peek().copied() {
            if ev.0 > until {
                break;
            }
            self.queue.pop();
            let (t, rank, x, y) = ev;
            match rank {
                RANK_END => self.contact_end(NodeId(x as u32), NodeId(y as u32)),
                RANK_START => self.contact_start(NodeId(x as u32), NodeId(y as u32), t),
                RANK_EXPIRY => self.expire(x, t),
                _ => self.generate(NodeId(x as u32), y, t),
            }
        }
    }

    fn idx(&self, n: NodeId) -> usize {
        self.index[&n]
    }

    fn node(&self, n: NodeId) -> &Node {
        &self.nodes[self.idx(n)]
    }

    fn node_mut(&mut self, n: NodeId) -> &mut Node {
        let i = self.idx(n);
        &mut self.nodes[i]
    }

    fn two_mut(&mut self, a: NodeId, b: NodeId) -> (&mut Node, &mut Node) {
        let (i, j) = (self.idx(a), self.idx(b));
        assert_ne!(i, j);
        if i < j {
            let (lo, hi) = self.nodes.split_at_mut(j);
            (&mut lo[i], &mut hi[0])
        } else {
            let (lo, hi) = self.nodes.split_at_mut(i);
            (&mut hi[0], &mut lo[j])
        }
    }

    /// Brings lazily-maintained per-node state up to `t`.
    fn touch(&mut self, n: NodeId, t: Time) {
        let kappa = self.cfg.kappa;
        let node = self.node_mut(n);
        if node.is_station {
            return;
        }
        node.circle.advance_to(t, kappa);
        let name = node.circle.circle_name().clone();
        node.fib.set_own_name(&name);
    }

    fn log(&mut self, time: Time, request: RequestId, kind: EventKind, from: NodeId, to: NodeId, phase: PhaseTag, hops: u32) {
        self.events.push(PacketEvent {
            time,
            request,
            scheme: self.cfg.scheme,
            kind,
            from,
            to,
            phase,
            hops,
        });
    }

    fn holds_match(&self, n: NodeId, interest: &InterestName) -> bool {
        let node = self.node(n);
        let map = node.circle.own_map();
        if interest.components().iter().any(|c| map.get(*c) == 0) {
            return false;
        }
        node.store.iter().any(|d| matches(d, interest))
    }

    fn matching_item(&self, n: NodeId, interest: &InterestName) -> Option<DataName> {
        self.node(n).store.iter().find(|d| matches(d, interest)).cloned()
    }

    fn centrality(&self, n: NodeId, t: Time) -> u32 {
        self.history.degree_centrality(n, t, self.cfg.params.window)
    }

    fn acquire(&mut self, n: NodeId, item: &DataName, t: Time) {
        let kappa = self.cfg.kappa;
        self.touch(n, t);
        let node = self.node_mut(n);
        if node.store.insert(item.clone()) {
            node.circle.add_item(item, kappa);
        }
        node.log.record(t, item.clone());
        let name = node.circle.circle_name().clone();
        node.fib.set_own_name(&name);
    }

    fn link_open(&self, a: NodeId, b: NodeId) -> bool {
        match self.cfg.link_budget {
            None => true,
            Some(b_max) => self.link_used.get(&pair(a, b)).copied().unwrap_or(0) < b_max,
        }
    }

    fn use_link(&mut self, a: NodeId, b: NodeId) {
        if self.cfg.link_budget.is_some() {
            *self.link_used.entry(pair(a, b)).or_insert(0) += 1;
        }
    }

    fn contact_end(&mut self, a: NodeId, b: NodeId) {
        self.link_used.remove(&pair(a, b));
        let (sa, sb) = (self.node(a).is_station, self.node(b).is_station);
        match (sa, sb) {
            (false, false) => {
                self.node_mut(a).peers.remove(&b);
                self.node_mut(b).peers.remove(&a);
            }
            (false, true) => self.node_mut(a).stations -= 1,
            (true, false) => self.node_mut(b).stations -= 1,
            (true, true) => {}
        }
    }

    fn contact_start(&mut self, a: NodeId, b: NodeId, t: Time) {
        self.link_used.remove(&pair(a, b));
        let (sa, sb) = (self.node(a).is_station, self.node(b).is_station);
        match (sa, sb) {
            (true, true) => return,
            (false, true) | (true, false) => {
                let user = if sa { b } else { a };
                self.node_mut(user).stations += 1;
                self.serve_warm_pending(user, t);
                return;
            }
            (false, false) => {}
        }
        self.node_mut(a).peers.insert(b);
        self.node_mut(b).peers.insert(a);
        self.touch(a, t);
        self.touch(b, t);
        self.encounter(a, b, t);

        let ids: BTreeSet<RequestId> = self
            .node(a)
            .held
            .iter()
            .chain(self.node(b).held.iter())
            .copied()
            .collect();
        if self.cfg.scheme == SchemeId::Flood {
            for id in ids {
                let mut work = Vec::new();
                if let Some(c) = self.flood.get(&id) {
                    for n in [a, b] {
                        if c.interest.contains_key(&n) {
                            work.push((false, n));
                        }
                        if c.data.contains_key(&n) {
                            work.push((true, n));
                        }
                    }
                }
                self.flood_spread(id, t, work);
            }
        } else {
            for id in ids {
                let Some(cust) = self.live.get(&id).map(Live::custodian) else {
                    continue;
                };
                let other = if cust == a { b } else { a };
                self.run_packet(id, t, Some(other));
            }
        }
    }

    /// Circle, FIB and synopsis maintenance at a user-user contact.
    fn encounter(&mut self, a: NodeId, b: NodeId, t: Time) {
        let p = self.cfg.params;
        let kappa = self.cfg.kappa;
        let scheme = self.cfg.scheme;
        let wp = self.history.physical_strength(a, b, t, p.window);
        let (na, nb) = self.two_mut(a, b);
        circle::on_encounter(
            &mut na.circle,
            &mut nb.circle,
            t,
            p.window,
            p.circle_threshold,
            kappa,
            || {
                let fa = FreshnessVector::compute(&na.log, t, p.window, p.freshness_tick);
                let fb = FreshnessVector::compute(&nb.log, t, p.window, p.freshness_tick);
                social_strength(logical_strength(&fa, &fb), wp, p.alpha)
            },
        );
        let name_a = na.circle.circle_name().clone();
        let name_b = nb.circle.circle_name().clone();
        na.fib.set_own_name(&name_a);
        nb.fib.set_own_name(&name_b);
        match scheme {
            SchemeId::Sndn => {
                na.fib.update_on_encounter(b, &name_b, t);
                nb.fib.update_on_encounter(a, &name_a, t);
            }
            SchemeId::Stcr => {
                let (ca, cb) = (
                    self.history.degree_centrality(a, t, p.window),
                    self.history.degree_centrality(b, t, p.window),
                );
                let (na, nb) = self.two_mut(a, b);
                if ca < cb {
                    nb.synopsis.advertise(a, na.store.iter(), t);
                    nb.synopsis.expire(t, p.window);
                } else if cb < ca {
                    na.synopsis.advertise(b, nb.store.iter(), t);
                    na.synopsis.expire(t, p.window);
                }
            }
            _ => {}
        }
    }

    fn serve_warm_pending(&mut self, user: NodeId, t: Time) {
        let pending = std::mem::take(&mut self.node_mut(user).warm_pending);
        for (deadline, item) in pending {
            if deadline >= t {
                self.warmup_served += 1;
                self.acquire(user, &item, t);
            }
        }
    }

    fn generate(&mut self, user: NodeId, slot: u64, t: Time) {
        let next = t + self.cfg.request_interval;
        if next < self.horizon {
            self.queue.push(Reverse((next, RANK_GENERATE, user.0 as u64, slot + 1)));
        }
        let mut rng = request_rng(self.cfg.seed, user, slot);
        let sampler = &self.samplers[&user];
        let mut item = sampler.sample(self.catalog, &mut rng);
        let known = |item: &DataName, node: &Node| {
            let i = item.to_interest();
            node.known.iter().any(|d| matches(d, &i))
        };
        if known(item, self.node(user)) {
            item = sampler.sample(self.catalog, &mut rng);
            if known(item, self.node(user)) {
                return;
            }
        }
        let item = item.clone();
        self.node_mut(user).known.insert(item.clone());
        let in_ap = self.node(user).stations > 0;

        if t < self.cfg.warmup {
            self.warmup_requests += 1;
            if in_ap {
                self.warmup_served += 1;
                self.acquire(user, &item, t);
            } else {
                let deadline = t + self.cfg.warmup_ttl;
                self.node_mut(user).warm_pending.push((deadline, item));
            }
            return;
        }

        let id = self.requests.len() as RequestId;
        let interest = InterestName::new(true, item.sorted().to_vec()).expect("catalog items are non-empty");
        let direct = in_ap && rng.gen::<f64>() < self.cfg.direct_serve_prob;
        let mut req = Request {
            id,
            consumer: user,
            item: item.clone(),
            interest: interest.clone(),
            created: t,
            ttl: self.cfg.ttl,
            status: RequestStatus::Pending,
        };
        if direct {
            req.status = RequestStatus::DirectServed;
            self.requests.push(req);
            self.acquire(user, &item, t);
            return;
        }
        self.requests.push(req);
        self.touch(user, t);

        if self.holds_match(user, &interest) {
            self.log(t, id, EventKind::Created, user, user, PhaseTag::Macro, 0);
            self.log(t, id, EventKind::Deliver, user, user, PhaseTag::Hold, 0);
            self.requests[id as usize].status = RequestStatus::Delivered {
                at: t,
                interest_hops: 0,
                data_hops: 0,
            };
            return;
        }
        self.queue.push(Reverse((t + self.cfg.ttl, RANK_EXPIRY, id, 0)));

        if self.cfg.scheme == SchemeId::Flood {
            self.log(t, id, EventKind::Created, user, user, PhaseTag::Interest, 0);
            let mut copies = FloodCopies::default();
            copies.interest.insert(user, 0);
            self.flood.insert(id, copies);
            self.node_mut(user).held.insert(id);
            self.flood_spread(id, t, vec![(false, user)]);
            return;
        }

        let mut packet = InterestPacket::new(id, interest.clone(), user, t, self.cfg.ttl);
        self.settle(&mut packet, user);
        let centrality = self.centrality(user, t);
        let node = self.node_mut(user);
        node.pit.install_interest(
            id,
            PitEntry {
                interest,
                consumer: user,
                created: t,
                ttl: packet.ttl,
                centrality_stamp: centrality,
            },
        );
        node.held.insert(id);
        let phase = PhaseTag::from(packet.phase);
        self.live.insert(id, Live::Interest(packet));
        self.log(t, id, EventKind::Created, user, user, phase, 0);
        self.run_packet(id, t, None);
    }

    /// Phase bookkeeping when a custodian takes an Interest.
    fn settle(&self, packet: &mut InterestPacket, custodian: NodeId) {
        let covers = name_covers(self.node(custodian).circle.circle_name(), &packet.name);
        match self.cfg.scheme {
            SchemeId::Sndn => packet.phase = settle_interest_phase(packet.phase, covers),
            SchemeId::FcBubblerap => {
                if packet.anchor.is_none() && covers {
                    packet.anchor = Some(Arc::new(self.anchor_of(custodian)));
                    packet.phase = InterestPhase::Micro;
                }
            }
            SchemeId::Stcr => packet.phase = stcr::binding_phase(packet.bound_provider),
            _ => {}
        }
    }

    fn anchor_of(&self, n: NodeId) -> BTreeSet<NodeId> {
        let mut m = self.node(n).circle.circle_members();
        m.insert(n);
        m
    }

    fn expire(&mut self, id: RequestId, t: Time) {
        let Some(req) = self.requests.get_mut(id as usize) else {
            return;
        };
        if req.status != RequestStatus::Pending {
            return;
        }
        req.status = RequestStatus::Expired;
        if let Some(live) = self.live.remove(&id) {
            let (cust, phase, hops) = match &live {
                Live::Interest(p) => (p.custodian, PhaseTag::from(p.phase), p.hops),
                Live::Data(p) => (p.custodian, PhaseTag::from(p.phase), p.hops),
            };
            let node = self.node_mut(cust);
            node.held.remove(&id);
            node.pit.remove_interest(id);
            node.pit.remove_data(id);
            self.log(t, id, EventKind::Drop, cust, cust, phase, hops);
        }
        if let Some(c) = self.flood.remove(&id) {
            for (n, h) in &c.interest {
                self.log(t, id, EventKind::Drop, *n, *n, PhaseTag::Interest, *h);
            }
            for (n, h) in &c.data {
                self.log(t, id, EventKind::Drop, *n, *n, PhaseTag::Data, *h);
            }
            for n in c.interest.keys().chain(c.data.keys()) {
                self.node_mut(*n).held.remove(&id);
            }
        }
    }

    /// Moves one single-copy packet as far as the currently active contacts
    /// allow. With `first`, only that link is tried before spreading further.
    /// A packet never re-enters a node it already visited in the same pass.
    fn run_packet(&mut self, id: RequestId, t: Time, first: Option<NodeId>) {
        let Some(start) = self.live.get(&id).map(Live::custodian) else {
            return;
        };
        let mut visited = BTreeSet::from([start]);
        let mut only = first;
        loop {
            let Some(cust) = self.live.get(&id).map(Live::custodian) else {
                return;
            };
            let candidates: Vec<NodeId> = match only.take() {
                Some(p) => vec![p],
                None => self
                    .node(cust)
                    .peers
                    .iter()
                    .filter(|p| !visited.contains(p))
                    .copied()
                    .collect(),
            };
            let mut moved = false;
            for q in candidates {
                match self.try_link(id, cust, q, t) {
                    Step::Stay => {}
                    Step::Moved { to, fresh } => {
                        if fresh {
                            visited.clear();
                        }
                        visited.insert(to);
                        moved = true;
                        break;
                    }
                    Step::Done => return,
                }
            }
            if !moved {
                return;
            }
        }
    }

    fn try_link(&mut self, id: RequestId, carrier: NodeId, peer: NodeId, t: Time) -> Step {
        if !self.link_open(carrier, peer) {
            return Step::Stay;
        }
        self.touch(carrier, t);
        self.touch(peer, t);
        match self.live.get(&id) {
            Some(Live::Interest(_)) => self.try_interest(id, carrier, peer, t),
            Some(Live::Data(_)) => self.try_data(id, carrier, peer, t),
            None => Step::Done,
        }
    }

    fn interest_view(&self, n: NodeId, packet: &InterestPacket, t: Time) -> InterestView {
        let node = self.node(n);
        InterestView {
            node: n,
            holds_match: self.holds_match(n, &packet.name),
            covers: name_covers(node.circle.circle_name(), &packet.name),
            directionality: data_directionality(&node.fib, &packet.name, t),
            location: data_location(&node.circle.neighbour_component_map(), &packet.name),
        }
    }

    fn bubble_view(&self, n: NodeId, packet: &InterestPacket, t: Time) -> BubbleView {
        let node = self.node(n);
        let window = self.cfg.params.window;
        let (local, in_anchor) = match &packet.anchor {
            Some(members) => (
                self.history.degree_among(n, t, window, members),
                members.contains(&n),
            ),
            None => (0, false),
        };
        BubbleView {
            node: n,
            holds_match: self.holds_match(n, &packet.name),
            covers: name_covers(node.circle.circle_name(), &packet.name),
            global: self.centrality(n, t),
            local,
            in_anchor,
        }
    }

    fn data_view(&self, n: NodeId, consumer: NodeId, t: Time) -> DataView {
        let c = &self.node(n).circle;
        DataView {
            node: n,
            centrality: self.centrality(n, t),
            consumer_is_neighbour: c.is_neighbour(consumer),
            consumer_in_circle: c.in_circle(consumer),
        }
    }

    fn try_interest(&mut self, id: RequestId, carrier: NodeId, peer: NodeId, t: Time) -> Step {
        let Some(Live::Interest(packet)) = self.live.get(&id) else {
            return Step::Done;
        };
        let mut rebind = None;
        let decision = match self.cfg.scheme {
            SchemeId::Sndn => interest_decision_sndn(self, carrier, peer, packet, t),
            SchemeId::Direct => baselines::direct_interest_decision(self.holds_match(peer, &packet.name), packet, t),
            SchemeId::FcBubblerap => baselines::fc_bubblerap_interest_decision(
                &self.bubble_view(carrier, packet, t),
                &self.bubble_view(peer, packet, t),
                packet,
                t,
            ),
            SchemeId::Stcr => {
                let view = |n| StcrView {
                    node: n,
                    holds_match: self.holds_match(n, &packet.name),
                    centrality: self.centrality(n, t),
                };
                let d = stcr::stcr_interest_decision(&view(carrier), &view(peer), packet, t, || {
                    let candidates: Vec<&DataName> = self
                        .catalog
                        .items
                        .iter()
                        .filter(|d| matches(d, &packet.name))
                        .collect();
                    stcr::discover(
                        &[&self.node(carrier).synopsis, &self.node(peer).synopsis],
                        candidates.iter().copied(),
                        t,
                        self.cfg.params.window,
                        &[carrier, peer],
                    )
                });
                rebind = d.rebind;
                d.action
            }
            SchemeId::Flood => unreachable!("flood uses the copy router"),
        };
        if let Some(b) = rebind {
            if let Some(Live::Interest(p)) = self.live.get_mut(&id) {
                p.bound_provider = b;
                p.phase = stcr::binding_phase(b);
            }
        }
        match decision {
            InterestDecision::Keep => Step::Stay,
            InterestDecision::Drop(_) => {
                self.expire(id, t);
                Step::Done
            }
            InterestDecision::Transfer(phase) => {
                self.use_link(carrier, peer);
                let anchor = if self.cfg.scheme == SchemeId::FcBubblerap {
                    Some(Arc::new(self.anchor_of(peer)))
                } else {
                    None
                };
                let centrality = self.centrality(peer, t);
                let Some(Live::Interest(mut packet)) = self.live.remove(&id) else {
                    unreachable!()
                };
                if self.cfg.scheme == SchemeId::FcBubblerap
                    && phase == InterestPhase::Micro
                    && packet.anchor.is_none()
                {
                    packet.anchor = anchor;
                }
                packet.phase = phase.max(packet.phase);
                packet.hops += 1;
                packet.custodian = peer;
                self.settle(&mut packet, peer);
                let entry = self.node_mut(carrier).pit.remove_interest(id).map(|e| PitEntry {
                    centrality_stamp: centrality,
                    ..e
                });
                let node = self.node_mut(carrier);
                node.held.remove(&id);
                let node = self.node_mut(peer);
                node.held.insert(id);
                if let Some(e) = entry {
                    node.pit.install_interest(id, e);
                }
                let (tag, hops) = (PhaseTag::from(packet.phase), packet.hops);
                self.live.insert(id, Live::Interest(packet));
                self.log(t, id, EventKind::Transfer, carrier, peer, tag, hops);
                Step::Moved { to: peer, fresh: false }
            }
            InterestDecision::Satisfy => {
                self.use_link(carrier, peer);
                let Some(Live::Interest(packet)) = self.live.remove(&id) else {
                    unreachable!()
                };
                self.log(t, id, EventKind::Satisfy, carrier, peer, PhaseTag::from(packet.phase), packet.hops);
                let item = self.matching_item(peer, &packet.name).expect("provider holds a match");
                let entry = self.node_mut(carrier).pit.remove_interest(id);
                self.node_mut(carrier).held.remove(&id);
                if peer == packet.consumer {
                    // the consumer came to hold the content itself
                    let node = self.node_mut(peer);
                    node.pit.remove_interest(id);
                    self.log(t, id, EventKind::Deliver, peer, peer, PhaseTag::Hold, 0);
                    self.requests[id as usize].status = RequestStatus::Delivered {
                        at: t,
                        interest_hops: packet.hops,
                        data_hops: 0,
                    };
                    return Step::Done;
                }
                let phase = initial_data_phase(&self.data_view(peer, packet.consumer, t));
                let centrality = self.centrality(peer, t);
                let node = self.node_mut(peer);
                if let Some(e) = entry {
                    node.pit.install_interest(id, e);
                }
                let data = provider_satisfy(&mut node.pit, peer, centrality, &packet, item, phase);
                node.held.insert(id);
                self.live.insert(id, Live::Data(data));
                Step::Moved { to: peer, fresh: true }
            }
        }
    }

    fn try_data(&mut self, id: RequestId, carrier: NodeId, peer: NodeId, t: Time) -> Step {
        let Some(Live::Data(packet)) = self.live.get(&id) else {
            return Step::Done;
        };
        let decision = match self.cfg.scheme {
            SchemeId::Direct => baselines::direct_data_decision(peer, packet, t),
            _ => sndn::data_forward_decision(
                &self.data_view(carrier, packet.consumer, t),
                &self.data_view(peer, packet.consumer, t),
                packet,
                t,
            ),
        };
        match decision {
            DataDecision::Keep => Step::Stay,
            DataDecision::Drop(_) => {
                self.expire(id, t);
                Step::Done
            }
            DataDecision::Deliver => {
                self.use_link(carrier, peer);
                let Some(Live::Data(packet)) = self.live.remove(&id) else {
                    unreachable!()
                };
                let node = self.node_mut(carrier);
                node.held.remove(&id);
                node.pit.remove_data(id);
                self.log(t, id, EventKind::Deliver, carrier, peer, PhaseTag::from(packet.phase), packet.hops);
                self.requests[id as usize].status = RequestStatus::Delivered {
                    at: t,
                    interest_hops: packet.interest_hops,
                    data_hops: packet.hops,
                };
                self.acquire(packet.consumer, &packet.name, t);
                Step::Done
            }
            DataDecision::Transfer(phase) => {
                self.use_link(carrier, peer);
                let centrality = self.centrality(peer, t);
                let Some(Live::Data(mut packet)) = self.live.remove(&id) else {
                    unreachable!()
                };
                packet.phase = phase.max(packet.phase);
                packet.hops += 1;
                packet.custodian = peer;
                let node = self.node_mut(carrier);
                node.held.remove(&id);
                let entry = node.pit.remove_data(id);
                let node = self.node_mut(peer);
                node.held.insert(id);
                node.pit.install_data(
                    id,
                    DataPitEntry {
                        consumer: entry.map(|e| e.consumer).unwrap_or(packet.consumer),
                        centrality_stamp: centrality,
                    },
                );
                let (tag, hops) = (PhaseTag::from(packet.phase), packet.hops);
                self.live.insert(id, Live::Data(packet));
                self.log(t, id, EventKind::Transfer, carrier, peer, tag, hops);
                Step::Moved { to: peer, fresh: false }
            }
        }
    }

    /// Flood: copies every Interest and Data copy to every active peer that
    /// lacks one, satisfying at each provider reached, until delivery.
    fn flood_spread(&mut self, id: RequestId, t: Time, work: Vec<(bool, NodeId)>) {
        let mut queue = std::collections::VecDeque::from(work);
        while let Some((is_data, x)) = queue.pop_front() {
            if self.requests[id as usize].status != RequestStatus::Pending {
                return;
            }
            self.touch(x, t);
            let peers: Vec<NodeId> = self.node(x).peers.iter().copied().collect();
            let (consumer, interest) = {
                let r = &self.requests[id as usize];
                (r.consumer, r.interest.clone())
            };
            for q in peers {
                if !self.link_open(x, q) {
                    continue;
                }
                let Some(c) = self.flood.get(&id) else {
                    return;
                };
                if !is_data {
                    let hops = c.interest[&x];
                    if self.holds_match(q, &interest) {
                        if c.satisfied.contains(&q) {
                            continue;
                        }
                        self.use_link(x, q);
                        self.log(t, id, EventKind::Satisfy, x, q, PhaseTag::Interest, hops);
                        if q == consumer {
                            self.log(t, id, EventKind::Deliver, q, q, PhaseTag::Data, 0);
                            self.flood_deliver(id, t, false);
                            return;
                        }
                        let c = self.flood.get_mut(&id).expect("live flood request");
                        c.satisfied.insert(q);
                        if !c.data.contains_key(&q) {
                            c.data.insert(q, 0);
                            self.node_mut(q).held.insert(id);
                            queue.push_back((true, q));
                        }
                    } else if !c.interest.contains_key(&q) {
                        self.use_link(x, q);
                        let c = self.flood.get_mut(&id).expect("live flood request");
                        c.interest.insert(q, hops + 1);
                        c.interest_transfers += 1;
                        self.node_mut(q).held.insert(id);
                        self.log(t, id, EventKind::Transfer, x, q, PhaseTag::Interest, hops + 1);
                        queue.push_back((false, q));
                    }
                } else {
                    let hops = c.data[&x];
                    if q == consumer {
                        self.use_link(x, q);
                        self.log(t, id, EventKind::Deliver, x, q, PhaseTag::Data, hops);
                        self.flood_deliver(id, t, true);
                        return;
                    }
                    if !c.data.contains_key(&q) {
                        self.use_link(x, q);
                        let c = self.flood.get_mut(&id).expect("live flood request");
                        c.data.insert(q, hops + 1);
                        c.data_transfers += 1;
                        self.node_mut(q).held.insert(id);
                        self.log(t, id, EventKind::Transfer, x, q, PhaseTag::Data, hops + 1);
                        queue.push_back((true, q));
                    }
                }
            }
        }
    }

    fn flood_deliver(&mut self, id: RequestId, t: Time, acquire: bool) {
        let c = self.flood.remove(&id).expect("live flood request");
        for n in c.interest.keys().chain(c.data.keys()) {
            self.node_mut(*n).held.remove(&id);
        }
        let (consumer, item) = {
            let r = &mut self.requests[id as usize];
            r.status = RequestStatus::Delivered {
                at: t,
                interest_hops: c.interest_transfers,
                data_hops: c.data_transfers,
            };
            (r.consumer, r.item.clone())
        };
        // with catalog-drawn interests the providers' copies are the
        // requested item
        if acquire {
            self.acquire(consumer, &item, t);
        }
    }

    pub fn warm_stores(&self) -> BTreeMap<NodeId, BTreeSet<DataName>> {
        self.nodes
            .iter()
            .filter(|n| !n.is_station)
            .map(|n| (n.id, n.store.clone()))
            .collect()
    }
}

fn interest_decision_sndn(
    sim: &Simulator<'_>,
    carrier: NodeId,
    peer: NodeId,
    packet: &InterestPacket,
    t: Time,
) -> InterestDecision {
    sndn::interest_forward_decision(
        &sim.interest_view(carrier, packet, t),
        &sim.interest_view(peer, packet, t),
        packet,
        t,
    )
}
