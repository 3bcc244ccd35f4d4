//! Independent oracles, random instances and event-log audits shared by the
//! integration tests. Nothing here calls into the code it checks except to
//! build inputs.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use sndn_core::baselines::SchemeId;
use sndn_core::circle::{CircleState, FriendAttributes, NameComponentMap};
use sndn_core::engine::{EventKind, MetricsReport, PacketEvent, PhaseTag, Request, RequestStatus, RunOutput};
use sndn_core::naming::{ComponentId, ComponentSet, DataName, InterestName};
use sndn_core::sndn::{data_directionality, data_location, Fib};
use sndn_core::social::{
    freshness, logical_strength, social_strength, AcquisitionLog, ContactHistory, FreshnessVector,
};
use sndn_core::traces::{normalize_events, ContactEvent};
use sndn_core::{NodeId, Time};

pub const TOL: f64 = 1e-9;

// ---------------------------------------------------------------- oracles

/// Freshness by direct summation over every acquisition.
pub fn oracle_freshness(acq: &[(Time, Vec<u32>)], c: u32, at: Time, window: u64, tick: u64) -> f64 {
    let lo = at.saturating_sub(window);
    let mut f = 0.0;
    for (t, comps) in acq {
        if *t < lo || *t > at || !comps.contains(&c) {
            continue;
        }
        let k = at / tick - *t / tick;
        f += if k == 0 { 1.0 } else { 1.0 / k as f64 };
    }
    f
}

pub fn oracle_logical(fi: &[f64], fj: &[f64]) -> f64 {
    let num: f64 = fi.iter().zip(fj).map(|(a, b)| a.min(*b)).sum();
    let den: f64 = fi.iter().zip(fj).map(|(a, b)| a.max(*b)).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Physical strength by scanning the window one second at a time: covered
/// seconds count in full, each maximal uncovered run adds `ln(1 + len)`.
pub fn oracle_physical(raw: &[(Time, Time)], at: Time, window: u64) -> f64 {
    let lo = at.saturating_sub(window);
    if at == lo {
        return 0.0;
    }
    let mut total = 0.0;
    let mut gap = 0u64;
    for u in lo..at {
        if raw.iter().any(|(s, e)| *s <= u && u < *e) {
            total += (gap as f64 + 1.0).ln() + 1.0;
            gap = 0;
        } else {
            gap += 1;
        }
    }
    total += (gap as f64 + 1.0).ln();
    total / (at - lo) as f64
}

/// Count records by replaying every encounter.
pub fn oracle_directionality(
    own: &[u32],
    encounters: &[(u32, Vec<u32>, Time)],
    interest: &[u32],
    at: Time,
    window: u64,
) -> u32 {
    let lo = at.saturating_sub(window);
    interest
        .iter()
        .map(|c| {
            let mut last: BTreeMap<u32, Time> = BTreeMap::new();
            for (peer, name, t) in encounters {
                if name.contains(c) {
                    let e = last.entry(*peer).or_insert(*t);
                    *e = (*e).max(*t);
                }
            }
            last.values().filter(|t| **t >= lo && **t <= at).count() as u32 + u32::from(own.contains(c))
        })
        .min()
        .unwrap_or(0)
}

/// Per-member component counts, owner first.
pub fn oracle_member_counts(inst: &Instance) -> Vec<Vec<u32>> {
    let n = inst.n_comp as usize;
    let mut own = vec![0u32; n];
    for item in &inst.own_items {
        for c in item {
            own[*c as usize] += 1;
        }
    }
    let mut out = vec![own];
    for f in &inst.friends {
        let mut v = vec![0u32; n];
        for (c, k) in &f.map {
            v[*c as usize] += k;
        }
        out.push(v);
    }
    out
}

pub fn oracle_location(inst: &Instance) -> u32 {
    let members = oracle_member_counts(inst);
    inst.interest
        .iter()
        .map(|c| members.iter().map(|m| m[*c as usize]).sum::<u32>())
        .min()
        .unwrap_or(0)
}

pub fn oracle_neighbour_set_name(inst: &Instance) -> BTreeSet<u32> {
    let members = oracle_member_counts(inst);
    let total: u32 = members.iter().flatten().sum();
    let mut out = BTreeSet::new();
    if total == 0 {
        return out;
    }
    for c in 0..inst.n_comp as usize {
        let count: u32 = members.iter().map(|m| m[c]).sum();
        if count == 0 {
            continue;
        }
        let holders = members.iter().filter(|m| m[c] > 0).count();
        let f_u = holders as f64 / members.len() as f64;
        let f_d = count as f64 / total as f64;
        if f_u * f_d > inst.kappa {
            out.insert(c as u32);
        }
    }
    out
}

pub fn oracle_circle_name(inst: &Instance) -> BTreeSet<u32> {
    let mut out = oracle_neighbour_set_name(inst);
    for f in &inst.friends {
        out.extend(f.cached_name.iter().copied());
    }
    out
}

// ---------------------------------------------------------------- instances

#[derive(Debug, Clone)]
pub struct FriendSpec {
    pub map: Vec<(u32, u32)>,
    pub cached_name: Vec<u32>,
    pub branch: Vec<u32>,
}

/// One small randomized instance covering every social and naming quantity.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n_comp: u32,
    pub acq_i: Vec<(Time, Vec<u32>)>,
    pub acq_j: Vec<(Time, Vec<u32>)>,
    pub contacts: Vec<(Time, Time)>,
    pub at: Time,
    pub window: u64,
    pub tick: u64,
    pub alpha: f64,
    pub fib_own: Vec<u32>,
    pub encounters: Vec<(u32, Vec<u32>, Time)>,
    pub own_items: Vec<Vec<u32>>,
    pub friends: Vec<FriendSpec>,
    pub kappa: f64,
    pub interest: Vec<u32>,
}

fn subset<R: Rng>(rng: &mut R, n: u32, min: usize, max: usize) -> Vec<u32> {
    let k = rng.gen_range(min..=max.min(n as usize));
    let mut v: Vec<u32> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..v.len());
        v.swap(i, j);
    }
    v.truncate(k);
    v
}

impl Instance {
    /// At most 10 components, 20 contact events and 20 acquisitions.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let n_comp = rng.gen_range(1..=10u32);
        let at = rng.gen_range(0..=240u64);
        let n_acq = rng.gen_range(0..=20usize);
        let split = rng.gen_range(0..=n_acq);
        let mut acq = |n: usize| -> Vec<(Time, Vec<u32>)> {
            (0..n)
                .map(|_| (rng.gen_range(0..=at), subset(rng, n_comp, 1, 3)))
                .collect()
        };
        let acq_i = acq(split);
        let acq_j = acq(n_acq - split);
        let contacts = (0..rng.gen_range(0..=20usize))
            .map(|_| {
                let s = rng.gen_range(0..250u64);
                (s, s + rng.gen_range(1..=30u64))
            })
            .collect();
        let encounters = (0..rng.gen_range(0..=20usize))
            .map(|_| (rng.gen_range(1..=6u32), subset(rng, n_comp, 0, 4), rng.gen_range(0..=at)))
            .collect();
        let own_items = (0..rng.gen_range(0..=8usize))
            .map(|_| subset(rng, n_comp, 1, 3))
            .collect();
        let friends = (0..rng.gen_range(0..=4usize))
            .map(|_| FriendSpec {
                map: subset(rng, n_comp, 0, 4)
                    .into_iter()
                    .map(|c| (c, rng.gen_range(1..=6u32)))
                    .collect(),
                cached_name: subset(rng, n_comp, 0, 3),
                branch: subset(rng, 12, 0, 4),
            })
            .collect();
        Instance {
            n_comp,
            acq_i,
            acq_j,
            contacts,
            at,
            window: rng.gen_range(1..=240u64),
            tick: rng.gen_range(1..=20u64),
            alpha: rng.gen_range(0.0..=1.0),
            fib_own: subset(rng, n_comp, 0, 4),
            encounters,
            own_items,
            friends,
            kappa: rng.gen_range(0.0..0.6),
            interest: subset(rng, n_comp, 1, 3),
        }
    }
}

fn ids(v: &[u32]) -> Vec<ComponentId> {
    v.iter().map(|c| ComponentId(*c)).collect()
}

fn set(v: &[u32]) -> ComponentSet {
    v.iter().map(|c| ComponentId(*c)).collect()
}

fn log_of(acq: &[(Time, Vec<u32>)]) -> AcquisitionLog {
    let mut log = AcquisitionLog::new();
    for (t, comps) in acq {
        log.record(*t, DataName::new(ids(comps)).unwrap());
    }
    log
}

fn close(name: &str, got: f64, want: f64) -> Result<(), String> {
    if (got - want).abs() <= TOL {
        Ok(())
    } else {
        Err(format!("{name}: got {got}, oracle {want}"))
    }
}

/// Compares every quantity of one instance against its oracle.
pub fn check_instance(inst: &Instance) -> Result<(), String> {
    let (at, w, tick) = (inst.at, inst.window, inst.tick);
    let (log_i, log_j) = (log_of(&inst.acq_i), log_of(&inst.acq_j));
    let fv_i = FreshnessVector::compute(&log_i, at, w, tick);
    let fv_j = FreshnessVector::compute(&log_j, at, w, tick);
    let mut oi = Vec::new();
    let mut oj = Vec::new();
    for c in 0..inst.n_comp {
        let want_i = oracle_freshness(&inst.acq_i, c, at, w, tick);
        let want_j = oracle_freshness(&inst.acq_j, c, at, w, tick);
        close("freshness", freshness(&log_i, ComponentId(c), at, w, tick), want_i)?;
        close("freshness vector", fv_i.get(ComponentId(c)), want_i)?;
        close("freshness vector", fv_j.get(ComponentId(c)), want_j)?;
        oi.push(want_i);
        oj.push(want_j);
    }
    let wl = logical_strength(&fv_i, &fv_j);
    let wl_want = oracle_logical(&oi, &oj);
    close("logical strength", wl, wl_want)?;

    let raw: Vec<ContactEvent> = inst
        .contacts
        .iter()
        .map(|(s, e)| ContactEvent::new(NodeId(0), NodeId(1), *s, *e))
        .collect();
    let history = ContactHistory::from_events(&normalize_events(raw));
    let wp = history.physical_strength(NodeId(0), NodeId(1), at, w);
    let wp_want = oracle_physical(&inst.contacts, at, w);
    close("physical strength", wp, wp_want)?;
    close(
        "social strength",
        social_strength(wl, wp, inst.alpha),
        inst.alpha * wl_want + (1.0 - inst.alpha) * wp_want,
    )?;

    let interest = InterestName::new(true, ids(&inst.interest)).unwrap();
    let mut fib = Fib::new(w);
    fib.set_own_name(&set(&inst.fib_own));
    let mut enc = inst.encounters.clone();
    enc.sort_by_key(|e| e.2);
    for (peer, name, t) in &enc {
        fib.update_on_encounter(NodeId(*peer), &set(name), *t);
    }
    let ui = data_directionality(&fib, &interest, at);
    let ui_want = oracle_directionality(&inst.fib_own, &enc, &inst.interest, at, w);
    if ui != ui_want {
        return Err(format!("data directionality: got {ui}, oracle {ui_want}"));
    }

    let mut state = CircleState::new(NodeId(0));
    let items: Vec<DataName> = inst.own_items.iter().map(|v| DataName::new(ids(v)).unwrap()).collect();
    state.set_own_map(NameComponentMap::from_items(&items));
    for (k, f) in inst.friends.iter().enumerate() {
        let attrs = FriendAttributes {
            friend: NodeId(100 + k as u32),
            strength: 0.5,
            admitted_at: 0,
            fresh_timer: 100,
            component_map: f.map.iter().map(|(c, n)| (ComponentId(*c), *n)).collect(),
            neighbour_set_name: set(&f.cached_name),
        };
        state.insert_friend(attrs, f.branch.iter().map(|n| NodeId(*n)).collect());
    }
    state.recompute_names(inst.kappa);
    let ul = data_location(&state.neighbour_component_map(), &interest);
    let ul_want = oracle_location(inst);
    if ul != ul_want {
        return Err(format!("data location: got {ul}, oracle {ul_want}"));
    }
    let to_u32 = |s: &ComponentSet| s.iter().map(|c| c.0).collect::<BTreeSet<u32>>();
    let nsn = to_u32(state.neighbour_set_name());
    if nsn != oracle_neighbour_set_name(inst) {
        return Err(format!("neighbour set name: got {nsn:?}, oracle {:?}", oracle_neighbour_set_name(inst)));
    }
    let cn = to_u32(state.circle_name());
    if cn != oracle_circle_name(inst) {
        return Err(format!("circle name: got {cn:?}, oracle {:?}", oracle_circle_name(inst)));
    }
    Ok(())
}

// ---------------------------------------------------------------- audits

/// Request conservation and hop accounting from the request table.
pub fn audit_conservation(report: &MetricsReport, requests: &[Request]) -> Vec<String> {
    let mut v = Vec::new();
    let sum = report.delivered + report.expired + report.pending + report.direct_served;
    if report.created != requests.len() || sum != report.created {
        v.push(format!(
            "conservation: created {} vs {} requests, outcomes sum to {sum}",
            report.created,
            requests.len()
        ));
    }
    v
}

#[derive(Clone, Copy)]
enum Stage {
    Interest { cust: NodeId, hops: u32, phase: PhaseTag },
    Data { cust: NodeId, hops: u32, rank: u8 },
    Done,
}

/// Replays a single-copy scheme's log: exactly one custodian per request at
/// every event, hop counts increase by one per transfer, the Data phase never
/// moves backwards (nor the Interest phase, except under the synopsis scheme
/// where unbinding returns to macro), deliveries reach the original consumer.
pub fn audit_single_copy(scheme: SchemeId, requests: &[Request], events: &[PacketEvent]) -> Vec<String> {
    let mut v = Vec::new();
    let mut stage: BTreeMap<u64, Stage> = BTreeMap::new();
    let mut transfers: BTreeMap<u64, u32> = BTreeMap::new();
    for e in events {
        let req = &requests[e.request as usize];
        let bad = |v: &mut Vec<String>, what: &str| v.push(format!("request {}: {what} at {e}", e.request));
        if e.scheme != scheme {
            bad(&mut v, "wrong scheme");
        }
        let st = stage.get(&e.request).copied();
        let next = match (e.kind, st) {
            (EventKind::Created, None) => {
                if e.from != req.consumer || e.to != req.consumer || e.time != req.created {
                    bad(&mut v, "created away from the consumer");
                }
                Stage::Interest { cust: req.consumer, hops: 0, phase: e.phase }
            }
            (EventKind::Transfer, Some(Stage::Interest { cust, hops, phase })) => {
                *transfers.entry(e.request).or_default() += 1;
                if e.from != cust || e.to == cust {
                    bad(&mut v, "interest transfer not from the custodian");
                }
                if e.hops != hops + 1 {
                    bad(&mut v, "interest hop count skipped");
                }
                if !matches!(e.phase, PhaseTag::Macro | PhaseTag::Micro) {
                    bad(&mut v, "interest carries a data phase");
                }
                if scheme != SchemeId::Stcr && phase == PhaseTag::Micro && e.phase == PhaseTag::Macro {
                    bad(&mut v, "interest phase moved backwards");
                }
                Stage::Interest { cust: e.to, hops: e.hops, phase: e.phase }
            }
            (EventKind::Satisfy, Some(Stage::Interest { cust, hops, .. })) => {
                if e.from != cust || e.hops != hops {
                    bad(&mut v, "satisfy not at the custodian's peer");
                }
                Stage::Data { cust: e.to, hops: 0, rank: 0 }
            }
            (EventKind::Transfer, Some(Stage::Data { cust, hops, rank })) => {
                *transfers.entry(e.request).or_default() += 1;
                if e.from != cust || e.to == cust {
                    bad(&mut v, "data transfer not from the custodian");
                }
                if e.hops != hops + 1 {
                    bad(&mut v, "data hop count skipped");
                }
                let r = e.phase.data_rank();
                match r {
                    Some(r) if r >= rank => {}
                    _ => bad(&mut v, "data phase moved backwards"),
                }
                Stage::Data { cust: e.to, hops: e.hops, rank: r.unwrap_or(rank) }
            }
            (EventKind::Deliver, Some(Stage::Interest { cust, hops, .. })) => {
                // the consumer already held the content when it asked
                if cust != req.consumer || e.from != cust || e.to != cust || hops != 0 {
                    bad(&mut v, "interest delivered without a provider");
                }
                Stage::Done
            }
            (EventKind::Deliver, Some(Stage::Data { cust, rank, .. })) => {
                if e.from != cust {
                    bad(&mut v, "delivery not from the custodian");
                }
                if e.to != req.consumer {
                    bad(&mut v, "delivered to a node other than the consumer");
                }
                if e.phase.data_rank().is_some_and(|r| r < rank) {
                    bad(&mut v, "data phase moved backwards at delivery");
                }
                Stage::Done
            }
            (EventKind::Drop, Some(Stage::Interest { cust, .. } | Stage::Data { cust, .. })) => {
                if e.from != cust {
                    bad(&mut v, "drop away from the custodian");
                }
                if e.time != req.deadline() {
                    bad(&mut v, "drop before the deadline");
                }
                Stage::Done
            }
            _ => {
                bad(&mut v, "event out of sequence");
                Stage::Done
            }
        };
        stage.insert(e.request, next);
    }
    for r in requests {
        let st = stage.get(&r.id).copied();
        match r.status {
            RequestStatus::Delivered { interest_hops, data_hops, .. } => {
                if !matches!(st, Some(Stage::Done)) {
                    v.push(format!("request {}: delivered without a delivery event", r.id));
                }
                let t = transfers.get(&r.id).copied().unwrap_or(0);
                if t != interest_hops + data_hops {
                    v.push(format!("request {}: {t} transfers but {} hops", r.id, interest_hops + data_hops));
                }
            }
            RequestStatus::Expired => {
                if !matches!(st, Some(Stage::Done)) {
                    v.push(format!("request {}: expired without a drop", r.id));
                }
            }
            RequestStatus::Pending => {
                if matches!(st, Some(Stage::Done) | None) {
                    v.push(format!("request {}: pending but not live", r.id));
                }
            }
            RequestStatus::DirectServed => {
                if st.is_some() {
                    v.push(format!("request {}: direct-served request has packet events", r.id));
                }
            }
        }
    }
    v
}

/// Replays a Flood log: copies only spread from holders, deliveries reach the
/// consumer, expiry drops every live copy, and transfers before delivery
/// equal the reported hops.
pub fn audit_flood(requests: &[Request], events: &[PacketEvent]) -> Vec<String> {
    #[derive(Default)]
    struct Copies {
        interest: BTreeSet<NodeId>,
        data: BTreeSet<NodeId>,
        transfers: u32,
        drops: usize,
        done: bool,
    }
    let mut v = Vec::new();
    let mut state: BTreeMap<u64, Copies> = BTreeMap::new();
    for e in events {
        let req = &requests[e.request as usize];
        let c = state.entry(e.request).or_default();
        let mut bad = |what: &str| v.push(format!("request {}: {what} at {e}", e.request));
        if c.done && e.kind != EventKind::Drop {
            bad("event after the request finished");
            continue;
        }
        match e.kind {
            EventKind::Created => {
                if e.from != req.consumer {
                    bad("created away from the consumer");
                }
                c.interest.insert(req.consumer);
            }
            EventKind::Transfer if e.phase == PhaseTag::Interest => {
                if !c.interest.contains(&e.from) || !c.interest.insert(e.to) {
                    bad("interest copy from a non-holder or to a holder");
                }
                c.transfers += 1;
            }
            EventKind::Transfer => {
                if !c.data.contains(&e.from) || !c.data.insert(e.to) {
                    bad("data copy from a non-holder or to a holder");
                }
                c.transfers += 1;
            }
            EventKind::Satisfy => {
                if !c.interest.contains(&e.from) {
                    bad("satisfy from a node without the interest");
                }
                if e.to != req.consumer {
                    c.data.insert(e.to);
                }
            }
            EventKind::Deliver => {
                if e.to != req.consumer {
                    bad("delivered to a node other than the consumer");
                }
                if e.from != e.to && !c.data.contains(&e.from) {
                    bad("delivery from a node without data");
                }
                c.done = true;
            }
            EventKind::Drop => {
                c.drops += 1;
                c.done = true;
            }
        }
    }
    for r in requests {
        let c = state.get(&r.id);
        match r.status {
            RequestStatus::Delivered { interest_hops, data_hops, .. } => {
                let t = c.map(|c| c.transfers).unwrap_or(0);
                if t != interest_hops + data_hops {
                    v.push(format!("request {}: {t} copies but {} hops", r.id, interest_hops + data_hops));
                }
                if c.is_some_and(|c| c.drops > 0) {
                    v.push(format!("request {}: delivered and dropped", r.id));
                }
            }
            RequestStatus::Expired => {
                let ok = c.is_some_and(|c| c.drops == c.interest.len() + c.data.len());
                if !ok {
                    v.push(format!("request {}: expiry did not drop every copy", r.id));
                }
            }
            _ => {}
        }
    }
    v
}

/// Delivery time of every delivered request, read from the event log.
pub fn deliveries(events: &[PacketEvent]) -> BTreeMap<u64, Time> {
    events
        .iter()
        .filter(|e| e.kind == EventKind::Deliver)
        .map(|e| (e.request, e.time))
        .collect()
}

/// Flood must deliver everything another scheme delivers, no later.
pub fn audit_dominance(flood: &RunOutput, other: &RunOutput) -> Vec<String> {
    let mut v = Vec::new();
    let same = flood.requests.len() == other.requests.len()
        && flood
            .requests
            .iter()
            .zip(&other.requests)
            .all(|(a, b)| (a.consumer, &a.item, a.created) == (b.consumer, &b.item, b.created));
    if !same {
        v.push("request streams differ between schemes".to_string());
        return v;
    }
    let f = deliveries(&flood.events);
    for (id, t) in deliveries(&other.events) {
        match f.get(&id) {
            None => v.push(format!("request {id}: delivered by {} only", other.report.scheme)),
            Some(ft) if *ft > t => v.push(format!(
                "request {id}: flood at {ft}, {} at {t}",
                other.report.scheme
            )),
            _ => {}
        }
    }
    v
}
