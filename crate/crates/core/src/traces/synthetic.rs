//! Community-structured synthetic contact traces with homophilous profiles.

use std::collections::BTreeMap;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ContactEvent, PreferenceProfile, TraceBundle};
use crate::error::{Error, Result};
use crate::naming::{Catalog, ComponentId, DataName, Namespace};
use crate::{NodeId, Time};

/// Generator parameters. Rates are contacts per hour per node pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_users: u32,
    pub n_communities: u32,
    pub intra_rate: f64,
    pub inter_rate: f64,
    /// User-to-station contact rate.
    pub station_rate: f64,
    /// Mean contact duration in seconds.
    pub mean_duration: f64,
    pub horizon: Time,
    pub n_base_stations: u32,
    pub n_artists: u32,
    pub n_tags: u32,
    /// Share of each community's preference mass placed on its own
    /// component subset.
    pub community_bias: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_users: 40,
            n_communities: 4,
            intra_rate: 1.0,
            inter_rate: 0.05,
            station_rate: 0.5,
            mean_duration: 600.0,
            horizon: 3 * 86_400,
            n_base_stations: 3,
            n_artists: 24,
            n_tags: 12,
            community_bias: 0.7,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticTrace {
    pub bundle: TraceBundle,
    pub profiles: BTreeMap<NodeId, PreferenceProfile>,
    pub catalog: Catalog,
    /// Community index of every user node.
    pub communities: BTreeMap<NodeId, u32>,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_users < 2 {
            return bad("n_users must be at least 2");
        }
        if self.n_communities == 0 || self.n_communities > self.n_users {
            return bad("n_communities must be in 1..=n_users");
        }
        for (name, v) in [
            ("intra_rate", self.intra_rate),
            ("inter_rate", self.inter_rate),
            ("station_rate", self.station_rate),
            ("mean_duration", self.mean_duration),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.horizon == 0 {
            return bad("horizon must be positive");
        }
        if self.n_artists == 0 || self.n_tags == 0 {
            return bad("n_artists and n_tags must be positive");
        }
        if !(0.0..=1.0).contains(&self.community_bias) {
            return bad("community_bias must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn community_of(&self, user: u32) -> u32 {
        (user as u64 * self.n_communities as u64 / self.n_users as u64) as u32
    }
}

fn exp_sample(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    let u: f64 = rng.gen();
    -mean * (1.0 - u).ln()
}

/// Poisson arrivals over `[0, horizon)` with exponential durations.
fn pair_contacts(
    rng: &mut ChaCha8Rng,
    a: NodeId,
    b: NodeId,
    rate_per_hour: f64,
    mean_duration: f64,
    horizon: Time,
    out: &mut Vec<ContactEvent>,
) {
    let mean_gap = 3600.0 / rate_per_hour;
    let mut t = 0.0;
    loop {
        t += exp_sample(rng, mean_gap);
        let dur = exp_sample(rng, mean_duration).ceil().max(1.0);
        let start = t.floor();
        if start >= horizon as f64 {
            break;
        }
        let start = start as Time;
        let end = (start + dur as Time).min(horizon);
        if end > start {
            out.push(ContactEvent::new(a, b, start, end));
        }
    }
}

/// Generates a deterministic community trace together with its catalog and
/// per-user profiles.
///
/// Users are `0..n_users`, stations follow. Community `k` owns the artists and
/// tags whose index is `k` modulo the community count.
pub fn generate_synthetic_trace(spec: &SyntheticSpec) -> Result<SyntheticTrace> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Interned in first-appearance order of the catalog file so that a
    // written trace reloads with identical component ids.
    let mut ns = Namespace::new();
    let first = ns.intern("artist0")?;
    let tags: Vec<ComponentId> = (0..spec.n_tags)
        .map(|i| ns.intern(&format!("tag{i}")))
        .collect::<Result<_>>()?;
    let artists: Vec<ComponentId> = std::iter::once(Ok(first))
        .chain((1..spec.n_artists).map(|i| ns.intern(&format!("artist{i}"))))
        .collect::<Result<_>>()?;
    let mut items = Vec::new();
    for a in &artists {
        for t in &tags {
            items.push(DataName::new(vec![*a, *t])?);
        }
    }
    let catalog = Catalog {
        namespace: ns,
        items,
    };

    let users: Vec<NodeId> = (0..spec.n_users).map(NodeId).collect();
    let stations: Vec<NodeId> = (0..spec.n_base_stations)
        .map(|i| NodeId(spec.n_users + i))
        .collect();
    let communities: BTreeMap<NodeId, u32> = users
        .iter()
        .map(|u| (*u, spec.community_of(u.0)))
        .collect();

    let mut events = Vec::new();
    for (i, a) in users.iter().enumerate() {
        for b in &users[i + 1..] {
            let rate = if communities[a] == communities[b] {
                spec.intra_rate
            } else {
                spec.inter_rate
            };
            pair_contacts(&mut rng, *a, *b, rate, spec.mean_duration, spec.horizon, &mut events);
        }
    }
    for u in &users {
        for s in &stations {
            pair_contacts(
                &mut rng,
                *u,
                *s,
                spec.station_rate,
                spec.mean_duration,
                spec.horizon,
                &mut events,
            );
        }
    }

    let mut profiles = BTreeMap::new();
    let components: Vec<(usize, ComponentId)> = artists
        .iter()
        .enumerate()
        .chain(tags.iter().enumerate())
        .map(|(i, c)| (i, *c))
        .collect();
    for u in &users {
        let k = communities[u] as usize;
        let n_comm = spec.n_communities as usize;
        let own = |i: usize| i % n_comm == k;
        let draws: Vec<f64> = components.iter().map(|_| rng.gen_range(0.2..1.0)).collect();
        let own_total: f64 = components
            .iter()
            .zip(&draws)
            .filter(|((i, _), _)| own(*i))
            .map(|(_, d)| d)
            .sum();
        let other_total: f64 = components
            .iter()
            .zip(&draws)
            .filter(|((i, _), _)| !own(*i))
            .map(|(_, d)| d)
            .sum();
        // a community with no own components (or owning all) falls back to its draws
        let (own_mass, other_mass) = if own_total == 0.0 || other_total == 0.0 {
            (1.0, 1.0)
        } else {
            (spec.community_bias, 1.0 - spec.community_bias)
        };
        let mut weights = BTreeMap::new();
        for ((i, c), d) in components.iter().zip(&draws) {
            let w = if own(*i) {
                own_mass * d / own_total.max(f64::MIN_POSITIVE)
            } else {
                other_mass * d / other_total.max(f64::MIN_POSITIVE)
            };
            *weights.entry(*c).or_insert(0.0) += w;
        }
        profiles.insert(*u, PreferenceProfile::normalized(*u, weights)?);
    }

    if events.is_empty() {
        warn!(
            "horizon {} s too short to place any contact; synthetic trace is empty",
            spec.horizon
        );
    }
    let mut nodes: std::collections::BTreeSet<NodeId> = users.iter().copied().collect();
    nodes.extend(stations.iter().copied());
    let bundle = TraceBundle {
        nodes,
        base_stations: stations.iter().copied().collect(),
        events: super::normalize_events(events),
        horizon: spec.horizon,
    };
    Ok(SyntheticTrace {
        bundle,
        profiles,
        catalog,
        communities,
    })
}
