//! Deterministic discrete-event simulation over a contact trace.
//!
//! Events are processed in `(time, kind, ids)` order with kinds ranked
//! contact-end, contact-start, expiry, request generation. Every user-user
//! contact start runs the circle layer, then FIB maintenance (sNDN) or
//! synopsis advertisement (STCR), then packet logic for packets held by
//! either side. A packet that changes hands keeps moving over its new
//! holder's other active contacts within the same instant.

mod config;
mod log;
mod metrics;
mod sampler;
mod sim;

use std::collections::{BTreeMap, BTreeSet};

pub use config::{derive_run_seed, short_hash, SimConfig};
pub use log::{events_csv, parse_events_csv, EventKind, PacketEvent, PhaseTag, EVENTS_HEADER};
pub use metrics::{
    compute_metrics, metrics_row, requests_csv, transfers_of_delivered, MetricsReport, Request,
    RequestStatus, METRICS_HEADER, REQUESTS_HEADER,
};
pub use sampler::{request_rng, ItemSampler};

use crate::error::Result;
use crate::naming::{Catalog, DataName};
use crate::traces::{profiles_csv, PreferenceProfile, TraceBundle};
use crate::NodeId;

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: MetricsReport,
    pub requests: Vec<Request>,
    pub events: Vec<PacketEvent>,
    /// Requests generated during warm-up and how many a base station served.
    pub warmup_requests: u64,
    pub warmup_served: u64,
}

/// Hash over every input file's canonical text.
pub fn trace_hash(
    bundle: &TraceBundle,
    catalog: &Catalog,
    profiles: &BTreeMap<NodeId, PreferenceProfile>,
) -> String {
    let mut text = bundle.contacts_csv();
    text.push_str(&bundle.stations_text());
    text.push_str(&catalog.to_text());
    text.push_str(&profiles_csv(profiles, &catalog.namespace));
    short_hash(text.as_bytes())
}

/// Runs one simulation to the trace horizon.
pub fn run(
    config: &SimConfig,
    bundle: &TraceBundle,
    catalog: &Catalog,
    profiles: &BTreeMap<NodeId, PreferenceProfile>,
) -> Result<RunOutput> {
    let mut sim = sim::Simulator::new(config, bundle, catalog, profiles)?;
    sim.run_until(bundle.horizon);
    let report = compute_metrics(
        config.scheme,
        config.seed,
        &config.hash(),
        &trace_hash(bundle, catalog, profiles),
        &sim.requests,
        &sim.events,
    );
    ::log::debug!(
        "{} seed {}: {} requests, ratio {:.3}",
        config.scheme,
        config.seed,
        report.created,
        report.delivery_ratio
    );
    Ok(RunOutput {
        report,
        warmup_requests: sim.warmup_requests,
        warmup_served: sim.warmup_served,
        requests: sim.requests,
        events: sim.events,
    })
}

/// Content stores at the end of warm-up (every event before `config.warmup`).
/// Stations are omitted.
pub fn warmup_seed(
    config: &SimConfig,
    bundle: &TraceBundle,
    catalog: &Catalog,
    profiles: &BTreeMap<NodeId, PreferenceProfile>,
) -> Result<BTreeMap<NodeId, BTreeSet<DataName>>> {
    let mut sim = sim::Simulator::new(config, bundle, catalog, profiles)?;
    if config.warmup > 0 {
        sim.run_until(config.warmup - 1);
    }
    Ok(sim.warm_stores())
}
