//! Requests, their outcomes, and the aggregate metrics.

use serde::Serialize;

use super::log::{EventKind, PacketEvent};
use crate::baselines::SchemeId;
use crate::naming::{DataName, InterestName};
use crate::sndn::RequestId;
use crate::{Duration, NodeId, Time};

pub const METRICS_HEADER: &str =
    "scheme,ttl,alpha,tp,kappa,seed,delivery_ratio,actual_delay_s,overhead,delivered,expired,direct_served,config_hash";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RequestStatus {
    Pending,
    Delivered {
        at: Time,
        interest_hops: u32,
        data_hops: u32,
    },
    Expired,
    DirectServed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub id: RequestId,
    pub consumer: NodeId,
    /// The catalog item the request was drawn from.
    pub item: DataName,
    pub interest: InterestName,
    pub created: Time,
    pub ttl: Duration,
    pub status: RequestStatus,
}

impl Request {
    pub fn deadline(&self) -> Time {
        self.created + self.ttl
    }

    pub fn is_cooperative(&self) -> bool {
        self.status != RequestStatus::DirectServed
    }

    pub fn delay(&self) -> Option<Duration> {
        match self.status {
            RequestStatus::Delivered { at, .. } => Some(at - self.created),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub scheme: SchemeId,
    pub seed: u64,
    pub config_hash: String,
    pub trace_hash: String,
    pub created: usize,
    pub delivered: usize,
    pub expired: usize,
    pub pending: usize,
    pub direct_served: usize,
    /// Delivered over cooperative requests; 0 when there are none.
    pub delivery_ratio: f64,
    /// Mean delivery latency in seconds over delivered requests.
    pub actual_delay: f64,
    /// Mean relays (Interest plus Data) per delivered request.
    pub overhead: f64,
}

/// Aggregates request outcomes. The event log is only used to cross-check
/// hop accounting in debug builds.
pub fn compute_metrics(
    scheme: SchemeId,
    seed: u64,
    config_hash: &str,
    trace_hash: &str,
    requests: &[Request],
    events: &[PacketEvent],
) -> MetricsReport {
    let mut delivered = 0usize;
    let mut expired = 0usize;
    let mut pending = 0usize;
    let mut direct = 0usize;
    let mut delay_sum = 0u64;
    let mut hop_sum = 0u64;
    for r in requests {
        match r.status {
            RequestStatus::Delivered {
                at,
                interest_hops,
                data_hops,
            } => {
                delivered += 1;
                delay_sum += at - r.created;
                hop_sum += (interest_hops + data_hops) as u64;
            }
            RequestStatus::Expired => expired += 1,
            RequestStatus::Pending => pending += 1,
            RequestStatus::DirectServed => direct += 1,
        }
    }
    debug_assert_eq!(
        hop_sum,
        transfers_of_delivered(requests, events),
        "hop accounting disagrees with the event log"
    );
    let cooperative = delivered + expired + pending;
    let ratio = |num: u64, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    MetricsReport {
        scheme,
        seed,
        config_hash: config_hash.to_string(),
        trace_hash: trace_hash.to_string(),
        created: requests.len(),
        delivered,
        expired,
        pending,
        direct_served: direct,
        delivery_ratio: ratio(delivered as u64, cooperative),
        actual_delay: ratio(delay_sum, delivered),
        overhead: ratio(hop_sum, delivered),
    }
}

/// Transfer events logged for requests that were delivered.
pub fn transfers_of_delivered(requests: &[Request], events: &[PacketEvent]) -> u64 {
    let delivered: std::collections::HashSet<RequestId> = requests
        .iter()
        .filter(|r| matches!(r.status, RequestStatus::Delivered { .. }))
        .map(|r| r.id)
        .collect();
    events
        .iter()
        .filter(|e| e.kind == EventKind::Transfer && delivered.contains(&e.request))
        .count() as u64
}

/// One metrics.csv row (no trailing newline).
pub fn metrics_row(report: &MetricsReport, config: &super::SimConfig) -> String {
    format!(
        "{},{},{},{},{},{},{:.6},{:.3},{:.6},{},{},{},{}",
        report.scheme,
        config.ttl,
        config.params.alpha,
        config.params.window,
        config.kappa,
        report.seed,
        report.delivery_ratio,
        report.actual_delay,
        report.overhead,
        report.delivered,
        report.expired,
        report.direct_served,
        report.config_hash
    )
}

pub const REQUESTS_HEADER: &str =
    "request_id,consumer,created,status,delivered_at,interest_hops,data_hops";

/// Per-request rows.
pub fn requests_csv(requests: &[Request]) -> String {
    let mut out = String::from(REQUESTS_HEADER);
    out.push('\n');
    for r in requests {
        let (status, at, ih, dh) = match r.status {
            RequestStatus::Pending => ("pending", String::new(), String::new(), String::new()),
            RequestStatus::Expired => ("expired", String::new(), String::new(), String::new()),
            RequestStatus::DirectServed => ("direct_served", String::new(), String::new(), String::new()),
            RequestStatus::Delivered {
                at,
                interest_hops,
                data_hops,
            } => ("delivered", at.to_string(), interest_hops.to_string(), data_hops.to_string()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.id, r.consumer, r.created, status, at, ih, dh
        ));
    }
    out
}
