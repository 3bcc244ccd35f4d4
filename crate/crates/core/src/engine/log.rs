//! Packet-event audit log.

use std::fmt;
use std::str::FromStr;

use crate::baselines::SchemeId;
use crate::error::{Error, Result};
use crate::sndn::RequestId;
use crate::{NodeId, Time};

pub const EVENTS_HEADER: &str = "time,request_id,scheme,event,from,to,phase,hops";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Created,
    Transfer,
    Satisfy,
    Deliver,
    Drop,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Created => "created",
            EventKind::Transfer => "transfer",
            EventKind::Satisfy => "satisfy",
            EventKind::Deliver => "deliver",
            EventKind::Drop => "drop",
        }
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "created" => EventKind::Created,
            "transfer" => EventKind::Transfer,
            "satisfy" => EventKind::Satisfy,
            "deliver" => EventKind::Deliver,
            "drop" => EventKind::Drop,
            other => return Err(Error::InvalidConfig(format!("unknown event kind `{other}`"))),
        })
    }
}

/// Phase label carried by an event: Interest phases (`macro`, `micro`), Data
/// phases (`centrality`, `circle`, `hold`), or `interest`/`data` for Flood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseTag {
    Macro,
    Micro,
    Centrality,
    Circle,
    Hold,
    Interest,
    Data,
}

impl PhaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseTag::Macro => "macro",
            PhaseTag::Micro => "micro",
            PhaseTag::Centrality => "centrality",
            PhaseTag::Circle => "circle",
            PhaseTag::Hold => "hold",
            PhaseTag::Interest => "interest",
            PhaseTag::Data => "data",
        }
    }

    /// Whether the tag labels a Data packet.
    pub fn is_data(self) -> bool {
        matches!(
            self,
            PhaseTag::Centrality | PhaseTag::Circle | PhaseTag::Hold | PhaseTag::Data
        )
    }

    /// Position in the Data phase order, if a single-copy Data phase.
    pub fn data_rank(self) -> Option<u8> {
        match self {
            PhaseTag::Centrality => Some(0),
            PhaseTag::Circle => Some(1),
            PhaseTag::Hold => Some(2),
            _ => None,
        }
    }
}

impl FromStr for PhaseTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "macro" => PhaseTag::Macro,
            "micro" => PhaseTag::Micro,
            "centrality" => PhaseTag::Centrality,
            "circle" => PhaseTag::Circle,
            "hold" => PhaseTag::Hold,
            "interest" => PhaseTag::Interest,
            "data" => PhaseTag::Data,
            other => return Err(Error::InvalidConfig(format!("unknown phase `{other}`"))),
        })
    }
}

impl From<crate::sndn::InterestPhase> for PhaseTag {
    fn from(p: crate::sndn::InterestPhase) -> Self {
        match p {
            crate::sndn::InterestPhase::Macro => PhaseTag::Macro,
            crate::sndn::InterestPhase::Micro => PhaseTag::Micro,
        }
    }
}

impl From<crate::sndn::DataPhase> for PhaseTag {
    fn from(p: crate::sndn::DataPhase) -> Self {
        match p {
            crate::sndn::DataPhase::Centrality => PhaseTag::Centrality,
            crate::sndn::DataPhase::Circle => PhaseTag::Circle,
            crate::sndn::DataPhase::Hold => PhaseTag::Hold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketEvent {
    pub time: Time,
    pub request: RequestId,
    pub scheme: SchemeId,
    pub kind: EventKind,
    pub from: NodeId,
    pub to: NodeId,
    pub phase: PhaseTag,
    /// Hop count of the packet after the event.
    pub hops: u32,
}

impl fmt::Display for PacketEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{},{}",
            self.time,
            self.request,
            self.scheme,
            self.kind.as_str(),
            self.from,
            self.to,
            self.phase.as_str(),
            self.hops
        )
    }
}

pub fn events_csv(events: &[PacketEvent]) -> String {
    let mut out = String::with_capacity(events.len() * 40 + 64);
    out.push_str(EVENTS_HEADER);
    out.push('\n');
    for e in events {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

/// Parses a log written by [`events_csv`].
pub fn parse_events_csv(text: &str) -> Result<Vec<PacketEvent>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line == EVENTS_HEADER {
            continue;
        }
        let parse_err = |m: String| Error::Parse {
            line: line_no,
            message: m,
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(parse_err(format!("expected 8 fields, got {}", f.len())));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|e| parse_err(format!("`{s}`: {e}")));
        out.push(PacketEvent {
            time: num(f[0])?,
            request: num(f[1])?,
            scheme: f[2].parse().map_err(|e: Error| parse_err(e.to_string()))?,
            kind: f[3].parse().map_err(|e: Error| parse_err(e.to_string()))?,
            from: NodeId(num(f[4])? as u32),
            to: NodeId(num(f[5])? as u32),
            phase: f[6].parse().map_err(|e: Error| parse_err(e.to_string()))?,
            hops: num(f[7])? as u32,
        });
    }
    Ok(out)
}
