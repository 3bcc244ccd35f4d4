//! Contact traces, base-station lists and user preference profiles.

mod synthetic;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{read_file, Error, Result};
use crate::naming::{Catalog, ComponentId, Namespace};
use crate::{NodeId, Time};

pub use synthetic::{generate_synthetic_trace, SyntheticSpec, SyntheticTrace};

/// A contact between two nodes over `[start, end)`. After normalization
/// `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContactEvent {
    pub a: NodeId,
    pub b: NodeId,
    pub start: Time,
    pub end: Time,
}

impl ContactEvent {
    pub fn new(a: NodeId, b: NodeId, start: Time, end: Time) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Self { a, b, start, end }
    }

    pub fn duration(&self) -> Time {
        self.end - self.start
    }

    pub fn involves(&self, n: NodeId) -> bool {
        self.a == n || self.b == n
    }

    pub fn other(&self, n: NodeId) -> NodeId {
        if self.a == n {
            self.b
        } else {
            self.a
        }
    }
}

/// On-disk contact trace layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContactFormat {
    /// `a,b,start,end`, optional header.
    #[default]
    Csv,
    /// Whitespace-separated `a b start end [ignored...]`, as in CRAWDAD dumps.
    Whitespace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceBundle {
    pub nodes: BTreeSet<NodeId>,
    pub base_stations: BTreeSet<NodeId>,
    /// Sorted by `(start, a, b, end)`.
    pub events: Vec<ContactEvent>,
    pub horizon: Time,
}

impl TraceBundle {
    /// Builds a bundle from raw events, normalizing them. The horizon is at
    /// least the latest contact end.
    pub fn from_events(raw: Vec<ContactEvent>, horizon: Option<Time>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::NoEvents);
        }
        let events = normalize_events(raw);
        let nodes = events.iter().flat_map(|e| [e.a, e.b]).collect();
        let last = events.iter().map(|e| e.end).max().unwrap_or(0);
        Ok(Self {
            nodes,
            base_stations: BTreeSet::new(),
            events,
            horizon: horizon.unwrap_or(last).max(last),
        })
    }

    /// Flags `stations` as base stations; every id must be a trace node.
    pub fn with_base_stations(mut self, stations: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        for s in stations {
            if !self.nodes.contains(&s) {
                return Err(Error::UnknownStation(s.0));
            }
            self.base_stations.insert(s);
        }
        Ok(self)
    }

    pub fn is_station(&self, n: NodeId) -> bool {
        self.base_stations.contains(&n)
    }

    /// Nodes that are mobile users (not base stations).
    pub fn users(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().copied().filter(|n| !self.is_station(*n))
    }

    /// `contacts.csv` text, including a `# horizon:` line so that the
    /// horizon survives a round trip.
    pub fn contacts_csv(&self) -> String {
        let mut out = String::from("a,b,start,end\n");
        let _ = writeln!(out, "# horizon: {}", self.horizon);
        for e in &self.events {
            let _ = writeln!(out, "{},{},{},{}", e.a, e.b, e.start, e.end);
        }
        out
    }

    pub fn stations_text(&self) -> String {
        self.base_stations
            .iter()
            .map(|s| format!("{s}\n"))
            .collect()
    }
}

/// Sorts events, collapses symmetric duplicates and merges overlapping or
/// touching intervals of the same unordered pair.
pub fn normalize_events(raw: Vec<ContactEvent>) -> Vec<ContactEvent> {
    let mut by_pair: BTreeMap<(NodeId, NodeId), Vec<(Time, Time)>> = BTreeMap::new();
    for e in raw {
        let e = ContactEvent::new(e.a, e.b, e.start, e.end);
        by_pair.entry((e.a, e.b)).or_default().push((e.start, e.end));
    }
    let mut events = Vec::new();
    for ((a, b), mut spans) in by_pair {
        spans.sort_unstable();
        let mut cur = spans[0];
        for &(s, e) in &spans[1..] {
            if s <= cur.1 {
                cur.1 = cur.1.max(e);
            } else {
                events.push(ContactEvent { a, b, start: cur.0, end: cur.1 });
                cur = (s, e);
            }
        }
        events.push(ContactEvent { a, b, start: cur.0, end: cur.1 });
    }
    events.sort_unstable_by_key(|e| (e.start, e.a, e.b, e.end));
    events
}

fn parse_u64(field: &str, line: usize, what: &str) -> Result<u64> {
    field.trim().parse::<u64>().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{}`", field.trim()),
    })
}

/// Parses contact-trace text. `# horizon: N` comment lines set the horizon.
pub fn parse_contact_trace(text: &str, format: ContactFormat) -> Result<TraceBundle> {
    let mut raw = Vec::new();
    let mut horizon = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(h) = comment.trim().strip_prefix("horizon:") {
                horizon = Some(parse_u64(h, lineno, "horizon")?);
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = match format {
            ContactFormat::Csv => trimmed.split(',').collect(),
            ContactFormat::Whitespace => trimmed.split_whitespace().collect(),
        };
        if raw.is_empty() && fields.first().map(|f| f.trim()) == Some("a") {
            continue;
        }
        let expected = match format {
            ContactFormat::Csv => fields.len() == 4,
            ContactFormat::Whitespace => fields.len() >= 4,
        };
        if !expected {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected `a,b,start,end`, got {} fields", fields.len()),
            });
        }
        let a = parse_u64(fields[0], lineno, "node id")?;
        let b = parse_u64(fields[1], lineno, "node id")?;
        let start = parse_u64(fields[2], lineno, "start time")?;
        let end = parse_u64(fields[3], lineno, "end time")?;
        if start >= end {
            return Err(Error::Parse {
                line: lineno,
                message: format!("start {start} is not before end {end}"),
            });
        }
        if a == b {
            return Err(Error::Parse {
                line: lineno,
                message: format!("self-contact of node {a}"),
            });
        }
        let to_id = |v: u64| -> Result<NodeId> {
            u32::try_from(v).map(NodeId).map_err(|_| Error::Parse {
                line: lineno,
                message: format!("node id {v} out of range"),
            })
        };
        raw.push(ContactEvent::new(to_id(a)?, to_id(b)?, start, end));
    }
    TraceBundle::from_events(raw, horizon)
}

pub fn load_contact_trace(path: &Path, format: ContactFormat) -> Result<TraceBundle> {
    let text = read_file(path)?;
    parse_contact_trace(&text, format).map_err(|e| e.in_file(path))
}

/// Parses a station list: one node id per line, `#` comments.
pub fn parse_stations(text: &str) -> Result<Vec<NodeId>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v = parse_u64(line, idx + 1, "station id")?;
        let id = u32::try_from(v).map_err(|_| Error::Parse {
            line: idx + 1,
            message: format!("station id {v} out of range"),
        })?;
        out.push(NodeId(id));
    }
    Ok(out)
}

pub fn load_stations(path: &Path) -> Result<Vec<NodeId>> {
    let text = read_file(path)?;
    parse_stations(&text).map_err(|e| e.in_file(path))
}

/// A user's normalized preference over name components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceProfile {
    pub user: NodeId,
    pub weights: BTreeMap<ComponentId, f64>,
}

impl PreferenceProfile {
    /// Equal weight on every namespace component.
    pub fn uniform(user: NodeId, ns: &Namespace) -> Self {
        let w = 1.0 / ns.len() as f64;
        Self {
            user,
            weights: ns.ids().map(|c| (c, w)).collect(),
        }
    }

    /// Normalizes raw non-negative weights to sum to one. Weights already
    /// normalized to within 1e-12 are kept bit-for-bit.
    pub fn normalized(user: NodeId, raw: BTreeMap<ComponentId, f64>) -> Result<Self> {
        if let Some((c, w)) = raw.iter().find(|(_, w)| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "user {user}: weight {w} for component {c} is negative or not finite"
            )));
        }
        let total: f64 = raw.values().sum();
        if total <= 0.0 {
            return Err(Error::InvalidProfile(format!("user {user}: weights sum to zero")));
        }
        let weights = if (total - 1.0).abs() <= 1e-12 {
            raw
        } else {
            raw.into_iter().map(|(c, w)| (c, w / total)).collect()
        };
        Ok(Self { user, weights })
    }

    pub fn weight(&self, c: ComponentId) -> f64 {
        self.weights.get(&c).copied().unwrap_or(0.0)
    }
}

/// Parses `user,component,weight` rows. Users in `users` without rows get the
/// uniform profile.
pub fn parse_profiles(
    text: &str,
    ns: &Namespace,
    users: impl IntoIterator<Item = NodeId>,
) -> Result<BTreeMap<NodeId, PreferenceProfile>> {
    let mut raw: BTreeMap<NodeId, BTreeMap<ComponentId, f64>> = BTreeMap::new();
    let mut first = true;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if first && fields.first() == Some(&"user") {
            first = false;
            continue;
        }
        first = false;
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                message: "expected `user,component,weight`".into(),
            });
        }
        let user = u32::try_from(parse_u64(fields[0], lineno, "user id")?)
            .map(NodeId)
            .map_err(|_| Error::Parse {
                line: lineno,
                message: "user id out of range".into(),
            })?;
        let comp = ns
            .lookup(fields[1])
            .ok_or_else(|| Error::UnknownComponent(fields[1].to_string()))?;
        let weight: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("invalid weight `{}`", fields[2]),
        })?;
        if weight < 0.0 || !weight.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "line {lineno}: negative weight {weight}"
            )));
        }
        *raw.entry(user).or_default().entry(comp).or_insert(0.0) += weight;
    }
    let mut out = BTreeMap::new();
    for (user, weights) in raw {
        out.insert(user, PreferenceProfile::normalized(user, weights)?);
    }
    for user in users {
        out.entry(user)
            .or_insert_with(|| PreferenceProfile::uniform(user, ns));
    }
    Ok(out)
}

pub fn load_profiles(
    path: &Path,
    ns: &Namespace,
    users: impl IntoIterator<Item = NodeId>,
) -> Result<BTreeMap<NodeId, PreferenceProfile>> {
    let text = read_file(path)?;
    parse_profiles(&text, ns, users).map_err(|e| e.in_file(path))
}

pub fn profiles_csv(profiles: &BTreeMap<NodeId, PreferenceProfile>, ns: &Namespace) -> String {
    let mut out = String::from("user,component,weight\n");
    for p in profiles.values() {
        for (c, w) in &p.weights {
            let _ = writeln!(out, "{},{},{}", p.user, ns.token(*c), w);
        }
    }
    out
}

/// File names inside a trace directory.
pub const CONTACTS_FILE: &str = "contacts.csv";
pub const STATIONS_FILE: &str = "stations.txt";
pub const PROFILES_FILE: &str = "profiles.csv";
pub const CATALOG_FILE: &str = "catalog.txt";

/// The simulator's inputs as stored in one directory.
#[derive(Debug, Clone)]
pub struct TraceSet {
    pub bundle: TraceBundle,
    pub catalog: Catalog,
    pub profiles: BTreeMap<NodeId, PreferenceProfile>,
}

/// Loads `contacts.csv` and `catalog.txt`, plus `stations.txt` and
/// `profiles.csv` when present (no stations and uniform profiles otherwise).
pub fn load_trace_dir(dir: &Path) -> Result<TraceSet> {
    let mut bundle = load_contact_trace(&dir.join(CONTACTS_FILE), ContactFormat::Csv)?;
    let catalog = Catalog::load(&dir.join(CATALOG_FILE))?;
    let stations_path = dir.join(STATIONS_FILE);
    if stations_path.exists() {
        bundle = bundle
            .with_base_stations(load_stations(&stations_path)?)
            .map_err(|e| e.in_file(&stations_path))?;
    }
    let users: Vec<NodeId> = bundle.users().collect();
    let profiles_path = dir.join(PROFILES_FILE);
    let profiles = if profiles_path.exists() {
        load_profiles(&profiles_path, &catalog.namespace, users)?
    } else {
        users
            .into_iter()
            .map(|u| (u, PreferenceProfile::uniform(u, &catalog.namespace)))
            .collect()
    };
    Ok(TraceSet {
        bundle,
        catalog,
        profiles,
    })
}

/// Writes the four trace-directory files, creating `dir` if needed.
pub fn write_trace_dir(dir: &Path, set: &TraceSet) -> Result<()> {
    let io = |path: &Path, e: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for (name, text) in [
        (CONTACTS_FILE, set.bundle.contacts_csv()),
        (STATIONS_FILE, set.bundle.stations_text()),
        (PROFILES_FILE, profiles_csv(&set.profiles, &set.catalog.namespace)),
        (CATALOG_FILE, set.catalog.to_text()),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| io(&path, e))?;
    }
    Ok(())
}

impl From<SyntheticTrace> for TraceSet {
    fn from(t: SyntheticTrace) -> Self {
        TraceSet {
            bundle: t.bundle,
            catalog: t.catalog,
            profiles: t.profiles,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_overlap_is_merged() {
        let b = parse_contact_trace("1,2,10,20\n2,1,15,30\n", ContactFormat::Csv).unwrap();
        assert_eq!(b.events, vec![ContactEvent::new(NodeId(1), NodeId(2), 10, 30)]);
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(
            parse_contact_trace("", ContactFormat::Csv),
            Err(Error::NoEvents)
        ));
        assert!(matches!(
            parse_contact_trace("a,b,start,end\n", ContactFormat::Csv),
            Err(Error::NoEvents)
        ));
    }

    #[test]
    fn three_rows_come_back_sorted() {
        let text = "a,b,start,end\n3,4,50,60\n1,2,10,20\n2,3,30,40\n";
        let b = parse_contact_trace(text, ContactFormat::Csv).unwrap();
        let starts: Vec<_> = b.events.iter().map(|e| e.start).collect();
        assert_eq!(starts, vec![10, 30, 50]);
        assert_eq!(b.nodes.len(), 4);
        assert_eq!(b.horizon, 60);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = parse_contact_trace("1,2,10,20\n1,2,x,5\n", ContactFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_contact_trace("1,2,10,20\n\n3,4,9,9\n", ContactFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_contact_trace("1,2,10\n", ContactFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn whitespace_format_ignores_extra_columns() {
        let b = parse_contact_trace("1 2 10 20 1 0\n3 1 5 8 2 0\n", ContactFormat::Whitespace)
            .unwrap();
        assert_eq!(b.events.len(), 2);
        assert_eq!(b.events[0], ContactEvent::new(NodeId(1), NodeId(3), 5, 8));
    }

    #[test]
    fn touching_intervals_merge() {
        let events = normalize_events(vec![
            ContactEvent::new(NodeId(0), NodeId(1), 0, 5),
            ContactEvent::new(NodeId(1), NodeId(0), 5, 9),
            ContactEvent::new(NodeId(0), NodeId(1), 12, 13),
        ]);
        assert_eq!(events.len(), 2);
        assert_eq!((events[0].start, events[0].end), (0, 9));
    }

    #[test]
    fn unknown_station_is_rejected() {
        let b = parse_contact_trace("1,2,10,20\n", ContactFormat::Csv).unwrap();
        assert!(matches!(
            b.clone().with_base_stations([NodeId(9)]),
            Err(Error::UnknownStation(9))
        ));
        let b = b.with_base_stations([NodeId(2)]).unwrap();
        assert_eq!(b.users().collect::<Vec<_>>(), vec![NodeId(1)]);
    }

    #[test]
    fn horizon_comment_is_honoured() {
        let b = parse_contact_trace("# horizon: 100\n1,2,10,20\n", ContactFormat::Csv).unwrap();
        assert_eq!(b.horizon, 100);
        let again = parse_contact_trace(&b.contacts_csv(), ContactFormat::Csv).unwrap();
        assert_eq!(again, b);
    }

    fn ns4() -> Namespace {
        let mut ns = Namespace::new();
        for t in ["a", "b", "c", "d"] {
            ns.intern(t).unwrap();
        }
        ns
    }

    #[test]
    fn profile_weights_are_normalized() {
        let ns = ns4();
        let p = parse_profiles("user,component,weight\n1,a,2\n1,b,2\n", &ns, []).unwrap();
        assert_eq!(p[&NodeId(1)].weight(ns.lookup("a").unwrap()), 0.5);
        assert_eq!(p[&NodeId(1)].weight(ns.lookup("b").unwrap()), 0.5);

        let p = parse_profiles("2,c,1\n2,d,3\n", &ns, []).unwrap();
        assert!((p[&NodeId(2)].weight(ns.lookup("c").unwrap()) - 0.25).abs() < 1e-15);
        assert!((p[&NodeId(2)].weight(ns.lookup("d").unwrap()) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn missing_user_gets_uniform_profile() {
        let ns = ns4();
        let p = parse_profiles("", &ns, [NodeId(7)]).unwrap();
        for c in ns.ids() {
            assert_eq!(p[&NodeId(7)].weight(c), 0.25);
        }
    }

    #[test]
    fn bad_profile_rows_are_rejected() {
        let ns = ns4();
        assert!(matches!(
            parse_profiles("1,a,-1\n", &ns, []),
            Err(Error::InvalidProfile(_))
        ));
        assert!(matches!(
            parse_profiles("1,zzz,1\n", &ns, []),
            Err(Error::UnknownComponent(_))
        ));
    }
}
