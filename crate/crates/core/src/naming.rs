//! Global namespace, data and interest names, and component-set matching.
//!
//! Names are flat sets of tags. Tokens are interned once into [`ComponentId`]s
//! so that every routing-time comparison is an integer set operation.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The scheme prefix that marks an Interest as a cooperative-retrieval request.
pub const SCHEME_TOKEN: &str = "sNDN";

/// Interned name component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ComponentId(pub u32);

/// A set of components, as used for neighbour-set and circle names.
pub type ComponentSet = BTreeSet<ComponentId>;

/// Interner for the global namespace.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Namespace {
    tokens: Vec<String>,
    index: HashMap<String, ComponentId>,
}

impl Namespace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns `token`, returning the existing id when already present.
    pub fn intern(&mut self, token: &str) -> Result<ComponentId> {
        let token = token.trim();
        if token.is_empty() {
            return Err(Error::InvalidName("empty name component".into()));
        }
        if token == SCHEME_TOKEN {
            return Err(Error::InvalidName(format!(
                "`{SCHEME_TOKEN}` is reserved for the cooperative scheme prefix"
            )));
        }
        if let Some(id) = self.index.get(token) {
            return Ok(*id);
        }
        let id = ComponentId(self.tokens.len() as u32);
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), id);
        Ok(id)
    }

    pub fn lookup(&self, token: &str) -> Option<ComponentId> {
        self.index.get(token.trim()).copied()
    }

    pub fn token(&self, id: ComponentId) -> &str {
        &self.tokens[id.0 as usize]
    }

    pub fn contains(&self, id: ComponentId) -> bool {
        (id.0 as usize) < self.tokens.len()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ComponentId> + '_ {
        (0..self.tokens.len() as u32).map(ComponentId)
    }

    /// Renders a component set as `a/b/c` in id order.
    pub fn render_set<'a>(&self, set: impl IntoIterator<Item = &'a ComponentId>) -> String {
        set.into_iter()
            .map(|c| self.token(*c))
            .collect::<Vec<_>>()
            .join("/")
    }

    /// Parses `Coursea/Java` style text into a data name, interning new tokens.
    pub fn parse_data_name(&mut self, text: &str) -> Result<DataName> {
        let ids = text
            .split('/')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|tok| self.intern(tok))
            .collect::<Result<Vec<_>>>()?;
        DataName::new(ids)
    }

    /// Parses an interest without interning; every token must already exist.
    /// A leading `sNDN` component sets the cooperative flag.
    pub fn parse_interest(&self, text: &str) -> Result<InterestName> {
        let mut cooperative = false;
        let mut ids = Vec::new();
        for tok in text.split('/').map(str::trim).filter(|s| !s.is_empty()) {
            if tok == SCHEME_TOKEN {
                cooperative = true;
                continue;
            }
            let id = self
                .lookup(tok)
                .ok_or_else(|| Error::UnknownComponent(tok.to_string()))?;
            ids.push(id);
        }
        InterestName::new(cooperative, ids)
    }
}

/// Name of a data item. Equality is set equality; the original order is kept
/// for display only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataName {
    display: Vec<ComponentId>,
    sorted: Vec<ComponentId>,
}

impl DataName {
    pub fn new(components: Vec<ComponentId>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidName("data name has no components".into()));
        }
        let mut sorted = components.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidName("duplicate component in data name".into()));
        }
        Ok(Self {
            display: components,
            sorted,
        })
    }

    /// Components in display order.
    pub fn components(&self) -> &[ComponentId] {
        &self.display
    }

    /// Components in ascending id order.
    pub fn sorted(&self) -> &[ComponentId] {
        &self.sorted
    }

    pub fn contains(&self, c: ComponentId) -> bool {
        self.sorted.binary_search(&c).is_ok()
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// The interest asking for exactly this item's components.
    pub fn to_interest(&self) -> InterestName {
        InterestName {
            cooperative: true,
            components: self.sorted.clone(),
        }
    }

    pub fn display(&self, ns: &Namespace) -> String {
        ns.render_set(self.display.iter())
    }
}

impl PartialEq for DataName {
    fn eq(&self, other: &Self) -> bool {
        self.sorted == other.sorted
    }
}

impl Eq for DataName {}

impl std::hash::Hash for DataName {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.sorted.hash(state);
    }
}

impl PartialOrd for DataName {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DataName {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sorted.cmp(&other.sorted)
    }
}

/// Name carried by an Interest packet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InterestName {
    cooperative: bool,
    components: Vec<ComponentId>,
}

impl InterestName {
    pub fn new(cooperative: bool, mut components: Vec<ComponentId>) -> Result<Self> {
        components.sort_unstable();
        components.dedup();
        if components.is_empty() {
            return Err(Error::InvalidName("interest has no components".into()));
        }
        Ok(Self {
            cooperative,
            components,
        })
    }

    /// Whether the name carries the `sNDN` prefix.
    pub fn is_cooperative(&self) -> bool {
        self.cooperative
    }

    /// Components in ascending id order (prefix excluded).
    pub fn components(&self) -> &[ComponentId] {
        &self.components
    }

    pub fn display(&self, ns: &Namespace) -> String {
        let body = ns.render_set(self.components.iter());
        if self.cooperative {
            format!("{SCHEME_TOKEN}/{body}")
        } else {
            body
        }
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// True iff every component of `interest` occurs in `data`.
pub fn matches(data: &DataName, interest: &InterestName) -> bool {
    interest.components.iter().all(|c| data.contains(*c))
}

/// True iff the interest's components are a subset of `circle_name`.
/// An empty circle name covers nothing.
pub fn name_covers(circle_name: &ComponentSet, interest: &InterestName) -> bool {
    !circle_name.is_empty() && interest.components.iter().all(|c| circle_name.contains(c))
}

/// Content catalog: the set of data items the content servers can serve.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    pub namespace: Namespace,
    pub items: Vec<DataName>,
}

impl Catalog {
    /// Parses catalog text: one data name per line, `/`-separated, `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut catalog = Catalog::default();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let name = catalog
                .namespace
                .parse_data_name(line)
                .map_err(|e| Error::Parse {
                    line: lineno + 1,
                    message: e.to_string(),
                })?;
            if seen.insert(name.clone()) {
                catalog.items.push(name);
            }
        }
        if catalog.items.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::error::read_file(path)?;
        Self::parse(&text).map_err(|e| e.in_file(path))
    }

    /// Serializes back to the on-disk text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            out.push_str(&item.display(&self.namespace));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ns_with(tokens: &[&str]) -> Namespace {
        let mut ns = Namespace::new();
        for t in tokens {
            ns.intern(t).unwrap();
        }
        ns
    }

    #[test]
    fn course_video_matches_two_component_interest() {
        let mut ns = Namespace::new();
        let data = ns
            .parse_data_name("Coursea/Computer/Stanford/Java/Week1")
            .unwrap();
        let interest = ns.parse_interest("sNDN/Coursea/Java").unwrap();
        assert!(interest.is_cooperative());
        assert!(matches(&data, &interest));
    }

    #[test]
    fn identity_and_missing_component() {
        let mut ns = ns_with(&["A", "B", "C"]);
        let a = ns.parse_data_name("A").unwrap();
        assert!(matches(&a, &ns.parse_interest("A").unwrap()));
        let ab = ns.parse_data_name("A/B").unwrap();
        assert!(!matches(&ab, &ns.parse_interest("A/C").unwrap()));
    }

    #[test]
    fn covers_subset_and_empty() {
        let ns = ns_with(&["China", "Java", "US"]);
        let circle: ComponentSet = [ns.lookup("China").unwrap(), ns.lookup("Java").unwrap()]
            .into_iter()
            .collect();
        assert!(name_covers(&circle, &ns.parse_interest("Java").unwrap()));
        assert!(!name_covers(&ComponentSet::new(), &ns.parse_interest("Java").unwrap()));
        let china: ComponentSet = [ns.lookup("China").unwrap()].into_iter().collect();
        assert!(!name_covers(&china, &ns.parse_interest("China/US").unwrap()));
    }

    #[test]
    fn covers_agrees_with_enumerated_subsets() {
        // every 2-component interest over a 4-token namespace against every circle
        let ns = ns_with(&["a", "b", "c", "d"]);
        let ids: Vec<_> = ns.ids().collect();
        for mask in 0u32..16 {
            let circle: ComponentSet = ids
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, c)| *c)
                .collect();
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let interest = InterestName::new(true, vec![ids[i], ids[j]]).unwrap();
                    let expect = mask & (1 << i) != 0 && mask & (1 << j) != 0;
                    assert_eq!(name_covers(&circle, &interest), expect);
                }
            }
        }
    }

    #[test]
    fn data_name_equality_ignores_order() {
        let mut ns = Namespace::new();
        let x = ns.parse_data_name("a/b").unwrap();
        let y = ns.parse_data_name("b/a").unwrap();
        assert_eq!(x, y);
        assert_eq!(x.display(&ns), "a/b");
        assert_eq!(y.display(&ns), "b/a");
    }

    #[test]
    fn invalid_names_are_rejected() {
        let mut ns = Namespace::new();
        assert!(ns.parse_data_name("a/a").is_err());
        assert!(ns.parse_data_name("").is_err());
        assert!(ns.parse_data_name("sNDN/a").is_err());
        assert!(ns.parse_interest("sNDN").is_err());
        assert!(matches!(
            ns.parse_interest("nope"),
            Err(Error::UnknownComponent(_))
        ));
    }

    #[test]
    fn components_are_case_sensitive() {
        let mut ns = Namespace::new();
        let a = ns.intern("Java").unwrap();
        let b = ns.intern("java").unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn catalog_parses_comments_and_leading_slash() {
        let cat = Catalog::parse("# header\n/artist1/pop\nartist2/rock # trailing\n\nartist1/pop\n")
            .unwrap();
        assert_eq!(cat.items.len(), 2);
        assert_eq!(cat.namespace.len(), 4);
        assert!(matches!(Catalog::parse("# nothing\n"), Err(Error::EmptyCatalog)));
    }
}
