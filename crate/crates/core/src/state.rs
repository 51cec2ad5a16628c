//! Parsing-state vocabulary.
//!
//! Every language automaton labels bytes with states drawn from a fixed,
//! versioned catalog that ships with the build as a human-readable table
//! (`catalog/states.tsv`). State names in traces, logs and dumps are the
//! catalog names verbatim.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

/// Language a parsing state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Language {
    Html,
    Css,
    Js,
    Shell,
}

impl Language {
    pub fn as_str(&self) -> &'static str {
        match self {
            Language::Html => "html",
            Language::Css => "css",
            Language::Js => "js",
            Language::Shell => "shell",
        }
    }

    fn parse(s: &str) -> Option<Language> {
        match s {
            "html" => Some(Language::Html),
            "css" => Some(Language::Css),
            "js" => Some(Language::Js),
            "shell" => Some(Language::Shell),
            _ => None,
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies what bytes in a state mean to the consuming parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Inert literal data (string interiors, text nodes, words).
    Data,
    /// Structural delimiters (quotes, separators, punctuation).
    Delimiter,
    /// Executable or structural code.
    Code,
    /// Error sink.
    Error,
}

impl Role {
    fn parse(s: &str) -> Option<Role> {
        match s {
            "data" => Some(Role::Data),
            "delimiter" => Some(Role::Delimiter),
            "code" => Some(Role::Code),
            "error" => Some(Role::Error),
            _ => None,
        }
    }
}

/// Compact handle into the state catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(u16);

impl StateId {
    /// Builds an id from a raw catalog index. Ids that do not resolve in the
    /// catalog are rejected by the engine as a malformed spec.
    pub fn from_index(index: usize) -> StateId {
        StateId(index as u16)
    }

    pub fn index(&self) -> usize {
        self.0 as usize
    }
}

/// One catalog record: a named parsing state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextState {
    pub language: Language,
    pub name: &'static str,
    pub role: Role,
}

/// The fixed state table every automaton draws its vocabulary from.
pub struct Catalog {
    version: u32,
    states: Vec<ContextState>,
    by_key: HashMap<(Language, &'static str), StateId>,
}

impl Catalog {
    /// The catalog bundled with this build.
    pub fn shared() -> &'static Catalog {
        static CATALOG: OnceLock<Catalog> = OnceLock::new();
        CATALOG.get_or_init(|| {
            Catalog::parse(include_str!("../catalog/states.tsv"))
                .expect("bundled state catalog is well-formed")
        })
    }

    fn parse(table: &'static str) -> Result<Catalog, String> {
        let mut version = None;
        let mut states = Vec::new();
        let mut by_key = HashMap::new();
        for (lineno, line) in table.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let first = fields.next().unwrap_or("");
            if first == "version" {
                let v = fields
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| format!("line {}: bad version", lineno + 1))?;
                version = Some(v);
                continue;
            }
            let language = Language::parse(first)
                .ok_or_else(|| format!("line {}: unknown language {first:?}", lineno + 1))?;
            let name = fields
                .next()
                .ok_or_else(|| format!("line {}: missing state name", lineno + 1))?;
            let role = fields
                .next()
                .and_then(Role::parse)
                .ok_or_else(|| format!("line {}: missing or unknown role", lineno + 1))?;
            let id = StateId(states.len() as u16);
            if by_key.insert((language, name), id).is_some() {
                return Err(format!("line {}: duplicate state {language}/{name}", lineno + 1));
            }
            states.push(ContextState { language, name, role });
        }
        Ok(Catalog {
            version: version.ok_or("catalog missing version record")?,
            states,
            by_key,
        })
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, id: StateId) -> Option<&ContextState> {
        self.states.get(id.index())
    }

    pub fn lookup(&self, language: Language, name: &str) -> Option<StateId> {
        self.by_key.get(&(language, name)).copied()
    }

    /// Lookup that panics on a missing record; spec constructors use it and a
    /// completeness test pins the catalog they rely on.
    pub fn require(&self, language: Language, name: &str) -> StateId {
        self.lookup(language, name)
            .unwrap_or_else(|| panic!("state {language}/{name} not in catalog"))
    }

    /// Catalog name for an id, or a placeholder for unregistered ids.
    pub fn name_of(&self, id: StateId) -> &'static str {
        self.get(id).map(|s| s.name).unwrap_or("<unregistered>")
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, &ContextState)> {
        self.states
            .iter()
            .enumerate()
            .map(|(i, s)| (StateId(i as u16), s))
    }
}
