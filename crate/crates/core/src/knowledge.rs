//! Knowledge taxonomy for communication channels.
//!
//! Channels are coded with tacit (`T1`..`T11`) and explicit (`E1`..`E10`)
//! knowledge distinctions and placed in one of the SECI transfer dimensions.
//! The built-in [`ChannelRegistry`] holds the thirteen classified channels;
//! analyses refer to channels by name through it.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KnowledgeKind {
    Tacit,
    Explicit,
}

impl KnowledgeKind {
    pub fn max_index(self) -> u8 {
        match self {
            KnowledgeKind::Tacit => 11,
            KnowledgeKind::Explicit => 10,
        }
    }

    fn prefix(self) -> char {
        match self {
            KnowledgeKind::Tacit => 'T',
            KnowledgeKind::Explicit => 'E',
        }
    }
}

const TACIT_LABELS: [&str; 11] = [
    "Subjective, cognitive, experiential learning",
    "Personal",
    "Context sensitive/specific",
    "Dynamically created",
    "Internalized",
    "Difficult to capture and codify",
    "Difficult to share",
    "Has high value",
    "Hard to document",
    "Hard to transfer/teach/learn",
    "Involves a lot of human interpretation",
];

const EXPLICIT_LABELS: [&str; 10] = [
    "Objective, rational, technical",
    "Structured",
    "Fixed content",
    "Context independent",
    "Externalized",
    "Easily documented",
    "Easy to codify",
    "Easy to share",
    "Easily to transferred/taught/learned",
    "Exists in high volumes",
];

/// One tacit or explicit knowledge distinction, e.g. `T2` or `E3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KnowledgeCode {
    kind: KnowledgeKind,
    index: u8,
}

impl KnowledgeCode {
    pub fn new(kind: KnowledgeKind, index: u8) -> Result<Self> {
        if index == 0 || index > kind.max_index() {
            return Err(Error::arg(format!(
                "{}{} is outside {}1..{}{}",
                kind.prefix(),
                index,
                kind.prefix(),
                kind.prefix(),
                kind.max_index()
            )));
        }
        Ok(KnowledgeCode { kind, index })
    }

    pub const fn tacit(index: u8) -> Self {
        assert!(index >= 1 && index <= 11);
        KnowledgeCode {
            kind: KnowledgeKind::Tacit,
            index,
        }
    }

    pub const fn explicit(index: u8) -> Self {
        assert!(index >= 1 && index <= 10);
        KnowledgeCode {
            kind: KnowledgeKind::Explicit,
            index,
        }
    }

    pub fn kind(self) -> KnowledgeKind {
        self.kind
    }

    pub fn index(self) -> u8 {
        self.index
    }

    pub fn is_tacit(self) -> bool {
        self.kind == KnowledgeKind::Tacit
    }

    /// Short label of the distinction.
    pub fn label(self) -> &'static str {
        let i = usize::from(self.index - 1);
        match self.kind {
            KnowledgeKind::Tacit => TACIT_LABELS[i],
            KnowledgeKind::Explicit => EXPLICIT_LABELS[i],
        }
    }

    /// Every code, tacit first.
    pub fn all() -> impl Iterator<Item = KnowledgeCode> {
        (1..=11)
            .map(KnowledgeCode::tacit)
            .chain((1..=10).map(KnowledgeCode::explicit))
    }

    /// Codes that channels may be labeled with.
    pub fn labeling_codes() -> [KnowledgeCode; 6] {
        [T2, T3, T4, E2, E3, E4]
    }
}

pub const T2: KnowledgeCode = KnowledgeCode::tacit(2);
pub const T3: KnowledgeCode = KnowledgeCode::tacit(3);
pub const T4: KnowledgeCode = KnowledgeCode::tacit(4);
pub const E2: KnowledgeCode = KnowledgeCode::explicit(2);
pub const E3: KnowledgeCode = KnowledgeCode::explicit(3);
pub const E4: KnowledgeCode = KnowledgeCode::explicit(4);

impl fmt::Display for KnowledgeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.prefix(), self.index)
    }
}

impl FromStr for KnowledgeCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('T') | Some('t') => KnowledgeKind::Tacit,
            Some('E') | Some('e') => KnowledgeKind::Explicit,
            _ => return Err(Error::Parse(format!("bad knowledge code {s:?}"))),
        };
        let index: u8 = chars
            .as_str()
            .parse()
            .map_err(|_| Error::Parse(format!("bad knowledge code {s:?}")))?;
        KnowledgeCode::new(kind, index)
    }
}

impl Serialize for KnowledgeCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KnowledgeCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// SECI knowledge-transfer dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SeciDimension {
    /// tacit to tacit
    Socialization,
    /// tacit to explicit
    Externalization,
    /// explicit to explicit
    Combination,
    /// explicit to tacit
    Internalization,
}

impl fmt::Display for SeciDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeciDimension::Socialization => "Socialization",
            SeciDimension::Externalization => "Externalization",
            SeciDimension::Combination => "Combination",
            SeciDimension::Internalization => "Internalization",
        })
    }
}

impl FromStr for SeciDimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "socialization" => Ok(SeciDimension::Socialization),
            "externalization" => Ok(SeciDimension::Externalization),
            "combination" => Ok(SeciDimension::Combination),
            "internalization" => Ok(SeciDimension::Internalization),
            _ => Err(Error::Parse(format!("unknown SECI dimension {s:?}"))),
        }
    }
}

/// How a channel's raw value is recorded in the project export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValueKind {
    Count,
    Flag,
    Text,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Count => "Count",
            ValueKind::Flag => "Flag",
            ValueKind::Text => "Text",
        })
    }
}

impl FromStr for ValueKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "count" => Ok(ValueKind::Count),
            "flag" => Ok(ValueKind::Flag),
            "text" => Ok(ValueKind::Text),
            _ => Err(Error::Parse(format!("unknown value kind {s:?}"))),
        }
    }
}

/// Classification rule: any tacit code means tacit content is being made
/// explicit; an all-explicit code set recombines explicit knowledge.
pub fn derive_dimension(codes: &BTreeSet<KnowledgeCode>) -> Result<SeciDimension> {
    if codes.is_empty() {
        return Err(Error::arg("cannot derive a dimension from an empty code set"));
    }
    if codes.iter().any(|c| c.is_tacit()) {
        Ok(SeciDimension::Externalization)
    } else {
        Ok(SeciDimension::Combination)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelDescriptor {
    pub name: String,
    pub codes: BTreeSet<KnowledgeCode>,
    pub dimension: SeciDimension,
    pub value_kind: ValueKind,
    pub rationale: String,
}

impl ChannelDescriptor {
    fn builtin(name: &str, codes: &[KnowledgeCode], value_kind: ValueKind) -> Self {
        let codes: BTreeSet<_> = codes.iter().copied().collect();
        let dimension = derive_dimension(&codes).expect("built-in codes are non-empty");
        let rationale = codes.iter().map(|c| c.label()).collect::<Vec<_>>().join("; ");
        ChannelDescriptor {
            name: name.to_owned(),
            codes,
            dimension,
            value_kind,
            rationale,
        }
    }

    pub fn codes_string(&self) -> String {
        self.codes
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub mod names {
    pub const GITHUB_PAGES: &str = "GitHub Pages";
    pub const README: &str = "Readme";
    pub const SECURITY_AUDIT: &str = "Security Audit";
    pub const WIKI: &str = "Wiki";
    pub const CHANGELOG: &str = "Changelog";
    pub const CODE_OF_CONDUCT: &str = "Code of Conduct";
    pub const CONTRIBUTING_GUIDELINES: &str = "Contributing Guidelines";
    pub const FORK: &str = "Fork";
    pub const ISSUE_TRACKER: &str = "Issue Tracker";
    pub const LICENSE: &str = "License";
    pub const SECURITY_THREAT_MODEL: &str = "Security Threat Model";
    pub const NUM_FORKS: &str = "# of Forks";
    pub const NUM_OPEN_ISSUES: &str = "# of Open Issues";
}

/// Report columns of the evolution table.
pub const EVOLUTION_CHANNELS: [&str; 8] = [
    names::GITHUB_PAGES,
    names::SECURITY_AUDIT,
    names::WIKI,
    names::CHANGELOG,
    names::CONTRIBUTING_GUIDELINES,
    names::FORK,
    names::ISSUE_TRACKER,
    names::LICENSE,
];

/// Report rows of the cross-ecosystem popularity table.
pub const POPULARITY_CHANNELS: [&str; 5] = [
    names::CODE_OF_CONDUCT,
    names::CONTRIBUTING_GUIDELINES,
    names::ISSUE_TRACKER,
    names::LICENSE,
    names::WIKI,
];

/// Ordered, name-unique set of channel descriptors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelRegistry {
    channels: Vec<ChannelDescriptor>,
}

pub const REGISTRY_SIZE: usize = 13;
pub const EXTERNALIZATION_COUNT: usize = 4;
pub const COMBINATION_COUNT: usize = 9;

impl Default for ChannelRegistry {
    fn default() -> Self {
        registry_default()
    }
}

/// The thirteen classified channels.
pub fn registry_default() -> ChannelRegistry {
    use names::*;
    use ValueKind::*;
    let d = ChannelDescriptor::builtin;
    ChannelRegistry {
        channels: vec![
            d(GITHUB_PAGES, &[T2, T3], Flag),
            d(README, &[T3, T4], Flag),
            d(SECURITY_AUDIT, &[T2, E3], Text),
            d(WIKI, &[T2, T3], Flag),
            d(CHANGELOG, &[E2, E3], Text),
            d(CODE_OF_CONDUCT, &[E2, E3], Text),
            d(CONTRIBUTING_GUIDELINES, &[E2, E3, E4], Text),
            d(FORK, &[E2, E3, E4], Flag),
            d(ISSUE_TRACKER, &[E2, E4], Flag),
            d(LICENSE, &[E2, E3], Text),
            d(SECURITY_THREAT_MODEL, &[E2, E3, E4], Flag),
            d(NUM_FORKS, &[E2, E4], Count),
            d(NUM_OPEN_ISSUES, &[E2, E4], Count),
        ],
    }
}

/// Returns one message per broken invariant; empty means valid.
pub fn validate_registry(reg: &ChannelRegistry) -> Vec<String> {
    let mut violations = Vec::new();
    let allowed: BTreeSet<_> = KnowledgeCode::labeling_codes().into_iter().collect();
    let mut seen = HashSet::new();
    for ch in &reg.channels {
        if !seen.insert(ch.name.as_str()) {
            violations.push(format!("duplicate channel name {:?}", ch.name));
        }
        if ch.name.trim().is_empty() {
            violations.push("channel with empty name".to_owned());
        }
        if ch.codes.is_empty() {
            violations.push(format!("{:?} has no knowledge codes", ch.name));
            continue;
        }
        for code in ch.codes.difference(&allowed) {
            violations.push(format!("{:?} uses code {code} outside the labeling set", ch.name));
        }
        if let Ok(expected) = derive_dimension(&ch.codes) {
            if expected != ch.dimension {
                violations.push(format!(
                    "{:?} is marked {} but its codes {{{}}} imply {}",
                    ch.name,
                    ch.dimension,
                    ch.codes_string(),
                    expected
                ));
            }
        }
    }
    let ext = reg.count_dimension(SeciDimension::Externalization);
    let comb = reg.count_dimension(SeciDimension::Combination);
    if reg.channels.len() != REGISTRY_SIZE {
        violations.push(format!(
            "registry has {} channels, expected {REGISTRY_SIZE}",
            reg.channels.len()
        ));
    }
    if ext != EXTERNALIZATION_COUNT || comb != COMBINATION_COUNT {
        violations.push(format!(
            "registry has {ext} Externalization / {comb} Combination channels, expected \
             {EXTERNALIZATION_COUNT} / {COMBINATION_COUNT}"
        ));
    }
    violations
}

#[derive(Debug, Serialize, Deserialize)]
struct RegistryRow {
    name: String,
    codes: String,
    dimension: String,
    value_kind: String,
    #[serde(default)]
    rationale: String,
}

impl ChannelRegistry {
    /// Builds a registry without validating it; see [`validate_registry`].
    pub fn from_descriptors(channels: Vec<ChannelDescriptor>) -> Self {
        ChannelRegistry { channels }
    }

    pub fn channels(&self) -> &[ChannelDescriptor] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<&ChannelDescriptor> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.channels.iter().map(|c| c.name.clone()).collect()
    }

    pub fn count_dimension(&self, dim: SeciDimension) -> usize {
        self.channels.iter().filter(|c| c.dimension == dim).count()
    }

    /// Resolves `names` to descriptors, returned in registry order.
    pub fn subset(&self, names: &[String]) -> Result<Vec<&ChannelDescriptor>> {
        for n in names {
            if self.lookup(n).is_none() {
                return Err(Error::arg(format!("unknown channel {n:?}")));
            }
        }
        Ok(self
            .channels
            .iter()
            .filter(|c| names.iter().any(|n| n == &c.name))
            .collect())
    }

    /// Reads a registry file (`name,codes,dimension,value_kind,rationale`,
    /// codes separated by spaces) and rejects it unless it validates.
    pub fn load(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut channels = Vec::new();
        for row in rdr.deserialize::<RegistryRow>() {
            let row = row.map_err(|e| Error::csv(path, e))?;
            let codes = row
                .codes
                .split(|c: char| c.is_whitespace() || c == ',' || c == ';')
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<Result<BTreeSet<KnowledgeCode>>>()?;
            channels.push(ChannelDescriptor {
                name: row.name.trim().to_owned(),
                codes,
                dimension: row.dimension.parse()?,
                value_kind: row.value_kind.parse()?,
                rationale: row.rationale,
            });
        }
        let reg = ChannelRegistry { channels };
        let violations = validate_registry(&reg);
        if violations.is_empty() {
            Ok(reg)
        } else {
            Err(Error::Registry(violations))
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        for ch in &self.channels {
            wtr.serialize(RegistryRow {
                name: ch.name.clone(),
                codes: ch.codes_string(),
                dimension: ch.dimension.to_string(),
                value_kind: ch.value_kind.to_string(),
                rationale: ch.rationale.clone(),
            })
            .expect("in-memory CSV write");
        }
        String::from_utf8(wtr.into_inner().expect("in-memory CSV flush")).expect("UTF-8 input")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}
