//! Loading, filtering and slicing of tabular project exports.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knowledge::{names, ChannelRegistry, ValueKind};

/// Default cap on projects per topology.
pub const DEFAULT_TOP_N: usize = 10_000;

/// Package-manager ecosystem a project belongs to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ecosystem {
    Go,
    Npm,
    Packagist,
    RubyGems,
    PyPI,
    Bower,
    Maven,
    Other(String),
}

impl Ecosystem {
    pub const KNOWN: [Ecosystem; 7] = [
        Ecosystem::Go,
        Ecosystem::Npm,
        Ecosystem::Packagist,
        Ecosystem::RubyGems,
        Ecosystem::PyPI,
        Ecosystem::Bower,
        Ecosystem::Maven,
    ];

    pub fn as_str(&self) -> &str {
        match self {
            Ecosystem::Go => "Go",
            Ecosystem::Npm => "npm",
            Ecosystem::Packagist => "Packagist",
            Ecosystem::RubyGems => "RubyGems",
            Ecosystem::PyPI => "PyPI",
            Ecosystem::Bower => "Bower",
            Ecosystem::Maven => "Maven",
            Ecosystem::Other(s) => s,
        }
    }
}

impl fmt::Display for Ecosystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ecosystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() {
            return Err(Error::Parse("empty ecosystem".into()));
        }
        Ok(match t.to_ascii_lowercase().as_str() {
            "go" => Ecosystem::Go,
            "npm" => Ecosystem::Npm,
            "packagist" => Ecosystem::Packagist,
            "rubygems" => Ecosystem::RubyGems,
            "pypi" => Ecosystem::PyPI,
            "bower" => Ecosystem::Bower,
            "maven" => Ecosystem::Maven,
            _ => Ecosystem::Other(t.to_owned()),
        })
    }
}

impl Serialize for Ecosystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Ecosystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A channel cell as it appeared in the export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RawValue {
    Count(u64),
    Flag(bool),
    Text(String),
    Absent,
}

impl RawValue {
    /// Parses a cell according to the channel's declared kind. Empty cells
    /// and unparseable counts are `Absent`; a flag column holding free text
    /// (e.g. a file name) keeps the text.
    pub fn parse(cell: &str, kind: ValueKind) -> RawValue {
        let t = cell.trim();
        if t.is_empty() {
            return RawValue::Absent;
        }
        match kind {
            ValueKind::Count => t.parse().map(RawValue::Count).unwrap_or(RawValue::Absent),
            ValueKind::Flag => match parse_bool(t) {
                Some(b) => RawValue::Flag(b),
                None => RawValue::Text(t.to_owned()),
            },
            ValueKind::Text => RawValue::Text(t.to_owned()),
        }
    }

    pub fn to_cell(&self) -> String {
        match self {
            RawValue::Count(n) => n.to_string(),
            RawValue::Flag(b) => b.to_string(),
            RawValue::Text(s) => s.clone(),
            RawValue::Absent => String::new(),
        }
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "t" | "yes" | "y" | "1" => Some(true),
        "false" | "f" | "no" | "n" | "0" => Some(false),
        _ => None,
    }
}

/// Accepts an ISO-8601 date or datetime. Exports that write datetimes with
/// a space separator and a trailing `UTC` are accepted too.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let t = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(t, "%Y-%m-%d") {
        return Some(d);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(t) {
        return Some(dt.date_naive());
    }
    let t = t
        .strip_suffix(" UTC")
        .or_else(|| t.strip_suffix('Z'))
        .unwrap_or(t);
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(t, fmt) {
            return Some(dt.date());
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub id: String,
    pub ecosystem: Ecosystem,
    pub name: String,
    pub created: NaiveDate,
    pub stars: u64,
    pub channel_values: BTreeMap<String, RawValue>,
}

impl ProjectRecord {
    pub fn year(&self) -> i32 {
        self.created.year()
    }

    pub fn value(&self, channel: &str) -> &RawValue {
        self.channel_values.get(channel).unwrap_or(&RawValue::Absent)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<PathBuf>,
    pub filters: Vec<String>,
}

/// Projects ordered by stars descending, then id ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectTable {
    records: Vec<ProjectRecord>,
    provenance: Provenance,
}

fn sort_records(records: &mut [ProjectRecord]) {
    records.sort_by(|a, b| b.stars.cmp(&a.stars).then_with(|| a.id.cmp(&b.id)));
}

impl ProjectTable {
    /// Fails if two records share an id.
    pub fn new(mut records: Vec<ProjectRecord>, provenance: Provenance) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::arg(format!("duplicate project id {:?}", r.id)));
            }
        }
        sort_records(&mut records);
        Ok(ProjectTable {
            records,
            provenance,
        })
    }

    fn derived(&self, records: Vec<ProjectRecord>, filter: String) -> Self {
        let mut provenance = self.provenance.clone();
        provenance.filters.push(filter);
        ProjectTable {
            records,
            provenance,
        }
    }

    pub fn records(&self) -> &[ProjectRecord] {
        &self.records
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn years(&self) -> BTreeSet<i32> {
        self.records.iter().map(ProjectRecord::year).collect()
    }

    pub fn ecosystems(&self) -> BTreeSet<Ecosystem> {
        self.records.iter().map(|r| r.ecosystem.clone()).collect()
    }

    pub fn filter_ecosystem(&self, eco: &Ecosystem) -> ProjectTable {
        let records = self
            .records
            .iter()
            .filter(|r| &r.ecosystem == eco)
            .cloned()
            .collect();
        self.derived(records, format!("ecosystem={eco}"))
    }

    /// Concatenates tables; ids must stay unique.
    pub fn merge(tables: Vec<ProjectTable>) -> Result<ProjectTable> {
        let mut filters = Vec::new();
        let mut sources = Vec::new();
        let mut records = Vec::new();
        for t in tables {
            if let Some(s) = &t.provenance.source {
                sources.push(s.display().to_string());
            }
            filters.extend(t.provenance.filters);
            records.extend(t.records);
        }
        if sources.len() > 1 {
            filters.insert(0, format!("merged={}", sources.join("+")));
        }
        let source = (sources.len() == 1).then(|| PathBuf::from(&sources[0]));
        ProjectTable::new(records, Provenance { source, filters })
    }
}

pub fn top_n_by_stars(table: &ProjectTable, n: usize) -> Result<ProjectTable> {
    if n == 0 {
        return Err(Error::arg("top-N requires n >= 1"));
    }
    let records = table.records.iter().take(n).cloned().collect();
    Ok(table.derived(records, format!("top_n_by_stars={n}")))
}

pub fn slice_by_year(table: &ProjectTable, year: i32) -> ProjectTable {
    let records = table
        .records
        .iter()
        .filter(|r| r.year() == year)
        .cloned()
        .collect();
    table.derived(records, format!("year={year}"))
}

/// Star distribution of one ecosystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarSummary {
    pub count: usize,
    pub min: u64,
    pub max: u64,
    pub median: u64,
    pub mean: f64,
}

/// Lower-middle median of an unsorted sample; `None` when empty.
pub fn lower_median(values: &[u64]) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    let mid = (v.len() - 1) / 2;
    let (_, m, _) = v.select_nth_unstable(mid);
    Some(*m)
}

pub fn summary_stats(table: &ProjectTable) -> BTreeMap<Ecosystem, StarSummary> {
    let mut groups: BTreeMap<Ecosystem, Vec<u64>> = BTreeMap::new();
    for r in &table.records {
        groups.entry(r.ecosystem.clone()).or_default().push(r.stars);
    }
    groups
        .into_iter()
        .filter(|(_, stars)| !stars.is_empty())
        .map(|(eco, stars)| {
            let sum: u128 = stars.iter().map(|&s| u128::from(s)).sum();
            let summary = StarSummary {
                count: stars.len(),
                min: *stars.iter().min().unwrap(),
                max: *stars.iter().max().unwrap(),
                median: lower_median(&stars).unwrap(),
                mean: sum as f64 / stars.len() as f64,
            };
            (eco, summary)
        })
        .collect()
}

/// Column mapping from export headers to record fields and channels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub delimiter: u8,
    pub id: String,
    pub ecosystem: String,
    pub name: String,
    pub created: String,
    pub stars: String,
    /// channel name → column header
    pub channels: Vec<(String, String)>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema::libraries_io()
    }
}

impl Schema {
    /// Mapping for the libraries.io "projects with repository fields" export.
    pub fn libraries_io() -> Self {
        let ch = |c: &str, col: &str| (c.to_owned(), col.to_owned());
        Schema {
            delimiter: b',',
            id: "ID".into(),
            ecosystem: "Platform".into(),
            name: "Name".into(),
            created: "Repository Created Timestamp".into(),
            stars: "Repository Stars Count".into(),
            channels: vec![
                ch(names::GITHUB_PAGES, "Repository Pages enabled?"),
                ch(names::README, "Repository Readme filename"),
                ch(names::SECURITY_AUDIT, "Repository Security Audit filename"),
                ch(names::WIKI, "Repository Wiki enabled?"),
                ch(names::CHANGELOG, "Repository Changelog filename"),
                ch(names::CODE_OF_CONDUCT, "Repository Code of Conduct filename"),
                ch(names::CONTRIBUTING_GUIDELINES, "Repository Contributing guidelines filename"),
                ch(names::FORK, "Repository Fork?"),
                ch(names::ISSUE_TRACKER, "Repository Issues enabled?"),
                ch(names::LICENSE, "Repository License"),
                ch(names::SECURITY_THREAT_MODEL, "Repository Security Threat Model filename"),
                ch(names::NUM_FORKS, "Repository Forks Count"),
                ch(names::NUM_OPEN_ISSUES, "Repository Open Issues Count"),
            ],
        }
    }

    /// Parses `key = value` lines. Keys: `delimiter`, `id`, `ecosystem`,
    /// `name`, `created`, `stars`, and `channel.<Channel Name>`. Lines
    /// starting with `#` are comments. Unset keys keep the libraries.io
    /// defaults; any `channel.` key replaces the default channel mapping.
    pub fn parse(text: &str) -> Result<Self> {
        let mut schema = Schema::libraries_io();
        let mut channels = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Schema(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "delimiter" => schema.delimiter = parse_delimiter(value)?,
                "id" => schema.id = value.to_owned(),
                "ecosystem" => schema.ecosystem = value.to_owned(),
                "name" => schema.name = value.to_owned(),
                "created" => schema.created = value.to_owned(),
                "stars" => schema.stars = value.to_owned(),
                k => match k.strip_prefix("channel.") {
                    Some(ch) => channels.push((ch.trim().to_owned(), value.to_owned())),
                    None => {
                        return Err(Error::Schema(format!(
                            "line {}: unknown key {k:?}",
                            lineno + 1
                        )))
                    }
                },
            }
        }
        if !channels.is_empty() {
            schema.channels = channels;
        }
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let delim = match self.delimiter {
            b'\t' => "\\t".to_owned(),
            d => (d as char).to_string(),
        };
        let mut out = format!(
            "delimiter = {delim}\nid = {}\necosystem = {}\nname = {}\ncreated = {}\nstars = {}\n",
            self.id, self.ecosystem, self.name, self.created, self.stars
        );
        for (ch, col) in &self.channels {
            out.push_str(&format!("channel.{ch} = {col}\n"));
        }
        out
    }

    fn required(&self) -> [(&'static str, &str); 5] {
        [
            ("id", &self.id),
            ("ecosystem", &self.ecosystem),
            ("name", &self.name),
            ("created", &self.created),
            ("stars", &self.stars),
        ]
    }
}

fn parse_delimiter(v: &str) -> Result<u8> {
    match v {
        "\\t" | "tab" => Ok(b'\t'),
        s if s.len() == 1 => Ok(s.as_bytes()[0]),
        _ => Err(Error::Schema(format!("delimiter must be one byte, got {v:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowReject {
    /// 1-based line number in the file, header included
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows_read: usize,
    pub rejected: Vec<RowReject>,
}

impl LoadReport {
    pub fn accepted(&self) -> usize {
        self.rows_read - self.rejected.len()
    }
}

/// Reads a delimited export into a [`ProjectTable`].
///
/// Every registry channel gets a value on every record; channels the
/// schema does not map are `Absent`. Rows with a bad id, ecosystem, date
/// or star count are skipped and listed in the [`LoadReport`].
pub fn load_projects(
    path: &Path,
    schema: &Schema,
    registry: &ChannelRegistry,
) -> Result<(ProjectTable, LoadReport)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_projects(file, Some(path), schema, registry)
}

pub fn read_projects<R: std::io::Read>(
    input: R,
    source: Option<&Path>,
    schema: &Schema,
    registry: &ChannelRegistry,
) -> Result<(ProjectTable, LoadReport)> {
    let label = source.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("<input>"));
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .flexible(true)
        .from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::csv(&label, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);

    let mut missing = Vec::new();
    let mut req = [0usize; 5];
    for (slot, (field, header)) in req.iter_mut().zip(schema.required()) {
        match col(header) {
            Some(i) => *slot = i,
            None => missing.push(format!("{field} ({header:?})")),
        }
    }
    let mut channel_cols = Vec::new();
    for (channel, header) in &schema.channels {
        let desc = registry
            .lookup(channel)
            .ok_or_else(|| Error::Schema(format!("schema maps unknown channel {channel:?}")))?;
        match col(header) {
            Some(i) => channel_cols.push((desc.name.clone(), desc.value_kind, i)),
            None => missing.push(format!("channel {channel} ({header:?})")),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Schema(format!("missing columns: {}", missing.join(", "))));
    }
    if channel_cols.is_empty() {
        return Err(Error::Schema("schema maps no channel columns".into()));
    }
    let [id_col, eco_col, name_col, created_col, stars_col] = req;

    let mut report = LoadReport::default();
    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for (i, row) in rdr.records().enumerate() {
        report.rows_read += 1;
        let line = i as u64 + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                report.rejected.push(RowReject {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let cell = |c: usize| row.get(c).unwrap_or("");
        let parsed = (|| -> std::result::Result<ProjectRecord, String> {
            let id = cell(id_col).trim();
            if id.is_empty() {
                return Err("empty id".into());
            }
            let ecosystem: Ecosystem = cell(eco_col).parse().map_err(|e: Error| e.to_string())?;
            let created = parse_date(cell(created_col))
                .ok_or_else(|| format!("unparseable date {:?}", cell(created_col)))?;
            let stars: u64 = cell(stars_col)
                .trim()
                .parse()
                .map_err(|_| format!("unparseable stars {:?}", cell(stars_col)))?;
            let mut channel_values: BTreeMap<String, RawValue> = registry
                .channels()
                .iter()
                .map(|d| (d.name.clone(), RawValue::Absent))
                .collect();
            for (channel, kind, c) in &channel_cols {
                channel_values.insert(channel.clone(), RawValue::parse(cell(*c), *kind));
            }
            Ok(ProjectRecord {
                id: id.to_owned(),
                ecosystem,
                name: cell(name_col).trim().to_owned(),
                created,
                stars,
                channel_values,
            })
        })();
        match parsed {
            Ok(rec) if !ids.insert(rec.id.clone()) => report.rejected.push(RowReject {
                line,
                reason: format!("duplicate id {:?}", rec.id),
            }),
            Ok(rec) => records.push(rec),
            Err(reason) => report.rejected.push(RowReject { line, reason }),
        }
    }
    if !report.rejected.is_empty() {
        log::warn!(
            "{}: rejected {} of {} rows",
            label.display(),
            report.rejected.len(),
            report.rows_read
        );
    }
    let provenance = Provenance {
        source: source.map(Path::to_path_buf),
        filters: Vec::new(),
    };
    let table = ProjectTable::new(records, provenance)?;
    Ok((table, report))
}

/// Writes `table` with the schema's headers so [`load_projects`] reads it back.
pub fn write_projects(table: &ProjectTable, path: &Path, schema: &Schema) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(schema.delimiter)
        .from_writer(std::io::BufWriter::new(file));
    let mut header: Vec<&str> = schema.required().iter().map(|(_, h)| *h).collect();
    header.extend(schema.channels.iter().map(|(_, col)| col.as_str()));
    wtr.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for r in &table.records {
        let mut row = vec![
            r.id.clone(),
            r.ecosystem.to_string(),
            r.name.clone(),
            r.created.format("%Y-%m-%d").to_string(),
            r.stars.to_string(),
        ];
        row.extend(schema.channels.iter().map(|(ch, _)| r.value(ch).to_cell()));
        wtr.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}
