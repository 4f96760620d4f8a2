//! Raw channel values to a `[0, 1]` project × channel matrix.
//!
//! Count channels are divided by the maximum of the same channel within the
//! project's ecosystem; flag and text channels become presence indicators.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Ecosystem, ProjectTable, RawValue};
use crate::knowledge::{ChannelRegistry, ValueKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    row_index: Vec<String>,
    col_index: Vec<String>,
    ecosystem_of_row: Vec<Ecosystem>,
    stars: Vec<u64>,
    /// channel → ecosystem → maximum raw count, for Count channels
    maxima: BTreeMap<String, BTreeMap<Ecosystem, u64>>,
    /// filters applied to the table the maxima were computed from
    basis: Vec<String>,
}

impl FeatureMatrix {
    /// Builds a matrix from already-normalized rows. Used by tests and by
    /// callers that bring their own features.
    pub fn from_rows(
        rows: Vec<Vec<f64>>,
        row_index: Vec<String>,
        col_index: Vec<String>,
        ecosystem_of_row: Vec<Ecosystem>,
        stars: Vec<u64>,
    ) -> Result<Self> {
        let n = rows.len();
        if row_index.len() != n || ecosystem_of_row.len() != n || stars.len() != n {
            return Err(Error::arg("row metadata length does not match row count"));
        }
        let d = col_index.len();
        let mut values = Vec::with_capacity(n * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::arg(format!("row {i} has {} columns, expected {d}", r.len())));
            }
            if let Some(v) = r.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::arg(format!("row {i} has entry {v} outside [0, 1]")));
            }
            values.extend_from_slice(r);
        }
        Ok(FeatureMatrix {
            values,
            row_index,
            col_index,
            ecosystem_of_row,
            stars,
            maxima: BTreeMap::new(),
            basis: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.row_index.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_index.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_cols();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_index(&self) -> &[String] {
        &self.row_index
    }

    pub fn col_index(&self) -> &[String] {
        &self.col_index
    }

    pub fn column_of(&self, channel: &str) -> Option<usize> {
        self.col_index.iter().position(|c| c == channel)
    }

    pub fn ecosystem_of_row(&self) -> &[Ecosystem] {
        &self.ecosystem_of_row
    }

    pub fn stars(&self) -> &[u64] {
        &self.stars
    }

    pub fn maxima(&self) -> &BTreeMap<String, BTreeMap<Ecosystem, u64>> {
        &self.maxima
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    /// Writes `id,ecosystem,<channels...>` with six decimals per value.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_owned(), "ecosystem".to_owned()];
        header.extend(self.col_index.iter().cloned());
        wtr.write_record(&header)?;
        for (i, row) in self.rows().enumerate() {
            let mut rec = vec![self.row_index[i].clone(), self.ecosystem_of_row[i].to_string()];
            rec.extend(row.iter().map(|v| format!("{v:.6}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush()
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

/// Per-ecosystem maximum of a Count channel. Ecosystems where the channel is
/// never present map to 0.
pub fn max_per_feature(
    table: &ProjectTable,
    registry: &ChannelRegistry,
    channel: &str,
) -> Result<BTreeMap<Ecosystem, u64>> {
    let desc = registry
        .lookup(channel)
        .ok_or_else(|| Error::arg(format!("unknown channel {channel:?}")))?;
    if desc.value_kind != ValueKind::Count {
        return Err(Error::arg(format!(
            "{channel:?} is a {} channel; maxima are defined for Count channels",
            desc.value_kind
        )));
    }
    let mut maxima = BTreeMap::new();
    for r in table.records() {
        let m = maxima.entry(r.ecosystem.clone()).or_insert(0u64);
        if let RawValue::Count(v) = r.value(channel) {
            *m = (*m).max(*v);
        }
    }
    Ok(maxima)
}

fn presence(v: &RawValue) -> f64 {
    let present = match v {
        RawValue::Flag(b) => *b,
        RawValue::Text(s) => !s.is_empty(),
        RawValue::Count(c) => *c > 0,
        RawValue::Absent => false,
    };
    if present {
        1.0
    } else {
        0.0
    }
}

pub fn normalize_features(
    table: &ProjectTable,
    registry: &ChannelRegistry,
    channels: &[String],
) -> Result<FeatureMatrix> {
    let columns = registry.subset(channels)?;
    let mut maxima = BTreeMap::new();
    for desc in &columns {
        if desc.value_kind == ValueKind::Count {
            maxima.insert(desc.name.clone(), max_per_feature(table, registry, &desc.name)?);
        }
    }

    let n = table.len();
    let d = columns.len();
    let mut values = Vec::with_capacity(n * d);
    for r in table.records() {
        for desc in &columns {
            let raw = r.value(&desc.name);
            let v = match desc.value_kind {
                ValueKind::Count => match raw {
                    RawValue::Count(c) => {
                        let max = maxima[&desc.name][&r.ecosystem];
                        if max == 0 {
                            0.0
                        } else {
                            *c as f64 / max as f64
                        }
                    }
                    _ => 0.0,
                },
                ValueKind::Flag | ValueKind::Text => presence(raw),
            };
            values.push(v);
        }
    }

    Ok(FeatureMatrix {
        values,
        row_index: table.records().iter().map(|r| r.id.clone()).collect(),
        col_index: columns.iter().map(|c| c.name.clone()).collect(),
        ecosystem_of_row: table.records().iter().map(|r| r.ecosystem.clone()).collect(),
        stars: table.records().iter().map(|r| r.stars).collect(),
        maxima,
        basis: table.provenance().filters.clone(),
    })
}
