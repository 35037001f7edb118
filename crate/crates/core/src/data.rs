//! CSV datasets, column metadata and encoding into model features.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path as FsPath;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{FeatureKind, FeatureMeta};
use crate::scale::{FeatureScale, Scaler};

/// Marker for a missing value; rows containing it are dropped.
pub const MISSING: &str = "?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    Onehot,
    Ordinal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<Encoding>,
    /// Ordinal categories are listed from lowest to highest code.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl ColumnMeta {
    pub fn numeric(name: impl Into<String>) -> Self {
        ColumnMeta {
            name: name.into(),
            kind: ColumnKind::Numeric,
            encoding: None,
            categories: Vec::new(),
        }
    }

    fn width(&self) -> usize {
        match (self.kind, self.encoding) {
            (ColumnKind::Categorical, Some(Encoding::Onehot)) => self.categories.len(),
            _ => 1,
        }
    }
}

/// Describes a CSV table: which column is the label and how each feature is encoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub label: String,
    /// Display names of class 0 and class 1.
    pub class_names: [String; 2],
    pub features: Vec<ColumnMeta>,
}

impl DatasetMeta {
    pub fn from_json(text: &str) -> Result<Self> {
        let meta: DatasetMeta =
            serde_json::from_str(text).map_err(|e| Error::data(None, format!("meta: {e}")))?;
        meta.validate()?;
        Ok(meta)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_json(&text)
    }

    /// All columns numeric, label last.
    pub fn all_numeric(headers: &[String]) -> Result<Self> {
        let (label, features) = headers
            .split_last()
            .ok_or_else(|| Error::data(Some(1), "no columns"))?;
        let meta = DatasetMeta {
            label: label.clone(),
            class_names: ["0".into(), "1".into()],
            features: features.iter().map(ColumnMeta::numeric).collect(),
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::data(None, "meta lists no features"));
        }
        let mut seen = HashSet::new();
        for c in &self.features {
            if !seen.insert(c.name.as_str()) || c.name == self.label {
                return Err(Error::data(None, format!("duplicate column {}", c.name)));
            }
            if c.kind == ColumnKind::Categorical {
                if c.encoding.is_none() {
                    return Err(Error::data(None, format!("{}: categorical column needs an encoding", c.name)));
                }
                let distinct: HashSet<&String> = c.categories.iter().collect();
                if c.categories.len() < 2 || distinct.len() != c.categories.len() {
                    return Err(Error::data(
                        None,
                        format!("{}: needs at least two distinct categories", c.name),
                    ));
                }
            }
        }
        if self.class_names[0] == self.class_names[1] {
            return Err(Error::data(None, "class names must differ"));
        }
        Ok(())
    }

    /// Number of model features after encoding.
    pub fn encoded_width(&self) -> usize {
        self.features.iter().map(ColumnMeta::width).sum()
    }

    /// Model features in encoded order, with bounds of the scaled space.
    pub fn model_features(&self) -> Vec<FeatureMeta> {
        let mut out = Vec::with_capacity(self.encoded_width());
        for c in &self.features {
            match (c.kind, c.encoding) {
                (ColumnKind::Categorical, Some(Encoding::Onehot)) => {
                    out.extend(c.categories.iter().map(|cat| FeatureMeta::onehot(&c.name, cat)));
                }
                (ColumnKind::Categorical, _) => out.push(FeatureMeta {
                    name: c.name.clone(),
                    kind: FeatureKind::Ordinal {
                        categories: c.categories.clone(),
                    },
                    global_min: -1.0,
                    global_max: 1.0,
                }),
                (ColumnKind::Numeric, _) => out.push(FeatureMeta::numeric(&c.name, -1.0, 1.0)),
            }
        }
        out
    }

    pub fn parse_label(&self, raw: &str, line: Option<usize>) -> Result<u8> {
        let raw = raw.trim();
        for candidate in [raw, raw.trim_end_matches('.')] {
            if let Some(i) = self.class_names.iter().position(|c| c == candidate) {
                return Ok(i as u8);
            }
            match candidate {
                "0" => return Ok(0),
                "1" => return Ok(1),
                _ => {}
            }
        }
        Err(Error::data(
            line,
            format!(
                "label {raw:?} is neither 0/1 nor one of {:?}",
                self.class_names
            ),
        ))
    }

    /// Encodes one row given a lookup from column name to raw text.
    pub fn encode<'a>(
        &self,
        lookup: impl Fn(&str) -> Option<&'a str>,
        line: Option<usize>,
    ) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.encoded_width());
        for c in &self.features {
            let raw = lookup(&c.name)
                .ok_or_else(|| Error::data(line, format!("missing value for {}", c.name)))?
                .trim();
            match c.kind {
                ColumnKind::Numeric => {
                    let v: f64 = raw
                        .parse()
                        .map_err(|_| Error::data(line, format!("{}: {raw:?} is not a number", c.name)))?;
                    if !v.is_finite() {
                        return Err(Error::data(line, format!("{}: non-finite value", c.name)));
                    }
                    out.push(v);
                }
                ColumnKind::Categorical => {
                    let code = c.categories.iter().position(|k| k == raw).ok_or_else(|| {
                        Error::data(
                            line,
                            format!("{}: unknown category {raw:?}, expected one of {:?}", c.name, c.categories),
                        )
                    })?;
                    if c.encoding == Some(Encoding::Onehot) {
                        out.extend((0..c.categories.len()).map(|i| if i == code { 1.0 } else { 0.0 }));
                    } else {
                        out.push(code as f64);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Encodes `name=value` pairs; every feature must be given exactly once.
    pub fn encode_pairs(&self, pairs: &[(String, String)]) -> Result<Vec<f64>> {
        let mut map = HashMap::new();
        for (k, v) in pairs {
            if !self.features.iter().any(|c| &c.name == k) {
                return Err(Error::data(None, format!("unknown feature {k}")));
            }
            if map.insert(k.as_str(), v.as_str()).is_some() {
                return Err(Error::data(None, format!("feature {k} given twice")));
            }
        }
        self.encode(|name| map.get(name).copied(), None)
    }

    /// Encodes one CSV row listing the features in meta order, optionally followed by the label.
    pub fn encode_csv_row(&self, row: &str) -> Result<Vec<f64>> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(row.as_bytes());
        let record = reader
            .records()
            .next()
            .ok_or_else(|| Error::data(None, "empty instance row"))?
            .map_err(|e| Error::data(None, e.to_string()))?;
        let n = self.features.len();
        if record.len() != n && record.len() != n + 1 {
            return Err(Error::data(
                None,
                format!("instance row has {} fields, expected {n}", record.len()),
            ));
        }
        self.encode(|name| self.features.iter().position(|c| c.name == name).and_then(|i| record.get(i)), None)
    }

    /// Scaling fitted on encoded rows: numeric columns span their observed
    /// range, ordinal columns their code range, one-hot members stay 0/1.
    pub fn fit_scaler(&self, rows: &[Vec<f64>]) -> Result<Scaler> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut scales = Vec::with_capacity(self.encoded_width());
        let mut col = 0;
        for c in &self.features {
            match (c.kind, c.encoding) {
                (ColumnKind::Categorical, Some(Encoding::Onehot)) => {
                    scales.extend(std::iter::repeat_n(FeatureScale::Identity, c.categories.len()));
                }
                (ColumnKind::Categorical, _) => {
                    scales.push(FeatureScale::min_max(0.0, (c.categories.len() - 1) as f64)?);
                }
                (ColumnKind::Numeric, _) => {
                    let (lo, hi) = rows
                        .iter()
                        .map(|r| r[col])
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                    if lo >= hi {
                        return Err(Error::data(None, format!("column {} is constant ({lo})", c.name)));
                    }
                    scales.push(FeatureScale::MinMax { min: lo, max: hi });
                }
            }
            col += c.width();
        }
        Ok(Scaler { scales })
    }
}

/// Encoded (unscaled) rows with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    /// Rows skipped because they contained a missing value.
    pub dropped_missing: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn scaled(&self, scaler: &Scaler) -> Result<Vec<Vec<f64>>> {
        self.rows.iter().map(|r| scaler.transform(r)).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            headers: self.headers.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            dropped_missing: 0,
        }
    }

    /// Seeded shuffle split into `(train, holdout)`; the holdout gets
    /// `round(len * fraction)` rows, at least one and never all.
    pub fn split(&self, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "holdout fraction must be in (0, 1), got {fraction}"
            )));
        }
        if self.len() < 2 {
            return Err(Error::data(None, "need at least two rows to hold some out"));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_hold = ((self.len() as f64 * fraction).round() as usize).clamp(1, self.len() - 1);
        let (hold, train) = order.split_at(n_hold);
        let mut train = train.to_vec();
        let mut hold = hold.to_vec();
        train.sort_unstable();
        hold.sort_unstable();
        Ok((self.subset(&train), self.subset(&hold)))
    }
}

/// Reads only the header row.
pub fn read_headers(path: impl AsRef<FsPath>) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(File::open(path.as_ref())?);
    let headers = reader
        .headers()
        .map_err(|e| Error::data(Some(1), e.to_string()))?;
    if headers.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(headers.iter().map(str::to_string).collect())
}

pub fn load_csv(path: impl AsRef<FsPath>, meta: &DatasetMeta) -> Result<Dataset> {
    let mut text = String::new();
    File::open(path.as_ref())?.read_to_string(&mut text)?;
    parse_csv(&text, meta)
}

/// Parses a headed CSV. Every column must be a meta feature or the label.
pub fn parse_csv(text: &str, meta: &DatasetMeta) -> Result<Dataset> {
    if text.trim().is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::data(Some(1), e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();

    let mut index = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        if h != &meta.label && !meta.features.iter().any(|c| &c.name == h) {
            return Err(Error::data(Some(1), format!("unexpected column {h}")));
        }
        if index.insert(h.as_str(), i).is_some() {
            return Err(Error::data(Some(1), format!("duplicate column {h}")));
        }
    }
    for name in meta.features.iter().map(|c| &c.name).chain([&meta.label]) {
        if !index.contains_key(name.as_str()) {
            return Err(Error::data(Some(1), format!("missing column {name}")));
        }
    }
    let label_col = index[meta.label.as_str()];

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut dropped_missing = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            Error::data(e.position().map(|p| p.line() as usize), e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != headers.len() {
            return Err(Error::data(
                line,
                format!("{} fields, expected {}", record.len(), headers.len()),
            ));
        }
        if record.iter().any(|v| v == MISSING) {
            dropped_missing += 1;
            continue;
        }
        labels.push(meta.parse_label(&record[label_col], line)?);
        rows.push(meta.encode(|name| index.get(name).and_then(|&i| record.get(i)), line)?);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Dataset {
        headers,
        rows,
        labels,
        dropped_missing,
    })
}
