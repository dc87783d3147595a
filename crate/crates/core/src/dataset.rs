//! Tabular datasets: CSV ingestion, z-score normalization, bootstrap bags and
//! stratified k-fold splits.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DataError, Error, Result};

/// Dense feature matrix (row-major) with integer class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    num_classes: usize,
    feature_names: Option<Vec<String>>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from a row-major feature buffer.
    ///
    /// Labels must lie in `0..num_classes` and every feature must be finite.
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self, DataError> {
        if n_features == 0 {
            return Err(DataError::Invalid("dataset needs at least one feature".into()));
        }
        if features.len() != labels.len() * n_features {
            return Err(DataError::DimensionMismatch {
                expected: labels.len() * n_features,
                found: features.len(),
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                row: pos / n_features,
                column: pos % n_features,
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(DataError::Invalid(format!("label {bad} outside 0..{num_classes}")));
        }
        let class_names = (0..num_classes).map(|c| c.to_string()).collect();
        Ok(Dataset {
            features,
            n_features,
            labels,
            num_classes,
            feature_names: None,
            class_names,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>, num_classes: usize) -> Result<Self, DataError> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.len() != labels.len() {
            return Err(DataError::DimensionMismatch {
                expected: labels.len(),
                found: rows.len(),
            });
        }
        let mut features = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(DataError::Ragged {
                    row: i,
                    expected: d,
                    found: r.len(),
                });
            }
            features.extend_from_slice(r);
        }
        Dataset::new(features, d, labels, num_classes)
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self, DataError> {
        if names.len() != self.num_classes {
            return Err(DataError::DimensionMismatch {
                expected: self.num_classes,
                found: names.len(),
            });
        }
        self.class_names = names;
        Ok(self)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self, DataError> {
        if names.len() != self.n_features {
            return Err(DataError::DimensionMismatch {
                expected: self.n_features,
                found: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Original label strings, indexed by class id.
    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Per-class member counts over the whole dataset.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Copies the given rows (in order, duplicates allowed) into a new dataset
    /// with the same class alphabet.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        for &i in rows {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            n_features: self.n_features,
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
        }
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        Ok(if s.is_empty() || s.eq_ignore_ascii_case("last") {
            LabelColumn::Last
        } else if let Ok(i) = s.parse::<usize>() {
            LabelColumn::Index(i)
        } else {
            LabelColumn::Name(s.to_string())
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Last => f.write_str("last"),
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(n) => f.write_str(n),
        }
    }
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok()
}

/// Loads a comma-separated file.
///
/// A header row is assumed when any of its feature cells fails to parse as a
/// number; selecting the label column by name requires one. Labels are
/// re-encoded to `0..C` in order of first appearance and the original strings
/// are kept as class names.
pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, label).map_err(|e| match e {
        DataError::Empty { .. } => DataError::Empty {
            path: path.display().to_string(),
        }
        .into(),
        other => other.into(),
    })
}

/// Parses CSV text; see [`load_csv`].
pub fn parse_csv(text: &str, label: &LabelColumn) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| DataError::Csv(e.to_string()))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        records.push(rec);
    }
    let first = records.first().ok_or(DataError::Empty { path: String::new() })?;
    let width = first.len();
    if width < 2 {
        return Err(DataError::Invalid(
            "need at least one feature column and a label column".into(),
        ));
    }

    let (label_idx, has_header) = match label {
        LabelColumn::Name(name) => {
            let idx = first
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| DataError::MissingLabelColumn(name.clone()))?;
            (idx, true)
        }
        LabelColumn::Last | LabelColumn::Index(_) => {
            let idx = match label {
                LabelColumn::Index(i) => *i,
                _ => width - 1,
            };
            if idx >= width {
                return Err(DataError::MissingLabelColumn(idx.to_string()));
            }
            let header = first
                .iter()
                .enumerate()
                .any(|(j, c)| j != idx && parse_number(c).is_none());
            (idx, header)
        }
    };

    let feature_names = has_header.then(|| {
        first
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != label_idx)
            .map(|(_, c)| c.to_string())
            .collect::<Vec<_>>()
    });
    let body = if has_header { &records[1..] } else { &records[..] };
    if body.is_empty() {
        return Err(DataError::Empty { path: String::new() });
    }

    let d = width - 1;
    let mut features = Vec::with_capacity(body.len() * d);
    let mut labels = Vec::with_capacity(body.len());
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();
    let row_offset = usize::from(has_header) + 1;
    for (i, rec) in body.iter().enumerate() {
        if rec.len() != width {
            return Err(DataError::Ragged {
                row: i + row_offset,
                expected: width,
                found: rec.len(),
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            if j == label_idx {
                let next = class_names.len();
                let id = *class_ids.entry(cell.to_string()).or_insert_with(|| {
                    class_names.push(cell.to_string());
                    next
                });
                labels.push(id);
            } else {
                let v = parse_number(cell).ok_or_else(|| DataError::Parse {
                    row: i + row_offset,
                    column: j + 1,
                    value: cell.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(DataError::NonFinite {
                        row: i + row_offset,
                        column: j + 1,
                    });
                }
                features.push(v);
            }
        }
    }
    if class_names.len() < 2 {
        return Err(DataError::SingleClass);
    }
    let num_classes = class_names.len();
    let mut data = Dataset::new(features, d, labels, num_classes)?.with_class_names(class_names)?;
    if let Some(names) = feature_names {
        data = data.with_feature_names(names)?;
    }
    Ok(data)
}

/// Rows to classify, with the label strings when the file carries them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<String>>,
}

/// Parses CSV text holding `n_features` feature columns and optionally one
/// extra label column (located by `label`).
pub fn parse_features(text: &str, n_features: usize, label: &LabelColumn) -> Result<FeatureTable, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| DataError::Csv(e.to_string()))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        records.push(rec);
    }
    let first = records.first().ok_or(DataError::Empty { path: String::new() })?;
    let width = first.len();
    let label_idx = if width == n_features {
        None
    } else if width == n_features + 1 {
        Some(match label {
            LabelColumn::Last => n_features,
            LabelColumn::Index(i) if *i < width => *i,
            LabelColumn::Index(i) => return Err(DataError::MissingLabelColumn(i.to_string())),
            LabelColumn::Name(name) => first
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| DataError::MissingLabelColumn(name.clone()))?,
        })
    } else {
        return Err(DataError::DimensionMismatch {
            expected: n_features,
            found: width,
        });
    };
    let has_header = first
        .iter()
        .enumerate()
        .any(|(j, c)| Some(j) != label_idx && parse_number(c).is_none());
    let body = if has_header { &records[1..] } else { &records[..] };
    let row_offset = usize::from(has_header) + 1;
    let mut rows = Vec::with_capacity(body.len());
    let mut labels = label_idx.map(|_| Vec::with_capacity(body.len()));
    for (i, rec) in body.iter().enumerate() {
        if rec.len() != width {
            return Err(DataError::Ragged {
                row: i + row_offset,
                expected: width,
                found: rec.len(),
            });
        }
        let mut row = Vec::with_capacity(n_features);
        for (j, cell) in rec.iter().enumerate() {
            if Some(j) == label_idx {
                if let Some(l) = labels.as_mut() {
                    l.push(cell.to_string());
                }
                continue;
            }
            match parse_number(cell) {
                Some(v) if v.is_finite() => row.push(v),
                Some(_) => {
                    return Err(DataError::NonFinite {
                        row: i + row_offset,
                        column: j + 1,
                    })
                }
                None => {
                    return Err(DataError::Parse {
                        row: i + row_offset,
                        column: j + 1,
                        value: cell.to_string(),
                    })
                }
            }
        }
        rows.push(row);
    }
    Ok(FeatureTable { rows, labels })
}

pub fn load_features(path: impl AsRef<Path>, n_features: usize, label: &LabelColumn) -> Result<FeatureTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_features(&text, n_features, label)?)
}

/// How feature spread is measured when normalizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// Divide by the population standard deviation.
    #[default]
    StdDev,
    /// Divide by the population variance.
    Variance,
}

const MIN_SCALE: f64 = 1e-12;

/// Per-feature centering and scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl NormalizationParams {
    pub fn fit(data: &Dataset) -> Result<Self, DataError> {
        Self::fit_with(data, ScaleMode::StdDev)
    }

    /// Column means and population spread; spreads below 1e-12 become 1.
    pub fn fit_with(data: &Dataset, mode: ScaleMode) -> Result<Self, DataError> {
        let n = data.n_rows();
        if n < 2 {
            return Err(DataError::Invalid("normalization needs at least two rows".into()));
        }
        let d = data.n_features();
        let mut means = vec![0.0; d];
        for i in 0..n {
            for (m, v) in means.iter_mut().zip(data.row(i)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; d];
        for i in 0..n {
            for ((s, v), m) in var.iter_mut().zip(data.row(i)).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let scales = var
            .into_iter()
            .map(|s| {
                let var = s / n as f64;
                let scale = match mode {
                    ScaleMode::StdDev => var.sqrt(),
                    ScaleMode::Variance => var,
                };
                if scale < MIN_SCALE {
                    1.0
                } else {
                    scale
                }
            })
            .collect();
        Ok(NormalizationParams { means, scales })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Normalizes a single raw feature vector.
    pub fn transform_row(&self, x: &[f64]) -> Result<Vec<f64>, DataError> {
        self.check_dim(x.len())?;
        Ok(x.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset, DataError> {
        self.check_dim(data.n_features())?;
        let mut out = data.clone();
        let d = data.n_features();
        for (j, v) in out.features.iter_mut().enumerate() {
            let c = j % d;
            *v = (*v - self.means[c]) / self.scales[c];
        }
        Ok(out)
    }

    pub fn invert(&self, data: &Dataset) -> Result<Dataset, DataError> {
        self.check_dim(data.n_features())?;
        let mut out = data.clone();
        let d = data.n_features();
        for (j, v) in out.features.iter_mut().enumerate() {
            let c = j % d;
            *v = *v * self.scales[c] + self.means[c];
        }
        Ok(out)
    }

    fn check_dim(&self, found: usize) -> Result<(), DataError> {
        if found != self.dim() {
            return Err(DataError::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

/// Bootstrap resample of `n` rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BagSample {
    pub indices: Vec<usize>,
    pub oob_indices: Vec<usize>,
}

impl BagSample {
    /// Draws `n` row indices uniformly with replacement.
    pub fn draw<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut drawn = vec![false; n];
        for &i in &indices {
            drawn[i] = true;
        }
        let oob_indices = (0..n).filter(|&i| !drawn[i]).collect();
        BagSample { indices, oob_indices }
    }
}

/// One cross-validation split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified k-fold assignment.
///
/// Members of each class are shuffled and dealt to folds round-robin; the
/// deal continues where the previous class stopped so fold sizes stay within
/// one of each other.
pub fn kfold_splits<R: Rng + ?Sized>(
    labels: &[usize],
    num_classes: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Fold>, DataError> {
    if k < 2 {
        return Err(DataError::Invalid(format!("k-fold needs k >= 2, got {k}")));
    }
    let mut members = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= num_classes {
            return Err(DataError::Invalid(format!("label {l} outside 0..{num_classes}")));
        }
        members[l].push(i);
    }
    for (class, m) in members.iter().enumerate() {
        if m.len() < k {
            return Err(DataError::Stratification {
                class,
                count: m.len(),
                folds: k,
            });
        }
    }
    let mut assignment = vec![0usize; labels.len()];
    let mut next = 0;
    for m in members.iter_mut() {
        m.shuffle(rng);
        for &i in m.iter() {
            assignment[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect())
}
