//! CSV ingestion, binarization of mixed-type columns, stratified splitting,
//! and the binarized dataset formats (0/1 CSV and a bit-packed cache).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use fixedbitset::FixedBitSet;
use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLDS: usize = 9;
pub const LABEL_COLUMN: &str = "label";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Numeric,
    Categorical,
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub target: String,
    pub positive_label: String,
    pub columns: BTreeMap<String, ColumnType>,
}

impl Schema {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
    Boolean(Vec<bool>),
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
            Column::Boolean(v) => v.len(),
        }
    }

    fn kind(&self) -> ColumnType {
        match self {
            Column::Numeric(_) => ColumnType::Numeric,
            Column::Categorical(_) => ColumnType::Categorical,
            Column::Boolean(_) => ColumnType::Boolean,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub names: Vec<String>,
    pub columns: Vec<Column>,
    pub target: Vec<String>,
    pub positive_label: String,
}

impl RawDataset {
    pub fn new(
        names: Vec<String>,
        columns: Vec<Column>,
        target: Vec<String>,
        positive_label: impl Into<String>,
    ) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::SchemaMismatch(format!("{} names for {} columns", names.len(), columns.len())));
        }
        if let Some((name, c)) = names.iter().zip(&columns).find(|(_, c)| c.len() != target.len()) {
            return Err(Error::SchemaMismatch(format!(
                "column `{name}` has {} rows, target has {}",
                c.len(),
                target.len()
            )));
        }
        Ok(RawDataset { names, columns, target, positive_label: positive_label.into() })
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" | "y" => Some(true),
        "0" | "false" | "f" | "no" | "n" => Some(false),
        _ => None,
    }
}

fn is_missing(s: &str) -> bool {
    s.is_empty() || s == "?" || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan")
}

/// Reads a headed CSV file, typing columns per `schema`. Columns absent from
/// the schema are ignored; missing values are rejected.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<RawDataset> {
    let mut text = String::new();
    fs::File::open(path)?.read_to_string(&mut text)?;
    load_csv_str(&text, schema)
}

pub fn load_csv_str(text: &str, schema: &Schema) -> Result<RawDataset> {
    if text.trim().is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let target_idx = header
        .iter()
        .position(|h| *h == schema.target)
        .ok_or_else(|| Error::SchemaMismatch(format!("target column `{}` not found", schema.target)))?;
    for name in schema.columns.keys() {
        if !header.contains(name) {
            return Err(Error::SchemaMismatch(format!("column `{name}` not found")));
        }
    }
    let used: Vec<(usize, ColumnType)> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target_idx)
        .filter_map(|(i, h)| {
            let ty = schema.columns.get(h).copied();
            if ty.is_none() {
                warn!("column `{h}` is not in the schema; ignored");
            }
            ty.map(|t| (i, t))
        })
        .collect();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); used.len()];
    let mut target = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let get = |i: usize| -> Result<String> {
            let v = record.get(i).unwrap_or("");
            if is_missing(v) {
                Err(Error::MissingValue { column: header[i].clone(), row })
            } else {
                Ok(v.to_string())
            }
        };
        target.push(get(target_idx)?);
        for (slot, &(i, _)) in used.iter().enumerate() {
            cells[slot].push(get(i)?);
        }
    }
    if target.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut names = Vec::with_capacity(used.len());
    let mut columns = Vec::with_capacity(used.len());
    for (&(i, ty), values) in used.iter().zip(cells) {
        let name = &header[i];
        let col = match ty {
            ColumnType::Categorical => Column::Categorical(values),
            ColumnType::Numeric => Column::Numeric(
                values
                    .iter()
                    .map(|v| {
                        v.parse::<f64>().map_err(|_| Error::Parse(format!("`{v}` in column `{name}` is not numeric")))
                    })
                    .collect::<Result<_>>()?,
            ),
            ColumnType::Boolean => Column::Boolean(
                values
                    .iter()
                    .map(|v| {
                        parse_bool(v).ok_or_else(|| Error::Parse(format!("`{v}` in column `{name}` is not boolean")))
                    })
                    .collect::<Result<_>>()?,
            ),
        };
        names.push(name.clone());
        columns.push(col);
    }
    RawDataset::new(names, columns, target, schema.positive_label.clone())
}

/// Boolean dataset: one bit row per example, one label bit per example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinDataset {
    feature_names: Vec<String>,
    rows: Vec<FixedBitSet>,
    labels: FixedBitSet,
    label_for_positive: String,
}

impl BinDataset {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<FixedBitSet>,
        labels: Vec<bool>,
        label_for_positive: impl Into<String>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::SchemaMismatch(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        let n = feature_names.len();
        let rows = rows
            .into_iter()
            .map(|r| {
                if r.ones().any(|i| i >= n) {
                    return Err(Error::SchemaMismatch(format!("row sets a bit beyond {n} features")));
                }
                let mut row = FixedBitSet::with_capacity(n);
                r.ones().for_each(|i| row.insert(i));
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let mut bits = FixedBitSet::with_capacity(labels.len());
        for (i, &l) in labels.iter().enumerate() {
            bits.set(i, l);
        }
        Ok(BinDataset { feature_names, rows, labels: bits, label_for_positive: label_for_positive.into() })
    }

    /// Builds a dataset from dense boolean rows.
    pub fn from_bools(feature_names: Vec<String>, rows: &[Vec<bool>], labels: Vec<bool>) -> Result<Self> {
        let n = feature_names.len();
        let rows = rows
            .iter()
            .map(|r| {
                if r.len() != n {
                    return Err(Error::SchemaMismatch(format!("row has {} values, expected {n}", r.len())));
                }
                let mut bits = FixedBitSet::with_capacity(n);
                r.iter().enumerate().filter(|(_, &b)| b).for_each(|(i, _)| bits.insert(i));
                Ok(bits)
            })
            .collect::<Result<Vec<_>>>()?;
        BinDataset::new(feature_names, rows, labels, "1")
    }

    /// The full truth table of a function of `n` variables, features `x0..`.
    pub fn from_truth_table(n: usize, f: impl Fn(u64) -> bool) -> Self {
        let names = (0..n).map(|i| format!("x{i}")).collect();
        let rows: Vec<Vec<bool>> = (0..1u64 << n).map(|x| (0..n).map(|i| x >> i & 1 == 1).collect()).collect();
        let labels = (0..1u64 << n).map(f).collect();
        BinDataset::from_bools(names, &rows, labels).expect("rows built with n features")
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_examples(&self) -> usize {
        self.rows.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_for_positive(&self) -> &str {
        &self.label_for_positive
    }

    pub fn rows(&self) -> &[FixedBitSet] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &FixedBitSet {
        &self.rows[i]
    }

    pub fn label(&self, i: usize) -> bool {
        self.labels.contains(i)
    }

    pub fn labels(&self) -> &FixedBitSet {
        &self.labels
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.count_ones(..);
        (self.n_examples() - pos, pos)
    }

    /// Same examples with every label negated.
    pub fn with_swapped_labels(&self) -> BinDataset {
        let mut labels = self.labels.clone();
        labels.toggle_range(..);
        BinDataset { labels, ..self.clone() }
    }

    pub fn subset(&self, indices: &[usize]) -> BinDataset {
        let rows = indices.iter().map(|&i| self.rows[i].clone()).collect();
        let mut labels = FixedBitSet::with_capacity(indices.len());
        for (j, &i) in indices.iter().enumerate() {
            labels.set(j, self.label(i));
        }
        BinDataset {
            feature_names: self.feature_names.clone(),
            rows,
            labels,
            label_for_positive: self.label_for_positive.clone(),
        }
    }

    /// Percentage of examples where `predict` agrees with the label.
    pub fn accuracy(&self, predict: impl Fn(&FixedBitSet) -> bool) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let hits = (0..self.n_examples()).filter(|&i| predict(&self.rows[i]) == self.label(i)).count();
        100.0 * hits as f64 / self.n_examples() as f64
    }

    /// Writes a headed 0/1 CSV; the last column holds the labels.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = self.feature_names.clone();
        header.push(LABEL_COLUMN.to_string());
        w.write_record(&header)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut rec: Vec<&str> = (0..self.n_features()).map(|j| if row.contains(j) { "1" } else { "0" }).collect();
            rec.push(if self.label(i) { "1" } else { "0" });
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Saves the bit-packed cache and its `<path>.json` sidecar.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let n = self.n_features();
        let stride = (n + 1).div_ceil(8);
        let mut out = Vec::with_capacity(16 + stride * self.n_examples());
        out.extend_from_slice(CACHE_MAGIC);
        out.extend_from_slice(&(n as u32).to_le_bytes());
        out.extend_from_slice(&(self.n_examples() as u32).to_le_bytes());
        for (i, row) in self.rows.iter().enumerate() {
            let mut packed = vec![0u8; stride];
            for j in row.ones().chain(self.label(i).then_some(n)) {
                packed[j / 8] |= 1 << (j % 8);
            }
            out.extend_from_slice(&packed);
        }
        fs::write(path, out)?;
        let sidecar = CacheSidecar {
            feature_names: self.feature_names.clone(),
            label_for_positive: self.label_for_positive.clone(),
            n_examples: self.n_examples(),
        };
        fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)? + "\n")?;
        Ok(())
    }

    pub fn load_cache(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let sidecar: CacheSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
        let bad = |msg: &str| Error::Parse(format!("{}: {msg}", path.display()));
        if bytes.len() < 16 || &bytes[..8] != CACHE_MAGIC {
            return Err(bad("not a binarized dataset cache"));
        }
        let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let m = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        if n != sidecar.feature_names.len() || m != sidecar.n_examples {
            return Err(bad("header disagrees with sidecar"));
        }
        let stride = (n + 1).div_ceil(8);
        if bytes.len() != 16 + stride * m {
            return Err(bad("truncated payload"));
        }
        let mut rows = Vec::with_capacity(m);
        let mut labels = Vec::with_capacity(m);
        for chunk in bytes[16..].chunks(stride) {
            let bit = |j: usize| chunk[j / 8] >> (j % 8) & 1 == 1;
            let mut row = FixedBitSet::with_capacity(n);
            (0..n).filter(|&j| bit(j)).for_each(|j| row.insert(j));
            rows.push(row);
            labels.push(bit(n));
        }
        BinDataset::new(sidecar.feature_names, rows, labels, sidecar.label_for_positive)
    }
}

const CACHE_MAGIC: &[u8; 8] = b"NDNFBIN1";

#[derive(Serialize, Deserialize)]
struct CacheSidecar {
    feature_names: Vec<String>,
    label_for_positive: String,
    n_examples: usize,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Reads a headed 0/1 CSV. A trailing `label` column is optional; the flag
/// reports whether it was present.
pub fn read_binary_csv(path: &Path) -> Result<(BinDataset, bool)> {
    let text = fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let labelled = header.last().is_some_and(|h| h == LABEL_COLUMN);
    if labelled {
        header.pop();
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let mut values = record.iter().map(|v| match v {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::Parse(format!("row {r}: expected 0/1, got `{other}`"))),
        });
        let row: Vec<bool> = values.by_ref().take(header.len()).collect::<Result<_>>()?;
        if row.len() != header.len() {
            return Err(Error::Parse(format!("row {r} is short")));
        }
        labels.push(if labelled { values.next().unwrap_or(Ok(false))? } else { false });
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut ds = BinDataset::from_bools(header, &rows, labels)?;
    ds.label_for_positive = "1".into();
    Ok((ds, labelled))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureEncoding {
    Boolean { column: usize },
    Category { column: usize, value: String },
    Threshold { column: usize, cut: f64 },
}

/// The fitted feature mapping; applied unchanged to held-out files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Binarizer {
    pub column_names: Vec<String>,
    pub column_types: Vec<ColumnType>,
    pub features: Vec<(String, FeatureEncoding)>,
    pub labels: [String; 2],
}

/// Linear-interpolation quantile of sorted values.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Equal-frequency cut points strictly inside the column's range.
pub fn quantile_cuts(values: &[f64], count: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let mut cuts: Vec<f64> = (1..=count)
        .map(|i| quantile(&sorted, i as f64 / (count + 1) as f64))
        .filter(|&c| c >= min && c < max)
        .collect();
    cuts.dedup();
    cuts
}

impl Binarizer {
    pub fn fit(raw: &RawDataset, thresholds_per_numeric: usize) -> Result<Self> {
        let distinct: BTreeSet<&str> = raw.target.iter().map(String::as_str).collect();
        if distinct.len() != 2 {
            return Err(Error::TargetNotBinary(format!("{} distinct target values", distinct.len())));
        }
        if !distinct.contains(raw.positive_label.as_str()) {
            return Err(Error::TargetNotBinary(format!("positive label `{}` never occurs", raw.positive_label)));
        }
        let negative = distinct.iter().find(|v| **v != raw.positive_label).unwrap().to_string();
        let mut features = Vec::new();
        for (c, (name, col)) in raw.names.iter().zip(&raw.columns).enumerate() {
            let before = features.len();
            match col {
                Column::Boolean(v) => {
                    if v.iter().any(|&b| b) && v.iter().any(|&b| !b) {
                        features.push((name.clone(), FeatureEncoding::Boolean { column: c }));
                    }
                }
                Column::Categorical(v) => {
                    let values: BTreeSet<&String> = v.iter().collect();
                    let keep = if values.len() == 2 { 1 } else { values.len() };
                    if values.len() > 1 {
                        for value in values.into_iter().take(keep) {
                            features.push((
                                format!("{name}={value}"),
                                FeatureEncoding::Category { column: c, value: value.clone() },
                            ));
                        }
                    }
                }
                Column::Numeric(v) => {
                    for cut in quantile_cuts(v, thresholds_per_numeric) {
                        features.push((format!("{name}<={cut}"), FeatureEncoding::Threshold { column: c, cut }));
                    }
                }
            }
            if features.len() == before {
                warn!("column `{name}` is constant; dropped");
            }
        }
        Ok(Binarizer {
            column_names: raw.names.clone(),
            column_types: raw.columns.iter().map(Column::kind).collect(),
            features,
            labels: [negative, raw.positive_label.clone()],
        })
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn transform(&self, raw: &RawDataset) -> Result<BinDataset> {
        if raw.names != self.column_names {
            return Err(Error::SchemaMismatch(format!(
                "columns {:?} differ from fitted columns {:?}",
                raw.names, self.column_names
            )));
        }
        for (name, (col, ty)) in raw.names.iter().zip(raw.columns.iter().zip(&self.column_types)) {
            if col.kind() != *ty {
                return Err(Error::SchemaMismatch(format!("column `{name}` changed type")));
            }
        }
        let n = self.features.len();
        let mut rows = vec![FixedBitSet::with_capacity(n); raw.n_rows()];
        for (j, (_, enc)) in self.features.iter().enumerate() {
            for (i, row) in rows.iter_mut().enumerate() {
                let bit = match (enc, &raw.columns[enc_column(enc)]) {
                    (FeatureEncoding::Boolean { .. }, Column::Boolean(v)) => v[i],
                    (FeatureEncoding::Category { value, .. }, Column::Categorical(v)) => v[i] == *value,
                    (FeatureEncoding::Threshold { cut, .. }, Column::Numeric(v)) => v[i] <= *cut,
                    _ => unreachable!("column types checked above"),
                };
                row.set(j, bit);
            }
        }
        let mut labels = Vec::with_capacity(raw.n_rows());
        for (i, v) in raw.target.iter().enumerate() {
            if !self.labels.contains(v) {
                return Err(Error::TargetNotBinary(format!("row {i} has unseen target `{v}`")));
            }
            labels.push(*v == self.labels[1]);
        }
        BinDataset::new(self.feature_names(), rows, labels, self.labels[1].clone())
    }
}

fn enc_column(enc: &FeatureEncoding) -> usize {
    match enc {
        FeatureEncoding::Boolean { column }
        | FeatureEncoding::Category { column, .. }
        | FeatureEncoding::Threshold { column, .. } => *column,
    }
}

/// One-hot categoricals (one feature fewer for two-valued columns),
/// `thresholds_per_numeric` quantile cuts per numeric column, booleans as is.
pub fn binarize(raw: &RawDataset, thresholds_per_numeric: usize) -> Result<(BinDataset, Binarizer)> {
    let binarizer = Binarizer::fit(raw, thresholds_per_numeric)?;
    let ds = binarizer.transform(raw)?;
    Ok((ds, binarizer))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub n_splits: usize,
    pub seed: u64,
    pub external_test: Option<PathBuf>,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train_fraction: 0.8, n_splits: 5, seed: 0, external_test: None }
    }
}

/// Index lists of stratified random splits; one RNG stream per split.
pub fn split_indices(ds: &BinDataset, spec: &SplitSpec) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::DegenerateSplit(format!("train fraction {} not in (0, 1)", spec.train_fraction)));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for i in 0..ds.n_examples() {
        by_class[ds.label(i) as usize].push(i);
    }
    let mut out = Vec::with_capacity(spec.n_splits);
    for s in 0..spec.n_splits {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(s as u64));
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (class, members) in by_class.iter().enumerate() {
            let take = (spec.train_fraction * members.len() as f64).round() as usize;
            if take == 0 || take == members.len() {
                return Err(Error::DegenerateSplit(format!(
                    "class {class} has {} examples; a stratum would be empty",
                    members.len()
                )));
            }
            let mut shuffled = members.clone();
            shuffled.shuffle(&mut rng);
            train.extend_from_slice(&shuffled[..take]);
            test.extend_from_slice(&shuffled[take..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        out.push((train, test));
    }
    Ok(out)
}

/// Train/test pairs: the whole set against `external` when given, otherwise
/// `spec.n_splits` stratified splits.
pub fn split(
    ds: &BinDataset,
    spec: &SplitSpec,
    external: Option<&BinDataset>,
) -> Result<Vec<(BinDataset, BinDataset)>> {
    if let Some(test) = external {
        if test.feature_names() != ds.feature_names() {
            return Err(Error::SchemaMismatch("external test features differ from training features".into()));
        }
        return Ok(vec![(ds.clone(), test.clone())]);
    }
    Ok(split_indices(ds, spec)?.into_iter().map(|(train, test)| (ds.subset(&train), ds.subset(&test))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(cols: &[(&str, ColumnType)]) -> Schema {
        Schema {
            target: "y".into(),
            positive_label: "1".into(),
            columns: cols.iter().map(|(n, t)| (n.to_string(), *t)).collect(),
        }
    }

    #[test]
    fn boolean_column_is_copied() {
        let raw = RawDataset::new(
            vec!["b".into()],
            vec![Column::Boolean(vec![true, false, true])],
            vec!["1".into(), "0".into(), "0".into()],
            "1",
        )
        .unwrap();
        let (ds, _) = binarize(&raw, 3).unwrap();
        assert_eq!(ds.feature_names(), &["b"]);
        assert_eq!((0..3).map(|i| ds.row(i).contains(0)).collect::<Vec<_>>(), [true, false, true]);
        assert_eq!(ds.class_counts(), (2, 1));
    }

    #[test]
    fn categorical_one_hot() {
        let raw = RawDataset::new(
            vec!["c".into()],
            vec![Column::Categorical(vec!["a".into(), "b".into(), "c".into()])],
            vec!["1".into(), "0".into(), "0".into()],
            "1",
        )
        .unwrap();
        let (ds, _) = binarize(&raw, 3).unwrap();
        assert_eq!(ds.feature_names(), &["c=a", "c=b", "c=c"]);
        assert_eq!((0..3).map(|j| ds.row(1).contains(j)).collect::<Vec<_>>(), [false, true, false]);

        let raw = RawDataset::new(
            vec!["c".into()],
            vec![Column::Categorical(vec!["u".into(), "v".into()])],
            vec!["1".into(), "0".into()],
            "1",
        )
        .unwrap();
        assert_eq!(binarize(&raw, 3).unwrap().0.feature_names(), &["c=u"]);
    }

    #[test]
    fn numeric_median_cut() {
        let raw = RawDataset::new(
            vec!["v".into()],
            vec![Column::Numeric(vec![1.0, 2.0, 3.0, 4.0])],
            vec!["1".into(), "0".into(), "1".into(), "0".into()],
            "1",
        )
        .unwrap();
        let (ds, _) = binarize(&raw, 1).unwrap();
        assert_eq!(ds.feature_names(), &["v<=2.5"]);
        assert_eq!((0..4).map(|i| ds.row(i).contains(0)).collect::<Vec<_>>(), [true, true, false, false]);
    }

    #[test]
    fn quantile_cuts_are_increasing_and_in_range() {
        let values = [5.0, 1.0, 1.0, 1.0, 2.0, 9.0, 3.0, 3.0, 7.0];
        let cuts = quantile_cuts(&values, 9);
        assert!(cuts.windows(2).all(|w| w[0] < w[1]));
        assert!(cuts.iter().all(|&c| (1.0..9.0).contains(&c)));
        assert!(quantile_cuts(&[2.0, 2.0, 2.0], 4).is_empty());
    }

    #[test]
    fn constant_column_dropped_and_target_checked() {
        let raw = RawDataset::new(
            vec!["k".into(), "b".into()],
            vec![Column::Numeric(vec![1.0, 1.0]), Column::Boolean(vec![true, false])],
            vec!["yes".into(), "no".into()],
            "yes",
        )
        .unwrap();
        let (ds, _) = binarize(&raw, 3).unwrap();
        assert_eq!(ds.feature_names(), &["b"]);

        let raw = RawDataset::new(
            vec!["b".into()],
            vec![Column::Boolean(vec![true, false, true])],
            vec!["a".into(), "b".into(), "c".into()],
            "a",
        )
        .unwrap();
        assert!(matches!(binarize(&raw, 3), Err(Error::TargetNotBinary(_))));
    }

    #[test]
    fn load_csv_cases() {
        let s = schema(&[("a", ColumnType::Numeric), ("c", ColumnType::Categorical)]);
        let raw = load_csv_str("a,c,y\n1.5,red,1\n2,blue,0\n", &s).unwrap();
        assert_eq!(raw.n_rows(), 2);
        assert_eq!(raw.columns[0], Column::Numeric(vec![1.5, 2.0]));

        let missing_target = Schema { target: "z".into(), ..s.clone() };
        assert!(matches!(load_csv_str("a,c,y\n1,r,1\n", &missing_target), Err(Error::SchemaMismatch(_))));
        assert!(matches!(load_csv_str("", &s), Err(Error::EmptyDataset)));
        assert!(matches!(load_csv_str("a,c,y\n", &s), Err(Error::EmptyDataset)));
        assert!(matches!(load_csv_str("a,c,y\n1,?,1\n", &s), Err(Error::MissingValue { row: 0, .. })));
        assert!(matches!(load_csv_str("a,c,y\nx,r,1\n", &s), Err(Error::Parse(_))));
    }

    fn balanced(n_per_class: usize) -> BinDataset {
        let rows: Vec<Vec<bool>> = (0..2 * n_per_class).map(|i| vec![i % 3 == 0]).collect();
        let labels = (0..2 * n_per_class).map(|i| i % 2 == 0).collect();
        BinDataset::from_bools(vec!["f".into()], &rows, labels).unwrap()
    }

    #[test]
    fn stratified_split_arithmetic() {
        let ds = balanced(5);
        let spec = SplitSpec { n_splits: 3, seed: 11, ..SplitSpec::default() };
        let splits = split(&ds, &spec, None).unwrap();
        assert_eq!(splits.len(), 3);
        for (train, test) in &splits {
            assert_eq!(train.n_examples(), 8);
            assert_eq!(train.class_counts(), (4, 4));
            assert_eq!(test.class_counts(), (1, 1));
        }
        assert_eq!(split_indices(&ds, &spec).unwrap(), split_indices(&ds, &spec).unwrap());
    }

    #[test]
    fn external_split_is_single_pair() {
        let ds = balanced(5);
        let ext = balanced(2);
        let spec = SplitSpec { n_splits: 5, ..SplitSpec::default() };
        let splits = split(&ds, &spec, Some(&ext)).unwrap();
        assert_eq!(splits.len(), 1);
        assert_eq!(splits[0].1.n_examples(), 4);
    }

    #[test]
    fn degenerate_split() {
        let rows = vec![vec![true], vec![false], vec![true]];
        let ds = BinDataset::from_bools(vec!["f".into()], &rows, vec![true, false, false]).unwrap();
        assert!(matches!(split(&ds, &SplitSpec::default(), None), Err(Error::DegenerateSplit(_))));
    }

    #[test]
    fn cache_and_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = BinDataset::from_truth_table(9, |x| x % 3 == 0);
        let cache = dir.path().join("d.nbin");
        ds.save_cache(&cache).unwrap();
        assert_eq!(BinDataset::load_cache(&cache).unwrap(), ds);

        let csv = dir.path().join("d.csv");
        ds.write_csv(&csv).unwrap();
        let (back, labelled) = read_binary_csv(&csv).unwrap();
        assert!(labelled);
        assert_eq!(back, ds);
    }
}
