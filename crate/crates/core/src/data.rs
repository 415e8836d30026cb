//! Loaders for the three kinds of input this crate consumes: raw tabular
//! datasets (for meta-feature extraction), validation-curve corpora and
//! benchmark result tables.
//!
//! Everything returned here has passed its invariants and is immutable from
//! then on.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, TaskType};

/// Default number of leading epochs treated as the observed support.
pub const DEFAULT_SUPPORT_LEN: usize = 5;

/// Tolerance, relative to `max(1, |cell|)`, for the seed-mean consistency check.
pub const SEED_MEAN_TOL: f64 = 1e-9;

const MISSING_TOKENS: &[&str] = &["", "NA", "N/A", "NaN", "nan", "?", "null", "NULL"];

fn is_missing(field: &str) -> bool {
    MISSING_TOKENS.contains(&field.trim())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numerical,
    Categorical,
}

/// Column name to kind, as read from a schema JSON object.
pub type Schema = BTreeMap<String, ColumnKind>;

pub fn load_schema(path: &Path) -> Result<Schema> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    /// Numeric values, or ordinal codes for categorical columns.
    pub values: Vec<f64>,
}

/// A cleaned dataset: feature columns plus the target.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub id: String,
    pub task: TaskType,
    pub n_instances: usize,
    pub n_features: usize,
    /// `None` for regression.
    pub n_classes: Option<usize>,
    pub columns: Vec<Column>,
    /// Class codes for classification, raw values for regression.
    pub target: Vec<f64>,
    /// Rows removed because of a missing value.
    pub dropped_rows: usize,
}

impl DatasetSummary {
    /// Builds a summary from already-encoded columns and checks every invariant.
    pub fn new(id: impl Into<String>, task: TaskType, columns: Vec<Column>, target: Vec<f64>) -> Result<Self> {
        let n_classes = if task.is_classification() {
            Some(distinct_count(&target))
        } else {
            None
        };
        let summary = DatasetSummary {
            id: id.into(),
            task,
            n_instances: target.len(),
            n_features: columns.len(),
            n_classes,
            columns,
            target,
            dropped_rows: 0,
        };
        summary.validate()?;
        Ok(summary)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_instances == 0 {
            return Err(Error::Degenerate(format!("dataset `{}` has no rows", self.id)));
        }
        if self.n_features == 0 || self.n_features != self.columns.len() {
            return Err(Error::invalid(format!(
                "dataset `{}`: n_features = {} but {} columns",
                self.id,
                self.n_features,
                self.columns.len()
            )));
        }
        if self.target.len() != self.n_instances {
            return Err(Error::invalid(format!("dataset `{}`: target length mismatch", self.id)));
        }
        for col in &self.columns {
            if col.values.len() != self.n_instances {
                return Err(Error::invalid(format!(
                    "dataset `{}`: column `{}` has {} values, expected {}",
                    self.id,
                    col.name,
                    col.values.len(),
                    self.n_instances
                )));
            }
            if col.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("dataset `{}`: column `{}` is not finite", self.id, col.name)));
            }
            if col.kind == ColumnKind::Categorical && col.values.iter().any(|&v| v < 0.0 || v.fract() != 0.0) {
                return Err(Error::invalid(format!(
                    "dataset `{}`: categorical column `{}` must hold non-negative integer codes",
                    self.id, col.name
                )));
            }
        }
        match (self.task.is_classification(), self.n_classes) {
            (true, Some(c)) if c >= 2 => {}
            (true, _) => {
                return Err(Error::Degenerate(format!(
                    "dataset `{}`: classification needs at least two classes",
                    self.id
                )))
            }
            (false, None) => {}
            (false, Some(_)) => {
                return Err(Error::invalid(format!("dataset `{}`: regression cannot carry n_classes", self.id)))
            }
        }
        if self.target.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("dataset `{}`: target is not finite", self.id)));
        }
        Ok(())
    }
}

fn distinct_count(values: &[f64]) -> usize {
    values.iter().map(|v| v.to_bits()).collect::<HashSet<_>>().len()
}

/// Loads a CSV dataset.
///
/// The task is inferred from the schema kind of `label`: categorical means
/// classification (binary when exactly two classes remain), numerical means
/// regression. Rows holding any missing value are dropped and counted.
pub fn load_dataset(path: &Path, schema: &Schema, label: &str) -> Result<DatasetSummary> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_dataset_from_reader(path, file, schema, label)
}

pub fn load_dataset_from_reader<R: Read>(path: &Path, reader: R, schema: &Schema, label: &str) -> Result<DatasetSummary> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();

    let header_set: HashSet<&str> = header.iter().map(String::as_str).collect();
    if header_set.len() != header.len() {
        return Err(Error::format(path, "header", "duplicate column name"));
    }
    let schema_set: HashSet<&str> = schema.keys().map(String::as_str).collect();
    if header_set != schema_set {
        let mut missing: Vec<_> = schema_set.difference(&header_set).collect();
        let mut extra: Vec<_> = header_set.difference(&schema_set).collect();
        missing.sort();
        extra.sort();
        return Err(Error::format(
            path,
            "header",
            format!("schema mismatch: not in file {missing:?}, not in schema {extra:?}"),
        ));
    }
    let label_idx = header
        .iter()
        .position(|h| h == label)
        .ok_or_else(|| Error::format(path, "header", format!("label column `{label}` not found")))?;

    let kinds: Vec<ColumnKind> = header.iter().map(|h| schema[h]).collect();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut raw_rows = 0usize;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        raw_rows += 1;
        let fields: Vec<String> = rec.iter().map(|f| f.trim().to_string()).collect();
        for (j, f) in fields.iter().enumerate() {
            if kinds[j] == ColumnKind::Numerical && !is_missing(f) {
                let ok = f.parse::<f64>().map(f64::is_finite).unwrap_or(false);
                if !ok {
                    return Err(Error::format(
                        path,
                        format!("row {}, column `{}`", i + 1, header[j]),
                        format!("non-numeric value `{f}` in numerical column"),
                    ));
                }
            }
        }
        if fields.iter().any(|f| is_missing(f)) {
            continue;
        }
        rows.push(fields);
    }
    if rows.is_empty() {
        return Err(Error::Degenerate(format!(
            "{}: all {raw_rows} rows dropped for missing values",
            path.display()
        )));
    }
    let dropped_rows = raw_rows - rows.len();

    let mut encoded: Vec<Vec<f64>> = vec![Vec::with_capacity(rows.len()); header.len()];
    for (j, kind) in kinds.iter().enumerate() {
        match kind {
            ColumnKind::Numerical => {
                encoded[j] = rows.iter().map(|r| r[j].parse::<f64>().expect("validated above")).collect();
            }
            ColumnKind::Categorical => {
                let mut codes: HashMap<&str, usize> = HashMap::new();
                encoded[j] = rows
                    .iter()
                    .map(|r| {
                        let next = codes.len();
                        *codes.entry(r[j].as_str()).or_insert(next) as f64
                    })
                    .collect();
            }
        }
    }

    let target = std::mem::take(&mut encoded[label_idx]);
    let task = match kinds[label_idx] {
        ColumnKind::Numerical => TaskType::Regression,
        ColumnKind::Categorical => match distinct_count(&target) {
            2 => TaskType::Binclass,
            _ => TaskType::Multiclass,
        },
    };
    let columns = header
        .iter()
        .zip(kinds)
        .zip(encoded)
        .enumerate()
        .filter(|(j, _)| *j != label_idx)
        .map(|(_, ((name, kind), values))| Column {
            name: name.clone(),
            kind,
            values,
        })
        .collect();
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut summary = DatasetSummary::new(id, task, columns, target)?;
    summary.dropped_rows = dropped_rows;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Accuracy,
    NormalizedRmse,
}

impl MetricKind {
    /// Whether larger values are better.
    pub fn higher_is_better(self) -> bool {
        matches!(self, MetricKind::Accuracy)
    }
}

/// Per-epoch validation metric of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationCurve {
    pub dataset_id: String,
    pub task: TaskType,
    pub metric: MetricKind,
    pub values: Vec<f64>,
}

impl ValidationCurve {
    /// Checks value ranges and metric/task agreement. Length is checked
    /// separately against the support size.
    pub fn validate_values(&self) -> std::result::Result<(), String> {
        match (self.task.is_classification(), self.metric) {
            (true, MetricKind::Accuracy) | (false, MetricKind::NormalizedRmse) => {}
            _ => return Err(format!("metric {:?} does not match task {}", self.metric, self.task)),
        }
        for (i, &v) in self.values.iter().enumerate() {
            let ok = match self.metric {
                MetricKind::Accuracy => (0.0..=1.0).contains(&v),
                MetricKind::NormalizedRmse => v.is_finite() && v >= 0.0,
            };
            if !ok {
                return Err(format!("values[{i}] = {v} out of range for {:?}", self.metric));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Loads a curve corpus, requiring at least `support_len + 1` epochs per curve.
pub fn load_curves(path: &Path, support_len: usize) -> Result<Vec<ValidationCurve>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_curves(path, BufReader::new(file), support_len)
}

pub fn read_curves<R: Read>(path: &Path, reader: R, support_len: usize) -> Result<Vec<ValidationCurve>> {
    let curves: Vec<ValidationCurve> = serde_json::from_reader(reader).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let mut short = Vec::new();
    for (i, c) in curves.iter().enumerate() {
        c.validate_values()
            .map_err(|m| Error::format(path, format!("curve[{i}] `{}`", c.dataset_id), m))?;
        if c.len() < support_len + 1 {
            short.push(c.dataset_id.clone());
        }
    }
    if !short.is_empty() {
        return Err(Error::format(
            path,
            "values",
            format!("curves shorter than {} epochs: {}", support_len + 1, short.join(", ")),
        ));
    }
    Ok(curves)
}

pub fn write_curves<W: Write>(mut out: W, curves: &[ValidationCurve]) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, curves)?;
    out.write_all(b"\n")
}

/// Dataset-by-method result matrix, optionally with per-seed repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    pub higher_is_better: Vec<bool>,
    /// `values[dataset][method]`.
    pub values: Vec<Vec<f64>>,
    /// `seeds[dataset][method][seed]`.
    pub seeds: Option<Vec<Vec<Vec<f64>>>>,
}

impl ResultsTable {
    pub fn new(
        methods: Vec<String>,
        datasets: Vec<String>,
        higher_is_better: Vec<bool>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let table = ResultsTable {
            methods,
            datasets,
            higher_is_better,
            values,
            seeds: None,
        };
        table.validate()?;
        Ok(table)
    }

    /// Attaches seed-level results; their per-cell means must match `values`.
    pub fn with_seeds(mut self, seeds: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        self.seeds = Some(seeds);
        self.validate()?;
        Ok(self)
    }

    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn n_methods(&self) -> usize {
        self.methods.len()
    }

    pub fn method_index(&self, name: &str) -> Option<usize> {
        self.methods.iter().position(|m| m == name)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.datasets.len();
        let l = self.methods.len();
        if l == 0 {
            return Err(Error::invalid("results table has no methods"));
        }
        if self.higher_is_better.len() != d || self.values.len() != d {
            return Err(Error::invalid("results table row count mismatch"));
        }
        let mut seen = HashSet::new();
        for id in &self.datasets {
            if !seen.insert(id) {
                return Err(Error::invalid(format!("duplicate dataset id `{id}`")));
            }
        }
        let mut seen = HashSet::new();
        for m in &self.methods {
            if !seen.insert(m) {
                return Err(Error::invalid(format!("duplicate method `{m}`")));
            }
        }
        for (i, row) in self.values.iter().enumerate() {
            if row.len() != l || row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("dataset `{}`: incomplete or non-finite row", self.datasets[i])));
            }
        }
        if let Some(seeds) = &self.seeds {
            if seeds.len() != d {
                return Err(Error::invalid("seed table row count mismatch"));
            }
            let s = seeds.first().and_then(|r| r.first()).map_or(0, Vec::len);
            for (i, row) in seeds.iter().enumerate() {
                if row.len() != l {
                    return Err(Error::invalid(format!("dataset `{}`: seed row has wrong method count", self.datasets[i])));
                }
                for (j, cell) in row.iter().enumerate() {
                    if cell.is_empty() || cell.len() != s {
                        return Err(Error::invalid(format!(
                            "dataset `{}`, method `{}`: expected {s} seeds, found {}",
                            self.datasets[i],
                            self.methods[j],
                            cell.len()
                        )));
                    }
                    let mean = cell.iter().sum::<f64>() / cell.len() as f64;
                    let v = self.values[i][j];
                    if (mean - v).abs() > SEED_MEAN_TOL * v.abs().max(1.0) {
                        return Err(Error::invalid(format!(
                            "dataset `{}`, method `{}`: seed mean {mean} differs from table value {v}",
                            self.datasets[i], self.methods[j]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Loads a results CSV (`dataset_id, higher_is_better, <method>...`) and, when
/// given, its seed companion (`dataset_id, method, seed, value`).
pub fn load_results(path: &Path, seeds: Option<&Path>) -> Result<ResultsTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let table = read_results(path, file)?;
    match seeds {
        None => Ok(table),
        Some(sp) => {
            let file = File::open(sp).map_err(|e| Error::io(sp, e))?;
            let cells = read_seed_cells(sp, file, &table)?;
            table.with_seeds(cells).map_err(|e| match e {
                Error::Invalid(m) => Error::format(sp, "seeds", m),
                other => other,
            })
        }
    }
}

pub fn read_results<R: Read>(path: &Path, reader: R) -> Result<ResultsTable> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();
    if header.len() < 3 || header[0] != "dataset_id" || header[1] != "higher_is_better" {
        return Err(Error::format(
            path,
            "header",
            "expected `dataset_id,higher_is_better,<method>...`",
        ));
    }
    let methods = header[2..].to_vec();
    let mut datasets = Vec::new();
    let mut hib = Vec::new();
    let mut values = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = i + 1;
        let id = rec.get(0).unwrap_or("").trim().to_string();
        if id.is_empty() {
            return Err(Error::format(path, format!("row {row}, column `dataset_id`"), "blank dataset id"));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::format(path, format!("row {row}"), format!("duplicate dataset id `{id}`")));
        }
        let flag = match rec.get(1).map(str::trim) {
            Some("1") | Some("true") => true,
            Some("0") | Some("false") => false,
            other => {
                return Err(Error::format(
                    path,
                    format!("row {row}, column `higher_is_better`"),
                    format!("expected 0 or 1, found {:?}", other.unwrap_or("")),
                ))
            }
        };
        let mut cells = Vec::with_capacity(methods.len());
        for (j, m) in methods.iter().enumerate() {
            let raw = rec.get(j + 2).unwrap_or("").trim();
            if is_missing(raw) {
                return Err(Error::format(path, format!("row {row}, column `{m}`"), "missing cell"));
            }
            let v: f64 = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::format(path, format!("row {row}, column `{m}`"), format!("not a number: `{raw}`")))?;
            cells.push(v);
        }
        datasets.push(id);
        hib.push(flag);
        values.push(cells);
    }
    ResultsTable::new(methods, datasets, hib, values).map_err(|e| match e {
        Error::Invalid(m) => Error::format(path, "table", m),
        other => other,
    })
}

fn read_seed_cells<R: Read>(path: &Path, reader: R, table: &ResultsTable) -> Result<Vec<Vec<Vec<f64>>>> {
    #[derive(Deserialize)]
    struct SeedRow {
        dataset_id: String,
        method: String,
        seed: i64,
        value: f64,
    }
    let ds_index: HashMap<&str, usize> = table.datasets.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    let m_index: HashMap<&str, usize> = table.methods.iter().enumerate().map(|(i, m)| (m.as_str(), i)).collect();
    let mut cells: Vec<Vec<BTreeMap<i64, f64>>> = vec![vec![BTreeMap::new(); table.n_methods()]; table.n_datasets()];
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    for (i, rec) in rdr.deserialize::<SeedRow>().enumerate() {
        let row = i + 1;
        let r = rec.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let di = *ds_index
            .get(r.dataset_id.as_str())
            .ok_or_else(|| Error::format(path, format!("row {row}"), format!("unknown dataset `{}`", r.dataset_id)))?;
        let mi = *m_index
            .get(r.method.as_str())
            .ok_or_else(|| Error::format(path, format!("row {row}"), format!("unknown method `{}`", r.method)))?;
        if !r.value.is_finite() {
            return Err(Error::format(path, format!("row {row}"), "non-finite value"));
        }
        if cells[di][mi].insert(r.seed, r.value).is_some() {
            return Err(Error::format(path, format!("row {row}"), "duplicate (dataset, method, seed)"));
        }
    }
    Ok(cells
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.into_values().collect()).collect())
        .collect())
}

fn fmt_real(v: f64) -> String {
    // Shortest representation that parses back to the same bits.
    format!("{v:?}")
}

pub fn write_results<W: Write>(out: W, table: &ResultsTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |source| Error::Csv {
        path: "<output>".into(),
        source,
    };
    let mut header = vec!["dataset_id".to_string(), "higher_is_better".to_string()];
    header.extend(table.methods.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (i, id) in table.datasets.iter().enumerate() {
        let mut rec = vec![id.clone(), if table.higher_is_better[i] { "1" } else { "0" }.to_string()];
        rec.extend(table.values[i].iter().map(|&v| fmt_real(v)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(Path::new("<output>"), e))
}

pub fn write_seeds<W: Write>(out: W, table: &ResultsTable) -> Result<()> {
    let Some(seeds) = &table.seeds else {
        return Err(Error::invalid("results table carries no seeds"));
    };
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |source| Error::Csv {
        path: "<output>".into(),
        source,
    };
    w.write_record(["dataset_id", "method", "seed", "value"]).map_err(csv_err)?;
    for (i, id) in table.datasets.iter().enumerate() {
        for (j, m) in table.methods.iter().enumerate() {
            for (s, &v) in seeds[i][j].iter().enumerate() {
                w.write_record([id.as_str(), m.as_str(), &s.to_string(), &fmt_real(v)]).map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(Path::new("<output>"), e))
}

/// Per-dataset side information used by subset selection: task type, size
/// (`N * d`) and whether the dataset has categorical attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetInfo {
    pub id: String,
    pub task: TaskType,
    pub size: Option<f64>,
    pub has_categorical: Option<bool>,
}

/// Reads a CSV with `dataset_id, task` and optionally `size` (or
/// `n_instances` and `n_features`) and `has_categorical` (0/1).
pub fn load_dataset_info(path: &Path) -> Result<Vec<DatasetInfo>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(BufReader::new(file));
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let (Some(id_c), Some(task_c)) = (col("dataset_id"), col("task")) else {
        return Err(Error::format(path, "header", "expected `dataset_id` and `task` columns"));
    };
    let size_c = col("size");
    let n_c = col("n_instances");
    let d_c = col("n_features");
    let cat_c = col("has_categorical");
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = i + 1;
        let num = |c: usize| -> Result<f64> {
            let raw = rec.get(c).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::format(path, format!("row {row}, column `{}`", header[c]), format!("not a number: `{raw}`")))
        };
        let id = rec.get(id_c).unwrap_or("").to_string();
        if !seen.insert(id.clone()) {
            return Err(Error::format(path, format!("row {row}"), format!("duplicate dataset id `{id}`")));
        }
        let task = rec
            .get(task_c)
            .unwrap_or("")
            .parse()
            .map_err(|e: Error| Error::format(path, format!("row {row}, column `task`"), e.to_string()))?;
        let size = match (size_c, n_c, d_c) {
            (Some(c), _, _) => Some(num(c)?),
            (None, Some(n), Some(d)) => Some(num(n)? * num(d)?),
            _ => None,
        };
        let has_categorical = match cat_c {
            Some(c) => Some(num(c)? != 0.0),
            None => None,
        };
        out.push(DatasetInfo {
            id,
            task,
            size,
            has_categorical,
        });
    }
    Ok(out)
}
