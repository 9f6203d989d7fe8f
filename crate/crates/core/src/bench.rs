//! Benchmark harness: every registered model at every k on every dataset,
//! averaged over splits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{binarize, load_csv, split, BinDataset, Schema, SplitSpec, DEFAULT_THRESHOLDS};
use crate::error::Result;
use crate::models::LearnerRegistry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub csv: PathBuf,
    pub schema: PathBuf,
    #[serde(default)]
    pub external_test: Option<PathBuf>,
}

impl DatasetConfig {
    pub fn display_name(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
    }
}

fn default_ks() -> Vec<usize> {
    vec![2, 3, 4, 5, 6]
}

fn default_splits() -> usize {
    5
}

fn default_fraction() -> f64 {
    0.8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub datasets: Vec<DatasetConfig>,
    #[serde(default = "default_ks")]
    pub ks: Vec<usize>,
    #[serde(default = "default_splits")]
    pub splits: usize,
    #[serde(default = "default_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    /// Registered learner names; all of them when absent.
    #[serde(default)]
    pub models: Option<Vec<String>>,
    #[serde(default)]
    pub thresholds: Option<usize>,
}

impl BenchConfig {
    /// Reads a config and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: BenchConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for d in &mut cfg.datasets {
            resolve(&mut d.csv);
            resolve(&mut d.schema);
            if let Some(t) = &mut d.external_test {
                resolve(t);
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchEntry {
    pub dataset: String,
    pub k: usize,
    pub model: String,
    pub mean_accuracy: f64,
    pub mean_size: f64,
    pub n_splits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchFailure {
    pub dataset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub error: String,
}

/// The deterministic part of a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct BenchmarkReport {
    pub entries: Vec<BenchEntry>,
    pub failures: Vec<BenchFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub dataset: String,
    pub k: usize,
    pub model: String,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub report: BenchmarkReport,
    pub timings: Vec<Timing>,
}

fn prepare(d: &DatasetConfig, cfg: &BenchConfig) -> Result<Vec<(BinDataset, BinDataset)>> {
    let schema = Schema::load(&d.schema)?;
    let raw = load_csv(&d.csv, &schema)?;
    let (ds, binarizer) = binarize(&raw, cfg.thresholds.unwrap_or(DEFAULT_THRESHOLDS))?;
    let external = match &d.external_test {
        Some(p) => Some(binarizer.transform(&load_csv(p, &schema)?)?),
        None => None,
    };
    let spec = SplitSpec {
        train_fraction: cfg.train_fraction,
        n_splits: cfg.splits,
        seed: cfg.seed,
        external_test: d.external_test.clone(),
    };
    info!("{}: {} examples, {} features", d.display_name(), ds.n_examples(), ds.n_features());
    split(&ds, &spec, external.as_ref())
}

struct Job {
    dataset: usize,
    k: usize,
    model: String,
    split: usize,
}

struct Outcome {
    accuracy: f64,
    size: usize,
    seconds: f64,
}

/// Trains every (dataset, k, model, split) job in parallel; the report lists
/// results in config order regardless of scheduling.
pub fn run_benchmark(cfg: &BenchConfig, registry: &LearnerRegistry) -> Result<BenchmarkRun> {
    let models: Vec<String> = cfg.models.clone().unwrap_or_else(|| registry.names().to_vec());
    let learners = models.iter().map(|m| registry.get(m)).collect::<Result<Vec<_>>>()?;
    let mut failures = Vec::new();
    let mut prepared: Vec<Option<Vec<(BinDataset, BinDataset)>>> = Vec::new();
    for d in &cfg.datasets {
        match prepare(d, cfg) {
            Ok(p) => prepared.push(Some(p)),
            Err(e) => {
                warn!("{}: {e}", d.display_name());
                failures.push(BenchFailure { dataset: d.display_name(), k: None, model: None, error: e.to_string() });
                prepared.push(None);
            }
        }
    }
    let mut jobs = Vec::new();
    for (di, p) in prepared.iter().enumerate() {
        let Some(pairs) = p else { continue };
        for &k in &cfg.ks {
            for m in &models {
                for s in 0..pairs.len() {
                    jobs.push(Job { dataset: di, k, model: m.clone(), split: s });
                }
            }
        }
    }
    let outcomes: Vec<Result<Outcome>> = jobs
        .par_iter()
        .map(|job| {
            let (train, test) = &prepared[job.dataset].as_ref().expect("jobs only for prepared datasets")[job.split];
            let learner = &learners[models.iter().position(|m| *m == job.model).expect("model listed")];
            let start = Instant::now();
            let model = learner.fit(train, job.k)?;
            let accuracy = test.accuracy(|r| model.predict(r));
            Ok(Outcome { accuracy, size: model.size(), seconds: start.elapsed().as_secs_f64() })
        })
        .collect();

    let mut entries = Vec::new();
    let mut timings = Vec::new();
    let mut i = 0;
    while i < jobs.len() {
        let first = &jobs[i];
        let group = jobs[i..]
            .iter()
            .take_while(|j| j.dataset == first.dataset && j.k == first.k && j.model == first.model)
            .count();
        let dataset = cfg.datasets[first.dataset].display_name();
        let results = &outcomes[i..i + group];
        if let Some(Err(e)) = results.iter().find(|r| r.is_err()) {
            failures.push(BenchFailure {
                dataset,
                k: Some(first.k),
                model: Some(first.model.clone()),
                error: e.to_string(),
            });
        } else {
            let ok: Vec<&Outcome> = results.iter().map(|r| r.as_ref().expect("errors handled above")).collect();
            let n = ok.len() as f64;
            entries.push(BenchEntry {
                dataset: dataset.clone(),
                k: first.k,
                model: first.model.clone(),
                mean_accuracy: ok.iter().map(|o| o.accuracy).sum::<f64>() / n,
                mean_size: ok.iter().map(|o| o.size as f64).sum::<f64>() / n,
                n_splits: ok.len(),
            });
            timings.push(Timing {
                dataset,
                k: first.k,
                model: first.model.clone(),
                seconds: ok.iter().map(|o| o.seconds).sum(),
            });
        }
        i += group;
    }
    Ok(BenchmarkRun { report: BenchmarkReport { entries, failures }, timings })
}

impl BenchmarkReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn entry(&self, dataset: &str, k: usize, model: &str) -> Option<&BenchEntry> {
        self.entries.iter().find(|e| e.dataset == dataset && e.k == k && e.model == model)
    }
}

impl BenchmarkRun {
    /// Aligned text table with one line per (dataset, k, model).
    pub fn render_table(&self) -> String {
        let mut rows = vec![[
            "dataset".to_string(),
            "k".into(),
            "model".into(),
            "accuracy".into(),
            "size".into(),
            "seconds".into(),
        ]];
        for (e, t) in self.report.entries.iter().zip(&self.timings) {
            rows.push([
                e.dataset.clone(),
                e.k.to_string(),
                e.model.clone(),
                format!("{:.2}", e.mean_accuracy),
                format!("{:.1}", e.mean_size),
                format!("{:.3}", t.seconds),
            ]);
        }
        let widths: Vec<usize> = (0..6).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(c, s)| if c < 3 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        for f in &self.report.failures {
            let _ = writeln!(out, "failed {} k={:?} model={:?}: {}", f.dataset, f.k, f.model, f.error);
        }
        out
    }
}
