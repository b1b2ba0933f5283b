//! Confusion matrices, per-epoch metrics, and the CSV/summary report files.

use hcrn_core::error::{Error, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Counts of (true class, predicted class) pairs; rows are true classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    counts: Vec<u64>, // c x c, row-major
}

impl ConfusionMatrix {
    pub fn new(classes: &[String]) -> Self {
        ConfusionMatrix {
            classes: classes.to_vec(),
            counts: vec![0; classes.len() * classes.len()],
        }
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn record(&mut self, true_idx: usize, pred_idx: usize) {
        let c = self.classes.len();
        self.counts[true_idx * c + pred_idx] += 1;
    }

    pub fn count(&self, true_idx: usize, pred_idx: usize) -> u64 {
        self.counts[true_idx * self.classes.len() + pred_idx]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Diagonal sum: the number of correct predictions.
    pub fn trace(&self) -> u64 {
        let c = self.classes.len();
        (0..c).map(|i| self.counts[i * c + i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.trace() as f64 / total as f64
    }

    pub fn row_sum(&self, true_idx: usize) -> u64 {
        let c = self.classes.len();
        self.counts[true_idx * c..(true_idx + 1) * c].iter().sum()
    }

    /// CSV with a class-name header row and a class-name lead column.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("true\\pred");
        for name in &self.classes {
            let _ = write!(out, ",{name}");
        }
        out.push('\n');
        for (r, name) in self.classes.iter().enumerate() {
            let _ = write!(out, "{name}");
            for p in 0..self.classes.len() {
                let _ = write!(out, ",{}", self.count(r, p));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Usage("confusion CSV is empty".into()))?;
        let classes: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
        if classes.is_empty() {
            return Err(Error::Usage("confusion CSV header has no classes".into()));
        }
        let mut m = ConfusionMatrix::new(&classes);
        for (r, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let row_name = fields.next().unwrap_or_default();
            if r >= classes.len() || row_name != classes[r] {
                return Err(Error::Usage(format!(
                    "confusion CSV row '{row_name}' does not match header order"
                )));
            }
            for (p, field) in fields.enumerate() {
                let v: u64 = field.trim().parse().map_err(|_| {
                    Error::Usage(format!("confusion CSV has non-integer cell '{field}'"))
                })?;
                m.counts[r * classes.len() + p] = v;
            }
        }
        Ok(m)
    }
}

/// One metrics row: loss and accuracy for one split at one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: u32,
    pub split: &'static str, // "train" or "test"
    pub loss: f64,
    pub accuracy: f64,
}

pub const METRICS_HEADER: &str = "epoch,split,loss,accuracy";

pub fn metrics_row(m: &EpochMetrics) -> String {
    // shortest-roundtrip float formatting keeps files byte-stable per value
    format!("{},{},{},{}\n", m.epoch, m.split, m.loss, m.accuracy)
}

/// Name of the confusion CSV for one (architecture, task) run.
pub fn confusion_file_name(arch: &str, task: &str) -> String {
    format!("confusion_{arch}_{task}.csv")
}

/// Accuracy-per-run summary assembled from the confusion CSVs in a directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// (architecture, task, accuracy), sorted by architecture then task.
    pub entries: Vec<(String, String, f64)>,
}

/// Rebuild the summary by parsing every `confusion_<arch>_<task>.csv` in
/// `dir`. This is the canonical path: the written summary.txt derives from
/// the CSVs alone.
pub fn summary_from_dir(dir: &Path) -> Result<Summary> {
    let mut entries = Vec::new();
    let rd = std::fs::read_dir(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut paths: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .map(|n| {
                    let n = n.to_string_lossy();
                    n.starts_with("confusion_") && n.ends_with(".csv")
                })
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    for path in paths {
        let stem = path
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .to_string();
        let mut parts = stem.splitn(3, '_');
        let _ = parts.next(); // "confusion"
        let arch = parts.next().unwrap_or_default().to_string();
        let task = parts.next().unwrap_or_default().to_string();
        if arch.is_empty() || task.is_empty() {
            continue;
        }
        let text =
            std::fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let matrix = ConfusionMatrix::from_csv(&text)?;
        entries.push((arch, task, matrix.accuracy()));
    }
    entries.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    Ok(Summary { entries })
}

/// Render the accuracy-comparison table.
pub fn summary_text(summary: &Summary) -> String {
    let mut tasks: Vec<&str> = summary.entries.iter().map(|(_, t, _)| t.as_str()).collect();
    tasks.sort_unstable();
    tasks.dedup();
    let mut archs: Vec<&str> = summary.entries.iter().map(|(a, _, _)| a.as_str()).collect();
    archs.sort_unstable();
    archs.dedup();

    let mut out = String::from("accuracy by architecture and task\n\n");
    let _ = write!(out, "{:<14}", "architecture");
    for t in &tasks {
        let _ = write!(out, "{t:>10}");
    }
    out.push('\n');
    for a in &archs {
        let _ = write!(out, "{a:<14}");
        for t in &tasks {
            let cell = summary
                .entries
                .iter()
                .find(|(ea, et, _)| ea == a && et == t)
                .map(|(_, _, acc)| format!("{:.2}%", acc * 100.0))
                .unwrap_or_else(|| "-".into());
            let _ = write!(out, "{cell:>10}");
        }
        out.push('\n');
    }
    out
}

/// Write (or rewrite) `summary.txt` from the confusion CSVs in `dir` and
/// return the parsed summary.
pub fn write_summary(dir: &Path) -> Result<Summary> {
    let summary = summary_from_dir(dir)?;
    let path = dir.join("summary.txt");
    std::fs::write(&path, summary_text(&summary))
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(summary)
}
