use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::rank::{mean_ranks, rank_row};
use crate::dataset::ScaleMode;
use crate::ensemble::ClassifierKind;
use crate::error::{Error, Result};

/// Evaluation protocol, repeated in every report header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub description: String,
    pub folds: usize,
    pub n_trees: usize,
    pub master_seed: u64,
    pub scale_mode: ScaleMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResult {
    pub classifier: ClassifierKind,
    /// Mean of the per-fold accuracies, in percent.
    pub mean_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    /// Training wall time per fold, seconds.
    pub fold_train_seconds: Vec<f64>,
    pub train_seconds: f64,
    /// Mean nodes per tree, averaged over folds.
    pub mean_nodes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetResult {
    pub name: String,
    pub path: String,
    pub n_rows: usize,
    pub n_features: usize,
    pub num_classes: usize,
    /// Original label strings in class-id order.
    pub class_names: Vec<String>,
    /// One entry per classifier, in report column order.
    pub results: Vec<ClassifierResult>,
    pub ranks: Vec<f64>,
}

impl DatasetResult {
    pub fn result(&self, kind: ClassifierKind) -> Option<&ClassifierResult> {
        self.results.iter().find(|r| r.classifier == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub protocol: Protocol,
    pub classifiers: Vec<ClassifierKind>,
    pub datasets: Vec<DatasetResult>,
    /// Per classifier, mean of the dataset accuracies.
    pub mean_accuracy: Vec<f64>,
    pub mean_ranks: Vec<f64>,
}

impl EvaluationReport {
    pub(crate) fn assemble(protocol: Protocol, classifiers: Vec<ClassifierKind>, datasets: Vec<DatasetResult>) -> Self {
        let mut report = EvaluationReport {
            protocol,
            classifiers,
            datasets,
            mean_accuracy: Vec::new(),
            mean_ranks: Vec::new(),
        };
        report.rerank();
        report
    }

    /// Recomputes per-dataset ranks, mean accuracies and mean ranks from the
    /// stored accuracies.
    pub fn rerank(&mut self) {
        let table: Vec<Vec<f64>> = self
            .datasets
            .iter()
            .map(|d| d.results.iter().map(|r| r.mean_accuracy).collect())
            .collect();
        for (d, row) in self.datasets.iter_mut().zip(&table) {
            d.ranks = rank_row(row);
        }
        let k = self.classifiers.len();
        self.mean_accuracy = (0..k)
            .map(|j| table.iter().map(|r| r[j]).sum::<f64>() / table.len().max(1) as f64)
            .collect();
        self.mean_ranks = mean_ranks(&table);
    }

    pub fn accuracy(&self, dataset: &str, kind: ClassifierKind) -> Option<f64> {
        self.datasets
            .iter()
            .find(|d| d.name == dataset)?
            .result(kind)
            .map(|r| r.mean_accuracy)
    }

    pub fn mean_rank(&self, kind: ClassifierKind) -> Option<f64> {
        let j = self.classifiers.iter().position(|&k| k == kind)?;
        self.mean_ranks.get(j).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Plain-text accuracy, rank, timing and node-count tables.
    pub fn text_table(&self) -> String {
        let mut out = String::new();
        let p = &self.protocol;
        let _ = writeln!(
            out,
            "# {}: {} folds, {} trees, seed {}, scaling {:?}",
            p.description, p.folds, p.n_trees, p.master_seed, p.scale_mode
        );
        let names: Vec<&str> = self.classifiers.iter().map(|k| k.display_name()).collect();
        let width = self
            .datasets
            .iter()
            .map(|d| d.name.len())
            .chain(["Mean Acc.".len()])
            .max()
            .unwrap_or(8)
            + 2;
        let header = |out: &mut String, title: &str| {
            let _ = write!(out, "\n{title}\n{:<width$}", "Dataset");
            for n in &names {
                let _ = write!(out, "{n:>12}");
            }
            out.push('\n');
        };

        header(&mut out, "Accuracy (%)");
        for d in &self.datasets {
            let _ = write!(out, "{:<width$}", d.name);
            for r in &d.results {
                let _ = write!(out, "{:>12.2}", r.mean_accuracy);
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<width$}", "Mean Acc.");
        for a in &self.mean_accuracy {
            let _ = write!(out, "{a:>12.2}");
        }
        out.push('\n');
        let _ = write!(out, "{:<width$}", "Rank");
        for r in &self.mean_ranks {
            let _ = write!(out, "{r:>12.2}");
        }
        out.push('\n');

        header(&mut out, "Training time (s, all folds)");
        for d in &self.datasets {
            let _ = write!(out, "{:<width$}", d.name);
            for r in &d.results {
                let _ = write!(out, "{:>12.2}", r.train_seconds);
            }
            out.push('\n');
        }

        header(&mut out, "Mean nodes per tree");
        for d in &self.datasets {
            let _ = write!(out, "{:<width$}", d.name);
            for r in &d.results {
                let _ = write!(out, "{:>12.2}", r.mean_nodes);
            }
            out.push('\n');
        }
        out
    }
}

/// Writes the JSON report to `path` and the text tables next to it with a
/// `.txt` extension, creating missing directories. Returns the text path.
pub fn emit_report(report: &EvaluationReport, path: impl AsRef<Path>) -> Result<PathBuf> {
    if report.classifiers.is_empty() {
        return Err(Error::Config("report has no classifiers".into()));
    }
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, report.to_json()).map_err(|e| Error::io(path, e))?;
    let text_path = path.with_extension("txt");
    std::fs::write(&text_path, report.text_table()).map_err(|e| Error::io(&text_path, e))?;
    Ok(text_path)
}
