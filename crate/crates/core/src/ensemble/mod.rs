//! The three ensembles: RaF (axis-parallel forest), obRaF(M) (MPSVM oblique
//! forest) and obRaFL (RVFL-routed oblique trees), plus the model artifact
//! format shared by the CLI and the C ABI.

mod forest;
mod hybrid;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use forest::{train_forest, ForestModel};
pub use hybrid::{partition_bag, train_hybrid, HybridBaseClassifier, HybridModel};

use crate::dataset::{Dataset, NormalizationParams};
use crate::error::{DataError, Error, Result};
use crate::tree::{ObliqueOptions, SplitKind, TreeParams};

/// Default number of trees / base classifiers.
pub const DEFAULT_TREES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Raf,
    Obrafm,
    Obrafl,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Raf, ClassifierKind::Obrafm, ClassifierKind::Obrafl];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Raf => "raf",
            ClassifierKind::Obrafm => "obrafm",
            ClassifierKind::Obrafl => "obrafl",
        }
    }

    /// Label used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierKind::Raf => "RaF",
            ClassifierKind::Obrafm => "obRaF(M)",
            ClassifierKind::Obrafl => "obRaFL",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raf" => Ok(ClassifierKind::Raf),
            "obrafm" | "obraf(m)" => Ok(ClassifierKind::Obrafm),
            "obrafl" => Ok(ClassifierKind::Obrafl),
            other => Err(format!("unknown classifier {other:?} (expected raf, obrafm or obrafl)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForestKind {
    Raf,
    Obrafm,
}

impl ForestKind {
    pub fn split_kind(self) -> SplitKind {
        match self {
            ForestKind::Raf => SplitKind::AxisParallel,
            ForestKind::Obrafm => SplitKind::Oblique,
        }
    }
}

/// Forest aggregation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vote {
    /// Average of leaf class distributions.
    #[default]
    Soft,
    /// One vote per tree for its argmax class.
    Hard,
}

/// What happens to a sample whose true class misses the router's top two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionMode {
    /// Also place it in its true-class partition.
    #[default]
    Augment,
    /// Place it only in its true-class partition.
    Replace,
}

/// Which partition trees a hybrid base classifier consults at test time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routing {
    #[default]
    TopTwo,
    AllTrees,
}

/// Hyperparameters shared by all three classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    /// Features drawn per node; `None` means `round(√d)`.
    pub q: Option<usize>,
    pub top_fraction: f64,
    pub restrict_above: usize,
    pub second_plane: bool,
    pub offset_search: bool,
    pub vote: Vote,
    pub partition: PartitionMode,
    pub routing: Routing,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        let o = ObliqueOptions::default();
        ClassifierParams {
            n_trees: DEFAULT_TREES,
            max_depth: None,
            q: None,
            top_fraction: o.top_fraction,
            restrict_above: o.restrict_above,
            second_plane: o.second_plane,
            offset_search: o.offset_search,
            vote: Vote::Soft,
            partition: PartitionMode::Augment,
            routing: Routing::TopTwo,
        }
    }
}

/// `round(√d)`, at least 1.
pub fn default_q(d: usize) -> usize {
    ((d as f64).sqrt().round() as usize).max(1)
}

impl ClassifierParams {
    pub fn with_trees(mut self, n_trees: usize) -> Self {
        self.n_trees = n_trees;
        self
    }

    pub fn tree_params(&self, split_kind: SplitKind, d: usize) -> TreeParams {
        TreeParams {
            q: self.q.unwrap_or_else(|| default_q(d)).clamp(1, d.max(1)),
            max_depth: self.max_depth,
            split_kind,
            top_fraction: self.top_fraction,
            restrict_above: self.restrict_above,
            second_plane: self.second_plane,
            offset_search: self.offset_search,
            min_samples_split: 2,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("ensemble size must be at least 1".into()));
        }
        if let Some(q) = self.q {
            if q == 0 || q > d {
                return Err(Error::Config(format!("q = {q} outside 1..={d}")));
            }
        }
        if !(self.top_fraction > 0.0 && self.top_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "top fraction {} outside (0, 1]",
                self.top_fraction
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_training_set(
    data: &Dataset,
    normalizer: &NormalizationParams,
    params: &ClassifierParams,
) -> Result<()> {
    params.validate(data.n_features())?;
    if normalizer.dim() != data.n_features() {
        return Err(DataError::DimensionMismatch {
            expected: data.n_features(),
            found: normalizer.dim(),
        }
        .into());
    }
    if data.num_classes() < 2 {
        return Err(DataError::SingleClass.into());
    }
    if data.n_rows() == 0 {
        return Err(DataError::Invalid("empty training set".into()).into());
    }
    Ok(())
}

pub(crate) fn argmax_votes(votes: &[f64]) -> usize {
    crate::rvfl::argmax(votes)
}

/// Any trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Model {
    Forest(ForestModel),
    Hybrid(HybridModel),
}

impl Model {
    /// Trains `kind` on normalized `data`; `normalizer` is stored so that
    /// predictions accept raw features.
    pub fn train(
        kind: ClassifierKind,
        data: &Dataset,
        normalizer: NormalizationParams,
        params: &ClassifierParams,
        master_seed: u64,
    ) -> Result<Model> {
        Ok(match kind {
            ClassifierKind::Raf => Model::Forest(train_forest(data, normalizer, ForestKind::Raf, params, master_seed)?),
            ClassifierKind::Obrafm => {
                Model::Forest(train_forest(data, normalizer, ForestKind::Obrafm, params, master_seed)?)
            }
            ClassifierKind::Obrafl => Model::Hybrid(train_hybrid(data, normalizer, params, master_seed)?),
        })
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Model::Forest(f) => match f.kind {
                ForestKind::Raf => ClassifierKind::Raf,
                ForestKind::Obrafm => ClassifierKind::Obrafm,
            },
            Model::Hybrid(_) => ClassifierKind::Obrafl,
        }
    }

    pub fn normalizer(&self) -> &NormalizationParams {
        match self {
            Model::Forest(f) => &f.normalizer,
            Model::Hybrid(h) => &h.normalizer,
        }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            Model::Forest(f) => f.num_classes,
            Model::Hybrid(h) => h.num_classes,
        }
    }

    pub fn n_features(&self) -> usize {
        self.normalizer().dim()
    }

    pub fn predict_normalized(&self, x: &[f64]) -> usize {
        match self {
            Model::Forest(f) => f.predict_normalized(x),
            Model::Hybrid(h) => h.predict_normalized(x),
        }
    }

    /// Class id for a raw feature vector.
    pub fn predict(&self, x: &[f64]) -> Result<usize, DataError> {
        Ok(self.predict_normalized(&self.normalizer().transform_row(x)?))
    }

    /// Predicts every row of a raw dataset.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<usize>, DataError> {
        let normalized = self.normalizer().apply(data)?;
        Ok(self.predict_normalized_dataset(&normalized))
    }

    /// Predicts every row of an already-normalized dataset.
    pub fn predict_normalized_dataset(&self, data: &Dataset) -> Vec<usize> {
        (0..data.n_rows())
            .into_par_iter()
            .map(|i| self.predict_normalized(data.row(i)))
            .collect()
    }

    /// Mean nodes per tree (per partition tree for the hybrid).
    pub fn mean_nodes(&self) -> f64 {
        match self {
            Model::Forest(f) => f.mean_nodes(),
            Model::Hybrid(h) => h.mean_nodes(),
        }
    }
}

pub const ARTIFACT_FORMAT: &str = "obforest-model";
pub const ARTIFACT_VERSION: u32 = 1;

/// Self-describing serialized model: format tag, class names and the full
/// model (normalizer, seeds, parameters, trees and routers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub version: u32,
    pub class_names: Vec<String>,
    pub feature_names: Option<Vec<String>>,
    pub model: Model,
}

impl ModelArtifact {
    pub fn new(model: Model, class_names: Vec<String>, feature_names: Option<Vec<String>>) -> Self {
        ModelArtifact {
            format: ARTIFACT_FORMAT.to_string(),
            version: ARTIFACT_VERSION,
            class_names,
            feature_names,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialization is infallible")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let artifact: ModelArtifact = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if artifact.format != ARTIFACT_FORMAT {
            return Err(format!("not a model artifact (format {:?})", artifact.format));
        }
        if artifact.version != ARTIFACT_VERSION {
            return Err(format!("unsupported artifact version {}", artifact.version));
        }
        if artifact.class_names.len() != artifact.model.num_classes() {
            return Err(format!(
                "{} class names for a {}-class model",
                artifact.class_names.len(),
                artifact.model.num_classes()
            ));
        }
        Ok(artifact)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|message| Error::Format {
            path: path.to_path_buf(),
            message,
        })
    }
}
