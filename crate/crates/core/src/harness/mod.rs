//! Cross-validated benchmark runs, parameter sweeps and reports.

mod rank;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use rank::{mean_ranks, rank_row};
pub use report::{emit_report, ClassifierResult, DatasetResult, EvaluationReport, Protocol};

use crate::dataset::{kfold_splits, load_csv, Dataset, LabelColumn, NormalizationParams, ScaleMode};
use crate::ensemble::{ClassifierKind, ClassifierParams, Model, PartitionMode, Routing, Vote, DEFAULT_TREES};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

pub const DEFAULT_FOLDS: usize = 4;

/// Optional overrides of [`ClassifierParams`]; unset fields keep the value
/// underneath.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamOverrides {
    pub max_depth: Option<usize>,
    pub q: Option<usize>,
    pub top_fraction: Option<f64>,
    pub restrict_above: Option<usize>,
    pub second_plane: Option<bool>,
    pub offset_search: Option<bool>,
    pub vote: Option<Vote>,
    pub partition: Option<PartitionMode>,
    pub routing: Option<Routing>,
}

impl ParamOverrides {
    /// Replaces fields that are set in `top`.
    pub fn overlay(&mut self, top: &ParamOverrides) {
        self.max_depth = top.max_depth.or(self.max_depth);
        self.q = top.q.or(self.q);
        self.top_fraction = top.top_fraction.or(self.top_fraction);
        self.restrict_above = top.restrict_above.or(self.restrict_above);
        self.second_plane = top.second_plane.or(self.second_plane);
        self.offset_search = top.offset_search.or(self.offset_search);
        self.vote = top.vote.or(self.vote);
        self.partition = top.partition.or(self.partition);
        self.routing = top.routing.or(self.routing);
    }

    pub fn apply(&self, p: &mut ClassifierParams) {
        if let Some(v) = self.max_depth {
            p.max_depth = Some(v);
        }
        if let Some(v) = self.q {
            p.q = Some(v);
        }
        if let Some(v) = self.top_fraction {
            p.top_fraction = v;
        }
        if let Some(v) = self.restrict_above {
            p.restrict_above = v;
        }
        if let Some(v) = self.second_plane {
            p.second_plane = v;
        }
        if let Some(v) = self.offset_search {
            p.offset_search = v;
        }
        if let Some(v) = self.vote {
            p.vote = v;
        }
        if let Some(v) = self.partition {
            p.partition = v;
        }
        if let Some(v) = self.routing {
            p.routing = v;
        }
    }
}

/// Benchmark configuration, usually read from a TOML file.
///
/// ```toml
/// datasets = ["data/yeast.csv"]
/// classifiers = ["raf", "obrafm", "obrafl"]
/// n_trees = 50
/// folds = 4
/// master_seed = 7
///
/// [params]
/// max_depth = 6
///
/// [overrides.obrafl]
/// partition = "replace"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<PathBuf>,
    /// `last`, a 0-based column index, or a header name.
    pub label_column: String,
    pub classifiers: Vec<ClassifierKind>,
    pub n_trees: usize,
    pub folds: usize,
    pub master_seed: u64,
    pub scale_mode: ScaleMode,
    /// Worker threads; 0 uses the global rayon pool.
    pub threads: usize,
    /// Applied to every classifier.
    pub params: ParamOverrides,
    /// Applied after `params`, keyed by classifier name.
    pub overrides: BTreeMap<ClassifierKind, ParamOverrides>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            datasets: Vec::new(),
            label_column: "last".into(),
            classifiers: ClassifierKind::ALL.to_vec(),
            n_trees: DEFAULT_TREES,
            folds: DEFAULT_FOLDS,
            master_seed: 0,
            scale_mode: ScaleMode::StdDev,
            threads: 0,
            params: ParamOverrides::default(),
            overrides: BTreeMap::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML file; relative dataset paths resolve against the file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(dir) = path.parent() {
            for d in &mut cfg.datasets {
                if d.is_relative() {
                    *d = dir.join(&*d);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization is infallible")
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("at least one dataset is required".into()));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("at least one classifier is required".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        let mut seen = self.classifiers.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.classifiers.len() {
            return Err(Error::Config("classifier listed twice".into()));
        }
        Ok(())
    }

    pub fn label(&self) -> LabelColumn {
        match self.label_column.parse() {
            Ok(l) => l,
            Err(never) => match never {},
        }
    }

    /// Effective parameters for `kind`.
    pub fn classifier_params(&self, kind: ClassifierKind) -> ClassifierParams {
        let mut p = ClassifierParams::default().with_trees(self.n_trees);
        self.params.apply(&mut p);
        if let Some(o) = self.overrides.get(&kind) {
            o.apply(&mut p);
        }
        p
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is 0.
pub fn run_in_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if threads == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?
        .install(f)
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_named(path: &Path, label: &LabelColumn) -> Result<Dataset> {
    load_csv(path, label).map_err(|e| Error::Dataset {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

/// Trains one model and times the training call alone.
pub fn measure_training(
    kind: ClassifierKind,
    train: &Dataset,
    normalizer: NormalizationParams,
    params: &ClassifierParams,
    seed: u64,
) -> Result<(Model, f64, f64)> {
    let start = Instant::now();
    let model = Model::train(kind, train, normalizer, params, seed)?;
    let seconds = start.elapsed().as_secs_f64();
    let nodes = model.mean_nodes();
    Ok((model, seconds, nodes))
}

/// Percentage of `predicted` equal to the labels of `data`.
pub fn accuracy_percent(predicted: &[usize], data: &Dataset) -> f64 {
    if predicted.is_empty() {
        return 0.0;
    }
    let correct = predicted.iter().zip(data.labels()).filter(|(p, l)| p == l).count();
    100.0 * correct as f64 / predicted.len() as f64
}

struct FoldData {
    train: Dataset,
    test: Dataset,
    normalizer: NormalizationParams,
    seed: u64,
}

/// Splits `data` into normalized CV folds. The normalizer is fit on each
/// training fold only.
fn prepare_folds(data: &Dataset, folds: usize, scale_mode: ScaleMode, dataset_seed: u64) -> Result<Vec<FoldData>> {
    let mut rng = rng_from_seed(derive_seed(dataset_seed, 0));
    let splits = kfold_splits(data.labels(), data.num_classes(), folds, &mut rng)?;
    splits
        .iter()
        .enumerate()
        .map(|(f, split)| {
            let train_raw = data.subset(&split.train);
            let test_raw = data.subset(&split.test);
            let normalizer = NormalizationParams::fit_with(&train_raw, scale_mode)?;
            Ok(FoldData {
                train: normalizer.apply(&train_raw)?,
                test: normalizer.apply(&test_raw)?,
                normalizer,
                seed: derive_seed(dataset_seed, f as u64 + 1),
            })
        })
        .collect()
}

fn evaluate_folds(kind: ClassifierKind, folds: &[FoldData], params: &ClassifierParams) -> Result<ClassifierResult> {
    let mut fold_accuracies = Vec::with_capacity(folds.len());
    let mut fold_train_seconds = Vec::with_capacity(folds.len());
    let mut nodes = 0.0;
    for fold in folds {
        let (model, seconds, mean_nodes) =
            measure_training(kind, &fold.train, fold.normalizer.clone(), params, fold.seed)?;
        let predicted = model.predict_normalized_dataset(&fold.test);
        fold_accuracies.push(accuracy_percent(&predicted, &fold.test));
        fold_train_seconds.push(seconds);
        nodes += mean_nodes;
    }
    let k = folds.len() as f64;
    Ok(ClassifierResult {
        classifier: kind,
        mean_accuracy: fold_accuracies.iter().sum::<f64>() / k,
        fold_accuracies,
        train_seconds: fold_train_seconds.iter().sum(),
        fold_train_seconds,
        mean_nodes: nodes / k,
    })
}

fn protocol(config: &ExperimentConfig) -> Protocol {
    Protocol {
        description: format!("stratified {}-fold cross-validation", config.folds),
        folds: config.folds,
        n_trees: config.n_trees,
        master_seed: config.master_seed,
        scale_mode: config.scale_mode,
    }
}

/// Runs every classifier on every dataset under stratified k-fold CV.
///
/// Fold assignment and training seeds derive from `master_seed` and the
/// dataset's position in the config, so all classifiers see the same folds.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EvaluationReport> {
    config.validate()?;
    let label = config.label();
    run_in_pool(config.threads, || {
        let mut datasets = Vec::with_capacity(config.datasets.len());
        for (di, path) in config.datasets.iter().enumerate() {
            let data = load_named(path, &label)?;
            let dataset_seed = derive_seed(config.master_seed, di as u64);
            let folds =
                prepare_folds(&data, config.folds, config.scale_mode, dataset_seed).map_err(|e| Error::Dataset {
                    path: path.clone(),
                    source: Box::new(e),
                })?;
            let mut results = Vec::with_capacity(config.classifiers.len());
            for &kind in &config.classifiers {
                results.push(evaluate_folds(kind, &folds, &config.classifier_params(kind))?);
            }
            datasets.push(DatasetResult {
                name: dataset_name(path),
                path: path.display().to_string(),
                n_rows: data.n_rows(),
                n_features: data.n_features(),
                num_classes: data.num_classes(),
                class_names: data.class_names().to_vec(),
                results,
                ranks: Vec::new(),
            });
        }
        Ok(EvaluationReport::assemble(
            protocol(config),
            config.classifiers.clone(),
            datasets,
        ))
    })
}

/// Parameter varied by [`sweep_parameter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    MaxDepth,
    Trees,
    Q,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::MaxDepth => "max_depth",
            SweepParam::Trees => "n_trees",
            SweepParam::Q => "q",
        })
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max_depth" | "depth" => Ok(SweepParam::MaxDepth),
            "n_trees" | "trees" | "t" => Ok(SweepParam::Trees),
            "q" => Ok(SweepParam::Q),
            other => Err(format!(
                "unknown sweep parameter {other:?} (expected max_depth, n_trees or q)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: usize,
    pub accuracy: f64,
    pub fold_accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub dataset: String,
    pub classifier: ClassifierKind,
    pub parameter: SweepParam,
    pub protocol: Protocol,
    pub points: Vec<SweepPoint>,
}

impl SweepSeries {
    /// Two-column CSV, `value,accuracy`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},accuracy\n", self.parameter);
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.value, p.accuracy));
        }
        out
    }
}

/// Evaluates one classifier on one dataset for each value of `parameter`.
/// Folds and seeds are identical across values.
pub fn sweep_parameter(config: &ExperimentConfig, parameter: SweepParam, values: &[usize]) -> Result<SweepSeries> {
    config.validate()?;
    if config.datasets.len() != 1 || config.classifiers.len() != 1 {
        return Err(Error::Config(
            "a sweep needs exactly one dataset and one classifier".into(),
        ));
    }
    if values.is_empty() {
        return Err(Error::Config("a sweep needs at least one value".into()));
    }
    let path = &config.datasets[0];
    let kind = config.classifiers[0];
    let data = load_named(path, &config.label())?;
    let d = data.n_features();
    for &v in values {
        let ok = match parameter {
            SweepParam::MaxDepth => true,
            SweepParam::Trees => v >= 1,
            SweepParam::Q => (1..=d).contains(&v),
        };
        if !ok {
            return Err(Error::Config(format!("{parameter} = {v} is out of range")));
        }
    }
    run_in_pool(config.threads, || {
        let folds = prepare_folds(
            &data,
            config.folds,
            config.scale_mode,
            derive_seed(config.master_seed, 0),
        )?;
        let base = config.classifier_params(kind);
        let mut points = Vec::with_capacity(values.len());
        for &v in values {
            let mut params = base.clone();
            match parameter {
                SweepParam::MaxDepth => params.max_depth = Some(v),
                SweepParam::Trees => params.n_trees = v,
                SweepParam::Q => params.q = Some(v),
            }
            let r = evaluate_folds(kind, &folds, &params)?;
            points.push(SweepPoint {
                value: v,
                accuracy: r.mean_accuracy,
                fold_accuracies: r.fold_accuracies,
            });
        }
        Ok(SweepSeries {
            dataset: dataset_name(path),
            classifier: kind,
            parameter,
            protocol: protocol(config),
            points,
        })
    })
}
