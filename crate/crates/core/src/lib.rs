//! Random forests with oblique (MPSVM bisector) and axis-parallel splits,
//! an RVFL-routed hybrid of per-class oblique trees, and a cross-validation
//! harness to compare them.
//!
//! ```no_run
//! use obforest::dataset::{load_csv, LabelColumn, NormalizationParams};
//! use obforest::ensemble::{ClassifierKind, ClassifierParams, Model};
//!
//! let raw = load_csv("data/yeast.csv", &LabelColumn::Last)?;
//! let norm = NormalizationParams::fit(&raw)?;
//! let train = norm.apply(&raw)?;
//! let params = ClassifierParams::default().with_trees(50);
//! let model = Model::train(ClassifierKind::Obrafm, &train, norm, &params, 7)?;
//! let label = model.predict(raw.row(0))?;
//! # Ok::<(), obforest::Error>(())
//! ```

pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod rvfl;
pub mod seed;
pub mod tree;

pub use dataset::{Dataset, LabelColumn, NormalizationParams};
pub use ensemble::{ClassifierKind, ClassifierParams, Model, ModelArtifact};
pub use error::{DataError, Error, NumericError, Result};
pub use harness::{run_experiment, EvaluationReport, ExperimentConfig};
