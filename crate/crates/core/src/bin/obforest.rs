use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use obforest::dataset::{load_csv, load_features, NormalizationParams, ScaleMode};
use obforest::ensemble::{ClassifierKind, Model, ModelArtifact, PartitionMode, Routing, Vote};
use obforest::harness::{
    emit_report, run_experiment, run_in_pool, sweep_parameter, EvaluationReport, ExperimentConfig, ParamOverrides,
    SweepParam,
};
use obforest::{Error, LabelColumn, Result};

#[derive(Parser)]
#[command(name = "obforest", version, about = "Oblique random forests and RVFL-routed hybrids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one classifier on a CSV file and save the model.
    Train {
        /// Training CSV.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "obrafm")]
        classifier: ClassifierKind,
        /// Output model file (JSON).
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Classify the rows of a CSV file with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Features, optionally with a label column.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "last")]
        label: LabelColumn,
        /// Write predicted labels here instead of stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Cross-validated comparison of classifiers on datasets.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Datasets (replace those in the config file).
        #[arg(long, value_delimiter = ',')]
        datasets: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        classifiers: Vec<ClassifierKind>,
        /// JSON report path; a .txt table is written alongside.
        #[arg(long, short, default_value = "report.json")]
        out: PathBuf,
    },
    /// Accuracy as one parameter varies.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        classifier: Option<ClassifierKind>,
        /// max_depth, n_trees or q.
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        /// CSV series path; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Recompute ranks of an existing report and print its tables.
    Rank {
        report: PathBuf,
        /// Rewrite the report (and its .txt table) in place.
        #[arg(long)]
        write: bool,
    },
}

/// Settings shared with the config file; flags win over file values.
#[derive(Args)]
struct CommonArgs {
    /// TOML experiment config.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    label: Option<LabelColumn>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, value_parser = parse_scale)]
    scale: Option<ScaleMode>,
    #[arg(long, value_parser = parse_vote)]
    vote: Option<Vote>,
    #[arg(long, value_parser = parse_partition)]
    partition: Option<PartitionMode>,
    #[arg(long, value_parser = parse_routing)]
    routing: Option<Routing>,
}

fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_scale(s: &str) -> std::result::Result<ScaleMode, String> {
    parse_enum(s)
}

fn parse_vote(s: &str) -> std::result::Result<Vote, String> {
    parse_enum(s)
}

fn parse_partition(s: &str) -> std::result::Result<PartitionMode, String> {
    parse_enum(s)
}

fn parse_routing(s: &str) -> std::result::Result<Routing, String> {
    parse_enum(s)
}

impl CommonArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(l) = &self.label {
            cfg.label_column = l.to_string();
        }
        if let Some(v) = self.trees {
            cfg.n_trees = v;
        }
        if let Some(v) = self.folds {
            cfg.folds = v;
        }
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if let Some(v) = self.threads {
            cfg.threads = v;
        }
        if let Some(v) = self.scale {
            cfg.scale_mode = v;
        }
        // flags also win over per-classifier overrides
        let flags = ParamOverrides {
            max_depth: self.max_depth,
            q: self.q,
            vote: self.vote,
            partition: self.partition,
            routing: self.routing,
            ..Default::default()
        };
        cfg.params.overlay(&flags);
        for o in cfg.overrides.values_mut() {
            o.overlay(&flags);
        }
        Ok(cfg)
    }
}

fn train(data: &Path, kind: ClassifierKind, out: &Path, common: &CommonArgs) -> Result<()> {
    let cfg = common.config()?;
    let raw = load_csv(data, &cfg.label())?;
    let normalizer = NormalizationParams::fit_with(&raw, cfg.scale_mode)?;
    let normalized = normalizer.apply(&raw)?;
    let params = cfg.classifier_params(kind);
    let model = run_in_pool(cfg.threads, || {
        Model::train(kind, &normalized, normalizer, &params, cfg.master_seed)
    })?;
    let artifact = ModelArtifact::new(
        model,
        raw.class_names().to_vec(),
        raw.feature_names().map(<[String]>::to_vec),
    );
    artifact.save(out)?;
    eprintln!(
        "trained {} on {} rows ({} features, {} classes), mean nodes per tree {:.2}",
        kind.display_name(),
        raw.n_rows(),
        raw.n_features(),
        raw.num_classes(),
        artifact.model.mean_nodes()
    );
    Ok(())
}

fn predict(model_path: &Path, data: &Path, label: &LabelColumn, out: Option<&Path>) -> Result<()> {
    let artifact = ModelArtifact::load(model_path)?;
    let table = load_features(data, artifact.model.n_features(), label)?;
    let mut lines = String::new();
    let mut correct = 0usize;
    for (i, row) in table.rows.iter().enumerate() {
        let id = artifact.model.predict(row)?;
        let name = &artifact.class_names[id];
        if let Some(labels) = &table.labels {
            correct += usize::from(&labels[i] == name);
        }
        lines.push_str(name);
        lines.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, lines).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?,
        None => {
            let _ = std::io::stdout().lock().write_all(lines.as_bytes());
        }
    }
    if table.labels.is_some() && !table.rows.is_empty() {
        eprintln!(
            "accuracy {:.2}% ({correct}/{})",
            100.0 * correct as f64 / table.rows.len() as f64,
            table.rows.len()
        );
    }
    Ok(())
}

fn bench(common: &CommonArgs, datasets: &[PathBuf], classifiers: &[ClassifierKind], out: &Path) -> Result<()> {
    let mut cfg = common.config()?;
    if !datasets.is_empty() {
        cfg.datasets = datasets.to_vec();
    }
    if !classifiers.is_empty() {
        cfg.classifiers = classifiers.to_vec();
    }
    let report = run_experiment(&cfg)?;
    let text = emit_report(&report, out)?;
    print!("{}", report.text_table());
    eprintln!("wrote {} and {}", out.display(), text.display());
    Ok(())
}

fn sweep(
    common: &CommonArgs,
    dataset: Option<&Path>,
    classifier: Option<ClassifierKind>,
    param: SweepParam,
    values: &[usize],
    out: Option<&Path>,
) -> Result<()> {
    let mut cfg = common.config()?;
    if let Some(d) = dataset {
        cfg.datasets = vec![d.to_path_buf()];
    }
    if let Some(c) = classifier {
        cfg.classifiers = vec![c];
    }
    let series = sweep_parameter(&cfg, param, values)?;
    let csv = series.to_csv();
    match out {
        Some(path) => std::fs::write(path, csv).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn rank(path: &Path, write: bool) -> Result<()> {
    let mut report = EvaluationReport::read(path)?;
    report.rerank();
    if write {
        emit_report(&report, path)?;
    }
    print!("{}", report.text_table());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            data,
            classifier,
            out,
            common,
        } => train(&data, classifier, &out, &common),
        Command::Predict {
            model,
            data,
            label,
            out,
        } => predict(&model, &data, &label, out.as_deref()),
        Command::Bench {
            common,
            datasets,
            classifiers,
            out,
        } => bench(&common, &datasets, &classifiers, &out),
        Command::Sweep {
            common,
            dataset,
            classifier,
            param,
            values,
            out,
        } => sweep(&common, dataset.as_deref(), classifier, param, &values, out.as_deref()),
        Command::Rank { report, write } => rank(&report, write),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
