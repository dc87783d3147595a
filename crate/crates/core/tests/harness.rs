mod common;

use std::path::{Path, PathBuf};

use common::blobs;
use obforest::harness::{emit_report, sweep_parameter, SweepParam};
use obforest::seed::rng_from_seed;
use obforest::{run_experiment, ClassifierKind, DataError, Dataset, Error, EvaluationReport, ExperimentConfig};

fn write_csv(dir: &Path, name: &str, data: &Dataset) -> PathBuf {
    let mut text = String::new();
    for i in 0..data.n_rows() {
        for v in data.row(i) {
            text.push_str(&format!("{v},"));
        }
        text.push_str(&format!("c{}\n", data.label(i)));
    }
    let path = dir.join(format!("{name}.csv"));
    std::fs::write(&path, text).unwrap();
    path
}

fn two_datasets(dir: &Path) -> Vec<PathBuf> {
    let mut rng = rng_from_seed(21);
    vec![
        write_csv(dir, "easy", &blobs(&mut rng, 16, 3, 3, 0.5)),
        write_csv(dir, "hard", &blobs(&mut rng, 16, 4, 4, 2.0)),
    ]
}

fn config(datasets: Vec<PathBuf>) -> ExperimentConfig {
    ExperimentConfig {
        datasets,
        n_trees: 5,
        master_seed: 3,
        ..ExperimentConfig::default()
    }
}

#[test]
fn experiment_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&config(two_datasets(dir.path()))).unwrap();
    assert_eq!(report.classifiers, ClassifierKind::ALL.to_vec());
    assert_eq!(report.datasets.len(), 2);
    assert_eq!(report.protocol.folds, 4);
    assert!(report.protocol.description.contains("4-fold"));
    for d in &report.datasets {
        assert_eq!(d.results.len(), 3);
        assert_eq!(d.class_names, vec!["c0", "c1", "c2", "c3"][..d.num_classes]);
        let rank_sum: f64 = d.ranks.iter().sum();
        assert_eq!(rank_sum, 6.0);
        for r in &d.results {
            assert_eq!(r.fold_accuracies.len(), 4);
            let mean = r.fold_accuracies.iter().sum::<f64>() / 4.0;
            assert!((mean - r.mean_accuracy).abs() < 1e-12);
            assert!((0.0..=100.0).contains(&r.mean_accuracy));
            assert!(r.mean_nodes >= 1.0);
        }
    }
    assert!(report.accuracy("easy", ClassifierKind::Obrafm).unwrap() > 90.0);
    for (k, kind) in report.classifiers.iter().enumerate() {
        let m = report
            .datasets
            .iter()
            .map(|d| d.result(*kind).unwrap().mean_accuracy)
            .sum::<f64>()
            / 2.0;
        assert!((m - report.mean_accuracy[k]).abs() < 1e-12);
        assert_eq!(report.mean_rank(*kind), Some(report.mean_ranks[k]));
    }
}

#[test]
fn experiments_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let paths = two_datasets(dir.path());
    let strip = |mut r: EvaluationReport| {
        for d in &mut r.datasets {
            for c in &mut d.results {
                c.fold_train_seconds.clear();
                c.train_seconds = 0.0;
            }
        }
        r
    };
    let a = strip(run_experiment(&config(paths.clone())).unwrap());
    let threaded = ExperimentConfig {
        threads: 2,
        ..config(paths.clone())
    };
    assert_eq!(a, strip(run_experiment(&threaded).unwrap()));
    let reseeded = ExperimentConfig {
        master_seed: 4,
        ..config(paths)
    };
    assert_ne!(a, strip(run_experiment(&reseeded).unwrap()));
}

#[test]
fn report_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&config(two_datasets(dir.path()))).unwrap();
    let out = dir.path().join("out/report.json");
    let txt = emit_report(&report, &out).unwrap();
    assert_eq!(EvaluationReport::read(&out).unwrap(), report);
    let table = std::fs::read_to_string(txt).unwrap();
    assert_eq!(table, report.text_table());
    for needle in ["easy", "hard", "Mean Acc.", "Rank", "obRaFL", "4 folds"] {
        assert!(table.contains(needle), "{needle} missing from\n{table}");
    }
}

#[test]
fn config_files_resolve_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    two_datasets(dir.path());
    let cfg_path = dir.path().join("exp.toml");
    std::fs::write(
        &cfg_path,
        "datasets = [\"easy.csv\"]\nclassifiers = [\"raf\"]\nn_trees = 3\n\n[params]\nmax_depth = 2\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&cfg_path).unwrap();
    assert_eq!(cfg.datasets, vec![dir.path().join("easy.csv")]);
    assert_eq!(cfg.classifier_params(ClassifierKind::Raf).max_depth, Some(2));
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.datasets[0].results[0].classifier, ClassifierKind::Raf);
    assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn config_errors() {
    assert!(matches!(
        ExperimentConfig::from_toml("bogus = 1"),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        run_experiment(&ExperimentConfig::default()),
        Err(Error::Config(_))
    ));
    let cfg = ExperimentConfig {
        folds: 1,
        ..config(vec!["x.csv".into()])
    };
    assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    let cfg = ExperimentConfig {
        classifiers: vec![ClassifierKind::Raf, ClassifierKind::Raf],
        ..config(vec!["x.csv".into()])
    };
    assert_eq!(run_experiment(&cfg).unwrap_err().exit_code(), 1);
}

#[test]
fn dataset_errors_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let err = run_experiment(&config(vec![missing])).unwrap_err();
    assert!(err.to_string().contains("missing.csv"), "{err}");

    let tiny = dir.path().join("tiny.csv");
    std::fs::write(&tiny, "0,a\n1,a\n2,a\n3,a\n4,b\n5,b\n").unwrap();
    let err = run_experiment(&config(vec![tiny])).unwrap_err();
    assert!(err.to_string().contains("tiny.csv"), "{err}");
    assert_eq!(err.exit_code(), 2);
    match err {
        Error::Dataset { source, .. } => {
            assert!(matches!(
                *source,
                Error::Data(DataError::Stratification { count: 2, folds: 4, .. })
            ))
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let paths = two_datasets(dir.path());
    let cfg = ExperimentConfig {
        classifiers: vec![ClassifierKind::Obrafm],
        ..config(vec![paths[1].clone()])
    };
    let s = sweep_parameter(&cfg, SweepParam::Q, &[1, 4]).unwrap();
    assert_eq!(s.points.iter().map(|p| p.value).collect::<Vec<_>>(), vec![1, 4]);
    assert_eq!(s.dataset, "hard");
    let csv = s.to_csv();
    assert!(csv.starts_with("q,accuracy\n1,"));
    assert_eq!(csv.lines().count(), 3);

    let depth = sweep_parameter(&cfg, SweepParam::MaxDepth, &[0]).unwrap();
    assert!(depth.points[0].accuracy <= 40.0);

    assert!(sweep_parameter(&cfg, SweepParam::Q, &[5]).is_err());
    assert!(sweep_parameter(&cfg, SweepParam::Trees, &[0]).is_err());
    assert!(sweep_parameter(&cfg, SweepParam::Trees, &[]).is_err());
    assert!(sweep_parameter(&config(paths), SweepParam::Trees, &[2]).is_err());
    assert_eq!("depth".parse::<SweepParam>().unwrap(), SweepParam::MaxDepth);
}
