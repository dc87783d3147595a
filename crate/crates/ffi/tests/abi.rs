use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use obforest_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(obf_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn cstr(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

/// Two well separated 2-D classes.
fn arrays() -> (Vec<f64>, Vec<usize>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..20 {
        let t = i as f64 * 0.1;
        x.extend([t, 1.0 + t]);
        y.push(0);
        x.extend([5.0 + t, -t]);
        y.push(1);
    }
    (x, y)
}

fn dataset() -> *mut ObfDataset {
    let (x, y) = arrays();
    let mut out = ptr::null_mut();
    let st = unsafe { obf_dataset_from_arrays(x.as_ptr(), y.as_ptr(), y.len(), 2, 2, &mut out) };
    assert_eq!(st, ObfStatus::Ok, "{}", last_error());
    out
}

fn options(classifier: ObfClassifier) -> ObfTrainOptions {
    ObfTrainOptions {
        classifier,
        n_trees: 5,
        seed: 3,
        ..obf_train_options_default()
    }
}

#[test]
fn train_predict_save_load() {
    let data = dataset();
    let dir = tempfile::tempdir().unwrap();
    unsafe {
        assert_eq!(obf_dataset_n_rows(data), 40);
        assert_eq!(obf_dataset_n_features(data), 2);
        assert_eq!(obf_dataset_num_classes(data), 2);
        for (i, kind) in [ObfClassifier::Raf, ObfClassifier::ObrafM, ObfClassifier::ObrafL]
            .into_iter()
            .enumerate()
        {
            let mut model = ptr::null_mut();
            assert_eq!(obf_model_train(data, &options(kind), &mut model), ObfStatus::Ok);
            assert_eq!(obf_model_n_features(model), 2);
            assert_eq!(obf_model_num_classes(model), 2);
            assert!(obf_model_mean_nodes(model) >= 3.0);
            assert_eq!(CStr::from_ptr(obf_model_class_name(model, 1)).to_str(), Ok("1"));
            assert!(obf_model_class_name(model, 2).is_null());

            let (x, y) = arrays();
            let mut pred = vec![9usize; y.len()];
            assert_eq!(
                obf_model_predict(model, x.as_ptr(), y.len(), 2, pred.as_mut_ptr()),
                ObfStatus::Ok
            );
            assert_eq!(pred, y);

            let path = cstr(&dir.path().join(format!("m{i}.json")));
            assert_eq!(obf_model_save(model, path.as_ptr()), ObfStatus::Ok);
            let mut back = ptr::null_mut();
            assert_eq!(obf_model_load(path.as_ptr(), &mut back), ObfStatus::Ok);
            let mut again = vec![9usize; y.len()];
            assert_eq!(
                obf_model_predict(back, x.as_ptr(), y.len(), 2, again.as_mut_ptr()),
                ObfStatus::Ok
            );
            assert_eq!(again, pred);
            obf_model_free(back);
            obf_model_free(model);
        }
        obf_dataset_free(data);
    }
}

#[test]
fn csv_datasets_and_label_columns() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.csv");
    std::fs::write(&file, "kind,a,b\nx,0,1\ny,5,0\nx,0.1,1.1\ny,5.1,0.2\n").unwrap();
    let path = cstr(&file);
    let label = CString::new("kind").unwrap();
    let mut data = ptr::null_mut();
    unsafe {
        assert_eq!(
            obf_dataset_load_csv(path.as_ptr(), label.as_ptr(), &mut data),
            ObfStatus::Ok
        );
        assert_eq!(obf_dataset_n_features(data), 2);
        let mut model = ptr::null_mut();
        assert_eq!(obf_model_train(data, ptr::null(), &mut model), ObfStatus::Ok);
        assert_eq!(CStr::from_ptr(obf_model_class_name(model, 0)).to_str(), Ok("x"));
        obf_model_free(model);
        obf_dataset_free(data);

        let missing = cstr(&dir.path().join("missing.csv"));
        assert_eq!(
            obf_dataset_load_csv(missing.as_ptr(), ptr::null(), &mut data),
            ObfStatus::Data
        );
        assert!(last_error().contains("missing.csv"));
        let bad_label = CString::new("nope").unwrap();
        assert_eq!(
            obf_dataset_load_csv(path.as_ptr(), bad_label.as_ptr(), &mut data),
            ObfStatus::Data
        );
    }
}

#[test]
fn status_codes_and_errors() {
    let data = dataset();
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            obf_dataset_load_csv(ptr::null(), ptr::null(), &mut out),
            ObfStatus::InvalidArgument
        );
        assert!(last_error().contains("path"));
        assert_eq!(
            obf_dataset_from_arrays(ptr::null(), ptr::null(), 3, 2, 2, &mut out),
            ObfStatus::InvalidArgument
        );
        let x = [1.0, 2.0];
        let y = [0usize, 0];
        assert_eq!(
            obf_dataset_from_arrays(x.as_ptr(), y.as_ptr(), 2, 1, 1, ptr::null_mut()),
            ObfStatus::InvalidArgument
        );
        let nan = [f64::NAN, 1.0];
        let y2 = [0usize, 1];
        assert_eq!(
            obf_dataset_from_arrays(nan.as_ptr(), y2.as_ptr(), 2, 1, 2, &mut out),
            ObfStatus::Data
        );

        let mut model = ptr::null_mut();
        let zero = ObfTrainOptions {
            n_trees: 0,
            ..options(ObfClassifier::Raf)
        };
        assert_eq!(obf_model_train(data, &zero, &mut model), ObfStatus::Config);
        let big_q = ObfTrainOptions {
            q: 3,
            ..options(ObfClassifier::ObrafM)
        };
        assert_eq!(obf_model_train(data, &big_q, &mut model), ObfStatus::Config);
        assert_eq!(
            obf_model_train(ptr::null(), ptr::null(), &mut model),
            ObfStatus::InvalidArgument
        );

        assert_eq!(
            obf_model_train(data, &options(ObfClassifier::Raf), &mut model),
            ObfStatus::Ok
        );
        assert_eq!(last_error(), "");
        let row = [0.0; 3];
        let mut label = 0usize;
        assert_eq!(
            obf_model_predict(model, row.as_ptr(), 1, 3, &mut label),
            ObfStatus::Data
        );
        assert_eq!(
            obf_model_predict(model, row.as_ptr(), 1, 2, ptr::null_mut()),
            ObfStatus::InvalidArgument
        );
        assert_eq!(
            obf_model_predict(model, ptr::null(), 0, 2, ptr::null_mut()),
            ObfStatus::Ok
        );
        let nowhere = CString::new("/nonexistent/dir/m.json").unwrap();
        assert_eq!(obf_model_save(model, nowhere.as_ptr()), ObfStatus::Data);
        obf_model_free(model);

        // null handles are tolerated by accessors and destructors
        assert_eq!(obf_model_n_features(ptr::null()), 0);
        assert!(obf_model_class_name(ptr::null(), 0).is_null());
        obf_model_free(ptr::null_mut());
        obf_dataset_free(ptr::null_mut());
        obf_dataset_free(data);
    }
    let v = unsafe { CStr::from_ptr(obf_version()) };
    assert_eq!(v.to_str(), Ok(env!("CARGO_PKG_VERSION")));
}

#[test]
fn identical_options_give_identical_models() {
    let data = dataset();
    let dir = tempfile::tempdir().unwrap();
    let mut saved = Vec::new();
    unsafe {
        for threads in [1, 2] {
            let opts = ObfTrainOptions {
                threads,
                ..options(ObfClassifier::ObrafL)
            };
            let mut model = ptr::null_mut();
            assert_eq!(obf_model_train(data, &opts, &mut model), ObfStatus::Ok);
            let path = dir.path().join(format!("t{threads}.json"));
            assert_eq!(obf_model_save(model, cstr(&path).as_ptr()), ObfStatus::Ok);
            saved.push(std::fs::read(path).unwrap());
            obf_model_free(model);
        }
        obf_dataset_free(data);
    }
    assert_eq!(saved[0], saved[1]);
}

#[test]
fn header_is_valid_c() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(root.join("include/obforest.h")).unwrap();
    for symbol in [
        "obf_model_train",
        "obf_last_error",
        "OBF_STATUS_NUMERIC",
        "typedef struct ObfModel ObfModel",
    ] {
        assert!(header.contains(symbol), "{symbol}");
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-std=c99", "-I"])
        .arg(root.join("include"))
        .arg(root.join("examples/train_predict.c"))
        .status()
        .expect("a C compiler");
    assert!(status.success());
}
