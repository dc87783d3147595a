mod common;

use std::collections::BTreeSet;

use obforest::dataset::{kfold_splits, parse_csv, BagSample, LabelColumn, NormalizationParams};
use obforest::harness::{mean_ranks, rank_row};
use obforest::rvfl::{argmax, top_two};
use obforest::seed::rng_from_seed;
use obforest::tree::{
    bisector_splits, grow_tree, oblique_candidates, sample_features, ObliqueOptions, ProximalPlane, SplitKind,
    TreeNode, TreeParams,
};
use obforest::Dataset;
use proptest::prelude::*;

fn dataset_strategy(max_n: usize, max_d: usize, max_c: usize) -> impl Strategy<Value = Dataset> {
    (2..=max_c, 1..=max_d, 4..=max_n).prop_flat_map(|(c, d, n)| {
        (
            proptest::collection::vec(-20i32..20, n * d),
            proptest::collection::vec(0..c, n),
        )
            .prop_map(move |(x, mut y)| {
                y[0] = 0;
                y[1] = 1;
                let x = x.into_iter().map(|v| v as f64 * 0.25).collect();
                Dataset::new(x, d, y, c).unwrap()
            })
    })
}

fn audit(tree: &obforest::tree::Tree, data: &Dataset, rows: &[usize]) {
    // replay the training rows through the tree
    let mut reach: Vec<Vec<usize>> = vec![Vec::new(); tree.count_nodes()];
    reach[0] = rows.to_vec();
    for id in 0..tree.count_nodes() {
        let here = std::mem::take(&mut reach[id]);
        match &tree.nodes()[id] {
            TreeNode::Split { split, left, right } => {
                let (r, l): (Vec<usize>, Vec<usize>) = here.iter().partition(|&&i| split.goes_right(data.row(i)));
                assert!(!l.is_empty() && !r.is_empty(), "split leaves a child empty");
                let counts = |v: &[usize]| {
                    let mut c = vec![0; data.num_classes()];
                    for &i in v {
                        c[data.label(i)] += 1;
                    }
                    c
                };
                let gain = obforest::tree::gini_gain(&counts(&here), &counts(&l), &counts(&r)).unwrap();
                assert!(gain > 0.0);
                reach[*left] = l;
                reach[*right] = r;
            }
            TreeNode::Leaf { counts } => {
                assert_eq!(counts.iter().sum::<usize>(), here.len());
                for &i in &here {
                    assert!(counts[data.label(i)] > 0);
                }
            }
        }
    }
}

fn has_conflicting_duplicates(data: &Dataset) -> bool {
    for i in 0..data.n_rows() {
        for j in 0..i {
            if data.row(i) == data.row(j) && data.label(i) != data.label(j) {
                return true;
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grown_trees_are_consistent(data in dataset_strategy(40, 3, 4), seed in any::<u64>(), oblique in any::<bool>()) {
        let rows: Vec<usize> = (0..data.n_rows()).collect();
        let kind = if oblique { SplitKind::Oblique } else { SplitKind::AxisParallel };
        let params = TreeParams::new(data.n_features(), kind);
        let t = grow_tree(&data, &rows, &params, &mut rng_from_seed(seed));
        audit(&t, &data, &rows);
        let again = grow_tree(&data, &rows, &params, &mut rng_from_seed(seed));
        prop_assert_eq!(&t, &again);
        if !has_conflicting_duplicates(&data) {
            for node in t.nodes() {
                if let TreeNode::Leaf { counts } = node {
                    prop_assert!(counts.iter().filter(|&&c| c > 0).count() <= 1);
                }
            }
        }
    }

    #[test]
    fn max_depth_is_respected(data in dataset_strategy(40, 3, 4), seed in any::<u64>(), depth in 0usize..4) {
        let rows: Vec<usize> = (0..data.n_rows()).collect();
        let mut params = TreeParams::new(1, SplitKind::Oblique);
        params.max_depth = Some(depth);
        let t = grow_tree(&data, &rows, &params, &mut rng_from_seed(seed));
        prop_assert!(t.depth() <= depth);
        audit(&t, &data, &rows);
    }

    #[test]
    fn selected_oblique_split_is_best_in_pool(data in dataset_strategy(40, 4, 5), seed in any::<u64>()) {
        let rows: Vec<usize> = (0..data.n_rows()).collect();
        let q = data.n_features().min(2);
        let opts = ObliqueOptions::default();
        let features = sample_features(data.n_features(), q, &mut rng_from_seed(seed));
        let pool = oblique_candidates(&data, &rows, &features, &opts).unwrap();
        if let Ok(best) = obforest::tree::best_oblique_split(&data, &rows, q, &opts, &mut rng_from_seed(seed)) {
            for c in &pool {
                prop_assert!(best.gini_gain >= c.gini_gain);
            }
            let recomputed = obforest::tree::gini_gain(
                &data.class_counts(), &best.left_counts, &best.right_counts).unwrap();
            prop_assert_eq!(recomputed, best.gini_gain);
        } else {
            prop_assert!(pool.is_empty());
        }
    }

    #[test]
    fn offset_search_never_loses_gain(data in dataset_strategy(40, 4, 4), seed in any::<u64>()) {
        let rows: Vec<usize> = (0..data.n_rows()).collect();
        let features = sample_features(data.n_features(), data.n_features().min(3), &mut rng_from_seed(seed));
        let fixed = ObliqueOptions::default();
        let searched = ObliqueOptions { offset_search: true, ..fixed };
        let best = |o| oblique_candidates(&data, &rows, &features, &o).unwrap()
            .iter().map(|c| c.gini_gain).fold(0.0, f64::max);
        prop_assert!(best(searched) >= best(fixed) - 1e-12);
    }

    #[test]
    fn bisectors_are_symmetric(w1 in proptest::collection::vec(-5.0f64..5.0, 3),
                               w2 in proptest::collection::vec(-5.0f64..5.0, 3),
                               b1 in -3.0f64..3.0, b2 in -3.0f64..3.0) {
        prop_assume!(w1.iter().any(|v| v.abs() > 1e-3) && w2.iter().any(|v| v.abs() > 1e-3));
        let p1 = ProximalPlane { weights: w1, offset: b1, eigenvalue: 0.0 };
        let p2 = ProximalPlane { weights: w2, offset: b2, eigenvalue: 0.0 };
        let f = [0, 1, 2];
        let (Ok(a), Ok(b)) = (bisector_splits(&p1, &p2, &f), bisector_splits(&p2, &p1, &f)) else {
            return Ok(());
        };
        prop_assert_eq!(a.len(), b.len());
        // each surface of one call appears in the other up to sign
        for s in &a {
            let n: f64 = s.weights.iter().map(|v| v * v).sum::<f64>().sqrt();
            let found = b.iter().any(|t| {
                let m: f64 = t.weights.iter().map(|v| v * v).sum::<f64>().sqrt();
                let same = |sign: f64| s.weights.iter().zip(&t.weights).all(|(x, y)| (x / n - sign * y / m).abs() < 1e-9)
                    && (s.bias / n - sign * t.bias / m).abs() < 1e-9;
                same(1.0) || same(-1.0)
            });
            prop_assert!(found);
        }
    }

    #[test]
    fn normalization_round_trips(data in dataset_strategy(30, 4, 3)) {
        let p = NormalizationParams::fit(&data).unwrap();
        let z = p.apply(&data).unwrap();
        let back = p.invert(&z).unwrap();
        for (a, b) in data.features().iter().zip(back.features()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let n = z.n_rows() as f64;
        for j in 0..z.n_features() {
            let col: Vec<f64> = (0..z.n_rows()).map(|i| z.row(i)[j]).collect();
            let mean = col.iter().sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-9);
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            prop_assert!((var - 1.0).abs() < 1e-9 || var < 1e-20);
        }
    }

    #[test]
    fn bags_and_oob_partition_rows(n in 1usize..200, seed in any::<u64>()) {
        let bag = BagSample::draw(n, &mut rng_from_seed(seed));
        prop_assert_eq!(bag.indices.len(), n);
        let inbag: BTreeSet<usize> = bag.indices.iter().copied().collect();
        prop_assert!(inbag.iter().all(|&i| i < n));
        let oob: BTreeSet<usize> = bag.oob_indices.iter().copied().collect();
        prop_assert!(inbag.is_disjoint(&oob));
        prop_assert_eq!(inbag.len() + oob.len(), n);
    }

    #[test]
    fn folds_are_stratified_partitions(labels in proptest::collection::vec(0usize..3, 12..80), k in 2usize..5, seed in any::<u64>()) {
        let mut labels = labels;
        // every class needs at least k members
        for c in 0..3 {
            labels.extend(std::iter::repeat_n(c, k));
        }
        let folds = kfold_splits(&labels, 3, k, &mut rng_from_seed(seed)).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut seen = vec![0; labels.len()];
        for f in &folds {
            for &i in &f.test {
                seen[i] += 1;
            }
            let test: BTreeSet<usize> = f.test.iter().copied().collect();
            let train: BTreeSet<usize> = f.train.iter().copied().collect();
            prop_assert!(test.is_disjoint(&train));
            prop_assert_eq!(test.len() + train.len(), labels.len());
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
        for c in 0..3 {
            let per: Vec<usize> = folds.iter().map(|f| f.test.iter().filter(|&&i| labels[i] == c).count()).collect();
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
        let sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn ranks_match_counting_oracle(table in proptest::collection::vec(proptest::collection::vec(0u8..6, 4), 1..12)) {
        let table: Vec<Vec<f64>> = table.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect();
        let k = 4.0;
        let mut sums = [0.0; 4];
        for row in &table {
            let ranks = rank_row(row);
            prop_assert!((ranks.iter().sum::<f64>() - k * (k + 1.0) / 2.0).abs() < 1e-12);
            for (j, r) in ranks.iter().enumerate() {
                let better = row.iter().filter(|&&v| v > row[j]).count() as f64;
                let equal = row.iter().filter(|&&v| v == row[j]).count() as f64;
                prop_assert_eq!(*r, better + (equal + 1.0) / 2.0);
                prop_assert!((1.0..=k).contains(r));
                sums[j] += r;
            }
        }
        let m = mean_ranks(&table);
        for j in 0..4 {
            prop_assert!((m[j] - sums[j] / table.len() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn argmax_and_top_two(values in proptest::collection::vec(-3i8..3, 2..8)) {
        let v: Vec<f64> = values.iter().map(|&x| f64::from(x)).collect();
        let a = argmax(&v);
        prop_assert!(v.iter().all(|&x| x <= v[a]));
        prop_assert!(v[..a].iter().all(|&x| x < v[a]));
        let (first, second) = top_two(&v);
        prop_assert_eq!(first, a);
        prop_assert_ne!(first, second);
        prop_assert!(v.iter().enumerate().filter(|&(i, _)| i != first).all(|(_, &x)| x <= v[second]));
    }

    #[test]
    fn csv_round_trip(data in dataset_strategy(20, 3, 3)) {
        let mut text = String::new();
        for i in 0..data.n_rows() {
            let cells: Vec<String> = data.row(i).iter().map(|v| v.to_string()).collect();
            text.push_str(&format!("{},c{}\n", cells.join(","), data.label(i)));
        }
        let back = parse_csv(&text, &LabelColumn::Last).unwrap();
        prop_assert_eq!(back.features(), data.features());
        for i in 0..data.n_rows() {
            prop_assert_eq!(&back.class_names()[back.label(i)], &format!("c{}", data.label(i)));
        }
    }
}
