use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax_votes, check_training_set, ClassifierParams, PartitionMode, Routing};
use crate::dataset::{BagSample, Dataset, NormalizationParams};
use crate::error::{DataError, Result};
use crate::rvfl::{sample_config, top_two, train_rvfl, RvflModel};
use crate::seed::{derive_seed, rng_from_seed};
use crate::tree::{grow_tree, SplitKind, Tree, TreeParams};

/// One RVFL router followed by one oblique tree per class partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridBaseClassifier {
    pub router: RvflModel,
    /// `None` where the partition received no samples.
    pub partition_trees: Vec<Option<Tree>>,
    pub bag_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    pub base_classifiers: Vec<HybridBaseClassifier>,
    pub normalizer: NormalizationParams,
    pub master_seed: u64,
    pub tree_params: TreeParams,
    pub partition: PartitionMode,
    pub routing: Routing,
    pub num_classes: usize,
}

/// Routes every bag sample to the partitions of its two highest-scoring
/// classes. A sample whose true class is not among them also goes to its
/// true-class partition (`Augment`) or only there (`Replace`).
///
/// Returned lists hold dataset row indices; bag duplicates are kept.
pub fn partition_bag(router: &RvflModel, data: &Dataset, bag: &[usize], mode: PartitionMode) -> Vec<Vec<usize>> {
    let mut parts = vec![Vec::new(); data.num_classes()];
    for &i in bag {
        let scores = router.score_unchecked(data.row(i));
        let (first, second) = top_two(&scores);
        let truth = data.label(i);
        let hit = truth == first || truth == second;
        if hit || mode == PartitionMode::Augment {
            parts[first].push(i);
            parts[second].push(i);
        }
        if !hit {
            parts[truth].push(i);
        }
    }
    parts
}

/// Trains `params.n_trees` base classifiers. Each one draws a bag, samples an
/// RVFL configuration, trains the router on the bag and grows an oblique tree
/// on every non-empty partition.
pub fn train_hybrid(
    data: &Dataset,
    normalizer: NormalizationParams,
    params: &ClassifierParams,
    master_seed: u64,
) -> Result<HybridModel> {
    check_training_set(data, &normalizer, params)?;
    let tree_params = params.tree_params(SplitKind::Oblique, data.n_features());
    let n = data.n_rows();
    let base_classifiers = (0..params.n_trees as u64)
        .into_par_iter()
        .map(|t| {
            let bag_seed = derive_seed(master_seed, t);
            let mut rng = rng_from_seed(bag_seed);
            let bag = BagSample::draw(n, &mut rng);
            let config = sample_config(&mut rng);
            let router = train_rvfl(data, &bag.indices, config, &mut rng)?;
            let parts = partition_bag(&router, data, &bag.indices, params.partition);
            let partition_trees = parts
                .par_iter()
                .enumerate()
                .map(|(c, rows)| {
                    (!rows.is_empty()).then(|| {
                        let mut tree_rng = rng_from_seed(derive_seed(bag_seed, c as u64 + 1));
                        grow_tree(data, rows, &tree_params, &mut tree_rng)
                    })
                })
                .collect();
            Ok(HybridBaseClassifier {
                router,
                partition_trees,
                bag_seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HybridModel {
        base_classifiers,
        normalizer,
        master_seed,
        tree_params,
        partition: params.partition,
        routing: params.routing,
        num_classes: data.num_classes(),
    })
}

impl HybridBaseClassifier {
    /// Average class distribution of the trees this sample is routed to; all
    /// zeros when none of them exist.
    pub fn vote(&self, x: &[f64], routing: Routing) -> Vec<f64> {
        let c = self.partition_trees.len();
        let mut acc = vec![0.0; c];
        let trees: Vec<&Tree> = match routing {
            Routing::TopTwo => {
                let (a, b) = top_two(&self.router.score_unchecked(x));
                [a, b]
                    .into_iter()
                    .filter_map(|k| self.partition_trees[k].as_ref())
                    .collect()
            }
            Routing::AllTrees => self.partition_trees.iter().flatten().collect(),
        };
        if trees.is_empty() {
            return acc;
        }
        let w = 1.0 / trees.len() as f64;
        for t in trees {
            t.accumulate_proba(x, w, &mut acc);
        }
        acc
    }
}

impl HybridModel {
    pub fn vote_normalized(&self, x: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.num_classes];
        for base in &self.base_classifiers {
            for (a, v) in acc.iter_mut().zip(base.vote(x, self.routing)) {
                *a += v;
            }
        }
        acc
    }

    pub fn predict_normalized(&self, x: &[f64]) -> usize {
        argmax_votes(&self.vote_normalized(x))
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize, DataError> {
        Ok(self.predict_normalized(&self.normalizer.transform_row(x)?))
    }

    /// Mean node count over every partition tree of every base classifier.
    pub fn mean_nodes(&self) -> f64 {
        let (total, count) = self
            .base_classifiers
            .iter()
            .flat_map(|b| b.partition_trees.iter().flatten())
            .fold((0usize, 0usize), |(s, k), t| (s + t.count_nodes(), k + 1));
        if count == 0 {
            0.0
        } else {
            total as f64 / count as f64
        }
    }
}
