use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax_votes, check_training_set, ClassifierParams, ForestKind, Vote};
use crate::dataset::{BagSample, Dataset, NormalizationParams};
use crate::error::{DataError, Result};
use crate::seed::{derive_seed, rng_from_seed};
use crate::tree::{grow_tree, Tree, TreeParams};

/// Bagged ensemble of axis-parallel (RaF) or MPSVM-oblique (obRaF(M)) trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub kind: ForestKind,
    pub trees: Vec<Tree>,
    pub normalizer: NormalizationParams,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub tree_params: TreeParams,
    pub vote: Vote,
    pub num_classes: usize,
}

/// Trains `params.n_trees` trees on bootstrap bags of already-normalized
/// `data`. Tree `t` is grown from `derive_seed(master_seed, t)` alone, so the
/// result does not depend on thread scheduling.
pub fn train_forest(
    data: &Dataset,
    normalizer: NormalizationParams,
    kind: ForestKind,
    params: &ClassifierParams,
    master_seed: u64,
) -> Result<ForestModel> {
    check_training_set(data, &normalizer, params)?;
    let tree_params = params.tree_params(kind.split_kind(), data.n_features());
    let seeds: Vec<u64> = (0..params.n_trees as u64)
        .map(|t| derive_seed(master_seed, t))
        .collect();
    let n = data.n_rows();
    let trees = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = rng_from_seed(seed);
            let bag = BagSample::draw(n, &mut rng);
            grow_tree(data, &bag.indices, &tree_params, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        kind,
        trees,
        normalizer,
        master_seed,
        seeds,
        tree_params,
        vote: params.vote,
        num_classes: data.num_classes(),
    })
}

impl ForestModel {
    /// Aggregated class distribution for a normalized feature vector.
    pub fn vote_normalized(&self, x: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.num_classes];
        match self.vote {
            Vote::Soft => {
                let w = 1.0 / self.trees.len() as f64;
                for t in &self.trees {
                    t.accumulate_proba(x, w, &mut acc);
                }
            }
            Vote::Hard => {
                for t in &self.trees {
                    acc[t.predict(x)] += 1.0;
                }
            }
        }
        acc
    }

    pub fn predict_normalized(&self, x: &[f64]) -> usize {
        argmax_votes(&self.vote_normalized(x))
    }

    /// Predicts a raw (unnormalized) feature vector.
    pub fn predict(&self, x: &[f64]) -> Result<usize, DataError> {
        Ok(self.predict_normalized(&self.normalizer.transform_row(x)?))
    }

    pub fn mean_nodes(&self) -> f64 {
        self.trees.iter().map(Tree::count_nodes).sum::<usize>() as f64 / self.trees.len() as f64
    }
}
