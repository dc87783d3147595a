//! Decision trees whose internal nodes route on a hyperplane
//! `w·x[subset] + b`: negative goes left, non-negative goes right.
//!
//! Axis-parallel splits are the degenerate hyperplane with a single unit
//! weight and `b = −threshold`, so both tree kinds share one node type.

mod gini;
mod grow;
mod split;

use serde::{Deserialize, Serialize};

pub use gini::{gini_gain, gini_impurity};
pub use grow::{grow_tree, TreeParams, GAIN_EPSILON};
pub use split::{
    axis_split_on, best_axis_split, best_oblique_split, bisector_splits, candidate_classes, mpsvm_hyperplanes,
    oblique_candidates, sample_features, ObliqueOptions, ProximalPlane, SplitCandidate, SplitError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    Oblique,
    AxisParallel,
}

/// Routing rule of an internal node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneSplit {
    pub features: Vec<usize>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub kind: SplitKind,
}

impl HyperplaneSplit {
    /// `x[feature] ≥ threshold` goes right.
    pub fn axis(feature: usize, threshold: f64) -> Self {
        HyperplaneSplit {
            features: vec![feature],
            weights: vec![1.0],
            bias: -threshold,
            kind: SplitKind::AxisParallel,
        }
    }

    pub fn oblique(features: Vec<usize>, weights: Vec<f64>, bias: f64) -> Self {
        HyperplaneSplit {
            features,
            weights,
            bias,
            kind: SplitKind::Oblique,
        }
    }

    /// Threshold of an axis-parallel split.
    pub fn threshold(&self) -> Option<f64> {
        (self.kind == SplitKind::AxisParallel).then_some(-self.bias)
    }

    /// Signed decision value `w·x[subset] + b`.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        self.features
            .iter()
            .zip(&self.weights)
            .map(|(&f, w)| w * x[f])
            .sum::<f64>()
            + self.bias
    }

    #[inline]
    pub fn goes_right(&self, x: &[f64]) -> bool {
        self.value(x) >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        split: HyperplaneSplit,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<usize>,
    },
}

/// A grown tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    num_classes: usize,
}

impl Tree {
    pub(crate) fn from_nodes(nodes: Vec<TreeNode>, num_classes: usize) -> Self {
        debug_assert!(!nodes.is_empty());
        Tree { nodes, num_classes }
    }

    /// A tree consisting of a single leaf.
    pub fn leaf(counts: Vec<usize>) -> Self {
        let num_classes = counts.len();
        Tree {
            nodes: vec![TreeNode::Leaf { counts }],
            num_classes,
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Internal plus leaf nodes.
    pub fn count_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Length of the longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, d)) = stack.pop() {
            best = best.max(d);
            if let TreeNode::Split { left, right, .. } = &self.nodes[id] {
                stack.push((*left, d + 1));
                stack.push((*right, d + 1));
            }
        }
        best
    }

    /// Class counts of the leaf that `x` is routed to.
    pub fn leaf_counts(&self, x: &[f64]) -> &[usize] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                TreeNode::Split { split, left, right } => {
                    id = if split.goes_right(x) { *right } else { *left };
                }
                TreeNode::Leaf { counts } => return counts,
            }
        }
    }

    /// Leaf class distribution normalized to sum to one.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_classes];
        self.accumulate_proba(x, 1.0, &mut out);
        out
    }

    pub(crate) fn accumulate_proba(&self, x: &[f64], weight: f64, acc: &mut [f64]) {
        let counts = self.leaf_counts(x);
        let total: usize = counts.iter().sum();
        if total == 0 {
            return;
        }
        let scale = weight / total as f64;
        for (a, &c) in acc.iter_mut().zip(counts) {
            *a += c as f64 * scale;
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        crate::rvfl::argmax(&self.predict_proba(x))
    }
}
