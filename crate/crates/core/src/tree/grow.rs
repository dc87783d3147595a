use rand::Rng;
use serde::{Deserialize, Serialize};

use super::split::{best_axis_split, best_oblique_split, ObliqueOptions, SplitCandidate};
use super::{SplitKind, Tree, TreeNode};
use crate::dataset::Dataset;

/// Splits with gain at or below this are not worth making.
pub const GAIN_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Features drawn at each node.
    pub q: usize,
    /// `None` grows until no split improves the Gini impurity.
    pub max_depth: Option<usize>,
    pub split_kind: SplitKind,
    pub top_fraction: f64,
    pub restrict_above: usize,
    pub second_plane: bool,
    pub offset_search: bool,
    pub min_samples_split: usize,
}

impl TreeParams {
    pub fn new(q: usize, split_kind: SplitKind) -> Self {
        let defaults = ObliqueOptions::default();
        TreeParams {
            q,
            max_depth: None,
            split_kind,
            top_fraction: defaults.top_fraction,
            restrict_above: defaults.restrict_above,
            second_plane: defaults.second_plane,
            offset_search: defaults.offset_search,
            min_samples_split: 2,
        }
    }

    pub fn oblique_options(&self) -> ObliqueOptions {
        ObliqueOptions {
            top_fraction: self.top_fraction,
            restrict_above: self.restrict_above,
            second_plane: self.second_plane,
            offset_search: self.offset_search,
        }
    }
}

fn find_split<R: Rng + ?Sized>(
    data: &Dataset,
    rows: &[usize],
    params: &TreeParams,
    rng: &mut R,
) -> Option<SplitCandidate> {
    let q = params.q.clamp(1, data.n_features());
    if params.split_kind == SplitKind::Oblique {
        if let Ok(c) = best_oblique_split(data, rows, q, &params.oblique_options(), rng) {
            if c.gini_gain > GAIN_EPSILON {
                return Some(c);
            }
        }
    }
    best_axis_split(data, rows, q, rng)
        .ok()
        .filter(|c| c.gini_gain > GAIN_EPSILON)
}

/// Grows a tree on `rows` of `data` (duplicates allowed, as in a bag).
///
/// A node becomes a leaf when it is pure, reaches `max_depth`, holds fewer
/// than `min_samples_split` rows, or no split gains more than
/// [`GAIN_EPSILON`]. Oblique trees fall back to an axis-parallel search at
/// nodes where the MPSVM pool yields nothing useful.
pub fn grow_tree<R: Rng + ?Sized>(data: &Dataset, rows: &[usize], params: &TreeParams, rng: &mut R) -> Tree {
    let c = data.num_classes();
    let mut nodes = vec![TreeNode::Leaf { counts: vec![0; c] }];
    let mut stack = vec![(0usize, rows.to_vec(), 0usize)];
    while let Some((id, node_rows, depth)) = stack.pop() {
        let mut counts = vec![0; c];
        for &i in &node_rows {
            counts[data.label(i)] += 1;
        }
        let pure = counts.iter().filter(|&&k| k > 0).count() <= 1;
        let depth_capped = params.max_depth.is_some_and(|m| depth >= m);
        let split = if pure || depth_capped || node_rows.len() < params.min_samples_split.max(2) {
            None
        } else {
            find_split(data, &node_rows, params, rng)
        };
        let Some(cand) = split else {
            nodes[id] = TreeNode::Leaf { counts };
            continue;
        };
        let (right_rows, left_rows): (Vec<usize>, Vec<usize>) =
            node_rows.iter().partition(|&&i| cand.split.goes_right(data.row(i)));
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
        let left = nodes.len();
        let right = left + 1;
        nodes.push(TreeNode::Leaf { counts: vec![0; c] });
        nodes.push(TreeNode::Leaf { counts: vec![0; c] });
        nodes[id] = TreeNode::Split {
            split: cand.split,
            left,
            right,
        };
        stack.push((right, right_rows, depth + 1));
        stack.push((left, left_rows, depth + 1));
    }
    Tree::from_nodes(nodes, c)
}
