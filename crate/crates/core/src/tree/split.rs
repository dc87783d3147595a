//! Split search: exhaustive axis-parallel thresholds and the one-vs-all
//! MPSVM hyperplane pool.

use nalgebra::DMatrix;
use rand::Rng;
use thiserror::Error;

use super::gini::gain_unchecked;
use super::HyperplaneSplit;
use crate::dataset::Dataset;
use crate::error::NumericError;
use crate::numerics::gen_eig_smallest;

/// Bisectors whose weight norm falls below this are treated as missing.
const DEGENERATE_NORM: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplitError {
    #[error("node holds a single class")]
    SingleClass,
    #[error("no split separates the node")]
    NoValidSplit,
    #[error("cannot draw {q} of {d} features")]
    InvalidFeatureCount { q: usize, d: usize },
    #[error("both bisectors are degenerate")]
    DegenerateBisectors,
    #[error("empty sample set")]
    EmptyClass,
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// A scored split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    pub split: HyperplaneSplit,
    pub gini_gain: f64,
    /// Class that was separated from the rest (oblique candidates only).
    pub target_class: Option<usize>,
    pub left_counts: Vec<usize>,
    pub right_counts: Vec<usize>,
}

/// A proximal plane `w·x + offset = 0` in the sampled feature subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximalPlane {
    pub weights: Vec<f64>,
    pub offset: f64,
    pub eigenvalue: f64,
}

impl ProximalPlane {
    /// Splits `z = [w; b]` from the `[A −e]` formulation: the plane is
    /// `w·x − b = 0`.
    fn from_eigen(z: &[f64], eigenvalue: f64) -> Self {
        let (w, b) = z.split_at(z.len() - 1);
        ProximalPlane {
            weights: w.to_vec(),
            offset: -b[0],
            eigenvalue,
        }
    }

    fn normalized(&self) -> Option<(Vec<f64>, f64)> {
        let norm = self.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        (norm > 0.0 && norm.is_finite()).then(|| (self.weights.iter().map(|w| w / norm).collect(), self.offset / norm))
    }
}

/// Options of the one-vs-all MPSVM search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObliqueOptions {
    /// Fraction of the most frequent classes that get a one-vs-all problem.
    pub top_fraction: f64,
    /// The fraction is only applied when more than this many classes are present.
    pub restrict_above: usize,
    /// Use the second (class-swapped) proximal plane and split on bisectors.
    /// When false the first proximal plane itself is the candidate split.
    pub second_plane: bool,
    /// Re-place each candidate hyperplane at the Gini-optimal offset along
    /// its normal instead of keeping the bisector's own offset.
    pub offset_search: bool,
}

impl Default for ObliqueOptions {
    fn default() -> Self {
        ObliqueOptions {
            top_fraction: 0.5,
            restrict_above: 4,
            second_plane: true,
            offset_search: false,
        }
    }
}

/// `q` distinct feature indices out of `d`, ascending.
pub fn sample_features<R: Rng + ?Sized>(d: usize, q: usize, rng: &mut R) -> Vec<usize> {
    let mut f = rand::seq::index::sample(rng, d, q.min(d)).into_vec();
    f.sort_unstable();
    f
}

fn check_q(d: usize, q: usize) -> Result<(), SplitError> {
    if q == 0 || q > d {
        Err(SplitError::InvalidFeatureCount { q, d })
    } else {
        Ok(())
    }
}

fn node_counts(data: &Dataset, rows: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; data.num_classes()];
    for &i in rows {
        counts[data.label(i)] += 1;
    }
    counts
}

/// Classes that receive a one-vs-all problem, most frequent first (ties by
/// lower id). When more than `restrict_above` classes are present only the
/// top `⌈top_fraction·K⌉` are kept.
pub fn candidate_classes(counts: &[usize], opts: &ObliqueOptions) -> Vec<usize> {
    let mut present: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] > 0).collect();
    present.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let k = present.len();
    if k > opts.restrict_above {
        let keep = ((opts.top_fraction * k as f64).ceil() as usize).clamp(1, k);
        present.truncate(keep);
    }
    present
}

/// Accumulates `[x −1]ᵀ[x −1]` over the given rows, restricted to `features`.
fn augmented_scatter<'a>(rows: impl Iterator<Item = &'a [f64]>, features: &[usize]) -> DMatrix<f64> {
    let p = features.len() + 1;
    let mut s = DMatrix::<f64>::zeros(p, p);
    let mut u = vec![0.0; p];
    for x in rows {
        for (k, &f) in features.iter().enumerate() {
            u[k] = x[f];
        }
        u[p - 1] = -1.0;
        for a in 0..p {
            let ua = u[a];
            for b in a..p {
                s[(a, b)] += ua * u[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            s[(a, b)] = s[(b, a)];
        }
    }
    s
}

fn planes_from_scatter(
    s_a: &DMatrix<f64>,
    s_b: &DMatrix<f64>,
    second_plane: bool,
) -> Result<(ProximalPlane, Option<ProximalPlane>), SplitError> {
    let first = gen_eig_smallest(s_a, s_b)?;
    let plane1 = ProximalPlane::from_eigen(first.eigenvector.as_slice(), first.eigenvalue);
    let plane2 = if second_plane {
        let second = gen_eig_smallest(s_b, s_a)?;
        Some(ProximalPlane::from_eigen(
            second.eigenvector.as_slice(),
            second.eigenvalue,
        ))
    } else {
        None
    };
    Ok((plane1, plane2))
}

/// The two MPSVM proximal planes for point sets `A` and `B`: the first is
/// closest to `A` and farthest from `B`, the second the reverse.
pub fn mpsvm_hyperplanes(
    samples_a: &[Vec<f64>],
    samples_b: &[Vec<f64>],
) -> Result<(ProximalPlane, ProximalPlane), SplitError> {
    if samples_a.is_empty() || samples_b.is_empty() {
        return Err(SplitError::EmptyClass);
    }
    let q = samples_a[0].len();
    let features: Vec<usize> = (0..q).collect();
    let s_a = augmented_scatter(samples_a.iter().map(Vec::as_slice), &features);
    let s_b = augmented_scatter(samples_b.iter().map(Vec::as_slice), &features);
    let (p1, p2) = planes_from_scatter(&s_a, &s_b, true)?;
    Ok((p1, p2.expect("second plane requested")))
}

/// Angle bisectors of two planes, each normalized to unit weight norm first:
/// the difference bisector `(ŵ₁ − ŵ₂, b̂₁ − b̂₂)` then the sum bisector
/// `(ŵ₁ + ŵ₂, b̂₁ + b̂₂)`. Degenerate ones (parallel planes) are dropped.
pub fn bisector_splits(
    plane1: &ProximalPlane,
    plane2: &ProximalPlane,
    features: &[usize],
) -> Result<Vec<HyperplaneSplit>, SplitError> {
    let (w1, b1) = plane1.normalized().ok_or(SplitError::DegenerateBisectors)?;
    let (w2, b2) = plane2.normalized().ok_or(SplitError::DegenerateBisectors)?;
    let mut out = Vec::with_capacity(2);
    for sign in [-1.0, 1.0] {
        let w: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + sign * b).collect();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm >= DEGENERATE_NORM {
            out.push(HyperplaneSplit::oblique(features.to_vec(), w, b1 + sign * b2));
        }
    }
    if out.is_empty() {
        return Err(SplitError::DegenerateBisectors);
    }
    Ok(out)
}

fn score_split(
    data: &Dataset,
    rows: &[usize],
    parent: &[usize],
    split: HyperplaneSplit,
    target_class: Option<usize>,
) -> Option<SplitCandidate> {
    let mut left = vec![0; parent.len()];
    let mut right = vec![0; parent.len()];
    for &i in rows {
        let x = data.row(i);
        if split.goes_right(x) {
            right[data.label(i)] += 1;
        } else {
            left[data.label(i)] += 1;
        }
    }
    if left.iter().all(|&c| c == 0) || right.iter().all(|&c| c == 0) {
        return None;
    }
    let gini_gain = gain_unchecked(parent, &left, &right);
    Some(SplitCandidate {
        split,
        gini_gain,
        target_class,
        left_counts: left,
        right_counts: right,
    })
}

/// Keeps the direction of `split` and scans midpoints between consecutive
/// distinct projections `w·x` for the offset with the largest gain.
fn best_offset(
    data: &Dataset,
    rows: &[usize],
    parent: &[usize],
    split: HyperplaneSplit,
    target_class: Option<usize>,
) -> Option<SplitCandidate> {
    let mut pairs: Vec<(f64, usize)> = rows
        .iter()
        .map(|&i| (split.value(data.row(i)) - split.bias, data.label(i)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut left = vec![0; parent.len()];
    let mut right = vec![0; parent.len()];
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    for k in 0..pairs.len().saturating_sub(1) {
        left[pairs[k].1] += 1;
        let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
        if lo >= hi {
            continue;
        }
        for ((r, p), l) in right.iter_mut().zip(parent).zip(&left) {
            *r = p - l;
        }
        let gain = gain_unchecked(parent, &left, &right);
        if best.as_ref().is_none_or(|b| gain > b.0) {
            let mut mid = lo + (hi - lo) / 2.0;
            if mid <= lo {
                mid = hi;
            }
            best = Some((gain, mid, left.clone()));
        }
    }
    let (gini_gain, threshold, left_counts) = best?;
    let right_counts = parent.iter().zip(&left_counts).map(|(p, l)| p - l).collect();
    Some(SplitCandidate {
        split: HyperplaneSplit {
            bias: -threshold,
            ..split
        },
        gini_gain,
        target_class,
        left_counts,
        right_counts,
    })
}

/// Every scored one-vs-all candidate on a fixed feature subset, in
/// evaluation order (class priority, then difference before sum bisector).
/// Classes whose eigenproblems fail or whose splits leave a child empty
/// contribute nothing.
pub fn oblique_candidates(
    data: &Dataset,
    rows: &[usize],
    features: &[usize],
    opts: &ObliqueOptions,
) -> Result<Vec<SplitCandidate>, SplitError> {
    check_q(data.n_features(), features.len())?;
    let parent = node_counts(data, rows);
    if parent.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(SplitError::SingleClass);
    }
    let classes = candidate_classes(&parent, opts);

    let total = augmented_scatter(rows.iter().map(|&i| data.row(i)), features);
    let mut out = Vec::new();
    for c in classes {
        let s_target = augmented_scatter(
            rows.iter().filter(|&&i| data.label(i) == c).map(|&i| data.row(i)),
            features,
        );
        let s_rest = &total - &s_target;
        let Ok((plane1, plane2)) = planes_from_scatter(&s_target, &s_rest, opts.second_plane) else {
            continue;
        };
        let splits = match plane2 {
            Some(plane2) => match bisector_splits(&plane1, &plane2, features) {
                Ok(s) => s,
                Err(_) => continue,
            },
            None => {
                if plane1.weights.iter().all(|&w| w == 0.0) {
                    continue;
                }
                vec![HyperplaneSplit::oblique(
                    features.to_vec(),
                    plane1.weights.clone(),
                    plane1.offset,
                )]
            }
        };
        for split in splits {
            let scored = if opts.offset_search {
                best_offset(data, rows, &parent, split, Some(c))
            } else {
                score_split(data, rows, &parent, split, Some(c))
            };
            if let Some(cand) = scored {
                out.push(cand);
            }
        }
    }
    Ok(out)
}

fn select_best(candidates: Vec<SplitCandidate>) -> Result<SplitCandidate, SplitError> {
    let mut best: Option<SplitCandidate> = None;
    for cand in candidates {
        if best.as_ref().is_none_or(|b| cand.gini_gain > b.gini_gain) {
            best = Some(cand);
        }
    }
    best.ok_or(SplitError::NoValidSplit)
}

/// Oblique split for a node: draws `q` features, builds the MPSVM one-vs-all
/// pool and keeps the candidate with the largest Gini gain. Ties go to the
/// earlier candidate, i.e. the more frequent target class, then the lower
/// class id, then the difference bisector.
pub fn best_oblique_split<R: Rng + ?Sized>(
    data: &Dataset,
    rows: &[usize],
    q: usize,
    opts: &ObliqueOptions,
    rng: &mut R,
) -> Result<SplitCandidate, SplitError> {
    check_q(data.n_features(), q)?;
    let features = sample_features(data.n_features(), q, rng);
    select_best(oblique_candidates(data, rows, &features, opts)?)
}

/// Exhaustive threshold search over the given features. Thresholds are
/// midpoints between consecutive distinct values; ties go to the lower
/// feature index, then the lower threshold.
pub fn axis_split_on(data: &Dataset, rows: &[usize], features: &[usize]) -> Result<SplitCandidate, SplitError> {
    let parent = node_counts(data, rows);
    if parent.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(SplitError::SingleClass);
    }
    let mut sorted_features = features.to_vec();
    sorted_features.sort_unstable();

    let mut best: Option<(f64, usize, f64, Vec<usize>)> = None;
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
    let mut left = vec![0; parent.len()];
    let mut right = vec![0; parent.len()];
    for &f in &sorted_features {
        pairs.clear();
        pairs.extend(rows.iter().map(|&i| (data.row(i)[f], data.label(i))));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        left.iter_mut().for_each(|c| *c = 0);
        for k in 0..pairs.len() - 1 {
            left[pairs[k].1] += 1;
            let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
            if lo >= hi {
                continue;
            }
            for ((r, p), l) in right.iter_mut().zip(&parent).zip(&left) {
                *r = p - l;
            }
            let gain = gain_unchecked(&parent, &left, &right);
            if best.as_ref().is_none_or(|b| gain > b.0) {
                let mut mid = lo + (hi - lo) / 2.0;
                if mid <= lo {
                    mid = hi;
                }
                best = Some((gain, f, mid, left.clone()));
            }
        }
    }
    let (gini_gain, feature, threshold, left_counts) = best.ok_or(SplitError::NoValidSplit)?;
    let right_counts = parent.iter().zip(&left_counts).map(|(p, l)| p - l).collect();
    Ok(SplitCandidate {
        split: HyperplaneSplit::axis(feature, threshold),
        gini_gain,
        target_class: None,
        left_counts,
        right_counts,
    })
}

/// Axis-parallel split over `q` randomly drawn features.
pub fn best_axis_split<R: Rng + ?Sized>(
    data: &Dataset,
    rows: &[usize],
    q: usize,
    rng: &mut R,
) -> Result<SplitCandidate, SplitError> {
    check_q(data.n_features(), q)?;
    let features = sample_features(data.n_features(), q, rng);
    axis_split_on(data, rows, &features)
}
