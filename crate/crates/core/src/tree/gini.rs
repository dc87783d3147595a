use crate::error::DataError;

#[inline]
pub(crate) fn impurity(counts: &[usize], total: usize) -> f64 {
    let t = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / t;
            p * p
        })
        .sum::<f64>()
}

/// Gain of a split whose child counts are already known to partition the parent.
#[inline]
pub(crate) fn gain_unchecked(parent: &[usize], left: &[usize], right: &[usize]) -> f64 {
    let n: usize = parent.iter().sum();
    let nl: usize = left.iter().sum();
    let nr = n - nl;
    let nf = n as f64;
    impurity(parent, n) - (nl as f64 / nf * impurity(left, nl) + nr as f64 / nf * impurity(right, nr))
}

/// Gini impurity `1 − Σ (nᵢ/n)²` of a class-count vector.
pub fn gini_impurity(counts: &[usize]) -> Result<f64, DataError> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(DataError::Invalid("gini impurity of an empty node".into()));
    }
    Ok(impurity(counts, total))
}

/// Parent impurity minus the size-weighted impurity of the two children.
pub fn gini_gain(parent: &[usize], left: &[usize], right: &[usize]) -> Result<f64, DataError> {
    if parent.len() != left.len() || parent.len() != right.len() {
        return Err(DataError::DimensionMismatch {
            expected: parent.len(),
            found: left.len().max(right.len()),
        });
    }
    if parent.iter().zip(left.iter().zip(right)).any(|(p, (l, r))| l + r != *p) {
        return Err(DataError::Invalid("child counts do not sum to the parent".into()));
    }
    if left.iter().sum::<usize>() == 0 || right.iter().sum::<usize>() == 0 {
        return Err(DataError::Invalid("split leaves a child empty".into()));
    }
    Ok(gain_unchecked(parent, left, right))
}
