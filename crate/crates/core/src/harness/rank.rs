//! Friedman-style ranking of classifiers by accuracy.

/// Ranks one dataset's accuracies: 1 for the best, ties share the average of
/// the positions they span.
pub fn rank_row(accuracies: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..accuracies.len()).collect();
    order.sort_by(|&a, &b| accuracies[b].total_cmp(&accuracies[a]));
    let mut ranks = vec![0.0; accuracies.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && accuracies[order[end]] == accuracies[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// Mean rank of each classifier (column) over datasets (rows).
pub fn mean_ranks(table: &[Vec<f64>]) -> Vec<f64> {
    let Some(width) = table.first().map(Vec::len) else {
        return Vec::new();
    };
    let mut sums = vec![0.0; width];
    for row in table {
        for (s, r) in sums.iter_mut().zip(rank_row(row)) {
            *s += r;
        }
    }
    sums.into_iter().map(|s| s / table.len() as f64).collect()
}
