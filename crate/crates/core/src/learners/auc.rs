use ndarray::Array2;

/// Binary AUC-ROC via the Mann-Whitney rank statistic, ties counting 1/2.
/// Returns `None` when either class is empty.
pub fn auc_binary(scores: &[f64], positive: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), positive.len());
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of (1-based) midranks of the positives, kept doubled so it stays
    // an exact integer.
    let mut doubled_rank_sum: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end, midrank = (start + 1 + end) / 2
        let doubled_midrank = (start + 1 + end) as u64;
        let positives = order[start..end].iter().filter(|&&i| positive[i]).count() as u64;
        doubled_rank_sum += doubled_midrank * positives;
        start = end;
    }
    let n_pos = n_pos as u64;
    let doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    Some(doubled_u as f64 / 2.0 / (n_pos as f64 * n_neg as f64))
}

/// One-vs-rest AUC per class column of `scores`. Classes with no positive
/// or no negative sample yield `None`.
pub fn auc_roc_ovr(scores: &Array2<f64>, labels: &[usize]) -> Vec<Option<f64>> {
    assert_eq!(scores.nrows(), labels.len());
    (0..scores.ncols())
        .map(|c| {
            let column: Vec<f64> = scores.column(c).to_vec();
            let positive: Vec<bool> = labels.iter().map(|&y| y == c).collect();
            auc_binary(&column, &positive)
        })
        .collect()
}
