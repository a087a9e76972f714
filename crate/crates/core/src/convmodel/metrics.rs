use super::ModelError;

/// Area under the ROC curve as the Mann–Whitney rank statistic: the
/// probability that a random positive outscores a random negative, with ties
/// counted as one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64, ModelError> {
    if scores.len() != labels.len() {
        return Err(ModelError::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(ModelError::NanScore);
    }
    let n_pos = labels.iter().filter(|l| **l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(ModelError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of (1-based, tie-averaged) ranks of the positives.
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        let pos_in_group = order[start..end].iter().filter(|&&i| labels[i]).count();
        rank_sum += avg_rank * pos_in_group as f64;
        start = end;
    }
    let n_pos = n_pos as f64;
    Ok((rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_inverted_ranking() {
        let scores = [0.1, 0.2, 0.8, 0.9];
        assert_eq!(auc(&scores, &[false, false, true, true]).unwrap(), 1.0);
        assert_eq!(auc(&scores, &[true, true, false, false]).unwrap(), 0.0);
    }

    #[test]
    fn ties_count_half() {
        assert_eq!(auc(&[0.5, 0.5], &[true, false]).unwrap(), 0.5);
        // pos {0.5, 0.9}, neg {0.5, 0.1}: pairs 0.5 + 1 + 1 + 1 = 3.5 of 4
        assert_eq!(auc(&[0.5, 0.9, 0.5, 0.1], &[true, true, false, false]).unwrap(), 0.875);
    }

    #[test]
    fn errors() {
        assert!(matches!(auc(&[0.1, 0.2], &[true, true]), Err(ModelError::SingleClass)));
        assert!(matches!(auc(&[0.1], &[true, false]), Err(ModelError::LengthMismatch { .. })));
        assert!(matches!(auc(&[f64::NAN, 0.2], &[true, false]), Err(ModelError::NanScore)));
    }
}
