use crate::error::{Error, Result};
use crate::scalar::Real;

/// 1-based ranks of `values`, ties sharing the mean of their positions.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their average
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

fn check_lengths<T>(scores: &[T], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    Ok(())
}

/// Area under the ROC curve by the rank-sum identity.
pub fn auroc<T: Real>(scores: &[T], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateLabels);
    }
    let values: Vec<f64> = scores.iter().map(|s| s.as_f64()).collect();
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("NaN score"));
    }
    let ranks = midranks(&values);
    let rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(r, _)| r)
        .sum();
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// F1 of `score ≥ threshold` against `labels`. Zero when there are no true
/// positives.
pub fn f1<T: Real>(scores: &[T], labels: &[bool], threshold: f64) -> Result<f64> {
    check_lengths(scores, labels)?;
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (s, &l) in scores.iter().zip(labels) {
        match (s.as_f64() >= threshold, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * tp as f64 / (2 * tp + fp + fneg) as f64)
}

/// Fraction of positive labels.
pub fn class_imbalance(labels: &[bool]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::invalid("class imbalance of an empty label set"));
    }
    Ok(labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64)
}

/// `min(1, m·p)` for each p.
pub fn bonferroni(p_values: &[f64], m: usize) -> Result<Vec<f64>> {
    if m < p_values.len() {
        return Err(Error::invalid(format!(
            "Bonferroni factor {m} below the number of tests {}",
            p_values.len()
        )));
    }
    Ok(p_values.iter().map(|&p| (p * m as f64).min(1.0)).collect())
}
