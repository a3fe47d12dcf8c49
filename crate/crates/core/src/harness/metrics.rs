use crate::error::{Error, Result};

/// Percent of all true positives found.
pub fn recall(found_positives: usize, total_positives: usize) -> Result<f64> {
    if total_positives == 0 {
        return Err(Error::UndefinedMetric("recall with no true positives"));
    }
    Ok(100.0 * found_positives as f64 / total_positives as f64)
}

/// Percent of the corpus read.
pub fn cost(reads: usize, corpus_size: usize) -> Result<f64> {
    if corpus_size == 0 {
        return Err(Error::UndefinedMetric("cost of an empty corpus"));
    }
    Ok(100.0 * reads as f64 / corpus_size as f64)
}

/// Percentile `q` in `[0, 100]` with linear interpolation between order
/// statistics. `None` for an empty sample.
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = (q / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

pub fn median(values: &[f64]) -> Option<f64> {
    percentile(values, 50.0)
}

/// 75th minus 25th percentile.
pub fn iqr(values: &[f64]) -> Option<f64> {
    Some(percentile(values, 75.0)? - percentile(values, 25.0)?)
}

/// Percent of an iteration the reader spends waiting on computation:
/// `100 · t / (m · s + t)`.
pub fn overhead_percent(
    iteration_seconds: f64,
    batch_size: usize,
    seconds_per_comment: f64,
) -> f64 {
    let reading = batch_size as f64 * seconds_per_comment;
    let total = reading + iteration_seconds;
    if total <= 0.0 {
        return 0.0;
    }
    100.0 * iteration_seconds / total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recall_and_cost_examples() {
        assert_eq!(recall(286, 286).unwrap(), 100.0);
        assert_eq!(recall(0, 286).unwrap(), 0.0);
        assert!(recall(1, 0).is_err());
        assert!((cost(1227, 7215).unwrap() - 17.0).abs() < 0.01);
        assert_eq!(cost(0, 10).unwrap(), 0.0);
        assert_eq!(cost(10, 10).unwrap(), 100.0);
        assert!(cost(0, 0).is_err());
    }

    #[test]
    fn table_iv_aggregates_from_published_rows() {
        // Target@90 per-project recall and cost as published.
        let recall = [85.0, 89.0, 79.0, 98.0, 78.0, 78.0, 80.0, 61.0, 85.0, 85.0];
        let cost = [21.0, 15.0, 15.0, 16.0, 32.0, 15.0, 32.0, 19.0, 13.0, 17.0];
        assert_eq!(median(&recall).unwrap().round(), 83.0);
        assert_eq!(iqr(&recall).unwrap().round(), 7.0);
        assert_eq!(median(&cost).unwrap(), 16.5);
        assert_eq!(iqr(&cost).unwrap(), 5.5);
    }

    #[test]
    fn percentile_interpolates() {
        assert_eq!(percentile(&[4.0, 1.0, 3.0, 2.0], 50.0), Some(2.5));
        assert_eq!(percentile(&[7.0], 25.0), Some(7.0));
        assert_eq!(percentile(&[], 50.0), None);
        assert_eq!(percentile(&[0.0, 10.0], 25.0), Some(2.5));
    }

    #[test]
    fn overhead_examples() {
        assert!((overhead_percent(30.0, 100, 10.3) - 2.83).abs() < 0.01);
        assert_eq!(overhead_percent(0.0, 100, 10.3), 0.0);
        assert_eq!(overhead_percent(1030.0, 100, 10.3), 50.0);
    }
}
