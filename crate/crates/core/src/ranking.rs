//! Sort orders over the unlabeled pool and the `[0, 1]` scores derived from
//! them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{LinearModel, TreeEnsemble};
use crate::sparse::FeatureMatrix;

/// Unlabeled comment ids in descending order of interest, each with its
/// pool-normalized score.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Ranking {
    pub ids: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Min-max scaling to `[0, 1]`; a constant input maps to 0.5 everywhere.
pub fn normalize(raw: &[f64]) -> Vec<f64> {
    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let spread = hi - lo;
    if spread.is_nan() || spread <= 0.0 {
        return vec![0.5; raw.len()];
    }
    raw.iter()
        .map(|&v| ((v - lo) / spread).clamp(0.0, 1.0))
        .collect()
}

impl Ranking {
    /// Orders `ids` by descending raw score; equal scores keep input order.
    pub fn from_raw(ids: &[usize], raw: &[f64]) -> Result<Self> {
        if ids.len() != raw.len() {
            return Err(Error::Shape {
                what: "raw scores",
                expected: ids.len(),
                actual: raw.len(),
            });
        }
        let norm = normalize(raw);
        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
        Ok(Ranking {
            ids: order.iter().map(|&k| ids[k]).collect(),
            scores: order.iter().map(|&k| norm[k]).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.ids.iter().copied().zip(self.scores.iter().copied())
    }
}

/// Distance from the SVM boundary, SATD side first. `pool` row `i` belongs to
/// `ids[i]`.
pub fn rank_by_svm(model: &LinearModel, pool: &FeatureMatrix, ids: &[usize]) -> Result<Ranking> {
    Ranking::from_raw(ids, &model.decision_function(pool)?)
}

/// Number of trees voting SATD, most votes first.
pub fn rank_by_votes(ens: &TreeEnsemble, pool: &FeatureMatrix, ids: &[usize]) -> Result<Ranking> {
    let votes: Vec<f64> = ens.votes(pool)?.into_iter().map(f64::from).collect();
    Ranking::from_raw(ids, &votes)
}
