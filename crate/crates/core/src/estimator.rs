//! Semi-supervised estimate of how many SATD comments a corpus holds.
//!
//! Unlabeled comments start as negatives. Each round fits a logistic curve of
//! label against ranking score, predicts the unlabeled comments, turns those
//! probabilities into hard labels with [`redistribute`] and refits, until the
//! positive count stops changing.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::fit_logistic;
use crate::seed;

pub const MAX_ROUNDS: usize = 100;

/// Per-comment inputs, indexed by comment id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateInput {
    /// Ranking score in `[0, 1]`.
    pub x: Vec<f64>,
    /// `true` only for comments the reader confirmed as SATD.
    pub labels: Vec<bool>,
    /// Comments the reader has labeled.
    pub labeled: Vec<bool>,
}

impl EstimateInput {
    pub fn new(x: Vec<f64>, labels: Vec<bool>, labeled: Vec<bool>) -> Result<Self> {
        let input = EstimateInput { x, labels, labeled };
        input.validate()?;
        Ok(input)
    }

    fn validate(&self) -> Result<()> {
        for (what, len) in [
            ("labels", self.labels.len()),
            ("labeled mask", self.labeled.len()),
        ] {
            if len != self.x.len() {
                return Err(Error::Shape {
                    what,
                    expected: self.x.len(),
                    actual: len,
                });
            }
        }
        if let Some(i) = (0..self.x.len()).find(|&i| self.labels[i] && !self.labeled[i]) {
            return Err(Error::Contract(format!(
                "comment {i} is marked positive but was never labeled"
            )));
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("scores must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn confirmed_positives(&self) -> usize {
        self.labels.iter().filter(|&&v| v).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub total_positives: usize,
    pub iterations: usize,
    pub converged: bool,
    /// No confirmed positive yet, so there was nothing to fit.
    pub degenerate: bool,
    /// Positive count before the first round, then after each round.
    pub history: Vec<usize>,
    /// Labels the final round was fitted on (by comment id). Starting a new
    /// estimate from them reproduces `total_positives` in one round.
    pub final_labels: Vec<bool>,
}

/// Hard labels for probabilities sorted in descending order.
///
/// The list is cut into consecutive runs: a run ends at the first item that
/// takes its running sum above one, and its first item becomes the only
/// positive of the run. The sum restarts at zero for the next run. A trailing
/// run that never exceeds one stays all negative.
pub fn redistribute(p_sorted: &[f64]) -> Result<Vec<bool>> {
    if let Some(k) = p_sorted.windows(2).position(|w| w[0] < w[1]) {
        return Err(Error::Contract(format!(
            "probabilities are not sorted in descending order at position {}",
            k + 1
        )));
    }
    let mut out = vec![false; p_sorted.len()];
    let mut sum = 0.0;
    let mut run_start = 0;
    for (i, &p) in p_sorted.iter().enumerate() {
        sum += p;
        if sum > 1.0 {
            out[run_start] = true;
            sum = 0.0;
            run_start = i + 1;
        }
    }
    Ok(out)
}

pub fn estimate_total(input: &EstimateInput, seed: u64) -> Result<Estimate> {
    estimate_total_from(input, &input.labels, seed)
}

/// Runs the estimator starting from `start` instead of the confirmed labels.
/// Entries of `start` for labeled comments are ignored in favour of the
/// confirmed labels.
///
/// `seed` shuffles the comments before fitting, which fixes the order of
/// equal probabilities.
pub fn estimate_total_from(input: &EstimateInput, start: &[bool], seed: u64) -> Result<Estimate> {
    input.validate()?;
    if start.len() != input.len() {
        return Err(Error::Shape {
            what: "starting labels",
            expected: input.len(),
            actual: start.len(),
        });
    }
    let confirmed = input.confirmed_positives();
    let mut y: Vec<bool> = (0..input.len())
        .map(|i| {
            if input.labeled[i] {
                input.labels[i]
            } else {
                start[i]
            }
        })
        .collect();
    let count = |y: &[bool]| y.iter().filter(|&&v| v).count();

    if confirmed == 0 {
        return Ok(Estimate {
            total_positives: 0,
            iterations: 0,
            converged: true,
            degenerate: true,
            history: vec![0],
            final_labels: y,
        });
    }

    let mut order: Vec<usize> = (0..input.len()).collect();
    order.shuffle(&mut seed::rng(seed));
    let unlabeled: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| !input.labeled[i])
        .collect();
    let x_fit: Vec<f64> = order.iter().map(|&i| input.x[i]).collect();

    let mut current = count(&y);
    let mut history = vec![current];
    if unlabeled.is_empty() {
        return Ok(Estimate {
            total_positives: current,
            iterations: 1,
            converged: true,
            degenerate: false,
            history: vec![current, current],
            final_labels: y,
        });
    }

    for round in 1..=MAX_ROUNDS {
        let y_fit: Vec<bool> = order.iter().map(|&i| y[i]).collect();
        let curve = fit_logistic(&x_fit, &y_fit)?;
        let mut scored: Vec<(usize, f64)> = unlabeled
            .iter()
            .map(|&i| (i, curve.predict(input.x[i])))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        let probs: Vec<f64> = scored.iter().map(|s| s.1).collect();
        let hard = redistribute(&probs)?;

        let mut next = y.clone();
        for ((i, _), label) in scored.iter().zip(hard) {
            next[*i] = label;
        }
        let next_count = count(&next);
        history.push(next_count);
        if next_count == current {
            return Ok(Estimate {
                total_positives: next_count,
                iterations: round,
                converged: true,
                degenerate: false,
                history,
                final_labels: y,
            });
        }
        y = next;
        current = next_count;
    }
    log::debug!("estimator did not settle within {MAX_ROUNDS} rounds");
    Ok(Estimate {
        total_positives: current,
        iterations: MAX_ROUNDS,
        converged: false,
        degenerate: false,
        history,
        final_labels: y,
    })
}
