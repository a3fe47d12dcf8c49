//! L2-regularized hinge-loss linear SVM, solved by dual coordinate descent.
//!
//! The bias is learned as the weight of an implicit constant feature equal to
//! one, so it is regularized together with `w`:
//!
//! ```text
//! min  ½(‖w‖² + b²) + C Σ max(0, 1 − yᵢ (w·xᵢ + b))
//! ```

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::check_rows;
use crate::error::{Error, Result};
use crate::seed;
use crate::sparse::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmConfig {
    /// Hinge-loss weight `C`.
    pub c: f64,
    /// Stop once the projected-gradient spread of an epoch drops below this.
    pub tolerance: f64,
    pub max_epochs: usize,
    /// Seeds the per-epoch visiting order.
    pub seed: u64,
}

impl Default for LinearSvmConfig {
    fn default() -> Self {
        LinearSvmConfig {
            c: 1.0,
            tolerance: 1e-4,
            max_epochs: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: LinearSvmConfig,
    pub epochs: usize,
    pub converged: bool,
}

impl LinearModel {
    /// `w·x + b` per row; the SATD side is positive.
    pub fn decision_function(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        x.check_cols(self.weights.len())?;
        Ok((0..x.rows())
            .map(|i| x.dot_row(i, &self.weights) + self.bias)
            .collect())
    }
}

/// Primal objective of a candidate `(w, b)`.
pub fn hinge_objective(w: &[f64], b: f64, x: &FeatureMatrix, y: &[bool], c: f64) -> f64 {
    let reg = 0.5 * (w.iter().map(|v| v * v).sum::<f64>() + b * b);
    let loss: f64 = (0..x.rows())
        .map(|i| {
            let s = if y[i] { 1.0 } else { -1.0 };
            (1.0 - s * (x.dot_row(i, w) + b)).max(0.0)
        })
        .sum();
    reg + c * loss
}

pub fn train_linear_svm(
    x: &FeatureMatrix,
    y: &[bool],
    config: &LinearSvmConfig,
) -> Result<LinearModel> {
    check_rows(x.rows(), y.len())?;
    if config.c.is_nan()
        || config.c <= 0.0
        || config.tolerance.is_nan()
        || config.tolerance <= 0.0
        || config.max_epochs == 0
    {
        return Err(Error::Config(format!("bad svm config {config:?}")));
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(Error::DegenerateTraining);
    }

    let n = x.rows();
    let c = config.c;
    let sign: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let r = x.row_norm(i);
            r * r + 1.0
        })
        .collect();
    let mut alpha = vec![0.0f64; n];
    let mut w = vec![0.0f64; x.cols()];
    let mut b = 0.0f64;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seed::rng(config.seed);

    // Shrinking: a variable at a bound whose gradient points out of the box
    // by more than last epoch's extreme is dropped from the active set.
    // Convergence on the active set is confirmed by a pass over all rows.
    let mut active = n;
    let (mut pg_max_old, mut pg_min_old) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut epochs = 0;
    let mut converged = false;
    while epochs < config.max_epochs {
        epochs += 1;
        order[..active].shuffle(&mut rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        let mut s = 0;
        while s < active {
            let i = order[s];
            let g = sign[i] * (x.dot_row(i, &w) + b) - 1.0;
            let pg = if alpha[i] == 0.0 {
                if g > pg_max_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                }
                g.min(0.0)
            } else if alpha[i] == c {
                if g < pg_min_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                }
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / diag[i]).clamp(0.0, c);
                let step = (alpha[i] - old) * sign[i];
                if step != 0.0 {
                    let (idx, val) = x.row(i);
                    for (&j, &v) in idx.iter().zip(val) {
                        w[j as usize] += step * v;
                    }
                    b += step;
                }
            }
            s += 1;
        }
        if pg_max - pg_min <= config.tolerance {
            if active == n {
                converged = true;
                break;
            }
            active = n;
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
            continue;
        }
        pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
        pg_min_old = if pg_min >= 0.0 {
            f64::NEG_INFINITY
        } else {
            pg_min
        };
    }
    if !converged {
        log::debug!(
            "svm stopped at max_epochs={} before tolerance",
            config.max_epochs
        );
    }
    Ok(LinearModel {
        weights: w,
        bias: b,
        config: *config,
        epochs,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_rows_are_separated() {
        let x = FeatureMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2);
        let m = train_linear_svm(&x, &[true, false], &LinearSvmConfig::default()).unwrap();
        let f = m.decision_function(&x).unwrap();
        assert!(f[0] > 0.0 && f[1] < 0.0, "{f:?}");
    }

    #[test]
    fn single_class_is_degenerate() {
        let x = FeatureMatrix::from_dense(&[vec![1.0], vec![2.0]], 1);
        assert!(matches!(
            train_linear_svm(&x, &[true, true], &LinearSvmConfig::default()),
            Err(Error::DegenerateTraining)
        ));
    }

    #[test]
    fn shape_errors() {
        let x = FeatureMatrix::from_dense(&[vec![1.0], vec![2.0]], 1);
        assert!(matches!(
            train_linear_svm(&x, &[true], &LinearSvmConfig::default()),
            Err(Error::Shape { .. })
        ));
        let m = train_linear_svm(&x, &[true, false], &LinearSvmConfig::default()).unwrap();
        let wide = FeatureMatrix::from_dense(&[vec![1.0, 1.0]], 2);
        assert!(matches!(
            m.decision_function(&wide),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn zero_row_scores_bias_and_is_linear() {
        let x = FeatureMatrix::from_dense(&[vec![1.0, 0.5], vec![-1.0, 0.2], vec![0.8, -0.3]], 2);
        let m = train_linear_svm(&x, &[true, false, true], &LinearSvmConfig::default()).unwrap();
        let probe = FeatureMatrix::from_dense(&[vec![0.0, 0.0], vec![0.3, 0.7], vec![0.6, 1.4]], 2);
        let f = m.decision_function(&probe).unwrap();
        assert_eq!(f[0], m.bias);
        let wx = 0.3 * m.weights[0] + 0.7 * m.weights[1];
        assert!((f[2] - f[1] - wx).abs() < 1e-12);
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()])
            .collect();
        let y: Vec<bool> = rows.iter().map(|r| r[0] + 0.3 * r[1] > 0.0).collect();
        let x = FeatureMatrix::from_dense(&rows, 2);
        let cfg = LinearSvmConfig {
            seed: 42,
            ..Default::default()
        };
        let a = train_linear_svm(&x, &y, &cfg).unwrap();
        let b = train_linear_svm(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
