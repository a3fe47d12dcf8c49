//! Maximum-likelihood logistic curve over a single scalar input.
//!
//! The fit maximizes the Bernoulli log-likelihood over `|slope| <= SLOPE_CAP`.
//! Newton's method finds the interior optimum when one exists; otherwise
//! (perfect separation, or an optimum past the cap) the likelihood profile is
//! monotone across the admissible slopes, so the optimum sits at one of the
//! two capped slopes with its best intercept.

use serde::{Deserialize, Serialize};

use super::check_rows;
use crate::error::{Error, Result};

pub const SLOPE_CAP: f64 = 50.0;
/// Predicted probabilities are clamped to `[PROB_EPS, 1 − PROB_EPS]`.
pub const PROB_EPS: f64 = 1e-6;

const GRAD_TOL: f64 = 1e-6;
const MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticCurve {
    pub slope: f64,
    pub intercept: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

impl LogisticCurve {
    pub fn predict(&self, x: f64) -> f64 {
        sigmoid(self.slope * x + self.intercept).clamp(PROB_EPS, 1.0 - PROB_EPS)
    }

    pub fn log_likelihood(&self, x: &[f64], y: &[bool]) -> f64 {
        log_likelihood(self.slope, self.intercept, x, y)
    }

    /// Gradient of the log-likelihood with respect to (slope, intercept).
    pub fn gradient(&self, x: &[f64], y: &[bool]) -> (f64, f64) {
        x.iter().zip(y).fold((0.0, 0.0), |(ga, gb), (&xi, &yi)| {
            let r = yi as u8 as f64 - sigmoid(self.slope * xi + self.intercept);
            (ga + r * xi, gb + r)
        })
    }
}

fn log_likelihood(a: f64, b: f64, x: &[f64], y: &[bool]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let z = a * xi + b;
            if yi {
                -softplus(-z)
            } else {
                -softplus(z)
            }
        })
        .sum()
}

/// Unconstrained Newton ascent from the origin with step halving. Returns the
/// last iterate while its slope is admissible, converged or not; `None` once
/// the slope runs past the cap or the step fails numerically.
fn newton(x: &[f64], y: &[bool]) -> Option<LogisticCurve> {
    let (mut a, mut b) = (0.0f64, 0.0f64);
    let mut ll = log_likelihood(a, b, x, y);
    for _ in 0..MAX_ITER {
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&xi, &yi) in x.iter().zip(y) {
            let p = sigmoid(a * xi + b);
            let r = yi as u8 as f64 - p;
            let w = p * (1.0 - p);
            ga += r * xi;
            gb += r;
            haa += w * xi * xi;
            hab += w * xi;
            hbb += w;
        }
        if ga.hypot(gb) <= GRAD_TOL {
            break;
        }
        let det = haa * hbb - hab * hab;
        if !det.is_finite() || det <= 0.0 {
            return None;
        }
        let da = (hbb * ga - hab * gb) / det;
        let db = (haa * gb - hab * ga) / det;
        // near the optimum the gain is below the rounding of the sum
        let slack = 1e-12 * ll.abs().max(1.0);
        let mut t = 1.0;
        loop {
            let (na, nb) = (a + t * da, b + t * db);
            let nll = log_likelihood(na, nb, x, y);
            if nll >= ll - slack {
                a = na;
                b = nb;
                ll = nll;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return None;
            }
        }
        if a.abs() > 20.0 * SLOPE_CAP {
            return None;
        }
    }
    (a.abs() <= SLOPE_CAP).then_some(LogisticCurve {
        slope: a,
        intercept: b,
    })
}

/// Best intercept for a fixed slope: the root of `Σ σ(a·x + b) = Σ y`,
/// which is increasing in `b`, found by bracketing and bisection. Newton
/// steps are unusable here once the slope saturates every point.
fn intercept_for(a: f64, x: &[f64], y: &[bool]) -> f64 {
    let target = y.iter().filter(|&&v| v).count() as f64;
    let excess = |b: f64| x.iter().map(|&xi| sigmoid(a * xi + b)).sum::<f64>() - target;
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while excess(lo) > 0.0 && lo > -1e6 {
        lo *= 2.0;
    }
    while excess(hi) < 0.0 && hi < 1e6 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fits `P(y = 1 | x) = σ(slope · x + intercept)`.
///
/// A single-class `y`, or mixed labels over a single distinct `x`, yields a
/// flat curve at the observed rate clamped to `[PROB_EPS, 1 − PROB_EPS]`.
pub fn fit_logistic(x: &[f64], y: &[bool]) -> Result<LogisticCurve> {
    check_rows(x.len(), y.len())?;
    if x.len() < 2 {
        return Err(Error::Contract(
            "logistic fit needs at least two points".into(),
        ));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("logistic input must be finite".into()));
    }
    let pos = y.iter().filter(|&&v| v).count();
    let distinct = x.iter().any(|&v| v != x[0]);
    if pos == 0 || pos == y.len() || !distinct {
        let rate = (pos as f64 / y.len() as f64).clamp(PROB_EPS, 1.0 - PROB_EPS);
        return Ok(LogisticCurve {
            slope: 0.0,
            intercept: logit(rate),
        });
    }
    // Under separation Newton can meet the gradient tolerance at a finite
    // slope while the likelihood still grows towards the cap, and it can
    // stall short of the tolerance; all candidates compete on likelihood.
    let capped = [SLOPE_CAP, -SLOPE_CAP].map(|a| LogisticCurve {
        slope: a,
        intercept: intercept_for(a, x, y),
    });
    let mut best = newton(x, y);
    for c in capped {
        let ll = c.log_likelihood(x, y);
        match best {
            Some(b) if b.log_likelihood(x, y) >= ll => {}
            _ => best = Some(c),
        }
    }
    Ok(best.expect("capped candidates always exist"))
}
