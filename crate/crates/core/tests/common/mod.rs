//! Straight-line reference implementations used as test oracles. Nothing
//! here calls into the estimator or the survey loop of the library.
#![allow(dead_code)]

pub const CAP: f64 = 50.0;
pub const EPS: f64 = 1e-6;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn loglik(a: f64, b: f64, x: &[f64], y: &[bool]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        let z = a * x[i] + b;
        // ln σ(z) and ln(1 − σ(z)) written out for large |z|
        let lp = if z > 0.0 {
            -(-z).exp().ln_1p()
        } else {
            z - z.exp().ln_1p()
        };
        let ln = if z > 0.0 {
            -z - (-z).exp().ln_1p()
        } else {
            -z.exp().ln_1p()
        };
        s += if y[i] { lp } else { ln };
    }
    s
}

/// Best intercept for a fixed slope by bisection on the score equation.
fn best_intercept(a: f64, x: &[f64], y: &[bool]) -> f64 {
    let pos = y.iter().filter(|&&v| v).count() as f64;
    let (mut lo, mut hi) = (-500.0, 500.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fitted: f64 = x.iter().map(|&xi| sigmoid(a * xi + mid)).sum();
        if fitted < pos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Logistic fit with |slope| <= CAP: ternary search over the slope on the
/// profile likelihood, which is concave.
pub fn fit(x: &[f64], y: &[bool]) -> (f64, f64) {
    let n = x.len() as f64;
    let pos = y.iter().filter(|&&v| v).count() as f64;
    let spread = x.iter().any(|&v| v != x[0]);
    if pos == 0.0 || pos == n || !spread {
        let r = (pos / n).clamp(EPS, 1.0 - EPS);
        return (0.0, (r / (1.0 - r)).ln());
    }
    let profile = |a: f64| loglik(a, best_intercept(a, x, y), x, y);
    let (mut lo, mut hi) = (-CAP, CAP);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if profile(m1) < profile(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let mut a = 0.5 * (lo + hi);
    for edge in [CAP, -CAP] {
        if profile(edge) > profile(a) {
            a = edge;
        }
    }
    (a, best_intercept(a, x, y))
}

pub fn predict((a, b): (f64, f64), x: f64) -> f64 {
    sigmoid(a * x + b).clamp(EPS, 1.0 - EPS)
}

/// Estimated number of positives; `None` when no positive is confirmed.
pub fn estimate(x: &[f64], labels: &[bool], labeled: &[bool]) -> Option<usize> {
    let n = x.len();
    let mut y: Vec<bool> = (0..n).map(|i| labeled[i] && labels[i]).collect();
    let mut count = y.iter().filter(|&&v| v).count();
    if count == 0 {
        return None;
    }
    if labeled.iter().all(|&l| l) {
        return Some(count);
    }
    for _ in 0..100 {
        let curve = fit(x, &y);
        let mut probs: Vec<(f64, usize)> = (0..n)
            .filter(|&i| !labeled[i])
            .map(|i| (predict(curve, x[i]), i))
            .collect();
        probs.sort_by(|p, q| q.0.partial_cmp(&p.0).unwrap());
        let mut next: Vec<bool> = (0..n).map(|i| labeled[i] && labels[i]).collect();
        let mut sum = 0.0;
        let mut first = 0;
        for k in 0..probs.len() {
            sum += probs[k].0;
            if sum > 1.0 {
                next[probs[first].1] = true;
                sum = 0.0;
                first = k + 1;
            }
        }
        let next_count = next.iter().filter(|&&v| v).count();
        if next_count == count {
            return Some(count);
        }
        y = next;
        count = next_count;
    }
    Some(count)
}

/// Outcome of a surveying run with scores equal to the true labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopPoint {
    pub reads: usize,
    pub found: usize,
    pub stopped_by_rule: bool,
}

/// The survey loop with a perfect ranker and the Target rule, written out
/// step by step.
pub fn survey_perfect_ranker(truth: &[bool], m: usize, target: f64) -> StopPoint {
    let n = truth.len();
    let raw = |i: usize| if truth[i] { 1.0 } else { 0.0 };
    let norm = |pool: &[usize], i: usize| {
        let has_pos = pool.iter().any(|&j| truth[j]);
        let has_neg = pool.iter().any(|&j| !truth[j]);
        if has_pos && has_neg {
            raw(i)
        } else {
            0.5
        }
    };
    // positives first, ties by id
    let mut pool: Vec<usize> = (0..n).filter(|&i| truth[i]).collect();
    pool.extend((0..n).filter(|&i| !truth[i]));

    let mut x = vec![0.0; n];
    let mut labeled = vec![false; n];
    let (mut reads, mut found) = (0, 0);
    loop {
        let take = m.min(pool.len());
        for &i in &pool[..take] {
            x[i] = norm(&pool, i);
            labeled[i] = true;
            reads += 1;
            found += truth[i] as usize;
        }
        pool.drain(..take);
        for &i in &pool {
            x[i] = norm(&pool, i);
        }
        if let Some(total) = estimate(&x, truth, &labeled) {
            if found as f64 >= target * total as f64 {
                return StopPoint {
                    reads,
                    found,
                    stopped_by_rule: true,
                };
            }
        }
        if pool.is_empty() {
            return StopPoint {
                reads,
                found,
                stopped_by_rule: false,
            };
        }
    }
}
