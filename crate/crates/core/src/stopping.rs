//! When to stop reading.
//!
//! * [`target_rule`]: stop once confirmed positives reach a fraction of the
//!   estimated total.
//! * [`ros_rule`]: stop after a streak of consecutive negatives.
//! * [`cormack_rule`]: stop when the retrieval curve's slope before its knee
//!   is more than `rho` times the slope after it; the knee comes from
//!   [`kneedle`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::Estimate;

/// `(reads, found)` after every labeled comment.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RetrievalCurve {
    points: Vec<(usize, usize)>,
}

impl RetrievalCurve {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_labels(labels: impl IntoIterator<Item = bool>) -> Self {
        let mut c = Self::new();
        labels.into_iter().for_each(|l| c.push(l));
        c
    }

    pub fn push(&mut self, positive: bool) {
        let (reads, found) = self.last();
        self.points.push((reads + 1, found + positive as usize));
    }

    /// The last point, or `(0, 0)` before any read.
    pub fn last(&self) -> (usize, usize) {
        self.points.last().copied().unwrap_or((0, 0))
    }

    pub fn reads(&self) -> usize {
        self.last().0
    }

    pub fn found(&self) -> usize {
        self.last().1
    }

    pub fn points(&self) -> &[(usize, usize)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The label sequence the curve was built from.
    pub fn labels(&self) -> impl Iterator<Item = bool> + '_ {
        let mut prev = 0;
        self.points.iter().map(move |&(_, f)| {
            let hit = f > prev;
            prev = f;
            hit
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StopRule {
    /// Target@X with X as a fraction in (0, 1].
    Target {
        fraction: f64,
    },
    Ros {
        streak: usize,
    },
    Cormack {
        rho: f64,
    },
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::Target { fraction: 0.9 }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            StopRule::Target { fraction } => fraction > 0.0 && fraction <= 1.0,
            StopRule::Ros { streak } => streak > 0,
            StopRule::Cormack { rho } => rho > 0.0 && rho.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid stopping rule {self}")))
        }
    }
}

impl FromStr for StopRule {
    type Err = Error;

    /// `target@0.9`, `ros:10` or `cormack:12`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || Error::Config(format!("unknown stopping rule `{s}`"));
        let rule = if let Some(v) = s.strip_prefix("target@") {
            let mut fraction: f64 = v.parse().map_err(|_| bad())?;
            if fraction > 1.0 {
                fraction /= 100.0;
            }
            StopRule::Target { fraction }
        } else if let Some(v) = s.strip_prefix("ros:") {
            StopRule::Ros {
                streak: v.parse().map_err(|_| bad())?,
            }
        } else if let Some(v) = s.strip_prefix("cormack:") {
            StopRule::Cormack {
                rho: v.parse().map_err(|_| bad())?,
            }
        } else {
            return Err(bad());
        };
        rule.validate()?;
        Ok(rule)
    }
}

impl fmt::Display for StopRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopRule::Target { fraction } => write!(f, "target@{fraction}"),
            StopRule::Ros { streak } => write!(f, "ros:{streak}"),
            StopRule::Cormack { rho } => write!(f, "cormack:{rho}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum Detail {
    Target {
        found: usize,
        estimate: usize,
        fraction: f64,
        degenerate: bool,
    },
    Ros {
        streak: usize,
        needed: usize,
    },
    Cormack {
        knee: Option<usize>,
        ratio: Option<f64>,
        rho: f64,
    },
    /// Stopped by the reader.
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingDecision {
    pub stop: bool,
    pub detail: Detail,
}

impl StoppingDecision {
    pub fn rule_name(&self) -> &'static str {
        match self.detail {
            Detail::Target { .. } => "target",
            Detail::Ros { .. } => "ros",
            Detail::Cormack { .. } => "cormack",
            Detail::Manual => "manual",
        }
    }

    pub fn manual() -> Self {
        StoppingDecision {
            stop: true,
            detail: Detail::Manual,
        }
    }
}

/// Stop iff `found >= fraction · estimate`. A degenerate estimate never stops.
pub fn target_rule(found: usize, estimate: &Estimate, fraction: f64) -> StoppingDecision {
    let degenerate = estimate.degenerate || estimate.total_positives == 0;
    StoppingDecision {
        stop: !degenerate && found as f64 >= fraction * estimate.total_positives as f64,
        detail: Detail::Target {
            found,
            estimate: estimate.total_positives,
            fraction,
            degenerate,
        },
    }
}

/// Stop iff the last `streak` labels (in reading order) are all negative.
pub fn ros_rule(labels: &[bool], streak: usize) -> StoppingDecision {
    let run = labels.iter().rev().take_while(|&&l| !l).count();
    StoppingDecision {
        stop: streak > 0 && run >= streak,
        detail: Detail::Ros {
            streak: run,
            needed: streak,
        },
    }
}

/// Knee of a concave increasing curve given as parallel coordinate slices.
///
/// Both axes are min-max normalized and the difference `y − x` is scanned
/// for local maxima. A maximum at `i` is a knee once the difference drops
/// below `d[i] − sensitivity · mean(Δx)` before the next local maximum. The
/// first knee found is returned.
pub fn kneedle_xy(xs: &[f64], ys: &[f64], sensitivity: f64) -> Option<usize> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return None;
    }
    let unit = |v: &[f64]| -> Option<Vec<f64>> {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        (span > 0.0).then(|| v.iter().map(|&a| (a - lo) / span).collect())
    };
    let xn = unit(xs)?;
    let yn = unit(ys)?;
    let d: Vec<f64> = yn.iter().zip(&xn).map(|(y, x)| y - x).collect();
    let mean_step = (xn[n - 1] - xn[0]) / (n - 1) as f64;

    let maxima: Vec<usize> = (1..n - 1)
        .filter(|&i| d[i - 1] < d[i] && d[i] >= d[i + 1])
        .collect();
    for (k, &i) in maxima.iter().enumerate() {
        let threshold = d[i] - sensitivity * mean_step;
        let end = maxima.get(k + 1).copied().unwrap_or(n);
        // a single unit step down equals the threshold exactly on evenly
        // spaced step curves; only a strictly larger drop counts
        if d[i + 1..end].iter().any(|&v| v < threshold - 1e-12) {
            return Some(i);
        }
    }
    None
}

/// Index into `curve.points()` of its knee.
pub fn kneedle(curve: &RetrievalCurve, sensitivity: f64) -> Option<usize> {
    let xs: Vec<f64> = curve.points.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = curve.points.iter().map(|p| p.1 as f64).collect();
    kneedle_xy(&xs, &ys, sensitivity)
}

pub const KNEEDLE_SENSITIVITY: f64 = 1.0;

/// Slope ratio test around the knee. The slope before the knee is the chord
/// from the origin; after it, the chord from the knee to the last point.
pub fn cormack_rule(curve: &RetrievalCurve, rho: f64) -> StoppingDecision {
    let undecided = |knee, ratio| StoppingDecision {
        stop: false,
        detail: Detail::Cormack { knee, ratio, rho },
    };
    let Some(k) = kneedle(curve, KNEEDLE_SENSITIVITY) else {
        return undecided(None, None);
    };
    let (knee_reads, knee_found) = curve.points[k];
    let (end_reads, end_found) = curve.last();
    if end_reads == knee_reads || knee_found == 0 {
        return undecided(Some(k), None);
    }
    let before = knee_found as f64 / knee_reads as f64;
    let after = (end_found - knee_found) as f64 / (end_reads - knee_reads) as f64;
    let ratio = if after == 0.0 {
        f64::INFINITY
    } else {
        before / after
    };
    StoppingDecision {
        stop: ratio > rho,
        detail: Detail::Cormack {
            knee: Some(k),
            ratio: Some(ratio),
            rho,
        },
    }
}

/// Applies `rule` to the session state after a batch.
pub fn evaluate(rule: &StopRule, curve: &RetrievalCurve, estimate: &Estimate) -> StoppingDecision {
    match *rule {
        StopRule::Target { fraction } => target_rule(curve.found(), estimate, fraction),
        StopRule::Ros { streak } => {
            let labels: Vec<bool> = curve.labels().collect();
            ros_rule(&labels, streak)
        }
        StopRule::Cormack { rho } => cormack_rule(curve, rho),
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn estimate(total: usize) -> Estimate {
        Estimate {
            total_positives: total,
            iterations: 1,
            converged: true,
            degenerate: false,
            history: vec![total],
            final_labels: Vec::new(),
        }
    }

    #[test]
    fn target_boundary_is_inclusive() {
        assert!(target_rule(90, &estimate(100), 0.9).stop);
        assert!(!target_rule(89, &estimate(100), 0.9).stop);
        let mut degenerate = estimate(0);
        degenerate.degenerate = true;
        let d = target_rule(0, &degenerate, 0.9);
        assert!(!d.stop);
        assert!(matches!(
            d.detail,
            Detail::Target {
                degenerate: true,
                ..
            }
        ));
    }

    #[test]
    fn ros_examples() {
        assert!(ros_rule(&[true, false, false, false], 3).stop);
        let mut nine_then_hit = vec![false; 9];
        nine_then_hit.push(true);
        assert!(!ros_rule(&nine_then_hit, 10).stop);
        assert!(ros_rule(&[false; 10], 10).stop);
        assert!(!ros_rule(&[false; 9], 10).stop);
    }

    #[test]
    fn kneedle_line_has_no_knee() {
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        assert_eq!(kneedle_xy(&xs, &xs, 1.0), None);
    }

    #[test]
    fn kneedle_finds_corner_of_min_2x_1() {
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| (2.0 * x).min(1.0)).collect();
        // brute-force argmax of the normalized difference curve
        let d: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - x).collect();
        let argmax = (0..d.len()).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
        assert_eq!(xs[argmax], 0.5);
        assert_eq!(kneedle_xy(&xs, &ys, 1.0), Some(argmax));
    }

    #[test]
    fn kneedle_convex_has_no_knee() {
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert_eq!(kneedle_xy(&xs, &ys, 1.0), None);
    }

    #[test]
    fn kneedle_needs_three_points() {
        assert_eq!(kneedle_xy(&[0.0, 1.0], &[0.0, 1.0], 1.0), None);
    }

    fn curve_rise_then_flat(rise: usize, found: usize, total: usize) -> RetrievalCurve {
        let labels = (0..total).map(|i| i < rise && i % (rise / found) == 0);
        RetrievalCurve::from_labels(labels)
    }

    #[test]
    fn cormack_flat_tail_stops() {
        let curve = curve_rise_then_flat(200, 100, 1000);
        assert_eq!(curve.found(), 100);
        let d = cormack_rule(&curve, 6.0);
        assert!(d.stop, "{d:?}");
        match d.detail {
            Detail::Cormack { ratio, .. } => assert_eq!(ratio, Some(f64::INFINITY)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn cormack_uniform_discovery_continues() {
        // one positive every 20 reads
        let curve = RetrievalCurve::from_labels((0..1000).map(|i| i % 20 == 7));
        assert!(!cormack_rule(&curve, 6.0).stop);
    }

    #[test]
    fn curve_bookkeeping() {
        let c = RetrievalCurve::from_labels([true, false, true]);
        assert_eq!(c.points(), [(1, 1), (2, 1), (3, 2)]);
        assert_eq!(c.labels().collect::<Vec<_>>(), [true, false, true]);
    }

    #[test]
    fn parse_rules() {
        assert_eq!(
            "target@0.9".parse::<StopRule>().unwrap(),
            StopRule::Target { fraction: 0.9 }
        );
        assert_eq!(
            "target@95".parse::<StopRule>().unwrap(),
            StopRule::Target { fraction: 0.95 }
        );
        assert_eq!(
            "ros:10".parse::<StopRule>().unwrap(),
            StopRule::Ros { streak: 10 }
        );
        assert_eq!(
            "cormack:12".parse::<StopRule>().unwrap(),
            StopRule::Cormack { rho: 12.0 }
        );
        assert!("ros:0".parse::<StopRule>().is_err());
        assert!("wallace".parse::<StopRule>().is_err());
        let r = StopRule::Cormack { rho: 6.0 };
        assert_eq!(r.to_string().parse::<StopRule>().unwrap(), r);
    }

    /// First prefix length at which `decide` stops, if any.
    fn first_stop(labels: &[bool], decide: impl Fn(&RetrievalCurve) -> bool) -> Option<usize> {
        let mut curve = RetrievalCurve::new();
        for &l in labels {
            curve.push(l);
            if decide(&curve) {
                return Some(curve.reads());
            }
        }
        None
    }

    fn front_loaded() -> impl Strategy<Value = Vec<bool>> {
        (20usize..200, 0.05f64..0.6, 0.0f64..0.1, any::<u64>()).prop_map(|(n, head, tail, s)| {
            let mut rng = crate::seed::rng(s);
            use rand::Rng;
            (0..n)
                .map(|i| rng.random::<f64>() < if i < n / 4 { head } else { tail })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn target_rule_is_monotone_in_found(found in 0usize..200, total in 1usize..200, extra in 0usize..50) {
            let e = estimate(total);
            if target_rule(found, &e, 0.9).stop {
                prop_assert!(target_rule(found + extra, &e, 0.9).stop);
            }
        }

        #[test]
        fn kneedle_ignores_axis_scaling(labels in front_loaded(), sx in 0.1f64..50.0, sy in 0.1f64..50.0) {
            let curve = RetrievalCurve::from_labels(labels);
            let xs: Vec<f64> = curve.points().iter().map(|p| p.0 as f64).collect();
            let ys: Vec<f64> = curve.points().iter().map(|p| p.1 as f64).collect();
            let base = kneedle_xy(&xs, &ys, 1.0);
            // powers of two keep normalization exact
            let px = 2f64.powi(sx.log2().round() as i32);
            let py = 2f64.powi(sy.log2().round() as i32);
            let xs2: Vec<f64> = xs.iter().map(|x| x * px).collect();
            let ys2: Vec<f64> = ys.iter().map(|y| y * py).collect();
            prop_assert_eq!(base, kneedle_xy(&xs2, &ys2, 1.0));
        }

        #[test]
        fn cormack_stop_is_non_decreasing_in_rho(labels in front_loaded(), lo in 1.0f64..10.0, gap in 0.0f64..10.0) {
            let a = first_stop(&labels, |c| cormack_rule(c, lo).stop);
            let b = first_stop(&labels, |c| cormack_rule(c, lo + gap).stop);
            match (a, b) {
                (Some(a), Some(b)) => prop_assert!(a <= b),
                (None, Some(_)) => prop_assert!(false, "higher rho stopped earlier"),
                _ => {}
            }
        }

        #[test]
        fn ros_stop_is_non_decreasing_in_streak(labels in front_loaded(), x in 1usize..30, gap in 0usize..30) {
            let lab = |c: &RetrievalCurve, k| ros_rule(&c.labels().collect::<Vec<_>>(), k).stop;
            let a = first_stop(&labels, |c| lab(c, x));
            let b = first_stop(&labels, |c| lab(c, x + gap));
            match (a, b) {
                (Some(a), Some(b)) => prop_assert!(a <= b),
                (None, Some(_)) => prop_assert!(false, "longer streak stopped earlier"),
                _ => {}
            }
        }
    }
}
