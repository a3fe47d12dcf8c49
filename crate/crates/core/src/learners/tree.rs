//! Gini CART trees over sparse rows and the bagged ensemble built from them.
//!
//! Trees grow until nodes are pure, hold fewer than two rows, or no split
//! lowers impurity. Among equally good splits the lowest feature index wins,
//! then the lowest threshold. A row goes left when its value is `<=` the
//! threshold; absent entries count as zero.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_rows;
use crate::error::{Error, Result};
use crate::seed;
use crate::sparse::FeatureMatrix;

const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(bool),
    Split {
        feature: u32,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    cols: usize,
}

#[derive(Clone, Copy)]
struct Split {
    feature: u32,
    threshold: f64,
    score: f64,
}

/// `n · gini` of a node with `pos` positives among `n` rows.
fn weighted_gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (p, n) = (pos as f64, n as f64);
    2.0 * p * (n - p) / n
}

fn best_split(x: &FeatureMatrix, y: &[bool], rows: &[usize], pos: usize) -> Option<Split> {
    let n = rows.len();
    let mut entries: Vec<(u32, f64, bool)> = Vec::new();
    for &r in rows {
        let (idx, val) = x.row(r);
        entries.extend(idx.iter().zip(val).map(|(&c, &v)| (c, v, y[r])));
    }
    entries.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let parent = weighted_gini(pos, n);
    let mut best: Option<Split> = None;
    let mut start = 0;
    while start < entries.len() {
        let feature = entries[start].0;
        let mut end = start;
        while end < entries.len() && entries[end].0 == feature {
            end += 1;
        }
        let group = &entries[start..end];
        start = end;

        // Distinct-value segments (value, count, positives), with the
        // implicit zeros merged in at their sorted position.
        let nz_pos = group.iter().filter(|e| e.2).count();
        let zeros = (n - group.len(), pos - nz_pos);
        let mut segments: Vec<(f64, usize, usize)> = Vec::new();
        let mut zeros_placed = zeros.0 == 0;
        for &(_, v, label) in group {
            if !zeros_placed && v > 0.0 {
                segments.push((0.0, zeros.0, zeros.1));
                zeros_placed = true;
            }
            match segments.last_mut() {
                Some(last) if last.0 == v => {
                    last.1 += 1;
                    last.2 += label as usize;
                }
                _ => segments.push((v, 1, label as usize)),
            }
        }
        if !zeros_placed {
            segments.push((0.0, zeros.0, zeros.1));
        }

        let (mut left_n, mut left_pos) = (0usize, 0usize);
        for pair in segments.windows(2) {
            left_n += pair[0].1;
            left_pos += pair[0].2;
            let score = weighted_gini(left_pos, left_n) + weighted_gini(pos - left_pos, n - left_n);
            let better = match best {
                None => score < parent - MIN_GAIN,
                Some(b) => score < b.score - MIN_GAIN,
            };
            if better {
                best = Some(Split {
                    feature,
                    threshold: 0.5 * (pair[0].0 + pair[1].0),
                    score,
                });
            }
        }
    }
    best
}

impl DecisionTree {
    pub fn fit(x: &FeatureMatrix, y: &[bool], rows: &[usize]) -> Result<Self> {
        check_rows(x.rows(), y.len())?;
        let mut tree = DecisionTree {
            nodes: vec![Node::Leaf(false)],
            cols: x.cols(),
        };
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, rows.to_vec())];
        while let Some((slot, node_rows)) = stack.pop() {
            let n = node_rows.len();
            let pos = node_rows.iter().filter(|&&r| y[r]).count();
            let majority = 2 * pos > n;
            if pos == 0 || pos == n || n < 2 {
                tree.nodes[slot] = Node::Leaf(majority);
                continue;
            }
            let Some(split) = best_split(x, y, &node_rows, pos) else {
                tree.nodes[slot] = Node::Leaf(majority);
                continue;
            };
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = node_rows
                .into_iter()
                .partition(|&r| x.get(r, split.feature) <= split.threshold);
            let left = tree.nodes.len();
            tree.nodes.push(Node::Leaf(false));
            tree.nodes.push(Node::Leaf(false));
            tree.nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right: left + 1,
            };
            stack.push((left + 1, right_rows));
            stack.push((left, left_rows));
        }
        Ok(tree)
    }

    pub fn predict_row(&self, x: &FeatureMatrix, row: usize) -> bool {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(label) => return label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x.get(row, feature) <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<bool>> {
        x.check_cols(self.cols)?;
        Ok((0..x.rows()).map(|i| self.predict_row(x, i)).collect())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub trees: Vec<DecisionTree>,
    pub tree_seeds: Vec<u64>,
    pub sample_fraction: f64,
}

/// Fits `k` trees, each on its own uniform sample without replacement of
/// `⌈sample_fraction · rows⌉` rows. Tree `i` samples with the seed derived
/// from `seed` and `i`.
pub fn train_ensemble(
    x: &FeatureMatrix,
    y: &[bool],
    k: usize,
    sample_fraction: f64,
    seed: u64,
) -> Result<TreeEnsemble> {
    check_rows(x.rows(), y.len())?;
    if k == 0 {
        return Err(Error::Config("ensemble needs at least one tree".into()));
    }
    if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "sample fraction {sample_fraction} is outside (0, 1]"
        )));
    }
    if x.rows() == 0 {
        return Err(Error::Contract("cannot train on zero rows".into()));
    }
    let take = ((sample_fraction * x.rows() as f64).ceil() as usize).clamp(1, x.rows());
    let tree_seeds: Vec<u64> = (0..k as u64).map(|i| seed::derive(seed, &[i])).collect();
    let trees = tree_seeds
        .par_iter()
        .map(|&s| {
            let mut rows = index::sample(&mut seed::rng(s), x.rows(), take).into_vec();
            rows.sort_unstable();
            DecisionTree::fit(x, y, &rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TreeEnsemble {
        trees,
        tree_seeds,
        sample_fraction,
    })
}

impl TreeEnsemble {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Number of trees voting SATD, per row.
    pub fn votes(&self, x: &FeatureMatrix) -> Result<Vec<u32>> {
        if let Some(t) = self.trees.first() {
            x.check_cols(t.cols)?;
        }
        Ok((0..x.rows())
            .into_par_iter()
            .map(|i| self.trees.iter().filter(|t| t.predict_row(x, i)).count() as u32)
            .collect())
    }

    /// Strict majority; a split vote is negative.
    pub fn classify(&self, x: &FeatureMatrix) -> Result<Vec<bool>> {
        let k = self.len() as u32;
        Ok(self.votes(x)?.into_iter().map(|v| 2 * v > k).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (FeatureMatrix, Vec<bool>) {
        let rows = vec![
            vec![0.9, 0.0, 0.1],
            vec![0.8, 0.1, 0.0],
            vec![0.7, 0.0, 0.3],
            vec![0.0, 0.9, 0.2],
            vec![0.1, 0.8, 0.0],
            vec![0.0, 0.7, 0.5],
        ];
        let y = vec![true, true, true, false, false, false];
        (FeatureMatrix::from_dense(&rows, 3), y)
    }

    #[test]
    fn single_tree_fits_separable_data() {
        let (x, y) = toy();
        let t = DecisionTree::fit(&x, &y, &(0..6).collect::<Vec<_>>()).unwrap();
        assert_eq!(t.predict(&x).unwrap(), y);
        // one split on the lowest feature that separates perfectly
        assert_eq!(t.node_count(), 3);
        match t.nodes[0] {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(feature, 0);
                assert!((threshold - 0.4).abs() < 1e-12);
            }
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn negative_values_split_around_zero() {
        let x = FeatureMatrix::from_dense(&[vec![-1.0], vec![-0.5], vec![0.0], vec![2.0]], 1);
        let y = [false, false, true, true];
        let t = DecisionTree::fit(&x, &y, &[0, 1, 2, 3]).unwrap();
        assert_eq!(t.predict(&x).unwrap(), y);
    }

    #[test]
    fn identical_rows_with_mixed_labels_become_negative_leaf() {
        let x = FeatureMatrix::from_dense(&[vec![1.0], vec![1.0]], 1);
        let t = DecisionTree::fit(&x, &[true, false], &[0, 1]).unwrap();
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.predict(&x).unwrap(), [false, false]);
    }

    #[test]
    fn ensemble_counts_and_majority() {
        let (x, y) = toy();
        let ens = train_ensemble(&x, &y, 9, 0.9, 3).unwrap();
        assert_eq!(ens.len(), 9);
        let votes = ens.votes(&x).unwrap();
        assert!(votes.iter().all(|&v| v <= 9));
        let single = train_ensemble(&x, &y, 1, 1.0, 3).unwrap();
        assert_eq!(single.votes(&x).unwrap(), [1, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn pure_positive_training_votes_positive_everywhere() {
        let (x, _) = toy();
        let ens = train_ensemble(&x, &[true; 6], 4, 0.5, 1).unwrap();
        assert_eq!(ens.votes(&x).unwrap(), vec![4; 6]);
    }

    #[test]
    fn split_vote_is_negative() {
        let x = FeatureMatrix::from_dense(&[vec![1.0]], 1);
        let yes = DecisionTree {
            nodes: vec![Node::Leaf(true)],
            cols: 1,
        };
        let no = DecisionTree {
            nodes: vec![Node::Leaf(false)],
            cols: 1,
        };
        let ens = TreeEnsemble {
            trees: vec![yes, no],
            tree_seeds: vec![0, 1],
            sample_fraction: 1.0,
        };
        assert_eq!(ens.votes(&x).unwrap(), [1]);
        assert_eq!(ens.classify(&x).unwrap(), [false]);
    }

    #[test]
    fn config_errors() {
        let (x, y) = toy();
        assert!(train_ensemble(&x, &y, 0, 0.9, 0).is_err());
        assert!(train_ensemble(&x, &y, 3, 0.0, 0).is_err());
        assert!(train_ensemble(&x, &y, 3, 1.5, 0).is_err());
    }
}
