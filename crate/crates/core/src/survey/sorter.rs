//! Scoring the unlabeled pool each iteration.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::learners::{
    train_ensemble, train_linear_svm, LinearModel, LinearSvmConfig, TreeEnsemble,
};
use crate::seed;
use crate::sparse::FeatureMatrix;
use crate::textprep::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Svm {
        c: f64,
        tolerance: f64,
        max_epochs: usize,
    },
    Ensemble {
        trees: usize,
        sample_fraction: f64,
    },
}

impl ClassifierConfig {
    pub fn svm() -> Self {
        let d = LinearSvmConfig::default();
        ClassifierConfig::Svm {
            c: d.c,
            tolerance: d.tolerance,
            max_epochs: d.max_epochs,
        }
    }

    /// `trees` is one less than the number of projects in the rig.
    pub fn ensemble(trees: usize) -> Self {
        ClassifierConfig::Ensemble {
            trees,
            sample_fraction: 0.9,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierConfig::Svm { .. } => "svm",
            ClassifierConfig::Ensemble { .. } => "ensemble",
        }
    }
}

/// Raw interest scores for the pool; higher means more likely SATD.
pub trait Sorter: Send {
    /// `labeled` holds every `(id, label)` gathered so far in the surveyed
    /// corpus; `pool` lists the ids to score.
    fn score(&mut self, labeled: &[(usize, bool)], pool: &[usize]) -> Result<Vec<f64>>;
}

/// TF-IDF features of a training corpus and a surveyed corpus over a
/// vocabulary fitted on the training texts only.
#[derive(Debug, Clone)]
pub struct FeatureSpace {
    pub vocabulary: Vocabulary,
    pub train_x: FeatureMatrix,
    pub train_y: Vec<bool>,
    pub test_x: FeatureMatrix,
}

impl FeatureSpace {
    pub fn build(train: &Corpus, test: &Corpus, min_df: usize) -> Result<Self> {
        let train_y = train.labels().ok_or_else(|| {
            Error::Contract(format!(
                "training corpus `{}` has unlabeled comments",
                train.name
            ))
        })?;
        let vocabulary = Vocabulary::fit(&train.texts(), min_df)?;
        Ok(FeatureSpace {
            train_x: vocabulary.transform(&train.texts()),
            test_x: vocabulary.transform(&test.texts()),
            train_y,
            vocabulary,
        })
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Svm(LinearModel),
    Ensemble(TreeEnsemble),
}

impl Model {
    pub fn raw_scores(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        match self {
            Model::Svm(m) => m.decision_function(x),
            Model::Ensemble(e) => Ok(e.votes(x)?.into_iter().map(f64::from).collect()),
        }
    }
}

fn train(config: &ClassifierConfig, x: &FeatureMatrix, y: &[bool], seed: u64) -> Result<Model> {
    match *config {
        ClassifierConfig::Svm {
            c,
            tolerance,
            max_epochs,
        } => {
            let cfg = LinearSvmConfig {
                c,
                tolerance,
                max_epochs,
                seed,
            };
            train_linear_svm(x, y, &cfg).map(Model::Svm)
        }
        ClassifierConfig::Ensemble {
            trees,
            sample_fraction,
        } => {
            if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
                return Err(Error::DegenerateTraining);
            }
            train_ensemble(x, y, trees, sample_fraction, seed).map(Model::Ensemble)
        }
    }
}

/// Classifier retrained on the training projects plus every label gathered
/// in the surveyed project, all rows weighted equally.
pub struct LearnedSorter {
    features: Arc<FeatureSpace>,
    config: ClassifierConfig,
    seed: u64,
    prior: Model,
    current: Option<Model>,
    fits: u64,
}

impl LearnedSorter {
    /// Trains the prior model on the training projects alone.
    pub fn new(features: Arc<FeatureSpace>, config: ClassifierConfig, seed: u64) -> Result<Self> {
        let prior = train(
            &config,
            &features.train_x,
            &features.train_y,
            seed::derive(seed, &[0]),
        )?;
        Ok(LearnedSorter {
            features,
            config,
            seed,
            prior,
            current: None,
            fits: 0,
        })
    }

    pub fn prior(&self) -> &Model {
        &self.prior
    }

    fn model(&self) -> &Model {
        self.current.as_ref().unwrap_or(&self.prior)
    }
}

impl Sorter for LearnedSorter {
    fn score(&mut self, labeled: &[(usize, bool)], pool: &[usize]) -> Result<Vec<f64>> {
        let fs = &self.features;
        if !labeled.is_empty() {
            self.fits += 1;
            let mut x = fs.train_x.clone();
            let ids: Vec<usize> = labeled.iter().map(|l| l.0).collect();
            x.extend_from(&fs.test_x, &ids);
            let mut y = fs.train_y.clone();
            y.extend(labeled.iter().map(|l| l.1));
            match train(&self.config, &x, &y, seed::derive(self.seed, &[self.fits])) {
                Ok(m) => self.current = Some(m),
                Err(Error::DegenerateTraining) => {
                    log::debug!("degenerate retraining set; keeping the previous model")
                }
                Err(e) => return Err(e),
            }
        }
        self.model().raw_scores(&fs.test_x.select(pool))
    }
}

/// Scores every comment by its reference label (1 for SATD, 0 otherwise): a
/// perfect ranker for calibration runs.
pub struct ReferenceSorter {
    labels: Vec<bool>,
}

impl ReferenceSorter {
    pub fn new(labels: Vec<bool>) -> Self {
        ReferenceSorter { labels }
    }
}

impl Sorter for ReferenceSorter {
    fn score(&mut self, _labeled: &[(usize, bool)], pool: &[usize]) -> Result<Vec<f64>> {
        pool.iter()
            .map(|&i| {
                self.labels
                    .get(i)
                    .map(|&l| if l { 1.0 } else { 0.0 })
                    .ok_or(Error::UnknownComment(i))
            })
            .collect()
    }
}
