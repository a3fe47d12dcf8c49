//! The surveying loop.
//!
//! A session ranks the surveyed corpus with a model trained on other
//! projects, serves the top `m` unread comments, takes the reader's labels,
//! retrains, re-ranks, re-estimates the number of SATD comments and applies
//! the stopping rule, one batch at a time.

mod oracle;
mod session_log;
mod sorter;

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use oracle::Oracle;
pub use session_log::{LogRecord, ParsedLog, SessionLog, HEADER as LOG_HEADER};
pub use sorter::{ClassifierConfig, FeatureSpace, LearnedSorter, Model, ReferenceSorter, Sorter};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::estimator::{estimate_total, Estimate, EstimateInput};
use crate::ranking::Ranking;
use crate::seed;
use crate::stopping::{self, RetrievalCurve, StopRule, StoppingDecision};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveyConfig {
    /// Comments served per batch (`m`).
    pub batch_size: usize,
    pub classifier: ClassifierConfig,
    pub stop: StopRule,
    pub seed: u64,
    pub min_df: usize,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        SurveyConfig {
            batch_size: 100,
            classifier: ClassifierConfig::svm(),
            stop: StopRule::default(),
            seed: 0,
            min_df: 1,
        }
    }
}

impl SurveyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        self.stop.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Active,
    Stopped,
    /// Every comment has been read without the rule firing.
    Exhausted,
}

impl SessionStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SessionStatus::Active => "active",
            SessionStatus::Stopped => "stopped",
            SessionStatus::Exhausted => "exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchItem {
    pub id: usize,
    pub text: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    /// 1-based number of the batch within the session.
    pub index: usize,
    pub items: Vec<BatchItem>,
}

impl Batch {
    pub fn ids(&self) -> Vec<usize> {
        self.items.iter().map(|i| i.id).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: usize,
    /// `(id, label, score when served)` in served order.
    pub labeled: Vec<(usize, bool, f64)>,
    pub reads: usize,
    pub found: usize,
    pub estimate: Estimate,
    pub decision: StoppingDecision,
    pub status: SessionStatus,
    /// Percent of all true positives found; only when ground truth is known.
    pub recall: Option<f64>,
    pub cost: f64,
    /// Retraining, re-ranking and estimation time for this batch.
    pub compute_seconds: f64,
}

pub struct SurveySession {
    corpus: Arc<Corpus>,
    config: SurveyConfig,
    sorter: Box<dyn Sorter>,
    labels: Vec<Option<bool>>,
    frozen_scores: Vec<f64>,
    labeled_order: Vec<(usize, bool)>,
    ranking: Ranking,
    reserved: Option<Vec<usize>>,
    estimate: Option<Estimate>,
    decision: Option<StoppingDecision>,
    curve: RetrievalCurve,
    status: SessionStatus,
    iteration: usize,
    reference_positives: Option<usize>,
    log: Option<SessionLog>,
    reports: Vec<IterationReport>,
}

impl std::fmt::Debug for SurveySession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurveySession")
            .field("corpus", &self.corpus.name)
            .field("config", &self.config)
            .field("status", &self.status)
            .field("iteration", &self.iteration)
            .field("reads", &self.curve.reads())
            .field("found", &self.curve.found())
            .finish_non_exhaustive()
    }
}

impl SurveySession {
    /// Session over `test` with a classifier trained on `train` (the other
    /// projects) as the starting model.
    pub fn new(test: Arc<Corpus>, train: &Corpus, config: SurveyConfig) -> Result<Self> {
        config.validate()?;
        if test.is_empty() {
            return Err(Error::EmptyCorpus(test.name.clone()));
        }
        let features = Arc::new(FeatureSpace::build(train, &test, config.min_df)?);
        Self::with_features(test, features, config)
    }

    /// Like [`SurveySession::new`] with precomputed features, so repeated
    /// runs over one split share them.
    pub fn with_features(
        test: Arc<Corpus>,
        features: Arc<FeatureSpace>,
        config: SurveyConfig,
    ) -> Result<Self> {
        if features.test_x.rows() != test.len() {
            return Err(Error::Shape {
                what: "feature rows for the surveyed corpus",
                expected: test.len(),
                actual: features.test_x.rows(),
            });
        }
        let sorter = LearnedSorter::new(features, config.classifier, config.seed)?;
        Self::with_sorter(test, Box::new(sorter), config)
    }

    pub fn with_sorter(
        test: Arc<Corpus>,
        mut sorter: Box<dyn Sorter>,
        config: SurveyConfig,
    ) -> Result<Self> {
        config.validate()?;
        if test.is_empty() {
            return Err(Error::EmptyCorpus(test.name.clone()));
        }
        let ids: Vec<usize> = (0..test.len()).collect();
        let ranking = Ranking::from_raw(&ids, &sorter.score(&[], &ids)?)?;
        Ok(SurveySession {
            labels: vec![None; test.len()],
            frozen_scores: vec![0.0; test.len()],
            corpus: test,
            config,
            sorter,
            labeled_order: Vec::new(),
            ranking,
            reserved: None,
            estimate: None,
            decision: None,
            curve: RetrievalCurve::new(),
            status: SessionStatus::Active,
            iteration: 0,
            reference_positives: None,
            log: None,
            reports: Vec::new(),
        })
    }

    /// Lets reports carry true recall, computed against the reference labels
    /// of the surveyed corpus.
    pub fn track_recall(&mut self) -> Result<()> {
        let labels = self.corpus.labels().ok_or_else(|| {
            Error::Contract("recall tracking needs a fully labeled corpus".into())
        })?;
        self.reference_positives = Some(labels.iter().filter(|&&l| l).count());
        Ok(())
    }

    /// Checkpoints every later batch (and a manual stop) to `log`.
    pub fn attach_log(&mut self, log: SessionLog) {
        self.log = Some(log);
    }

    pub fn corpus(&self) -> &Arc<Corpus> {
        &self.corpus
    }

    pub fn config(&self) -> &SurveyConfig {
        &self.config
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn curve(&self) -> &RetrievalCurve {
        &self.curve
    }

    pub fn ranking(&self) -> &Ranking {
        &self.ranking
    }

    pub fn estimate(&self) -> Option<&Estimate> {
        self.estimate.as_ref()
    }

    pub fn decision(&self) -> Option<&StoppingDecision> {
        self.decision.as_ref()
    }

    pub fn reports(&self) -> &[IterationReport] {
        &self.reports
    }

    pub fn label_of(&self, id: usize) -> Option<bool> {
        self.labels.get(id).copied().flatten()
    }

    /// `(id, label)` in reading order.
    pub fn labeled(&self) -> &[(usize, bool)] {
        &self.labeled_order
    }

    pub fn pool_size(&self) -> usize {
        self.ranking.len()
    }

    /// Percent of the corpus read so far.
    pub fn cost(&self) -> f64 {
        100.0 * self.curve.reads() as f64 / self.corpus.len() as f64
    }

    /// True recall so far, when ground truth is tracked and non-empty.
    pub fn recall(&self) -> Option<f64> {
        self.reference_positives
            .filter(|&t| t > 0)
            .map(|t| 100.0 * self.curve.found() as f64 / t as f64)
    }

    /// The next `min(m, pool)` comments in rank order. Repeated calls before
    /// the labels arrive return the same batch.
    pub fn next_batch(&mut self) -> Result<Batch> {
        if self.status != SessionStatus::Active {
            return Err(Error::SessionClosed(self.status.as_str()));
        }
        let ids = match &self.reserved {
            Some(ids) => ids.clone(),
            None => {
                let take = self.config.batch_size.min(self.ranking.len());
                let ids = self.ranking.ids[..take].to_vec();
                self.reserved = Some(ids.clone());
                ids
            }
        };
        Ok(Batch {
            index: self.iteration + 1,
            items: ids
                .iter()
                .zip(&self.ranking.scores)
                .map(|(&id, &score)| BatchItem {
                    id,
                    text: self.corpus.comments[id].text.clone(),
                    score,
                })
                .collect(),
        })
    }

    fn check_answers(&self, answers: &[(usize, bool)]) -> Result<()> {
        let Some(reserved) = &self.reserved else {
            return Err(Error::RejectedLabels("no batch has been served".into()));
        };
        let mut seen = HashSet::new();
        for &(id, _) in answers {
            if id >= self.corpus.len() {
                return Err(Error::RejectedLabels(format!("unknown comment id {id}")));
            }
            if !seen.insert(id) {
                return Err(Error::RejectedLabels(format!(
                    "comment {id} answered twice"
                )));
            }
        }
        if let Some(id) = answers
            .iter()
            .map(|a| a.0)
            .find(|id| !reserved.contains(id))
        {
            return Err(Error::RejectedLabels(format!(
                "comment {id} is not in the served batch"
            )));
        }
        if let Some(id) = reserved.iter().find(|id| !seen.contains(id)) {
            return Err(Error::RejectedLabels(format!(
                "comment {id} is missing an answer"
            )));
        }
        Ok(())
    }

    /// Records the reader's labels for the served batch, then retrains,
    /// re-ranks, re-estimates and evaluates the stopping rule. On rejection
    /// the session is unchanged.
    pub fn submit_labels(&mut self, answers: &[(usize, bool)]) -> Result<IterationReport> {
        if self.status != SessionStatus::Active {
            return Err(Error::SessionClosed(self.status.as_str()));
        }
        self.check_answers(answers)?;
        let reserved = self.reserved.take().expect("checked above");
        let started = Instant::now();

        let by_id: std::collections::HashMap<usize, bool> = answers.iter().copied().collect();
        let mut labeled = Vec::with_capacity(reserved.len());
        for (k, &id) in reserved.iter().enumerate() {
            let label = by_id[&id];
            let score = self.ranking.scores[k];
            self.labels[id] = Some(label);
            self.frozen_scores[id] = score;
            self.labeled_order.push((id, label));
            self.curve.push(label);
            labeled.push((id, label, score));
        }
        self.iteration += 1;

        let pool: Vec<usize> = self.ranking.ids[reserved.len()..].to_vec();
        self.ranking = if pool.is_empty() {
            Ranking::default()
        } else {
            let raw = self.sorter.score(&self.labeled_order, &pool)?;
            Ranking::from_raw(&pool, &raw)?
        };

        let estimate = estimate_total(
            &self.estimate_input()?,
            seed::derive(self.config.seed, &[u64::MAX, self.iteration as u64]),
        )?;
        let decision = stopping::evaluate(&self.config.stop, &self.curve, &estimate);
        self.status = if decision.stop {
            SessionStatus::Stopped
        } else if self.ranking.is_empty() {
            SessionStatus::Exhausted
        } else {
            SessionStatus::Active
        };
        let compute_seconds = started.elapsed().as_secs_f64();

        let report = IterationReport {
            iteration: self.iteration,
            labeled,
            reads: self.curve.reads(),
            found: self.curve.found(),
            estimate: estimate.clone(),
            decision: decision.clone(),
            status: self.status,
            recall: self.recall(),
            cost: self.cost(),
            compute_seconds,
        };
        self.estimate = Some(estimate);
        self.decision = Some(decision);
        if let Some(log) = &mut self.log {
            log.append_report(&report)?;
        }
        self.reports.push(report.clone());
        Ok(report)
    }

    /// Scores per comment id: frozen at labeling time for read comments,
    /// current pool scores otherwise.
    pub fn estimate_input(&self) -> Result<EstimateInput> {
        let mut x = self.frozen_scores.clone();
        for (id, score) in self.ranking.iter() {
            x[id] = score;
        }
        EstimateInput::new(
            x,
            self.labels.iter().map(|l| *l == Some(true)).collect(),
            self.labels.iter().map(Option::is_some).collect(),
        )
    }

    /// Manual stop by the reader.
    pub fn stop(&mut self) -> Result<()> {
        if self.status != SessionStatus::Active {
            return Err(Error::SessionClosed(self.status.as_str()));
        }
        self.reserved = None;
        self.status = SessionStatus::Stopped;
        self.decision = Some(StoppingDecision::manual());
        if let Some(log) = &mut self.log {
            log.append_manual_stop()?;
        }
        Ok(())
    }

    /// Answers every batch with `oracle` until the session stops or runs
    /// out of comments.
    pub fn run_to_completion(&mut self, oracle: &Oracle) -> Result<()> {
        while self.status == SessionStatus::Active {
            let batch = self.next_batch()?;
            let answers = oracle.answer_all(&batch.ids())?;
            self.submit_labels(&answers)?;
        }
        Ok(())
    }
}
