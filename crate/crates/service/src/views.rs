//! Request and response payloads.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use survey_core::stopping::Detail;
use survey_core::survey::Batch;
use survey_core::{Estimate, IterationReport, SurveySession};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub project: String,
    /// Defaults to the server's data directory.
    pub data_dir: Option<String>,
    /// `svm` (default) or `ensemble`.
    pub classifier: Option<String>,
    /// Ensemble size; defaults to one tree per training project.
    pub trees: Option<usize>,
    /// `target@0.9` (default), `target@0.95`, `ros:10`, `cormack:12`.
    pub stop: Option<String>,
    pub batch_size: Option<usize>,
    pub seed: Option<u64>,
    pub min_df: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Created {
    pub id: String,
    pub project: String,
    pub pool_size: usize,
    pub status: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Item {
    pub id: usize,
    pub text: String,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchView {
    pub session: String,
    pub batch_index: usize,
    pub items: Vec<Item>,
}

impl BatchView {
    pub fn new(session: &str, batch: Batch) -> Self {
        BatchView {
            session: session.to_string(),
            batch_index: batch.index,
            items: batch
                .items
                .into_iter()
                .map(|b| Item {
                    id: b.id,
                    text: b.text,
                    score: b.score,
                })
                .collect(),
        }
    }
}

/// Labels keyed by comment id.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelsRequest {
    pub labels: BTreeMap<usize, bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateView {
    pub total: usize,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
}

impl From<&Estimate> for EstimateView {
    fn from(e: &Estimate) -> Self {
        EstimateView {
            total: e.total_positives,
            iterations: e.iterations,
            converged: e.converged,
            degenerate: e.degenerate,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecisionView {
    pub stop: bool,
    pub rule: &'static str,
    pub detail: Detail,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportView {
    pub iteration: usize,
    pub reads: usize,
    pub found: usize,
    pub estimate: EstimateView,
    pub decision: DecisionView,
    pub status: &'static str,
    pub recall: Option<f64>,
    pub cost: f64,
    pub compute_seconds: f64,
}

impl From<&IterationReport> for ReportView {
    fn from(r: &IterationReport) -> Self {
        ReportView {
            iteration: r.iteration,
            reads: r.reads,
            found: r.found,
            estimate: (&r.estimate).into(),
            decision: DecisionView {
                stop: r.decision.stop,
                rule: r.decision.rule_name(),
                detail: r.decision.detail.clone(),
            },
            status: r.status.as_str(),
            recall: r.recall,
            cost: r.cost,
            compute_seconds: r.compute_seconds,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StatusView {
    pub id: String,
    pub project: String,
    pub status: &'static str,
    pub iteration: usize,
    pub reads: usize,
    pub found: usize,
    pub pool_size: usize,
    pub cost: f64,
    pub stop_rule: String,
    pub estimate: Option<EstimateView>,
    pub decision: Option<DecisionView>,
    pub curve: Vec<(usize, usize)>,
}

impl StatusView {
    pub fn of(id: &str, s: &SurveySession) -> Self {
        let curve = s.curve();
        StatusView {
            id: id.to_string(),
            project: s.corpus().name.clone(),
            status: s.status().as_str(),
            iteration: s.iteration(),
            reads: curve.reads(),
            found: curve.found(),
            pool_size: s.corpus().len(),
            cost: s.cost(),
            stop_rule: s.config().stop.to_string(),
            estimate: s.estimate().map(Into::into),
            decision: s.decision().map(|d| DecisionView {
                stop: d.stop,
                rule: d.rule_name(),
                detail: d.detail.clone(),
            }),
            curve: curve.points().to_vec(),
        }
    }
}
