use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{iqr, median, overhead_percent, recall};
use crate::corpus::{leave_one_out, Corpus};
use crate::error::{Error, Result};
use crate::learners::train_ensemble;
use crate::seed;
use crate::stopping::StopRule;
use crate::survey::{ClassifierConfig, FeatureSpace, Oracle, SurveyConfig, SurveySession};
use crate::textprep::Vocabulary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigConfig {
    pub classifier: ClassifierConfig,
    pub stop: StopRule,
    pub repeats: usize,
    pub batch_size: usize,
    pub master_seed: u64,
    pub min_df: usize,
    /// Restrict the surveyed projects; all of them when `None`. Training
    /// always uses every other project.
    pub projects: Option<Vec<String>>,
}

impl Default for RigConfig {
    fn default() -> Self {
        RigConfig {
            classifier: ClassifierConfig::svm(),
            stop: StopRule::default(),
            repeats: 10,
            batch_size: 100,
            master_seed: 0,
            min_df: 1,
            projects: None,
        }
    }
}

/// One simulated session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub project: String,
    pub repeat: usize,
    pub seed: u64,
    pub recall: f64,
    pub cost: f64,
    pub reads: usize,
    pub found: usize,
    pub total_positives: usize,
    pub corpus_size: usize,
    pub batches: usize,
    pub final_estimate: usize,
    /// Estimator rounds summed over all batches.
    pub estimator_iterations: usize,
    /// Mean compute time per batch.
    pub seconds_per_iteration: f64,
    pub curve: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub recall_median: f64,
    pub recall_iqr: f64,
    pub cost_median: f64,
    pub cost_iqr: f64,
}

impl Summary {
    fn of(recalls: &[f64], costs: &[f64]) -> Option<Self> {
        Some(Summary {
            recall_median: median(recalls)?,
            recall_iqr: iqr(recalls)?,
            cost_median: median(costs)?,
            cost_iqr: iqr(costs)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub project: String,
    pub runs: usize,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigResult {
    pub config: RigConfig,
    pub runs: Vec<RunRecord>,
}

impl RigResult {
    /// Project names in the order they were surveyed.
    pub fn projects(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.runs {
            if !out.contains(&r.project) {
                out.push(r.project.clone());
            }
        }
        out
    }

    /// Median and IQR over the repeats of each project.
    pub fn by_project(&self) -> Vec<ProjectSummary> {
        self.projects()
            .into_iter()
            .filter_map(|p| {
                let runs: Vec<&RunRecord> = self.runs.iter().filter(|r| r.project == p).collect();
                let recalls: Vec<f64> = runs.iter().map(|r| r.recall).collect();
                let costs: Vec<f64> = runs.iter().map(|r| r.cost).collect();
                Some(ProjectSummary {
                    runs: runs.len(),
                    summary: Summary::of(&recalls, &costs)?,
                    project: p,
                })
            })
            .collect()
    }

    /// Median and IQR across the per-project medians.
    pub fn overall(&self) -> Option<Summary> {
        let per = self.by_project();
        let recalls: Vec<f64> = per.iter().map(|p| p.summary.recall_median).collect();
        let costs: Vec<f64> = per.iter().map(|p| p.summary.cost_median).collect();
        Summary::of(&recalls, &costs)
    }
}

/// Runs one simulated session to completion and summarizes it.
pub fn run_session(
    test: Arc<Corpus>,
    features: Arc<FeatureSpace>,
    config: SurveyConfig,
    repeat: usize,
) -> Result<RunRecord> {
    let oracle = Oracle::simulated(&test)?;
    let total_positives = test.positives();
    let mut session = SurveySession::with_features(test.clone(), features, config)?;
    session.track_recall()?;
    session.run_to_completion(&oracle)?;
    let reports = session.reports();
    let curve = session.curve();
    Ok(RunRecord {
        project: test.name.clone(),
        repeat,
        seed: config.seed,
        recall: recall(curve.found(), total_positives)?,
        cost: session.cost(),
        reads: curve.reads(),
        found: curve.found(),
        total_positives,
        corpus_size: test.len(),
        batches: reports.len(),
        final_estimate: session.estimate().map_or(0, |e| e.total_positives),
        estimator_iterations: reports.iter().map(|r| r.estimate.iterations).sum(),
        seconds_per_iteration: reports.iter().map(|r| r.compute_seconds).sum::<f64>()
            / reports.len().max(1) as f64,
        curve: curve.points().to_vec(),
    })
}

fn selected<'a>(corpora: &'a [Corpus], config: &RigConfig) -> Result<Vec<(usize, &'a Corpus)>> {
    if corpora.len() < 2 {
        return Err(Error::Config("the rig needs at least two projects".into()));
    }
    match &config.projects {
        None => Ok(corpora.iter().enumerate().collect()),
        Some(names) => names
            .iter()
            .map(|n| {
                corpora
                    .iter()
                    .position(|c| &c.name == n)
                    .map(|i| (i, &corpora[i]))
                    .ok_or_else(|| Error::UnknownProject(n.clone()))
            })
            .collect(),
    }
}

/// Leave-one-project-out rig: every selected project is surveyed
/// `config.repeats` times, each with a seed derived from the master seed, the
/// project index and the repeat number.
pub fn run_standard_rig(corpora: &[Corpus], config: &RigConfig) -> Result<RigResult> {
    if config.repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    let chosen = selected(corpora, config)?;
    for (_, c) in &chosen {
        if c.labels().is_none() || c.positives() == 0 {
            return Err(Error::Contract(format!(
                "project `{}` needs full labels with at least one SATD comment",
                c.name
            )));
        }
    }
    let splits = chosen
        .par_iter()
        .map(|&(idx, c)| {
            let (train, test) = leave_one_out(corpora, &c.name)?;
            let features = FeatureSpace::build(&train, &test, config.min_df)?;
            Ok((idx, Arc::new(test), Arc::new(features)))
        })
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(usize, usize)> = (0..splits.len())
        .flat_map(|s| (0..config.repeats).map(move |r| (s, r)))
        .collect();
    let runs = cells
        .par_iter()
        .map(|&(s, repeat)| {
            let (idx, test, features) = &splits[s];
            let survey = SurveyConfig {
                batch_size: config.batch_size,
                classifier: config.classifier,
                stop: config.stop,
                seed: seed::derive(config.master_seed, &[*idx as u64, repeat as u64]),
                min_df: config.min_df,
            };
            let record = run_session(test.clone(), features.clone(), survey, repeat)?;
            log::info!(
                "{} repeat {}: recall {:.1} cost {:.1}",
                record.project,
                repeat,
                record.recall,
                record.cost
            );
            Ok(record)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RigResult {
        config: config.clone(),
        runs,
    })
}

/// Recall of a tree ensemble trained on every other project and applied to
/// `test_name` by majority vote, without any surveying.
pub fn classify_only_recall(
    corpora: &[Corpus],
    test_name: &str,
    trees: usize,
    sample_fraction: f64,
    seed: u64,
    min_df: usize,
) -> Result<f64> {
    let (train, test) = leave_one_out(corpora, test_name)?;
    let truth = test
        .labels()
        .ok_or_else(|| Error::Contract(format!("project `{test_name}` is not fully labeled")))?;
    let train_y = train
        .labels()
        .ok_or_else(|| Error::Contract("training projects are not fully labeled".into()))?;
    let vocab = Vocabulary::fit(&train.texts(), min_df)?;
    let ens = train_ensemble(
        &vocab.transform(&train.texts()),
        &train_y,
        trees,
        sample_fraction,
        seed,
    )?;
    let predicted = ens.classify(&vocab.transform(&test.texts()))?;
    let hits = predicted
        .iter()
        .zip(&truth)
        .filter(|(p, t)| **p && **t)
        .count();
    recall(hits, test.positives())
}

/// Classify-only recall for every project, with `n − 1` trees for `n`
/// projects.
pub fn classify_only_table(
    corpora: &[Corpus],
    seed: u64,
    min_df: usize,
) -> Result<Vec<(String, f64)>> {
    let trees = corpora.len().saturating_sub(1).max(1);
    corpora
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let r = classify_only_recall(
                corpora,
                &c.name,
                trees,
                0.9,
                seed::derive(seed, &[i as u64]),
                min_df,
            )?;
            Ok((c.name.clone(), r))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverheadReport {
    pub mean_iteration_seconds: f64,
    pub max_iteration_seconds: f64,
    pub batch_size: usize,
    pub seconds_per_comment: f64,
    pub overhead_percent: f64,
}

/// Reader idle time per batch, from the mean measured compute time.
pub fn overhead_report(result: &RigResult, seconds_per_comment: f64) -> Result<OverheadReport> {
    let times: Vec<f64> = result
        .runs
        .iter()
        .map(|r| r.seconds_per_iteration)
        .collect();
    if times.is_empty() {
        return Err(Error::UndefinedMetric("overhead of an empty rig"));
    }
    let batches: usize = result.runs.iter().map(|r| r.batches).sum();
    let mean = result
        .runs
        .iter()
        .map(|r| r.seconds_per_iteration * r.batches as f64)
        .sum::<f64>()
        / batches.max(1) as f64;
    let max = times.iter().copied().fold(0.0, f64::max);
    Ok(OverheadReport {
        mean_iteration_seconds: mean,
        max_iteration_seconds: max,
        batch_size: result.config.batch_size,
        seconds_per_comment,
        overhead_percent: overhead_percent(mean, result.config.batch_size, seconds_per_comment),
    })
}
