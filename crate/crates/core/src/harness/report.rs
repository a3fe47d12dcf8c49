use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::rig::RigResult;
use crate::error::{Error, Result};
use crate::survey::ClassifierConfig;

fn classifier_name(c: &ClassifierConfig) -> &'static str {
    c.name()
}

fn grid_csv(result: &RigResult) -> String {
    let mut out = String::from(
        "project,repeat,seed,classifier,stop,recall,cost,reads,found,total_positives,\
         corpus_size,batches,final_estimate,estimator_iterations,seconds_per_iteration\n",
    );
    let cls = classifier_name(&result.config.classifier);
    for r in &result.runs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.project,
            r.repeat,
            r.seed,
            cls,
            result.config.stop,
            r.recall,
            r.cost,
            r.reads,
            r.found,
            r.total_positives,
            r.corpus_size,
            r.batches,
            r.final_estimate,
            r.estimator_iterations,
            r.seconds_per_iteration
        );
    }
    out
}

/// Per-project medians and IQRs, followed by `MEDIAN` and `IQR` rows taken
/// across the project medians.
pub fn summary_by_project_csv(result: &RigResult) -> String {
    let mut out = String::from("project,runs,recall_median,recall_iqr,cost_median,cost_iqr\n");
    for p in result.by_project() {
        let s = &p.summary;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.project, p.runs, s.recall_median, s.recall_iqr, s.cost_median, s.cost_iqr
        );
    }
    if let Some(o) = result.overall() {
        let _ = writeln!(out, "MEDIAN,,{},,{},", o.recall_median, o.cost_median);
        let _ = writeln!(out, "IQR,,{},,{},", o.recall_iqr, o.cost_iqr);
    }
    out
}

pub fn summary_overall_csv(result: &RigResult) -> String {
    let mut out = String::from(
        "classifier,stop,projects,runs,recall_median,recall_iqr,cost_median,cost_iqr\n",
    );
    if let Some(o) = result.overall() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            classifier_name(&result.config.classifier),
            result.config.stop,
            result.projects().len(),
            result.runs.len(),
            o.recall_median,
            o.recall_iqr,
            o.cost_median,
            o.cost_iqr
        );
    }
    out
}

fn write(path: PathBuf, body: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes `grid.csv`, `summary_by_project.csv`, `summary_overall.csv` and one
/// `curves/<project>_r<repeat>.csv` per run. Returns the written paths.
pub fn emit_report(result: &RigResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if result.runs.is_empty() {
        return Err(Error::Contract(
            "nothing to report: the rig has no runs".into(),
        ));
    }
    let curves = out_dir.join("curves");
    fs::create_dir_all(&curves).map_err(|e| Error::io(&curves, e))?;
    let mut written = Vec::new();
    write(out_dir.join("grid.csv"), &grid_csv(result), &mut written)?;
    write(
        out_dir.join("summary_by_project.csv"),
        &summary_by_project_csv(result),
        &mut written,
    )?;
    write(
        out_dir.join("summary_overall.csv"),
        &summary_overall_csv(result),
        &mut written,
    )?;
    for r in &result.runs {
        let mut body = String::from("reads,found\n");
        for (reads, found) in &r.curve {
            let _ = writeln!(body, "{reads},{found}");
        }
        write(
            curves.join(format!("{}_r{:02}.csv", r.project, r.repeat)),
            &body,
            &mut written,
        )?;
    }
    Ok(written)
}
