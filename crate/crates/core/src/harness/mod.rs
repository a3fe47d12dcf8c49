//! Simulated-reader experiments: the leave-one-project-out rig, recall and
//! cost, classify-only agreement and overhead accounting.

mod metrics;
mod report;
mod rig;
pub mod synthetic;

pub use metrics::{cost, iqr, median, overhead_percent, percentile, recall};
pub use report::{emit_report, summary_by_project_csv, summary_overall_csv};
pub use rig::{
    classify_only_recall, classify_only_table, overhead_report, run_session, run_standard_rig,
    OverheadReport, ProjectSummary, RigConfig, RigResult, RunRecord, Summary,
};
