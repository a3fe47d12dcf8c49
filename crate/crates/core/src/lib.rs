//! Active-learning engine for surveying self-admitted technical debt (SATD)
//! labels in source-code comments.
//!
//! A survey session ranks the unread comments of one project with a model
//! trained on other projects, serves them to a reader in batches, retrains on
//! every answer, estimates how many SATD comments remain and stops once the
//! confirmed count reaches a target fraction of that estimate.
//!
//! The [`harness`] module replays that loop against a simulated reader over a
//! leave-one-project-out rig and reports recall and cost.

pub mod corpus;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod learners;
pub mod ranking;
pub mod seed;
pub mod sparse;
pub mod stopping;
pub mod survey;
pub mod textprep;

pub use corpus::{Comment, Corpus, DatasetFormat};
pub use error::{Error, Result};
pub use estimator::{Estimate, EstimateInput};
pub use learners::{LinearModel, LinearSvmConfig, LogisticCurve, TreeEnsemble};
pub use ranking::Ranking;
pub use sparse::FeatureMatrix;
pub use stopping::{RetrievalCurve, StopRule, StoppingDecision};
pub use survey::{
    ClassifierConfig, IterationReport, Oracle, SessionStatus, SurveyConfig, SurveySession,
};
pub use textprep::Vocabulary;
