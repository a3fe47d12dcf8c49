//! Classifiers behind the sorters, plus the one-dimensional logistic curve
//! used by the estimator.

mod logistic;
mod svm;
mod tree;

pub use logistic::{fit_logistic, LogisticCurve, PROB_EPS, SLOPE_CAP};
pub use svm::{hinge_objective, train_linear_svm, LinearModel, LinearSvmConfig};
pub use tree::{train_ensemble, DecisionTree, TreeEnsemble};

use crate::error::{Error, Result};

pub(crate) fn check_rows(rows: usize, labels: usize) -> Result<()> {
    if rows != labels {
        return Err(Error::Shape {
            what: "labels",
            expected: rows,
            actual: labels,
        });
    }
    Ok(())
}
