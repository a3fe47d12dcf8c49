use survey_core::learners::{hinge_objective, train_ensemble, train_linear_svm};
use survey_core::{FeatureMatrix, LinearSvmConfig};

fn two_blobs() -> (FeatureMatrix, Vec<bool>) {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..12 {
        let t = i as f64 * 0.05;
        rows.push(vec![1.0 + t, 0.8 - t * 0.5]);
        y.push(true);
        rows.push(vec![-0.6 - t * 0.3, -1.0 + t]);
        y.push(false);
    }
    (FeatureMatrix::from_dense(&rows, 2), y)
}

#[test]
fn svm_objective_no_worse_than_grid_search() {
    let (x, y) = two_blobs();
    let model = train_linear_svm(&x, &y, &LinearSvmConfig::default()).unwrap();
    assert!(model.converged);
    let ours = hinge_objective(&model.weights, model.bias, &x, &y, 1.0);

    let mut best = f64::INFINITY;
    let steps = 60;
    for i in 0..=steps {
        for j in 0..=steps {
            for k in 0..=steps {
                let g = |s: i32| -3.0 + 6.0 * s as f64 / steps as f64;
                let v = hinge_objective(&[g(i), g(j)], g(k), &x, &y, 1.0);
                best = best.min(v);
            }
        }
    }
    assert!(ours <= best + 1e-3, "trained {ours} vs grid {best}");

    let scores = model.decision_function(&x).unwrap();
    for (s, l) in scores.iter().zip(&y) {
        assert_eq!(*s > 0.0, *l);
    }
}

#[test]
fn decision_function_is_additive_in_features() {
    let (x, y) = two_blobs();
    let model = train_linear_svm(&x, &y, &LinearSvmConfig::default()).unwrap();
    let a = FeatureMatrix::from_dense(&[vec![0.3, 0.0]], 2);
    let b = FeatureMatrix::from_dense(&[vec![0.0, -0.7]], 2);
    let ab = FeatureMatrix::from_dense(&[vec![0.3, -0.7]], 2);
    let zero = FeatureMatrix::from_dense(&[vec![0.0, 0.0]], 2);
    let f = |m: &FeatureMatrix| model.decision_function(m).unwrap()[0];
    assert!((f(&ab) - (f(&a) + f(&b) - f(&zero))).abs() < 1e-12);
    assert_eq!(f(&zero), model.bias);
}

#[test]
fn ensemble_votes_do_not_depend_on_scoring_order() {
    let (x, y) = two_blobs();
    let ens = train_ensemble(&x, &y, 7, 0.9, 11).unwrap();
    let votes = ens.votes(&x).unwrap();
    let reversed: Vec<usize> = (0..x.rows()).rev().collect();
    let mut back = ens.votes(&x.select(&reversed)).unwrap();
    back.reverse();
    assert_eq!(votes, back);
    assert!(votes.iter().all(|&v| v <= 7));
    let again = train_ensemble(&x, &y, 7, 0.9, 11).unwrap();
    assert_eq!(again.votes(&x).unwrap(), votes);
}
