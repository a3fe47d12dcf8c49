//! Shared fixtures for the criterion benches under `benches/`.

use std::sync::Arc;

use survey_core::corpus::leave_one_out;
use survey_core::harness::synthetic::{generate, SyntheticSpec};
use survey_core::{Corpus, FeatureMatrix, Vocabulary};

/// A synthetic leave-one-out split: `proj0` against the other projects.
pub struct Fixture {
    pub test: Arc<Corpus>,
    pub train: Corpus,
}

pub fn fixture(projects: usize, size: usize) -> Fixture {
    let corpora = generate(&SyntheticSpec {
        projects,
        comments_per_project: size,
        ..Default::default()
    });
    let (train, test) = leave_one_out(&corpora, "proj0").expect("proj0 exists");
    Fixture {
        test: Arc::new(test),
        train,
    }
}

/// TF-IDF features and labels of a training corpus.
pub fn features(train: &Corpus) -> (FeatureMatrix, Vec<bool>) {
    let texts = train.texts();
    let vocab = Vocabulary::fit(&texts, 1).expect("non-empty corpus");
    let x = vocab.transform(&texts);
    (x, train.labels().expect("labeled corpus"))
}
