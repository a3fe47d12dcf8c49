//! Seeded generator of SATD-like comment corpora for tests, benchmarks and
//! timing runs when the real dataset is not at hand.

use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, NEGATIVE_MARKER};
use crate::error::{Error, Result};
use crate::seed;

const CUES: &[&str] = &[
    "todo",
    "fixme",
    "hack",
    "workaround",
    "kludge",
    "ugly",
    "temporary",
    "xxx",
    "broken",
    "refactor",
    "cleanup",
    "stupid",
    "crap",
    "quick",
    "dirty",
];

const HEDGES: &[&str] = &[
    "should", "maybe", "probably", "not", "sure", "later", "why", "needed", "really", "remove",
];

const COMMON: &[&str] = &[
    "the",
    "this",
    "returns",
    "value",
    "method",
    "class",
    "object",
    "list",
    "string",
    "file",
    "name",
    "set",
    "get",
    "create",
    "new",
    "check",
    "if",
    "is",
    "of",
    "for",
    "to",
    "and",
    "in",
    "with",
    "default",
    "instance",
    "parameter",
    "param",
    "return",
    "null",
    "node",
    "element",
    "index",
    "map",
    "key",
    "type",
    "field",
    "model",
    "event",
    "listener",
    "handler",
    "buffer",
    "stream",
    "reader",
    "writer",
    "config",
    "option",
    "property",
    "table",
    "query",
    "result",
    "error",
    "exception",
    "throws",
    "see",
    "link",
    "code",
    "array",
    "size",
    "count",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub projects: usize,
    pub comments_per_project: usize,
    /// Fraction of SATD comments per project.
    pub prevalence: f64,
    /// Fraction of SATD comments written without any cue word.
    pub hidden_fraction: f64,
    /// Fraction of ordinary comments that mention a cue word anyway.
    pub noise_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            projects: 4,
            comments_per_project: 500,
            prevalence: 0.06,
            hidden_fraction: 0.15,
            noise_fraction: 0.02,
            seed: 0,
        }
    }
}

fn words(rng: &mut ChaCha8Rng, from: &[&str], n: usize, out: &mut Vec<String>) {
    for _ in 0..n {
        out.push(from.choose(rng).expect("non-empty word list").to_string());
    }
}

fn comment(rng: &mut ChaCha8Rng, project: usize, satd: bool, spec: &SyntheticSpec) -> String {
    let mut toks = Vec::new();
    let n = rng.random_range(3..12);
    words(rng, COMMON, n, &mut toks);
    // project-specific identifiers
    for _ in 0..rng.random_range(0..3) {
        toks.push(format!("p{project}id{}", rng.random_range(0..200)));
    }
    if satd {
        if rng.random::<f64>() < spec.hidden_fraction {
            let k = rng.random_range(1..3);
            words(rng, HEDGES, k, &mut toks);
        } else {
            let k = rng.random_range(1..3);
            words(rng, CUES, k, &mut toks);
            if rng.random::<f64>() < 0.5 {
                words(rng, HEDGES, 1, &mut toks);
            }
        }
    } else {
        if rng.random::<f64>() < spec.noise_fraction {
            words(rng, CUES, 1, &mut toks);
        }
        if rng.random::<f64>() < 0.1 {
            words(rng, HEDGES, 1, &mut toks);
        }
    }
    let len = toks.len();
    for i in (1..len).rev() {
        let j = rng.random_range(0..=i);
        toks.swap(i, j);
    }
    toks.join(" ")
}

/// Projects named `proj0`, `proj1`, ... with exactly
/// `round(prevalence · size)` SATD comments each, at random positions.
pub fn generate(spec: &SyntheticSpec) -> Vec<Corpus> {
    (0..spec.projects)
        .map(|p| {
            let mut rng = seed::rng(seed::derive(spec.seed, &[p as u64]));
            let n = spec.comments_per_project;
            let positives = ((spec.prevalence * n as f64).round() as usize).clamp(1, n);
            let chosen = rand::seq::index::sample(&mut rng, n, positives).into_vec();
            let mut is_satd = vec![false; n];
            chosen.into_iter().for_each(|i| is_satd[i] = true);
            let rows: Vec<(String, bool)> = is_satd
                .into_iter()
                .map(|satd| (comment(&mut rng, p, satd, spec), satd))
                .collect();
            Corpus::from_labeled(&format!("proj{p}"), rows)
        })
        .collect()
}

/// Writes one `<name>.csv` per corpus in the named-column layout
/// (`projectname,classification,commenttext`), readable by
/// [`load_dataset_dir`](crate::corpus::load_dataset_dir). Comments keep their
/// classification; unclassified SATD comments are written as `DESIGN`.
pub fn write_dataset(corpora: &[Corpus], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for c in corpora {
        let path = dir.join(format!("{}.csv", c.name));
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Csv {
            path: path.clone(),
            source: e,
        })?;
        let csv_err = |e| Error::Csv {
            path: path.clone(),
            source: e,
        };
        w.write_record(["projectname", "classification", "commenttext"])
            .map_err(csv_err)?;
        for comment in &c.comments {
            let class = match (&comment.classification, comment.label) {
                (Some(c), _) => c.as_str(),
                (None, Some(true)) => "DESIGN",
                (None, _) => NEGATIVE_MARKER,
            };
            w.write_record([c.name.as_str(), class, comment.text.as_str()])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
