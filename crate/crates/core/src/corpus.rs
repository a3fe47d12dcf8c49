//! Labeled comment datasets.
//!
//! The public SATD dataset ships as CSV with a header naming the project, the
//! technical-debt classification and the comment text. Every classification
//! other than the negative marker counts as SATD.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classification string that marks a comment as not technical debt.
pub const NEGATIVE_MARKER: &str = "WITHOUT_CLASSIFICATION";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub id: usize,
    pub project: String,
    pub text: String,
    /// Raw classification as it appears in the dataset.
    pub classification: Option<String>,
    /// `Some(true)` is SATD.
    pub label: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub comments: Vec<Comment>,
}

impl Corpus {
    /// Builds a corpus from `(text, label)` pairs, assigning ids in order.
    pub fn from_labeled<S: Into<String>>(
        name: &str,
        rows: impl IntoIterator<Item = (S, bool)>,
    ) -> Self {
        let comments = rows
            .into_iter()
            .enumerate()
            .map(|(id, (text, label))| Comment {
                id,
                project: name.to_string(),
                text: text.into(),
                classification: Some(if label { "DEFECT" } else { NEGATIVE_MARKER }.to_string()),
                label: Some(label),
            })
            .collect();
        Corpus {
            name: name.to_string(),
            comments,
        }
    }

    pub fn len(&self) -> usize {
        self.comments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.comments.iter().map(|c| c.text.as_str()).collect()
    }

    /// All labels, or `None` if any comment is unlabeled.
    pub fn labels(&self) -> Option<Vec<bool>> {
        self.comments.iter().map(|c| c.label).collect()
    }

    pub fn positives(&self) -> usize {
        self.comments
            .iter()
            .filter(|c| c.label == Some(true))
            .count()
    }

    /// Fraction of SATD comments; `None` unless every comment is labeled.
    pub fn prevalence(&self) -> Option<f64> {
        if self.is_empty() || self.comments.iter().any(|c| c.label.is_none()) {
            return None;
        }
        Some(self.positives() as f64 / self.len() as f64)
    }

    fn reindexed(mut self) -> Self {
        for (id, c) in self.comments.iter_mut().enumerate() {
            c.id = id;
        }
        self
    }
}

/// Column layout of a dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DatasetFormat {
    /// Header names `projectname`, `classification`, `commenttext` in any
    /// order; matched ignoring case and punctuation.
    #[default]
    Named,
    /// Positional columns; the first row is still treated as a header.
    Columns {
        project: usize,
        classification: usize,
        text: usize,
    },
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("named") || s.eq_ignore_ascii_case("maldonado") {
            return Ok(DatasetFormat::Named);
        }
        let bad = || Error::Config(format!("unknown dataset format `{s}`"));
        let cols = s.strip_prefix("columns:").ok_or_else(bad)?;
        let idx: Vec<usize> = cols
            .split(',')
            .map(|c| c.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match idx[..] {
            [project, classification, text] => Ok(DatasetFormat::Columns {
                project,
                classification,
                text,
            }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetFormat::Named => f.write_str("named"),
            DatasetFormat::Columns {
                project,
                classification,
                text,
            } => write!(f, "columns:{project},{classification},{text}"),
        }
    }
}

fn header_key(h: &str) -> String {
    h.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

fn resolve_columns(
    path: &Path,
    headers: &csv::StringRecord,
    format: DatasetFormat,
) -> Result<[usize; 3]> {
    match format {
        DatasetFormat::Named => {
            let find = |name: &str| {
                headers
                    .iter()
                    .position(|h| header_key(h) == name)
                    .ok_or_else(|| Error::MissingColumn {
                        path: path.to_path_buf(),
                        column: name.to_string(),
                    })
            };
            Ok([
                find("projectname")?,
                find("classification")?,
                find("commenttext")?,
            ])
        }
        DatasetFormat::Columns {
            project,
            classification,
            text,
        } => {
            let cols = [project, classification, text];
            for (c, name) in cols.iter().zip(["project", "classification", "text"]) {
                if *c >= headers.len() {
                    return Err(Error::MissingColumn {
                        path: path.to_path_buf(),
                        column: format!("{name} (index {c})"),
                    });
                }
            }
            Ok(cols)
        }
    }
}

/// Reads one dataset file. Labels are left raw; see [`binarize_labels`].
///
/// Comments whose text is blank after trimming are dropped and counted in a
/// warning. Ids are assigned `0..n` in file order over the kept rows.
pub fn load_corpus(path: &Path, format: DatasetFormat) -> Result<Corpus> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let headers = reader.headers().map_err(csv_err)?.clone();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if headers.is_empty() {
        return Err(Error::EmptyCorpus(name));
    }
    let [pc, cc, tc] = resolve_columns(path, &headers, format)?;

    let mut comments = Vec::new();
    let mut blank = 0usize;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let text = field(tc);
        if text.trim().is_empty() {
            blank += 1;
            continue;
        }
        comments.push(Comment {
            id: comments.len(),
            project: field(pc).to_string(),
            text: text.to_string(),
            classification: Some(field(cc).to_string()),
            label: None,
        });
    }
    if blank > 0 {
        log::warn!("{}: dropped {blank} blank comments", path.display());
    }
    if comments.is_empty() {
        return Err(Error::EmptyCorpus(name));
    }
    Ok(Corpus { name, comments })
}

/// SATD iff the raw classification differs (ignoring case) from
/// [`NEGATIVE_MARKER`]. Comments without a classification stay unlabeled.
pub fn binarize_labels(mut corpus: Corpus) -> Corpus {
    for c in &mut corpus.comments {
        c.label = c
            .classification
            .as_deref()
            .map(|raw| !raw.trim().eq_ignore_ascii_case(NEGATIVE_MARKER));
    }
    corpus
}

/// Short project key: lower-cased, without an `apache-` prefix and without
/// the version suffix (`apache-ant-1.7.0` becomes `ant`).
pub fn project_key(raw: &str) -> String {
    let lower = raw.trim().to_lowercase();
    let base = lower.strip_prefix("apache-").unwrap_or(&lower);
    base.split('-').next().unwrap_or(base).to_string()
}

/// Loads every `*.csv` under `dir` (sorted by file name), binarizes labels and
/// regroups the rows into one corpus per [`project_key`], in order of first
/// appearance. Works for one file per project and for a single combined file.
pub fn load_dataset_dir(dir: &Path, format: DatasetFormat) -> Result<Vec<Corpus>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::EmptyCorpus(dir.display().to_string()));
    }

    let mut corpora: Vec<Corpus> = Vec::new();
    for file in &files {
        let loaded = binarize_labels(load_corpus(file, format)?);
        for comment in loaded.comments {
            let key = project_key(&comment.project);
            let slot = match corpora.iter().position(|c| c.name == key) {
                Some(i) => i,
                None => {
                    corpora.push(Corpus {
                        name: key,
                        comments: Vec::new(),
                    });
                    corpora.len() - 1
                }
            };
            corpora[slot].comments.push(comment);
        }
    }
    Ok(corpora.into_iter().map(Corpus::reindexed).collect())
}

/// Splits off the project named `test_name`; the rest are concatenated (in
/// order) into a training corpus with fresh ids.
pub fn leave_one_out(corpora: &[Corpus], test_name: &str) -> Result<(Corpus, Corpus)> {
    let mut matches = corpora.iter().filter(|c| c.name == test_name);
    let test = matches
        .next()
        .ok_or_else(|| Error::UnknownProject(test_name.to_string()))?;
    if matches.next().is_some() {
        return Err(Error::Config(format!(
            "more than one corpus is named `{test_name}`"
        )));
    }
    let comments = corpora
        .iter()
        .filter(|c| c.name != test_name)
        .flat_map(|c| c.comments.iter().cloned())
        .collect();
    let train = Corpus {
        name: format!("all-but-{test_name}"),
        comments,
    }
    .reindexed();
    Ok((train, test.clone()))
}
