//! Tokenization and TF-IDF features.
//!
//! Weights are `tf · idf` with raw term counts and the smoothed
//! `idf = ln((1 + N) / (1 + df)) + 1`, followed by L2 row normalization.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::FeatureMatrix;

/// Lower-cased alphanumeric runs of at least two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|tok| tok.chars().nth(1).is_some())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Fits a vocabulary over the terms that occur in at least `min_df`
    /// documents. Columns follow lexicographic term order.
    pub fn fit<S: AsRef<str>>(docs: &[S], min_df: usize) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::Contract(
                "cannot fit a vocabulary on zero documents".into(),
            ));
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in docs {
            let mut toks = tokenize(doc.as_ref());
            toks.sort_unstable();
            toks.dedup();
            for t in toks {
                *df.entry(t).or_default() += 1;
            }
        }
        let (terms, df): (Vec<String>, Vec<usize>) =
            df.into_iter().filter(|&(_, n)| n >= min_df.max(1)).unzip();
        if terms.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let mut vocab = Vocabulary {
            terms,
            df,
            n_docs: docs.len(),
            index: HashMap::new(),
        };
        vocab.rebuild_index();
        Ok(vocab)
    }

    /// Restores the lookup table after deserialization.
    pub fn rebuild_index(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn document_frequency(&self, term: &str) -> Option<usize> {
        self.column(term).map(|c| self.df[c as usize])
    }

    pub fn column(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn idf(&self, column: u32) -> f64 {
        let n = self.n_docs as f64;
        ((1.0 + n) / (1.0 + self.df[column as usize] as f64)).ln() + 1.0
    }

    fn row(&self, doc: &str) -> Vec<(u32, f64)> {
        let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
        for tok in tokenize(doc) {
            if let Some(c) = self.column(&tok) {
                *counts.entry(c).or_default() += 1.0;
            }
        }
        let mut row: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(c, tf)| (c, tf * self.idf(c)))
            .collect();
        let norm = row.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|(_, w)| *w /= norm);
        }
        row
    }

    /// TF-IDF rows for `docs`; out-of-vocabulary tokens are ignored and a
    /// document with no known token becomes an all-zero row.
    pub fn transform<S: AsRef<str> + Sync>(&self, docs: &[S]) -> FeatureMatrix {
        let rows: Vec<Vec<(u32, f64)>> = docs.par_iter().map(|d| self.row(d.as_ref())).collect();
        let mut m = FeatureMatrix::empty(self.len());
        for r in rows {
            m.push_row(r);
        }
        m
    }
}
