use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// The reader who labels served comments.
#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    /// Answers from a fully labeled reference copy of the corpus.
    Simulated { reference: Vec<bool> },
    /// A person answering through the service.
    Interactive,
}

impl Oracle {
    pub fn simulated(reference: &Corpus) -> Result<Self> {
        let reference = reference.labels().ok_or_else(|| {
            Error::Contract(format!(
                "reference corpus `{}` is not fully labeled",
                reference.name
            ))
        })?;
        Ok(Oracle::Simulated { reference })
    }

    pub fn answer(&self, id: usize) -> Result<bool> {
        match self {
            Oracle::Simulated { reference } => {
                reference.get(id).copied().ok_or(Error::UnknownComment(id))
            }
            Oracle::Interactive => Err(Error::Contract(
                "an interactive oracle answers through the labeling service".into(),
            )),
        }
    }

    pub fn answer_all(&self, ids: &[usize]) -> Result<Vec<(usize, bool)>> {
        ids.iter().map(|&id| Ok((id, self.answer(id)?))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulated_answers_from_reference() {
        let c = Corpus::from_labeled("p", [("hack", true), ("ok", false)]);
        let o = Oracle::simulated(&c).unwrap();
        assert!(o.answer(0).unwrap());
        assert!(!o.answer(1).unwrap());
        assert!(matches!(o.answer(2), Err(Error::UnknownComment(2))));
    }

    #[test]
    fn requires_full_labels() {
        let mut c = Corpus::from_labeled("p", [("hack", true)]);
        c.comments[0].label = None;
        assert!(Oracle::simulated(&c).is_err());
        assert!(Oracle::Interactive.answer(0).is_err());
    }
}
