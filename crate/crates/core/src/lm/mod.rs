//! Sentence scoring with language models.
//!
//! Any model used for candidate ranking implements [`LmScorer`]: given a token
//! sequence it returns the mean natural-log probability per token. The
//! trigram backoff model in [`ngram`] is the trained implementation;
//! [`fixed::ScoreTable`] serves precomputed scores for fixtures and for models
//! that live outside this crate.

use thiserror::Error;

pub mod arpa;
pub mod fixed;
pub mod ngram;

pub use fixed::ScoreTable;
pub use ngram::{train, NgramModel, TrainConfig};

pub const START: &str = "<s>";
pub const END: &str = "</s>";
pub const UNK: &str = "<unk>";

#[derive(Debug, Error)]
pub enum LmError {
    #[error("no training data")]
    EmptyCorpus,
    #[error("cannot score empty sequence")]
    EmptySequence,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub trait LmScorer: Send + Sync {
    /// Mean log-probability per token. Must be deterministic.
    fn score(&self, tokens: &[&str]) -> Result<f64, LmError>;
}

impl<T: LmScorer + ?Sized> LmScorer for Box<T> {
    fn score(&self, tokens: &[&str]) -> Result<f64, LmError> {
        (**self).score(tokens)
    }
}

/// Read a model file, choosing the format from its content: ARPA files start
/// with `\data\`, anything else is read as a [`ScoreTable`].
pub fn load_scorer(text: &str) -> Result<Box<dyn LmScorer>, LmError> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty());
    if first == Some("\\data\\") {
        Ok(Box::new(arpa::load_arpa(text)?))
    } else {
        Ok(Box::new(ScoreTable::parse(text)?))
    }
}
