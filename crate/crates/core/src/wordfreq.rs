//! Word probabilities and the minimum-log-frequency term score.

use std::collections::HashMap;
use std::io::BufRead;

use thiserror::Error;

use crate::textproc;

pub const DEFAULT_EPSILON: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FreqError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no training data")]
    EmptyCorpus,
    #[error("cannot score an empty term")]
    EmptyTerm,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that can score how familiar a term is. Higher is simpler.
pub trait TermScorer: Send + Sync {
    fn term_score(&self, term: &[&str]) -> Result<f64, FreqError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    probs: HashMap<String, f64>,
    epsilon: f64,
}

impl Default for FrequencyTable {
    fn default() -> Self {
        Self::new(HashMap::new())
    }
}

impl FrequencyTable {
    pub fn new(probs: HashMap<String, f64>) -> Self {
        let probs = probs
            .into_iter()
            .map(|(w, p)| (w.to_lowercase(), p))
            .collect();
        Self {
            probs,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        assert!(epsilon > 0.0, "epsilon must be positive");
        self.epsilon = epsilon;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// P(w), 0 for unknown words.
    pub fn prob(&self, word: &str) -> f64 {
        match self.probs.get(word) {
            Some(&p) => p,
            None => self.probs.get(&word.to_lowercase()).copied().unwrap_or(0.0),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.probs.iter().map(|(w, &p)| (w.as_str(), p))
    }

    /// Load `word<TAB>probability` rows. Later duplicates overwrite earlier ones.
    pub fn load<R: BufRead>(reader: R) -> Result<Self, FreqError> {
        let mut probs = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(word), Some(p), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(FreqError::Parse {
                    line: line_no,
                    message: "expected word<TAB>probability".into(),
                });
            };
            let p: f64 = p.trim().parse().map_err(|_| FreqError::Parse {
                line: line_no,
                message: format!("not a number: {p:?}"),
            })?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(FreqError::Parse {
                    line: line_no,
                    message: format!("probability {p} outside (0, 1]"),
                });
            }
            let word = word.trim().to_lowercase();
            if probs.insert(word.clone(), p).is_some() {
                log::warn!("line {line_no}: duplicate word {word:?}, keeping the later value");
            }
        }
        Ok(Self {
            probs,
            epsilon: DEFAULT_EPSILON,
        })
    }

    /// P(w) = C(w) / |W| over the tokenized, lowercased corpus.
    pub fn build<R: BufRead>(reader: R) -> Result<Self, FreqError> {
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut total = 0u64;
        for line in reader.lines() {
            for tok in textproc::tokenize(&line?) {
                *counts.entry(tok.norm).or_default() += 1;
                total += 1;
            }
        }
        if total == 0 {
            return Err(FreqError::EmptyCorpus);
        }
        let probs = counts
            .into_iter()
            .map(|(w, c)| (w, c as f64 / total as f64))
            .collect();
        Ok(Self {
            probs,
            epsilon: DEFAULT_EPSILON,
        })
    }

    /// `min_i ln(P(w_i) + ε)`.
    pub fn wf<S: AsRef<str>>(&self, term: &[S]) -> Result<f64, FreqError> {
        term.iter()
            .map(|w| (self.prob(w.as_ref()) + self.epsilon).ln())
            .reduce(f64::min)
            .ok_or(FreqError::EmptyTerm)
    }

    /// Rows sorted by word, for reproducible output.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<_> = self.probs.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        rows.into_iter()
            .map(|(w, p)| format!("{w}\t{p}\n"))
            .collect()
    }
}

impl TermScorer for FrequencyTable {
    fn term_score(&self, term: &[&str]) -> Result<f64, FreqError> {
        self.wf(term)
    }
}
