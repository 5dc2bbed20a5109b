//! Lookup-table scorer.
//!
//! File format: `text<TAB>score` per line, where `text` is the space-joined
//! token sequence (matched case-insensitively). A row whose text is `*` sets
//! the score returned for unlisted sequences (default -100).

use std::collections::HashMap;

use super::{LmError, LmScorer};
use crate::wordfreq::{FreqError, TermScorer};

pub const DEFAULT_FALLBACK: f64 = -100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    scores: HashMap<String, f64>,
    fallback: f64,
}

impl Default for ScoreTable {
    fn default() -> Self {
        Self {
            scores: HashMap::new(),
            fallback: DEFAULT_FALLBACK,
        }
    }
}

impl ScoreTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_fallback(mut self, fallback: f64) -> Self {
        self.fallback = fallback;
        self
    }

    pub fn insert(&mut self, text: &str, score: f64) {
        self.scores.insert(key_of(text.split_whitespace()), score);
    }

    pub fn with(mut self, text: &str, score: f64) -> Self {
        self.insert(text, score);
        self
    }

    pub fn fallback(&self) -> f64 {
        self.fallback
    }

    pub fn lookup(&self, tokens: &[&str]) -> f64 {
        self.scores
            .get(&key_of(tokens.iter().copied()))
            .copied()
            .unwrap_or(self.fallback)
    }

    /// Scale every stored score and the fallback by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            scores: self
                .scores
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
            fallback: self.fallback * factor,
        }
    }

    pub fn parse(text: &str) -> Result<Self, LmError> {
        let mut table = Self::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((sentence, score)) = line.rsplit_once('\t') else {
                return Err(LmError::Parse {
                    line: line_no,
                    message: "expected text<TAB>score".into(),
                });
            };
            let score: f64 = score.trim().parse().map_err(|_| LmError::Parse {
                line: line_no,
                message: format!("not a number: {score:?}"),
            })?;
            if !score.is_finite() {
                return Err(LmError::Parse {
                    line: line_no,
                    message: "score must be finite".into(),
                });
            }
            if sentence.trim() == "*" {
                table.fallback = score;
            } else {
                table.insert(sentence, score);
            }
        }
        Ok(table)
    }
}

fn key_of<'a>(tokens: impl Iterator<Item = &'a str>) -> String {
    tokens.map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

impl LmScorer for ScoreTable {
    fn score(&self, tokens: &[&str]) -> Result<f64, LmError> {
        if tokens.is_empty() {
            return Err(LmError::EmptySequence);
        }
        Ok(self.lookup(tokens))
    }
}

impl TermScorer for ScoreTable {
    fn term_score(&self, term: &[&str]) -> Result<f64, FreqError> {
        if term.is_empty() {
            return Err(FreqError::EmptyTerm);
        }
        Ok(self.lookup(term))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows_and_fallback() {
        let t = ScoreTable::parse("Patient had multiple heart attacks .\t-3.91\n*\t-50\n").unwrap();
        assert_eq!(
            t.score(&["patient", "had", "multiple", "heart", "attacks", "."])
                .unwrap(),
            -3.91
        );
        assert_eq!(t.score(&["other"]).unwrap(), -50.0);
        assert!(t.score(&[]).is_err());
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(ScoreTable::parse("no tab here").is_err());
        assert!(ScoreTable::parse("x\tnope").is_err());
        assert!(ScoreTable::parse("x\tNaN").is_err());
    }
}
