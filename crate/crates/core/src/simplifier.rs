//! Candidate ranking and the iterate-to-convergence driver.
//!
//! Each pass extracts non-overlapping spans, ranks every span independently
//! against the pass input, and applies all chosen replacements at once. Passes
//! repeat until nothing changes, a sentence repeats, or the iteration cap is
//! reached.
//!
//! A candidate's score is `alpha * LM(sentence with candidate) + (1 - alpha) *
//! WF(candidate)`. Ties go to the higher LM score, then to the
//! lexicographically smallest term.

use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lm::LmScorer;
use crate::ontology::{AlternativeGroup, PhraseTable};
use crate::textproc::{self, Span, Token};
use crate::wordfreq::TermScorer;

pub const DEFAULT_MAX_ITERATIONS: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("alpha must be within [0, 1], got {0}")]
    Alpha(f64),
    #[error("max_iterations must be at least 1")]
    Iterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimplifierConfig {
    pub alpha: f64,
    pub max_iterations: usize,
    /// Score the original span text alongside its alternatives.
    pub include_original: bool,
}

impl Default for SimplifierConfig {
    fn default() -> Self {
        Self {
            alpha: 0.7,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            include_original: true,
        }
    }
}

impl SimplifierConfig {
    pub fn new(alpha: f64) -> Result<Self, ConfigError> {
        Self {
            alpha,
            ..Self::default()
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self, ConfigError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        if self.max_iterations < 1 {
            return Err(ConfigError::Iterations);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub term: String,
    pub candidate_sentence: String,
    pub lm_score: f64,
    pub wf_score: f64,
    pub combined: f64,
    pub is_original: bool,
}

/// Outcome of ranking one span.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    pub span: Span,
    pub chosen: String,
    pub replaced: bool,
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iteration: usize,
    pub input: String,
    pub output: String,
    pub decisions: Vec<Decision>,
}

impl IterationTrace {
    pub fn replacements(&self) -> usize {
        self.decisions.iter().filter(|d| d.replaced).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// A pass made no replacement.
    Converged,
    /// A pass produced a sentence already seen in this run.
    Cycle,
    /// `max_iterations` passes all made replacements.
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplificationResult {
    pub original: String,
    #[serde(rename = "final")]
    pub final_sentence: String,
    /// Passes that changed the sentence.
    pub iterations: usize,
    pub changed: bool,
    pub stop_reason: StopReason,
    pub trace: Vec<IterationTrace>,
}

impl SimplificationResult {
    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::Converged
    }
}

fn score_order(a: &Candidate, b: &Candidate) -> Ordering {
    a.combined
        .total_cmp(&b.combined)
        .then(a.lm_score.total_cmp(&b.lm_score))
        .then_with(|| b.term.cmp(&a.term))
}

/// Score every candidate for `span` and return them with the index of the
/// winner.
pub fn rank_span(
    tokens: &[Token],
    span: &Span,
    group: &AlternativeGroup,
    lm: &dyn LmScorer,
    ft: &dyn TermScorer,
    alpha: f64,
    include_original: bool,
) -> (usize, Vec<Candidate>) {
    let mut terms: Vec<(Vec<&str>, bool)> = group
        .labels
        .iter()
        .map(|p| {
            (
                p.tokens().iter().map(String::as_str).collect::<Vec<_>>(),
                false,
            )
        })
        .filter(|(t, _)| t.join(" ") != span.matched)
        .collect();
    if include_original {
        terms.push((
            tokens[span.start..span.end]
                .iter()
                .map(|t| t.norm.as_str())
                .collect(),
            true,
        ));
    }

    let prefix: Vec<&str> = tokens[..span.start]
        .iter()
        .map(|t| t.norm.as_str())
        .collect();
    let suffix: Vec<&str> = tokens[span.end..].iter().map(|t| t.norm.as_str()).collect();

    let candidates: Vec<Candidate> = terms
        .into_iter()
        .map(|(term, is_original)| {
            let sentence: Vec<&str> = prefix.iter().chain(&term).chain(&suffix).copied().collect();
            let lm_score = lm
                .score(&sentence)
                .expect("candidate sentences are never empty");
            let wf_score = ft.term_score(&term).expect("labels are never empty");
            Candidate {
                term: term.join(" "),
                candidate_sentence: sentence.join(" "),
                lm_score,
                wf_score,
                combined: alpha * lm_score + (1.0 - alpha) * wf_score,
                is_original,
            }
        })
        .collect();

    let best = candidates
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| score_order(a, b))
        .map(|(i, _)| i)
        .expect("a group always yields at least one candidate");
    (best, candidates)
}

fn replacement_tokens(term: &str, replaced: &[Token], sentence_initial: bool) -> Vec<Token> {
    let capitalize = sentence_initial
        && replaced
            .first()
            .and_then(|t| t.text.chars().next())
            .is_some_and(char::is_uppercase);
    let lead_space = replaced.first().is_some_and(|t| t.space_before);
    textproc::tokenize(term)
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let mut text = t.norm.clone();
            if i == 0 && capitalize {
                let mut chars = text.chars();
                if let Some(first) = chars.next() {
                    text = first.to_uppercase().chain(chars).collect();
                }
            }
            Token::new(text, 0, if i == 0 { lead_space } else { t.space_before })
        })
        .collect()
}

/// One extract-and-replace pass over `tokens`.
pub fn simplify_once(
    tokens: &[Token],
    table: &PhraseTable,
    lm: &dyn LmScorer,
    ft: &dyn TermScorer,
    config: &SimplifierConfig,
) -> (Vec<Token>, Vec<Decision>) {
    let spans = textproc::extract_spans(tokens, table, None);
    let mut decisions = Vec::with_capacity(spans.len());
    for span in spans {
        let group = table
            .group(span.group_id)
            .expect("span group comes from the table");
        let (best, candidates) = rank_span(
            tokens,
            &span,
            group,
            lm,
            ft,
            config.alpha,
            config.include_original,
        );
        let winner = &candidates[best];
        decisions.push(Decision {
            chosen: winner.term.clone(),
            replaced: !winner.is_original && winner.term != span.matched,
            span,
            candidates,
        });
    }

    let mut out = tokens.to_vec();
    for d in decisions.iter().rev().filter(|d| d.replaced) {
        let new = replacement_tokens(
            &d.chosen,
            &tokens[d.span.start..d.span.end],
            d.span.start == 0,
        );
        out.splice(d.span.start..d.span.end, new);
    }
    textproc::reindex(&mut out);
    (out, decisions)
}

fn texts(tokens: &[Token]) -> Vec<&str> {
    tokens.iter().map(|t| t.text.as_str()).collect()
}

pub fn simplify(
    sentence: &str,
    table: &PhraseTable,
    lm: &dyn LmScorer,
    ft: &dyn TermScorer,
    config: &SimplifierConfig,
) -> SimplificationResult {
    let original_tokens = textproc::tokenize(sentence);
    let mut current = original_tokens.clone();
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    seen.insert(current.iter().map(|t| t.norm.clone()).collect());

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut stop_reason = StopReason::IterationCap;

    for pass in 1..=config.max_iterations {
        let (next, decisions) = simplify_once(&current, table, lm, ft, config);
        let entry = IterationTrace {
            iteration: pass,
            input: textproc::render(&current),
            output: textproc::render(&next),
            decisions,
        };
        let replaced = entry.replacements();
        trace.push(entry);
        if replaced == 0 {
            stop_reason = StopReason::Converged;
            break;
        }
        iterations += 1;
        current = next;
        if !seen.insert(current.iter().map(|t| t.norm.clone()).collect()) {
            stop_reason = StopReason::Cycle;
            break;
        }
    }

    let final_sentence = if texts(&current) == texts(&original_tokens) {
        sentence.to_string()
    } else {
        textproc::render(&current)
    };
    SimplificationResult {
        original: sentence.to_string(),
        changed: final_sentence != sentence,
        final_sentence,
        iterations,
        stop_reason,
        trace,
    }
}

/// Simplify many sentences in parallel; output order follows input order.
pub fn simplify_batch<S: AsRef<str> + Sync>(
    sentences: &[S],
    table: &PhraseTable,
    lm: &dyn LmScorer,
    ft: &dyn TermScorer,
    config: &SimplifierConfig,
) -> Vec<SimplificationResult> {
    sentences
        .par_iter()
        .map(|s| simplify(s.as_ref(), table, lm, ft, config))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationStats {
    pub sentences: usize,
    pub changed: usize,
    pub mean: f64,
    pub median: f64,
    pub max: usize,
}

pub fn iteration_stats(results: &[SimplificationResult]) -> IterationStats {
    let mut counts: Vec<usize> = results.iter().map(|r| r.iterations).collect();
    counts.sort_unstable();
    let n = counts.len();
    let (mean, median) = if n == 0 {
        (0.0, 0.0)
    } else {
        let mean = counts.iter().sum::<usize>() as f64 / n as f64;
        let median = if n % 2 == 1 {
            counts[n / 2] as f64
        } else {
            (counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0
        };
        (mean, median)
    };
    IterationStats {
        sentences: n,
        changed: results.iter().filter(|r| r.changed).count(),
        mean,
        median,
        max: counts.last().copied().unwrap_or(0),
    }
}
