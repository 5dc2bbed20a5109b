//! Backoff n-gram model trained with interpolated absolute discounting.
//!
//! For an observed context `h` (count `c(h)`, `t(h)` distinct successors):
//!
//! ```text
//! P(w | h) = max(c(h,w) - D, 0) / c(h) + D * t(h) / c(h) * P(w | h')
//! ```
//!
//! where `h'` drops the oldest word. The unigram level interpolates with a
//! uniform distribution over the predictable vocabulary (every word type,
//! `</s>` and `<unk>`; never `<s>`). The trained model is stored in backoff
//! form: each observed n-gram keeps its interpolated probability and each
//! observed context keeps `ln(D * t(h) / c(h))` as its backoff weight, which is
//! exactly what an ARPA file holds.

use std::collections::{BTreeSet, HashMap};

use super::{LmError, LmScorer, END, START, UNK};
use crate::textproc;

pub type WordId = u32;

/// Log probability stored for n-grams ending in `<s>`, which are never
/// predicted (ARPA convention of -99 in log10).
pub const START_LOG_PROB: f64 = -99.0 * std::f64::consts::LN_10;

/// Score assigned to a word missing from the unigram table when the model has
/// no `<unk>` entry.
pub const MISSING_LOG_PROB: f64 = -99.0 * std::f64::consts::LN_10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub log_prob: f64,
    pub log_backoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub order: usize,
    pub discount: f64,
    /// Words seen fewer times than this are mapped to `<unk>`.
    pub min_count: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            order: 3,
            discount: 0.75,
            min_count: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    words: Vec<String>,
    ids: HashMap<String, WordId>,
    /// `tables[k - 1]` holds the k-grams.
    tables: Vec<HashMap<Vec<WordId>, Entry>>,
}

impl NgramModel {
    pub(crate) fn from_parts(
        order: usize,
        words: Vec<String>,
        tables: Vec<HashMap<Vec<WordId>, Entry>>,
    ) -> Self {
        let ids = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as WordId))
            .collect();
        Self {
            order,
            words,
            ids,
            tables,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.ids.get(word).copied()
    }

    pub(crate) fn tables(&self) -> &[HashMap<Vec<WordId>, Entry>] {
        &self.tables
    }

    pub fn ngram_counts(&self) -> Vec<usize> {
        self.tables.iter().map(HashMap::len).collect()
    }

    /// Every word the model can predict: all unigrams except `<s>`.
    pub fn predictable(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .tables
            .first()
            .map(|t| {
                t.keys()
                    .map(|k| self.words[k[0] as usize].as_str())
                    .filter(|w| *w != START)
                    .collect()
            })
            .unwrap_or_default();
        out.sort_unstable();
        out
    }

    /// Contexts with at least one observed continuation, shortest first.
    /// The empty context is always included.
    pub fn observed_contexts(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new()];
        for table in self.tables.iter().skip(1) {
            let ctxs: BTreeSet<Vec<String>> = table
                .iter()
                .filter(|(_, e)| e.log_prob > START_LOG_PROB)
                .map(|(k, _)| {
                    k[..k.len() - 1]
                        .iter()
                        .map(|&i| self.words[i as usize].clone())
                        .collect()
                })
                .collect();
            out.extend(ctxs);
        }
        out
    }

    fn map_word(&self, word: &str) -> Option<WordId> {
        self.ids
            .get(word)
            .or_else(|| self.ids.get(&word.to_lowercase()))
            .or_else(|| self.ids.get(UNK))
            .copied()
    }

    /// ln P(word | context) with the context truncated to `order - 1` words.
    pub fn log_prob(&self, context: &[&str], word: &str) -> f64 {
        let ctx: Vec<Option<WordId>> = context.iter().map(|w| self.map_word(w)).collect();
        self.cond(&ctx, self.map_word(word))
    }

    fn cond(&self, context: &[Option<WordId>], word: Option<WordId>) -> f64 {
        let Some(word) = word else {
            return MISSING_LOG_PROB;
        };
        let keep = context.len().min(self.order - 1);
        let mut ctx = &context[context.len() - keep..];
        let mut acc = 0.0;
        let mut key = Vec::with_capacity(self.order);
        loop {
            // An unknown word in the context can never be part of a stored n-gram.
            let usable = ctx.iter().all(Option::is_some);
            if usable {
                key.clear();
                key.extend(ctx.iter().map(|w| w.unwrap()));
                key.push(word);
                if let Some(e) = self.tables[ctx.len()].get(&key) {
                    return acc + e.log_prob;
                }
                if ctx.is_empty() {
                    return acc + MISSING_LOG_PROB;
                }
                key.pop();
                if let Some(e) = self.tables[ctx.len() - 1].get(&key) {
                    acc += e.log_backoff;
                }
            }
            ctx = &ctx[1..];
        }
    }

    /// Per-word log probabilities of a sentence, `<s>`-padded, excluding `</s>`.
    pub fn word_log_probs(&self, tokens: &[&str]) -> Vec<f64> {
        let start = self.id(START);
        let mut history: Vec<Option<WordId>> = vec![start; self.order - 1];
        let mut out = Vec::with_capacity(tokens.len());
        for tok in tokens {
            let w = self.map_word(tok);
            out.push(self.cond(&history, w));
            history.push(w);
        }
        out
    }

    /// Largest absolute difference between corresponding entries, or `None`
    /// when the two models do not contain the same n-grams.
    pub fn max_abs_diff(&self, other: &NgramModel) -> Option<f64> {
        if self.order != other.order || self.ngram_counts() != other.ngram_counts() {
            return None;
        }
        let mut worst = 0.0f64;
        for (mine, theirs) in self.tables.iter().zip(&other.tables) {
            for (key, e) in mine {
                let words: Vec<&str> = key
                    .iter()
                    .map(|&i| self.words[i as usize].as_str())
                    .collect();
                let other_key: Option<Vec<WordId>> = words.iter().map(|w| other.id(w)).collect();
                let o = theirs.get(&other_key?)?;
                worst = worst
                    .max((e.log_prob - o.log_prob).abs())
                    .max((e.log_backoff - o.log_backoff).abs());
            }
        }
        Some(worst)
    }
}

impl LmScorer for NgramModel {
    fn score(&self, tokens: &[&str]) -> Result<f64, LmError> {
        if tokens.is_empty() {
            return Err(LmError::EmptySequence);
        }
        let lps = self.word_log_probs(tokens);
        Ok(lps.iter().sum::<f64>() / lps.len() as f64)
    }
}

/// Train on sentences. Each line is tokenized and lowercased; blank lines are
/// ignored.
pub fn train<I, S>(sentences: I, config: &TrainConfig) -> Result<NgramModel, LmError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let TrainConfig {
        order,
        discount,
        min_count,
    } = *config;
    if order < 1 {
        return Err(LmError::Config("order must be at least 1".into()));
    }
    if !(discount > 0.0 && discount < 1.0) {
        return Err(LmError::Config(format!(
            "discount {discount} outside (0, 1)"
        )));
    }

    let corpus: Vec<Vec<String>> = sentences
        .into_iter()
        .map(|s| textproc::normalize(s.as_ref()))
        .filter(|t| !t.is_empty())
        .collect();
    if corpus.is_empty() {
        return Err(LmError::EmptyCorpus);
    }

    let mut word_counts: HashMap<&str, u64> = HashMap::new();
    for sent in &corpus {
        for w in sent {
            *word_counts.entry(w.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<&str> = word_counts
        .iter()
        .filter(|(w, &c)| c >= min_count && ![START, END, UNK].contains(*w))
        .map(|(w, _)| *w)
        .collect();
    kept.sort_unstable();

    let mut words: Vec<String> = vec![START.into(), END.into(), UNK.into()];
    words.extend(kept.iter().map(|w| w.to_string()));
    let ids: HashMap<&str, WordId> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i as WordId))
        .collect();
    let (start, end, unk) = (0, 1, 2);

    // counts[k - 1]: k-gram counts over predicted positions.
    let mut counts: Vec<HashMap<Vec<WordId>, u64>> = vec![HashMap::new(); order];
    for sent in &corpus {
        let mut seq: Vec<WordId> = vec![start; order - 1];
        seq.extend(
            sent.iter()
                .map(|w| ids.get(w.as_str()).copied().unwrap_or(unk)),
        );
        seq.push(end);
        for i in order - 1..seq.len() {
            for k in 1..=order {
                *counts[k - 1]
                    .entry(seq[i + 1 - k..=i].to_vec())
                    .or_default() += 1;
            }
        }
    }

    let mut model = NgramModel::from_parts(order, words, vec![HashMap::new(); order]);

    // Unigrams, interpolated with a uniform floor over the predictable vocabulary.
    let vocab_size = (model.words.len() - 1) as f64;
    let total: u64 = counts[0].values().sum();
    let types = counts[0].len() as f64;
    let floor = discount * types / total as f64 / vocab_size;
    let unigrams = &mut model.tables[0];
    for id in 0..model.words.len() as WordId {
        let log_prob = if id == start {
            START_LOG_PROB
        } else {
            let c = counts[0].get(&vec![id]).copied().unwrap_or(0) as f64;
            ((c - discount).max(0.0) / total as f64 + floor).ln()
        };
        unigrams.insert(
            vec![id],
            Entry {
                log_prob,
                log_backoff: 0.0,
            },
        );
    }

    for k in 2..=order {
        let mut ctx_stats: HashMap<&[WordId], (u64, u64)> = HashMap::new();
        for (gram, &c) in &counts[k - 1] {
            let s = ctx_stats.entry(&gram[..k - 1]).or_default();
            s.0 += c;
            s.1 += 1;
        }
        // Backoff weights live on the (k-1)-gram entries.
        for (ctx, &(c, t)) in &ctx_stats {
            let gamma = discount * t as f64 / c as f64;
            let entry = model.tables[k - 2].entry(ctx.to_vec()).or_insert(Entry {
                log_prob: START_LOG_PROB,
                log_backoff: 0.0,
            });
            entry.log_backoff = gamma.ln();
        }
        let mut level = HashMap::with_capacity(counts[k - 1].len());
        for (gram, &c) in &counts[k - 1] {
            let (ctx_count, ctx_types) = ctx_stats[&gram[..k - 1]];
            let lower: Vec<Option<WordId>> = gram[1..k - 1].iter().map(|&w| Some(w)).collect();
            let lower_p = model.cond(&lower, Some(gram[k - 1])).exp();
            let p = (c as f64 - discount) / ctx_count as f64
                + discount * ctx_types as f64 / ctx_count as f64 * lower_p;
            level.insert(
                gram.clone(),
                Entry {
                    log_prob: p.ln(),
                    log_backoff: 0.0,
                },
            );
        }
        model.tables[k - 1] = level;
    }

    Ok(model)
}
