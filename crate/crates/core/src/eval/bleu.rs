//! Corpus BLEU: clipped n-gram precision up to 4-grams, uniform weights,
//! brevity penalty, no smoothing. Case-sensitive whitespace tokenization.

use std::collections::HashMap;

use super::EvalError;

pub const MAX_ORDER: usize = 4;

fn ngram_counts(tokens: &[&str], n: usize) -> HashMap<Vec<String>, u64> {
    let mut c = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *c.entry(w.iter().map(|s| s.to_string()).collect())
                .or_default() += 1;
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct BleuStats {
    pub matches: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.matches.contains(&0) {
            return 0.0;
        }
        let log_precision: f64 = self
            .matches
            .iter()
            .zip(&self.totals)
            .map(|(&m, &t)| (m as f64 / t as f64).ln())
            .sum::<f64>()
            / MAX_ORDER as f64;
        let bp = if self.hyp_len > self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        };
        100.0 * bp * log_precision.exp()
    }
}

pub fn bleu_stats<S: AsRef<str>, R: AsRef<str>>(
    outputs: &[S],
    references: &[R],
) -> Result<BleuStats, EvalError> {
    if outputs.len() != references.len() {
        return Err(EvalError::LengthMismatch {
            expected: outputs.len(),
            found: references.len(),
        });
    }
    if outputs.is_empty() {
        return Err(EvalError::Invalid(
            "BLEU needs at least one sentence".into(),
        ));
    }
    let mut stats = BleuStats {
        matches: [0; MAX_ORDER],
        totals: [0; MAX_ORDER],
        hyp_len: 0,
        ref_len: 0,
    };
    for (hyp, reference) in outputs.iter().zip(references) {
        let hyp: Vec<&str> = hyp.as_ref().split_whitespace().collect();
        let reference: Vec<&str> = reference.as_ref().split_whitespace().collect();
        stats.hyp_len += hyp.len() as u64;
        stats.ref_len += reference.len() as u64;
        for n in 1..=MAX_ORDER {
            let h = ngram_counts(&hyp, n);
            let r = ngram_counts(&reference, n);
            stats.totals[n - 1] += h.values().sum::<u64>();
            stats.matches[n - 1] += h
                .iter()
                .map(|(g, c)| (*c).min(r.get(g).copied().unwrap_or(0)))
                .sum::<u64>();
        }
    }
    Ok(stats)
}

pub fn bleu<S: AsRef<str>, R: AsRef<str>>(
    outputs: &[S],
    references: &[R],
) -> Result<f64, EvalError> {
    Ok(bleu_stats(outputs, references)?.score())
}
