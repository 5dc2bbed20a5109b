//! Grid search over the LM/frequency mixing weight using mean SARI.

use rayon::prelude::*;
use serde::Serialize;

use super::{sari, EvalError};
use crate::lm::LmScorer;
use crate::ontology::PhraseTable;
use crate::simplifier::{simplify, SimplifierConfig};
use crate::wordfreq::TermScorer;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneResult {
    pub best_alpha: f64,
    pub best_sari: f64,
    /// `(alpha, mean SARI)` in grid order.
    pub curve: Vec<(f64, f64)>,
}

impl TuneResult {
    pub fn curve_tsv(&self) -> String {
        let mut out = String::from("alpha\tsari\n");
        for (a, s) in &self.curve {
            out.push_str(&format!("{a:.2}\t{s:.6}\n"));
        }
        out
    }
}

/// 0.00..=1.00 in steps of 0.05, plus 0.90..=1.00 in steps of 0.01.
pub fn default_grid() -> Vec<f64> {
    let mut hundredths: Vec<u32> = (0..=20).map(|i| i * 5).chain(90..=100).collect();
    hundredths.sort_unstable();
    hundredths.dedup();
    hundredths.into_iter().map(|h| h as f64 / 100.0).collect()
}

/// Parse `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, EvalError> {
    let bad = |msg: &str| EvalError::Invalid(format!("invalid grid {spec:?}: {msg}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let mut grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad("step must be positive and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| ((start + i as f64 * step) * 1e6).round() / 1e6)
            .collect::<Vec<_>>()
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if grid.is_empty() || grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(bad("values must lie in [0, 1]"));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// Mean single-reference SARI for each alpha. The best alpha is the
/// smallest one reaching the maximum.
pub fn grid_search_alpha(
    dev: &[(String, String)],
    table: &PhraseTable,
    lm: &dyn LmScorer,
    ft: &dyn TermScorer,
    grid: &[f64],
    base: &SimplifierConfig,
) -> Result<TuneResult, EvalError> {
    if dev.is_empty() {
        return Err(EvalError::Invalid("empty development set".into()));
    }
    if grid.is_empty() {
        return Err(EvalError::Invalid("empty alpha grid".into()));
    }
    let curve: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&alpha| {
            let cfg = SimplifierConfig { alpha, ..*base }
                .validated()
                .map_err(|e| EvalError::Invalid(e.to_string()))?;
            let mut total = 0.0;
            for (source, reference) in dev {
                let out = simplify(source, table, lm, ft, &cfg);
                total += sari(source, &out.final_sentence, &[reference])?;
            }
            Ok((alpha, total / dev.len() as f64))
        })
        .collect::<Result<_, EvalError>>()?;

    let (best_alpha, best_sari) = curve
        .iter()
        .copied()
        .fold(None, |best: Option<(f64, f64)>, (a, s)| match best {
            Some((ba, bs)) if bs > s || (bs == s && ba <= a) => Some((ba, bs)),
            _ => Some((a, s)),
        })
        .expect("grid is non-empty");
    Ok(TuneResult {
        best_alpha,
        best_sari,
        curve,
    })
}

/// Parallel corpus `source<TAB>reference`, one pair per line.
pub fn read_parallel(text: &str) -> Result<Vec<(String, String)>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let Some((src, reference)) = line.split_once('\t') else {
            return Err(EvalError::Parse {
                line: i as u64 + 1,
                message: "expected source<TAB>reference".into(),
            });
        };
        out.push((src.to_string(), reference.to_string()));
    }
    Ok(out)
}
