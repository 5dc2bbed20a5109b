//! Sentence-level SARI.
//!
//! Follows the original reference implementation: n-gram counts of source
//! and output are multiplied by the number of references; keep and add are
//! F1 scores, delete contributes its precision only. A precision or recall
//! whose candidate set is empty is 0. The result is the mean over n = 1..4 of
//! the three components, scaled to [0, 100]. Text is lowercased and split on
//! whitespace.

use std::collections::{HashMap, HashSet};

use super::EvalError;

pub const MAX_ORDER: usize = 4;

type Counter<'a> = HashMap<&'a [String], u64>;

fn counter(tokens: &[String], n: usize, times: u64) -> Counter<'_> {
    let mut c = Counter::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *c.entry(w).or_default() += times;
        }
    }
    c
}

fn lower_tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

fn f1(p: f64, r: f64) -> f64 {
    if p > 0.0 || r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Keep F1, delete precision and add F1 for one n-gram order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SariComponents {
    pub keep: f64,
    pub delete: f64,
    pub add: f64,
}

fn components(src: &Counter, out: &Counter, refs: &Counter, numref: u64) -> SariComponents {
    let src_rep: Counter = src.iter().map(|(g, c)| (*g, c * numref)).collect();
    let out_rep: Counter = out.iter().map(|(g, c)| (*g, c * numref)).collect();
    let get = |c: &Counter, g: &[String]| c.get(g).copied().unwrap_or(0);

    // keep
    let mut keep_sys = 0usize;
    let mut keep_all = 0usize;
    let (mut keep_p, mut keep_r) = (0.0, 0.0);
    for (g, &s) in &src_rep {
        let o = get(&out_rep, g);
        let r = get(refs, g);
        let kept = s.min(o);
        if kept > 0 {
            keep_sys += 1;
        }
        let all = s.min(r);
        if all > 0 {
            keep_all += 1;
        }
        let good = kept.min(r);
        if good > 0 {
            keep_p += good as f64 / kept as f64;
            keep_r += good as f64 / all as f64;
        }
    }
    let keep_precision = if keep_sys > 0 {
        keep_p / keep_sys as f64
    } else {
        0.0
    };
    let keep_recall = if keep_all > 0 {
        keep_r / keep_all as f64
    } else {
        0.0
    };

    // delete
    let mut del_sys = 0usize;
    let mut del_p = 0.0;
    for (g, &s) in &src_rep {
        let deleted = s.saturating_sub(get(&out_rep, g));
        if deleted == 0 {
            continue;
        }
        del_sys += 1;
        let good = deleted.saturating_sub(get(refs, g));
        if good > 0 {
            del_p += good as f64 / deleted as f64;
        }
    }
    let delete = if del_sys > 0 {
        del_p / del_sys as f64
    } else {
        0.0
    };

    // add
    let added: HashSet<&[String]> = out
        .keys()
        .filter(|g| !src.contains_key(*g))
        .copied()
        .collect();
    let add_all: HashSet<&[String]> = refs
        .keys()
        .filter(|g| !src.contains_key(*g))
        .copied()
        .collect();
    let add_good = added.iter().filter(|g| refs.contains_key(*g)).count();
    let add_precision = if added.is_empty() {
        0.0
    } else {
        add_good as f64 / added.len() as f64
    };
    let add_recall = if add_all.is_empty() {
        0.0
    } else {
        add_good as f64 / add_all.len() as f64
    };

    SariComponents {
        keep: f1(keep_precision, keep_recall),
        delete,
        add: f1(add_precision, add_recall),
    }
}

/// Per-order components, index 0 for unigrams.
pub fn sari_components(
    source: &str,
    output: &str,
    references: &[&str],
) -> Result<Vec<SariComponents>, EvalError> {
    if references.is_empty() {
        return Err(EvalError::Invalid(
            "SARI needs at least one reference".into(),
        ));
    }
    let src = lower_tokens(source);
    let out = lower_tokens(output);
    if src.is_empty() && out.is_empty() {
        return Err(EvalError::Invalid(
            "SARI is undefined for an empty source and output".into(),
        ));
    }
    let refs: Vec<Vec<String>> = references.iter().map(|r| lower_tokens(r)).collect();
    let numref = refs.len() as u64;

    Ok((1..=MAX_ORDER)
        .map(|n| {
            let mut ref_counts = Counter::new();
            for r in &refs {
                for (g, c) in counter(r, n, 1) {
                    *ref_counts.entry(g).or_default() += c;
                }
            }
            components(
                &counter(&src, n, 1),
                &counter(&out, n, 1),
                &ref_counts,
                numref,
            )
        })
        .collect())
}

pub fn sari(source: &str, output: &str, references: &[&str]) -> Result<f64, EvalError> {
    let parts = sari_components(source, output, references)?;
    let n = parts.len() as f64;
    let keep = parts.iter().map(|p| p.keep).sum::<f64>() / n;
    let delete = parts.iter().map(|p| p.delete).sum::<f64>() / n;
    let add = parts.iter().map(|p| p.add).sum::<f64>() / n;
    Ok(100.0 * (keep + delete + add) / 3.0)
}
