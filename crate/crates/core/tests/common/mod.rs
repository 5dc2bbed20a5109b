//! Shared fixtures and brute-force oracles for the integration suites.
//!
//! The oracles here are deliberately naive (linear scans over lists, direct
//! recursion over raw counts) and share no code with the library routes they
//! check.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use medsimp::lm::ScoreTable;
use medsimp::ontology::{align, AlignOptions, ConceptRecord, PhraseTable};
use medsimp::textproc::{self, Span};
use medsimp::wordfreq::FrequencyTable;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn table_of(groups: &[&[&str]]) -> PhraseTable {
    let mut records = Vec::new();
    for (gi, labels) in groups.iter().enumerate() {
        for label in labels.iter() {
            records.push(ConceptRecord::new(
                format!("C{gi:03}"),
                *label,
                "test",
                false,
            ));
        }
    }
    align(&records, &AlignOptions { pluralize: false })
}

pub fn freq_of(rows: &[(&str, f64)]) -> FrequencyTable {
    FrequencyTable::new(
        rows.iter()
            .map(|(w, p)| (w.to_string(), *p))
            .collect::<HashMap<_, _>>(),
    )
}

// ---------------------------------------------------------------------------
// Candidate-ranking fixture: five labels with fixed LM and frequency scores.

pub const TABLE1_CONTEXT: &str = "Patient had multiple myocardial infarctions .";

/// (term, LM score of the sentence with the term, WF score of the term)
pub const TABLE1_ROWS: [(&str, f64, f64); 5] = [
    ("myocardial infarctions", -5.45, -14.32),
    ("heart attack", -4.38, -9.05),
    ("heart attacks", -3.91, -9.05),
    ("mies", -6.09, -14.34),
    ("myocardial necrosis", -6.13, -14.23),
];

pub fn table1_table() -> PhraseTable {
    let labels: Vec<&str> = TABLE1_ROWS.iter().map(|r| r.0).collect();
    table_of(&[&labels])
}

pub fn table1_scorers() -> (ScoreTable, ScoreTable) {
    let mut lm = ScoreTable::new();
    let mut wf = ScoreTable::new();
    for (term, lm_score, wf_score) in TABLE1_ROWS {
        lm.insert(&format!("patient had multiple {term} ."), lm_score);
        wf.insert(term, wf_score);
    }
    (lm, wf)
}

// ---------------------------------------------------------------------------
// Two-stage convergence fixture. Pass 1 rewrites both terms; the new
// context then makes a different label of the first group win in pass 2,
// and pass 3 confirms the fixed point.

pub const TWO_STAGE_INPUT: &str = "hyperlipidemia with elevated triglycerides .";
pub const TWO_STAGE_PASS1: &str = "elevated lipids in blood with high triglycerides .";
pub const TWO_STAGE_FINAL: &str = "excessive fat in the blood with high triglycerides .";
pub const TWO_STAGE_ALPHA: f64 = 1.0;

pub fn two_stage() -> (PhraseTable, ScoreTable, FrequencyTable) {
    let table = table_of(&[
        &[
            "hyperlipidemia",
            "elevated lipids in blood",
            "excessive fat in the blood",
        ],
        &["elevated", "high"],
    ]);
    let lm = ScoreTable::new()
        .with_fallback(-6.0)
        .with(
            "elevated lipids in blood with elevated triglycerides .",
            -3.5,
        )
        .with(
            "excessive fat in the blood with elevated triglycerides .",
            -4.0,
        )
        .with("hyperlipidemia with high triglycerides .", -5.0)
        .with(TWO_STAGE_PASS1, -3.0)
        .with(TWO_STAGE_FINAL, -2.0);
    (table, lm, FrequencyTable::default())
}

/// Two labels that always swap: `include_original` must be off.
pub fn oscillator() -> (PhraseTable, ScoreTable, FrequencyTable) {
    let table = table_of(&[&["a", "b"]]);
    (
        table,
        ScoreTable::new().with_fallback(-1.0),
        freq_of(&[("a", 0.1), ("b", 0.1)]),
    )
}

// ---------------------------------------------------------------------------
// Tuner fixture: the right replacement wins only when alpha >= 0.48.
//
// LM: sentence with "simple" -2, with "complexterm" -4.
// WF: ln(P + eps) with P(simple) = e^-12, P(complexterm) = e^-10.08, so
//     score(simple) - score(complexterm) = -1.92 + 3.92 * alpha (approx),
// crossing zero at alpha ~ 0.4898.

pub fn tuner_fixture() -> (
    Vec<(String, String)>,
    PhraseTable,
    ScoreTable,
    FrequencyTable,
) {
    let table = table_of(&[&["complexterm", "simple"]]);
    let contexts = ["the patient shows", "there is evidence of", "no sign of"];
    let mut lm = ScoreTable::new().with_fallback(-8.0);
    let mut dev = Vec::new();
    for ctx in contexts {
        lm.insert(&format!("{ctx} simple ."), -2.0);
        lm.insert(&format!("{ctx} complexterm ."), -4.0);
        dev.push((format!("{ctx} complexterm ."), format!("{ctx} simple .")));
    }
    let ft = freq_of(&[
        ("simple", (-12.0f64).exp()),
        ("complexterm", (-10.08f64).exp()),
    ]);
    (dev, table, lm, ft)
}

// ---------------------------------------------------------------------------
// Oracles.

/// All matching spans, then left-to-right, longest-first, no-overlap.
pub fn greedy_oracle(norms: &[String], table: &PhraseTable) -> Vec<(usize, usize, usize)> {
    let mut all = Vec::new();
    for i in 0..norms.len() {
        for j in i + 1..=norms.len() {
            if let Some(g) = table.lookup(&norms[i..j]) {
                all.push((i, j, g));
            }
        }
    }
    all.sort_by(|a, b| a.0.cmp(&b.0).then((b.1 - b.0).cmp(&(a.1 - a.0))));
    let mut accepted: Vec<(usize, usize, usize)> = Vec::new();
    for cand in all {
        if accepted.iter().all(|a| cand.1 <= a.0 || a.1 <= cand.0) {
            accepted.push(cand);
        }
    }
    accepted
}

pub fn span_triples(spans: &[Span]) -> Vec<(usize, usize, usize)> {
    spans.iter().map(|s| (s.start, s.end, s.group_id)).collect()
}

/// Connected components over "shares a normalized label", by repeated
/// relaxation of a component-label vector until nothing changes.
pub fn components_oracle(records: &[ConceptRecord]) -> BTreeSet<BTreeSet<String>> {
    let norm = |s: &str| textproc::normalize(s).join(" ");
    let ids: Vec<String> = records
        .iter()
        .map(|r| r.concept_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut comp: Vec<usize> = (0..ids.len()).collect();
    let idx = |id: &str| ids.iter().position(|x| x == id).unwrap();
    loop {
        let mut changed = false;
        for a in records {
            for b in records {
                if norm(&a.label) == norm(&b.label) {
                    let (ia, ib) = (idx(&a.concept_id), idx(&b.concept_id));
                    let m = comp[ia].min(comp[ib]);
                    if comp[ia] != m || comp[ib] != m {
                        comp[ia] = m;
                        comp[ib] = m;
                        changed = true;
                    }
                }
            }
        }
        // propagate through chains
        for i in 0..comp.len() {
            let target = comp[comp[i]];
            if comp[i] != target {
                comp[i] = target;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: HashMap<usize, BTreeSet<String>> = HashMap::new();
    for r in records {
        groups
            .entry(comp[idx(&r.concept_id)])
            .or_default()
            .insert(norm(&r.label));
    }
    groups.into_values().filter(|g| g.len() >= 2).collect()
}

fn ngrams(tokens: &[String], n: usize) -> Vec<Vec<String>> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n)
        .map(|i| tokens[i..i + n].to_vec())
        .collect()
}

fn count_in(list: &[Vec<String>], g: &[String]) -> u64 {
    list.iter().filter(|x| x.as_slice() == g).count() as u64
}

fn distinct(list: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = Vec::new();
    for g in list {
        if !out.contains(g) {
            out.push(g.clone());
        }
    }
    out
}

fn f1(p: f64, r: f64) -> f64 {
    if p > 0.0 || r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Sentence SARI on list-based n-gram counts.
pub fn sari_oracle(source: &str, output: &str, refs: &[&str]) -> f64 {
    let tok = |s: &str| -> Vec<String> { s.split_whitespace().map(|w| w.to_lowercase()).collect() };
    let (s, c) = (tok(source), tok(output));
    let rs: Vec<Vec<String>> = refs.iter().map(|r| tok(r)).collect();
    let k = refs.len() as u64;
    let (mut keep, mut del, mut add) = (0.0, 0.0, 0.0);
    for n in 1..=4 {
        let sg = ngrams(&s, n);
        let cg = ngrams(&c, n);
        let rg: Vec<Vec<String>> = rs.iter().flat_map(|r| ngrams(r, n)).collect();
        let (mut kp_num, mut kp_den, mut kr_num, mut kr_den) = (0.0, 0, 0.0, 0);
        let (mut dp_num, mut dp_den) = (0.0, 0);
        for g in distinct(&sg) {
            let sc = count_in(&sg, &g) * k;
            let cc = count_in(&cg, &g) * k;
            let rc = count_in(&rg, &g);
            let kept = sc.min(cc);
            let all = sc.min(rc);
            if kept > 0 {
                kp_den += 1;
                kp_num += kept.min(rc) as f64 / kept as f64;
            }
            if all > 0 {
                kr_den += 1;
                kr_num += kept.min(rc) as f64 / all as f64;
            }
            let deleted = sc.saturating_sub(cc);
            if deleted > 0 {
                dp_den += 1;
                dp_num += deleted.saturating_sub(rc) as f64 / deleted as f64;
            }
        }
        let kp = if kp_den > 0 {
            kp_num / kp_den as f64
        } else {
            0.0
        };
        let kr = if kr_den > 0 {
            kr_num / kr_den as f64
        } else {
            0.0
        };
        keep += f1(kp, kr);
        del += if dp_den > 0 {
            dp_num / dp_den as f64
        } else {
            0.0
        };
        let added: Vec<Vec<String>> = distinct(&cg)
            .into_iter()
            .filter(|g| !sg.contains(g))
            .collect();
        let ref_new: Vec<Vec<String>> = distinct(&rg)
            .into_iter()
            .filter(|g| !sg.contains(g))
            .collect();
        let good = added.iter().filter(|g| rg.contains(g)).count() as f64;
        let ap = if added.is_empty() {
            0.0
        } else {
            good / added.len() as f64
        };
        let ar = if ref_new.is_empty() {
            0.0
        } else {
            good / ref_new.len() as f64
        };
        add += f1(ap, ar);
    }
    100.0 * (keep / 4.0 + del / 4.0 + add / 4.0) / 3.0
}

/// Corpus BLEU on list-based counts.
pub fn bleu_oracle(outputs: &[String], refs: &[String]) -> f64 {
    let tok = |s: &str| -> Vec<String> { s.split_whitespace().map(str::to_string).collect() };
    let mut log_sum = 0.0;
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (h, r) in outputs.iter().zip(refs) {
        hyp_len += tok(h).len();
        ref_len += tok(r).len();
    }
    for n in 1..=4 {
        let (mut num, mut den) = (0u64, 0u64);
        for (h, r) in outputs.iter().zip(refs) {
            let hg = ngrams(&tok(h), n);
            let rg = ngrams(&tok(r), n);
            den += hg.len() as u64;
            for g in distinct(&hg) {
                num += count_in(&hg, &g).min(count_in(&rg, &g));
            }
        }
        if num == 0 {
            return 0.0;
        }
        log_sum += (num as f64 / den as f64).ln();
    }
    let bp = if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    100.0 * bp * (log_sum / 4.0).exp()
}

/// Interpolated absolute discounting computed straight from raw counts.
/// `corpus` must already be normalized; every word is kept (min_count 1).
pub struct DiscountOracle {
    order: usize,
    discount: f64,
    counts: HashMap<Vec<String>, u64>,
    vocab_size: usize,
}

impl DiscountOracle {
    pub fn new(corpus: &[Vec<String>], order: usize, discount: f64) -> Self {
        let mut counts = HashMap::new();
        let mut words = BTreeSet::new();
        for sent in corpus {
            let mut seq = vec!["<s>".to_string(); order - 1];
            seq.extend(sent.iter().cloned());
            seq.push("</s>".to_string());
            words.extend(sent.iter().cloned());
            for i in order - 1..seq.len() {
                for k in 1..=order {
                    *counts.entry(seq[i + 1 - k..=i].to_vec()).or_insert(0) += 1;
                }
            }
        }
        // words + </s> + <unk>
        let vocab_size = words.len() + 2;
        Self {
            order,
            discount,
            counts,
            vocab_size,
        }
    }

    fn successors(&self, ctx: &[String]) -> (u64, u64) {
        let mut total = 0;
        let mut types = 0;
        for (gram, c) in &self.counts {
            if gram.len() == ctx.len() + 1 && &gram[..ctx.len()] == ctx {
                total += c;
                types += 1;
            }
        }
        (total, types)
    }

    pub fn prob(&self, ctx: &[String], word: &str) -> f64 {
        let keep = ctx.len().min(self.order - 1);
        let ctx = &ctx[ctx.len() - keep..];
        let (total, types) = self.successors(ctx);
        let mut gram = ctx.to_vec();
        gram.push(word.to_string());
        let c = self.counts.get(&gram).copied().unwrap_or(0) as f64;
        let d = self.discount;
        if ctx.is_empty() {
            return (c - d).max(0.0) / total as f64
                + d * types as f64 / total as f64 / self.vocab_size as f64;
        }
        if total == 0 {
            return self.prob(&ctx[1..], word);
        }
        (c - d).max(0.0) / total as f64
            + d * types as f64 / total as f64 * self.prob(&ctx[1..], word)
    }
}
