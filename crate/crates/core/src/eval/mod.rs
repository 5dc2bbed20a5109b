//! Evaluation: reference metrics, human-judgment aggregation, simplification
//! gain, significance testing and the alpha tuner.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Read;

use serde::Serialize;
use thiserror::Error;

pub mod bleu;
pub mod sari;
pub mod significance;
pub mod tune;

pub use bleu::bleu;
pub use sari::sari;
pub use significance::sg_significance;
pub use tune::{default_grid, grid_search_alpha, parse_grid, TuneResult};

pub const DEFAULT_REPLICATIONS: u64 = 7;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no judgments")]
    NoJudgments,
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("expected {expected} references, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Pairwise judgment tallies for one system.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalCounts {
    /// Simplified sentence judged easier.
    pub s: u64,
    /// Original judged easier.
    pub f: u64,
    /// Equally easy.
    pub e: u64,
    /// Neither understood.
    pub n: u64,
    /// Output identical to the input.
    pub u: u64,
}

impl EvalCounts {
    pub const fn new(s: u64, f: u64, e: u64, n: u64, u: u64) -> Self {
        Self { s, f, e, n, u }
    }

    pub fn total(&self) -> u64 {
        self.s + self.f + self.e + self.n + self.u
    }

    pub fn add(&mut self, cat: Category, times: u64) {
        match cat {
            Category::S => self.s += times,
            Category::F => self.f += times,
            Category::E => self.e += times,
            Category::N => self.n += times,
            Category::U => self.u += times,
        }
    }

    pub fn scaled(&self, k: u64) -> Self {
        Self::new(self.s * k, self.f * k, self.e * k, self.n * k, self.u * k)
    }
}

/// `(S - F) / T`.
pub fn simplification_gain(c: &EvalCounts) -> Result<f64, EvalError> {
    let total = c.total();
    if total == 0 {
        return Err(EvalError::NoJudgments);
    }
    Ok((c.s as f64 - c.f as f64) / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Category {
    S,
    F,
    E,
    N,
    U,
}

impl Category {
    /// Accepts the letter codes or the annotation option numbers
    /// (1: original easier, 2: simplified easier, 3: same, 4: neither).
    pub fn parse(token: &str) -> Option<Self> {
        match token.trim() {
            "S" | "s" | "2" => Some(Category::S),
            "F" | "f" | "1" => Some(Category::F),
            "E" | "e" | "3" => Some(Category::E),
            "N" | "n" | "4" => Some(Category::N),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgmentRecord {
    pub sentence_id: String,
    pub system_id: String,
    pub category: Category,
}

/// Per-system counts. Each distinct `(sentence_id, system_id)` unchanged pair
/// adds `replications` U judgments.
pub fn aggregate_judgments(
    records: &[JudgmentRecord],
    unchanged: &[(String, String)],
    replications: u64,
) -> BTreeMap<String, EvalCounts> {
    let mut out: BTreeMap<String, EvalCounts> = BTreeMap::new();
    for r in records {
        out.entry(r.system_id.clone())
            .or_default()
            .add(r.category, 1);
    }
    let distinct: BTreeSet<&(String, String)> = unchanged.iter().collect();
    for (_, system) in distinct {
        out.entry(system.clone())
            .or_default()
            .add(Category::U, replications);
    }
    out
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// `sentence_id,system_id,category`; an optional header row is skipped.
pub fn read_judgments<R: Read>(input: R) -> Result<Vec<JudgmentRecord>, EvalError> {
    let mut out = Vec::new();
    for (i, row) in csv_reader(input).records().enumerate() {
        let row = row?;
        if i == 0 && row.get(0) == Some("sentence_id") {
            continue;
        }
        let line = line_of(&row);
        if row.len() != 3 {
            return Err(EvalError::Parse {
                line,
                message: format!("expected 3 fields, found {}", row.len()),
            });
        }
        let category = Category::parse(&row[2]).ok_or_else(|| EvalError::Parse {
            line,
            message: format!("unknown category {:?}", &row[2]),
        })?;
        out.push(JudgmentRecord {
            sentence_id: row[0].to_string(),
            system_id: row[1].to_string(),
            category,
        });
    }
    Ok(out)
}

/// `sentence_id,system_id`; an optional header row is skipped.
pub fn read_unchanged<R: Read>(input: R) -> Result<Vec<(String, String)>, EvalError> {
    let mut out = Vec::new();
    for (i, row) in csv_reader(input).records().enumerate() {
        let row = row?;
        if i == 0 && row.get(0) == Some("sentence_id") {
            continue;
        }
        if row.len() != 2 {
            return Err(EvalError::Parse {
                line: line_of(&row),
                message: format!("expected 2 fields, found {}", row.len()),
            });
        }
        out.push((row[0].to_string(), row[1].to_string()));
    }
    Ok(out)
}

/// Read a `system<TAB>S<TAB>F<TAB>E<TAB>N<TAB>U` count table (header optional).
pub fn read_counts(text: &str) -> Result<BTreeMap<String, EvalCounts>, EvalError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.first() == Some(&"system") {
            continue;
        }
        if cols.len() != 6 {
            return Err(EvalError::Parse {
                line: line_no,
                message: format!("expected 6 columns, found {}", cols.len()),
            });
        }
        let mut nums = [0u64; 5];
        for (slot, col) in nums.iter_mut().zip(&cols[1..]) {
            *slot = col.parse().map_err(|_| EvalError::Parse {
                line: line_no,
                message: format!("not a count: {col:?}"),
            })?;
        }
        let [s, f, e, n, u] = nums;
        out.insert(cols[0].to_string(), EvalCounts::new(s, f, e, n, u));
    }
    Ok(out)
}

/// TSV report: `system  S  F  E  N  U  SG`.
pub fn counts_report_tsv(rows: &BTreeMap<String, EvalCounts>) -> String {
    let mut out = String::from("system\tS\tF\tE\tN\tU\tSG\n");
    for (name, c) in rows {
        let sg = simplification_gain(c).map_or("NA".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(
            out,
            "{name}\t{}\t{}\t{}\t{}\t{}\t{sg}",
            c.s, c.f, c.e, c.n, c.u
        );
    }
    out
}

/// Aligned plain-text version of [`counts_report_tsv`], SG to two decimals.
pub fn counts_report_table(rows: &BTreeMap<String, EvalCounts>) -> String {
    let width = rows.keys().map(String::len).max().unwrap_or(0).max(6);
    let mut out = format!(
        "{:<width$} {:>7} {:>7} {:>7} {:>7} {:>7} {:>6}\n",
        "system", "S", "F", "E", "N", "U", "SG"
    );
    for (name, c) in rows {
        let sg = simplification_gain(c).map_or("NA".to_string(), |v| format!("{v:.2}"));
        let _ = writeln!(
            out,
            "{name:<width$} {:>7} {:>7} {:>7} {:>7} {:>7} {sg:>6}",
            c.s, c.f, c.e, c.n, c.u
        );
    }
    out
}
