//! ARPA text format. Files hold log10 values; models hold natural logs.

use std::collections::HashMap;
use std::f64::consts::LN_10;
use std::fmt::Write as _;

use super::ngram::{Entry, NgramModel, WordId};
use super::LmError;

pub fn save_arpa(model: &NgramModel) -> String {
    let mut out = String::from("\\data\\\n");
    for (k, n) in model.ngram_counts().iter().enumerate() {
        let _ = writeln!(out, "ngram {}={}", k + 1, n);
    }
    let words = model.words();
    let highest = model.order();
    for (k, table) in model.tables().iter().enumerate() {
        let _ = write!(out, "\n\\{}-grams:\n", k + 1);
        let mut rows: Vec<(String, &Entry)> = table
            .iter()
            .map(|(key, e)| {
                let text = key
                    .iter()
                    .map(|&i| words[i as usize].as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                (text, e)
            })
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        for (text, e) in rows {
            let _ = write!(out, "{}\t{}", e.log_prob / LN_10, text);
            if k + 1 < highest && e.log_backoff != 0.0 {
                let _ = write!(out, "\t{}", e.log_backoff / LN_10);
            }
            out.push('\n');
        }
    }
    out.push_str("\n\\end\\\n");
    out
}

fn err(line: usize, message: impl Into<String>) -> LmError {
    LmError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num(s: &str, line: usize) -> Result<f64, LmError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| err(line, format!("invalid number {s:?}")))
}

pub fn load_arpa(text: &str) -> Result<NgramModel, LmError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, "\\data\\")) => {}
        Some((n, other)) => {
            return Err(err(n, format!("expected \\data\\ header, found {other:?}")))
        }
        None => return Err(err(0, "empty file, expected \\data\\ header")),
    }

    let mut declared: Vec<usize> = Vec::new();
    let mut pending = None;
    for (n, line) in lines.by_ref() {
        if let Some(spec) = line.strip_prefix("ngram ") {
            let (order, count) = spec
                .split_once('=')
                .ok_or_else(|| err(n, format!("malformed count line {line:?}")))?;
            let order: usize = order
                .trim()
                .parse()
                .map_err(|_| err(n, "bad n-gram order"))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| err(n, "bad n-gram count"))?;
            if order != declared.len() + 1 {
                return Err(err(
                    n,
                    format!("expected ngram {} count, found {order}", declared.len() + 1),
                ));
            }
            declared.push(count);
        } else {
            pending = Some((n, line));
            break;
        }
    }
    if declared.is_empty() {
        return Err(err(0, "no ngram count lines"));
    }

    let order = declared.len();
    let mut words: Vec<String> = Vec::new();
    let mut ids: HashMap<String, WordId> = HashMap::new();
    let mut tables: Vec<HashMap<Vec<WordId>, Entry>> = vec![HashMap::new(); order];
    let mut current: Option<usize> = None;
    let mut finished = false;

    let close_section = |k: Option<usize>, tables: &Vec<HashMap<Vec<WordId>, Entry>>, n: usize| {
        if let Some(k) = k {
            if tables[k - 1].len() != declared[k - 1] {
                return Err(err(
                    n,
                    format!(
                        "{k}-gram section has {} entries but header declares {}",
                        tables[k - 1].len(),
                        declared[k - 1]
                    ),
                ));
            }
        }
        Ok(())
    };

    for (n, line) in pending.into_iter().chain(lines) {
        if finished {
            return Err(err(n, "content after \\end\\"));
        }
        if line == "\\end\\" {
            close_section(current, &tables, n)?;
            finished = true;
            continue;
        }
        if let Some(section) = line
            .strip_prefix('\\')
            .and_then(|s| s.strip_suffix("-grams:"))
        {
            close_section(current, &tables, n)?;
            let k: usize = section
                .parse()
                .map_err(|_| err(n, format!("malformed section header {line:?}")))?;
            let expected = current.map_or(1, |c| c + 1);
            if k != expected || k > order {
                return Err(err(n, format!("unexpected section {line:?}")));
            }
            current = Some(k);
            continue;
        }
        let Some(k) = current else {
            return Err(err(n, format!("entry outside a section: {line:?}")));
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != k + 1 && fields.len() != k + 2 {
            return Err(err(
                n,
                format!(
                    "expected {} or {} fields, found {}",
                    k + 1,
                    k + 2,
                    fields.len()
                ),
            ));
        }
        let log_prob = parse_num(fields[0], n)? * LN_10;
        let log_backoff = match fields.get(k + 1) {
            Some(b) => parse_num(b, n)? * LN_10,
            None => 0.0,
        };
        let mut key = Vec::with_capacity(k);
        for w in &fields[1..=k] {
            let id = match ids.get(*w) {
                Some(&id) => id,
                None if k == 1 => {
                    let id = words.len() as WordId;
                    words.push(w.to_string());
                    ids.insert(w.to_string(), id);
                    id
                }
                None => return Err(err(n, format!("word {w:?} missing from unigrams"))),
            };
            key.push(id);
        }
        if tables[k - 1]
            .insert(
                key,
                Entry {
                    log_prob,
                    log_backoff,
                },
            )
            .is_some()
        {
            return Err(err(
                n,
                format!("duplicate entry {:?}", fields[1..=k].join(" ")),
            ));
        }
    }
    if !finished {
        return Err(err(0, "missing \\end\\ marker"));
    }
    if current != Some(order) {
        return Err(err(0, format!("expected {order} sections")));
    }
    Ok(NgramModel::from_parts(order, words, tables))
}
