//! Ontology label ingestion and concept alignment.
//!
//! Concepts from several terminologies are merged with a disjoint-set forest
//! whenever they share a normalized label. Each resulting component becomes
//! an [`AlternativeGroup`]: a set of interchangeable labels. Components with
//! a single distinct label carry no alternatives and are dropped.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::textproc;

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("phrase table is inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptRecord {
    pub concept_id: String,
    pub label: String,
    pub source: String,
    pub is_primary: bool,
    /// 1-based line number in the originating file, 0 if built in memory.
    pub line: usize,
}

impl ConceptRecord {
    pub fn new(
        concept_id: impl Into<String>,
        label: impl Into<String>,
        source: impl Into<String>,
        is_primary: bool,
    ) -> Self {
        Self {
            concept_id: concept_id.into(),
            label: label.into(),
            source: source.into(),
            is_primary,
            line: 0,
        }
    }
}

/// Read `concept_id<TAB>label<TAB>source<TAB>P|A` rows. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_records<R: BufRead>(reader: R) -> Result<Vec<ConceptRecord>, OntologyError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(OntologyError::ColumnCount {
                line: line_no,
                expected: 4,
                found: cols.len(),
            });
        }
        let concept_id = cols[0].trim();
        let label = cols[1].trim();
        if concept_id.is_empty() {
            return Err(invalid(line_no, "empty concept id"));
        }
        if label.is_empty() {
            return Err(invalid(line_no, "empty label"));
        }
        let is_primary = match cols[3].trim() {
            "P" | "p" => true,
            "A" | "a" => false,
            other => {
                return Err(invalid(
                    line_no,
                    format!("label kind must be P or A, got {other:?}"),
                ))
            }
        };
        records.push(ConceptRecord {
            concept_id: concept_id.to_string(),
            label: label.to_string(),
            source: cols[2].trim().to_string(),
            is_primary,
            line: line_no,
        });
    }
    Ok(records)
}

fn invalid(line: usize, message: impl Into<String>) -> OntologyError {
    OntologyError::Invalid {
        line,
        message: message.into(),
    }
}

/// Normalized label: lowercase token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phrase(Vec<String>);

impl Phrase {
    pub fn from_text(text: &str) -> Self {
        Phrase(textproc::normalize(text))
    }

    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Self {
        Phrase(tokens.iter().map(|t| t.as_ref().to_lowercase()).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn key(&self) -> String {
        self.0.join(" ")
    }
}

impl fmt::Display for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// A set of interchangeable labels.
///
/// Equality compares `group_id` and `labels` only; provenance is not part of
/// the serialized table and does not survive a save/load cycle.
#[derive(Debug, Clone)]
pub struct AlternativeGroup {
    pub group_id: usize,
    pub labels: BTreeSet<Phrase>,
    pub provenance: BTreeMap<Phrase, BTreeSet<String>>,
}

impl PartialEq for AlternativeGroup {
    fn eq(&self, other: &Self) -> bool {
        self.group_id == other.group_id && self.labels == other.labels
    }
}

impl Eq for AlternativeGroup {}

impl AlternativeGroup {
    pub fn contains(&self, phrase: &Phrase) -> bool {
        self.labels.contains(phrase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignOptions {
    /// Add a naive plural of each label's final word as an extra member.
    pub pluralize: bool,
}

impl Default for AlignOptions {
    fn default() -> Self {
        Self { pluralize: true }
    }
}

pub const PLURAL_SOURCE: &str = "plural";

#[derive(Debug, Clone, Default)]
pub struct PhraseTable {
    groups: Vec<AlternativeGroup>,
    index: HashMap<String, usize>,
    max_len: usize,
}

impl PartialEq for PhraseTable {
    fn eq(&self, other: &Self) -> bool {
        self.groups == other.groups
    }
}

impl PhraseTable {
    fn from_groups(groups: Vec<AlternativeGroup>) -> Self {
        let mut index = HashMap::new();
        let mut max_len = 0;
        for g in &groups {
            for label in &g.labels {
                index.insert(label.key(), g.group_id);
                max_len = max_len.max(label.len());
            }
        }
        Self {
            groups,
            index,
            max_len,
        }
    }

    pub fn groups(&self) -> &[AlternativeGroup] {
        &self.groups
    }

    pub fn group(&self, id: usize) -> Option<&AlternativeGroup> {
        self.groups.get(id)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn label_count(&self) -> usize {
        self.index.len()
    }

    /// Longest label in tokens; 0 for an empty table.
    pub fn max_label_len(&self) -> usize {
        self.max_len
    }

    pub fn lookup<S: AsRef<str>>(&self, phrase: &[S]) -> Option<usize> {
        let key = phrase
            .iter()
            .map(|s| s.as_ref())
            .collect::<Vec<_>>()
            .join(" ");
        self.lookup_key(&key)
    }

    /// Lookup by space-joined normalized tokens.
    pub fn lookup_key(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// `group_id<TAB>label`, sorted by group then label.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for g in &self.groups {
            let mut keys: Vec<String> = g.labels.iter().map(Phrase::key).collect();
            keys.sort();
            for key in keys {
                writeln!(out, "{}\t{}", g.group_id, key)?;
            }
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("labels are UTF-8")
    }

    /// Load a file written by [`PhraseTable::write_tsv`]. Group ids must be
    /// dense from 0 and every group needs at least two distinct labels.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self, OntologyError> {
        let mut by_id: BTreeMap<usize, BTreeSet<Phrase>> = BTreeMap::new();
        let mut seen: HashMap<Phrase, usize> = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 2 {
                return Err(OntologyError::ColumnCount {
                    line: line_no,
                    expected: 2,
                    found: cols.len(),
                });
            }
            let id: usize = cols[0]
                .trim()
                .parse()
                .map_err(|_| invalid(line_no, format!("bad group id {:?}", cols[0])))?;
            let phrase = Phrase::from_text(cols[1]);
            if phrase.is_empty() {
                return Err(invalid(line_no, "empty label"));
            }
            if let Some(&other) = seen.get(&phrase) {
                if other != id {
                    return Err(invalid(
                        line_no,
                        format!("label {phrase:?} already belongs to group {other}"),
                    ));
                }
            }
            seen.insert(phrase.clone(), id);
            by_id.entry(id).or_default().insert(phrase);
        }

        let mut groups = Vec::with_capacity(by_id.len());
        for (expected, (id, labels)) in by_id.into_iter().enumerate() {
            if id != expected {
                return Err(OntologyError::Inconsistent(format!(
                    "group ids must be dense from 0; expected {expected}, found {id}"
                )));
            }
            if labels.len() < 2 {
                return Err(OntologyError::Inconsistent(format!(
                    "group {id} has fewer than two labels"
                )));
            }
            groups.push(AlternativeGroup {
                group_id: id,
                labels,
                provenance: BTreeMap::new(),
            });
        }
        Ok(Self::from_groups(groups))
    }
}

/// Disjoint-set forest with path compression and union by rank.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        if self.rank[a] < self.rank[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        if self.rank[a] == self.rank[b] {
            self.rank[a] = self.rank[a].saturating_add(1);
        }
        a
    }
}

/// Merge concepts that share a normalized label and build the phrase table.
///
/// Pruning of single-label components happens before plural expansion, so a
/// generated plural never rescues a concept that has no real alternative.
pub fn align(records: &[ConceptRecord], opts: &AlignOptions) -> PhraseTable {
    // Concept ids sorted so that component numbering is input-order independent.
    let concept_ids: BTreeSet<&str> = records.iter().map(|r| r.concept_id.as_str()).collect();
    let concept_index: HashMap<&str, usize> = concept_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, i))
        .collect();

    let mut dsu = DisjointSet::new(concept_ids.len());
    let mut first_owner: HashMap<Phrase, usize> = HashMap::new();
    let mut label_sources: BTreeMap<Phrase, BTreeSet<String>> = BTreeMap::new();
    for r in records {
        let phrase = Phrase::from_text(&r.label);
        if phrase.is_empty() {
            continue;
        }
        let ci = concept_index[r.concept_id.as_str()];
        match first_owner.get(&phrase) {
            Some(&other) => {
                dsu.union(ci, other);
            }
            None => {
                first_owner.insert(phrase.clone(), ci);
            }
        }
        label_sources
            .entry(phrase)
            .or_default()
            .insert(r.source.clone());
    }

    // Component root -> (smallest concept index, labels).
    let mut components: HashMap<usize, (usize, BTreeSet<Phrase>)> = HashMap::new();
    for (phrase, &owner) in &first_owner {
        let root = dsu.find(owner);
        let entry = components
            .entry(root)
            .or_insert((usize::MAX, BTreeSet::new()));
        entry.1.insert(phrase.clone());
    }
    for ci in 0..concept_ids.len() {
        let root = dsu.find(ci);
        if let Some(entry) = components.get_mut(&root) {
            entry.0 = entry.0.min(ci);
        }
    }

    let mut kept: Vec<(usize, BTreeSet<Phrase>)> = components
        .into_values()
        .filter(|(_, labels)| labels.len() >= 2)
        .collect();
    kept.sort_by_key(|(min_concept, _)| *min_concept);

    let mut groups: Vec<AlternativeGroup> = kept
        .into_iter()
        .enumerate()
        .map(|(gid, (_, labels))| {
            let provenance = labels
                .iter()
                .map(|l| (l.clone(), label_sources.get(l).cloned().unwrap_or_default()))
                .collect();
            AlternativeGroup {
                group_id: gid,
                labels,
                provenance,
            }
        })
        .collect();

    if opts.pluralize {
        let mut taken: BTreeSet<Phrase> = first_owner.into_keys().collect();
        for g in &mut groups {
            let originals: Vec<Phrase> = g.labels.iter().cloned().collect();
            for label in originals {
                let Some(plural) = pluralize_head(&label) else {
                    continue;
                };
                if taken.insert(plural.clone()) {
                    g.provenance
                        .entry(plural.clone())
                        .or_default()
                        .insert(PLURAL_SOURCE.to_string());
                    g.labels.insert(plural);
                }
            }
        }
    }

    PhraseTable::from_groups(groups)
}

/// Naive English plural of the final word. Returns `None` when the final
/// token is not alphabetic or already looks plural (`ears`, but not `pruritus`).
pub fn pluralize_head(phrase: &Phrase) -> Option<Phrase> {
    let (last, init) = phrase.0.split_last()?;
    if last.is_empty() || !last.chars().all(char::is_alphabetic) {
        return None;
    }
    if last.len() > 3
        && last.ends_with('s')
        && !["ss", "us", "is"].iter().any(|e| last.ends_with(e))
    {
        return None;
    }
    let mut tokens = init.to_vec();
    tokens.push(pluralize_word(last));
    Some(Phrase(tokens))
}

pub fn pluralize_word(word: &str) -> String {
    const SIBILANTS: [&str; 5] = ["s", "x", "z", "ch", "sh"];
    if SIBILANTS.iter().any(|s| word.ends_with(s)) {
        return format!("{word}es");
    }
    if let Some(stem) = word.strip_suffix('y') {
        let vowel_before = stem.chars().last().is_some_and(|c| "aeiou".contains(c));
        if !stem.is_empty() && !vowel_before {
            return format!("{stem}ies");
        }
    }
    format!("{word}s")
}
