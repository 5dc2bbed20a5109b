//! Tokenization and greedy leftmost-longest span extraction.
//!
//! The tokenizer is intentionally plain: split on whitespace, then peel
//! punctuation characters off both ends of each chunk as single-character
//! tokens. Every token remembers whether whitespace preceded it so that a
//! token sequence can be rendered back into text with the source's spacing
//! convention (`"otalgia."` stays attached, `"triglycerides ."` keeps its gap).

use crate::ontology::PhraseTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Surface form as it appeared in the source.
    pub text: String,
    /// Lowercased form used for matching and scoring.
    pub norm: String,
    /// Byte offset of the token start in the sentence it was read from.
    pub offset: usize,
    /// Whether at least one whitespace character preceded the token.
    pub space_before: bool,
}

impl Token {
    pub fn new(text: impl Into<String>, offset: usize, space_before: bool) -> Self {
        let text = text.into();
        let norm = text.to_lowercase();
        Self {
            text,
            norm,
            offset,
            space_before,
        }
    }
}

/// A matched phrase-table entry covering tokens `start..end`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub group_id: usize,
    /// The normalized member label that matched, tokens joined by spaces.
    pub matched: String,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}'
                | '\u{2019}'
                | '\u{201C}'
                | '\u{201D}'
                | '\u{2026}'
                | '\u{2013}'
                | '\u{2014}'
        )
}

pub fn tokenize(sentence: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chunk_start: Option<usize> = None;
    let mut pending_space = false;

    let flush = |start: usize, end: usize, space: bool, tokens: &mut Vec<Token>| {
        split_chunk(sentence, start, end, space, tokens);
    };

    for (i, c) in sentence.char_indices() {
        if c.is_whitespace() {
            if let Some(start) = chunk_start.take() {
                flush(start, i, pending_space, &mut tokens);
            }
            pending_space = true;
        } else if chunk_start.is_none() {
            chunk_start = Some(i);
        }
    }
    if let Some(start) = chunk_start {
        flush(start, sentence.len(), pending_space, &mut tokens);
    }
    tokens
}

fn split_chunk(sentence: &str, start: usize, end: usize, space_before: bool, out: &mut Vec<Token>) {
    let chunk = &sentence[start..end];
    let chars: Vec<(usize, char)> = chunk.char_indices().collect();

    let mut lead = 0;
    while lead < chars.len() && is_punctuation(chars[lead].1) {
        lead += 1;
    }
    let mut trail = chars.len();
    while trail > lead && is_punctuation(chars[trail - 1].1) {
        trail -= 1;
    }

    let mut space = space_before;
    let mut push = |from: usize, to: usize, out: &mut Vec<Token>| {
        out.push(Token::new(&chunk[from..to], start + from, space));
        space = false;
    };

    let byte_end = |idx: usize| chars.get(idx).map_or(chunk.len(), |&(b, _)| b);
    for (idx, &(b, _)) in chars.iter().enumerate().take(lead) {
        push(b, byte_end(idx + 1), out);
    }
    if trail > lead {
        push(chars[lead].0, byte_end(trail), out);
    }
    for (idx, &(b, _)) in chars.iter().enumerate().skip(trail.max(lead)) {
        push(b, byte_end(idx + 1), out);
    }
}

/// Render tokens back into text, honouring each token's `space_before` flag
/// (except for the very first token, which never gets a leading space).
pub fn render(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 && tok.space_before {
            out.push(' ');
        }
        out.push_str(&tok.text);
    }
    out
}

/// Recompute byte offsets so they agree with [`render`].
pub fn reindex(tokens: &mut [Token]) {
    let mut pos = 0;
    for (i, tok) in tokens.iter_mut().enumerate() {
        if i > 0 && tok.space_before {
            pos += 1;
        }
        tok.offset = pos;
        pos += tok.text.len();
    }
}

/// Normalized token sequence for a free-text label.
pub fn normalize(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.norm).collect()
}

/// Greedy left-to-right extraction: at each position take the longest
/// table phrase starting there, then resume after it.
///
/// `max_len` defaults to the longest label in the table.
pub fn extract_spans(tokens: &[Token], table: &PhraseTable, max_len: Option<usize>) -> Vec<Span> {
    let max_len = max_len.unwrap_or_else(|| table.max_label_len()).max(1);
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut best: Option<(usize, usize)> = None;
        let mut key = String::new();
        for (j, tok) in tokens.iter().enumerate().take(i + max_len).skip(i) {
            if j > i {
                key.push(' ');
            }
            key.push_str(&tok.norm);
            if let Some(gid) = table.lookup_key(&key) {
                best = Some((j + 1, gid));
            }
        }
        match best {
            Some((end, group_id)) => {
                let matched = tokens[i..end]
                    .iter()
                    .map(|t| t.norm.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                spans.push(Span {
                    start: i,
                    end,
                    group_id,
                    matched,
                });
                i = end;
            }
            None => i += 1,
        }
    }
    spans
}
