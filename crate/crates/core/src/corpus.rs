//! Tagged-corpus parsing, tagsets, tag-merging maps and vocabularies.
//!
//! The input format is the horizontal layout used by the LOB distribution:
//! whitespace-separated items of the form `surface_TAG`, an optional line
//! prefix of sample id and line number (`A01 3`), and a caret `^` marking the
//! start of a sentence. See [`read_lob`] for the exact rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: tag {tag:?} not present in tag map {map:?}")]
    UnknownRawTag { line: usize, tag: String, map: String },
    #[error("tag map line {line}: expected `raw<TAB>merged`, got {got:?}")]
    MalformedMapLine { line: usize, got: String },
    #[error("split point {n_train} exceeds corpus length {n}")]
    SplitOutOfRange { n_train: usize, n: usize },
    #[error("tag {0:?} is not part of the tagset")]
    UnknownTag(String),
}

/// One corpus token: the surface form plus its merged and original tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub tag: String,
    pub raw_tag: String,
}

/// An ordered inventory of part-of-speech tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tagset {
    pub name: String,
    tags: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Tagset {
    pub fn new(name: impl Into<String>, tags: Vec<String>) -> Self {
        let mut seen = BTreeSet::new();
        let tags: Vec<String> = tags.into_iter().filter(|t| seen.insert(t.clone())).collect();
        let index = tags.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Tagset { name: name.into(), tags, index }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.index.contains_key(tag)
    }

    pub fn position(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }
}

/// A raw-tag to merged-tag projection, loaded from a tab-separated file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagMap {
    pub name: String,
    entries: BTreeMap<String, String>,
    /// Merged tags in order of first appearance in the map file.
    image_order: Vec<String>,
}

impl TagMap {
    pub fn new(name: impl Into<String>, pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        let mut entries = BTreeMap::new();
        let mut image_order = Vec::new();
        let mut seen = BTreeSet::new();
        for (raw, merged) in pairs {
            if seen.insert(merged.clone()) {
                image_order.push(merged.clone());
            }
            entries.insert(raw, merged);
        }
        TagMap { name: name.into(), entries, image_order }
    }

    /// Identity map over the given tags.
    pub fn identity(name: impl Into<String>, tags: &[&str]) -> Self {
        Self::new(name, tags.iter().map(|t| (t.to_string(), t.to_string())))
    }

    /// Reads a map file: one `raw<TAB>merged` pair per line, `#` comments and
    /// blank lines allowed.
    pub fn from_reader<R: BufRead>(name: impl Into<String>, reader: R) -> Result<Self, CorpusError> {
        let mut pairs = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.splitn(2, '\t');
            let raw = parts.next().unwrap_or_default().trim();
            let merged = parts.next().map(str::trim).unwrap_or_default();
            if raw.is_empty() || merged.is_empty() {
                return Err(CorpusError::MalformedMapLine { line: lineno + 1, got: line.clone() });
            }
            pairs.push((raw.to_string(), merged.to_string()));
        }
        Ok(Self::new(name, pairs))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let file = std::fs::File::open(path)?;
        Self::from_reader(name, std::io::BufReader::new(file))
    }

    pub fn get(&self, raw: &str) -> Option<&str> {
        self.entries.get(raw).map(String::as_str)
    }

    pub fn raw_tags(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// The target tagset: the distinct merged tags, in first-appearance order.
    pub fn image_tagset(&self) -> Tagset {
        Tagset::new(self.name.clone(), self.image_order.clone())
    }

    /// Compose with another map: `self` then `next`.
    pub fn compose(&self, next: &TagMap, name: impl Into<String>) -> Result<Self, CorpusError> {
        let mut pairs = Vec::new();
        for (raw, mid) in &self.entries {
            let merged = next.get(mid).ok_or_else(|| CorpusError::UnknownTag(mid.clone()))?;
            pairs.push((raw.clone(), merged.to_string()));
        }
        Ok(Self::new(name, pairs))
    }
}

/// Projects a raw tag through a tag map.
pub fn merge_tag<'m>(raw: &str, tag_map: &'m TagMap) -> Result<&'m str, CorpusError> {
    tag_map.get(raw).ok_or_else(|| CorpusError::UnknownTag(raw.to_string()))
}

/// A sequence of tagged tokens with sentence-start indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedCorpus {
    pub tokens: Vec<Token>,
    /// Strictly increasing; contains 0 whenever the corpus is nonempty.
    pub sentence_starts: Vec<usize>,
}

impl TaggedCorpus {
    pub fn n(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_sentence_start(&self, i: usize) -> bool {
        self.sentence_starts.binary_search(&i).is_ok()
    }

    /// Renders the corpus back to the horizontal format, one sentence per
    /// line, using the original raw tags. Re-parsing through the same tag map
    /// reproduces the token sequence.
    pub fn to_lob_string(&self) -> String {
        let mut out = String::new();
        for (i, tok) in self.tokens.iter().enumerate() {
            if self.is_sentence_start(i) {
                if i > 0 {
                    out.push('\n');
                }
                out.push_str("^ ");
            } else if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}_{}", tok.surface, tok.raw_tag);
        }
        out.push('\n');
        out
    }
}

/// Outcome of [`read_lob`]: the corpus plus the count of items that carried
/// no tag and were skipped.
#[derive(Debug)]
pub struct LobReadOutcome {
    pub corpus: TaggedCorpus,
    pub skipped_items: usize,
}

fn is_sample_id(item: &str) -> bool {
    let mut chars = item.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.clone().next().is_some()
        && chars.all(|c| c.is_ascii_digit())
}

fn is_line_number(item: &str) -> bool {
    !item.is_empty() && item.chars().all(|c| c.is_ascii_digit())
}

/// Strips leading escape markers: a backslash swallows itself and the one
/// character that follows it (`\0Mr` -> `Mr`).
fn strip_escape_markers(surface: &str) -> &str {
    let mut rest = surface;
    while let Some(stripped) = rest.strip_prefix('\\') {
        let mut chars = stripped.chars();
        match chars.next() {
            Some(_) => rest = chars.as_str(),
            None => return rest,
        }
    }
    rest
}

/// Parses a tagged corpus in the horizontal layout.
///
/// Rules, in order:
/// * A line prefix of sample id and line number (`A01 3`) is discarded.
/// * `^` marks the next token as a sentence start and is not itself a token.
/// * Every other item is split at its **last** underscore into
///   `(surface, raw_tag)`; surfaces may contain underscores, tags never do.
/// * Leading backslash escape markers are stripped from surfaces; tags are
///   kept verbatim.
/// * Items with no underscore are skipped and counted.
///
/// Raw tags must be present in `tag_map`; the merged tag is stored on each
/// token alongside the raw one.
pub fn read_lob<R: BufRead>(reader: R, tag_map: &TagMap) -> Result<LobReadOutcome, CorpusError> {
    let mut tokens: Vec<Token> = Vec::new();
    let mut sentence_starts: Vec<usize> = Vec::new();
    let mut skipped = 0usize;
    let mut pending_start = false;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let mut items = line.split_whitespace().peekable();
        if let Some(first) = items.peek() {
            if is_sample_id(first) {
                let mut ahead = items.clone();
                ahead.next();
                if ahead.peek().map(|s| is_line_number(s)).unwrap_or(false) {
                    items.next();
                    items.next();
                }
            }
        }
        for item in items {
            if item == "^" {
                pending_start = true;
                continue;
            }
            let Some(split_at) = item.rfind('_') else {
                skipped += 1;
                continue;
            };
            let (surface_part, tag_part) = item.split_at(split_at);
            let raw_tag = &tag_part[1..];
            let surface = strip_escape_markers(surface_part);
            if surface.is_empty() {
                skipped += 1;
                continue;
            }
            let merged = tag_map.get(raw_tag).ok_or_else(|| CorpusError::UnknownRawTag {
                line: lineno + 1,
                tag: raw_tag.to_string(),
                map: tag_map.name.clone(),
            })?;
            if pending_start || tokens.is_empty() {
                sentence_starts.push(tokens.len());
                pending_start = false;
            }
            tokens.push(Token {
                surface: surface.to_string(),
                tag: merged.to_string(),
                raw_tag: raw_tag.to_string(),
            });
        }
    }
    Ok(LobReadOutcome { corpus: TaggedCorpus { tokens, sentence_starts }, skipped_items: skipped })
}

/// Splits a corpus into the first `n_train` tokens and the remainder.
/// Sentence boundaries are preserved on each side; the remainder's first
/// token is treated as sentence-initial.
pub fn split_corpus(
    corpus: &TaggedCorpus,
    n_train: usize,
) -> Result<(TaggedCorpus, TaggedCorpus), CorpusError> {
    if n_train > corpus.n() {
        return Err(CorpusError::SplitOutOfRange { n_train, n: corpus.n() });
    }
    let train = TaggedCorpus {
        tokens: corpus.tokens[..n_train].to_vec(),
        sentence_starts: corpus.sentence_starts.iter().copied().filter(|&s| s < n_train).collect(),
    };
    let mut test_starts: Vec<usize> = corpus
        .sentence_starts
        .iter()
        .copied()
        .filter(|&s| s >= n_train)
        .map(|s| s - n_train)
        .collect();
    if corpus.n() > n_train && test_starts.first() != Some(&0) {
        test_starts.insert(0, 0);
    }
    let test = TaggedCorpus {
        tokens: corpus.tokens[n_train..].to_vec(),
        sentence_starts: test_starts,
    };
    Ok((train, test))
}

/// A fixed word inventory with stable integer identifiers, plus the token
/// statistics of the text it was fixed from (used for the Turing estimate of
/// the unknown-word probability).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    words: Vec<String>,
    index: BTreeMap<String, u32>,
    pub source: String,
    /// Token count of the source text.
    pub source_tokens: u64,
    /// Distinct surfaces in the source text (equals `len()` when the
    /// vocabulary was fixed from that text).
    pub source_distinct: u64,
}

impl Vocabulary {
    pub fn new(words: Vec<String>, source: impl Into<String>, tokens: u64, distinct: u64) -> Self {
        let mut dedup = BTreeSet::new();
        let words: Vec<String> = words.into_iter().filter(|w| dedup.insert(w.clone())).collect();
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        Vocabulary { words, index, source: source.into(), source_tokens: tokens, source_distinct: distinct }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Fixes a vocabulary from a training corpus: the distinct surfaces in order
/// of first occurrence, with the source token statistics recorded.
pub fn build_vocabulary(train: &TaggedCorpus) -> Vocabulary {
    let mut seen = BTreeSet::new();
    let mut words = Vec::new();
    for tok in &train.tokens {
        if seen.insert(tok.surface.clone()) {
            words.push(tok.surface.clone());
        }
    }
    let distinct = words.len() as u64;
    Vocabulary::new(words, "training text", train.n() as u64, distinct)
}
