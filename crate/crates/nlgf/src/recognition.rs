//! Sentence segmentation and toponym-mention extraction.
//!
//! Recognition is a narrow trait so a statistical NER can be plugged in via
//! an external-process adapter; the built-in dictionary recognizer gives a
//! deterministic offline substitute for tests and CI.

use std::collections::HashMap;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Article;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityClass {
    GPE,
    LOC,
    FAC,
}

impl EntityClass {
    pub fn parse(s: &str) -> Option<EntityClass> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GPE" => Some(EntityClass::GPE),
            "LOC" => Some(EntityClass::LOC),
            "FAC" => Some(EntityClass::FAC),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntityClass::GPE => "GPE",
            EntityClass::LOC => "LOC",
            EntityClass::FAC => "FAC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    Title,
    Body,
}

/// One surface occurrence of a toponym in an article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToponymMention {
    pub surface: String,
    pub entity_class: EntityClass,
    pub sentence: String,
    pub section: Section,
    /// 0-based index in document order (title sentences before body).
    pub mention_ordinal: usize,
    /// True iff this is one of the first five mentions.
    pub is_leading: bool,
}

/// Number of initial mentions counted as leading toponyms.
pub const LEADING_WINDOW: usize = 5;

/// A recognized entity inside one sentence: byte offset plus length into the
/// sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEntity {
    pub start: usize,
    pub end: usize,
    pub class: EntityClass,
}

#[derive(Debug, Error)]
#[error("recognizer failed: {0}")]
pub struct RecognizerError(pub String);

/// Pluggable toponym recognizer. Implementations must either be safe for
/// concurrent use or serialize internally; the trait requires `Sync`.
pub trait Recognizer: Sync {
    fn classify(&self, sentence: &str) -> Result<Vec<RawEntity>, RecognizerError>;
}

/// Abbreviation-aware rule-based sentence splitter configuration.
#[derive(Debug, Clone)]
pub struct SplitConfig {
    /// Tokens (with trailing period) that never end a sentence.
    pub abbreviations: HashSet<String>,
    /// Treat a single capital letter followed by a period as an initial.
    pub single_letter_abbrev: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        let abbreviations = [
            "Dr.", "Mr.", "Mrs.", "Ms.", "Prof.", "Sen.", "Rep.", "Gov.", "Gen.", "Sgt.",
            "Lt.", "Col.", "Capt.", "St.", "Mt.", "Ave.", "Blvd.", "Rd.", "Jr.", "Sr.",
            "Inc.", "Co.", "Corp.", "Ltd.", "U.S.", "U.K.", "D.C.", "a.m.", "p.m.", "vs.",
            "etc.", "Jan.", "Feb.", "Mar.", "Apr.", "Jun.", "Jul.", "Aug.", "Sep.", "Sept.",
            "Oct.", "Nov.", "Dec.",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        SplitConfig {
            abbreviations,
            single_letter_abbrev: true,
        }
    }
}

/// Splits text into sentences with byte spans. Spans are non-overlapping, in
/// order, and cover all non-whitespace text.
pub fn split_sentences(text: &str, config: &SplitConfig) -> Vec<(String, std::ops::Range<usize>)> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut start: Option<usize> = None;
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() && !c.is_whitespace() {
            start = Some(pos);
        }
        if start.is_some() && matches!(c, '.' | '?' | '!') {
            // Swallow runs of terminal punctuation and closing quotes.
            let mut j = i;
            while j + 1 < chars.len() && matches!(chars[j + 1].1, '.' | '?' | '!' | '"' | '\'' | ')') {
                j += 1;
            }
            let end = chars[j].0 + chars[j].1.len_utf8();
            let is_period = c == '.';
            let word = preceding_token(text, pos);
            let abbreviation = is_period
                && (config.abbreviations.contains(word)
                    || (config.single_letter_abbrev && is_initial(word)));
            let next_starts_sentence = match chars[j + 1..].iter().find(|(_, ch)| !ch.is_whitespace())
            {
                None => true,
                Some((_, ch)) => {
                    ch.is_uppercase() || ch.is_ascii_digit() || matches!(ch, '"' | '\'' | '(')
                }
            };
            let next_is_ws = j + 1 >= chars.len() || chars[j + 1].1.is_whitespace();
            if !abbreviation && next_is_ws && next_starts_sentence {
                let s = start.take().unwrap();
                out.push((text[s..end].to_string(), s..end));
            }
            i = j + 1;
            continue;
        }
        i = i + 1;
    }
    if let Some(s) = start {
        // Trailing text without terminal punctuation.
        let mut end = bytes.len();
        while end > s && text[..end].ends_with(char::is_whitespace) {
            end -= 1;
        }
        out.push((text[s..end].to_string(), s..end));
    }
    out
}

fn preceding_token(text: &str, period_pos: usize) -> &str {
    let upto = &text[..period_pos + 1];
    match upto.rfind(char::is_whitespace) {
        Some(ws) => &upto[ws + 1..],
        None => upto,
    }
}

fn is_initial(word: &str) -> bool {
    let mut chars = word.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_uppercase())
}

/// Runs the recognizer over title sentences then body sentences and emits
/// mentions in document order. Sentences where the recognizer fails are
/// skipped and reported in `warnings`.
pub fn recognize(
    article: &Article,
    recognizer: &dyn Recognizer,
    config: &SplitConfig,
) -> (Vec<ToponymMention>, Vec<String>) {
    let mut mentions = Vec::new();
    let mut warnings = Vec::new();
    let mut ordinal = 0usize;
    for (section, text) in [(Section::Title, &article.title), (Section::Body, &article.body)] {
        for (sentence, _) in split_sentences(text, config) {
            let entities = match recognizer.classify(&sentence) {
                Ok(e) => e,
                Err(e) => {
                    warnings.push(format!(
                        "article {}: recognizer failed on sentence {:?}: {e}",
                        article.id, sentence
                    ));
                    continue;
                }
            };
            for entity in entities {
                let surface = sentence[entity.start..entity.end].to_string();
                mentions.push(ToponymMention {
                    surface,
                    entity_class: entity.class,
                    sentence: sentence.clone(),
                    section,
                    mention_ordinal: ordinal,
                    is_leading: ordinal < LEADING_WINDOW,
                });
                ordinal += 1;
            }
        }
    }
    (mentions, warnings)
}

/// A dictionary entry: alias surface mapped to its canonical name and class.
#[derive(Debug, Clone)]
pub struct AliasEntry {
    pub alias: String,
    pub canonical: String,
    pub class: EntityClass,
}

/// Deterministic longest-match dictionary recognizer over token boundaries.
/// Matching is case-sensitive; overlapping candidates resolve leftmost then
/// longest.
pub struct DictionaryRecognizer {
    // first token -> entries sorted by token count descending
    index: HashMap<String, Vec<(Vec<String>, EntityClass)>>,
}

impl DictionaryRecognizer {
    pub fn new(entries: &[AliasEntry]) -> DictionaryRecognizer {
        let mut index: HashMap<String, Vec<(Vec<String>, EntityClass)>> = HashMap::new();
        for e in entries {
            let tokens: Vec<String> = normalize_surface(&e.alias)
                .split_whitespace()
                .map(String::from)
                .collect();
            if tokens.is_empty() {
                continue;
            }
            index
                .entry(tokens[0].clone())
                .or_default()
                .push((tokens, e.class));
        }
        for candidates in index.values_mut() {
            candidates.sort_by(|a, b| b.0.len().cmp(&a.0.len()));
        }
        DictionaryRecognizer { index }
    }

    /// Parses a TSV alias table: `alias<TAB>canonical<TAB>class` per line,
    /// `#` comments allowed.
    pub fn parse_alias_table(content: &str) -> Result<Vec<AliasEntry>, RecognizerError> {
        let mut entries = Vec::new();
        for (i, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(RecognizerError(format!(
                    "alias table line {}: expected 3 tab-separated fields",
                    i + 1
                )));
            }
            let class = EntityClass::parse(parts[2]).ok_or_else(|| {
                RecognizerError(format!("alias table line {}: unknown class '{}'", i + 1, parts[2]))
            })?;
            entries.push(AliasEntry {
                alias: parts[0].to_string(),
                canonical: parts[1].to_string(),
                class,
            });
        }
        Ok(entries)
    }
}

/// Trims and collapses internal whitespace; no stemming or case folding.
pub fn normalize_surface(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Word tokens with byte spans; leading/trailing punctuation stripped.
fn tokenize(sentence: &str) -> Vec<(usize, usize)> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in sentence.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push((s, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push((s, sentence.len()));
    }
    tokens
        .into_iter()
        .filter_map(|(s, e)| {
            let tok = &sentence[s..e];
            let trimmed = tok.trim_matches(|c: char| c.is_ascii_punctuation() && c != '\'');
            if trimmed.is_empty() {
                return None;
            }
            let off = tok.find(trimmed).unwrap();
            Some((s + off, s + off + trimmed.len()))
        })
        .collect()
}

impl Recognizer for DictionaryRecognizer {
    fn classify(&self, sentence: &str) -> Result<Vec<RawEntity>, RecognizerError> {
        let tokens = tokenize(sentence);
        let words: Vec<&str> = tokens.iter().map(|&(s, e)| &sentence[s..e]).collect();
        let mut out = Vec::new();
        let mut i = 0usize;
        while i < tokens.len() {
            let mut matched = None;
            if let Some(candidates) = self.index.get(words[i]) {
                for (alias_tokens, class) in candidates {
                    let n = alias_tokens.len();
                    if i + n <= tokens.len()
                        && alias_tokens.iter().zip(&words[i..i + n]).all(|(a, w)| a == w)
                    {
                        matched = Some((n, *class));
                        break; // candidates sorted longest first
                    }
                }
            }
            match matched {
                Some((n, class)) => {
                    out.push(RawEntity {
                        start: tokens[i].0,
                        end: tokens[i + n - 1].1,
                        class,
                    });
                    i += n;
                }
                None => i += 1,
            }
        }
        Ok(out)
    }
}
