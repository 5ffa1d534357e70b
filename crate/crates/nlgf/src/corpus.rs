//! Article data model, JSONL corpus ingestion, class balancing, and
//! inter-rater reliability metrics.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::us_states::normalize_state;

/// The article-level geo-focus label. The declaration order is the canonical
/// total order used for serialization, score vectors, and tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeoFocusLevel {
    Local,
    State,
    National,
    International,
    None,
}

impl GeoFocusLevel {
    pub const ALL: [GeoFocusLevel; 5] = [
        GeoFocusLevel::Local,
        GeoFocusLevel::State,
        GeoFocusLevel::National,
        GeoFocusLevel::International,
        GeoFocusLevel::None,
    ];

    pub fn index(self) -> usize {
        match self {
            GeoFocusLevel::Local => 0,
            GeoFocusLevel::State => 1,
            GeoFocusLevel::National => 2,
            GeoFocusLevel::International => 3,
            GeoFocusLevel::None => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GeoFocusLevel::Local => "local",
            GeoFocusLevel::State => "state",
            GeoFocusLevel::National => "national",
            GeoFocusLevel::International => "international",
            GeoFocusLevel::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<GeoFocusLevel> {
        match s.trim().to_ascii_lowercase().as_str() {
            "local" => Some(GeoFocusLevel::Local),
            "state" => Some(GeoFocusLevel::State),
            "national" => Some(GeoFocusLevel::National),
            "international" => Some(GeoFocusLevel::International),
            "none" => Some(GeoFocusLevel::None),
            _ => None,
        }
    }
}

impl fmt::Display for GeoFocusLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One US local news article with its publisher location and optional gold
/// annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub title: String,
    pub body: String,
    pub publisher_city: String,
    /// Canonical two-letter state code (50 states plus DC).
    pub publisher_state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_level: Option<GeoFocusLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_foci: Option<BTreeSet<String>>,
}

impl Article {
    /// Validates invariants and normalizes the publisher state to its
    /// two-letter code. Full state names are accepted on input.
    pub fn validate(mut self) -> Result<Article, String> {
        if self.id.trim().is_empty() {
            return Err("id is empty".into());
        }
        if self.title.trim().is_empty() && self.body.trim().is_empty() {
            return Err("both title and body are empty".into());
        }
        match normalize_state(&self.publisher_state) {
            Some(code) => self.publisher_state = code.to_string(),
            None => {
                return Err(format!(
                    "publisher_state '{}' is not a US state or DC",
                    self.publisher_state
                ))
            }
        }
        Ok(self)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot open corpus file: {0}")]
    Io(#[from] std::io::Error),
    #[error("duplicate article id '{0}'")]
    DuplicateId(String),
    #[error("level '{0}' has no articles")]
    EmptyLevel(GeoFocusLevel),
    #[error("article '{0}' is missing gold_level")]
    MissingGoldLevel(String),
}

/// A rejected input line: 1-based line number plus the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// Loads a JSONL corpus. Malformed or invalid lines are collected as
/// [`LineError`]s while the remaining records load; duplicate ids abort the
/// whole load.
pub fn load_corpus(path: &Path) -> Result<(Vec<Article>, Vec<LineError>), CorpusError> {
    let reader = BufReader::new(File::open(path)?);
    let mut articles = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Result<Article, _> = serde_json::from_str(&line);
        match parsed {
            Ok(raw) => match raw.validate() {
                Ok(article) => {
                    if !seen.insert(article.id.clone()) {
                        return Err(CorpusError::DuplicateId(article.id));
                    }
                    articles.push(article);
                }
                Err(msg) => errors.push(LineError {
                    line: idx + 1,
                    message: msg,
                }),
            },
            Err(e) => errors.push(LineError {
                line: idx + 1,
                message: e.to_string(),
            }),
        }
    }
    Ok((articles, errors))
}

/// Writes a corpus back to JSONL, one article per line.
pub fn save_corpus(articles: &[Article], w: &mut dyn std::io::Write) -> std::io::Result<()> {
    for a in articles {
        serde_json::to_writer(&mut *w, a)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Downsamples to equal per-level counts (the minimum per-level count) using
/// seeded uniform sampling without replacement. Output preserves input order.
pub fn balance_by_level(corpus: &[Article], seed: u64) -> Result<Vec<Article>, CorpusError> {
    let mut by_level: BTreeMap<GeoFocusLevel, Vec<usize>> = BTreeMap::new();
    for (i, a) in corpus.iter().enumerate() {
        let level = a
            .gold_level
            .ok_or_else(|| CorpusError::MissingGoldLevel(a.id.clone()))?;
        by_level.entry(level).or_default().push(i);
    }
    for level in GeoFocusLevel::ALL {
        if !by_level.contains_key(&level) {
            return Err(CorpusError::EmptyLevel(level));
        }
    }
    let min = by_level.values().map(Vec::len).min().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::new();
    for indices in by_level.values() {
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut rng);
        keep.extend_from_slice(&shuffled[..min]);
    }
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| corpus[i].clone()).collect())
}

/// Result of an agreement metric; `degenerate` marks the zero-expected-
/// disagreement convention where the score is defined as 1.0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub value: f64,
    pub degenerate: bool,
}

#[derive(Debug, Error)]
pub enum IrrError {
    #[error("label sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty label sequence")]
    Empty,
    #[error("need at least 2 annotators and 2 items")]
    TooSmall,
    #[error("annotator {0} does not cover every item")]
    MissingAnnotations(usize),
    #[error("distance {0} requires {1} values")]
    DistanceMismatch(&'static str, &'static str),
}

/// Cohen's kappa for two annotators over single geo-focus-level labels:
/// kappa = (p_o - p_e) / (1 - p_e), with chance agreement p_e taken from the
/// marginal label distributions.
pub fn cohens_kappa(a: &[GeoFocusLevel], b: &[GeoFocusLevel]) -> Result<Agreement, IrrError> {
    if a.len() != b.len() {
        return Err(IrrError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n == 0 {
        return Err(IrrError::Empty);
    }
    let mut marg_a = [0usize; 5];
    let mut marg_b = [0usize; 5];
    let mut agree = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        marg_a[x.index()] += 1;
        marg_b[y.index()] += 1;
        if x == y {
            agree += 1;
        }
    }
    let p_o = agree as f64 / n as f64;
    let p_e: f64 = (0..5)
        .map(|k| (marg_a[k] as f64 / n as f64) * (marg_b[k] as f64 / n as f64))
        .sum();
    if (1.0 - p_e).abs() < 1e-12 {
        // Both sides a single constant label: chance agreement saturates.
        return Ok(Agreement {
            value: 1.0,
            degenerate: true,
        });
    }
    Ok(Agreement {
        value: (p_o - p_e) / (1.0 - p_e),
        degenerate: false,
    })
}

/// One annotator's value for one item: a single label or a label set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnnotationValue {
    Single(String),
    Set(BTreeSet<String>),
}

/// Complete annotations: every annotator labels every item.
#[derive(Debug, Clone)]
pub struct AnnotationSet {
    pub item_ids: Vec<String>,
    /// `annotators[a][i]` is annotator `a`'s value for item `i`.
    pub annotators: Vec<Vec<AnnotationValue>>,
}

impl AnnotationSet {
    pub fn new(
        item_ids: Vec<String>,
        annotators: Vec<Vec<AnnotationValue>>,
    ) -> Result<AnnotationSet, IrrError> {
        if annotators.len() < 2 || item_ids.len() < 2 {
            return Err(IrrError::TooSmall);
        }
        for (idx, values) in annotators.iter().enumerate() {
            if values.len() != item_ids.len() {
                return Err(IrrError::MissingAnnotations(idx));
            }
        }
        Ok(AnnotationSet {
            item_ids,
            annotators,
        })
    }
}

/// Distance function between annotation values for Krippendorff's alpha.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaDistance {
    /// 0 if equal, 1 otherwise; for single labels.
    Nominal,
    /// 1 - |A and B| / |A or B|; for label sets. d(empty, empty) = 0.
    Jaccard,
}

fn value_distance(a: &AnnotationValue, b: &AnnotationValue, d: AlphaDistance) -> f64 {
    match d {
        AlphaDistance::Nominal => {
            if a == b {
                0.0
            } else {
                1.0
            }
        }
        AlphaDistance::Jaccard => {
            let (x, y) = match (a, b) {
                (AnnotationValue::Set(x), AnnotationValue::Set(y)) => (x, y),
                _ => return if a == b { 0.0 } else { 1.0 },
            };
            let union = x.union(y).count();
            if union == 0 {
                return 0.0;
            }
            let inter = x.intersection(y).count();
            1.0 - inter as f64 / union as f64
        }
    }
}

/// Krippendorff's alpha = 1 - D_o / D_e with the generalized distance form:
/// observed disagreement averages pairwise distances within items, expected
/// disagreement averages pairwise distances over the pooled values.
pub fn krippendorff_alpha(
    set: &AnnotationSet,
    distance: AlphaDistance,
) -> Result<Agreement, IrrError> {
    let n_items = set.item_ids.len();
    let m = set.annotators.len();
    if m < 2 || n_items < 2 {
        return Err(IrrError::TooSmall);
    }
    if distance == AlphaDistance::Jaccard {
        let all_sets = set
            .annotators
            .iter()
            .flatten()
            .all(|v| matches!(v, AnnotationValue::Set(_)));
        if !all_sets {
            return Err(IrrError::DistanceMismatch("jaccard", "label sets"));
        }
    }
    let n_total = (n_items * m) as f64;

    // D_o: within-item ordered pair distances, each item weighted by 1/(m-1).
    let mut d_o = 0.0;
    for i in 0..n_items {
        let mut item_sum = 0.0;
        for a in 0..m {
            for b in 0..m {
                if a != b {
                    item_sum += value_distance(
                        &set.annotators[a][i],
                        &set.annotators[b][i],
                        distance,
                    );
                }
            }
        }
        d_o += item_sum / (m - 1) as f64;
    }
    d_o /= n_total;

    // D_e: ordered pair distances over the pooled multiset of values.
    let pooled: Vec<&AnnotationValue> = set.annotators.iter().flatten().collect();
    let mut d_e = 0.0;
    for (i, a) in pooled.iter().enumerate() {
        for (j, b) in pooled.iter().enumerate() {
            if i != j {
                d_e += value_distance(a, b, distance);
            }
        }
    }
    d_e /= n_total * (n_total - 1.0);

    if d_e.abs() < 1e-15 {
        return Ok(Agreement {
            value: 1.0,
            degenerate: true,
        });
    }
    Ok(Agreement {
        value: 1.0 - d_o / d_e,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::GeoFocusLevel::{Local as L, State as S};
    use super::*;
    use std::io::Write;

    fn article(id: &str, level: GeoFocusLevel) -> Article {
        Article {
            id: id.to_string(),
            title: format!("title {id}"),
            body: "body".to_string(),
            publisher_city: "Kimball".to_string(),
            publisher_state: "NE".to_string(),
            gold_level: Some(level),
            gold_foci: None,
        }
    }

    fn write_jsonl(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn load_valid_lines() {
        let f = write_jsonl(&[
            r#"{"id":"a","title":"t","body":"b","publisher_city":"X","publisher_state":"NE"}"#,
            r#"{"id":"b","title":"t","body":"b","publisher_city":"X","publisher_state":"Ohio"}"#,
            r#"{"id":"c","title":"t","body":"b","publisher_city":"X","publisher_state":"HI"}"#,
        ]);
        let (articles, errors) = load_corpus(f.path()).unwrap();
        assert_eq!(articles.len(), 3);
        assert!(errors.is_empty());
        assert_eq!(articles[1].publisher_state, "OH");
    }

    #[test]
    fn invalid_line_rejected_others_loaded() {
        let f = write_jsonl(&[
            r#"{"id":"a","title":"t","body":"b","publisher_city":"X","publisher_state":"NE"}"#,
            r#"{"id":"b","title":"t","body":"b","publisher_city":"X"}"#,
            r#"{"id":"c","title":"t","body":"b","publisher_city":"X","publisher_state":"ZZ"}"#,
        ]);
        let (articles, errors) = load_corpus(f.path()).unwrap();
        assert_eq!(articles.len(), 1);
        assert_eq!(errors.len(), 2);
        assert_eq!(errors[0].line, 2);
        assert_eq!(errors[1].line, 3);
    }

    #[test]
    fn duplicate_id_is_fatal() {
        let f = write_jsonl(&[
            r#"{"id":"a","title":"t","body":"b","publisher_city":"X","publisher_state":"NE"}"#,
            r#"{"id":"a","title":"t","body":"b","publisher_city":"X","publisher_state":"NE"}"#,
        ]);
        assert!(matches!(
            load_corpus(f.path()),
            Err(CorpusError::DuplicateId(_))
        ));
    }

    #[test]
    fn load_save_load_roundtrip() {
        let f = write_jsonl(&[
            r#"{"id":"a","title":"t","body":"b","publisher_city":"X","publisher_state":"NE","gold_level":"local","gold_foci":["Kimball County, Nebraska"]}"#,
        ]);
        let (articles, _) = load_corpus(f.path()).unwrap();
        let mut buf = Vec::new();
        save_corpus(&articles, &mut buf).unwrap();
        let mut f2 = tempfile::NamedTempFile::new().unwrap();
        f2.write_all(&buf).unwrap();
        let (again, errs) = load_corpus(f2.path()).unwrap();
        assert!(errs.is_empty());
        assert_eq!(articles, again);
    }

    #[test]
    fn balance_takes_min_per_level() {
        let mut corpus = Vec::new();
        for i in 0..4 {
            corpus.push(article(&format!("l{i}"), GeoFocusLevel::Local));
        }
        for (lvl, tag) in [
            (GeoFocusLevel::State, "s"),
            (GeoFocusLevel::National, "n"),
            (GeoFocusLevel::International, "i"),
            (GeoFocusLevel::None, "z"),
        ] {
            corpus.push(article(&format!("{tag}0"), lvl));
            corpus.push(article(&format!("{tag}1"), lvl));
        }
        let balanced = balance_by_level(&corpus, 7).unwrap();
        assert_eq!(balanced.len(), 10);
        for lvl in GeoFocusLevel::ALL {
            let count = balanced.iter().filter(|a| a.gold_level == Some(lvl)).count();
            assert_eq!(count, 2, "level {lvl}");
        }
    }

    #[test]
    fn balance_is_identity_on_balanced_input_and_deterministic() {
        let corpus: Vec<Article> = GeoFocusLevel::ALL
            .iter()
            .flat_map(|&lvl| (0..2).map(move |i| article(&format!("{lvl}{i}"), lvl)))
            .collect();
        let b1 = balance_by_level(&corpus, 1).unwrap();
        let b2 = balance_by_level(&corpus, 1).unwrap();
        assert_eq!(b1, corpus);
        assert_eq!(b1, b2);
    }

    #[test]
    fn balance_rejects_missing_level() {
        let corpus = vec![article("a", GeoFocusLevel::Local)];
        assert!(matches!(
            balance_by_level(&corpus, 0),
            Err(CorpusError::EmptyLevel(_))
        ));
    }

    #[test]
    fn kappa_perfect_agreement() {
        let a = [L, S, L, S];
        let k = cohens_kappa(&a, &a).unwrap();
        assert_eq!(k.value, 1.0);
        assert!(!k.degenerate);
    }

    #[test]
    fn kappa_hand_cases() {
        // p_o = 0.5, p_e = 0.5 -> 0.0
        let k = cohens_kappa(&[L, L, S, S], &[L, S, L, S]).unwrap();
        assert!((k.value - 0.0).abs() < 1e-12);
        // p_o = 0.75, p_e = 0.5 -> 0.5
        let k = cohens_kappa(&[L, L, L, S], &[L, L, S, S]).unwrap();
        assert!((k.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kappa_symmetric_and_degenerate() {
        let a = [L, L, S, S];
        let b = [L, S, S, S];
        let k1 = cohens_kappa(&a, &b).unwrap();
        let k2 = cohens_kappa(&b, &a).unwrap();
        assert!((k1.value - k2.value).abs() < 1e-12);
        let c = [L, L, L];
        let k = cohens_kappa(&c, &c).unwrap();
        assert!(k.degenerate);
        assert_eq!(k.value, 1.0);
    }

    fn singles(labels: &[&str]) -> Vec<AnnotationValue> {
        labels
            .iter()
            .map(|l| AnnotationValue::Single(l.to_string()))
            .collect()
    }

    #[test]
    fn alpha_identical_singles() {
        let set = AnnotationSet::new(
            vec!["1".into(), "2".into(), "3".into()],
            vec![singles(&["a", "b", "a"]), singles(&["a", "b", "a"])],
        )
        .unwrap();
        let r = krippendorff_alpha(&set, AlphaDistance::Nominal).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn alpha_identical_sets_jaccard() {
        let sets = |v: &[&[&str]]| -> Vec<AnnotationValue> {
            v.iter()
                .map(|s| AnnotationValue::Set(s.iter().map(|x| x.to_string()).collect()))
                .collect()
        };
        let set = AnnotationSet::new(
            vec!["1".into(), "2".into()],
            vec![
                sets(&[&["a", "b"], &["c"]]),
                sets(&[&["a", "b"], &["c"]]),
            ],
        )
        .unwrap();
        let r = krippendorff_alpha(&set, AlphaDistance::Jaccard).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn alpha_nominal_one_disagreement_hand_value() {
        // ann1 = [a,a,b,b], ann2 = [a,a,b,c]: D_o = 0.25,
        // D_e = (56 - 18) / 56, alpha = 1 - 0.25/D_e = 12/19.
        let set = AnnotationSet::new(
            vec!["1".into(), "2".into(), "3".into(), "4".into()],
            vec![singles(&["a", "a", "b", "b"]), singles(&["a", "a", "b", "c"])],
        )
        .unwrap();
        let r = krippendorff_alpha(&set, AlphaDistance::Nominal).unwrap();
        assert!((r.value - 12.0 / 19.0).abs() < 1e-12, "got {}", r.value);
    }

    #[test]
    fn alpha_degenerate_constant_values() {
        let set = AnnotationSet::new(
            vec!["1".into(), "2".into()],
            vec![singles(&["a", "a"]), singles(&["a", "a"])],
        )
        .unwrap();
        let r = krippendorff_alpha(&set, AlphaDistance::Nominal).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.value, 1.0);
    }
}
