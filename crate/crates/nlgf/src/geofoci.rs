//! Geo-foci extraction and the end-to-end article pipeline.
//!
//! Once an article's level is known, each toponym group whose IGL matches the
//! level gets a raw salience score (title mentions + total mentions + leading
//! mentions + GPE mentions), raw scores are normalized to sum to one, and
//! groups whose normalized score strictly exceeds the threshold alpha become
//! the article's geo-foci.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::classifier::LevelModel;
use crate::corpus::{Article, GeoFocusLevel};
use crate::disambiguation::{
    batch_disambiguate, DisambiguationCache, DisambiguationRequest, LlmBackend, RetryPolicy,
};
use crate::evaluation::foci_report;
use crate::features::{extract_features, group_toponyms, ResolvedMention, ToponymGroup};
use crate::gazetteer::{AdminLevel, Gazetteer};
use crate::igl::{assign_igl, Igl};
use crate::recognition::{recognize, Recognizer, SplitConfig};
use crate::us_states::state_display_name;

/// Default selection threshold; picked by the dev-set sweep in `tune_alpha`.
pub const DEFAULT_ALPHA: f64 = 0.25;

/// One focus candidate with its raw and normalized scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusScore {
    pub name: String,
    pub adm: AdminLevel,
    pub unit_id: String,
    pub raw: u32,
    pub score: f64,
    /// Ordinal of the group's earliest mention; breaks score ties.
    pub earliest_ordinal: usize,
}

/// Canonical display name for a resolved unit. Counties carry their state for
/// disambiguation ("Kimball County, Nebraska"); states and countries use the
/// unit name alone. Unknown ids fall back to the raw id.
pub fn canonical_name(gazetteer: &Gazetteer, adm: AdminLevel, unit_id: &str) -> String {
    let unit = match gazetteer.unit(adm, unit_id) {
        Some(u) => u,
        None => return unit_id.to_string(),
    };
    match adm {
        AdminLevel::County => {
            let state = unit
                .parent_id
                .as_deref()
                .map(|sid| {
                    state_display_name(sid)
                        .map(str::to_string)
                        .or_else(|| {
                            gazetteer
                                .unit(AdminLevel::State, sid)
                                .map(|s| s.name.clone())
                        })
                        .unwrap_or_else(|| sid.to_string())
                });
            match state {
                Some(state) => format!("{}, {}", unit.name, state),
                None => unit.name.clone(),
            }
        }
        AdminLevel::State | AdminLevel::Country => unit.name.clone(),
    }
}

fn level_target_igl(level: GeoFocusLevel) -> Option<Igl> {
    match level {
        GeoFocusLevel::Local => Some(Igl::Local),
        GeoFocusLevel::State => Some(Igl::State),
        GeoFocusLevel::National => Some(Igl::National),
        GeoFocusLevel::International => Some(Igl::International),
        GeoFocusLevel::None => None,
    }
}

/// Scores the groups matching the article's level. Raw score per group is
/// title + total + leading + GPE mention counts; normalized scores divide by
/// the raw sum. A none-level article, or a level with no matching groups,
/// yields no candidates.
pub fn focus_scores(
    groups: &[ToponymGroup],
    level: GeoFocusLevel,
    gazetteer: &Gazetteer,
) -> Vec<FocusScore> {
    let target = match level_target_igl(level) {
        Some(t) => t,
        None => return Vec::new(),
    };
    let matching: Vec<&ToponymGroup> = groups.iter().filter(|g| g.igl == target).collect();
    let raws: Vec<u32> = matching
        .iter()
        .map(|g| {
            (g.title_count() + g.mention_count() + g.leading_count() + g.gpe_count()) as u32
        })
        .collect();
    let total: u32 = raws.iter().sum();
    if total == 0 {
        return Vec::new();
    }
    matching
        .iter()
        .zip(raws)
        .map(|(g, raw)| FocusScore {
            name: canonical_name(gazetteer, g.key.adm, &g.key.unit_id),
            adm: g.key.adm,
            unit_id: g.key.unit_id.clone(),
            raw,
            score: raw as f64 / total as f64,
            earliest_ordinal: g.earliest_ordinal(),
        })
        .collect()
}

/// Keeps candidates with normalized score strictly above `alpha`, ordered by
/// descending score; equal scores order by earliest mention.
pub fn select_foci(candidates: &[FocusScore], alpha: f64) -> Vec<FocusScore> {
    let mut selected: Vec<FocusScore> = candidates
        .iter()
        .filter(|c| c.score > alpha)
        .cloned()
        .collect();
    selected.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then(a.earliest_ordinal.cmp(&b.earliest_ordinal))
    });
    selected
}

/// One article's focus candidates paired with its gold foci names, the input
/// to the alpha sweep.
#[derive(Debug, Clone)]
pub struct ScoredArticle {
    pub candidates: Vec<FocusScore>,
    pub gold: BTreeSet<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaSweep {
    /// (alpha, mean per-article foci F1) for each swept value, in sweep order.
    pub points: Vec<(f64, f64)>,
    pub best_alpha: f64,
    pub best_f1: f64,
}

/// Sweeps alpha over 0.05..=0.50 in steps of 0.05 and picks the value
/// maximizing mean per-article foci F1 on the dev articles; ties go to the
/// smaller alpha.
pub fn tune_alpha(articles: &[ScoredArticle]) -> Option<AlphaSweep> {
    if articles.is_empty() {
        return None;
    }
    let gold: Vec<BTreeSet<String>> = articles.iter().map(|a| a.gold.clone()).collect();
    let mut points = Vec::with_capacity(10);
    let mut best: Option<(f64, f64)> = None;
    for i in 1..=10 {
        let alpha = i as f64 * 0.05;
        let pred: Vec<BTreeSet<String>> = articles
            .iter()
            .map(|a| {
                select_foci(&a.candidates, alpha)
                    .into_iter()
                    .map(|c| c.name)
                    .collect()
            })
            .collect();
        let f1 = foci_report(&gold, &pred).expect("aligned non-empty inputs").f1;
        points.push((alpha, f1));
        if best.map_or(true, |(_, bf)| f1 > bf) {
            best = Some((alpha, f1));
        }
    }
    let (best_alpha, best_f1) = best.unwrap();
    Some(AlphaSweep {
        points,
        best_alpha,
        best_f1,
    })
}

/// Full per-article output of the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeoFocusResult {
    pub article_id: String,
    pub level: GeoFocusLevel,
    /// Softmax scores in canonical level order
    /// (local, state, national, international, none).
    pub level_scores: Vec<f64>,
    pub foci: Vec<FocusScore>,
    pub warnings: Vec<String>,
}

impl GeoFocusResult {
    pub fn focus_names(&self) -> BTreeSet<String> {
        self.foci.iter().map(|f| f.name.clone()).collect()
    }
}

/// The assembled end-to-end pipeline: recognition, disambiguation with
/// caching, polygon verification, IGL assignment, feature extraction, level
/// classification, and focus selection.
pub struct Pipeline<'a> {
    pub gazetteer: &'a Gazetteer,
    pub recognizer: &'a dyn Recognizer,
    pub backend: &'a dyn LlmBackend,
    pub cache: &'a DisambiguationCache,
    pub model: &'a LevelModel,
    pub split_config: SplitConfig,
    pub retry_policy: RetryPolicy,
    pub alpha: f64,
    pub max_in_flight: usize,
}

impl<'a> Pipeline<'a> {
    /// Runs the full chain for one article. Recognition failures,
    /// disambiguation failures, and unverified toponyms become warnings; the
    /// surviving mentions drive the level and foci.
    pub fn analyze_article(&self, article: &Article) -> GeoFocusResult {
        let (mentions, groups, mut warnings) = self.resolve_article(article);
        drop(mentions);
        let vector = extract_features(&groups);
        let (level, level_scores) = self.model.predict(&vector);
        let foci = if level == GeoFocusLevel::None {
            Vec::new()
        } else {
            let candidates = focus_scores(&groups, level, self.gazetteer);
            if candidates.is_empty() && level != GeoFocusLevel::None {
                warnings.push(format!(
                    "article {}: level {level} but no matching toponym groups",
                    article.id
                ));
            }
            select_foci(&candidates, self.alpha)
        };
        GeoFocusResult {
            article_id: article.id.clone(),
            level,
            level_scores,
            foci,
            warnings,
        }
    }

    /// Recognition through IGL assignment; shared by `analyze_article` and by
    /// callers that need the intermediate groups (featurize, benchmarks).
    pub fn resolve_article(
        &self,
        article: &Article,
    ) -> (Vec<ResolvedMention>, Vec<ToponymGroup>, Vec<String>) {
        let (mentions, mut warnings) = recognize(article, self.recognizer, &self.split_config);
        let publisher_state_name = state_display_name(&article.publisher_state)
            .map(str::to_string)
            .unwrap_or_else(|| article.publisher_state.clone());
        let requests: Vec<DisambiguationRequest> = mentions
            .iter()
            .map(|m| DisambiguationRequest {
                mention: m.clone(),
                publisher_city: article.publisher_city.clone(),
                publisher_state: publisher_state_name.clone(),
            })
            .collect();
        let outcomes = batch_disambiguate(
            &requests,
            self.backend,
            self.gazetteer,
            self.cache,
            self.max_in_flight,
            &self.retry_policy,
        );
        let mut resolved = Vec::new();
        for (mention, outcome) in mentions.iter().zip(outcomes) {
            match outcome {
                Ok(toponym) if toponym.verified => {
                    match assign_igl(&toponym, &article.publisher_state) {
                        Ok(igl) => resolved.push(ResolvedMention {
                            mention: mention.clone(),
                            toponym,
                            igl,
                        }),
                        Err(e) => warnings.push(format!(
                            "article {}: '{}': {e}",
                            article.id, mention.surface
                        )),
                    }
                }
                Ok(_) => warnings.push(format!(
                    "article {}: '{}' failed polygon verification",
                    article.id, mention.surface
                )),
                Err(e) => warnings.push(format!(
                    "article {}: '{}': {e}",
                    article.id, mention.surface
                )),
            }
        }
        let groups = group_toponyms(resolved.clone());
        (resolved, groups, warnings)
    }
}
