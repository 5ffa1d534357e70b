//! Metric machinery: level classification reports, sample-averaged
//! multi-label geo-foci scoring, the coordinate-threshold disambiguation
//! benchmark, and the rule-based foci-to-level aggregation baseline.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::GeoFocusLevel;
use crate::disambiguation::DisambiguatedToponym;
use crate::gazetteer::{haversine_km, GeoPoint};
use crate::igl::{assign_igl, Igl};
use crate::recognition::EntityClass;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold and predicted sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
}

/// Per-class precision/recall/F1. `undefined` marks a zero-denominator ratio
/// reported as 0.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub undefined: bool,
}

/// Level classification report: one-vs-rest metrics per class, unweighted
/// macro averages over classes present in gold or predictions, and the 5x5
/// confusion matrix in canonical level order (rows gold, columns predicted).
#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub per_class: BTreeMap<GeoFocusLevel, ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub confusion: [[usize; 5]; 5],
    pub total: usize,
}

fn safe_div(num: f64, den: f64) -> (f64, bool) {
    if den == 0.0 {
        (0.0, true)
    } else {
        (num / den, false)
    }
}

pub fn level_report(gold: &[GeoFocusLevel], pred: &[GeoFocusLevel]) -> Result<LevelReport, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch(gold.len(), pred.len()));
    }
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut confusion = [[0usize; 5]; 5];
    for (&g, &p) in gold.iter().zip(pred) {
        confusion[g.index()][p.index()] += 1;
    }
    let mut per_class = BTreeMap::new();
    let mut sums = (0.0, 0.0, 0.0);
    let mut counted = 0usize;
    for level in GeoFocusLevel::ALL {
        let k = level.index();
        let tp = confusion[k][k] as f64;
        let gold_count: usize = confusion[k].iter().sum();
        let pred_count: usize = (0..5).map(|r| confusion[r][k]).sum();
        if gold_count == 0 && pred_count == 0 {
            continue; // class absent from both sides: not part of the macro
        }
        let (precision, p_undef) = safe_div(tp, pred_count as f64);
        let (recall, r_undef) = safe_div(tp, gold_count as f64);
        let (f1, f_undef) = safe_div(2.0 * precision * recall, precision + recall);
        per_class.insert(
            level,
            ClassMetrics {
                precision,
                recall,
                f1,
                support: gold_count,
                undefined: p_undef || r_undef || f_undef,
            },
        );
        sums.0 += precision;
        sums.1 += recall;
        sums.2 += f1;
        counted += 1;
    }
    Ok(LevelReport {
        per_class,
        macro_precision: sums.0 / counted as f64,
        macro_recall: sums.1 / counted as f64,
        macro_f1: sums.2 / counted as f64,
        confusion,
        total: gold.len(),
    })
}

/// Sample-averaged multi-label report for geo-foci sets.
#[derive(Debug, Clone, Serialize)]
pub struct FociReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_article: Vec<ArticleFociMetrics>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ArticleFociMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per article: set precision/recall/F1 against the gold foci. An empty
/// prediction matching an empty gold set scores 1.0 (the none-article
/// convention); an empty side against a non-empty one scores 0.
pub fn foci_report(
    gold: &[BTreeSet<String>],
    pred: &[BTreeSet<String>],
) -> Result<FociReport, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch(gold.len(), pred.len()));
    }
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut per_article = Vec::with_capacity(gold.len());
    for (g, p) in gold.iter().zip(pred) {
        let metrics = if g.is_empty() && p.is_empty() {
            ArticleFociMetrics {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
            }
        } else {
            let inter = g.intersection(p).count() as f64;
            let precision = if p.is_empty() { 0.0 } else { inter / p.len() as f64 };
            let recall = if g.is_empty() { 0.0 } else { inter / g.len() as f64 };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ArticleFociMetrics {
                precision,
                recall,
                f1,
            }
        };
        per_article.push(metrics);
    }
    let n = per_article.len() as f64;
    Ok(FociReport {
        precision: per_article.iter().map(|m| m.precision).sum::<f64>() / n,
        recall: per_article.iter().map(|m| m.recall).sum::<f64>() / n,
        f1: per_article.iter().map(|m| m.f1).sum::<f64>() / n,
        per_article,
    })
}

/// One gold toponym for the disambiguation benchmark.
#[derive(Debug, Clone)]
pub struct GoldToponym {
    pub name: String,
    pub class: EntityClass,
    pub point: GeoPoint,
}

/// A tool's prediction for a gold toponym; `None` when the tool returned
/// nothing.
pub type BenchmarkPrediction = Option<GeoPoint>;

/// Field-standard 100-mile tolerance.
pub const DEFAULT_THRESHOLD_KM: f64 = 161.0;

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkReport {
    pub per_class: BTreeMap<String, ClassMetrics>,
    pub threshold_km: f64,
}

/// Coordinate-threshold benchmark: a prediction is correct iff it lies within
/// `threshold_km` (haversine) of the gold coordinate. Precision divides by
/// returned predictions, recall by gold entries, per entity class.
pub fn disambiguation_benchmark(
    gold: &[GoldToponym],
    pred: &[BenchmarkPrediction],
    threshold_km: f64,
) -> Result<BenchmarkReport, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch(gold.len(), pred.len()));
    }
    let mut per_class = BTreeMap::new();
    for class in [EntityClass::GPE, EntityClass::LOC, EntityClass::FAC] {
        let mut total_gold = 0usize;
        let mut returned = 0usize;
        let mut correct = 0usize;
        for (g, p) in gold.iter().zip(pred) {
            if g.class != class {
                continue;
            }
            total_gold += 1;
            if let Some(point) = p {
                returned += 1;
                if haversine_km(&g.point, point) <= threshold_km {
                    correct += 1;
                }
            }
        }
        if total_gold == 0 {
            continue;
        }
        let (precision, p_undef) = safe_div(correct as f64, returned as f64);
        let (recall, r_undef) = safe_div(correct as f64, total_gold as f64);
        let (f1, f_undef) = safe_div(2.0 * precision * recall, precision + recall);
        per_class.insert(
            class.as_str().to_string(),
            ClassMetrics {
                precision,
                recall,
                f1,
                support: total_gold,
                undefined: p_undef || r_undef || f_undef,
            },
        );
    }
    Ok(BenchmarkReport {
        per_class,
        threshold_km,
    })
}

/// Rule-based baseline: maps a set of disambiguated foci to an article level
/// by applying the IGL rules and taking the most frequent IGL; ties break
/// toward the most specific level. No foci means none.
pub fn aggregate_foci_to_level(
    foci: &[DisambiguatedToponym],
    publisher_state: &str,
) -> GeoFocusLevel {
    let mut counts = [0usize; 4];
    for t in foci {
        if let Ok(igl) = assign_igl(t, publisher_state) {
            counts[igl.index()] += 1;
        }
    }
    let max = *counts.iter().max().unwrap();
    if max == 0 {
        return GeoFocusLevel::None;
    }
    // Igl::ALL runs most-specific first, so the first maximum wins ties.
    for igl in Igl::ALL {
        if counts[igl.index()] == max {
            return match igl {
                Igl::Local => GeoFocusLevel::Local,
                Igl::State => GeoFocusLevel::State,
                Igl::National => GeoFocusLevel::National,
                Igl::International => GeoFocusLevel::International,
            };
        }
    }
    unreachable!()
}
