//! Toponym grouping and the 15-dimensional spatial-semantic feature vector.
//!
//! Feature classes: per-IGL toponym counts in titles, per-IGL GPE mention
//! counts, per-IGL leading-toponym counts, and per-IGL distinct-group counts
//! (state excluded, since that IGL can only name the publisher's state).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disambiguation::DisambiguatedToponym;
use crate::gazetteer::AdminLevel;
use crate::igl::Igl;
use crate::recognition::{EntityClass, Section, ToponymMention};

/// One verified mention with its disambiguation and IGL.
#[derive(Debug, Clone)]
pub struct ResolvedMention {
    pub mention: ToponymMention,
    pub toponym: DisambiguatedToponym,
    pub igl: Igl,
}

/// Identity key for grouping mentions into one toponym: the claimed ADM plus
/// the resolved unit id at that level.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupKey {
    pub adm: AdminLevel,
    pub unit_id: String,
}

/// All mentions of one resolved toponym within an article.
#[derive(Debug, Clone)]
pub struct ToponymGroup {
    pub key: GroupKey,
    pub members: Vec<ResolvedMention>,
    /// Majority IGL of members; ties go to the earliest mention's IGL.
    pub igl: Igl,
}

impl ToponymGroup {
    pub fn earliest_ordinal(&self) -> usize {
        self.members
            .iter()
            .map(|m| m.mention.mention_ordinal)
            .min()
            .expect("groups are non-empty")
    }

    pub fn title_count(&self) -> usize {
        self.members
            .iter()
            .filter(|m| m.mention.section == Section::Title)
            .count()
    }

    pub fn mention_count(&self) -> usize {
        self.members.len()
    }

    pub fn leading_count(&self) -> usize {
        self.members.iter().filter(|m| m.mention.is_leading).count()
    }

    pub fn gpe_count(&self) -> usize {
        self.members
            .iter()
            .filter(|m| m.mention.entity_class == EntityClass::GPE)
            .count()
    }
}

/// Groups verified mentions by (adm, resolved unit id). Output order follows
/// each group's earliest mention ordinal.
pub fn group_toponyms(items: Vec<ResolvedMention>) -> Vec<ToponymGroup> {
    let mut order: Vec<GroupKey> = Vec::new();
    let mut map: HashMap<GroupKey, Vec<ResolvedMention>> = HashMap::new();
    for item in items {
        let unit_id = item
            .toponym
            .resolution
            .at(item.toponym.adm)
            .unwrap_or_default()
            .to_string();
        let key = GroupKey {
            adm: item.toponym.adm,
            unit_id,
        };
        if !map.contains_key(&key) {
            order.push(key.clone());
        }
        map.entry(key).or_default().push(item);
    }
    order
        .into_iter()
        .map(|key| {
            let mut members = map.remove(&key).unwrap();
            members.sort_by_key(|m| m.mention.mention_ordinal);
            let igl = majority_igl(&members);
            ToponymGroup { key, members, igl }
        })
        .collect()
}

fn majority_igl(members: &[ResolvedMention]) -> Igl {
    let mut counts = [0usize; 4];
    for m in members {
        counts[m.igl.index()] += 1;
    }
    let max = *counts.iter().max().unwrap();
    let tied: Vec<Igl> = Igl::ALL
        .into_iter()
        .filter(|igl| counts[igl.index()] == max)
        .collect();
    if tied.len() == 1 {
        return tied[0];
    }
    // Tie: the IGL of the earliest mention among the tied IGLs.
    members
        .iter()
        .min_by_key(|m| m.mention.mention_ordinal)
        .map(|m| {
            if tied.contains(&m.igl) {
                m.igl
            } else {
                members
                    .iter()
                    .filter(|x| tied.contains(&x.igl))
                    .min_by_key(|x| x.mention.mention_ordinal)
                    .unwrap()
                    .igl
            }
        })
        .unwrap()
}

/// The 15 features, in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub title_topo_cnt_local: u32,
    pub title_topo_cnt_state: u32,
    pub title_topo_cnt_national: u32,
    pub title_topo_cnt_intl: u32,
    pub local_igl_cnt: u32,
    pub state_igl_cnt: u32,
    pub national_igl_cnt: u32,
    pub intl_igl_cnt: u32,
    pub leading_topo_local_igl_cnt: u32,
    pub leading_topo_state_igl_cnt: u32,
    pub leading_topo_national_igl_cnt: u32,
    pub leading_topo_intl_igl_cnt: u32,
    pub uniq_local_igl: u32,
    pub uniq_national_igl: u32,
    pub uniq_intl_igl: u32,
}

pub const FEATURE_NAMES: [&str; 15] = [
    "title_topo_cnt_local",
    "title_topo_cnt_state",
    "title_topo_cnt_national",
    "title_topo_cnt_intl",
    "local_igl_cnt",
    "state_igl_cnt",
    "national_igl_cnt",
    "intl_igl_cnt",
    "leading_topo_local_igl_cnt",
    "leading_topo_state_igl_cnt",
    "leading_topo_national_igl_cnt",
    "leading_topo_intl_igl_cnt",
    "uniq_local_igl",
    "uniq_national_igl",
    "uniq_intl_igl",
];

impl FeatureVector {
    pub fn as_array(&self) -> [u32; 15] {
        [
            self.title_topo_cnt_local,
            self.title_topo_cnt_state,
            self.title_topo_cnt_national,
            self.title_topo_cnt_intl,
            self.local_igl_cnt,
            self.state_igl_cnt,
            self.national_igl_cnt,
            self.intl_igl_cnt,
            self.leading_topo_local_igl_cnt,
            self.leading_topo_state_igl_cnt,
            self.leading_topo_national_igl_cnt,
            self.leading_topo_intl_igl_cnt,
            self.uniq_local_igl,
            self.uniq_national_igl,
            self.uniq_intl_igl,
        ]
    }

    pub fn from_array(values: [u32; 15]) -> FeatureVector {
        FeatureVector {
            title_topo_cnt_local: values[0],
            title_topo_cnt_state: values[1],
            title_topo_cnt_national: values[2],
            title_topo_cnt_intl: values[3],
            local_igl_cnt: values[4],
            state_igl_cnt: values[5],
            national_igl_cnt: values[6],
            intl_igl_cnt: values[7],
            leading_topo_local_igl_cnt: values[8],
            leading_topo_state_igl_cnt: values[9],
            leading_topo_national_igl_cnt: values[10],
            leading_topo_intl_igl_cnt: values[11],
            uniq_local_igl: values[12],
            uniq_national_igl: values[13],
            uniq_intl_igl: values[14],
        }
    }
}

/// Computes the feature vector from verified, IGL-assigned mentions and their
/// groups. Title and leading counts run over all entity classes at mention
/// granularity; the four IGL-distribution counts cover GPE mentions only;
/// the uniq features count distinct groups per IGL (state excluded).
pub fn extract_features(groups: &[ToponymGroup]) -> FeatureVector {
    let mut v = FeatureVector::default();
    for group in groups {
        for m in &group.members {
            if m.mention.section == Section::Title {
                match m.igl {
                    Igl::Local => v.title_topo_cnt_local += 1,
                    Igl::State => v.title_topo_cnt_state += 1,
                    Igl::National => v.title_topo_cnt_national += 1,
                    Igl::International => v.title_topo_cnt_intl += 1,
                }
            }
            if m.mention.entity_class == EntityClass::GPE {
                match m.igl {
                    Igl::Local => v.local_igl_cnt += 1,
                    Igl::State => v.state_igl_cnt += 1,
                    Igl::National => v.national_igl_cnt += 1,
                    Igl::International => v.intl_igl_cnt += 1,
                }
            }
            if m.mention.is_leading {
                match m.igl {
                    Igl::Local => v.leading_topo_local_igl_cnt += 1,
                    Igl::State => v.leading_topo_state_igl_cnt += 1,
                    Igl::National => v.leading_topo_national_igl_cnt += 1,
                    Igl::International => v.leading_topo_intl_igl_cnt += 1,
                }
            }
        }
        match group.igl {
            Igl::Local => v.uniq_local_igl += 1,
            Igl::National => v.uniq_national_igl += 1,
            Igl::International => v.uniq_intl_igl += 1,
            Igl::State => {}
        }
    }
    v
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("correlation check needs at least 3 vectors, got {0}")]
    TooFewVectors(usize),
}

/// Pearson correlation report over the 15 feature columns.
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    /// Symmetric 15x15 matrix, diagonal 1.0.
    pub matrix: [[f64; 15]; 15],
    pub max_off_diagonal: f64,
    /// Pairs whose absolute correlation exceeds the threshold.
    pub over_threshold: Vec<(usize, usize, f64)>,
    /// Indices of constant columns (correlation defined as 0 against them).
    pub constant_features: Vec<usize>,
    pub threshold: f64,
}

/// Feature-correlation threshold from the published model card.
pub const CORRELATION_THRESHOLD: f64 = 0.85;

pub fn feature_correlation_check(
    vectors: &[FeatureVector],
    threshold: f64,
) -> Result<CorrelationReport, FeatureError> {
    let n = vectors.len();
    if n < 3 {
        return Err(FeatureError::TooFewVectors(n));
    }
    let columns: Vec<Vec<f64>> = (0..15)
        .map(|j| vectors.iter().map(|v| v.as_array()[j] as f64).collect())
        .collect();
    let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let sds: Vec<f64> = columns
        .iter()
        .zip(&means)
        .map(|(c, m)| (c.iter().map(|x| (x - m).powi(2)).sum::<f64>()).sqrt())
        .collect();
    let constant_features: Vec<usize> = sds
        .iter()
        .enumerate()
        .filter(|(_, sd)| **sd < 1e-12)
        .map(|(i, _)| i)
        .collect();
    let mut matrix = [[0.0f64; 15]; 15];
    let mut max_off = 0.0f64;
    let mut over = Vec::new();
    for i in 0..15 {
        matrix[i][i] = 1.0;
        for j in i + 1..15 {
            let r = if sds[i] < 1e-12 || sds[j] < 1e-12 {
                0.0
            } else {
                let cov: f64 = columns[i]
                    .iter()
                    .zip(&columns[j])
                    .map(|(x, y)| (x - means[i]) * (y - means[j]))
                    .sum();
                cov / (sds[i] * sds[j])
            };
            matrix[i][j] = r;
            matrix[j][i] = r;
            if r.abs() > max_off {
                max_off = r.abs();
            }
            if r.abs() > threshold {
                over.push((i, j, r));
            }
        }
    }
    Ok(CorrelationReport {
        matrix,
        max_off_diagonal: max_off,
        over_threshold: over,
        constant_features,
        threshold,
    })
}
