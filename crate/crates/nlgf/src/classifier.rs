//! Multiclass gradient-boosted decision trees over the 15-feature vectors.
//!
//! Softmax objective, one regression tree per class per boosting round,
//! exact greedy splits (features are small non-negative integers, so no
//! histogram binning), row subsampling per round under a seeded RNG, and L2
//! leaf regularization. Training is deterministic for a fixed
//! (data, hyperparams, seed) triple, and models serialize canonically so the
//! same run always produces byte-identical files.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::GeoFocusLevel;
use crate::evaluation::level_report;
use crate::features::{FeatureVector, FEATURE_NAMES};

const MODEL_FORMAT_VERSION: u32 = 1;
const LEAF_L2_LAMBDA: f64 = 1.0;
const MIN_SPLIT_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub max_depth: usize,
    pub n_estimators: usize,
    pub subsample: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 0.2,
            max_depth: 6,
            n_estimators: 25,
            subsample: 0.9,
        }
    }
}

impl Hyperparams {
    fn validate(&self) -> Result<(), TrainError> {
        if self.learning_rate <= 0.0
            || self.max_depth == 0
            || self.n_estimators == 0
            || self.subsample <= 0.0
            || self.subsample > 1.0
        {
            return Err(TrainError::InvalidHyperparams);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid hyperparameters")]
    InvalidHyperparams,
    #[error("training needs at least {0} examples, got {1}")]
    TooFewExamples(usize, usize),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("non-finite feature value in example {0}")]
    NonFiniteFeature(usize),
    #[error("class '{0}' has fewer examples ({1}) than folds ({2})")]
    ClassTooSmall(GeoFocusLevel, usize, usize),
    #[error("grid is empty")]
    EmptyGrid,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error("model format version {0} is not supported (expected {1})")]
    VersionMismatch(u32, u32),
    #[error("feature manifest mismatch: model expects {0} features, got {1}")]
    ManifestMismatch(usize, usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Node {
    /// Split feature index; unused for leaves.
    feature: usize,
    threshold: f64,
    left: usize,
    right: usize,
    leaf_value: f64,
    is_leaf: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            let node = &self.nodes[idx];
            if node.is_leaf {
                return node.leaf_value;
            }
            idx = if x[node.feature] < node.threshold {
                node.left
            } else {
                node.right
            };
        }
    }
}

/// A trained geo-focus level model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelModel {
    version: u32,
    pub feature_names: Vec<String>,
    pub classes: Vec<GeoFocusLevel>,
    pub hyperparams: Hyperparams,
    pub seed: u64,
    /// trees[round][class]
    trees: Vec<Vec<Tree>>,
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn leaf_value(grad_sum: f64, hess_sum: f64) -> f64 {
    -grad_sum / (hess_sum + LEAF_L2_LAMBDA)
}

fn score(grad_sum: f64, hess_sum: f64) -> f64 {
    grad_sum * grad_sum / (hess_sum + LEAF_L2_LAMBDA)
}

/// Exact greedy best split over all features; thresholds are midpoints of
/// adjacent distinct values. Deterministic: the first feature (lowest index)
/// achieving the strictly best gain wins.
fn best_split(
    rows: &[usize],
    data: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
) -> Option<SplitCandidate> {
    let total_grad: f64 = rows.iter().map(|&r| grad[r]).sum();
    let total_hess: f64 = rows.iter().map(|&r| hess[r]).sum();
    let parent_score = score(total_grad, total_hess);
    let n_features = data[rows[0]].len();
    let mut best: Option<SplitCandidate> = None;
    let mut sorted = rows.to_vec();
    for feature in 0..n_features {
        sorted.sort_by(|&a, &b| {
            data[a][feature]
                .partial_cmp(&data[b][feature])
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut left_grad = 0.0;
        let mut left_hess = 0.0;
        for i in 0..sorted.len() - 1 {
            let row = sorted[i];
            left_grad += grad[row];
            left_hess += hess[row];
            let here = data[row][feature];
            let next = data[sorted[i + 1]][feature];
            if here == next {
                continue;
            }
            let threshold = (here + next) / 2.0;
            let right_grad = total_grad - left_grad;
            let right_hess = total_hess - left_hess;
            let gain =
                0.5 * (score(left_grad, left_hess) + score(right_grad, right_hess) - parent_score);
            if gain > MIN_SPLIT_GAIN && best.as_ref().map_or(true, |b| gain > b.gain) {
                best = Some(SplitCandidate {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

fn build_tree(
    rows: &[usize],
    data: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    max_depth: usize,
) -> Tree {
    let mut nodes = Vec::new();
    build_node(rows, data, grad, hess, max_depth, &mut nodes);
    Tree { nodes }
}

fn build_node(
    rows: &[usize],
    data: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    depth_left: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let idx = nodes.len();
    let grad_sum: f64 = rows.iter().map(|&r| grad[r]).sum();
    let hess_sum: f64 = rows.iter().map(|&r| hess[r]).sum();
    nodes.push(Node {
        feature: 0,
        threshold: 0.0,
        left: 0,
        right: 0,
        leaf_value: leaf_value(grad_sum, hess_sum),
        is_leaf: true,
    });
    if depth_left == 0 || rows.len() < 2 {
        return idx;
    }
    let split = match best_split(rows, data, grad, hess) {
        Some(s) => s,
        None => return idx,
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| data[r][split.feature] < split.threshold);
    let left = build_node(&left_rows, data, grad, hess, depth_left - 1, nodes);
    let right = build_node(&right_rows, data, grad, hess, depth_left - 1, nodes);
    nodes[idx] = Node {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
        leaf_value: 0.0,
        is_leaf: false,
    };
    idx
}

fn softmax_row(margins: &[f64]) -> Vec<f64> {
    let max = margins.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = margins.iter().map(|m| (m - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Trains the boosted model. Requires at least two classes and ten examples;
/// deterministic under the seed.
pub fn train(
    data: &[(FeatureVector, GeoFocusLevel)],
    hp: &Hyperparams,
    seed: u64,
) -> Result<LevelModel, TrainError> {
    hp.validate()?;
    if data.len() < 10 {
        return Err(TrainError::TooFewExamples(10, data.len()));
    }
    let classes: Vec<GeoFocusLevel> = {
        let present: BTreeSet<GeoFocusLevel> = data.iter().map(|(_, l)| *l).collect();
        if present.len() < 2 {
            return Err(TrainError::SingleClass);
        }
        // The model always scores all five classes; absent ones just never
        // receive positive gradient mass.
        GeoFocusLevel::ALL.to_vec()
    };
    let n = data.len();
    let k = classes.len();
    let matrix: Vec<Vec<f64>> = data
        .iter()
        .map(|(v, _)| v.as_array().iter().map(|&x| x as f64).collect())
        .collect();
    for (i, row) in matrix.iter().enumerate() {
        if row.iter().any(|x| !x.is_finite()) {
            return Err(TrainError::NonFiniteFeature(i));
        }
    }
    let labels: Vec<usize> = data.iter().map(|(_, l)| l.index()).collect();

    let mut margins = vec![vec![0.0f64; k]; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trees: Vec<Vec<Tree>> = Vec::with_capacity(hp.n_estimators);
    let all_rows: Vec<usize> = (0..n).collect();
    let sample_size = ((n as f64) * hp.subsample).round().max(1.0) as usize;

    for _ in 0..hp.n_estimators {
        let rows: Vec<usize> = if sample_size >= n {
            all_rows.clone()
        } else {
            let mut shuffled = all_rows.clone();
            shuffled.shuffle(&mut rng);
            let mut picked = shuffled[..sample_size].to_vec();
            picked.sort_unstable();
            picked
        };
        let probs: Vec<Vec<f64>> = margins.iter().map(|m| softmax_row(m)).collect();
        let mut round_trees = Vec::with_capacity(k);
        for class in 0..k {
            let grad: Vec<f64> = (0..n)
                .map(|i| {
                    let y = if labels[i] == class { 1.0 } else { 0.0 };
                    probs[i][class] - y
                })
                .collect();
            let hess: Vec<f64> = (0..n)
                .map(|i| (probs[i][class] * (1.0 - probs[i][class])).max(1e-16))
                .collect();
            let tree = build_tree(&rows, &matrix, &grad, &hess, hp.max_depth);
            for i in 0..n {
                margins[i][class] += hp.learning_rate * tree.predict(&matrix[i]);
            }
            round_trees.push(tree);
        }
        trees.push(round_trees);
    }
    Ok(LevelModel {
        version: MODEL_FORMAT_VERSION,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        classes,
        hyperparams: *hp,
        seed,
        trees,
    })
}

impl LevelModel {
    /// Softmax-normalized class scores plus the argmax level; ties break by
    /// the canonical level order.
    pub fn predict(&self, v: &FeatureVector) -> (GeoFocusLevel, Vec<f64>) {
        let x: Vec<f64> = v.as_array().iter().map(|&a| a as f64).collect();
        let mut margins = vec![0.0f64; self.classes.len()];
        for round in &self.trees {
            for (class, tree) in round.iter().enumerate() {
                margins[class] += self.hyperparams.learning_rate * tree.predict(&x);
            }
        }
        let scores = softmax_row(&margins);
        let mut best = 0usize;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        (self.classes[best], scores)
    }

    pub fn predict_level(&self, v: &FeatureVector) -> GeoFocusLevel {
        self.predict(v).0
    }

    /// Canonical serialization; identical models produce identical bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec(self).expect("model serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<LevelModel, ModelError> {
        let bytes = std::fs::read(path)?;
        let model: LevelModel =
            serde_json::from_slice(&bytes).map_err(|e| ModelError::Corrupt(e.to_string()))?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(ModelError::VersionMismatch(model.version, MODEL_FORMAT_VERSION));
        }
        if model.feature_names.len() != FEATURE_NAMES.len()
            || model.feature_names.iter().zip(FEATURE_NAMES).any(|(a, b)| a != b)
        {
            return Err(ModelError::ManifestMismatch(
                model.feature_names.len(),
                FEATURE_NAMES.len(),
            ));
        }
        Ok(model)
    }
}

/// Stratified fold assignment: per-class shuffled round-robin, preserving
/// class proportions within one example per fold.
pub fn stratified_folds(
    labels: &[GeoFocusLevel],
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>, TrainError> {
    let mut by_class: std::collections::BTreeMap<GeoFocusLevel, Vec<usize>> = Default::default();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    for (&class, indices) in &by_class {
        if indices.len() < folds {
            return Err(TrainError::ClassTooSmall(class, indices.len(), folds));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; labels.len()];
    for indices in by_class.values() {
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut rng);
        for (pos, &row) in shuffled.iter().enumerate() {
            assignment[row] = pos % folds;
        }
    }
    Ok(assignment)
}

/// One grid candidate's cross-validation outcome.
#[derive(Debug, Clone, Serialize)]
pub struct CvResult {
    pub hyperparams: Hyperparams,
    pub fold_f1: Vec<f64>,
    pub mean_macro_f1: f64,
}

/// Stratified k-fold grid search targeting macro-averaged F1. Ties go to the
/// first candidate in grid order.
pub fn grid_search_cv(
    data: &[(FeatureVector, GeoFocusLevel)],
    grid: &[Hyperparams],
    folds: usize,
    seed: u64,
) -> Result<(Hyperparams, Vec<CvResult>), TrainError> {
    if grid.is_empty() {
        return Err(TrainError::EmptyGrid);
    }
    let labels: Vec<GeoFocusLevel> = data.iter().map(|(_, l)| *l).collect();
    let assignment = stratified_folds(&labels, folds, seed)?;
    let mut results = Vec::with_capacity(grid.len());
    let mut best: Option<usize> = None;
    for (ci, hp) in grid.iter().enumerate() {
        let mut fold_f1 = Vec::with_capacity(folds);
        for fold in 0..folds {
            let train_set: Vec<(FeatureVector, GeoFocusLevel)> = data
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a != fold)
                .map(|(d, _)| *d)
                .collect();
            let test_set: Vec<(FeatureVector, GeoFocusLevel)> = data
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == fold)
                .map(|(d, _)| *d)
                .collect();
            let model = train(&train_set, hp, seed)?;
            let gold: Vec<GeoFocusLevel> = test_set.iter().map(|(_, l)| *l).collect();
            let pred: Vec<GeoFocusLevel> =
                test_set.iter().map(|(v, _)| model.predict_level(v)).collect();
            // Shared metric path with the evaluation module.
            let report = level_report(&gold, &pred).expect("non-empty fold");
            fold_f1.push(report.macro_f1);
        }
        let mean = fold_f1.iter().sum::<f64>() / folds as f64;
        results.push(CvResult {
            hyperparams: *hp,
            fold_f1,
            mean_macro_f1: mean,
        });
        if best.map_or(true, |b| mean > results[b].mean_macro_f1) {
            best = Some(ci);
        }
    }
    Ok((results[best.unwrap()].hyperparams, results))
}

/// The default search grid; the published defaults sit inside it.
pub fn default_grid() -> Vec<Hyperparams> {
    let mut grid = Vec::new();
    for &learning_rate in &[0.05, 0.1, 0.2] {
        for &max_depth in &[3usize, 6, 9] {
            for &n_estimators in &[25usize, 50, 100] {
                for &subsample in &[0.8, 0.9, 1.0] {
                    grid.push(Hyperparams {
                        learning_rate,
                        max_depth,
                        n_estimators,
                        subsample,
                    });
                }
            }
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;

    fn vector(values: [u32; 15]) -> FeatureVector {
        FeatureVector::from_array(values)
    }

    /// Local vs international separable on a single feature.
    fn separable_data() -> Vec<(FeatureVector, GeoFocusLevel)> {
        let mut data = Vec::new();
        for i in 0..10 {
            let mut a = [0u32; 15];
            a[4] = 3 + (i % 3); // local_igl_cnt
            data.push((vector(a), GeoFocusLevel::Local));
            let mut b = [0u32; 15];
            b[7] = 3 + (i % 3); // intl_igl_cnt
            data.push((vector(b), GeoFocusLevel::International));
        }
        data
    }

    fn xor_data() -> Vec<(FeatureVector, GeoFocusLevel)> {
        let mut data = Vec::new();
        for rep in 0..10 {
            for (x, y) in [(0u32, 0u32), (0, 1), (1, 0), (1, 1)] {
                let mut a = [0u32; 15];
                a[4] = x;
                a[7] = y;
                a[0] = rep % 2; // irrelevant noise column
                let label = if (x ^ y) == 1 {
                    GeoFocusLevel::Local
                } else {
                    GeoFocusLevel::International
                };
                data.push((vector(a), label));
            }
        }
        data
    }

    fn accuracy(model: &LevelModel, data: &[(FeatureVector, GeoFocusLevel)]) -> f64 {
        let hits = data
            .iter()
            .filter(|(v, l)| model.predict_level(v) == *l)
            .count();
        hits as f64 / data.len() as f64
    }

    #[test]
    fn separable_data_fits() {
        let data = separable_data();
        let model = train(&data, &Hyperparams::default(), 3).unwrap();
        assert!(accuracy(&model, &data) >= 0.99);
    }

    #[test]
    fn xor_needs_depth_and_fits() {
        let data = xor_data();
        let model = train(&data, &Hyperparams::default(), 3).unwrap();
        assert!(accuracy(&model, &data) >= 0.95);
    }

    #[test]
    fn deterministic_models_byte_identical() {
        let data = xor_data();
        let hp = Hyperparams::default();
        let m1 = train(&data, &hp, 42).unwrap();
        let m2 = train(&data, &hp, 42).unwrap();
        assert_eq!(m1.to_bytes(), m2.to_bytes());
    }

    #[test]
    fn default_hyperparams_match_published() {
        let hp = Hyperparams::default();
        assert_eq!(hp.learning_rate, 0.2);
        assert_eq!(hp.max_depth, 6);
        assert_eq!(hp.n_estimators, 25);
        assert_eq!(hp.subsample, 0.9);
    }

    #[test]
    fn rejects_single_class_and_tiny_data() {
        let data: Vec<_> = (0..12)
            .map(|i| {
                let mut a = [0u32; 15];
                a[4] = i;
                (vector(a), GeoFocusLevel::Local)
            })
            .collect();
        assert!(matches!(
            train(&data, &Hyperparams::default(), 0),
            Err(TrainError::SingleClass)
        ));
        let small = separable_data().into_iter().take(5).collect::<Vec<_>>();
        assert!(matches!(
            train(&small, &Hyperparams::default(), 0),
            Err(TrainError::TooFewExamples(10, 5))
        ));
    }

    #[test]
    fn scores_softmax_normalized() {
        let data = separable_data();
        let model = train(&data, &Hyperparams::default(), 3).unwrap();
        for (v, _) in &data {
            let (_, scores) = model.predict(v);
            let sum: f64 = scores.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert_eq!(scores.len(), 5);
        }
    }

    #[test]
    fn monotone_shift_leaves_predictions_unchanged() {
        let data = xor_data();
        let model = train(&data, &Hyperparams::default(), 9).unwrap();
        let shifted: Vec<(FeatureVector, GeoFocusLevel)> = data
            .iter()
            .map(|(v, l)| {
                let mut a = v.as_array();
                a[4] += 10;
                (vector(a), *l)
            })
            .collect();
        let shifted_model = train(&shifted, &Hyperparams::default(), 9).unwrap();
        for ((v, _), (sv, _)) in data.iter().zip(&shifted) {
            assert_eq!(model.predict_level(v), shifted_model.predict_level(sv));
        }
    }

    #[test]
    fn save_load_roundtrip_and_canonical_bytes() {
        let data = xor_data();
        let model = train(&data, &Hyperparams::default(), 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("m1.json");
        let p2 = dir.path().join("m2.json");
        model.save(&p1).unwrap();
        model.save(&p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        let loaded = LevelModel::load(&p1).unwrap();
        for (v, _) in &data {
            assert_eq!(model.predict(v), loaded.predict(v));
        }
    }

    #[test]
    fn corrupted_file_is_load_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        std::fs::write(&p, b"{not json").unwrap();
        assert!(matches!(LevelModel::load(&p), Err(ModelError::Corrupt(_))));
    }

    #[test]
    fn version_mismatch_rejected() {
        let data = xor_data();
        let model = train(&data, &Hyperparams::default(), 5).unwrap();
        let mut value: serde_json::Value =
            serde_json::from_slice(&model.to_bytes()).unwrap();
        value["version"] = serde_json::json!(99);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v99.json");
        std::fs::write(&p, serde_json::to_vec(&value).unwrap()).unwrap();
        assert!(matches!(
            LevelModel::load(&p),
            Err(ModelError::VersionMismatch(99, _))
        ));
    }

    #[test]
    fn stratified_folds_preserve_counts() {
        // Balanced 100-row fixture: 20 per class, 5 folds -> 4 per class per fold.
        let labels: Vec<GeoFocusLevel> = GeoFocusLevel::ALL
            .iter()
            .flat_map(|&l| std::iter::repeat(l).take(20))
            .collect();
        let assignment = stratified_folds(&labels, 5, 13).unwrap();
        for fold in 0..5 {
            let in_fold: Vec<GeoFocusLevel> = labels
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == fold)
                .map(|(&l, _)| l)
                .collect();
            assert_eq!(in_fold.len(), 20);
            for level in GeoFocusLevel::ALL {
                assert_eq!(in_fold.iter().filter(|&&l| l == level).count(), 4);
            }
        }
    }

    #[test]
    fn folds_reject_small_class() {
        let mut labels = vec![GeoFocusLevel::Local; 20];
        labels.extend(vec![GeoFocusLevel::State; 3]);
        assert!(matches!(
            stratified_folds(&labels, 5, 0),
            Err(TrainError::ClassTooSmall(GeoFocusLevel::State, 3, 5))
        ));
    }

    #[test]
    fn grid_of_one_returns_it() {
        let data = separable_data();
        let hp = Hyperparams::default();
        let (best, results) = grid_search_cv(&data, &[hp], 5, 1).unwrap();
        assert_eq!(best, hp);
        assert_eq!(results.len(), 1);
    }

    #[test]
    fn capable_candidate_beats_degenerate_on_xor() {
        let data = xor_data();
        let degenerate = Hyperparams {
            learning_rate: 0.2,
            max_depth: 1,
            n_estimators: 1,
            subsample: 1.0,
        };
        let capable = Hyperparams::default();
        let (best, results) = grid_search_cv(&data, &[degenerate, capable], 5, 1).unwrap();
        assert_eq!(best, capable);
        assert!(results[1].mean_macro_f1 > results[0].mean_macro_f1);
    }

    #[test]
    fn all_zero_vector_predicts_none_when_trained_so() {
        let mut data = separable_data();
        for _ in 0..10 {
            data.push((vector([0u32; 15]), GeoFocusLevel::None));
        }
        let model = train(&data, &Hyperparams::default(), 3).unwrap();
        assert_eq!(model.predict_level(&vector([0u32; 15])), GeoFocusLevel::None);
    }
}
