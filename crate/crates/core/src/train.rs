//! Bagged CART trainer (Gini impurity) for binary labels.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forest::{FeatureMeta, Forest, TreeNode};
use crate::mix_seed;

/// Number of candidate features drawn at each split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxFeatures {
    Sqrt,
    Log2,
    /// Fraction of the features, `0 < f <= 1`.
    Fraction(f64),
    All,
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let n = n_features as f64;
        let k = match self {
            MaxFeatures::Sqrt => n.sqrt() as usize,
            MaxFeatures::Log2 => n.log2() as usize,
            MaxFeatures::Fraction(f) => (f * n) as usize,
            MaxFeatures::All => n_features,
        };
        k.clamp(1, n_features.max(1))
    }
}

impl FromStr for MaxFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sqrt" => Ok(MaxFeatures::Sqrt),
            "log2" => Ok(MaxFeatures::Log2),
            "all" | "none" => Ok(MaxFeatures::All),
            other => {
                let f: f64 = other.parse().map_err(|_| {
                    Error::InvalidParameter(format!("max_features: unrecognised value {s:?}"))
                })?;
                if f > 0.0 && f <= 1.0 {
                    Ok(MaxFeatures::Fraction(f))
                } else {
                    Err(Error::InvalidParameter(format!(
                        "max_features fraction must be in (0, 1], got {f}"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxFeatures::Sqrt => write!(f, "sqrt"),
            MaxFeatures::Log2 => write!(f, "log2"),
            MaxFeatures::Fraction(x) => write!(f, "{x}"),
            MaxFeatures::All => write!(f, "all"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    pub n_estimators: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            n_estimators: 100,
            max_depth: None,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl TrainParams {
    fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(Error::InvalidParameter("n_estimators must be >= 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidParameter("min_samples_leaf must be >= 1".into()));
        }
        if let MaxFeatures::Fraction(f) = self.max_features {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "max_features fraction must be in (0, 1], got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// Column-major training matrix.
struct Columns<'a> {
    cols: Vec<Vec<f64>>,
    labels: &'a [u8],
}

struct TreeBuilder<'a> {
    data: &'a Columns<'a>,
    weights: Vec<f64>,
    params: &'a TrainParams,
    mtry: usize,
    rng: ChaCha8Rng,
    importance: Vec<f64>,
}

struct Split {
    feature: usize,
    threshold: f64,
    /// Weighted child impurity sum, lower is better.
    score: f64,
    left_impurity: f64,
    right_impurity: f64,
    left_weight: f64,
    right_weight: f64,
}

fn gini(w0: f64, w1: f64) -> f64 {
    let total = w0 + w1;
    if total <= 0.0 {
        return 0.0;
    }
    let p0 = w0 / total;
    let p1 = w1 / total;
    1.0 - p0 * p0 - p1 * p1
}

impl TreeBuilder<'_> {
    fn class_weights(&self, samples: &[usize]) -> [f64; 2] {
        let mut w = [0.0; 2];
        for &s in samples {
            w[self.data.labels[s] as usize] += self.weights[s];
        }
        w
    }

    fn build(&mut self, samples: Vec<usize>, depth: usize) -> TreeNode {
        let w = self.class_weights(&samples);
        let leaf = TreeNode::leaf(w[0].round() as u64, w[1].round() as u64);
        let at_max_depth = self.params.max_depth.is_some_and(|d| depth >= d);
        if w[0] == 0.0 || w[1] == 0.0 || at_max_depth {
            return leaf;
        }
        if samples.len() < 2 * self.params.min_samples_leaf {
            return leaf;
        }
        let node_impurity = gini(w[0], w[1]);
        let Some(split) = self.best_split(&samples, w[0] + w[1], node_impurity) else {
            return leaf;
        };
        let node_weight = w[0] + w[1];
        let decrease = node_weight * node_impurity
            - split.left_weight * split.left_impurity
            - split.right_weight * split.right_impurity;
        self.importance[split.feature] += decrease;

        let col = &self.data.cols[split.feature];
        let (left, right): (Vec<usize>, Vec<usize>) =
            samples.into_iter().partition(|&s| col[s] <= split.threshold);
        let left = self.build(left, depth + 1);
        let right = self.build(right, depth + 1);
        TreeNode::split(split.feature, split.threshold, left, right)
    }

    fn best_split(&mut self, samples: &[usize], node_weight: f64, impurity: f64) -> Option<Split> {
        let n_features = self.data.cols.len();
        let mut order: Vec<usize> = (0..n_features).collect();
        order.shuffle(&mut self.rng);

        let mut best: Option<Split> = None;
        let mut visited = 0;
        let mut sorted: Vec<usize> = samples.to_vec();
        for &feature in &order {
            if visited >= self.mtry {
                break;
            }
            let col = &self.data.cols[feature];
            sorted.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            if col[sorted[0]] == col[sorted[sorted.len() - 1]] {
                continue;
            }
            visited += 1;
            if let Some(s) = self.scan_feature(feature, &sorted) {
                if best.as_ref().is_none_or(|b| s.score < b.score) {
                    best = Some(s);
                }
            }
        }
        // only accept splits that actually reduce impurity
        best.filter(|b| node_weight * impurity - b.score > 1e-12 * node_weight.max(1.0))
    }

    fn scan_feature(&self, feature: usize, sorted: &[usize]) -> Option<Split> {
        let col = &self.data.cols[feature];
        let labels = self.data.labels;
        let min_leaf = self.params.min_samples_leaf;
        let n = sorted.len();
        let total = {
            let mut t = [0.0; 2];
            for &s in sorted {
                t[labels[s] as usize] += self.weights[s];
            }
            t
        };
        let mut left = [0.0; 2];
        let mut best: Option<Split> = None;
        for i in 0..n - 1 {
            let s = sorted[i];
            left[labels[s] as usize] += self.weights[s];
            let (a, b) = (col[s], col[sorted[i + 1]]);
            if a == b {
                continue;
            }
            let n_left = i + 1;
            if n_left < min_leaf || n - n_left < min_leaf {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let wl = left[0] + left[1];
            let wr = right[0] + right[1];
            let gl = gini(left[0], left[1]);
            let gr = gini(right[0], right[1]);
            let score = wl * gl + wr * gr;
            if best.as_ref().is_none_or(|b| score < b.score) {
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Split {
                    feature,
                    threshold,
                    score,
                    left_impurity: gl,
                    right_impurity: gr,
                    left_weight: wl,
                    right_weight: wr,
                });
            }
        }
        best
    }
}

/// Trains a random forest on row-major `rows` with 0/1 `labels`.
///
/// Each tree gets its own RNG derived from `(seed, tree index)`, so the
/// result is fully determined by the inputs.
pub fn train_forest(
    features: Vec<FeatureMeta>,
    rows: &[Vec<f64>],
    labels: &[u8],
    params: &TrainParams,
) -> Result<Forest> {
    params.validate()?;
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if rows.len() != labels.len() {
        return Err(Error::InvalidParameter(format!(
            "{} rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::data(None, format!("label {bad} is not 0 or 1")));
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(Error::DegenerateLabels(labels[0]));
    }
    let n_features = features.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n_features {
            return Err(Error::DimensionMismatch {
                expected: n_features,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::data(Some(i + 1), "non-finite value"));
        }
    }

    let cols: Vec<Vec<f64>> = (0..n_features)
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    let data = Columns { cols, labels };
    let mtry = params.max_features.resolve(n_features);
    let n = rows.len();

    let mut trees = Vec::with_capacity(params.n_estimators);
    let mut importances = vec![0.0; n_features];
    for t in 0..params.n_estimators {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(params.seed, t as u64));
        let mut weights = vec![0.0; n];
        if params.bootstrap {
            for _ in 0..n {
                weights[rng.random_range(0..n)] += 1.0;
            }
        } else {
            weights.fill(1.0);
        }
        let samples: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
        let mut builder = TreeBuilder {
            data: &data,
            weights,
            params,
            mtry,
            rng,
            importance: vec![0.0; n_features],
        };
        let root = builder.build(samples, 0);
        let tree_total: f64 = builder.importance.iter().sum();
        if tree_total > 0.0 {
            for (acc, v) in importances.iter_mut().zip(&builder.importance) {
                *acc += v / tree_total;
            }
        }
        trees.push(root);
    }

    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        importances.iter_mut().for_each(|v| *v /= total);
    } else {
        importances.fill(1.0 / n_features as f64);
    }
    Forest::new(trees, features, importances)
}

/// Binary F1 score with class 1 as the positive class.
pub fn f1_score(truth: &[u8], predicted: &[u8]) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fneg = 0usize;
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t, p) {
            (1, 1) => tp += 1,
            (0, 1) => fp += 1,
            (1, 0) => fneg += 1,
            _ => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    2.0 * tp as f64 / (2 * tp + fp + fneg) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::forest_predict;

    fn feats(n: usize) -> Vec<FeatureMeta> {
        (0..n)
            .map(|i| FeatureMeta::numeric(format!("f{i}"), -1.0, 1.0))
            .collect()
    }

    fn xor_like(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            let c: f64 = rng.random_range(-1.0..1.0);
            labels.push(u8::from(a + 0.5 * b > 0.1));
            rows.push(vec![a, b, c]);
        }
        (rows, labels)
    }

    #[test]
    fn forced_stump() {
        let rows = vec![vec![0.2], vec![0.8]];
        let params = TrainParams {
            n_estimators: 1,
            max_depth: Some(1),
            max_features: MaxFeatures::All,
            bootstrap: false,
            ..Default::default()
        };
        let forest = train_forest(feats(1), &rows, &[0, 1], &params).unwrap();
        match &forest.trees[0] {
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                assert_eq!(*feature, 0);
                assert!((threshold - 0.5).abs() < 1e-12);
                assert_eq!(**left, TreeNode::leaf(1, 0));
                assert_eq!(**right, TreeNode::leaf(0, 1));
            }
            leaf => panic!("expected a split, got {leaf:?}"),
        }
        assert_eq!(forest.importances, vec![1.0]);
    }

    #[test]
    fn errors() {
        let p = TrainParams::default();
        assert!(matches!(
            train_forest(feats(1), &[], &[], &p),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            train_forest(feats(1), &[vec![0.1], vec![0.2]], &[1, 1], &p),
            Err(Error::DegenerateLabels(1))
        ));
        let zero = TrainParams {
            n_estimators: 0,
            ..Default::default()
        };
        assert!(train_forest(feats(1), &[vec![0.1], vec![0.2]], &[0, 1], &zero).is_err());
    }

    #[test]
    fn deterministic_and_accurate() {
        let (rows, labels) = xor_like(300, 1);
        let params = TrainParams {
            n_estimators: 20,
            max_depth: Some(6),
            seed: 42,
            ..Default::default()
        };
        let a = train_forest(feats(3), &rows, &labels, &params).unwrap();
        let b = train_forest(feats(3), &rows, &labels, &params).unwrap();
        assert_eq!(a, b);

        let correct = rows
            .iter()
            .zip(&labels)
            .filter(|(r, &l)| forest_predict(&a, r).class == l)
            .count();
        assert!(correct as f64 / rows.len() as f64 > 0.95);
        // the noise column should matter least
        assert!(a.importances[2] < a.importances[0]);
        assert!((a.importances.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn depth_and_leaf_limits() {
        let (rows, labels) = xor_like(200, 2);
        let params = TrainParams {
            n_estimators: 5,
            max_depth: Some(3),
            min_samples_leaf: 10,
            max_features: MaxFeatures::All,
            ..Default::default()
        };
        let forest = train_forest(feats(3), &rows, &labels, &params).unwrap();
        for t in &forest.trees {
            assert!(t.depth() <= 3);
        }
    }

    #[test]
    fn max_features_resolution() {
        assert_eq!(MaxFeatures::Sqrt.resolve(80), 8);
        assert_eq!(MaxFeatures::Log2.resolve(13), 3);
        assert_eq!(MaxFeatures::Fraction(0.75).resolve(4), 3);
        assert_eq!(MaxFeatures::All.resolve(4), 4);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!("0.75".parse::<MaxFeatures>().unwrap(), MaxFeatures::Fraction(0.75));
        assert!("1.5".parse::<MaxFeatures>().is_err());
        assert_eq!("None".parse::<MaxFeatures>().unwrap(), MaxFeatures::All);
    }

    #[test]
    fn f1() {
        assert_eq!(f1_score(&[1, 1, 0, 0], &[1, 1, 0, 0]), 1.0);
        assert!((f1_score(&[1, 1, 0, 0], &[1, 0, 1, 0]) - 0.5).abs() < 1e-12);
    }
}
