#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rfexplain::forest::{FeatureKind, FeatureMeta, Forest, TreeNode};
use rfexplain::path::{Condition, Path, Relation};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Random feature space mixing numeric, one-hot and ordinal kinds.
pub fn random_features<R: Rng>(rng: &mut R, n: usize) -> Vec<FeatureMeta> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let i = out.len();
        match rng.random_range(0..4) {
            0 if n - i >= 2 => {
                let k = rng.random_range(2..=(n - i).min(4));
                out.extend((0..k).map(|c| FeatureMeta::onehot(format!("g{i}"), format!("c{c}"))));
            }
            1 => out.push(FeatureMeta {
                name: format!("o{i}"),
                kind: FeatureKind::Ordinal {
                    categories: vec!["lo".into(), "mid".into(), "hi".into()],
                },
                global_min: -1.0,
                global_max: 1.0,
            }),
            _ => {
                let lo = rng.random_range(-5.0..0.0);
                let hi = lo + rng.random_range(0.5..5.0);
                out.push(FeatureMeta::numeric(format!("x{i}"), lo, hi));
            }
        }
    }
    out
}

pub fn random_tree<R: Rng>(rng: &mut R, features: &[FeatureMeta], depth: usize) -> TreeNode {
    if depth == 0 || rng.random_bool(0.2) {
        let a = rng.random_range(0..20);
        return TreeNode::leaf(a, rng.random_range(u64::from(a == 0)..20));
    }
    let f = rng.random_range(0..features.len());
    let m = &features[f];
    // strictly inside the bounds
    let t = m.global_min + (m.global_max - m.global_min) * rng.random_range(0.02..0.98);
    TreeNode::split(
        f,
        t,
        random_tree(rng, features, depth - 1),
        random_tree(rng, features, depth - 1),
    )
}

pub fn random_forest<R: Rng>(rng: &mut R, n_trees: usize, n_features: usize, depth: usize) -> Forest {
    let features = random_features(rng, n_features);
    let trees = (0..n_trees).map(|_| random_tree(rng, &features, depth)).collect();
    let raw: Vec<f64> = (0..features.len()).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut importances: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // make the sum exactly 1 up to rounding
    let rest: f64 = importances[1..].iter().sum();
    importances[0] = 1.0 - rest;
    Forest::new(trees, features, importances).expect("valid random forest")
}

pub fn random_point<R: Rng>(rng: &mut R, features: &[FeatureMeta]) -> Vec<f64> {
    features
        .iter()
        .map(|f| rng.random_range(f.global_min..=f.global_max))
        .collect()
}

/// Path over unit-range features whose conditions all hold at `anchor`.
pub fn random_path_through<R: Rng>(rng: &mut R, anchor: &[f64], len: usize) -> Path {
    let conditions = (0..len)
        .map(|_| {
            let feature = rng.random_range(0..anchor.len());
            let threshold = (rng.random_range(1..20) as f64) / 20.0;
            Condition {
                feature,
                relation: if anchor[feature] <= threshold { Relation::Le } else { Relation::Gt },
                threshold,
            }
        })
        .collect();
    Path {
        tree_index: 0,
        conditions,
        voted_class: 1,
    }
}

/// Arbitrary (possibly inconsistent across paths) path over unit-range features.
pub fn random_path<R: Rng>(rng: &mut R, n_features: usize, max_len: usize) -> Path {
    let anchor: Vec<f64> = (0..n_features).map(|_| rng.random_range(0.0..1.0)).collect();
    let len = rng.random_range(0..=max_len);
    random_path_through(rng, &anchor, len)
}

pub fn unit_features(n: usize) -> Vec<FeatureMeta> {
    (0..n)
        .map(|i| FeatureMeta::numeric(format!("f{}", i + 1), 0.0, 1.0))
        .collect()
}
