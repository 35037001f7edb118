//! Decision paths and the feature ranges they impose.
//!
//! Ranges are half-open: `lower < value <= upper`, which is exactly the set
//! of values a `<=`-goes-left tree keeps on the same branch.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::forest::{forest_predict, leaf_class, FeatureMeta, Forest, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `value <= threshold`
    Le,
    /// `value > threshold`
    Gt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub feature: usize,
    pub relation: Relation,
    pub threshold: f64,
}

impl Condition {
    pub fn holds(&self, value: f64) -> bool {
        match self.relation {
            Relation::Le => value <= self.threshold,
            Relation::Gt => value > self.threshold,
        }
    }
}

/// Root-to-leaf conjunction one tree applies to an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub tree_index: usize,
    pub conditions: Vec<Condition>,
    pub voted_class: u8,
}

impl Path {
    /// Features tested anywhere on the path.
    pub fn features(&self) -> BTreeSet<usize> {
        self.conditions.iter().map(|c| c.feature).collect()
    }

    pub fn is_satisfied_by(&self, values: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.holds(values[c.feature]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRange {
    pub feature: usize,
    /// Exclusive.
    pub lower: f64,
    /// Inclusive.
    pub upper: f64,
}

impl FeatureRange {
    pub fn contains(&self, value: f64) -> bool {
        self.lower < value && value <= self.upper
    }
}

/// Traverses one tree, recording every condition on the way to the leaf.
pub fn decision_path(tree: &TreeNode, tree_index: usize, values: &[f64]) -> Path {
    let mut conditions = Vec::new();
    let mut node = tree;
    loop {
        match node {
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                let goes_left = values[*feature] <= *threshold;
                conditions.push(Condition {
                    feature: *feature,
                    relation: if goes_left { Relation::Le } else { Relation::Gt },
                    threshold: *threshold,
                });
                node = if goes_left { left } else { right };
            }
            TreeNode::Leaf { class_counts } => {
                return Path {
                    tree_index,
                    conditions,
                    voted_class: leaf_class(*class_counts),
                }
            }
        }
    }
}

/// Paths of the trees that vote for the forest's predicted class, in tree order.
pub fn extract_paths(forest: &Forest, values: &[f64]) -> Vec<Path> {
    let class = forest_predict(forest, values).class;
    forest
        .trees
        .iter()
        .enumerate()
        .map(|(i, t)| decision_path(t, i, values))
        .filter(|p| p.voted_class == class)
        .collect()
}

/// Per-feature `(lower, upper]` bounds of one path. Sides without a condition
/// take the feature's global bound. Features not on the path are absent.
pub fn path_feature_bounds(
    path: &Path,
    features: &[FeatureMeta],
) -> Result<BTreeMap<usize, (f64, f64)>> {
    let mut bounds: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for c in &path.conditions {
        let meta = &features[c.feature];
        let entry = bounds
            .entry(c.feature)
            .or_insert((meta.global_min, meta.global_max));
        match c.relation {
            Relation::Gt => entry.0 = entry.0.max(c.threshold),
            Relation::Le => entry.1 = entry.1.min(c.threshold),
        }
    }
    for (&feature, &(lower, upper)) in &bounds {
        if lower >= upper {
            return Err(Error::InconsistentPath {
                feature,
                lower,
                upper,
            });
        }
    }
    Ok(bounds)
}

/// Intersects the per-path bounds of every feature used by at least one path.
pub fn intersect_ranges(paths: &[Path], features: &[FeatureMeta]) -> Result<Vec<FeatureRange>> {
    let mut acc: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for path in paths {
        for (feature, (lower, upper)) in path_feature_bounds(path, features)? {
            let e = acc.entry(feature).or_insert((lower, upper));
            e.0 = e.0.max(lower);
            e.1 = e.1.min(upper);
        }
    }
    acc.into_iter()
        .map(|(feature, (lower, upper))| {
            if lower >= upper {
                Err(Error::InconsistentPathSet {
                    feature,
                    lower,
                    upper,
                })
            } else {
                Ok(FeatureRange {
                    feature,
                    lower,
                    upper,
                })
            }
        })
        .collect()
}

/// Union of the features used by a set of paths.
pub fn path_set_features(paths: &[Path]) -> BTreeSet<usize> {
    paths.iter().flat_map(|p| p.features()).collect()
}
