//! Decision-tree and forest data model with majority-vote prediction.
//!
//! Trees split with `value <= threshold` going left and `value > threshold`
//! going right. A leaf stores the class counts of the training samples that
//! reached it; a tree votes for the class with more samples, class 1 on ties.

use crate::error::{Error, Result};

/// How a model feature relates to the original dataset column.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureKind {
    Numeric,
    /// One 0/1 indicator column of a one-hot encoded categorical feature.
    OneHotMember { group: String, category: String },
    /// Integer codes of an ordinal-encoded categorical feature, in code order.
    Ordinal { categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMeta {
    pub name: String,
    pub kind: FeatureKind,
    /// Lower bound of the (scaled) feature axis.
    pub global_min: f64,
    /// Upper bound of the (scaled) feature axis.
    pub global_max: f64,
}

impl FeatureMeta {
    pub fn numeric(name: impl Into<String>, global_min: f64, global_max: f64) -> Self {
        FeatureMeta {
            name: name.into(),
            kind: FeatureKind::Numeric,
            global_min,
            global_max,
        }
    }

    pub fn onehot(group: impl Into<String>, category: impl Into<String>) -> Self {
        let group = group.into();
        let category = category.into();
        FeatureMeta {
            name: format!("{group}_{category}"),
            kind: FeatureKind::OneHotMember { group, category },
            global_min: 0.0,
            global_max: 1.0,
        }
    }

    pub fn is_onehot(&self) -> bool {
        matches!(self.kind, FeatureKind::OneHotMember { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        class_counts: [u64; 2],
    },
}

impl TreeNode {
    pub fn leaf(class0: u64, class1: u64) -> Self {
        TreeNode::Leaf {
            class_counts: [class0, class1],
        }
    }

    pub fn split(feature: usize, threshold: f64, left: TreeNode, right: TreeNode) -> Self {
        TreeNode::Internal {
            feature,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Follows the instance down to its leaf.
    pub fn leaf_for(&self, values: &[f64]) -> &TreeNode {
        let mut node = self;
        while let TreeNode::Internal {
            feature,
            threshold,
            left,
            right,
        } = node
        {
            node = if values[*feature] <= *threshold {
                left
            } else {
                right
            };
        }
        node
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    fn validate(&self, n_features: usize, at: &str) -> Result<()> {
        match self {
            TreeNode::Leaf { class_counts } => {
                if class_counts[0] == 0 && class_counts[1] == 0 {
                    return Err(Error::InvalidModel(format!("{at}: leaf with no samples")));
                }
            }
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                if *feature >= n_features {
                    return Err(Error::InvalidModel(format!(
                        "{at}: feature index {feature} out of range ({n_features} features)"
                    )));
                }
                if !threshold.is_finite() {
                    return Err(Error::InvalidModel(format!("{at}: non-finite threshold")));
                }
                left.validate(n_features, &format!("{at}.left"))?;
                right.validate(n_features, &format!("{at}.right"))?;
            }
        }
        Ok(())
    }
}

/// Class voted by a leaf: the majority of its counts, class 1 on ties.
pub fn leaf_class(class_counts: [u64; 2]) -> u8 {
    u8::from(class_counts[1] >= class_counts[0])
}

/// The vote one tree casts for an instance.
pub fn tree_vote(tree: &TreeNode, values: &[f64]) -> u8 {
    match tree.leaf_for(values) {
        TreeNode::Leaf { class_counts } => leaf_class(*class_counts),
        TreeNode::Internal { .. } => unreachable!("leaf_for always ends on a leaf"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub class: u8,
    /// Number of trees voting for `class`.
    pub votes_for_class: usize,
}

/// Majority class under `floor(votes_for_1 / N + 1/2)`.
///
/// Evaluated in integers as `2 * votes_for_1 >= N`, which is the same test
/// without rounding error.
pub fn majority(votes_for_one: usize, n_trees: usize) -> u8 {
    u8::from(2 * votes_for_one >= n_trees)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<TreeNode>,
    pub features: Vec<FeatureMeta>,
    /// Normalized mean impurity decrease per feature.
    pub importances: Vec<f64>,
}

impl Forest {
    /// Builds a forest, checking the structural invariants.
    pub fn new(
        trees: Vec<TreeNode>,
        features: Vec<FeatureMeta>,
        importances: Vec<f64>,
    ) -> Result<Self> {
        let forest = Forest {
            trees,
            features,
            importances,
        };
        forest.validate()?;
        Ok(forest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::InvalidModel("forest has no trees".into()));
        }
        if self.features.is_empty() {
            return Err(Error::InvalidModel("forest has no features".into()));
        }
        for f in &self.features {
            if f.global_min.partial_cmp(&f.global_max) != Some(std::cmp::Ordering::Less) {
                return Err(Error::InvalidModel(format!(
                    "feature {}: min {} is not below max {}",
                    f.name, f.global_min, f.global_max
                )));
            }
            if let FeatureKind::Ordinal { categories } = &f.kind {
                let mut seen = std::collections::HashSet::new();
                if !categories.iter().all(|c| seen.insert(c)) {
                    return Err(Error::InvalidModel(format!(
                        "feature {}: duplicate ordinal categories",
                        f.name
                    )));
                }
            }
        }
        if self.importances.len() != self.features.len() {
            return Err(Error::InvalidModel(format!(
                "{} importances for {} features",
                self.importances.len(),
                self.features.len()
            )));
        }
        if self.importances.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(Error::InvalidModel("negative importance".into()));
        }
        let total: f64 = self.importances.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!(
                "importances sum to {total}, expected 1"
            )));
        }
        for (i, tree) in self.trees.iter().enumerate() {
            tree.validate(self.features.len(), &format!("trees[{i}]"))?;
        }
        Ok(())
    }

    pub fn n_estimators(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn check_dims(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.features.len() {
            return Err(Error::DimensionMismatch {
                expected: self.features.len(),
                got: values.len(),
            });
        }
        Ok(())
    }

    pub fn votes_for_one(&self, values: &[f64]) -> usize {
        self.trees
            .iter()
            .filter(|t| tree_vote(t, values) == 1)
            .count()
    }

    pub fn predict(&self, values: &[f64]) -> Result<Prediction> {
        self.check_dims(values)?;
        Ok(forest_predict(self, values))
    }
}

/// Forest majority vote. Callers must have checked dimensionality.
pub fn forest_predict(forest: &Forest, values: &[f64]) -> Prediction {
    let n = forest.n_estimators();
    let ones = forest.votes_for_one(values);
    let class = majority(ones, n);
    let votes_for_class = if class == 1 { ones } else { n - ones };
    Prediction {
        class,
        votes_for_class,
    }
}

/// A value vector validated against a forest's feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub values: Vec<f64>,
    /// Features whose supplied value fell outside the global bounds and was clamped.
    pub clamped: Vec<usize>,
}

impl Instance {
    /// Checks the length and clamps out-of-bounds values into `[global_min, global_max]`.
    pub fn new(features: &[FeatureMeta], mut values: Vec<f64>) -> Result<Self> {
        if values.len() != features.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: values.len(),
            });
        }
        let mut clamped = Vec::new();
        for (i, (v, f)) in values.iter_mut().zip(features).enumerate() {
            if !v.is_finite() {
                return Err(Error::data(None, format!("non-finite value for {}", f.name)));
            }
            if *v < f.global_min || *v > f.global_max {
                *v = v.clamp(f.global_min, f.global_max);
                clamped.push(i);
            }
        }
        Ok(Instance { values, clamped })
    }
}
