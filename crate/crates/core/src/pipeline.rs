//! Path-set reduction: association rules, then clustering, then random
//! trimming, never going below the quorum.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::association::{
    mine_rules, path_itemsets, reduce_by_rules, RuleReduction, DEFAULT_MAX_ITEMSET_SIZE,
    DEFAULT_MIN_SUPPORT,
};
use crate::cluster::{build_similarity_matrix, default_medoids, kmedoids_reduce_to, random_trim_to};
use crate::error::{Error, Result};
use crate::forest::{forest_predict, Forest, Prediction};
use crate::path::{extract_paths, intersect_ranges, path_set_features, FeatureRange, Path};
use crate::{mix_seed, quorum};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub use_association_rules: bool,
    pub use_clustering: bool,
    pub use_random: bool,
    pub min_support: f64,
    pub max_itemset_size: usize,
    /// Number of medoids; `ceil(sqrt(paths))` when unset.
    pub n_medoids_override: Option<usize>,
    /// Keep at least this fraction of all trees (never less than the quorum).
    pub min_path_fraction: Option<f64>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            use_association_rules: true,
            use_clustering: true,
            use_random: true,
            min_support: DEFAULT_MIN_SUPPORT,
            max_itemset_size: DEFAULT_MAX_ITEMSET_SIZE,
            n_medoids_override: None,
            min_path_fraction: None,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    /// All reductions off.
    pub fn identity() -> Self {
        PipelineConfig {
            use_association_rules: false,
            use_clustering: false,
            use_random: false,
            ..Default::default()
        }
    }

    pub fn with_toggles(mut self, ar: bool, clustering: bool, random: bool) -> Self {
        self.use_association_rules = ar;
        self.use_clustering = clustering;
        self.use_random = random;
        self
    }

    /// Number of paths the reductions aim for.
    pub fn target_paths(&self, n_estimators: usize) -> usize {
        let q = quorum(n_estimators);
        match self.min_path_fraction {
            Some(f) => q.max((f * n_estimators as f64).ceil() as usize),
            None => q,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_support) {
            return Err(Error::InvalidParameter(format!(
                "min_support must be in [0, 1], got {}",
                self.min_support
            )));
        }
        if self.n_medoids_override == Some(0) {
            return Err(Error::InvalidParameter("medoids must be >= 1".into()));
        }
        if let Some(f) = self.min_path_fraction {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidParameter(format!(
                    "min_path_fraction must be in [0, 1], got {f}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    AssociationRules,
    Clustering,
    Random,
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Technique::AssociationRules => "association_rules",
            Technique::Clustering => "clustering",
            Technique::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub original_feature_count: usize,
    pub reduced_feature_count: usize,
    pub original_path_count: usize,
    pub reduced_path_count: usize,
    pub feature_reduction: f64,
    pub path_reduction: f64,
    /// Techniques that removed at least one path.
    pub techniques_fired: Vec<Technique>,
    pub quorum: usize,
    /// Set when fewer trees than the quorum voted the predicted class (an
    /// even split resolved to class 1), so no reduction was attempted.
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub prediction: Prediction,
    /// Surviving paths.
    pub paths: Vec<Path>,
    /// Intersection of the surviving paths' ranges.
    pub ranges: Vec<FeatureRange>,
    pub features: BTreeSet<usize>,
    pub report: ReductionReport,
}

fn ratio_removed(kept: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        (total - kept) as f64 / total as f64
    }
}

/// Runs the enabled reductions for one instance.
pub fn reduce(forest: &Forest, values: &[f64], config: &PipelineConfig) -> Result<Reduction> {
    config.validate()?;
    forest.check_dims(values)?;
    let n = forest.n_estimators();
    let prediction = forest_predict(forest, values);
    let all_paths = extract_paths(forest, values);
    let k = all_paths.len();

    let q = quorum(n);
    let degraded = k < q;
    let target = config.target_paths(n).min(k);

    let mut fired = Vec::new();
    let mut paths = all_paths.clone();
    if !degraded {
        if config.use_association_rules {
            let rules = mine_rules(&path_itemsets(&paths), config.min_support, config.max_itemset_size)?;
            if let RuleReduction::Reduced { paths: kept, .. } = reduce_by_rules(&paths, &rules, target) {
                if kept.len() < paths.len() {
                    fired.push(Technique::AssociationRules);
                    paths = kept;
                }
            }
        }
        if config.use_clustering && paths.len() > target {
            let matrix = build_similarity_matrix(&paths, &forest.features);
            let medoids = config
                .n_medoids_override
                .unwrap_or_else(|| default_medoids(paths.len()));
            let kept = kmedoids_reduce_to(&matrix, &paths, target, medoids, mix_seed(config.seed, 1));
            if kept.len() < paths.len() {
                fired.push(Technique::Clustering);
                paths = kept;
            }
        }
        if config.use_random && paths.len() > target {
            paths = random_trim_to(&paths, target, mix_seed(config.seed, 2))?;
            fired.push(Technique::Random);
        }
    }

    let ranges = intersect_ranges(&paths, &forest.features)?;
    let full_features = path_set_features(&all_paths);
    let features = path_set_features(&paths);
    let report = ReductionReport {
        original_feature_count: full_features.len(),
        reduced_feature_count: features.len(),
        original_path_count: k,
        reduced_path_count: paths.len(),
        feature_reduction: ratio_removed(features.len(), full_features.len()),
        path_reduction: ratio_removed(paths.len(), k),
        techniques_fired: fired,
        quorum: if degraded { k } else { q },
        degraded,
    };
    Ok(Reduction {
        prediction,
        paths,
        ranges,
        features,
        report,
    })
}
