//! Local explanations for random-forest binary classifiers.
//!
//! For one instance, the trees voting with the forest are collected as
//! decision paths, the path set is shrunk to a quorum (association rules,
//! k-medoids clustering, random trimming), and the surviving paths are
//! intersected into per-feature ranges. Any input that keeps the explained
//! features inside those ranges gets the same prediction, because at least
//! a quorum of trees keep following the same paths.
//!
//! ```
//! use rfexplain::{forest::{FeatureMeta, Forest, TreeNode}, pipeline::{reduce, PipelineConfig}};
//!
//! let tree = TreeNode::split(0, 0.5, TreeNode::leaf(0, 3), TreeNode::leaf(3, 0));
//! let forest = Forest::new(vec![tree; 3], vec![FeatureMeta::numeric("x", 0.0, 1.0)], vec![1.0]).unwrap();
//! let out = reduce(&forest, &[0.2], &PipelineConfig::default()).unwrap();
//! assert_eq!(out.paths.len(), 2);
//! assert_eq!(out.ranges[0].upper, 0.5);
//! ```

pub mod association;
pub mod benchmark;
pub mod bundle;
pub mod cluster;
pub mod data;
pub mod error;
pub mod forest;
pub mod format;
pub mod interpret;
pub mod path;
pub mod pipeline;
pub mod scale;
pub mod train;

pub use error::{Error, Result};

/// Smallest number of trees that decides the vote of an `n_estimators` forest.
pub fn quorum(n_estimators: usize) -> usize {
    n_estimators / 2 + 1
}

/// Derives an independent stream seed from a master seed and an index (SplitMix64).
pub fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quorum_values() {
        assert_eq!(quorum(100), 51);
        assert_eq!(quorum(1), 1);
        assert_eq!(quorum(5), 3);
        assert_eq!(quorum(500), 251);
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(mix_seed(1, 0), mix_seed(1, 1));
        assert_ne!(mix_seed(1, 0), mix_seed(2, 0));
        assert_eq!(mix_seed(9, 4), mix_seed(9, 4));
    }
}
