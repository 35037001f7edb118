//! Library results checked against slow, independent re-computations.

mod common;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rfexplain::association::{mine_rules, reduce_by_rules, PathItemset, RuleReduction};
use rfexplain::cluster::{build_similarity_matrix, pam, path_similarity, MAX_SWAPS};
use rfexplain::forest::TreeNode;
use rfexplain::path::{extract_paths, intersect_ranges, Path, Relation};

use common::*;

/// Walks the tree along the recorded conditions and checks each one matches
/// the node and the instance.
fn replay(tree: &TreeNode, path: &Path, values: &[f64]) -> Option<[u64; 2]> {
    let mut node = tree;
    let mut conds = path.conditions.iter();
    loop {
        match node {
            TreeNode::Leaf { class_counts } => return conds.next().is_none().then_some(*class_counts),
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                let c = conds.next()?;
                if c.feature != *feature || c.threshold != *threshold {
                    return None;
                }
                let left_side = values[*feature] <= *threshold;
                if (c.relation == Relation::Le) != left_side {
                    return None;
                }
                node = if left_side { left } else { right };
            }
        }
    }
}

#[test]
fn paths_replay_through_their_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let (t, f) = (rng.random_range(1..30), rng.random_range(1..7));
        let forest = random_forest(&mut rng, t, f, 6);
        for _ in 0..20 {
            let x = random_point(&mut rng, &forest.features);
            let ones = forest
                .trees
                .iter()
                .filter(|t| {
                    let mut n = *t;
                    while let TreeNode::Internal { feature, threshold, left, right } = n {
                        n = if x[*feature] <= *threshold { left } else { right };
                    }
                    match n {
                        TreeNode::Leaf { class_counts } => class_counts[1] >= class_counts[0],
                        _ => unreachable!(),
                    }
                })
                .count();
            let n = forest.n_estimators();
            let class = u8::from(2 * ones >= n);
            assert_eq!(forest.predict(&x).unwrap().class, class);

            let paths = extract_paths(&forest, &x);
            let expected = if class == 1 { ones } else { n - ones };
            assert_eq!(paths.len(), expected);
            for p in &paths {
                let counts = replay(&forest.trees[p.tree_index], p, &x).expect("path replays");
                assert_eq!(u8::from(counts[1] >= counts[0]), class);
                assert!(p.is_satisfied_by(&x));
            }
        }
    }
}

#[test]
fn intersection_matches_grid_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n_features = 4;
    let features = unit_features(n_features);
    for _ in 0..300 {
        let anchor: Vec<f64> = (0..n_features).map(|_| rng.random_range(0.0..1.0)).collect();
        let paths: Vec<Path> = (0..rng.random_range(1..6))
            .map(|_| {
                let len = rng.random_range(0..6);
                random_path_through(&mut rng, &anchor, len)
            })
            .collect();
        let ranges = intersect_ranges(&paths, &features).unwrap();
        let used: BTreeSet<usize> = paths.iter().flat_map(|p| p.features()).collect();
        assert_eq!(ranges.iter().map(|r| r.feature).collect::<BTreeSet<_>>(), used);
        for r in &ranges {
            for step in 1..=400 {
                let x = step as f64 / 400.0;
                let all_hold = paths.iter().all(|p| {
                    p.conditions
                        .iter()
                        .filter(|c| c.feature == r.feature)
                        .all(|c| c.holds(x))
                });
                assert_eq!(r.contains(x), all_hold, "feature {} at {x}", r.feature);
            }
        }
    }
}

fn brute_force_rules(sets: &[BTreeSet<usize>], universe: usize, min_support: f64) -> Vec<(Vec<usize>, Vec<usize>, f64, f64)> {
    let n = sets.len() as f64;
    let count = |mask: u32| {
        sets.iter()
            .filter(|s| (0..universe).all(|i| mask & (1 << i) == 0 || s.contains(&i)))
            .count()
    };
    let items = |mask: u32| (0..universe).filter(|i| mask & (1 << i) != 0).collect::<Vec<_>>();
    let mut out = Vec::new();
    for mask in 1u32..(1 << universe) {
        let size = mask.count_ones();
        if !(2..=3).contains(&size) || (count(mask) as f64) < min_support * n - 1e-9 || count(mask) == 0 {
            continue;
        }
        // every proper non-empty subset as antecedent
        let mut sub = (mask - 1) & mask;
        while sub > 0 {
            let c_all = count(mask) as f64;
            let c_ante = count(sub) as f64;
            out.push((items(sub), items(mask & !sub), c_ante / n, c_all / c_ante));
            sub = (sub - 1) & mask;
        }
    }
    out.sort_by(|a, b| {
        a.3.total_cmp(&b.3)
            .then(b.2.total_cmp(&a.2))
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });
    out
}

#[test]
fn apriori_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..300 {
        let universe = rng.random_range(1..7);
        let sets: Vec<BTreeSet<usize>> = (0..rng.random_range(1..10))
            .map(|_| (0..universe).filter(|_| rng.random_bool(0.5)).collect())
            .collect();
        let min_support = [0.0, 0.1, 0.25, 0.5][rng.random_range(0..4)];
        let itemsets: Vec<PathItemset> = sets
            .iter()
            .enumerate()
            .map(|(i, s)| PathItemset {
                path_index: i,
                items: s.clone(),
            })
            .collect();
        let got: Vec<_> = mine_rules(&itemsets, min_support, 3)
            .unwrap()
            .into_iter()
            .map(|r| (r.antecedent, r.consequent, r.support_antecedent, r.confidence))
            .collect();
        let want = brute_force_rules(&sets, universe, min_support);
        assert_eq!(got.len(), want.len(), "{sets:?} at {min_support}");
        for (g, w) in got.iter().zip(&want) {
            assert_eq!((&g.0, &g.1), (&w.0, &w.1));
            assert!((g.2 - w.2).abs() < 1e-12 && (g.3 - w.3).abs() < 1e-12);
        }
    }
}

#[test]
fn rule_reduction_matches_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let paths: Vec<Path> = (0..rng.random_range(1..12)).map(|_| random_path(&mut rng, 5, 4)).collect();
        let itemsets: Vec<PathItemset> = paths
            .iter()
            .enumerate()
            .map(|(i, p)| PathItemset {
                path_index: i,
                items: p.features(),
            })
            .collect();
        let rules = mine_rules(&itemsets, 0.1, 3).unwrap();
        let quorum = paths.len() / 2 + 1;

        // replay: accumulate antecedents in rule order, stop at the first quorum
        let mut selected = BTreeSet::new();
        let mut expected = None;
        let covered = |fs: &BTreeSet<usize>| paths.iter().filter(|p| p.features().is_subset(fs)).count();
        if covered(&selected) >= quorum {
            expected = Some(selected.clone());
        } else {
            for r in &rules {
                selected.extend(r.antecedent.iter().copied());
                if covered(&selected) >= quorum {
                    expected = Some(selected.clone());
                    break;
                }
            }
        }
        match (reduce_by_rules(&paths, &rules, quorum), expected) {
            (RuleReduction::Reduced { paths: kept, feature_set, .. }, Some(fs)) => {
                assert_eq!(feature_set, fs);
                assert_eq!(kept.len(), covered(&fs));
                assert!(kept.len() >= quorum);
            }
            (RuleReduction::NoReduction, None) => {}
            (got, want) => panic!("mismatch: {got:?} vs {want:?}"),
        }
    }
}

/// Algorithm re-stated directly from the conditions: per feature, per-path
/// bounds default to the global range.
fn similarity_oracle(a: &Path, b: &Path, n_features: usize) -> f64 {
    let bounds = |p: &Path, f: usize| -> Option<(f64, f64)> {
        let cs: Vec<_> = p.conditions.iter().filter(|c| c.feature == f).collect();
        if cs.is_empty() {
            return None;
        }
        let lo = cs
            .iter()
            .filter(|c| c.relation == Relation::Gt)
            .fold(0.0f64, |m, c| m.max(c.threshold));
        let hi = cs
            .iter()
            .filter(|c| c.relation == Relation::Le)
            .fold(1.0f64, |m, c| m.min(c.threshold));
        Some((lo, hi))
    };
    let mut total = 0.0;
    for f in 0..n_features {
        total += match (bounds(a, f), bounds(b, f)) {
            (None, None) => 1.0,
            (Some((l1, u1)), Some((l2, u2))) => {
                let inter = u1.min(u2) - l1.max(l2);
                let union = u1.max(u2) - l1.min(l2);
                if inter > 0.0 && union != 0.0 {
                    inter / union
                } else {
                    0.0
                }
            }
            _ => 0.0,
        };
    }
    total / n_features as f64
}

#[test]
fn similarity_matches_restatement() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let features = unit_features(5);
    for _ in 0..2000 {
        let a = random_path(&mut rng, 5, 6);
        let b = random_path(&mut rng, 5, 6);
        let got = path_similarity(&a, &b, &features);
        assert!((got - similarity_oracle(&a, &b, 5)).abs() < 1e-12);
    }
}

fn cost(matrix: &rfexplain::cluster::SimilarityMatrix, medoids: &[usize]) -> f64 {
    (0..matrix.len())
        .map(|i| medoids.iter().map(|&m| matrix.distance(i, m)).fold(f64::INFINITY, f64::min))
        .sum()
}

#[test]
fn pam_is_swap_optimal_and_assigns_nearest() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let features = unit_features(4);
    for _ in 0..150 {
        let n = rng.random_range(1..10);
        let paths: Vec<Path> = (0..n).map(|_| random_path(&mut rng, 4, 5)).collect();
        let matrix = build_similarity_matrix(&paths, &features);
        let k = rng.random_range(1..=n);
        let c = pam(&matrix, k, rng.random(), MAX_SWAPS);
        assert_eq!(c.medoids.len(), k);
        assert_eq!(c.medoids.iter().collect::<BTreeSet<_>>().len(), k);

        for i in 0..n {
            let m = c.assignment[i];
            assert!(c.medoids.contains(&m));
            if c.medoids.contains(&i) {
                assert_eq!(m, i);
            } else {
                let best = c
                    .medoids
                    .iter()
                    .copied()
                    .min_by(|&a, &b| matrix.distance(i, a).total_cmp(&matrix.distance(i, b)).then(a.cmp(&b)))
                    .unwrap();
                assert_eq!(m, best, "path {i}");
            }
        }

        // no single medoid/non-medoid exchange lowers the cost
        if k < n {
            let base = cost(&matrix, &c.medoids);
            for slot in 0..k {
                for cand in (0..n).filter(|x| !c.medoids.contains(x)) {
                    let mut trial = c.medoids.clone();
                    trial[slot] = cand;
                    assert!(cost(&matrix, &trial) >= base - 1e-9);
                }
            }
        }
    }
}

#[test]
fn pam_finds_separated_groups() {
    // three tight groups on one feature; the exhaustive optimum has one medoid per group
    let features = unit_features(1);
    let mk = |lo: f64, hi: f64| Path {
        tree_index: 0,
        conditions: vec![
            rfexplain::path::Condition { feature: 0, relation: Relation::Gt, threshold: lo },
            rfexplain::path::Condition { feature: 0, relation: Relation::Le, threshold: hi },
        ],
        voted_class: 1,
    };
    let paths = vec![
        mk(0.0, 0.2),
        mk(0.01, 0.2),
        mk(0.4, 0.6),
        mk(0.41, 0.6),
        mk(0.42, 0.59),
        mk(0.8, 1.0),
        mk(0.81, 0.99),
    ];
    let matrix = build_similarity_matrix(&paths, &features);
    let n = paths.len();
    let mut best = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                best = best.min(cost(&matrix, &[a, b, c]));
            }
        }
    }
    for seed in 0..10 {
        let c = pam(&matrix, 3, seed, MAX_SWAPS);
        assert!((cost(&matrix, &c.medoids) - best).abs() < 1e-12);
        let sizes: Vec<usize> = c.clusters_by_size().iter().map(|(_, m)| m.len()).collect();
        assert_eq!(sizes, vec![3, 2, 2]);
    }
}
