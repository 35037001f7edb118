//! Feature reduction with association rules mined over paths.
//!
//! Each path becomes a transaction holding the features it tests (thresholds
//! dropped). Apriori finds the frequent feature sets, rules are ranked by
//! ascending confidence, and their antecedents are added to a growing feature
//! set until enough paths are fully covered by it.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::path::Path;

pub const DEFAULT_MIN_SUPPORT: f64 = 0.1;
pub const DEFAULT_MAX_ITEMSET_SIZE: usize = 3;

/// The feature set of one path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathItemset {
    pub path_index: usize,
    pub items: BTreeSet<usize>,
}

pub fn path_itemsets(paths: &[Path]) -> Vec<PathItemset> {
    paths
        .iter()
        .enumerate()
        .map(|(path_index, p)| PathItemset {
            path_index,
            items: p.features(),
        })
        .collect()
}

/// `antecedent => consequent`, both sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct AssocRule {
    pub antecedent: Vec<usize>,
    pub consequent: Vec<usize>,
    pub support_antecedent: f64,
    pub confidence: f64,
}

fn rule_order(a: &AssocRule, b: &AssocRule) -> Ordering {
    a.confidence
        .total_cmp(&b.confidence)
        .then_with(|| b.support_antecedent.total_cmp(&a.support_antecedent))
        .then_with(|| a.antecedent.cmp(&b.antecedent))
        .then_with(|| a.consequent.cmp(&b.consequent))
}

/// Visits every `k`-combination of `items` (sorted) in lexicographic order.
fn for_each_combination(items: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(items: &[usize], k: usize, start: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if buf.len() == k {
            f(buf);
            return;
        }
        let need = k - buf.len();
        for i in start..=items.len() - need {
            buf.push(items[i]);
            go(items, k, i + 1, buf, f);
            buf.pop();
        }
    }
    if k <= items.len() {
        go(items, k, 0, &mut Vec::with_capacity(k), f);
    }
}

/// Frequent itemsets with their absolute counts, up to `max_len` items.
pub fn frequent_itemsets(
    itemsets: &[PathItemset],
    min_support: f64,
    max_len: usize,
) -> HashMap<Vec<usize>, usize> {
    let n = itemsets.len() as f64;
    let min_count = min_support * n - 1e-9;
    let transactions: Vec<Vec<usize>> = itemsets
        .iter()
        .map(|t| t.items.iter().copied().collect())
        .collect();

    let mut frequent: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut level: HashSet<Vec<usize>> = HashSet::new();
    for k in 1..=max_len {
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for t in &transactions {
            for_each_combination(t, k, &mut |combo| {
                // apriori pruning: every (k-1)-subset must already be frequent
                let candidate = k == 1
                    || (0..k).all(|skip| {
                        let sub: Vec<usize> = combo
                            .iter()
                            .enumerate()
                            .filter(|&(i, _)| i != skip)
                            .map(|(_, &v)| v)
                            .collect();
                        level.contains(&sub)
                    });
                if candidate {
                    *counts.entry(combo.to_vec()).or_insert(0) += 1;
                }
            });
        }
        level = counts
            .into_iter()
            .filter(|&(_, c)| c as f64 >= min_count && c > 0)
            .map(|(set, c)| {
                frequent.insert(set.clone(), c);
                set
            })
            .collect();
        if level.is_empty() {
            break;
        }
    }
    frequent
}

/// Mines every rule `X => Y` from the frequent itemsets (non-empty `X`, `Y`),
/// sorted by ascending confidence, then descending antecedent support, then
/// lexicographically.
pub fn mine_rules(
    itemsets: &[PathItemset],
    min_support: f64,
    max_itemset_size: usize,
) -> Result<Vec<AssocRule>> {
    if itemsets.is_empty() {
        return Err(Error::InvalidParameter("no itemsets to mine".into()));
    }
    if !(0.0..=1.0).contains(&min_support) {
        return Err(Error::InvalidParameter(format!(
            "min_support must be in [0, 1], got {min_support}"
        )));
    }
    let n = itemsets.len() as f64;
    let frequent = frequent_itemsets(itemsets, min_support, max_itemset_size.max(1));

    let mut rules = Vec::new();
    for (set, &count) in &frequent {
        if set.len() < 2 {
            continue;
        }
        for k in 1..set.len() {
            for_each_combination(set, k, &mut |antecedent| {
                // subsets of a frequent itemset are frequent
                let ante_count = frequent[antecedent];
                let consequent: Vec<usize> = set
                    .iter()
                    .copied()
                    .filter(|i| !antecedent.contains(i))
                    .collect();
                rules.push(AssocRule {
                    antecedent: antecedent.to_vec(),
                    consequent,
                    support_antecedent: ante_count as f64 / n,
                    confidence: count as f64 / ante_count as f64,
                });
            });
        }
    }
    rules.sort_by(rule_order);
    Ok(rules)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleReduction {
    Reduced {
        paths: Vec<Path>,
        feature_set: BTreeSet<usize>,
        /// Features in the order they entered the feature set.
        selection_order: Vec<usize>,
    },
    /// Rules ran out before a quorum of paths was covered.
    NoReduction,
}

/// Greedy antecedent accumulation until at least `quorum` paths use only
/// selected features. Rules whose antecedent adds nothing new are skipped.
pub fn reduce_by_rules(paths: &[Path], rules: &[AssocRule], quorum: usize) -> RuleReduction {
    let items: Vec<BTreeSet<usize>> = paths.iter().map(Path::features).collect();
    let mut feature_set = BTreeSet::new();
    let mut selection_order = Vec::new();

    let survivors = |fs: &BTreeSet<usize>| -> Vec<usize> {
        (0..paths.len()).filter(|&i| items[i].is_subset(fs)).collect()
    };
    let done = |idx: Vec<usize>, fs: BTreeSet<usize>, order: Vec<usize>| RuleReduction::Reduced {
        paths: idx.into_iter().map(|i| paths[i].clone()).collect(),
        feature_set: fs,
        selection_order: order,
    };

    let initial = survivors(&feature_set);
    if quorum > 0 && initial.len() >= quorum {
        return done(initial, feature_set, selection_order);
    }
    for rule in rules {
        if rule.antecedent.iter().all(|f| feature_set.contains(f)) {
            continue;
        }
        for &f in &rule.antecedent {
            if feature_set.insert(f) {
                selection_order.push(f);
            }
        }
        let alive = survivors(&feature_set);
        if alive.len() >= quorum {
            return done(alive, feature_set, selection_order);
        }
    }
    RuleReduction::NoReduction
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy_itemsets() -> Vec<PathItemset> {
        // f1..f4 as 1..4
        [vec![1, 2, 4], vec![1, 3, 4], vec![1, 2, 4], vec![3, 4], vec![4]]
            .into_iter()
            .enumerate()
            .map(|(i, v)| PathItemset {
                path_index: i,
                items: v.into_iter().collect(),
            })
            .collect()
    }

    fn find<'a>(rules: &'a [AssocRule], a: &[usize], c: &[usize]) -> &'a AssocRule {
        rules
            .iter()
            .find(|r| r.antecedent == a && r.consequent == c)
            .unwrap_or_else(|| panic!("rule {a:?} => {c:?} missing"))
    }

    #[test]
    fn toy_confidences() {
        let rules = mine_rules(&toy_itemsets(), 0.2, 3).unwrap();
        let r = find(&rules, &[4], &[1, 3]);
        assert!((r.confidence - 0.2).abs() < 1e-12);
        assert!((r.support_antecedent - 1.0).abs() < 1e-12);
        let r = find(&rules, &[1], &[3]);
        assert!((r.confidence - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.support_antecedent - 0.6).abs() < 1e-12);
        // standard confidence, not the 0.2 quoted in prose
        let r = find(&rules, &[3], &[1, 4]);
        assert!((r.confidence - 0.5).abs() < 1e-12);
        assert_eq!(rules[0].antecedent, vec![4]);
        assert!(rules.windows(2).all(|w| w[0].confidence <= w[1].confidence));
    }

    #[test]
    fn identical_itemsets_have_full_confidence() {
        let sets: Vec<PathItemset> = (0..6)
            .map(|i| PathItemset {
                path_index: i,
                items: [0, 2, 5].into_iter().collect(),
            })
            .collect();
        let rules = mine_rules(&sets, 0.1, 3).unwrap();
        assert_eq!(rules.len(), 12);
        assert!(rules.iter().all(|r| r.confidence == 1.0));
    }

    #[test]
    fn nothing_frequent() {
        let sets: Vec<PathItemset> = (0..10)
            .map(|i| PathItemset {
                path_index: i,
                items: [i, i + 100].into_iter().collect(),
            })
            .collect();
        assert!(mine_rules(&sets, 0.5, 3).unwrap().is_empty());
    }

    #[test]
    fn bad_inputs() {
        assert!(mine_rules(&[], 0.1, 3).is_err());
        assert!(mine_rules(&toy_itemsets(), 1.5, 3).is_err());
    }

    #[test]
    fn combinations() {
        let mut seen = Vec::new();
        for_each_combination(&[1, 2, 3, 4], 2, &mut |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![1, 2]);
        assert_eq!(seen[5], vec![3, 4]);
        let mut none = 0;
        for_each_combination(&[1], 2, &mut |_| none += 1);
        assert_eq!(none, 0);
    }
}
