//! Path similarity, k-medoids path reduction and random trimming.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forest::FeatureMeta;
use crate::path::{Path, Relation};
use crate::quorum;

pub const MAX_SWAPS: usize = 100;

/// Dense per-feature `(lower, upper]` bounds of one path; `None` when the
/// path never tests the feature.
fn dense_bounds(path: &Path, features: &[FeatureMeta]) -> Vec<Option<(f64, f64)>> {
    let mut out: Vec<Option<(f64, f64)>> = vec![None; features.len()];
    for c in &path.conditions {
        let meta = &features[c.feature];
        let b = out[c.feature].get_or_insert((meta.global_min, meta.global_max));
        match c.relation {
            Relation::Gt => b.0 = b.0.max(c.threshold),
            Relation::Le => b.1 = b.1.min(c.threshold),
        }
    }
    out
}

fn similarity_from_bounds(a: &[Option<(f64, f64)>], b: &[Option<(f64, f64)>]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        match (x, y) {
            (Some((li, ui)), Some((lj, uj))) => {
                let inter = ui.min(*uj) - li.max(*lj);
                let union = ui.max(*uj) - li.min(*lj);
                if inter > 0.0 && union != 0.0 {
                    s += inter / union;
                }
            }
            (None, None) => s += 1.0,
            _ => {}
        }
    }
    s / a.len() as f64
}

/// Similarity of two paths in `[0, 1]`.
///
/// Per feature of the model: +1 when neither path tests it, the overlap of
/// the two ranges divided by their span when both do, 0 when only one does.
/// The sum is divided by the number of features.
pub fn path_similarity(p_i: &Path, p_j: &Path, features: &[FeatureMeta]) -> f64 {
    similarity_from_bounds(&dense_bounds(p_i, features), &dense_bounds(p_j, features))
}

/// Symmetric pairwise similarities with a unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        1.0 - self.get(i, j)
    }
}

pub fn build_similarity_matrix(paths: &[Path], features: &[FeatureMeta]) -> SimilarityMatrix {
    let n = paths.len();
    let bounds: Vec<_> = paths.iter().map(|p| dense_bounds(p, features)).collect();
    // upper triangle only, mirrored afterwards
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| similarity_from_bounds(&bounds[i], &bounds[j]))
                .collect()
        })
        .collect();
    let mut values = vec![1.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (offset, &s) in row.iter().enumerate() {
            let j = i + 1 + offset;
            values[i * n + j] = s;
            values[j * n + i] = s;
        }
    }
    SimilarityMatrix { n, values }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    /// Path indices of the medoids.
    pub medoids: Vec<usize>,
    /// For every path, the path index of its medoid.
    pub assignment: Vec<usize>,
}

impl Clustering {
    /// Clusters as `(medoid, members)`, largest first, ties by ascending medoid.
    pub fn clusters_by_size(&self) -> Vec<(usize, Vec<usize>)> {
        let mut clusters: Vec<(usize, Vec<usize>)> =
            self.medoids.iter().map(|&m| (m, Vec::new())).collect();
        clusters.sort_by_key(|c| c.0);
        for (i, &m) in self.assignment.iter().enumerate() {
            let slot = clusters.binary_search_by_key(&m, |c| c.0).expect("assigned to a medoid");
            clusters[slot].1.push(i);
        }
        clusters.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
        clusters
    }
}

#[derive(Clone, Copy)]
struct Nearest {
    /// Position in the medoid list.
    slot: usize,
    d: f64,
}

fn nearest_two(dist: &SimilarityMatrix, medoids: &[usize], o: usize) -> (Nearest, Nearest) {
    let mut near = Nearest {
        slot: usize::MAX,
        d: f64::INFINITY,
    };
    let mut seco = near;
    for (slot, &m) in medoids.iter().enumerate() {
        let d = if m == o { 0.0 } else { dist.distance(o, m) };
        let better = d < near.d || (d == near.d && m == o);
        if better {
            seco = near;
            near = Nearest { slot, d };
        } else if d < seco.d {
            seco = Nearest { slot, d };
        }
    }
    (near, seco)
}

/// PAM k-medoids on `1 - similarity`: greedy BUILD, then best-improvement
/// swaps (at most `max_swaps`). `seed` fixes the candidate scan order, which
/// decides ties.
pub fn pam(matrix: &SimilarityMatrix, k: usize, seed: u64, max_swaps: usize) -> Clustering {
    let n = matrix.len();
    assert!(k >= 1 && k <= n, "k must be in 1..=n");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    // BUILD
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut is_medoid = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    while medoids.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for &c in &order {
            if is_medoid[c] {
                continue;
            }
            let cost: f64 = (0..n)
                .map(|o| nearest[o].min(if o == c { 0.0 } else { matrix.distance(o, c) }))
                .sum();
            if best.is_none_or(|(_, b)| cost < b) {
                best = Some((c, cost));
            }
        }
        let (c, _) = best.expect("k <= n leaves a candidate");
        medoids.push(c);
        is_medoid[c] = true;
        for (o, d) in nearest.iter_mut().enumerate() {
            *d = d.min(if o == c { 0.0 } else { matrix.distance(o, c) });
        }
    }

    // SWAP
    if k > 1 && k < n {
        for _ in 0..max_swaps {
            let recs: Vec<(Nearest, Nearest)> =
                (0..n).map(|o| nearest_two(matrix, &medoids, o)).collect();
            let mut removal = vec![0.0; k];
            for (near, seco) in &recs {
                removal[near.slot] += seco.d - near.d;
            }
            let mut best: Option<(f64, usize, usize)> = None;
            for &c in &order {
                if is_medoid[c] {
                    continue;
                }
                let mut ploss = removal.clone();
                let mut acc = 0.0;
                for (o, (near, seco)) in recs.iter().enumerate() {
                    let d = if o == c { 0.0 } else { matrix.distance(o, c) };
                    if d < near.d {
                        acc += d - near.d;
                        ploss[near.slot] += near.d - seco.d;
                    } else if d < seco.d {
                        ploss[near.slot] += d - seco.d;
                    }
                }
                let (slot, loss) = ploss
                    .iter()
                    .enumerate()
                    .fold((0, f64::INFINITY), |acc_min, (i, &v)| {
                        if v < acc_min.1 {
                            (i, v)
                        } else {
                            acc_min
                        }
                    });
                let delta = acc + loss;
                if delta < -1e-12 && best.is_none_or(|(b, _, _)| delta < b) {
                    best = Some((delta, slot, c));
                }
            }
            let Some((_, slot, c)) = best else { break };
            is_medoid[medoids[slot]] = false;
            medoids[slot] = c;
            is_medoid[c] = true;
        }
    }

    let assignment = (0..n)
        .map(|o| {
            if is_medoid[o] {
                return o;
            }
            let mut best = (f64::INFINITY, usize::MAX);
            for &m in &medoids {
                let d = matrix.distance(o, m);
                if d < best.0 || (d == best.0 && m < best.1) {
                    best = (d, m);
                }
            }
            best.1
        })
        .collect();
    Clustering {
        medoids,
        assignment,
    }
}

/// Default number of medoids: `ceil(sqrt(n_paths))`.
pub fn default_medoids(n_paths: usize) -> usize {
    (n_paths as f64).sqrt().ceil().max(1.0) as usize
}

/// Collects whole clusters, largest first, until `target` paths are gathered.
/// Returns the input unchanged when the clusters cannot reach `target`.
pub fn kmedoids_reduce_to(
    matrix: &SimilarityMatrix,
    paths: &[Path],
    target: usize,
    n_medoids: usize,
    seed: u64,
) -> Vec<Path> {
    if paths.is_empty() {
        return Vec::new();
    }
    let k = n_medoids.clamp(1, paths.len());
    let clustering = pam(matrix, k, seed, MAX_SWAPS);
    let mut picked: Vec<usize> = Vec::new();
    for (_, members) in clustering.clusters_by_size() {
        if picked.len() >= target {
            break;
        }
        picked.extend(members);
    }
    if picked.len() >= target {
        picked.into_iter().map(|i| paths[i].clone()).collect()
    } else {
        paths.to_vec()
    }
}

/// Clustering-based path reduction towards the quorum of `n_estimators` trees.
pub fn kmedoids_reduce(
    matrix: &SimilarityMatrix,
    paths: &[Path],
    n_estimators: usize,
    n_medoids: usize,
    seed: u64,
) -> Vec<Path> {
    kmedoids_reduce_to(matrix, paths, quorum(n_estimators), n_medoids, seed)
}

/// Uniform random subset of exactly `target` paths, kept in input order.
pub fn random_trim_to(paths: &[Path], target: usize, seed: u64) -> Result<Vec<Path>> {
    if paths.len() < target {
        return Err(Error::BelowQuorum {
            available: paths.len(),
            quorum: target,
        });
    }
    if paths.len() == target {
        return Ok(paths.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = index::sample(&mut rng, paths.len(), target).into_vec();
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|i| paths[i].clone()).collect())
}

/// Random trimming to exactly the quorum of `n_estimators` trees.
pub fn random_trim(paths: &[Path], n_estimators: usize, seed: u64) -> Result<Vec<Path>> {
    random_trim_to(paths, quorum(n_estimators), seed)
}
