//! K-means (K-means++ seeding, restarts) and the recursive cluster tree
//! that cuts an instance into leaves small enough for the quantum register.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;
use crate::tsplib::Instance;

pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 100;
const MOVE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("k = {k} exceeds the number of points ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("no points to cluster")]
    EmptyInput,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("restarts must be at least 1")]
    ZeroRestarts,
    #[error("centroid of an empty set")]
    EmptySet,
}

pub type Point = (f64, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub centroids: Vec<Point>,
    pub inertia: f64,
    /// Inertia after every Lloyd iteration of the winning restart.
    pub inertia_trace: Vec<f64>,
}

fn sq_dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

/// Index of the nearest centroid; ties go to the lowest id.
fn nearest(p: Point, centroids: &[Point]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, &q) in centroids.iter().enumerate() {
        let d = sq_dist(p, q);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

fn inertia(points: &[Point], labels: &[usize], centroids: &[Point]) -> f64 {
    points.iter().zip(labels).map(|(&p, &l)| sq_dist(p, centroids[l])).sum()
}

fn mean(points: impl Iterator<Item = Point>) -> Option<Point> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for (x, y) in points {
        sx += x;
        sy += y;
        n += 1;
    }
    (n > 0).then(|| (sx / n as f64, sy / n as f64))
}

fn kmeans_pp_init<R: Rng>(points: &[Point], k: usize, rng: &mut R) -> Vec<Point> {
    let mut centroids = vec![points[rng.gen_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|&p| sq_dist(p, centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && u < w {
                    chosen = i;
                    break;
                }
                u -= w;
            }
            chosen
        } else {
            rng.gen_range(0..points.len())
        };
        let c = points[pick];
        centroids.push(c);
        for (slot, &p) in d2.iter_mut().zip(points) {
            *slot = slot.min(sq_dist(p, c));
        }
    }
    centroids
}

fn lloyd<R: Rng>(points: &[Point], k: usize, max_iter: usize, rng: &mut R) -> ClusterAssignment {
    let mut centroids = kmeans_pp_init(points, k, rng);
    let mut labels: Vec<usize> = points.iter().map(|&p| nearest(p, &centroids)).collect();
    let mut trace = Vec::new();
    let mut current = inertia(points, &labels, &centroids);

    for _ in 0..max_iter {
        let mut moved: f64 = 0.0;
        let mut next: Vec<Point> = (0..k)
            .map(|c| {
                mean(points.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(&p, _)| p)).unwrap_or(centroids[c])
            })
            .collect();
        // Reseed empty clusters with the point farthest from its centroid.
        for c in 0..k {
            if labels.contains(&c) {
                continue;
            }
            let far = (0..points.len())
                .filter(|&i| labels.iter().filter(|&&l| l == labels[i]).count() > 1)
                .max_by(|&a, &b| {
                    sq_dist(points[a], next[labels[a]])
                        .total_cmp(&sq_dist(points[b], next[labels[b]]))
                        .then(b.cmp(&a))
                });
            if let Some(i) = far {
                next[c] = points[i];
                labels[i] = c;
            }
        }
        for (a, b) in centroids.iter().zip(&next) {
            moved = moved.max(sq_dist(*a, *b).sqrt());
        }
        centroids = next;
        let after_update = inertia(points, &labels, &centroids);
        labels = points.iter().map(|&p| nearest(p, &centroids)).collect();
        let after_assign = inertia(points, &labels, &centroids);
        assert!(
            after_update <= current * (1.0 + 1e-12) + 1e-12 && after_assign <= after_update * (1.0 + 1e-12) + 1e-12,
            "k-means inertia increased: {current} -> {after_update} -> {after_assign}"
        );
        current = after_assign;
        trace.push(current);
        if moved < MOVE_TOL {
            break;
        }
    }
    ClusterAssignment { labels, centroids, inertia: current, inertia_trace: trace }
}

/// K-means with K-means++ seeding; returns the lowest-inertia restart.
///
/// Restarts draw from independent substreams of `seed`, and ties on inertia
/// go to the earliest restart.
pub fn kmeans(
    points: &[Point],
    k: usize,
    restarts: usize,
    max_iter: usize,
    seed: u64,
) -> Result<ClusterAssignment, ClusterError> {
    if points.is_empty() {
        return Err(ClusterError::EmptyInput);
    }
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if k > points.len() {
        return Err(ClusterError::KTooLarge { k, n: points.len() });
    }
    if restarts == 0 {
        return Err(ClusterError::ZeroRestarts);
    }
    let best = (0..restarts)
        .map(|r| lloyd(points, k, max_iter, &mut rng::substream(seed, &[r as u64])))
        .reduce(|best, run| if run.inertia < best.inertia { run } else { best })
        .expect("restarts >= 1");
    Ok(best)
}

/// Arithmetic mean of the selected cities' coordinates.
pub fn centroid_of(inst: &Instance, indices: &[usize]) -> Result<Point, ClusterError> {
    mean(indices.iter().map(|&i| inst.coord(i))).ok_or(ClusterError::EmptySet)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTree {
    pub indices: Vec<usize>,
    pub children: Vec<ClusterTree>,
}

impl ClusterTree {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn leaves(&self) -> Vec<&ClusterTree> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a ClusterTree>) {
        if self.is_leaf() {
            out.push(self);
        } else {
            for c in &self.children {
                c.collect_leaves(out);
            }
        }
    }

    /// Number of levels; a lone leaf has depth 0.
    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub leaf_max: usize,
    pub branching: usize,
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { leaf_max: 4, branching: 4, restarts: DEFAULT_RESTARTS, max_iter: DEFAULT_MAX_ITER }
    }
}

/// Recursively split `inst` with k-means until every leaf holds at most
/// `params.leaf_max` cities.
pub fn build_cluster_tree(inst: &Instance, params: TreeParams, seed: u64) -> ClusterTree {
    assert!(params.leaf_max >= 2, "leaf_max must be at least 2");
    assert!(params.branching >= 2, "branching must be at least 2");
    let all: Vec<usize> = (0..inst.dimension()).collect();
    split_node(inst, all, &params, seed, &mut vec![])
}

fn split_node(inst: &Instance, indices: Vec<usize>, params: &TreeParams, seed: u64, path: &mut Vec<u64>) -> ClusterTree {
    let size = indices.len();
    if size <= params.leaf_max {
        return ClusterTree { indices, children: vec![] };
    }
    let k = params.branching.min(size.div_ceil(params.leaf_max)).min(size);
    let points: Vec<Point> = indices.iter().map(|&i| inst.coord(i)).collect();
    let node_seed = rng::derive_seed(seed, path);
    let assignment = kmeans(&points, k, params.restarts, params.max_iter, node_seed).expect("1 <= k <= size");

    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (pos, &label) in assignment.labels.iter().enumerate() {
        groups[label].push(pos);
    }
    groups.retain(|g| !g.is_empty());
    if groups.len() < 2 {
        // Coincident points: k-means cannot separate them, so cut by position.
        let chunk = size.div_ceil(k);
        groups = (0..size).collect::<Vec<_>>().chunks(chunk).map(<[usize]>::to_vec).collect();
    }
    absorb_singletons(&points, &mut groups);

    let children = groups
        .into_iter()
        .enumerate()
        .map(|(c, g)| {
            path.push(c as u64);
            let child = split_node(inst, g.into_iter().map(|p| indices[p]).collect(), params, seed, path);
            path.pop();
            child
        })
        .collect();
    ClusterTree { indices, children }
}

/// Give every one-point group a partner so leaves hold at least two cities:
/// take the nearest point from a group with three or more, or else merge into
/// the nearest group when that does not collapse the split.
fn absorb_singletons(points: &[Point], groups: &mut Vec<Vec<usize>>) {
    while let Some(s) = groups.iter().position(|g| g.len() == 1) {
        let lone = points[groups[s][0]];
        let donor = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.len() >= 3)
            .flat_map(|(gi, g)| g.iter().enumerate().map(move |(pi, &p)| (gi, pi, p)))
            .min_by(|a, b| sq_dist(points[a.2], lone).total_cmp(&sq_dist(points[b.2], lone)));
        if let Some((gi, pi, p)) = donor {
            groups[gi].remove(pi);
            groups[s].push(p);
        } else if groups.len() > 2 {
            let lone_idx = groups.remove(s)[0];
            let target = groups
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    let da = a.1.iter().map(|&p| sq_dist(points[p], lone)).fold(f64::INFINITY, f64::min);
                    let db = b.1.iter().map(|&p| sq_dist(points[p], lone)).fold(f64::INFINITY, f64::min);
                    da.total_cmp(&db)
                })
                .map(|(i, _)| i)
                .expect("at least two groups remain");
            groups[target].push(lone_idx);
            groups[target].sort_unstable();
        } else {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsplib::EdgeWeightType;

    #[test]
    fn corners_each_own_cluster() {
        let pts = [(0.0, 0.0), (100.0, 0.0), (0.0, 100.0), (100.0, 100.0)];
        let a = kmeans(&pts, 4, 3, 100, 1).unwrap();
        assert_eq!(a.inertia, 0.0);
        let mut labels = a.labels.clone();
        labels.sort_unstable();
        labels.dedup();
        assert_eq!(labels.len(), 4);
    }

    #[test]
    fn two_tight_pairs() {
        let pts = [(0.0, 0.0), (0.0, 2.0), (50.0, 50.0), (52.0, 50.0)];
        let a = kmeans(&pts, 2, 5, 100, 7).unwrap();
        assert_eq!(a.labels[0], a.labels[1]);
        assert_eq!(a.labels[2], a.labels[3]);
        assert_ne!(a.labels[0], a.labels[2]);
        // Each pair sits at distance 1 from its midpoint: 4 × 1².
        assert!((a.inertia - 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_is_mean() {
        let pts = [(0.0, 0.0), (2.0, 0.0), (4.0, 6.0)];
        let a = kmeans(&pts, 1, 2, 100, 3).unwrap();
        assert!((a.centroids[0].0 - 2.0).abs() < 1e-12 && (a.centroids[0].1 - 2.0).abs() < 1e-12);
        // 4+4+0 + 4+4+16
        assert!((a.inertia - 32.0).abs() < 1e-12);
    }

    #[test]
    fn kmeans_errors() {
        assert_eq!(kmeans(&[], 1, 1, 10, 0), Err(ClusterError::EmptyInput));
        assert_eq!(kmeans(&[(0.0, 0.0)], 2, 1, 10, 0), Err(ClusterError::KTooLarge { k: 2, n: 1 }));
        assert_eq!(kmeans(&[(0.0, 0.0)], 1, 0, 10, 0), Err(ClusterError::ZeroRestarts));
    }

    #[test]
    fn centroids() {
        let inst =
            Instance::new("sq", EdgeWeightType::Euc2d, vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]).unwrap();
        assert_eq!(centroid_of(&inst, &[0, 3]).unwrap(), (0.5, 0.0));
        assert_eq!(centroid_of(&inst, &[2]).unwrap(), (1.0, 1.0));
        assert_eq!(centroid_of(&inst, &[0, 1, 2, 3]).unwrap(), (0.5, 0.5));
        assert_eq!(centroid_of(&inst, &[]), Err(ClusterError::EmptySet));
    }

    #[test]
    fn coincident_points_terminate() {
        let inst = Instance::new("dup", EdgeWeightType::Euc2d, vec![(5.0, 5.0); 11]).unwrap();
        let tree = build_cluster_tree(&inst, TreeParams::default(), 3);
        let mut seen: Vec<usize> = tree.leaves().iter().flat_map(|l| l.indices.clone()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..11).collect::<Vec<_>>());
        assert!(tree.leaves().iter().all(|l| (2..=4).contains(&l.indices.len())));
    }

    #[test]
    fn outlier_does_not_make_singleton_leaf() {
        let mut coords = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        coords.push((1000.0, 1000.0));
        let inst = Instance::new("o", EdgeWeightType::Euc2d, coords).unwrap();
        let tree = build_cluster_tree(&inst, TreeParams::default(), 0);
        assert_eq!(tree.children.len(), 2);
        assert!(tree.leaves().iter().all(|l| l.indices.len() >= 2));
    }

    #[test]
    fn small_instance_is_single_leaf() {
        let inst = Instance::new("four", EdgeWeightType::Euc2d, vec![(0.0, 0.0), (3.0, 1.0), (2.0, 5.0), (9.0, 9.0)])
            .unwrap();
        let tree = build_cluster_tree(&inst, TreeParams::default(), 0);
        assert!(tree.is_leaf());
        assert_eq!(tree.indices, vec![0, 1, 2, 3]);
    }
}
