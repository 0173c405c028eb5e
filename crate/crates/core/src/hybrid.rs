//! Cluster-first, route-second driver.
//!
//! The instance is cut into a k-means tree whose leaves fit the quantum
//! register. Leaves are solved independently, sibling clusters are visited
//! in the optimal cyclic order of their centroids, neighbouring cycles are
//! merged by the cheapest two-edge exchange, and the final cycle is refined.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aco::{self, AcoError, AcoParams};
use crate::clustering::{self, ClusterTree, Point, TreeParams};
use crate::qaco::{self, QacoError, QacoParams};
use crate::quantum::NoiseSpec;
use crate::rng;
use crate::tsplib::{DistanceMatrix, Instance, MetricMode, Tour};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HybridError {
    #[error("need at least 2 cities, got {0}")]
    TooFewCities(usize),
    #[error(transparent)]
    Qaco(#[from] QacoError),
    #[error(transparent)]
    Aco(#[from] AcoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafSolver {
    Qaco,
    ClassicalAco,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    None,
    TwoOpt,
    AcoPolish,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridConfig {
    pub leaf_solver: LeafSolver,
    pub qaco: QacoParams,
    /// Parameters for classical-ACO leaves and for the polish stage.
    pub aco: AcoParams,
    pub noise: NoiseSpec,
    pub metric: MetricMode,
    pub refinement: Refinement,
    pub two_opt_passes: usize,
    pub polish_iterations: usize,
    pub kmeans_restarts: usize,
    pub kmeans_max_iter: usize,
    pub seed: u64,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            leaf_solver: LeafSolver::Qaco,
            qaco: QacoParams::default(),
            aco: AcoParams::default(),
            noise: NoiseSpec::none(),
            metric: MetricMode::default(),
            refinement: Refinement::TwoOpt,
            two_opt_passes: 20,
            polish_iterations: 200,
            kmeans_restarts: clustering::DEFAULT_RESTARTS,
            kmeans_max_iter: clustering::DEFAULT_MAX_ITER,
            seed: 0,
        }
    }
}

impl HybridConfig {
    /// Leaf size is pinned to the four cities the register can hold.
    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            leaf_max: qaco::MAX_CITIES,
            branching: 4,
            restarts: self.kmeans_restarts,
            max_iter: self.kmeans_max_iter,
        }
    }
}

/// A solved cluster: its cities and a cycle through them (instance indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubSolution {
    pub indices: Vec<usize>,
    pub cycle: Vec<usize>,
    pub length: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HybridStats {
    pub leaf_lengths: Vec<f64>,
    /// Added length from all cycle merges.
    pub stitch_cost: f64,
    pub stitched_length: f64,
    pub refined_length: f64,
    pub refinement_gain: f64,
    pub tree_depth: usize,
    /// Iterations summed over leaves solved by a colony.
    pub leaf_iterations: usize,
    pub repairs: usize,
    pub mutations: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridResult {
    pub tour: Tour,
    pub length: f64,
    pub stats: HybridStats,
}

/// Visit lexicographic permutations of `0..n` that start with 0.
fn for_each_cycle(n: usize, mut f: impl FnMut(&[usize])) {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], f: &mut impl FnMut(&[usize])) {
        if prefix.len() == used.len() {
            f(prefix);
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                prefix.push(c);
                rec(prefix, used, f);
                prefix.pop();
                used[c] = false;
            }
        }
    }
    if n == 0 {
        return;
    }
    let mut used = vec![false; n];
    used[0] = true;
    rec(&mut vec![0], &mut used, &mut f);
}

/// Exact shortest cycle by enumeration; lexicographically first on ties.
pub fn brute_force_cycle(dist: &DistanceMatrix) -> (Vec<usize>, f64) {
    let mut best = (Vec::new(), f64::INFINITY);
    for_each_cycle(dist.len(), |order| {
        let len = dist.cycle_length(order);
        if len < best.1 {
            best = (order.to_vec(), len);
        }
    });
    best
}

/// Optimal cyclic visiting order of up to four cluster centroids.
pub fn order_siblings(centroids: &[Point]) -> Vec<usize> {
    let n = centroids.len();
    let d = |a: usize, b: usize| (centroids[a].0 - centroids[b].0).hypot(centroids[a].1 - centroids[b].1);
    let mut best: (Vec<usize>, f64) = (Vec::new(), f64::INFINITY);
    for_each_cycle(n, |order| {
        let len: f64 = (0..n).map(|p| d(order[p], order[(p + 1) % n])).sum();
        if best.0.is_empty() || len < best.1 - 1e-12 * best.1.max(1.0) {
            best = (order.to_vec(), len);
        }
    });
    best.0
}

/// Splice cycle `b` into cycle `a` by removing one edge from each and
/// adding the cheaper of the two reconnections. Returns the merged cycle and
/// the change in length.
pub fn merge_cycles(a: &[usize], b: &[usize], dist: &DistanceMatrix) -> (Vec<usize>, f64) {
    let (na, nb) = (a.len(), b.len());
    let mut best: Option<(f64, usize, usize, bool)> = None;
    for i in 0..na {
        let (ai, ai1) = (a[i], a[(i + 1) % na]);
        let cut_a = if na > 1 { dist.get(ai, ai1) } else { 0.0 };
        for j in 0..nb {
            let (bj, bj1) = (b[j], b[(j + 1) % nb]);
            let cut_b = if nb > 1 { dist.get(bj, bj1) } else { 0.0 };
            // Reversed: ai → bj … bj1 → ai1.
            let rev = dist.get(ai, bj) + dist.get(bj1, ai1) - cut_a - cut_b;
            // Forward: ai → bj1 … bj → ai1.
            let fwd = dist.get(ai, bj1) + dist.get(bj, ai1) - cut_a - cut_b;
            for (delta, forward) in [(rev, false), (fwd, true)] {
                if best.is_none_or(|(d, ..)| delta < d) {
                    best = Some((delta, i, j, forward));
                }
            }
        }
    }
    let (delta, i, j, forward) = best.expect("both cycles are non-empty");
    let mut merged = Vec::with_capacity(na + nb);
    merged.extend_from_slice(&a[..=i]);
    if forward {
        merged.extend((1..=nb).map(|s| b[(j + s) % nb]));
    } else {
        merged.extend((0..nb).map(|s| b[(j + nb - s) % nb]));
    }
    merged.extend_from_slice(&a[i + 1..]);
    (merged, delta)
}

/// Merge sub-solutions in the given order into one cycle. Returns the cycle
/// and the total added length.
pub fn stitch(subs: &[SubSolution], dist: &DistanceMatrix) -> (Vec<usize>, f64) {
    let mut iter = subs.iter();
    let first = iter.next().expect("at least one sub-solution");
    let mut merged = first.cycle.clone();
    let mut merged_len = first.length;
    let mut added = 0.0;
    for sub in iter {
        let (next, delta) = merge_cycles(&merged, &sub.cycle, dist);
        let expected = merged_len + sub.length + delta;
        let actual = dist.cycle_length(&next);
        assert!(
            (expected - actual).abs() <= 1e-9 * expected.abs().max(1.0),
            "merge bookkeeping drifted: {expected} vs {actual}"
        );
        merged = next;
        merged_len = actual;
        added += delta;
    }
    (merged, added)
}

/// First-improvement 2-opt over at most `max_passes` sweeps.
pub fn two_opt(tour: &Tour, inst: &Instance, metric: MetricMode, max_passes: usize) -> Tour {
    let dist = inst.distance_matrix(metric);
    let order = two_opt_order(tour.order().to_vec(), &dist, max_passes);
    Tour::new(order).expect("2-opt only reverses segments")
}

pub(crate) fn two_opt_order(mut t: Vec<usize>, dist: &DistanceMatrix, max_passes: usize) -> Vec<usize> {
    let n = t.len();
    if n < 4 {
        return t;
    }
    for _ in 0..max_passes {
        let mut improved = false;
        for i in 0..n - 1 {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b, c, d) = (t[i], t[i + 1], t[j], t[(j + 1) % n]);
                let delta = dist.get(a, c) + dist.get(b, d) - dist.get(a, b) - dist.get(c, d);
                if delta < -1e-10 {
                    t[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    t
}

/// Seed used for the leaf at `path` (child positions from the root).
pub fn leaf_seed(seed: u64, path: &[u64]) -> u64 {
    rng::derive_seed(seed ^ 0x5EED_1EAF, path)
}

#[derive(Default)]
struct LeafCounters {
    leaf_lengths: Vec<f64>,
    leaf_iterations: usize,
    repairs: usize,
    mutations: usize,
    stitch_cost: f64,
}

impl LeafCounters {
    fn absorb(&mut self, other: LeafCounters) {
        self.leaf_lengths.extend(other.leaf_lengths);
        self.leaf_iterations += other.leaf_iterations;
        self.repairs += other.repairs;
        self.mutations += other.mutations;
        self.stitch_cost += other.stitch_cost;
    }
}

fn solve_leaf(
    inst: &Instance,
    indices: &[usize],
    dist: &DistanceMatrix,
    config: &HybridConfig,
    seed: u64,
) -> Result<(SubSolution, LeafCounters), HybridError> {
    let mut counters = LeafCounters::default();
    let (cycle, length) = match indices.len() {
        0 => unreachable!("cluster tree never produces empty leaves"),
        1 => (indices.to_vec(), 0.0),
        2 | 3 => brute_force_sub(indices, dist),
        _ => match config.leaf_solver {
            LeafSolver::BruteForce => brute_force_sub(indices, dist),
            LeafSolver::Qaco => {
                let r = qaco::qaco_solve(inst, indices, &config.qaco, &config.noise, config.metric, seed)?;
                counters.leaf_iterations += r.iterations;
                counters.repairs += r.repairs;
                counters.mutations += r.mutations;
                (r.cities, r.length)
            }
            LeafSolver::ClassicalAco => {
                let r = aco::aco_solve(inst, indices, &config.aco, config.metric, seed)?;
                counters.leaf_iterations += r.history.len();
                (r.cities, r.length)
            }
        },
    };
    counters.leaf_lengths.push(length);
    Ok((SubSolution { indices: indices.to_vec(), cycle, length }, counters))
}

fn brute_force_sub(indices: &[usize], dist: &DistanceMatrix) -> (Vec<usize>, f64) {
    let m = indices.len();
    let mut local = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            local[a * m + b] = dist.get(indices[a], indices[b]);
        }
    }
    let mut best = (Vec::new(), f64::INFINITY);
    for_each_cycle(m, |order| {
        let len: f64 = (0..m).map(|p| local[order[p] * m + order[(p + 1) % m]]).sum();
        if len < best.1 {
            best = (order.iter().map(|&p| indices[p]).collect(), len);
        }
    });
    best
}

fn solve_node(
    inst: &Instance,
    node: &ClusterTree,
    dist: &DistanceMatrix,
    config: &HybridConfig,
    path: Vec<u64>,
) -> Result<(SubSolution, LeafCounters), HybridError> {
    if node.is_leaf() {
        return solve_leaf(inst, &node.indices, dist, config, leaf_seed(config.seed, &path));
    }
    let solved: Vec<(SubSolution, LeafCounters)> = node
        .children
        .par_iter()
        .enumerate()
        .map(|(c, child)| {
            let mut p = path.clone();
            p.push(c as u64);
            solve_node(inst, child, dist, config, p)
        })
        .collect::<Result<_, _>>()?;

    let centroids: Vec<Point> = node
        .children
        .iter()
        .map(|c| clustering::centroid_of(inst, &c.indices).expect("non-empty cluster"))
        .collect();
    let order = order_siblings(&centroids);
    let mut counters = LeafCounters::default();
    let mut subs = Vec::with_capacity(solved.len());
    let mut by_child: Vec<Option<(SubSolution, LeafCounters)>> = solved.into_iter().map(Some).collect();
    for &c in &order {
        let (sub, cnt) = by_child[c].take().expect("each child once");
        counters.absorb(cnt);
        subs.push(sub);
    }
    let (cycle, added) = stitch(&subs, dist);
    counters.stitch_cost += added;
    assert!(crate::tsplib::validate_tour(&sorted_check(&cycle, &node.indices), node.indices.len()));
    let length = dist.cycle_length(&cycle);
    Ok((SubSolution { indices: node.indices.clone(), cycle, length }, counters))
}

/// Map a cycle over `indices` to positions so it can be checked as a permutation.
fn sorted_check(cycle: &[usize], indices: &[usize]) -> Vec<usize> {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    cycle.iter().map(|c| sorted.binary_search(c).unwrap_or(usize::MAX)).collect()
}

/// Solve `inst` end to end.
pub fn solve_hybrid(inst: &Instance, config: &HybridConfig) -> Result<HybridResult, HybridError> {
    let n = inst.dimension();
    if n < 2 {
        return Err(HybridError::TooFewCities(n));
    }
    let started = Instant::now();
    let dist = inst.distance_matrix(config.metric);
    let tree = clustering::build_cluster_tree(inst, config.tree_params(), config.seed);
    solve_tree(inst, &tree, &dist, config, started)
}

/// Solve with an already built cluster tree.
pub fn solve_on_tree(inst: &Instance, tree: &ClusterTree, config: &HybridConfig) -> Result<HybridResult, HybridError> {
    let dist = inst.distance_matrix(config.metric);
    solve_tree(inst, tree, &dist, config, Instant::now())
}

fn solve_tree(
    inst: &Instance,
    tree: &ClusterTree,
    dist: &DistanceMatrix,
    config: &HybridConfig,
    started: Instant,
) -> Result<HybridResult, HybridError> {
    let (root, counters) = solve_node(inst, tree, dist, config, Vec::new())?;
    let stitched = Tour::new(root.cycle).expect("root cycle covers every city");
    let stitched_length = dist.cycle_length(stitched.order());

    let refined = match config.refinement {
        Refinement::None => stitched.clone(),
        Refinement::TwoOpt => {
            Tour::new(two_opt_order(stitched.order().to_vec(), dist, config.two_opt_passes)).expect("2-opt")
        }
        Refinement::AcoPolish => {
            let all: Vec<usize> = (0..inst.dimension()).collect();
            let params = AcoParams { iterations: config.polish_iterations, ..config.aco.clone() };
            let polished = aco::aco_polish(inst, &all, stitched.order(), &params, config.metric, config.seed)?;
            Tour::new(polished.cities).expect("polish keeps a permutation")
        }
    };
    let refined_length = dist.cycle_length(refined.order());
    debug_assert!(refined_length <= stitched_length + 1e-9);

    let stats = HybridStats {
        leaf_lengths: counters.leaf_lengths,
        stitch_cost: counters.stitch_cost,
        stitched_length,
        refined_length,
        refinement_gain: stitched_length - refined_length,
        tree_depth: tree.depth(),
        leaf_iterations: counters.leaf_iterations,
        repairs: counters.repairs,
        mutations: counters.mutations,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok(HybridResult { tour: refined, length: refined_length, stats })
}
