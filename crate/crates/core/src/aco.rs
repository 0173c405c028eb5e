//! Ant Colony System baseline.
//!
//! Ants move by the pseudo-random-proportional rule: with probability `q0`
//! they take the edge maximising `τ^α·η^β`, otherwise they sample the next
//! city with probability proportional to it. After every iteration the
//! pheromone evaporates and the global-best tour deposits `Q/L`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{self, Stream};
use crate::tsplib::{DistanceMatrix, Instance, MetricMode, Tour};

const TAU_FLOOR: f64 = 1e-12;
const MIN_DISTANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcoError {
    #[error("no candidate cities left to visit")]
    EmptyAllowedSet,
    #[error("need at least 2 cities, got {0}")]
    TooFewCities(usize),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcoParams {
    pub n_ants: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub q0: f64,
    pub rho: f64,
    pub tau0: f64,
    pub deposit: f64,
}

impl Default for AcoParams {
    fn default() -> Self {
        Self { n_ants: 6, alpha: 4.0, beta: 2.0, iterations: 1000, q0: 0.9, rho: 0.1, tau0: 1.0, deposit: 1.0 }
    }
}

impl AcoParams {
    pub fn validate(&self) -> Result<(), AcoError> {
        let bad = |what: &str| Err(AcoError::InvalidParams(what.to_string()));
        if self.n_ants == 0 {
            return bad("n_ants must be positive");
        }
        if !(0.0..=1.0).contains(&self.q0) {
            return bad("q0 must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return bad("rho must lie in [0, 1]");
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(self.tau0 > 0.0) || !(self.deposit > 0.0) {
            return bad("tau0 and deposit must be positive");
        }
        Ok(())
    }
}

/// Symmetric pheromone levels with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneMatrix {
    n: usize,
    tau: Vec<f64>,
}

impl PheromoneMatrix {
    pub fn uniform(n: usize, tau0: f64) -> Self {
        let mut tau = vec![tau0; n * n];
        for i in 0..n {
            tau[i * n + i] = 0.0;
        }
        Self { n, tau }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.tau[i * self.n + j]
    }

    fn add_symmetric(&mut self, i: usize, j: usize, amount: f64) {
        self.tau[i * self.n + j] += amount;
        self.tau[j * self.n + i] += amount;
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Every off-diagonal entry is strictly positive.
    pub fn is_positive(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j) > 0.0))
    }
}

/// Heuristic desirability `η = 1 / max(d, 1e-9)`.
pub fn eta(distance: f64) -> f64 {
    1.0 / distance.max(MIN_DISTANCE)
}

/// Selection probabilities over `allowed` for an ant at `current`.
pub fn selection_probabilities(
    current: usize,
    allowed: &[usize],
    tau: &PheromoneMatrix,
    dist: &DistanceMatrix,
    params: &AcoParams,
) -> Result<Vec<f64>, AcoError> {
    if allowed.is_empty() {
        return Err(AcoError::EmptyAllowedSet);
    }
    let weights: Vec<f64> = allowed.iter().map(|&u| weight(current, u, tau, dist, params)).collect();
    Ok(normalize(&weights))
}

fn weight(r: usize, u: usize, tau: &PheromoneMatrix, dist: &DistanceMatrix, params: &AcoParams) -> f64 {
    tau.get(r, u).powf(params.alpha) * eta(dist.get(r, u)).powf(params.beta)
}

fn normalize(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    if total > 0.0 && total.is_finite() {
        weights.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / weights.len() as f64; weights.len()]
    }
}

/// Choose the next city from `allowed` by the pseudo-random-proportional rule.
pub fn next_node<R: Rng + ?Sized>(
    current: usize,
    allowed: &[usize],
    tau: &PheromoneMatrix,
    dist: &DistanceMatrix,
    params: &AcoParams,
    rng: &mut R,
) -> Result<usize, AcoError> {
    if allowed.is_empty() {
        return Err(AcoError::EmptyAllowedSet);
    }
    let weights: Vec<f64> = allowed.iter().map(|&u| weight(current, u, tau, dist, params)).collect();
    Ok(allowed[choose(&weights, allowed, params.q0, rng)])
}

/// Position in `allowed` chosen from precomputed weights.
fn choose<R: Rng + ?Sized>(weights: &[f64], allowed: &[usize], q0: f64, rng: &mut R) -> usize {
    let q: f64 = rng.gen();
    if allowed.len() == 1 {
        return 0;
    }
    if q <= q0 {
        let mut best = 0;
        for p in 1..weights.len() {
            if weights[p] > weights[best] || (weights[p] == weights[best] && allowed[p] < allowed[best]) {
                best = p;
            }
        }
        return best;
    }
    let probs = normalize(weights);
    let mut u: f64 = rng.gen();
    for (p, &pr) in probs.iter().enumerate() {
        if u < pr {
            return p;
        }
        u -= pr;
    }
    probs.len() - 1
}

/// One ant's tour over the `dist.len()` local cities.
pub fn construct_tour<R: Rng + ?Sized>(
    tau: &PheromoneMatrix,
    dist: &DistanceMatrix,
    params: &AcoParams,
    rng: &mut R,
) -> Tour {
    let n = dist.len();
    let weights = weight_table(tau, dist, params);
    construct_with_weights(n, &weights, params.q0, rng)
}

fn weight_table(tau: &PheromoneMatrix, dist: &DistanceMatrix, params: &AcoParams) -> Vec<f64> {
    let n = dist.len();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i * n + j] = weight(i, j, tau, dist, params);
            }
        }
    }
    w
}

fn construct_with_weights<R: Rng + ?Sized>(n: usize, weights: &[f64], q0: f64, rng: &mut R) -> Tour {
    let start = rng.gen_range(0..n);
    let mut order = Vec::with_capacity(n);
    order.push(start);
    let mut allowed: Vec<usize> = (0..n).filter(|&c| c != start).collect();
    let mut buf = Vec::with_capacity(n);
    let mut current = start;
    while !allowed.is_empty() {
        buf.clear();
        buf.extend(allowed.iter().map(|&u| weights[current * n + u]));
        let pos = choose(&buf, &allowed, q0, rng);
        current = allowed.remove(pos);
        order.push(current);
    }
    Tour::new(order).expect("construction visits every city once")
}

/// Evaporate, then deposit `Q / length` on both orientations of every edge of `best`.
pub fn update_pheromone(tau: &mut PheromoneMatrix, best: &Tour, length: f64, params: &AcoParams) {
    assert!(length > 0.0, "deposit needs a positive tour length");
    let n = tau.n;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                tau.tau[i * n + j] *= 1.0 - params.rho;
            }
        }
    }
    let order = best.order();
    let amount = params.deposit / length;
    for p in 0..order.len() {
        let (a, b) = (order[p], order[(p + 1) % order.len()]);
        if a != b {
            tau.add_symmetric(a, b, amount);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && tau.tau[i * n + j] < TAU_FLOOR {
                tau.tau[i * n + j] = TAU_FLOOR;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcoResult {
    /// Tour over local positions `0..indices.len()`.
    pub tour: Tour,
    /// The same tour expressed in instance city indices.
    pub cities: Vec<usize>,
    pub length: f64,
    /// Global-best length after each iteration.
    pub history: Vec<f64>,
}

/// Solve the sub-instance spanned by `indices` with the colony.
pub fn aco_solve(
    inst: &Instance,
    indices: &[usize],
    params: &AcoParams,
    metric: MetricMode,
    seed: u64,
) -> Result<AcoResult, AcoError> {
    let dist = sub_matrix(inst, indices, metric);
    let result = aco_on_matrix(&dist, params, None, seed)?;
    Ok(into_result(result, indices))
}

/// Like [`aco_solve`], but seeded with an incumbent tour (instance indices,
/// covering exactly `indices`) that starts as the global best and receives
/// the first deposit.
pub fn aco_polish(
    inst: &Instance,
    indices: &[usize],
    incumbent: &[usize],
    params: &AcoParams,
    metric: MetricMode,
    seed: u64,
) -> Result<AcoResult, AcoError> {
    let mut local_of = vec![usize::MAX; inst.dimension()];
    for (p, &c) in indices.iter().enumerate() {
        local_of[c] = p;
    }
    let local: Vec<usize> = incumbent.iter().map(|&c| local_of[c]).collect();
    let start = Tour::new(local).map_err(|_| AcoError::InvalidParams("incumbent does not cover indices".into()))?;
    let dist = sub_matrix(inst, indices, metric);
    let result = aco_on_matrix(&dist, params, Some(start), seed)?;
    Ok(into_result(result, indices))
}

fn into_result((tour, length, history): (Tour, f64, Vec<f64>), indices: &[usize]) -> AcoResult {
    let cities = tour.order().iter().map(|&p| indices[p]).collect();
    AcoResult { tour, cities, length, history }
}

pub(crate) fn sub_matrix(inst: &Instance, indices: &[usize], metric: MetricMode) -> DistanceMatrix {
    let coords = indices.iter().map(|&i| inst.coord(i)).collect();
    let sub = Instance::new(inst.name(), inst.edge_weight_type(), coords);
    match sub {
        Ok(sub) => sub.distance_matrix(metric),
        Err(_) => panic!("sub-instance needs at least two cities"),
    }
}

pub(crate) fn aco_on_matrix(
    dist: &DistanceMatrix,
    params: &AcoParams,
    incumbent: Option<Tour>,
    seed: u64,
) -> Result<(Tour, f64, Vec<f64>), AcoError> {
    params.validate()?;
    let n = dist.len();
    if n < 2 {
        return Err(AcoError::TooFewCities(n));
    }
    let mut tau = PheromoneMatrix::uniform(n, params.tau0);
    let mut best: Option<(Tour, f64)> = None;
    if let Some(t) = incumbent {
        let len = dist.cycle_length(t.order());
        if len > 0.0 {
            update_pheromone(&mut tau, &t, len, params);
        }
        best = Some((t, len));
    }
    let mut history = Vec::with_capacity(params.iterations);
    for it in 0..params.iterations {
        let weights = weight_table(&tau, dist, params);
        let iteration_best = (0..params.n_ants)
            .map(|ant| {
                let mut r: Stream = rng::substream(seed, &[it as u64, ant as u64]);
                let t = construct_with_weights(n, &weights, params.q0, &mut r);
                let len = dist.cycle_length(t.order());
                (t, len)
            })
            .reduce(|a, b| if b.1 < a.1 { b } else { a })
            .expect("n_ants >= 1");
        if best.as_ref().is_none_or(|(_, l)| iteration_best.1 < *l) {
            best = Some(iteration_best);
        }
        let (bt, bl) = best.as_ref().expect("set above");
        if *bl > 0.0 {
            update_pheromone(&mut tau, bt, *bl, params);
        }
        history.push(*bl);
    }
    let (tour, length) = match best {
        Some(b) => b,
        None => {
            let t = Tour::identity(n);
            let l = dist.cycle_length(t.order());
            (t, l)
        }
    };
    Ok((tour, length, history))
}
