//! Quantum ant colony leaf solver for subproblems of up to four cities.
//!
//! A tour over `k` cities is encoded position by position, two bits per
//! city (big-endian within a pair), so `k = 4` uses the eight path qubits of
//! the register. Pheromone lives in the register's `Ry` angles: each
//! iteration the ants are measurement samples of the register, infeasible
//! samples are repaired from a pool of good tours weighted by inverse
//! Hamming distance, and the angles are rotated by a fixed lookup table that
//! compares the iteration best with the global best. When the global best
//! stalls, an ancilla measurement decides whether a sample gets one bit
//! flipped.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{self, AngleVector, BitString, NoiseSpec, THETA_MAX, THETA_MIN};
use crate::rng::{self, Stream};
use crate::tsplib::{DistanceMatrix, Instance, MetricMode, Tour};

/// Cities the eight path qubits can encode.
pub const MAX_CITIES: usize = 4;
/// Iterations during which infeasible samples are replaced by random tours.
pub const RANDOM_FEASIBLE_WINDOW: usize = 10;
const BITS_PER_CITY: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QacoError {
    #[error("need at least 2 cities, got {0}")]
    TooFewCities(usize),
    #[error("at most {MAX_CITIES} cities fit the register, got {0}")]
    TooManyCities(usize),
    #[error("bit string length {found} does not match expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

/// Encode a tour as `2k` bits: for each position, the city index in binary,
/// high bit first.
pub fn encode_tour(tour: &Tour, k: usize) -> Result<BitString, QacoError> {
    if k > MAX_CITIES {
        return Err(QacoError::TooManyCities(k));
    }
    if tour.len() != k {
        return Err(QacoError::LengthMismatch { expected: k, found: tour.len() });
    }
    let mut bits = BitString::zeros(BITS_PER_CITY * k);
    for (pos, &city) in tour.order().iter().enumerate() {
        bits.set(2 * pos, city & 0b10 != 0);
        bits.set(2 * pos + 1, city & 0b01 != 0);
    }
    Ok(bits)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Feasible(Tour),
    Infeasible(BitString),
}

/// Read `2k` bits back into a tour, if they spell a permutation of `0..k`.
pub fn decode_bits(bits: &BitString, k: usize) -> Result<Decoded, QacoError> {
    if bits.len() != BITS_PER_CITY * k {
        return Err(QacoError::LengthMismatch { expected: BITS_PER_CITY * k, found: bits.len() });
    }
    let order: Vec<usize> =
        (0..k).map(|p| (usize::from(bits.get(2 * p)) << 1) | usize::from(bits.get(2 * p + 1))).collect();
    Ok(match Tour::new(order) {
        Ok(t) => Decoded::Feasible(t),
        Err(_) => Decoded::Infeasible(bits.clone()),
    })
}

pub fn hamming(a: &BitString, b: &BitString) -> Result<usize, QacoError> {
    if a.len() != b.len() {
        return Err(QacoError::LengthMismatch { expected: a.len(), found: b.len() });
    }
    Ok(a.as_slice().iter().zip(b.as_slice()).filter(|(x, y)| x != y).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationRow {
    pub x: bool,
    pub b: bool,
    /// Whether the iteration best is longer than the global best.
    pub worse: bool,
    pub delta: f64,
    /// Starred rows flip direction with the sign of `cos θ`.
    pub starred: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationTable {
    rows: [RotationRow; 8],
}

impl Default for RotationTable {
    fn default() -> Self {
        let row = |x, b, worse, delta: f64, starred| RotationRow { x, b, worse, delta: delta * PI, starred };
        Self {
            rows: [
                row(false, false, true, -0.01, true),
                row(false, false, false, 0.04, false),
                row(false, true, true, -0.05, true),
                row(false, true, false, 0.07, false),
                row(true, false, true, 0.05, true),
                row(true, false, false, -0.07, false),
                row(true, true, true, 0.01, true),
                row(true, true, false, -0.04, false),
            ],
        }
    }
}

impl RotationTable {
    pub fn rows(&self) -> &[RotationRow; 8] {
        &self.rows
    }

    pub fn lookup(&self, x: bool, b: bool, worse: bool) -> &RotationRow {
        self.rows
            .iter()
            .find(|r| r.x == x && r.b == b && r.worse == worse)
            .expect("table covers all eight combinations")
    }

    /// Signed rotation for a qubit currently at `theta`.
    pub fn delta(&self, x: bool, b: bool, worse: bool, theta: f64) -> f64 {
        let row = self.lookup(x, b, worse);
        if row.starred && theta.sin() * theta.cos() < 0.0 {
            -row.delta
        } else {
            row.delta
        }
    }
}

/// Pheromone held as the path register's rotation angles, two per city.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PheromoneRegister {
    angles: AngleVector,
}

impl PheromoneRegister {
    /// Every angle at π/2: all bit strings equally likely.
    pub fn new(k: usize) -> Result<Self, QacoError> {
        if k > MAX_CITIES {
            return Err(QacoError::TooManyCities(k));
        }
        if k < 2 {
            return Err(QacoError::TooFewCities(k));
        }
        let angles = AngleVector::new(vec![FRAC_PI_2; BITS_PER_CITY * k]).expect("2k <= 8 qubits");
        Ok(Self { angles })
    }

    /// Register with explicit angles, clamped into `[THETA_MIN, THETA_MAX]`.
    pub fn from_angles(thetas: Vec<f64>) -> Result<Self, QacoError> {
        let clamped = thetas.into_iter().map(|t| t.clamp(THETA_MIN, THETA_MAX)).collect();
        AngleVector::new(clamped)
            .map(|angles| Self { angles })
            .map_err(|e| QacoError::InvalidParams(e.to_string()))
    }

    pub fn angles(&self) -> &AngleVector {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn in_bounds(&self) -> bool {
        self.angles.thetas().iter().all(|t| (THETA_MIN..=THETA_MAX).contains(t))
    }
}

/// Rotate every qubit of `reg` by the table entry for `(x_i, b_i, fx > fb)`.
pub fn rotation_update(
    reg: &mut PheromoneRegister,
    x: &BitString,
    b: &BitString,
    fx: f64,
    fb: f64,
    table: &RotationTable,
) -> Result<(), QacoError> {
    let n = reg.len();
    for s in [x, b] {
        if s.len() != n {
            return Err(QacoError::LengthMismatch { expected: n, found: s.len() });
        }
    }
    let worse = fx > fb;
    for (i, theta) in reg.angles.thetas_mut().iter_mut().enumerate() {
        let delta = table.delta(x.get(i), b.get(i), worse, *theta);
        *theta = (*theta + delta).clamp(THETA_MIN, THETA_MAX);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub tour: Tour,
    pub bits: BitStringRepr,
    pub length: f64,
}

/// Serialisable form of a bit string, e.g. `"00011011"`.
pub type BitStringRepr = String;

/// The best distinct feasible tours seen so far, shortest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPool {
    capacity: usize,
    entries: Vec<(Tour, BitString, f64)>,
}

impl SolutionPool {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "pool capacity must be positive");
        Self { capacity, entries: Vec::with_capacity(capacity + 1) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Tour, &BitString, f64)> {
        self.entries.iter().map(|(t, b, l)| (t, b, *l))
    }

    /// Admit a feasible tour if it is new and beats the worst entry (or the
    /// pool has room). Returns whether it was admitted.
    pub fn offer(&mut self, tour: &Tour, bits: &BitString, length: f64) -> bool {
        if self.entries.iter().any(|(t, _, _)| t == tour) {
            return false;
        }
        if self.entries.len() == self.capacity && length >= self.entries.last().expect("full pool").2 {
            return false;
        }
        let pos = self.entries.partition_point(|(_, _, l)| *l <= length);
        self.entries.insert(pos, (tour.clone(), bits.clone(), length));
        self.entries.truncate(self.capacity);
        true
    }

    pub fn snapshot(&self) -> Vec<PoolEntry> {
        self.entries
            .iter()
            .map(|(t, b, l)| PoolEntry { tour: t.clone(), bits: b.to_string(), length: *l })
            .collect()
    }
}

/// Selection probabilities `p_i = (d_i · Σ_j 1/d_j)⁻¹` over the pool, where
/// `d_i` is the Hamming distance from `bits` to entry `i`.
///
/// An entry at distance zero (only possible for a feasible `bits`) takes all
/// the mass, shared evenly with any other zero-distance entries.
pub fn repair_probabilities(bits: &BitString, pool: &SolutionPool) -> Result<Vec<f64>, QacoError> {
    let d: Vec<usize> = pool.entries.iter().map(|(_, e, _)| hamming(bits, e)).collect::<Result<_, _>>()?;
    Ok(inverse_distance_weights(&d))
}

/// The inverse-distance rule on raw distances.
pub fn inverse_distance_weights(d: &[usize]) -> Vec<f64> {
    if d.contains(&0) {
        let zeros = d.iter().filter(|&&x| x == 0).count() as f64;
        return d.iter().map(|&x| if x == 0 { 1.0 / zeros } else { 0.0 }).collect();
    }
    let inv_sum: f64 = d.iter().map(|&x| 1.0 / x as f64).sum();
    d.iter().map(|&x| 1.0 / (x as f64 * inv_sum)).collect()
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let mut u: f64 = rng.gen();
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    probs.len() - 1
}

/// Replace an infeasible sample by a feasible tour.
///
/// During the first [`RANDOM_FEASIBLE_WINDOW`] iterations, or while the
/// pool is empty, this is a uniformly random permutation; afterwards a pool
/// entry is drawn by [`repair_probabilities`].
pub fn repair_infeasible<R: Rng + ?Sized>(
    bits: &BitString,
    pool: &SolutionPool,
    iteration: usize,
    k: usize,
    rng: &mut R,
) -> Result<Tour, QacoError> {
    if iteration <= RANDOM_FEASIBLE_WINDOW || pool.is_empty() {
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(rng);
        return Ok(Tour::new(order).expect("shuffled identity"));
    }
    let probs = repair_probabilities(bits, pool)?;
    let total: f64 = probs.iter().sum();
    debug_assert!((total - 1.0).abs() < 1e-12, "repair probabilities sum to {total}");
    Ok(pool.entries[sample_index(&probs, rng)].0.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QacoParams {
    pub n_ants: usize,
    pub max_iter: usize,
    /// Iterations without improvement before mutation switches on.
    pub stall_window: usize,
    /// Iterations without improvement before the search stops.
    pub convergence_window: usize,
    /// Upper end of the uniform mutation angle range, lower end is 0.
    pub mutation_max_angle: f64,
    pub pool_capacity: usize,
}

impl Default for QacoParams {
    fn default() -> Self {
        Self {
            n_ants: 6,
            max_iter: 1000,
            stall_window: 50,
            convergence_window: 200,
            mutation_max_angle: FRAC_PI_2,
            pool_capacity: 10,
        }
    }
}

impl QacoParams {
    pub fn validate(&self) -> Result<(), QacoError> {
        let bad = |m: &str| Err(QacoError::InvalidParams(m.into()));
        if self.n_ants == 0 || self.max_iter == 0 || self.pool_capacity == 0 {
            return bad("n_ants, max_iter and pool_capacity must be positive");
        }
        if self.stall_window == 0 || self.convergence_window == 0 {
            return bad("windows must be positive");
        }
        if !(0.0..=FRAC_PI_2).contains(&self.mutation_max_angle) {
            return bad("mutation angle range must lie within [0, pi/2]");
        }
        Ok(())
    }
}

/// Flip one uniformly chosen bit if the ancilla prepared with `Ry(theta)`
/// reads 1. Returns whether it fired.
pub fn mutate_with_angle<R: Rng + ?Sized>(bits: &mut BitString, theta: f64, noise: &NoiseSpec, rng: &mut R) -> bool {
    let fired = quantum::sample_ancilla(theta, noise, rng).expect("mutation angle within [0, pi/2]");
    if fired && !bits.is_empty() {
        let i = rng.gen_range(0..bits.len());
        bits.flip(i);
    }
    fired
}

/// Mutate a sample once the global best has stalled for `stall_window`
/// iterations, with a fresh mutation angle drawn from `[0, mutation_max_angle]`.
pub fn maybe_mutate<R: Rng + ?Sized>(
    bits: &mut BitString,
    stagnant_iters: usize,
    params: &QacoParams,
    noise: &NoiseSpec,
    rng: &mut R,
) -> bool {
    if stagnant_iters < params.stall_window {
        return false;
    }
    let theta = rng.gen_range(0.0..=params.mutation_max_angle);
    mutate_with_angle(bits, theta, noise, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QacoResult {
    /// Tour over local positions `0..k`.
    pub tour: Tour,
    /// The same tour in instance city indices.
    pub cities: Vec<usize>,
    pub length: f64,
    pub iterations: usize,
    /// Global-best length after each iteration.
    pub history: Vec<f64>,
    pub mutations: usize,
    pub repairs: usize,
}

/// Solve the sub-instance spanned by `indices` (2 to 4 cities).
pub fn qaco_solve(
    inst: &Instance,
    indices: &[usize],
    params: &QacoParams,
    noise: &NoiseSpec,
    metric: MetricMode,
    seed: u64,
) -> Result<QacoResult, QacoError> {
    let k = indices.len();
    if k < 2 {
        return Err(QacoError::TooFewCities(k));
    }
    if k > MAX_CITIES {
        return Err(QacoError::TooManyCities(k));
    }
    let dist = crate::aco::sub_matrix(inst, indices, metric);
    let mut result = qaco_on_matrix(&dist, params, noise, seed)?;
    result.cities = result.tour.order().iter().map(|&p| indices[p]).collect();
    Ok(result)
}

/// Solve over a local distance matrix; `cities` is left in local indices.
pub fn qaco_on_matrix(
    dist: &DistanceMatrix,
    params: &QacoParams,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<QacoResult, QacoError> {
    params.validate()?;
    let k = dist.len();
    if k < 2 {
        return Err(QacoError::TooFewCities(k));
    }
    if k > MAX_CITIES {
        return Err(QacoError::TooManyCities(k));
    }
    if k == 2 {
        let tour = Tour::identity(2);
        let length = dist.cycle_length(tour.order());
        return Ok(QacoResult {
            cities: tour.order().to_vec(),
            tour,
            length,
            iterations: 0,
            history: vec![length],
            mutations: 0,
            repairs: 0,
        });
    }

    let mut rng: Stream = rng::substream(seed, &[]);
    let table = RotationTable::default();
    let mut register = PheromoneRegister::new(k)?;
    let mut pool = SolutionPool::new(params.pool_capacity);
    let mut best: Option<(Tour, BitString, f64)> = None;
    let mut history = Vec::new();
    let (mut stagnant, mut mutations, mut repairs, mut iterations) = (0usize, 0usize, 0usize, 0usize);

    for iteration in 1..=params.max_iter {
        iterations = iteration;
        let mut iteration_best: Option<(Tour, BitString, f64)> = None;
        for _ in 0..params.n_ants {
            let mut bits = quantum::noisy_sample(register.angles(), noise, &mut rng);
            if maybe_mutate(&mut bits, stagnant, params, noise, &mut rng) {
                mutations += 1;
            }
            let tour = match decode_bits(&bits, k)? {
                Decoded::Feasible(t) => t,
                Decoded::Infeasible(raw) => {
                    repairs += 1;
                    repair_infeasible(&raw, &pool, iteration, k, &mut rng)?
                }
            };
            let encoded = encode_tour(&tour, k)?;
            let length = dist.cycle_length(tour.order());
            pool.offer(&tour, &encoded, length);
            if iteration_best.as_ref().is_none_or(|(_, _, l)| length < *l) {
                iteration_best = Some((tour, encoded, length));
            }
        }
        let (it_tour, it_bits, it_len) = iteration_best.expect("n_ants >= 1");
        match &best {
            Some((_, _, l)) if it_len >= *l => stagnant += 1,
            _ => {
                best = Some((it_tour.clone(), it_bits.clone(), it_len));
                stagnant = 0;
            }
        }
        let (_, best_bits, best_len) = best.as_ref().expect("set above");
        history.push(*best_len);
        if stagnant >= params.convergence_window {
            break;
        }
        rotation_update(&mut register, &it_bits, best_bits, it_len, *best_len, &table)?;
        debug_assert!(register.in_bounds());
    }

    let (tour, _, length) = best.expect("at least one iteration");
    Ok(QacoResult { cities: tour.order().to_vec(), tour, length, iterations, history, mutations, repairs })
}
