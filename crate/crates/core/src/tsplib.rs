//! TSPLIB instances, distance conventions and tours.
//!
//! Only the `NODE_COORD_SECTION` subset with `EUC_2D` or `GEO` edge weights
//! is understood. Node ids are remapped from TSPLIB's 1-based numbering to
//! 0-based indices at parse time.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TsplibError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported EDGE_WEIGHT_TYPE `{0}` (expected EUC_2D or GEO)")]
    UnsupportedEdgeWeightType(String),
    #[error("DIMENSION is {expected} but {found} coordinates were read")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-numeric coordinate on line {line}: `{text}`")]
    NonNumericCoordinate { line: usize, text: String },
    #[error("node id {id} on line {line} is out of range or repeated")]
    InvalidNodeId { line: usize, id: String },
    #[error("city index {index} out of range for {n} cities")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid tour: not a permutation of 0..{n}")]
    InvalidTour { n: usize },
    #[error("instance needs at least 2 cities, got {0}")]
    InvalidCount(usize),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeWeightType {
    #[serde(rename = "EUC_2D")]
    Euc2d,
    #[serde(rename = "GEO")]
    Geo,
}

impl EdgeWeightType {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeWeightType::Euc2d => "EUC_2D",
            EdgeWeightType::Geo => "GEO",
        }
    }
}

/// Which distance convention a run is measured under.
///
/// `TsplibCanonical` follows the TSPLIB formulas for the instance's edge
/// weight type (rounded `EUC_2D`, great-circle `GEO`), which is what the
/// published TSPLIB optima assume. `PlainEuclidean` ignores the edge weight
/// type and takes the unrounded Euclidean distance between raw coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum MetricMode {
    #[default]
    TsplibCanonical,
    PlainEuclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    name: String,
    edge_weight_type: EdgeWeightType,
    coords: Vec<(f64, f64)>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        edge_weight_type: EdgeWeightType,
        coords: Vec<(f64, f64)>,
    ) -> Result<Self, TsplibError> {
        if coords.len() < 2 {
            return Err(TsplibError::InvalidCount(coords.len()));
        }
        if let Some(i) = coords.iter().position(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(TsplibError::InvalidInstance(format!("coordinate {i} is not finite")));
        }
        Ok(Self { name: name.into(), edge_weight_type, coords })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn edge_weight_type(&self) -> EdgeWeightType {
        self.edge_weight_type
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> (f64, f64) {
        self.coords[i]
    }

    /// Distance between cities `i` and `j` under `mode`.
    pub fn distance(&self, i: usize, j: usize, mode: MetricMode) -> Result<f64, TsplibError> {
        let n = self.dimension();
        for index in [i, j] {
            if index >= n {
                return Err(TsplibError::IndexOutOfRange { index, n });
            }
        }
        Ok(self.dist(i, j, mode))
    }

    /// Unchecked distance; panics on out-of-range indices.
    pub(crate) fn dist(&self, i: usize, j: usize, mode: MetricMode) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = (self.coords[i], self.coords[j]);
        match (mode, self.edge_weight_type) {
            (MetricMode::PlainEuclidean, _) => euclidean(a, b),
            (MetricMode::TsplibCanonical, EdgeWeightType::Euc2d) => nint(euclidean(a, b)),
            (MetricMode::TsplibCanonical, EdgeWeightType::Geo) => geo_distance(a, b),
        }
    }

    /// Full symmetric distance matrix under `mode`.
    pub fn distance_matrix(&self, mode: MetricMode) -> DistanceMatrix {
        let n = self.dimension();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.dist(i, j, mode);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        DistanceMatrix { n, data }
    }

    /// Cyclic length of `tour` under `mode`.
    pub fn tour_length(&self, tour: &Tour, mode: MetricMode) -> Result<f64, TsplibError> {
        if tour.len() != self.dimension() {
            return Err(TsplibError::InvalidTour { n: self.dimension() });
        }
        Ok(cycle_length(tour.order(), |a, b| self.dist(a, b, mode)))
    }

    /// Render as a TSPLIB `NODE_COORD_SECTION` file.
    ///
    /// Coordinates are written in Rust's shortest round-trip float format, so
    /// parsing the output yields bit-identical coordinates.
    pub fn to_tsplib(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME : {}", self.name);
        let _ = writeln!(out, "TYPE : TSP");
        let _ = writeln!(out, "DIMENSION : {}", self.dimension());
        let _ = writeln!(out, "EDGE_WEIGHT_TYPE : {}", self.edge_weight_type.as_str());
        let _ = writeln!(out, "NODE_COORD_SECTION");
        for (i, (x, y)) in self.coords.iter().enumerate() {
            let _ = writeln!(out, "{} {:?} {:?}", i + 1, x, y);
        }
        out.push_str("EOF\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn cycle_length(&self, order: &[usize]) -> f64 {
        cycle_length(order, |a, b| self.get(a, b))
    }
}

pub(crate) fn cycle_length(order: &[usize], mut dist: impl FnMut(usize, usize) -> f64) -> f64 {
    match order.len() {
        0 | 1 => 0.0,
        n => (0..n).map(|p| dist(order[p], order[(p + 1) % n])).sum(),
    }
}

fn euclidean(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn nint(x: f64) -> f64 {
    (x + 0.5).floor()
}

// TSPLIB's truncated pi; the reference optima depend on it.
#[allow(clippy::approx_constant)]
const GEO_PI: f64 = 3.141592;
const EARTH_RADIUS: f64 = 6378.388;

/// DDD.MM degree-minute coordinate to radians, as in the TSPLIB reference code.
fn geo_radians(v: f64) -> f64 {
    let deg = v.trunc();
    let min = v - deg;
    GEO_PI * (deg + 5.0 * min / 3.0) / 180.0
}

fn geo_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat_a, lon_a) = (geo_radians(a.0), geo_radians(a.1));
    let (lat_b, lon_b) = (geo_radians(b.0), geo_radians(b.1));
    let q1 = (lon_a - lon_b).cos();
    let q2 = (lat_a - lat_b).cos();
    let q3 = (lat_a + lat_b).cos();
    (EARTH_RADIUS * (0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)).acos() + 1.0).trunc()
}

/// A closed tour: a permutation of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Tour {
    order: Vec<usize>,
}

impl Tour {
    pub fn new(order: Vec<usize>) -> Result<Self, TsplibError> {
        let n = order.len();
        if !validate_tour(&order, n) {
            return Err(TsplibError::InvalidTour { n });
        }
        Ok(Self { order })
    }

    /// The identity tour `0, 1, .., n-1`.
    pub fn identity(n: usize) -> Self {
        Self { order: (0..n).collect() }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn into_order(self) -> Vec<usize> {
        self.order
    }
}

impl TryFrom<Vec<usize>> for Tour {
    type Error = TsplibError;

    fn try_from(order: Vec<usize>) -> Result<Self, Self::Error> {
        Tour::new(order)
    }
}

impl From<Tour> for Vec<usize> {
    fn from(t: Tour) -> Self {
        t.order
    }
}

/// True iff `order` is a permutation of `0..n`.
pub fn validate_tour(order: &[usize], n: usize) -> bool {
    if order.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &c in order {
        if c >= n || seen[c] {
            return false;
        }
        seen[c] = true;
    }
    true
}

/// Parse a TSPLIB `NODE_COORD_SECTION` instance.
pub fn parse_instance(text: &str) -> Result<Instance, TsplibError> {
    let mut name = String::from("unnamed");
    let mut dimension: Option<usize> = None;
    let mut edge_weight_type: Option<EdgeWeightType> = None;
    let mut lines = text.lines().enumerate();
    let mut in_coords = false;

    for (_, raw) in lines.by_ref() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "NODE_COORD_SECTION" {
            in_coords = true;
            break;
        }
        if line == "EOF" {
            break;
        }
        let (key, value) = line
            .split_once(':')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| TsplibError::MalformedHeader(format!("expected `KEY : VALUE`, got `{line}`")))?;
        match key {
            "NAME" => name = value.to_string(),
            "DIMENSION" => {
                let d = value
                    .parse::<usize>()
                    .map_err(|_| TsplibError::MalformedHeader(format!("bad DIMENSION `{value}`")))?;
                dimension = Some(d);
            }
            "EDGE_WEIGHT_TYPE" => {
                edge_weight_type = Some(match value {
                    "EUC_2D" => EdgeWeightType::Euc2d,
                    "GEO" => EdgeWeightType::Geo,
                    other => return Err(TsplibError::UnsupportedEdgeWeightType(other.to_string())),
                })
            }
            "TYPE" if value != "TSP" => {
                return Err(TsplibError::MalformedHeader(format!("unsupported TYPE `{value}`")))
            }
            _ => {}
        }
    }

    let dimension = dimension.ok_or_else(|| TsplibError::MalformedHeader("missing DIMENSION".into()))?;
    let edge_weight_type =
        edge_weight_type.ok_or_else(|| TsplibError::MalformedHeader("missing EDGE_WEIGHT_TYPE".into()))?;
    if !in_coords {
        return Err(TsplibError::MalformedHeader("missing NODE_COORD_SECTION".into()));
    }

    let mut coords: Vec<Option<(f64, f64)>> = vec![None; dimension];
    let mut found = 0usize;
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        let lineno = idx + 1;
        let mut fields = line.split_whitespace();
        let id_text = fields.next().unwrap_or_default();
        let (xs, ys) = match (fields.next(), fields.next(), fields.next()) {
            (Some(x), Some(y), None) => (x, y),
            _ => return Err(TsplibError::NonNumericCoordinate { line: lineno, text: line.to_string() }),
        };
        let id: usize = id_text
            .parse()
            .map_err(|_| TsplibError::InvalidNodeId { line: lineno, id: id_text.to_string() })?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| TsplibError::NonNumericCoordinate { line: lineno, text: s.to_string() })
        };
        let (x, y) = (parse(xs)?, parse(ys)?);
        found += 1;
        if found > dimension {
            return Err(TsplibError::DimensionMismatch { expected: dimension, found });
        }
        match coords.get_mut(id.wrapping_sub(1)) {
            Some(slot @ None) => *slot = Some((x, y)),
            _ => return Err(TsplibError::InvalidNodeId { line: lineno, id: id_text.to_string() }),
        }
    }
    if found != dimension {
        return Err(TsplibError::DimensionMismatch { expected: dimension, found });
    }
    let coords = coords.into_iter().map(|c| c.expect("every slot filled")).collect();
    Instance::new(name, edge_weight_type, coords)
}

/// `n` points drawn i.i.d. uniformly from `[0, bound]²`.
///
/// The generator is ChaCha8 seeded with `seed` (see [`crate::rng`]); the same
/// arguments always produce the same coordinates.
pub fn gen_random_instance(n: usize, seed: u64, bound: f64) -> Result<Instance, TsplibError> {
    if n < 2 {
        return Err(TsplibError::InvalidCount(n));
    }
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(TsplibError::InvalidInstance(format!("bound must be positive, got {bound}")));
    }
    let mut r = rng::stream(seed);
    let coords = (0..n).map(|_| (r.gen_range(0.0..=bound), r.gen_range(0.0..=bound))).collect();
    Instance::new(format!("random{n}-s{seed}"), EdgeWeightType::Euc2d, coords)
}
