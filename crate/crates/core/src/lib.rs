//! Clustered quantum ant colony optimization for the traveling salesman
//! problem.
//!
//! Large instances are split by k-means into clusters of at most four
//! cities. Each cluster is solved by a simulated quantum ant colony whose
//! pheromone is a register of `Ry` rotation angles; the cluster tours are
//! merged and refined into one tour. A classical Ant Colony System baseline,
//! gate-noise channels and a layered circuit error estimate are included for
//! comparison experiments.

pub mod aco;
pub mod clustering;
pub mod error_model;
pub mod hybrid;
pub mod qaco;
pub mod quantum;
pub mod rng;
pub mod tsplib;

pub use aco::{aco_solve, AcoParams, AcoResult};
pub use clustering::{build_cluster_tree, kmeans, ClusterAssignment, ClusterTree, TreeParams};
pub use error_model::{estimate_circuit_error, CircuitErrorReport, LayerSpec};
pub use hybrid::{solve_hybrid, HybridConfig, HybridResult, LeafSolver, Refinement};
pub use qaco::{qaco_solve, QacoParams, QacoResult};
pub use quantum::{BitString, NoiseKind, NoiseSpec};
pub use tsplib::{gen_random_instance, parse_instance, validate_tour, Instance, MetricMode, Tour};
