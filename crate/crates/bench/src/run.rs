//! Solving experiment cells in parallel.

use std::time::Instant;

use qaco::hybrid::{solve_hybrid, HybridConfig, LeafSolver};
use qaco::{aco_solve, Instance, NoiseSpec, Tour};
use rayon::prelude::*;

use crate::config::{RunConfig, SolverKind};
use crate::records::RunRecord;
use crate::BenchError;

pub const THREADS_ENV: &str = "QACO_THREADS";

/// One independent solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    /// Position in the loaded instance list.
    pub instance: usize,
    pub solver: SolverKind,
    pub seed: u64,
    pub noise: NoiseSpec,
}

/// Thread count from `QACO_THREADS`; `None` when unset, leaving rayon's default.
pub fn thread_cap() -> Result<Option<usize>, BenchError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(BenchError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, BenchError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| BenchError::Config(e.to_string()))
}

pub fn hybrid_config(cfg: &RunConfig, leaf: LeafSolver, noise: NoiseSpec, seed: u64) -> HybridConfig {
    HybridConfig {
        leaf_solver: leaf,
        qaco: cfg.qaco.clone(),
        aco: cfg.aco.clone(),
        noise,
        metric: cfg.metric,
        refinement: cfg.refinement,
        two_opt_passes: cfg.two_opt_passes,
        polish_iterations: cfg.polish_iterations,
        seed,
        ..HybridConfig::default()
    }
}

/// Solve one cell. The recorded length is measured from the emitted tour.
pub fn run_cell(inst: &Instance, cell: &Cell, cfg: &RunConfig) -> Result<RunRecord, BenchError> {
    let started = Instant::now();
    let (order, iterations) = match cell.solver {
        SolverKind::Aco => {
            let all: Vec<usize> = (0..inst.dimension()).collect();
            let r = aco_solve(inst, &all, &cfg.aco, cfg.metric, cell.seed).map_err(|e| BenchError::Solve(e.to_string()))?;
            (r.cities, r.history.len())
        }
        SolverKind::QacoHybrid | SolverKind::ClusteredAco => {
            let leaf = if cell.solver == SolverKind::QacoHybrid { LeafSolver::Qaco } else { LeafSolver::ClassicalAco };
            let r = solve_hybrid(inst, &hybrid_config(cfg, leaf, cell.noise, cell.seed))
                .map_err(|e| BenchError::Solve(e.to_string()))?;
            (r.tour.into_order(), r.stats.leaf_iterations)
        }
    };
    let wall_ms = if cfg.omit_timing { 0 } else { started.elapsed().as_millis() as u64 };
    let tour = Tour::new(order).map_err(|e| BenchError::Solve(format!("solver emitted an invalid tour: {e}")))?;
    let length = inst.tour_length(&tour, cfg.metric).map_err(|e| BenchError::Solve(e.to_string()))?;
    Ok(RunRecord {
        dataset: inst.name().to_string(),
        solver: cell.solver,
        seed: cell.seed,
        noise_kind: cell.noise.kind,
        noise_rate: cell.noise.effective_rate(),
        length,
        iterations,
        wall_ms,
        metric: Some(cfg.metric),
        tour: tour.into_order(),
    })
}

/// Solve every cell; records come back in cell order whatever the schedule.
pub fn run_cells(instances: &[Instance], cells: &[Cell], cfg: &RunConfig) -> Result<Vec<RunRecord>, BenchError> {
    let pool = thread_pool(thread_cap()?)?;
    pool.install(|| cells.par_iter().map(|c| run_cell(&instances[c.instance], c, cfg)).collect())
}

/// Cells for every instance × solver × seed at one noise setting.
pub fn grid(n_instances: usize, solvers: &[SolverKind], seeds: &[u64], noise: NoiseSpec) -> Vec<Cell> {
    let mut cells = Vec::new();
    for instance in 0..n_instances {
        for &solver in solvers {
            for &seed in seeds {
                cells.push(Cell { instance, solver, seed, noise });
            }
        }
    }
    cells
}
