//! The experiment subcommands as library calls.

use std::collections::HashMap;
use std::path::Path;

use qaco::error_model::{estimate_circuit_error, heron_4city_preset, CircuitErrorReport, LayerSpec};
use qaco::{Instance, MetricMode, NoiseKind, NoiseSpec};

use crate::config::{metric_name, RunConfig, SolverKind};
use crate::plot::{line_chart, tour_plot, Series};
use crate::records::{write_file, write_results, RunRecord, Table};
use crate::run::{grid, run_cells, Cell};
use crate::stats::{deviation_pct, median};
use crate::BenchError;

/// Published optima under the canonical TSPLIB metric.
pub fn known_optimum(dataset: &str, metric: MetricMode) -> Option<f64> {
    if metric != MetricMode::TsplibCanonical {
        return None;
    }
    let v = match dataset {
        "ulysses16" => 6859.0,
        "ulysses22" => 7013.0,
        "bayg29" => 9073.0,
        "eil51" => 426.0,
        "berlin52" => 7542.0,
        "eil76" => 538.0,
        _ => return None,
    };
    Some(v)
}

pub fn load_instances(cfg: &RunConfig) -> Result<Vec<Instance>, BenchError> {
    let instances: Vec<Instance> = cfg.instances.iter().map(|s| s.load()).collect::<Result<_, _>>()?;
    let mut seen = std::collections::HashSet::new();
    for inst in &instances {
        if !seen.insert(inst.name()) {
            return Err(BenchError::Config(format!("dataset `{}` given twice", inst.name())));
        }
    }
    Ok(instances)
}

fn by_name(instances: &[Instance]) -> HashMap<String, Instance> {
    instances.iter().map(|i| (i.name().to_string(), i.clone())).collect()
}

fn lengths(records: &[RunRecord], dataset: &str, solver: SolverKind) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.dataset == dataset && r.solver == solver)
        .map(|r| r.length)
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Solve each instance with each configured solver and seed.
pub fn cmd_solve(cfg: &RunConfig) -> Result<Vec<RunRecord>, BenchError> {
    cfg.validate()?;
    let instances = load_instances(cfg)?;
    let records = run_cells(&instances, &grid(instances.len(), &cfg.solvers, &cfg.seeds, cfg.noise), cfg)?;
    write_results(&cfg.out, &records, &by_name(&instances))?;
    for inst in &instances {
        for &solver in &cfg.solvers {
            let best = records
                .iter()
                .filter(|r| r.dataset == inst.name() && r.solver == solver)
                .min_by(|a, b| a.length.total_cmp(&b.length));
            if let Some(r) = best {
                let title = format!("{} {} seed {} length {}", r.dataset, r.solver, r.seed, r.length);
                let file = cfg.out.join("plots").join(format!("tour_{}_{}.svg", r.dataset, r.solver));
                write_file(&file, &tour_plot(&title, inst, &r.tour))?;
            }
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub dataset: String,
    pub optimum: Option<f64>,
    /// Median over seeds, in the order of [`SolverKind::ALL`].
    pub medians: [Option<f64>; 3],
}

impl CompareRow {
    pub fn median(&self, solver: SolverKind) -> Option<f64> {
        self.medians[SolverKind::ALL.iter().position(|&s| s == solver).expect("listed solver")]
    }
}

pub fn compare_table(rows: &[CompareRow]) -> Table {
    Table {
        header: ["dataset", "optimum", "ACO", "QACO", "ClusteredACO"].map(String::from).to_vec(),
        rows: rows
            .iter()
            .map(|r| {
                let mut row = vec![r.dataset.clone(), fmt_opt(r.optimum)];
                row.extend(r.medians.iter().map(|m| fmt_opt(*m)));
                row
            })
            .collect(),
    }
}

/// Median lengths per dataset and solver, written to `compare.csv`.
pub fn cmd_compare(cfg: &RunConfig) -> Result<(Vec<RunRecord>, Vec<CompareRow>), BenchError> {
    cfg.validate()?;
    let instances = load_instances(cfg)?;
    let records = run_cells(&instances, &grid(instances.len(), &cfg.solvers, &cfg.seeds, cfg.noise), cfg)?;
    write_results(&cfg.out, &records, &by_name(&instances))?;

    let rows: Vec<CompareRow> = instances
        .iter()
        .map(|inst| CompareRow {
            dataset: inst.name().to_string(),
            optimum: known_optimum(inst.name(), cfg.metric),
            medians: SolverKind::ALL.map(|s| median(&lengths(&records, inst.name(), s))),
        })
        .collect();
    write_file(&cfg.out.join("compare.csv"), &compare_table(&rows).to_csv()?)?;

    let series: Vec<Series> = SolverKind::ALL
        .iter()
        .filter(|s| cfg.solvers.contains(s))
        .map(|&s| Series {
            name: s.to_string(),
            points: rows
                .iter()
                .enumerate()
                .filter_map(|(i, r)| {
                    let best = r.medians.iter().flatten().copied().fold(f64::INFINITY, f64::min);
                    r.median(s).map(|m| (i as f64, m / best))
                })
                .collect(),
        })
        .collect();
    let names: Vec<&str> = rows.iter().map(|r| r.dataset.as_str()).collect();
    let chart = line_chart(
        &format!("median length / best median ({} metric)", metric_name(cfg.metric)),
        &format!("dataset: {}", names.join(", ")),
        "relative length",
        &series,
    );
    write_file(&cfg.out.join("plots").join("compare.svg"), &chart)?;
    Ok((records, rows))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub dataset: String,
    pub ideal: f64,
    /// Median per noise level, in the order of the configured levels.
    pub noisy: Vec<f64>,
    pub deviation_pct: f64,
}

pub fn sweep_table(levels: &[f64], rows: &[SweepRow]) -> Table {
    let mut header = vec!["dataset".to_string(), "ideal".to_string()];
    header.extend(levels.iter().map(|l| format!("{}%", (l * 100.0 * 1e9).round() / 1e9)));
    header.push("deviation_pct_max_over_levels".into());
    Table {
        header,
        rows: rows
            .iter()
            .map(|r| {
                let mut row = vec![r.dataset.clone(), r.ideal.to_string()];
                row.extend(r.noisy.iter().map(f64::to_string));
                row.push(r.deviation_pct.to_string());
                row
            })
            .collect(),
    }
}

/// QACO-hybrid at each noise level plus the noiseless baseline.
pub fn cmd_noise_sweep(cfg: &RunConfig) -> Result<(Vec<RunRecord>, Vec<SweepRow>), BenchError> {
    let kind = cfg.noise.kind;
    if kind == NoiseKind::None {
        return Err(BenchError::Config("noise-sweep needs --noise bitflip or thermal".into()));
    }
    let cfg = RunConfig { solvers: vec![SolverKind::QacoHybrid], noise: NoiseSpec::none(), ..cfg.clone() };
    cfg.validate()?;
    let instances = load_instances(&cfg)?;
    let mut cells: Vec<Cell> = Vec::new();
    for i in 0..instances.len() {
        let settings = std::iter::once(Ok(NoiseSpec::none())).chain(cfg.levels.iter().map(|&l| NoiseSpec::new(kind, l)));
        for noise in settings {
            let noise = noise.map_err(|e| BenchError::Config(e.to_string()))?;
            cells.extend(grid(1, &cfg.solvers, &cfg.seeds, noise).into_iter().map(|c| Cell { instance: i, ..c }));
        }
    }
    let records = run_cells(&instances, &cells, &cfg)?;
    write_results(&cfg.out, &records, &by_name(&instances))?;

    let median_at = |dataset: &str, noise: NoiseKind, rate: f64| {
        let v: Vec<f64> = records
            .iter()
            .filter(|r| r.dataset == dataset && r.noise_kind == noise && r.noise_rate == rate)
            .map(|r| r.length)
            .collect();
        median(&v).expect("every level has seeds")
    };
    let rows: Vec<SweepRow> = instances
        .iter()
        .map(|inst| {
            let ideal = median_at(inst.name(), NoiseKind::None, 0.0);
            let noisy: Vec<f64> = cfg.levels.iter().map(|&l| median_at(inst.name(), kind, l)).collect();
            SweepRow { dataset: inst.name().to_string(), ideal, deviation_pct: deviation_pct(ideal, &noisy), noisy }
        })
        .collect();
    write_file(&cfg.out.join(format!("noise_sweep_{}.csv", kind.as_str())), &sweep_table(&cfg.levels, &rows).to_csv()?)?;

    let series: Vec<Series> = rows
        .iter()
        .map(|r| Series {
            name: r.dataset.clone(),
            points: cfg.levels.iter().zip(&r.noisy).map(|(&l, &m)| (l * 100.0, (m - r.ideal).abs() / r.ideal * 100.0)).collect(),
        })
        .collect();
    let chart = line_chart(&format!("{} noise: deviation from noiseless median", kind.as_str()), "noise level (%)", "deviation (%)", &series);
    write_file(&cfg.out.join("plots").join(format!("noise_sweep_{}.svg", kind.as_str())), &chart)?;
    Ok((records, rows))
}

pub const PRESETS: [&str; 1] = ["heron-4city"];

/// Layers from a named preset.
pub fn preset_layers(name: &str, measurement_rate: f64) -> Result<Vec<LayerSpec>, BenchError> {
    match name {
        "heron-4city" => {
            if !(0.0..=1.0).contains(&measurement_rate) {
                return Err(BenchError::Config(format!("measurement rate {measurement_rate} outside [0, 1]")));
            }
            Ok(heron_4city_preset(measurement_rate))
        }
        _ => Err(BenchError::Config(format!("unknown preset `{name}` (known: {})", PRESETS.join(", ")))),
    }
}

pub fn read_layers(path: &Path) -> Result<Vec<LayerSpec>, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| BenchError::Format(format!("{}: {e}", path.display())))
}

/// Evaluate the layered error estimate and, if `out` is given, write `error_report.json` there.
pub fn cmd_estimate_error(layers: &[LayerSpec], out: Option<&Path>) -> Result<CircuitErrorReport, BenchError> {
    let report = estimate_circuit_error(layers).map_err(|e| BenchError::Config(e.to_string()))?;
    if let Some(dir) = out {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        write_file(&dir.join("error_report.json"), &text)?;
    }
    Ok(report)
}

/// Write a random instance in TSPLIB form.
pub fn cmd_gen_random(n: usize, seed: u64, bound: f64, out: &Path) -> Result<Instance, BenchError> {
    let inst = qaco::gen_random_instance(n, seed, bound).map_err(|e| BenchError::Instance(e.to_string()))?;
    write_file(out, &inst.to_tsplib())?;
    Ok(inst)
}
