//! Sweep over grids, velocity limits and discretizations, solving both the
//! trajectory-based and the Dubins problem for every cell.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tbtsp_core::costs::load_or_build;
use tbtsp_core::model::make_grid_instance;
use tbtsp_core::solver::{solve_exact_with_budget, DEFAULT_BUDGET};
use tbtsp_core::{solve_heuristic, DiscretizationScheme, Instance, KinematicLimits, SolverError, TensorKind, TourSolution};
use thiserror::Error;

/// Baseline velocity for the improvement statistics.
pub const BASELINE_VMAX: f64 = 1.5;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("spacing must be positive, got {0}")]
    BadSpacing(f64),
    #[error("grid {0}x{1} has fewer than two waypoints")]
    TinyGrid(usize, usize),
    #[error("invalid model: {0}")]
    Model(#[from] tbtsp_core::ModelError),
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("no Dubins result at v_max = {BASELINE_VMAX} for instance {label} with {headings} headings")]
    MissingBaseline { label: String, headings: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    Tbtsp,
    Ddtsp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Tbtsp => "TBTSP",
            Self::Ddtsp => "DDTSP",
        }
    }

    pub fn tensor_kind(self) -> TensorKind {
        match self {
            Self::Tbtsp => TensorKind::Tbtsp,
            Self::Ddtsp => TensorKind::Ddtsp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub grids: Vec<(usize, usize)>,
    pub spacing: f64,
    pub v_sweep: Vec<f64>,
    pub a_max: f64,
    pub heading_counts: Vec<usize>,
    pub speed_fraction_sets: Vec<Vec<f64>>,
    pub solver: SolverKind,
    pub output_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub budget: u64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    /// The benchmark protocol: three grids at 9 m spacing, five velocity
    /// limits, eight headings, three and ten speed levels.
    fn default() -> Self {
        Self {
            grids: vec![(3, 3), (3, 4), (4, 4)],
            spacing: 9.0,
            v_sweep: vec![1.0, 1.5, 2.0, 2.5, 3.0],
            a_max: 0.5,
            heading_counts: vec![8],
            speed_fraction_sets: vec![vec![0.2, 0.6, 1.0], (1..=10).map(|k| k as f64 / 10.0).collect()],
            solver: SolverKind::Exact,
            output_dir: None,
            cache_dir: None,
            budget: DEFAULT_BUDGET,
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grids.is_empty() {
            return Err(ConfigError::Empty("grids"));
        }
        if self.v_sweep.is_empty() {
            return Err(ConfigError::Empty("velocity sweep"));
        }
        if self.heading_counts.is_empty() {
            return Err(ConfigError::Empty("heading counts"));
        }
        if self.speed_fraction_sets.is_empty() {
            return Err(ConfigError::Empty("speed fraction sets"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(ConfigError::BadSpacing(self.spacing));
        }
        if let Some(&(r, c)) = self.grids.iter().find(|(r, c)| r * c < 2) {
            return Err(ConfigError::TinyGrid(r, c));
        }
        for &v in &self.v_sweep {
            let limits = KinematicLimits::new(v, self.a_max)?;
            for &h in &self.heading_counts {
                for f in &self.speed_fraction_sets {
                    DiscretizationScheme::equidistant(h, f, &limits)?;
                }
            }
        }
        Ok(())
    }
}

/// How the objective of a row was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Exact,
    Heuristic,
    /// The exact solver refused the cell; the value is heuristic.
    CapacityFallback,
    Failed(String),
}

impl RowStatus {
    pub fn name(&self) -> &str {
        match self {
            Self::Exact => "exact",
            Self::Heuristic => "heuristic",
            Self::CapacityFallback => "capacity_fallback",
            Self::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Instance label, `RxC`.
    pub label: String,
    pub method: Method,
    pub v_max: f64,
    pub headings: usize,
    /// Number of speed levels; 1 for the Dubins problem.
    pub speeds: usize,
    /// Seconds; NaN when the cell failed.
    pub objective: f64,
    pub build_time: f64,
    pub solve_time: f64,
    pub optimal: bool,
    pub status: RowStatus,
}

/// File-name friendly key of one sweep cell.
pub fn cell_label(label: &str, method: Method, v_max: f64, headings: usize, speeds: usize) -> String {
    format!("{label}_{}_v{v_max}_h{headings}_s{speeds}", method.name().to_lowercase())
}

impl ResultRow {
    pub fn cell_label(&self) -> String {
        cell_label(&self.label, self.method, self.v_max, self.headings, self.speeds)
    }
}

/// A solved tour together with the instance it belongs to.
#[derive(Debug, Clone)]
pub struct TourRecord {
    pub label: String,
    pub method: Method,
    pub instance: Instance,
    pub solution: TourSolution,
}

impl TourRecord {
    pub fn cell_label(&self) -> String {
        let scheme = self.instance.scheme();
        cell_label(&self.label, self.method, self.instance.limits().v_max(), scheme.heading_count(), scheme.speed_count())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentRun {
    pub rows: Vec<ResultRow>,
    pub tours: Vec<TourRecord>,
}

impl ExperimentRun {
    pub fn capacity_failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status == RowStatus::CapacityFallback).count()
    }
}

struct Cell {
    grid: (usize, usize),
    v_max: f64,
    headings: usize,
    method: Method,
    fractions: Vec<f64>,
}

fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &grid in &cfg.grids {
        for &v_max in &cfg.v_sweep {
            for &headings in &cfg.heading_counts {
                // the Dubins problem has no speed dimension, so one cell covers every speed set
                out.push(Cell { grid, v_max, headings, method: Method::Ddtsp, fractions: vec![1.0] });
                for fractions in &cfg.speed_fraction_sets {
                    out.push(Cell { grid, v_max, headings, method: Method::Tbtsp, fractions: fractions.clone() });
                }
            }
        }
    }
    out
}

/// Grid instance for one cell of the sweep.
pub fn grid_instance(
    rows: usize,
    cols: usize,
    spacing: f64,
    v_max: f64,
    a_max: f64,
    headings: usize,
    fractions: &[f64],
) -> Result<Instance, ConfigError> {
    let limits = KinematicLimits::new(v_max, a_max)?;
    let scheme = DiscretizationScheme::equidistant(headings, fractions, &limits)?;
    Ok(make_grid_instance(rows, cols, spacing, limits, scheme)?)
}

/// Solves a table with the configured solver. Exact runs that exceed the
/// budget fall back to the heuristic and report it in the status.
pub fn solve_table(tensor: &tbtsp_core::CostTensor, solver: SolverKind, budget: u64, seed: u64) -> Result<(TourSolution, RowStatus), SolverError> {
    match solver {
        SolverKind::Heuristic => Ok((solve_heuristic(tensor, seed)?, RowStatus::Heuristic)),
        SolverKind::Exact => match solve_exact_with_budget(tensor, budget) {
            Ok(sol) => Ok((sol, RowStatus::Exact)),
            Err(SolverError::Capacity { .. }) => Ok((solve_heuristic(tensor, seed)?, RowStatus::CapacityFallback)),
            Err(e) => Err(e),
        },
    }
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> (ResultRow, Option<TourRecord>) {
    let label = format!("{}x{}", cell.grid.0, cell.grid.1);
    let mut row = ResultRow {
        label: label.clone(),
        method: cell.method,
        v_max: cell.v_max,
        headings: cell.headings,
        speeds: cell.fractions.len(),
        objective: f64::NAN,
        build_time: 0.0,
        solve_time: 0.0,
        optimal: false,
        status: RowStatus::Failed(String::new()),
    };
    let instance = match grid_instance(cell.grid.0, cell.grid.1, cfg.spacing, cell.v_max, cfg.a_max, cell.headings, &cell.fractions) {
        Ok(i) => i,
        Err(e) => {
            row.status = RowStatus::Failed(e.to_string());
            return (row, None);
        }
    };
    let start = Instant::now();
    let tensor = load_or_build(&instance, cell.method.tensor_kind(), cfg.cache_dir.as_deref());
    row.build_time = start.elapsed().as_secs_f64();
    let tensor = match tensor {
        Ok(t) => t,
        Err(e) => {
            row.status = RowStatus::Failed(e.to_string());
            return (row, None);
        }
    };
    let start = Instant::now();
    let solved = solve_table(&tensor, cfg.solver, cfg.budget, cfg.seed);
    row.solve_time = start.elapsed().as_secs_f64();
    match solved {
        Ok((solution, status)) => {
            row.objective = solution.total_time;
            row.optimal = solution.optimal;
            row.status = status;
            (row, Some(TourRecord { label, method: cell.method, instance, solution }))
        }
        Err(e) => {
            row.status = RowStatus::Failed(e.to_string());
            (row, None)
        }
    }
}

/// Runs every cell. Rows come back grid by grid, then by velocity, heading
/// count, method (Dubins first) and speed set, whatever order the workers
/// finish in.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun, ConfigError> {
    cfg.validate()?;
    let results: Vec<(ResultRow, Option<TourRecord>)> = cells(cfg).par_iter().map(|c| run_cell(cfg, c)).collect();
    let mut run = ExperimentRun::default();
    for (row, tour) in results {
        run.rows.push(row);
        run.tours.extend(tour);
    }
    Ok(run)
}

/// Average improvement of the trajectory-based tours over the best Dubins
/// tour at the baseline velocity, for one discretization and velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub headings: usize,
    pub speeds: usize,
    pub v_max: f64,
    /// Percent, averaged over instances.
    pub improvement: f64,
    pub instances: usize,
}

/// `100 (D - T) / D` per instance, where `D` is the Dubins objective at
/// 1.5 m/s with the same heading count, averaged over instances.
pub fn improvement_stats(rows: &[ResultRow]) -> Result<Vec<ImprovementRow>, StatsError> {
    let ok = |r: &&ResultRow| r.objective.is_finite();
    let baseline = |label: &str, headings: usize| {
        rows.iter()
            .filter(ok)
            .find(|r| r.method == Method::Ddtsp && r.label == label && r.headings == headings && (r.v_max - BASELINE_VMAX).abs() < 1e-9)
            .map(|r| r.objective)
    };
    let mut groups: BTreeMap<(usize, usize, u64), Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(ok).filter(|r| r.method == Method::Tbtsp) {
        let d = baseline(&r.label, r.headings).ok_or_else(|| StatsError::MissingBaseline { label: r.label.clone(), headings: r.headings })?;
        groups.entry((r.headings, r.speeds, r.v_max.to_bits())).or_default().push(100.0 * (d - r.objective) / d);
    }
    let mut out: Vec<ImprovementRow> = groups
        .into_iter()
        .map(|((headings, speeds, v), vals)| ImprovementRow {
            headings,
            speeds,
            v_max: f64::from_bits(v),
            improvement: vals.iter().sum::<f64>() / vals.len() as f64,
            instances: vals.len(),
        })
        .collect();
    out.sort_by(|a, b| (a.headings, a.speeds).cmp(&(b.headings, b.speeds)).then(a.v_max.total_cmp(&b.v_max)));
    Ok(out)
}
