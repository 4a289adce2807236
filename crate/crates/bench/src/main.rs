use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tbtsp_bench::experiment::BASELINE_VMAX;
use tbtsp_bench::*;
use tbtsp_core::costs::{load_or_build, write_cache};
use tbtsp_core::milp::export_milp;
use tbtsp_core::solver::DEFAULT_BUDGET;
use tbtsp_core::Instance;

const EXIT_IO: u8 = 1;
const EXIT_CAPACITY: u8 = 2;

#[derive(Parser)]
#[command(name = "tbtsp", version, about = "Trajectory-based TSP toolkit for multicopter waypoint tours")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a grid instance as JSON.
    Gen {
        #[command(flatten)]
        grid: GridArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build (or load from the cache) the cost table of an instance.
    Costs {
        #[command(flatten)]
        source: InstanceArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Tbtsp)]
        method: MethodArg,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Also write the table to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one instance and write its tour and sampled trajectory.
    Solve {
        #[command(flatten)]
        source: InstanceArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Tbtsp)]
        method: MethodArg,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the full sweep and write result tables.
    Bench {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write the mixed-integer model of an instance in LP format.
    ExportLp {
        #[command(flatten)]
        source: InstanceArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Tbtsp)]
        method: MethodArg,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Tbtsp,
    Ddtsp,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Tbtsp => Method::Tbtsp,
            MethodArg::Ddtsp => Method::Ddtsp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Exact,
    Heuristic,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Exact => SolverKind::Exact,
            SolverArg::Heuristic => SolverKind::Heuristic,
        }
    }
}

/// Grid and discretization flags. Sweep commands accept every flag more
/// than once; single-instance commands take one value each.
#[derive(Args, Clone)]
struct GridArgs {
    /// Grid size as ROWSxCOLS.
    #[arg(long = "grid", value_parser = parse_grid)]
    grids: Vec<(usize, usize)>,
    /// Distance between neighbouring waypoints in metres.
    #[arg(long, default_value_t = 9.0)]
    spacing: f64,
    /// Maximum speed in m/s.
    #[arg(long = "vmax")]
    v_max: Vec<f64>,
    /// Maximum acceleration in m/s^2.
    #[arg(long = "amax", default_value_t = 0.5)]
    a_max: f64,
    /// Number of equidistant headings.
    #[arg(long = "headings")]
    headings: Vec<usize>,
    /// Comma-separated speed fractions of v_max/sqrt(2), e.g. 0.2,0.6,1.0.
    #[arg(long = "speeds", value_parser = parse_fractions)]
    speeds: Vec<Fractions>,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Instance JSON; the grid flags are used when omitted.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = SolverArg::Exact)]
    solver: SolverArg,
    /// Exact-solver work limit in DP relaxations.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "tbtsp-out")]
    out: PathBuf,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Trajectory sampling step in seconds.
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
}

#[derive(Clone, Debug)]
struct Fractions(Vec<f64>);

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected ROWSxCOLS, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(r)?, num(c)?))
}

fn parse_fractions(s: &str) -> Result<Fractions, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"))).collect::<Result<_, _>>().map(Fractions)
}

impl GridArgs {
    fn sweep(&self, run: &RunArgs) -> ExperimentConfig {
        let base = ExperimentConfig::default();
        fn pick<T: Clone>(given: &[T], fallback: Vec<T>) -> Vec<T> {
            if given.is_empty() {
                fallback
            } else {
                given.to_vec()
            }
        }
        ExperimentConfig {
            grids: pick(&self.grids, base.grids),
            spacing: self.spacing,
            v_sweep: pick(&self.v_max, base.v_sweep),
            a_max: self.a_max,
            heading_counts: pick(&self.headings, base.heading_counts),
            speed_fraction_sets: if self.speeds.is_empty() { base.speed_fraction_sets } else { self.speeds.iter().map(|f| f.0.clone()).collect() },
            solver: run.solver.into(),
            output_dir: Some(run.out.clone()),
            cache_dir: run.cache_dir.clone(),
            budget: run.budget,
            seed: run.seed,
        }
    }

    fn single(&self) -> Result<(String, Instance)> {
        fn one<T: Clone>(name: &str, given: &[T], fallback: T) -> Result<T> {
            match given {
                [] => Ok(fallback),
                [x] => Ok(x.clone()),
                _ => bail!("--{name} given {} times; this command takes one value", given.len()),
            }
        }
        let (rows, cols) = one("grid", &self.grids, (3, 3))?;
        let v_max = one("vmax", &self.v_max, BASELINE_VMAX)?;
        let headings = one("headings", &self.headings, 8)?;
        let fractions = one("speeds", &self.speeds, Fractions(vec![0.2, 0.6, 1.0]))?;
        let inst = grid_instance(rows, cols, self.spacing, v_max, self.a_max, headings, &fractions.0)?;
        Ok((format!("{rows}x{cols}"), inst))
    }
}

impl InstanceArgs {
    fn load(&self) -> Result<(String, Instance)> {
        match &self.instance {
            None => self.grid.single(),
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
                let inst = Instance::from_json(&text).with_context(|| format!("invalid instance {}", path.display()))?;
                let label = path.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
                Ok((label, inst))
            }
        }
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen { grid, out } => {
            let (_, inst) = grid.single()?;
            write_or_print(out.as_deref(), &(inst.canonical_json() + "\n"))?;
        }
        Command::Costs { source, method, cache_dir, out } => {
            let (label, inst) = source.load()?;
            let start = Instant::now();
            let tensor = load_or_build(&inst, Method::from(method).tensor_kind(), cache_dir.as_deref())?;
            let elapsed = start.elapsed();
            if let Some(path) = &out {
                write_cache(&tensor, path)?;
            }
            let edges = tensor.edge_count();
            println!(
                "{label}: {} table, {} waypoints x {} headings x {} speeds, {} trajectories, {:.3} s",
                tensor.kind().name(),
                tensor.waypoints(),
                tensor.headings(),
                tensor.speeds(),
                edges.omega,
                elapsed.as_secs_f64()
            );
        }
        Command::Solve { source, method, run } => {
            let (label, inst) = source.load()?;
            let method = Method::from(method);
            let tensor = load_or_build(&inst, method.tensor_kind(), run.cache_dir.as_deref())?;
            let start = Instant::now();
            let (solution, status) = solve_table(&tensor, run.solver.into(), run.budget, run.seed)?;
            let elapsed = start.elapsed();
            println!("{label}: {} {} s ({}, {:.3} s)", method.name(), solution.total_time, status.name(), elapsed.as_secs_f64());
            let record = TourRecord { label, method, instance: inst, solution };
            for path in emit_outputs(&run.out, &[], &[], std::slice::from_ref(&record), run.dt)?.iter().skip(3) {
                println!("wrote {}", path.display());
            }
            if status == RowStatus::CapacityFallback {
                eprintln!("exact solver refused the instance under budget {}; reported the heuristic tour", run.budget);
                return Ok(EXIT_CAPACITY);
            }
        }
        Command::Bench { grid, run } => {
            let cfg = grid.sweep(&run);
            let result = run_experiment(&cfg)?;
            let stats = match improvement_stats(&result.rows) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("skipping improvement table: {e}");
                    Vec::new()
                }
            };
            emit_outputs(&run.out, &result.rows, &stats, &result.tours, run.dt)?;
            for r in &result.rows {
                println!("{:<5} {} v={:<4} |H|={:<2} |V|={:<2} {:>10.4} s  {}", r.label, r.method.name(), r.v_max, r.headings, r.speeds, r.objective, r.status.name());
            }
            println!("results in {}", run.out.display());
            let failed: Vec<_> = result.rows.iter().filter(|r| matches!(r.status, RowStatus::Failed(_))).collect();
            for r in &failed {
                if let RowStatus::Failed(msg) = &r.status {
                    eprintln!("{} failed: {msg}", r.cell_label());
                }
            }
            if !failed.is_empty() {
                return Ok(EXIT_IO);
            }
            if result.capacity_failures() > 0 {
                eprintln!("{} cells exceeded the exact-solver budget and report heuristic tours", result.capacity_failures());
                return Ok(EXIT_CAPACITY);
            }
        }
        Command::ExportLp { source, method, out } => {
            let (_, inst) = source.load()?;
            let tensor = load_or_build(&inst, Method::from(method).tensor_kind(), None)?;
            write_or_print(out.as_deref(), &export_milp(&tensor).to_lp_string())?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits with 2 on usage errors, which is the capacity code here
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_IO } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_IO)
        }
    }
}
