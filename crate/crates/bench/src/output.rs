//! Result tables, tour documents and sampled trajectories on disk.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use tbtsp_core::dubins::{min_turn_radius, sample_dubins, shortest_dubins, Pose};
use tbtsp_core::model::{config_velocity, heading_to_standard};
use tbtsp_core::scalar::format_sig;
use tbtsp_core::trajectory::{planar_time_optimal, sample, write_samples_csv, Sample};
use tbtsp_core::TrajectoryError;
use thiserror::Error;

use crate::experiment::{ImprovementRow, Method, ResultRow, TourRecord};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot rebuild the trajectory of {label}: {source}")]
    Trajectory { label: String, source: TrajectoryError },
}

pub const RESULTS_HEADER: &str = "label,method,v_max,headings,speeds,objective_s,optimal,status";
pub const TIMINGS_HEADER: &str = "label,method,v_max,headings,speeds,build_s,solve_s";
pub const IMPROVEMENT_HEADER: &str = "headings,speeds,v_max,improvement_pct,instances";

/// Samples the closed tour flown arc by arc, with times running on across
/// arcs. Trajectory-based tours replay the time-optimal arcs; Dubins tours
/// fly each path at `v_max`.
pub fn tour_samples(record: &TourRecord, dt: f64) -> Result<Vec<Sample>, TrajectoryError> {
    let inst = &record.instance;
    let scheme = inst.scheme();
    let limits = inst.limits();
    let mut out: Vec<Sample> = Vec::new();
    let mut offset = 0.0;
    for (a, b) in record.solution.arcs() {
        let (wa, wb) = (inst.waypoint(a.waypoint), inst.waypoint(b.waypoint));
        let (arc, duration) = match record.method {
            Method::Tbtsp => {
                let traj = planar_time_optimal((wa.x, wa.y), config_velocity(&a, scheme), (wb.x, wb.y), config_velocity(&b, scheme), limits)?;
                (sample(&traj, dt), traj.duration)
            }
            Method::Ddtsp => {
                let pose = |w: &tbtsp_core::Waypoint, heading: usize| Pose::new(w.x, w.y, heading_to_standard(scheme.headings()[heading]));
                let path = shortest_dubins(&pose(wa, a.heading_idx), &pose(wb, b.heading_idx), min_turn_radius(limits));
                (sample_dubins(&path, limits.v_max(), dt), path.length / limits.v_max())
            }
        };
        // each arc starts where the previous one ended
        let skip = usize::from(!out.is_empty());
        out.extend(arc.into_iter().skip(skip).map(|s| Sample { t: s.t + offset, ..s }));
        offset += duration;
    }
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<File>, OutputError> {
    File::create(path).map(BufWriter::new).map_err(|source| OutputError::Io { path: path.to_path_buf(), source })
}

fn finish(path: &Path, result: io::Result<()>) -> Result<PathBuf, OutputError> {
    result.map(|()| path.to_path_buf()).map_err(|source| OutputError::Io { path: path.to_path_buf(), source })
}

fn write_results(out: &mut impl Write, rows: &[ResultRow]) -> io::Result<()> {
    writeln!(out, "{RESULTS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.label,
            r.method.name(),
            r.v_max,
            r.headings,
            r.speeds,
            format_sig(r.objective, 10),
            r.optimal,
            r.status.name()
        )?;
    }
    out.flush()
}

fn write_timings(out: &mut impl Write, rows: &[ResultRow]) -> io::Result<()> {
    writeln!(out, "{TIMINGS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.label,
            r.method.name(),
            r.v_max,
            r.headings,
            r.speeds,
            format_sig(r.build_time, 4),
            format_sig(r.solve_time, 4)
        )?;
    }
    out.flush()
}

fn write_improvement(out: &mut impl Write, stats: &[ImprovementRow]) -> io::Result<()> {
    writeln!(out, "{IMPROVEMENT_HEADER}")?;
    for s in stats {
        writeln!(out, "{},{},{},{},{}", s.headings, s.speeds, s.v_max, format_sig(s.improvement, 6), s.instances)?;
    }
    out.flush()
}

/// Writes `results.csv`, `timings.csv`, `improvement.csv` and, per tour,
/// `tour_<label>.json` plus `trajectory_<label>.csv` sampled every `dt`
/// seconds. Timings live in their own file so the other outputs are
/// identical across runs of the same configuration. Returns the paths in
/// the order written.
pub fn emit_outputs(dir: &Path, rows: &[ResultRow], stats: &[ImprovementRow], tours: &[TourRecord], dt: f64) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(dir).map_err(|source| OutputError::Io { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();

    let path = dir.join("results.csv");
    written.push(finish(&path, write_results(&mut create(&path)?, rows))?);
    let path = dir.join("timings.csv");
    written.push(finish(&path, write_timings(&mut create(&path)?, rows))?);
    let path = dir.join("improvement.csv");
    written.push(finish(&path, write_improvement(&mut create(&path)?, stats))?);

    for tour in tours {
        let label = tour.cell_label();
        let path = dir.join(format!("tour_{label}.json"));
        written.push(finish(&path, fs::write(&path, tour.solution.to_json() + "\n"))?);
        let samples = tour_samples(tour, dt).map_err(|source| OutputError::Trajectory { label: label.clone(), source })?;
        let path = dir.join(format!("trajectory_{label}.csv"));
        let mut out = create(&path)?;
        written.push(finish(&path, write_samples_csv(&mut out, &samples).and_then(|()| out.flush()))?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_rows_give_header_only_files() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_outputs(dir.path(), &[], &[], &[], 0.1).unwrap();
        assert_eq!(files.len(), 3);
        assert_eq!(fs::read_to_string(dir.path().join("results.csv")).unwrap(), format!("{RESULTS_HEADER}\n"));
        assert_eq!(fs::read_to_string(dir.path().join("improvement.csv")).unwrap(), format!("{IMPROVEMENT_HEADER}\n"));
    }

    #[test]
    fn unwritable_directory_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_outputs(&blocker.join("sub"), &[], &[], &[], 0.1).unwrap_err();
        assert!(err.to_string().contains("sub"), "{err}");
    }
}
