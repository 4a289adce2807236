//! Dense travel-time tables between waypoint configurations.
//!
//! Entries are indexed `(i, k, w, j, m, l)`: leave waypoint `i` with heading
//! `k` and speed `w`, enter waypoint `j` with heading `m` and speed `l`. All
//! indices are zero-based here. The table is stored row-major with the
//! source configuration as the row, so one row holds every destination.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::dubins::{dubins_cost, Pose};
use crate::model::{config_velocity, heading_to_standard, Configuration, Instance};
use crate::scalar::Scalar;
use crate::trajectory::{planar_duration, TrajectoryError};

#[derive(Debug, Error)]
pub enum CostError {
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("stale cache {path}: built for instance {found}, expected {expected}")]
    StaleCache { path: PathBuf, expected: String, found: String },
    #[error("malformed cache {path}: {reason}")]
    BadCache { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TensorKind {
    Tbtsp,
    Ddtsp,
}

impl TensorKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Tbtsp => "TBTSP",
            Self::Ddtsp => "DDTSP",
        }
    }

    fn code(self) -> u8 {
        match self {
            Self::Tbtsp => 0,
            Self::Ddtsp => 1,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Self::Tbtsp),
            1 => Some(Self::Ddtsp),
            _ => None,
        }
    }
}

/// Number of trajectories in a full table, `n^2 h^2 s^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeCount {
    pub omega: u64,
}

impl EdgeCount {
    pub fn of(n: usize, h: usize, s: usize) -> Self {
        let per = (n * h * s) as u64;
        Self { omega: per * per }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostTensor<T = f64> {
    n: usize,
    h: usize,
    s: usize,
    kind: TensorKind,
    digest: [u8; 32],
    costs: Vec<T>,
}

impl<T: Scalar> CostTensor<T> {
    /// Builds a table from a cost function over `(waypoint, config)` node
    /// pairs. Self-loops are forced to the unusable sentinel.
    pub fn from_fn<F>(n: usize, h: usize, s: usize, kind: TensorKind, digest: [u8; 32], f: F) -> Self
    where
        F: Fn(usize, usize, usize, usize) -> T,
    {
        let c = h * s;
        let nodes = n * c;
        let mut costs = Vec::with_capacity(nodes * nodes);
        for a in 0..nodes {
            for b in 0..nodes {
                let (i, j) = (a / c, b / c);
                costs.push(if i == j { T::infinity() } else { f(i, a % c, j, b % c) });
            }
        }
        Self { n, h, s, kind, digest, costs }
    }

    pub fn waypoints(&self) -> usize {
        self.n
    }

    pub fn headings(&self) -> usize {
        self.h
    }

    pub fn speeds(&self) -> usize {
        self.s
    }

    pub fn kind(&self) -> TensorKind {
        self.kind
    }

    /// Digest of the canonical instance this table was built from.
    pub fn digest(&self) -> &[u8; 32] {
        &self.digest
    }

    /// Configurations per waypoint.
    pub fn configs(&self) -> usize {
        self.h * self.s
    }

    /// Total `(waypoint, configuration)` nodes.
    pub fn nodes(&self) -> usize {
        self.n * self.h * self.s
    }

    pub fn edge_count(&self) -> EdgeCount {
        EdgeCount::of(self.n, self.h, self.s)
    }

    /// Raw row-major table.
    pub fn as_slice(&self) -> &[T] {
        &self.costs
    }

    /// Cost between zero-based `(waypoint, config index)` pairs.
    #[inline]
    pub fn cost(&self, i: usize, ci: usize, j: usize, cj: usize) -> T {
        let c = self.configs();
        self.costs[(i * c + ci) * self.nodes() + j * c + cj]
    }

    /// Cost with the six explicit indices `(i, k, w) -> (j, m, l)`.
    pub fn cost6(&self, i: usize, k: usize, w: usize, j: usize, m: usize, l: usize) -> T {
        self.cost(i, k * self.s + w, j, m * self.s + l)
    }

    /// Cost between two configurations (1-based waypoint ids).
    pub fn config_cost(&self, from: &Configuration, to: &Configuration) -> T {
        self.cost6(from.waypoint - 1, from.heading_idx, from.speed_idx, to.waypoint - 1, to.heading_idx, to.speed_idx)
    }

    /// Contiguous destination configurations of waypoint `j` from node `(i, ci)`.
    #[inline]
    pub fn block_row(&self, i: usize, ci: usize, j: usize) -> &[T] {
        let c = self.configs();
        let start = (i * c + ci) * self.nodes() + j * c;
        &self.costs[start..start + c]
    }

    /// Every usable entry multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.costs {
            if v.is_finite() {
                *v = *v * factor;
            }
        }
        out
    }
}

fn positions<T: Scalar>(instance: &Instance<T>) -> Vec<(T, T)> {
    instance.waypoints().iter().map(|w| (w.x, w.y)).collect()
}

fn velocities<T: Scalar>(instance: &Instance<T>) -> Vec<(T, T)> {
    let scheme = instance.scheme();
    (0..scheme.configs_per_waypoint()).map(|c| config_velocity(&scheme.config_at(1, c), scheme)).collect()
}

fn tbtsp_row<T: Scalar>(
    instance: &Instance<T>,
    pos: &[(T, T)],
    vel: &[(T, T)],
    a: usize,
    row: &mut [T],
) -> Result<(), TrajectoryError> {
    let c = vel.len();
    let (i, ci) = (a / c, a % c);
    let limits = instance.limits();
    for (b, slot) in row.iter_mut().enumerate() {
        let (j, cj) = (b / c, b % c);
        *slot = if i == j { T::infinity() } else { planar_duration(pos[i], vel[ci], pos[j], vel[cj], limits)? };
    }
    Ok(())
}

/// Time-optimal travel times for every configuration pair, built in parallel.
pub fn build_tbtsp_costs<T: Scalar>(instance: &Instance<T>) -> Result<CostTensor<T>, CostError> {
    build_tbtsp(instance, true)
}

/// Same as [`build_tbtsp_costs`] on the calling thread only.
pub fn build_tbtsp_costs_serial<T: Scalar>(instance: &Instance<T>) -> Result<CostTensor<T>, CostError> {
    build_tbtsp(instance, false)
}

fn build_tbtsp<T: Scalar>(instance: &Instance<T>, parallel: bool) -> Result<CostTensor<T>, CostError> {
    let scheme = instance.scheme();
    let (n, h, s) = (instance.len(), scheme.heading_count(), scheme.speed_count());
    let nodes = n * h * s;
    let pos = positions(instance);
    let vel = velocities(instance);
    let mut costs = vec![T::zero(); nodes * nodes];
    if parallel {
        costs
            .par_chunks_mut(nodes)
            .enumerate()
            .try_for_each(|(a, row)| tbtsp_row(instance, &pos, &vel, a, row))?;
    } else {
        for (a, row) in costs.chunks_mut(nodes).enumerate() {
            tbtsp_row(instance, &pos, &vel, a, row)?;
        }
    }
    Ok(CostTensor { n, h, s, kind: TensorKind::Tbtsp, digest: instance.digest(), costs })
}

/// Constant-speed Dubins travel times between heading configurations; the
/// speed dimension collapses to one level.
pub fn build_ddtsp_costs<T: Scalar>(instance: &Instance<T>) -> CostTensor<T> {
    let scheme = instance.scheme();
    let (n, h) = (instance.len(), scheme.heading_count());
    let nodes = n * h;
    let poses: Vec<Pose<T>> = instance
        .waypoints()
        .iter()
        .flat_map(|w| scheme.headings().iter().map(move |&th| Pose::new(w.x, w.y, heading_to_standard(th))))
        .collect();
    let limits = instance.limits();
    let mut costs = vec![T::zero(); nodes * nodes];
    costs.par_chunks_mut(nodes).enumerate().for_each(|(a, row)| {
        for (b, slot) in row.iter_mut().enumerate() {
            *slot = if a / h == b / h { T::infinity() } else { dubins_cost(&poses[a], &poses[b], limits) };
        }
    });
    CostTensor { n, h, s: 1, kind: TensorKind::Ddtsp, digest: instance.digest(), costs }
}

const MAGIC: &[u8; 8] = b"TBTSPCT\0";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 1 + 1 + 2 + 3 * 8 + 32;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CostError + '_ {
    move |source| CostError::Io { path: path.to_path_buf(), source }
}

/// Serializes the table: magic, version, kind, scalar width, `n/h/s`,
/// instance digest, then little-endian values row-major.
pub fn encode_cache<T: Scalar>(tensor: &CostTensor<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + tensor.costs.len() * T::BYTES);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(tensor.kind.code());
    out.push(T::BYTES as u8);
    out.extend_from_slice(&[0, 0]);
    for d in [tensor.n, tensor.h, tensor.s] {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    out.extend_from_slice(&tensor.digest);
    for &v in &tensor.costs {
        v.write_le(&mut out);
    }
    out
}

pub fn write_cache<T: Scalar>(tensor: &CostTensor<T>, path: &Path) -> Result<(), CostError> {
    fs::write(path, encode_cache(tensor)).map_err(io_err(path))
}

/// Reads a cache file and checks it was built for `expected_digest`.
pub fn read_cache<T: Scalar>(path: &Path, expected_digest: &[u8; 32]) -> Result<CostTensor<T>, CostError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let bad = |reason: &str| CostError::BadCache { path: path.to_path_buf(), reason: reason.to_string() };
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(bad("missing header"));
    }
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes")) as usize;
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let kind = TensorKind::from_code(bytes[12]).ok_or_else(|| bad("unknown tensor kind"))?;
    if bytes[13] as usize != T::BYTES {
        return Err(bad("scalar width mismatch"));
    }
    let (n, h, s) = (u64_at(16), u64_at(24), u64_at(32));
    let mut digest = [0u8; 32];
    digest.copy_from_slice(&bytes[40..72]);
    if &digest != expected_digest {
        return Err(CostError::StaleCache {
            path: path.to_path_buf(),
            expected: hex::encode(expected_digest),
            found: hex::encode(digest),
        });
    }
    let nodes = n.checked_mul(h).and_then(|x| x.checked_mul(s)).ok_or_else(|| bad("dimension overflow"))?;
    let count = nodes.checked_mul(nodes).ok_or_else(|| bad("dimension overflow"))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != count * T::BYTES {
        return Err(bad("body length does not match dimensions"));
    }
    let costs = body.chunks_exact(T::BYTES).map(T::read_le).collect();
    Ok(CostTensor { n, h, s, kind, digest, costs })
}

/// Writes then reads back a table.
pub fn cache_roundtrip<T: Scalar>(tensor: &CostTensor<T>, path: &Path) -> Result<CostTensor<T>, CostError> {
    write_cache(tensor, path)?;
    read_cache(path, &tensor.digest)
}

/// Cache file name for an instance and tensor kind.
pub fn cache_file_name<T: Scalar>(instance: &Instance<T>, kind: TensorKind) -> String {
    format!("{}_{}.bin", kind.name().to_lowercase(), &instance.digest_hex()[..16])
}

/// Loads a cached table when present and current, otherwise builds and stores it.
pub fn load_or_build<T: Scalar>(instance: &Instance<T>, kind: TensorKind, cache_dir: Option<&Path>) -> Result<CostTensor<T>, CostError> {
    let build = || -> Result<CostTensor<T>, CostError> {
        match kind {
            TensorKind::Tbtsp => build_tbtsp_costs(instance),
            TensorKind::Ddtsp => Ok(build_ddtsp_costs(instance)),
        }
    };
    let Some(dir) = cache_dir else { return build() };
    let path = dir.join(cache_file_name(instance, kind));
    if path.exists() {
        return read_cache(&path, &instance.digest());
    }
    let tensor = build()?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_cache(&tensor, &path)?;
    Ok(tensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_grid_instance, DiscretizationScheme, KinematicLimits, Waypoint};
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn two_points(dist: f64, headings: Vec<f64>, speeds: Vec<f64>, v: f64, a: f64) -> Instance {
        let limits = KinematicLimits::new(v, a).unwrap();
        let scheme = DiscretizationScheme::new(headings, speeds, &limits).unwrap();
        let wps = vec![Waypoint { id: 1, x: 0.0, y: 0.0 }, Waypoint { id: 2, x: dist, y: 0.0 }];
        Instance::new(wps, limits, scheme).unwrap()
    }

    #[test]
    fn tbtsp_rest_to_rest_trapezoid() {
        let inst = two_points(2.0, vec![FRAC_PI_2], vec![0.0], SQRT_2, SQRT_2);
        let t = build_tbtsp_costs(&inst).unwrap();
        assert!((t.cost(0, 0, 1, 0) - 3.0).abs() < 1e-12);
        assert!((t.cost(1, 0, 0, 0) - 3.0).abs() < 1e-12);
        assert!(t.cost(0, 0, 0, 0).is_infinite());
        assert!(t.cost(1, 0, 1, 0).is_infinite());
        assert_eq!(t.kind(), TensorKind::Tbtsp);
    }

    #[test]
    fn edge_count_formula() {
        assert_eq!(EdgeCount::of(12, 8, 10).omega, 921_600);
        let inst = two_points(2.0, vec![PI, 2.0 * PI], vec![0.1, 0.5], 1.0, 1.0);
        assert_eq!(build_tbtsp_costs(&inst).unwrap().edge_count().omega, 64);
    }

    #[test]
    fn ddtsp_semicircle_and_straight() {
        // north at the first waypoint, south at the second
        let inst = two_points(9.0, vec![PI, 2.0 * PI], vec![0.5], 1.5, 0.5);
        let t = build_ddtsp_costs(&inst);
        assert_eq!((t.waypoints(), t.headings(), t.speeds()), (2, 2, 1));
        assert!((t.cost(0, 1, 1, 0) - 9.42478).abs() < 1e-5, "{}", t.cost(0, 1, 1, 0));

        let inst = two_points(9.0, vec![FRAC_PI_2], vec![0.5], 1.5, 0.5);
        let t = build_ddtsp_costs(&inst);
        assert!((t.cost(0, 0, 1, 0) - 6.0).abs() < 1e-12);
        assert!(t.cost(0, 0, 0, 0).is_infinite());
    }

    #[test]
    fn coincident_waypoints_cost_nothing() {
        let limits = KinematicLimits::new(2.0, 1.0).unwrap();
        let scheme = DiscretizationScheme::equidistant(4, &[0.5, 1.0], &limits).unwrap();
        let wps = vec![Waypoint { id: 1, x: 3.0, y: 4.0 }, Waypoint { id: 2, x: 3.0, y: 4.0 }];
        let t = build_tbtsp_costs(&Instance::new(wps, limits, scheme).unwrap()).unwrap();
        for c in 0..t.configs() {
            assert_eq!(t.cost(0, c, 1, c), 0.0);
            for d in 0..t.configs() {
                if d != c {
                    assert!(t.cost(0, c, 1, d) > 0.0);
                }
            }
        }
    }

    #[test]
    fn serial_and_parallel_agree() {
        let limits = KinematicLimits::new(2.0, 0.5).unwrap();
        let scheme = DiscretizationScheme::equidistant(8, &[0.2, 1.0], &limits).unwrap();
        let inst = make_grid_instance(2, 2, 9.0, limits, scheme).unwrap();
        let a = build_tbtsp_costs(&inst).unwrap();
        let b = build_tbtsp_costs_serial(&inst).unwrap();
        assert!(a.as_slice().iter().zip(b.as_slice()).all(|(x, y): (&f64, &f64)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn cache_roundtrip_and_staleness() {
        let limits = KinematicLimits::new(1.5, 0.5).unwrap();
        let scheme = DiscretizationScheme::equidistant(4, &[0.5, 1.0], &limits).unwrap();
        let inst = make_grid_instance(1, 3, 9.0, limits, scheme).unwrap();
        let t = build_tbtsp_costs(&inst).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.bin");
        let back = cache_roundtrip(&t, &path).unwrap();
        assert_eq!(encode_cache(&back), encode_cache(&t));

        let other = inst.with_limits(KinematicLimits::new(2.0, 0.5).unwrap()).unwrap();
        assert!(matches!(read_cache::<f64>(&path, &other.digest()), Err(CostError::StaleCache { .. })));
        assert!(matches!(read_cache::<f32>(&path, &inst.digest()), Err(CostError::BadCache { .. })));
        assert!(matches!(cache_roundtrip(&t, Path::new("")), Err(CostError::Io { .. })));
    }

    #[test]
    fn load_or_build_uses_cache() {
        let limits = KinematicLimits::new(1.5, 0.5).unwrap();
        let scheme = DiscretizationScheme::equidistant(4, &[1.0], &limits).unwrap();
        let inst = make_grid_instance(1, 2, 9.0, limits, scheme).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let a = load_or_build(&inst, TensorKind::Ddtsp, Some(dir.path())).unwrap();
        assert!(dir.path().join(cache_file_name(&inst, TensorKind::Ddtsp)).exists());
        let b = load_or_build(&inst, TensorKind::Ddtsp, Some(dir.path())).unwrap();
        assert_eq!(a, b);
    }
}
