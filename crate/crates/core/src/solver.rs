//! Closed-tour solvers over a cost table.
//!
//! A tour visits every waypoint once, picks one configuration per waypoint
//! (entered and left in the same configuration) and returns to the start.
//! Waypoint 1 is always first in the reported order.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::costs::CostTensor;
use crate::model::Configuration;
use crate::scalar::Scalar;

/// Default cap on dynamic-program relaxations for [`solve_exact`].
pub const DEFAULT_BUDGET: u64 = 2_000_000_000;

/// Largest table of subset states the exact solver will allocate.
const MAX_STATES: f64 = (1u64 << 30) as f64;

/// Random start configurations tried by the heuristic.
const HEURISTIC_STARTS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("exact search needs about {required:.3e} relaxations, over the budget of {budget}; use the heuristic solver or export the MILP")]
    Capacity { required: f64, budget: u64 },
    #[error("a tour needs at least 2 waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("order is not a permutation of waypoints 1..={0}")]
    InvalidOrder(usize),
    #[error("no tour with finite cost exists")]
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourSolution {
    /// Waypoint ids in visiting order, starting at 1; the cycle closes back to 1.
    pub order: Vec<usize>,
    /// Configuration used at `order[t]`, aligned with `order`.
    pub configs: Vec<Configuration>,
    pub total_time: f64,
    pub optimal: bool,
    /// 0 for proven optima, `None` when no bound is known.
    pub gap: Option<f64>,
}

impl TourSolution {
    /// Directed arcs of the cycle, including the closing one.
    pub fn arcs(&self) -> Vec<(Configuration, Configuration)> {
        let n = self.configs.len();
        (0..n).map(|t| (self.configs[t], self.configs[(t + 1) % n])).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tour serializes")
    }
}

/// Sum of table costs along the cycle, accumulated in `f64`.
pub fn tour_cost<T: Scalar>(tensor: &CostTensor<T>, configs: &[Configuration]) -> f64 {
    let n = configs.len();
    (0..n).map(|t| tensor.config_cost(&configs[t], &configs[(t + 1) % n]).as_f64()).sum()
}

fn build_solution<T: Scalar>(tensor: &CostTensor<T>, nodes: &[(usize, usize)], optimal: bool) -> TourSolution {
    let s = tensor.speeds();
    let configs: Vec<Configuration> = nodes
        .iter()
        .map(|&(i, c)| Configuration { waypoint: i + 1, heading_idx: c / s, speed_idx: c % s })
        .collect();
    TourSolution {
        order: configs.iter().map(|c| c.waypoint).collect(),
        total_time: tour_cost(tensor, &configs),
        configs,
        optimal,
        gap: optimal.then_some(0.0),
    }
}

/// Relaxations performed by the exact solver on `n` waypoints with `c`
/// configurations each: for every root configuration, the first hop, every
/// subset transition and the closing hop.
pub fn exact_relaxations(n: usize, c: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let m = (n - 1) as f64;
    let c = c as f64;
    let subsets = m * (m - 1.0) * 2f64.powi(n as i32 - 3) * c * c;
    c * (2.0 * m * c + subsets)
}

/// Exact solve with the default budget.
pub fn solve_exact<T: Scalar>(tensor: &CostTensor<T>) -> Result<TourSolution, SolverError> {
    solve_exact_with_budget(tensor, DEFAULT_BUDGET)
}

/// Held-Karp over subsets of waypoints `2..=n` with state (visited set, last
/// waypoint, last configuration), repeated for every configuration of
/// waypoint 1 so the cycle closes where it started.
pub fn solve_exact_with_budget<T: Scalar>(tensor: &CostTensor<T>, budget: u64) -> Result<TourSolution, SolverError> {
    let (n, c) = (tensor.waypoints(), tensor.configs());
    if n < 2 {
        return Err(SolverError::TooFewWaypoints(n));
    }
    let required = exact_relaxations(n, c);
    let states = 2f64.powi(n as i32 - 1) * (n - 1) as f64 * c as f64;
    if required > budget as f64 || states > MAX_STATES {
        return Err(SolverError::Capacity { required, budget });
    }
    let (best, root) = (0..c)
        .into_par_iter()
        .map(|r| (held_karp(tensor, r, false).0, r))
        .reduce(
            || (T::infinity(), usize::MAX),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    if !best.is_finite() {
        return Err(SolverError::Infeasible);
    }
    let (_, nodes) = held_karp(tensor, root, true);
    Ok(build_solution(tensor, &nodes, true))
}

/// One rooted Held-Karp pass. With `track`, also returns the node sequence
/// of the best cycle (waypoint index, config index), root first.
fn held_karp<T: Scalar>(tensor: &CostTensor<T>, root: usize, track: bool) -> (T, Vec<(usize, usize)>) {
    let (n, c) = (tensor.waypoints(), tensor.configs());
    let m = n - 1;
    let full = (1usize << m) - 1;
    let layer = m * c;
    let mut dp = vec![T::infinity(); (full + 1) * layer];
    let mut parent = if track { vec![u32::MAX; dp.len()] } else { Vec::new() };
    for j in 1..n {
        let at = ((1 << (j - 1)) * m + j - 1) * c;
        dp[at..at + c].copy_from_slice(tensor.block_row(0, root, j));
    }
    for mask in 1..full {
        let (head, tail) = dp.split_at_mut((mask + 1) * layer);
        let here = &head[mask * layer..];
        for j in (1..n).filter(|j| mask & (1 << (j - 1)) != 0) {
            let src = &here[(j - 1) * c..j * c];
            for k in (1..n).filter(|k| mask & (1 << (k - 1)) == 0) {
                let next = mask | (1 << (k - 1));
                let off = (next - mask - 1) * layer + (k - 1) * c;
                let out = &mut tail[off..off + c];
                for (cj, &base) in src.iter().enumerate() {
                    if !base.is_finite() {
                        continue;
                    }
                    let row = tensor.block_row(j, cj, k);
                    if track {
                        let abs = next * layer + (k - 1) * c;
                        for (ck, (o, &r)) in out.iter_mut().zip(row).enumerate() {
                            let v = base + r;
                            if v < *o {
                                *o = v;
                                parent[abs + ck] = (j * c + cj) as u32;
                            }
                        }
                    } else {
                        for (o, &r) in out.iter_mut().zip(row) {
                            let v = base + r;
                            if v < *o {
                                *o = v;
                            }
                        }
                    }
                }
            }
        }
    }
    let mut best = T::infinity();
    let mut last = (0, 0);
    for j in 1..n {
        for cj in 0..c {
            let v = dp[full * layer + (j - 1) * c + cj] + tensor.cost(j, cj, 0, root);
            if v < best {
                best = v;
                last = (j, cj);
            }
        }
    }
    if !track || !best.is_finite() {
        return (best, Vec::new());
    }
    let mut nodes = Vec::with_capacity(n);
    let (mut mask, mut node) = (full, last);
    loop {
        nodes.push(node);
        let p = parent[mask * layer + (node.0 - 1) * c + node.1];
        if p == u32::MAX {
            break;
        }
        mask &= !(1 << (node.0 - 1));
        node = (p as usize / c, p as usize % c);
    }
    nodes.push((0, root));
    nodes.reverse();
    (best, nodes)
}

/// Forward shortest path over configurations along a fixed cyclic order,
/// starting and ending in `root` at `order[0]`. Returns the value and, when
/// `track` is set, the configuration chosen at every position.
fn fixed_order_pass<T: Scalar>(tensor: &CostTensor<T>, order: &[usize], root: usize, track: bool) -> (T, Vec<usize>) {
    let c = tensor.configs();
    let n = order.len();
    let mut f: Vec<T> = tensor.block_row(order[0], root, order[1]).to_vec();
    let mut g = vec![T::infinity(); c];
    let mut parent = if track { vec![0u32; n * c] } else { Vec::new() };
    for t in 1..n - 1 {
        g.iter_mut().for_each(|v| *v = T::infinity());
        for (ci, &base) in f.iter().enumerate() {
            if !base.is_finite() {
                continue;
            }
            let row = tensor.block_row(order[t], ci, order[t + 1]);
            for (cj, (o, &r)) in g.iter_mut().zip(row).enumerate() {
                let v = base + r;
                if v < *o {
                    *o = v;
                    if track {
                        parent[(t + 1) * c + cj] = ci as u32;
                    }
                }
            }
        }
        std::mem::swap(&mut f, &mut g);
    }
    let mut best = T::infinity();
    let mut last = 0;
    for (cl, &v) in f.iter().enumerate() {
        let v = v + tensor.cost(order[n - 1], cl, order[0], root);
        if v < best {
            best = v;
            last = cl;
        }
    }
    if !track {
        return (best, Vec::new());
    }
    let mut cfg = vec![0; n];
    cfg[0] = root;
    cfg[n - 1] = last;
    for t in (2..n).rev() {
        cfg[t - 1] = parent[t * c + cfg[t]] as usize;
    }
    (best, cfg)
}

/// Optimal configuration per waypoint over all root configurations of the
/// first waypoint; the order is zero-based and starts at waypoint index 0.
fn fixed_order_best<T: Scalar>(tensor: &CostTensor<T>, order: &[usize]) -> (T, Vec<usize>) {
    let mut best = (T::infinity(), Vec::new());
    for r in 0..tensor.configs() {
        let (v, _) = fixed_order_pass(tensor, order, r, false);
        if v < best.0 {
            best = (v, vec![r]);
        }
    }
    match best.1.first() {
        Some(&r) => fixed_order_pass(tensor, order, r, true),
        None => best,
    }
}

fn normalize_order(order: &[usize], n: usize) -> Result<Vec<usize>, SolverError> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(SolverError::InvalidOrder(n));
    }
    for &id in order {
        if id == 0 || id > n || std::mem::replace(&mut seen[id - 1], true) {
            return Err(SolverError::InvalidOrder(n));
        }
    }
    let start = order.iter().position(|&id| id == 1).expect("permutation contains 1");
    Ok(order[start..].iter().chain(&order[..start]).map(|id| id - 1).collect())
}

/// Best configurations for a fixed cyclic order of waypoint ids. Any
/// rotation of the same cycle gives the same result.
pub fn reoptimize_configs<T: Scalar>(tensor: &CostTensor<T>, order: &[usize]) -> Result<TourSolution, SolverError> {
    let n = tensor.waypoints();
    if n < 2 {
        return Err(SolverError::TooFewWaypoints(n));
    }
    let order = normalize_order(order, n)?;
    let (value, cfg) = fixed_order_best(tensor, &order);
    if !value.is_finite() {
        return Err(SolverError::Infeasible);
    }
    let nodes: Vec<(usize, usize)> = order.into_iter().zip(cfg).collect();
    Ok(build_solution(tensor, &nodes, false))
}

fn nearest_neighbor<T: Scalar>(tensor: &CostTensor<T>, start: usize) -> Vec<usize> {
    let n = tensor.waypoints();
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut order = vec![0];
    let mut cur = (0, start);
    for _ in 1..n {
        let mut best = (T::infinity(), (usize::MAX, 0));
        for j in (0..n).filter(|&j| !visited[j]) {
            for (cj, &v) in tensor.block_row(cur.0, cur.1, j).iter().enumerate() {
                if v < best.0 || best.1 .0 == usize::MAX {
                    best = (v, (j, cj));
                }
            }
        }
        cur = best.1;
        visited[cur.0] = true;
        order.push(cur.0);
    }
    order
}

/// Candidate orders one 2-opt reversal or one relocation away; position 0 stays put.
fn neighbors(order: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let n = order.len();
    let reversals = (1..n).flat_map(move |i| {
        (i + 1..n).map(move |k| {
            let mut o = order.to_vec();
            o[i..=k].reverse();
            o
        })
    });
    let moves = (1..n).flat_map(move |i| {
        (1..n).filter(move |&p| p != i && p != i + 1 && p + 1 != i).map(move |p| {
            let mut o = order.to_vec();
            let x = o.remove(i);
            o.insert(p, x);
            o
        })
    });
    reversals.chain(moves)
}

fn local_search<T: Scalar>(tensor: &CostTensor<T>, mut order: Vec<usize>) -> (T, Vec<usize>, Vec<usize>) {
    let (mut value, mut cfg) = fixed_order_best(tensor, &order);
    let slack = T::lit(1e-12);
    if !value.is_finite() {
        return (value, order, cfg);
    }
    loop {
        let root = cfg[0];
        let better = neighbors(&order).find(|cand| fixed_order_pass(tensor, cand, root, false).0 < value - slack * value.abs());
        match better {
            Some(cand) => {
                (value, cfg) = fixed_order_best(tensor, &cand);
                order = cand;
            }
            None => return (value, order, cfg),
        }
    }
}

/// Nearest-neighbour construction from a few seeded start configurations,
/// improved by 2-opt and relocation moves with configurations re-optimized
/// along each candidate order. Deterministic for a fixed seed.
pub fn solve_heuristic<T: Scalar>(tensor: &CostTensor<T>, seed: u64) -> Result<TourSolution, SolverError> {
    let (n, c) = (tensor.waypoints(), tensor.configs());
    if n < 2 {
        return Err(SolverError::TooFewWaypoints(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = sample(&mut rng, c, HEURISTIC_STARTS.min(c)).into_vec();
    let best = starts
        .into_par_iter()
        .enumerate()
        .map(|(idx, start)| {
            let (v, order, cfg) = local_search(tensor, nearest_neighbor(tensor, start));
            (v, idx, order, cfg)
        })
        .reduce_with(|a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("at least one start");
    if !best.0.is_finite() {
        return Err(SolverError::Infeasible);
    }
    let nodes: Vec<(usize, usize)> = best.2.into_iter().zip(best.3).collect();
    Ok(build_solution(tensor, &nodes, false))
}
