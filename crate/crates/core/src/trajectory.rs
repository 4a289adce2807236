//! Time-optimal trajectories for a point mass under per-axis box constraints.
//!
//! Each axis is driven by a three-phase profile of constant accelerations
//! `a0, 0, a2` with durations `t1, t2, t3`. Four templates cover the
//! time-optimal solutions:
//!
//! | case | `a0`      | `a2`      | extra condition |
//! |------|-----------|-----------|-----------------|
//! | 1    | `+a_axis` | `-a_axis` | `v1 = +v_axis`  |
//! | 2    | `+a_axis` | `-a_axis` | `t2 = 0`        |
//! | 3    | `-a_axis` | `+a_axis` | `v1 = -v_axis`  |
//! | 4    | `-a_axis` | `+a_axis` | `t2 = 0`        |
//!
//! A planar trajectory solves both axes independently; its duration is the
//! larger of the two axis durations and the faster axis is slowed down to
//! match it.

use std::io::{self, Write};

use thiserror::Error;

use crate::model::KinematicLimits;
use crate::scalar::{format_sig, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("boundary velocity {velocity} exceeds the axis limit {limit}")]
    InvalidBoundary { velocity: f64, limit: f64 },
    #[error("axis limits must be positive (v_axis = {v_axis}, a_axis = {a_axis})")]
    InvalidLimits { v_axis: f64, a_axis: f64 },
    #[error("no profile template connects the boundary states")]
    NoFeasibleProfile,
    #[error("target duration {target} is shorter than the time-optimal duration {duration}")]
    TargetTooShort { target: f64, duration: f64 },
    #[error("no profile with the same boundary states lasts exactly {target} s")]
    RetimeFailed { target: f64 },
}

/// Start and end state of one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisBoundary<T = f64> {
    pub p_s: T,
    pub v_s: T,
    pub p_e: T,
    pub v_e: T,
}

impl<T: Scalar> AxisBoundary<T> {
    pub fn new(p_s: T, v_s: T, p_e: T, v_e: T) -> Self {
        Self { p_s, v_s, p_e, v_e }
    }

    /// Reflection `p -> -p`, `v -> -v`.
    pub fn mirrored(&self) -> Self {
        Self { p_s: -self.p_s, v_s: -self.v_s, p_e: -self.p_e, v_e: -self.v_e }
    }

    fn check(&self, limits: &AxisLimits<T>) -> Result<(), TrajectoryError> {
        limits.check()?;
        let slack = limits.v_axis + T::tolerance();
        for v in [self.v_s, self.v_e] {
            if !(v.abs() <= slack) {
                return Err(TrajectoryError::InvalidBoundary { velocity: v.as_f64(), limit: limits.v_axis.as_f64() });
            }
        }
        Ok(())
    }
}

/// Symmetric per-axis box constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisLimits<T = f64> {
    pub v_axis: T,
    pub a_axis: T,
}

impl<T: Scalar> AxisLimits<T> {
    pub fn new(v_axis: T, a_axis: T) -> Result<Self, TrajectoryError> {
        let l = Self { v_axis, a_axis };
        l.check()?;
        Ok(l)
    }

    fn check(&self) -> Result<(), TrajectoryError> {
        if self.v_axis > T::zero() && self.a_axis > T::zero() && self.v_axis.is_finite() && self.a_axis.is_finite() {
            Ok(())
        } else {
            Err(TrajectoryError::InvalidLimits { v_axis: self.v_axis.as_f64(), a_axis: self.a_axis.as_f64() })
        }
    }
}

/// Acceleration template of a three-phase profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProfileCase {
    /// Accelerate, cruise at `+v_axis`, decelerate.
    Case1 = 1,
    /// Accelerate then decelerate without cruising.
    Case2 = 2,
    /// Decelerate, cruise at `-v_axis`, accelerate.
    Case3 = 3,
    /// Decelerate then accelerate without cruising.
    Case4 = 4,
}

impl ProfileCase {
    pub const ALL: [ProfileCase; 4] = [Self::Case1, Self::Case2, Self::Case3, Self::Case4];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.number() == n)
    }

    /// The template describing the reflected motion.
    pub fn mirrored(self) -> Self {
        match self {
            Self::Case1 => Self::Case3,
            Self::Case2 => Self::Case4,
            Self::Case3 => Self::Case1,
            Self::Case4 => Self::Case2,
        }
    }

    fn forward(self) -> bool {
        matches!(self, Self::Case1 | Self::Case2)
    }

    fn cruises(self) -> bool {
        matches!(self, Self::Case1 | Self::Case3)
    }
}

/// One-dimensional three-phase profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisTrajectory<T = f64> {
    pub boundary: AxisBoundary<T>,
    /// Template the profile was built from; `None` for re-timed profiles
    /// whose cruise speed is not at a limit.
    pub case: Option<ProfileCase>,
    pub a0: T,
    pub a1: T,
    pub a2: T,
    pub t1: T,
    pub t2: T,
    pub t3: T,
    pub p1: T,
    pub v1: T,
    pub p2: T,
    pub v2: T,
}

impl<T: Scalar> AxisTrajectory<T> {
    /// Chains the kinematic equations from the start state.
    fn from_phases(boundary: AxisBoundary<T>, case: Option<ProfileCase>, a0: T, t1: T, t2: T, a2: T, t3: T) -> Self {
        let half = T::lit(0.5);
        let p1 = boundary.p_s + boundary.v_s * t1 + half * a0 * t1 * t1;
        let v1 = boundary.v_s + a0 * t1;
        let p2 = p1 + v1 * t2;
        let v2 = v1;
        Self { boundary, case, a0, a1: T::zero(), a2, t1, t2, t3, p1, v1, p2, v2 }
    }

    pub fn duration(&self) -> T {
        self.t1 + self.t2 + self.t3
    }

    /// Chained end state `(p3, v3)`.
    pub fn end_state(&self) -> (T, T) {
        let half = T::lit(0.5);
        (self.p2 + self.v2 * self.t3 + half * self.a2 * self.t3 * self.t3, self.v2 + self.a2 * self.t3)
    }

    /// `(position, velocity, acceleration)` at time `t`, clamped to `[0, duration]`.
    pub fn state_at(&self, t: T) -> (T, T, T) {
        let half = T::lit(0.5);
        let b = &self.boundary;
        if t <= T::zero() {
            return (b.p_s, b.v_s, if self.t1 > T::zero() { self.a0 } else { T::zero() });
        }
        if t < self.t1 {
            return (b.p_s + b.v_s * t + half * self.a0 * t * t, b.v_s + self.a0 * t, self.a0);
        }
        let t12 = self.t1 + self.t2;
        if t < t12 {
            let tau = t - self.t1;
            return (self.p1 + self.v1 * tau, self.v1, self.a1);
        }
        let tau = t - t12;
        if tau <= self.t3 {
            let acc = if self.t3 > T::zero() { self.a2 } else { T::zero() };
            return (self.p2 + self.v2 * tau + half * self.a2 * tau * tau, self.v2 + self.a2 * tau, acc);
        }
        let (p, v) = self.end_state();
        (p, v, T::zero())
    }

    /// Largest `|v|` and `|a|` over the profile. Both occur at phase
    /// boundaries because acceleration is piecewise constant.
    pub fn extremes(&self) -> (T, T) {
        let (_, v3) = self.end_state();
        let vmax = [self.boundary.v_s, self.v1, self.v2, v3].iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let mut amax = T::zero();
        for (a, t) in [(self.a0, self.t1), (self.a1, self.t2), (self.a2, self.t3)] {
            if t > T::zero() {
                amax = amax.max(a.abs());
            }
        }
        (vmax, amax)
    }
}

/// Phase times of a profile in the forward-normalized frame.
#[derive(Debug, Clone, Copy)]
struct Phases<T> {
    t1: T,
    t2: T,
    t3: T,
}

impl<T: Scalar> Phases<T> {
    fn total(&self) -> T {
        self.t1 + self.t2 + self.t3
    }
}

fn clamp_time<T: Scalar>(t: T) -> Option<T> {
    if t >= T::zero() {
        Some(t)
    } else if t >= -T::tolerance() {
        Some(T::zero())
    } else {
        None
    }
}

/// Forward template (`a0 = +acc`, `a2 = -acc`) for normalized boundary data.
/// `cruise` selects case 1; otherwise case 2, taking the shorter of the two
/// feasible peak-velocity roots.
fn forward_phases<T: Scalar>(vs: T, ve: T, dist: T, v_lim: T, acc: T, cruise: bool) -> Option<Phases<T>> {
    let half = T::lit(0.5);
    let tol = T::tolerance();
    if cruise {
        let t1 = clamp_time((v_lim - vs) / acc)?;
        let t3 = clamp_time((v_lim - ve) / acc)?;
        let ramps = (v_lim * v_lim - vs * vs) / (acc + acc) + (v_lim * v_lim - ve * ve) / (acc + acc);
        let t2 = clamp_time((dist - ramps) / v_lim)?;
        return Some(Phases { t1, t2, t3 });
    }
    let mut sq = acc * dist + half * (vs * vs + ve * ve);
    if sq < T::zero() {
        if sq < -tol {
            return None;
        }
        sq = T::zero();
    }
    let peak = sq.sqrt();
    let try_root = |v1: T| -> Option<Phases<T>> {
        if v1.abs() > v_lim + tol {
            return None;
        }
        let t1 = clamp_time((v1 - vs) / acc)?;
        let t3 = clamp_time((v1 - ve) / acc)?;
        Some(Phases { t1, t2: T::zero(), t3 })
    };
    match (try_root(peak), try_root(-peak)) {
        (Some(a), Some(b)) => Some(if b.total() < a.total() { b } else { a }),
        (a, b) => a.or(b),
    }
}

fn build_case<T: Scalar>(
    boundary: &AxisBoundary<T>,
    v_lim: T,
    acc: T,
    case: ProfileCase,
) -> Option<AxisTrajectory<T>> {
    let sign = if case.forward() { T::one() } else { -T::one() };
    let (vs, ve, dist) = (sign * boundary.v_s, sign * boundary.v_e, sign * (boundary.p_e - boundary.p_s));
    let ph = forward_phases(vs, ve, dist, v_lim, acc, case.cruises())?;
    Some(AxisTrajectory::from_phases(*boundary, Some(case), sign * acc, ph.t1, ph.t2, -sign * acc, ph.t3))
}

/// Analytic solution of one template, or `None` when the template yields a
/// negative phase time, a complex peak velocity or a peak beyond the limit.
pub fn solve_axis_case<T: Scalar>(boundary: &AxisBoundary<T>, limits: &AxisLimits<T>, case: ProfileCase) -> Option<AxisTrajectory<T>> {
    boundary.check(limits).ok()?;
    build_case(boundary, limits.v_axis, limits.a_axis, case)
}

/// Fastest feasible template; ties go to the lowest case number.
pub fn axis_time_optimal<T: Scalar>(boundary: &AxisBoundary<T>, limits: &AxisLimits<T>) -> Result<AxisTrajectory<T>, TrajectoryError> {
    boundary.check(limits)?;
    let mut best: Option<AxisTrajectory<T>> = None;
    for case in ProfileCase::ALL {
        if let Some(traj) = build_case(boundary, limits.v_axis, limits.a_axis, case) {
            if best.is_none_or(|b| traj.duration() < b.duration()) {
                best = Some(traj);
            }
        }
    }
    best.ok_or(TrajectoryError::NoFeasibleProfile)
}

/// Duration of [`axis_time_optimal`] without building the profile.
pub fn axis_min_duration<T: Scalar>(boundary: &AxisBoundary<T>, limits: &AxisLimits<T>) -> Result<T, TrajectoryError> {
    boundary.check(limits)?;
    let mut best: Option<T> = None;
    for case in ProfileCase::ALL {
        let sign = if case.forward() { T::one() } else { -T::one() };
        let ph = forward_phases(
            sign * boundary.v_s,
            sign * boundary.v_e,
            sign * (boundary.p_e - boundary.p_s),
            limits.v_axis,
            limits.a_axis,
            case.cruises(),
        );
        if let Some(ph) = ph {
            let d = ph.total();
            if best.is_none_or(|b| d < b) {
                best = Some(d);
            }
        }
    }
    best.ok_or(TrajectoryError::NoFeasibleProfile)
}

const BISECTIONS: usize = 200;

/// Smallest and largest displacement an axis can cover in exactly
/// `duration` seconds between the boundary velocities, or `None` when the
/// velocity change alone takes longer.
///
/// The extremes follow the velocity envelopes: full acceleration towards
/// the peak (or trough), cruise at the limit if reached, full deceleration
/// into the end velocity. Every displacement in between is reachable too.
pub fn reachable_displacement<T: Scalar>(v_s: T, v_e: T, duration: T, limits: &AxisLimits<T>) -> Option<(T, T)> {
    let (v, a) = (limits.v_axis, limits.a_axis);
    let half = T::lit(0.5);
    let tol = T::tolerance();
    if a * duration < (v_e - v_s).abs() - tol * (T::one() + v) {
        return None;
    }
    let area = |v1: T| {
        let t1 = (v1 - v_s).abs() / a;
        let t3 = (v_e - v1).abs() / a;
        let t2 = (duration - t1 - t3).max(T::zero());
        half * (v_s + v1) * t1 + v1 * t2 + half * (v1 + v_e) * t3
    };
    let peak = v.min(half * (a * duration + v_s + v_e)).max(v_s.max(v_e));
    let trough = (-v).max(half * (v_s + v_e - a * duration)).min(v_s.min(v_e));
    Some((area(trough), area(peak)))
}

/// Whether some profile joins the boundary states in exactly `duration`.
pub fn axis_duration_feasible<T: Scalar>(boundary: &AxisBoundary<T>, duration: T, limits: &AxisLimits<T>) -> bool {
    feasible_within(boundary, duration, limits, T::tolerance())
}

fn feasible_within<T: Scalar>(boundary: &AxisBoundary<T>, duration: T, limits: &AxisLimits<T>, tol: T) -> bool {
    let d = boundary.p_e - boundary.p_s;
    let slack = tol * (T::one() + d.abs() + limits.v_axis * duration);
    reachable_displacement(boundary.v_s, boundary.v_e, duration, limits).is_some_and(|(lo, hi)| d >= lo - slack && d <= hi + slack)
}

/// Earliest duration `>= from` at which the axis can join its boundary
/// states. Feasible durations form `[T_min, T_a]` plus `[T_b, inf)`, so past
/// an infeasible `from` the predicate is monotone and bisection applies.
pub fn axis_earliest_duration<T: Scalar>(boundary: &AxisBoundary<T>, from: T, limits: &AxisLimits<T>) -> T {
    if axis_duration_feasible(boundary, from, limits) {
        return from;
    }
    let mut lo = from;
    let mut hi = from.max(limits.v_axis / limits.a_axis);
    while !feasible_within(boundary, hi, limits, T::zero()) {
        lo = hi;
        hi = hi + hi;
    }
    for _ in 0..BISECTIONS {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        // bisect on the exact envelope so the result sits inside the gap
        // edge rather than on the border of the tolerance band
        if feasible_within(boundary, mid, limits, T::zero()) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Ramp at full acceleration to `v1`, cruise, ramp to the end velocity,
/// lasting `duration` in total.
fn cruise_profile<T: Scalar>(b: &AxisBoundary<T>, v1: T, duration: T, acc: T) -> AxisTrajectory<T> {
    let sign = |x: T| if x > T::zero() { acc } else if x < T::zero() { -acc } else { T::zero() };
    let t1 = (v1 - b.v_s).abs() / acc;
    let t3 = (b.v_e - v1).abs() / acc;
    let t2 = (duration - t1 - t3).max(T::zero());
    let mut traj = AxisTrajectory::from_phases(*b, None, sign(v1 - b.v_s), t1, t2, sign(b.v_e - v1), t3);
    traj.v1 = v1;
    traj.v2 = v1;
    traj
}

/// Stretches `traj` to last exactly `target` seconds with the same boundary
/// states: full-acceleration ramps around a cruise speed found by bisection
/// between the trough and peak of the reachable envelope.
pub fn retime_axis<T: Scalar>(traj: &AxisTrajectory<T>, target: T, limits: &AxisLimits<T>) -> Result<AxisTrajectory<T>, TrajectoryError> {
    let b = traj.boundary;
    b.check(limits)?;
    let current = traj.duration();
    let slack = T::tolerance() * current.max(T::one());
    if target < current - slack {
        return Err(TrajectoryError::TargetTooShort { target: target.as_f64(), duration: current.as_f64() });
    }
    if target <= current + slack {
        return Ok(*traj);
    }
    if !axis_duration_feasible(&b, target, limits) {
        return Err(TrajectoryError::RetimeFailed { target: target.as_f64() });
    }
    let (v, a) = (limits.v_axis, limits.a_axis);
    let half = T::lit(0.5);
    let d = b.p_e - b.p_s;
    let miss = |v1: T| {
        let t = cruise_profile(&b, v1, target, a);
        t.end_state().0 - b.p_e
    };
    let mut lo = (-v).max(half * (b.v_s + b.v_e - a * target)).min(b.v_s.min(b.v_e));
    let mut hi = v.min(half * (a * target + b.v_s + b.v_e)).max(b.v_s.max(b.v_e));
    let (f_lo, f_hi) = (miss(lo), miss(hi));
    if f_lo >= T::zero() {
        hi = lo;
    } else if f_hi > T::zero() {
        for _ in 0..BISECTIONS {
            let mid = (lo + hi) * half;
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = miss(mid);
            if fm == T::zero() {
                lo = mid;
                hi = mid;
                break;
            }
            if fm < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let v1 = if miss(lo).abs() < miss(hi).abs() { lo } else { hi };
    let out = cruise_profile(&b, v1, target, a);
    // twice the feasibility band, so a target on the band edge still passes
    let tol = T::lit(2.0) * T::tolerance() * (T::one() + d.abs() + v * target);
    if (out.end_state().0 - b.p_e).abs() > tol {
        return Err(TrajectoryError::RetimeFailed { target: target.as_f64() });
    }
    Ok(out)
}

/// Two synchronized axis profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarTrajectory<T = f64> {
    pub x_axis: AxisTrajectory<T>,
    pub y_axis: AxisTrajectory<T>,
    pub duration: T,
}

fn axis_boundaries<T: Scalar>(start_pos: (T, T), start_vel: (T, T), end_pos: (T, T), end_vel: (T, T)) -> (AxisBoundary<T>, AxisBoundary<T>) {
    (
        AxisBoundary::new(start_pos.0, start_vel.0, end_pos.0, end_vel.0),
        AxisBoundary::new(start_pos.1, start_vel.1, end_pos.1, end_vel.1),
    )
}

/// Earliest duration at or after `from` that both axes can realize.
fn common_duration<T: Scalar>(bx: &AxisBoundary<T>, by: &AxisBoundary<T>, from: T, axis: &AxisLimits<T>) -> T {
    let mut t = from;
    // each axis has at most one gap, so this settles within a few rounds
    for _ in 0..8 {
        let next = axis_earliest_duration(by, axis_earliest_duration(bx, t, axis), axis);
        if next == t {
            break;
        }
        t = next;
    }
    t
}

/// Duration of the planar time-optimal trajectory: the larger axis
/// duration, pushed later if the other axis cannot be stretched to exactly
/// that length.
pub fn planar_duration<T: Scalar>(
    start_pos: (T, T),
    start_vel: (T, T),
    end_pos: (T, T),
    end_vel: (T, T),
    limits: &KinematicLimits<T>,
) -> Result<T, TrajectoryError> {
    let axis = limits.axis_limits();
    let (bx, by) = axis_boundaries(start_pos, start_vel, end_pos, end_vel);
    let from = axis_min_duration(&bx, &axis)?.max(axis_min_duration(&by, &axis)?);
    Ok(common_duration(&bx, &by, from, &axis))
}

/// Solves both axes with the split limits and re-times them to the common
/// duration.
pub fn planar_time_optimal<T: Scalar>(
    start_pos: (T, T),
    start_vel: (T, T),
    end_pos: (T, T),
    end_vel: (T, T),
    limits: &KinematicLimits<T>,
) -> Result<PlanarTrajectory<T>, TrajectoryError> {
    let axis = limits.axis_limits();
    let (bx, by) = axis_boundaries(start_pos, start_vel, end_pos, end_vel);
    let x = axis_time_optimal(&bx, &axis)?;
    let y = axis_time_optimal(&by, &axis)?;
    let duration = common_duration(&bx, &by, x.duration().max(y.duration()), &axis);
    let x_axis = if x.duration() < duration { retime_axis(&x, duration, &axis)? } else { x };
    let y_axis = if y.duration() < duration { retime_axis(&y, duration, &axis)? } else { y };
    Ok(PlanarTrajectory { x_axis, y_axis, duration })
}

/// One row of sampled output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T = f64> {
    pub t: T,
    pub x: T,
    pub y: T,
    pub vx: T,
    pub vy: T,
    pub ax: T,
    pub ay: T,
}

impl<T: Scalar> PlanarTrajectory<T> {
    pub fn state_at(&self, t: T) -> Sample<T> {
        let (x, vx, ax) = self.x_axis.state_at(t);
        let (y, vy, ay) = self.y_axis.state_at(t);
        Sample { t, x, y, vx, vy, ax, ay }
    }
}

/// Sample times `0, dt, 2 dt, ...` plus exactly `duration`.
pub fn sample_times<T: Scalar>(duration: T, dt: T) -> Vec<T> {
    assert!(dt > T::zero(), "sampling step must be positive");
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let t = dt * T::from_usize(k).expect("k");
        if duration - t <= T::lit(1e-9) * dt {
            break;
        }
        out.push(t);
        k += 1;
    }
    out.push(duration);
    out
}

/// Samples the trajectory from the closed-form phase polynomials.
pub fn sample<T: Scalar>(traj: &PlanarTrajectory<T>, dt: T) -> Vec<Sample<T>> {
    sample_times(traj.duration, dt).into_iter().map(|t| traj.state_at(t)).collect()
}

pub const SAMPLE_CSV_HEADER: &str = "t,x,y,vx,vy,ax,ay";

/// Writes samples as CSV with nine significant digits.
pub fn write_samples_csv<T: Scalar, W: Write>(mut out: W, samples: &[Sample<T>]) -> io::Result<()> {
    writeln!(out, "{SAMPLE_CSV_HEADER}")?;
    for s in samples {
        let f = |v: T| format_sig(v.as_f64(), 9);
        writeln!(out, "{},{},{},{},{},{},{}", f(s.t), f(s.x), f(s.y), f(s.vx), f(s.vy), f(s.ax), f(s.ay))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tbtsp_oracles::axis::{integrate_phases, min_duration};

    fn unit() -> AxisLimits {
        AxisLimits::new(1.0, 1.0).unwrap()
    }

    fn bd(ps: f64, vs: f64, pe: f64, ve: f64) -> AxisBoundary {
        AxisBoundary::new(ps, vs, pe, ve)
    }

    fn check_endpoint(t: &AxisTrajectory) {
        let b = t.boundary;
        let phases = [(t.a0, t.t1), (t.a1, t.t2), (t.a2, t.t3)];
        let (p, v) = integrate_phases(b.p_s, b.v_s, &phases, 2000);
        assert!((p - b.p_e).abs() < 1e-6, "end position {p} vs {}", b.p_e);
        assert!((v - b.v_e).abs() < 1e-6, "end velocity {v} vs {}", b.v_e);
    }

    #[test]
    fn trapezoid_case1() {
        let t = solve_axis_case(&bd(0.0, 0.0, 2.0, 0.0), &unit(), ProfileCase::Case1).unwrap();
        assert!((t.t1 - 1.0).abs() < 1e-12);
        assert!((t.t2 - 1.0).abs() < 1e-12);
        assert!((t.t3 - 1.0).abs() < 1e-12);
        assert!((t.duration() - 3.0).abs() < 1e-12);
        assert_eq!(t.a1, 0.0);
        check_endpoint(&t);
    }

    #[test]
    fn triangle_case2() {
        let t = solve_axis_case(&bd(0.0, 0.0, 0.25, 0.0), &unit(), ProfileCase::Case2).unwrap();
        assert!((t.t1 - 0.5).abs() < 1e-12);
        assert!((t.t3 - 0.5).abs() < 1e-12);
        assert_eq!(t.t2, 0.0);
        assert!((t.v1 - 0.5).abs() < 1e-12);
        assert!((t.duration() - 1.0).abs() < 1e-12);
        check_endpoint(&t);
    }

    #[test]
    fn identical_states_case2() {
        let lim = AxisLimits::new(0.7, 3.0).unwrap();
        let t = solve_axis_case(&bd(0.0, 0.0, 0.0, 0.0), &lim, ProfileCase::Case2).unwrap();
        assert_eq!((t.t1, t.t2, t.t3), (0.0, 0.0, 0.0));
        assert_eq!(t.duration(), 0.0);
    }

    #[test]
    fn infeasible_cases() {
        // a short hop cannot cruise at the limit
        assert!(solve_axis_case(&bd(0.0, 0.0, 0.25, 0.0), &unit(), ProfileCase::Case1).is_none());
        // nor can it cruise backwards
        assert!(solve_axis_case(&bd(0.0, 0.0, 0.25, 0.0), &unit(), ProfileCase::Case3).is_none());
        // boundary above the limit
        assert!(solve_axis_case(&bd(0.0, 1.5, 1.0, 0.0), &unit(), ProfileCase::Case1).is_none());
        assert!(matches!(
            axis_time_optimal(&bd(0.0, 1.5, 1.0, 0.0), &unit()),
            Err(TrajectoryError::InvalidBoundary { .. })
        ));
    }

    #[test]
    fn pure_cruise() {
        let t = axis_time_optimal(&bd(0.0, 1.0, 1.0, 1.0), &unit()).unwrap();
        assert!((t.duration() - 1.0).abs() < 1e-12);
        assert_eq!(t.t1, 0.0);
        assert_eq!(t.t3, 0.0);
        assert_eq!(t.case, Some(ProfileCase::Case1));
    }

    #[test]
    fn mirrored_trapezoid_is_case3() {
        let t = axis_time_optimal(&bd(0.0, 0.0, -2.0, 0.0), &unit()).unwrap();
        assert!((t.duration() - 3.0).abs() < 1e-12);
        assert_eq!(t.case, Some(ProfileCase::Case3));
        check_endpoint(&t);
    }

    #[test]
    fn overshooting_boundary_matches_oracle() {
        let b = bd(0.0, 0.9, 0.1, 0.9);
        let t = axis_time_optimal(&b, &unit()).unwrap();
        let oracle = min_duration(0.0, 0.9, 0.1, 0.9, 1.0, 1.0).unwrap();
        assert!((t.duration() - oracle).abs() < 1e-9, "{} vs {oracle}", t.duration());
        // speeding up to sqrt(0.91) and back beats slowing down
        assert!((t.duration() - 2.0 * (0.91f64.sqrt() - 0.9)).abs() < 1e-12);
        assert_eq!(t.case, Some(ProfileCase::Case2));
        check_endpoint(&t);
    }

    #[test]
    fn min_duration_matches_full_solve() {
        for b in [bd(0.0, 0.3, 5.0, -0.2), bd(1.0, -0.7, -3.0, 0.7), bd(0.0, 0.0, 0.0, 0.0)] {
            let full = axis_time_optimal(&b, &unit()).unwrap().duration();
            assert_eq!(axis_min_duration(&b, &unit()).unwrap(), full);
        }
    }

    #[test]
    fn state_at_phase_boundaries() {
        let t = axis_time_optimal(&bd(0.0, 0.0, 2.0, 0.0), &unit()).unwrap();
        let v: Vec<f64> = [0.0, 1.0, 2.0, 3.0].iter().map(|&s| t.state_at(s).1).collect();
        for (a, b) in v.iter().zip([0.0, 1.0, 1.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((t.state_at(3.0).0 - 2.0).abs() < 1e-12);
        assert!((t.state_at(10.0).0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn retime_unchanged_at_current_duration() {
        let t = axis_time_optimal(&bd(0.0, 0.0, 0.25, 0.0), &unit()).unwrap();
        assert_eq!(retime_axis(&t, 1.0, &unit()).unwrap(), t);
        assert!(matches!(retime_axis(&t, 0.5, &unit()), Err(TrajectoryError::TargetTooShort { .. })));
    }

    #[test]
    fn retime_triangle_to_three_seconds() {
        let t = axis_time_optimal(&bd(0.0, 0.0, 0.25, 0.0), &unit()).unwrap();
        let r = retime_axis(&t, 3.0, &unit()).unwrap();
        assert!((r.duration() - 3.0).abs() < 1e-9);
        // ramps at full acceleration around cruise speed c: 3c - c^2 = 0.25
        let c = (3.0 - 8f64.sqrt()) / 2.0;
        assert!((r.v1 - c).abs() < 1e-9, "cruise {}", r.v1);
        assert_eq!((r.a0, r.a2), (1.0, -1.0));
        let (p, v) = r.end_state();
        assert!((p - 0.25).abs() < 1e-9 && v.abs() < 1e-9);
        check_endpoint(&r);
        let (vm, am) = r.extremes();
        assert!(vm <= 1.0 + 1e-9 && am <= 1.0 + 1e-9);
    }

    #[test]
    fn retime_stationary_hover() {
        let t = axis_time_optimal(&bd(0.0, 0.0, 0.0, 0.0), &unit()).unwrap();
        let r = retime_axis(&t, 5.0, &unit()).unwrap();
        assert_eq!((r.t1, r.t3), (0.0, 0.0));
        assert_eq!(r.t2, 5.0);
        assert_eq!((r.a0, r.a1, r.a2, r.v1), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.duration(), 5.0);
        assert_eq!(r.state_at(2.5), (0.0, 0.0, 0.0));
    }

    #[test]
    fn retime_with_moving_boundaries() {
        // already at the limit: slowing down needs a decelerating template
        let b = bd(0.0, 1.0, 1.0, 1.0);
        let t = axis_time_optimal(&b, &unit()).unwrap();
        for target in [1.2, 2.0, 4.0, 10.0] {
            let r = retime_axis(&t, target, &unit()).unwrap();
            assert!((r.duration() - target).abs() < 1e-9);
            check_endpoint(&r);
            let (vm, am) = r.extremes();
            assert!(vm <= 1.0 + 1e-9 && am <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn reachable_envelope() {
        // rest to rest in 3 s: trapezoid either way
        let (lo, hi) = reachable_displacement(0.0, 0.0, 3.0, &unit()).unwrap();
        assert!((hi - 2.0).abs() < 1e-12 && (lo + 2.0).abs() < 1e-12);
        // unit speed change needs at least 1 s
        assert!(reachable_displacement(0.0, 1.0, 0.5, &unit()).is_none());
        let (lo, hi) = reachable_displacement(0.0, 1.0, 1.0, &unit()).unwrap();
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn returning_to_the_same_state_has_a_gap() {
        // start and end coincide at speed u: T = 0 works, then nothing until
        // the axis can reverse to -u and come back, T = 4u/a
        let b = bd(0.0, 0.5, 0.0, 0.5);
        assert_eq!(axis_min_duration(&b, &unit()).unwrap(), 0.0);
        assert!(axis_duration_feasible(&b, 0.0, &unit()));
        assert!(!axis_duration_feasible(&b, 1.0, &unit()));
        assert!(!axis_duration_feasible(&b, 1.99, &unit()));
        assert!(axis_duration_feasible(&b, 2.0, &unit()));
        let t = axis_earliest_duration(&b, 0.3, &unit());
        assert!((t - 2.0).abs() < 1e-7, "{t}");
        let traj = axis_time_optimal(&b, &unit()).unwrap();
        assert!(matches!(retime_axis(&traj, 1.0, &unit()), Err(TrajectoryError::RetimeFailed { .. })));
        let r = retime_axis(&traj, 2.5, &unit()).unwrap();
        check_endpoint(&r);
    }

    #[test]
    fn planar_waits_for_the_gap() {
        // vertical hop flown with a diagonal velocity: y needs 2 s, but x
        // cannot leave and return in under 4 u / a_axis = 2.5 s
        let lim = KinematicLimits::new(2f64.sqrt(), 2f64.sqrt()).unwrap();
        let u = 0.625;
        let d = planar_duration((0.0, 0.0), (u, u), (0.0, 1.25), (u, u), &lim).unwrap();
        let y = axis_min_duration(&bd(0.0, u, 1.25, u), &unit()).unwrap();
        assert!(y < 2.5);
        assert!((d - 2.5).abs() < 1e-7, "{d}");
        let p = planar_time_optimal((0.0, 0.0), (u, u), (0.0, 1.25), (u, u), &lim).unwrap();
        assert_eq!(p.duration, d);
        check_endpoint(&p.x_axis);
        check_endpoint(&p.y_axis);
    }

    #[test]
    fn planar_examples() {
        let lim = KinematicLimits::new(2f64.sqrt(), 2f64.sqrt()).unwrap();
        let p = planar_time_optimal((0.0, 0.0), (0.0, 0.0), (2.0, 2.0), (0.0, 0.0), &lim).unwrap();
        assert!((p.duration - 3.0).abs() < 1e-12);
        let p = planar_time_optimal((0.0, 0.0), (0.0, 0.0), (2.0, 0.25), (0.0, 0.0), &lim).unwrap();
        assert!((p.duration - 3.0).abs() < 1e-12);
        assert!((p.y_axis.duration() - 3.0).abs() < 1e-9);
        let d = planar_duration((0.0, 0.0), (0.0, 0.0), (2.0, 0.25), (0.0, 0.0), &lim).unwrap();
        assert_eq!(d, p.duration);
        let p = planar_time_optimal((1.0, 2.0), (0.3, 0.1), (1.0, 2.0), (0.3, 0.1), &lim).unwrap();
        assert_eq!(p.duration, 0.0);
    }

    #[test]
    fn sampling() {
        let lim = KinematicLimits::new(2f64.sqrt(), 2f64.sqrt()).unwrap();
        let still = planar_time_optimal((0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), &lim).unwrap();
        let s = sample(&still, 0.1);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].t, 0.0);

        let p = planar_time_optimal((0.0, 0.0), (0.0, 0.0), (2.0, 0.0), (0.0, 0.0), &lim).unwrap();
        let s = sample(&p, 1.0);
        assert_eq!(s.len(), 4);
        for (r, t) in s.iter().zip([0.0, 1.0, 2.0, 3.0]) {
            assert!((r.t - t).abs() < 1e-12);
        }
        for (r, v) in s.iter().zip([0.0, 1.0, 1.0, 0.0]) {
            assert!((r.vx - v).abs() < 1e-12);
        }
        let last = s.last().unwrap();
        assert!((last.x - 2.0).abs() < 1e-6 && last.y.abs() < 1e-6);

        let s = sample(&p, 0.7);
        assert_eq!(s.last().unwrap().t, p.duration);
        assert!((s[1].t - 0.7).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let lim = KinematicLimits::new(2f64.sqrt(), 2f64.sqrt()).unwrap();
        let p = planar_time_optimal((0.0, 0.0), (0.0, 0.0), (2.0, 0.0), (0.0, 0.0), &lim).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &sample(&p, 1.0)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x,y,vx,vy,ax,ay");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[4], "3,2,0,0,0,-1,0");
    }

    #[test]
    fn f32_trajectory() {
        let lim = AxisLimits::<f32>::new(1.0, 1.0).unwrap();
        let t = axis_time_optimal(&AxisBoundary::new(0.0f32, 0.0, 2.0, 0.0), &lim).unwrap();
        assert!((t.duration() - 3.0).abs() < 1e-5);
    }
}
