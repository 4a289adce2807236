//! Switch-time search over three-phase bang-coast-bang profiles.
//!
//! A profile accelerates with `sigma * a` for `t1`, coasts for `t2` and then
//! accelerates with `-sigma * a` for `t3`. Fixing the sign and the first
//! switch time determines everything else, so the minimum duration is found
//! by a dense scan over `t1` followed by local refinement.

const GRID: usize = 4000;

/// Minimal duration over the bang-coast-bang family, or `None` when no
/// member of the family connects the two states.
pub fn min_duration(ps: f64, vs: f64, pe: f64, ve: f64, v_max: f64, a_max: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for sigma in [1.0, -1.0] {
        if let Some(t) = min_duration_signed(sigma, ps, vs, pe, ve, v_max, a_max) {
            best = Some(best.map_or(t, |b: f64| b.min(t)));
        }
    }
    best
}

/// Duration of the profile with first switch time `t1`, when feasible.
fn duration_at(sigma: f64, t1: f64, vs: f64, ve: f64, dist: f64, a: f64) -> Option<f64> {
    let v1 = vs + sigma * a * t1;
    let t3 = sigma * (v1 - ve) / a;
    if t3 < -1e-12 || t1 < 0.0 {
        return None;
    }
    let t3 = t3.max(0.0);
    let ramps = vs * t1 + 0.5 * sigma * a * t1 * t1 + v1 * t3 - 0.5 * sigma * a * t3 * t3;
    let rest = dist - ramps;
    let t2 = if rest.abs() <= 1e-13 {
        0.0
    } else if v1 == 0.0 {
        return None;
    } else {
        rest / v1
    };
    if t2 < 0.0 {
        return None;
    }
    Some(t1 + t2 + t3)
}

/// Signed coast residual; its zero crossings bound the feasible `t1` set.
fn coast_time(sigma: f64, t1: f64, vs: f64, ve: f64, dist: f64, a: f64) -> f64 {
    let v1 = vs + sigma * a * t1;
    let t3 = (sigma * (v1 - ve) / a).max(0.0);
    let ramps = vs * t1 + 0.5 * sigma * a * t1 * t1 + v1 * t3 - 0.5 * sigma * a * t3 * t3;
    (dist - ramps) * v1.signum()
}

fn min_duration_signed(sigma: f64, ps: f64, vs: f64, pe: f64, ve: f64, v_max: f64, a: f64) -> Option<f64> {
    let dist = pe - ps;
    let lo = (sigma * (ve - vs) / a).max(0.0);
    let hi = (v_max - sigma * vs) / a;
    if hi < lo - 1e-12 {
        return None;
    }
    let hi = hi.max(lo);
    let eval = |t: f64| duration_at(sigma, t, vs, ve, dist, a);

    let mut best: Option<f64> = None;
    let mut consider = |t: Option<f64>| {
        if let Some(t) = t {
            best = Some(best.map_or(t, |b: f64| b.min(t)));
        }
    };

    let ts: Vec<f64> = (0..=GRID).map(|i| lo + (hi - lo) * i as f64 / GRID as f64).collect();
    let vals: Vec<Option<f64>> = ts.iter().map(|&t| eval(t)).collect();
    for v in &vals {
        consider(*v);
    }

    // Boundaries of the feasible set, located by bisection on the coast time.
    for i in 0..GRID {
        let (a0, b0) = (ts[i], ts[i + 1]);
        let fa = coast_time(sigma, a0, vs, ve, dist, a);
        let fb = coast_time(sigma, b0, vs, ve, dist, a);
        if (fa >= 0.0) != (fb >= 0.0) {
            let (mut l, mut r) = (a0, b0);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                let fm = coast_time(sigma, m, vs, ve, dist, a);
                if (fm >= 0.0) == (fa >= 0.0) {
                    l = m;
                } else {
                    r = m;
                }
            }
            for t in [l, r, 0.5 * (l + r)] {
                consider(eval(t));
                // Right at the boundary the coast is zero; accept tiny negative residuals.
                let v1 = vs + sigma * a * t;
                let t3 = sigma * (v1 - ve) / a;
                if t3 >= -1e-12 {
                    let res = coast_time(sigma, t, vs, ve, dist, a).abs();
                    if res < 1e-10 {
                        consider(Some(t + t3.max(0.0)));
                    }
                }
            }
        }
    }

    // Golden-section refinement around the best interior grid point.
    if let Some((i, _)) = vals
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
    {
        let l = ts[i.saturating_sub(1)];
        let r = ts[(i + 1).min(GRID)];
        let (mut l, mut r) = (l, r);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let f = |t: f64| eval(t).unwrap_or(f64::INFINITY);
        for _ in 0..200 {
            let m1 = r - g * (r - l);
            let m2 = l + g * (r - l);
            if f(m1) <= f(m2) {
                r = m2;
            } else {
                l = m1;
            }
        }
        consider(eval(0.5 * (l + r)));
    }
    best
}

/// Forward integration of a piecewise-constant acceleration profile with a
/// fixed small step. Returns the final `(position, velocity)`.
pub fn integrate_phases(ps: f64, vs: f64, phases: &[(f64, f64)], steps_per_phase: usize) -> (f64, f64) {
    let (mut p, mut v) = (ps, vs);
    for &(acc, dur) in phases {
        if dur <= 0.0 {
            continue;
        }
        let h = dur / steps_per_phase as f64;
        for _ in 0..steps_per_phase {
            // Velocity-Verlet is exact for constant acceleration, so this
            // only accumulates rounding error.
            p += v * h + 0.5 * acc * h * h;
            v += acc * h;
        }
    }
    (p, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_to_rest_trapezoid() {
        let t = min_duration(0.0, 0.0, 2.0, 0.0, 1.0, 1.0).unwrap();
        assert!((t - 3.0).abs() < 1e-9, "{t}");
    }

    #[test]
    fn rest_to_rest_triangle() {
        let t = min_duration(0.0, 0.0, 0.25, 0.0, 1.0, 1.0).unwrap();
        assert!((t - 1.0).abs() < 1e-9, "{t}");
    }

    #[test]
    fn cruise() {
        let t = min_duration(0.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((t - 1.0).abs() < 1e-9, "{t}");
    }

    #[test]
    fn integration_matches_closed_form() {
        let (p, v) = integrate_phases(0.0, 0.0, &[(1.0, 1.0), (0.0, 1.0), (-1.0, 1.0)], 1000);
        assert!((p - 2.0).abs() < 1e-9);
        assert!(v.abs() < 1e-9);
    }
}
