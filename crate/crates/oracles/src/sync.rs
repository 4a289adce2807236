//! Fixed-duration feasibility by time stepping, and the earliest duration
//! two axes can share.
//!
//! For a fixed horizon the fastest admissible velocity curve is the
//! pointwise minimum of a forward pass (accelerate from the start speed) and
//! a backward pass (accelerate backwards from the end speed), both capped at
//! the speed limit; the slowest is the mirror image. Their areas bound the
//! reachable displacement.

const STEPS: usize = 4000;

fn envelope_area(vs: f64, ve: f64, horizon: f64, v_max: f64, a_max: f64, upper: bool) -> f64 {
    let h = horizon / STEPS as f64;
    let s = if upper { 1.0 } else { -1.0 };
    let mut fwd = vec![0.0; STEPS + 1];
    let mut bwd = vec![0.0; STEPS + 1];
    fwd[0] = s * vs;
    bwd[STEPS] = s * ve;
    for k in 0..STEPS {
        fwd[k + 1] = (fwd[k] + a_max * h).min(v_max);
        bwd[STEPS - k - 1] = (bwd[STEPS - k] + a_max * h).min(v_max);
    }
    let v: Vec<f64> = fwd.iter().zip(&bwd).map(|(a, b)| a.min(*b)).collect();
    let area: f64 = v.windows(2).map(|w| 0.5 * (w[0] + w[1]) * h).sum();
    s * area
}

/// Whether displacement `d` can be covered in exactly `horizon` seconds,
/// up to the step error `tol`.
pub fn feasible(d: f64, vs: f64, ve: f64, horizon: f64, v_max: f64, a_max: f64, tol: f64) -> bool {
    if horizon <= 0.0 {
        return d.abs() <= tol && (vs - ve).abs() <= tol;
    }
    if a_max * horizon < (ve - vs).abs() - tol {
        return false;
    }
    let hi = envelope_area(vs, ve, horizon, v_max, a_max, true);
    let lo = envelope_area(vs, ve, horizon, v_max, a_max, false);
    d >= lo - tol && d <= hi + tol
}

/// Earliest horizon `>= from` at which both axes `(d, vs, ve)` are feasible,
/// scanning in steps of `step` and refining the first hit by bisection.
pub fn earliest_common(x: (f64, f64, f64), y: (f64, f64, f64), from: f64, v_max: f64, a_max: f64, step: f64, tol: f64) -> f64 {
    let ok = |t: f64| {
        feasible(x.0, x.1, x.2, t, v_max, a_max, tol) && feasible(y.0, y.1, y.2, t, v_max, a_max, tol)
    };
    if ok(from) {
        return from;
    }
    let mut lo = from;
    let mut hi = from + step;
    while !ok(hi) {
        lo = hi;
        hi += step;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_bounds() {
        assert!(feasible(2.0, 0.0, 0.0, 3.0, 1.0, 1.0, 1e-3));
        assert!(!feasible(2.1, 0.0, 0.0, 3.0, 1.0, 1.0, 1e-3));
        assert!(feasible(-2.0, 0.0, 0.0, 3.0, 1.0, 1.0, 1e-3));
    }

    #[test]
    fn same_state_gap() {
        // leave at 0.5, come back to the same spot at 0.5: needs 2 s
        assert!(!feasible(0.0, 0.5, 0.5, 1.0, 1.0, 1.0, 1e-4));
        assert!(feasible(0.0, 0.5, 0.5, 2.0, 1.0, 1.0, 1e-4));
        let t = earliest_common((0.0, 0.5, 0.5), (1.0, 0.5, 0.5), 0.5, 1.0, 1.0, 0.01, 1e-6);
        assert!((t - 2.0).abs() < 1e-3, "{t}");
    }
}
