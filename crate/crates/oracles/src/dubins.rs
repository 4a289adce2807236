//! Geometric Dubins construction from turning circles and their tangents,
//! plus a numerical integrator for curvature-bounded unit-speed motion.
//!
//! Poses are `(x, y, psi)` with `psi` measured counterclockwise from +x.

use std::f64::consts::{FRAC_PI_2, TAU};

fn mod2pi(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU { 0.0 } else { r }
}

fn left_center(p: (f64, f64, f64), r: f64) -> (f64, f64) {
    (p.0 - r * p.2.sin(), p.1 + r * p.2.cos())
}

fn right_center(p: (f64, f64, f64), r: f64) -> (f64, f64) {
    (p.0 + r * p.2.sin(), p.1 - r * p.2.cos())
}

/// Per-word shortest lengths in the order LSL, RSR, LSR, RSL, RLR, LRL.
/// For the CCC words both middle-circle placements are tried.
pub fn word_lengths(a: (f64, f64, f64), b: (f64, f64, f64), r: f64) -> [Option<f64>; 6] {
    let mut out = [None; 6];
    let (la, ra) = (left_center(a, r), right_center(a, r));
    let (lb, rb) = (left_center(b, r), right_center(b, r));

    // LSL
    {
        let (dx, dy) = (lb.0 - la.0, lb.1 - la.1);
        let phi = dy.atan2(dx);
        let s = dx.hypot(dy);
        out[0] = Some(r * (mod2pi(phi - a.2) + mod2pi(b.2 - phi)) + s);
    }
    // RSR
    {
        let (dx, dy) = (rb.0 - ra.0, rb.1 - ra.1);
        let phi = dy.atan2(dx);
        let s = dx.hypot(dy);
        out[1] = Some(r * (mod2pi(a.2 - phi) + mod2pi(phi - b.2)) + s);
    }
    // LSR
    {
        let (dx, dy) = (rb.0 - la.0, rb.1 - la.1);
        let d2 = dx * dx + dy * dy;
        if d2 >= 4.0 * r * r {
            let s = (d2 - 4.0 * r * r).sqrt();
            let phi = dy.atan2(dx) + (2.0 * r).atan2(s);
            out[2] = Some(r * (mod2pi(phi - a.2) + mod2pi(phi - b.2)) + s);
        }
    }
    // RSL
    {
        let (dx, dy) = (lb.0 - ra.0, lb.1 - ra.1);
        let d2 = dx * dx + dy * dy;
        if d2 >= 4.0 * r * r {
            let s = (d2 - 4.0 * r * r).sqrt();
            let phi = dy.atan2(dx) - (2.0 * r).atan2(s);
            out[3] = Some(r * (mod2pi(a.2 - phi) + mod2pi(b.2 - phi)) + s);
        }
    }
    // RLR: outer circles turn right, middle turns left.
    out[4] = ccc(a.2, b.2, ra, rb, r, false);
    // LRL
    out[5] = ccc(a.2, b.2, la, lb, r, true);
    out
}

fn ccc(psi_a: f64, psi_b: f64, c1: (f64, f64), c2: (f64, f64), r: f64, outer_left: bool) -> Option<f64> {
    let (dx, dy) = (c2.0 - c1.0, c2.1 - c1.1);
    let d = dx.hypot(dy);
    if d > 4.0 * r {
        return None;
    }
    let h = (4.0 * r * r - d * d / 4.0).max(0.0).sqrt();
    let (mx, my) = ((c1.0 + c2.0) / 2.0, (c1.1 + c2.1) / 2.0);
    let (ux, uy) = if d > 0.0 { (-dy / d, dx / d) } else { (0.0, 1.0) };
    let mut best: Option<f64> = None;
    for sgn in [1.0, -1.0] {
        let c3 = (mx + sgn * h * ux, my + sgn * h * uy);
        let q1 = ((c1.0 + c3.0) / 2.0, (c1.1 + c3.1) / 2.0);
        let q2 = ((c3.0 + c2.0) / 2.0, (c3.1 + c2.1) / 2.0);
        let len = if outer_left {
            let h1 = (q1.1 - c1.1).atan2(q1.0 - c1.0) + FRAC_PI_2;
            let h2 = (q2.1 - c3.1).atan2(q2.0 - c3.0) - FRAC_PI_2;
            mod2pi(h1 - psi_a) + mod2pi(h1 - h2) + mod2pi(psi_b - h2)
        } else {
            let h1 = (q1.1 - c1.1).atan2(q1.0 - c1.0) - FRAC_PI_2;
            let h2 = (q2.1 - c3.1).atan2(q2.0 - c3.0) + FRAC_PI_2;
            mod2pi(psi_a - h1) + mod2pi(h2 - h1) + mod2pi(h2 - psi_b)
        };
        let len = r * len;
        best = Some(best.map_or(len, |b: f64| b.min(len)));
    }
    best
}

/// Shortest length over all words.
pub fn shortest_length(a: (f64, f64, f64), b: (f64, f64, f64), r: f64) -> f64 {
    word_lengths(a, b, r).iter().flatten().copied().fold(f64::INFINITY, f64::min)
}

/// Integrates unit-speed motion with RK4. Each segment is `(kind, length)`
/// with kind one of `'L'`, `'R'`, `'S'` and length in metres.
pub fn integrate_segments(start: (f64, f64, f64), segments: &[(char, f64)], r: f64, step: f64) -> (f64, f64, f64) {
    let (mut x, mut y, mut psi) = start;
    for &(kind, len) in segments {
        let kappa = match kind {
            'L' => 1.0 / r,
            'R' => -1.0 / r,
            _ => 0.0,
        };
        let n = ((len / step).ceil() as usize).max(1);
        let h = len / n as f64;
        for _ in 0..n {
            let f = |psi: f64| (psi.cos(), psi.sin());
            let k1 = f(psi);
            let k2 = f(psi + 0.5 * h * kappa);
            let k3 = k2;
            let k4 = f(psi + h * kappa);
            x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            y += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            psi += h * kappa;
        }
    }
    (x, y, mod2pi(psi))
}

/// Smallest absolute difference between two angles.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = mod2pi(a - b);
    d.min(TAU - d)
}
