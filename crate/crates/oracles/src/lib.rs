//! Reference implementations used to check the solver crates.
//!
//! Everything here works on plain `f64` values and slices so the test suites
//! can compare against it without sharing any code path with the
//! implementation under test. Nothing in this crate is fast; it is only
//! meant to be obviously correct.

pub mod axis;
pub mod dubins;
pub mod lp;
pub mod sync;
pub mod tour;

/// Trapezoidal re-integration of sampled planar velocities.
///
/// `samples` holds `(t, vx, vy)` rows. Returns the integrated position at
/// every sample, starting from `start`.
pub fn integrate_velocity_samples(start: (f64, f64), samples: &[(f64, f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(samples.len());
    let (mut x, mut y) = start;
    out.push((x, y));
    for w in samples.windows(2) {
        let (t0, vx0, vy0) = w[0];
        let (t1, vx1, vy1) = w[1];
        let dt = t1 - t0;
        x += 0.5 * (vx0 + vx1) * dt;
        y += 0.5 * (vy0 + vy1) * dt;
        out.push((x, y));
    }
    out.truncate(samples.len());
    out
}
