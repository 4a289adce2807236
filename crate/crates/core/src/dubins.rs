//! Shortest curvature-bounded paths between oriented poses and the
//! constant-speed travel times derived from them.

use crate::model::KinematicLimits;
use crate::scalar::Scalar;
use crate::trajectory::{sample_times, Sample};

/// Planar pose with `psi` measured counterclockwise from +x, in `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T = f64> {
    pub x: T,
    pub y: T,
    pub psi: T,
}

impl<T: Scalar> Pose<T> {
    pub fn new(x: T, y: T, psi: T) -> Self {
        Self { x, y, psi: mod2pi(psi) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentKind {
    Left,
    Straight,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DubinsWord {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

impl DubinsWord {
    /// Evaluation and tie-break order.
    pub const ALL: [DubinsWord; 6] = [Self::Lsl, Self::Rsr, Self::Lsr, Self::Rsl, Self::Rlr, Self::Lrl];

    pub fn segments(self) -> [SegmentKind; 3] {
        use SegmentKind::*;
        match self {
            Self::Lsl => [Left, Straight, Left],
            Self::Rsr => [Right, Straight, Right],
            Self::Lsr => [Left, Straight, Right],
            Self::Rsl => [Right, Straight, Left],
            Self::Rlr => [Right, Left, Right],
            Self::Lrl => [Left, Right, Left],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Lsl => "LSL",
            Self::Rsr => "RSR",
            Self::Lsr => "LSR",
            Self::Rsl => "RSL",
            Self::Rlr => "RLR",
            Self::Lrl => "LRL",
        }
    }
}

/// A three-segment path. `segment_params` are arc angles or straight lengths
/// divided by the radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsPath<T = f64> {
    pub start: Pose<T>,
    pub word: DubinsWord,
    pub segment_params: [T; 3],
    pub radius: T,
    pub length: T,
}

fn mod2pi<T: Scalar>(a: T) -> T {
    let tau = T::TAU();
    let mut r = a % tau;
    if r < T::zero() {
        r = r + tau;
    }
    // a loop that is short of a full turn only by rounding is no turn at all
    if r >= tau - T::epsilon() * T::lit(1024.0) {
        r = T::zero();
    }
    r
}

fn propagate<T: Scalar>(p: Pose<T>, kind: SegmentKind, param: T, radius: T) -> Pose<T> {
    match kind {
        SegmentKind::Left => Pose {
            x: p.x + radius * ((p.psi + param).sin() - p.psi.sin()),
            y: p.y - radius * ((p.psi + param).cos() - p.psi.cos()),
            psi: mod2pi(p.psi + param),
        },
        SegmentKind::Right => Pose {
            x: p.x - radius * ((p.psi - param).sin() - p.psi.sin()),
            y: p.y + radius * ((p.psi - param).cos() - p.psi.cos()),
            psi: mod2pi(p.psi - param),
        },
        SegmentKind::Straight => Pose {
            x: p.x + radius * param * p.psi.cos(),
            y: p.y + radius * param * p.psi.sin(),
            psi: p.psi,
        },
    }
}

impl<T: Scalar> DubinsPath<T> {
    /// Pose after travelling distance `s` along the path (clamped to the ends).
    pub fn pose_at(&self, s: T) -> Pose<T> {
        let mut remaining = s.max(T::zero()) / self.radius;
        let mut pose = self.start;
        for (kind, &param) in self.word.segments().iter().zip(&self.segment_params) {
            let step = remaining.min(param);
            pose = propagate(pose, *kind, step, self.radius);
            remaining = remaining - step;
            if remaining <= T::zero() {
                break;
            }
        }
        pose
    }

    pub fn endpoint(&self) -> Pose<T> {
        let mut pose = self.start;
        for (kind, &param) in self.word.segments().iter().zip(&self.segment_params) {
            pose = propagate(pose, *kind, param, self.radius);
        }
        pose
    }
}

struct Normalized<T> {
    alpha: T,
    beta: T,
    d: T,
    sa: T,
    sb: T,
    ca: T,
    cb: T,
    cab: T,
}

fn normalize<T: Scalar>(a: &Pose<T>, b: &Pose<T>, radius: T) -> Normalized<T> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let d = dx.hypot(dy) / radius;
    let theta = mod2pi(dy.atan2(dx));
    let alpha = mod2pi(a.psi - theta);
    let beta = mod2pi(b.psi - theta);
    Normalized {
        alpha,
        beta,
        d,
        sa: alpha.sin(),
        sb: beta.sin(),
        ca: alpha.cos(),
        cb: beta.cos(),
        cab: (alpha - beta).cos(),
    }
}

/// Squares that are negative only by rounding are clamped to zero, keeping
/// near-degenerate words feasible.
fn clamp_square<T: Scalar>(x: T) -> Option<T> {
    if x >= T::zero() {
        Some(x)
    } else if x >= -T::tolerance() {
        Some(T::zero())
    } else {
        None
    }
}

fn word_params<T: Scalar>(n: &Normalized<T>, word: DubinsWord) -> Option<[T; 3]> {
    let two = T::lit(2.0);
    let Normalized { alpha, beta, d, sa, sb, ca, cb, cab } = *n;
    match word {
        DubinsWord::Lsl => {
            let p2 = clamp_square(two + d * d - two * cab + two * d * (sa - sb))?;
            let tmp = (cb - ca).atan2(d + sa - sb);
            Some([mod2pi(tmp - alpha), p2.sqrt(), mod2pi(beta - tmp)])
        }
        DubinsWord::Rsr => {
            let p2 = clamp_square(two + d * d - two * cab + two * d * (sb - sa))?;
            let tmp = (ca - cb).atan2(d - sa + sb);
            Some([mod2pi(alpha - tmp), p2.sqrt(), mod2pi(tmp - beta)])
        }
        DubinsWord::Lsr => {
            let p2 = clamp_square(-two + d * d + two * cab + two * d * (sa + sb))?;
            let p = p2.sqrt();
            let tmp = (-ca - cb).atan2(d + sa + sb) - (-two).atan2(p);
            Some([mod2pi(tmp - alpha), p, mod2pi(tmp - beta)])
        }
        DubinsWord::Rsl => {
            let p2 = clamp_square(-two + d * d + two * cab - two * d * (sa + sb))?;
            let p = p2.sqrt();
            let tmp = (ca + cb).atan2(d - sa - sb) - two.atan2(p);
            Some([mod2pi(alpha - tmp), p, mod2pi(beta - tmp)])
        }
        DubinsWord::Rlr => {
            let c = (T::lit(6.0) - d * d + two * cab + two * d * (sa - sb)) / T::lit(8.0);
            let c = clamp_unit(c)?;
            let phi = (ca - cb).atan2(d - sa + sb);
            let p = mod2pi(T::TAU() - c.acos());
            let t = mod2pi(alpha - phi + mod2pi(p / two));
            Some([t, p, mod2pi(alpha - beta - t + p)])
        }
        DubinsWord::Lrl => {
            let c = (T::lit(6.0) - d * d + two * cab + two * d * (sb - sa)) / T::lit(8.0);
            let c = clamp_unit(c)?;
            let phi = (ca - cb).atan2(d + sa - sb);
            let p = mod2pi(T::TAU() - c.acos());
            let t = mod2pi(-alpha - phi + p / two);
            Some([t, p, mod2pi(beta - alpha - t + p)])
        }
    }
}

fn clamp_unit<T: Scalar>(c: T) -> Option<T> {
    let lim = T::one() + T::tolerance();
    if c.abs() > lim {
        None
    } else {
        Some(c.max(-T::one()).min(T::one()))
    }
}

/// Path of a single word, or `None` when the word cannot connect the poses.
pub fn word_path<T: Scalar>(a: &Pose<T>, b: &Pose<T>, radius: T, word: DubinsWord) -> Option<DubinsPath<T>> {
    assert!(radius > T::zero(), "turning radius must be positive");
    let a = Pose::new(a.x, a.y, a.psi);
    let b = Pose::new(b.x, b.y, b.psi);
    let n = normalize(&a, &b, radius);
    let params = word_params(&n, word)?;
    let length = radius * (params[0] + params[1] + params[2]);
    Some(DubinsPath { start: a, word, segment_params: params, radius, length })
}

/// Shortest of the six words; ties go to the earlier word in [`DubinsWord::ALL`].
pub fn shortest_dubins<T: Scalar>(a: &Pose<T>, b: &Pose<T>, radius: T) -> DubinsPath<T> {
    let mut best: Option<DubinsPath<T>> = None;
    for word in DubinsWord::ALL {
        if let Some(p) = word_path(a, b, radius, word) {
            if best.is_none_or(|b| p.length < b.length) {
                best = Some(p);
            }
        }
    }
    // LSL and RSR are defined for every pose pair
    best.expect("a CSC word always exists")
}

/// `v_max^2 / a_max`.
pub fn min_turn_radius<T: Scalar>(limits: &KinematicLimits<T>) -> T {
    limits.v_max() * limits.v_max() / limits.a_max()
}

/// Travel time at constant speed `v_max` along the shortest path with the
/// minimum turning radius.
pub fn dubins_cost<T: Scalar>(a: &Pose<T>, b: &Pose<T>, limits: &KinematicLimits<T>) -> T {
    shortest_dubins(a, b, min_turn_radius(limits)).length / limits.v_max()
}

/// Samples a path flown at constant `speed`, in the trajectory sample layout
/// with zero accelerations. Times start at zero.
pub fn sample_dubins<T: Scalar>(path: &DubinsPath<T>, speed: T, dt: T) -> Vec<Sample<T>> {
    let duration = path.length / speed;
    sample_times(duration, dt)
        .into_iter()
        .map(|t| {
            let p = path.pose_at(t * speed);
            Sample { t, x: p.x, y: p.y, vx: speed * p.psi.cos(), vy: speed * p.psi.sin(), ax: T::zero(), ay: T::zero() }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn turn_radius() {
        assert_eq!(min_turn_radius(&KinematicLimits::new(1.5, 0.5).unwrap()), 4.5);
        assert_eq!(min_turn_radius(&KinematicLimits::new(1.0, 1.0).unwrap()), 1.0);
        assert!((min_turn_radius(&KinematicLimits::<f64>::new(3.0, 0.5).unwrap()) - 18.0).abs() < 1e-12);
    }

    #[test]
    fn straight_line() {
        let p = shortest_dubins(&Pose::new(0.0, 0.0, 0.0), &Pose::new(10.0, 0.0, 0.0), 4.5f64);
        assert!((p.length - 10.0).abs() < 1e-12);
        assert_eq!(p.word, DubinsWord::Lsl);
        let cost: f64 = dubins_cost(&Pose::new(0.0, 0.0, 0.0), &Pose::new(10.0, 0.0, 0.0), &KinematicLimits::new(2.0, 0.5).unwrap());
        assert!((cost - 5.0).abs() < 1e-12);
    }

    #[test]
    fn semicircle() {
        let a = Pose::new(0.0, 0.0, FRAC_PI_2);
        let b = Pose::new(9.0, 0.0, -FRAC_PI_2);
        let p = shortest_dubins(&a, &b, 4.5);
        assert!((p.length - 4.5 * PI).abs() < 1e-9, "{}", p.length);
        let cost = dubins_cost(&a, &b, &KinematicLimits::new(1.5, 0.5).unwrap());
        assert!((cost - 9.42478).abs() < 1e-5);
        let end = p.endpoint();
        assert!((end.x - 9.0).abs() < 1e-9 && end.y.abs() < 1e-9);
    }

    #[test]
    fn pose_canonicalization() {
        let p = Pose::new(0.0, 0.0, -FRAC_PI_2);
        assert!((p.psi - 1.5 * PI).abs() < 1e-15);
        assert_eq!(Pose::new(0.0, 0.0, 2.0 * PI).psi, 0.0);
    }

    #[test]
    fn sampling_constant_speed() {
        let p = shortest_dubins(&Pose::new(0.0, 0.0, 0.0), &Pose::new(10.0, 0.0, 0.0), 4.5f64);
        let s = sample_dubins(&p, 2.0, 1.0);
        assert_eq!(s.len(), 6);
        assert!((s[5].x - 10.0).abs() < 1e-12);
        assert!(s.iter().all(|r| (r.vx - 2.0).abs() < 1e-12 && r.ax == 0.0));
    }
}
