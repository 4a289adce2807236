//! Waypoints, kinematic limits and the heading/speed discretization.
//!
//! Headings follow the flight-direction convention used by the cost model:
//! a heading `theta` moves the vehicle with velocity `(sin theta, cos theta)`,
//! i.e. `theta` is measured clockwise from the +y axis. [`heading_to_standard`]
//! converts to the usual counterclockwise-from-+x angle.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::scalar::{format_sig, Scalar};
use crate::trajectory::AxisLimits;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("kinematic limits must be positive (v_max = {v_max}, a_max = {a_max})")]
    InvalidLimits { v_max: f64, a_max: f64 },
    #[error("speed fraction {0} is outside (0, 1]")]
    FractionOutOfRange(f64),
    #[error("{0} must be strictly increasing")]
    NotIncreasing(&'static str),
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("speed {speed} exceeds the per-axis limit {limit}")]
    SpeedTooHigh { speed: f64, limit: f64 },
    #[error("speed {0} is negative")]
    NegativeSpeed(f64),
    #[error("heading {0} is outside (0, 2pi]")]
    HeadingOutOfRange(f64),
    #[error("an instance needs at least two waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("waypoint ids must be 1..=n without gaps; found id {found} at position {position}")]
    BadWaypointIds { position: usize, found: usize },
    #[error("grid spacing must be positive, got {0}")]
    BadSpacing(f64),
    #[error("configuration {0:?} is out of range")]
    BadConfiguration(Configuration),
    #[error("invalid instance document: {0}")]
    Json(String),
}

/// Planar speed and acceleration magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicLimits<T = f64> {
    v_max: T,
    a_max: T,
}

impl<T: Scalar> KinematicLimits<T> {
    pub fn new(v_max: T, a_max: T) -> Result<Self, ModelError> {
        if !(v_max > T::zero() && a_max > T::zero() && v_max.is_finite() && a_max.is_finite()) {
            return Err(ModelError::InvalidLimits { v_max: v_max.as_f64(), a_max: a_max.as_f64() });
        }
        Ok(Self { v_max, a_max })
    }

    pub fn v_max(&self) -> T {
        self.v_max
    }

    pub fn a_max(&self) -> T {
        self.a_max
    }

    /// Per-axis speed limit `v_max / sqrt(2)`.
    pub fn v_axis(&self) -> T {
        self.v_max * T::FRAC_1_SQRT_2()
    }

    /// Per-axis acceleration limit `a_max / sqrt(2)`.
    pub fn a_axis(&self) -> T {
        self.a_max * T::FRAC_1_SQRT_2()
    }

    pub fn axis_limits(&self) -> AxisLimits<T> {
        AxisLimits { v_axis: self.v_axis(), a_axis: self.a_axis() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint<T = f64> {
    /// 1-based, contiguous within an instance.
    pub id: usize,
    pub x: T,
    pub y: T,
}

/// A selectable visiting state: which waypoint, which heading, which speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Configuration {
    /// Waypoint id (1-based).
    #[serde(rename = "wp")]
    pub waypoint: usize,
    pub heading_idx: usize,
    pub speed_idx: usize,
}

/// Heading and speed levels available at every waypoint.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationScheme<T = f64> {
    headings: Vec<T>,
    speeds: Vec<T>,
    fractions: Vec<T>,
}

impl<T: Scalar> DiscretizationScheme<T> {
    /// `headings_count` equidistant headings `2 pi (i + 1) / count` and
    /// speeds `fraction * v_max / sqrt(2)`.
    pub fn equidistant(headings_count: usize, fractions: &[T], limits: &KinematicLimits<T>) -> Result<Self, ModelError> {
        if headings_count == 0 {
            return Err(ModelError::Empty("headings"));
        }
        let count = T::from_usize(headings_count).expect("heading count");
        let headings = (1..=headings_count)
            .map(|i| canonical_heading(T::TAU() * T::from_usize(i).expect("index") / count))
            .collect();
        let speeds = make_speed_set(fractions, limits)?;
        Ok(Self { headings, speeds, fractions: fractions.to_vec() })
    }

    /// Builds a scheme from explicit heading angles and absolute speeds.
    pub fn new(headings: Vec<T>, speeds: Vec<T>, limits: &KinematicLimits<T>) -> Result<Self, ModelError> {
        if headings.is_empty() {
            return Err(ModelError::Empty("headings"));
        }
        if speeds.is_empty() {
            return Err(ModelError::Empty("speeds"));
        }
        if !strictly_increasing(&headings) {
            return Err(ModelError::NotIncreasing("headings"));
        }
        if !strictly_increasing(&speeds) {
            return Err(ModelError::NotIncreasing("speeds"));
        }
        for &h in &headings {
            if !(h > T::zero() && h <= T::TAU()) {
                return Err(ModelError::HeadingOutOfRange(h.as_f64()));
            }
        }
        let limit = limits.v_axis();
        for &s in &speeds {
            if s < T::zero() {
                return Err(ModelError::NegativeSpeed(s.as_f64()));
            }
            if s > limit * (T::one() + T::epsilon() * T::lit(4.0)) {
                return Err(ModelError::SpeedTooHigh { speed: s.as_f64(), limit: limit.as_f64() });
            }
        }
        let fractions = speeds.iter().map(|&s| s / limit).collect();
        Ok(Self { headings, speeds, fractions })
    }

    pub fn headings(&self) -> &[T] {
        &self.headings
    }

    pub fn speeds(&self) -> &[T] {
        &self.speeds
    }

    /// Speeds as fractions of the per-axis limit.
    pub fn fractions(&self) -> &[T] {
        &self.fractions
    }

    pub fn heading_count(&self) -> usize {
        self.headings.len()
    }

    pub fn speed_count(&self) -> usize {
        self.speeds.len()
    }

    /// Configurations per waypoint, `|headings| * |speeds|`.
    pub fn configs_per_waypoint(&self) -> usize {
        self.headings.len() * self.speeds.len()
    }

    /// Dense index of `(heading_idx, speed_idx)` within one waypoint.
    pub fn config_index(&self, heading_idx: usize, speed_idx: usize) -> usize {
        heading_idx * self.speeds.len() + speed_idx
    }

    /// Inverse of [`Self::config_index`].
    pub fn config_at(&self, waypoint: usize, index: usize) -> Configuration {
        let s = self.speeds.len();
        Configuration { waypoint, heading_idx: index / s, speed_idx: index % s }
    }
}

fn strictly_increasing<T: PartialOrd>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

/// Maps an angle into `(0, 2 pi]`.
pub fn canonical_heading<T: Scalar>(theta: T) -> T {
    let tau = T::TAU();
    let mut r = theta % tau;
    if r <= T::zero() {
        r = r + tau;
    }
    r
}

/// Converts a flight heading (`v = (sin theta, cos theta)`) to the standard
/// counterclockwise-from-+x angle in `[0, 2 pi)`.
pub fn heading_to_standard<T: Scalar>(theta: T) -> T {
    let tau = T::TAU();
    let mut psi = (T::FRAC_PI_2() - theta) % tau;
    if psi < T::zero() {
        psi = psi + tau;
    }
    if psi >= tau {
        psi = psi - tau;
    }
    psi
}

/// Speeds `fraction * v_max / sqrt(2)` for strictly increasing fractions in `(0, 1]`.
pub fn make_speed_set<T: Scalar>(fractions: &[T], limits: &KinematicLimits<T>) -> Result<Vec<T>, ModelError> {
    if fractions.is_empty() {
        return Err(ModelError::Empty("speed fractions"));
    }
    for &f in fractions {
        if !(f > T::zero() && f <= T::one()) {
            return Err(ModelError::FractionOutOfRange(f.as_f64()));
        }
    }
    if !strictly_increasing(fractions) {
        return Err(ModelError::NotIncreasing("speed fractions"));
    }
    let v_axis = limits.v_axis();
    Ok(fractions.iter().map(|&f| f * v_axis).collect())
}

/// Planar velocity `(sin theta * v, cos theta * v)` of a configuration.
pub fn config_velocity<T: Scalar>(cfg: &Configuration, scheme: &DiscretizationScheme<T>) -> (T, T) {
    let theta = scheme.headings[cfg.heading_idx];
    let v = scheme.speeds[cfg.speed_idx];
    (theta.sin() * v, theta.cos() * v)
}

/// Waypoints plus the limits and discretization that define one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T = f64> {
    waypoints: Vec<Waypoint<T>>,
    limits: KinematicLimits<T>,
    scheme: DiscretizationScheme<T>,
}

impl<T: Scalar> Instance<T> {
    pub fn new(
        mut waypoints: Vec<Waypoint<T>>,
        limits: KinematicLimits<T>,
        scheme: DiscretizationScheme<T>,
    ) -> Result<Self, ModelError> {
        if waypoints.len() < 2 {
            return Err(ModelError::TooFewWaypoints(waypoints.len()));
        }
        waypoints.sort_by_key(|w| w.id);
        for (position, w) in waypoints.iter().enumerate() {
            if w.id != position + 1 {
                return Err(ModelError::BadWaypointIds { position, found: w.id });
            }
        }
        let v_axis = limits.v_axis();
        if let Some(&s) = scheme.speeds.iter().find(|&&s| s > v_axis * (T::one() + T::epsilon() * T::lit(4.0))) {
            return Err(ModelError::SpeedTooHigh { speed: s.as_f64(), limit: v_axis.as_f64() });
        }
        Ok(Self { waypoints, limits, scheme })
    }

    pub fn waypoints(&self) -> &[Waypoint<T>] {
        &self.waypoints
    }

    pub fn limits(&self) -> &KinematicLimits<T> {
        &self.limits
    }

    pub fn scheme(&self) -> &DiscretizationScheme<T> {
        &self.scheme
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Waypoint by 1-based id.
    pub fn waypoint(&self, id: usize) -> &Waypoint<T> {
        &self.waypoints[id - 1]
    }

    /// Same waypoints and discretization fractions under different limits.
    pub fn with_limits(&self, limits: KinematicLimits<T>) -> Result<Self, ModelError> {
        let scheme = DiscretizationScheme::equidistant(self.scheme.heading_count(), &self.scheme.fractions, &limits)?;
        Self::new(self.waypoints.clone(), limits, scheme)
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            waypoints: self
                .waypoints
                .iter()
                .map(|w| WaypointRecord { id: w.id, x: w.x.as_f64(), y: w.y.as_f64() })
                .collect(),
            v_max: self.limits.v_max.as_f64(),
            a_max: self.limits.a_max.as_f64(),
            headings_count: self.scheme.heading_count(),
            speed_fractions: self.scheme.fractions.iter().map(|f| f.as_f64()).collect(),
        }
    }

    pub fn from_document(doc: &InstanceDocument) -> Result<Self, ModelError> {
        let conv = |x: f64| T::from_f64(x).ok_or_else(|| ModelError::Json(format!("value {x} not representable")));
        let limits = KinematicLimits::new(conv(doc.v_max)?, conv(doc.a_max)?)?;
        let fractions = doc.speed_fractions.iter().map(|&f| conv(f)).collect::<Result<Vec<_>, _>>()?;
        let scheme = DiscretizationScheme::equidistant(doc.headings_count, &fractions, &limits)?;
        let waypoints = doc
            .waypoints
            .iter()
            .map(|w| Ok(Waypoint { id: w.id, x: conv(w.x)?, y: conv(w.y)? }))
            .collect::<Result<Vec<_>, ModelError>>()?;
        Self::new(waypoints, limits, scheme)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: InstanceDocument = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        Self::from_document(&doc)
    }

    /// Canonical serialization: sorted keys, no whitespace, floats with 12
    /// significant digits.
    pub fn canonical_json(&self) -> String {
        self.to_document().canonical_json()
    }

    /// SHA-256 of [`Self::canonical_json`].
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.canonical_json().as_bytes()).into()
    }

    pub fn digest_hex(&self) -> String {
        hex::encode(self.digest())
    }
}

/// On-disk instance description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub waypoints: Vec<WaypointRecord>,
    pub v_max: f64,
    pub a_max: f64,
    pub headings_count: usize,
    pub speed_fractions: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaypointRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

impl InstanceDocument {
    pub fn canonical_json(&self) -> String {
        let num = |x: f64| format_sig(x, 12);
        let waypoints: Vec<String> = self
            .waypoints
            .iter()
            .map(|w| format!("{{\"id\":{},\"x\":{},\"y\":{}}}", w.id, num(w.x), num(w.y)))
            .collect();
        let fractions: Vec<String> = self.speed_fractions.iter().map(|&f| num(f)).collect();
        format!(
            "{{\"a_max\":{},\"headings_count\":{},\"speed_fractions\":[{}],\"v_max\":{},\"waypoints\":[{}]}}",
            num(self.a_max),
            self.headings_count,
            fractions.join(","),
            num(self.v_max),
            waypoints.join(",")
        )
    }
}

/// `rows * cols` waypoints at `(c * spacing, r * spacing)`, ids row-major from 1.
pub fn make_grid_instance<T: Scalar>(
    rows: usize,
    cols: usize,
    spacing: T,
    limits: KinematicLimits<T>,
    scheme: DiscretizationScheme<T>,
) -> Result<Instance<T>, ModelError> {
    if rows * cols < 2 {
        return Err(ModelError::TooFewWaypoints(rows * cols));
    }
    if !(spacing > T::zero() && spacing.is_finite()) {
        return Err(ModelError::BadSpacing(spacing.as_f64()));
    }
    let mut waypoints = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            waypoints.push(Waypoint {
                id: r * cols + c + 1,
                x: T::from_usize(c).expect("col") * spacing,
                y: T::from_usize(r).expect("row") * spacing,
            });
        }
    }
    Instance::new(waypoints, limits, scheme)
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

    fn limits(v: f64, a: f64) -> KinematicLimits {
        KinematicLimits::new(v, a).unwrap()
    }

    fn scheme(h: usize, fr: &[f64], l: &KinematicLimits) -> DiscretizationScheme {
        DiscretizationScheme::equidistant(h, fr, l).unwrap()
    }

    #[test]
    fn limits_reject_non_positive() {
        assert!(KinematicLimits::new(0.0, 1.0).is_err());
        assert!(KinematicLimits::new(1.0, -1.0).is_err());
        let l = limits(2.0, 1.0);
        assert!((l.v_axis() - 2f64.sqrt()).abs() < 1e-15);
        assert!((l.a_axis() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn grid_3x3() {
        let l = limits(1.5, 0.5);
        let inst = make_grid_instance(3, 3, 9.0, l, scheme(8, &[0.2, 0.6, 1.0], &l)).unwrap();
        assert_eq!(inst.len(), 9);
        assert_eq!(inst.waypoint(1).x, 0.0);
        assert_eq!(inst.waypoint(1).y, 0.0);
        assert_eq!((inst.waypoint(9).x, inst.waypoint(9).y), (18.0, 18.0));
        assert_eq!((inst.waypoint(2).x, inst.waypoint(2).y), (9.0, 0.0));
        assert_eq!((inst.waypoint(4).x, inst.waypoint(4).y), (0.0, 9.0));
    }

    #[test]
    fn grid_1x2_and_4x4() {
        let l = limits(1.5, 0.5);
        let s = scheme(8, &[1.0], &l);
        let inst = make_grid_instance(1, 2, 9.0, l, s.clone()).unwrap();
        let pts: Vec<_> = inst.waypoints().iter().map(|w| (w.x, w.y)).collect();
        assert_eq!(pts, vec![(0.0, 0.0), (9.0, 0.0)]);
        assert_eq!(make_grid_instance(4, 4, 9.0, l, s.clone()).unwrap().len(), 16);
        assert!(matches!(make_grid_instance(1, 1, 9.0, l, s.clone()), Err(ModelError::TooFewWaypoints(1))));
        assert!(make_grid_instance(2, 2, 0.0, l, s).is_err());
    }

    #[test]
    fn grid_is_deterministic() {
        let l = limits(2.0, 0.5);
        let a = make_grid_instance(3, 4, 9.0, l, scheme(16, &[0.5, 1.0], &l)).unwrap();
        let b = make_grid_instance(3, 4, 9.0, l, scheme(16, &[0.5, 1.0], &l)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.canonical_json(), b.canonical_json());
    }

    #[test]
    fn speed_sets() {
        let s = make_speed_set(&[0.2, 0.6, 1.0], &limits(3.0, 0.5)).unwrap();
        let expected = [0.4243, 1.2728, 2.1213];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - b).abs() < 5e-5, "{a} vs {b}");
        }
        let s = make_speed_set(&[1.0], &limits(1.0, 1.0)).unwrap();
        assert!((s[0] - 0.70711).abs() < 5e-6);
        let tenths: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let s = make_speed_set(&tenths, &limits(2.0, 0.5)).unwrap();
        assert_eq!(s.len(), 10);
        assert!((s[9] - 1.4142).abs() < 5e-5);
        assert!(make_speed_set(&[0.0, 0.5], &limits(1.0, 1.0)).is_err());
        assert!(make_speed_set(&[0.5, 1.2], &limits(1.0, 1.0)).is_err());
        assert!(make_speed_set(&[0.6, 0.2], &limits(1.0, 1.0)).is_err());
    }

    #[test]
    fn headings_are_equidistant_and_end_at_tau() {
        let l = limits(1.0, 1.0);
        let s = scheme(8, &[1.0], &l);
        assert_eq!(s.headings().len(), 8);
        assert!((s.headings()[0] - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(s.headings()[7], TAU);
        assert!(s.headings().iter().all(|&h| h > 0.0 && h <= TAU));
    }

    #[test]
    fn explicit_scheme_validation() {
        let l = limits(1.0, 1.0);
        assert!(DiscretizationScheme::new(vec![PI], vec![0.0, 0.5], &l).is_ok());
        assert!(DiscretizationScheme::new(vec![PI], vec![0.8], &l).is_err());
        assert!(DiscretizationScheme::new(vec![0.0], vec![0.5], &l).is_err());
        assert!(DiscretizationScheme::new(vec![PI, 1.0], vec![0.5], &l).is_err());
        assert!(DiscretizationScheme::new(vec![], vec![0.5], &l).is_err());
    }

    #[test]
    fn velocity_convention() {
        let l = limits(2.0, 1.0);
        let s = DiscretizationScheme::new(vec![FRAC_PI_4, FRAC_PI_2, TAU], vec![0.5, 1.0], &l).unwrap();
        let v = |k, w| config_velocity(&Configuration { waypoint: 1, heading_idx: k, speed_idx: w }, &s);
        let (x, y) = v(1, 1);
        assert!((x - 1.0).abs() < 1e-15 && y.abs() < 1e-15);
        let (x, y) = v(2, 0);
        assert!(x.abs() < 1e-15 && (y - 0.5).abs() < 1e-15);
        let (x, y) = v(0, 1);
        assert!((x - 0.70711).abs() < 5e-6 && (y - 0.70711).abs() < 5e-6);
    }

    #[test]
    fn standard_heading_conversion() {
        assert!((heading_to_standard(FRAC_PI_2) - 0.0).abs() < 1e-15);
        assert!((heading_to_standard(TAU) - FRAC_PI_2).abs() < 1e-15);
        assert!((heading_to_standard(PI) - 1.5 * PI).abs() < 1e-15);
        assert!((canonical_heading(0.0) - TAU).abs() < 1e-15);
        assert!((canonical_heading(-FRAC_PI_2) - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn json_roundtrip_and_canonical_form() {
        let l = limits(1.5, 0.5);
        let inst = make_grid_instance(1, 2, 9.0, l, scheme(8, &[0.2, 0.6, 1.0], &l)).unwrap();
        let text = inst.canonical_json();
        assert_eq!(
            text,
            "{\"a_max\":0.5,\"headings_count\":8,\"speed_fractions\":[0.2,0.6,1],\"v_max\":1.5,\
             \"waypoints\":[{\"id\":1,\"x\":0,\"y\":0},{\"id\":2,\"x\":9,\"y\":0}]}"
        );
        let back = Instance::<f64>::from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.digest(), inst.digest());
        let pretty = serde_json::to_string_pretty(&inst.to_document()).unwrap();
        assert_eq!(Instance::<f64>::from_json(&pretty).unwrap().digest_hex(), inst.digest_hex());
    }

    #[test]
    fn rejects_bad_ids() {
        let l = limits(1.0, 1.0);
        let s = scheme(4, &[1.0], &l);
        let w = |id| Waypoint { id, x: 0.0, y: 0.0 };
        assert!(Instance::new(vec![w(1), w(3)], l, s.clone()).is_err());
        assert!(Instance::new(vec![w(1)], l, s.clone()).is_err());
        assert!(Instance::new(vec![w(2), w(1)], l, s).is_ok());
    }

    #[test]
    fn f32_instance() {
        let l = KinematicLimits::<f32>::new(1.5, 0.5).unwrap();
        let s = DiscretizationScheme::equidistant(8, &[0.2f32, 1.0], &l).unwrap();
        let inst = make_grid_instance(2, 2, 9.0f32, l, s).unwrap();
        assert_eq!(inst.len(), 4);
    }
}
