//! Feasibility checks for tours and raw arc sets against the assignment,
//! flow-conservation, subtour and objective constraints.

use std::fmt;

use crate::costs::CostTensor;
use crate::model::Configuration;
use crate::scalar::Scalar;
use crate::solver::TourSolution;

/// Relative tolerance on the reported objective.
pub const OBJECTIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// An index outside the table or an arc from a waypoint to itself.
    Domain { detail: String },
    /// A waypoint not left or not entered exactly once.
    Degree { waypoint: usize, left: usize, entered: usize },
    /// A waypoint entered in one configuration and left in another.
    Flow { waypoint: usize, entry: (usize, usize), exit: (usize, usize) },
    /// The arcs form more than one cycle.
    Subtour { cycle_len: usize, waypoints: usize },
    Objective { reported: f64, computed: f64 },
}

impl Violation {
    /// Short constraint family name.
    pub fn constraint(&self) -> &'static str {
        match self {
            Self::Domain { .. } => "domain",
            Self::Degree { .. } => "degree",
            Self::Flow { .. } => "flow",
            Self::Subtour { .. } => "subtour",
            Self::Objective { .. } => "objective",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Domain { detail } => write!(f, "domain: {detail}"),
            Self::Degree { waypoint, left, entered } => {
                write!(f, "degree: waypoint {waypoint} left {left} times, entered {entered} times")
            }
            Self::Flow { waypoint, entry, exit } => write!(
                f,
                "flow: waypoint {waypoint} entered with (heading {}, speed {}) but left with (heading {}, speed {})",
                entry.0, entry.1, exit.0, exit.1
            ),
            Self::Subtour { cycle_len, waypoints } => {
                write!(f, "subtour: cycle through waypoint 1 has {cycle_len} of {waypoints} waypoints")
            }
            Self::Objective { reported, computed } => {
                write!(f, "objective: reported {reported} but arcs sum to {computed}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.first() {
            None => write!(f, "feasible"),
            Some(v) => write!(f, "infeasible ({v})"),
        }
    }
}

fn objective_matches(reported: f64, computed: f64) -> bool {
    (reported - computed).abs() <= OBJECTIVE_TOLERANCE * computed.abs().max(1.0)
}

/// Checks a set of directed arcs between configurations as the binary
/// variables of the model would encode them.
pub fn validate_arcs<T: Scalar>(
    tensor: &CostTensor<T>,
    arcs: &[(Configuration, Configuration)],
    reported_total: f64,
) -> ValidationReport {
    let n = tensor.waypoints();
    let mut report = ValidationReport::default();
    let in_range = |c: &Configuration| {
        (1..=n).contains(&c.waypoint) && c.heading_idx < tensor.headings() && c.speed_idx < tensor.speeds()
    };
    for (a, b) in arcs {
        if !in_range(a) || !in_range(b) {
            report.violations.push(Violation::Domain { detail: format!("arc {a:?} -> {b:?} is outside the table") });
        } else if a.waypoint == b.waypoint {
            report.violations.push(Violation::Domain { detail: format!("self-loop at waypoint {}", a.waypoint) });
        }
    }
    if !report.passed() {
        return report;
    }

    let mut exits: Vec<Vec<&Configuration>> = vec![Vec::new(); n];
    let mut entries: Vec<Vec<&Configuration>> = vec![Vec::new(); n];
    let mut succ = vec![0usize; n];
    for (a, b) in arcs {
        exits[a.waypoint - 1].push(a);
        entries[b.waypoint - 1].push(b);
        succ[a.waypoint - 1] = b.waypoint - 1;
    }
    for w in 0..n {
        if exits[w].len() != 1 || entries[w].len() != 1 {
            report.violations.push(Violation::Degree { waypoint: w + 1, left: exits[w].len(), entered: entries[w].len() });
        }
    }
    if !report.passed() {
        return report;
    }
    for w in 0..n {
        let (e, x) = (entries[w][0], exits[w][0]);
        if (e.heading_idx, e.speed_idx) != (x.heading_idx, x.speed_idx) {
            report.violations.push(Violation::Flow {
                waypoint: w + 1,
                entry: (e.heading_idx, e.speed_idx),
                exit: (x.heading_idx, x.speed_idx),
            });
        }
    }
    let mut len = 1;
    let mut w = succ[0];
    while w != 0 {
        len += 1;
        w = succ[w];
    }
    if len != n {
        report.violations.push(Violation::Subtour { cycle_len: len, waypoints: n });
    }
    let computed: f64 = arcs.iter().map(|(a, b)| tensor.config_cost(a, b).as_f64()).sum();
    if !objective_matches(reported_total, computed) {
        report.violations.push(Violation::Objective { reported: reported_total, computed });
    }
    report
}

/// Checks that a tour visits every waypoint once, that each configuration
/// belongs to the waypoint it is listed with, and that the total matches.
pub fn validate_solution<T: Scalar>(tensor: &CostTensor<T>, sol: &TourSolution) -> ValidationReport {
    let n = tensor.waypoints();
    let mut report = ValidationReport::default();
    let mut visits = vec![0usize; n];
    for &id in &sol.order {
        match visits.get_mut(id.wrapping_sub(1)) {
            Some(v) => *v += 1,
            None => report.violations.push(Violation::Domain { detail: format!("waypoint id {id} out of range") }),
        }
    }
    for (w, &v) in visits.iter().enumerate() {
        if v != 1 {
            report.violations.push(Violation::Degree { waypoint: w + 1, left: v, entered: v });
        }
    }
    if !report.passed() {
        return report;
    }
    if sol.configs.len() != n {
        report.violations.push(Violation::Domain { detail: format!("{} configurations for {n} waypoints", sol.configs.len()) });
        return report;
    }
    for (&id, cfg) in sol.order.iter().zip(&sol.configs) {
        if cfg.waypoint != id {
            report.violations.push(Violation::Flow {
                waypoint: id,
                entry: (cfg.heading_idx, cfg.speed_idx),
                exit: (cfg.heading_idx, cfg.speed_idx),
            });
        }
    }
    if !report.passed() {
        return report;
    }
    validate_arcs(tensor, &sol.arcs(), sol.total_time)
}
