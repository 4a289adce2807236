//! Mixed-integer formulation of the tour problem and its LP-format export.
//!
//! Binary `x_i_k_w_j_m_l` selects the arc from waypoint `i` in heading `k`,
//! speed `w` to waypoint `j` in heading `m`, speed `l` (all 1-based in
//! names). Integer `u_i` orders waypoints `2..=n`; waypoint 1 is fixed first
//! and never appears in a constraint, so it gets no variable. Subtours are cut
//! with the Desrochers-Laporte lifting of the MTZ constraints:
//!
//! `u_i - u_j + (n-1) X_ij + (n-3) X_ji <= n-2` for `i != j`, both `>= 2`,
//!
//! where `X_ij` sums all arcs from `i` to `j` over configurations.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::costs::CostTensor;
use crate::scalar::Scalar;
use crate::solver::TourSolution;

/// Feasibility slack used by [`MilpModel::evaluate`].
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

const TERMS_PER_LINE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Self::Le => "<=",
            Self::Eq => "=",
            Self::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    Binary,
    Integer { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RowCounts {
    pub assignment: usize,
    pub flow: usize,
    pub subtour: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    n: usize,
    h: usize,
    s: usize,
    variables: Vec<Variable>,
    objective: Vec<(usize, f64)>,
    rows: Vec<Row>,
    counts: RowCounts,
}

/// Result of plugging values into the model.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpEvaluation {
    pub objective: f64,
    /// Names of violated rows, bounds or integrality requirements.
    pub violated: Vec<String>,
}

impl MilpEvaluation {
    pub fn feasible(&self) -> bool {
        self.violated.is_empty()
    }
}

fn x_name(i: usize, k: usize, w: usize, j: usize, m: usize, l: usize) -> String {
    format!("x_{}_{}_{}_{}_{}_{}", i + 1, k + 1, w + 1, j + 1, m + 1, l + 1)
}

/// Builds the model for a cost table. Self-loops and unusable arcs get no
/// variable.
pub fn export_milp<T: Scalar>(tensor: &CostTensor<T>) -> MilpModel {
    let (n, h, s) = (tensor.waypoints(), tensor.headings(), tensor.speeds());
    let c = h * s;
    let mut variables = Vec::new();
    let mut objective = Vec::new();
    // arcs[i][j] lists the variables from waypoint i to waypoint j
    let mut arcs: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; n];
    let mut out_of = vec![Vec::new(); n];
    let mut into = vec![Vec::new(); n];
    let mut flow_in = vec![Vec::new(); n * c];
    let mut flow_out = vec![Vec::new(); n * c];
    for i in 0..n {
        for ci in 0..c {
            for j in (0..n).filter(|&j| j != i) {
                for (cj, &cost) in tensor.block_row(i, ci, j).iter().enumerate() {
                    if !cost.is_finite() {
                        continue;
                    }
                    let v = variables.len();
                    variables.push(Variable { name: x_name(i, ci / s, ci % s, j, cj / s, cj % s), kind: VarKind::Binary });
                    objective.push((v, cost.as_f64()));
                    arcs[i][j].push(v);
                    out_of[i].push(v);
                    into[j].push(v);
                    flow_out[i * c + ci].push(v);
                    flow_in[j * c + cj].push(v);
                }
            }
        }
    }
    let u0 = variables.len();
    for i in 1..n {
        variables.push(Variable { name: format!("u_{}", i + 1), kind: VarKind::Integer { lo: 2.0, hi: n as f64 } });
    }

    let ones = |vars: &[usize], coef: f64| vars.iter().map(|&v| (v, coef)).collect::<Vec<_>>();
    let mut rows = Vec::new();
    for i in 0..n {
        rows.push(Row { name: format!("out_{}", i + 1), terms: ones(&out_of[i], 1.0), sense: Sense::Eq, rhs: 1.0 });
    }
    for j in 0..n {
        rows.push(Row { name: format!("in_{}", j + 1), terms: ones(&into[j], 1.0), sense: Sense::Eq, rhs: 1.0 });
    }
    for j in 0..n {
        for cj in 0..c {
            let mut terms = ones(&flow_in[j * c + cj], 1.0);
            terms.extend(ones(&flow_out[j * c + cj], -1.0));
            rows.push(Row { name: format!("flow_{}_{}_{}", j + 1, cj / s + 1, cj % s + 1), terms, sense: Sense::Eq, rhs: 0.0 });
        }
    }
    let nf = n as f64;
    let mut subtour = 0;
    for i in 1..n {
        for j in (1..n).filter(|&j| j != i) {
            let mut terms = vec![(u0 + i - 1, 1.0), (u0 + j - 1, -1.0)];
            terms.extend(ones(&arcs[i][j], nf - 1.0));
            if n > 3 {
                terms.extend(ones(&arcs[j][i], nf - 3.0));
            }
            rows.push(Row { name: format!("sub_{}_{}", i + 1, j + 1), terms, sense: Sense::Le, rhs: nf - 2.0 });
            subtour += 1;
        }
    }
    MilpModel {
        n,
        h,
        s,
        variables,
        objective,
        rows,
        counts: RowCounts { assignment: 2 * n, flow: n * c, subtour },
    }
}

impl MilpModel {
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[(usize, f64)] {
        &self.objective
    }

    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn integer_count(&self) -> usize {
        self.variables.len() - self.binary_count()
    }

    pub fn row_counts(&self) -> RowCounts {
        self.counts
    }

    /// Evaluates objective and constraints; missing variables count as 0.
    pub fn evaluate(&self, values: &HashMap<String, f64>) -> MilpEvaluation {
        let tol = FEASIBILITY_TOLERANCE;
        let vals: Vec<f64> = self.variables.iter().map(|v| values.get(&v.name).copied().unwrap_or(0.0)).collect();
        let mut violated = Vec::new();
        for (var, &x) in self.variables.iter().zip(&vals) {
            let ok = match var.kind {
                VarKind::Binary => x.abs() <= tol || (x - 1.0).abs() <= tol,
                VarKind::Integer { lo, hi } => x >= lo - tol && x <= hi + tol && (x - x.round()).abs() <= tol,
            };
            if !ok {
                violated.push(var.name.clone());
            }
        }
        for row in &self.rows {
            let lhs: f64 = row.terms.iter().map(|&(v, a)| a * vals[v]).sum();
            let slack = tol * row.rhs.abs().max(1.0);
            let ok = match row.sense {
                Sense::Le => lhs <= row.rhs + slack,
                Sense::Ge => lhs >= row.rhs - slack,
                Sense::Eq => (lhs - row.rhs).abs() <= slack,
            };
            if !ok {
                violated.push(row.name.clone());
            }
        }
        let objective = self.objective.iter().map(|&(v, a)| a * vals[v]).sum();
        MilpEvaluation { objective, violated }
    }

    /// Variable values encoding a tour: chosen arcs at 1, positions in `u`.
    pub fn encode_solution(&self, sol: &TourSolution) -> HashMap<String, f64> {
        let mut values: HashMap<String, f64> = self.variables.iter().map(|v| (v.name.clone(), 0.0)).collect();
        for (a, b) in sol.arcs() {
            let name = x_name(a.waypoint - 1, a.heading_idx, a.speed_idx, b.waypoint - 1, b.heading_idx, b.speed_idx);
            values.insert(name, 1.0);
        }
        let start = sol.order.iter().position(|&id| id == 1).unwrap_or(0);
        let n = sol.order.len();
        for t in 1..n {
            values.insert(format!("u_{}", sol.order[(start + t) % n]), (t + 1) as f64);
        }
        values
    }

    fn write_terms(&self, out: &mut String, terms: &[(usize, f64)]) {
        if terms.is_empty() {
            out.push_str(" 0");
        }
        for (idx, &(v, a)) in terms.iter().enumerate() {
            if idx > 0 && idx % TERMS_PER_LINE == 0 {
                out.push_str("\n   ");
            }
            let sign = if a < 0.0 { '-' } else { '+' };
            let _ = write!(out, " {sign} {} {}", a.abs(), self.variables[v].name);
        }
    }

    /// Renders the model in LP text format.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\\ Minimum-time closed tour over waypoint configurations");
        let _ = writeln!(out, "\\ waypoints = {}, headings = {}, speeds = {}", self.n, self.h, self.s);
        let _ = writeln!(out, "\\ subtour rows: u_i - u_j + (n-1) X_ij + (n-3) X_ji <= n-2, waypoint 1 fixed first");
        out.push_str("Minimize\n obj:");
        self.write_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for row in &self.rows {
            let _ = write!(out, " {}:", row.name);
            self.write_terms(&mut out, &row.terms);
            let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs);
        }
        out.push_str("Bounds\n");
        for v in &self.variables {
            if let VarKind::Integer { lo, hi } = v.kind {
                let _ = writeln!(out, " {lo} <= {} <= {hi}", v.name);
            }
        }
        let section = |out: &mut String, title: &str, binary: bool| {
            let names: Vec<&str> = self
                .variables
                .iter()
                .filter(|v| (v.kind == VarKind::Binary) == binary)
                .map(|v| v.name.as_str())
                .collect();
            if names.is_empty() {
                return;
            }
            let _ = writeln!(out, "{title}");
            for chunk in names.chunks(TERMS_PER_LINE) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        };
        section(&mut out, "Binaries", true);
        section(&mut out, "Generals", false);
        out.push_str("End\n");
        out
    }
}
