//! Reader for the subset of the LP text format written by the exporter:
//! one objective, labelled linear rows, two-sided bounds, binary and general
//! sections. Good enough to evaluate an exported model at a point.

use std::collections::HashMap;

#[derive(Debug, Clone, Default)]
pub struct LpModel {
    pub objective: Vec<(f64, String)>,
    pub rows: Vec<LpRow>,
    pub bounds: Vec<(f64, String, f64)>,
    pub binaries: Vec<String>,
    pub generals: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub sense: String,
    pub rhs: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Rows,
    Bounds,
    Binaries,
    Generals,
}

fn parse_terms(tokens: &[&str]) -> Vec<(f64, String)> {
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for &tok in tokens {
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => {
                if let Ok(c) = tok.parse::<f64>() {
                    coef = Some(c);
                } else {
                    out.push((sign * coef.unwrap_or(1.0), tok.to_string()));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    out
}

/// Splits a section body into labelled statements.
fn statements(tokens: &[String]) -> Vec<(String, Vec<&str>)> {
    let mut out: Vec<(String, Vec<&str>)> = Vec::new();
    for tok in tokens {
        if let Some(label) = tok.strip_suffix(':') {
            out.push((label.to_string(), Vec::new()));
        } else if let Some(last) = out.last_mut() {
            last.1.push(tok);
        }
    }
    out
}

pub fn parse(text: &str) -> Result<LpModel, String> {
    let mut model = LpModel::default();
    let mut section = Section::None;
    let mut obj_tokens = Vec::new();
    let mut row_tokens = Vec::new();
    let mut ended = false;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        let next = match line.to_ascii_lowercase().as_str() {
            "minimize" => Some(Section::Objective),
            "subject to" => Some(Section::Rows),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" => Some(Section::Binaries),
            "generals" | "general" => Some(Section::Generals),
            "end" => {
                ended = true;
                break;
            }
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            continue;
        }
        let tokens = line.split_whitespace().map(str::to_string);
        match section {
            Section::None => return Err(format!("content before any section: {line}")),
            Section::Objective => obj_tokens.extend(tokens),
            Section::Rows => row_tokens.extend(tokens),
            Section::Bounds => {
                let t: Vec<&str> = line.split_whitespace().collect();
                if t.len() != 5 || t[1] != "<=" || t[3] != "<=" {
                    return Err(format!("unsupported bound: {line}"));
                }
                let lo = t[0].parse().map_err(|_| format!("bad bound: {line}"))?;
                let hi = t[4].parse().map_err(|_| format!("bad bound: {line}"))?;
                model.bounds.push((lo, t[2].to_string(), hi));
            }
            Section::Binaries => model.binaries.extend(tokens),
            Section::Generals => model.generals.extend(tokens),
        }
    }
    if !ended {
        return Err("missing End".into());
    }
    for (_, body) in statements(&obj_tokens) {
        model.objective.extend(parse_terms(&body));
    }
    for (name, body) in statements(&row_tokens) {
        let pos = body
            .iter()
            .position(|t| matches!(*t, "<=" | ">=" | "="))
            .ok_or_else(|| format!("row {name} has no sense"))?;
        let rhs = body
            .get(pos + 1)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format!("row {name} has no right-hand side"))?;
        model.rows.push(LpRow { name, terms: parse_terms(&body[..pos]), sense: body[pos].to_string(), rhs });
    }
    Ok(model)
}

impl LpModel {
    /// Objective value and names of violated rows, bounds and domains at
    /// `values` (absent variables are 0).
    pub fn evaluate(&self, values: &HashMap<String, f64>, tol: f64) -> (f64, Vec<String>) {
        let get = |n: &str| values.get(n).copied().unwrap_or(0.0);
        let objective = self.objective.iter().map(|(c, n)| c * get(n)).sum();
        let mut bad = Vec::new();
        for row in &self.rows {
            let lhs: f64 = row.terms.iter().map(|(c, n)| c * get(n)).sum();
            let slack = tol * row.rhs.abs().max(1.0);
            let ok = match row.sense.as_str() {
                "<=" => lhs <= row.rhs + slack,
                ">=" => lhs >= row.rhs - slack,
                _ => (lhs - row.rhs).abs() <= slack,
            };
            if !ok {
                bad.push(row.name.clone());
            }
        }
        for (lo, n, hi) in &self.bounds {
            let v = get(n);
            if v < lo - tol || v > hi + tol {
                bad.push(n.clone());
            }
        }
        for n in &self.binaries {
            let v = get(n);
            if v.abs() > tol && (v - 1.0).abs() > tol {
                bad.push(n.clone());
            }
        }
        for n in &self.generals {
            let v = get(n);
            if (v - v.round()).abs() > tol {
                bad.push(n.clone());
            }
        }
        (objective, bad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_model() {
        let text = "\\ c\nMinimize\n obj: + 2 x - 1.5 y\nSubject To\n r1: + 1 x + 1 y\n   <= 1\n r2: - 1 x = -1\nBounds\n 0 <= y <= 3\nBinaries\n x\nGenerals\n y\nEnd\n";
        let m = parse(text).unwrap();
        assert_eq!(m.rows.len(), 2);
        let vals: HashMap<String, f64> = [("x".to_string(), 1.0), ("y".to_string(), 0.0)].into();
        let (obj, bad) = m.evaluate(&vals, 1e-9);
        assert_eq!(obj, 2.0);
        assert!(bad.is_empty());
        let vals: HashMap<String, f64> = [("x".to_string(), 1.0), ("y".to_string(), 1.0)].into();
        assert_eq!(m.evaluate(&vals, 1e-9).1, vec!["r1".to_string()]);
    }
}
