//! Thin wrapper over `minilp` for `max ⟨c,x⟩ s.t. A x ≤ b`.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { value: f64, point: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// Maximise `⟨c,x⟩` subject to `rows[i]·x ≤ rhs[i]` and optional box bounds
/// applied to every coordinate.
pub(crate) fn maximize(c: &[f64], rows: &[Vec<f64>], rhs: &[f64], bounds: Option<(f64, f64)>) -> LpOutcome {
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let (lo, hi) = bounds.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let vars: Vec<_> = c.iter().map(|&ci| problem.add_var(ci, (lo, hi))).collect();
    for (row, &b) in rows.iter().zip(rhs) {
        let expr: Vec<_> = vars
            .iter()
            .zip(row)
            .filter(|(_, &a)| a != 0.0)
            .map(|(&v, &a)| (v, a))
            .collect();
        if expr.is_empty() {
            if b < 0.0 {
                return LpOutcome::Infeasible;
            }
            continue;
        }
        problem.add_constraint(expr, ComparisonOp::Le, b);
    }
    match problem.solve() {
        Ok(sol) => LpOutcome::Optimal {
            value: sol.objective(),
            point: vars.iter().map(|&v| *sol.var_value(v)).collect(),
        },
        Err(minilp::Error::Infeasible) => LpOutcome::Infeasible,
        Err(minilp::Error::Unbounded) => LpOutcome::Unbounded,
    }
}
