//! Hartman–Stampacchia variational inequalities: find `x̄ ∈ K` with
//! `⟨f(x̄), y − x̄⟩ ≥ 0` for every `y ∈ K`.
//!
//! The solver runs projected extragradient with a backtracked step, which
//! converges for pseudomonotone fields. If that stalls, it falls back to
//! multistart Levenberg–Marquardt on the natural residual map
//! `x ↦ x − Π_K(x − f(x))`. Existence always holds on compact convex `K`,
//! so a failure report is a statement about the solver only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::fields::VectorField;
use crate::geometry::{ActiveConstraint, ConvexBody, Shape};
use crate::linalg::{axpy, dist, dot, norm2, sub};
use crate::optim::levenberg_marquardt;

#[derive(Debug, Clone, Copy)]
pub struct VIProblem<'a> {
    pub body: &'a ConvexBody,
    pub field: &'a VectorField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Initial extragradient step; `None` means `1/(1+L)` when the field
    /// declares a Lipschitz estimate `L`, else `0.1`.
    pub tau0: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub multistarts: usize,
    pub seed: u64,
    pub class_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau0: None,
            tol: 1e-8,
            max_iter: 100_000,
            multistarts: 16,
            seed: 0,
            class_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    InteriorZero,
    BoundaryInwardNormal,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidencePoint {
    pub y: Vec<f64>,
    /// `⟨f(x̄), y − x̄⟩`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VISolution {
    pub point: Vec<f64>,
    /// Natural residual at `point` with `τ = 1`.
    pub residual: f64,
    /// Multiplier in `f(x̄) = −λ (x̄ − c)` for ball bodies.
    pub lambda: Option<f64>,
    pub classification: Classification,
    pub active_constraints: Vec<ActiveConstraint>,
    pub f_at_point: Vec<f64>,
    /// The five sampled `y` with the smallest inner products.
    pub evidence: Vec<EvidencePoint>,
    pub evidence_min: f64,
    pub evidence_samples: usize,
    pub spot_check_passed: bool,
    pub iterations: usize,
    pub method: String,
}

const EVIDENCE_SAMPLES: usize = 1000;

impl<'a> VIProblem<'a> {
    pub fn new(body: &'a ConvexBody, field: &'a VectorField) -> Result<Self> {
        check_dim(body.dimension(), field.dimension())?;
        Ok(Self { body, field })
    }

    /// `‖x − Π_K(x − τ f(x))‖`.
    pub fn natural_residual(&self, x: &[f64], tau: f64) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::Input(format!("τ must be positive, got {tau}")));
        }
        let fx = self.field.eval(x)?;
        let p = self.body.project(&axpy(x, -tau, &fx))?;
        Ok(dist(x, &p))
    }

    fn residual_map(&self, x: &[f64]) -> Result<Vec<f64>> {
        let fx = self.field.eval(x)?;
        let p = self.body.project(&sub(x, &fx))?;
        Ok(sub(x, &p))
    }
}

struct Run {
    point: Vec<f64>,
    residual: f64,
    iterations: usize,
}

/// Projected extragradient with a Khobotov step rule: the step is halved
/// until `τ‖f(x) − f(y)‖ ≤ 0.9 ‖x − y‖`, and again whenever an iterate
/// increases the residual.
fn extragradient(p: &VIProblem<'_>, x0: &[f64], tau0: f64, tol: f64, max_iter: usize) -> Result<Run> {
    let mut x = p.body.project(x0)?;
    let mut res = p.natural_residual(&x, 1.0)?;
    let mut best = (x.clone(), res);
    let mut tau = tau0;
    let mut since_improvement = 0usize;
    let mut extra = 0usize;
    let mut it = 0;
    while it < max_iter {
        if res <= tol {
            // polish a little past the tolerance, then stop
            extra += 1;
            if res <= 1e-3 * tol || extra > 50 {
                break;
            }
        }
        it += 1;
        let fx = p.field.eval(&x)?;
        let (y, fy) = loop {
            let y = p.body.project(&axpy(&x, -tau, &fx))?;
            let fy = p.field.eval(&y)?;
            let lhs = tau * dist(&fx, &fy);
            let rhs = 0.9 * dist(&x, &y);
            if lhs <= rhs || tau < 1e-14 {
                break (y, fy);
            }
            tau *= 0.5;
        };
        if dist(&x, &y) == 0.0 {
            // x is a fixed point of the projected step, which means a solution
            res = p.natural_residual(&x, 1.0)?;
            if res < best.1 {
                best = (x.clone(), res);
            }
            break;
        }
        let next = p.body.project(&axpy(&x, -tau, &fy))?;
        let next_res = p.natural_residual(&next, 1.0)?;
        if next_res > res * (1.0 + 1e-12) {
            tau *= 0.5;
        }
        x = next;
        res = next_res;
        if res < best.1 * (1.0 - 1e-6) {
            best = (x.clone(), res);
            since_improvement = 0;
        } else {
            if res < best.1 {
                best = (x.clone(), res);
            }
            since_improvement += 1;
            if since_improvement > 5000 || tau < 1e-14 {
                break;
            }
        }
    }
    Ok(Run {
        point: best.0,
        residual: best.1,
        iterations: it,
    })
}

fn lm_run(p: &VIProblem<'_>, x0: &[f64], max_iter: usize) -> Result<Run> {
    let residual = |x: &[f64]| p.residual_map(x);
    let project = |x: &[f64]| p.body.project(x);
    let r = levenberg_marquardt(&residual, &project, x0, max_iter)?;
    let res = p.natural_residual(&r.point, 1.0)?;
    Ok(Run {
        point: r.point,
        residual: res,
        iterations: r.iterations,
    })
}

/// Solve the VI and classify the solution.
pub fn solve(problem: &VIProblem<'_>, cfg: &SolverConfig) -> Result<VISolution> {
    check_dim(problem.body.dimension(), problem.field.dimension())?;
    if !(cfg.tol > 0.0) {
        return Err(Error::Input("tol must be positive".into()));
    }
    let tau0 = match cfg.tau0 {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(Error::Input(format!("τ₀ must be positive, got {t}"))),
        None => problem.field.lipschitz_estimate.map_or(0.1, |l| 1.0 / (1.0 + l)),
    };

    let start = problem.body.interior_point().to_vec();
    let mut best = extragradient(problem, &start, tau0, cfg.tol, cfg.max_iter)?;
    let mut method = "extragradient";

    if best.residual > cfg.tol {
        let mut starts = vec![start];
        starts.extend(problem.body.boundary_sample(cfg.multistarts.max(1), cfg.seed)?);
        let budget = (cfg.max_iter / starts.len().max(1)).max(200);
        let runs: Vec<Result<Run>> = starts
            .par_iter()
            .map(|s| {
                let lm = lm_run(problem, s, 200)?;
                if lm.residual <= cfg.tol {
                    return Ok(lm);
                }
                let eg = extragradient(problem, &lm.point, tau0, cfg.tol, budget)?;
                Ok(if eg.residual < lm.residual { eg } else { lm })
            })
            .collect();
        for r in runs {
            let r = r?;
            if r.residual < best.residual {
                best = r;
                method = "multistart";
            }
        }
    }

    if best.residual > cfg.tol {
        return Err(Error::Numeric {
            message: format!(
                "VI solver budget exhausted: residual {:.3e} > tol {:.1e}",
                best.residual, cfg.tol
            ),
            best: best.point,
            residual: best.residual,
        });
    }
    finish(problem, best, method, cfg)
}

fn finish(problem: &VIProblem<'_>, run: Run, method: &str, cfg: &SolverConfig) -> Result<VISolution> {
    let x = run.point;
    let fx = problem.field.eval(&x)?;
    let (classification, lambda) = classify_point(problem, &x, &fx, cfg.class_tol)?;
    let active_constraints = problem.body.active_constraints(&x, cfg.class_tol)?;

    let mut ys = problem.body.boundary_sample(EVIDENCE_SAMPLES / 2, cfg.seed ^ 0x5eed)?;
    ys.extend(problem.body.interior_sample(EVIDENCE_SAMPLES - ys.len(), cfg.seed ^ 0xba11)?);
    if let Shape::HPolytope { vertices: Some(vs), .. } = problem.body.shape() {
        ys.extend(vs.iter().cloned());
    }
    let mut evidence: Vec<EvidencePoint> = ys
        .into_iter()
        .map(|y| {
            let value = dot(&fx, &sub(&y, &x));
            EvidencePoint { y, value }
        })
        .collect();
    let evidence_samples = evidence.len();
    evidence.sort_by(|a, b| a.value.total_cmp(&b.value));
    evidence.truncate(5);
    let evidence_min = evidence.first().map_or(f64::INFINITY, |e| e.value);
    let spot_check_passed = evidence_min >= -10.0 * cfg.tol * (1.0 + norm2(&fx));

    Ok(VISolution {
        point: x,
        residual: run.residual,
        lambda,
        classification,
        active_constraints,
        f_at_point: fx,
        evidence,
        evidence_min,
        evidence_samples,
        spot_check_passed,
        iterations: run.iterations,
        method: method.into(),
    })
}

fn classify_point(
    problem: &VIProblem<'_>,
    x: &[f64],
    fx: &[f64],
    class_tol: f64,
) -> Result<(Classification, Option<f64>)> {
    let depth = problem.body.distance_to_boundary(x)?;
    let fnorm = norm2(fx);
    if depth > class_tol && fnorm <= class_tol {
        let lambda = matches!(problem.body.shape(), Shape::Ball { .. }).then_some(0.0);
        return Ok((Classification::InteriorZero, lambda));
    }
    if let Shape::Ball { center, .. } = problem.body.shape() {
        if depth <= class_tol {
            let w = sub(x, center);
            let ww = dot(&w, &w);
            if ww > 0.0 {
                let proj = dot(fx, &w) / ww;
                let lambda = -proj;
                let collinearity = norm2(&axpy(fx, -proj, &w));
                if collinearity <= class_tol && dot(fx, &w) <= 0.0 {
                    return Ok((Classification::BoundaryInwardNormal, Some(lambda)));
                }
                return Ok((Classification::Unclassified, Some(lambda)));
            }
        }
    }
    Ok((Classification::Unclassified, None))
}

/// Classify a candidate solution point (see [`Classification`]).
pub fn classify(problem: &VIProblem<'_>, sol: &VISolution, class_tol: f64) -> Result<Classification> {
    let fx = problem.field.eval(&sol.point)?;
    Ok(classify_point(problem, &sol.point, &fx, class_tol)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    #[test]
    fn natural_residual_examples() {
        let ball = ConvexBody::unit_ball(2);
        let f = VectorField::constant(vec![0.0, -3.0]).unwrap();
        let p = VIProblem::new(&ball, &f).unwrap();
        assert_eq!(p.natural_residual(&[0.0, 0.0], 1.0).unwrap(), 1.0);
        assert_eq!(p.natural_residual(&[0.0, 1.0], 1.0).unwrap(), 0.0);
        let g = VectorField::translation(vec![0.5, 0.0]).unwrap();
        let q = VIProblem::new(&ball, &g).unwrap();
        assert_eq!(q.natural_residual(&[0.5, 0.0], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn constant_field_on_ball() {
        let ball = ConvexBody::unit_ball(2);
        let f = VectorField::constant(vec![0.0, -3.0]).unwrap();
        let sol = solve(&VIProblem::new(&ball, &f).unwrap(), &SolverConfig::default()).unwrap();
        assert!(dist(&sol.point, &[0.0, 1.0]) <= 1e-7);
        assert_relative_eq!(sol.lambda.unwrap(), 3.0, epsilon = 1e-6);
        assert_eq!(sol.classification, Classification::BoundaryInwardNormal);
        assert!(sol.residual <= 1e-8);
        assert!(sol.spot_check_passed);
    }

    #[test]
    fn interior_zero_and_outside_translation() {
        let ball = ConvexBody::unit_ball(2);
        let f = VectorField::translation(vec![0.5, 0.0]).unwrap();
        let sol = solve(&VIProblem::new(&ball, &f).unwrap(), &SolverConfig::default()).unwrap();
        assert_eq!(sol.classification, Classification::InteriorZero);
        assert!(dist(&sol.point, &[0.5, 0.0]) <= 1e-7);

        let f = VectorField::translation(vec![2.0, 0.0]).unwrap();
        let sol = solve(&VIProblem::new(&ball, &f).unwrap(), &SolverConfig::default()).unwrap();
        assert!(dist(&sol.point, &[1.0, 0.0]) <= 1e-7);
        assert_relative_eq!(sol.lambda.unwrap(), 1.0, epsilon = 1e-6);
        assert_eq!(sol.classification, Classification::BoundaryInwardNormal);
    }

    #[test]
    fn square_corner_is_unclassified_with_active_faces() {
        let sq = ConvexBody::aabb(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let f = VectorField::constant(vec![-1.0, -1.0]).unwrap();
        let sol = solve(&VIProblem::new(&sq, &f).unwrap(), &SolverConfig::default()).unwrap();
        assert!(dist(&sol.point, &[1.0, 1.0]) <= 1e-7);
        assert_eq!(sol.classification, Classification::Unclassified);
        let faces: Vec<_> = sol.active_constraints.iter().map(|a| a.description.clone()).collect();
        assert_eq!(faces, vec!["x1 <= 1", "x2 <= 1"]);
    }

    #[test]
    fn nonmonotone_rotation_still_solved() {
        let ball = ConvexBody::unit_ball(2);
        let f = VectorField::rotation2d(3.0).unwrap();
        let sol = solve(&VIProblem::new(&ball, &f).unwrap(), &SolverConfig::default()).unwrap();
        assert!(sol.residual <= 1e-8);
    }

    #[test]
    fn affine_on_ellipsoid_reaches_tolerance() {
        let q = DMatrix::from_row_slice(2, 2, &[3.0, 0.5, 0.5, 1.0]);
        let body = ConvexBody::ellipsoid(q, vec![0.0, 0.0]).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let f = VectorField::affine(m, vec![4.0, -3.0]).unwrap();
        let sol = solve(&VIProblem::new(&body, &f).unwrap(), &SolverConfig::default()).unwrap();
        assert!(sol.residual <= 1e-8);
        assert!(sol.spot_check_passed);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let ball = ConvexBody::unit_ball(3);
        let f = VectorField::rotation2d(0.1).unwrap();
        assert!(VIProblem::new(&ball, &f).is_err());
    }
}
