//! Local derivative-free and finite-difference refinement used by the
//! multistart estimators and the VI fallback.
//!
//! Every routine works on a feasible set given only through a projection
//! callback, so the same code runs on balls, polytopes, ellipsoids and the
//! unit sphere (projection = renormalisation).

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{axpy, dist, dot, norm2};
use crate::sampling::random_unit;

pub type Objective<'a> = dyn Fn(&[f64]) -> Result<f64> + Sync + 'a;
pub type Projection<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    #[inline]
    fn score(self, v: f64) -> f64 {
        let s = match self {
            Sense::Maximize => v,
            Sense::Minimize => -v,
        };
        if s.is_nan() {
            f64::NEG_INFINITY
        } else {
            s
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LocalConfig {
    pub max_iter: usize,
    pub initial_step: f64,
    pub min_step: f64,
    /// Random poll directions (each used with both signs) added to the
    /// coordinate directions at every pattern-search iteration.
    pub random_polls: usize,
}

impl Default for LocalConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            initial_step: 0.25,
            min_step: 1e-12,
            random_polls: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LocalResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Projected compass search with randomized extra poll directions.
///
/// The iterate only moves on strict improvement, so the returned value is
/// never worse than the value at `project(x0)`.
pub fn pattern_search(
    objective: &Objective<'_>,
    project: &Projection<'_>,
    x0: &[f64],
    sense: Sense,
    cfg: &LocalConfig,
    rng: &mut ChaCha8Rng,
) -> Result<LocalResult> {
    let n = x0.len();
    let mut x = project(x0)?;
    let mut value = objective(&x)?;
    let mut score = sense.score(value);
    let mut step = cfg.initial_step;
    let mut iterations = 0;
    let mut polls: Vec<Vec<f64>> = Vec::with_capacity(2 * (n + cfg.random_polls));

    while iterations < cfg.max_iter && step >= cfg.min_step {
        iterations += 1;
        polls.clear();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            polls.push(e.clone());
            e[i] = -1.0;
            polls.push(e);
        }
        for _ in 0..cfg.random_polls {
            let d = random_unit(rng, n);
            polls.push(d.iter().map(|v| -v).collect());
            polls.push(d);
        }

        let mut best: Option<(Vec<f64>, f64, f64)> = None;
        for d in &polls {
            let cand = project(&axpy(&x, step, d))?;
            let v = objective(&cand)?;
            let s = sense.score(v);
            if s > score && best.as_ref().is_none_or(|b| s > b.2) {
                best = Some((cand, v, s));
            }
        }
        match best {
            Some((cand, v, s)) => {
                x = cand;
                value = v;
                score = s;
                step = (step * 2.0).min(cfg.initial_step);
            }
            None => step *= 0.5,
        }
    }
    Ok(LocalResult {
        point: x,
        value,
        iterations,
    })
}

/// Central finite-difference gradient of `f`.
pub fn fd_gradient(f: &Objective<'_>, x: &[f64]) -> Result<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-7 * x[i].abs().max(1.0);
        probe[i] = x[i] + h;
        let fp = f(&probe)?;
        probe[i] = x[i] - h;
        let fm = f(&probe)?;
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Projected gradient ascent/descent with Armijo backtracking on the
/// projection arc. Stops when the projected step stalls.
pub fn projected_gradient(
    objective: &Objective<'_>,
    project: &Projection<'_>,
    x0: &[f64],
    sense: Sense,
    max_iter: usize,
    initial_step: f64,
) -> Result<LocalResult> {
    let mut x = project(x0)?;
    let mut value = objective(&x)?;
    let mut step = initial_step;
    let mut iterations = 0;
    let sign = match sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    while iterations < max_iter {
        iterations += 1;
        let g = fd_gradient(objective, &x)?;
        let gnorm = norm2(&g);
        if !gnorm.is_finite() || gnorm < 1e-14 {
            break;
        }
        let mut t = step;
        let mut accepted = None;
        while t > 1e-14 {
            let y = project(&axpy(&x, sign * t, &g))?;
            let v = objective(&y)?;
            let gain = sense.score(v) - sense.score(value);
            let predicted = sign * dot(&g, &crate::linalg::sub(&y, &x));
            if gain > 0.0 && gain >= 1e-4 * predicted {
                accepted = Some((y, v));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((y, v)) => {
                let moved = dist(&y, &x);
                x = y;
                value = v;
                step = (t * 2.0).min(initial_step.max(1.0));
                if moved < 1e-13 {
                    break;
                }
            }
            None => break,
        }
    }
    Ok(LocalResult {
        point: x,
        value,
        iterations,
    })
}

pub type Residual<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync + 'a;

/// Levenberg–Marquardt on `‖r(x)‖²` with a finite-difference Jacobian.
/// Iterates are projected onto the feasible set after each accepted step.
pub fn levenberg_marquardt(
    residual: &Residual<'_>,
    project: &Projection<'_>,
    x0: &[f64],
    max_iter: usize,
) -> Result<LocalResult> {
    let n = x0.len();
    let mut x = project(x0)?;
    let mut r = residual(&x)?;
    let k = r.len();
    let mut cost = norm2(&r);
    let mut damping = 1e-3;
    let mut iterations = 0;
    while iterations < max_iter && cost > 1e-15 && damping < 1e12 {
        iterations += 1;
        let mut jac = DMatrix::<f64>::zeros(k, n);
        let mut probe = x.clone();
        for j in 0..n {
            let h = 1e-7 * x[j].abs().max(1.0);
            probe[j] = x[j] + h;
            let rp = residual(&probe)?;
            probe[j] = x[j] - h;
            let rm = residual(&probe)?;
            probe[j] = x[j];
            for i in 0..k {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let jt = jac.transpose();
        let rv = DVector::from_column_slice(&r);
        let grad = &jt * &rv;
        let mut normal = &jt * &jac;
        for i in 0..n {
            normal[(i, i)] += damping * (1.0 + normal[(i, i)]);
        }
        let Some(delta) = normal.lu().solve(&(-grad)) else {
            damping *= 4.0;
            continue;
        };
        let cand = project(&axpy(&x, 1.0, delta.as_slice()))?;
        let rc = residual(&cand)?;
        let cc = norm2(&rc);
        if cc < cost {
            let moved = dist(&cand, &x);
            x = cand;
            r = rc;
            cost = cc;
            damping = (damping / 3.0).max(1e-12);
            if moved < 1e-15 {
                break;
            }
        } else {
            damping *= 4.0;
        }
    }
    Ok(LocalResult {
        point: x,
        value: cost,
        iterations,
    })
}

/// Result of a multistart search over the Euclidean unit sphere.
#[derive(Debug, Clone)]
pub struct SphereResult {
    pub value: f64,
    pub point: Vec<f64>,
    /// The winning start stopped on the step tolerance, not the iteration cap.
    pub converged: bool,
}

pub(crate) fn normalize_onto_sphere(x: &[f64]) -> Result<Vec<f64>> {
    Ok(crate::linalg::normalized(x).unwrap_or_else(|| crate::linalg::basis(x.len(), 0)))
}

/// Multistart optimisation of `objective` over the unit sphere of `ℝⁿ`, with
/// renormalisation as the retraction. Starts are low-discrepancy directions;
/// ties between starts resolve to the lowest start index.
pub fn sphere_search(
    n: usize,
    objective: &Objective<'_>,
    sense: Sense,
    starts: usize,
    seed: u64,
    smooth: bool,
) -> Result<SphereResult> {
    use rayon::prelude::*;

    if n == 1 {
        let (p, m) = (objective(&[1.0])?, objective(&[-1.0])?);
        let pick_plus = sense.score(p) >= sense.score(m);
        return Ok(SphereResult {
            value: if pick_plus { p } else { m },
            point: vec![if pick_plus { 1.0 } else { -1.0 }],
            converged: true,
        });
    }
    let dirs = crate::sampling::sphere_directions(n, starts.max(1), seed);
    let cfg = LocalConfig {
        max_iter: 2000,
        initial_step: 0.2,
        min_step: 1e-12,
        random_polls: 2,
    };
    let results: Vec<Result<(LocalResult, bool)>> = dirs
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let start = if smooth {
                projected_gradient(objective, &normalize_onto_sphere, d, sense, 200, 0.2)?.point
            } else {
                d.clone()
            };
            let mut r = crate::sampling::rng(seed, 1 + i as u64);
            let res = pattern_search(objective, &normalize_onto_sphere, &start, sense, &cfg, &mut r)?;
            let converged = res.iterations < cfg.max_iter;
            Ok((res, converged))
        })
        .collect();
    let mut best: Option<(LocalResult, bool)> = None;
    for r in results {
        let (res, conv) = r?;
        if best
            .as_ref()
            .is_none_or(|(b, _)| sense.score(res.value) > sense.score(b.value))
        {
            best = Some((res, conv));
        }
    }
    let (res, converged) = best.expect("at least one start");
    Ok(SphereResult {
        value: res.value,
        point: res.point,
        converged,
    })
}
