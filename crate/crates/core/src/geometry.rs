//! Compact convex bodies in `ℝⁿ`.
//!
//! Three descriptors are supported: Euclidean balls, bounded H-polytopes
//! `{x : A x ≤ b}` (optionally with a vertex list), and ellipsoids
//! `{x : (x−c)ᵀ Q (x−c) ≤ 1}` with `Q` symmetric positive definite.
//!
//! Conventions
//! - `contains` tolerances are distances: a polytope row is tested as
//!   `(aᵢ·x − bᵢ)/‖aᵢ‖ ≤ tol`.
//! - Polytope projection is cyclic Dykstra over the halfspaces, finished by
//!   a primal active-set solve of the projection QP warm-started at the
//!   Dykstra iterate. Dykstra's change-based stopping rule can stall on an
//!   infeasible point when rows are duplicated or nearly parallel; the
//!   active-set pass makes the result exact. Ellipsoid projection is Newton
//!   on the KKT multiplier with a bisection fallback.
//! - Radii are measured from the origin: `inradius` is the largest `ρ` with
//!   `B̄(0,ρ) ⊂ K`, `circumradius` is `sup_{x∈K} ‖x‖`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, axpy, dot, norm2, scale, sub};
use crate::lp::{self, LpOutcome};
use crate::optim::{sphere_search, Sense};
use crate::sampling::{sphere_directions, unit_ball_points};

/// Dykstra stops once a full sweep moves the iterate less than this.
const DYKSTRA_CHANGE_TOL: f64 = 1e-12;
const DYKSTRA_MAX_SWEEPS: usize = 100_000;
const ELLIPSOID_NEWTON_ITERS: usize = 100;
const VERTEX_FEASIBILITY_TOL: f64 = 1e-9;

/// JSON descriptor of a body, as found in campaign files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodySpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Hpolytope {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vertices: Option<Vec<Vec<f64>>>,
    },
    Ellipsoid {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        center: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub enum Shape {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    HPolytope {
        rows: Vec<Vec<f64>>,
        b: Vec<f64>,
        row_norms: Vec<f64>,
        vertices: Option<Vec<Vec<f64>>>,
    },
    Ellipsoid {
        q: DMatrix<f64>,
        center: Vec<f64>,
        /// Eigenvalues of `Q`, ascending, with matching eigenvector columns.
        eigenvalues: Vec<f64>,
        eigenvectors: DMatrix<f64>,
        q_inv: DMatrix<f64>,
    },
}

/// A nonempty compact convex body.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    shape: Shape,
    dim: usize,
    interior: Vec<f64>,
}

/// `sup_{x∈K} ‖x‖` with the point attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circumradius {
    pub value: f64,
    pub witness: Vec<f64>,
    /// Set when the value comes from a local search and is only a certified
    /// lower bound (the witness lies in the body).
    pub lower_bound_only: bool,
}

/// A constraint active at a point, for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveConstraint {
    pub index: Option<usize>,
    pub description: String,
}

fn check_finite(label: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input(format!("{label} contains non-finite entries")))
    }
}

impl ConvexBody {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::Input("ball center must have dimension ≥ 1".into()));
        }
        check_finite("ball center", &center)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Input(format!("ball radius must be positive, got {radius}")));
        }
        let dim = center.len();
        Ok(Self {
            interior: center.clone(),
            shape: Shape::Ball { center, radius },
            dim,
        })
    }

    /// Closed unit ball `B̄(0,1)` of `ℝⁿ`.
    pub fn unit_ball(n: usize) -> Self {
        Self::ball(vec![0.0; n], 1.0).expect("valid unit ball")
    }

    /// Axis-aligned box `∏ [loᵢ, hiᵢ]` as an H-polytope with its vertices.
    pub fn aabb(lo: &[f64], hi: &[f64]) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        let n = lo.len();
        if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
            return Err(Error::Input("box requires lo < hi in every coordinate".into()));
        }
        let mut rows = Vec::with_capacity(2 * n);
        let mut b = Vec::with_capacity(2 * n);
        for i in 0..n {
            rows.push(linalg::basis(n, i));
            b.push(hi[i]);
            rows.push(scale(&linalg::basis(n, i), -1.0));
            b.push(-lo[i]);
        }
        let vertices = if n <= 12 {
            Some(
                (0..1usize << n)
                    .map(|mask| {
                        (0..n)
                            .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                            .collect()
                    })
                    .collect(),
            )
        } else {
            None
        };
        Self::hpolytope(rows, b, vertices)
    }

    /// Bounded H-polytope `{x : A x ≤ b}`.
    ///
    /// Rejects empty or unbounded systems: for every `±eⱼ` the LP
    /// `max ±dⱼ s.t. A d ≤ 0, |d| ≤ 1` must have value 0, which rules out any
    /// recession direction.
    pub fn hpolytope(rows: Vec<Vec<f64>>, b: Vec<f64>, vertices: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let dim = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Input("polytope needs at least one row".into()))?;
        if dim == 0 {
            return Err(Error::Input("polytope rows must be non-empty".into()));
        }
        if b.len() != rows.len() {
            return Err(Error::Input(format!(
                "polytope has {} rows but {} right-hand sides",
                rows.len(),
                b.len()
            )));
        }
        for r in &rows {
            check_dim(dim, r.len())?;
            check_finite("polytope row", r)?;
        }
        check_finite("polytope b", &b)?;
        let row_norms: Vec<f64> = rows.iter().map(|r| norm2(r)).collect();
        if let Some(i) = row_norms.iter().position(|&v| v == 0.0) {
            return Err(Error::Input(format!("polytope row {i} is zero")));
        }

        if let LpOutcome::Infeasible = lp::maximize(&vec![0.0; dim], &rows, &b, None) {
            return Err(Error::Input("polytope is empty".into()));
        }
        let zeros = vec![0.0; rows.len()];
        for j in 0..dim {
            for sign in [1.0, -1.0] {
                let c = scale(&linalg::basis(dim, j), sign);
                match lp::maximize(&c, &rows, &zeros, Some((-1.0, 1.0))) {
                    LpOutcome::Optimal { value, point } if value > 1e-9 => {
                        return Err(Error::Input(format!(
                            "polytope is unbounded along recession direction {point:?}"
                        )));
                    }
                    LpOutcome::Optimal { .. } => {}
                    other => {
                        return Err(Error::Input(format!("recession test failed: {other:?}")));
                    }
                }
            }
        }

        if let Some(vs) = &vertices {
            for (k, v) in vs.iter().enumerate() {
                check_dim(dim, v.len())?;
                for (i, (r, &bi)) in rows.iter().zip(&b).enumerate() {
                    if dot(r, v) > bi + VERTEX_FEASIBILITY_TOL {
                        return Err(Error::Input(format!("vertex {k} violates row {i}")));
                    }
                }
            }
            if vs.is_empty() {
                return Err(Error::Input("vertex list must be non-empty when given".into()));
            }
        }

        let interior = if b.iter().all(|&bi| bi > 0.0) {
            vec![0.0; dim]
        } else if let Some(vs) = &vertices {
            let mut c = vec![0.0; dim];
            for v in vs {
                c = axpy(&c, 1.0 / vs.len() as f64, v);
            }
            c
        } else {
            chebyshev_center(&rows, &b, &row_norms)?
        };

        Ok(Self {
            shape: Shape::HPolytope {
                rows,
                b,
                row_norms,
                vertices,
            },
            dim,
            interior,
        })
    }

    /// Ellipsoid `{x : (x−c)ᵀ Q (x−c) ≤ 1}`.
    pub fn ellipsoid(q: DMatrix<f64>, center: Vec<f64>) -> Result<Self> {
        let dim = center.len();
        if dim == 0 || !q.is_square() || q.nrows() != dim {
            return Err(Error::Input(format!(
                "ellipsoid Q must be {dim}×{dim}, got {}×{}",
                q.nrows(),
                q.ncols()
            )));
        }
        check_finite("ellipsoid center", &center)?;
        let scale_q = q.amax().max(1.0);
        if !linalg::is_symmetric(&q, 1e-12 * scale_q) {
            return Err(Error::Input("ellipsoid Q must be symmetric".into()));
        }
        let eig = SymmetricEigen::new(q.clone());
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        if eigenvalues[0] <= 0.0 || !eigenvalues.iter().all(|v| v.is_finite()) {
            return Err(Error::Input(format!(
                "ellipsoid Q must be positive definite (eigenvalues {eigenvalues:?})"
            )));
        }
        let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
        let q_inv = q
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Input("ellipsoid Q is singular".into()))?;
        Ok(Self {
            interior: center.clone(),
            shape: Shape::Ellipsoid {
                q,
                center,
                eigenvalues,
                eigenvectors,
                q_inv,
            },
            dim,
        })
    }

    pub fn from_spec(spec: &BodySpec) -> Result<Self> {
        match spec {
            BodySpec::Ball { center, radius } => Self::ball(center.clone(), *radius),
            BodySpec::Hpolytope { a, b, vertices } => Self::hpolytope(a.clone(), b.clone(), vertices.clone()),
            BodySpec::Ellipsoid { q, center } => {
                let m = linalg::matrix_from_rows(q).ok_or_else(|| Error::Input("ellipsoid Q is ragged".into()))?;
                Self::ellipsoid(m, center.clone())
            }
        }
    }

    pub fn to_spec(&self) -> BodySpec {
        match &self.shape {
            Shape::Ball { center, radius } => BodySpec::Ball {
                center: center.clone(),
                radius: *radius,
            },
            Shape::HPolytope { rows, b, vertices, .. } => BodySpec::Hpolytope {
                a: rows.clone(),
                b: b.clone(),
                vertices: vertices.clone(),
            },
            Shape::Ellipsoid { q, center, .. } => BodySpec::Ellipsoid {
                q: linalg::matrix_to_rows(q),
                center: center.clone(),
            },
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// A point in the interior (the origin whenever it qualifies).
    pub fn interior_point(&self) -> &[f64] {
        &self.interior
    }

    /// Whether this is the closed unit ball centred at the origin.
    pub fn is_unit_ball(&self) -> bool {
        matches!(&self.shape, Shape::Ball { center, radius }
            if *radius == 1.0 && center.iter().all(|&c| c == 0.0))
    }

    pub fn origin_in_interior(&self) -> bool {
        match &self.shape {
            Shape::Ball { center, radius } => norm2(center) < *radius,
            Shape::HPolytope { b, .. } => b.iter().all(|&bi| bi > 0.0),
            Shape::Ellipsoid { q, center, .. } => {
                let qc = linalg::mat_vec(q, center);
                dot(center, &qc) < 1.0
            }
        }
    }

    /// Error unless `0 ∈ int K`.
    pub fn requires_origin_interior(&self) -> Result<()> {
        if self.origin_in_interior() {
            Ok(())
        } else {
            Err(Error::Precondition("the origin must lie in the interior of the body".into()))
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        Ok(match &self.shape {
            Shape::Ball { center, radius } => linalg::dist(x, center) <= radius + tol,
            Shape::HPolytope { rows, b, row_norms, .. } => rows
                .iter()
                .zip(b)
                .zip(row_norms)
                .all(|((r, &bi), &rn)| (dot(r, x) - bi) / rn <= tol),
            Shape::Ellipsoid { q, center, .. } => {
                let w = sub(x, center);
                dot(&w, &linalg::mat_vec(q, &w)).sqrt() <= 1.0 + tol
            }
        })
    }

    /// Euclidean projection onto the body.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        match &self.shape {
            Shape::Ball { center, radius } => {
                let w = sub(x, center);
                let d = norm2(&w);
                Ok(if d <= *radius {
                    x.to_vec()
                } else {
                    axpy(center, radius / d, &w)
                })
            }
            Shape::HPolytope { rows, b, row_norms, .. } => {
                if rows
                    .iter()
                    .zip(b)
                    .all(|(r, &bi)| dot(r, x) <= bi)
                {
                    return Ok(x.to_vec());
                }
                let warm = match dykstra(rows, b, row_norms, x) {
                    Ok(p) | Err(Error::Numeric { best: p, .. }) => p,
                    Err(e) => return Err(e),
                };
                let feasible = rows.iter().zip(b).all(|(r, &bi)| dot(r, &warm) <= bi);
                active_set_projection(rows, b, x, if feasible { &warm } else { &self.interior })
            }
            Shape::Ellipsoid {
                center,
                eigenvalues,
                eigenvectors,
                q,
                ..
            } => {
                let w = sub(x, center);
                if dot(&w, &linalg::mat_vec(q, &w)) <= 1.0 {
                    return Ok(x.to_vec());
                }
                project_ellipsoid(center, eigenvalues, eigenvectors, &w)
            }
        }
    }

    /// Support function `h_K(u) = max_{x∈K} ⟨u,x⟩` and a maximiser.
    pub fn support(&self, u: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_dim(self.dim, u.len())?;
        match &self.shape {
            Shape::Ball { center, radius } => {
                let un = norm2(u);
                let p = if un > 0.0 {
                    axpy(center, radius / un, u)
                } else {
                    center.clone()
                };
                Ok((dot(center, u) + radius * un, p))
            }
            Shape::HPolytope { rows, b, vertices, .. } => {
                if let Some(vs) = vertices {
                    let mut best = (f64::NEG_INFINITY, vs[0].clone());
                    for v in vs {
                        let val = dot(u, v);
                        if val > best.0 {
                            best = (val, v.clone());
                        }
                    }
                    return Ok(best);
                }
                match lp::maximize(u, rows, b, None) {
                    LpOutcome::Optimal { value, point } => Ok((value, point)),
                    other => Err(Error::Numeric {
                        message: format!("support LP failed: {other:?}"),
                        best: self.interior.clone(),
                        residual: f64::INFINITY,
                    }),
                }
            }
            Shape::Ellipsoid { center, q_inv, .. } => {
                let qu = linalg::mat_vec(q_inv, u);
                let s = dot(u, &qu).sqrt();
                let p = if s > 0.0 { axpy(center, 1.0 / s, &qu) } else { center.clone() };
                Ok((dot(center, u) + s, p))
            }
        }
    }

    /// Distance travelled from `p` along unit direction `d` before leaving the
    /// body. `p` must lie in the body.
    pub fn ray_exit(&self, p: &[f64], d: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let w = sub(p, center);
                let wd = dot(&w, d);
                let disc = (wd * wd - dot(&w, &w) + radius * radius).max(0.0);
                (-wd + disc.sqrt()).max(0.0)
            }
            Shape::HPolytope { rows, b, .. } => rows
                .iter()
                .zip(b)
                .filter_map(|(r, &bi)| {
                    let rd = dot(r, d);
                    (rd > 0.0).then(|| ((bi - dot(r, p)) / rd).max(0.0))
                })
                .fold(f64::INFINITY, f64::min),
            Shape::Ellipsoid { q, center, .. } => {
                let w = sub(p, center);
                let qd = linalg::mat_vec(q, d);
                let a = dot(d, &qd);
                let bb = 2.0 * dot(&w, &qd);
                let c = dot(&w, &linalg::mat_vec(q, &w)) - 1.0;
                let disc = (bb * bb - 4.0 * a * c).max(0.0);
                ((-bb + disc.sqrt()) / (2.0 * a)).max(0.0)
            }
        }
    }

    /// Radial function `ρ(u) = sup{t ≥ 0 : t·u ∈ K}` for unit `u`; needs
    /// `0 ∈ K`.
    pub fn radial(&self, u: &[f64]) -> f64 {
        self.ray_exit(&vec![0.0; self.dim], u)
    }

    /// Largest `ρ` such that `B̄(0,ρ) ⊂ K`.
    pub fn inradius(&self) -> Result<f64> {
        self.requires_origin_interior()?;
        Ok(match &self.shape {
            Shape::Ball { center, radius } => radius - norm2(center),
            Shape::HPolytope { b, row_norms, .. } => b
                .iter()
                .zip(row_norms)
                .map(|(bi, rn)| bi / rn)
                .fold(f64::INFINITY, f64::min),
            Shape::Ellipsoid { .. } => self.min_norm_boundary_point()?.1,
        })
    }

    /// A boundary point of minimal Euclidean norm; its norm is the inradius.
    pub fn min_norm_boundary_point(&self) -> Result<(Vec<f64>, f64)> {
        self.requires_origin_interior()?;
        match &self.shape {
            Shape::Ball { center, radius } => {
                let cn = norm2(center);
                if cn == 0.0 {
                    Ok((scale(&linalg::basis(self.dim, 0), *radius), *radius))
                } else {
                    let p = scale(center, 1.0 - radius / cn);
                    Ok((p, radius - cn))
                }
            }
            Shape::HPolytope { rows, b, row_norms, .. } => {
                let mut j = 0;
                let mut best = f64::INFINITY;
                for (i, (bi, rn)) in b.iter().zip(row_norms).enumerate() {
                    let v = bi / rn;
                    if v < best {
                        best = v;
                        j = i;
                    }
                }
                Ok((scale(&rows[j], b[j] / (row_norms[j] * row_norms[j])), best))
            }
            Shape::Ellipsoid {
                center,
                eigenvalues,
                eigenvectors,
                ..
            } => {
                if center.iter().all(|&c| c == 0.0) {
                    let lmax = eigenvalues[self.dim - 1];
                    let v = canonical_sign(eigenvectors.column(self.dim - 1).iter().copied().collect());
                    let r = 1.0 / lmax.sqrt();
                    Ok((scale(&v, r), r))
                } else {
                    let radial = |u: &[f64]| Ok(self.radial(u));
                    let res = sphere_search(self.dim, &radial, Sense::Minimize, self.search_starts(), 0, true)?;
                    Ok((scale(&res.point, res.value), res.value))
                }
            }
        }
    }

    /// `sup_{x∈K} ‖x‖`.
    ///
    /// Exact for balls, polytopes with vertices and centred ellipsoids;
    /// otherwise a multistart support-point ascent whose value is a certified
    /// lower bound.
    pub fn circumradius(&self) -> Result<Circumradius> {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let cn = norm2(center);
                let witness = if cn == 0.0 {
                    scale(&linalg::basis(self.dim, 0), *radius)
                } else {
                    scale(center, 1.0 + radius / cn)
                };
                Ok(Circumradius {
                    value: cn + radius,
                    witness,
                    lower_bound_only: false,
                })
            }
            Shape::HPolytope {
                vertices: Some(vs), ..
            } => {
                let mut best = (0.0, vs[0].clone());
                for v in vs {
                    let n = norm2(v);
                    if n > best.0 {
                        best = (n, v.clone());
                    }
                }
                Ok(Circumradius {
                    value: best.0,
                    witness: best.1,
                    lower_bound_only: false,
                })
            }
            Shape::Ellipsoid {
                center,
                eigenvalues,
                eigenvectors,
                ..
            } if center.iter().all(|&c| c == 0.0) => {
                let r = 1.0 / eigenvalues[0].sqrt();
                let v = canonical_sign(eigenvectors.column(0).iter().copied().collect());
                Ok(Circumradius {
                    value: r,
                    witness: scale(&v, r),
                    lower_bound_only: false,
                })
            }
            _ => self.support_ascent(),
        }
    }

    fn search_starts(&self) -> usize {
        64 * self.dim.div_ceil(2).max(1)
    }

    /// Maximise `‖x‖` by iterating `u ← x/‖x‖, x ← argmax_{K} ⟨u,·⟩`; each step
    /// cannot decrease `‖x‖` since `‖x_new‖ ≥ ⟨u, x_new⟩ ≥ ⟨u, x⟩ = ‖x‖`.
    fn support_ascent(&self) -> Result<Circumradius> {
        let mut best = (f64::NEG_INFINITY, self.interior.clone());
        for u0 in sphere_directions(self.dim, self.search_starts(), 0) {
            let mut u = u0;
            let mut current = f64::NEG_INFINITY;
            let mut point = Vec::new();
            for _ in 0..200 {
                let (_, x) = self.support(&u)?;
                let xn = norm2(&x);
                if xn <= current * (1.0 + 1e-15) {
                    break;
                }
                current = xn;
                point = x;
                match linalg::normalized(&point) {
                    Some(v) => u = v,
                    None => break,
                }
            }
            if current > best.0 {
                best = (current, point);
            }
        }
        Ok(Circumradius {
            value: best.0,
            witness: best.1,
            lower_bound_only: true,
        })
    }

    /// `count` deterministic points on the boundary, obtained by shooting
    /// low-discrepancy rays from the interior point.
    pub fn boundary_sample(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        if count == 0 {
            return Err(Error::Input("boundary sample count must be ≥ 1".into()));
        }
        let p = &self.interior;
        Ok(sphere_directions(self.dim, count, seed)
            .into_iter()
            .map(|d| {
                if let Shape::Ball { center, radius } = &self.shape {
                    axpy(center, *radius, &d)
                } else {
                    let t = self.ray_exit(p, &d);
                    axpy(p, t, &d)
                }
            })
            .collect())
    }

    /// `count` deterministic points spread through the body (star-shaped
    /// radial scaling about the interior point).
    pub fn interior_sample(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let p = &self.interior;
        Ok(unit_ball_points(self.dim, count, seed)
            .into_iter()
            .map(|w| {
                let s = norm2(&w);
                if s == 0.0 {
                    return p.clone();
                }
                let d = scale(&w, 1.0 / s);
                let t = self.ray_exit(p, &d);
                axpy(p, s * t, &d)
            })
            .collect())
    }

    /// For a point in the body: its distance to the boundary (exact for balls
    /// and polytopes, a lower bound for ellipsoids). Negative outside.
    pub fn distance_to_boundary(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(match &self.shape {
            Shape::Ball { center, radius } => radius - linalg::dist(x, center),
            Shape::HPolytope { rows, b, row_norms, .. } => rows
                .iter()
                .zip(b)
                .zip(row_norms)
                .map(|((r, &bi), &rn)| (bi - dot(r, x)) / rn)
                .fold(f64::INFINITY, f64::min),
            Shape::Ellipsoid {
                q, center, eigenvalues, ..
            } => {
                let w = sub(x, center);
                let s = dot(&w, &linalg::mat_vec(q, &w)).sqrt();
                (1.0 - s) / eigenvalues[self.dim - 1].sqrt()
            }
        })
    }

    /// Constraints whose boundary lies within `tol` of `x`.
    pub fn active_constraints(&self, x: &[f64], tol: f64) -> Result<Vec<ActiveConstraint>> {
        check_dim(self.dim, x.len())?;
        Ok(match &self.shape {
            Shape::HPolytope { rows, b, row_norms, .. } => rows
                .iter()
                .zip(b)
                .zip(row_norms)
                .enumerate()
                .filter(|(_, ((r, &bi), &rn))| (bi - dot(r, x)) / rn <= tol)
                .map(|(i, ((r, &bi), _))| ActiveConstraint {
                    index: Some(i),
                    description: format_row(r, bi),
                })
                .collect(),
            _ => {
                if self.distance_to_boundary(x)? <= tol {
                    vec![ActiveConstraint {
                        index: None,
                        description: match self.shape {
                            Shape::Ball { .. } => "‖x − c‖ ≤ R".into(),
                            _ => "(x − c)ᵀQ(x − c) ≤ 1".into(),
                        },
                    }]
                } else {
                    Vec::new()
                }
            }
        })
    }
}

fn format_row(r: &[f64], b: f64) -> String {
    let terms: Vec<String> = r
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0.0)
        .map(|(j, &a)| match a {
            1.0 => format!("x{}", j + 1),
            -1.0 => format!("-x{}", j + 1),
            _ => format!("{a}*x{}", j + 1),
        })
        .collect();
    format!("{} <= {b}", terms.join(" + "))
}

fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-14) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    v
}

fn chebyshev_center(rows: &[Vec<f64>], b: &[f64], row_norms: &[f64]) -> Result<Vec<f64>> {
    // variables (x, t): max t  s.t.  aᵢ·x + ‖aᵢ‖ t ≤ bᵢ,  t ≤ 1
    let n = rows[0].len();
    let mut ext: Vec<Vec<f64>> = rows
        .iter()
        .zip(row_norms)
        .map(|(r, &rn)| {
            let mut e = r.clone();
            e.push(rn);
            e
        })
        .collect();
    let mut rhs = b.to_vec();
    let mut cap = vec![0.0; n + 1];
    cap[n] = 1.0;
    ext.push(cap.clone());
    rhs.push(1.0);
    match lp::maximize(&cap, &ext, &rhs, None) {
        LpOutcome::Optimal { point, .. } => Ok(point[..n].to_vec()),
        other => Err(Error::Input(format!("cannot find an interior point: {other:?}"))),
    }
}

fn dykstra(rows: &[Vec<f64>], b: &[f64], row_norms: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
    let m = rows.len();
    let mut x = x0.to_vec();
    let mut corrections = vec![vec![0.0; x0.len()]; m];
    for _ in 0..DYKSTRA_MAX_SWEEPS {
        let prev = x.clone();
        for i in 0..m {
            let y = linalg::add(&x, &corrections[i]);
            let excess = dot(&rows[i], &y) - b[i];
            x = if excess > 0.0 {
                axpy(&y, -excess / (row_norms[i] * row_norms[i]), &rows[i])
            } else {
                y.clone()
            };
            corrections[i] = sub(&y, &x);
        }
        if linalg::dist(&x, &prev) < DYKSTRA_CHANGE_TOL {
            return Ok(x);
        }
    }
    let violation = rows
        .iter()
        .zip(b)
        .zip(row_norms)
        .map(|((r, &bi), &rn)| ((dot(r, &x) - bi) / rn).max(0.0))
        .fold(0.0, f64::max);
    Err(Error::Numeric {
        message: "Dykstra projection did not converge".into(),
        best: x,
        residual: violation,
    })
}

/// Exact projection of `x0` onto `{x : A x ≤ b}` by the primal active-set
/// method for `min ½‖x − x0‖²`, started from a feasible `start`.
///
/// Each step solves the equality-constrained subproblem on the working set
/// by least squares, so redundant rows never enter it: a blocking row has
/// `aᵢ·p > 0` while `p` is orthogonal to every working row.
fn active_set_projection(rows: &[Vec<f64>], b: &[f64], x0: &[f64], start: &[f64]) -> Result<Vec<f64>> {
    let n = x0.len();
    let m = rows.len();
    let mut x = start.to_vec();
    let mut working: Vec<usize> = Vec::new();
    for _ in 0..50 * (m + n) {
        let g = sub(&x, x0);
        let lambda = if working.is_empty() {
            Vec::new()
        } else {
            // A_Wᵀ λ = −g in the least-squares sense.
            let at = DMatrix::from_fn(n, working.len(), |r, c| rows[working[c]][r]);
            let rhs = nalgebra::DVector::from_iterator(n, g.iter().map(|v| -v));
            let svd = at.svd(true, true);
            svd.solve(&rhs, 1e-12)
                .map_err(|e| Error::Numeric {
                    message: format!("active-set subproblem failed: {e}"),
                    best: x.clone(),
                    residual: f64::NAN,
                })?
                .iter()
                .copied()
                .collect()
        };
        let mut p: Vec<f64> = g.iter().map(|v| -v).collect();
        for (&i, &l) in working.iter().zip(&lambda) {
            p = axpy(&p, -l, &rows[i]);
        }
        if norm2(&p) <= 1e-13 * (1.0 + norm2(&g)) {
            match lambda.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) {
                Some((k, &l)) if l < -1e-12 => {
                    working.remove(k);
                }
                _ => return Ok(x),
            }
            continue;
        }
        let mut alpha = 1.0;
        let mut blocking = None;
        for i in (0..m).filter(|i| !working.contains(i)) {
            let ap = dot(&rows[i], &p);
            if ap > 1e-14 {
                let t = ((b[i] - dot(&rows[i], &x)) / ap).max(0.0);
                if t < alpha {
                    alpha = t;
                    blocking = Some(i);
                }
            }
        }
        x = axpy(&x, alpha, &p);
        if let Some(i) = blocking {
            working.push(i);
        }
    }
    Err(Error::Numeric {
        message: "active-set projection did not terminate".into(),
        residual: norm2(&sub(&x, x0)),
        best: x,
    })
}

/// Projection of `c + w` (outside) onto the ellipsoid. In the eigenbasis the
/// KKT point is `pᵢ = yᵢ/(1 + λ μᵢ)` with `λ > 0` the root of the decreasing
/// convex secular function `φ(λ) = Σ μᵢ yᵢ²/(1+λμᵢ)² − 1`; Newton from
/// `λ = 0` approaches it monotonically from the left.
fn project_ellipsoid(center: &[f64], eigenvalues: &[f64], eigenvectors: &DMatrix<f64>, w: &[f64]) -> Result<Vec<f64>> {
    let n = w.len();
    let y: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|r| eigenvectors[(r, k)] * w[r]).sum())
        .collect();
    let phi = |lam: f64| -> (f64, f64) {
        let mut v = -1.0;
        let mut dv = 0.0;
        for (mu, yi) in eigenvalues.iter().zip(&y) {
            let den = 1.0 + lam * mu;
            v += mu * yi * yi / (den * den);
            dv -= 2.0 * mu * mu * yi * yi / (den * den * den);
        }
        (v, dv)
    };
    let mut lam = 0.0;
    let mut converged = false;
    for _ in 0..ELLIPSOID_NEWTON_ITERS {
        let (v, dv) = phi(lam);
        if v.abs() <= 1e-15 {
            converged = true;
            break;
        }
        let next = lam - v / dv;
        if !next.is_finite() || next < 0.0 {
            break;
        }
        if (next - lam).abs() <= 1e-16 * lam.max(1.0) {
            lam = next;
            converged = true;
            break;
        }
        lam = next;
    }
    if !converged {
        let mut lo = 0.0;
        let mut hi = y
            .iter()
            .zip(eigenvalues)
            .map(|(yi, mu)| yi * yi / mu)
            .sum::<f64>()
            .sqrt()
            .max(1e-300);
        while phi(hi).0 > 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid).0 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lam = 0.5 * (lo + hi);
    }
    let z: Vec<f64> = y
        .iter()
        .zip(eigenvalues)
        .map(|(yi, mu)| yi / (1.0 + lam * mu))
        .collect();
    let p: Vec<f64> = (0..n)
        .map(|r| center[r] + (0..n).map(|k| eigenvectors[(r, k)] * z[k]).sum::<f64>())
        .collect();
    Ok(p)
}
