//! Sup/inf displacement estimators and the lower-bound checks built on them.
//!
//! Every estimate is one-sided by construction: a sampled supremum is a
//! value attained at a feasible witness, hence a lower bound of the true
//! supremum, and a sampled infimum is likewise an upper bound of the true
//! infimum. A nonnegative numeric slack therefore certifies the true
//! inequality; a negative slack on a genuinely nonvanishing field points at
//! the estimator, since the inequality itself is a theorem.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::fields::{rotation_sup_displacement, VectorField};
use crate::geometry::ConvexBody;
use crate::linalg::{self, axpy, norm2, scale, sub};
use crate::norms::Norm;
use crate::optim::{levenberg_marquardt, pattern_search, projected_gradient, LocalConfig, Objective, Sense};
use crate::sampling::rng;

/// Tolerance on `|slack|` for `holds_with_equality`.
pub const EQ_TOL: f64 = 1e-6;
/// `‖f(x)‖₂` at or below this counts as a vanishing witness.
pub const VANISHING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub boundary_starts: usize,
    pub interior_starts: usize,
    pub include_origin: bool,
    /// Iteration cap per start for each local method.
    pub max_iter: usize,
    pub seed: u64,
    /// Multiplier on the number of starts.
    pub budget: f64,
    /// Grow the number of starts with the dimension (`⌈n/3⌉×`).
    pub scale_with_dimension: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            boundary_starts: 64,
            interior_starts: 63,
            include_origin: true,
            max_iter: 500,
            seed: 0,
            budget: 1.0,
            scale_with_dimension: true,
        }
    }
}

impl EstimatorConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn counts(&self, n: usize) -> (usize, usize) {
        let mult = if self.scale_with_dimension { n.div_ceil(3).max(1) as f64 } else { 1.0 };
        let k = self.budget.max(0.0) * mult;
        (
            ((self.boundary_starts as f64) * k).round() as usize,
            ((self.interior_starts as f64) * k).round() as usize,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMode {
    SupLowerBound,
    InfUpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementEstimate {
    pub value: f64,
    pub witness: Vec<f64>,
    pub mode: EstimateMode,
    pub samples_used: usize,
    /// `L_total × covering-radius estimate`; only with a declared Lipschitz
    /// estimate, and itself an estimate rather than a certificate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    UnitBallThm22,
    EuclideanThm31,
    StarThm35,
    NuCor36,
    EigenThm42,
}

impl BoundKind {
    /// Parse a CLI short name (`thm22`, `thm31`, `thm35`, `cor36`, `thm42`)
    /// or the full snake-case name.
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "thm22" | "unit_ball_thm22" => Self::UnitBallThm22,
            "thm31" | "euclidean_thm31" => Self::EuclideanThm31,
            "thm35" | "star_thm35" => Self::StarThm35,
            "cor36" | "nu_cor36" => Self::NuCor36,
            "thm42" | "eigen_thm42" => Self::EigenThm42,
            other => return Err(Error::Input(format!("unknown bound kind {other:?}"))),
        })
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Self::UnitBallThm22 => "thm22",
            Self::EuclideanThm31 => "thm31",
            Self::StarThm35 => "thm35",
            Self::NuCor36 => "cor36",
            Self::EigenThm42 => "thm42",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    HoldsWithEquality,
    NumericallyViolated,
    HypothesisNotMet,
}

/// The same bound recomputed through `g = f/μ` and the unit-ball bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledReduction {
    /// `μ · sup ‖g(x) − x‖`.
    pub lhs: f64,
    /// `μ · (1 + inf ‖g(x)‖)`.
    pub rhs: f64,
    pub slack: f64,
    /// `|lhs_direct − lhs_reduced|`.
    pub lhs_disagreement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_kind: BoundKind,
    pub d_hat: DisplacementEstimate,
    pub inf_hat: DisplacementEstimate,
    pub r: f64,
    pub r1: f64,
    pub theta: [f64; 2],
    pub nu: f64,
    /// Set for the eigenvalue bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Set for sharpness reports, where `α` replaces the geometric constant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub rhs: f64,
    pub slack: f64,
    pub verdict: Verdict,
    pub claimed_nonvanishing: bool,
    pub vanishing_detected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaled_reduction: Option<ScaledReduction>,
    pub notes: Vec<String>,
}

fn verdict(slack: f64, claimed: bool, vanishing: bool) -> Verdict {
    if claimed && vanishing {
        Verdict::HypothesisNotMet
    } else if slack.abs() <= EQ_TOL {
        Verdict::HoldsWithEquality
    } else if slack > 0.0 {
        Verdict::Holds
    } else {
        Verdict::NumericallyViolated
    }
}

struct Best {
    value: f64,
    point: Vec<f64>,
    samples: usize,
}

/// Multistart optimisation of `objective` over `body`. Starts are the
/// interior point, low-discrepancy boundary points and interior points; each
/// start gets its own RNG stream keyed by its role and index, so enlarging
/// the budget only adds starts and never changes existing ones.
fn multistart(
    body: &ConvexBody,
    objective: &Objective<'_>,
    sense: Sense,
    smooth: bool,
    cfg: &EstimatorConfig,
    extra_starts: &[Vec<f64>],
) -> Result<Best> {
    let n = body.dimension();
    let (nb, ni) = cfg.counts(n);
    let mut starts: Vec<(u64, Vec<f64>)> = Vec::with_capacity(nb + ni + 1 + extra_starts.len());
    if cfg.include_origin {
        starts.push((0, body.interior_point().to_vec()));
    }
    if nb > 0 {
        for (i, p) in body.boundary_sample(nb, cfg.seed)?.into_iter().enumerate() {
            starts.push((2 * i as u64 + 1, p));
        }
    }
    if ni > 0 {
        for (i, p) in body.interior_sample(ni, cfg.seed ^ 0x1e57)?.into_iter().enumerate() {
            starts.push((2 * i as u64 + 2, p));
        }
    }
    for (i, p) in extra_starts.iter().enumerate() {
        starts.push((u64::MAX - i as u64, p.clone()));
    }
    if starts.is_empty() {
        return Err(Error::Input("estimator budget leaves no starts".into()));
    }

    let project = |x: &[f64]| body.project(x);
    let local = LocalConfig {
        max_iter: cfg.max_iter,
        ..LocalConfig::default()
    };
    let score = |v: f64| match sense {
        Sense::Maximize => v,
        Sense::Minimize => -v,
    };
    let results: Vec<Result<(f64, Vec<f64>)>> = starts
        .par_iter()
        .map(|(stream, x0)| {
            let mut x = x0.clone();
            if smooth {
                x = projected_gradient(objective, &project, &x, sense, cfg.max_iter, 0.25)?.point;
            }
            let mut r = rng(cfg.seed, *stream);
            let res = pattern_search(objective, &project, &x, sense, &local, &mut r)?;
            Ok((res.value, res.point))
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in results {
        let (v, p) = r?;
        if v.is_nan() {
            continue;
        }
        if best.as_ref().is_none_or(|(bv, _)| score(v) > score(*bv)) {
            best = Some((v, p));
        }
    }
    let (_, point) = best.ok_or_else(|| Error::Numeric {
        message: "objective was NaN at every start".into(),
        best: Vec::new(),
        residual: f64::NAN,
    })?;
    // report the objective at the witness itself so the pair is reproducible
    let value = objective(&point)?;
    Ok(Best {
        value,
        point,
        samples: starts.len(),
    })
}

/// Rough covering radius of the start set: the body's extent around its
/// interior point divided by `starts^{1/n}`.
fn covering_radius(body: &ConvexBody, starts: usize) -> Result<f64> {
    let c = body.interior_point();
    let extent = body
        .boundary_sample(64, 3)?
        .iter()
        .map(|p| linalg::dist(p, c))
        .fold(0.0, f64::max);
    Ok(2.0 * extent * (starts.max(1) as f64).powf(-1.0 / body.dimension() as f64))
}

fn norm_lipschitz(norm: &Norm, n: usize) -> Result<f64> {
    // ‖v‖_* ≤ ‖v‖₂ / θ*₁
    Ok(1.0 / norm.equivalence_constants(n)?.theta1)
}

fn estimate(
    body: &ConvexBody,
    objective: &Objective<'_>,
    sense: Sense,
    smooth: bool,
    cfg: &EstimatorConfig,
    lipschitz: Option<f64>,
) -> Result<DisplacementEstimate> {
    let best = multistart(body, objective, sense, smooth, cfg, &[])?;
    let gap_bound = match lipschitz {
        Some(l) => Some(l * covering_radius(body, best.samples)?),
        None => None,
    };
    Ok(DisplacementEstimate {
        value: best.value,
        witness: best.point,
        mode: match sense {
            Sense::Maximize => EstimateMode::SupLowerBound,
            Sense::Minimize => EstimateMode::InfUpperBound,
        },
        samples_used: best.samples,
        gap_bound,
    })
}

/// Estimate `sup_{x∈K} ‖f(x) − x‖` in the given norm.
pub fn sup_displacement(
    field: &VectorField,
    body: &ConvexBody,
    norm: &Norm,
    cfg: &EstimatorConfig,
) -> Result<DisplacementEstimate> {
    check_dim(body.dimension(), field.dimension())?;
    let objective = |x: &[f64]| norm.eval(&sub(&field.eval(x)?, x));
    let lip = match field.lipschitz_estimate {
        Some(l) => Some((l + 1.0) * norm_lipschitz(norm, body.dimension())?),
        None => None,
    };
    estimate(body, &objective, Sense::Maximize, norm.is_smooth(), cfg, lip)
}

/// Estimate `inf_{x∈K} ‖f(x)‖` in the given norm.
pub fn inf_norm(field: &VectorField, body: &ConvexBody, norm: &Norm, cfg: &EstimatorConfig) -> Result<DisplacementEstimate> {
    check_dim(body.dimension(), field.dimension())?;
    let objective = |x: &[f64]| norm.eval(&field.eval(x)?);
    let lip = match field.lipschitz_estimate {
        Some(l) => Some(l * norm_lipschitz(norm, body.dimension())?),
        None => None,
    };
    estimate(body, &objective, Sense::Minimize, norm.is_smooth(), cfg, lip)
}

fn vanishing_at(field: &VectorField, witness: &[f64]) -> Result<bool> {
    Ok(norm2(&field.eval(witness)?) <= VANISHING_TOL)
}

const SAFE_DIRECTION_NOTE: &str = "d_hat is attained at its witness (a lower bound of the true sup) and inf_hat likewise \
     bounds the true inf from above, so slack >= 0 certifies the inequality; a violation on a nonvanishing field \
     indicates estimator shortfall";

/// Evaluate one of the displacement lower bounds for `field` on `body`.
pub fn check_lower_bound(
    field: &VectorField,
    body: &ConvexBody,
    norm: &Norm,
    kind: BoundKind,
    cfg: &EstimatorConfig,
) -> Result<BoundReport> {
    check_dim(body.dimension(), field.dimension())?;
    let n = body.dimension();
    if let Some(d) = norm.dimension() {
        check_dim(n, d)?;
    }
    let mut notes = vec![SAFE_DIRECTION_NOTE.to_string()];
    let euclid_only = matches!(kind, BoundKind::UnitBallThm22 | BoundKind::EuclideanThm31);
    if euclid_only && !norm.is_euclidean() {
        return Err(Error::Precondition(format!(
            "{} is stated for the Euclidean norm",
            kind.short_name()
        )));
    }
    if kind == BoundKind::EigenThm42 {
        return Err(Error::Input("the eigenvalue bound needs μ; use check_eigen_bound".into()));
    }
    if kind == BoundKind::UnitBallThm22 && !body.is_unit_ball() {
        return Err(Error::Precondition("thm22 is stated on the closed unit ball".into()));
    }
    body.requires_origin_interior()?;

    let d_hat = sup_displacement(field, body, norm, cfg)?;
    let inf_hat = inf_norm(field, body, norm, cfg)?;
    let r = body.inradius()?;
    let circ = body.circumradius()?;
    if circ.lower_bound_only {
        notes.push("r1 is a lower bound from a local search".into());
    }
    let consts = norm.equivalence_constants(n)?;
    if !consts.converged {
        notes.push("equivalence constants are estimates (search hit its iteration cap)".into());
    }
    let (theta1, theta2) = (consts.theta1, consts.theta2);
    let nu = consts.nu();
    let rhs = match kind {
        BoundKind::UnitBallThm22 => 1.0 + inf_hat.value,
        BoundKind::EuclideanThm31 => r + inf_hat.value,
        BoundKind::StarThm35 => r / theta2 + (theta1 / theta2) * inf_hat.value,
        BoundKind::NuCor36 => nu * (r + inf_hat.value),
        BoundKind::EigenThm42 => unreachable!(),
    };
    let slack = d_hat.value - rhs;
    let vanishing = vanishing_at(field, &inf_hat.witness)?;
    if vanishing {
        notes.push(format!(
            "field vanishes (‖f‖ ≤ {VANISHING_TOL:e}) at {:?}",
            inf_hat.witness
        ));
    }
    Ok(BoundReport {
        bound_kind: kind,
        verdict: verdict(slack, field.claimed_nonvanishing, vanishing),
        d_hat,
        inf_hat,
        r,
        r1: circ.value,
        theta: [theta1, theta2],
        nu,
        mu: None,
        alpha: None,
        rhs,
        slack,
        claimed_nonvanishing: field.claimed_nonvanishing,
        vanishing_detected: vanishing,
        scaled_reduction: None,
        notes,
    })
}

/// `sup_{‖x‖≤1} ‖f(x) − μx‖ ≥ μ + inf_{‖x‖≤1} ‖f(x)‖`, computed directly and
/// through the unit-ball bound for `g = f/μ`.
pub fn check_eigen_bound(field: &VectorField, mu: f64, cfg: &EstimatorConfig) -> Result<BoundReport> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Input(format!("μ must be positive, got {mu}")));
    }
    let n = field.dimension();
    let body = ConvexBody::unit_ball(n);
    let norm = Norm::Euclidean;

    let lhs_obj = |x: &[f64]| Ok(norm2(&axpy(&field.eval(x)?, -mu, x)));
    let lip = field.lipschitz_estimate.map(|l| l + mu);
    let d_hat = estimate(&body, &lhs_obj, Sense::Maximize, true, cfg, lip)?;
    let inf_hat = inf_norm(field, &body, &norm, cfg)?;
    let rhs = mu + inf_hat.value;
    let slack = d_hat.value - rhs;

    let g = VectorField::scaled(field.clone(), mu)?;
    let g_sup = sup_displacement(&g, &body, &norm, cfg)?;
    let g_inf = inf_norm(&g, &body, &norm, cfg)?;
    let red_lhs = mu * g_sup.value;
    let red_rhs = mu * (1.0 + g_inf.value);
    let reduction = ScaledReduction {
        lhs: red_lhs,
        rhs: red_rhs,
        slack: red_lhs - red_rhs,
        lhs_disagreement: (d_hat.value - red_lhs).abs(),
    };

    let vanishing = vanishing_at(field, &inf_hat.witness)?;
    let mut notes = vec![SAFE_DIRECTION_NOTE.to_string()];
    if vanishing {
        notes.push(format!("field vanishes at {:?}", inf_hat.witness));
    }
    Ok(BoundReport {
        bound_kind: BoundKind::EigenThm42,
        verdict: verdict(slack, field.claimed_nonvanishing, vanishing),
        d_hat,
        inf_hat,
        r: 1.0,
        r1: 1.0,
        theta: [1.0, 1.0],
        nu: 1.0,
        mu: Some(mu),
        alpha: None,
        rhs,
        slack,
        claimed_nonvanishing: field.claimed_nonvanishing,
        vanishing_detected: vanishing,
        scaled_reduction: Some(reduction),
        notes,
    })
}

/// A nonvanishing field for which `sup ‖f(x) − x‖ ≥ α + inf ‖f(x)‖` fails,
/// showing that no constant `α > r` can replace the inradius.
///
/// For `α` beyond the circumradius the field is `x − x′` with `‖x′‖ = α`
/// (so `x′ ∉ K`); otherwise it is `x − (1+ε)x′` with `x′` a boundary point
/// of minimal norm.
pub fn sharpness_witness(
    body: &ConvexBody,
    alpha: f64,
    eps: f64,
    cfg: &EstimatorConfig,
) -> Result<(VectorField, BoundReport)> {
    let (xb, r) = body.min_norm_boundary_point()?;
    if alpha <= r {
        return Err(Error::Input(format!(
            "no witness exists for α = {alpha} ≤ r = {r}: the bound holds with any such α"
        )));
    }
    let circ = body.circumradius()?;
    let u = scale(&xb, 1.0 / norm2(&xb));
    let far = scale(&u, alpha);
    let (field, construction) = if alpha > circ.value && !body.contains(&far, 0.0)? {
        (VectorField::translation(far)?, "translation by x′ with ‖x′‖ = α outside K")
    } else {
        (
            VectorField::boundary_translate(xb, eps)?,
            "translation by (1+ε)x′ with x′ a minimal-norm boundary point",
        )
    };
    let field = field.with_nonvanishing(true);
    let norm = Norm::Euclidean;
    let d_hat = sup_displacement(&field, body, &norm, cfg)?;
    let inf_hat = inf_norm(&field, body, &norm, cfg)?;
    if !(inf_hat.value > 0.0) || vanishing_at(&field, &inf_hat.witness)? {
        return Err(Error::Numeric {
            message: "sharpness construction vanished on the body".into(),
            best: inf_hat.witness,
            residual: inf_hat.value,
        });
    }
    let rhs = alpha + inf_hat.value;
    let slack = d_hat.value - rhs;
    let report = BoundReport {
        bound_kind: BoundKind::EuclideanThm31,
        verdict: verdict(slack, true, false),
        d_hat,
        inf_hat,
        r,
        r1: circ.value,
        theta: [1.0, 1.0],
        nu: 1.0,
        mu: None,
        alpha: Some(alpha),
        rhs,
        slack,
        claimed_nonvanishing: true,
        vanishing_detected: false,
        scaled_reduction: None,
        notes: vec![format!("construction: {construction}")],
    };
    Ok((field, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorantReport {
    pub passed: bool,
    pub samples: usize,
    /// Largest `‖P₁φ(x) − x‖ − ‖φ(x) − x‖` seen (≤ 0 when the minorant holds).
    pub max_violation: f64,
    /// Largest deviation from the Pythagoras identity.
    pub max_identity_error: f64,
    pub sup_full: f64,
    pub sup_projected: f64,
}

/// For `x` in `F = span(e₁, …, e_m)` check
/// `‖φ(x) − x‖² = ‖P₁φ(x) − x‖² + ‖P₂φ(x)‖²` and hence
/// `‖φ(x) − x‖ ≥ ‖P₁φ(x) − x‖`.
pub fn projection_minorant_check(
    phi: &VectorField,
    n: usize,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<MinorantReport> {
    check_dim(n, phi.dimension())?;
    if m == 0 || m > n {
        return Err(Error::Input(format!("need 1 ≤ m ≤ N, got m={m}, N={n}")));
    }
    const TOL: f64 = 1e-10;
    let points = crate::sampling::unit_ball_points(m, samples, seed);
    let mut report = MinorantReport {
        passed: true,
        samples,
        max_violation: f64::NEG_INFINITY,
        max_identity_error: 0.0,
        sup_full: 0.0,
        sup_projected: 0.0,
    };
    for z in points {
        let mut x = scale(&z, 10.0);
        x.resize(n, 0.0);
        let y = phi.eval(&x)?;
        let full = norm2(&sub(&y, &x));
        let head: Vec<f64> = y[..m].iter().zip(&x[..m]).map(|(a, b)| a - b).collect();
        let tail = &y[m..];
        let projected = norm2(&head);
        let pythagoras = (projected * projected + tail.iter().map(|v| v * v).sum::<f64>()).sqrt();
        report.max_identity_error = report.max_identity_error.max((full - pythagoras).abs());
        report.max_violation = report.max_violation.max(projected - full);
        report.sup_full = report.sup_full.max(full);
        report.sup_projected = report.sup_projected.max(projected);
    }
    if samples == 0 {
        report.max_violation = 0.0;
    }
    report.passed = report.max_violation <= TOL && report.max_identity_error <= TOL;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub r: f64,
    pub sup: f64,
    pub witness: Vec<f64>,
}

/// `sup_{‖y‖≤r} ‖φ(y) − ψ(y)‖` in the dual norm, for each radius. The
/// previous radius' witness seeds the next search and the running maximum is
/// carried forward, so the profile is nondecreasing exactly.
pub fn growth_profile(
    phi: &VectorField,
    psi: &VectorField,
    norm: &Norm,
    radii: &[f64],
    cfg: &EstimatorConfig,
) -> Result<Vec<GrowthRow>> {
    let n = phi.dimension();
    check_dim(n, psi.dimension())?;
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.first().is_some_and(|&r| !(r > 0.0)) {
        return Err(Error::Input("radii must be positive and strictly increasing".into()));
    }
    let objective = |y: &[f64]| norm.dual_eval(&sub(&phi.eval(y)?, &psi.eval(y)?));
    let mut rows: Vec<GrowthRow> = Vec::with_capacity(radii.len());
    for &r in radii {
        let body = ConvexBody::ball(vec![0.0; n], r)?;
        let extra: Vec<Vec<f64>> = rows.last().map(|row| vec![row.witness.clone()]).unwrap_or_default();
        let best = multistart(&body, &objective, Sense::Maximize, false, cfg, &extra)?;
        let row = match rows.last() {
            Some(prev) if prev.sup > best.value => GrowthRow {
                r,
                sup: prev.sup,
                witness: prev.witness.clone(),
            },
            _ => GrowthRow {
                r,
                sup: best.value,
                witness: best.point,
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalZero {
    pub point: Vec<f64>,
    /// `‖A ψ(x̄)‖₂`.
    pub residual: f64,
    /// Radius of the ball in which the point was found.
    pub radius: f64,
}

const ZERO_TOL: f64 = 1e-6;

/// Find `x̄` with `A ψ(x̄) = 0` by Levenberg–Marquardt on `‖Aψ(x)‖²` over
/// balls of radius 2, 4, …, 256.
pub fn find_functional_zero(psi: &VectorField, a: &[Vec<f64>], cfg: &EstimatorConfig) -> Result<FunctionalZero> {
    let n = psi.dimension();
    if psi.displacement_bound().is_none() {
        return Err(Error::Precondition(
            "ψ must have a known finite displacement bound sup ‖x − ψ(x)‖".into(),
        ));
    }
    for row in a {
        check_dim(n, row.len())?;
    }
    if a.is_empty() {
        return Ok(FunctionalZero {
            point: vec![0.0; n],
            residual: 0.0,
            radius: 0.0,
        });
    }
    let residual = |x: &[f64]| {
        let y = psi.eval(x)?;
        Ok(a.iter().map(|row| linalg::dot(row, &y)).collect::<Vec<f64>>())
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut radius = 2.0;
    while radius <= 256.0 {
        let body = ConvexBody::ball(vec![0.0; n], radius)?;
        let mut starts = vec![vec![0.0; n]];
        starts.extend(body.interior_sample(15, cfg.seed)?);
        let project = |x: &[f64]| body.project(x);
        let runs: Vec<Result<(f64, Vec<f64>)>> = starts
            .par_iter()
            .map(|s| {
                let r = levenberg_marquardt(&residual, &project, s, 500)?;
                Ok((r.value, r.point))
            })
            .collect();
        for r in runs {
            let (v, p) = r?;
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, p));
            }
        }
        let (v, p) = best.clone().expect("at least one start");
        if v <= ZERO_TOL {
            return Ok(FunctionalZero {
                residual: norm2(&residual(&p)?),
                point: p,
                radius,
            });
        }
        radius *= 2.0;
    }
    let (v, p) = best.expect("at least one radius");
    Err(Error::Numeric {
        message: format!("no functional zero found up to radius 256 (best ‖Aψ‖ = {v:.3e})"),
        best: p,
        residual: v,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationRow {
    pub alpha: f64,
    pub d_estimate: f64,
    pub d_closed_form: f64,
    pub gamma: f64,
    pub slack: f64,
}

/// `count` equally spaced angles in `[−π, π]` on the unit disc.
pub fn rotation_sweep(count: usize, cfg: &EstimatorConfig) -> Result<Vec<RotationRow>> {
    use std::f64::consts::PI;
    if count == 0 {
        return Err(Error::Input("need at least one angle".into()));
    }
    let body = ConvexBody::unit_ball(2);
    let norm = Norm::Euclidean;
    (0..count)
        .map(|k| {
            let alpha = if count == 1 {
                0.0
            } else if k == count - 1 {
                PI
            } else {
                -PI + 2.0 * PI * k as f64 / (count - 1) as f64
            };
            let f = VectorField::rotation2d(alpha)?;
            let d = sup_displacement(&f, &body, &norm, cfg)?;
            let inf = inf_norm(&f, &body, &norm, cfg)?;
            let gamma = 1.0 + inf.value;
            Ok(RotationRow {
                alpha,
                d_estimate: d.value,
                d_closed_form: rotation_sup_displacement(alpha)?,
                gamma,
                slack: d.value - gamma,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{kakutani_fixed_point, make_subspace_construction};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn cfg() -> EstimatorConfig {
        EstimatorConfig::default()
    }

    #[test]
    fn sup_examples() {
        let body = ConvexBody::aabb(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let t = VectorField::translation(vec![3.0, 0.0]).unwrap();
        let est = sup_displacement(&t, &body, &Norm::Euclidean, &cfg()).unwrap();
        assert_relative_eq!(est.value, 3.0, epsilon = 1e-12);
        assert_eq!(est.mode, EstimateMode::SupLowerBound);
        let ball = ConvexBody::unit_ball(2);
        let rot = VectorField::rotation2d(PI / 3.0).unwrap();
        let est = sup_displacement(&rot, &ball, &Norm::Euclidean, &cfg()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-3);
        let id = VectorField::identity(2).unwrap();
        assert_eq!(sup_displacement(&id, &ball, &Norm::Euclidean, &cfg()).unwrap().value, 0.0);
    }

    #[test]
    fn inf_examples() {
        let ball = ConvexBody::unit_ball(2);
        let t = VectorField::translation(vec![3.0, 0.0]).unwrap();
        let est = inf_norm(&t, &ball, &Norm::Euclidean, &cfg()).unwrap();
        assert_relative_eq!(est.value, 2.0, epsilon = 1e-9);
        assert!(linalg::dist(&est.witness, &[1.0, 0.0]) < 1e-4);
        let c = VectorField::constant(vec![1.0, -2.0]).unwrap();
        assert_relative_eq!(inf_norm(&c, &ball, &Norm::Euclidean, &cfg()).unwrap().value, 5f64.sqrt());
        let rot = VectorField::rotation2d(1.0).unwrap();
        let est = inf_norm(&rot, &ball, &Norm::Euclidean, &cfg()).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn lower_bound_examples() {
        let ball = ConvexBody::unit_ball(2);
        let t = VectorField::translation(vec![3.0, 0.0]).unwrap().with_nonvanishing(true);
        let rep = check_lower_bound(&t, &ball, &Norm::Euclidean, BoundKind::EuclideanThm31, &cfg()).unwrap();
        assert_eq!(rep.verdict, Verdict::HoldsWithEquality);
        assert!(rep.slack.abs() < 1e-6);

        let rot = VectorField::rotation2d(PI / 2.0).unwrap();
        let rep = check_lower_bound(&rot, &ball, &Norm::Euclidean, BoundKind::UnitBallThm22, &cfg()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(rep.vanishing_detected);
        assert!((rep.slack - (2f64.sqrt() - 1.0)).abs() < 1e-6);

        let rot = VectorField::rotation2d(PI / 6.0).unwrap();
        let rep = check_lower_bound(&rot, &ball, &Norm::Euclidean, BoundKind::UnitBallThm22, &cfg()).unwrap();
        assert_eq!(rep.verdict, Verdict::NumericallyViolated);
        assert!(rep.vanishing_detected);

        let claimed = VectorField::rotation2d(PI / 6.0).unwrap().with_nonvanishing(true);
        let rep = check_lower_bound(&claimed, &ball, &Norm::Euclidean, BoundKind::UnitBallThm22, &cfg()).unwrap();
        assert_eq!(rep.verdict, Verdict::HypothesisNotMet);

        let big = ConvexBody::ball(vec![0.0, 0.0], 2.0).unwrap();
        assert!(check_lower_bound(&t, &big, &Norm::Euclidean, BoundKind::UnitBallThm22, &cfg()).is_err());
    }

    #[test]
    fn eigen_examples() {
        let f = VectorField::polynomial(vec![1.0, 0.0, 1.0]).unwrap();
        for mu in [1.0, 2.0] {
            let rep = check_eigen_bound(&f, mu, &cfg()).unwrap();
            assert_relative_eq!(rep.d_hat.value, 2.0 + mu, epsilon = 1e-9);
            assert_relative_eq!(rep.rhs, 1.0 + mu, epsilon = 1e-9);
            assert!((rep.d_hat.witness[0] + 1.0).abs() < 1e-4);
            assert!(rep.scaled_reduction.unwrap().lhs_disagreement < 1e-8);
        }
        let c = VectorField::constant(vec![0.6, 0.8]).unwrap();
        let rep = check_eigen_bound(&c, 1.5, &cfg()).unwrap();
        assert!(rep.slack.abs() < 1e-6, "{}", rep.slack);
    }

    #[test]
    fn sharpness_examples() {
        let sq = ConvexBody::aabb(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let (f, rep) = sharpness_witness(&sq, 1.2, 0.1, &cfg()).unwrap();
        assert_eq!(f.eval(&[0.0, 0.0]).unwrap(), vec![-1.1, 0.0]);
        assert!((rep.d_hat.value - 1.1).abs() < 1e-6);
        assert!((rep.inf_hat.value - 0.1).abs() < 1e-6);
        assert!(rep.slack <= -0.19);

        let ball = ConvexBody::unit_ball(2);
        let (f, rep) = sharpness_witness(&ball, 1.5, 0.1, &cfg()).unwrap();
        assert_eq!(f.eval(&[0.0, 0.0]).unwrap(), vec![-1.5, 0.0]);
        assert_eq!(rep.verdict, Verdict::NumericallyViolated);
        assert!(sharpness_witness(&sq, 0.9, 0.1, &cfg()).is_err());
    }

    #[test]
    fn minorant_examples() {
        let id = VectorField::identity(6).unwrap();
        let rep = projection_minorant_check(&id, 6, 3, 100, 1).unwrap();
        assert!(rep.passed && rep.sup_full == 0.0);
        let c = VectorField::constant(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(projection_minorant_check(&c, 4, 2, 100, 2).unwrap().passed);
        let (psi, _) = make_subspace_construction(8, 4).unwrap();
        let rep = projection_minorant_check(&psi, 8, 4, 1000, 3).unwrap();
        assert!(rep.passed && rep.max_identity_error <= 1e-10);
    }

    #[test]
    fn growth_examples() {
        let id = VectorField::identity(2).unwrap();
        let e1 = VectorField::constant(vec![1.0, 0.0]).unwrap();
        let rows = growth_profile(&id, &e1, &Norm::Euclidean, &[1.0, 10.0], &cfg()).unwrap();
        assert!((rows[0].sup - 2.0).abs() < 1e-4 && (rows[1].sup - 11.0).abs() < 1e-4);
        assert!(growth_profile(&id, &e1, &Norm::Euclidean, &[2.0, 1.0], &cfg()).is_err());
    }

    #[test]
    fn functional_zero_examples() {
        let psi = VectorField::displacement_form(VectorField::kakutani(3).unwrap());
        let a = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let z = find_functional_zero(&psi, &a, &cfg()).unwrap();
        assert!(z.residual <= 1e-6);
        let empty = find_functional_zero(&psi, &[], &cfg()).unwrap();
        assert_eq!(empty.residual, 0.0);
        let eye: Vec<Vec<f64>> = (0..3).map(|i| linalg::basis(3, i)).collect();
        let z = find_functional_zero(&psi, &eye, &cfg()).unwrap();
        assert!(linalg::dist(&z.point, &kakutani_fixed_point(3).unwrap()) <= 1e-6);
        let rot = VectorField::rotation2d(0.3).unwrap();
        assert!(find_functional_zero(&rot, &[vec![1.0, 0.0]], &cfg()).is_err());
    }

    #[test]
    fn rotation_sweep_rows() {
        let rows = rotation_sweep(5, &cfg()).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].alpha, -PI);
        assert_eq!(rows[4].alpha, PI);
        for row in rows {
            assert!((row.d_estimate - row.d_closed_form).abs() < 1e-3);
        }
    }
}
