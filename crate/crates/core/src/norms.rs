//! Norms on `ℝⁿ`, their duals, and the Euclidean equivalence constants
//! `θ*₁ = min_{‖x‖₂=1} 1/‖x‖_*`, `θ*₂ = max_{‖x‖₂=1} 1/‖x‖_*`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, mat_vec, norm2};
use crate::lp::{self, LpOutcome};
use crate::optim::{sphere_search, Sense};

const THETA_STARTS: usize = 64;

/// Exponent of an `ℓᵖ`-type norm. `p = 1` and `p = ∞` are explicit variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    One,
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else if p == 1.0 {
            Ok(Self::One)
        } else if p > 1.0 && p.is_finite() {
            Ok(Self::Finite(p))
        } else {
            Err(Error::Input(format!("norm exponent must be ≥ 1 or ∞, got {p}")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Finite(p) => p,
            Self::Infinity => f64::INFINITY,
        }
    }

    /// Hölder conjugate `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            Self::One => Self::Infinity,
            Self::Infinity => Self::One,
            Self::Finite(p) => Self::Finite(p / (p - 1.0)),
        }
    }

    fn apply(self, x: impl Iterator<Item = f64> + Clone) -> f64 {
        match self {
            Self::One => x.map(f64::abs).sum(),
            Self::Infinity => x.map(f64::abs).fold(0.0, f64::max),
            Self::Finite(p) => {
                let m = x.clone().map(f64::abs).fold(0.0, f64::max);
                if m == 0.0 || !m.is_finite() {
                    return m;
                }
                m * x.map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentSpec {
    Number(f64),
    Text(String),
}

impl ExponentSpec {
    fn parse(&self) -> Result<Exponent> {
        match self {
            Self::Number(p) => Exponent::new(*p),
            Self::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => Ok(Exponent::Infinity),
            Self::Text(s) => s
                .parse::<f64>()
                .map_err(|_| Error::Input(format!("invalid exponent {s:?}")))
                .and_then(Exponent::new),
        }
    }

    fn from_exponent(p: Exponent) -> Self {
        match p {
            Exponent::Infinity => Self::Text("inf".into()),
            other => Self::Number(other.value()),
        }
    }
}

/// JSON descriptor of a norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    Euclidean,
    Lp { p: ExponentSpec },
    Weighted { w: Vec<f64>, p: ExponentSpec },
    Polyhedral { directions: Vec<Vec<f64>> },
    Pushforward { g: Vec<Vec<f64>> },
}

#[derive(Debug, Clone)]
pub enum Norm {
    Euclidean,
    Lp(Exponent),
    /// `‖x‖ = ‖(w₁x₁, …, wₙxₙ)‖_p`.
    Weighted { w: Vec<f64>, p: Exponent },
    /// `‖x‖ = maxᵢ |⟨dᵢ, x⟩|`.
    Polyhedral { directions: Vec<Vec<f64>> },
    /// `‖x‖ = ‖g x‖₂`.
    Pushforward {
        g: DMatrix<f64>,
        g_inv_t: DMatrix<f64>,
        singular_values: (f64, f64),
    },
}

/// How a pair of equivalence constants was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsMethod {
    ClosedForm,
    Multistart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceConstants {
    pub theta1: f64,
    pub theta2: f64,
    pub method: ConstantsMethod,
    pub converged: bool,
    /// Estimated intervals `[lo, hi]` for `θ*₁` and `θ*₂`, present only when
    /// the search stopped on its iteration cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[[f64; 2]; 2]>,
}

impl EquivalenceConstants {
    /// `ν = min{1/θ*₂, θ*₁/θ*₂}`.
    pub fn nu(&self) -> f64 {
        (1.0 / self.theta2).min(self.theta1 / self.theta2)
    }
}

impl Norm {
    pub fn lp(p: f64) -> Result<Self> {
        Ok(Self::Lp(Exponent::new(p)?))
    }

    pub fn weighted(w: Vec<f64>, p: f64) -> Result<Self> {
        if w.is_empty() || w.iter().any(|&wi| !(wi > 0.0 && wi.is_finite())) {
            return Err(Error::Input("weights must be positive and finite".into()));
        }
        Ok(Self::Weighted { w, p: Exponent::new(p)? })
    }

    pub fn polyhedral(directions: Vec<Vec<f64>>) -> Result<Self> {
        let m = linalg::matrix_from_rows(&directions)
            .ok_or_else(|| Error::Input("polyhedral directions must be non-empty rows of equal length".into()))?;
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("polyhedral directions must be finite".into()));
        }
        let n = m.ncols();
        let scale = m.amax().max(f64::MIN_POSITIVE);
        if m.rank(1e-10 * scale) < n {
            return Err(Error::Input(format!("polyhedral directions do not span ℝ^{n}")));
        }
        Ok(Self::Polyhedral { directions })
    }

    pub fn pushforward(g: DMatrix<f64>) -> Result<Self> {
        if !g.is_square() || g.nrows() == 0 {
            return Err(Error::Input("pushforward g must be a non-empty square matrix".into()));
        }
        let sv = g.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if !(smin > 0.0) || !(smax / smin < 1e14) {
            return Err(Error::Input(format!(
                "pushforward g must be invertible (singular values in [{smin}, {smax}])"
            )));
        }
        let g_inv_t = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Input("pushforward g is singular".into()))?
            .transpose();
        Ok(Self::Pushforward {
            g,
            g_inv_t,
            singular_values: (smin, smax),
        })
    }

    pub fn from_spec(spec: &NormSpec) -> Result<Self> {
        match spec {
            NormSpec::Euclidean => Ok(Self::Euclidean),
            NormSpec::Lp { p } => Ok(Self::Lp(p.parse()?)),
            NormSpec::Weighted { w, p } => Self::weighted(w.clone(), p.parse()?.value()),
            NormSpec::Polyhedral { directions } => Self::polyhedral(directions.clone()),
            NormSpec::Pushforward { g } => Self::pushforward(
                linalg::matrix_from_rows(g).ok_or_else(|| Error::Input("pushforward g is ragged".into()))?,
            ),
        }
    }

    pub fn to_spec(&self) -> NormSpec {
        match self {
            Self::Euclidean => NormSpec::Euclidean,
            Self::Lp(p) => NormSpec::Lp {
                p: ExponentSpec::from_exponent(*p),
            },
            Self::Weighted { w, p } => NormSpec::Weighted {
                w: w.clone(),
                p: ExponentSpec::from_exponent(*p),
            },
            Self::Polyhedral { directions } => NormSpec::Polyhedral {
                directions: directions.clone(),
            },
            Self::Pushforward { g, .. } => NormSpec::Pushforward {
                g: linalg::matrix_to_rows(g),
            },
        }
    }

    /// Fixed dimension of the descriptor, if it has one.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            Self::Euclidean | Self::Lp(_) => None,
            Self::Weighted { w, .. } => Some(w.len()),
            Self::Polyhedral { directions } => Some(directions[0].len()),
            Self::Pushforward { g, .. } => Some(g.nrows()),
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        match self.dimension() {
            Some(n) => check_dim(n, x.len()),
            None => Ok(()),
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, Self::Euclidean | Self::Lp(Exponent::Finite(2.0)))
    }

    /// Whether the norm is differentiable away from the origin.
    pub fn is_smooth(&self) -> bool {
        match self {
            Self::Euclidean | Self::Pushforward { .. } => true,
            Self::Lp(p) | Self::Weighted { p, .. } => matches!(p, Exponent::Finite(_)),
            Self::Polyhedral { .. } => false,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Self::Euclidean => norm2(x),
            Self::Lp(p) => p.apply(x.iter().copied()),
            Self::Weighted { w, p } => p.apply(x.iter().zip(w).map(|(a, b)| a * b)),
            Self::Polyhedral { directions } => directions.iter().map(|d| dot(d, x).abs()).fold(0.0, f64::max),
            Self::Pushforward { g, .. } => norm2(&mat_vec(g, x)),
        }
    }

    /// Dual norm `sup{⟨x*, x⟩ : ‖x‖ ≤ 1}`.
    pub fn dual_eval(&self, xstar: &[f64]) -> Result<f64> {
        self.check(xstar)?;
        match self {
            Self::Euclidean => Ok(norm2(xstar)),
            Self::Lp(p) => Ok(p.conjugate().apply(xstar.iter().copied())),
            Self::Weighted { w, p } => Ok(p.conjugate().apply(xstar.iter().zip(w).map(|(a, b)| a / b))),
            Self::Pushforward { g_inv_t, .. } => Ok(norm2(&mat_vec(g_inv_t, xstar))),
            Self::Polyhedral { directions } => {
                if xstar.iter().all(|&v| v == 0.0) {
                    return Ok(0.0);
                }
                let mut rows = Vec::with_capacity(2 * directions.len());
                for d in directions {
                    rows.push(d.clone());
                    rows.push(d.iter().map(|v| -v).collect());
                }
                let rhs = vec![1.0; rows.len()];
                match lp::maximize(xstar, &rows, &rhs, None) {
                    // Rescale the maximiser onto the unit sphere of the norm so
                    // the reported value is attained by a feasible point.
                    LpOutcome::Optimal { point, .. } => {
                        let nv = self.eval_unchecked(&point);
                        Ok(if nv > 0.0 { dot(xstar, &point) / nv } else { 0.0 })
                    }
                    other => Err(Error::Numeric {
                        message: format!("polyhedral dual LP failed: {other:?}"),
                        best: Vec::new(),
                        residual: f64::INFINITY,
                    }),
                }
            }
        }
    }

    /// `(θ*₁, θ*₂)` in dimension `n`.
    pub fn equivalence_constants(&self, n: usize) -> Result<EquivalenceConstants> {
        if n == 0 {
            return Err(Error::Input("dimension must be ≥ 1".into()));
        }
        if let Some(d) = self.dimension() {
            check_dim(d, n)?;
        }
        let closed = |theta1: f64, theta2: f64| EquivalenceConstants {
            theta1,
            theta2,
            method: ConstantsMethod::ClosedForm,
            converged: true,
            bracket: None,
        };
        let nf = n as f64;
        match self {
            Self::Euclidean => Ok(closed(1.0, 1.0)),
            Self::Lp(p) => {
                // ‖x‖_p ranges over [n^{1/p − 1/2}, 1] on the sphere for p ≥ 2
                // and over [1, n^{1/p − 1/2}] for p ≤ 2.
                let inv_p = 1.0 / p.value();
                let k = nf.powf(0.5 - inv_p);
                if p.value() >= 2.0 {
                    Ok(closed(1.0, k))
                } else {
                    Ok(closed(k, 1.0))
                }
            }
            Self::Pushforward {
                singular_values: (smin, smax),
                ..
            } => Ok(closed(1.0 / smax, 1.0 / smin)),
            Self::Weighted { .. } | Self::Polyhedral { .. } => self.multistart_constants(n),
        }
    }

    fn multistart_constants(&self, n: usize) -> Result<EquivalenceConstants> {
        let objective = |x: &[f64]| Ok(self.eval_unchecked(x));
        let smooth = self.is_smooth();
        let hi = sphere_search(n, &objective, Sense::Maximize, THETA_STARTS, 11, smooth)?;
        let lo = sphere_search(n, &objective, Sense::Minimize, THETA_STARTS, 12, smooth)?;
        let converged = hi.converged && lo.converged;
        let (theta1, theta2) = (1.0 / hi.value, 1.0 / lo.value);
        let bracket = (!converged).then(|| {
            // The norm is Lipschitz on the sphere with constant ≤ max ‖·‖ = 1/θ₁;
            // the starts cover the sphere to roughly this geodesic radius.
            let h = std::f64::consts::PI * (THETA_STARTS as f64).powf(-1.0 / (n as f64 - 1.0).max(1.0));
            let slack = hi.value * h;
            [
                [1.0 / (hi.value + slack), theta1],
                [theta2, 1.0 / (lo.value - slack).max(f64::MIN_POSITIVE)],
            ]
        });
        Ok(EquivalenceConstants {
            theta1,
            theta2,
            method: ConstantsMethod::Multistart,
            converged,
            bracket,
        })
    }

    /// `ν = min{1/θ*₂, θ*₁/θ*₂}`.
    pub fn nu_constant(&self, n: usize) -> Result<f64> {
        Ok(self.equivalence_constants(n)?.nu())
    }

    /// `r_* = r/θ*₂`.
    pub fn r_star(&self, n: usize, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Input(format!("r must be positive, got {r}")));
        }
        Ok(r / self.equivalence_constants(n)?.theta2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_examples() {
        assert_eq!(Norm::lp(1.0).unwrap().eval(&[1.0, -2.0]).unwrap(), 3.0);
        assert_eq!(Norm::lp(f64::INFINITY).unwrap().eval(&[1.0, -2.0]).unwrap(), 2.0);
        let g = Norm::pushforward(DMatrix::identity(2, 2) * 2.0).unwrap();
        assert_eq!(g.eval(&[1.0, 0.0]).unwrap(), 2.0);
        assert_relative_eq!(Norm::lp(3.0).unwrap().eval(&[1.0, 1.0]).unwrap(), 2f64.powf(1.0 / 3.0));
        assert!(g.eval(&[1.0]).is_err());
    }

    #[test]
    fn dual_examples() {
        assert_eq!(Norm::lp(1.0).unwrap().dual_eval(&[1.0, -2.0]).unwrap(), 2.0);
        assert_eq!(Norm::Euclidean.dual_eval(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(Norm::lp(f64::INFINITY).unwrap().dual_eval(&[1.0, -2.0]).unwrap(), 3.0);
        // the ℓ∞ norm written as a polyhedral norm has the ℓ¹ dual
        let box_norm = Norm::polyhedral(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_relative_eq!(box_norm.dual_eval(&[1.0, -2.0]).unwrap(), 3.0, epsilon = 1e-12);
        let w = Norm::weighted(vec![2.0, 1.0], 2.0).unwrap();
        assert_relative_eq!(w.dual_eval(&[2.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn constants_examples() {
        let c = Norm::Euclidean.equivalence_constants(3).unwrap();
        assert_eq!((c.theta1, c.theta2), (1.0, 1.0));
        let c = Norm::lp(f64::INFINITY).unwrap().equivalence_constants(2).unwrap();
        assert_relative_eq!(c.theta2, 2f64.sqrt());
        assert_eq!(c.theta1, 1.0);
        let c = Norm::lp(1.0).unwrap().equivalence_constants(3).unwrap();
        assert_relative_eq!(c.theta1, 1.0 / 3f64.sqrt());
        assert_eq!(c.theta2, 1.0);
        assert_relative_eq!(Norm::lp(f64::INFINITY).unwrap().nu_constant(2).unwrap(), 1.0 / 2f64.sqrt());
        assert_relative_eq!(Norm::lp(1.0).unwrap().nu_constant(2).unwrap(), 1.0 / 2f64.sqrt());
        assert_eq!(Norm::Euclidean.nu_constant(2).unwrap(), 1.0);
        assert_relative_eq!(
            Norm::lp(f64::INFINITY).unwrap().r_star(2, 1.0).unwrap(),
            1.0 / 2f64.sqrt()
        );
        assert_eq!(Norm::lp(1.0).unwrap().r_star(3, 2.0).unwrap(), 2.0);
    }

    #[test]
    fn multistart_constants_match_closed_form_on_polyhedral_box() {
        // maxᵢ |xᵢ| as a polyhedral norm must reproduce the ℓ∞ constants
        let n = Norm::polyhedral(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let c = n.equivalence_constants(3).unwrap();
        assert_eq!(c.method, ConstantsMethod::Multistart);
        assert_relative_eq!(c.theta1, 1.0, epsilon = 1e-9);
        assert_relative_eq!(c.theta2, 3f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn weighted_euclidean_constants() {
        // ‖Wx‖₂ on the sphere ranges over [w_min, w_max]
        let n = Norm::weighted(vec![0.5, 2.0], 2.0).unwrap();
        let c = n.equivalence_constants(2).unwrap();
        assert_relative_eq!(c.theta1, 0.5, epsilon = 1e-9);
        assert_relative_eq!(c.theta2, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn rejects_degenerate_norms() {
        assert!(Norm::polyhedral(vec![vec![1.0, 1.0], vec![2.0, 2.0]]).is_err());
        assert!(Norm::pushforward(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0])).is_err());
        assert!(Norm::lp(0.5).is_err());
        assert!(Norm::weighted(vec![1.0, 0.0], 2.0).is_err());
    }

    #[test]
    fn json_specs() {
        let n: NormSpec = serde_json::from_str(r#"{"kind":"lp","p":"inf"}"#).unwrap();
        assert!(matches!(Norm::from_spec(&n).unwrap(), Norm::Lp(Exponent::Infinity)));
        let n: NormSpec = serde_json::from_str(r#"{"kind":"lp","p":1}"#).unwrap();
        assert!(matches!(Norm::from_spec(&n).unwrap(), Norm::Lp(Exponent::One)));
        let n: NormSpec = serde_json::from_str(r#"{"kind":"pushforward","g":[[2,0],[0,1]]}"#).unwrap();
        let norm = Norm::from_spec(&n).unwrap();
        assert_eq!(norm.to_spec(), n);
        let bad: std::result::Result<NormSpec, _> = serde_json::from_str(r#"{"kind":"banana"}"#);
        assert!(bad.is_err());
    }
}
