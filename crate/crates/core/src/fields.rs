//! Vector fields on `ℝⁿ`: the rotation family, translations, affine maps,
//! the truncated Kakutani shift and the radial-extension constructions
//! built on it.
//!
//! Fields are immutable descriptors. Evaluation is pure, and [`VectorField`]
//! is `Send + Sync`; custom callables must be safe to call concurrently.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, mat_vec, norm2, scale, sub};

pub type CustomFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
pub enum FieldKind {
    /// Rotation of the plane by `alpha` radians about the origin.
    Rotation2D { alpha: f64 },
    /// `f(x) = x − x′`.
    Translation { xprime: Vec<f64> },
    /// `f(x) = x − (1+ε) x′`.
    BoundaryTranslate { xprime: Vec<f64>, eps: f64 },
    /// `f(x) = M x − c`.
    Affine { m: DMatrix<f64>, c: Vec<f64> },
    /// `g(x) = inner(x) / μ`.
    Scaled { inner: Box<VectorField>, mu: f64 },
    /// `f(x) = (√max(0, 1−‖x‖²), x₁, …, x_{N−1})`.
    KakutaniShift { n: usize },
    /// `inner(x)` on the closed unit ball, `inner(x/‖x‖)` outside.
    RadialExtension { inner: Box<VectorField> },
    /// `ψ(x) = x − f̃(x)` with `f̃` the radial extension of `inner`.
    DisplacementForm { inner: Box<VectorField> },
    /// `ψ(x) = (x − πx) + ψ_F(πx)`, `π` keeping the first `m` coordinates,
    /// optionally conjugated by an orthogonal `R`: `Rᵀ ψ(R x)`.
    SubspaceSplit {
        n: usize,
        m: usize,
        inner: Box<VectorField>,
        rotate: Option<DMatrix<f64>>,
    },
    /// `f(x) = Σₖ cₖ xᵏ` on the real line.
    Polynomial1D { coeffs: Vec<f64> },
    Constant { c: Vec<f64> },
    Identity { n: usize },
    Custom { label: String, f: CustomFn },
}

impl fmt::Debug for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rotation2D { alpha } => f.debug_struct("Rotation2D").field("alpha", alpha).finish(),
            Self::Translation { xprime } => f.debug_struct("Translation").field("xprime", xprime).finish(),
            Self::BoundaryTranslate { xprime, eps } => f
                .debug_struct("BoundaryTranslate")
                .field("xprime", xprime)
                .field("eps", eps)
                .finish(),
            Self::Affine { m, c } => f.debug_struct("Affine").field("m", m).field("c", c).finish(),
            Self::Scaled { inner, mu } => f.debug_struct("Scaled").field("inner", inner).field("mu", mu).finish(),
            Self::KakutaniShift { n } => f.debug_struct("KakutaniShift").field("n", n).finish(),
            Self::RadialExtension { inner } => f.debug_struct("RadialExtension").field("inner", inner).finish(),
            Self::DisplacementForm { inner } => f.debug_struct("DisplacementForm").field("inner", inner).finish(),
            Self::SubspaceSplit { n, m, inner, rotate } => f
                .debug_struct("SubspaceSplit")
                .field("n", n)
                .field("m", m)
                .field("inner", inner)
                .field("rotate", rotate)
                .finish(),
            Self::Polynomial1D { coeffs } => f.debug_struct("Polynomial1D").field("coeffs", coeffs).finish(),
            Self::Constant { c } => f.debug_struct("Constant").field("c", c).finish(),
            Self::Identity { n } => f.debug_struct("Identity").field("n", n).finish(),
            Self::Custom { label, .. } => f.debug_struct("Custom").field("label", label).finish_non_exhaustive(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VectorField {
    kind: FieldKind,
    dim: usize,
    /// User assertion that the field has no zero on the domain of interest.
    /// Verifiers treat it as an assumption to test, never as a fact.
    pub claimed_nonvanishing: bool,
    pub lipschitz_estimate: Option<f64>,
}

/// JSON descriptor of a field, including the optional metadata keys
/// `nonvanishing` and `lipschitz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    #[serde(flatten)]
    pub kind: FieldKindSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonvanishing: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldKindSpec {
    Rotation2d {
        alpha: f64,
    },
    Translation {
        xprime: Vec<f64>,
    },
    BoundaryTranslate {
        xprime: Vec<f64>,
        eps: f64,
    },
    Affine {
        #[serde(rename = "M")]
        m: Vec<Vec<f64>>,
        c: Vec<f64>,
    },
    Scaled {
        mu: f64,
        inner: Box<FieldSpec>,
    },
    Kakutani {
        #[serde(rename = "N")]
        n: usize,
    },
    RadialExtension {
        inner: Box<FieldSpec>,
    },
    DisplacementForm {
        inner: Box<FieldSpec>,
    },
    SubspaceSplit {
        #[serde(rename = "N")]
        n: usize,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rotate: Option<Vec<Vec<f64>>>,
        /// Field on `ℝᵐ` used as `ψ_F`; defaults to the displacement form
        /// of the Kakutani shift.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inner: Option<Box<FieldSpec>>,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    Constant {
        c: Vec<f64>,
    },
    Identity {
        n: usize,
    },
}

fn finite(label: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input(format!("{label} must be finite")))
    }
}

impl VectorField {
    fn new(kind: FieldKind, dim: usize, lipschitz: Option<f64>) -> Self {
        Self {
            kind,
            dim,
            claimed_nonvanishing: false,
            lipschitz_estimate: lipschitz,
        }
    }

    pub fn with_nonvanishing(mut self, claimed: bool) -> Self {
        self.claimed_nonvanishing = claimed;
        self
    }

    pub fn with_lipschitz(mut self, l: Option<f64>) -> Self {
        self.lipschitz_estimate = l;
        self
    }

    pub fn rotation2d(alpha: f64) -> Result<Self> {
        use std::f64::consts::PI;
        if !(-PI..=PI).contains(&alpha) {
            return Err(Error::Input(format!("rotation angle must lie in [−π, π], got {alpha}")));
        }
        Ok(Self::new(FieldKind::Rotation2D { alpha }, 2, Some(1.0)))
    }

    pub fn translation(xprime: Vec<f64>) -> Result<Self> {
        if xprime.is_empty() {
            return Err(Error::Input("translation needs a non-empty x′".into()));
        }
        finite("x′", &xprime)?;
        let n = xprime.len();
        Ok(Self::new(FieldKind::Translation { xprime }, n, Some(1.0)))
    }

    pub fn boundary_translate(xprime: Vec<f64>, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Input(format!("ε must be positive, got {eps}")));
        }
        if xprime.is_empty() {
            return Err(Error::Input("boundary translation needs a non-empty x′".into()));
        }
        finite("x′", &xprime)?;
        let n = xprime.len();
        Ok(Self::new(FieldKind::BoundaryTranslate { xprime, eps }, n, Some(1.0)))
    }

    pub fn affine(m: DMatrix<f64>, c: Vec<f64>) -> Result<Self> {
        let n = c.len();
        if n == 0 || m.nrows() != n || m.ncols() != n {
            return Err(Error::Input(format!(
                "affine field needs an n×n matrix and an n-vector, got {}×{} and {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        finite("c", &c)?;
        finite("M", m.as_slice())?;
        let l = linalg::spectral_norm(&m);
        Ok(Self::new(FieldKind::Affine { m, c }, n, Some(l)))
    }

    pub fn scaled(inner: VectorField, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Input(format!("μ must be positive, got {mu}")));
        }
        let dim = inner.dim;
        let l = inner.lipschitz_estimate.map(|l| l / mu);
        let claimed = inner.claimed_nonvanishing;
        Ok(Self::new(
            FieldKind::Scaled {
                inner: Box::new(inner),
                mu,
            },
            dim,
            l,
        )
        .with_nonvanishing(claimed))
    }

    pub fn kakutani(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("Kakutani shift needs N ≥ 1".into()));
        }
        Ok(Self::new(FieldKind::KakutaniShift { n }, n, None))
    }

    pub fn radial_extension(inner: VectorField) -> Self {
        let dim = inner.dim;
        Self::new(
            FieldKind::RadialExtension {
                inner: Box::new(inner),
            },
            dim,
            None,
        )
    }

    pub fn displacement_form(inner: VectorField) -> Self {
        let dim = inner.dim;
        Self::new(
            FieldKind::DisplacementForm {
                inner: Box::new(inner),
            },
            dim,
            None,
        )
    }

    /// `ψ(x) = (x − πx) + inner(πx)` on `ℝᴺ`, with `inner` a field on `ℝᵐ`.
    pub fn subspace_split(n: usize, m: usize, inner: VectorField, rotate: Option<DMatrix<f64>>) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::Input(format!("subspace split needs 1 ≤ m ≤ N, got m={m}, N={n}")));
        }
        check_dim(m, inner.dim)?;
        if let Some(r) = &rotate {
            if r.nrows() != n || r.ncols() != n {
                return Err(Error::Input(format!("rotate must be {n}×{n}")));
            }
            let defect = (r.transpose() * r - DMatrix::identity(n, n)).amax();
            if !(defect <= 1e-9) {
                return Err(Error::Input(format!("rotate must be orthogonal (‖RᵀR − I‖ = {defect:e})")));
            }
        }
        Ok(Self::new(
            FieldKind::SubspaceSplit {
                n,
                m,
                inner: Box::new(inner),
                rotate,
            },
            n,
            None,
        ))
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Input("polynomial needs at least one coefficient".into()));
        }
        finite("coefficients", &coeffs)?;
        Ok(Self::new(FieldKind::Polynomial1D { coeffs }, 1, None))
    }

    pub fn constant(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::Input("constant field needs a non-empty value".into()));
        }
        finite("c", &c)?;
        let n = c.len();
        Ok(Self::new(FieldKind::Constant { c }, n, Some(0.0)))
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("identity needs n ≥ 1".into()));
        }
        Ok(Self::new(FieldKind::Identity { n }, n, Some(1.0)))
    }

    /// Wrap an arbitrary callable. `claimed_nonvanishing` is mandatory.
    pub fn custom(
        label: impl Into<String>,
        dim: usize,
        claimed_nonvanishing: bool,
        lipschitz_estimate: Option<f64>,
        f: CustomFn,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("custom field needs dimension ≥ 1".into()));
        }
        Ok(Self::new(
            FieldKind::Custom {
                label: label.into(),
                f,
            },
            dim,
            lipschitz_estimate,
        )
        .with_nonvanishing(claimed_nonvanishing))
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Short name of the variant, used in report labels.
    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            FieldKind::Rotation2D { .. } => "rotation2d",
            FieldKind::Translation { .. } => "translation",
            FieldKind::BoundaryTranslate { .. } => "boundary_translate",
            FieldKind::Affine { .. } => "affine",
            FieldKind::Scaled { .. } => "scaled",
            FieldKind::KakutaniShift { .. } => "kakutani",
            FieldKind::RadialExtension { .. } => "radial_extension",
            FieldKind::DisplacementForm { .. } => "displacement_form",
            FieldKind::SubspaceSplit { .. } => "subspace_split",
            FieldKind::Polynomial1D { .. } => "polynomial",
            FieldKind::Constant { .. } => "constant",
            FieldKind::Identity { .. } => "identity",
            FieldKind::Custom { .. } => "custom",
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        self.eval_unchecked(x)
    }

    fn eval_unchecked(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(match &self.kind {
            FieldKind::Rotation2D { alpha } => {
                let (s, c) = alpha.sin_cos();
                vec![x[0] * c - x[1] * s, x[0] * s + x[1] * c]
            }
            FieldKind::Translation { xprime } => sub(x, xprime),
            FieldKind::BoundaryTranslate { xprime, eps } => linalg::axpy(x, -(1.0 + eps), xprime),
            FieldKind::Affine { m, c } => sub(&mat_vec(m, x), c),
            FieldKind::Scaled { inner, mu } => inner.eval_unchecked(x)?.into_iter().map(|v| v / mu).collect(),
            FieldKind::KakutaniShift { n } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let mut out = Vec::with_capacity(*n);
                out.push((1.0 - r2).max(0.0).sqrt());
                out.extend_from_slice(&x[..n - 1]);
                out
            }
            FieldKind::RadialExtension { inner } => radial_eval(inner, x)?,
            FieldKind::DisplacementForm { inner } => sub(x, &radial_eval(inner, x)?),
            FieldKind::SubspaceSplit { m, inner, rotate, .. } => match rotate {
                None => split_eval(*m, inner, x)?,
                Some(r) => {
                    let rx = mat_vec(r, x);
                    let y = split_eval(*m, inner, &rx)?;
                    mat_vec(&r.transpose(), &y)
                }
            },
            FieldKind::Polynomial1D { coeffs } => {
                vec![coeffs.iter().rev().fold(0.0, |acc, &c| acc * x[0] + c)]
            }
            FieldKind::Constant { c } => c.clone(),
            FieldKind::Identity { .. } => x.to_vec(),
            FieldKind::Custom { label, f } => {
                let y = f(x).map_err(|e| Error::Field(format!("custom field {label:?} failed: {e}")))?;
                if y.len() != self.dim {
                    return Err(Error::Field(format!(
                        "custom field {label:?} returned {} components, expected {}",
                        y.len(),
                        self.dim
                    )));
                }
                y
            }
        })
    }

    /// `sup_x ‖x − ψ(x)‖₂` when it is known from the construction.
    ///
    /// For the displacement forms this is the sup of the inner map over the
    /// closed unit ball, known exactly for the Kakutani shift (whose values
    /// have norm ≤ 1) and for constant inner maps.
    pub fn displacement_bound(&self) -> Option<f64> {
        match &self.kind {
            FieldKind::Identity { .. } => Some(0.0),
            FieldKind::Translation { xprime } => Some(norm2(xprime)),
            FieldKind::BoundaryTranslate { xprime, eps } => Some((1.0 + eps) * norm2(xprime)),
            FieldKind::DisplacementForm { inner } => ball_image_bound(inner),
            FieldKind::SubspaceSplit { inner, .. } => inner.displacement_bound(),
            _ => None,
        }
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self> {
        let mut field = match &spec.kind {
            FieldKindSpec::Rotation2d { alpha } => Self::rotation2d(*alpha)?,
            FieldKindSpec::Translation { xprime } => Self::translation(xprime.clone())?,
            FieldKindSpec::BoundaryTranslate { xprime, eps } => Self::boundary_translate(xprime.clone(), *eps)?,
            FieldKindSpec::Affine { m, c } => {
                let mm = linalg::matrix_from_rows(m).ok_or_else(|| Error::Input("affine M is ragged".into()))?;
                Self::affine(mm, c.clone())?
            }
            FieldKindSpec::Scaled { mu, inner } => Self::scaled(Self::from_spec(inner)?, *mu)?,
            FieldKindSpec::Kakutani { n } => Self::kakutani(*n)?,
            FieldKindSpec::RadialExtension { inner } => Self::radial_extension(Self::from_spec(inner)?),
            FieldKindSpec::DisplacementForm { inner } => Self::displacement_form(Self::from_spec(inner)?),
            FieldKindSpec::SubspaceSplit { n, m, rotate, inner } => {
                let inner = match inner {
                    Some(s) => Self::from_spec(s)?,
                    None => Self::displacement_form(Self::kakutani((*m).max(1))?),
                };
                let rotate = match rotate {
                    Some(r) => Some(linalg::matrix_from_rows(r).ok_or_else(|| Error::Input("rotate is ragged".into()))?),
                    None => None,
                };
                Self::subspace_split(*n, *m, inner, rotate)?
            }
            FieldKindSpec::Polynomial { coeffs } => Self::polynomial(coeffs.clone())?,
            FieldKindSpec::Constant { c } => Self::constant(c.clone())?,
            FieldKindSpec::Identity { n } => Self::identity(*n)?,
        };
        if let Some(nv) = spec.nonvanishing {
            field.claimed_nonvanishing = nv;
        }
        if let Some(l) = spec.lipschitz {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::Input(format!("lipschitz must be a nonnegative number, got {l}")));
            }
            field.lipschitz_estimate = Some(l);
        }
        Ok(field)
    }

    /// JSON descriptor; custom callables have none.
    pub fn to_spec(&self) -> Result<FieldSpec> {
        let kind = match &self.kind {
            FieldKind::Rotation2D { alpha } => FieldKindSpec::Rotation2d { alpha: *alpha },
            FieldKind::Translation { xprime } => FieldKindSpec::Translation { xprime: xprime.clone() },
            FieldKind::BoundaryTranslate { xprime, eps } => FieldKindSpec::BoundaryTranslate {
                xprime: xprime.clone(),
                eps: *eps,
            },
            FieldKind::Affine { m, c } => FieldKindSpec::Affine {
                m: linalg::matrix_to_rows(m),
                c: c.clone(),
            },
            FieldKind::Scaled { inner, mu } => FieldKindSpec::Scaled {
                mu: *mu,
                inner: Box::new(inner.to_spec()?),
            },
            FieldKind::KakutaniShift { n } => FieldKindSpec::Kakutani { n: *n },
            FieldKind::RadialExtension { inner } => FieldKindSpec::RadialExtension {
                inner: Box::new(inner.to_spec()?),
            },
            FieldKind::DisplacementForm { inner } => FieldKindSpec::DisplacementForm {
                inner: Box::new(inner.to_spec()?),
            },
            FieldKind::SubspaceSplit { n, m, inner, rotate } => FieldKindSpec::SubspaceSplit {
                n: *n,
                m: *m,
                rotate: rotate.as_ref().map(linalg::matrix_to_rows),
                inner: Some(Box::new(inner.to_spec()?)),
            },
            FieldKind::Polynomial1D { coeffs } => FieldKindSpec::Polynomial { coeffs: coeffs.clone() },
            FieldKind::Constant { c } => FieldKindSpec::Constant { c: c.clone() },
            FieldKind::Identity { n } => FieldKindSpec::Identity { n: *n },
            FieldKind::Custom { label, .. } => {
                return Err(Error::Field(format!("custom field {label:?} has no JSON descriptor")))
            }
        };
        Ok(FieldSpec {
            kind,
            nonvanishing: Some(self.claimed_nonvanishing),
            lipschitz: self.lipschitz_estimate,
        })
    }
}

fn radial_eval(inner: &VectorField, x: &[f64]) -> Result<Vec<f64>> {
    let r = norm2(x);
    if r <= 1.0 {
        inner.eval_unchecked(x)
    } else {
        inner.eval_unchecked(&scale(x, 1.0 / r))
    }
}

fn split_eval(m: usize, inner: &VectorField, x: &[f64]) -> Result<Vec<f64>> {
    let head = inner.eval_unchecked(&x[..m])?;
    let mut out = Vec::with_capacity(x.len());
    out.extend(head);
    out.extend_from_slice(&x[m..]);
    Ok(out)
}

fn ball_image_bound(f: &VectorField) -> Option<f64> {
    match &f.kind {
        FieldKind::KakutaniShift { .. } => Some(1.0),
        FieldKind::Constant { c } => Some(norm2(c)),
        FieldKind::Identity { .. } | FieldKind::Rotation2D { .. } => Some(1.0),
        FieldKind::Scaled { inner, mu } => ball_image_bound(inner).map(|b| b / mu),
        _ => None,
    }
}

/// `sup_{‖x‖≤1} ‖f_α(x) − x‖ = 2 sin(|α|/2)`.
pub fn rotation_sup_displacement(alpha: f64) -> Result<f64> {
    use std::f64::consts::PI;
    if !(-PI..=PI).contains(&alpha) {
        return Err(Error::Input(format!("rotation angle must lie in [−π, π], got {alpha}")));
    }
    Ok(2.0 * (alpha.abs() / 2.0).sin())
}

/// The fixed point `(c, …, c)`, `c = 1/√(N+1)`, of the truncated Kakutani shift.
pub fn kakutani_fixed_point(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Input("Kakutani shift needs N ≥ 1".into()));
    }
    Ok(vec![1.0 / ((n + 1) as f64).sqrt(); n])
}

/// The pair `(ψ, φ)` on `ℝᴺ`: `ψ` splits off the first `m` coordinates and
/// applies the displacement form of the Kakutani shift there; `φ` is the
/// identity.
pub fn make_subspace_construction(n: usize, m: usize) -> Result<(VectorField, VectorField)> {
    if m == 0 || m > n {
        return Err(Error::Input(format!("subspace construction needs 1 ≤ m ≤ N, got m={m}, N={n}")));
    }
    let psi_f = VectorField::displacement_form(VectorField::kakutani(m)?);
    let psi = VectorField::subspace_split(n, m, psi_f, None)?;
    Ok((psi, VectorField::identity(n)?))
}
