//! Seeded random families of nonvanishing fields on the unit ball.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{FieldKindSpec, FieldSpec};
use crate::linalg::{self, mat_vec, scale};
use crate::sampling::{random_unit, rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `f(x) = x − x′`, `‖x′‖` drawn from the radius range.
    Translation,
    /// `f(x) = M x − c` whose only zero `M⁻¹c` has norm in the radius range.
    Affine,
    /// Alternates translation and affine members.
    Mixed,
}

pub const MIN_SINGULAR_VALUE: f64 = 0.2;

/// `count` family members; member `k` lives in `ℝ^{dims[k mod len]}` and
/// depends only on `(seed, stream, k)`.
pub fn expand_family(
    family: Family,
    dims: &[usize],
    count: usize,
    radius_range: [f64; 2],
    seed: u64,
    stream: u64,
) -> Result<Vec<FieldSpec>> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Input("family dims must be a non-empty list of positive integers".into()));
    }
    let [lo, hi] = radius_range;
    if !(lo >= 1.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Input(format!(
            "radius range (lo, hi] must satisfy 1 ≤ lo < hi so members are zero-free on the unit ball, got [{lo}, {hi}]"
        )));
    }
    (0..count)
        .map(|k| {
            let n = dims[k % dims.len()];
            let mut r = rng(seed, (stream << 20) + k as u64);
            let radius = lo + (hi - lo) * (1.0 - r.random::<f64>());
            let zero = scale(&random_unit(&mut r, n), radius);
            let affine = match family {
                Family::Translation => false,
                Family::Affine => true,
                Family::Mixed => k % 2 == 1,
            };
            let kind = if affine {
                let m = conditioned_matrix(&mut r, n);
                let c = mat_vec(&m, &zero);
                FieldKindSpec::Affine {
                    m: linalg::matrix_to_rows(&m),
                    c,
                }
            } else {
                FieldKindSpec::Translation { xprime: zero }
            };
            Ok(FieldSpec {
                kind,
                nonvanishing: Some(true),
                lipschitz: None,
            })
        })
        .collect()
}

/// `I + ½ U/√n` with `U` uniform on `[−1,1]`, redrawn until its smallest
/// singular value clears [`MIN_SINGULAR_VALUE`] so that `M⁻¹c` is the unique
/// zero.
fn conditioned_matrix(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let s = 0.5 / (n as f64).sqrt();
    loop {
        let m = DMatrix::from_fn(n, n, |i, j| {
            let u: f64 = r.random_range(-1.0..1.0);
            if i == j {
                1.0 + s * u
            } else {
                s * u
            }
        });
        if m.clone().singular_values().min() >= MIN_SINGULAR_VALUE {
            return m;
        }
    }
}
