//! Deterministic low-discrepancy sampling.
//!
//! All sequences are prefix-stable: the `k`-th point depends only on
//! `(seed, k)`, never on how many points were requested. Estimator budgets
//! rely on this to be monotone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Seeded generator for an independent stream `stream` of `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= candidate).all(|&p| candidate % p != 0) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut factor = inv;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * factor;
        index /= base;
        factor *= inv;
    }
    value
}

/// Scrambled Halton sequence in `[0,1)^dim`.
///
/// Each coordinate is shifted by a seed-derived offset (Cranley–Patterson
/// rotation), so different seeds give different but equally uniform point sets.
#[derive(Debug, Clone)]
pub struct Halton {
    bases: Vec<u64>,
    shift: Vec<f64>,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        let mut r = rng(seed, 0x4a17);
        let shift = (0..dim).map(|_| r.random::<f64>()).collect();
        Self {
            bases: primes(dim),
            shift,
        }
    }

    pub fn point(&self, index: u64) -> Vec<f64> {
        self.bases
            .iter()
            .zip(&self.shift)
            .map(|(&b, &s)| {
                let v = radical_inverse(index + 1, b) + s;
                v - v.floor()
            })
            .collect()
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

fn gaussianize(u: f64, normal: &Normal) -> f64 {
    normal.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12))
}

/// `k`-th low-discrepancy direction on the unit sphere of `ℝⁿ`.
///
/// In one dimension the "sphere" is `{−1, +1}` and the sequence alternates.
pub fn sphere_direction(halton: &Halton, n: usize, index: u64) -> Vec<f64> {
    if n == 1 {
        return vec![if index % 2 == 0 { 1.0 } else { -1.0 }];
    }
    let normal = std_normal();
    let u = halton.point(index);
    if n == 2 {
        let t = std::f64::consts::TAU * u[0];
        return vec![t.cos(), t.sin()];
    }
    let g: Vec<f64> = u[..n].iter().map(|&ui| gaussianize(ui, &normal)).collect();
    let norm = crate::linalg::norm2(&g);
    if norm > 0.0 {
        g.into_iter().map(|x| x / norm).collect()
    } else {
        crate::linalg::basis(n, 0)
    }
}

/// `count` low-discrepancy unit directions in `ℝⁿ`.
pub fn sphere_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let halton = Halton::new(n.max(2), seed);
    (0..count as u64).map(|k| sphere_direction(&halton, n, k)).collect()
}

/// `count` points of the closed unit ball, uniform in volume: a direction
/// from the first `n` Halton coordinates and radius `u^{1/n}` from the next.
pub fn unit_ball_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let halton = Halton::new(n.max(2) + 1, seed ^ 0x9e37_79b9_7f4a_7c15);
    let radial = Halton::new(n + 1, seed.wrapping_add(17));
    (0..count as u64)
        .map(|k| {
            let dir = sphere_direction(&halton, n, k);
            let u = radial.point(k)[n];
            let rho = u.powf(1.0 / n as f64);
            dir.into_iter().map(|x| x * rho).collect()
        })
        .collect()
}

/// A random (not low-discrepancy) unit vector; used for pattern-search polls.
pub fn random_unit(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let norm = crate::linalg::norm2(&v);
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
