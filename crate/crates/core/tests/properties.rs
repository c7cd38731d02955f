use nalgebra::DMatrix;
use proptest::prelude::*;

use hsdl_core::displacement::{check_lower_bound, growth_profile, inf_norm, sup_displacement};
use hsdl_core::vi::{solve, SolverConfig, VIProblem};
use hsdl_core::{BoundKind, ConvexBody, EstimatorConfig, Norm, VectorField};

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn vecn(n: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-scale..scale, n)
}

fn cheap(seed: u64) -> EstimatorConfig {
    EstimatorConfig {
        seed,
        budget: 0.25,
        ..EstimatorConfig::default()
    }
}

/// Balls, boxes, polytopes with random extra cuts, and axis-aligned
/// ellipsoids in the plane or in 3-space; all contain the origin.
fn body() -> impl Strategy<Value = ConvexBody> {
    let ball = (0.2f64..3.0).prop_map(|r| ConvexBody::ball(vec![0.1, -0.2, 0.0], r).unwrap());
    let aabb = (vecn(2, 1.0), vecn(2, 1.0)).prop_map(|(a, b)| {
        let lo: Vec<f64> = a.iter().map(|v| -0.1 - v.abs()).collect();
        let hi: Vec<f64> = b.iter().map(|v| 0.1 + v.abs()).collect();
        ConvexBody::aabb(&lo, &hi).unwrap()
    });
    let poly = proptest::collection::vec((0.0f64..std::f64::consts::TAU, 0.3f64..2.0), 3..7).prop_map(|cuts| {
        let mut rows = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let mut b = vec![2.0; 4];
        for (t, h) in cuts {
            rows.push(vec![t.cos(), t.sin()]);
            b.push(h);
        }
        ConvexBody::hpolytope(rows, b, None).unwrap()
    });
    let ellipsoid = (0.3f64..2.0, 0.3f64..2.0, 0.3f64..2.0).prop_map(|(a, b, c)| {
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0 / (a * a), 1.0 / (b * b), 1.0 / (c * c)]));
        ConvexBody::ellipsoid(q, vec![0.0; 3]).unwrap()
    });
    prop_oneof![ball, aabb, poly, ellipsoid]
}

fn body_and_points() -> impl Strategy<Value = (ConvexBody, Vec<f64>, Vec<f64>)> {
    body().prop_flat_map(|k| {
        let n = k.dimension();
        (Just(k), vecn(n, 5.0), vecn(n, 5.0))
    })
}

fn norm() -> impl Strategy<Value = Norm> {
    prop_oneof![
        Just(Norm::Euclidean),
        (1.0f64..8.0).prop_map(|p| Norm::lp(p).unwrap()),
        Just(Norm::lp(f64::INFINITY).unwrap()),
        (vecn(3, 2.0), 1.0f64..4.0).prop_map(|(w, p)| Norm::weighted(w.iter().map(|v| 0.2 + v.abs()).collect(), p).unwrap()),
        vecn(9, 1.0).prop_map(|g| {
            let m = DMatrix::from_row_slice(3, 3, &g) + DMatrix::identity(3, 3) * 2.5;
            Norm::pushforward(m).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn projection_is_idempotent_and_nonexpansive((k, x, y) in body_and_points()) {
        let px = k.project(&x).unwrap();
        let py = k.project(&y).unwrap();
        prop_assert!(k.contains(&px, 1e-7).unwrap());
        prop_assert!(dist(&k.project(&px).unwrap(), &px) <= 1e-7);
        prop_assert!(dist(&px, &py) <= dist(&x, &y) + 1e-7);
    }

    #[test]
    fn projection_satisfies_the_obtuse_angle_condition((k, x, _y) in body_and_points()) {
        let p = k.project(&x).unwrap();
        let r: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
        for z in k.boundary_sample(32, 3).unwrap() {
            let d: Vec<f64> = z.iter().zip(&p).map(|(a, b)| a - b).collect();
            prop_assert!(dot(&r, &d) <= 1e-6 * (1.0 + norm2(&r)), "<x - p, z - p> = {}", dot(&r, &d));
        }
    }

    #[test]
    fn inradius_is_at_most_circumradius(k in body()) {
        let r = k.inradius().unwrap();
        let r1 = k.circumradius().unwrap();
        prop_assert!(r > 0.0);
        prop_assert!(r <= r1.value + 1e-9);
        prop_assert!((norm2(&r1.witness) - r1.value).abs() <= 1e-9);
        let (p, rho) = k.min_norm_boundary_point().unwrap();
        prop_assert!((rho - r).abs() <= 1e-6 && (norm2(&p) - r).abs() <= 1e-6);
    }

    #[test]
    fn norm_axioms_and_sandwich(nm in norm(), x in vecn(3, 10.0), y in vecn(3, 10.0), t in -5.0f64..5.0) {
        let n = |v: &[f64]| nm.eval(v).unwrap();
        let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        prop_assert!((n(&tx) - t.abs() * n(&x)).abs() <= 1e-9 * (1.0 + n(&tx)));
        prop_assert!(n(&sum) <= n(&x) + n(&y) + 1e-9);
        prop_assert!(n(&x) >= 0.0);
        let c = nm.equivalence_constants(3).unwrap();
        let e = norm2(&x);
        if e > 1e-6 {
            prop_assert!(c.theta1 * n(&x) <= e * (1.0 + 1e-6), "θ1 ‖x‖ = {} > ‖x‖₂ = {e}", c.theta1 * n(&x));
            prop_assert!(e <= c.theta2 * n(&x) * (1.0 + 1e-6), "‖x‖₂ = {e} > θ2 ‖x‖ = {}", c.theta2 * n(&x));
        }
    }

    #[test]
    fn dual_norm_obeys_holder(nm in norm(), x in vecn(3, 10.0), s in vecn(3, 10.0)) {
        let dual = nm.dual_eval(&s).unwrap();
        prop_assert!(dot(&s, &x) <= dual * nm.eval(&x).unwrap() + 1e-7 * (1.0 + dual));
    }

    #[test]
    fn lp_dual_is_the_conjugate_norm(p in 1.05f64..10.0, s in vecn(4, 10.0)) {
        let q = p / (p - 1.0);
        let expected = s.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q);
        let got = Norm::lp(p).unwrap().dual_eval(&s).unwrap();
        prop_assert!((got - expected).abs() <= 1e-9 * (1.0 + expected));
    }

    #[test]
    fn rotation_moves_every_point_by_the_chord(alpha in -std::f64::consts::PI..std::f64::consts::PI, x in vecn(2, 3.0)) {
        let f = VectorField::rotation2d(alpha).unwrap();
        let y = f.eval(&x).unwrap();
        prop_assert!((dist(&y, &x) - 2.0 * (alpha.abs() / 2.0).sin() * norm2(&x)).abs() <= 1e-12);
        prop_assert!((norm2(&y) - norm2(&x)).abs() <= 1e-12);
    }

    #[test]
    fn kakutani_maps_the_ball_into_the_sphere(n in 1usize..9, x in vecn(8, 1.0)) {
        let mut z = x[..n].to_vec();
        let r = norm2(&z);
        if r > 1.0 {
            z.iter_mut().for_each(|v| *v /= r);
        }
        let y = VectorField::kakutani(n).unwrap().eval(&z).unwrap();
        let expected = (1.0 - z.iter().map(|v| v * v).sum::<f64>() + z[..n - 1].iter().map(|v| v * v).sum::<f64>()).sqrt();
        prop_assert!((norm2(&y) - expected).abs() <= 1e-12);
        prop_assert!(norm2(&y) <= 1.0 + 1e-12);
    }

    #[test]
    fn displacement_form_moves_points_at_most_one(n in 1usize..7, x in vecn(6, 100.0)) {
        let psi = VectorField::displacement_form(VectorField::kakutani(n).unwrap());
        let y = psi.eval(&x[..n]).unwrap();
        prop_assert!(dist(&x[..n], &y) <= 1.0 + 1e-12);
    }

    #[test]
    fn scaled_field_divides_exactly(mu in 0.01f64..100.0, x in vecn(3, 5.0), c in vecn(3, 5.0)) {
        let f = VectorField::translation(c).unwrap();
        let g = VectorField::scaled(f.clone(), mu).unwrap();
        let fx = f.eval(&x).unwrap();
        let gx = g.eval(&x).unwrap();
        for (a, b) in fx.iter().zip(&gx) {
            prop_assert!((a / mu - b).abs() <= 1e-15 * (1.0 + (a / mu).abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn translation_equality_chain(n in 2usize..4, dir in vecn(3, 1.0), r in 0.3f64..3.0, extra in 0.05f64..3.0, seed in 0u64..1000) {
        prop_assume!(norm2(&dir[..n]) > 0.1);
        let u: Vec<f64> = dir[..n].iter().map(|v| v / norm2(&dir[..n])).collect();
        let len = r + extra;
        let xp: Vec<f64> = u.iter().map(|v| v * len).collect();
        let body = ConvexBody::ball(vec![0.0; n], r).unwrap();
        let f = VectorField::translation(xp).unwrap().with_nonvanishing(true);
        let rep = check_lower_bound(&f, &body, &Norm::Euclidean, BoundKind::EuclideanThm31, &cheap(seed)).unwrap();
        prop_assert!((rep.d_hat.value - len).abs() <= 1e-9);
        prop_assert!((rep.inf_hat.value - (len - r)).abs() <= 1e-6);
        prop_assert!(rep.slack.abs() <= 1e-6);
    }

    #[test]
    fn estimates_are_reproducible_and_sound(seed in 0u64..10_000, c in vecn(2, 2.0), alpha in -3.0f64..3.0) {
        let body = ConvexBody::aabb(&[-1.0, -0.5], &[0.7, 1.0]).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[alpha.cos(), -alpha.sin(), alpha.sin(), alpha.cos()]);
        let f = VectorField::affine(m, c).unwrap();
        let a = sup_displacement(&f, &body, &Norm::Euclidean, &cheap(seed)).unwrap();
        let b = sup_displacement(&f, &body, &Norm::Euclidean, &cheap(seed)).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(&a.witness, &b.witness);
        let fx = f.eval(&a.witness).unwrap();
        prop_assert!((dist(&fx, &a.witness) - a.value).abs() <= 1e-10);
        let lo = inf_norm(&f, &body, &Norm::Euclidean, &cheap(seed)).unwrap();
        prop_assert!((norm2(&f.eval(&lo.witness).unwrap()) - lo.value).abs() <= 1e-10);
        prop_assert!(body.contains(&a.witness, 1e-9).unwrap() && body.contains(&lo.witness, 1e-9).unwrap());
    }

    #[test]
    fn larger_budgets_never_lose_ground(seed in 0u64..10_000, c in vecn(3, 2.0)) {
        let body = ConvexBody::unit_ball(3);
        let f = VectorField::custom("wavy", 3, false, None, std::sync::Arc::new(move |x: &[f64]| {
            Ok(vec![(3.0 * x[0]).sin() + c[0], (2.0 * x[1] * x[2]).cos() + c[1], x[0] * x[1] + c[2]])
        })).unwrap();
        let small = sup_displacement(&f, &body, &Norm::Euclidean, &cheap(seed)).unwrap();
        let big = sup_displacement(&f, &body, &Norm::Euclidean, &EstimatorConfig { budget: 0.5, ..cheap(seed) }).unwrap();
        prop_assert!(big.value >= small.value);
    }

    #[test]
    fn growth_profiles_are_nondecreasing(radii in proptest::collection::btree_set(1u32..400, 2..6), c in vecn(2, 3.0), seed in 0u64..100) {
        let radii: Vec<f64> = radii.into_iter().map(|r| r as f64 / 4.0).collect();
        let phi = VectorField::rotation2d(0.7).unwrap();
        let psi = VectorField::constant(c).unwrap();
        let rows = growth_profile(&phi, &psi, &Norm::lp(3.0).unwrap(), &radii, &cheap(seed)).unwrap();
        for w in rows.windows(2) {
            prop_assert!(w[1].sup >= w[0].sup);
        }
    }

    #[test]
    fn vi_solutions_satisfy_the_inequality(g in vecn(4, 1.0), c in vecn(2, 3.0), seed in 0u64..100) {
        // M = I + skew + small symmetric part: strongly monotone.
        let m = DMatrix::from_row_slice(2, 2, &[1.0 + 0.3 * g[0].abs(), g[1], -g[1] + 0.2 * g[2], 1.0 + 0.3 * g[3].abs()]);
        let f = VectorField::affine(m, c).unwrap();
        let body = ConvexBody::aabb(&[-1.0, -1.0], &[1.0, 1.5]).unwrap();
        let sol = solve(&VIProblem::new(&body, &f).unwrap(), &SolverConfig { seed, ..SolverConfig::default() }).unwrap();
        let fx = f.eval(&sol.point).unwrap();
        for y in body.boundary_sample(64, 9).unwrap().into_iter().chain(body.interior_sample(64, 9).unwrap()) {
            let d: Vec<f64> = y.iter().zip(&sol.point).map(|(a, b)| a - b).collect();
            prop_assert!(dot(&fx, &d) >= -1e-6, "<f(x), y - x> = {}", dot(&fx, &d));
        }
    }
}
