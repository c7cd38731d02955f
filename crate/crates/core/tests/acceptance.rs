//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line even when the run succeeds.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use hsdl_core::displacement::{
    check_eigen_bound, check_lower_bound, find_functional_zero, growth_profile, projection_minorant_check,
    rotation_sweep, sharpness_witness, sup_displacement,
};
use hsdl_core::fields::{kakutani_fixed_point, make_subspace_construction, FieldKindSpec};
use hsdl_core::harness::{self, expand_family, Family, RunOptions};
use hsdl_core::vi::{solve, Classification, SolverConfig, VIProblem};
use hsdl_core::{BoundKind, ConvexBody, EstimatorConfig, Norm, VectorField, Verdict};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn cfg() -> EstimatorConfig {
    EstimatorConfig::default().with_seed(2024)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rotation_regimes() -> Outcome {
    let rows = rotation_sweep(25, &cfg()).map_err(|e| e.to_string())?;
    ensure!(rows.len() == 25, "expected 25 rows, got {}", rows.len());
    let mut worst = 0.0_f64;
    for row in &rows {
        let closed = 2.0 * (row.alpha.abs() / 2.0).sin();
        let err = (row.d_estimate - closed).abs();
        worst = worst.max(err);
        ensure!(err <= 1e-3, "alpha={:.4}: estimate {} vs {}", row.alpha, row.d_estimate, closed);
        let gap = row.d_estimate - 1.0;
        if row.alpha.abs() < PI / 3.0 - 0.01 {
            ensure!(gap < 0.0, "alpha={:.4}: expected d < 1, got {}", row.alpha, row.d_estimate);
        } else if row.alpha.abs() > PI / 3.0 + 0.01 {
            ensure!(gap > 0.0, "alpha={:.4}: expected d > 1, got {}", row.alpha, row.d_estimate);
        }
    }
    let disc = ConvexBody::unit_ball(2);
    for alpha in [-PI / 3.0, PI / 3.0] {
        let f = VectorField::rotation2d(alpha).map_err(|e| e.to_string())?;
        let d = sup_displacement(&f, &disc, &Norm::Euclidean, &cfg()).map_err(|e| e.to_string())?;
        ensure!((d.value - 1.0).abs() <= 1e-3, "alpha={alpha}: d={}", d.value);
    }
    Ok(format!("25 angles, max |d - 2 sin(|a|/2)| = {worst:.2e}"))
}

fn family_fields() -> Result<Vec<VectorField>, String> {
    let specs = expand_family(Family::Mixed, &[2, 3, 5], 100, [1.0, 4.0], 7, 0).map_err(|e| e.to_string())?;
    specs
        .iter()
        .map(|s| VectorField::from_spec(s).map_err(|e| e.to_string()))
        .collect()
}

fn unit_ball_suite() -> Outcome {
    let specs = expand_family(Family::Mixed, &[2, 3, 5], 100, [1.0, 4.0], 7, 0).map_err(|e| e.to_string())?;
    let (mut min_slack, mut max_translation_slack) = (f64::INFINITY, 0.0_f64);
    let mut translations = 0;
    for (k, spec) in specs.iter().enumerate() {
        let f = VectorField::from_spec(spec).map_err(|e| e.to_string())?;
        let n = f.dimension();
        match &spec.kind {
            FieldKindSpec::Translation { xprime } => {
                let r = norm2(xprime);
                ensure!(r > 1.0 && r <= 4.0, "member {k}: |x'| = {r} outside (1, 4]");
                translations += 1;
            }
            FieldKindSpec::Affine { m, c } => {
                // Independent zero-freeness check: the unique zero M^{-1}c lies outside the ball.
                let m = DMatrix::from_fn(n, n, |i, j| m[i][j]);
                let zero = m.lu().solve(&DVector::from_column_slice(c)).ok_or("singular affine member")?;
                ensure!(zero.norm() > 1.0, "member {k}: affine zero inside the ball");
            }
            other => return Err(format!("unexpected family member {other:?}")),
        }
        let rep = check_lower_bound(&f, &ConvexBody::unit_ball(n), &Norm::Euclidean, BoundKind::UnitBallThm22, &cfg())
            .map_err(|e| e.to_string())?;
        ensure!(rep.slack >= -1e-6, "member {k} (n={n}): slack {}", rep.slack);
        ensure!(!rep.vanishing_detected, "member {k}: vanishing witness found");
        min_slack = min_slack.min(rep.slack);
        if matches!(spec.kind, FieldKindSpec::Translation { .. }) {
            ensure!(rep.slack.abs() <= 1e-6, "translation member {k}: slack {} is not 0", rep.slack);
            max_translation_slack = max_translation_slack.max(rep.slack.abs());
        }
    }
    Ok(format!(
        "100 fields, min slack {min_slack:.2e}, {translations} translations with max |slack| {max_translation_slack:.2e}"
    ))
}

fn euclidean_equality() -> Outcome {
    for r in [0.5, 1.0, 2.0] {
        let body = ConvexBody::ball(vec![0.0, 0.0], r).map_err(|e| e.to_string())?;
        let xp = vec![2.0 * r * 0.6, 2.0 * r * 0.8];
        let f = VectorField::translation(xp).map_err(|e| e.to_string())?.with_nonvanishing(true);
        let rep = check_lower_bound(&f, &body, &Norm::Euclidean, BoundKind::EuclideanThm31, &cfg())
            .map_err(|e| e.to_string())?;
        ensure!((rep.d_hat.value - 2.0 * r).abs() <= 1e-6, "r={r}: sup {}", rep.d_hat.value);
        ensure!((rep.inf_hat.value - r).abs() <= 1e-6, "r={r}: inf {}", rep.inf_hat.value);
        ensure!(rep.slack.abs() <= 1e-6, "r={r}: slack {}", rep.slack);
        ensure!(rep.verdict == Verdict::HoldsWithEquality, "r={r}: verdict {:?}", rep.verdict);
    }
    Ok("r in {0.5, 1, 2}: sup = 2r, inf = r, slack = 0".into())
}

fn sharpness() -> Outcome {
    let square = ConvexBody::aabb(&[-1.0, -1.0], &[1.0, 1.0]).map_err(|e| e.to_string())?;
    let (field, rep) = sharpness_witness(&square, 1.2, 0.1, &cfg()).map_err(|e| e.to_string())?;
    ensure!(field.claimed_nonvanishing, "witness not marked nonvanishing");
    ensure!(!rep.vanishing_detected, "witness vanishes");
    // Independent nonvanishing check: |f| on a dense grid of the square.
    let mut min_f = f64::INFINITY;
    for i in 0..=200 {
        for j in 0..=200 {
            let x = [-1.0 + i as f64 / 100.0, -1.0 + j as f64 / 100.0];
            min_f = min_f.min(norm2(&field.eval(&x).map_err(|e| e.to_string())?));
        }
    }
    ensure!(min_f > 0.05, "grid minimum of |f| is {min_f}");
    ensure!((rep.d_hat.value - 1.1).abs() <= 1e-6, "sup {}", rep.d_hat.value);
    ensure!((rep.inf_hat.value - 0.1).abs() <= 1e-6, "inf {}", rep.inf_hat.value);
    let violation = 1.2 + rep.inf_hat.value - rep.d_hat.value;
    ensure!(violation >= 0.19, "alpha-inequality violated only by {violation}");
    Ok(format!("sup {:.6}, inf {:.6}, violated by {violation:.4}", rep.d_hat.value, rep.inf_hat.value))
}

fn vi_solver() -> Outcome {
    let disc = ConvexBody::unit_ball(2);
    let cfg = SolverConfig::default();
    let f = VectorField::constant(vec![0.0, -3.0]).map_err(|e| e.to_string())?;
    let sol = solve(&VIProblem::new(&disc, &f).map_err(|e| e.to_string())?, &cfg).map_err(|e| e.to_string())?;
    ensure!(norm2(&[sol.point[0], sol.point[1] - 1.0]) <= 1e-7, "constant field: point {:?}", sol.point);
    ensure!((sol.lambda.unwrap_or(f64::NAN) - 3.0).abs() <= 1e-6, "constant field: lambda {:?}", sol.lambda);
    ensure!(sol.residual <= 1e-8, "constant field: residual {}", sol.residual);

    let g = VectorField::translation(vec![2.0, 0.0]).map_err(|e| e.to_string())?;
    let sol = solve(&VIProblem::new(&disc, &g).map_err(|e| e.to_string())?, &cfg).map_err(|e| e.to_string())?;
    ensure!(norm2(&[sol.point[0] - 1.0, sol.point[1]]) <= 1e-7, "translation: point {:?}", sol.point);
    ensure!((sol.lambda.unwrap_or(f64::NAN) - 1.0).abs() <= 1e-6, "translation: lambda {:?}", sol.lambda);

    for zero in [[0.3, 0.2], [-0.5, 0.1], [0.0, 0.0]] {
        let h = VectorField::translation(zero.to_vec()).map_err(|e| e.to_string())?;
        let sol = solve(&VIProblem::new(&disc, &h).map_err(|e| e.to_string())?, &cfg).map_err(|e| e.to_string())?;
        ensure!(
            sol.classification == Classification::InteriorZero,
            "zero at {zero:?}: classified {:?}",
            sol.classification
        );
    }
    Ok("(0,1) with lambda 3; (1,0) with lambda 1; interior zeros classified".into())
}

fn norm_constants() -> Outcome {
    for n in [2usize, 3, 5] {
        let s = (n as f64).sqrt();
        for (p, expected) in [(f64::INFINITY, (1.0, s)), (1.0, (1.0 / s, 1.0))] {
            let c = Norm::lp(p).unwrap().equivalence_constants(n).map_err(|e| e.to_string())?;
            ensure!(
                (c.theta1 - expected.0).abs() <= 1e-6 && (c.theta2 - expected.1).abs() <= 1e-6,
                "l{p} n={n}: ({}, {}) vs {expected:?}",
                c.theta1,
                c.theta2
            );
            let nu = (1.0 / c.theta2).min(c.theta1 / c.theta2);
            ensure!((c.nu() - nu).abs() <= 1e-12, "l{p} n={n}: nu {} vs {nu}", c.nu());
            // The weighted norm with unit weights takes the sphere-search path.
            let w = Norm::weighted(vec![1.0; n], p).unwrap();
            let cw = w.equivalence_constants(n).map_err(|e| e.to_string())?;
            ensure!(
                (cw.theta1 - expected.0).abs() <= 1e-6 && (cw.theta2 - expected.1).abs() <= 1e-6,
                "searched l{p} n={n}: ({}, {}) vs {expected:?}",
                cw.theta1,
                cw.theta2
            );
        }
    }
    Ok("l1 and l-inf in n = 2, 3, 5 match, closed form and sphere search".into())
}

fn star_consistency() -> Outcome {
    let fields = family_fields()?;
    let mut min_slack = f64::INFINITY;
    for p in [1.0, f64::INFINITY] {
        let norm = Norm::lp(p).unwrap();
        for (k, f) in fields.iter().enumerate() {
            let body = ConvexBody::unit_ball(f.dimension());
            let rep = check_lower_bound(f, &body, &norm, BoundKind::StarThm35, &cfg()).map_err(|e| e.to_string())?;
            ensure!(rep.slack >= -1e-4, "l{p} member {k}: slack {}", rep.slack);
            min_slack = min_slack.min(rep.slack);
        }
    }
    Ok(format!("200 reports, min slack {min_slack:.3e}"))
}

fn eigen_bound() -> Outcome {
    let f = VectorField::polynomial(vec![1.0, 0.0, 1.0]).unwrap().with_nonvanishing(true);
    for mu in [0.5, 1.0, 2.0] {
        let rep = check_eigen_bound(&f, mu, &cfg()).map_err(|e| e.to_string())?;
        ensure!((rep.d_hat.value - (2.0 + mu)).abs() <= 1e-6, "mu={mu}: lhs {}", rep.d_hat.value);
        ensure!((rep.d_hat.witness[0] + 1.0).abs() <= 1e-4, "mu={mu}: witness {:?}", rep.d_hat.witness);
        ensure!((rep.slack - 1.0).abs() <= 1e-6, "mu={mu}: slack {}", rep.slack);
        let red = rep.scaled_reduction.as_ref().ok_or("no scaled reduction")?;
        ensure!(red.lhs_disagreement <= 1e-8, "mu={mu}: disagreement {}", red.lhs_disagreement);
        ensure!((red.lhs - rep.d_hat.value).abs() <= 1e-8, "mu={mu}: reduced lhs {}", red.lhs);
    }
    Ok("lhs = 2 + mu at x = -1, slack 1, reductions agree".into())
}

fn kakutani() -> Outcome {
    for n in [1usize, 3, 8] {
        let p = kakutani_fixed_point(n).map_err(|e| e.to_string())?;
        let expect = 1.0 / ((n + 1) as f64).sqrt();
        ensure!(p.iter().all(|v| (v - expect).abs() <= 1e-15), "N={n}: {p:?}");
        let fp = VectorField::kakutani(n).unwrap().eval(&p).map_err(|e| e.to_string())?;
        let res = norm2(&fp.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>());
        ensure!(res <= 1e-12, "N={n}: residual {res}");
    }
    let psi = VectorField::displacement_form(VectorField::kakutani(3).unwrap());
    let a = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
    let z = find_functional_zero(&psi, &a, &cfg()).map_err(|e| e.to_string())?;
    let y = psi.eval(&z.point).map_err(|e| e.to_string())?;
    let resid = (y[0] * y[0] + y[1] * y[1]).sqrt();
    ensure!(resid <= 1e-6, "|A psi(x)| = {resid}");
    Ok(format!("fixed points exact; |A psi(x)| = {resid:.1e}"))
}

fn boundedness_dichotomy() -> Outcome {
    let (psi, phi) = make_subspace_construction(8, 4).map_err(|e| e.to_string())?;
    let rows = growth_profile(&phi, &psi, &Norm::Euclidean, &[1.0, 5.0, 50.0], &cfg()).map_err(|e| e.to_string())?;
    ensure!(rows.iter().all(|r| r.sup <= 1.0 + 1e-9), "subspace profile {:?}", rows.iter().map(|r| r.sup).collect::<Vec<_>>());

    let id = VectorField::identity(3).unwrap();
    let e1 = VectorField::constant(vec![1.0, 0.0, 0.0]).unwrap();
    let radii = [1.0, 2.0, 5.0, 10.0, 50.0];
    let rows = growth_profile(&id, &e1, &Norm::Euclidean, &radii, &cfg()).map_err(|e| e.to_string())?;
    for row in &rows {
        ensure!((row.sup - (row.r + 1.0)).abs() <= 1e-4, "r={}: {} vs {}", row.r, row.sup, row.r + 1.0);
    }

    let rep = projection_minorant_check(&psi, 8, 4, 1000, 5).map_err(|e| e.to_string())?;
    ensure!(rep.passed && rep.samples == 1000, "minorant failed: {rep:?}");
    ensure!(rep.max_violation <= 1e-10, "max violation {}", rep.max_violation);
    Ok(format!(
        "split profile <= 1, r+1 profile exact, minorant max violation {:.1e}",
        rep.max_violation
    ))
}

fn determinism() -> Outcome {
    let text = harness::preset("q1").map_err(|e| e.to_string())?;
    let a = harness::run_campaign_str(&text, &RunOptions::default()).map_err(|e| e.to_string())?;
    let b = harness::run_campaign_str(&text, &RunOptions::default()).map_err(|e| e.to_string())?;
    ensure!(a.report_hash == b.report_hash, "hashes differ: {} vs {}", a.report_hash, b.report_hash);
    ensure!(a.report_hash == harness::compute_report_hash(&b), "hash does not cover the report");
    ensure!(a.aggregate.exit_code == 0, "q1 exit code {}", a.aggregate.exit_code);
    for item in &a.items {
        let claimed = item.inputs.pointer("/field/nonvanishing").and_then(|v| v.as_bool()) == Some(true);
        if item.check == "bound" && claimed {
            let slack = item.result.as_ref().and_then(|r| r["slack"].as_f64()).ok_or("missing slack")?;
            ensure!(slack >= -1e-6, "{}: slack {slack}", item.id);
        }
    }
    let mut ja = serde_json::to_value(&a).unwrap();
    let mut jb = serde_json::to_value(&b).unwrap();
    ja["generated_at"] = serde_json::Value::Null;
    jb["generated_at"] = serde_json::Value::Null;
    ensure!(ja == jb, "reports differ outside generated_at");
    Ok(format!("q1 report hash {}", &a.report_hash[..16]))
}

fn main() {
    // `cargo test -- --list` and filters are meaningless here; honour --list so
    // tooling that enumerates tests does not run the suite.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("rotation regimes", rotation_regimes),
        ("unit-ball lower bound over random nonvanishing fields", unit_ball_suite),
        ("Euclidean bound equality family", euclidean_equality),
        ("sharpness witness on the square", sharpness),
        ("variational inequality solver", vi_solver),
        ("norm equivalence constants", norm_constants),
        ("star-norm bound consistency", star_consistency),
        ("eigenvalue bound for x^2 + 1", eigen_bound),
        ("Kakutani fixed point and functional zero", kakutani),
        ("boundedness dichotomy", boundedness_dichotomy),
        ("q1 campaign determinism", determinism),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {:>2}: {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
