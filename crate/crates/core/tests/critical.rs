mod common;

use arrangelab_core::arrangement::point_dist;
use arrangelab_core::{
    critical_points, evaluate, gradient_system, morse_report, Arrangement, ComplexScalar, Point, SolverConfig,
};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn expected_count(arr: &Arrangement) -> i64 {
    let comb = arrangelab_core::combinatorics(arr);
    let d = comb.degree() as i64;
    (d - 1) * (d - 2) / 2 - comb.class_sizes().iter().map(|&p| (p * (p - 1) / 2) as i64).sum::<i64>()
}

fn random_real_generic(rng: &mut ChaCha8Rng, d: usize) -> Arrangement {
    loop {
        let mut triples = Vec::new();
        let classes = rng.gen_range(2..=d);
        let angles: Vec<f64> = (0..classes).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
        for k in 0..d {
            let phi = angles[if k < classes { k } else { rng.gen_range(0..classes) }];
            triples.push([-phi.sin(), phi.cos(), rng.gen_range(-2.0..2.0)]);
        }
        if let Ok(arr) = Arrangement::from_real(&triples) {
            if arrangelab_core::is_generic(&arr, 1e-9).map(|r| r.is_generic).unwrap_or(false) {
                return arr;
            }
        }
    }
}

#[test]
fn count_identity_on_random_arrangements() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let cfg = SolverConfig::default();
    let mut morse = 0;
    for n in 0..120 {
        let d = rng.gen_range(2..=7);
        let arr = if n % 2 == 0 {
            random_real_generic(&mut rng, d)
        } else {
            let comb = random_combinatorics(&mut rng, d);
            random_generic(&mut rng, &comb)
        };
        let report = morse_report(&arr, &cfg).unwrap_or_else(|e| panic!("case {n}: {e} {:?}", arr.lines()));
        if !report.is_morse_outside {
            continue;
        }
        morse += 1;
        assert_eq!(report.critical_points.len() as i64, expected_count(&arr), "case {n}: {:?}", arr.lines());
        for cp in &report.critical_points {
            let nearest = arr.lines().iter().map(|l| l.eval(&cp.location).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest > cfg.off_tol);
            assert!(cp.value.norm() > 0.0);
        }
    }
    assert!(morse >= 100, "only {morse} Morse cases");
}

#[test]
fn real_generic_counts_match_bounded_regions() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = SolverConfig::default();
    for _ in 0..40 {
        let d = rng.gen_range(2..=6);
        let arr = random_real_generic(&mut rng, d);
        let report = morse_report(&arr, &cfg).unwrap();
        if report.is_morse_outside {
            // every bounded region of the real picture carries one real critical point
            let real = report.critical_points.iter().filter(|c| c.location.iter().all(|z| z.im.abs() < 1e-7)).count();
            assert_eq!(real as i64, expected_count(&arr));
            assert_eq!(report.critical_points.len() as i64, expected_count(&arr));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_the_polynomial(seed in 0u64..10_000, d in 2usize..6, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        prop_assume!(re.abs() + im.abs() > 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let comb = random_combinatorics(&mut rng, d);
        let arr = random_generic(&mut rng, &comb);
        let lambda = cx(re, im);
        let cfg = SolverConfig::default();
        let p = critical_points(&arr, &cfg).unwrap();
        let q = critical_points(&arr.scaled(lambda), &cfg).unwrap();
        prop_assert_eq!(p.len(), q.len());
        for a in &p {
            let b = q.iter().find(|b| point_dist(&a.location, &b.location) < 1e-9);
            prop_assert!(b.is_some());
            let b = b.unwrap();
            prop_assert_eq!(a.nondegenerate, b.nondegenerate);
            prop_assert!((b.value - lambda * a.value).norm() <= 1e-10 * (lambda * a.value).norm());
        }
    }
}

#[test]
fn gradient_system_agrees_with_evaluate() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let d = rng.gen_range(1..=8);
        let triples: Vec<[ComplexScalar; 3]> =
            (0..d).map(|_| [random_complex(&mut rng, 1.0), random_complex(&mut rng, 1.0), random_complex(&mut rng, 1.0)]).collect();
        let Ok(arr) = Arrangement::from_coefficients(&triples) else { continue };
        let (fx, fy) = gradient_system(&arr);
        let p: Point = [random_complex(&mut rng, 2.0), random_complex(&mut rng, 2.0)];
        let (_, g) = evaluate(&arr, &p);
        let size = g[0].norm().max(g[1].norm()).max(1e-300);
        assert!((fx.eval(p[0], p[1]) - g[0]).norm() <= 1e-9 * size);
        assert!((fy.eval(p[0], p[1]) - g[1]).norm() <= 1e-9 * size);
    }
}

/// Product-rule gradient and Hessian written out independently of the
/// library.
fn derivatives(lines: &[[ComplexScalar; 3]], p: &Point) -> ([ComplexScalar; 2], [ComplexScalar; 3]) {
    let vals: Vec<ComplexScalar> = lines.iter().map(|l| l[0] * p[0] + l[1] * p[1] + l[2]).collect();
    let rest = |skip: &[usize]| -> ComplexScalar {
        vals.iter().enumerate().filter(|(k, _)| !skip.contains(k)).map(|(_, v)| *v).product()
    };
    let mut g = [cx(0.0, 0.0); 2];
    let mut h = [cx(0.0, 0.0); 3];
    for i in 0..lines.len() {
        let r = rest(&[i]);
        g[0] += lines[i][0] * r;
        g[1] += lines[i][1] * r;
        for j in 0..lines.len() {
            if i != j {
                let r = rest(&[i, j]);
                h[0] += lines[i][0] * lines[j][0] * r;
                h[1] += lines[i][0] * lines[j][1] * r;
                h[2] += lines[i][1] * lines[j][1] * r;
            }
        }
    }
    (g, h)
}

fn newton_oracle(arr: &Arrangement, starts: usize, seed: u64) -> Vec<Point> {
    let lines: Vec<[ComplexScalar; 3]> = arr.lines().iter().map(|l| l.coefficients()).collect();
    let points: Vec<Point> = arrangelab_core::intersections(arr, 1e-9).unwrap().iter().map(|p| p.location).collect();
    let spread = points.iter().map(arrangelab_core::arrangement::point_norm).fold(1.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<Point> = Vec::new();
    for k in 0..starts {
        // half the starts near segments between intersection points, so thin
        // regions between nearly parallel lines are reached too
        let mut p: Point = if k % 2 == 0 || points.len() < 2 {
            [random_complex(&mut rng, 1.5 * spread), random_complex(&mut rng, 1.5 * spread)]
        } else {
            let (u, w) = (points[rng.gen_range(0..points.len())], points[rng.gen_range(0..points.len())]);
            let t: f64 = rng.gen_range(0.0..1.0);
            let noise = 0.3 * arrangelab_core::arrangement::point_dist(&u, &w) + 1e-3;
            [
                u[0] + t * (w[0] - u[0]) + random_complex(&mut rng, noise),
                u[1] + t * (w[1] - u[1]) + random_complex(&mut rng, noise),
            ]
        };
        for _ in 0..200 {
            let (g, h) = derivatives(&lines, &p);
            let det = h[0] * h[2] - h[1] * h[1];
            if det.norm() == 0.0 {
                break;
            }
            let step = [(h[2] * g[0] - h[1] * g[1]) / det, (h[0] * g[1] - h[1] * g[0]) / det];
            p = [p[0] - step[0], p[1] - step[1]];
            if step[0].norm() + step[1].norm() < 1e-15 * (1.0 + p[0].norm() + p[1].norm()) {
                break;
            }
        }
        let (g, _) = derivatives(&lines, &p);
        let on_arrangement = lines.iter().any(|l| (l[0] * p[0] + l[1] * p[1] + l[2]).norm() < 1e-7);
        let scale: f64 = lines.iter().map(|l| (l[0] * p[0]).norm() + (l[1] * p[1]).norm() + l[2].norm()).product();
        if on_arrangement || !p.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            continue;
        }
        if g[0].norm() + g[1].norm() > 1e-9 * scale.max(1.0) {
            continue;
        }
        if !found.iter().any(|q| point_dist(q, &p) < 1e-7) {
            found.push(p);
        }
    }
    found
}

#[test]
fn pipeline_matches_multistart_newton() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let cfg = SolverConfig::default();
    for n in 0..30 {
        let d = rng.gen_range(2..=4);
        let arr = if n % 2 == 0 {
            random_real_generic(&mut rng, d)
        } else {
            let comb = random_combinatorics(&mut rng, d);
            random_generic(&mut rng, &comb)
        };
        let pipeline = critical_points(&arr, &cfg).unwrap();
        let oracle = newton_oracle(&arr, 1000, n);
        assert_eq!(pipeline.len(), oracle.len(), "case {n}: {:?} vs {:?}", pipeline, oracle);
        for cp in &pipeline {
            assert!(oracle.iter().any(|q| point_dist(q, &cp.location) < 1e-7), "case {n}");
        }
    }
}
