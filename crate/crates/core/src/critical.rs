//! Critical points of the defining polynomial off the arrangement.
//!
//! The gradient system is expanded to dense bivariate polynomials, `y` is
//! eliminated with a resultant, the `x` roots are back-substituted, and each
//! candidate is polished by Newton's method on the gradient. Elimination runs
//! in rescaled coordinates `p = center + rho * U q` with `U` a seeded random
//! unitary matrix, which makes the projection to `x` proper and keeps the
//! points of interest near the unit circle.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{
    c64, combinatorics, evaluate, hessian, is_generic, meet, parallel_classes, point_dist, point_norm, Arrangement,
    ComplexScalar, Point, TOL_POINT,
};
use crate::error::{Error, Result};
use crate::invariants::{euler_zero_fiber, euler_zero_fiber_general, predicted_bifurcation_count};
use crate::poly::{BiPoly, UniPoly};
use crate::resultant::interpolate_on_circle;
use crate::roots::{aberth_from, approximate_roots, SolverConfig};

const COORDINATE_ATTEMPTS: usize = 3;
/// Minimum `|b_i|` of a normalized line in elimination coordinates.
const MIN_Y_COEFFICIENT: f64 = 1e-3;
/// Relative residual a back-substituted pair must meet before polishing.
const CANDIDATE_TOL: f64 = 1e-2;
/// Relative Hessian determinant below which a point is degenerate.
const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Point,
    pub value: ComplexScalar,
    pub hessian_det: ComplexScalar,
    pub nondegenerate: bool,
    /// `max(|f_x|, |f_y|)` at the location.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseReport {
    pub critical_points: Vec<CriticalPoint>,
    pub critical_values_nonzero: Vec<ComplexScalar>,
    pub is_morse_outside: bool,
    /// Number of critical points expected for a generic arrangement.
    pub predicted_count: Option<i64>,
    pub count_matches: Option<bool>,
    /// Distinct critical values including 0.
    pub measured_bifurcation_count: i64,
    /// `2 - chi(f^{-1}(0))`, valid when Morse outside the arrangement.
    pub predicted_bifurcation_count: i64,
    pub bifurcation_count_matches: bool,
}

/// `(f_x, f_y)` expanded: `f_x = sum a_i prod_{k != i} l_k` and likewise for
/// `f_y`, times the arrangement scale.
pub fn gradient_system(arr: &Arrangement) -> (BiPoly, BiPoly) {
    let factors: Vec<BiPoly> = arr.lines().iter().map(|l| BiPoly::linear(l.a, l.b, l.c)).collect();
    let d = factors.len();
    let mut suffix = vec![BiPoly::constant(c64(1.0, 0.0)); d + 1];
    for i in (0..d).rev() {
        suffix[i] = suffix[i + 1].mul(&factors[i]);
    }
    let mut prefix = BiPoly::constant(c64(1.0, 0.0));
    let mut fx = BiPoly::zero();
    let mut fy = BiPoly::zero();
    for (i, l) in arr.lines().iter().enumerate() {
        let others = prefix.mul(&suffix[i + 1]);
        fx = fx.add(&others.scale(l.a));
        fy = fy.add(&others.scale(l.b));
        prefix = prefix.mul(&factors[i]);
    }
    (fx.scale(arr.scale()), fy.scale(arr.scale()))
}

/// Sum of the moduli of the product-rule terms of the gradient; the natural
/// scale against which a gradient residual is small.
fn gradient_magnitude(arr: &Arrangement, p: &Point) -> f64 {
    let vals: Vec<f64> = arr.lines().iter().map(|l| l.eval(p).norm()).collect();
    let mut total = 0.0;
    for (i, l) in arr.lines().iter().enumerate() {
        let others: f64 = vals.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, v)| v).product();
        total += (l.a.norm() + l.b.norm()) * others;
    }
    total * arr.scale().norm()
}

fn residual(arr: &Arrangement, p: &Point) -> f64 {
    let (_, g) = evaluate(arr, p);
    g[0].norm().max(g[1].norm())
}

/// Damped Newton on the gradient. Stops when the step is at rounding level.
fn newton_polish(arr: &Arrangement, mut p: Point, max_iter: usize) -> Point {
    let mut last_residual = residual(arr, &p);
    for _ in 0..max_iter {
        let (_, g) = evaluate(arr, &p);
        let [hxx, hxy, hyy] = hessian(arr, &p);
        let det = hxx * hyy - hxy * hxy;
        if det == c64(0.0, 0.0) {
            break;
        }
        let step = [(hyy * g[0] - hxy * g[1]) / det, (hxx * g[1] - hxy * g[0]) / det];
        if !step.iter().all(|s| s.re.is_finite() && s.im.is_finite()) {
            break;
        }
        let mut damping = 1.0;
        let mut next = [p[0] - step[0], p[1] - step[1]];
        let mut next_residual = residual(arr, &next);
        while next_residual > 2.0 * last_residual && damping > 1e-3 {
            damping *= 0.5;
            next = [p[0] - damping * step[0], p[1] - damping * step[1]];
            next_residual = residual(arr, &next);
        }
        let size = point_norm(&[damping * step[0], damping * step[1]]);
        p = next;
        last_residual = next_residual;
        if size <= 4.0 * f64::EPSILON * (1.0 + point_norm(&p)) {
            break;
        }
    }
    p
}

fn random_unitary(rng: &mut ChaCha8Rng) -> [[ComplexScalar; 2]; 2] {
    let theta: f64 = rng.gen_range(0.2..1.35);
    let (p1, p2) = (rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.0..std::f64::consts::TAU));
    let e1 = Complex64::from_polar(1.0, p1);
    let e2 = Complex64::from_polar(1.0, p2);
    [
        [e1 * theta.cos(), e2 * theta.sin()],
        [-e2.conj() * theta.sin(), e1.conj() * theta.cos()],
    ]
}

fn pairwise_points(arr: &Arrangement) -> Vec<Point> {
    let lines = arr.lines();
    let mut pts = Vec::new();
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            if let Some(p) = meet(&lines[i], &lines[j]) {
                pts.push(p);
            }
        }
    }
    pts
}

/// Center and spread of the pairwise intersection points.
fn frame(arr: &Arrangement) -> (Point, f64) {
    let pts = pairwise_points(arr);
    let n = pts.len().max(1) as f64;
    let center = pts.iter().fold([c64(0.0, 0.0); 2], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
    let center = [center[0] / n, center[1] / n];
    let spread = pts.iter().map(|p| point_dist(p, &center)).fold(0.0, f64::max);
    let spread = if spread > 1e-12 * (1.0 + point_norm(&center)) { spread } else { 1.0 };
    (center, spread)
}

/// Elimination coordinates: the pulled-back arrangement and the map back.
struct Chart {
    arr: Arrangement,
    /// RMS modulus of the x-coordinates of the intersection points.
    radius: f64,
    center: Point,
    m: [[ComplexScalar; 2]; 2],
}

impl Chart {
    fn to_original(&self, q: &Point) -> Point {
        [
            self.center[0] + self.m[0][0] * q[0] + self.m[0][1] * q[1],
            self.center[1] + self.m[1][0] * q[0] + self.m[1][1] * q[1],
        ]
    }
}

fn proper_chart(arr: &Arrangement, seed: u64) -> Result<Chart> {
    let (center, spread) = frame(arr);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..COORDINATE_ATTEMPTS {
        let u = random_unitary(&mut rng);
        let m = [[spread * u[0][0], spread * u[0][1]], [spread * u[1][0], spread * u[1][1]]];
        let pulled = arr.pullback(m, center)?.unscaled();
        if pulled.lines().iter().all(|l| l.b.norm() >= MIN_Y_COEFFICIENT) {
            let xs: Vec<f64> = pairwise_points(&pulled).iter().map(|q| q[0].norm_sqr()).collect();
            let rms = (xs.iter().sum::<f64>() / xs.len().max(1) as f64).sqrt();
            let radius = if rms > 1e-6 { rms } else { 1.0 };
            return Ok(Chart { arr: pulled, radius, center, m });
        }
    }
    Err(Error::DegenerateElimination { attempts: COORDINATE_ATTEMPTS })
}

fn lexicographic(p: &Point, q: &Point) -> std::cmp::Ordering {
    p[0].re
        .total_cmp(&q[0].re)
        .then(p[0].im.total_cmp(&q[0].im))
        .then(p[1].re.total_cmp(&q[1].re))
        .then(p[1].im.total_cmp(&q[1].im))
}

/// Nondegeneracy test: `|det H|` against the squared Frobenius norm of `H`.
pub fn is_nondegenerate(h: &[ComplexScalar; 3]) -> bool {
    let det = h[0] * h[2] - h[1] * h[1];
    let frob = h[0].norm_sqr() + 2.0 * h[1].norm_sqr() + h[2].norm_sqr();
    frob > 0.0 && det.norm() > DEGENERACY_TOL * frob
}

/// Roots of `f_y(x, .)` in the chart. Rough roots of the expanded
/// polynomial are refined together on the product-rule values of `f_y`,
/// which keeps clustered roots apart and accurate.
fn y_roots(chart: &Arrangement, fy: &BiPoly, x: ComplexScalar, cfg: &SolverConfig) -> Vec<ComplexScalar> {
    let in_y = UniPoly::new(fy.at_x(x));
    if in_y.degree() == 0 {
        return Vec::new();
    }
    let start = approximate_roots(&in_y, cfg.root_max_iter);
    aberth_from(start, cfg.newton_max_iter, |y| {
        let p = [x, y];
        let (_, g) = evaluate(chart, &p);
        if g[1] == c64(0.0, 0.0) {
            return Some(c64(0.0, 0.0));
        }
        let ratio = g[1] / hessian(chart, &p)[2];
        (ratio.re.is_finite() && ratio.im.is_finite()).then_some(ratio)
    })
    .0
}

/// `Res_y(f_y, f_x)` at `x` as `lc^n prod f_x(x, y_i)` over the roots of
/// `f_y(x, .)`, with `f_x` from the product rule, and the smallest relative
/// size of those factors.
fn resultant_sample(chart: &Arrangement, fx: &BiPoly, fy: &BiPoly, x: ComplexScalar, cfg: &SolverConfig) -> (ComplexScalar, f64) {
    let in_y = UniPoly::new(fy.at_x(x));
    let lead = *in_y.coefficients().last().unwrap();
    let mut value = lead.powu(fx.degree_y() as u32);
    let mut smallest: f64 = 1.0;
    for y in y_roots(chart, fy, x, cfg) {
        let p = [x, y];
        let (_, g) = evaluate(chart, &p);
        value *= g[0];
        smallest = smallest.min(g[0].norm() / gradient_magnitude(chart, &p).max(f64::MIN_POSITIVE));
    }
    (value, smallest)
}

/// Refines approximate roots of `Res_y(f_y, f_x)` by an Aberth iteration on
/// the resultant evaluated pointwise as `prod f_x(x, y_i)` over the roots of
/// `f_y(x, .)`. Its logarithmic derivative is
/// `sum det H / (f_yy f_x)` at those roots, so no coefficients are needed.
fn refine_x_roots(chart: &Arrangement, fy: &BiPoly, start: Vec<ComplexScalar>, cfg: &SolverConfig) -> Vec<ComplexScalar> {
    let (z, _) = aberth_from(start, cfg.root_max_iter, |x| {
        let ys = y_roots(chart, fy, x, cfg);
        if ys.is_empty() {
            return None;
        }
        let mut log_derivative = c64(0.0, 0.0);
        for y in ys {
            let p = [x, y];
            let (_, g) = evaluate(chart, &p);
            if g[0] == c64(0.0, 0.0) {
                return Some(c64(0.0, 0.0));
            }
            let [hxx, hxy, hyy] = hessian(chart, &p);
            log_derivative += (hxx * hyy - hxy * hxy) / (hyy * g[0]);
        }
        let ratio = log_derivative.inv();
        (ratio.re.is_finite() && ratio.im.is_finite()).then_some(ratio)
    });
    z
}

/// All critical points of the defining polynomial with
/// `min_i |l_i(p)| > cfg.off_tol`, sorted lexicographically.
pub fn critical_points(arr: &Arrangement, cfg: &SolverConfig) -> Result<Vec<CriticalPoint>> {
    if parallel_classes(arr).len() < 2 {
        return Err(Error::SingleDirection);
    }
    let chart = proper_chart(arr, cfg.seed)?;
    let (fx, fy) = gradient_system(&chart.arr);
    // fy has a nonzero constant leading coefficient in y, so the resultant
    // vanishes exactly at x-coordinates of common zeros.
    let (m, n) = (fy.degree_y(), fx.degree_y());
    let bound = (m * fx.degree_x() + n * fy.degree_x()).min(fy.total_degree() * fx.total_degree());
    let res = interpolate_on_circle(bound, chart.radius, |x| Ok(resultant_sample(&chart.arr, &fx, &fy, x, cfg)))?;
    let rough = if res.degree() == 0 { Vec::new() } else { approximate_roots(&res, cfg.root_max_iter) };
    let refined = refine_x_roots(&chart.arr, &fy, rough.clone(), cfg);

    let mut candidates: Vec<Point> = Vec::new();
    for x in rough.into_iter().chain(refined) {
        for y in y_roots(&chart.arr, &fy, x, cfg) {
            let q = [x, y];
            let scale = gradient_magnitude(&chart.arr, &q);
            if evaluate(&chart.arr, &q).1[0].norm() <= CANDIDATE_TOL * scale.max(f64::MIN_POSITIVE) {
                candidates.push(q);
            }
        }
    }

    let mut accepted: Vec<Point> = Vec::new();
    for q in candidates {
        let q = newton_polish(&chart.arr, q, cfg.newton_max_iter);
        let p = newton_polish(arr, chart.to_original(&q), cfg.newton_max_iter);
        if !p.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            continue;
        }
        let off = arr.lines().iter().map(|l| l.eval(&p).norm()).fold(f64::INFINITY, f64::min);
        if off <= cfg.off_tol {
            continue;
        }
        if residual(arr, &p) > cfg.residual_tol * gradient_magnitude(arr, &p) {
            continue;
        }
        accepted.push(p);
    }
    accepted.sort_by(lexicographic);
    let mut unique: Vec<Point> = Vec::new();
    for p in accepted {
        if !unique.iter().any(|u| point_dist(u, &p) <= cfg.cluster_tol * (1.0 + point_norm(&p))) {
            unique.push(p);
        }
    }
    Ok(unique
        .into_iter()
        .map(|p| {
            let (value, g) = evaluate(arr, &p);
            let h = hessian(arr, &p);
            CriticalPoint {
                location: p,
                value,
                hessian_det: h[0] * h[2] - h[1] * h[1],
                nondegenerate: is_nondegenerate(&h),
                residual: g[0].norm().max(g[1].norm()),
            }
        })
        .collect())
}

/// Groups values that agree within `tol` relative to their modulus.
/// Returns, per cluster, the member indices in input order.
pub fn cluster_values(values: &[ComplexScalar], tol: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let hit = clusters.iter().position(|cl| {
            cl.iter().any(|&k| (values[k] - v).norm() <= tol * values[k].norm().max(v.norm()))
        });
        match hit {
            Some(c) => clusters[c].push(i),
            None => clusters.push(vec![i]),
        }
    }
    // merge clusters bridged by later members
    let mut merged = true;
    while merged {
        merged = false;
        'outer: for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let touch = clusters[a].iter().any(|&i| {
                    clusters[b]
                        .iter()
                        .any(|&k| (values[k] - values[i]).norm() <= tol * values[k].norm().max(values[i].norm()))
                });
                if touch {
                    let moved = clusters.remove(b);
                    clusters[a].extend(moved);
                    clusters[a].sort_unstable();
                    merged = true;
                    break 'outer;
                }
            }
        }
    }
    clusters
}

pub fn morse_report(arr: &Arrangement, cfg: &SolverConfig) -> Result<MorseReport> {
    let points = critical_points(arr, cfg)?;
    let values: Vec<ComplexScalar> = points.iter().map(|p| p.value).collect();
    let clusters = cluster_values(&values, cfg.value_tol);
    let critical_values_nonzero: Vec<ComplexScalar> = clusters
        .iter()
        .map(|cl| cl.iter().map(|&i| values[i]).sum::<ComplexScalar>() / cl.len() as f64)
        .collect();
    let is_morse_outside = points.iter().all(|p| p.nondegenerate) && clusters.iter().all(|cl| cl.len() == 1);

    let generic = is_generic(arr, TOL_POINT)?.is_generic;
    let predicted_count = generic.then(|| 1 - euler_zero_fiber(&combinatorics(arr)));
    let count_matches = predicted_count.map(|n| n == points.len() as i64);
    let measured = critical_values_nonzero.len() as i64 + 1;
    let predicted_b = predicted_bifurcation_count(euler_zero_fiber_general(arr, TOL_POINT)?);
    Ok(MorseReport {
        critical_points: points,
        critical_values_nonzero,
        is_morse_outside,
        predicted_count,
        count_matches,
        measured_bifurcation_count: measured,
        predicted_bifurcation_count: predicted_b,
        bifurcation_count_matches: measured == predicted_b,
    })
}
