//! Continuous families of generic arrangements with fixed combinatorics.
//!
//! A generic arrangement is linked to a canonical real arrangement with the
//! same combinatorics in three kinds of moves: each parallel class is
//! rotated to its canonical direction, one class at a time; moving lines
//! that would pass through a double point of the static lines get a small
//! offset detour that is kept afterwards; finally all offsets translate to
//! their canonical values. Two arrangements with the same combinatorics are
//! linked through their common canonical form.
//!
//! Coefficient tracks are piecewise: on a segment `[t0, t1]` with local
//! parameter `s`, each coefficient is `(1 - s) start + s end`, and the
//! constant term additionally carries `4 s (1 - s) bulge`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{
    c64, combinatorics, is_generic, meet, parallel_classes, Arrangement, Combinatorics, ComplexScalar, Line, Point,
    TOL_POINT,
};
use crate::critical::morse_report;
use crate::error::{Error, Result};
use crate::io::lines_json;
use crate::poly::UniPoly;
use crate::roots::{univariate_roots, SolverConfig};

/// Continuity tolerance at segment joints.
const JOINT_TOL: f64 = 1e-12;
const CANONICAL_ATTEMPTS: usize = 100;
/// Minimum angle-like separation kept between a moving direction and a
/// static one.
const DIRECTION_MARGIN: f64 = 1e-3;
const PARKING_ATTEMPTS: usize = 20;
const BULGE_ATTEMPTS: usize = 32;

type Triple = [ComplexScalar; 3];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub start: Triple,
    pub end: Triple,
    /// Extra `4 s (1 - s)` term of the constant coefficient.
    pub bulge: ComplexScalar,
}

impl Segment {
    fn constant(t0: f64, t1: f64, v: Triple) -> Segment {
        Segment { t0, t1, start: v, end: v, bulge: c64(0.0, 0.0) }
    }

    fn eval(&self, t: f64) -> Triple {
        let s = if self.t1 > self.t0 { ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0) } else { 0.0 };
        let mut v = [c64(0.0, 0.0); 3];
        for k in 0..3 {
            v[k] = self.start[k] + (self.end[k] - self.start[k]) * s;
        }
        v[2] += self.bulge * (4.0 * s * (1.0 - s));
        v
    }
}

/// Coefficients of one line as a function of `t` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTrack {
    pub segments: Vec<Segment>,
}

impl CoefficientTrack {
    pub fn eval(&self, t: f64) -> Triple {
        let seg = self
            .segments
            .iter()
            .find(|s| t <= s.t1)
            .unwrap_or_else(|| self.segments.last().expect("tracks are nonempty"));
        seg.eval(t)
    }

    /// Checks coverage of `[0, 1]`, ordering and continuity at joints.
    pub fn validate(&self) -> Result<()> {
        let first = self.segments.first().ok_or_else(|| Error::InvalidPath("empty track".into()))?;
        let last = self.segments.last().unwrap();
        if first.t0 != 0.0 || last.t1 != 1.0 {
            return Err(Error::InvalidPath("track does not cover [0, 1]".into()));
        }
        for seg in &self.segments {
            if !(seg.t1 > seg.t0) && !(self.segments.len() == 1 && seg.t0 == 0.0 && seg.t1 == 1.0) {
                return Err(Error::InvalidPath(format!("empty segment [{}, {}]", seg.t0, seg.t1)));
            }
        }
        for w in self.segments.windows(2) {
            if w[0].t1 != w[1].t0 {
                return Err(Error::InvalidPath(format!("gap between segments at t = {}", w[0].t1)));
            }
            let (a, b) = (w[0].eval(w[0].t1), w[1].eval(w[1].t0));
            let scale = 1.0 + a.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if (0..3).any(|k| (a[k] - b[k]).norm() > JOINT_TOL * scale) {
                return Err(Error::InvalidPath(format!("discontinuity at t = {}", w[0].t1)));
            }
        }
        Ok(())
    }

    fn rescaled(&self, offset: f64, length: f64) -> CoefficientTrack {
        CoefficientTrack {
            segments: self
                .segments
                .iter()
                .map(|s| Segment { t0: offset + length * s.t0, t1: offset + length * s.t1, ..s.clone() })
                .collect(),
        }
    }

    fn reversed(&self) -> CoefficientTrack {
        CoefficientTrack {
            segments: self
                .segments
                .iter()
                .rev()
                .map(|s| Segment { t0: 1.0 - s.t1, t1: 1.0 - s.t0, start: s.end, end: s.start, bulge: s.bulge })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    pub arrangement: Arrangement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationPath {
    pub tracks: Vec<CoefficientTrack>,
    pub samples: Vec<PathSample>,
    pub combinatorics: Combinatorics,
}

impl DeformationPath {
    /// Samples the tracks at `steps` equally spaced parameters including 0
    /// and 1. The stored combinatorics is that of the first sample.
    pub fn from_tracks(tracks: Vec<CoefficientTrack>, steps: usize) -> Result<DeformationPath> {
        if tracks.is_empty() {
            return Err(Error::InvalidPath("no tracks".into()));
        }
        if steps < 2 {
            return Err(Error::InvalidPath("at least two samples are needed".into()));
        }
        for track in &tracks {
            track.validate()?;
        }
        let mut samples = Vec::with_capacity(steps);
        for k in 0..steps {
            let t = if k + 1 == steps { 1.0 } else { k as f64 / (steps - 1) as f64 };
            let triples: Vec<Triple> = tracks.iter().map(|tr| tr.eval(t)).collect();
            let arrangement = Arrangement::from_coefficients(&triples)
                .map_err(|e| Error::InvalidPath(format!("sample at t = {t}: {e}")))?;
            samples.push(PathSample { t, arrangement });
        }
        let comb = combinatorics(&samples[0].arrangement);
        Ok(DeformationPath { tracks, samples, combinatorics: comb })
    }

    /// Largest change of a raw track coefficient between consecutive samples.
    pub fn max_coefficient_jump(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.samples.windows(2) {
            for tr in &self.tracks {
                let (a, b) = (tr.eval(w[0].t), tr.eval(w[1].t));
                for k in 0..3 {
                    worst = worst.max((a[k] - b[k]).norm());
                }
            }
        }
        worst
    }

    pub fn to_json(&self) -> String {
        let samples: Vec<String> = self
            .samples
            .iter()
            .map(|s| format!("{{\"t\": {:.17e}, \"lines\": {}}}", s.t, lines_json(&s.arrangement)))
            .collect();
        let comb = serde_json::to_string(&self.combinatorics).expect("combinatorics serializes");
        format!("{{\"combinatorics\": {comb}, \"samples\": [{}]}}", samples.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathFailure {
    pub t: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathCertificate {
    pub degree_constant: bool,
    pub all_generic: bool,
    pub combinatorics_constant: bool,
    pub morse_checked: bool,
    pub b_count_constant: Option<bool>,
    pub failures: Vec<PathFailure>,
}

impl PathCertificate {
    /// Degree, genericity and combinatorics all constant.
    pub fn certified(&self) -> bool {
        self.degree_constant && self.all_generic && self.combinatorics_constant
    }
}

/// Line `-sin(theta) x + cos(theta) y + c = 0`, whose direction vector has
/// angle `theta`.
fn line_at_angle(theta: f64, c: f64) -> Line {
    Line::real(-theta.sin(), theta.cos(), c).expect("unit normal")
}

/// Real arrangement with class `j` (in descending size order) at angle
/// `(j - 1) pi / (l + 1)` and offsets `1, ..., p_j`, jittered by less than
/// 0.01 until generic.
pub fn canonical_form(comb: &Combinatorics, seed: u64) -> Result<Arrangement> {
    let l = comb.classes();
    if l < 2 {
        return Err(Error::TooFewClasses { classes: l });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..CANONICAL_ATTEMPTS {
        let mut triples = Vec::with_capacity(comb.degree());
        for (j, &p) in comb.class_sizes().iter().enumerate() {
            let theta = j as f64 * std::f64::consts::PI / (l + 1) as f64;
            for k in 0..p {
                let jitter: f64 = rng.gen_range(-0.01..0.01);
                triples.push(line_at_angle(theta, (k + 1) as f64 + jitter).coefficients());
            }
        }
        let arr = Arrangement::from_coefficients(&triples)?;
        if is_generic(&arr, TOL_POINT).map(|r| r.is_generic).unwrap_or(false) {
            return Ok(arr);
        }
    }
    Err(Error::CanonicalJitter { attempts: CANONICAL_ATTEMPTS })
}

/// Parallel classes in descending size, ties by first line index.
fn ordered_classes(arr: &Arrangement) -> Vec<Vec<usize>> {
    let mut classes = parallel_classes(arr);
    classes.sort_by(|x, y| y.len().cmp(&x.len()).then(x[0].cmp(&y[0])));
    classes
}

fn cross(u: [ComplexScalar; 2], w: [ComplexScalar; 2]) -> ComplexScalar {
    u[0] * w[1] - u[1] * w[0]
}

fn pair_norm(u: [ComplexScalar; 2]) -> f64 {
    (u[0].norm_sqr() + u[1].norm_sqr()).sqrt()
}

fn lerp2(u: [ComplexScalar; 2], w: [ComplexScalar; 2], s: f64) -> [ComplexScalar; 2] {
    [u[0] * (1.0 - s) + w[0] * s, u[1] * (1.0 - s) + w[1] * s]
}

/// Root of `alpha + beta s` through the univariate solver, `None` if `beta`
/// vanishes.
fn linear_root(alpha: ComplexScalar, beta: ComplexScalar) -> Option<ComplexScalar> {
    if beta == c64(0.0, 0.0) {
        return None;
    }
    univariate_roots(&UniPoly::new(vec![alpha, beta]), &SolverConfig::default())
        .ok()
        .and_then(|r| r.first().copied())
}

/// Closest real parameter in `[lo, hi]` to the zero of `alpha + beta s`.
fn closest_parameter(alpha: ComplexScalar, beta: ComplexScalar, lo: f64, hi: f64) -> (f64, Option<ComplexScalar>) {
    match linear_root(alpha, beta) {
        Some(r) => (r.re.clamp(lo, hi), Some(r)),
        None => (lo, None),
    }
}

/// `w` times the unit scalar that makes its inner product with `u` real
/// and positive, so that `(1 - s) u + s w` follows the shorter great-circle
/// arc between the two directions.
fn aligned(u: [ComplexScalar; 2], w: [ComplexScalar; 2]) -> [ComplexScalar; 2] {
    let inner = w[0].conj() * u[0] + w[1].conj() * u[1];
    if inner.norm() == 0.0 {
        return w;
    }
    let phase = inner / inner.norm();
    [w[0] * phase, w[1] * phase]
}

/// Smallest relative separation between the direction moving from `u` to
/// `w` and the static direction `v`.
fn direction_separation(u: [ComplexScalar; 2], w: [ComplexScalar; 2], v: [ComplexScalar; 2]) -> f64 {
    let (alpha, beta) = (cross(u, v), cross(w, v) - cross(u, v));
    let (s, _) = closest_parameter(alpha, beta, 0.0, 1.0);
    let m = lerp2(u, w, s);
    (alpha + beta * s).norm() / (pair_norm(m) * pair_norm(v))
}

/// A rotation of one class from `from` to `to` while the other classes sit
/// at the given directions.
struct DirectionMove {
    class: usize,
    to: [ComplexScalar; 2],
}

/// Plans class rotations to the target directions. The direct plan moves
/// each class straight to its target; when that would make two classes
/// parallel somewhere, every class is first moved to a seeded non-real
/// parking direction.
fn plan_directions(
    start: &[[ComplexScalar; 2]],
    target: &[[ComplexScalar; 2]],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<DirectionMove>> {
    let l = start.len();
    let feasible = |stages: &[Vec<[ComplexScalar; 2]>]| -> Option<Vec<DirectionMove>> {
        let mut current = stages[0].clone();
        let mut moves = Vec::new();
        for next in &stages[1..] {
            for j in 0..l {
                if current[j] == next[j] {
                    continue;
                }
                let to = aligned(current[j], next[j]);
                for k in (0..l).filter(|&k| k != j) {
                    if direction_separation(current[j], to, current[k]) < DIRECTION_MARGIN {
                        return None;
                    }
                }
                moves.push(DirectionMove { class: j, to });
                current[j] = to;
            }
        }
        Some(moves)
    };
    if let Some(moves) = feasible(&[start.to_vec(), target.to_vec()]) {
        return Ok(moves);
    }
    for _ in 0..PARKING_ATTEMPTS {
        let parking: Vec<[ComplexScalar; 2]> = (0..l)
            .map(|_| {
                let z = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                [c64(1.0, 0.0), z]
            })
            .collect();
        if let Some(moves) = feasible(&[start.to_vec(), parking, target.to_vec()]) {
            return Ok(moves);
        }
    }
    Err(Error::PathNotGeneric { t: 0.0, reason: "no parking directions keep the classes apart".into() })
}

/// Piecewise-linear offset of one moving line during a rotation, as knots
/// `(s, c)`.
type Knots = Vec<(f64, ComplexScalar)>;

fn knot_value(knots: &Knots, s: f64) -> ComplexScalar {
    for w in knots.windows(2) {
        if s <= w[1].0 {
            let span = w[1].0 - w[0].0;
            let u = if span > 0.0 { (s - w[0].0) / span } else { 0.0 };
            return w[0].1 * (1.0 - u) + w[1].1 * u;
        }
    }
    knots.last().unwrap().1
}

/// Closest approach of the moving line to a static point over all knot
/// pieces: `(s, distance, E(s), dE/ds, root)` of the earliest close pass.
struct Approach {
    s: f64,
    distance: f64,
    value: ComplexScalar,
    slope: ComplexScalar,
}

fn approaches(u: [ComplexScalar; 2], w: [ComplexScalar; 2], knots: &Knots, p: &Point) -> Vec<Approach> {
    let mut out = Vec::new();
    for piece in knots.windows(2) {
        let (s0, s1) = (piece[0].0, piece[1].0);
        if s1 <= s0 {
            continue;
        }
        let dc = (piece[1].1 - piece[0].1) / (s1 - s0);
        let slope = (w[0] - u[0]) * p[0] + (w[1] - u[1]) * p[1] + dc;
        let at = |s: f64| {
            let v = lerp2(u, w, s);
            v[0] * p[0] + v[1] * p[1] + knot_value(knots, s)
        };
        let alpha = at(s0) - slope * s0;
        let (s, _) = closest_parameter(alpha, slope, s0, s1);
        let value = at(s);
        out.push(Approach { s, distance: value.norm() / pair_norm(lerp2(u, w, s)), value, slope });
    }
    out
}

/// Offset knots for one moving line so that it stays at least `margin`
/// away from every static double point, inserting kept detours of size
/// `2 margin` ramped over at most `width`.
fn detour_offsets(
    u: [ComplexScalar; 2],
    w: [ComplexScalar; 2],
    c: ComplexScalar,
    points: &[Point],
    width: f64,
    margin: f64,
) -> Result<Knots> {
    let mut knots: Knots = vec![(0.0, c), (1.0, c)];
    // (point, ramp start, ramp end): on its own ramp a point is passed at a
    // nonzero distance that may be below the margin
    let mut ramps: Vec<(usize, f64, f64)> = Vec::new();
    let limit = 4 * points.len() + 8;
    for _ in 0..limit {
        let mut close: Vec<(usize, Approach)> = points
            .iter()
            .enumerate()
            .flat_map(|(n, p)| approaches(u, w, &knots, p).into_iter().map(move |a| (n, a)))
            .filter(|(n, a)| {
                a.distance < margin
                    && !ramps.iter().any(|r| r.0 == *n && a.s >= r.1 - 1e-12 && a.s <= r.2 + 1e-12)
            })
            .collect();
        if close.is_empty() {
            return Ok(knots);
        }
        close.sort_by(|x, y| x.1.s.total_cmp(&y.1.s));
        let (point, event) = (close[0].0, &close[0].1);
        let gap = close[1..]
            .iter()
            .map(|(_, a)| (a.s - event.s).abs())
            .filter(|g| *g > 0.0)
            .fold(f64::INFINITY, f64::min);
        let eps = width.min(0.5 * gap).max(width * 1e-3);
        let s_start = (event.s - eps).clamp(0.0, 1.0 - eps);
        let s_end = s_start + eps;
        let dir = if event.value.norm() > 0.0 {
            event.value / event.value.norm()
        } else if event.slope.norm() > 0.0 {
            c64(0.0, -1.0) * event.slope / event.slope.norm()
        } else {
            c64(1.0, 0.0)
        };
        let size = 2.0 * margin * pair_norm(lerp2(u, w, event.s));
        let shift = dir * size;
        ramps.push((point, s_start, s_end));
        let (c_start, c_end) = (knot_value(&knots, s_start), knot_value(&knots, s_end));
        knots.retain(|k| k.0 <= s_start || k.0 >= s_end);
        knots.push((s_start, c_start));
        knots.push((s_end, c_end));
        knots.sort_by(|x, y| x.0.total_cmp(&y.0));
        knots.dedup_by(|x, y| x.0 == y.0);
        for k in knots.iter_mut() {
            if k.0 >= s_end {
                k.1 += shift;
            }
        }
    }
    Err(Error::PathNotGeneric { t: 0.0, reason: "offset detours did not clear the static double points".into() })
}

/// Distance-like measure of how close lines `i`, `j`, `k` come to a
/// common point while the offsets follow `(1 - s) c0 + s c1 + 4 s (1 - s) bulge`.
fn triple_separation(dirs: &[[ComplexScalar; 2]], c0: &[ComplexScalar], c1: &[ComplexScalar], bulge: &[ComplexScalar], ijk: [usize; 3]) -> f64 {
    let [i, j, k] = ijk;
    let minors = [cross(dirs[j], dirs[k]), -cross(dirs[i], dirs[k]), cross(dirs[i], dirs[j])];
    let norm = cross(dirs[j], dirs[k]).norm() * pair_norm(dirs[i]);
    // D(s) = sum minors[m] * c_m(s) as a quadratic in s
    let mut q = [c64(0.0, 0.0); 3];
    for (m, &line) in ijk.iter().enumerate() {
        let (a, b, g) = (c0[line], c1[line], bulge[line]);
        q[0] += minors[m] * a;
        q[1] += minors[m] * (b - a + 4.0 * g);
        q[2] += minors[m] * (-4.0 * g);
    }
    let d = |s: f64| (q[0] + q[1] * s + q[2] * s * s).norm() / norm;
    let mut candidates = vec![0.0, 1.0];
    let poly = UniPoly::new(q.to_vec());
    if poly.degree() > 0 {
        if let Ok(roots) = univariate_roots(&poly, &SolverConfig::default()) {
            candidates.extend(roots.iter().map(|r| r.re.clamp(0.0, 1.0)));
        }
    }
    candidates.extend((1..32).map(|n| n as f64 / 32.0));
    candidates.into_iter().map(d).fold(f64::INFINITY, f64::min)
}

/// A move of the whole configuration over a local parameter `s` in
/// `[0, 1]`: one segment list per line, in local time.
type Move = Vec<Vec<Segment>>;

struct Builder {
    state: Vec<Triple>,
    moves: Vec<Move>,
}

impl Builder {
    fn static_points(&self, moving: &[usize], classes: &[Vec<usize>]) -> Vec<Point> {
        let class_of = |i: usize| classes.iter().position(|c| c.contains(&i)).unwrap();
        let mut pts = Vec::new();
        let d = self.state.len();
        for i in 0..d {
            for j in (i + 1)..d {
                if moving.contains(&i) || moving.contains(&j) || class_of(i) == class_of(j) {
                    continue;
                }
                let li = Line { a: self.state[i][0], b: self.state[i][1], c: self.state[i][2] };
                let lj = Line { a: self.state[j][0], b: self.state[j][1], c: self.state[j][2] };
                if let Some(p) = meet(&li, &lj) {
                    pts.push(p);
                }
            }
        }
        pts
    }

    fn length_scale(&self, points: &[Point]) -> f64 {
        let pts = points.iter().map(|p| (p[0].norm_sqr() + p[1].norm_sqr()).sqrt()).fold(0.0, f64::max);
        let offs = self.state.iter().map(|t| t[2].norm()).fold(0.0, f64::max);
        1.0 + pts.max(offs)
    }
}

/// Tracks from `arr` to `canonical_form(combinatorics(arr), seed)` and,
/// for each line, the index of the canonical line it ends on.
fn tracks_to_canonical(arr: &Arrangement, steps: usize, seed: u64) -> Result<(Vec<CoefficientTrack>, Vec<usize>)> {
    let report = is_generic(arr, TOL_POINT)?;
    if !report.is_generic {
        return Err(Error::NotGeneric);
    }
    let comb = combinatorics(arr);
    let canonical = canonical_form(&comb, seed)?;
    let classes = ordered_classes(arr);
    let d = arr.degree();

    // canonical lines are laid out class by class in descending size
    let mut slot = vec![0; d];
    let mut next = 0;
    for class in &classes {
        for &i in class {
            slot[i] = next;
            next += 1;
        }
    }
    let canon: Vec<Triple> = canonical.lines().iter().map(Line::coefficients).collect();
    let target_dirs: Vec<[ComplexScalar; 2]> = classes.iter().map(|c| [canon[slot[c[0]]][0], canon[slot[c[0]]][1]]).collect();
    let start_dirs: Vec<[ComplexScalar; 2]> = classes.iter().map(|c| [arr.lines()[c[0]].a, arr.lines()[c[0]].b]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f0f_f5e7);
    let plan = plan_directions(&start_dirs, &target_dirs, &mut rng)?;
    let mut builder = Builder { state: arr.lines().iter().map(Line::coefficients).collect(), moves: Vec::new() };

    let unchanged = plan.is_empty() && builder.state.iter().zip(&slot).all(|(s, &k)| *s == canon[k]);
    let total_moves = plan.len() + if unchanged { 0 } else { 2 };
    // detour width in local units of one move
    let width = (total_moves.max(1) as f64 / (4.0 * steps as f64)).min(0.25);

    for mv in &plan {
        let moving = &classes[mv.class];
        let points = builder.static_points(moving, &classes);
        let margin = 0.5 * width * builder.length_scale(&points);
        let mut segments: Move = builder.state.iter().map(|s| vec![Segment::constant(0.0, 1.0, *s)]).collect();
        for &i in moving {
            let u = [builder.state[i][0], builder.state[i][1]];
            let knots = detour_offsets(u, mv.to, builder.state[i][2], &points, width, margin)?;
            segments[i] = knots
                .windows(2)
                .map(|k| {
                    let (a0, a1) = (lerp2(u, mv.to, k[0].0), lerp2(u, mv.to, k[1].0));
                    Segment {
                        t0: k[0].0,
                        t1: k[1].0,
                        start: [a0[0], a0[1], k[0].1],
                        end: [a1[0], a1[1], k[1].1],
                        bulge: c64(0.0, 0.0),
                    }
                })
                .collect();
            builder.state[i] = [mv.to[0], mv.to[1], knots.last().unwrap().1];
        }
        builder.moves.push(segments);
    }

    // the rotations end on unit multiples of the canonical directions;
    // scale each line back without moving it
    let factors: Vec<ComplexScalar> = (0..d)
        .map(|i| {
            let w = canon[slot[i]];
            if w[0].norm() >= w[1].norm() {
                builder.state[i][0] / w[0]
            } else {
                builder.state[i][1] / w[1]
            }
        })
        .collect();
    if factors.iter().any(|f| *f != c64(1.0, 0.0)) {
        let segments: Move = (0..d)
            .map(|i| {
                let fixed = [canon[slot[i]][0], canon[slot[i]][1], builder.state[i][2] / factors[i]];
                let at = |sigma: ComplexScalar| [fixed[0] * sigma, fixed[1] * sigma, fixed[2] * sigma];
                let one = c64(1.0, 0.0);
                let lambda = factors[i];
                // the scalar path must avoid 0; it passes through +-i when
                // the factor is close to -1
                let knots: Vec<(f64, ComplexScalar)> = if (lambda + one).norm() < 0.5 {
                    let via = if lambda.im >= 0.0 { c64(0.0, 1.0) } else { c64(0.0, -1.0) };
                    vec![(0.0, lambda), (0.5, via), (1.0, one)]
                } else {
                    vec![(0.0, lambda), (1.0, one)]
                };
                knots
                    .windows(2)
                    .map(|k| Segment { t0: k[0].0, t1: k[1].0, start: at(k[0].1), end: at(k[1].1), bulge: c64(0.0, 0.0) })
                    .collect()
            })
            .collect();
        builder.moves.push(segments);
        for i in 0..d {
            builder.state[i] = [canon[slot[i]][0], canon[slot[i]][1], builder.state[i][2] / factors[i]];
        }
    }

    if builder.state.iter().zip(&slot).any(|(s, &k)| *s != canon[k]) {
        let dirs: Vec<[ComplexScalar; 2]> = (0..d).map(|i| [canon[slot[i]][0], canon[slot[i]][1]]).collect();
        let c0: Vec<ComplexScalar> = builder.state.iter().map(|s| s[2]).collect();
        let c1: Vec<ComplexScalar> = (0..d).map(|i| canon[slot[i]][2]).collect();
        let class_of: Vec<usize> = (0..d).map(|i| classes.iter().position(|c| c.contains(&i)).unwrap()).collect();
        let mut triples = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                for k in (j + 1)..d {
                    if class_of[i] != class_of[j] && class_of[j] != class_of[k] && class_of[i] != class_of[k] {
                        triples.push([i, j, k]);
                    }
                }
            }
        }
        let scale = 1.0 + c0.iter().chain(&c1).map(|z| z.norm()).fold(0.0, f64::max);
        let margin = DIRECTION_MARGIN * scale;
        let mut best: Option<(f64, Vec<ComplexScalar>)> = None;
        for attempt in 0..BULGE_ATTEMPTS {
            let size = 0.5 * scale * attempt as f64 / BULGE_ATTEMPTS as f64;
            let bulge: Vec<ComplexScalar> =
                (0..d).map(|_| size * c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let sep = triples
                .iter()
                .map(|t| triple_separation(&dirs, &c0, &c1, &bulge, *t))
                .fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|b| sep > b.0) {
                best = Some((sep, bulge));
            }
            if sep >= margin {
                break;
            }
        }
        let (sep, bulge) = best.unwrap();
        if sep < 1e-7 * scale {
            return Err(Error::PathNotGeneric { t: 1.0, reason: "offset translation meets a triple point".into() });
        }
        let segments: Move = (0..d)
            .map(|i| {
                vec![Segment {
                    t0: 0.0,
                    t1: 1.0,
                    start: builder.state[i],
                    end: canon[slot[i]],
                    bulge: bulge[i],
                }]
            })
            .collect();
        builder.moves.push(segments);
        for i in 0..d {
            builder.state[i] = canon[slot[i]];
        }
    }

    let m = builder.moves.len();
    let tracks = (0..d)
        .map(|i| {
            if m == 0 {
                return CoefficientTrack { segments: vec![Segment::constant(0.0, 1.0, arr.lines()[i].coefficients())] };
            }
            let mut segments = Vec::new();
            for (n, mv) in builder.moves.iter().enumerate() {
                let (offset, length) = (n as f64 / m as f64, 1.0 / m as f64);
                let end = if n + 1 == m { 1.0 } else { (n + 1) as f64 / m as f64 };
                let count = mv[i].len();
                for (q, seg) in mv[i].iter().enumerate() {
                    let t0 = if q == 0 { offset } else { offset + length * seg.t0 };
                    let t1 = if q + 1 == count { end } else { offset + length * seg.t1 };
                    segments.push(Segment { t0, t1, ..seg.clone() });
                }
            }
            CoefficientTrack { segments }
        })
        .collect();
    Ok((tracks, slot))
}

fn check_samples(path: &DeformationPath) -> Result<()> {
    for s in &path.samples {
        let report = is_generic(&s.arrangement, TOL_POINT).map_err(|e| Error::PathNotGeneric { t: s.t, reason: e.to_string() })?;
        if !report.is_generic {
            return Err(Error::PathNotGeneric { t: s.t, reason: "triple point".into() });
        }
        if combinatorics(&s.arrangement) != path.combinatorics {
            return Err(Error::PathNotGeneric { t: s.t, reason: "combinatorics changed".into() });
        }
    }
    Ok(())
}

/// Deformation of a generic `arr` to its canonical form, sampled at `steps`
/// parameters. Every sample is checked to be generic with the same
/// combinatorics.
pub fn link_to_canonical(arr: &Arrangement, steps: usize, seed: u64) -> Result<DeformationPath> {
    let (tracks, _) = tracks_to_canonical(arr, steps, seed)?;
    let path = DeformationPath::from_tracks(tracks, steps)?;
    check_samples(&path)?;
    Ok(path)
}

/// Deformation from `arr0` to `arr1` through their common canonical form.
/// Lines keep the order of `arr0`; the last sample is `arr1` up to line
/// order.
pub fn link(arr0: &Arrangement, arr1: &Arrangement, steps: usize, seed: u64) -> Result<DeformationPath> {
    let (c0, c1) = (combinatorics(arr0), combinatorics(arr1));
    if c0 != c1 {
        return Err(Error::CombinatoricsMismatch { left: c0.class_sizes().to_vec(), right: c1.class_sizes().to_vec() });
    }
    let (first, slot0) = tracks_to_canonical(arr0, steps, seed)?;
    let (second, slot1) = tracks_to_canonical(arr1, steps, seed)?;
    let mut by_slot = vec![0; slot1.len()];
    for (i, &k) in slot1.iter().enumerate() {
        by_slot[k] = i;
    }
    let tracks = first
        .iter()
        .zip(&slot0)
        .map(|(tr, &k)| {
            let mut segments = tr.rescaled(0.0, 0.5).segments;
            let back = second[by_slot[k]].reversed().rescaled(0.5, 0.5);
            segments.extend(back.segments);
            let last = segments.len() - 1;
            segments[last].t1 = 1.0;
            CoefficientTrack { segments }
        })
        .collect();
    let path = DeformationPath::from_tracks(tracks, steps)?;
    check_samples(&path)?;
    Ok(path)
}

/// Checks every sample of `path`: degree, genericity, combinatorics, and
/// optionally the number of nonzero critical values.
pub fn certify_path(path: &DeformationPath, cfg: &SolverConfig, check_morse: bool) -> PathCertificate {
    let mut cert = PathCertificate {
        degree_constant: true,
        all_generic: true,
        combinatorics_constant: true,
        morse_checked: check_morse,
        b_count_constant: None,
        failures: Vec::new(),
    };
    let degree = path.tracks.len();
    let mut counts: Vec<Option<usize>> = Vec::new();
    for s in &path.samples {
        let arr = &s.arrangement;
        let mut fail = |reason: String| cert.failures.push(PathFailure { t: s.t, reason });
        if arr.degree() != degree {
            cert.degree_constant = false;
            fail(format!("degree {} instead of {degree}", arr.degree()));
        }
        match is_generic(arr, TOL_POINT) {
            Ok(r) if r.is_generic => {}
            Ok(r) => {
                cert.all_generic = false;
                if r.all_parallel {
                    fail("all lines parallel".into());
                } else {
                    fail(format!("{} triple point(s)", r.triple_points.len()));
                }
            }
            Err(e) => {
                cert.all_generic = false;
                fail(e.to_string());
            }
        }
        let comb = combinatorics(arr);
        if comb != path.combinatorics {
            cert.combinatorics_constant = false;
            fail(format!("combinatorics {:?}", comb.class_sizes()));
        }
        if check_morse {
            match morse_report(arr, cfg) {
                Ok(r) => counts.push(Some(r.critical_values_nonzero.len())),
                Err(e) => {
                    counts.push(None);
                    fail(format!("morse analysis failed: {e}"));
                }
            }
        }
    }
    if check_morse {
        let first = counts.first().copied().flatten();
        let constant = first.is_some() && counts.iter().all(|c| *c == first);
        if !constant {
            cert.failures.push(PathFailure { t: 1.0, reason: "number of nonzero critical values changes".into() });
        }
        cert.b_count_constant = Some(constant);
    }
    cert.failures.sort_by(|x, y| x.t.total_cmp(&y.t));
    cert
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comb(s: &[usize]) -> Combinatorics {
        Combinatorics::new(s.to_vec()).unwrap()
    }

    fn certified(path: &DeformationPath) -> bool {
        certify_path(path, &SolverConfig::default(), false).certified()
    }

    #[test]
    fn canonical_two_lines() {
        let arr = canonical_form(&comb(&[1, 1]), 3).unwrap();
        assert!(is_generic(&arr, TOL_POINT).unwrap().is_generic);
        let l = arr.lines();
        // horizontal, then at angle pi/3
        assert_eq!(l[0].a, c64(0.0, 0.0));
        let slope = -l[1].a.re / l[1].b.re;
        assert!((slope - (std::f64::consts::PI / 3.0).tan()).abs() < 1e-12);
        assert!((l[0].c.re - 1.0).abs() < 0.01);
    }

    #[test]
    fn canonical_classes_and_refusal() {
        let arr = canonical_form(&comb(&[3, 2, 1, 1]), 0).unwrap();
        assert_eq!(arr.degree(), 7);
        assert_eq!(combinatorics(&arr), comb(&[3, 2, 1, 1]));
        assert!(is_generic(&arr, TOL_POINT).unwrap().is_generic);
        assert_eq!(canonical_form(&comb(&[2]), 0), Err(Error::TooFewClasses { classes: 1 }));
        assert_eq!(canonical_form(&comb(&[2, 1]), 9).unwrap(), canonical_form(&comb(&[2, 1]), 9).unwrap());
    }

    #[test]
    fn canonical_is_a_fixed_point() {
        let arr = canonical_form(&comb(&[2, 1, 1]), 4).unwrap();
        let path = link_to_canonical(&arr, 20, 4).unwrap();
        assert!(path.samples.iter().all(|s| s.arrangement.same_lines(&arr, 0.0)));
        assert_eq!(path.max_coefficient_jump(), 0.0);
    }

    #[test]
    fn triangle_links_to_canonical() {
        let arr = Arrangement::from_real(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, -1.0]]).unwrap();
        let path = link_to_canonical(&arr, 100, 0).unwrap();
        assert_eq!(path.samples.len(), 100);
        assert_eq!(path.combinatorics, comb(&[1, 1, 1]));
        assert!(certified(&path));
        assert!(path.samples[0].arrangement.same_lines(&arr, 1e-12));
    }

    #[test]
    fn rotation_through_a_double_point_gets_a_detour() {
        // x + 0.5y - 0.625 turns to 0.5x + y - 0.625 and, unperturbed,
        // passes through (1, 0) = {x = 1} n {y = 0} at s = 3/4.
        let u = [c64(1.0, 0.0), c64(0.5, 0.0)];
        let w = [c64(0.5, 0.0), c64(1.0, 0.0)];
        let p: Point = [c64(1.0, 0.0), c64(0.0, 0.0)];
        let plain = approaches(u, w, &vec![(0.0, c64(-0.625, 0.0)), (1.0, c64(-0.625, 0.0))], &p);
        assert!(plain[0].distance < 1e-15);
        let knots = detour_offsets(u, w, c64(-0.625, 0.0), &[p], 0.01, 0.005).unwrap();
        assert!(knots.len() > 2);
        assert_eq!(knots.len(), 4, "{knots:?}");
        assert!((knots[2].0 - 0.75).abs() < 1e-12 && (knots[1].0 - 0.74).abs() < 1e-12, "{knots:?}");
        let after = approaches(u, w, &knots, &p);
        assert!(after[2].distance >= 0.005, "{knots:?}");
        assert!(after[0].distance > 0.004 && after[1].distance > 0.004, "{knots:?}");

        let static_lines = [[c64(1.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)], [c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)]];
        let mut tracks: Vec<CoefficientTrack> = static_lines
            .iter()
            .map(|t| CoefficientTrack { segments: vec![Segment::constant(0.0, 1.0, *t)] })
            .collect();
        tracks.push(CoefficientTrack {
            segments: knots
                .windows(2)
                .map(|k| {
                    let (a0, a1) = (lerp2(u, w, k[0].0), lerp2(u, w, k[1].0));
                    Segment { t0: k[0].0, t1: k[1].0, start: [a0[0], a0[1], k[0].1], end: [a1[0], a1[1], k[1].1], bulge: c64(0.0, 0.0) }
                })
                .collect(),
        });
        let path = DeformationPath::from_tracks(tracks, 401).unwrap();
        assert!(certified(&path));
    }

    #[test]
    fn straight_rotation_through_origin_is_caught() {
        // x + y - 1 turned about (1/2, 1/2) with no detour; its normal
        // reaches angle 3pi/4 at t = 1/2, where it passes through the
        // origin = {x = 0} n {y = 0}
        let n = 64;
        let phi = |t: f64| 3.0 * std::f64::consts::FRAC_PI_4 + 1.2 * (t - 0.5);
        let at = |k: usize| {
            let (a, b) = (phi(k as f64 / n as f64).cos(), phi(k as f64 / n as f64).sin());
            [c64(a, 0.0), c64(b, 0.0), c64(-0.5 * (a + b), 0.0)]
        };
        let moving = CoefficientTrack {
            segments: (0..n)
                .map(|k| Segment {
                    t0: k as f64 / n as f64,
                    t1: (k + 1) as f64 / n as f64,
                    start: at(k),
                    end: at(k + 1),
                    bulge: c64(0.0, 0.0),
                })
                .collect(),
        };
        let fixed = |t: Triple| CoefficientTrack { segments: vec![Segment::constant(0.0, 1.0, t)] };
        let (one, zero) = (c64(1.0, 0.0), c64(0.0, 0.0));
        let path = DeformationPath::from_tracks(vec![fixed([one, zero, zero]), fixed([zero, one, zero]), moving], 65).unwrap();
        let cert = certify_path(&path, &SolverConfig::default(), false);
        assert!(!cert.all_generic);
        assert!(cert.degree_constant && cert.combinatorics_constant);
        assert_eq!(cert.failures.len(), 1, "{:?}", cert.failures);
        assert_eq!(cert.failures[0].t, 0.5);
    }

    #[test]
    fn mismatched_combinatorics_are_refused() {
        let a = Arrangement::from_real(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, -1.0]]).unwrap();
        let b = Arrangement::from_real(&[[1.0, 0.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(link(&a, &b, 10, 0), Err(Error::CombinatoricsMismatch { .. })));
    }

    #[test]
    fn link_to_itself() {
        let a = Arrangement::from_real(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, -1.0]]).unwrap();
        let path = link(&a, &a, 50, 2).unwrap();
        assert!(certified(&path));
        assert!(path.samples[0].arrangement.same_lines(&a, 1e-12));
        assert!(path.samples[49].arrangement.same_lines(&a, 1e-12));
    }

    #[test]
    fn json_shape() {
        let a = canonical_form(&comb(&[1, 1]), 0).unwrap();
        let path = link_to_canonical(&a, 3, 0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&path.to_json()).unwrap();
        assert_eq!(v["combinatorics"], serde_json::json!([1, 1]));
        assert_eq!(v["samples"].as_array().unwrap().len(), 3);
        assert_eq!(v["samples"][2]["t"], serde_json::json!(1.0));
        assert_eq!(v["samples"][0]["lines"].as_array().unwrap().len(), 2);
    }
}
