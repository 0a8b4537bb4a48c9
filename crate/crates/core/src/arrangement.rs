//! Affine line arrangements in complex 2-space.
//!
//! Every line `a x + b y + c = 0` is stored normalized: the coefficient of
//! largest modulus among `a`, `b` is scaled to one (ties go to `a`). The scale
//! factors removed by normalization are multiplied into [`Arrangement::scale`],
//! so the defining polynomial `scale * prod(l_i)` is exactly the product of the
//! lines as given.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

/// A point of complex 2-space.
pub type Point = [ComplexScalar; 2];

/// Tolerance for equality of directions (cross product of normalized pairs).
pub const TOL_DIR: f64 = 1e-9;
/// Default clustering tolerance for intersection points.
pub const TOL_POINT: f64 = 1e-9;

pub(crate) fn c64(re: f64, im: f64) -> ComplexScalar {
    Complex64::new(re, im)
}

pub(crate) fn is_finite(z: ComplexScalar) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Hermitian norm of a point.
pub fn point_norm(p: &Point) -> f64 {
    (p[0].norm_sqr() + p[1].norm_sqr()).sqrt()
}

pub fn point_dist(p: &Point, q: &Point) -> f64 {
    ((p[0] - q[0]).norm_sqr() + (p[1] - q[1]).norm_sqr()).sqrt()
}

/// Normalizes a pair so that the entry of largest modulus is one.
/// Returns the normalized pair and the factor that was divided out.
fn normalize_pair(a: ComplexScalar, b: ComplexScalar) -> Option<([ComplexScalar; 2], ComplexScalar)> {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 && nb == 0.0 {
        return None;
    }
    let s = if na >= nb { a } else { b };
    Some(([a / s, b / s], s))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub a: ComplexScalar,
    pub b: ComplexScalar,
    pub c: ComplexScalar,
}

impl Line {
    /// Normalizes `a x + b y + c`. Returns the line and the removed factor,
    /// or `None` when `a = b = 0`.
    pub fn normalized(a: ComplexScalar, b: ComplexScalar, c: ComplexScalar) -> Option<(Line, ComplexScalar)> {
        let ([a, b], s) = normalize_pair(a, b)?;
        Some((Line { a, b, c: c / s }, s))
    }

    /// Real line `a x + b y + c = 0`.
    pub fn real(a: f64, b: f64, c: f64) -> Option<Line> {
        Line::normalized(c64(a, 0.0), c64(b, 0.0), c64(c, 0.0)).map(|(l, _)| l)
    }

    pub fn eval(&self, p: &Point) -> ComplexScalar {
        self.a * p[0] + self.b * p[1] + self.c
    }

    pub fn direction(&self) -> Direction {
        Direction::new(self.a, self.b).expect("stored lines are never degenerate")
    }

    pub fn coefficients(&self) -> [ComplexScalar; 3] {
        [self.a, self.b, self.c]
    }

    /// Euclidean distance from `p` to the line in complex 2-space.
    pub fn distance_to(&self, p: &Point) -> f64 {
        self.eval(p).norm() / (self.a.norm_sqr() + self.b.norm_sqr()).sqrt()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.a.im.abs() <= tol && self.b.im.abs() <= tol && self.c.im.abs() <= tol
    }
}

/// A point `(a : b)` of the projective line, normalized like line coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub a: ComplexScalar,
    pub b: ComplexScalar,
}

impl Direction {
    pub fn new(a: ComplexScalar, b: ComplexScalar) -> Option<Direction> {
        normalize_pair(a, b).map(|([a, b], _)| Direction { a, b })
    }

    /// Projective equality: the cross product of the normalized
    /// representatives vanishes within `tol`.
    pub fn same_as(&self, other: &Direction, tol: f64) -> bool {
        (self.a * other.b - self.b * other.a).norm() < tol
    }
}

/// Multiset of parallel-class sizes, sorted descending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Combinatorics(Vec<usize>);

impl Combinatorics {
    /// Builds from class sizes in any order. Zero sizes are rejected.
    pub fn new(mut sizes: Vec<usize>) -> Option<Combinatorics> {
        if sizes.is_empty() || sizes.contains(&0) {
            return None;
        }
        sizes.sort_unstable_by(|x, y| y.cmp(x));
        Some(Combinatorics(sizes))
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.0
    }

    /// Number of lines.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    /// Number of parallel classes.
    pub fn classes(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionPoint {
    pub location: Point,
    pub incident: BTreeSet<usize>,
}

impl IntersectionPoint {
    pub fn multiplicity(&self) -> usize {
        self.incident.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub is_generic: bool,
    pub triple_points: Vec<IntersectionPoint>,
    pub all_parallel: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arrangement {
    lines: Vec<Line>,
    scale: ComplexScalar,
}

impl Arrangement {
    /// Builds an arrangement from raw coefficient triples.
    pub fn from_coefficients(triples: &[[ComplexScalar; 3]]) -> Result<Arrangement> {
        Self::with_scale(triples, c64(1.0, 0.0))
    }

    /// Like [`Arrangement::from_coefficients`] with an extra constant factor
    /// in front of the defining polynomial.
    pub fn with_scale(triples: &[[ComplexScalar; 3]], scale: ComplexScalar) -> Result<Arrangement> {
        if triples.is_empty() {
            return Err(Error::Empty);
        }
        if !is_finite(scale) || scale == c64(0.0, 0.0) {
            return Err(Error::Malformed("scale must be finite and nonzero".into()));
        }
        let mut lines = Vec::with_capacity(triples.len());
        let mut total = scale;
        for (index, t) in triples.iter().enumerate() {
            if !t.iter().all(|z| is_finite(*z)) {
                return Err(Error::NonFinite { index });
            }
            let (line, s) = Line::normalized(t[0], t[1], t[2]).ok_or(Error::DegenerateLine { index })?;
            total *= s;
            lines.push(line);
        }
        check_duplicates(&lines)?;
        Ok(Arrangement { lines, scale: total })
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(triples: &[[f64; 3]]) -> Result<Arrangement> {
        let t: Vec<[ComplexScalar; 3]> = triples
            .iter()
            .map(|t| [c64(t[0], 0.0), c64(t[1], 0.0), c64(t[2], 0.0)])
            .collect();
        Self::from_coefficients(&t)
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn degree(&self) -> usize {
        self.lines.len()
    }

    pub fn scale(&self) -> ComplexScalar {
        self.scale
    }

    /// Same lines, defining polynomial multiplied by `factor`.
    pub fn scaled(&self, factor: ComplexScalar) -> Arrangement {
        Arrangement { lines: self.lines.clone(), scale: self.scale * factor }
    }

    /// Same lines with unit scale.
    pub fn unscaled(&self) -> Arrangement {
        Arrangement { lines: self.lines.clone(), scale: c64(1.0, 0.0) }
    }

    /// True when both arrangements have the same normalized lines in the
    /// same order, coefficient-wise within `tol`.
    pub fn same_lines(&self, other: &Arrangement, tol: f64) -> bool {
        self.degree() == other.degree()
            && self.lines.iter().zip(&other.lines).all(|(l, m)| {
                (l.a - m.a).norm() <= tol
                    && (l.b - m.b).norm() <= tol
                    && (l.c - m.c).norm() <= tol * (1.0 + l.c.norm())
            })
    }

    /// Substitutes `p = M q + shift` into every line, giving the arrangement
    /// in the `q` coordinates. Lines are renormalized; the scale absorbs the
    /// factors so the defining polynomial is the composed polynomial.
    pub fn pullback(&self, m: [[ComplexScalar; 2]; 2], shift: Point) -> Result<Arrangement> {
        let triples: Vec<[ComplexScalar; 3]> = self
            .lines
            .iter()
            .map(|l| {
                [
                    l.a * m[0][0] + l.b * m[1][0],
                    l.a * m[0][1] + l.b * m[1][1],
                    l.eval(&shift),
                ]
            })
            .collect();
        Self::with_scale(&triples, self.scale)
    }
}

fn check_duplicates(lines: &[Line]) -> Result<()> {
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            let (l, m) = (&lines[i], &lines[j]);
            if l.direction().same_as(&m.direction(), TOL_DIR)
                && (l.c - m.c).norm() < TOL_POINT * (1.0 + l.c.norm().max(m.c.norm()))
            {
                return Err(Error::DuplicateLine { first: i, second: j });
            }
        }
    }
    Ok(())
}

/// Direction of every line, in line order.
pub fn directions(arr: &Arrangement) -> Vec<Direction> {
    arr.lines.iter().map(Line::direction).collect()
}

/// Groups line indices into parallel classes. Classes are listed in order
/// of their first line.
pub fn parallel_classes(arr: &Arrangement) -> Vec<Vec<usize>> {
    let dirs = directions(arr);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, d) in dirs.iter().enumerate() {
        match classes.iter_mut().find(|cl| dirs[cl[0]].same_as(d, TOL_DIR)) {
            Some(cl) => cl.push(i),
            None => classes.push(vec![i]),
        }
    }
    classes
}

pub fn combinatorics(arr: &Arrangement) -> Combinatorics {
    Combinatorics::new(parallel_classes(arr).iter().map(Vec::len).collect()).expect("arrangements are nonempty")
}

/// Intersection of two lines, `None` when parallel.
pub fn meet(l: &Line, m: &Line) -> Option<Point> {
    if l.direction().same_as(&m.direction(), TOL_DIR) {
        return None;
    }
    let det = l.a * m.b - m.a * l.b;
    Some([(l.b * m.c - m.b * l.c) / det, (l.c * m.a - m.c * l.a) / det])
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, i: usize, j: usize) {
        let (ri, rj) = (self.find(i), self.find(j));
        if ri != rj {
            self.0[ri.max(rj)] = ri.min(rj);
        }
    }
}

/// Pairwise intersections of non-parallel lines, clustered within `tol`.
///
/// Points closer than `tol` are merged (transitively). Two points in
/// different clusters that are closer than `2 * tol` make the verdict
/// tolerance-dependent, which is reported as [`Error::ClusterAmbiguity`].
pub fn intersections(arr: &Arrangement, tol: f64) -> Result<Vec<IntersectionPoint>> {
    let lines = &arr.lines;
    let mut raw: Vec<(Point, usize, usize)> = Vec::new();
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            if let Some(p) = meet(&lines[i], &lines[j]) {
                raw.push((p, i, j));
            }
        }
    }
    let n = raw.len();
    let mut uf = UnionFind::new(n);
    for u in 0..n {
        for v in (u + 1)..n {
            if point_dist(&raw[u].0, &raw[v].0) < tol {
                uf.union(u, v);
            }
        }
    }
    for u in 0..n {
        for v in (u + 1)..n {
            let dist = point_dist(&raw[u].0, &raw[v].0);
            if dist < 2.0 * tol && uf.find(u) != uf.find(v) {
                return Err(Error::ClusterAmbiguity { distance: dist, tol });
            }
        }
    }
    let mut out: Vec<(usize, IntersectionPoint, usize)> = Vec::new();
    for (u, (p, i, j)) in raw.iter().enumerate() {
        let root = uf.find(u);
        match out.iter_mut().find(|(r, _, _)| *r == root) {
            Some((_, pt, count)) => {
                pt.location[0] += p[0];
                pt.location[1] += p[1];
                pt.incident.insert(*i);
                pt.incident.insert(*j);
                *count += 1;
            }
            None => out.push((root, IntersectionPoint { location: *p, incident: BTreeSet::from([*i, *j]) }, 1)),
        }
    }
    Ok(out
        .into_iter()
        .map(|(_, mut pt, count)| {
            let k = count as f64;
            pt.location = [pt.location[0] / k, pt.location[1] / k];
            pt
        })
        .collect())
}

pub fn is_generic(arr: &Arrangement, tol: f64) -> Result<GenericityReport> {
    let points = intersections(arr, tol)?;
    let all_parallel = parallel_classes(arr).len() < 2;
    let triple_points: Vec<IntersectionPoint> = points.into_iter().filter(|p| p.multiplicity() >= 3).collect();
    Ok(GenericityReport { is_generic: triple_points.is_empty() && !all_parallel, triple_points, all_parallel })
}

/// Value and gradient of the defining polynomial at `p`, by the product rule.
pub fn evaluate(arr: &Arrangement, p: &Point) -> (ComplexScalar, [ComplexScalar; 2]) {
    let vals: Vec<ComplexScalar> = arr.lines.iter().map(|l| l.eval(p)).collect();
    let d = vals.len();
    // suffix[i] = prod of vals[i..]
    let mut suffix = vec![c64(1.0, 0.0); d + 1];
    for i in (0..d).rev() {
        suffix[i] = suffix[i + 1] * vals[i];
    }
    let mut prefix = c64(1.0, 0.0);
    let mut grad = [c64(0.0, 0.0); 2];
    for (i, l) in arr.lines.iter().enumerate() {
        let others = prefix * suffix[i + 1];
        grad[0] += l.a * others;
        grad[1] += l.b * others;
        prefix *= vals[i];
    }
    let s = arr.scale;
    (s * suffix[0], [s * grad[0], s * grad[1]])
}

/// Second derivatives `[f_xx, f_xy, f_yy]` at `p`.
pub fn hessian(arr: &Arrangement, p: &Point) -> [ComplexScalar; 3] {
    let vals: Vec<ComplexScalar> = arr.lines.iter().map(|l| l.eval(p)).collect();
    let d = vals.len();
    let mut h = [c64(0.0, 0.0); 3];
    for i in 0..d {
        for j in (i + 1)..d {
            let mut rest = c64(1.0, 0.0);
            for (k, v) in vals.iter().enumerate() {
                if k != i && k != j {
                    rest *= v;
                }
            }
            let (li, lj) = (&arr.lines[i], &arr.lines[j]);
            h[0] += 2.0 * li.a * lj.a * rest;
            h[1] += (li.a * lj.b + li.b * lj.a) * rest;
            h[2] += 2.0 * li.b * lj.b * rest;
        }
    }
    h.map(|z| arr.scale * z)
}
