//! Ribbon-surface model of the nearby fiber `f = delta` inside a ball.
//!
//! Each line meeting the ball contributes a disk and each double point in
//! the ball joins the disks of its two lines by two bands. The model depends
//! on the arrangement and the ball only: the radius is fixed first and
//! `delta` is taken small afterwards, so no `delta` appears anywhere.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{
    c64, combinatorics, intersections, is_generic, point_dist, Arrangement, ComplexScalar, IntersectionPoint, Line,
    Point, TOL_POINT,
};
use crate::error::{Error, Result};
use crate::invariants::euler_generic_fiber;

/// Relative width of the forbidden band around the sphere.
pub const FORBIDDEN_BAND: f64 = 1e-6;
const FIRST_PERTURBATION: f64 = 1e-3;
const MAX_HALVINGS: usize = 10;
const ORDER_ATTEMPTS: usize = 64;
const ORDER_SEED: u64 = 0x0b5e_55ed_d15c;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Point,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: Point, radius: f64) -> Result<BallSpec> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidBall(format!("radius must be positive, got {radius}")));
        }
        if !center.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidBall("center is not finite".into()));
        }
        Ok(BallSpec { center, radius })
    }

    /// Ball of the given radius around the origin.
    pub fn centered(radius: f64) -> Result<BallSpec> {
        BallSpec::new([c64(0.0, 0.0); 2], radius)
    }

    pub fn band(&self) -> f64 {
        FORBIDDEN_BAND * self.radius
    }

    /// Whether something at `distance` from the center is inside, with an
    /// error when it sits in the forbidden band.
    fn inside(&self, what: impl Into<String>, distance: f64) -> Result<bool> {
        if (distance - self.radius).abs() <= self.band() {
            return Err(Error::ForbiddenBand { what: what.into(), distance, radius: self.radius });
        }
        Ok(distance < self.radius)
    }
}

/// Intersection points strictly inside the ball.
pub fn in_ball_intersections(arr: &Arrangement, ball: &BallSpec) -> Result<Vec<IntersectionPoint>> {
    let mut out = Vec::new();
    for p in intersections(arr, TOL_POINT)? {
        let what = format!("intersection of lines {:?}", p.incident);
        if ball.inside(what, point_dist(&p.location, &ball.center))? {
            out.push(p);
        }
    }
    Ok(out)
}

/// Indices of the lines meeting the ball.
pub fn lines_meeting_ball(arr: &Arrangement, ball: &BallSpec) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, l) in arr.lines().iter().enumerate() {
        if ball.inside(format!("line {i}"), l.distance_to(&ball.center))? {
            out.push(i);
        }
    }
    Ok(out)
}

fn in_ball_pairs(points: &[IntersectionPoint]) -> BTreeSet<(usize, usize)> {
    let mut pairs = BTreeSet::new();
    for p in points {
        for &i in &p.incident {
            for &j in p.incident.range(i + 1..) {
                pairs.insert((i, j));
            }
        }
    }
    pairs
}

/// Result of [`perturb_to_double_points`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub arrangement: Arrangement,
    /// Largest constant-term shift applied, 0 when nothing was split.
    pub magnitude: f64,
}

/// Shifts the constant terms so that only double points remain, keeping the
/// set of line pairs meeting in the ball stable under halving the shift.
pub fn perturb_to_double_points(arr: &Arrangement, ball: &BallSpec, seed: u64) -> Result<Perturbation> {
    let points = in_ball_intersections(arr, ball)?;
    lines_meeting_ball(arr, ball)?;
    if points.iter().all(|p| p.multiplicity() == 2) && is_generic(arr, TOL_POINT)?.triple_points.is_empty() {
        return Ok(Perturbation { arrangement: arr.clone(), magnitude: 0.0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter: Vec<ComplexScalar> = arr
        .lines()
        .iter()
        .map(|_| {
            let (r, phi): (f64, f64) = (rng.gen_range(0.5..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
            c64(r * phi.cos(), r * phi.sin())
        })
        .collect();
    let candidate = |s: f64| -> Option<(Arrangement, BTreeSet<(usize, usize)>)> {
        let triples: Vec<[ComplexScalar; 3]> = arr
            .lines()
            .iter()
            .zip(&jitter)
            .map(|(l, j)| [l.a, l.b, l.c + s * j])
            .collect();
        let moved = Arrangement::with_scale(&triples, arr.scale()).ok()?;
        if !is_generic(&moved, TOL_POINT).ok()?.triple_points.is_empty() {
            return None;
        }
        lines_meeting_ball(&moved, ball).ok()?;
        let pairs = in_ball_pairs(&in_ball_intersections(&moved, ball).ok()?);
        Some((moved, pairs))
    };
    let mut s = FIRST_PERTURBATION * ball.radius;
    let mut current = candidate(s);
    for _ in 0..MAX_HALVINGS {
        let next = candidate(0.5 * s);
        if let (Some((moved, pairs)), Some((_, half))) = (&current, &next) {
            if pairs == half {
                return Ok(Perturbation { arrangement: moved.clone(), magnitude: s });
            }
        }
        current = next;
        s *= 0.5;
    }
    Err(Error::Unstable { halvings: MAX_HALVINGS })
}

/// How the two bands of a double point are attached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwistConvention {
    /// The band in the first slot of one disk lands in the first slot of the
    /// other, so each single-point sub-surface is an annulus.
    Crossed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Band {
    /// Line indices of the two disks, smaller first.
    pub disks: (usize, usize),
    /// Index into [`RibbonSurface::points`].
    pub point: usize,
    /// 0 or 1; the two bands of a point.
    pub sheet: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RibbonSurface {
    /// Line indices of the lines meeting the ball.
    pub disks: Vec<usize>,
    pub bands: Vec<Band>,
    /// In-ball double points of the perturbed arrangement.
    pub points: Vec<Point>,
    /// Per disk, band indices in cyclic order around its boundary.
    pub attachments: Vec<Vec<usize>>,
    pub twist: TwistConvention,
}

/// Parameter of `p` along `l`, measured from the foot of `center`.
fn line_parameter(l: &Line, center: &Point, p: &Point) -> ComplexScalar {
    let norm = (l.a.norm_sqr() + l.b.norm_sqr()).sqrt();
    // unit tangent (-b, a) / norm; hermitian product with p - center
    let (tx, ty) = (-l.b / norm, l.a / norm);
    tx.conj() * (p[0] - center[0]) + ty.conj() * (p[1] - center[1])
}

/// Unit complex numbers tried in turn for ordering points along the lines.
/// All have positive real part, so real lines keep their real order. The
/// sequence is fixed and does not depend on any seed.
fn order_directions() -> impl Iterator<Item = ComplexScalar> {
    let mut rng = ChaCha8Rng::seed_from_u64(ORDER_SEED);
    (0..ORDER_ATTEMPTS).map(move |_| {
        let phi: f64 = rng.gen_range(-1.0..1.0);
        c64(phi.cos(), phi.sin())
    })
}

/// Ribbon model of the nearby fiber in `ball`.
pub fn ribbon_model(arr: &Arrangement, ball: &BallSpec, seed: u64) -> Result<RibbonSurface> {
    let perturbed = perturb_to_double_points(arr, ball, seed)?.arrangement;
    ribbon_of_double_points(&perturbed, ball)
}

fn ribbon_of_double_points(arr: &Arrangement, ball: &BallSpec) -> Result<RibbonSurface> {
    let disks = lines_meeting_ball(arr, ball)?;
    let mut found = in_ball_intersections(arr, ball)?;
    found.sort_by_key(|p| p.incident.iter().copied().collect::<Vec<_>>());
    let mut bands = Vec::new();
    for (k, p) in found.iter().enumerate() {
        let v: Vec<usize> = p.incident.iter().copied().collect();
        debug_assert_eq!(v.len(), 2);
        for sheet in 0..2 {
            bands.push(Band { disks: (v[0], v[1]), point: k, sheet });
        }
    }
    let points: Vec<Point> = found.iter().map(|p| p.location).collect();

    let params: Vec<Vec<(usize, ComplexScalar)>> = disks
        .iter()
        .map(|&i| {
            let l = &arr.lines()[i];
            found
                .iter()
                .enumerate()
                .filter(|(_, p)| p.incident.contains(&i))
                .map(|(k, p)| (k, line_parameter(l, &ball.center, &p.location)))
                .collect()
        })
        .collect();
    let gap = FORBIDDEN_BAND * ball.radius;
    let lambda = order_directions()
        .find(|lam| {
            params.iter().all(|ps| {
                let mut keys: Vec<f64> = ps.iter().map(|(_, t)| (lam * t).re).collect();
                keys.sort_by(f64::total_cmp);
                keys.windows(2).all(|w| w[1] - w[0] > gap)
            })
        })
        .ok_or_else(|| Error::InvalidBall("could not order the intersection points along the lines".into()))?;

    let attachments = params
        .iter()
        .map(|ps| {
            let mut ps = ps.clone();
            ps.sort_by(|x, y| (lambda * x.1).re.total_cmp(&(lambda * y.1).re));
            ps.iter().flat_map(|(k, _)| [2 * k, 2 * k + 1]).collect()
        })
        .collect();
    Ok(RibbonSurface { disks, bands, points, attachments, twist: TwistConvention::Crossed })
}

impl RibbonSurface {
    /// The two disks and two bands of point `k`.
    pub fn sub_surface(&self, k: usize) -> RibbonSurface {
        let band = &self.bands[2 * k];
        let disks = vec![band.disks.0, band.disks.1];
        let bands = vec![
            Band { disks: band.disks, point: 0, sheet: 0 },
            Band { disks: band.disks, point: 0, sheet: 1 },
        ];
        let attachments = disks
            .iter()
            .map(|&i| {
                let order = &self.attachments[self.disks.iter().position(|&d| d == i).unwrap()];
                order.iter().filter(|&&b| b / 2 == k).map(|&b| b % 2).collect()
            })
            .collect();
        RibbonSurface { disks, bands, points: vec![self.points[k]], attachments, twist: self.twist }
    }

    /// Checks the structural invariants: two bands per point, every band end
    /// attached exactly once.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidBall(format!("malformed ribbon surface: {m}")));
        if self.bands.len() != 2 * self.points.len() || self.attachments.len() != self.disks.len() {
            return bad("band or attachment count");
        }
        for (n, b) in self.bands.iter().enumerate() {
            if b.point != n / 2 || b.sheet as usize != n % 2 || b.disks.0 >= b.disks.1 {
                return bad("band order");
            }
            for end in [b.disks.0, b.disks.1] {
                let Some(pos) = self.disks.iter().position(|&d| d == end) else {
                    return bad("band on a missing disk");
                };
                if self.attachments[pos].iter().filter(|&&x| x == n).count() != 1 {
                    return bad("band end attached more than once or not at all");
                }
            }
        }
        let ends: usize = self.attachments.iter().map(Vec::len).sum();
        if ends != 2 * self.bands.len() {
            return bad("stray attachment");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceInvariants {
    pub euler: i64,
    pub boundary_components: usize,
    pub genus: usize,
    pub connected_components: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }
}

/// Euler characteristic, boundary count, genus and components of the
/// surface. Boundary circles are traced as the orbits of
/// `sigma . alpha` on band ends, where `alpha` swaps the two ends of a band
/// and `sigma` steps to the next end around a disk.
pub fn surface_invariants(surface: &RibbonSurface) -> SurfaceInvariants {
    let nd = surface.disks.len();
    let disk_pos = |line: usize| surface.disks.iter().position(|&d| d == line).unwrap();
    // darts: (band, which end) -> 2 * band + end
    let darts = 2 * surface.bands.len();
    let mut home = vec![(0, 0); darts];
    for (pos, order) in surface.attachments.iter().enumerate() {
        for (slot, &b) in order.iter().enumerate() {
            let band = &surface.bands[b];
            let end = if surface.disks[pos] == band.disks.0 { 0 } else { 1 };
            home[2 * b + end] = (pos, slot);
        }
    }
    let sigma = |dart: usize| {
        let (pos, slot) = home[dart];
        let order = &surface.attachments[pos];
        let b = order[(slot + 1) % order.len()];
        let end = if surface.disks[pos] == surface.bands[b].disks.0 { 0 } else { 1 };
        2 * b + end
    };
    let alpha = |dart: usize| dart ^ 1;

    let mut uf = UnionFind((0..nd).collect());
    for b in &surface.bands {
        let (x, y) = (uf.find(disk_pos(b.disks.0)), uf.find(disk_pos(b.disks.1)));
        if x != y {
            uf.0[x.max(y)] = x.min(y);
        }
    }
    let roots: Vec<usize> = (0..nd).map(|i| uf.find(i)).collect();
    let components: BTreeSet<usize> = roots.iter().copied().collect();

    let mut chi = vec![0i64; nd];
    let mut boundary = vec![0usize; nd];
    for (pos, order) in surface.attachments.iter().enumerate() {
        chi[roots[pos]] += 1;
        if order.is_empty() {
            boundary[roots[pos]] += 1;
        }
    }
    for b in &surface.bands {
        chi[roots[disk_pos(b.disks.0)]] -= 1;
    }
    let mut seen = vec![false; darts];
    for start in 0..darts {
        if seen[start] {
            continue;
        }
        boundary[roots[home[start].0]] += 1;
        let mut dart = start;
        while !seen[dart] {
            seen[dart] = true;
            dart = sigma(alpha(dart));
        }
    }
    let genus: i64 = components.iter().map(|&c| (2 - chi[c] - boundary[c] as i64) / 2).sum();
    SurfaceInvariants {
        euler: nd as i64 - surface.bands.len() as i64,
        boundary_components: boundary.iter().sum(),
        genus: genus as usize,
        connected_components: components.len(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaCheck {
    pub expected_euler: i64,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    pub ball: BallSpec,
    pub perturbation: f64,
    pub surface: RibbonSurface,
    pub invariants: SurfaceInvariants,
    /// Present when the arrangement is generic and the ball contains all of
    /// its intersection points.
    pub formula_check: Option<FormulaCheck>,
}

pub fn nearby_fiber_report(arr: &Arrangement, ball: &BallSpec, seed: u64) -> Result<FiberReport> {
    let perturbation = perturb_to_double_points(arr, ball, seed)?;
    let surface = ribbon_of_double_points(&perturbation.arrangement, ball)?;
    let invariants = surface_invariants(&surface);
    let all_inside = in_ball_intersections(arr, ball)?.len() == intersections(arr, TOL_POINT)?.len();
    let formula_check = if all_inside && is_generic(arr, TOL_POINT)?.is_generic {
        let expected_euler = euler_generic_fiber(&combinatorics(arr));
        Some(FormulaCheck { expected_euler, agrees: expected_euler == invariants.euler })
    } else {
        None
    };
    Ok(FiberReport { ball: *ball, perturbation: perturbation.magnitude, surface, invariants, formula_check })
}
