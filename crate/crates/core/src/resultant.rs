//! Resultants with respect to `y`, by evaluation and interpolation.
//!
//! `Res_y(P, Q)` is a polynomial in `x` of degree at most
//! `min(deg_y P * deg_x Q + deg_y Q * deg_x P, tdeg P * tdeg Q)`. It is
//! sampled on a circle, each sample being the resultant of the specialized
//! polynomials in `y`, and recovered by the inverse discrete
//! Fourier transform.

use crate::arrangement::{c64, ComplexScalar};
use crate::error::{Error, Result};
use crate::poly::{BiPoly, UniPoly};
use crate::roots::{univariate_roots, SolverConfig};

const ZERO_QUALITY: f64 = 1e-11;

/// Determinant and the smallest pivot modulus met during elimination.
fn eliminate(mut m: Vec<Vec<ComplexScalar>>) -> (ComplexScalar, f64) {
    let n = m.len();
    let mut det = c64(1.0, 0.0);
    let mut smallest = f64::INFINITY;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))
            .unwrap();
        smallest = smallest.min(m[pivot][col].norm());
        if m[pivot][col] == c64(0.0, 0.0) {
            return (c64(0.0, 0.0), 0.0);
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for row in (col + 1)..n {
            let factor = m[row][col] / p;
            if factor == c64(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= factor * v;
            }
        }
    }
    (det, smallest)
}

/// Resultant of two univariate polynomials given with formal degrees
/// `p.len() - 1` and `q.len() - 1`, together with the smallest elimination
/// pivot relative to the largest coefficient. A relative pivot near machine
/// precision means the Sylvester matrix is numerically singular.
pub(crate) fn sylvester_resultant(p: &[ComplexScalar], q: &[ComplexScalar]) -> (ComplexScalar, f64) {
    let (m, n) = (p.len() - 1, q.len() - 1);
    if n == 0 {
        let v = q[0].powu(m as u32);
        return (v, if v == c64(0.0, 0.0) { 0.0 } else { 1.0 });
    }
    if m == 0 {
        let v = p[0].powu(n as u32);
        return (v, if v == c64(0.0, 0.0) { 0.0 } else { 1.0 });
    }
    let size = m + n;
    let mut mat = vec![vec![c64(0.0, 0.0); size]; size];
    for r in 0..n {
        for k in 0..=m {
            mat[r][r + k] = p[m - k];
        }
    }
    for r in 0..m {
        for k in 0..=n {
            mat[n + r][r + k] = q[n - k];
        }
    }
    let largest = p.iter().chain(q).map(|z| z.norm()).fold(0.0, f64::max);
    let (det, smallest) = eliminate(mat);
    (det, if largest > 0.0 { smallest / largest } else { 0.0 })
}

/// `Res(P, Q) = lc(P)^n prod Q(y_i)` over the roots `y_i` of `P`, with
/// `n = q.len() - 1`, together with the smallest relative residual of `Q`
/// at those roots.
fn product_resultant(p: &[ComplexScalar], q: &[ComplexScalar]) -> Result<(ComplexScalar, f64)> {
    let n = q.len() - 1;
    let lead = *p.last().unwrap();
    let qp = UniPoly::new(q.to_vec());
    let roots = univariate_roots(&UniPoly::new(p.to_vec()), &SolverConfig::default())?;
    let mut value = lead.powu(n as u32);
    let mut smallest = f64::INFINITY;
    for y in roots {
        value *= qp.eval(y);
        smallest = smallest.min(qp.relative_residual(y));
    }
    Ok((value, smallest))
}

/// Resultant of `p` and `q` with respect to `y`, sampled on the unit circle.
///
/// If either polynomial has degree 0 in `y`, the convention
/// `Res(P, q0) = q0^{deg_y P}` applies.
pub fn resultant_y(p: &BiPoly, q: &BiPoly) -> Result<UniPoly> {
    resultant_y_on_circle(p, q, 1.0)
}

/// Like [`resultant_y`] with samples on the circle `|x| = radius`. The
/// coefficients are recovered accurately when the radius matches the size
/// of the roots; sampling far outside the root cloud drowns the low-order
/// coefficients in rounding noise.
pub fn resultant_y_on_circle(p: &BiPoly, q: &BiPoly, radius: f64) -> Result<UniPoly> {
    let (m, n) = (p.degree_y(), q.degree_y());
    let monic_in_y = m > 0 && (1..p.grid().len()).all(|i| p.coefficient(i, m) == c64(0.0, 0.0));
    let bound = (m * q.degree_x() + n * p.degree_x()).min(p.total_degree() * q.total_degree());
    interpolate_on_circle(bound, radius, |x| {
        if monic_in_y {
            product_resultant(&p.at_x(x), &q.at_x(x))
        } else {
            Ok(sylvester_resultant(&p.at_x(x), &q.at_x(x)))
        }
    })
}

/// Polynomial of degree at most `bound` recovered from its values on the
/// circle `|x| = radius`. `sample` returns the value at `x` and a quality in
/// `[0, 1]`; when every sample has quality below rounding level the
/// resultant is taken to vanish identically.
pub(crate) fn interpolate_on_circle<F>(bound: usize, radius: f64, mut sample: F) -> Result<UniPoly>
where
    F: FnMut(ComplexScalar) -> Result<(ComplexScalar, f64)>,
{
    let samples = bound + 1;
    let mut values = Vec::with_capacity(samples);
    let mut best_quality: f64 = 0.0;
    for k in 0..samples {
        let angle = std::f64::consts::TAU * k as f64 / samples as f64;
        let (v, quality) = sample(radius * c64(angle.cos(), angle.sin()))?;
        best_quality = best_quality.max(quality);
        values.push(v);
    }
    if best_quality < ZERO_QUALITY {
        return Err(Error::ZeroResultant);
    }
    let coefficients = (0..samples)
        .map(|j| {
            let sum: ComplexScalar = values
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let angle = -std::f64::consts::TAU * ((j * k) % samples) as f64 / samples as f64;
                    v * c64(angle.cos(), angle.sin())
                })
                .sum();
            sum / (samples as f64 * radius.powi(j as i32))
        })
        .collect();
    Ok(UniPoly::new(coefficients).trimmed(1e-12))
}
