//! Simultaneous root finding (Aberth-Ehrlich iteration).

use serde::{Deserialize, Serialize};

use crate::arrangement::{c64, ComplexScalar};
use crate::error::{Error, Result};
use crate::poly::UniPoly;

const STALL_TOL: f64 = 1e-4;

/// Numerical settings shared by the root finder and the critical-point solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative residual accepted for roots and critical points.
    pub residual_tol: f64,
    /// Distance under which two critical points are the same point.
    pub cluster_tol: f64,
    /// Relative distance under which two critical values are the same value.
    pub value_tol: f64,
    /// Minimum `|l_i(p)|` for a point to count as off the arrangement.
    pub off_tol: f64,
    pub newton_max_iter: usize,
    pub root_max_iter: usize,
    /// Seed for coordinate changes.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            residual_tol: 1e-10,
            cluster_tol: 1e-7,
            value_tol: 1e-7,
            off_tol: 1e-7,
            newton_max_iter: 50,
            root_max_iter: 500,
            seed: 0,
        }
    }
}

/// All complex roots of `p`, with multiplicity.
///
/// Exact zero roots are split off first. The remaining roots start on a
/// circle whose radius is the geometric mean of the root moduli and are
/// refined together until every correction is negligible or the iteration
/// cap is hit. Fails when some root's relative residual still exceeds
/// `cfg.residual_tol`.
pub fn univariate_roots(p: &UniPoly, cfg: &SolverConfig) -> Result<Vec<ComplexScalar>> {
    if p.degree() == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let coeffs = p.coefficients();
    let zeros = coeffs.iter().take_while(|c| **c == c64(0.0, 0.0)).count();
    let reduced = UniPoly::new(coeffs[zeros..].to_vec());
    let mut roots = vec![c64(0.0, 0.0); zeros];
    let n = reduced.degree();
    if n == 0 {
        return Ok(roots);
    }
    if n == 1 {
        let c = reduced.coefficients();
        roots.push(-c[0] / c[1]);
        return Ok(roots);
    }

    let (z, iterations) = aberth(&reduced, cfg.root_max_iter);
    let worst = z.iter().map(|r| reduced.relative_residual(*r)).fold(0.0, f64::max);
    if !(worst < cfg.residual_tol) {
        return Err(Error::NonConvergence { iterations, worst_residual: worst });
    }
    roots.extend(z);
    Ok(roots)
}

/// Root approximations with multiplicity, without a convergence check.
pub(crate) fn approximate_roots(p: &UniPoly, max_iter: usize) -> Vec<ComplexScalar> {
    let coeffs = p.coefficients();
    let zeros = coeffs.iter().take_while(|c| **c == c64(0.0, 0.0)).count();
    let reduced = UniPoly::new(coeffs[zeros..].to_vec());
    let mut roots = vec![c64(0.0, 0.0); zeros.min(p.degree())];
    match reduced.degree() {
        0 => {}
        1 => roots.push(-reduced.coefficients()[0] / reduced.coefficients()[1]),
        _ => roots.extend(aberth(&reduced, max_iter).0),
    }
    roots
}

/// Aberth iteration on a polynomial without zero roots, from a circle whose
/// radius is the geometric mean of the root moduli. Returns the current
/// approximations and the number of sweeps used.
pub(crate) fn aberth(p: &UniPoly, max_iter: usize) -> (Vec<ComplexScalar>, usize) {
    let c = p.coefficients();
    let n = p.degree();
    let radius = (c[0].norm() / c[n].norm()).powf(1.0 / n as f64);
    let start: Vec<ComplexScalar> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            radius * c64(angle.cos(), angle.sin())
        })
        .collect();
    aberth_from(start, max_iter, |z| {
        let (v, dv) = p.eval_with_derivative(z);
        if v == c64(0.0, 0.0) {
            Some(c64(0.0, 0.0))
        } else {
            Some(v / dv)
        }
    })
}

/// Aberth iteration from given starting points. `newton_ratio(z)` returns
/// `g(z) / g'(z)` for the function whose zeros are sought, zero at an exact
/// root, or `None` when it cannot be evaluated.
pub(crate) fn aberth_from(
    mut z: Vec<ComplexScalar>,
    max_iter: usize,
    mut newton_ratio: impl FnMut(ComplexScalar) -> Option<ComplexScalar>,
) -> (Vec<ComplexScalar>, usize) {
    let n = z.len();
    let mut done = vec![false; n];
    let mut previous = vec![f64::INFINITY; n];
    let mut iterations = 0;
    while iterations < max_iter && done.iter().any(|d| !d) {
        iterations += 1;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let Some(ratio) = newton_ratio(z[i]) else { continue };
            if ratio == c64(0.0, 0.0) {
                done[i] = true;
                continue;
            }
            let repulsion: ComplexScalar = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (c64(1.0, 0.0) - ratio * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            z[i] -= step;
            let size = z[i].norm().max(f64::MIN_POSITIVE);
            // a small step that no longer shrinks is rounding noise
            let stalled = step.norm() >= previous[i] && step.norm() <= STALL_TOL * size;
            if step.norm() <= 4.0 * f64::EPSILON * size || stalled {
                done[i] = true;
            }
            previous[i] = step.norm();
        }
    }
    (z, iterations)
}
