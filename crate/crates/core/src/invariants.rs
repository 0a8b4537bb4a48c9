//! Topological invariants of arrangement fibers, computed in exact integer
//! arithmetic from the combinatorics (generic case) or from the intersection
//! points (any arrangement).

use serde::{Deserialize, Serialize};

use crate::arrangement::{combinatorics, intersections, is_generic, parallel_classes, Arrangement, Combinatorics};
use crate::error::Result;

fn degree(comb: &Combinatorics) -> i64 {
    comb.degree() as i64
}

/// Sum of `p (p - 1)` over the parallel classes.
fn parallel_pairs_twice(comb: &Combinatorics) -> i64 {
    comb.class_sizes().iter().map(|&p| (p as i64) * (p as i64 - 1)).sum()
}

/// Euler characteristic of a generic fiber of a generic arrangement:
/// `-d(d-2) + sum p_j(p_j-1)`.
pub fn euler_generic_fiber(comb: &Combinatorics) -> i64 {
    let d = degree(comb);
    -d * (d - 2) + parallel_pairs_twice(comb)
}

/// Euler characteristic of the zero fiber of a generic arrangement:
/// `1 - (d-1)(d-2)/2 + sum p_j(p_j-1)/2`.
pub fn euler_zero_fiber(comb: &Combinatorics) -> i64 {
    let d = degree(comb);
    1 - (d - 1) * (d - 2) / 2 + parallel_pairs_twice(comb) / 2
}

/// Total Milnor number of the zero fiber of a generic arrangement, which is
/// its number of double points: `d(d-1)/2 - sum p_j(p_j-1)/2`.
pub fn mu_zero(comb: &Combinatorics) -> i64 {
    let d = degree(comb);
    d * (d - 1) / 2 - parallel_pairs_twice(comb) / 2
}

/// Euler characteristic of the zero fiber of any arrangement, by
/// inclusion-exclusion over the intersection points: `d - sum (m_k - 1)`.
pub fn euler_zero_fiber_general(arr: &Arrangement, tol: f64) -> Result<i64> {
    let points = intersections(arr, tol)?;
    let excess: i64 = points.iter().map(|p| p.multiplicity() as i64 - 1).sum();
    Ok(arr.degree() as i64 - excess)
}

/// Number of bifurcation values predicted for a polynomial that is Morse
/// outside the arrangement.
pub fn predicted_bifurcation_count(chi_zero: i64) -> i64 {
    2 - chi_zero
}

/// Invariants of one arrangement. Fields that only make sense for generic
/// arrangements are `None` otherwise; the bifurcation prediction is `None`
/// when all lines are parallel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub d: usize,
    pub combinatorics: Combinatorics,
    pub is_generic: bool,
    pub chi_generic_fiber: Option<i64>,
    pub chi_zero_fiber: i64,
    pub mu_zero: Option<i64>,
    #[serde(rename = "predicted_B_count")]
    pub predicted_b_count: Option<i64>,
}

impl InvariantReport {
    pub fn compute(arr: &Arrangement, tol: f64) -> Result<InvariantReport> {
        let comb = combinatorics(arr);
        let generic = is_generic(arr, tol)?.is_generic;
        let chi_zero = euler_zero_fiber_general(arr, tol)?;
        let several_directions = parallel_classes(arr).len() >= 2;
        Ok(InvariantReport {
            d: arr.degree(),
            is_generic: generic,
            chi_generic_fiber: generic.then(|| euler_generic_fiber(&comb)),
            chi_zero_fiber: chi_zero,
            mu_zero: generic.then(|| mu_zero(&comb)),
            predicted_b_count: several_directions.then(|| predicted_bifurcation_count(chi_zero)),
            combinatorics: comb,
        })
    }
}
