//! The family `f_t = x y (x + y - 4)(x - t y)`.
//!
//! For `t` outside `{-1, 0, j, jbar}` the polynomial is Morse outside its
//! zero set with two nonzero critical values. At `t = j` or `jbar` a single
//! nonzero critical value `3(t - 1)` remains. At `t = -1` the last line is
//! parallel to `x + y - 4`.

use anyhow::{bail, Result};
use arrangelab_core::invariants::euler_zero_fiber_general;
use arrangelab_core::{combinatorics, morse_report, Arrangement, ComplexScalar, CriticalPoint, SolverConfig};
use serde::Serialize;

use crate::scalar::j;

/// Distance to `j` or `jbar` under which `t` is treated as that root.
pub const ROOT_TOL: f64 = 1e-9;
pub const RESIDUAL_LIMIT: f64 = 1e-10;
pub const VALUE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// `None` when skipped.
    pub passed: Option<bool>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Check {
        Check { name: name.into(), passed: Some(passed), detail }
    }

    fn skipped(name: &str, detail: &str) -> Check {
        Check { name: name.into(), passed: None, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleReport {
    pub t: ComplexScalar,
    pub regime: String,
    pub degenerate: Option<String>,
    pub chi_zero_fiber: i64,
    pub critical_points: Vec<CriticalPoint>,
    pub critical_values_nonzero: Vec<ComplexScalar>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn family(t: ComplexScalar) -> Result<Arrangement> {
    let one = ComplexScalar::new(1.0, 0.0);
    let zero = ComplexScalar::new(0.0, 0.0);
    Ok(Arrangement::from_coefficients(&[
        [one, zero, zero],
        [zero, one, zero],
        [one, one, ComplexScalar::new(-4.0, 0.0)],
        [one, -t, zero],
    ])?)
}

pub fn verify_example(t: ComplexScalar, cfg: &SolverConfig) -> Result<ExampleReport> {
    if !(t.re.is_finite() && t.im.is_finite()) {
        bail!("t must be finite");
    }
    if t.norm() == 0.0 {
        bail!("t = 0 makes x - t y coincide with x = 0");
    }
    let arr = family(t)?;
    let chi_zero = euler_zero_fiber_general(&arr, arrangelab_core::arrangement::TOL_POINT)?;
    let mut checks = Vec::new();

    if combinatorics(&arr).classes() < 4 {
        let reason = "directions collide: x - t y is parallel to x + y - 4".to_string();
        checks.push(Check::skipped("morse outside", "degenerate configuration"));
        checks.push(Check::skipped("critical values", "degenerate configuration"));
        checks.push(Check::skipped("chi zero fiber = -1", "degenerate configuration"));
        return Ok(ExampleReport {
            t,
            regime: "degenerate".into(),
            degenerate: Some(reason),
            chi_zero_fiber: chi_zero,
            critical_points: Vec::new(),
            critical_values_nonzero: Vec::new(),
            checks,
            passed: true,
        });
    }

    let report = morse_report(&arr, cfg)?;
    let values = &report.critical_values_nonzero;
    let points = &report.critical_points;
    let worst = points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let at_root = (t - j()).norm() < ROOT_TOL || (t - j().conj()).norm() < ROOT_TOL;

    if at_root {
        let target = 3.0 * (t - 1.0);
        checks.push(Check::new("one nonzero critical value", values.len() == 1, format!("{} found", values.len())));
        let gap = values.first().map_or(f64::INFINITY, |v| (v - target).norm());
        checks.push(Check::new(
            "value is 3(t - 1)",
            values.len() == 1 && gap < VALUE_TOL,
            format!("|v - 3(t - 1)| = {gap:.3e}"),
        ));
        let nondegenerate = points.iter().filter(|p| p.nondegenerate).count();
        checks.push(Check::new(
            "two nondegenerate critical points",
            points.len() == 2 && nondegenerate == 2,
            format!("{} critical point(s), {nondegenerate} nondegenerate", points.len()),
        ));
        checks.push(Check::skipped("#B = 2 - chi", "not Morse outside the arrangement"));
    } else {
        checks.push(Check::new("morse outside", report.is_morse_outside, String::new()));
        checks.push(Check::new("two nonzero critical values", values.len() == 2, format!("{} found", values.len())));
        checks.push(Check::new(
            "#B = 2 - chi",
            report.bifurcation_count_matches,
            format!(
                "measured {} vs predicted {}",
                report.measured_bifurcation_count, report.predicted_bifurcation_count
            ),
        ));
    }
    checks.push(Check::new("chi zero fiber = -1", chi_zero == -1, format!("chi = {chi_zero}")));
    checks.push(Check::new(
        "residuals below 1e-10",
        worst < RESIDUAL_LIMIT,
        format!("worst residual {worst:.3e}"),
    ));
    let passed = checks.iter().all(|c| c.passed != Some(false));
    Ok(ExampleReport {
        t,
        regime: if at_root { "cube root of unity" } else { "generic" }.into(),
        degenerate: None,
        chi_zero_fiber: chi_zero,
        critical_points: report.critical_points,
        critical_values_nonzero: report.critical_values_nonzero,
        checks,
        passed,
    })
}
