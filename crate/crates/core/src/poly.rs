//! Dense univariate and bivariate polynomials with complex coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arrangement::{c64, ComplexScalar};

/// Univariate polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniPoly {
    coefficients: Vec<ComplexScalar>,
}

impl UniPoly {
    /// Trailing exact zeros are dropped; the zero polynomial keeps one entry.
    pub fn new(mut coefficients: Vec<ComplexScalar>) -> UniPoly {
        while coefficients.len() > 1 && *coefficients.last().unwrap() == c64(0.0, 0.0) {
            coefficients.pop();
        }
        if coefficients.is_empty() {
            coefficients.push(c64(0.0, 0.0));
        }
        UniPoly { coefficients }
    }

    pub fn from_real(coefficients: &[f64]) -> UniPoly {
        UniPoly::new(coefficients.iter().map(|&c| c64(c, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[ComplexScalar]) -> UniPoly {
        let mut coeffs = vec![c64(1.0, 0.0)];
        for r in roots {
            let mut next = vec![c64(0.0, 0.0); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        UniPoly::new(coeffs)
    }

    pub fn coefficients(&self) -> &[ComplexScalar] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| *c == c64(0.0, 0.0))
    }

    /// Drops leading coefficients whose modulus is at most `rel_tol` times
    /// the largest coefficient modulus.
    pub fn trimmed(&self, rel_tol: f64) -> UniPoly {
        let cut = rel_tol * self.norm_inf();
        let mut c = self.coefficients.clone();
        while c.len() > 1 && c.last().unwrap().norm() <= cut {
            c.pop();
        }
        UniPoly::new(c)
    }

    pub fn eval(&self, z: ComplexScalar) -> ComplexScalar {
        self.coefficients.iter().rev().fold(c64(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Value and derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, z: ComplexScalar) -> (ComplexScalar, ComplexScalar) {
        let mut p = c64(0.0, 0.0);
        let mut dp = c64(0.0, 0.0);
        for c in self.coefficients.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn norm_inf(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Backward-error scale at `z`: `sum |c_k| max(1, |z|)^k`.
    pub fn magnitude_at(&self, z: ComplexScalar) -> f64 {
        let r = z.norm().max(1.0);
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Relative residual `|p(z)| / magnitude_at(z)`.
    pub fn relative_residual(&self, z: ComplexScalar) -> f64 {
        let m = self.magnitude_at(z);
        if m == 0.0 {
            0.0
        } else {
            self.eval(z).norm() / m
        }
    }
}

/// Dense bivariate polynomial, `c[i][j]` is the coefficient of `x^i y^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiPoly {
    coefficients: Vec<Vec<ComplexScalar>>,
}

impl BiPoly {
    pub fn zero() -> BiPoly {
        BiPoly { coefficients: vec![vec![c64(0.0, 0.0)]] }
    }

    pub fn constant(c: ComplexScalar) -> BiPoly {
        BiPoly { coefficients: vec![vec![c]] }
    }

    /// `a x + b y + c`.
    pub fn linear(a: ComplexScalar, b: ComplexScalar, c: ComplexScalar) -> BiPoly {
        BiPoly { coefficients: vec![vec![c, b], vec![a, c64(0.0, 0.0)]] }
    }

    /// Builds from a grid `c[i][j]`; ragged rows are zero-padded.
    pub fn from_grid(grid: Vec<Vec<ComplexScalar>>) -> BiPoly {
        let ny = grid.iter().map(Vec::len).max().unwrap_or(0).max(1);
        let mut coefficients: Vec<Vec<ComplexScalar>> = grid
            .into_iter()
            .map(|mut row| {
                row.resize(ny, c64(0.0, 0.0));
                row
            })
            .collect();
        if coefficients.is_empty() {
            coefficients.push(vec![c64(0.0, 0.0); ny]);
        }
        BiPoly { coefficients }
    }

    pub fn grid(&self) -> &[Vec<ComplexScalar>] {
        &self.coefficients
    }

    pub fn coefficient(&self, i: usize, j: usize) -> ComplexScalar {
        self.coefficients
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or(c64(0.0, 0.0))
    }

    fn nonzero_terms(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.coefficients.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| **c != c64(0.0, 0.0))
                .map(move |(j, _)| (i, j))
        })
    }

    pub fn degree_x(&self) -> usize {
        self.nonzero_terms().map(|(i, _)| i).max().unwrap_or(0)
    }

    pub fn degree_y(&self) -> usize {
        self.nonzero_terms().map(|(_, j)| j).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> usize {
        self.nonzero_terms().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn eval(&self, x: ComplexScalar, y: ComplexScalar) -> ComplexScalar {
        self.coefficients.iter().rev().fold(c64(0.0, 0.0), |acc, row| {
            acc * x + row.iter().rev().fold(c64(0.0, 0.0), |a, c| a * y + c)
        })
    }

    /// Coefficients in `y` (ascending, up to `degree_y`) after substituting `x`.
    pub fn at_x(&self, x: ComplexScalar) -> Vec<ComplexScalar> {
        let ny = self.degree_y() + 1;
        (0..ny)
            .map(|j| {
                self.coefficients
                    .iter()
                    .rev()
                    .fold(c64(0.0, 0.0), |acc, row| acc * x + row.get(j).copied().unwrap_or_default())
            })
            .collect()
    }

    pub fn add(&self, other: &BiPoly) -> BiPoly {
        let nx = self.coefficients.len().max(other.coefficients.len());
        let ny = self.coefficients[0].len().max(other.coefficients[0].len());
        let grid = (0..nx)
            .map(|i| (0..ny).map(|j| self.coefficient(i, j) + other.coefficient(i, j)).collect())
            .collect();
        BiPoly { coefficients: grid }
    }

    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        let nx = self.coefficients.len() + other.coefficients.len() - 1;
        let ny = self.coefficients[0].len() + other.coefficients[0].len() - 1;
        let mut grid = vec![vec![c64(0.0, 0.0); ny]; nx];
        for (i, row) in self.coefficients.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if *c == c64(0.0, 0.0) {
                    continue;
                }
                for (k, orow) in other.coefficients.iter().enumerate() {
                    for (l, d) in orow.iter().enumerate() {
                        grid[i + k][j + l] += c * d;
                    }
                }
            }
        }
        BiPoly { coefficients: grid }
    }

    pub fn scale(&self, s: Complex64) -> BiPoly {
        BiPoly { coefficients: self.coefficients.iter().map(|row| row.iter().map(|c| c * s).collect()).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }
}
