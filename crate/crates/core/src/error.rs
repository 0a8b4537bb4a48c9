use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed arrangement document: {0}")]
    Malformed(String),

    #[error("degenerate line {index}: a = b = 0")]
    DegenerateLine { index: usize },

    #[error("duplicate line: lines {first} and {second} define the same line")]
    DuplicateLine { first: usize, second: usize },

    #[error("non-finite coefficient in line {index}")]
    NonFinite { index: usize },

    #[error("empty arrangement")]
    Empty,

    #[error(
        "cluster ambiguity: intersection points at distance {distance:e} fall in [tol, 2*tol) for tol = {tol:e}; change the tolerance"
    )]
    ClusterAmbiguity { distance: f64, tol: f64 },

    #[error("all lines are parallel; at least two distinct directions are required")]
    SingleDirection,

    #[error("resultant vanishes identically: the polynomials share a component")]
    ZeroResultant,

    #[error("polynomial has degree 0; nothing to solve")]
    ConstantPolynomial,

    #[error("root finder did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    NonConvergence { iterations: usize, worst_residual: f64 },

    #[error("no coordinate change made the elimination proper after {attempts} attempts")]
    DegenerateElimination { attempts: usize },

    #[error("combinatorics mismatch: {left:?} vs {right:?}")]
    CombinatoricsMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("arrangement is not generic")]
    NotGeneric,

    #[error("canonical form needs at least two parallel classes, got {classes}")]
    TooFewClasses { classes: usize },

    #[error("could not make the canonical arrangement generic after {attempts} jitter attempts")]
    CanonicalJitter { attempts: usize },

    #[error("deformation left the generic locus at t = {t}: {reason}")]
    PathNotGeneric { t: f64, reason: String },

    #[error("invalid deformation path: {0}")]
    InvalidPath(String),

    #[error("invalid ball: {0}")]
    InvalidBall(String),

    #[error("{what} at distance {distance} from the center lies in the forbidden band around the sphere of radius {radius}; change the radius")]
    ForbiddenBand {
        what: String,
        distance: f64,
        radius: f64,
    },

    #[error("perturbation to double points did not stabilize after {halvings} halvings")]
    Unstable { halvings: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
