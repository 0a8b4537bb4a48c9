//! Toolkit for complex affine line arrangements and their defining
//! polynomials `f = prod(a_i x + b_i y + c_i)`.

pub mod arrangement;
pub mod critical;
pub mod deformation;
pub mod error;
pub mod fiber;
pub mod invariants;
pub mod io;
pub mod poly;
pub mod resultant;
pub mod roots;

pub use arrangement::{
    combinatorics, directions, evaluate, intersections, is_generic, Arrangement, Combinatorics, ComplexScalar,
    Direction, GenericityReport, IntersectionPoint, Line, Point,
};
pub use critical::{critical_points, gradient_system, morse_report, CriticalPoint, MorseReport};
pub use error::{Error, Result};
pub use io::{parse_arrangement, serialize_arrangement};
pub use roots::{univariate_roots, SolverConfig};
