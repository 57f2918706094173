//! Numerical workbench for semilinear elliptic equations with bounded signed
//! measure data, −Lu = f(·,u) + μ, formulated through the resolvent density
//! of the underlying operator.
//!
//! The crate instantiates model operators whose Green kernels are computable
//! (interval and radial-ball Dirichlet Laplacians, restricted fractional
//! Laplacian on the interval), represents measures as grid densities plus
//! finite atom lists, solves the kernel fixed-point equation
//! u = R(f(·,u)·m + μ), and cross-verifies solutions against the equivalent
//! solution concepts: the kernel identity itself, duality pairings against
//! bounded test densities, truncation-correction potentials, a priori L¹ and
//! energy bounds, and a Monte Carlo Feynman–Kac estimate along killed paths.
//!
//! All numerics are generic over the scalar type through [`Scalar`];
//! concrete `f64` aliases are exported at the crate root.

pub mod checkers;
pub mod domain;
pub mod form;
pub mod frac;
pub mod grid;
pub mod linalg;
pub mod measure;
pub mod oracle;
pub mod potential;
pub mod radial;
pub mod scalar;
pub mod solver;
pub mod special;
pub mod stochastic;

pub use domain::{Domain, DomainError, DomainKind, QuadTol};
pub use grid::{Grading, Grid, GridFunction};
pub use measure::{Atom, Measure, MeasureError, PolarityVerdict};
pub use scalar::Scalar;
pub use solver::{Nonlinearity, SolveOptions, SolveReport, SweepReport};

/// Concrete double-precision aliases.
pub type Domain64 = Domain<f64>;
pub type DomainKind64 = DomainKind<f64>;
pub type GridFunction64 = GridFunction<f64>;
pub type Measure64 = Measure<f64>;
pub type Nonlinearity64 = Nonlinearity<f64>;

/// Concrete single-precision aliases.
pub type Domain32 = Domain<f32>;
pub type GridFunction32 = GridFunction<f32>;
pub type Measure32 = Measure<f32>;
