//! Exactness-first library for fractional-order analysis on `Q_p` and
//! `Q_p^n`: step functions and their Fourier transform, the
//! Vladimirov-Taibleson operator in spectral and hypersingular form,
//! Gagliardo/Sobolev seminorm checkers, a Galerkin solver for the nonlocal
//! Dirichlet problem, and boundary-regularity experiments.
//!
//! All radii, distances and Haar measures are exact rationals of the form
//! `mantissa * p^exponent`; function values are complex doubles. Radial
//! tails are always summed in closed form, never truncated.

pub mod accum;
pub mod checks;
pub mod corpus;
pub mod dirichlet;
pub mod error;
pub mod linalg;
pub mod operator;
pub mod padic;
pub mod regularity;
pub mod report;
pub mod schema;
pub mod schwartz;
pub mod sobolev;

pub use error::{Error, Result};

pub use dirichlet::{DirichletProblem, ExteriorData, GalerkinSystem, PoissonSolution};
pub use operator::{apply_hypersingular, apply_spectral, OperatorOutput, VtParams};
pub use padic::{Ball, Cell, OpenSetDecomposition, PadicPoint, RadialValue};
pub use regularity::{LambdaSequence, RegularityReport};
pub use schwartz::StepFunction;
