//! Root-density images of parametric polynomial families.
//!
//! The numeric core is generic over [`scalar::Real`]; the aliases below fix
//! the scalar to `f64`, which is what the pipeline uses.

pub mod analysis;
pub mod config;
pub mod density;
pub mod expr;
pub mod family;
pub mod parallel;
pub mod pipeline;
pub mod poly;
pub mod render;
pub mod sampling;
pub mod scalar;
pub mod solver;

pub use num_complex::Complex64;

pub type Polynomial64 = poly::Polynomial<f64>;
pub type RootSet64 = solver::RootSet<f64>;
pub type PolynomialDD = poly::Polynomial<scalar::DoubleDouble>;
pub type RootSetDD = solver::RootSet<scalar::DoubleDouble>;
