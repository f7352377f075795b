//! Subordinated heat semigroups and Besov-type seminorms on metric measure
//! graphs.
//!
//! The crate builds discrete metric measure Dirichlet spaces (circle,
//! interval, Sierpinski gasket, Vicsek tree), forms base and subordinated
//! (fractional-Laplacian) heat semigroups by spectral calculus and by
//! subordination quadrature, computes heat-semigroup Besov, Korevaar-Schoen,
//! fractional-Sobolev and ball-restricted (Grigor'yan-type) seminorms, and
//! verifies the scaling laws, seminorm equivalences and functional
//! inequalities that connect them: critical exponents, co-area estimates,
//! pseudo-Poincaré, Sobolev and isoperimetric inequalities, L^p smoothing
//! and capacitary Sobolev bounds.
//!
//! Start from [`space`] to build a graph, [`spectral`] for kernels and
//! fractional Laplacians, [`seminorms`] for energy curves and norms, and
//! [`analysis`] for exponent estimation and the inequality suites. The
//! `examples/` directory has one runnable example per capability, and the
//! thin `subheat` binary drives config-based suite runs.

pub mod analysis;
pub mod config;
pub mod error;
pub mod family;
pub mod fit;
pub mod quad;
pub mod report;
pub mod runner;
pub mod seminorms;
pub mod space;
pub mod spectral;
pub mod subordinator;
pub mod window;

pub use error::{Error, Result};
