pub mod acceptance;
pub mod asymptotics;
pub mod barrier;
pub mod error;
pub mod geometry;
pub mod interp;
pub mod manifold;
pub mod nonlinearity;
pub mod ode;
pub mod pde;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod symmetry;

pub use error::{Error, Result};

/// Double-precision instances of the scalar-generic kernels.
pub type Nonlinearity64 = nonlinearity::Nonlinearity<f64>;
pub type DomainSpec64 = geometry::DomainSpec<f64>;
pub type Primitive64 = geometry::Primitive<f64>;
pub type Point64 = geometry::Point<f64>;
pub type BarrierSolution64 = barrier::BarrierSolution<f64>;
pub type MonotoneCubic64 = interp::MonotoneCubic<f64>;
