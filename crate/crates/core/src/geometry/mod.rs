//! Analytic domains, signed distances, parallel surfaces and curvatures.

pub mod domain;
pub mod fast_march;
pub mod field;
pub mod io;
pub mod primitives;

pub use domain::{DomainConfig, DomainKind, DomainSpec, PrimitiveConfig, RadialShape, RadialStructure};
pub use fast_march::fast_march_distance;
pub use field::{
    classify_nodes, distance_field, exact_distance_field, CartesianGrid, Grid, NodeKind, RadialGrid, RadialMetric, ScalarField,
};
pub use primitives::{Point, Primitive};
