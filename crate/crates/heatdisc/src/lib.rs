//! Flow designs and variational bounds for cooling an internally heated disc.

pub mod advdiff;
pub mod bounds;
pub mod disc;
pub mod error;
pub mod flows;
pub mod linalg;
pub mod poisson;
pub mod real;
pub mod sources;
pub mod sweep;

pub use error::{Error, Result};
pub use real::Real;

/// f64 instantiations of the generic types.
pub type Grid = disc::PolarGrid<f64>;
pub type Field = disc::SpectralScalar<f64>;
pub type VectorField = disc::VectorFieldPolar<f64>;
pub type HeatSource = sources::Source<f64>;
pub type Design = flows::FlowDesign<f64>;
pub type Plan = flows::BranchingPlan<f64>;
pub type Report = bounds::BoundReport<f64>;
pub type Solution = advdiff::SteadySolution<f64>;
