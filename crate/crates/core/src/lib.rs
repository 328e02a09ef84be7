//! Constant-mean-curvature foliations of globally hyperbolic spacetimes.
//!
//! Spacetimes are given in conformal Gaussian form
//! `e^{2ψ}(-dx0² + σ_ij dx^i dx^j)`.  The crate solves for CMC slices as
//! graphs over the Cauchy surface, assembles the stability operator, sweeps
//! the mean curvature τ by continuation and decides whether τ is a time
//! function.  All numerics are generic over [`Real`]; `f64` aliases are
//! provided at the crate root.

pub mod error;
pub mod expr;
pub mod foliation;
pub mod geometry;
pub mod graph;
pub mod linalg;
pub mod quad;
pub mod scalar;
pub mod solver;
pub mod spacetime;

pub use error::{CmcError, Result};
pub use foliation::{build_time_function, sweep, Foliation, SpacetimeGrid, SweepOptions, TimeFunctionReport, Verdict};
pub use graph::{graph_geometry, Orientation, SliceGraph, SliceLayout};
pub use scalar::{Dual, Real};
pub use solver::{
    assemble_stability_operator, newton_solve, slice_velocity, NewtonReport, SolverOptions, StabilityOperator,
};
pub use spacetime::{make_spec, Chart, Family, Point, SpacetimeSpec};

pub type MetricPointData64 = geometry::MetricPointData<f64>;
pub type RicciData64 = geometry::RicciData<f64>;
pub type Jet = expr::Jet2<f64>;
pub type GraphGeometry64 = graph::GraphGeometry<f64>;
pub type PointGeometry64 = graph::PointGeometry<f64>;
pub type Point64 = Point<f64>;
