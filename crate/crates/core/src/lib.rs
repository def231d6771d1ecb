//! Distances between Gibbs point processes: Stein-factor bounds on total
//! variation and Wasserstein distances, coupled birth-death simulation and
//! the Monte Carlo checks that go with them.

pub mod bounds;
pub mod discretize;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod models;
pub mod quadrature;
pub mod rng;
pub mod sbdp;
pub mod scalar;
pub mod stein;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Window = geometry::Window<f64>;
pub type PointConfig = geometry::PointConfig<f64>;
pub type Model = models::Model<f64>;
pub type ModelSpec = models::ModelSpec<f64>;
pub type Activity = models::Activity<f64>;
pub type Interaction = models::Interaction<f64>;
pub type SteinParams = stein::SteinParams<f64>;
pub type Partition = discretize::Partition<f64>;
pub type StatFamily = harness::StatFamily<f64>;
