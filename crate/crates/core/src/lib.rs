//! Distributed pose-graph optimization with edge-based consensus ADMM.
//!
//! Everything is generic over the scalar type through [`Real`]; the aliases
//! below pin the common double-precision instantiations.

pub mod baselines;
pub mod datasets;
pub mod factorgraph;
pub mod manifold;
pub mod mesa;
pub mod metrics;
pub mod netsim;
pub mod scalar;

pub use scalar::Real;

pub type Pose64 = manifold::Pose<f64>;
pub type Tangent64 = manifold::Tangent<f64>;
pub type Values64 = factorgraph::Values<f64>;
pub type Factor64 = factorgraph::Factor<f64>;
pub type FactorGraph64 = factorgraph::FactorGraph<f64>;
pub type NoiseModel64 = factorgraph::NoiseModel<f64>;
pub type Team64 = mesa::Team<f64>;
pub type MultiRobotProblem64 = datasets::MultiRobotProblem<f64>;
