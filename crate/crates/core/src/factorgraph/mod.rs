//! Factor-graph representation and batch nonlinear least-squares solving.

pub mod factor;
pub mod key;
pub mod noise;
pub mod optimize;
pub(crate) mod sparse;

use std::collections::BTreeMap;

use nalgebra::DVector;
use thiserror::Error;

use crate::manifold::{ManifoldError, Pose, VariableValue};
use crate::mesa::constraint::ConstraintError;
use crate::scalar::{cast, Real};

pub use factor::{Factor, Linearized};
pub(crate) use factor::bearing_range_of;
pub use key::{RobotId, VariableKey};
pub use noise::NoiseModel;
pub use optimize::{optimize, OptimizeResult, SolverConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FactorGraphError {
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("missing variable {0}")]
    MissingVariable(VariableKey),
    #[error("variable {key} is not a {expected}")]
    WrongVariableType {
        key: VariableKey,
        expected: &'static str,
    },
    #[error("information matrix is not positive definite")]
    InformationNotPositiveDefinite,
    #[error("residual is not finite")]
    NonFiniteResidual,
    #[error("normal equations not positive definite even at maximum damping")]
    IndefiniteSystem,
}

/// Assignment of values to variables, keyed globally.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Values<S: Real> {
    map: BTreeMap<VariableKey, VariableValue<S>>,
}

impl<S: Real> Values<S> {
    pub fn new() -> Self {
        Self { map: BTreeMap::new() }
    }

    /// Inserts or replaces; returns the previous value if any.
    pub fn insert(&mut self, key: VariableKey, value: VariableValue<S>) -> Option<VariableValue<S>> {
        self.map.insert(key, value)
    }

    pub fn remove(&mut self, key: &VariableKey) -> Option<VariableValue<S>> {
        self.map.remove(key)
    }

    pub fn get(&self, key: &VariableKey) -> Option<&VariableValue<S>> {
        self.map.get(key)
    }

    pub fn try_get(&self, key: &VariableKey) -> Result<&VariableValue<S>, FactorGraphError> {
        self.map
            .get(key)
            .ok_or(FactorGraphError::MissingVariable(*key))
    }

    pub fn pose(&self, key: &VariableKey) -> Result<&Pose<S>, FactorGraphError> {
        self.try_get(key)?
            .as_pose()
            .ok_or(FactorGraphError::WrongVariableType {
                key: *key,
                expected: "pose",
            })
    }

    pub fn point(&self, key: &VariableKey) -> Result<&DVector<S>, FactorGraphError> {
        self.try_get(key)?
            .as_point()
            .ok_or(FactorGraphError::WrongVariableType {
                key: *key,
                expected: "point",
            })
    }

    pub fn contains(&self, key: &VariableKey) -> bool {
        self.map.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Iteration is ordered by key, so downstream assembly is deterministic.
    pub fn iter(&self) -> impl Iterator<Item = (&VariableKey, &VariableValue<S>)> {
        self.map.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &VariableKey> {
        self.map.keys()
    }
}

impl<S: Real> FromIterator<(VariableKey, VariableValue<S>)> for Values<S> {
    fn from_iter<T: IntoIterator<Item = (VariableKey, VariableValue<S>)>>(iter: T) -> Self {
        Self {
            map: iter.into_iter().collect(),
        }
    }
}

/// A list of factors over globally keyed variables.
#[derive(Debug, Clone, Default)]
pub struct FactorGraph<S: Real> {
    factors: Vec<Factor<S>>,
}

impl<S: Real> FactorGraph<S> {
    pub fn new() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn with_factors(factors: Vec<Factor<S>>) -> Self {
        Self { factors }
    }

    pub fn add(&mut self, factor: Factor<S>) {
        self.factors.push(factor);
    }

    pub fn factors(&self) -> &[Factor<S>] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Total cost: half the sum of squared whitened residuals,
    /// `0.5 * sum_m ||r_m||^2_{Sigma_m}` (the convention used by gtsam-style
    /// solver libraries, and the one under which the biased-prior term reads
    /// exactly `(beta/2) ||q + lambda/beta||^2`).
    pub fn residual_norm2(&self, values: &Values<S>) -> Result<S, FactorGraphError> {
        let mut sum = S::zero();
        for factor in &self.factors {
            sum += factor.whitened_residual(values)?.norm_squared();
        }
        Ok(sum * cast(0.5))
    }
}
