//! Constraint functions coupling the local copies of a shared variable.
//!
//! Each kind defines an edge-value space, a residual `q(theta, z)` that
//! vanishes iff `theta` and `z` agree, and a closed-form consensus update.

use nalgebra::DVector;
use thiserror::Error;

use crate::manifold::{ManifoldError, Pose, VariableValue};
use crate::scalar::{cast, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Geodesic,
    ApproxGeodesic,
    Split,
    Chordal,
    /// Plain difference for Euclidean variables.
    Linear,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 5] = [
        ConstraintKind::Geodesic,
        ConstraintKind::ApproxGeodesic,
        ConstraintKind::Split,
        ConstraintKind::Chordal,
        ConstraintKind::Linear,
    ];
}

/// Value of an edge variable. Geodesic and Split keep a pose; the other
/// kinds live in a real vector space.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeValue<S: Real> {
    Pose(Pose<S>),
    Vector(DVector<S>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error("constraint kind {0:?} does not apply to the given value types")]
    KindTypeMismatch(ConstraintKind),
}

/// Constraint residual `q(theta, z)`; zero iff the arguments represent the
/// same element (within the principal branch).
pub fn constraint_eval<S: Real>(
    kind: ConstraintKind,
    theta: &VariableValue<S>,
    z: &EdgeValue<S>,
) -> Result<DVector<S>, ConstraintError> {
    match (kind, theta, z) {
        (ConstraintKind::Geodesic, VariableValue::Pose(t), EdgeValue::Pose(zp)) => {
            Ok(zp.between(t).log_map()?.into_vector())
        }
        (ConstraintKind::ApproxGeodesic, VariableValue::Pose(t), EdgeValue::Vector(zv)) => {
            let log = t.log_map()?.into_vector();
            if log.len() != zv.len() {
                return Err(ConstraintError::KindTypeMismatch(kind));
            }
            Ok(log - zv)
        }
        (ConstraintKind::Split, VariableValue::Pose(t), EdgeValue::Pose(zp)) => {
            let rot = zp.rotation_log_between(t)?;
            let dt = t.translation() - zp.translation();
            let mut out = DVector::zeros(rot.len() + dt.len());
            out.rows_mut(0, rot.len()).copy_from(&rot);
            out.rows_mut(rot.len(), dt.len()).copy_from(&dt);
            Ok(out)
        }
        (ConstraintKind::Chordal, VariableValue::Pose(t), EdgeValue::Vector(zv)) => {
            let vec = t.chordal_vec();
            if vec.len() != zv.len() {
                return Err(ConstraintError::KindTypeMismatch(kind));
            }
            Ok(vec - zv)
        }
        (ConstraintKind::Linear, VariableValue::Point(t), EdgeValue::Vector(zv)) => {
            if t.len() != zv.len() {
                return Err(ConstraintError::KindTypeMismatch(kind));
            }
            Ok(t - zv)
        }
        _ => Err(ConstraintError::KindTypeMismatch(kind)),
    }
}

/// Map a variable value into the edge space of `kind`, e.g. for seeding an
/// edge variable from the owner's current estimate.
pub fn to_edge_value<S: Real>(
    kind: ConstraintKind,
    value: &VariableValue<S>,
) -> Result<EdgeValue<S>, ConstraintError> {
    match (kind, value) {
        (ConstraintKind::Geodesic | ConstraintKind::Split, VariableValue::Pose(p)) => {
            Ok(EdgeValue::Pose(p.clone()))
        }
        (ConstraintKind::ApproxGeodesic, VariableValue::Pose(p)) => {
            Ok(EdgeValue::Vector(p.log_map()?.into_vector()))
        }
        (ConstraintKind::Chordal, VariableValue::Pose(p)) => {
            Ok(EdgeValue::Vector(p.chordal_vec()))
        }
        (ConstraintKind::Linear, VariableValue::Point(v)) => Ok(EdgeValue::Vector(v.clone())),
        _ => Err(ConstraintError::KindTypeMismatch(kind)),
    }
}

/// Constraint gap between two local copies: `q(a, embed(b))`.
pub fn pairwise_gap<S: Real>(
    kind: ConstraintKind,
    a: &VariableValue<S>,
    b: &VariableValue<S>,
) -> Result<DVector<S>, ConstraintError> {
    let z = to_edge_value(kind, b)?;
    constraint_eval(kind, a, &z)
}

/// Closed-form consensus update from the two current copies. Both directed
/// edge variables receive this same value.
pub fn z_update<S: Real>(
    kind: ConstraintKind,
    theta_i: &VariableValue<S>,
    theta_j: &VariableValue<S>,
) -> Result<EdgeValue<S>, ConstraintError> {
    let half: S = cast(0.5);
    match (kind, theta_i, theta_j) {
        (
            ConstraintKind::Geodesic | ConstraintKind::Split,
            VariableValue::Pose(a),
            VariableValue::Pose(b),
        ) => Ok(EdgeValue::Pose(a.split_interpolate(b, half)?)),
        (ConstraintKind::ApproxGeodesic, VariableValue::Pose(a), VariableValue::Pose(b)) => {
            let la = a.log_map()?.into_vector();
            let lb = b.log_map()?.into_vector();
            Ok(EdgeValue::Vector((la + lb) * half))
        }
        (ConstraintKind::Chordal, VariableValue::Pose(a), VariableValue::Pose(b)) => {
            Ok(EdgeValue::Vector((a.chordal_vec() + b.chordal_vec()) * half))
        }
        (ConstraintKind::Linear, VariableValue::Point(a), VariableValue::Point(b)) => {
            Ok(EdgeValue::Vector((a + b) * half))
        }
        _ => Err(ConstraintError::KindTypeMismatch(kind)),
    }
}

/// Dual ascent step `lambda + beta * q(theta_i, theta_j)` on the gap between
/// the two exchanged copies.
pub fn dual_update<S: Real>(
    lambda: &DVector<S>,
    beta: S,
    theta_i: &VariableValue<S>,
    theta_j: &VariableValue<S>,
    kind: ConstraintKind,
) -> Result<DVector<S>, ConstraintError> {
    Ok(lambda + pairwise_gap(kind, theta_i, theta_j)? * beta)
}
