//! Pose manifolds and tangent-space operations.
//!
//! Poses live on SE(2) or SE(3); tangent coefficients are ordered rotation
//! first (`[theta, rho]` / `[omega, rho]`), following the convention in Sola
//! et al., "A micro Lie theory for state estimation in robotics".

pub(crate) mod se2;
pub(crate) mod se3;

use nalgebra::{
    DMatrix, DVector, IsometryMatrix2, IsometryMatrix3, Rotation2, Rotation3, Translation2,
    Translation3, Vector2, Vector3, Vector6,
};
use thiserror::Error;

use crate::scalar::{cast, Real};

/// Margin around pi inside which rotation logarithms are rejected instead of
/// silently returning a branch-cut value.
pub const ANGLE_NEAR_PI_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifoldError {
    /// The rotation angle is within [`ANGLE_NEAR_PI_MARGIN`] of pi, where the
    /// log map sits on its branch cut and geodesic midpoints are not unique.
    #[error("rotation angle within {ANGLE_NEAR_PI_MARGIN} of pi; log map undefined")]
    AngleNearPi,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tangent dimension must be 3 or 6, got {0}")]
    InvalidTangentDimension(usize),
}

/// Tangent-space coefficients of a pose, dimension 3 (SE(2)) or 6 (SE(3)).
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent<S: Real>(DVector<S>);

impl<S: Real> Tangent<S> {
    pub fn new(v: DVector<S>) -> Result<Self, ManifoldError> {
        match v.len() {
            3 | 6 => Ok(Self(v)),
            n => Err(ManifoldError::InvalidTangentDimension(n)),
        }
    }

    pub fn from_slice(coeffs: &[S]) -> Result<Self, ManifoldError> {
        Self::new(DVector::from_column_slice(coeffs))
    }

    pub fn zeros(dof: usize) -> Result<Self, ManifoldError> {
        Self::new(DVector::zeros(dof))
    }

    pub fn dof(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<S> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<S> {
        self.0
    }
}

/// A rigid-body pose on SE(2) or SE(3).
#[derive(Debug, Clone, PartialEq)]
pub enum Pose<S: Real> {
    Se2(IsometryMatrix2<S>),
    Se3(IsometryMatrix3<S>),
}

impl<S: Real> Pose<S> {
    pub fn identity_se2() -> Self {
        Pose::Se2(IsometryMatrix2::identity())
    }

    pub fn identity_se3() -> Self {
        Pose::Se3(IsometryMatrix3::identity())
    }

    pub fn se2(x: S, y: S, theta: S) -> Self {
        Pose::Se2(IsometryMatrix2::from_parts(
            Translation2::new(x, y),
            Rotation2::new(theta),
        ))
    }

    pub fn se3(rotation: Rotation3<S>, translation: Vector3<S>) -> Self {
        Pose::Se3(IsometryMatrix3::from_parts(
            Translation3::from(translation),
            rotation,
        ))
    }

    /// Degrees of freedom: 3 on SE(2), 6 on SE(3).
    pub fn dof(&self) -> usize {
        match self {
            Pose::Se2(_) => 3,
            Pose::Se3(_) => 6,
        }
    }

    /// Ambient dimension N of the translation component.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Pose::Se2(_) => 2,
            Pose::Se3(_) => 3,
        }
    }

    pub fn translation(&self) -> DVector<S> {
        match self {
            Pose::Se2(iso) => DVector::from_column_slice(iso.translation.vector.as_slice()),
            Pose::Se3(iso) => DVector::from_column_slice(iso.translation.vector.as_slice()),
        }
    }

    /// Rotation angle: signed in (-pi, pi] on SE(2), magnitude in [0, pi] on SE(3).
    pub fn rotation_angle(&self) -> S {
        match self {
            Pose::Se2(iso) => iso.rotation.angle(),
            Pose::Se3(iso) => se3::so3_angle(&iso.rotation),
        }
    }

    /// Group composition. Both poses must live on the same manifold.
    pub fn compose(&self, other: &Self) -> Self {
        match (self, other) {
            (Pose::Se2(a), Pose::Se2(b)) => Pose::Se2(a * b),
            (Pose::Se3(a), Pose::Se3(b)) => Pose::Se3(a * b),
            _ => panic!("compose requires poses on the same manifold"),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            Pose::Se2(iso) => Pose::Se2(iso.inverse()),
            Pose::Se3(iso) => Pose::Se3(iso.inverse()),
        }
    }

    /// Relative pose `self^-1 * other`.
    pub fn between(&self, other: &Self) -> Self {
        self.inverse().compose(other)
    }

    pub fn exp_map(xi: &Tangent<S>) -> Self {
        match xi.dof() {
            3 => {
                let v = Vector3::from_column_slice(xi.as_vector().as_slice());
                let (rot, trans) = se2::exp(&v);
                Pose::Se2(IsometryMatrix2::from_parts(trans.into(), rot))
            }
            _ => {
                let v = Vector6::from_column_slice(xi.as_vector().as_slice());
                let (rot, trans) = se3::exp(&v);
                Pose::Se3(IsometryMatrix3::from_parts(trans.into(), rot))
            }
        }
    }

    pub fn log_map(&self) -> Result<Tangent<S>, ManifoldError> {
        let margin: S = cast(ANGLE_NEAR_PI_MARGIN);
        match self {
            Pose::Se2(iso) => {
                let angle = iso.rotation.angle();
                if S::pi() - angle.abs() < margin {
                    return Err(ManifoldError::AngleNearPi);
                }
                let xi = se2::log(&iso.rotation, &iso.translation.vector);
                Ok(Tangent(DVector::from_column_slice(xi.as_slice())))
            }
            Pose::Se3(iso) => {
                if S::pi() - se3::so3_angle(&iso.rotation) < margin {
                    return Err(ManifoldError::AngleNearPi);
                }
                let xi = se3::log(&iso.rotation, &iso.translation.vector);
                Ok(Tangent(DVector::from_column_slice(xi.as_slice())))
            }
        }
    }

    /// Right-plus update `self * Exp(delta)`.
    pub fn retract(&self, delta: &[S]) -> Result<Self, ManifoldError> {
        if delta.len() != self.dof() {
            return Err(ManifoldError::DimensionMismatch {
                expected: self.dof(),
                got: delta.len(),
            });
        }
        let xi = Tangent::from_slice(delta)?;
        Ok(self.compose(&Self::exp_map(&xi)))
    }

    /// Pose interpolation: linear in translation, geodesic in rotation.
    /// `t = 0` returns `self`, `t = 1` returns `other`.
    pub fn split_interpolate(&self, other: &Self, t: S) -> Result<Self, ManifoldError> {
        let margin: S = cast(ANGLE_NEAR_PI_MARGIN);
        let s = S::one() - t;
        match (self, other) {
            (Pose::Se2(a), Pose::Se2(b)) => {
                let rel = a.rotation.inverse() * b.rotation;
                if S::pi() - rel.angle().abs() < margin {
                    return Err(ManifoldError::AngleNearPi);
                }
                let rot = a.rotation * Rotation2::new(t * rel.angle());
                let trans: Vector2<S> =
                    a.translation.vector * s + b.translation.vector * t;
                Ok(Pose::Se2(IsometryMatrix2::from_parts(trans.into(), rot)))
            }
            (Pose::Se3(a), Pose::Se3(b)) => {
                let rel = a.rotation.inverse() * b.rotation;
                if S::pi() - se3::so3_angle(&rel) < margin {
                    return Err(ManifoldError::AngleNearPi);
                }
                let omega = se3::so3_log(&rel) * t;
                let rot = a.rotation * se3::so3_exp(&omega);
                let trans: Vector3<S> =
                    a.translation.vector * s + b.translation.vector * t;
                Ok(Pose::Se3(IsometryMatrix3::from_parts(trans.into(), rot)))
            }
            _ => panic!("split_interpolate requires poses on the same manifold"),
        }
    }

    /// Chordal embedding: row-major rotation entries followed by translation
    /// (length N^2 + N). Identity on SE(2) maps to `[1, 0, 0, 1, 0, 0]`.
    pub fn chordal_vec(&self) -> DVector<S> {
        match self {
            Pose::Se2(iso) => {
                let m = iso.rotation.matrix();
                let t = &iso.translation.vector;
                DVector::from_column_slice(&[
                    m[(0, 0)],
                    m[(0, 1)],
                    m[(1, 0)],
                    m[(1, 1)],
                    t[0],
                    t[1],
                ])
            }
            Pose::Se3(iso) => {
                let m = iso.rotation.matrix();
                let t = &iso.translation.vector;
                let mut v = DVector::zeros(12);
                for i in 0..3 {
                    for j in 0..3 {
                        v[3 * i + j] = m[(i, j)];
                    }
                }
                for i in 0..3 {
                    v[9 + i] = t[i];
                }
                v
            }
        }
    }

    /// Rotation-only log `Log(R_self^-1 R_other)`, dimension 1 (SE(2)) or 3.
    pub(crate) fn rotation_log_between(&self, other: &Self) -> Result<DVector<S>, ManifoldError> {
        let margin: S = cast(ANGLE_NEAR_PI_MARGIN);
        match (self, other) {
            (Pose::Se2(a), Pose::Se2(b)) => {
                let rel = a.rotation.inverse() * b.rotation;
                if S::pi() - rel.angle().abs() < margin {
                    return Err(ManifoldError::AngleNearPi);
                }
                Ok(DVector::from_column_slice(&[rel.angle()]))
            }
            (Pose::Se3(a), Pose::Se3(b)) => {
                let rel = a.rotation.inverse() * b.rotation;
                if S::pi() - se3::so3_angle(&rel) < margin {
                    return Err(ManifoldError::AngleNearPi);
                }
                let w = se3::so3_log(&rel);
                Ok(DVector::from_column_slice(w.as_slice()))
            }
            _ => panic!("rotation_log_between requires poses on the same manifold"),
        }
    }

    pub(crate) fn rotation_dmatrix(&self) -> DMatrix<S> {
        match self {
            Pose::Se2(iso) => {
                let m = iso.rotation.matrix();
                DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
            }
            Pose::Se3(iso) => {
                let m = iso.rotation.matrix();
                DMatrix::from_fn(3, 3, |i, j| m[(i, j)])
            }
        }
    }

    /// Derivative of the row-major rotation entries of `self * Exp(delta)`
    /// with respect to the rotation coefficients of `delta`, at zero:
    /// column k is the row-major vectorization of `R * G_k` for generator G_k.
    pub(crate) fn chordal_rotation_jacobian(&self) -> DMatrix<S> {
        match self {
            Pose::Se2(iso) => {
                let rj = iso.rotation.matrix() * se2::j_mat();
                DMatrix::from_fn(4, 1, |i, _| rj[(i / 2, i % 2)])
            }
            Pose::Se3(iso) => {
                let r = iso.rotation.matrix();
                let cols: Vec<_> = (0..3)
                    .map(|k| {
                        let mut e = Vector3::zeros();
                        e[k] = S::one();
                        r * se3::hat(&e)
                    })
                    .collect();
                DMatrix::from_fn(9, 3, |i, k| cols[k][(i / 3, i % 3)])
            }
        }
    }

    pub(crate) fn adjoint_matrix(&self) -> DMatrix<S> {
        match self {
            Pose::Se2(iso) => {
                to_dmatrix3(se2::adjoint(&iso.rotation, &iso.translation.vector))
            }
            Pose::Se3(iso) => {
                to_dmatrix6(se3::adjoint(&iso.rotation, &iso.translation.vector))
            }
        }
    }
}

/// Inverse right Jacobian of Exp at `xi`, as a dof x dof matrix.
pub(crate) fn jr_inv<S: Real>(xi: &Tangent<S>) -> DMatrix<S> {
    match xi.dof() {
        3 => {
            let v = Vector3::from_column_slice(xi.as_vector().as_slice());
            to_dmatrix3(se2::right_jacobian_inv(&v))
        }
        _ => {
            let v = Vector6::from_column_slice(xi.as_vector().as_slice());
            to_dmatrix6(se3::right_jacobian_inv(&v))
        }
    }
}

fn to_dmatrix3<S: Real>(m: nalgebra::Matrix3<S>) -> DMatrix<S> {
    DMatrix::from_fn(3, 3, |i, j| m[(i, j)])
}

fn to_dmatrix6<S: Real>(m: nalgebra::Matrix6<S>) -> DMatrix<S> {
    DMatrix::from_fn(6, 6, |i, j| m[(i, j)])
}

/// A variable in the factor graph: a pose or a Euclidean point.
#[derive(Debug, Clone, PartialEq)]
pub enum VariableValue<S: Real> {
    Pose(Pose<S>),
    Point(DVector<S>),
}

impl<S: Real> VariableValue<S> {
    pub fn dof(&self) -> usize {
        match self {
            VariableValue::Pose(p) => p.dof(),
            VariableValue::Point(v) => v.len(),
        }
    }

    pub fn retract(&self, delta: &[S]) -> Result<Self, ManifoldError> {
        match self {
            VariableValue::Pose(p) => Ok(VariableValue::Pose(p.retract(delta)?)),
            VariableValue::Point(v) => {
                if delta.len() != v.len() {
                    return Err(ManifoldError::DimensionMismatch {
                        expected: v.len(),
                        got: delta.len(),
                    });
                }
                Ok(VariableValue::Point(v + DVector::from_column_slice(delta)))
            }
        }
    }

    pub fn as_pose(&self) -> Option<&Pose<S>> {
        match self {
            VariableValue::Pose(p) => Some(p),
            VariableValue::Point(_) => None,
        }
    }

    pub fn as_point(&self) -> Option<&DVector<S>> {
        match self {
            VariableValue::Point(v) => Some(v),
            VariableValue::Pose(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn chordal_vec_of_identity() {
        let v = Pose::<f64>::identity_se2().chordal_vec();
        assert_eq!(v.as_slice(), &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let v = Pose::<f64>::identity_se3().chordal_vec();
        let mut expect = vec![0.0; 12];
        expect[0] = 1.0;
        expect[4] = 1.0;
        expect[8] = 1.0;
        assert_eq!(v.as_slice(), &expect[..]);
    }

    #[test]
    fn log_map_rejects_angle_near_pi() {
        let p = Pose::se2(1.0, 2.0, std::f64::consts::PI - 1e-8);
        assert_eq!(p.log_map().unwrap_err(), ManifoldError::AngleNearPi);
        let q = Pose::se3(
            Rotation3::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI - 1e-8),
            Vector3::zeros(),
        );
        assert_eq!(q.log_map().unwrap_err(), ManifoldError::AngleNearPi);
    }

    #[test]
    fn split_interpolate_midpoint_is_symmetric() {
        let a = Pose::se3(
            Rotation3::from_euler_angles(0.3, -0.2, 0.9),
            Vector3::new(1.0, -2.0, 0.5),
        );
        let b = Pose::se3(
            Rotation3::from_euler_angles(-0.5, 0.4, 0.1),
            Vector3::new(-0.3, 0.8, 2.0),
        );
        let ab = a.split_interpolate(&b, 0.5).unwrap();
        let ba = b.split_interpolate(&a, 0.5).unwrap();
        let (Pose::Se3(x), Pose::Se3(y)) = (&ab, &ba) else {
            unreachable!()
        };
        assert_relative_eq!(x.to_matrix(), y.to_matrix(), epsilon = 1e-12);
        assert_relative_eq!(
            a.split_interpolate(&b, 0.0).unwrap().translation(),
            a.translation(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn retract_matches_compose_exp() {
        let p = Pose::se2(0.4, -1.0, 0.7);
        let delta = [0.1, -0.2, 0.05];
        let q = p.retract(&delta).unwrap();
        let xi = Tangent::from_slice(&delta).unwrap();
        assert_eq!(q, p.compose(&Pose::exp_map(&xi)));
        assert!(matches!(
            p.retract(&[0.0; 6]),
            Err(ManifoldError::DimensionMismatch { expected: 3, got: 6 })
        ));
    }

    #[test]
    fn tangent_dimension_is_validated() {
        assert!(Tangent::from_slice(&[0.0_f64; 3]).is_ok());
        assert!(Tangent::from_slice(&[0.0_f64; 6]).is_ok());
        assert_eq!(
            Tangent::from_slice(&[0.0_f64; 4]).unwrap_err(),
            ManifoldError::InvalidTangentDimension(4)
        );
    }
}
