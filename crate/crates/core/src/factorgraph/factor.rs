use nalgebra::{DMatrix, DVector, Vector3};

use crate::manifold::{jr_inv, se3, Pose, Tangent, VariableValue};
use crate::mesa::constraint::{constraint_eval, ConstraintKind, EdgeValue};
use crate::scalar::{cast, Real};

use super::{FactorGraphError, NoiseModel, Values, VariableKey};

/// Central-difference step for the default numerical Jacobians.
const FD_STEP: f64 = 1e-6;

/// A measurement term of the nonlinear least-squares objective.
#[derive(Debug, Clone)]
pub enum Factor<S: Real> {
    PriorPose {
        key: VariableKey,
        measured: Pose<S>,
        noise: NoiseModel<S>,
    },
    BetweenPose {
        from: VariableKey,
        to: VariableKey,
        measured: Pose<S>,
        noise: NoiseModel<S>,
    },
    /// Scalar distance between the positions of two variables (pose
    /// translations or points).
    Range {
        from: VariableKey,
        to: VariableKey,
        measured: S,
        noise: NoiseModel<S>,
    },
    /// Bearing (azimuth, plus elevation in 3D) and distance from a pose to
    /// another variable's position, expressed in the observing pose's frame.
    BearingRange {
        from: VariableKey,
        to: VariableKey,
        bearing: DVector<S>,
        range: S,
        noise: NoiseModel<S>,
    },
    /// Consensus term `(beta/2) ||q(theta, z) + lambda/beta||^2`, i.e. a
    /// unary factor with residual `q(theta, z) + lambda/beta` and noise
    /// covariance `(1/beta) I`.
    BiasedPrior {
        key: VariableKey,
        kind: ConstraintKind,
        z: EdgeValue<S>,
        lambda: DVector<S>,
        beta: S,
    },
}

/// Whitened Jacobian blocks and residual of one factor.
#[derive(Debug, Clone)]
pub struct Linearized<S: Real> {
    pub keys: Vec<VariableKey>,
    pub jacobians: Vec<DMatrix<S>>,
    pub residual: DVector<S>,
}

impl<S: Real> Factor<S> {
    pub fn prior(key: VariableKey, measured: Pose<S>, noise: NoiseModel<S>) -> Self {
        Factor::PriorPose { key, measured, noise }
    }

    pub fn between(from: VariableKey, to: VariableKey, measured: Pose<S>, noise: NoiseModel<S>) -> Self {
        Factor::BetweenPose { from, to, measured, noise }
    }

    pub fn range(from: VariableKey, to: VariableKey, measured: S, noise: NoiseModel<S>) -> Self {
        Factor::Range { from, to, measured, noise }
    }

    pub fn bearing_range(
        from: VariableKey,
        to: VariableKey,
        bearing: DVector<S>,
        range: S,
        noise: NoiseModel<S>,
    ) -> Self {
        Factor::BearingRange { from, to, bearing, range, noise }
    }

    pub fn keys(&self) -> Vec<VariableKey> {
        match self {
            Factor::PriorPose { key, .. } | Factor::BiasedPrior { key, .. } => vec![*key],
            Factor::BetweenPose { from, to, .. }
            | Factor::Range { from, to, .. }
            | Factor::BearingRange { from, to, .. } => vec![*from, *to],
        }
    }

    pub fn noise_model(&self) -> NoiseModel<S> {
        match self {
            Factor::PriorPose { noise, .. }
            | Factor::BetweenPose { noise, .. }
            | Factor::Range { noise, .. }
            | Factor::BearingRange { noise, .. } => noise.clone(),
            Factor::BiasedPrior { lambda, beta, .. } => {
                NoiseModel::isotropic_precision(lambda.len(), *beta)
            }
        }
    }

    /// True for factors whose keys span two robots.
    pub fn is_inter_robot(&self) -> bool {
        let keys = self.keys();
        keys.len() == 2 && keys[0].robot != keys[1].robot
    }

    /// Unwhitened residual given this factor's variables in `keys()` order.
    pub fn residual_at(&self, vars: &[VariableValue<S>]) -> Result<DVector<S>, FactorGraphError> {
        match self {
            Factor::PriorPose { key, measured, .. } => {
                let pose = expect_pose(&vars[0], *key)?;
                Ok(measured.between(pose).log_map()?.into_vector())
            }
            Factor::BetweenPose { from, to, measured, .. } => {
                let a = expect_pose(&vars[0], *from)?;
                let b = expect_pose(&vars[1], *to)?;
                Ok(measured.between(&a.between(b)).log_map()?.into_vector())
            }
            Factor::Range { measured, .. } => {
                let d = position(&vars[1]) - position(&vars[0]);
                Ok(DVector::from_column_slice(&[d.norm() - *measured]))
            }
            Factor::BearingRange { from, bearing, range, .. } => {
                let pose = expect_pose(&vars[0], *from)?;
                let (predicted, distance) = bearing_range_of(pose, &position(&vars[1]));
                let mut r = DVector::zeros(bearing.len() + 1);
                for i in 0..bearing.len() {
                    r[i] = wrap_angle(predicted[i] - bearing[i]);
                }
                r[bearing.len()] = distance - *range;
                Ok(r)
            }
            Factor::BiasedPrior { kind, z, lambda, beta, .. } => {
                let q = constraint_eval(*kind, &vars[0], z)?;
                Ok(q + lambda * (S::one() / *beta))
            }
        }
    }

    pub fn residual(&self, values: &Values<S>) -> Result<DVector<S>, FactorGraphError> {
        let vars = self.gather(values)?;
        self.residual_at(&vars)
    }

    pub fn whitened_residual(&self, values: &Values<S>) -> Result<DVector<S>, FactorGraphError> {
        let mut r = self.residual(values)?;
        self.noise_model().whiten_vector(&mut r);
        Ok(r)
    }

    /// Whitened Jacobian blocks (with respect to each variable's tangent,
    /// via retract) and whitened residual.
    pub fn linearize(&self, values: &Values<S>) -> Result<Linearized<S>, FactorGraphError> {
        let keys = self.keys();
        let vars = self.gather(values)?;
        let mut residual = self.residual_at(&vars)?;
        let mut jacobians = match self {
            Factor::PriorPose { .. } => {
                let tangent = Tangent::new(residual.clone()).expect("pose tangent dims");
                vec![jr_inv(&tangent)]
            }
            Factor::BetweenPose { from, to, .. } => {
                let a = expect_pose(&vars[0], *from)?;
                let b = expect_pose(&vars[1], *to)?;
                let predicted = a.between(b);
                let tangent = Tangent::new(residual.clone()).expect("pose tangent dims");
                let j_to = jr_inv(&tangent);
                let j_from = -(&j_to * predicted.inverse().adjoint_matrix());
                vec![j_from, j_to]
            }
            Factor::Range { .. } | Factor::BearingRange { .. } => {
                self.numerical_jacobians(&vars, residual.len())?
            }
            Factor::BiasedPrior { key, kind, lambda, beta, .. } => {
                let q = &residual - lambda * (S::one() / *beta);
                vec![biased_prior_jacobian(*kind, &vars[0], &q, *key)?]
            }
        };
        let noise = self.noise_model();
        noise.whiten_vector(&mut residual);
        for j in &mut jacobians {
            noise.whiten_matrix(j);
        }
        Ok(Linearized { keys, jacobians, residual })
    }

    fn gather(&self, values: &Values<S>) -> Result<Vec<VariableValue<S>>, FactorGraphError> {
        self.keys()
            .iter()
            .map(|k| values.try_get(k).cloned())
            .collect()
    }

    fn numerical_jacobians(
        &self,
        vars: &[VariableValue<S>],
        rdim: usize,
    ) -> Result<Vec<DMatrix<S>>, FactorGraphError> {
        let h: S = cast(FD_STEP);
        let two_h = h + h;
        let mut out = Vec::with_capacity(vars.len());
        let mut scratch = vars.to_vec();
        for vi in 0..vars.len() {
            let dof = vars[vi].dof();
            let mut jac = DMatrix::zeros(rdim, dof);
            let mut delta = vec![S::zero(); dof];
            for k in 0..dof {
                delta[k] = h;
                scratch[vi] = vars[vi].retract(&delta)?;
                let rp = self.residual_at(&scratch)?;
                delta[k] = -h;
                scratch[vi] = vars[vi].retract(&delta)?;
                let rm = self.residual_at(&scratch)?;
                delta[k] = S::zero();
                jac.set_column(k, &((rp - rm) / two_h));
            }
            scratch[vi] = vars[vi].clone();
            out.push(jac);
        }
        Ok(out)
    }
}

fn expect_pose<'a, S: Real>(
    value: &'a VariableValue<S>,
    key: VariableKey,
) -> Result<&'a Pose<S>, FactorGraphError> {
    value
        .as_pose()
        .ok_or(FactorGraphError::WrongVariableType { key, expected: "pose" })
}

fn position<S: Real>(value: &VariableValue<S>) -> DVector<S> {
    match value {
        VariableValue::Pose(p) => p.translation(),
        VariableValue::Point(v) => v.clone(),
    }
}

fn rotate_into_frame<S: Real>(pose: &Pose<S>, world: &DVector<S>) -> DVector<S> {
    let r = pose.rotation_dmatrix();
    r.transpose() * world
}

fn wrap_angle<S: Real>(a: S) -> S {
    let pi = S::pi();
    let two_pi = pi + pi;
    let mut x = a;
    while x > pi {
        x -= two_pi;
    }
    while x <= -pi {
        x += two_pi;
    }
    x
}

/// Bearing (azimuth [, elevation]) and range of a world-frame target as seen
/// from `pose`, using the same frame conventions as the BearingRange factor.
pub(crate) fn bearing_range_of<S: Real>(pose: &Pose<S>, target: &DVector<S>) -> (DVector<S>, S) {
    let local = rotate_into_frame(pose, &(target - pose.translation()));
    let mut bearing = DVector::zeros(local.len() - 1);
    bearing[0] = local[1].atan2(local[0]);
    if local.len() == 3 {
        let horiz = (local[0] * local[0] + local[1] * local[1]).sqrt();
        bearing[1] = local[2].atan2(horiz);
    }
    (bearing, local.norm())
}

/// Analytic Jacobian of the biased-prior residual with respect to the
/// variable's tangent. `q` is the constraint part of the residual (bias
/// excluded; the bias is constant).
fn biased_prior_jacobian<S: Real>(
    kind: ConstraintKind,
    theta: &VariableValue<S>,
    q: &DVector<S>,
    key: VariableKey,
) -> Result<DMatrix<S>, FactorGraphError> {
    match kind {
        ConstraintKind::Geodesic => {
            let tangent = Tangent::new(q.clone()).expect("pose tangent dims");
            Ok(jr_inv(&tangent))
        }
        ConstraintKind::ApproxGeodesic => {
            let pose = expect_pose(theta, key)?;
            Ok(jr_inv(&pose.log_map()?))
        }
        ConstraintKind::Split => {
            let pose = expect_pose(theta, key)?;
            let dof = pose.dof();
            let n = pose.ambient_dim();
            let rot_dof = dof - n;
            let mut j = DMatrix::zeros(dof, dof);
            if rot_dof == 1 {
                j[(0, 0)] = S::one();
            } else {
                let omega = Vector3::from_column_slice(&q.as_slice()[..3]);
                j.view_mut((0, 0), (3, 3))
                    .copy_from(&se3::so3_right_jacobian_inv(&omega));
            }
            j.view_mut((rot_dof, rot_dof), (n, n))
                .copy_from(&pose.rotation_dmatrix());
            Ok(j)
        }
        ConstraintKind::Chordal => {
            let pose = expect_pose(theta, key)?;
            let n = pose.ambient_dim();
            let rot_dof = pose.dof() - n;
            let rot_jac = pose.chordal_rotation_jacobian();
            let mut j = DMatrix::zeros(n * n + n, pose.dof());
            j.view_mut((0, 0), (n * n, rot_dof)).copy_from(&rot_jac);
            j.view_mut((n * n, rot_dof), (n, n))
                .copy_from(&pose.rotation_dmatrix());
            Ok(j)
        }
        ConstraintKind::Linear => {
            let dim = theta.dof();
            Ok(DMatrix::identity(dim, dim))
        }
    }
}
