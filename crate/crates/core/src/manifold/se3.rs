//! SE(3) internals: exponential/logarithm maps and tangent-space Jacobians.
//!
//! Tangent coefficients are ordered `[omega; rho]` (rotation first). Rotation
//! maps use the Rodrigues form; the translation-rotation coupling block of the
//! SE(3) Jacobian follows Barfoot, "State Estimation for Robotics", ch. 7.

use nalgebra::{Matrix3, Matrix6, Rotation3, Vector3, Vector6};

use crate::scalar::{cast, Real};

pub fn hat<S: Real>(w: &Vector3<S>) -> Matrix3<S> {
    Matrix3::new(
        S::zero(),
        -w[2],
        w[1],
        w[2],
        S::zero(),
        -w[0],
        -w[1],
        w[0],
        S::zero(),
    )
}

fn rotation_coeffs<S: Real>(theta: S) -> (S, S) {
    let t2 = theta * theta;
    if theta.abs() < cast(1e-4) {
        (
            S::one() - t2 * cast(1.0 / 6.0) + t2 * t2 * cast(1.0 / 120.0),
            cast::<S>(0.5) - t2 * cast(1.0 / 24.0) + t2 * t2 * cast(1.0 / 720.0),
        )
    } else {
        (theta.sin() / theta, (S::one() - theta.cos()) / t2)
    }
}

pub fn so3_exp<S: Real>(omega: &Vector3<S>) -> Rotation3<S> {
    let theta = omega.norm();
    let (a, b) = rotation_coeffs(theta);
    let o = hat(omega);
    let m = Matrix3::identity() + o * a + o * o * b;
    Rotation3::from_matrix_unchecked(m)
}

/// Rotation angle in [0, pi].
pub fn so3_angle<S: Real>(rot: &Rotation3<S>) -> S {
    let m = rot.matrix();
    let skew = Vector3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    ) * cast::<S>(0.5);
    let cos = ((m.trace() - S::one()) * cast(0.5)).clamp(-S::one(), S::one());
    skew.norm().atan2(cos)
}

/// Rotation log. The caller guards the angle-near-pi branch cut; below it the
/// skew-part formula stays accurate because sin(theta) >= the guard margin.
pub fn so3_log<S: Real>(rot: &Rotation3<S>) -> Vector3<S> {
    let m = rot.matrix();
    let skew = Vector3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    ) * cast::<S>(0.5);
    let cos = ((m.trace() - S::one()) * cast(0.5)).clamp(-S::one(), S::one());
    let sin = skew.norm();
    let theta = sin.atan2(cos);
    if theta < cast(1e-7) {
        skew
    } else {
        skew * (theta / sin)
    }
}

/// V(omega): translation factor of Exp (equals the SO(3) left Jacobian).
pub fn so3_left_jacobian<S: Real>(omega: &Vector3<S>) -> Matrix3<S> {
    let theta = omega.norm();
    let t2 = theta * theta;
    let (b, c) = if theta < cast(1e-4) {
        (
            cast::<S>(0.5) - t2 * cast(1.0 / 24.0) + t2 * t2 * cast(1.0 / 720.0),
            cast::<S>(1.0 / 6.0) - t2 * cast(1.0 / 120.0) + t2 * t2 * cast(1.0 / 5040.0),
        )
    } else {
        ((S::one() - theta.cos()) / t2, (theta - theta.sin()) / (t2 * theta))
    };
    let o = hat(omega);
    Matrix3::identity() + o * b + o * o * c
}

pub fn so3_left_jacobian_inv<S: Real>(omega: &Vector3<S>) -> Matrix3<S> {
    let theta = omega.norm();
    let t2 = theta * theta;
    let c = if theta < cast(1e-4) {
        cast::<S>(1.0 / 12.0) + t2 * cast(1.0 / 720.0)
    } else {
        S::one() / t2 - (S::one() + theta.cos()) / ((theta + theta) * theta.sin())
    };
    let o = hat(omega);
    Matrix3::identity() - o * cast::<S>(0.5) + o * o * c
}

pub fn so3_right_jacobian_inv<S: Real>(omega: &Vector3<S>) -> Matrix3<S> {
    so3_left_jacobian_inv(&(-omega))
}

pub fn exp<S: Real>(xi: &Vector6<S>) -> (Rotation3<S>, Vector3<S>) {
    let omega = xi.fixed_rows::<3>(0).into_owned();
    let rho = xi.fixed_rows::<3>(3).into_owned();
    (so3_exp(&omega), so3_left_jacobian(&omega) * rho)
}

pub fn log<S: Real>(rot: &Rotation3<S>, trans: &Vector3<S>) -> Vector6<S> {
    let omega = so3_log(rot);
    let rho = so3_left_jacobian_inv(&omega) * trans;
    let mut out = Vector6::zeros();
    out.fixed_rows_mut::<3>(0).copy_from(&omega);
    out.fixed_rows_mut::<3>(3).copy_from(&rho);
    out
}

/// Translation-rotation coupling block of the SE(3) left Jacobian.
fn q_block<S: Real>(omega: &Vector3<S>, rho: &Vector3<S>) -> Matrix3<S> {
    let theta = omega.norm();
    let t2 = theta * theta;
    let (c1, c2, c3) = if theta < cast(1e-2) {
        let c1 = cast::<S>(1.0 / 6.0) - t2 * cast(1.0 / 120.0) + t2 * t2 * cast(1.0 / 5040.0);
        let c2 = -cast::<S>(1.0 / 24.0) + t2 * cast(1.0 / 720.0) - t2 * t2 * cast(1.0 / 40320.0);
        let inner = -cast::<S>(1.0 / 120.0) + t2 * cast(1.0 / 5040.0) - t2 * t2 * cast(1.0 / 362880.0);
        (c1, c2, c2 - inner * cast(3.0))
    } else {
        let c1 = (theta - theta.sin()) / (t2 * theta);
        let c2 = (S::one() - t2 * cast(0.5) - theta.cos()) / (t2 * t2);
        let inner = (theta - theta.sin() - t2 * theta * cast(1.0 / 6.0)) / (t2 * t2 * theta);
        (c1, c2, c2 - inner * cast(3.0))
    };
    let o = hat(omega);
    let p = hat(rho);
    let op = o * p;
    let po = p * o;
    let opo = op * o;
    let half: S = cast(0.5);
    let three: S = cast(3.0);
    p * half + (op + po + o * po) * c1 - (o * op + po * o - opo * three) * c2
        - (opo * o + o * opo) * (c3 * half)
}

/// SE(3) left Jacobian in `[omega; rho]` ordering: [[Jl, 0], [Q, Jl]].
pub fn left_jacobian<S: Real>(xi: &Vector6<S>) -> Matrix6<S> {
    let omega = xi.fixed_rows::<3>(0).into_owned();
    let rho = xi.fixed_rows::<3>(3).into_owned();
    let jl = so3_left_jacobian(&omega);
    let q = q_block(&omega, &rho);
    let mut out = Matrix6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&jl);
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&q);
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(&jl);
    out
}

pub fn left_jacobian_inv<S: Real>(xi: &Vector6<S>) -> Matrix6<S> {
    let omega = xi.fixed_rows::<3>(0).into_owned();
    let rho = xi.fixed_rows::<3>(3).into_owned();
    let jl_inv = so3_left_jacobian_inv(&omega);
    let q = q_block(&omega, &rho);
    let coupling = -(jl_inv * q * jl_inv);
    let mut out = Matrix6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&jl_inv);
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&coupling);
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(&jl_inv);
    out
}

pub fn right_jacobian_inv<S: Real>(xi: &Vector6<S>) -> Matrix6<S> {
    left_jacobian_inv(&(-xi))
}

/// Adjoint of (R, t) in `[omega; rho]` ordering: [[R, 0], [t^ R, R]].
pub fn adjoint<S: Real>(rot: &Rotation3<S>, trans: &Vector3<S>) -> Matrix6<S> {
    let r = rot.matrix();
    let tr = hat(trans) * r;
    let mut out = Matrix6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&tr);
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
    out
}
