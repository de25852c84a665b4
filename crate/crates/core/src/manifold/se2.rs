//! SE(2) internals: exponential/logarithm maps and tangent-space Jacobians.
//!
//! Tangent coefficients are ordered `[theta, rho_x, rho_y]` (rotation first).
//! Closed forms follow the conventions of Sola et al., "A micro Lie theory
//! for state estimation in robotics".

use nalgebra::{Matrix2, Matrix3, Rotation2, Vector2, Vector3};

use crate::scalar::{cast, Real};

/// 90-degree rotation generator of so(2).
pub fn j_mat<S: Real>() -> Matrix2<S> {
    Matrix2::new(S::zero(), -S::one(), S::one(), S::zero())
}

/// Coefficients a = sin(t)/t and b = (1-cos(t))/t with series fallback.
fn v_coeffs<S: Real>(theta: S) -> (S, S) {
    let t2 = theta * theta;
    if theta.abs() < cast(1e-4) {
        let a = S::one() - t2 * cast(1.0 / 6.0) + t2 * t2 * cast(1.0 / 120.0);
        let b = theta * cast(0.5) - theta * t2 * cast(1.0 / 24.0);
        (a, b)
    } else {
        ((theta.sin()) / theta, (S::one() - theta.cos()) / theta)
    }
}

/// V(theta) such that translation of Exp([theta; rho]) equals V(theta) * rho.
pub fn v_matrix<S: Real>(theta: S) -> Matrix2<S> {
    let (a, b) = v_coeffs(theta);
    Matrix2::new(a, -b, b, a)
}

pub fn v_matrix_inv<S: Real>(theta: S) -> Matrix2<S> {
    let (a, b) = v_coeffs(theta);
    let det = a * a + b * b;
    Matrix2::new(a, b, -b, a) / det
}

pub fn exp<S: Real>(xi: &Vector3<S>) -> (Rotation2<S>, Vector2<S>) {
    let theta = xi[0];
    let rho = Vector2::new(xi[1], xi[2]);
    (Rotation2::new(theta), v_matrix(theta) * rho)
}

/// Inverse of [`exp`]. The caller guards the angle-near-pi branch cut.
pub fn log<S: Real>(rot: &Rotation2<S>, trans: &Vector2<S>) -> Vector3<S> {
    let theta = rot.angle();
    let rho = v_matrix_inv(theta) * trans;
    Vector3::new(theta, rho[0], rho[1])
}

/// Left Jacobian of Exp at `xi`, ordering `[theta; rho]`.
///
/// The coupling column is W * (-J rho) with W = w1 I + w2 J, derived from the
/// series sum_{m>=0} (theta J)^m / (m+2)!.
pub fn left_jacobian<S: Real>(xi: &Vector3<S>) -> Matrix3<S> {
    let theta = xi[0];
    let rho = Vector2::new(xi[1], xi[2]);
    let t2 = theta * theta;
    let (w1, w2) = if theta.abs() < cast(1e-4) {
        (
            cast::<S>(0.5) - t2 * cast(1.0 / 24.0),
            theta * cast(1.0 / 6.0) - theta * t2 * cast(1.0 / 120.0),
        )
    } else {
        ((S::one() - theta.cos()) / t2, (theta - theta.sin()) / t2)
    };
    let w = Matrix2::new(w1, -w2, w2, w1);
    let u = w * (-(j_mat() * rho));
    let v = v_matrix(theta);
    let mut out = Matrix3::zeros();
    out[(0, 0)] = S::one();
    out.fixed_view_mut::<2, 1>(1, 0).copy_from(&u);
    out.fixed_view_mut::<2, 2>(1, 1).copy_from(&v);
    out
}

pub fn left_jacobian_inv<S: Real>(xi: &Vector3<S>) -> Matrix3<S> {
    let jl = left_jacobian(xi);
    let u = jl.fixed_view::<2, 1>(1, 0).into_owned();
    let theta = xi[0];
    let v_inv = v_matrix_inv(theta);
    let mut out = Matrix3::zeros();
    out[(0, 0)] = S::one();
    out.fixed_view_mut::<2, 1>(1, 0).copy_from(&(-(v_inv * u)));
    out.fixed_view_mut::<2, 2>(1, 1).copy_from(&v_inv);
    out
}

pub fn right_jacobian_inv<S: Real>(xi: &Vector3<S>) -> Matrix3<S> {
    left_jacobian_inv(&(-xi))
}

/// Adjoint of (R, t) in `[theta; rho]` ordering: [[1, 0], [-J t, R]].
pub fn adjoint<S: Real>(rot: &Rotation2<S>, trans: &Vector2<S>) -> Matrix3<S> {
    let mut out = Matrix3::zeros();
    out[(0, 0)] = S::one();
    let col = -(j_mat() * trans);
    out.fixed_view_mut::<2, 1>(1, 0).copy_from(&col);
    out.fixed_view_mut::<2, 2>(1, 1)
        .copy_from(rot.matrix());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_log_round_trip() {
        let xi = Vector3::new(0.9_f64, -1.2, 2.3);
        let (r, t) = exp(&xi);
        assert_relative_eq!(log(&r, &t), xi, epsilon = 1e-12);
    }

    #[test]
    fn v_matrix_inverse_is_inverse() {
        for &theta in &[1e-9_f64, 1e-5, 0.3, -2.8] {
            let prod = v_matrix(theta) * v_matrix_inv(theta);
            assert_relative_eq!(prod, Matrix2::identity(), epsilon = 1e-12);
        }
    }

    // Finite-difference check of Jl: Exp(xi + d) ~ Exp(Jl d) * Exp(xi).
    #[test]
    fn left_jacobian_matches_finite_differences() {
        let xi = Vector3::new(0.7_f64, 0.4, -1.1);
        let jl = left_jacobian(&xi);
        let h = 1e-6;
        for k in 0..3 {
            let mut dp = xi;
            dp[k] += h;
            let mut dm = xi;
            dm[k] -= h;
            let (rp, tp) = exp(&dp);
            let (rm, tm) = exp(&dm);
            let (r0, t0) = exp(&xi);
            // column k of Jl = Log(Exp(xi+h e_k) * Exp(xi)^-1) / h (central)
            let r0_inv = r0.inverse();
            let lp = log(&(rp * r0_inv), &(tp - (rp * r0_inv) * t0));
            let lm = log(&(rm * r0_inv), &(tm - (rm * r0_inv) * t0));
            let col = (lp - lm) / (2.0 * h);
            assert_relative_eq!(col, jl.column(k).into_owned(), epsilon = 1e-6);
        }
    }
}
