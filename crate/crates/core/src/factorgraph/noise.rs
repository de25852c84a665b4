use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::scalar::{cast, Real};

use super::FactorGraphError;

/// Gaussian measurement noise, stored as the square-root information
/// (whitening) matrix `W = Sigma^{-1/2}` so that the whitened residual is
/// `W r` and the cost contribution is `0.5 * ||W r||^2`.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel<S: Real> {
    /// Diagonal sqrt-information entries (1/sigma per component).
    Diagonal(DVector<S>),
    /// Full sqrt-information matrix (upper triangular from a Cholesky of the
    /// information matrix, but any square root is accepted).
    Full(DMatrix<S>),
}

impl<S: Real> NoiseModel<S> {
    pub fn unit(dim: usize) -> Self {
        NoiseModel::Diagonal(DVector::from_element(dim, S::one()))
    }

    /// Isotropic noise with standard deviation `sigma` per component.
    pub fn isotropic(dim: usize, sigma: S) -> Self {
        assert!(sigma > S::zero(), "sigma must be positive");
        NoiseModel::Diagonal(DVector::from_element(dim, S::one() / sigma))
    }

    /// Isotropic noise with covariance `(1/beta) I`, i.e. sqrt-information
    /// `sqrt(beta) I`.
    pub fn isotropic_precision(dim: usize, beta: S) -> Self {
        assert!(beta > S::zero(), "beta must be positive");
        NoiseModel::Diagonal(DVector::from_element(dim, beta.sqrt()))
    }

    /// Per-component standard deviations.
    pub fn from_sigmas(sigmas: &[S]) -> Self {
        assert!(sigmas.iter().all(|s| *s > S::zero()), "sigmas must be positive");
        NoiseModel::Diagonal(DVector::from_iterator(
            sigmas.len(),
            sigmas.iter().map(|s| S::one() / *s),
        ))
    }

    /// Build from an information (inverse covariance) matrix via Cholesky
    /// `Lambda = L L^T`, whitening with `W = L^T`.
    pub fn from_information(info: &DMatrix<S>) -> Result<Self, FactorGraphError> {
        assert_eq!(info.nrows(), info.ncols(), "information matrix must be square");
        let sym = (info + info.transpose()) * cast::<S>(0.5);
        let chol: Cholesky<S, Dyn> =
            Cholesky::new(sym).ok_or(FactorGraphError::InformationNotPositiveDefinite)?;
        Ok(NoiseModel::Full(chol.l().transpose()))
    }

    /// Build from a square-root information matrix, i.e. the whitening matrix
    /// itself. A matrix with zero off-diagonal entries collapses to the
    /// diagonal representation.
    pub fn from_sqrt_information(w: DMatrix<S>) -> Self {
        assert_eq!(w.nrows(), w.ncols(), "sqrt information must be square");
        let diagonal = (0..w.nrows())
            .all(|i| (0..w.ncols()).all(|j| i == j || w[(i, j)] == S::zero()));
        if diagonal {
            NoiseModel::Diagonal(w.diagonal())
        } else {
            NoiseModel::Full(w)
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            NoiseModel::Diagonal(d) => d.len(),
            NoiseModel::Full(m) => m.nrows(),
        }
    }

    /// The whitening matrix `W` as a dense matrix.
    pub fn sqrt_information(&self) -> DMatrix<S> {
        match self {
            NoiseModel::Diagonal(d) => DMatrix::from_diagonal(d),
            NoiseModel::Full(w) => w.clone(),
        }
    }

    /// The information matrix `W^T W`.
    pub fn information(&self) -> DMatrix<S> {
        match self {
            NoiseModel::Diagonal(d) => DMatrix::from_diagonal(&d.map(|x| x * x)),
            NoiseModel::Full(w) => w.transpose() * w,
        }
    }

    pub fn whiten_vector(&self, r: &mut DVector<S>) {
        match self {
            NoiseModel::Diagonal(d) => r.component_mul_assign(d),
            NoiseModel::Full(w) => *r = w * &*r,
        }
    }

    pub fn whiten_matrix(&self, j: &mut DMatrix<S>) {
        match self {
            NoiseModel::Diagonal(d) => {
                for (i, row) in d.iter().enumerate() {
                    j.row_mut(i).scale_mut(*row);
                }
            }
            NoiseModel::Full(w) => *j = w * &*j,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn information_round_trip_preserves_mahalanobis_norm() {
        let info = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let noise = NoiseModel::from_information(&info).unwrap();
        let r = DVector::from_column_slice(&[0.3, -1.2, 0.7]);
        let mut w = r.clone();
        noise.whiten_vector(&mut w);
        let direct = (r.transpose() * &info * &r)[(0, 0)];
        assert_relative_eq!(w.norm_squared(), direct, epsilon = 1e-12);
    }

    #[test]
    fn non_positive_definite_information_is_rejected() {
        let info = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            NoiseModel::<f64>::from_information(&info),
            Err(FactorGraphError::InformationNotPositiveDefinite)
        ));
    }

    #[test]
    fn diagonal_whitening_scales_rows() {
        let noise = NoiseModel::from_sigmas(&[0.5, 2.0]);
        let mut j = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        noise.whiten_matrix(&mut j);
        assert_relative_eq!(j[(0, 0)], 2.0);
        assert_relative_eq!(j[(1, 1)], 0.5);
    }
}
