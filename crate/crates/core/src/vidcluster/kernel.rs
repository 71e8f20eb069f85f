//! Discriminative clustering cost.
//!
//! For a labeling `Z` (`T x K`) of the stacked features `X` (`T x d`), the
//! ridge objective `f(Z, W) = |Z - XW|^2 / 2T + lambda |W|^2 / 2` is
//! minimized by `W*(Z) = (X^T X + T lambda I)^-1 X^T Z`, leaving
//! `h(Z) = Tr(Z^T B Z) / 2T` with `B = I - X (X^T X + T lambda I)^-1 X^T`.

use nalgebra::{Cholesky, DMatrix, Dyn};

use super::features::FeatureStream;
use crate::error::{Error, Result};

/// `B` is never stored: applying it through the `d x d` factorization
/// costs `O(T d K)` per product instead of `O(T^2 K)`.
#[derive(Debug, Clone)]
pub struct ResidualKernel {
    features: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
    lambda: f64,
}

impl ResidualKernel {
    pub fn new(features: DMatrix<f64>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        if features.nrows() == 0 {
            return Err(Error::EmptyInput("no intervals".into()));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Inconsistent("features contain non-finite values".into()));
        }
        let t = features.nrows() as f64;
        let mut gram = features.tr_mul(&features);
        for i in 0..gram.nrows() {
            gram[(i, i)] += t * lambda;
        }
        let factor = Cholesky::new(gram)
            .ok_or_else(|| Error::InvalidParameter("regularized Gram matrix is not positive definite".into()))?;
        Ok(ResidualKernel {
            features,
            factor,
            lambda,
        })
    }

    /// Kernel over the concatenation of `streams`, in order.
    pub fn from_streams(streams: &[FeatureStream], lambda: f64) -> Result<Self> {
        Self::new(stack_features(streams)?, lambda)
    }

    pub fn num_intervals(&self) -> usize {
        self.features.nrows()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    /// `W*(Z)`, the ridge classifier fit to labels `z`.
    pub fn classifier(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        self.factor.solve(&self.features.tr_mul(z))
    }

    /// `V = L^-1 X^T` (`d x T`) for the factor `L L^T = X^T X + T lambda I`,
    /// so that `B[a, b] = [a == b] - v_a . v_b`.
    pub(crate) fn whitened(&self) -> DMatrix<f64> {
        self.factor
            .l()
            .solve_lower_triangular(&self.features.transpose())
            .expect("Cholesky factor has a positive diagonal")
    }

    /// `B z`.
    pub fn apply(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        z - &self.features * self.classifier(z)
    }

    /// The `T x T` matrix `B`, materialized.
    pub fn matrix(&self) -> DMatrix<f64> {
        let x = &self.features;
        let mut b = -(x * self.factor.solve(&x.transpose()));
        for i in 0..b.nrows() {
            b[(i, i)] += 1.0;
        }
        let bt = b.transpose();
        (b + bt) * 0.5
    }
}

/// Rows of every stream stacked in order.
pub fn stack_features(streams: &[FeatureStream]) -> Result<DMatrix<f64>> {
    let d = super::features::check_dimensions(streams)?;
    let total: usize = streams.iter().map(FeatureStream::num_intervals).sum();
    let mut x = DMatrix::zeros(total, d);
    let mut offset = 0;
    for s in streams {
        x.rows_mut(offset, s.num_intervals()).copy_from(&s.features);
        offset += s.num_intervals();
    }
    Ok(x)
}

/// `B = I - X (X^T X + T lambda I)^-1 X^T`.
pub fn build_residual_kernel(features: &DMatrix<f64>, lambda: f64) -> Result<ResidualKernel> {
    ResidualKernel::new(features.clone(), lambda)
}

fn check_shape(z: &DMatrix<f64>, kernel: &ResidualKernel) -> Result<()> {
    if z.nrows() != kernel.num_intervals() {
        return Err(Error::Inconsistent(format!(
            "labels have {} rows, kernel covers {} intervals",
            z.nrows(),
            kernel.num_intervals()
        )));
    }
    Ok(())
}

/// `h(Z) = Tr(Z^T B Z) / 2T`.
pub fn clustering_cost(z: &DMatrix<f64>, kernel: &ResidualKernel) -> Result<f64> {
    check_shape(z, kernel)?;
    Ok(z.dot(&kernel.apply(z)) / (2.0 * kernel.num_intervals() as f64))
}

/// Gradient of `h`: `B Z / T`.
pub fn clustering_gradient(z: &DMatrix<f64>, kernel: &ResidualKernel) -> Result<DMatrix<f64>> {
    check_shape(z, kernel)?;
    Ok(kernel.apply(z) / kernel.num_intervals() as f64)
}

/// The ridge objective `|Z - XW|^2 / 2T + lambda |W|^2 / 2` at an explicit `W`.
pub fn ridge_objective(features: &DMatrix<f64>, z: &DMatrix<f64>, w: &DMatrix<f64>, lambda: f64) -> f64 {
    let t = features.nrows() as f64;
    let residual = z - features * w;
    residual.norm_squared() / (2.0 * t) + 0.5 * lambda * w.norm_squared()
}

/// Gradient of the ridge objective with respect to `W`.
pub fn ridge_gradient(features: &DMatrix<f64>, z: &DMatrix<f64>, w: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let t = features.nrows() as f64;
    -(features.tr_mul(&(z - features * w))) / t + w * lambda
}
