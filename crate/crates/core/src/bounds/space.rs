//! Function spaces the proof replay runs in.

use crate::coefficients::CoefficientValues;
use crate::discrete::CurvatureBundle;
use crate::error::{LabError, Result};

/// Functions on an immersed manifold with the operations the trial-function
/// argument needs. Curvature fields refer to the Euclidean embedding.
pub trait FunctionSpace {
    type Function: Clone;

    fn dim(&self) -> usize;
    fn coefficients(&self) -> &CoefficientValues;
    /// Ambient coordinate functions y_α.
    fn coordinates(&self) -> Vec<Self::Function>;
    fn constant(&self, value: f64) -> Self::Function;
    /// Σ c_i f_i.
    fn combine(&self, terms: &[(f64, &Self::Function)]) -> Self::Function;
    fn product(&self, f: &Self::Function, h: &Self::Function) -> Self::Function;
    fn integrate(&self, f: &Self::Function) -> f64;
    fn laplacian(&self, f: &Self::Function) -> Self::Function;
    /// g(∇f, ∇h).
    fn grad_dot(&self, f: &Self::Function, h: &Self::Function) -> Self::Function;
    /// g((aRg + bRic)∇f, ∇h).
    fn drift_form(&self, f: &Self::Function, h: &Self::Function) -> Self::Function;
    fn paneitz(&self, f: &Self::Function) -> Result<Self::Function>;
    fn mean_curvature2(&self) -> Self::Function;
    fn scalar_curvature(&self) -> Self::Function;
    fn q_curvature(&self) -> Self::Function;
    /// Values at the points used for pointwise checks.
    fn samples(&self, f: &Self::Function) -> Vec<f64>;

    fn inner(&self, f: &Self::Function, h: &Self::Function) -> f64 {
        self.integrate(&self.product(f, h))
    }
}

/// Grid functions on a curvature bundle.
pub struct GridSpace<'a> {
    bundle: &'a CurvatureBundle,
    coeffs: CoefficientValues,
}

impl<'a> GridSpace<'a> {
    pub fn new(bundle: &'a CurvatureBundle) -> Result<Self> {
        let coeffs = *bundle
            .coefficients()
            .ok_or(LabError::InvalidDimension(bundle.dim()))?;
        Ok(GridSpace { bundle, coeffs })
    }

    pub fn bundle(&self) -> &CurvatureBundle {
        self.bundle
    }
}

impl FunctionSpace for GridSpace<'_> {
    type Function = Vec<f64>;

    fn dim(&self) -> usize {
        self.bundle.dim()
    }

    fn coefficients(&self) -> &CoefficientValues {
        &self.coeffs
    }

    fn coordinates(&self) -> Vec<Vec<f64>> {
        self.bundle.coordinates().to_vec()
    }

    fn constant(&self, value: f64) -> Vec<f64> {
        vec![value; self.bundle.len()]
    }

    fn combine(&self, terms: &[(f64, &Vec<f64>)]) -> Vec<f64> {
        let mut out = vec![0.0; self.bundle.len()];
        for (c, f) in terms {
            out.iter_mut().zip(f.iter()).for_each(|(o, v)| *o += c * v);
        }
        out
    }

    fn product(&self, f: &Vec<f64>, h: &Vec<f64>) -> Vec<f64> {
        f.iter().zip(h).map(|(a, b)| a * b).collect()
    }

    fn integrate(&self, f: &Vec<f64>) -> f64 {
        self.bundle.integrate(f)
    }

    fn laplacian(&self, f: &Vec<f64>) -> Vec<f64> {
        self.bundle.laplacian(f)
    }

    fn grad_dot(&self, f: &Vec<f64>, h: &Vec<f64>) -> Vec<f64> {
        self.bundle.grad_dot(f, h)
    }

    fn drift_form(&self, f: &Vec<f64>, h: &Vec<f64>) -> Vec<f64> {
        let b = self.bundle;
        let n = b.dim();
        let (df, dh) = (b.ops().gradient(f), b.ops().gradient(h));
        let r = b.scalar_curvature();
        (0..b.len())
            .map(|p| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let t = self.coeffs.a * r[p] * b.g_inv(p, i, j)
                            + self.coeffs.b * b.ric_up(p, i, j);
                        acc += t * df[i][p] * dh[j][p];
                    }
                }
                acc
            })
            .collect()
    }

    fn paneitz(&self, f: &Vec<f64>) -> Result<Vec<f64>> {
        self.bundle.paneitz(&self.coeffs, f)
    }

    fn mean_curvature2(&self) -> Vec<f64> {
        self.bundle.mean_curvature2().to_vec()
    }

    fn scalar_curvature(&self) -> Vec<f64> {
        self.bundle.scalar_curvature().to_vec()
    }

    fn q_curvature(&self) -> Vec<f64> {
        self.bundle
            .q_field()
            .map_or_else(|| self.constant(0.0), |q| q.to_vec())
    }

    fn samples(&self, f: &Vec<f64>) -> Vec<f64> {
        f.clone()
    }
}
