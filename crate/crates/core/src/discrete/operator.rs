//! Matrix-free Laplacian and Paneitz operator on a curvature bundle.
//!
//! Every second-order piece is written in divergence form
//! `(1/√g) ∂_i(√g T^{ij} ∂_j f)` with a skew spectral derivative, so the
//! discrete operators are symmetric in the quadrature inner product up to
//! round-off.

use super::bundle::CurvatureBundle;
use super::grid::Complex64;
use super::solver::LinearOperator;
use crate::coefficients::CoefficientValues;
use crate::error::{LabError, Result};

fn to_complex(f: &[f64]) -> Vec<Complex64> {
    f.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

fn real_part(f: Vec<Complex64>) -> Vec<f64> {
    f.into_iter().map(|c| c.re).collect()
}

impl CurvatureBundle {
    /// Σ_p f_p·w_p.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    pub fn inner(&self, f: &[f64], h: &[f64]) -> f64 {
        f.iter()
            .zip(h)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    /// Σ_i ∂_i(flux_i) / √g.
    fn divergence(&self, flux: &[Vec<Complex64>]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        for (i, f) in flux.iter().enumerate() {
            for (o, d) in out.iter_mut().zip(self.ops.derivative_complex(f, i)) {
                *o += d;
            }
        }
        for (o, sg) in out.iter_mut().zip(&self.sqrt_det) {
            *o /= sg;
        }
        out
    }

    /// √g T^{ij}(p) ∂_j f for a pointwise symmetric tensor `tensor(p, i, j)`.
    fn flux(
        &self,
        grad: &[Vec<Complex64>],
        tensor: impl Fn(usize, usize, usize) -> f64,
    ) -> Vec<Vec<Complex64>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..self.len())
                    .map(|p| {
                        let acc: Complex64 = (0..n).map(|j| grad[j][p] * tensor(p, i, j)).sum();
                        acc * self.sqrt_det[p]
                    })
                    .collect()
            })
            .collect()
    }

    fn drift_tensor(&self, coeffs: &CoefficientValues, p: usize, i: usize, j: usize) -> f64 {
        coeffs.a * self.r[p] * self.g_inv(p, i, j) + coeffs.b * self.ric_up(p, i, j)
    }

    fn laplacian_complex(&self, f: &[Complex64]) -> Vec<Complex64> {
        let grad = self.ops.gradient_complex(f);
        self.divergence(&self.flux(&grad, |p, i, j| self.g_inv(p, i, j)))
    }

    /// Laplace–Beltrami operator Δf.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        real_part(self.laplacian_complex(&to_complex(f)))
    }

    /// g(∇f, ∇h) per point.
    pub fn grad_dot(&self, f: &[f64], h: &[f64]) -> Vec<f64> {
        let n = self.n;
        let (df, dh) = (self.ops.gradient(f), self.ops.gradient(h));
        (0..f.len())
            .map(|p| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += self.g_inv(p, i, j) * df[i][p] * dh[j][p];
                    }
                }
                acc
            })
            .collect()
    }

    /// div((a R g + b Ric)∇f).
    pub fn drift(&self, coeffs: &CoefficientValues, f: &[f64]) -> Vec<f64> {
        let grad = self.ops.gradient_complex(&to_complex(f));
        real_part(self.divergence(&self.flux(&grad, |p, i, j| self.drift_tensor(coeffs, p, i, j))))
    }

    fn check_coefficients(&self, coeffs: &CoefficientValues) -> Result<&[f64]> {
        if coeffs.n != self.n {
            return Err(LabError::ShapeMismatch {
                expected: self.n,
                got: coeffs.n,
            });
        }
        self.q.as_deref().ok_or(LabError::InvalidDimension(self.n))
    }

    /// Paneitz operator on complex data; the outer divergences of Δ(Δf) and
    /// of the drift term are merged into one.
    fn paneitz_complex(
        &self,
        coeffs: &CoefficientValues,
        q: &[f64],
        f: &[Complex64],
    ) -> Vec<Complex64> {
        let grad = self.ops.gradient_complex(f);
        let lap = self.divergence(&self.flux(&grad, |p, i, j| self.g_inv(p, i, j)));
        let drift = self.flux(&grad, |p, i, j| self.drift_tensor(coeffs, p, i, j));
        let grad_lap = self.ops.gradient_complex(&lap);
        let mut merged = self.flux(&grad_lap, |p, i, j| self.g_inv(p, i, j));
        for (m, d) in merged.iter_mut().zip(&drift) {
            m.iter_mut().zip(d).for_each(|(a, b)| *a -= b);
        }
        let mut out = self.divergence(&merged);
        for ((o, v), qp) in out.iter_mut().zip(f).zip(q) {
            *o += v * (coeffs.q_factor * qp);
        }
        out
    }

    /// P f = Δ²f − div((aRg + bRic)∇f) + (n−4)/2·Q f.
    pub fn paneitz(&self, coeffs: &CoefficientValues, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        let q = self.check_coefficients(coeffs)?;
        Ok(real_part(self.paneitz_complex(coeffs, q, &to_complex(f))))
    }
}

/// The operator handed to the eigensolvers.
///
/// Fourier modes with a Nyquist index are invisible to the spectral
/// derivative, so the bare collocation operator has spurious low eigenvalues
/// on them. They are lifted by `σ W⁻¹E`, E the Nyquist projection and W the
/// quadrature weights, which keeps the operator symmetric in the weighted
/// inner product and leaves resolved modes untouched.
#[derive(Debug, Clone)]
pub struct SolverOperator<'a> {
    bundle: &'a CurvatureBundle,
    coeffs: CoefficientValues,
    penalty: f64,
}

impl<'a> SolverOperator<'a> {
    pub fn new(bundle: &'a CurvatureBundle, coeffs: CoefficientValues) -> Result<Self> {
        bundle.check_coefficients(&coeffs)?;
        let w_max = bundle.weights.iter().copied().fold(0.0, f64::max);
        // largest eigenvalue of g⁻¹ bounds the symbol of −Δ by λ_max·|k|²
        let metric_scale = (0..bundle.len())
            .map(|p| {
                nalgebra::SymmetricEigen::new(bundle.inverse_metric_at(p))
                    .eigenvalues
                    .max()
            })
            .fold(0.0, f64::max);
        let k2: f64 = bundle
            .grid()
            .sizes()
            .iter()
            .map(|&s| (s as f64 / 2.0).powi(2))
            .sum();
        let top = metric_scale * k2;
        let penalty = w_max * top * top.max(1.0);
        Ok(SolverOperator {
            bundle,
            coeffs,
            penalty,
        })
    }

    pub fn bundle(&self) -> &CurvatureBundle {
        self.bundle
    }

    pub fn coefficients(&self) -> &CoefficientValues {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.bundle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bundle.is_empty()
    }

    fn apply_complex(&self, f: &[Complex64]) -> Vec<Complex64> {
        let q = self.bundle.q.as_deref().expect("checked at construction");
        let mut out = self.bundle.paneitz_complex(&self.coeffs, q, f);
        let nyq = self.bundle.ops.nyquist_part_complex(f);
        for ((o, e), w) in out.iter_mut().zip(&nyq).zip(&self.bundle.weights) {
            *o += e * (self.penalty / w);
        }
        out
    }
}

impl LinearOperator for SolverOperator<'_> {
    fn apply(&self, f: &[f64]) -> Vec<f64> {
        real_part(self.apply_complex(&to_complex(f)))
    }

    /// One complex pass on `f + i·h`.
    fn apply_pair(&self, f: &[f64], h: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let packed: Vec<Complex64> = f
            .iter()
            .zip(h)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        self.apply_complex(&packed)
            .into_iter()
            .map(|c| (c.re, c.im))
            .unzip()
    }
}
