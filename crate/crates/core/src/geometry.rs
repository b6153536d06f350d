//! Pointwise geometry of an immersion from its 2-jet.
//!
//! Intrinsic curvature is obtained from the Gauss equation
//! `R_ijkl = h_ik·h_jl − h_il·h_jk`, so nothing beyond second derivatives of
//! the position vector is ever needed.

use nalgebra::{DMatrix, DVector};

use crate::coefficients::{q_curvature, CoefficientValues};
use crate::error::{LabError, Result};

/// Threshold on det g below which a jet is treated as non-immersive.
pub const DEFAULT_IMMERSION_EPS: f64 = 1e-12;

/// Position, first and second partial derivatives of an immersion at one point.
#[derive(Debug, Clone)]
pub struct ImmersionJet {
    /// Point in R^N.
    pub y: DVector<f64>,
    /// N×n matrix of ∂y/∂x^i.
    pub dy: DMatrix<f64>,
    /// ∂²y/∂x^i∂x^j stored at `i * n + j`.
    pub d2y: Vec<DVector<f64>>,
}

impl ImmersionJet {
    pub fn ambient_dim(&self) -> usize {
        self.dy.nrows()
    }

    pub fn dim(&self) -> usize {
        self.dy.ncols()
    }

    pub fn second(&self, i: usize, j: usize) -> &DVector<f64> {
        &self.d2y[i * self.dim() + j]
    }
}

#[derive(Debug, Clone)]
pub struct MetricData {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub sqrt_det: f64,
}

/// Extrinsic and intrinsic curvature at one point.
#[derive(Debug, Clone)]
pub struct CurvaturePoint {
    /// Γ^k_ij stored at `(k * n + i) * n + j`.
    pub gamma: Vec<f64>,
    /// Vector-valued second fundamental form, `i * n + j`.
    pub h: Vec<DVector<f64>>,
    /// Mean curvature vector (1/n) g^ij h_ij.
    pub mean: DVector<f64>,
    pub h2: f64,
    pub s: f64,
    pub ric: DMatrix<f64>,
    pub r: f64,
}

impl CurvaturePoint {
    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.ric.nrows();
        self.gamma[(k * n + i) * n + j]
    }

    /// g^ik g^jl Ric_ij Ric_kl.
    pub fn ric_norm2(&self, metric: &MetricData) -> f64 {
        let raised = &metric.g_inv * &self.ric * &metric.g_inv;
        raised.component_mul(&self.ric).sum()
    }

    /// Q with the supplied ΔR (zero for constant-curvature fields).
    pub fn q(&self, metric: &MetricData, coeffs: &CoefficientValues, laplace_r: f64) -> f64 {
        q_curvature(coeffs, self.ric_norm2(metric), self.r, laplace_r)
    }
}

pub fn induced_metric(jet: &ImmersionJet) -> Result<MetricData> {
    induced_metric_with_eps(jet, DEFAULT_IMMERSION_EPS)
}

pub fn induced_metric_with_eps(jet: &ImmersionJet, eps: f64) -> Result<MetricData> {
    let g = jet.dy.transpose() * &jet.dy;
    let det = g.determinant();
    if !(det > eps) {
        return Err(LabError::DegenerateImmersion { det, index: None });
    }
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or(LabError::DegenerateImmersion { det, index: None })?;
    // symmetrize to remove round-off drift
    let g_inv = (&g_inv + g_inv.transpose()) * 0.5;
    Ok(MetricData {
        g,
        g_inv,
        sqrt_det: det.sqrt(),
    })
}

pub fn curvature_point(jet: &ImmersionJet, metric: &MetricData) -> Result<CurvaturePoint> {
    let n = jet.dim();
    let big_n = jet.ambient_dim();
    if metric.g.nrows() != n {
        return Err(LabError::ShapeMismatch {
            expected: n,
            got: metric.g.nrows(),
        });
    }
    let gi = &metric.g_inv;

    // Christoffel symbols of the first kind: ∂_i∂_j y · ∂_l y
    let mut gamma = vec![0.0; n * n * n];
    let mut h = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let d2 = jet.second(i, j);
            let first_kind: Vec<f64> = (0..n).map(|l| d2.dot(&jet.dy.column(l))).collect();
            let mut tangential = DVector::zeros(big_n);
            for k in 0..n {
                let gk: f64 = (0..n).map(|l| gi[(k, l)] * first_kind[l]).sum();
                gamma[(k * n + i) * n + j] = gk;
                tangential.axpy(gk, &jet.dy.column(k), 1.0);
            }
            h.push(d2 - tangential);
        }
    }

    let mut trace = DVector::zeros(big_n);
    for i in 0..n {
        for j in 0..n {
            trace.axpy(gi[(i, j)], &h[i * n + j], 1.0);
        }
    }
    let mean = &trace / n as f64;
    let h2 = mean.norm_squared();

    // Gram matrix of h in the ambient inner product, indexed by pairs
    let dot = |a: usize, b: usize| h[a].dot(&h[b]);
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let w = gi[(i, k)] * gi[(j, l)];
                    if w != 0.0 {
                        s += w * dot(i * n + j, k * n + l);
                    }
                }
            }
        }
    }

    // Ric_jl = g^ik (h_ik·h_jl − h_il·h_jk)
    let mut ric = DMatrix::zeros(n, n);
    for j in 0..n {
        for l in j..n {
            let mut v = trace.dot(&h[j * n + l]);
            for i in 0..n {
                for k in 0..n {
                    let w = gi[(i, k)];
                    if w != 0.0 {
                        v -= w * dot(i * n + l, j * n + k);
                    }
                }
            }
            ric[(j, l)] = v;
            ric[(l, j)] = v;
        }
    }
    let r = gi.component_mul(&ric).sum();

    Ok(CurvaturePoint {
        gamma,
        h,
        mean,
        h2,
        s,
        ric,
        r,
    })
}
