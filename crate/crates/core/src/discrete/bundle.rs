//! Curvature fields of a sampled torus immersion.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::grid::{SpectralOps, TorusGrid};
use super::immersion::FourierImmersion;
use crate::coefficients::{paneitz_coefficients, q_curvature, CoefficientValues};
use crate::error::{LabError, Result};
use crate::geometry::{curvature_point, induced_metric, ImmersionJet};

/// Per-point geometry stored as flat arrays. Tensors use `(p * n + i) * n + j`,
/// tangent vectors `(p * N + α) * n + i`, normal vectors `p * N + α`.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub(crate) ops: SpectralOps,
    pub(crate) n: usize,
    pub(crate) ambient: usize,
    pub(crate) coords: Vec<Vec<f64>>,
    pub(crate) dy: Vec<f64>,
    pub(crate) g: Vec<f64>,
    pub(crate) g_inv: Vec<f64>,
    pub(crate) sqrt_det: Vec<f64>,
    pub(crate) ric: Vec<f64>,
    pub(crate) ric_up: Vec<f64>,
    pub(crate) ric_norm2: Vec<f64>,
    pub(crate) r: Vec<f64>,
    pub(crate) h2: Vec<f64>,
    pub(crate) s: Vec<f64>,
    pub(crate) mean: Vec<f64>,
    pub(crate) laplace_r: Vec<f64>,
    pub(crate) q: Option<Vec<f64>>,
    pub(crate) coeffs: Option<CoefficientValues>,
    pub(crate) weights: Vec<f64>,
    /// max |g_spectral − g_exact| against term-wise differentiation.
    pub(crate) metric_defect: f64,
}

/// Largest violation of each position-vector identity on a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositionIdentities {
    /// g_ij = Σ_α ∂_i y_α ∂_j y_α, spectral jets against exact jets.
    pub metric: f64,
    /// Σ_α g(∇y_α, ∇u)² = |∇u|² for the probe u, relative to max |∇u|².
    pub projection: f64,
    /// Σ_α |∇y_α|² = n.
    pub trace: f64,
    /// Σ_α (Δy_α)² = n²|H|², relative to max(1, n²|H|²).
    pub mean_curvature: f64,
    /// Σ_α Δy_α ∇y_α = 0, largest component in the metric norm.
    pub tangency: f64,
}

impl PositionIdentities {
    pub fn worst(&self) -> f64 {
        [
            self.metric,
            self.projection,
            self.trace,
            self.mean_curvature,
            self.tangency,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn build_bundle(imm: &FourierImmersion, grid: &TorusGrid) -> Result<CurvatureBundle> {
    imm.check_resolved(grid)?;
    let n = imm.n;
    let big_n = imm.ambient;
    let ops = SpectralOps::new(grid.clone());
    let len = grid.len();
    let coords = imm.sample(grid);
    let first: Vec<Vec<Vec<f64>>> = coords.iter().map(|y| ops.gradient(y)).collect();
    let second: Vec<Vec<Vec<f64>>> = first
        .iter()
        .map(|grad| {
            (0..n * n)
                .map(|ij| ops.derivative(&grad[ij / n], ij % n))
                .collect()
        })
        .collect();

    let mut b = CurvatureBundle {
        ops,
        n,
        ambient: big_n,
        coords,
        dy: vec![0.0; len * big_n * n],
        g: vec![0.0; len * n * n],
        g_inv: vec![0.0; len * n * n],
        sqrt_det: vec![0.0; len],
        ric: vec![0.0; len * n * n],
        ric_up: vec![0.0; len * n * n],
        ric_norm2: vec![0.0; len],
        r: vec![0.0; len],
        h2: vec![0.0; len],
        s: vec![0.0; len],
        mean: vec![0.0; len * big_n],
        laplace_r: vec![0.0; len],
        q: None,
        coeffs: None,
        weights: vec![0.0; len],
        metric_defect: 0.0,
    };
    let cell = grid.cell_volume();

    for p in 0..len {
        let jet = ImmersionJet {
            y: DVector::from_iterator(big_n, b.coords.iter().map(|c| c[p])),
            dy: DMatrix::from_fn(big_n, n, |a, i| first[a][i][p]),
            d2y: (0..n * n)
                .map(|ij| DVector::from_iterator(big_n, second.iter().map(|s| s[ij][p])))
                .collect(),
        };
        let metric = induced_metric(&jet).map_err(|e| match e {
            LabError::DegenerateImmersion { det, .. } => LabError::DegenerateImmersion {
                det,
                index: Some(grid.multi_index(p)),
            },
            other => other,
        })?;
        let curv = curvature_point(&jet, &metric)?;
        let exact = imm.jet(&grid.point(p));
        let exact_g = exact.dy.transpose() * &exact.dy;
        b.metric_defect = b.metric_defect.max((&metric.g - exact_g).amax());

        let t = p * n * n;
        b.g[t..t + n * n].copy_from_slice(metric.g.transpose().as_slice());
        b.g_inv[t..t + n * n].copy_from_slice(metric.g_inv.transpose().as_slice());
        b.ric[t..t + n * n].copy_from_slice(curv.ric.transpose().as_slice());
        let raised = &metric.g_inv * &curv.ric * &metric.g_inv;
        let raised = (&raised + raised.transpose()) * 0.5;
        b.ric_up[t..t + n * n].copy_from_slice(raised.transpose().as_slice());
        b.ric_norm2[p] = curv.ric_norm2(&metric);
        b.sqrt_det[p] = metric.sqrt_det;
        b.weights[p] = metric.sqrt_det * cell;
        b.r[p] = curv.r;
        b.h2[p] = curv.h2;
        b.s[p] = curv.s;
        b.mean[p * big_n..(p + 1) * big_n].copy_from_slice(curv.mean.as_slice());
        for a in 0..big_n {
            for i in 0..n {
                b.dy[(p * big_n + a) * n + i] = jet.dy[(a, i)];
            }
        }
    }

    b.laplace_r = b.laplacian(&b.r);
    if let Ok(c) = paneitz_coefficients(n) {
        let values = c.values();
        b.q = Some(
            (0..len)
                .map(|p| q_curvature(&values, b.ric_norm2[p], b.r[p], b.laplace_r[p]))
                .collect(),
        );
        b.coeffs = Some(values);
    }
    Ok(b)
}

impl CurvatureBundle {
    pub fn grid(&self) -> &TorusGrid {
        self.ops.grid()
    }

    pub fn ops(&self) -> &SpectralOps {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn coordinates(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sqrt_det(&self) -> &[f64] {
        &self.sqrt_det
    }

    pub fn scalar_curvature(&self) -> &[f64] {
        &self.r
    }

    pub fn laplace_scalar_curvature(&self) -> &[f64] {
        &self.laplace_r
    }

    pub fn ric_norm2(&self) -> &[f64] {
        &self.ric_norm2
    }

    /// |H|² per point, H the Euclidean mean curvature vector.
    pub fn mean_curvature2(&self) -> &[f64] {
        &self.h2
    }

    pub fn second_form_norm2(&self) -> &[f64] {
        &self.s
    }

    /// Mean curvature vector at point `p`.
    pub fn mean_vector(&self, p: usize) -> &[f64] {
        &self.mean[p * self.ambient..(p + 1) * self.ambient]
    }

    /// Q field; `None` when n < 3.
    pub fn q_field(&self) -> Option<&[f64]> {
        self.q.as_deref()
    }

    pub fn coefficients(&self) -> Option<&CoefficientValues> {
        self.coeffs.as_ref()
    }

    pub fn metric_at(&self, p: usize) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_row_slice(n, n, &self.g[p * n * n..(p + 1) * n * n])
    }

    pub fn inverse_metric_at(&self, p: usize) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_row_slice(n, n, &self.g_inv[p * n * n..(p + 1) * n * n])
    }

    pub fn ricci_at(&self, p: usize) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_row_slice(n, n, &self.ric[p * n * n..(p + 1) * n * n])
    }

    pub(crate) fn g_inv(&self, p: usize, i: usize, j: usize) -> f64 {
        self.g_inv[(p * self.n + i) * self.n + j]
    }

    pub(crate) fn ric_up(&self, p: usize, i: usize, j: usize) -> f64 {
        self.ric_up[(p * self.n + i) * self.n + j]
    }

    /// ∂_i y_α at point `p`.
    pub fn tangent(&self, p: usize, alpha: usize, i: usize) -> f64 {
        self.dy[(p * self.ambient + alpha) * self.n + i]
    }

    pub fn volume(&self) -> f64 {
        self.integrate(&vec![1.0; self.len()])
    }

    /// The five position-vector identities, using `probe` as the test function
    /// in the projection identity.
    pub fn position_identities(&self, probe: &[f64]) -> Result<PositionIdentities> {
        self.check_len(probe)?;
        let (n, big_n) = (self.n, self.ambient);
        let grad_u = self.ops.gradient(probe);
        let lap_y: Vec<Vec<f64>> = self.coords.iter().map(|y| self.laplacian(y)).collect();
        let mut out = PositionIdentities {
            metric: self.metric_defect,
            projection: 0.0,
            trace: 0.0,
            mean_curvature: 0.0,
            tangency: 0.0,
        };
        let mut grad_scale: f64 = 1.0;
        let mut proj_err: f64 = 0.0;
        for p in 0..self.len() {
            let gi = self.inverse_metric_at(p);
            let du = DVector::from_iterator(n, grad_u.iter().map(|d| d[p]));
            let grad_norm2 = du.dot(&(&gi * &du));
            grad_scale = grad_scale.max(grad_norm2);
            let mut proj = 0.0;
            let mut trace = 0.0;
            let mut lap2 = 0.0;
            let mut tang = DVector::zeros(n);
            for a in 0..big_n {
                let dya = DVector::from_iterator(n, (0..n).map(|i| self.tangent(p, a, i)));
                let gdy = &gi * &dya;
                proj += gdy.dot(&du).powi(2);
                trace += gdy.dot(&dya);
                lap2 += lap_y[a][p].powi(2);
                tang.axpy(lap_y[a][p], &dya, 1.0);
            }
            proj_err = proj_err.max((proj - grad_norm2).abs());
            out.trace = out.trace.max((trace - n as f64).abs());
            let target = (n * n) as f64 * self.h2[p];
            out.mean_curvature = out
                .mean_curvature
                .max((lap2 - target).abs() / target.max(1.0));
            out.tangency = out.tangency.max(tang.dot(&(&gi * &tang)).sqrt());
        }
        out.projection = proj_err / grad_scale;
        Ok(out)
    }

    pub(crate) fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(LabError::ShapeMismatch {
                expected: self.len(),
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Largest |g − exact g| seen while sampling.
    pub fn metric_defect(&self) -> f64 {
        self.metric_defect
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::immersion::{FourierTerm, Trig};
    use std::f64::consts::PI;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn flat_clifford_torus() {
        let imm = FourierImmersion::clifford_torus(&[1.0; 3]);
        let b = build_bundle(&imm, &TorusGrid::uniform(3, 16).unwrap()).unwrap();
        assert!(b.scalar_curvature().iter().all(|r| r.abs() < 1e-10));
        assert!((b.volume() - (2.0 * PI).powi(3)).abs() < 1e-10);
        assert!(b.q_field().unwrap().iter().all(|q| q.abs() < 1e-10));
        // |H|² = (1/n²) Σ 1/r_i² = 1/3
        assert!(b
            .mean_curvature2()
            .iter()
            .all(|h| (h - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn donut_scalar_curvature_is_twice_gauss_curvature() {
        let (big, rho) = (2.0, 1.0);
        let imm = FourierImmersion::donut_times_circles(big, rho, &[1.0]);
        let grid = TorusGrid::uniform(3, 16).unwrap();
        let b = build_bundle(&imm, &grid).unwrap();
        let expected = grid.sample(|x| 2.0 * x[1].cos() / (rho * (big + rho * x[1].cos())));
        assert!(max_abs_diff(b.scalar_curvature(), &expected) < 1e-10);
        // area 8π² times circle length 2π
        assert!((b.volume() - 8.0 * PI * PI * 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn donut_surface_area() {
        let imm = FourierImmersion::donut_times_circles(2.0, 1.0, &[]);
        let b = build_bundle(&imm, &TorusGrid::uniform(2, 32).unwrap()).unwrap();
        assert!((b.volume() - 8.0 * PI * PI).abs() < 1e-10);
        assert!(b.q_field().is_none());
    }

    #[test]
    fn position_identities_on_curved_bundle() {
        let imm = FourierImmersion::donut_times_circles(2.0, 1.0, &[0.7]);
        let grid = TorusGrid::uniform(3, 16).unwrap();
        let b = build_bundle(&imm, &grid).unwrap();
        let probe = grid.sample(|x| (x[0] + 2.0 * x[1]).sin() + x[2].cos());
        let ids = b.position_identities(&probe).unwrap();
        assert!(ids.worst() < 1e-8, "{ids:?}");
    }

    #[test]
    fn degenerate_point_reports_index() {
        // y = (cos x₁, sin x₁, cos x₂): ∂₂y vanishes at x₂ = 0
        let term = |k: Vec<i64>, amp: Vec<f64>, trig| FourierTerm { k, amp, trig };
        let imm = FourierImmersion::new(
            2,
            3,
            vec![
                term(vec![1, 0], vec![1.0, 0.0, 0.0], Trig::Cos),
                term(vec![1, 0], vec![0.0, 1.0, 0.0], Trig::Sin),
                term(vec![0, 1], vec![0.0, 0.0, 1.0], Trig::Cos),
            ],
        )
        .unwrap();
        match build_bundle(&imm, &TorusGrid::uniform(2, 8).unwrap()) {
            Err(LabError::DegenerateImmersion {
                index: Some(ix), ..
            }) => {
                assert_eq!(ix[1], 0);
            }
            other => panic!("expected degenerate immersion, got {other:?}"),
        }
    }
}
