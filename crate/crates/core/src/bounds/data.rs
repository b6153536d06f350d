//! Spectra and curvature integrals in the form the bounds consume.

use serde::Serialize;

use super::diagnose::{diagnose_bundle, diagnose_model, DIAGNOSIS_TOL};
use super::report::{EqualityDiagnosis, InputDigest, TOL_EQ_ANALYTIC, TOL_EQ_NUMERICAL};
use crate::catalog::{
    first_eigenfunction_info, model_constants, paneitz_eigenvalues, Ambient, ModelManifold,
};
use crate::coefficients::{paneitz_coefficients, CoefficientValues};
use crate::discrete::{CurvatureBundle, SpectrumResult};
use crate::error::{LabError, Result};

/// Eigenvalues with |λ| ≤ this fraction of the largest one are treated as 0.
pub const KERNEL_SNAP: f64 = 1e-9;

/// How far |y|² may stray from 1 for a sampled immersion declared to lie in
/// the unit sphere.
pub const UNIT_SPHERE_TOL: f64 = 1e-10;

/// Integrals against the square of the lowest eigenfunction u (∫u² = 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstModeIntegrals {
    /// ∫|H|² u².
    pub h2: f64,
    /// ∫R u².
    pub scalar: f64,
    /// ∫|∇u|².
    pub gradient: f64,
    /// Multiplicity of the lowest eigenvalue.
    pub multiplicity: usize,
}

/// Everything the bound evaluators need. Mean curvature is always that of the
/// Euclidean embedding, so for a submanifold of the unit sphere `h2` already
/// carries the |H|² + 1 of the sphere-relative statements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundData {
    pub manifold: String,
    pub grid: Option<Vec<usize>>,
    pub n: usize,
    pub ambient: Ambient,
    pub analytic: bool,
    /// Ascending, kernel-snapped.
    pub eigenvalues: Vec<f64>,
    pub volume: f64,
    /// ∫|H|².
    pub h2: f64,
    /// ∫|H|⁴.
    pub h4: f64,
    /// ∫R.
    pub scalar: f64,
    /// ∫Q.
    pub q: f64,
    pub first: Option<FirstModeIntegrals>,
    /// Why `first` is missing, when it is.
    pub first_note: Option<String>,
    pub diagnosis: EqualityDiagnosis,
    pub tol_eq: f64,
}

pub fn snap_kernel(values: &[f64]) -> Vec<f64> {
    let top = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    values
        .iter()
        .map(|&v| if v.abs() <= KERNEL_SNAP * top { 0.0 } else { v })
        .collect()
}

impl BoundData {
    /// Closed-form data for a catalog model with `count` eigenvalues.
    pub fn from_model(m: &ModelManifold, count: usize) -> Result<Self> {
        let c = model_constants(m)?;
        let eigenvalues = snap_kernel(&paneitz_eigenvalues(m, count)?);
        let (first, first_note) = match first_eigenfunction_info(m) {
            Ok(info) => (
                Some(FirstModeIntegrals {
                    h2: c.h2_euclidean,
                    scalar: c.r,
                    gradient: info.gradient_energy,
                    multiplicity: info.multiplicity as usize,
                }),
                None,
            ),
            Err(e) => (None, Some(e.to_string())),
        };
        Ok(BoundData {
            manifold: m.id(),
            grid: None,
            n: c.n,
            ambient: m.ambient,
            analytic: true,
            eigenvalues,
            volume: c.vol,
            h2: c.h2_euclidean * c.vol,
            h4: c.h2_euclidean * c.h2_euclidean * c.vol,
            scalar: c.r * c.vol,
            q: c.q * c.vol,
            first,
            first_note,
            diagnosis: diagnose_model(m, DIAGNOSIS_TOL)?,
            tol_eq: TOL_EQ_ANALYTIC,
        })
    }

    /// Quadrature data for a sampled immersion and its computed spectrum.
    pub fn from_bundle(
        manifold: &str,
        b: &CurvatureBundle,
        s: &SpectrumResult,
        ambient: Ambient,
    ) -> Result<Self> {
        if ambient == Ambient::UnitSphere {
            let worst = (0..b.len())
                .map(|p| {
                    let r2: f64 = b.coordinates().iter().map(|y| y[p] * y[p]).sum();
                    (r2 - 1.0).abs()
                })
                .fold(0.0, f64::max);
            if worst > UNIT_SPHERE_TOL {
                return Err(LabError::InvalidModel(format!(
                    "immersion leaves the unit sphere: max ||y|^2 - 1| = {worst:e}"
                )));
            }
        }
        let q = b.q_field().ok_or(LabError::InvalidDimension(b.dim()))?;
        let h2 = b.mean_curvature2();
        let first = s.eigenfunctions.first().map(|u| {
            let u2: Vec<f64> = u.iter().map(|v| v * v).collect();
            FirstModeIntegrals {
                h2: b.inner(h2, &u2),
                scalar: b.inner(b.scalar_curvature(), &u2),
                gradient: b.integrate(&b.grad_dot(u, u)),
                multiplicity: s.clusters.first().map_or(1, |c| c.size),
            }
        });
        Ok(BoundData {
            manifold: manifold.to_string(),
            grid: Some(b.grid().sizes().to_vec()),
            n: b.dim(),
            ambient,
            analytic: false,
            eigenvalues: snap_kernel(&s.eigenvalues),
            volume: b.volume(),
            h2: b.integrate(h2),
            h4: b.integrate(&h2.iter().map(|h| h * h).collect::<Vec<_>>()),
            scalar: b.integrate(b.scalar_curvature()),
            q: b.integrate(q),
            first_note: first.is_none().then(|| "no eigenfunctions".to_string()),
            first,
            diagnosis: diagnose_bundle(b, DIAGNOSIS_TOL),
            tol_eq: TOL_EQ_NUMERICAL,
        })
    }

    pub fn with_tol_eq(mut self, tol: f64) -> Self {
        self.tol_eq = tol;
        self
    }

    pub fn coefficients(&self) -> Result<CoefficientValues> {
        Ok(paneitz_coefficients(self.n)?.values())
    }

    pub fn digest(&self) -> InputDigest {
        InputDigest {
            manifold: self.manifold.clone(),
            grid: self.grid.clone(),
            eigenvalue_count: self.eigenvalues.len(),
            tol_eq: self.tol_eq,
        }
    }
}
