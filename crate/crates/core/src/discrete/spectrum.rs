//! Paneitz spectrum of a sampled immersion.

use serde::Serialize;

use super::bundle::{build_bundle, CurvatureBundle};
use super::grid::TorusGrid;
use super::immersion::FourierImmersion;
use super::operator::SolverOperator;
use super::solver::{
    assemble_dense, dense_smallest, lanczos_smallest, EigenPairs, LanczosOptions,
    DEFAULT_DENSE_CAP, DEFAULT_SEED, DEFAULT_TOL_EIG,
};
use crate::coefficients::CoefficientValues;
use crate::error::Result;

/// Grids up to this many points go to the dense solver when the choice is automatic.
pub const AUTO_DENSE_POINTS: usize = 1024;
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    pub solver: SolverChoice,
    pub tol_eig: f64,
    pub seed: u64,
    pub max_iter: Option<usize>,
    pub dense_cap: usize,
    pub cluster_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            solver: SolverChoice::Auto,
            tol_eig: DEFAULT_TOL_EIG,
            seed: DEFAULT_SEED,
            max_iter: None,
            dense_cap: DEFAULT_DENSE_CAP,
            cluster_tol: DEFAULT_CLUSTER_TOL,
        }
    }
}

/// A run of eigenvalues within the cluster tolerance of each other.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub start: usize,
    pub size: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenfunctions: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub clusters: Vec<Cluster>,
    pub method: SolverChoice,
    /// Relative asymmetry of the assembled matrix (dense path only).
    pub asymmetry_defect: Option<f64>,
    pub applications: usize,
    /// Largest |⟨u_i, u_j⟩_w − δ_ij|.
    pub orthonormality_defect: f64,
}

impl SpectrumResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Groups ascending values; neighbours join when their gap is below
/// `tol·max(1, |λ|)`. Ties keep solver order.
pub fn cluster_eigenvalues(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(c)
                if (v - values[i - 1]).abs() < tol * v.abs().max(values[i - 1].abs()).max(1.0) =>
            {
                c.mean = (c.mean * c.size as f64 + v) / (c.size + 1) as f64;
                c.size += 1;
            }
            _ => out.push(Cluster {
                start: i,
                size: 1,
                mean: v,
            }),
        }
    }
    out
}

/// Normalizes to unit weighted norm and fixes the sign: ∫u ≥ 0, or the
/// largest-magnitude sample positive when ∫u vanishes.
fn normalize(bundle: &CurvatureBundle, u: &mut [f64]) {
    let norm = bundle.norm(u);
    if norm > 0.0 {
        u.iter_mut().for_each(|x| *x /= norm);
    }
    let mean = bundle.integrate(u);
    let flip = if mean.abs() > 1e-10 * bundle.volume().sqrt() {
        mean < 0.0
    } else {
        let peak = u
            .iter()
            .copied()
            .fold(0.0, |m: f64, x| if x.abs() > m.abs() { x } else { m });
        peak < 0.0
    };
    if flip {
        u.iter_mut().for_each(|x| *x = -*x);
    }
}

/// The `count` smallest Paneitz eigenpairs on a prepared bundle.
pub fn solve(
    bundle: &CurvatureBundle,
    coeffs: &CoefficientValues,
    count: usize,
    opts: &SpectrumOptions,
) -> Result<SpectrumResult> {
    let op = SolverOperator::new(bundle, *coeffs)?;
    let weights = bundle.weights();
    let method = match opts.solver {
        SolverChoice::Auto if bundle.len() <= AUTO_DENSE_POINTS => SolverChoice::Dense,
        SolverChoice::Auto => SolverChoice::Lanczos,
        other => other,
    };
    let (pairs, asymmetry_defect): (EigenPairs, Option<f64>) = match method {
        SolverChoice::Dense => {
            let asm = assemble_dense(&op, weights, opts.dense_cap)?;
            let defect = asm.asymmetry_defect;
            (dense_smallest(&asm, &op, weights, count)?, Some(defect))
        }
        _ => {
            let lopts = LanczosOptions {
                tol: opts.tol_eig,
                max_iter: opts.max_iter,
                seed: opts.seed,
            };
            (lanczos_smallest(&op, weights, count, lopts)?, None)
        }
    };
    let EigenPairs {
        values,
        mut vectors,
        residuals,
        applications,
    } = pairs;
    for u in &mut vectors {
        normalize(bundle, u);
    }
    let mut orthonormality_defect: f64 = 0.0;
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            orthonormality_defect = orthonormality_defect.max((bundle.inner(u, v) - target).abs());
        }
    }
    Ok(SpectrumResult {
        clusters: cluster_eigenvalues(&values, opts.cluster_tol),
        eigenvalues: values,
        eigenfunctions: vectors,
        residuals,
        method,
        asymmetry_defect,
        applications,
        orthonormality_defect,
    })
}

/// Builds the bundle and solves; the bundle is returned for downstream integrals.
pub fn spectrum(
    imm: &FourierImmersion,
    grid: &TorusGrid,
    coeffs: &CoefficientValues,
    count: usize,
    opts: &SpectrumOptions,
) -> Result<(CurvatureBundle, SpectrumResult)> {
    let bundle = build_bundle(imm, grid)?;
    let result = solve(&bundle, coeffs, count, opts)?;
    Ok((bundle, result))
}
