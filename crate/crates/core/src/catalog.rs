//! Closed-form model manifolds: round spheres, products of round spheres and
//! flat tori, all realized as products of spheres `S^{p_i}(r_i)` centered at
//! the origin of disjoint coordinate blocks.
//!
//! Each factor has parallel Ricci curvature `ρ_i g_i` with `ρ_i = (p_i−1)/r_i²`,
//! so the Paneitz operator acts on a product of factor eigenfunctions with
//! Laplace eigenvalues `μ_i` by the scalar
//!
//! ```text
//! λ = (Σ μ_i)² + Σ κ_i μ_i + (n−4)/2 · Q,     κ_i = a_n R + b_n ρ_i
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coefficients::{paneitz_coefficients, q_curvature, CoefficientValues};
use crate::error::{LabError, Result};

/// Where a model is declared to live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambient {
    Euclidean,
    UnitSphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereFactor {
    pub dim: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    RoundSphere { n: usize, r: f64 },
    SphereProduct { factors: Vec<SphereFactor> },
    FlatTorus { radii: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifold {
    pub kind: ModelKind,
    pub ambient: Ambient,
}

const UNIT_SPHERE_TOL: f64 = 1e-14;

impl ModelManifold {
    pub fn new(kind: ModelKind, ambient: Ambient) -> Result<Self> {
        let m = ModelManifold { kind, ambient };
        m.validate()?;
        Ok(m)
    }

    pub fn round_sphere(n: usize, r: f64, ambient: Ambient) -> Result<Self> {
        Self::new(ModelKind::RoundSphere { n, r }, ambient)
    }

    pub fn sphere_product(factors: &[(usize, f64)], ambient: Ambient) -> Result<Self> {
        let factors = factors
            .iter()
            .map(|&(dim, radius)| SphereFactor { dim, radius })
            .collect();
        Self::new(ModelKind::SphereProduct { factors }, ambient)
    }

    pub fn flat_torus(radii: &[f64], ambient: Ambient) -> Result<Self> {
        Self::new(
            ModelKind::FlatTorus {
                radii: radii.to_vec(),
            },
            ambient,
        )
    }

    fn validate(&self) -> Result<()> {
        let factors = self.factors();
        if factors.is_empty() {
            return Err(LabError::InvalidModel("no factors".into()));
        }
        for f in &factors {
            if f.dim == 0 {
                return Err(LabError::InvalidModel("factor of dimension 0".into()));
            }
            if !(f.radius > 0.0) || !f.radius.is_finite() {
                return Err(LabError::InvalidModel(format!(
                    "radius {} must be positive",
                    f.radius
                )));
            }
        }
        if self.ambient == Ambient::UnitSphere {
            let sum: f64 = factors.iter().map(|f| f.radius * f.radius).sum();
            if (sum - 1.0).abs() > UNIT_SPHERE_TOL {
                return Err(LabError::InvalidModel(format!(
                    "unit_sphere ambient needs sum of squared radii = 1, got {sum}"
                )));
            }
        }
        Ok(())
    }

    pub fn factors(&self) -> Vec<SphereFactor> {
        match &self.kind {
            ModelKind::RoundSphere { n, r } => vec![SphereFactor {
                dim: *n,
                radius: *r,
            }],
            ModelKind::SphereProduct { factors } => factors.clone(),
            ModelKind::FlatTorus { radii } => radii
                .iter()
                .map(|&radius| SphereFactor { dim: 1, radius })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.factors().iter().map(|f| f.dim).sum()
    }

    /// Number of Euclidean coordinates of the product embedding.
    pub fn coordinate_count(&self) -> usize {
        self.factors().iter().map(|f| f.dim + 1).sum()
    }

    pub fn id(&self) -> String {
        let amb = match self.ambient {
            Ambient::Euclidean => "euclidean",
            Ambient::UnitSphere => "unit_sphere",
        };
        let body = match &self.kind {
            ModelKind::RoundSphere { n, r } => format!("S{n}({r})"),
            ModelKind::SphereProduct { factors } => factors
                .iter()
                .map(|f| format!("S{}({})", f.dim, f.radius))
                .collect::<Vec<_>>()
                .join("x"),
            ModelKind::FlatTorus { radii } => format!("T{}{:?}", radii.len(), radii),
        };
        format!("{body}@{amb}")
    }

    pub fn coefficients(&self) -> Result<CoefficientValues> {
        Ok(paneitz_coefficients(self.dim())?.values())
    }
}

/// Curvature constants of a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConstants {
    pub n: usize,
    pub r: f64,
    /// Ricci eigenvalue on each factor.
    pub rho: Vec<f64>,
    pub ric_norm2: f64,
    pub q: f64,
    /// |H|² relative to the declared ambient.
    pub h2: f64,
    /// |H|² of the product embedding in Euclidean space.
    pub h2_euclidean: f64,
    pub s: f64,
    pub s_euclidean: f64,
    pub vol: f64,
}

/// Γ(m/2) for a positive integer m.
pub(crate) fn gamma_half(m: usize) -> f64 {
    assert!(m > 0);
    let (mut x, mut acc) = if m.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (0.5, PI.sqrt())
    };
    let target = m as f64 / 2.0;
    while x < target - 0.25 {
        acc *= x;
        x += 1.0;
    }
    acc
}

/// Area of S^p(r).
pub fn sphere_volume(p: usize, r: f64) -> f64 {
    2.0 * PI.powf((p as f64 + 1.0) / 2.0) * r.powi(p as i32) / gamma_half(p + 1)
}

pub fn model_constants(m: &ModelManifold) -> Result<ModelConstants> {
    let factors = m.factors();
    let coeffs = m.coefficients()?;
    let n = m.dim();
    let nf = n as f64;
    let mut r = 0.0;
    let mut rho = Vec::with_capacity(factors.len());
    let mut ric_norm2 = 0.0;
    let mut sum_h = 0.0;
    let mut s_e = 0.0;
    let mut vol = 1.0;
    for f in &factors {
        let p = f.dim as f64;
        let r2 = f.radius * f.radius;
        let rho_i = (p - 1.0) / r2;
        r += p * rho_i;
        ric_norm2 += p * rho_i * rho_i;
        rho.push(rho_i);
        sum_h += p * p / r2;
        s_e += p / r2;
        vol *= sphere_volume(f.dim, f.radius);
    }
    let h2_e = sum_h / (nf * nf);
    let (h2, s) = match m.ambient {
        Ambient::Euclidean => (h2_e, s_e),
        Ambient::UnitSphere => ((h2_e - 1.0).max(0.0), (s_e - nf).max(0.0)),
    };
    Ok(ModelConstants {
        n,
        r,
        rho,
        ric_norm2,
        q: q_curvature(&coeffs, ric_norm2, r, 0.0),
        h2,
        h2_euclidean: h2_e,
        s,
        s_euclidean: s_e,
        vol,
    })
}

/// Degree-k spherical harmonic eigenvalue on S^p(r).
pub fn sphere_laplace_eigenvalue(p: usize, k: usize, r: f64) -> f64 {
    (k * (k + p - 1)) as f64 / (r * r)
}

/// Dimension of degree-k spherical harmonics on S^p:
/// (2k+p−1)(k+p−2)! / (k!(p−1)!).
pub fn sphere_harmonic_multiplicity(p: usize, k: usize) -> u64 {
    if k == 0 {
        return 1;
    }
    if p == 1 {
        return 2;
    }
    let mut num: u128 = (2 * k + p - 1) as u128;
    for j in (k + 1)..=(k + p - 2) {
        num *= j as u128;
    }
    let den: u128 = (1..p as u128).product();
    (num / den) as u64
}

/// Distinct Laplace eigenvalue with its multiplicity and the factor-degree
/// tuples that produce it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralLine {
    pub mu: f64,
    pub multiplicity: u64,
    pub labels: Vec<Vec<usize>>,
}

/// Closed-form Paneitz line: eigenvalue, multiplicity and the degree tuples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaneitzLine {
    pub lambda: f64,
    pub multiplicity: u64,
    pub labels: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormPaneitz {
    pub kappa: Vec<f64>,
    pub zero_order: f64,
    pub lines: Vec<PaneitzLine>,
}

impl ClosedFormPaneitz {
    /// Eigenvalues repeated by multiplicity, first `count` of them.
    pub fn eigenvalues(&self, count: usize) -> Vec<f64> {
        self.lines
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.lambda, l.multiplicity as usize))
            .take(count)
            .collect()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.lines.iter().map(|l| l.multiplicity).sum()
    }
}

#[derive(Debug, Clone)]
struct Mode {
    degrees: Vec<usize>,
    mus: Vec<f64>,
    multiplicity: u64,
}

impl Mode {
    fn mu(&self) -> f64 {
        self.mus.iter().sum()
    }
}

/// All degree tuples with total Laplace eigenvalue ≤ cut.
fn modes_below(factors: &[SphereFactor], cut: f64) -> Vec<Mode> {
    let mut out = Vec::new();
    let mut stack = vec![Mode {
        degrees: vec![],
        mus: vec![],
        multiplicity: 1,
    }];
    while let Some(partial) = stack.pop() {
        let i = partial.degrees.len();
        if i == factors.len() {
            out.push(partial);
            continue;
        }
        let f = factors[i];
        let used = partial.mu();
        let mut k = 0;
        loop {
            let mu = sphere_laplace_eigenvalue(f.dim, k, f.radius);
            if used + mu > cut * (1.0 + 1e-12) {
                break;
            }
            let mut next = partial.clone();
            next.degrees.push(k);
            next.mus.push(mu);
            next.multiplicity *= sphere_harmonic_multiplicity(f.dim, k);
            stack.push(next);
            k += 1;
        }
    }
    out
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn group_lines(mut items: Vec<(f64, u64, Vec<usize>)>) -> Vec<(f64, u64, Vec<Vec<usize>>)> {
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.2.cmp(&b.2)));
    let mut lines: Vec<(f64, u64, Vec<Vec<usize>>)> = Vec::new();
    for (v, m, label) in items {
        match lines.last_mut() {
            Some(last) if same(last.0, v) => {
                last.1 += m;
                last.2.push(label);
            }
            _ => lines.push((v, m, vec![label])),
        }
    }
    lines
}

fn smallest_positive_mu(factors: &[SphereFactor]) -> f64 {
    factors
        .iter()
        .map(|f| sphere_laplace_eigenvalue(f.dim, 1, f.radius))
        .fold(f64::INFINITY, f64::min)
}

/// The `count` smallest distinct Laplace lines.
pub fn laplace_spectrum(m: &ModelManifold, count: usize) -> Vec<SpectralLine> {
    let factors = m.factors();
    let mut cut = smallest_positive_mu(&factors) * count.max(1) as f64;
    loop {
        let items = modes_below(&factors, cut)
            .into_iter()
            .map(|md| (md.mu(), md.multiplicity, md.degrees))
            .collect();
        let lines = group_lines(items);
        if lines.len() >= count {
            return lines
                .into_iter()
                .take(count)
                .map(|(mu, multiplicity, labels)| SpectralLine {
                    mu,
                    multiplicity,
                    labels,
                })
                .collect();
        }
        cut *= 2.0;
    }
}

/// Drift constants κ_i = a_n R + b_n ρ_i and the zeroth-order constant.
pub fn drift_constants(m: &ModelManifold) -> Result<(Vec<f64>, f64)> {
    let c = model_constants(m)?;
    let coeffs = m.coefficients()?;
    let kappa = c
        .rho
        .iter()
        .map(|rho| coeffs.a * c.r + coeffs.b * rho)
        .collect();
    Ok((kappa, coeffs.q_factor * c.q))
}

pub fn paneitz_value(kappa: &[f64], zero_order: f64, mus: &[f64]) -> f64 {
    let total: f64 = mus.iter().sum();
    total * total + kappa.iter().zip(mus).map(|(k, mu)| k * mu).sum::<f64>() + zero_order
}

/// The `count` smallest distinct Paneitz lines.
pub fn paneitz_spectrum(m: &ModelManifold, count: usize) -> Result<ClosedFormPaneitz> {
    let factors = m.factors();
    let (kappa, zero_order) = drift_constants(m)?;
    let kmin = kappa.iter().cloned().fold(0.0f64, f64::min);
    let mut cut = smallest_positive_mu(&factors) * count.max(1) as f64;
    loop {
        let items: Vec<_> = modes_below(&factors, cut)
            .into_iter()
            .map(|md| {
                (
                    paneitz_value(&kappa, zero_order, &md.mus),
                    md.multiplicity,
                    md.degrees,
                )
            })
            .collect();
        let lines = group_lines(items);
        // every tuple beyond the cut has λ ≥ cut² + κ_min·cut + zero_order
        let floor = if cut > -kmin {
            cut * cut + kmin * cut + zero_order
        } else {
            f64::NEG_INFINITY
        };
        if lines.len() >= count && floor > lines[count - 1].0 {
            let lines = lines
                .into_iter()
                .take(count)
                .map(|(lambda, multiplicity, labels)| PaneitzLine {
                    lambda,
                    multiplicity,
                    labels,
                })
                .collect();
            return Ok(ClosedFormPaneitz {
                kappa,
                zero_order,
                lines,
            });
        }
        cut *= 2.0;
    }
}

/// Enough Paneitz lines to cover `count` eigenvalues with multiplicity.
pub fn paneitz_eigenvalues(m: &ModelManifold, count: usize) -> Result<Vec<f64>> {
    let mut lines = count.max(1);
    loop {
        let spec = paneitz_spectrum(m, lines)?;
        if spec.total_multiplicity() >= count as u64 {
            return Ok(spec.eigenvalues(count));
        }
        lines *= 2;
    }
}

/// Description of the first Paneitz eigenfunction of a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstEigenfunction {
    pub lambda: f64,
    pub mu: f64,
    pub multiplicity: u64,
    /// True when the minimizing line is the constant function.
    pub constant: bool,
    /// Value of the normalized constant eigenfunction, 1/√vol.
    pub constant_value: Option<f64>,
    /// ∫|∇u_1|² dv for a normalized eigenfunction of the line (= μ).
    pub gradient_energy: f64,
}

pub fn first_eigenfunction_info(m: &ModelManifold) -> Result<FirstEigenfunction> {
    let spec = paneitz_spectrum(m, 2)?;
    let line = &spec.lines[0];
    let factors = m.factors();
    let mus: Vec<f64> = line
        .labels
        .iter()
        .map(|deg| {
            deg.iter()
                .zip(&factors)
                .map(|(&k, f)| sphere_laplace_eigenvalue(f.dim, k, f.radius))
                .sum()
        })
        .collect();
    for w in mus.windows(2) {
        if !same(w[0], w[1]) {
            return Err(LabError::AmbiguousFirstEigenfunction(w[0], w[1]));
        }
    }
    let mu = mus[0];
    let constant = line.labels.len() == 1 && line.labels[0].iter().all(|&k| k == 0);
    let vol = model_constants(m)?.vol;
    Ok(FirstEigenfunction {
        lambda: line.lambda,
        mu,
        multiplicity: line.multiplicity,
        constant,
        constant_value: constant.then(|| 1.0 / vol.sqrt()),
        gradient_energy: if constant { 0.0 } else { mu },
    })
}
