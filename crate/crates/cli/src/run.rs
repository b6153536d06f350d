//! Evaluation shared by the spectrum, verify and replay commands.

use std::path::Path;
use std::time::Instant;

use paneitz_core::bounds::{
    applicable_bounds, eigenvalues_needed, replay_proof, verify, BoundData, BoundId, ChainTheorem,
    EigenBasis, FunctionSpace, GridSpace, PolySpace, ProofChainReport,
};
use paneitz_core::catalog::{model_constants, Ambient, ModelManifold};
use paneitz_core::discrete::spectrum::DEFAULT_CLUSTER_TOL;
use paneitz_core::discrete::{
    cluster_eigenvalues, spectrum, CurvatureBundle, SolverChoice, SpectrumOptions, SpectrumResult,
};
use paneitz_core::error::LabError;

use crate::error::{CliError, EXIT_INVALID, EXIT_OK, EXIT_VIOLATION};
use crate::report::{
    sha256_hex, CurvatureSection, InputSection, Refusal, ReportFile, SpectrumSection, Timings, TOOL,
};
use crate::specfile::{ManifoldSpec, Target};

pub use paneitz_core::discrete::solver::DEFAULT_SEED;
pub const REPLAY_TOL_ANALYTIC: f64 = 1e-9;
pub const REPLAY_TOL_NUMERICAL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

/// Which bounds `verify` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    All,
    One(BoundId),
}

impl std::str::FromStr for Selection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "all" {
            return Ok(Selection::All);
        }
        s.parse::<BoundId>()
            .map(Selection::One)
            .map_err(|e| e.to_string())
    }
}

/// A spec with its spectrum and curvature integrals.
pub struct Prepared {
    pub spec: ManifoldSpec,
    pub input: InputSection,
    pub target: Target,
    pub data: BoundData,
    pub spectrum: SpectrumSection,
    pub curvature: CurvatureSection,
    pub numeric: Option<(CurvatureBundle, SpectrumResult)>,
    pub spectrum_s: f64,
}

pub fn coordinate_count(target: &Target) -> usize {
    match target {
        Target::Model(m) => m.coordinate_count(),
        Target::Sampled { immersion, .. } => immersion.ambient,
    }
}

fn multiplicities(values: &[f64]) -> Vec<usize> {
    cluster_eigenvalues(values, DEFAULT_CLUSTER_TOL)
        .iter()
        .map(|c| c.size)
        .collect()
}

fn model_label(spec: &ManifoldSpec, target: &Target) -> String {
    match target {
        Target::Model(m) => m.id(),
        Target::Sampled { immersion, grid } => format!(
            "fourier_immersion(n={}, N={}, terms={}, grid={:?})@{}",
            spec.dim,
            immersion.ambient,
            immersion.terms.len(),
            grid.sizes(),
            match spec.ambient {
                Ambient::Euclidean => "euclidean",
                Ambient::UnitSphere => "unit_sphere",
            }
        ),
    }
}

/// Smooth, non-symmetric probe for the projection identity.
fn probe(b: &CurvatureBundle) -> Vec<f64> {
    b.grid().sample(|x| {
        x.iter()
            .enumerate()
            .map(|(i, v)| ((i + 1) as f64 * v + 0.3).sin())
            .product::<f64>()
            + x[0].cos()
    })
}

/// Computes the spectrum and curvature data for `spec`. `minimum` raises the
/// eigenvalue count when a command needs more than the user asked for.
pub fn prepare(
    spec: ManifoldSpec,
    text: &str,
    path: Option<&Path>,
    opts: &RunOptions,
    minimum: usize,
) -> Result<Prepared, CliError> {
    let target = spec.target()?;
    let requested = opts
        .count
        .or(spec.k)
        .unwrap_or_else(|| eigenvalues_needed(spec.dim));
    if requested == 0 {
        return Err(CliError::InvalidArgs(
            "eigenvalue count must be positive".into(),
        ));
    }
    let count = requested.max(minimum);
    let seed = opts.seed.or(spec.seed).unwrap_or(DEFAULT_SEED);
    let label = model_label(&spec, &target);
    let start = Instant::now();
    let (data, spectrum_section, numeric, constants, identities) = match &target {
        Target::Model(m) => {
            let data = BoundData::from_model(m, count)?;
            let section = SpectrumSection {
                method: "closed_form".into(),
                multiplicities: multiplicities(&data.eigenvalues),
                residuals: vec![0.0; data.eigenvalues.len()],
                values: data.eigenvalues.clone(),
                orthonormality_defect: None,
                asymmetry_defect: None,
                operator_applications: None,
            };
            (data, section, None, Some(model_constants(m)?), None)
        }
        Target::Sampled { immersion, grid } => {
            let coeffs = paneitz_core::coefficients::paneitz_coefficients(spec.dim)?.values();
            let options = SpectrumOptions {
                solver: spec.solver.into(),
                seed,
                ..Default::default()
            };
            let (b, s) = spectrum(immersion, grid, &coeffs, count, &options)?;
            let data = BoundData::from_bundle(&label, &b, &s, spec.ambient)?;
            let section = SpectrumSection {
                method: match s.method {
                    SolverChoice::Dense => "dense",
                    _ => "lanczos",
                }
                .into(),
                values: s.eigenvalues.clone(),
                multiplicities: multiplicities(&s.eigenvalues),
                residuals: s.residuals.clone(),
                orthonormality_defect: Some(s.orthonormality_defect),
                asymmetry_defect: s.asymmetry_defect,
                operator_applications: Some(s.applications),
            };
            let ids = b.position_identities(&probe(&b))?;
            (data, section, Some((b, s)), None, Some(ids))
        }
    };
    let data = match opts.tol {
        Some(t) => data.with_tol_eq(t),
        None => data,
    };
    let curvature = CurvatureSection {
        n: data.n,
        ambient: data.ambient,
        volume: data.volume,
        h2_integral: data.h2,
        h4_integral: data.h4,
        scalar_integral: data.scalar,
        q_integral: data.q,
        first_mode: data.first.clone(),
        constants,
        position_identities: identities,
    };
    let input = InputSection {
        spec_path: path.map(|p| p.display().to_string()),
        spec_sha256: sha256_hex(text),
        spec: spec.clone(),
        count,
        seed,
        tol_eq: data.tol_eq,
    };
    Ok(Prepared {
        spec,
        input,
        target,
        data,
        spectrum: spectrum_section,
        curvature,
        numeric,
        spectrum_s: start.elapsed().as_secs_f64(),
    })
}

impl Prepared {
    pub fn report(&self, command: &str) -> ReportFile {
        ReportFile {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            input: self.input.clone(),
            spectrum: self.spectrum.clone(),
            curvature: self.curvature.clone(),
            bounds: Vec::new(),
            refusals: Vec::new(),
            diagnosis: self.data.diagnosis.clone(),
            proof_chain: None,
            timings: Timings {
                spectrum_s: self.spectrum_s,
                ..Default::default()
            },
        }
    }

    /// The chain to replay: the one behind `bound` if given, otherwise the
    /// one the dimension and ambient admit.
    pub fn chain_for(&self, bound: Option<BoundId>) -> Result<ChainTheorem, CliError> {
        if let Some(id) = bound {
            return ChainTheorem::for_bound(id).ok_or_else(|| {
                CliError::InvalidArgs(format!("{id} has no proof chain to replay"))
            });
        }
        let n = self.data.n;
        match (n, self.data.ambient) {
            (4, _) => Ok(ChainTheorem::Thm11),
            (n, _) if n > 4 => Ok(ChainTheorem::Thm12),
            (_, Ambient::UnitSphere) => Ok(ChainTheorem::Thm13),
            _ => Err(CliError::Lab(LabError::DimensionGate {
                bound: "replay".into(),
                reason: format!("no proof chain for n = {n} in Euclidean space"),
            })),
        }
    }

    pub fn replay(
        &self,
        theorem: ChainTheorem,
        tol: Option<f64>,
    ) -> Result<ProofChainReport, CliError> {
        match (&self.target, &self.numeric) {
            (Target::Model(m), _) => replay_model(m, theorem, tol.unwrap_or(REPLAY_TOL_ANALYTIC)),
            (Target::Sampled { .. }, Some((b, s))) => {
                let space = GridSpace::new(b)?;
                Ok(replay_proof(
                    theorem,
                    &space,
                    &EigenBasis::from(s),
                    tol.unwrap_or(REPLAY_TOL_NUMERICAL),
                )?)
            }
            (Target::Sampled { .. }, None) => {
                unreachable!("sampled targets always carry a spectrum")
            }
        }
    }
}

fn replay_model(
    m: &ModelManifold,
    theorem: ChainTheorem,
    tol: f64,
) -> Result<ProofChainReport, CliError> {
    let space = PolySpace::new(m)?;
    let eig = space.eigenpairs(space.coordinates().len() + 1)?;
    Ok(replay_proof(theorem, &space, &eig, tol)?)
}

/// Bound reports and refusals; an explicitly requested bound that is refused
/// is returned as the error.
pub fn evaluate_bounds(
    p: &Prepared,
    selection: Selection,
) -> (
    Vec<paneitz_core::bounds::BoundReport>,
    Vec<Refusal>,
    Option<CliError>,
) {
    let ids = match selection {
        Selection::All => applicable_bounds(&p.data),
        Selection::One(id) => vec![id],
    };
    let mut reports = Vec::new();
    let mut refusals = Vec::new();
    let mut failure = None;
    for id in ids {
        match verify(&p.data, id) {
            Ok(r) => reports.push(r),
            Err(e) => {
                refusals.push(Refusal {
                    bound: id,
                    reason: e.to_string(),
                });
                if selection != Selection::All {
                    failure = Some(CliError::Lab(e));
                }
            }
        }
    }
    (reports, refusals, failure)
}

/// Exit code for a finished report.
pub fn exit_code(report: &ReportFile, refused: bool) -> i32 {
    if refused {
        return EXIT_INVALID;
    }
    let violated = report.bounds.iter().any(|b| b.violated)
        || report.proof_chain.as_ref().is_some_and(|p| !p.passed);
    if violated {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}
