//! JSON report written by every command.

use serde::Serialize;
use sha2::{Digest, Sha256};

use paneitz_core::bounds::{
    BoundId, BoundReport, EqualityDiagnosis, FirstModeIntegrals, ProofChainReport,
};
use paneitz_core::catalog::{Ambient, ModelConstants};
use paneitz_core::discrete::PositionIdentities;

use crate::specfile::ManifoldSpec;

pub const TOOL: &str = "paneitz-lab";

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, Serialize)]
pub struct InputSection {
    pub spec_path: Option<String>,
    pub spec_sha256: String,
    pub spec: ManifoldSpec,
    pub count: usize,
    pub seed: u64,
    pub tol_eq: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSection {
    /// "closed_form", "dense" or "lanczos".
    pub method: String,
    pub values: Vec<f64>,
    /// Sizes of the eigenvalue clusters, in order.
    pub multiplicities: Vec<usize>,
    pub residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orthonormality_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymmetry_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator_applications: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSection {
    pub n: usize,
    pub ambient: Ambient,
    pub volume: f64,
    /// ∫|H|² with H the Euclidean mean curvature.
    pub h2_integral: f64,
    pub h4_integral: f64,
    pub scalar_integral: f64,
    pub q_integral: f64,
    pub first_mode: Option<FirstModeIntegrals>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<ModelConstants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position_identities: Option<PositionIdentities>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Refusal {
    pub bound: BoundId,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub spectrum_s: f64,
    pub bounds_s: f64,
    pub replay_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input: InputSection,
    pub spectrum: SpectrumSection,
    pub curvature: CurvatureSection,
    pub bounds: Vec<BoundReport>,
    pub refusals: Vec<Refusal>,
    pub diagnosis: EqualityDiagnosis,
    pub proof_chain: Option<ProofChainReport>,
    pub timings: Timings,
}

impl ReportFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are plain data")
    }

    /// One line per bound for the terminal.
    pub fn summary(&self) -> Vec<String> {
        let mut out = vec![format!(
            "{}: {} eigenvalues ({}), lowest {:?}",
            self.input.spec_path.as_deref().unwrap_or("spec"),
            self.spectrum.values.len(),
            self.spectrum.method,
            self.spectrum.values.first()
        )];
        for b in &self.bounds {
            let state = if b.violated {
                "VIOLATED"
            } else if b.equality {
                "equality"
            } else {
                "holds"
            };
            out.push(format!(
                "  {:<10} lhs {:.10} rhs {:.10} slack {:.3e} {state}",
                b.bound_id.as_str(),
                b.lhs,
                b.rhs,
                b.slack
            ));
        }
        for r in &self.refusals {
            out.push(format!("  {:<10} refused: {}", r.bound.as_str(), r.reason));
        }
        if let Some(p) = &self.proof_chain {
            let worst = p.worst_step().map_or(0.0, |s| s.relative_slack);
            out.push(format!(
                "  replay     {} steps, worst relative slack {worst:.3e}, final {:.10} <= {:.10}, {}",
                p.steps.len(),
                p.final_lhs,
                p.final_rhs,
                if p.passed { "passed" } else { "FAILED" }
            ));
        }
        out
    }
}
