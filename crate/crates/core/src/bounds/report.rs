//! Report types shared by the bound evaluators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::LabError;

/// Equality tolerance for closed-form inputs.
pub const TOL_EQ_ANALYTIC: f64 = 1e-8;
/// Equality tolerance for discretized inputs.
pub const TOL_EQ_NUMERICAL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundId {
    #[serde(rename = "thm_1_1")]
    Thm11,
    #[serde(rename = "cor_1_1")]
    Cor11,
    #[serde(rename = "thm_1_2")]
    Thm12,
    #[serde(rename = "cor_3_1")]
    Cor31,
    #[serde(rename = "thm_1_3")]
    Thm13,
    #[serde(rename = "chenli_l1")]
    ChenLiL1,
    #[serde(rename = "chenli_l2")]
    ChenLiL2,
    #[serde(rename = "proof_chain")]
    ProofChain,
}

impl BoundId {
    /// Every bound with a direct evaluator.
    pub const ALL: [BoundId; 7] = [
        BoundId::Thm11,
        BoundId::Cor11,
        BoundId::Thm12,
        BoundId::Cor31,
        BoundId::Thm13,
        BoundId::ChenLiL1,
        BoundId::ChenLiL2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::Thm11 => "thm_1_1",
            BoundId::Cor11 => "cor_1_1",
            BoundId::Thm12 => "thm_1_2",
            BoundId::Cor31 => "cor_3_1",
            BoundId::Thm13 => "thm_1_3",
            BoundId::ChenLiL1 => "chenli_l1",
            BoundId::ChenLiL2 => "chenli_l2",
            BoundId::ProofChain => "proof_chain",
        }
    }

    /// Geometries on which the bound can be attained.
    pub fn equality_cases(self) -> &'static [MatchedCase] {
        match self {
            BoundId::Thm11 | BoundId::Cor11 | BoundId::ChenLiL1 | BoundId::ProofChain => {
                &[MatchedCase::RoundSphere, MatchedCase::MinimalConstRInSphere]
            }
            BoundId::Thm12 | BoundId::Cor31 | BoundId::ChenLiL2 => &[MatchedCase::RoundSphere],
            BoundId::Thm13 => &[],
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BoundId::ALL
            .into_iter()
            .chain([BoundId::ProofChain])
            .find(|b| b.as_str() == s)
            .ok_or_else(|| LabError::InvalidModel(format!("unknown bound id {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchedCase {
    RoundSphere,
    MinimalConstRInSphere,
    None,
}

/// Which equality geometry the curvature fields are consistent with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualityDiagnosis {
    /// S ≡ n|H|².
    pub umbilical: bool,
    pub constant_h: bool,
    pub constant_r: bool,
    /// Mean curvature vector is exactly the normal of some round sphere
    /// containing M, i.e. y + H/|H|² is constant.
    pub minimal_in_sphere: bool,
    pub matched_case: MatchedCase,
}

impl EqualityDiagnosis {
    pub fn from_flags(
        umbilical: bool,
        constant_h: bool,
        constant_r: bool,
        minimal_in_sphere: bool,
    ) -> Self {
        let matched_case = if umbilical && constant_h {
            MatchedCase::RoundSphere
        } else if minimal_in_sphere && constant_r {
            MatchedCase::MinimalConstRInSphere
        } else {
            MatchedCase::None
        };
        EqualityDiagnosis {
            umbilical,
            constant_h,
            constant_r,
            minimal_in_sphere,
            matched_case,
        }
    }
}

/// What a report was computed from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub manifold: String,
    pub grid: Option<Vec<usize>>,
    pub eigenvalue_count: usize,
    pub tol_eq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_id: BoundId,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs.
    pub slack: f64,
    pub relative_slack: f64,
    /// |slack| ≤ tol_eq·rhs.
    pub equality: bool,
    /// The manifold is not an equality case of this bound.
    pub strictness_expected: bool,
    /// slack < −tol_eq·rhs.
    pub violated: bool,
    /// Hypotheses that did not hold and were worked around.
    pub notes: Vec<String>,
    pub inputs: InputDigest,
}

impl BoundReport {
    pub fn new(
        bound_id: BoundId,
        lhs: f64,
        rhs: f64,
        matched: MatchedCase,
        notes: Vec<String>,
        inputs: InputDigest,
    ) -> Self {
        let slack = rhs - lhs;
        let tol = inputs.tol_eq * rhs.abs();
        BoundReport {
            bound_id,
            lhs,
            rhs,
            slack,
            relative_slack: if rhs != 0.0 { slack / rhs.abs() } else { slack },
            equality: slack.abs() <= tol,
            strictness_expected: !bound_id.equality_cases().contains(&matched),
            violated: slack < -tol,
            notes,
            inputs,
        }
    }

    /// Equality was observed where the geometry rules it out.
    pub fn unexpected_equality(&self) -> bool {
        self.equality && self.strictness_expected
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in BoundId::ALL {
            assert_eq!(id.as_str().parse::<BoundId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{id}\""));
        }
        assert!("thm_9".parse::<BoundId>().is_err());
    }

    #[test]
    fn report_flags() {
        let inputs = InputDigest {
            manifold: "m".into(),
            grid: None,
            eigenvalue_count: 5,
            tol_eq: 1e-8,
        };
        let r = BoundReport::new(
            BoundId::Thm11,
            1.0,
            1.0 + 1e-10,
            MatchedCase::RoundSphere,
            vec![],
            inputs.clone(),
        );
        assert!(r.equality && !r.violated && !r.strictness_expected && !r.unexpected_equality());
        let r = BoundReport::new(
            BoundId::Thm13,
            2.0,
            1.0,
            MatchedCase::RoundSphere,
            vec![],
            inputs,
        );
        assert!(r.violated && r.strictness_expected);
        assert_eq!(r.relative_slack, -1.0);
    }

    #[test]
    fn matched_case_priority() {
        let d = EqualityDiagnosis::from_flags(true, true, true, true);
        assert_eq!(d.matched_case, MatchedCase::RoundSphere);
        let d = EqualityDiagnosis::from_flags(false, true, true, true);
        assert_eq!(d.matched_case, MatchedCase::MinimalConstRInSphere);
        let d = EqualityDiagnosis::from_flags(false, true, false, true);
        assert_eq!(d.matched_case, MatchedCase::None);
    }
}
