//! Step-by-step replay of the trial-function arguments behind the bounds.
//!
//! Coordinates are rotated by the orthogonal factor of a QR decomposition so
//! that each rotated coordinate, times the weight eigenfunction, is orthogonal
//! to the eigenfunctions below it. The rotated coordinates then serve as
//! Rayleigh–Ritz trial functions, and every inequality and identity used to
//! sum them is evaluated and recorded.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::data::snap_kernel;
use super::poly::EigenBasis;
use super::report::{BoundId, BoundReport, InputDigest, MatchedCase};
use super::space::FunctionSpace;
use super::verify::{am_gm, optimal_delta};
use crate::error::{LabError, Result};

/// Tolerance for `|y|² = 1` before a sphere-only argument is replayed.
const SPHERE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainTheorem {
    /// Weighted by the constant eigenfunction on M⁴.
    #[serde(rename = "thm_1_1")]
    Thm11,
    /// Weighted by the first eigenfunction, n > 4.
    #[serde(rename = "thm_1_2")]
    Thm12,
    /// Unweighted, for submanifolds of the unit sphere.
    #[serde(rename = "thm_1_3")]
    Thm13,
}

impl ChainTheorem {
    /// The chain behind a bound; sphere-relative bounds replay in the
    /// Euclidean embedding.
    pub fn for_bound(id: BoundId) -> Option<Self> {
        match id {
            BoundId::Thm11 | BoundId::Cor11 => Some(ChainTheorem::Thm11),
            BoundId::Thm12 | BoundId::Cor31 => Some(ChainTheorem::Thm12),
            BoundId::Thm13 => Some(ChainTheorem::Thm13),
            _ => None,
        }
    }

    pub fn bound(self) -> BoundId {
        match self {
            ChainTheorem::Thm11 => BoundId::Thm11,
            ChainTheorem::Thm12 => BoundId::Thm12,
            ChainTheorem::Thm13 => BoundId::Thm13,
        }
    }

    fn weighted(self) -> bool {
        self != ChainTheorem::Thm13
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// lhs ≤ rhs.
    Inequality,
    /// lhs = rhs.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStep {
    pub label: String,
    pub kind: StepKind,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs for inequalities, −|rhs − lhs| for identities.
    pub slack: f64,
    /// slack / max(|lhs|, |rhs|, 1).
    pub relative_slack: f64,
}

impl ChainStep {
    fn new(label: impl Into<String>, kind: StepKind, lhs: f64, rhs: f64) -> Self {
        let slack = match kind {
            StepKind::Inequality => rhs - lhs,
            StepKind::Identity => -(rhs - lhs).abs(),
        };
        ChainStep {
            label: label.into(),
            kind,
            lhs,
            rhs,
            slack,
            relative_slack: slack / lhs.abs().max(rhs.abs()).max(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofChainReport {
    pub theorem: ChainTheorem,
    pub steps: Vec<ChainStep>,
    /// max_{β<α} |∫ z_α w u_β| relative to the largest entry of the moment matrix.
    pub gram_schmidt_residual: f64,
    /// max |∫ φ_α u_β| / ‖φ_α‖ over the eigenfunctions each trial function must avoid.
    pub orthogonality_residual: f64,
    /// Numerical rank of the moment matrix; a deficient rank only means some
    /// rotated coordinates carry no moment and is harmless.
    pub coordinate_rank: usize,
    pub delta: f64,
    pub delta_degenerate: bool,
    /// max over samples and α of |∇z_α|² − 1.
    pub gradient_excess: f64,
    /// max over samples of |Σ_α |∇z_α|² − n|.
    pub trace_defect: f64,
    pub final_lhs: f64,
    pub final_rhs: f64,
    pub final_slack: f64,
    pub tol: f64,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl ProofChainReport {
    pub fn worst_step(&self) -> Option<&ChainStep> {
        self.steps
            .iter()
            .min_by(|a, b| a.relative_slack.total_cmp(&b.relative_slack))
    }

    /// The chain's final inequality as a bound report.
    pub fn to_bound_report(&self, inputs: InputDigest, matched: MatchedCase) -> BoundReport {
        BoundReport::new(
            BoundId::ProofChain,
            self.final_lhs,
            self.final_rhs,
            matched,
            self.notes.clone(),
            inputs,
        )
    }
}

fn gate(ok: bool, theorem: ChainTheorem, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(LabError::DimensionGate {
            bound: format!("replay {}", theorem.bound()),
            reason: reason.into(),
        })
    }
}

/// Quantities attached to one rotated coordinate.
struct Trial {
    shift: f64,
    phi2: f64,
    form: f64,
    by_parts: f64,
    stokes_lhs: f64,
    grad_mass: f64,
    v2: f64,
}

/// Replays the argument for `theorem` with the eigenpairs `eig`, which must be
/// ascending and orthonormal in `space`.
pub fn replay_proof<S: FunctionSpace>(
    theorem: ChainTheorem,
    space: &S,
    eig: &EigenBasis<S::Function>,
    tol: f64,
) -> Result<ProofChainReport> {
    let n = space.dim();
    let nf = n as f64;
    let c = *space.coefficients();
    let ys = space.coordinates();
    let big_n = ys.len();
    let weighted = theorem.weighted();
    match theorem {
        ChainTheorem::Thm11 => gate(n == 4, theorem, "needs n = 4")?,
        ChainTheorem::Thm12 => gate(n > 4, theorem, "needs n > 4")?,
        ChainTheorem::Thm13 => gate(n != 4, theorem, "needs n != 4")?,
    }
    let needed = if weighted { big_n + 1 } else { big_n };
    if eig.values.len() < needed || eig.functions.len() < needed {
        return Err(LabError::InsufficientEigenvalues {
            bound: format!("replay {}", theorem.bound()),
            need: needed,
            have: eig.values.len().min(eig.functions.len()),
        });
    }
    let values = snap_kernel(&eig.values[..needed]);
    let mut notes = Vec::new();
    if values.windows(2).any(|w| w[1] < w[0]) {
        notes.push("eigenvalues are not ascending".to_string());
    }
    if !weighted {
        if values[0] <= 0.0 {
            return Err(LabError::PositivityViolation(values[0]));
        }
        let mut r2 = space.constant(0.0);
        for y in &ys {
            r2 = space.combine(&[(1.0, &r2), (1.0, &space.product(y, y))]);
        }
        let worst = space
            .samples(&r2)
            .iter()
            .fold(0.0, |m: f64, v| m.max((v - 1.0).abs()));
        gate(
            worst <= SPHERE_TOL,
            theorem,
            "immersion does not lie in the unit sphere",
        )?;
    }

    let weight = if weighted {
        eig.functions[0].clone()
    } else {
        space.constant(1.0)
    };
    let base = if weighted { values[0] } else { 0.0 };
    let columns = if weighted {
        &eig.functions[1..=big_n]
    } else {
        &eig.functions[..big_n]
    };
    let shift = |a: usize| {
        if weighted {
            values[a + 1] - base
        } else {
            values[a]
        }
    };

    // moment matrix and its QR rotation
    let wy: Vec<S::Function> = ys.iter().map(|y| space.product(y, &weight)).collect();
    let moments = DMatrix::from_fn(big_n, big_n, |a, b| space.inner(&wy[a], &columns[b]));
    let scale = moments.amax().max(f64::MIN_POSITIVE);
    let qr = moments.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let coordinate_rank = (0..big_n)
        .filter(|&i| r[(i, i)].abs() > 1e-10 * scale)
        .count();
    let zs: Vec<S::Function> = (0..big_n)
        .map(|a| {
            let terms: Vec<(f64, &S::Function)> = (0..big_n).map(|g| (q[(g, a)], &ys[g])).collect();
            space.combine(&terms)
        })
        .collect();

    let w2 = space.product(&weight, &weight);
    let mass = space.integrate(&w2);
    let grad_w = |z: &S::Function| space.grad_dot(z, &weight);
    let lap_w = space.laplacian(&weight);
    let q_field = space.q_curvature();

    let mut gram_schmidt_residual: f64 = 0.0;
    let mut orthogonality_residual: f64 = 0.0;
    let mut trials = Vec::with_capacity(big_n);
    let mut grad_norms = Vec::with_capacity(big_n);
    for (a, z) in zs.iter().enumerate() {
        let zw = space.product(z, &weight);
        for col in &columns[..a] {
            gram_schmidt_residual = gram_schmidt_residual.max(space.inner(&zw, col).abs() / scale);
        }
        let phi = if weighted {
            let mean = space.inner(z, &w2) / mass;
            space.combine(&[(1.0, &zw), (-mean, &weight)])
        } else {
            z.clone()
        };
        let phi2 = space.inner(&phi, &phi);
        // a trial function for the (a+1)-th slot must avoid every eigenfunction below it
        let avoid = if weighted {
            &eig.functions[..a + 1]
        } else {
            &eig.functions[..a]
        };
        if phi2 > 0.0 {
            for u in avoid {
                orthogonality_residual =
                    orthogonality_residual.max(space.inner(&phi, u).abs() / phi2.sqrt());
            }
        }
        let form = space.inner(&phi, &space.paneitz(&phi)?) - base * phi2;

        let grad2 = space.grad_dot(z, z);
        let lap_z = space.laplacian(z);
        let v = space.combine(&[(1.0, &space.product(&weight, &lap_z)), (2.0, &grad_w(z))]);
        let v2 = space.inner(&v, &v);
        let mut by_parts = v2 + space.inner(&w2, &space.drift_form(z, z))
            - 2.0 * space.inner(&grad2, &space.product(&weight, &lap_w));
        if !weighted {
            by_parts += c.q_factor * space.inner(&q_field, &space.product(z, z));
        }
        let grad_mass = space.inner(&w2, &grad2);
        trials.push(Trial {
            shift: shift(a),
            phi2,
            form,
            by_parts,
            stokes_lhs: space.inner(&phi, &v),
            grad_mass,
            v2,
        });
        grad_norms.push(space.samples(&grad2));
    }

    let points = grad_norms[0].len();
    let gradient_excess = grad_norms
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |m, v| m.max(v - 1.0));
    let trace_defect = (0..points)
        .map(|p| (grad_norms.iter().map(|g| g[p]).sum::<f64>() - nf).abs())
        .fold(0.0, f64::max);

    // closed forms of the two summed integrals
    let h2 = space.mean_curvature2();
    let rr = space.scalar_curvature();
    let trace_t = nf * c.a + c.b;
    let (j1, j2, j1_final) = if weighted {
        let h2w = space.inner(&h2, &w2);
        let rw = space.inner(&rr, &w2);
        let gw = space.integrate(&space.grad_dot(&weight, &weight));
        let j1 = nf * nf * h2w + trace_t * rw + 2.0 * (nf + 2.0) * gw;
        let j2 = nf * nf * h2w + 4.0 * gw;
        let gauss = nf * (nf * nf - 4.0) / 2.0 * h2w + 2.0 * (nf + 2.0) * gw;
        (
            j1,
            j2,
            if theorem == ChainTheorem::Thm12 {
                gauss
            } else {
                j1
            },
        )
    } else {
        let h2i = space.integrate(&h2);
        let j1 =
            nf * nf * h2i + trace_t * space.integrate(&rr) + c.q_factor * space.integrate(&q_field);
        (j1, nf * nf * h2i, j1)
    };
    let opt = optimal_delta(j1_final, j2);
    let delta = if opt.degenerate { 1.0 } else { opt.delta };
    if opt.degenerate {
        notes.push("degenerate delta: a summed integral vanishes, delta = 1 used".to_string());
    }

    let mut steps = Vec::new();
    for (a, t) in trials.iter().enumerate() {
        let k = a + 1;
        steps.push(ChainStep::new(
            format!("rayleigh_ritz[{k}]"),
            StepKind::Inequality,
            t.shift * t.phi2,
            t.form,
        ));
        steps.push(ChainStep::new(
            format!("integration_by_parts[{k}]"),
            StepKind::Identity,
            t.form,
            t.by_parts,
        ));
    }
    let rr_sum: f64 = trials.iter().map(|t| t.shift * t.phi2).sum();
    let form_sum: f64 = trials.iter().map(|t| t.form).sum();
    steps.push(ChainStep::new(
        "rayleigh_ritz_sum",
        StepKind::Inequality,
        rr_sum,
        form_sum,
    ));
    steps.push(ChainStep::new(
        "quadratic_form_sum",
        StepKind::Identity,
        form_sum,
        j1,
    ));

    let mut clamped = false;
    for (a, t) in trials.iter().enumerate() {
        let k = a + 1;
        if t.shift < 0.0 {
            clamped = true;
        }
        let root = t.shift.max(0.0).sqrt();
        steps.push(ChainStep::new(
            format!("stokes[{k}]"),
            StepKind::Identity,
            t.stokes_lhs,
            -t.grad_mass,
        ));
        steps.push(ChainStep::new(
            format!("cauchy_schwarz[{k}]"),
            StepKind::Inequality,
            root * t.grad_mass,
            0.5 * (delta * t.shift.max(0.0) * t.phi2 + t.v2 / delta),
        ));
    }
    if clamped {
        notes.push(
            "out of theorem hypotheses: negative shifted eigenvalue clamped to 0".to_string(),
        );
    }
    let weighted_grad: f64 = trials
        .iter()
        .map(|t| t.shift.max(0.0).sqrt() * t.grad_mass)
        .sum();
    let v2_sum: f64 = trials.iter().map(|t| t.v2).sum();
    let cs_bound = 0.5 * (delta * rr_sum + v2_sum / delta);
    steps.push(ChainStep::new(
        "cauchy_schwarz_sum",
        StepKind::Inequality,
        weighted_grad,
        cs_bound,
    ));
    steps.push(ChainStep::new(
        "gradient_form_sum",
        StepKind::Identity,
        v2_sum,
        j2,
    ));
    steps.push(ChainStep::new(
        "summed_bound",
        StepKind::Inequality,
        cs_bound,
        am_gm(j1, j2, delta),
    ));

    let lhs_sum: f64 = (0..n).map(|a| shift(a).max(0.0).sqrt()).sum();
    steps.push(ChainStep::new(
        "sorting",
        StepKind::Inequality,
        mass * lhs_sum,
        weighted_grad,
    ));
    if theorem == ChainTheorem::Thm12 {
        steps.push(ChainStep::new("gauss", StepKind::Inequality, j1, j1_final));
    }
    steps.push(ChainStep::new(
        "optimal_delta",
        StepKind::Identity,
        am_gm(j1_final, j2, delta),
        opt.value,
    ));
    let final_rhs = opt.value / mass;
    steps.push(ChainStep::new(
        "final",
        StepKind::Inequality,
        lhs_sum,
        final_rhs,
    ));

    let passed = steps.iter().all(|s| s.relative_slack >= -tol)
        && gradient_excess <= tol
        && trace_defect <= tol * nf
        && gram_schmidt_residual <= tol
        && orthogonality_residual <= tol;
    Ok(ProofChainReport {
        theorem,
        steps,
        gram_schmidt_residual,
        orthogonality_residual,
        coordinate_rank,
        delta,
        delta_degenerate: opt.degenerate,
        gradient_excess,
        trace_defect,
        final_lhs: lhs_sum,
        final_rhs,
        final_slack: final_rhs - lhs_sum,
        tol,
        passed,
        notes,
    })
}
