//! Direct evaluation of each eigenvalue inequality.

use serde::Serialize;

use super::data::BoundData;
use super::report::{BoundId, BoundReport};
use crate::catalog::Ambient;
use crate::error::{LabError, Result};

/// Minimizer of (δp + q/δ)/2 over δ > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalDelta {
    pub delta: f64,
    /// √(pq), the minimum.
    pub value: f64,
    /// p or q vanishes; the minimum is not attained and the bound is vacuous.
    pub degenerate: bool,
}

pub fn optimal_delta(p: f64, q: f64) -> OptimalDelta {
    let degenerate = p <= 0.0 || q <= 0.0;
    OptimalDelta {
        delta: if p > 0.0 {
            (q / p).sqrt()
        } else {
            f64::INFINITY
        },
        value: (p.max(0.0) * q.max(0.0)).sqrt(),
        degenerate,
    }
}

/// (δp + q/δ)/2.
pub fn am_gm(p: f64, q: f64, delta: f64) -> f64 {
    0.5 * (delta * p + q / delta)
}

fn gate(id: BoundId, ok: bool, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(LabError::DimensionGate {
            bound: id.to_string(),
            reason: reason.to_string(),
        })
    }
}

fn need(id: BoundId, d: &BoundData, count: usize) -> Result<()> {
    if d.eigenvalues.len() < count {
        return Err(LabError::InsufficientEigenvalues {
            bound: id.to_string(),
            need: count,
            have: d.eigenvalues.len(),
        });
    }
    Ok(())
}

/// Σ √max(v, 0), noting every clamped value.
fn sqrt_sum(values: impl IntoIterator<Item = f64>, what: &str, notes: &mut Vec<String>) -> f64 {
    values
        .into_iter()
        .map(|v| {
            if v < 0.0 {
                notes.push(format!(
                    "out of theorem hypotheses: {what} = {v:e} < 0 clamped to 0"
                ));
            }
            v.max(0.0).sqrt()
        })
        .sum()
}

fn finish(id: BoundId, d: &BoundData, lhs: f64, rhs: f64, notes: Vec<String>) -> BoundReport {
    BoundReport::new(id, lhs, rhs, d.diagnosis.matched_case, notes, d.digest())
}

fn four_dim_bound(id: BoundId, d: &BoundData) -> Result<BoundReport> {
    gate(id, d.n == 4, "needs n = 4")?;
    need(id, d, 5)?;
    let mut notes = Vec::new();
    if d.eigenvalues[0] != 0.0 {
        notes.push(format!(
            "out of theorem hypotheses: lowest eigenvalue {:e} is not the constant mode",
            d.eigenvalues[0]
        ));
    }
    let lhs = sqrt_sum(d.eigenvalues[1..5].iter().copied(), "lambda_j", &mut notes);
    let rhs = 4.0
        * ((16.0 * d.h2 + 2.0 / 3.0 * d.scalar) * d.h2)
            .max(0.0)
            .sqrt()
        / d.volume;
    Ok(finish(id, d, lhs, rhs, notes))
}

/// Σ_{j=1}^4 λ_j^{1/2} ≤ 4√(∫(16|H|²+⅔R)∫|H|²)/vol for M⁴ ⊂ R^N.
pub fn verify_thm_1_1(d: &BoundData) -> Result<BoundReport> {
    four_dim_bound(BoundId::Thm11, d)
}

/// The four-dimensional bound for M⁴ ⊂ S^N(1), with |H|² + 1 in both integrals.
pub fn verify_cor_1_1(d: &BoundData) -> Result<BoundReport> {
    gate(
        BoundId::Cor11,
        d.ambient == Ambient::UnitSphere,
        "needs a submanifold of the unit sphere",
    )?;
    four_dim_bound(BoundId::Cor11, d)
}

fn gap_bound(id: BoundId, d: &BoundData) -> Result<BoundReport> {
    let n = d.n;
    gate(id, n > 4, "needs n > 4")?;
    need(id, d, n + 1)?;
    let first = d
        .first
        .as_ref()
        .ok_or_else(|| LabError::InsufficientEigenvalues {
            bound: id.to_string(),
            need: 1,
            have: 0,
        })?;
    let mut notes = Vec::new();
    if first.multiplicity > 1 {
        notes.push(format!(
            "lowest eigenvalue has multiplicity {}; the first computed eigenfunction is used",
            first.multiplicity
        ));
    }
    let l1 = d.eigenvalues[0];
    let lhs = sqrt_sum(
        (1..=n).map(|j| d.eigenvalues[j] - l1),
        "lambda_{j+1} - lambda_1",
        &mut notes,
    );
    let nf = n as f64;
    let p = nf * (nf * nf - 4.0) / 2.0 * first.h2 + 2.0 * (nf + 2.0) * first.gradient;
    let q = nf * nf * first.h2 + 4.0 * first.gradient;
    Ok(finish(id, d, lhs, optimal_delta(p, q).value, notes))
}

/// Σ_{j=1}^n (λ_{j+1} − λ_1)^{1/2} against the first-eigenfunction integrals, n > 4.
pub fn verify_thm_1_2(d: &BoundData) -> Result<BoundReport> {
    gap_bound(BoundId::Thm12, d)
}

/// The gap bound for Mⁿ ⊂ S^N(1) with |H|² + 1.
pub fn verify_cor_3_1(d: &BoundData) -> Result<BoundReport> {
    gate(
        BoundId::Cor31,
        d.ambient == Ambient::UnitSphere,
        "needs a submanifold of the unit sphere",
    )?;
    gap_bound(BoundId::Cor31, d)
}

/// Σ_{j=1}^n λ_j^{1/2} < n√(∫(n²(|H|²+1) + (na+b)R + (n−4)/2·Q)∫(|H|²+1))/vol
/// for a positive operator on Mⁿ ⊂ S^N(1), n ≠ 4.
pub fn verify_thm_1_3(d: &BoundData) -> Result<BoundReport> {
    let id = BoundId::Thm13;
    let n = d.n;
    gate(id, n != 4, "needs n != 4")?;
    gate(
        id,
        d.ambient == Ambient::UnitSphere,
        "needs a submanifold of the unit sphere",
    )?;
    need(id, d, n)?;
    if d.eigenvalues[0] <= 0.0 {
        return Err(LabError::PositivityViolation(d.eigenvalues[0]));
    }
    let c = d.coefficients()?;
    let nf = n as f64;
    let mut notes = Vec::new();
    let lhs = sqrt_sum(d.eigenvalues[..n].iter().copied(), "lambda_j", &mut notes);
    let first = nf * nf * d.h2 + (nf * c.a + c.b) * d.scalar + c.q_factor * d.q;
    let rhs = nf * (first * d.h2).max(0.0).sqrt() / d.volume;
    Ok(finish(id, d, lhs, rhs, notes))
}

/// λ_1 ≤ ∫(16|H|²+⅔R)∫|H|²/vol² on M⁴.
pub fn verify_chenli_l1(d: &BoundData) -> Result<BoundReport> {
    let id = BoundId::ChenLiL1;
    gate(id, d.n == 4, "needs n = 4")?;
    need(id, d, 2)?;
    let rhs = (16.0 * d.h2 + 2.0 / 3.0 * d.scalar) * d.h2 / (d.volume * d.volume);
    Ok(finish(id, d, d.eigenvalues[1], rhs, Vec::new()))
}

/// λ_2 ≤ (½n(n²−4)∫|H|⁴ + (n−4)/2·∫Q)/vol for n ≥ 7.
pub fn verify_chenli_l2(d: &BoundData) -> Result<BoundReport> {
    let id = BoundId::ChenLiL2;
    gate(id, d.n >= 7, "needs n >= 7")?;
    need(id, d, 2)?;
    let nf = d.n as f64;
    let rhs = (0.5 * nf * (nf * nf - 4.0) * d.h4 + (nf - 4.0) / 2.0 * d.q) / d.volume;
    Ok(finish(id, d, d.eigenvalues[1], rhs, Vec::new()))
}

/// Both Chen–Li bounds where their dimension gates allow.
pub fn verify_intro_bounds(d: &BoundData) -> Vec<BoundReport> {
    [verify_chenli_l1(d), verify_chenli_l2(d)]
        .into_iter()
        .filter_map(|r| r.ok())
        .collect()
}

pub fn verify(d: &BoundData, id: BoundId) -> Result<BoundReport> {
    match id {
        BoundId::Thm11 => verify_thm_1_1(d),
        BoundId::Cor11 => verify_cor_1_1(d),
        BoundId::Thm12 => verify_thm_1_2(d),
        BoundId::Cor31 => verify_cor_3_1(d),
        BoundId::Thm13 => verify_thm_1_3(d),
        BoundId::ChenLiL1 => verify_chenli_l1(d),
        BoundId::ChenLiL2 => verify_chenli_l2(d),
        BoundId::ProofChain => Err(LabError::Unsupported(
            "proof_chain reports come from replay_proof".into(),
        )),
    }
}

/// Bounds whose dimension and ambient gates admit `d`.
pub fn applicable_bounds(d: &BoundData) -> Vec<BoundId> {
    BoundId::ALL
        .into_iter()
        .filter(|&id| {
            let sphere = d.ambient == Ambient::UnitSphere;
            match id {
                BoundId::Thm11 | BoundId::ChenLiL1 => d.n == 4,
                BoundId::Cor11 => d.n == 4 && sphere,
                BoundId::Thm12 => d.n > 4,
                BoundId::Cor31 => d.n > 4 && sphere,
                BoundId::Thm13 => d.n != 4 && sphere,
                BoundId::ChenLiL2 => d.n >= 7,
                BoundId::ProofChain => false,
            }
        })
        .collect()
}

/// Minimum number of eigenvalues every applicable bound needs.
pub fn eigenvalues_needed(n: usize) -> usize {
    if n == 4 {
        5
    } else {
        n + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::report::MatchedCase;
    use crate::catalog::ModelManifold;
    use approx::assert_relative_eq;

    fn data(m: &ModelManifold) -> BoundData {
        BoundData::from_model(m, 12).unwrap()
    }

    #[test]
    fn optimal_delta_examples() {
        let o = optimal_delta(1.0, 1.0);
        assert_eq!((o.delta, o.value, o.degenerate), (1.0, 1.0, false));
        let o = optimal_delta(24.0, 16.0);
        assert_relative_eq!(o.value, 8.0 * 6f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(am_gm(24.0, 16.0, o.delta), o.value, max_relative = 1e-15);
        assert!(optimal_delta(4.0, 0.0).degenerate);
        assert!(optimal_delta(0.0, 4.0).delta.is_infinite());
    }

    #[test]
    fn four_sphere_equality() {
        let s4 = ModelManifold::round_sphere(4, 1.0, Ambient::Euclidean).unwrap();
        let r = verify_thm_1_1(&data(&s4)).unwrap();
        assert_relative_eq!(r.lhs, 8.0 * 6f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(r.rhs, 8.0 * 6f64.sqrt(), max_relative = 1e-12);
        assert!(r.equality && !r.strictness_expected);
        let c = verify_chenli_l1(&data(&s4)).unwrap();
        assert_relative_eq!(c.lhs, 24.0, max_relative = 1e-12);
        assert!(c.equality);
        assert!(verify_cor_1_1(&data(&s4)).is_err());
        assert!(verify_thm_1_2(&data(&s4)).is_err());
    }

    #[test]
    fn flat_four_torus_attains_the_four_dimensional_bound() {
        // S¹(1)⁴ is minimal in S⁷(2) with R = 0, an equality geometry
        let t4 = ModelManifold::flat_torus(&[1.0; 4], Ambient::Euclidean).unwrap();
        let d = data(&t4);
        assert_eq!(d.diagnosis.matched_case, MatchedCase::MinimalConstRInSphere);
        let r = verify_thm_1_1(&d).unwrap();
        assert_relative_eq!(r.lhs, 4.0, max_relative = 1e-14);
        assert_relative_eq!(r.rhs, 4.0, max_relative = 1e-14);
        assert!(r.equality && !r.unexpected_equality());
        let c = verify_chenli_l1(&d).unwrap();
        assert_relative_eq!(c.lhs, 1.0);
        assert!(!c.violated);
    }

    #[test]
    fn clifford_product_equality() {
        let h = 0.5f64.sqrt();
        let m = ModelManifold::sphere_product(&[(2, h), (2, h)], Ambient::UnitSphere).unwrap();
        let r = verify_cor_1_1(&data(&m)).unwrap();
        assert_relative_eq!(r.lhs, 32.0 / 3f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(r.rhs, 32.0 / 3f64.sqrt(), max_relative = 1e-12);
        assert!(r.equality);
    }

    #[test]
    fn unbalanced_minimal_product_is_strict() {
        let m =
            ModelManifold::sphere_product(&[(1, 0.5), (3, 0.75f64.sqrt())], Ambient::UnitSphere)
                .unwrap();
        let d = data(&m);
        assert_eq!(d.diagnosis.matched_case, MatchedCase::MinimalConstRInSphere);
        let r = verify_cor_1_1(&d).unwrap();
        assert_relative_eq!(r.lhs, 16.0, max_relative = 1e-12);
        assert_relative_eq!(
            r.rhs,
            4.0 * (16.0f64 + 16.0 / 3.0).sqrt(),
            max_relative = 1e-12
        );
        assert!(!r.equality && r.slack > 0.0);
    }

    #[test]
    fn five_sphere_gap_equality_and_flat_torus_strict() {
        let s5 = ModelManifold::round_sphere(5, 1.0, Ambient::Euclidean).unwrap();
        let r = verify_thm_1_2(&data(&s5)).unwrap();
        assert_relative_eq!(r.lhs, 5.0 * 52.5f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(r.rhs, 5.0 * 52.5f64.sqrt(), max_relative = 1e-12);
        assert!(r.equality);

        let t5 = ModelManifold::flat_torus(&[1.0; 5], Ambient::Euclidean).unwrap();
        let r = verify_thm_1_2(&data(&t5)).unwrap();
        assert_relative_eq!(r.lhs, 5.0, max_relative = 1e-14);
        assert_relative_eq!(r.rhs, 52.5f64.sqrt(), max_relative = 1e-14);
        assert!(!r.equality && r.strictness_expected);
    }

    #[test]
    fn sphere_ambient_gap_bound() {
        let s5 = ModelManifold::round_sphere(5, 1.0, Ambient::UnitSphere).unwrap();
        let r = verify_cor_3_1(&data(&s5)).unwrap();
        assert_relative_eq!(r.rhs, 5.0 * 52.5f64.sqrt(), max_relative = 1e-12);
        assert!(r.equality);

        let t5 = ModelManifold::flat_torus(&[0.2f64.sqrt(); 5], Ambient::UnitSphere).unwrap();
        let r = verify_cor_3_1(&data(&t5)).unwrap();
        // gaps μ² = 25 and |H_e|² = 1 since the torus is minimal in S⁹(1)
        assert_relative_eq!(r.lhs, 25.0, max_relative = 1e-12);
        assert_relative_eq!(r.rhs, 5.0 * 52.5f64.sqrt(), max_relative = 1e-12);
        assert!(r.slack > 0.0);
    }

    #[test]
    fn third_bound() {
        let s5 = ModelManifold::round_sphere(5, 1.0, Ambient::UnitSphere).unwrap();
        let r = verify_thm_1_3(&data(&s5)).unwrap();
        assert_relative_eq!(
            r.lhs,
            (105f64.sqrt() + 4.0 * 945f64.sqrt()) / 4.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(r.rhs, 5.0 * 59.0625f64.sqrt(), max_relative = 1e-12);
        assert!(r.slack > 0.0 && r.strictness_expected);

        let s3 = ModelManifold::round_sphere(3, 1.0, Ambient::UnitSphere).unwrap();
        match verify_thm_1_3(&data(&s3)) {
            Err(LabError::PositivityViolation(l)) => {
                assert_relative_eq!(l, -15.0 / 16.0, max_relative = 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seven_sphere_second_eigenvalue() {
        let s7 = ModelManifold::round_sphere(7, 1.0, Ambient::Euclidean).unwrap();
        let r = verify_chenli_l2(&data(&s7)).unwrap();
        assert_relative_eq!(r.lhs, 216.5625, max_relative = 1e-12);
        assert_relative_eq!(r.rhs, 216.5625, max_relative = 1e-12);
        assert_eq!(verify_intro_bounds(&data(&s7)).len(), 1);
    }

    #[test]
    fn gates() {
        let s5 = ModelManifold::round_sphere(5, 1.0, Ambient::Euclidean).unwrap();
        let d = data(&s5);
        assert!(matches!(
            verify_thm_1_1(&d),
            Err(LabError::DimensionGate { .. })
        ));
        assert!(matches!(
            verify_thm_1_3(&d),
            Err(LabError::DimensionGate { .. })
        ));
        assert_eq!(applicable_bounds(&d), vec![BoundId::Thm12]);
        let short = BoundData::from_model(&s5, 3).unwrap();
        assert!(matches!(
            verify_thm_1_2(&short),
            Err(LabError::InsufficientEigenvalues { need: 6, .. })
        ));
    }
}
