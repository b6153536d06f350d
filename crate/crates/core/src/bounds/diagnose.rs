//! Equality-case diagnosis from curvature data.

use super::report::EqualityDiagnosis;
use crate::catalog::{model_constants, ModelManifold};
use crate::discrete::CurvatureBundle;
use crate::error::Result;

/// Relative variation allowed for a field to count as constant.
pub const DIAGNOSIS_TOL: f64 = 1e-6;

fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Pointwise diagnosis on a sampled immersion.
pub fn diagnose_bundle(b: &CurvatureBundle, tol: f64) -> EqualityDiagnosis {
    let n = b.dim() as f64;
    let h2 = b.mean_curvature2();
    let s = b.second_form_norm2();
    let r = b.scalar_curvature();
    // curvatures are compared against the extrinsic scale S
    let scale = max_abs(s).max(f64::MIN_POSITIVE);
    let umbilical = s
        .iter()
        .zip(h2)
        .all(|(s, h)| (s - n * h).abs() <= tol * scale);
    let constant_h = spread(h2) <= tol * max_abs(h2).max(f64::MIN_POSITIVE);
    let constant_r = spread(r) <= tol * max_abs(r).max(n * n * max_abs(h2)).max(f64::MIN_POSITIVE);

    let h_min = h2.iter().copied().fold(f64::INFINITY, f64::min);
    let minimal_in_sphere = h_min > 0.0 && {
        let big_n = b.ambient_dim();
        let center = |p: usize| -> Vec<f64> {
            let hv = b.mean_vector(p);
            (0..big_n)
                .map(|a| b.coordinates()[a][p] + hv[a] / h2[p])
                .collect()
        };
        let c0 = center(0);
        let radius = 1.0 / (h2.iter().sum::<f64>() / h2.len() as f64).sqrt();
        (0..b.len()).all(|p| {
            let d2: f64 = center(p)
                .iter()
                .zip(&c0)
                .map(|(x, y)| (x - y).powi(2))
                .sum();
            d2.sqrt() <= tol * radius
        })
    };
    EqualityDiagnosis::from_flags(umbilical, constant_h, constant_r, minimal_in_sphere)
}

/// Closed-form diagnosis of a catalog model in its product embedding.
pub fn diagnose_model(m: &ModelManifold, tol: f64) -> Result<EqualityDiagnosis> {
    let c = model_constants(m)?;
    let n = c.n as f64;
    let umbilical = (c.s_euclidean - n * c.h2_euclidean).abs() <= tol * c.s_euclidean;
    // H = −Σ (p_i / (n r_i²)) y_i on each block, so y + H/|H|² is constant
    // exactly when all p_i / r_i² agree
    let ratios: Vec<f64> = m
        .factors()
        .iter()
        .map(|f| f.dim as f64 / (f.radius * f.radius))
        .collect();
    let minimal_in_sphere = spread(&ratios) <= tol * max_abs(&ratios);
    Ok(EqualityDiagnosis::from_flags(
        umbilical,
        true,
        true,
        minimal_in_sphere,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::report::MatchedCase;
    use crate::catalog::Ambient;
    use crate::discrete::{build_bundle, FourierImmersion, TorusGrid, Trig};

    #[test]
    fn catalog_cases() {
        let s4 = ModelManifold::round_sphere(4, 1.0, Ambient::Euclidean).unwrap();
        let d = diagnose_model(&s4, DIAGNOSIS_TOL).unwrap();
        assert!(d.umbilical);
        assert_eq!(d.matched_case, MatchedCase::RoundSphere);

        let r = 0.5f64.sqrt();
        let cl = ModelManifold::sphere_product(&[(2, r), (2, r)], Ambient::UnitSphere).unwrap();
        let d = diagnose_model(&cl, DIAGNOSIS_TOL).unwrap();
        assert!(!d.umbilical && d.minimal_in_sphere && d.constant_r);
        assert_eq!(d.matched_case, MatchedCase::MinimalConstRInSphere);

        let skew =
            ModelManifold::sphere_product(&[(2, 0.6), (2, 0.8)], Ambient::UnitSphere).unwrap();
        assert_eq!(
            diagnose_model(&skew, DIAGNOSIS_TOL).unwrap().matched_case,
            MatchedCase::None
        );
    }

    #[test]
    fn clifford_bundle_is_minimal_in_sphere() {
        let imm = FourierImmersion::clifford_torus(&[0.5; 4]);
        let b = build_bundle(&imm, &TorusGrid::uniform(4, 8).unwrap()).unwrap();
        let d = diagnose_bundle(&b, DIAGNOSIS_TOL);
        assert!(!d.umbilical && d.constant_h && d.constant_r && d.minimal_in_sphere);
        assert_eq!(d.matched_case, MatchedCase::MinimalConstRInSphere);
    }

    #[test]
    fn perturbed_bundle_matches_nothing() {
        let imm = FourierImmersion::clifford_torus(&[0.5; 4])
            .with_extra_coordinate(vec![1, 1, 0, 0], 0.05, Trig::Cos)
            .unwrap();
        let b = build_bundle(&imm, &TorusGrid::uniform(4, 8).unwrap()).unwrap();
        let d = diagnose_bundle(&b, DIAGNOSIS_TOL);
        // a bump along one phase leaves the metric flat, so only H varies
        assert!(
            d.constant_r && !d.constant_h && !d.minimal_in_sphere,
            "{d:?}"
        );
        assert_eq!(d.matched_case, MatchedCase::None);
    }
}
