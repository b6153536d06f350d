//! Dimension-dependent coefficients of the Branson–Paneitz operator
//!
//! ```text
//! P f = Δ²f − div[(a_n R g + b_n Ric) ∇f] + (n−4)/2 · Q f
//! Q   = c_n |Ric|² + d_n R² − ΔR / (2(n−1))
//! ```
//!
//! All four coefficients are kept as exact rationals. `d_n` uses the numerator
//! `n³ − 4n² + 16n − 16`, which reproduces `Q(Sⁿ(1)) = n(n²−4)/8`.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{LabError, Result};

pub type Rational = Ratio<i64>;

/// Exact operator coefficients for intrinsic dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionCoefficients {
    pub n: usize,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
    /// (n − 4)/2, the weight of Q in the zeroth-order term.
    pub q_factor: Rational,
}

/// Floating-point view used by the numerical code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientValues {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub q_factor: f64,
}

/// Name of the `d_n` convention, carried into reports.
pub const D_CONVENTION: &str =
    "d_n = (n^3 - 4n^2 + 16n - 16) / (8 (n-1)^2 (n-2)^2), Q = c_n|Ric|^2 + d_n R^2 - dR/(2(n-1))";

pub fn paneitz_coefficients(n: usize) -> Result<DimensionCoefficients> {
    if n < 3 {
        return Err(LabError::InvalidDimension(n));
    }
    let m = n as i64;
    let r = |num: i64, den: i64| Rational::new(num, den);
    Ok(DimensionCoefficients {
        n,
        a: r((m - 2) * (m - 2) + 4, 2 * (m - 1) * (m - 2)),
        b: r(-4, m - 2),
        c: r(-2, (m - 2) * (m - 2)),
        d: r(
            m * m * m - 4 * m * m + 16 * m - 16,
            8 * (m - 1) * (m - 1) * (m - 2) * (m - 2),
        ),
        q_factor: r(m - 4, 2),
    })
}

fn to_f64(x: Rational) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

impl DimensionCoefficients {
    pub fn values(&self) -> CoefficientValues {
        CoefficientValues {
            n: self.n,
            a: to_f64(self.a),
            b: to_f64(self.b),
            c: to_f64(self.c),
            d: to_f64(self.d),
            q_factor: to_f64(self.q_factor),
        }
    }

    /// n·a_n + b_n, the trace weight of the drift tensor.
    pub fn trace_weight(&self) -> Rational {
        self.a * Rational::from_integer(self.n as i64) + self.b
    }

    /// Weight of ΔR in Q: 1/(2(n−1)).
    pub fn laplace_r_weight(&self) -> Rational {
        Rational::new(1, 2 * (self.n as i64 - 1))
    }
}

impl CoefficientValues {
    pub fn trace_weight(&self) -> f64 {
        self.n as f64 * self.a + self.b
    }
}

/// Q = c|Ric|² + d R² − ΔR/(2(n−1)), with |Ric|² already contracted by the metric.
pub fn q_curvature(coeffs: &CoefficientValues, ric_norm2: f64, r: f64, laplace_r: f64) -> f64 {
    coeffs.c * ric_norm2 + coeffs.d * r * r - laplace_r / (2.0 * (coeffs.n as f64 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn four_dimensional_values() {
        let c = paneitz_coefficients(4).unwrap();
        assert_eq!(c.a, q(2, 3));
        assert_eq!(c.b, q(-2, 1));
        assert_eq!(c.c, q(-1, 2));
        assert_eq!(c.d, q(1, 6));
        assert_eq!(c.q_factor, q(0, 1));
        // a_4 R g + b_4 Ric is the (2/3)Rg − 2Ric drift of the four-dimensional operator
        assert_eq!(c.trace_weight(), q(2, 3));
    }

    #[test]
    fn three_and_five() {
        let c3 = paneitz_coefficients(3).unwrap();
        assert_eq!(
            (c3.a, c3.b, c3.c, c3.d),
            (q(5, 4), q(-4, 1), q(-2, 1), q(23, 32))
        );
        assert_eq!(c3.q_factor, q(-1, 2));
        let c5 = paneitz_coefficients(5).unwrap();
        assert_eq!(
            (c5.a, c5.b, c5.c, c5.d),
            (q(13, 24), q(-4, 3), q(-2, 9), q(89, 1152))
        );
        assert_eq!(c5.q_factor, q(1, 2));
    }

    #[test]
    fn rejects_low_dimension() {
        assert_eq!(paneitz_coefficients(2), Err(LabError::InvalidDimension(2)));
        assert!(paneitz_coefficients(0).is_err());
    }

    #[test]
    fn integer_identities_hold() {
        for n in 3..40i64 {
            let c = paneitz_coefficients(n as usize).unwrap();
            assert_eq!(
                c.a * (2 * (n - 1) * (n - 2)),
                Rational::from_integer((n - 2) * (n - 2) + 4)
            );
            assert_eq!(c.b * (n - 2), Rational::from_integer(-4));
            assert_eq!(c.c * ((n - 2) * (n - 2)), Rational::from_integer(-2));
            assert_eq!(
                c.d * (8 * (n - 1) * (n - 1) * (n - 2) * (n - 2)),
                Rational::from_integer(n * n * n - 4 * n * n + 16 * n - 16)
            );
            assert_eq!(
                c.trace_weight(),
                Rational::new(n * n - 2 * n - 4, 2 * (n - 1))
            );
            if n >= 4 {
                assert!(c.trace_weight() > Rational::from_integer(0));
            }
        }
    }

    #[test]
    fn unit_sphere_q_exact() {
        // Sⁿ(1): Ric = (n−1)g so |Ric|² = n(n−1)², R = n(n−1).
        for n in 3..12i64 {
            let c = paneitz_coefficients(n as usize).unwrap();
            let ric2 = Rational::from_integer(n * (n - 1) * (n - 1));
            let r = Rational::from_integer(n * (n - 1));
            let q_val = c.c * ric2 + c.d * r * r;
            assert_eq!(q_val, Rational::new(n * (n * n - 4), 8), "n = {n}");
        }
    }

    #[test]
    fn q_curvature_examples() {
        let v4 = paneitz_coefficients(4).unwrap().values();
        assert!((q_curvature(&v4, 36.0, 12.0, 0.0) - 6.0).abs() < 1e-14);
        assert_eq!(q_curvature(&v4, 0.0, 0.0, 0.0), 0.0);
        let v5 = paneitz_coefficients(5).unwrap().values();
        assert!((q_curvature(&v5, 80.0, 20.0, 0.0) - 105.0 / 8.0).abs() < 1e-13);
        // ΔR enters with weight −1/(2(n−1))
        assert!((q_curvature(&v5, 0.0, 0.0, 8.0) + 1.0).abs() < 1e-15);
    }
}
