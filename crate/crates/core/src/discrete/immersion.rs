//! Immersions of the n-torus given by finite Fourier series.

use serde::{Deserialize, Serialize};

use nalgebra::{DMatrix, DVector};

use super::grid::TorusGrid;
use crate::error::{LabError, Result};
use crate::geometry::ImmersionJet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Trig {
    #[default]
    Cos,
    Sin,
}

/// One term `amp · trig(k·x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub k: Vec<i64>,
    pub amp: Vec<f64>,
    #[serde(default)]
    pub trig: Trig,
}

/// y(x) = Σ amp · {cos, sin}(k·x), x ∈ [0, 2π)ⁿ, y ∈ R^N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierImmersion {
    pub n: usize,
    pub ambient: usize,
    pub terms: Vec<FourierTerm>,
}

impl FourierImmersion {
    pub fn new(n: usize, ambient: usize, terms: Vec<FourierTerm>) -> Result<Self> {
        for t in &terms {
            if t.k.len() != n {
                return Err(LabError::ShapeMismatch {
                    expected: n,
                    got: t.k.len(),
                });
            }
            if t.amp.len() != ambient {
                return Err(LabError::ShapeMismatch {
                    expected: ambient,
                    got: t.amp.len(),
                });
            }
            if t.amp.iter().any(|a| !a.is_finite()) {
                return Err(LabError::InvalidModel("non-finite amplitude".into()));
            }
        }
        Ok(FourierImmersion { n, ambient, terms })
    }

    /// x ↦ (r_1 cos x_1, r_1 sin x_1, …, r_n cos x_n, r_n sin x_n) ⊂ R^{2n}.
    pub fn clifford_torus(radii: &[f64]) -> Self {
        let n = radii.len();
        let mut terms = Vec::with_capacity(2 * n);
        for (i, &r) in radii.iter().enumerate() {
            let mut k = vec![0; n];
            k[i] = 1;
            for (slot, trig) in [(2 * i, Trig::Cos), (2 * i + 1, Trig::Sin)] {
                let mut amp = vec![0.0; 2 * n];
                amp[slot] = r;
                terms.push(FourierTerm {
                    k: k.clone(),
                    amp,
                    trig,
                });
            }
        }
        FourierImmersion {
            n,
            ambient: 2 * n,
            terms,
        }
    }

    /// Donut torus ((R₀+ρ cos v) cos u, (R₀+ρ cos v) sin u, ρ sin v) in its own
    /// R³ block, times round circles of the given radii. Intrinsic coordinates
    /// are (u, v, φ_1, …).
    pub fn donut_times_circles(big: f64, rho: f64, circles: &[f64]) -> Self {
        let n = 2 + circles.len();
        let ambient = 3 + 2 * circles.len();
        let mut terms = Vec::new();
        let mut push = |k: Vec<i64>, slot: usize, a: f64, trig: Trig| {
            let mut amp = vec![0.0; ambient];
            amp[slot] = a;
            let mut kk = vec![0; n];
            kk[..k.len()].copy_from_slice(&k);
            terms.push(FourierTerm { k: kk, amp, trig });
        };
        // (R₀ + ρ cos v) cos u = R₀ cos u + ρ/2 [cos(u+v) + cos(u−v)]
        push(vec![1, 0], 0, big, Trig::Cos);
        push(vec![1, 1], 0, rho / 2.0, Trig::Cos);
        push(vec![1, -1], 0, rho / 2.0, Trig::Cos);
        push(vec![1, 0], 1, big, Trig::Sin);
        push(vec![1, 1], 1, rho / 2.0, Trig::Sin);
        push(vec![1, -1], 1, rho / 2.0, Trig::Sin);
        push(vec![0, 1], 2, rho, Trig::Sin);
        for (i, &r) in circles.iter().enumerate() {
            let mut k = vec![0; 2 + i + 1];
            k[2 + i] = 1;
            push(k.clone(), 3 + 2 * i, r, Trig::Cos);
            push(k, 4 + 2 * i, r, Trig::Sin);
        }
        FourierImmersion { n, ambient, terms }
    }

    /// Balanced Clifford torus in S^{2n+1}(1) with radii shrunk by √(1 − amp²)
    /// and two extra coordinates amp·(cos k·x, sin k·x), so |y| = 1 still holds.
    /// Not minimal in the sphere for 0 < amp < 1.
    pub fn tilted_clifford(n: usize, amp: f64, k: Vec<i64>) -> Result<Self> {
        if n == 0 || !(0.0..1.0).contains(&amp) {
            return Err(LabError::InvalidModel(format!(
                "tilted Clifford torus needs n >= 1 and 0 <= amp < 1, got n = {n}, amp = {amp}"
            )));
        }
        let radius = ((1.0 - amp * amp) / n as f64).sqrt();
        FourierImmersion::clifford_torus(&vec![radius; n])
            .with_extra_coordinate(k.clone(), amp, Trig::Cos)?
            .with_extra_coordinate(k, amp, Trig::Sin)
    }

    /// Appends one ambient coordinate carrying `amp · trig(k·x)`.
    pub fn with_extra_coordinate(mut self, k: Vec<i64>, amp: f64, trig: Trig) -> Result<Self> {
        if k.len() != self.n {
            return Err(LabError::ShapeMismatch {
                expected: self.n,
                got: k.len(),
            });
        }
        self.ambient += 1;
        for t in &mut self.terms {
            t.amp.push(0.0);
        }
        let mut a = vec![0.0; self.ambient];
        a[self.ambient - 1] = amp;
        self.terms.push(FourierTerm { k, amp: a, trig });
        Ok(self)
    }

    pub fn max_frequency(&self, axis: usize) -> i64 {
        self.terms
            .iter()
            .map(|t| t.k[axis].abs())
            .max()
            .unwrap_or(0)
    }

    /// Every frequency must sit strictly below the Nyquist index.
    pub fn check_resolved(&self, grid: &TorusGrid) -> Result<()> {
        if grid.dim() != self.n {
            return Err(LabError::ShapeMismatch {
                expected: self.n,
                got: grid.dim(),
            });
        }
        for (a, &s) in grid.sizes().iter().enumerate() {
            let kmax = self.max_frequency(a);
            if 2 * kmax >= s as i64 {
                return Err(LabError::InvalidModel(format!(
                    "frequency {kmax} on axis {a} is not resolved by {s} points"
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ambient];
        for t in &self.terms {
            let phase: f64 = t.k.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
            let v = match t.trig {
                Trig::Cos => phase.cos(),
                Trig::Sin => phase.sin(),
            };
            for (yi, a) in y.iter_mut().zip(&t.amp) {
                *yi += a * v;
            }
        }
        y
    }

    /// Exact 2-jet by term-wise differentiation.
    pub fn jet(&self, x: &[f64]) -> ImmersionJet {
        let n = self.n;
        let mut y = DVector::zeros(self.ambient);
        let mut dy = DMatrix::zeros(self.ambient, n);
        let mut d2y = vec![DVector::zeros(self.ambient); n * n];
        for t in &self.terms {
            let phase: f64 = t.k.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
            let (c, s) = (phase.cos(), phase.sin());
            // value, first-derivative factor, second-derivative factor
            let (v, d1, d2) = match t.trig {
                Trig::Cos => (c, -s, -c),
                Trig::Sin => (s, c, -s),
            };
            let amp = DVector::from_column_slice(&t.amp);
            y.axpy(v, &amp, 1.0);
            for i in 0..n {
                let ki = t.k[i] as f64;
                if ki != 0.0 {
                    dy.column_mut(i).axpy(ki * d1, &amp, 1.0);
                }
                for j in 0..n {
                    let kk = ki * t.k[j] as f64;
                    if kk != 0.0 {
                        d2y[i * n + j].axpy(kk * d2, &amp, 1.0);
                    }
                }
            }
        }
        ImmersionJet { y, dy, d2y }
    }

    /// Coordinate fields y_α sampled on the grid.
    pub fn sample(&self, grid: &TorusGrid) -> Vec<Vec<f64>> {
        let mut fields = vec![vec![0.0; grid.len()]; self.ambient];
        for p in 0..grid.len() {
            for (alpha, v) in self.eval(&grid.point(p)).into_iter().enumerate() {
                fields[alpha][p] = v;
            }
        }
        fields
    }
}
