//! One-parameter families evaluated against a single bound, written as CSV.
//!
//! Columns, in order: `param, lhs, rhs, slack, relative_slack, equality,
//! lambda_1, …, lambda_{n+1}`, where `lambda_j` is the j-th smallest
//! eigenvalue of the sample (counted from 1, the constant mode included).
//! Floats carry 17 significant digits.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use paneitz_core::bounds::{eigenvalues_needed, verify, BoundData, BoundId, BoundReport};
use paneitz_core::catalog::{Ambient, ModelManifold};
use paneitz_core::coefficients::paneitz_coefficients;
use paneitz_core::discrete::{spectrum, FourierImmersion, SpectrumOptions, TorusGrid};

use crate::error::CliError;

/// Grid side for sampled families.
pub const SWEEP_GRID: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Family {
    /// Round sphere Sⁿ(r) in Euclidean space; the parameter is r.
    SphereRadius,
    /// S^p(√t) × S^q(√(1−t)) in the unit sphere, p = ⌊n/2⌋; the parameter is t = r₁².
    CliffordRatio,
    /// Balanced Clifford torus in the unit sphere tilted into two extra
    /// coordinates; the parameter is the tilt amplitude.
    FourierPerturbation,
}

/// `START:STOP:SAMPLES`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRange {
    pub start: f64,
    pub stop: f64,
    pub samples: usize,
}

impl FromStr for ParamRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, k] = parts.as_slice() else {
            return Err(format!("range {s:?} is not START:STOP:SAMPLES"));
        };
        let start: f64 = a
            .trim()
            .parse()
            .map_err(|_| format!("bad range start {a:?}"))?;
        let stop: f64 = b
            .trim()
            .parse()
            .map_err(|_| format!("bad range stop {b:?}"))?;
        let samples: usize = k
            .trim()
            .parse()
            .map_err(|_| format!("bad sample count {k:?}"))?;
        if !start.is_finite() || !stop.is_finite() {
            return Err("range endpoints must be finite".into());
        }
        if samples < 2 {
            return Err(format!("a sweep needs at least 2 samples, got {samples}"));
        }
        Ok(ParamRange {
            start,
            stop,
            samples,
        })
    }
}

impl ParamRange {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.samples - 1) as f64;
        (0..self.samples)
            .map(|i| {
                if i + 1 == self.samples {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub param: f64,
    pub report: BoundReport,
    pub lambdas: Vec<f64>,
}

pub fn default_dim(bound: BoundId) -> usize {
    match bound {
        BoundId::Thm11 | BoundId::Cor11 | BoundId::ChenLiL1 | BoundId::ProofChain => 4,
        BoundId::Thm12 | BoundId::Cor31 | BoundId::Thm13 => 5,
        BoundId::ChenLiL2 => 7,
    }
}

fn sample_data(family: Family, n: usize, t: f64, seed: u64) -> Result<BoundData, CliError> {
    let count = eigenvalues_needed(n);
    match family {
        Family::SphereRadius => Ok(BoundData::from_model(
            &ModelManifold::round_sphere(n, t, Ambient::Euclidean)?,
            count,
        )?),
        Family::CliffordRatio => {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::InvalidArgs(format!(
                    "clifford_ratio needs 0 < t < 1, got {t}"
                )));
            }
            let p = n / 2;
            let m = ModelManifold::sphere_product(
                &[(p, t.sqrt()), (n - p, (1.0 - t).sqrt())],
                Ambient::UnitSphere,
            )?;
            Ok(BoundData::from_model(&m, count)?)
        }
        Family::FourierPerturbation => {
            if n > 5 {
                return Err(CliError::InvalidArgs(format!(
                    "fourier_perturbation samples 8^n grids and stops at n = 5, got n = {n}"
                )));
            }
            let mut k = vec![0; n];
            k[0] = 1;
            k[1] = 1;
            let imm = FourierImmersion::tilted_clifford(n, t, k)?;
            let grid = TorusGrid::uniform(n, SWEEP_GRID)?;
            let c = paneitz_coefficients(n)?.values();
            let opts = SpectrumOptions {
                seed,
                ..Default::default()
            };
            let (b, s) = spectrum(&imm, &grid, &c, count, &opts)?;
            Ok(BoundData::from_bundle(
                &format!("tilted_clifford({t})"),
                &b,
                &s,
                Ambient::UnitSphere,
            )?)
        }
    }
}

/// Evaluates every sample, in parallel, keeping parameter order.
pub fn run_sweep(
    family: Family,
    range: ParamRange,
    bound: BoundId,
    dim: Option<usize>,
    tol: Option<f64>,
    seed: u64,
) -> Result<Vec<SweepRow>, CliError> {
    let n = dim.unwrap_or_else(|| default_dim(bound));
    if n < 2 {
        return Err(CliError::InvalidArgs(format!("dimension {n} is too small")));
    }
    range
        .values()
        .into_par_iter()
        .map(|t| {
            let data = sample_data(family, n, t, seed)?;
            let data = match tol {
                Some(x) => data.with_tol_eq(x),
                None => data,
            };
            let report = verify(&data, bound)?;
            Ok(SweepRow {
                param: t,
                report,
                lambdas: data.eigenvalues.iter().take(n + 1).copied().collect(),
            })
        })
        .collect()
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(rows: &[SweepRow], n: usize, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["param", "lhs", "rhs", "slack", "relative_slack", "equality"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=n + 1).map(|j| format!("lambda_{j}")));
    w.write_record(&header)
        .map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        let r = &row.report;
        let mut rec = vec![
            float(row.param),
            float(r.lhs),
            float(r.rhs),
            float(r.slack),
            float(r.relative_slack),
            r.equality.to_string(),
        ];
        rec.extend(row.lambdas.iter().map(|&v| float(v)));
        w.write_record(&rec)
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
