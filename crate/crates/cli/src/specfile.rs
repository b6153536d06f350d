//! Manifold specification files (TOML).
//!
//! ```toml
//! kind = "sphere_product"
//! dim = 4
//! ambient = "unit_sphere"
//! k = 8
//!
//! [params]
//! factor_dims = [2, 2]
//! radii = [0.7071067811865476, 0.7071067811865476]
//! ```
//!
//! Sampled immersions list their Fourier terms and a grid:
//!
//! ```toml
//! kind = "fourier_immersion"
//! dim = 3
//! grid = 8
//! solver = "dense"
//!
//! [[fourier]]
//! k = [1, 0, 0]
//! amp = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
//! trig = "cos"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use paneitz_core::catalog::{Ambient, ModelManifold};
use paneitz_core::discrete::{FourierImmersion, FourierTerm, SolverChoice, TorusGrid, Trig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Sphere,
    SphereProduct,
    FlatTorus,
    FourierImmersion,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub radius: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub factor_dims: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierEntry {
    pub k: Vec<i64>,
    pub amp: Vec<f64>,
    #[serde(default)]
    pub trig: Trig,
}

/// Points per axis: one number for every axis, or one per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSize {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKey {
    #[default]
    Auto,
    Dense,
    Lanczos,
}

impl From<SolverKey> for SolverChoice {
    fn from(s: SolverKey) -> Self {
        match s {
            SolverKey::Auto => SolverChoice::Auto,
            SolverKey::Dense => SolverChoice::Dense,
            SolverKey::Lanczos => SolverChoice::Lanczos,
        }
    }
}

fn euclidean() -> Ambient {
    Ambient::Euclidean
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub kind: Kind,
    pub dim: usize,
    #[serde(default = "euclidean")]
    pub ambient: Ambient,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fourier: Vec<FourierEntry>,
    pub grid: Option<GridSize>,
    #[serde(default)]
    pub solver: SolverKey,
    /// Eigenvalue count.
    pub k: Option<usize>,
    pub seed: Option<u64>,
}

/// What a spec describes once validated.
#[derive(Debug, Clone)]
pub enum Target {
    Model(ModelManifold),
    Sampled {
        immersion: FourierImmersion,
        grid: TorusGrid,
    },
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::InvalidSpec(msg.into())
}

impl ManifoldSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::SpecSyntax(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let spec = Self::parse(&text).map_err(|e| match e {
            CliError::SpecSyntax(msg) => CliError::SpecSyntax(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        Ok((spec, text))
    }

    fn radii(&self) -> Result<&[f64], CliError> {
        self.params
            .radii
            .as_deref()
            .ok_or_else(|| invalid("params.radii is required for this kind"))
    }

    fn check_keys(&self) -> Result<(), CliError> {
        let p = &self.params;
        let (radius_ok, radii_ok, dims_ok, fourier_ok, grid_ok) = match self.kind {
            Kind::Sphere => (true, false, false, false, false),
            Kind::SphereProduct => (false, true, true, false, false),
            Kind::FlatTorus => (false, true, false, false, false),
            Kind::FourierImmersion => (false, false, false, true, true),
        };
        let present = [
            ("params.radius", p.radius.is_some(), radius_ok),
            ("params.radii", p.radii.is_some(), radii_ok),
            ("params.factor_dims", p.factor_dims.is_some(), dims_ok),
            ("fourier", !self.fourier.is_empty(), fourier_ok),
            ("grid", self.grid.is_some(), grid_ok),
        ];
        for (key, given, allowed) in present {
            if given && !allowed {
                return Err(invalid(format!(
                    "{key} does not apply to kind {:?}",
                    self.kind
                )));
            }
        }
        Ok(())
    }

    pub fn target(&self) -> Result<Target, CliError> {
        self.check_keys()?;
        let n = self.dim;
        let model = match self.kind {
            Kind::Sphere => {
                let r = self
                    .params
                    .radius
                    .ok_or_else(|| invalid("params.radius is required for a sphere"))?;
                ModelManifold::round_sphere(n, r, self.ambient)?
            }
            Kind::SphereProduct => {
                let dims = self.params.factor_dims.as_deref().ok_or_else(|| {
                    invalid("params.factor_dims is required for a sphere product")
                })?;
                let radii = self.radii()?;
                if dims.len() != radii.len() {
                    return Err(invalid(format!(
                        "{} factor dims but {} radii",
                        dims.len(),
                        radii.len()
                    )));
                }
                if dims.iter().sum::<usize>() != n {
                    return Err(invalid(format!(
                        "factor dims sum to {}, dim is {n}",
                        dims.iter().sum::<usize>()
                    )));
                }
                let factors: Vec<(usize, f64)> =
                    dims.iter().copied().zip(radii.iter().copied()).collect();
                ModelManifold::sphere_product(&factors, self.ambient)?
            }
            Kind::FlatTorus => {
                let radii = self.radii()?;
                if radii.len() != n {
                    return Err(invalid(format!("{} radii for a {n}-torus", radii.len())));
                }
                ModelManifold::flat_torus(radii, self.ambient)?
            }
            Kind::FourierImmersion => return self.sampled(),
        };
        if model.dim() != n {
            return Err(invalid(format!(
                "model has dimension {}, dim is {n}",
                model.dim()
            )));
        }
        Ok(Target::Model(model))
    }

    fn sampled(&self) -> Result<Target, CliError> {
        let n = self.dim;
        let first = self
            .fourier
            .first()
            .ok_or_else(|| invalid("fourier_immersion needs at least one [[fourier]] term"))?;
        let ambient = first.amp.len();
        let terms = self
            .fourier
            .iter()
            .map(|t| FourierTerm {
                k: t.k.clone(),
                amp: t.amp.clone(),
                trig: t.trig,
            })
            .collect();
        let immersion = FourierImmersion::new(n, ambient, terms)?;
        let sizes = match self
            .grid
            .as_ref()
            .ok_or_else(|| invalid("fourier_immersion needs grid"))?
        {
            GridSize::Uniform(s) => vec![*s; n],
            GridSize::PerAxis(v) => v.clone(),
        };
        if sizes.len() != n {
            return Err(invalid(format!(
                "grid has {} axes, dim is {n}",
                sizes.len()
            )));
        }
        let grid = TorusGrid::new(sizes)?;
        immersion.check_resolved(&grid)?;
        Ok(Target::Sampled { immersion, grid })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_spec() {
        let s =
            ManifoldSpec::parse("kind = \"sphere\"\ndim = 4\n[params]\nradius = 1.0\n").unwrap();
        assert_eq!(s.ambient, Ambient::Euclidean);
        assert!(matches!(s.target().unwrap(), Target::Model(_)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ManifoldSpec::parse("kind = \"sphere\"\ndim = 4\ncolour = 3\n").unwrap_err();
        assert!(matches!(e, CliError::SpecSyntax(ref m) if m.contains("colour")));
        let e =
            ManifoldSpec::parse("kind = \"sphere\"\ndim = 4\n[params]\nradus = 1.0\n").unwrap_err();
        assert!(matches!(e, CliError::SpecSyntax(_)));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = ManifoldSpec::parse("kind = \"sphere\"\ndim = = 4\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("column"), "{msg}");
    }

    #[test]
    fn inconsistent_specs() {
        let cases = [
            "kind = \"flat_torus\"\ndim = 3\n[params]\nradii = [1.0, 1.0]\n",
            "kind = \"sphere_product\"\ndim = 4\n[params]\nfactor_dims = [2, 1]\nradii = [1.0, 1.0]\n",
            "kind = \"sphere\"\ndim = 4\ngrid = 8\n[params]\nradius = 1.0\n",
            "kind = \"sphere\"\ndim = 4\nambient = \"unit_sphere\"\n[params]\nradius = 0.5\n",
            "kind = \"fourier_immersion\"\ndim = 1\ngrid = 4\n[[fourier]]\nk = [1]\namp = [1.0, 0.0]\n",
        ];
        for text in cases {
            let s = ManifoldSpec::parse(text).unwrap();
            assert!(s.target().is_err(), "{text}");
        }
    }

    #[test]
    fn fourier_spec() {
        let text = "kind = \"fourier_immersion\"\ndim = 1\ngrid = [8]\n\
                    [[fourier]]\nk = [1]\namp = [1.0, 0.0]\n\
                    [[fourier]]\nk = [1]\namp = [0.0, 1.0]\ntrig = \"sin\"\n";
        let s = ManifoldSpec::parse(text).unwrap();
        match s.target().unwrap() {
            Target::Sampled { immersion, grid } => {
                assert_eq!(immersion.ambient, 2);
                assert_eq!(grid.len(), 8);
            }
            other => panic!("{other:?}"),
        }
    }
}
