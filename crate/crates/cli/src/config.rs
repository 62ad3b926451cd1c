//! Run configuration: a JSON file layered under command-line flags.

use std::path::{Path, PathBuf};

use bisphere::{ln_epsilon_from_regime, Material, ResonatorPair};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub material: MaterialConfig,
    pub tolerances: Tolerances,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub r1: f64,
    pub r2: f64,
    pub epsilon: Option<f64>,
    /// `ε = exp(-c0 / δ^(1-β))`, with `δ` taken from the material.
    pub regime: Option<Regime>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            r1: 1.0,
            r2: 1.0,
            epsilon: None,
            regime: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regime {
    pub beta: f64,
    #[serde(default = "one")]
    pub c0: f64,
}

fn one() -> f64 {
    1.0
}

/// Unset bulk parameters default to 1; unset inclusion parameters follow
/// from the contrast `delta`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialConfig {
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub rho_b: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa_b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub series: f64,
    pub pole_guard: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            series: 1e-12,
            pole_guard: bisphere::scattering::DEFAULT_POLE_GUARD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub eps_min: f64,
    pub eps_max: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub count: usize,
    /// Defaults to `[0.3 ω1, 3 ω2]`.
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub omega_count: usize,
    pub samples: usize,
    pub direction: [f64; 3],
    pub points: Vec<[f64; 3]>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            eps_min: 1e-6,
            eps_max: 1e-2,
            delta_min: 1e-6,
            delta_max: 1e-2,
            count: 7,
            omega_min: None,
            omega_max: None,
            omega_count: 801,
            samples: 200,
            direction: [0.0, 0.0, 1.0],
            points: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
    pub error_json: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| invalid(format!("bad config {}: {e}", path.display())))
    }

    /// `needs_gap` is false for commands that sweep their own gap grid.
    pub fn validate(&self, needs_gap: bool) -> Result<(), CliError> {
        let g = &self.geometry;
        check_positive("r1", g.r1)?;
        check_positive("r2", g.r2)?;
        match (g.epsilon, g.regime) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "give either epsilon or the (beta, c0) regime, not both",
                ))
            }
            (None, None) if needs_gap => {
                return Err(invalid("geometry needs epsilon or a (beta, c0) regime"))
            }
            (None, None) => {}
            (Some(eps), None) => check_positive("epsilon", eps)?,
            (None, Some(r)) => {
                if !(0.0 < r.beta && r.beta < 1.0) {
                    return Err(invalid(format!("beta must lie in (0, 1), got {}", r.beta)));
                }
                check_positive("c0", r.c0)?;
                if self.material.delta.is_none() && self.material.rho_b.is_none() {
                    return Err(invalid("the regime needs a contrast: set delta or rho_b"));
                }
            }
        }
        let m = &self.material;
        for (name, v) in [
            ("delta", m.delta),
            ("rho", m.rho),
            ("rho_b", m.rho_b),
            ("kappa", m.kappa),
            ("kappa_b", m.kappa_b),
        ] {
            if let Some(v) = v {
                check_positive(name, v)?;
            }
        }
        check_positive("series tolerance", self.tolerances.series)?;
        check_positive("pole guard", self.tolerances.pole_guard)?;
        let s = &self.sweep;
        for (name, v) in [
            ("eps_min", s.eps_min),
            ("eps_max", s.eps_max),
            ("delta_min", s.delta_min),
            ("delta_max", s.delta_max),
        ] {
            check_positive(name, v)?;
        }
        for (name, v) in [("omega_min", s.omega_min), ("omega_max", s.omega_max)] {
            if let Some(v) = v {
                check_positive(name, v)?;
            }
        }
        if s.count < 2 || s.omega_count < 2 {
            return Err(invalid("sweep grids need at least two points"));
        }
        if s.samples < 100 {
            return Err(invalid(format!(
                "samples must be at least 100, got {}",
                s.samples
            )));
        }
        if self.jobs == Some(0) {
            return Err(invalid("jobs must be at least 1"));
        }
        Ok(())
    }

    pub fn in_regime(&self) -> bool {
        self.geometry.regime.is_some()
    }

    /// Material with contrast `delta`, or with the configured contrast when
    /// `delta` is `None`.
    pub fn material_for(&self, delta: Option<f64>) -> Result<Material, CliError> {
        let m = &self.material;
        let rho = m.rho.unwrap_or(1.0);
        let kappa = m.kappa.unwrap_or(1.0);
        let delta = delta.or(m.delta);
        let rho_b = match (m.rho_b, delta) {
            (Some(rb), Some(d)) if ((rb / rho) / d - 1.0).abs() > 1e-12 => {
                return Err(invalid(format!(
                    "rho_b / rho = {} contradicts delta = {d}",
                    rb / rho
                )));
            }
            (Some(rb), _) => rb,
            (None, Some(d)) => d * rho,
            (None, None) => return Err(invalid("material contrast missing: set delta or rho_b")),
        };
        // without an explicit kappa_b the wave speeds are matched
        let kappa_b = m.kappa_b.unwrap_or(kappa * rho_b / rho);
        Material::new(rho, rho_b, kappa, kappa_b).map_err(|e| invalid(e.to_string()))
    }

    pub fn contrast(&self) -> Option<f64> {
        self.material
            .delta
            .or_else(|| Some(self.material.rho_b? / self.material.rho.unwrap_or(1.0)))
    }

    /// Pair for the configured epsilon, or for the regime at contrast `delta`.
    pub fn pair_for(&self, delta: Option<f64>) -> Result<ResonatorPair, CliError> {
        let g = &self.geometry;
        let pair = match (g.epsilon, g.regime) {
            (Some(eps), _) => ResonatorPair::new(g.r1, g.r2, eps),
            (None, Some(r)) => {
                let d = delta
                    .or(self.contrast())
                    .ok_or_else(|| invalid("the regime needs a contrast"))?;
                ln_epsilon_from_regime(d, r.beta, r.c0)
                    .and_then(|le| ResonatorPair::from_ln_gap(g.r1, g.r2, le))
            }
            (None, None) => return Err(invalid("geometry needs epsilon or a regime")),
        };
        pair.map_err(|e| invalid(e.to_string()))
    }
}
