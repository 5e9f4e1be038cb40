use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    ThreeLevel,
    #[default]
    Effective,
    Corrected,
    Adiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Steady,
    Bistability,
    Variance,
    Spectrum,
    Decompose,
    Optimize,
    Transfer,
    Validate,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Steady => "steady",
            Study::Bistability => "bistability",
            Study::Variance => "variance",
            Study::Spectrum => "spectrum",
            Study::Decompose => "decompose",
            Study::Optimize => "optimize",
            Study::Transfer => "transfer",
            Study::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Table1,
    Table2,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Table1 => "table1",
            Target::Table2 => "table2",
            Target::Fig2 => "fig2",
            Target::Fig3 => "fig3",
            Target::Fig4 => "fig4",
            Target::Fig5 => "fig5",
            Target::Fig6 => "fig6",
            Target::Fig7 => "fig7",
            Target::Fig8 => "fig8",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    #[default]
    Open,
    Closed,
}

/// Physical parameters. Anything left unset must be supplied by the study's
/// defaults or the run is rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamBlock {
    pub ctilde: Option<f64>,
    pub delta_tilde: Option<f64>,
    pub delta_c: Option<f64>,
    pub i2: Option<f64>,
    pub rho: Option<f64>,
    pub n: Option<f64>,
    pub lambda1: Option<f64>,
    pub gamma_p_ratio: Option<f64>,
    pub omega_ratio: Option<f64>,
    /// Squeezing parameter of the incoming vacuum; a coherent drive when unset.
    pub r: Option<f64>,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    pub i2_min: f64,
    pub i2_max: f64,
    pub i2_points: usize,
    pub r_values: Vec<f64>,
    pub delta_tilde_max: f64,
    pub delta_tilde_steps: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            omega_min: 0.0,
            omega_max: 1000.0,
            omega_points: 1001,
            i2_min: 0.01,
            i2_max: 1000.0,
            i2_points: 401,
            r_values: vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0],
            delta_tilde_max: 20.0,
            delta_tilde_steps: 20,
        }
    }
}

impl GridSpec {
    pub fn omega(&self) -> Vec<f64> {
        linear(self.omega_min, self.omega_max, self.omega_points)
    }

    pub fn i2(&self) -> Vec<f64> {
        let n = self.i2_points.max(2);
        let (a, b) = (self.i2_min.ln(), self.i2_max.ln());
        (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
    }
}

pub fn linear(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Largest accepted relative Lyapunov residual.
    pub lyapunov_residual: f64,
    /// Smallest drift real part accepted by the optimizer.
    pub min_margin: f64,
    pub integration: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            lyapunov_residual: 1e-10,
            min_margin: 1e-3,
            integration: 1e-9,
        }
    }
}

/// Everything needed to run one job. The manifest written next to the
/// results is this structure with every default filled in.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spinsq_version: Option<String>,
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<Study>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reproduce: Option<Target>,
    #[serde(default)]
    pub regime: Regime,
    #[serde(default)]
    pub params: ParamBlock,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_manifest(&self) -> String {
        let mut resolved = self.clone();
        resolved.spinsq_version = Some(env!("CARGO_PKG_VERSION").to_string());
        toml::to_string(&resolved).expect("configuration serializes")
    }
}

pub fn default_out_root() -> PathBuf {
    std::env::var_os("SPINSQ_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("spinsq-out"))
}

/// Look up a parameter, reporting its flag name when it is missing.
pub fn need(v: Option<f64>, flag: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing parameter --{flag}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips() {
        let mut cfg = RunConfig {
            study: Some(Study::Spectrum),
            model: ModelKind::Adiabatic,
            ..RunConfig::default()
        };
        cfg.params.ctilde = Some(100.0);
        cfg.params.delta_c = Some(-0.2);
        cfg.grid.omega_points = 17;
        let text = cfg.to_manifest();
        let mut back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.spinsq_version.take().as_deref(), Some(env!("CARGO_PKG_VERSION")));
        assert_eq!(back, cfg);
    }

    #[test]
    fn linear_grid_hits_both_ends() {
        let g = linear(0.0, 1.0, 5);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(linear(3.0, 7.0, 1), vec![3.0, 7.0]);
    }
}
