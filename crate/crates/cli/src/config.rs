use std::fmt;
use std::path::{Path, PathBuf};

use lane_emden_core::{Field, InitialGuess, ShellConfig, SolverConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Solve,
    Sweep,
    Refine,
    Pohozaev,
    Oracle,
    Gk,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Experiment::Solve => "solve",
            Experiment::Sweep => "sweep",
            Experiment::Refine => "refine",
            Experiment::Pohozaev => "pohozaev",
            Experiment::Oracle => "oracle",
            Experiment::Gk => "gk",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellSection {
    #[serde(rename = "N", alias = "n")]
    pub n: u32,
    pub m: u32,
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_r: usize,
    #[serde(default)]
    pub n_s: usize,
    #[serde(rename = "Z", alias = "z_max", default)]
    pub z_max: f64,
    /// Angular cells of the `gk` sector grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_theta: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitSection {
    PositiveBump,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub energy_tol: f64,
    pub residual_tol: f64,
    pub max_outer: usize,
    pub linear_tol: f64,
    pub init: InitSection,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSection {
            energy_tol: d.energy_tol,
            residual_tol: d.residual_tol,
            max_outer: d.max_outer,
            linear_tol: d.linear_tol,
            init: InitSection::PositiveBump,
        }
    }
}

impl SolverSection {
    pub fn to_solver_config(&self) -> Result<SolverConfig, HarnessError> {
        let init = match &self.init {
            InitSection::PositiveBump => InitialGuess::PositiveBump,
            InitSection::Custom(values) => InitialGuess::Custom(
                Field::new(values.clone()).map_err(|e| HarnessError::config("solver.init.custom", e.to_string()))?,
            ),
        };
        let cfg = SolverConfig {
            energy_tol: self.energy_tol,
            residual_tol: self.residual_tol,
            max_outer: self.max_outer,
            linear_tol: self.linear_tol,
            init,
        };
        cfg.validate().map_err(|e| HarnessError::config("solver", e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    pub shell: ShellSection,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gk_k: Option<u32>,
    #[serde(default)]
    pub force_supercritical: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses JSON, reporting the path of the offending field on failure.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            HarnessError::config(path, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fixes the experiment named on the command line and checks every
    /// experiment-specific requirement.
    pub fn resolve(mut self, experiment: Experiment, force: bool) -> Result<Self, HarnessError> {
        match self.experiment {
            Some(e) if e != experiment => {
                return Err(HarnessError::config(
                    "experiment",
                    format!("config names `{e}` but `{experiment}` was requested"),
                ))
            }
            _ => self.experiment = Some(experiment),
        }
        self.force_supercritical |= force;
        self.validate()?;
        Ok(self)
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment.unwrap_or(Experiment::Solve)
    }

    pub fn shell(&self) -> Result<ShellConfig, HarnessError> {
        self.shell_with_p(self.shell.p)
    }

    pub fn shell_with_p(&self, p: f64) -> Result<ShellConfig, HarnessError> {
        let s = &self.shell;
        ShellConfig::new(s.n, s.m, s.a, s.b, p).map_err(|e| HarnessError::config("shell", e.to_string()))
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let shell = self.shell()?;
        self.solver.to_solver_config()?;
        let d = shell.reduced_dimension();
        let g = &self.grid;
        if g.n_r < 4 {
            return Err(HarnessError::config("grid.n_r", "must be at least 4"));
        }
        let needs_axis = d >= 1 || self.experiment() == Experiment::Gk;
        if needs_axis {
            if g.n_s < 4 {
                return Err(HarnessError::config("grid.n_s", "must be at least 4 when the strip has a z axis"));
            }
            if !(g.z_max > 0.0 && g.z_max.is_finite()) {
                return Err(HarnessError::config("grid.Z", "must be positive when the strip has a z axis"));
            }
        }
        match self.experiment() {
            Experiment::Sweep => {
                let ps = self
                    .sweep_p
                    .as_ref()
                    .ok_or_else(|| HarnessError::config("sweep_p", "required for `sweep`"))?;
                if ps.is_empty() {
                    return Err(HarnessError::config("sweep_p", "must list at least one exponent"));
                }
                for (i, &p) in ps.iter().enumerate() {
                    if !(p > 2.0 && p.is_finite()) {
                        return Err(HarnessError::config(format!("sweep_p[{i}]"), format!("p = {p} must exceed 2")));
                    }
                }
            }
            Experiment::Refine => {
                if self.refine_levels.is_some_and(|l| l < 2) {
                    return Err(HarnessError::config("refine_levels", "need at least 2 levels"));
                }
            }
            Experiment::Oracle => {
                if d != 0 {
                    return Err(HarnessError::config("shell", "the oracle needs m = N - 1 (annulus)"));
                }
            }
            Experiment::Gk => {
                if (self.shell.n, self.shell.m) != (3, 1) {
                    return Err(HarnessError::config("shell", "G_k solutions are computed for N = 3, m = 1"));
                }
                let k = self.gk_k.ok_or_else(|| HarnessError::config("gk_k", "required for `gk`"))?;
                if k < 3 {
                    return Err(HarnessError::config("gk_k", "k must be at least 3"));
                }
                if self.grid.n_theta.is_none_or(|n| n < 4) {
                    return Err(HarnessError::config("grid.n_theta", "required for `gk`, at least 4"));
                }
                if !(self.shell.p > 2.0 && self.shell.p < lane_emden_core::gk_sector::SOBOLEV_EXPONENT_3D) {
                    return Err(HarnessError::config("shell.p", "G_k runs need 2 < p < 6"));
                }
            }
            Experiment::Solve | Experiment::Pohozaev => {}
        }
        Ok(())
    }

    /// Sorted-key JSON of the resolved config without `out_dir`.
    pub fn canonical_json(&self) -> String {
        let mut copy = self.clone();
        copy.out_dir = None;
        let value = serde_json::to_value(&copy).expect("config serializes");
        value.to_string()
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
