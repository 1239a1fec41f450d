//! Flag and config-file merging.
//!
//! Each command has a settings struct whose `Default` holds the defaults. The
//! config file and the flags are both turned into flat JSON objects; flags are
//! laid over the file and the result is deserialized into the settings, so a
//! key missing from both falls back to the default.

use std::path::{Path, PathBuf};

use dsg_core::{GridSpec, IntegratorConfig, Method, Polarity, SolutionClass};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Layers `flags` over the JSON object stored at `config` and deserializes.
pub fn resolve<S: DeserializeOwned, F: Serialize>(config: Option<&Path>, flags: &F) -> Result<S, CliError> {
    let mut merged = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            match serde_json::from_str(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(CliError::Config(format!("{} is not a JSON object", path.display()))),
                Err(e) => return Err(CliError::Config(format!("{}: {e}", path.display()))),
            }
        }
        None => Map::new(),
    };
    let Value::Object(given) = serde_json::to_value(flags).expect("flags serialize to an object") else {
        unreachable!("flag structs are plain structs")
    };
    for (k, v) in given {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(e.to_string()))
}

/// One coupling or several; `kink` accepts a list, other commands exactly one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsList {
    One(f64),
    Many(Vec<f64>),
}

impl EpsList {
    pub fn values(&self) -> Vec<f64> {
        match self {
            EpsList::One(e) => vec![*e],
            EpsList::Many(v) => v.clone(),
        }
    }

    pub fn single(&self) -> Result<f64, CliError> {
        match self.values().as_slice() {
            [e] => Ok(*e),
            other => Err(CliError::Config(format!("expected one eps, got {}", other.len()))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct KinkSettings {
    /// Worker threads, 0 = one per core. Not echoed: it never changes results.
    #[serde(skip_serializing)]
    pub threads: usize,
    pub eps: EpsList,
    pub n: u32,
    pub polarity: Polarity,
    pub x_min: f64,
    pub x_max: f64,
    pub x_step: f64,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

impl Default for KinkSettings {
    fn default() -> Self {
        Self {
            threads: 0,
            eps: EpsList::Many(vec![0.0, 1.0, 10.0]),
            n: 2,
            polarity: Polarity::Kink,
            x_min: -10.0,
            x_max: 10.0,
            x_step: 0.01,
            out: None,
            summary: None,
        }
    }
}

impl KinkSettings {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n != 2 {
            return Err(CliError::Config(format!("kink needs n = 2, got {}", self.n)));
        }
        if self.eps.values().is_empty() {
            return Err(CliError::Config("eps list is empty".into()));
        }
        if !(self.x_min < self.x_max && self.x_step > 0.0 && self.x_step.is_finite()) {
            return Err(CliError::Config("need x-min < x-max and x-step > 0".into()));
        }
        if (self.x_max - self.x_min) / self.x_step > 1e7 {
            return Err(CliError::Config("more than 1e7 samples requested".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SolveSettings {
    /// Worker threads, 0 = one per core. Not echoed: it never changes results.
    #[serde(skip_serializing)]
    pub threads: usize,
    pub eps: EpsList,
    pub n: u32,
    /// First integral; fixes the slope at `phi = pi`.
    pub p: Option<f64>,
    /// Slope at `phi = pi`, as an alternative to `p`.
    pub dphi0: Option<f64>,
    pub method: Method,
    pub step: f64,
    pub max_step: f64,
    pub x_max: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
    /// Resample the trajectory on a uniform grid instead of the accepted steps.
    pub x_step: Option<f64>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

impl Default for SolveSettings {
    fn default() -> Self {
        let ic = IntegratorConfig::default();
        Self {
            threads: 0,
            eps: EpsList::One(1.0),
            n: 2,
            p: None,
            dphi0: None,
            method: ic.method,
            step: ic.step,
            max_step: ic.max_step,
            x_max: 50.0,
            abs_tol: ic.abs_tol,
            rel_tol: ic.rel_tol,
            max_steps: ic.max_steps,
            x_step: None,
            out: None,
            summary: None,
        }
    }
}

impl SolveSettings {
    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let ic = IntegratorConfig {
            method: self.method,
            step: self.step,
            max_step: if self.method == Method::Rk4Fixed { self.step } else { self.max_step },
            x_max: self.x_max,
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_steps: self.max_steps,
        };
        ic.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.x_step.is_some_and(|h| !(h > 0.0 && h.is_finite())) {
            return Err(CliError::Config("x-step must be > 0".into()));
        }
        Ok(ic)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ClassifySettings {
    /// Worker threads, 0 = one per core. Not echoed: it never changes results.
    #[serde(skip_serializing)]
    pub threads: usize,
    pub eps: EpsList,
    pub n: u32,
    pub p: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Default for ClassifySettings {
    fn default() -> Self {
        Self {
            threads: 0,
            eps: EpsList::One(1.0),
            n: 2,
            p: None,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepSettings {
    /// Worker threads, 0 = one per core. Not echoed: it never changes results.
    #[serde(skip_serializing)]
    pub threads: usize,
    pub eps: EpsList,
    pub n: u32,
    pub class: SolutionClass,
    /// Explicit pressures; replaces the default grid when present.
    pub p_values: Option<Vec<f64>>,
    pub edge_points: usize,
    pub interior_points: usize,
    pub separatrix_clip: f64,
    pub floor_clip: f64,
    pub edge_width: f64,
    pub step_like_max: f64,
    pub find_eps_c: bool,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            threads: 0,
            eps: EpsList::One(1.0),
            n: 2,
            class: SolutionClass::Periodic,
            p_values: None,
            edge_points: g.edge_points,
            interior_points: g.interior_points,
            separatrix_clip: g.separatrix_clip,
            floor_clip: g.floor_clip,
            edge_width: g.edge_width,
            step_like_max: g.step_like_max,
            find_eps_c: false,
            out: None,
            summary: None,
        }
    }
}

impl SweepSettings {
    pub fn grid(&self) -> GridSpec {
        GridSpec {
            edge_points: self.edge_points,
            interior_points: self.interior_points,
            separatrix_clip: self.separatrix_clip,
            floor_clip: self.floor_clip,
            edge_width: self.edge_width,
            step_like_max: self.step_like_max,
        }
    }
}
