use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{regime, Regime};
use crate::error::{Error, Result};
use crate::modulation::ModulationMode;
use crate::numerics::Grid1D;
use crate::profiles::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub xmin: f64,
    pub xmax: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { xmin: -60.0, xmax: 60.0, n: 6001 }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid1D> {
        Grid1D::new(self.xmin, self.xmax, self.n).map_err(|e| Error::Config(e.to_string()))
    }
}

fn default_p() -> f64 {
    3.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_t_final() -> f64 {
    100.0
}
fn default_s_min() -> f64 {
    30.0
}
fn default_cadence() -> f64 {
    0.5
}
fn default_mode() -> ModulationMode {
    ModulationMode::ThreePlusLaw
}
fn default_velocity_factor() -> f64 {
    1.0
}
fn default_max_bisections() -> usize {
    30
}

/// One experiment, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub grid: GridSpec,
    /// Magnitude of the PDE time step; backward runs negate it.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default)]
    pub z_f: Option<f64>,
    #[serde(default)]
    pub z_f_bracket: Option<[f64; 2]>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Snapshot every this many modulation intervals (0: none).
    #[serde(default)]
    pub dump_every: usize,
    /// End of backward runs; also the time at which bisection compares
    /// `ζ(z)` with `s`.
    #[serde(default = "default_s_min")]
    pub s_min: f64,
    /// Spacing of decompositions along a run.
    #[serde(default = "default_cadence")]
    pub cadence: f64,
    /// Decomposition mode for shooting; defaults to three-plus-law.
    #[serde(default = "default_mode")]
    pub mode: ModulationMode,
    /// Final velocity as a multiple of `√F(z_f)`.
    #[serde(default = "default_velocity_factor")]
    pub velocity_factor: f64,
    #[serde(default = "default_max_bisections")]
    pub max_bisections: usize,
}

impl RunConfig {
    pub fn new(experiment: &str, gamma: f64) -> Self {
        Self {
            experiment: experiment.to_string(),
            p: default_p(),
            gamma,
            grid: GridSpec::default(),
            dt: default_dt(),
            t_final: default_t_final(),
            z_f: None,
            z_f_bracket: None,
            out_dir: None,
            dump_every: 0,
            s_min: default_s_min(),
            cadence: default_cadence(),
            mode: default_mode(),
            velocity_factor: default_velocity_factor(),
            max_bisections: default_max_bisections(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.p, self.gamma).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn regime(&self) -> Regime {
        regime(self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.grid.build()?;
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if !(self.cadence > 0.0) || ((self.cadence / self.dt) - (self.cadence / self.dt).round()).abs() > 1e-6 {
            return bad(format!("cadence {} must be a positive multiple of dt {}", self.cadence, self.dt));
        }
        // Backward runs stop at s_min; a forward `evolve` run ignores it.
        if self.experiment != "evolve" && !(self.s_min > std::f64::consts::E && self.s_min < self.t_final) {
            return bad(format!("need e < s_min < t_final, got s_min = {}", self.s_min));
        }
        if let Some(z) = self.z_f {
            if !(z > 0.0) {
                return bad(format!("z_f must be positive, got {z}"));
            }
        }
        if let Some([a, b]) = self.z_f_bracket {
            if !(a > 0.0 && b > a) {
                return bad(format!("z_f_bracket must satisfy 0 < lo < hi, got [{a}, {b}]"));
            }
        }
        if !(self.velocity_factor.is_finite()) {
            return bad("velocity_factor must be finite".into());
        }
        Ok(())
    }
}
