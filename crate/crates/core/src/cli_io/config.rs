use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponent_field::ExponentField;
use crate::fluid::VelocityField;
use crate::kinetic::InitialDistribution;
use crate::mesh::{Mesh, ScalarField};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub extents: [f64; 2],
    pub n: usize,
}

fn default_cfl() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    /// Fraction of the stability limit used when `dt` is not given.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Fixed step; adaptive when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Snapshot cadence in steps; 0 writes only the final state.
    #[serde(default)]
    pub output_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExponentConfig {
    Constant { value: f64 },
    Sinusoidal { base: f64, amplitude: f64 },
    /// Constant `before` up to `switch_time`, then the sinusoidal profile.
    TwoPhaseSwitch { before: f64, after_base: f64, after_amplitude: f64, switch_time: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RheologyConfig {
    pub nu0: f64,
    pub nu1: f64,
    #[serde(default)]
    pub theta: f64,
    /// Optional declared upper bound on the exponent.
    #[serde(default)]
    pub s_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum KineticConfig {
    Zero,
    UniformBox { n_particles: usize, mass: f64, vmax: f64 },
    Maxwellian { n_particles: usize, mass: f64, temperature: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "initial", rename_all = "snake_case", deny_unknown_fields)]
pub enum FluidConfig {
    #[default]
    Rest,
    /// Stream function `A sin^2(πx/Lx) sin^2(πy/Ly)`.
    Vortex { amplitude: f64 },
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_samples() -> usize {
    10
}

fn default_pad() -> usize {
    crate::pressure_toolkit::DEFAULT_PAD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_pad")]
    pub pad: usize,
}

impl Default for PressureConfig {
    fn default() -> Self {
        Self { samples: default_samples(), pad: default_pad() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    pub domain: DomainConfig,
    pub time: TimeConfig,
    pub exponent: ExponentConfig,
    pub rheology: RheologyConfig,
    pub kinetic: KineticConfig,
    #[serde(default)]
    pub fluid: FluidConfig,
    #[serde(default)]
    pub pressure: PressureConfig,
}

fn finite(name: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be finite, got {v}"))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Structural checks; rheology parameters are left to the stress law so a
    /// bad law surfaces as a certificate failure.
    pub fn check(&self) -> Result<(), ConfigError> {
        let [lx, ly] = self.domain.extents;
        for (name, v) in [("domain.extents[0]", lx), ("domain.extents[1]", ly), ("time.t_end", self.time.t_end)] {
            finite(name, v)?;
            if v <= 0.0 {
                return invalid(format!("{name} must be positive"));
            }
        }
        if self.domain.n < 8 {
            return invalid(format!("domain.n must be at least 8, got {}", self.domain.n));
        }
        finite("time.cfl", self.time.cfl)?;
        if !(self.time.cfl > 0.0 && self.time.cfl <= 1.0) {
            return invalid("time.cfl must lie in (0, 1]");
        }
        if let Some(dt) = self.time.dt {
            finite("time.dt", dt)?;
            if dt <= 0.0 {
                return invalid("time.dt must be positive");
            }
        }
        match self.exponent {
            ExponentConfig::Constant { value } => finite("exponent.value", value)?,
            ExponentConfig::Sinusoidal { base, amplitude } => {
                finite("exponent.base", base)?;
                finite("exponent.amplitude", amplitude)?;
            }
            ExponentConfig::TwoPhaseSwitch { before, after_base, after_amplitude, switch_time } => {
                finite("exponent.before", before)?;
                finite("exponent.after_base", after_base)?;
                finite("exponent.after_amplitude", after_amplitude)?;
                finite("exponent.switch_time", switch_time)?;
                if !(switch_time > 0.0 && switch_time < self.time.t_end) {
                    return invalid("exponent.switch_time must lie in (0, t_end)");
                }
            }
        }
        let r = &self.rheology;
        for (name, v) in [("rheology.nu0", r.nu0), ("rheology.nu1", r.nu1), ("rheology.theta", r.theta)] {
            finite(name, v)?;
        }
        if let Some(s) = r.s_max {
            finite("rheology.s_max", s)?;
        }
        match self.kinetic {
            KineticConfig::Zero => {}
            KineticConfig::UniformBox { n_particles, mass, vmax } => {
                finite("kinetic.mass", mass)?;
                finite("kinetic.vmax", vmax)?;
                if n_particles == 0 {
                    return invalid("kinetic.n_particles must be at least 1");
                }
            }
            KineticConfig::Maxwellian { n_particles, mass, temperature } => {
                finite("kinetic.mass", mass)?;
                finite("kinetic.temperature", temperature)?;
                if n_particles == 0 {
                    return invalid("kinetic.n_particles must be at least 1");
                }
            }
        }
        if let FluidConfig::Vortex { amplitude } = self.fluid {
            finite("fluid.amplitude", amplitude)?;
        }
        if self.pressure.samples == 0 || self.pressure.pad < 2 {
            return invalid("pressure.samples must be >= 1 and pressure.pad >= 2");
        }
        Ok(())
    }

    pub fn mesh(&self) -> Mesh {
        let [lx, ly] = self.domain.extents;
        Mesh::with_extents(self.domain.n, self.domain.n, lx, ly).expect("checked extents")
    }

    pub fn exponent_field(&self) -> Result<Arc<ExponentField>, ConfigError> {
        let mesh = self.mesh();
        let t_end = self.time.t_end;
        let field = match self.exponent {
            ExponentConfig::Constant { value } => ExponentField::constant(mesh, value, t_end),
            ExponentConfig::Sinusoidal { base, amplitude } => ExponentField::sinusoidal(mesh, base, amplitude, t_end),
            ExponentConfig::TwoPhaseSwitch { before, after_base, after_amplitude, switch_time } => {
                let after = ExponentField::sinusoidal(mesh, after_base, after_amplitude, t_end);
                ExponentField::two_phase_switch(
                    ScalarField::constant(mesh, before),
                    after.slabs()[0].values.clone(),
                    switch_time,
                    t_end,
                )
                .map_err(|e| ConfigError::Invalid(e.to_string()))?
            }
        };
        if let Some(s_max) = self.rheology.s_max {
            if field.s_max() > s_max {
                return invalid(format!("exponent reaches {} above rheology.s_max = {s_max}", field.s_max()));
            }
        }
        Ok(Arc::new(field))
    }

    pub fn initial_distribution(&self) -> (InitialDistribution, usize) {
        match self.kinetic {
            KineticConfig::Zero => (InitialDistribution::Zero, 0),
            KineticConfig::UniformBox { n_particles, mass, vmax } => {
                (InitialDistribution::UniformBox { mass, vmax }, n_particles)
            }
            KineticConfig::Maxwellian { n_particles, mass, temperature } => {
                (InitialDistribution::Maxwellian { mass, temperature }, n_particles)
            }
        }
    }

    pub fn initial_velocity(&self) -> VelocityField {
        let mesh = self.mesh();
        match self.fluid {
            FluidConfig::Rest => VelocityField::zeros(mesh),
            FluidConfig::Vortex { amplitude } => {
                let (lx, ly) = (mesh.lx(), mesh.ly());
                VelocityField::from_stream_function(mesh, |x, y| {
                    let a = (std::f64::consts::PI * x / lx).sin();
                    let b = (std::f64::consts::PI * y / ly).sin();
                    amplitude * a * a * b * b
                })
            }
        }
    }
}

/// FNV-1a over the seed bytes followed by the module name.
pub fn module_seed(seed: u64, module: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(module.as_bytes()) {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Independent random stream for one module.
pub fn module_rng(seed: u64, module: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(module_seed(seed, module))
}
