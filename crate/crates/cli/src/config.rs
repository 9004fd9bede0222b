//! TOML run configuration.

use std::path::{Path, PathBuf};

use nsc_core::solver::{
    BackgroundMode, Integrator, Random3d, Recipe, SimConfig, StepOptions,
};
use nsc_core::Grid;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    Strichartz,
    KernelBound,
    OseenConvergence,
    EnergyCheck,
    RossbyDecay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub init: InitConfig,
    pub strichartz: Option<StrichartzConfig>,
    pub kernel: Option<KernelConfig>,
    pub convergence: Option<ConvergenceConfig>,
    pub rossby: Option<RossbyConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub box_l: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { nx: 64, ny: 64, nz: 8, box_l: 20.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorName {
    #[default]
    Ifrk2,
    Ifrk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BackgroundName {
    #[default]
    Analytic,
    DropMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub omega: f64,
    pub t_max: f64,
    pub dt: f64,
    pub integrator: IntegratorName,
    pub nonlinear: bool,
    pub monitor_every: usize,
    pub checkpoint_every: Option<usize>,
    pub split_radius: Option<f64>,
    pub background: BackgroundName,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            omega: 0.0,
            t_max: 1.0,
            dt: 1e-3,
            integrator: IntegratorName::Ifrk2,
            nonlinear: true,
            monitor_every: 10,
            checkpoint_every: None,
            split_radius: None,
            background: BackgroundName::Analytic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RecipeName {
    #[default]
    Zero,
    Oseen,
    OseenPerturbed,
    #[serde(rename = "random-3d")]
    Random3d,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitConfig {
    pub recipe: RecipeName,
    pub alpha: f64,
    /// L¹ size of the 2D perturbation, or L² size of random data.
    pub amplitude: f64,
    pub slope: f64,
    pub band: [f64; 2],
    pub zero_vertical_mean: bool,
    pub path: Option<PathBuf>,
    pub noise: Option<NoiseConfig>,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            recipe: RecipeName::Zero,
            alpha: 1.0,
            amplitude: 0.1,
            slope: -2.0,
            band: [0.0, f64::INFINITY],
            zero_vertical_mean: false,
            path: None,
            noise: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub amplitude: f64,
    pub slope: f64,
    pub band: [f64; 2],
    pub zero_vertical_mean: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            amplitude: 1e-2,
            slope: -2.0,
            band: [0.0, f64::INFINITY],
            zero_vertical_mean: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrichartzConfig {
    pub omegas: Vec<f64>,
    pub t_end: f64,
    pub dt_sample: f64,
    pub cutoff_radius: f64,
    /// L² size of the datum after the cutoff.
    pub amplitude: f64,
    pub slope: f64,
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        StrichartzConfig {
            omegas: vec![1e2, 1e3, 1e4],
            t_end: 3.0,
            dt_sample: 1e-3,
            cutoff_radius: 4.0,
            amplitude: 1.0,
            slope: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub r: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub eval_n: usize,
    pub eval_nz: usize,
    pub eval_box: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        let g = nsc_core::kernel::default_eval_grid();
        KernelConfig {
            r: 4.0,
            a: vec![0.0, 0.01, 0.05],
            b: vec![1.0, 10.0, 100.0],
            eval_n: g.nx,
            eval_nz: g.nz,
            eval_box: g.box_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    /// Circulation of the target vortex (defaults to `init.alpha`).
    pub alpha: Option<f64>,
    /// Build the report from existing checkpoints instead of running.
    pub from_checkpoints: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RossbyConfig {
    pub omegas: Vec<f64>,
    pub t_end: f64,
    pub samples: usize,
}

impl Default for RossbyConfig {
    fn default() -> Self {
        RossbyConfig {
            omegas: vec![0.0, 100.0],
            t_end: 0.2,
            samples: 20,
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("`{name}` must be positive and finite, got {v}")))
    }
}

fn band(b: [f64; 2], name: &str) -> Result<(f64, f64), CliError> {
    if !(b[0] >= 0.0 && b[0] <= b[1]) {
        return Err(bad(format!("`{name}` needs 0 <= lo <= hi, got {b:?}")));
    }
    Ok((b[0], b[1]))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let g = &self.grid;
        positive("grid.box_l", g.box_l)?;
        Grid::new(g.nx, g.ny, g.nz, g.box_l).map_err(|e| bad(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        let r = &self.run;
        positive("run.dt", r.dt)?;
        if !(r.t_max >= 0.0 && r.t_max.is_finite()) {
            return Err(bad(format!("`run.t_max` must be >= 0, got {}", r.t_max)));
        }
        if !r.omega.is_finite() {
            return Err(bad("`run.omega` must be finite"));
        }
        if r.monitor_every == 0 || r.checkpoint_every == Some(0) {
            return Err(bad("`run.monitor_every` and `run.checkpoint_every` must be >= 1"));
        }
        if let Some(s) = r.split_radius {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(bad(format!("`run.split_radius` must be >= 0, got {s}")));
            }
        }
        let i = &self.init;
        if !(i.amplitude >= 0.0) {
            return Err(bad("`init.amplitude` must be >= 0"));
        }
        band(i.band, "init.band")?;
        if i.recipe == RecipeName::File && i.path.is_none() {
            return Err(bad("`init.recipe = \"file\"` needs `init.path`"));
        }
        if let Some(n) = &i.noise {
            band(n.band, "init.noise.band")?;
            if !(n.amplitude >= 0.0) {
                return Err(bad("`init.noise.amplitude` must be >= 0"));
            }
        }
        if let Some(s) = &self.strichartz {
            if s.omegas.is_empty() {
                return Err(bad("`strichartz.omegas` must not be empty"));
            }
            positive("strichartz.t_end", s.t_end)?;
            positive("strichartz.dt_sample", s.dt_sample)?;
            positive("strichartz.cutoff_radius", s.cutoff_radius)?;
        }
        if let Some(k) = &self.kernel {
            positive("kernel.r", k.r)?;
            positive("kernel.eval_box", k.eval_box)?;
            if k.a.is_empty() || k.b.is_empty() {
                return Err(bad("`kernel.a` and `kernel.b` must not be empty"));
            }
        }
        if let Some(r) = &self.rossby {
            positive("rossby.t_end", r.t_end)?;
            if r.samples == 0 || r.omegas.is_empty() {
                return Err(bad("`rossby.samples` and `rossby.omegas` must be nonempty"));
            }
        }
        Ok(())
    }

    pub fn background(&self) -> BackgroundMode {
        match self.run.background {
            BackgroundName::Analytic => BackgroundMode::Analytic,
            BackgroundName::DropMean => BackgroundMode::DropMean,
        }
    }

    fn random(&self, amplitude: f64, slope: f64, b: [f64; 2], zvm: bool, seed: u64) -> Random3d {
        Random3d {
            slope,
            amplitude,
            seed,
            band: (b[0], b[1]),
            zero_vertical_mean: zvm,
        }
    }

    /// Initial-data recipe; relative paths resolve against `base`.
    pub fn recipe(&self, base: &Path) -> Recipe {
        let i = &self.init;
        let main = match i.recipe {
            RecipeName::Zero => Recipe::Zero,
            RecipeName::Oseen => Recipe::Oseen { alpha: i.alpha },
            RecipeName::OseenPerturbed => Recipe::OseenPlus2dPerturbation {
                alpha: i.alpha,
                amplitude: i.amplitude,
                seed: self.seed,
            },
            RecipeName::Random3d => Recipe::Random3d(self.random(
                i.amplitude,
                i.slope,
                i.band,
                i.zero_vertical_mean,
                self.seed,
            )),
            RecipeName::File => {
                let p = i.path.clone().unwrap_or_default();
                Recipe::File(if p.is_absolute() { p } else { base.join(p) })
            }
        };
        match &i.noise {
            None => main,
            Some(n) => Recipe::WithNoise(
                Box::new(main),
                self.random(
                    n.amplitude,
                    n.slope,
                    n.band,
                    n.zero_vertical_mean,
                    self.seed.wrapping_add(1),
                ),
            ),
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        let r = &self.run;
        let mut c = SimConfig::new(r.dt, r.t_max);
        c.options = StepOptions {
            integrator: match r.integrator {
                IntegratorName::Ifrk2 => Integrator::IfRk2,
                IntegratorName::Ifrk4 => Integrator::IfRk4,
            },
            nonlinear: r.nonlinear,
            ..StepOptions::default()
        };
        c.monitor_every = r.monitor_every;
        c.checkpoint_every = r.checkpoint_every;
        c.split_radius = r.split_radius;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.run, RunSection::default());
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let e = RunConfig::parse("[run]\ndt = 0.1\ntmax = 2.0\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("tmax") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn validation_catches_nonpositive_values() {
        let c = RunConfig::parse("[run]\ndt = -1.0\n").unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::parse("[kernel]\nr = 0.0\n").unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::parse("[init]\nrecipe = \"file\"\n").unwrap();
        assert!(c.validate().is_err());
    }
}
