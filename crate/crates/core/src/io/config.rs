//! JSON run configuration.
//!
//! Every section is optional and falls back to the study defaults:
//!
//! ```json
//! {
//!   "domain": { "name": "ellipse_minus_disk", "primitives": [...], "bbox": {...} },
//!   "simulation": { "h": 0.002, "n_steps": 100000, "start": [0.0, -0.5],
//!                   "drift": {"type": "linear", "rate": 1.0}, "seed": 1 },
//!   "schedule": { "delta1_steps": 100, "delta2_steps": 500 },
//!   "estimator": { "r": 0.4, "bandwidth": 0.2, "kernel": "gaussian",
//!                  "levels": [0.1], "level_masses": [0.5], "spacing": 0.02 },
//!   "experiment": { "h_values": [0.002], "delta1_steps": [100], ... },
//!   "bounds": { "alpha": 1.0, "beta": 1.0, "c_inf": 0.2, "mu_s": 4.0, "d": 2 },
//!   "track": "data/track.csv",
//!   "output_dir": "out"
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::ErgodicityParams;
use crate::density::{KernelFamily, KernelSpec, DEFAULT_BANDWIDTH};
use crate::experiments::ExperimentGrid;
use crate::geometry::{Domain, Point2, COARSE_SPACING};
use crate::setestim::DEFAULT_R_SIMULATION;
use crate::simulator::{Drift, OnOffSchedule, SimParams, DEFAULT_START};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub h: f64,
    pub n_steps: usize,
    pub start: Point2,
    pub drift: Drift,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            h: 0.002,
            n_steps: 100_000,
            start: DEFAULT_START,
            drift: Drift::default(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub delta1_steps: usize,
    pub delta2_steps: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            delta1_steps: 100,
            delta2_steps: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub r: f64,
    pub bandwidth: f64,
    pub kernel: KernelFamily,
    /// Absolute density levels.
    pub levels: Vec<f64>,
    /// Probability masses whose level sets are extracted alongside `levels`.
    pub level_masses: Vec<f64>,
    pub spacing: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            r: DEFAULT_R_SIMULATION,
            bandwidth: DEFAULT_BANDWIDTH,
            kernel: KernelFamily::Gaussian,
            levels: Vec::new(),
            level_masses: vec![0.25, 0.5, 0.75],
            spacing: COARSE_SPACING,
        }
    }
}

impl EstimatorConfig {
    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        KernelSpec::new(self.kernel, self.bandwidth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: Domain,
    pub simulation: SimulationConfig,
    pub schedule: ScheduleConfig,
    pub estimator: EstimatorConfig,
    pub experiment: ExperimentGrid,
    pub bounds: Option<ErgodicityParams>,
    /// Input track, resolved relative to the config file.
    pub track: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: Domain::ellipse_minus_disk(),
            simulation: SimulationConfig::default(),
            schedule: ScheduleConfig::default(),
            estimator: EstimatorConfig::default(),
            experiment: ExperimentGrid::desk(),
            bounds: None,
            track: None,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn sim_params(&self) -> SimParams {
        SimParams {
            domain: self.domain.clone(),
            h: self.simulation.h,
            n_steps: self.simulation.n_steps,
            start: self.simulation.start,
            drift: self.simulation.drift.clone(),
            seed: self.simulation.seed,
        }
    }

    pub fn on_off(&self) -> Result<OnOffSchedule> {
        OnOffSchedule::new(self.schedule.delta1_steps, self.schedule.delta2_steps)
    }

    /// Checks every numeric constraint of the downstream types.
    pub fn validate(&self) -> Result<()> {
        Domain::with_bbox(self.domain.name.clone(), self.domain.primitives.clone(), self.domain.bbox)?;
        self.sim_params().validate()?;
        self.on_off()?;
        let est = &self.estimator;
        positive("r", est.r)?;
        positive("spacing", est.spacing)?;
        est.kernel_spec()?;
        for &l in &est.levels {
            positive("levels", l)?;
        }
        for &m in &est.level_masses {
            if !(m > 0.0 && m < 1.0) {
                return Err(Error::invalid("level_masses", format!("must lie in (0, 1), got {m}")));
            }
        }
        self.experiment.validate()?;
        if let Some(b) = &self.bounds {
            b.validate()?;
        }
        if let Some(t) = &self.track {
            if !t.is_file() {
                return Err(Error::invalid("track", format!("no such file: {}", t.display())));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str, path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            reason: e.to_string(),
        })?;
        if let Some(t) = &cfg.track {
            if t.is_relative() {
                let base = path.parent().unwrap_or(Path::new(""));
                cfg.track = Some(base.join(t));
            }
        }
        cfg.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::Parse {
                path: path.to_path_buf(),
                line: line_of_key(text, name),
                reason: format!("invalid `{name}`: {reason}"),
            },
            Error::StartOutsideDomain { .. } => Error::Parse {
                path: path.to_path_buf(),
                line: line_of_key(text, "start"),
                reason: e.to_string(),
            },
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, path)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive, got {v}")))
    }
}

/// 1-based line of the first `"key"` in `text`, or 0 if absent.
fn line_of_key(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map_or(0, |i| i + 1)
}
