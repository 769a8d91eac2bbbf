//! Scenario and estimator configuration files (JSON).
//!
//! A scenario file carries the same `intrinsics`, `cam_height_h1` and
//! `cam1_to_cam2` keys as an estimator config, so it can be passed to
//! `lumen map -c` directly.

use std::path::Path;

use lumen_core::{
    CameraIntrinsics, EstimatorConfig, FixedTransform2D, GroundTruthLed, NoiseModel, Point2,
    ScenarioConfig, SolverConfig, TrajectoryKind, TrajectorySpec,
};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::formats::TruthLed;

/// Scenario bundled with the tool; `lumen simulate default` uses it.
pub const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntrinsicsFile {
    pub cx: f64,
    pub cy: f64,
    pub f: f64,
}

impl IntrinsicsFile {
    pub fn to_core(&self) -> Result<CameraIntrinsics, ConfigError> {
        CameraIntrinsics::new(self.cx, self.cy, self.f).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

impl From<&CameraIntrinsics> for IntrinsicsFile {
    fn from(c: &CameraIntrinsics) -> Self {
        Self {
            cx: c.cx(),
            cy: c.cy(),
            f: c.focal(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformFile {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

impl TransformFile {
    pub fn to_core(&self) -> Result<FixedTransform2D, ConfigError> {
        FixedTransform2D::new(self.dx, self.dy, self.dtheta).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

impl From<&FixedTransform2D> for TransformFile {
    fn from(t: &FixedTransform2D) -> Self {
        Self {
            dx: t.dx(),
            dy: t.dy(),
            dtheta: t.dtheta(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrajectoryKindFile {
    Lawnmower { width: f64, height: f64, lanes: usize },
    Circuit { radius: f64 },
    WaypointList { waypoints: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    #[serde(flatten)]
    pub kind: TrajectoryKindFile,
    pub sample_count: usize,
    pub speed: f64,
}

impl TrajectoryFile {
    pub fn to_core(&self) -> TrajectorySpec {
        let kind = match &self.kind {
            TrajectoryKindFile::Lawnmower { width, height, lanes } => TrajectoryKind::Lawnmower {
                width: *width,
                height: *height,
                lanes: *lanes,
            },
            TrajectoryKindFile::Circuit { radius } => TrajectoryKind::Circuit { radius: *radius },
            TrajectoryKindFile::WaypointList { waypoints } => {
                TrajectoryKind::Waypoints(waypoints.iter().map(|p| Point2::new(p[0], p[1])).collect())
            }
        };
        TrajectorySpec {
            kind,
            sample_count: self.sample_count,
            speed: self.speed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseFile {
    #[serde(default)]
    pub pixel_sigma: f64,
    #[serde(default)]
    pub yaw_sigma: f64,
    #[serde(default)]
    pub vo_position_sigma: f64,
    #[serde(default)]
    pub vo_drift_rate: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub leds: Vec<TruthLed>,
    pub trajectory: TrajectoryFile,
    pub noise: NoiseFile,
    pub intrinsics: IntrinsicsFile,
    pub cam_height_h1: f64,
    pub cam1_to_cam2: TransformFile,
    pub fov_max_pixel_radius: f64,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Invalid(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Format(e.into()))?;
        Self::parse(&text)
    }

    pub fn to_core(&self) -> Result<ScenarioConfig, ConfigError> {
        let cfg = ScenarioConfig {
            leds: self.leds.iter().map(GroundTruthLed::from).collect(),
            trajectory: self.trajectory.to_core(),
            noise: NoiseModel {
                pixel_sigma: self.noise.pixel_sigma,
                yaw_sigma: self.noise.yaw_sigma,
                vo_position_sigma: self.noise.vo_position_sigma,
                vo_drift_rate: self.noise.vo_drift_rate,
                seed: self.noise.seed,
            },
            intrinsics: self.intrinsics.to_core()?,
            cam_height_h1: self.cam_height_h1,
            cam1_to_cam2: self.cam1_to_cam2.to_core()?,
            fov_max_pixel_radius: self.fov_max_pixel_radius,
        };
        cfg.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }
}

/// Tunable estimator parameters; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorFile {
    pub alt_threshold_tau: f64,
    pub pauta_min_samples: usize,
    pub min_obs_for_solve: usize,
    pub distance_epsilon: f64,
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub cost_tolerance: f64,
    pub initial_damping: f64,
    pub angle_weight: f64,
    pub distance_weight: f64,
}

impl Default for EstimatorFile {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            alt_threshold_tau: 40.0,
            pauta_min_samples: 3,
            min_obs_for_solve: 3,
            distance_epsilon: 1e-3,
            max_iterations: s.max_iterations,
            step_tolerance: s.step_tolerance,
            cost_tolerance: s.cost_tolerance,
            initial_damping: s.initial_damping,
            angle_weight: s.angle_weight,
            distance_weight: s.distance_weight,
        }
    }
}

/// The sensor description plus estimator tuning used by `lumen map`.
///
/// Unknown top-level keys are ignored so scenario files are accepted too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSettings {
    pub intrinsics: IntrinsicsFile,
    pub cam_height_h1: f64,
    pub cam1_to_cam2: TransformFile,
    #[serde(default)]
    pub estimator: EstimatorFile,
}

impl EstimatorSettings {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Invalid(format!("estimator config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Format(e.into()))?;
        Self::parse(&text)
    }

    pub fn from_scenario(s: &ScenarioFile) -> Self {
        Self {
            intrinsics: s.intrinsics.clone(),
            cam_height_h1: s.cam_height_h1,
            cam1_to_cam2: s.cam1_to_cam2.clone(),
            estimator: EstimatorFile::default(),
        }
    }

    pub fn to_core(&self) -> Result<EstimatorConfig, ConfigError> {
        let e = &self.estimator;
        let cfg = EstimatorConfig {
            alt_threshold_tau: e.alt_threshold_tau,
            pauta_min_samples: e.pauta_min_samples,
            min_obs_for_solve: e.min_obs_for_solve,
            distance_epsilon: e.distance_epsilon,
            solver: SolverConfig {
                max_iterations: e.max_iterations,
                step_tolerance: e.step_tolerance,
                cost_tolerance: e.cost_tolerance,
                initial_damping: e.initial_damping,
                angle_weight: e.angle_weight,
                distance_weight: e.distance_weight,
            },
            cam_height_h1: self.cam_height_h1,
            intrinsics: self.intrinsics.to_core()?,
            cam1_to_cam2: self.cam1_to_cam2.to_core()?,
        };
        cfg.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }
}
