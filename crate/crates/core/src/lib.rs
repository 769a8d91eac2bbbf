//! Geometry-based mapping of ceiling LEDs from an upward-facing camera,
//! odometer yaw and visual-odometry poses.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, evaluation
//! and the command-line tool live in the `lumen` crate.

#![no_std]

extern crate alloc;

pub mod estimator;
pub mod geometry;
pub mod simulator;

pub use estimator::{
    accept_alternative, build_map, cost_gradient, cost_j1, estimate_height, map_observations,
    pauta_filter, posterior, refine_k, residual, rough_position, sample_k, solve_position,
    EstimatorConfig, EstimatorError, LedMapEntry, LedTrack, MapBuild, PautaOutcome, Residual,
    SkipReason, SolveReport, SolverConfig,
};
pub use geometry::{
    apply_fixed_transform, bearing, make_observation, wrap_angle, CameraIntrinsics,
    FixedTransform2D, GeometryError, LedKey, Observation, PixelPoint, PlanarPose, Point2,
};
pub use simulator::{
    generate_trajectory, project_led, reference_scenario, synthesize_log, GroundTruthLed,
    EmptyLogReason, NoiseModel, ScenarioConfig, SensorRecord, SimulatedLog, SimulationError, TrajectoryKind,
    TrajectorySpec,
};
