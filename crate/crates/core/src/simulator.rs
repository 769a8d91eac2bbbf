//! Deterministic synthetic scenarios: ground-truth LEDs, a robot trajectory,
//! the exact forward projection of each LED into the upward camera, and
//! Gaussian sensor noise driven by a per-scenario seeded stream.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::{
    apply_fixed_transform, bearing_unchecked, finite, make_observation, wrap_unchecked,
    CameraIntrinsics, FixedTransform2D, GeometryError, LedKey, Observation, PixelPoint,
    PlanarPose, Point2,
};

#[derive(Debug, Clone, PartialEq)]
pub enum SimulationError {
    Geometry(GeometryError),
    InvalidTrajectory(&'static str),
    UnreachableWaypoint(usize),
    /// LED mounted at or below the camera plane.
    LedBelowCamera { key: LedKey, height: f64, h1: f64 },
    DuplicateLed(LedKey),
    InvalidScenario(&'static str),
}

impl fmt::Display for SimulationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimulationError::Geometry(e) => write!(f, "{e}"),
            SimulationError::InvalidTrajectory(why) => write!(f, "invalid trajectory: {why}"),
            SimulationError::UnreachableWaypoint(i) => write!(f, "waypoint {i} is unreachable"),
            SimulationError::LedBelowCamera { key, height, h1 } => {
                write!(f, "LED {key} at height {height} m is not above the camera ({h1} m)")
            }
            SimulationError::DuplicateLed(key) => write!(f, "duplicate LED key {key}"),
            SimulationError::InvalidScenario(why) => write!(f, "invalid scenario: {why}"),
        }
    }
}

impl core::error::Error for SimulationError {}

impl From<GeometryError> for SimulationError {
    fn from(e: GeometryError) -> Self {
        SimulationError::Geometry(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthLed {
    pub key: LedKey,
    pub x: f64,
    pub y: f64,
    /// Absolute LED height above the floor.
    pub height: f64,
}

impl GroundTruthLed {
    pub fn new(key: impl Into<LedKey>, x: f64, y: f64, height: f64) -> Self {
        Self {
            key: key.into(),
            x,
            y,
            height,
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryKind {
    /// Back-and-forth lanes along +x covering `[0, width] × [0, height]`.
    Lawnmower { width: f64, height: f64, lanes: usize },
    /// Counter-clockwise circle through the origin centered at `(0, radius)`.
    Circuit { radius: f64 },
    /// Straight segments through the listed points, starting at the origin.
    Waypoints(Vec<Point2>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    pub sample_count: usize,
    /// Meters per second, used to time-stamp samples.
    pub speed: f64,
}

/// A trajectory pose with its timestamp and the distance traveled so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub pose: PlanarPose,
    pub time: f64,
    pub distance: f64,
}

/// Samples the trajectory at uniform arc-length spacing.
///
/// The first pose is always the world origin `(0, 0, 0)`: the robot's
/// departure pose defines the world frame.
pub fn generate_trajectory(spec: &TrajectorySpec) -> Result<Vec<TrajectorySample>, SimulationError> {
    if spec.sample_count == 0 {
        return Err(SimulationError::InvalidTrajectory("sample_count must be >= 1"));
    }
    if !(spec.speed.is_finite() && spec.speed > 0.0) {
        return Err(SimulationError::InvalidTrajectory("speed must be > 0"));
    }
    let n = spec.sample_count;
    match &spec.kind {
        TrajectoryKind::Circuit { radius } => {
            let r = *radius;
            if !(r.is_finite() && r > 0.0) {
                return Err(SimulationError::InvalidTrajectory("circuit radius must be > 0"));
            }
            // Closed loop: samples split the circumference evenly without repeating the start.
            (0..n)
                .map(|i| {
                    let s = TAU * i as f64 / n as f64;
                    let (sin, cos) = libm::sincos(s);
                    let distance = r * s;
                    Ok(TrajectorySample {
                        pose: PlanarPose::new(r * sin, r * (1.0 - cos), s)?,
                        time: distance / spec.speed,
                        distance,
                    })
                })
                .collect()
        }
        TrajectoryKind::Lawnmower {
            width,
            height,
            lanes,
        } => {
            let (w, h, lanes) = (*width, *height, *lanes);
            if !(w.is_finite() && w > 0.0) || !(h.is_finite() && h >= 0.0) || lanes == 0 {
                return Err(SimulationError::InvalidTrajectory(
                    "lawnmower needs width > 0, height >= 0 and lanes >= 1",
                ));
            }
            let spacing = if lanes > 1 { h / (lanes - 1) as f64 } else { 0.0 };
            let mut pts = Vec::with_capacity(2 * lanes);
            for lane in 0..lanes {
                let y = spacing * lane as f64;
                if lane % 2 == 0 {
                    pts.push(Point2::new(0.0, y));
                    pts.push(Point2::new(w, y));
                } else {
                    pts.push(Point2::new(w, y));
                    pts.push(Point2::new(0.0, y));
                }
            }
            sample_polyline(&pts, n, spec.speed)
        }
        TrajectoryKind::Waypoints(points) => {
            for (i, p) in points.iter().enumerate() {
                if !(p.x.is_finite() && p.y.is_finite()) {
                    return Err(SimulationError::UnreachableWaypoint(i));
                }
            }
            let mut pts = Vec::with_capacity(points.len() + 1);
            if points.first() != Some(&Point2::new(0.0, 0.0)) {
                pts.push(Point2::new(0.0, 0.0));
            }
            pts.extend_from_slice(points);
            sample_polyline(&pts, n, spec.speed)
        }
    }
}

fn sample_polyline(
    pts: &[Point2],
    n: usize,
    speed: f64,
) -> Result<Vec<TrajectorySample>, SimulationError> {
    // Drop zero-length segments so every segment has a heading.
    let mut segs: Vec<(Point2, Point2, f64, f64)> = Vec::new();
    let mut total = 0.0;
    for w in pts.windows(2) {
        let len = w[0].distance(&w[1]);
        if len > 0.0 {
            segs.push((w[0], w[1], total, len));
            total += len;
        }
    }
    let mut out = Vec::with_capacity(n);
    out.push(TrajectorySample {
        pose: PlanarPose::ORIGIN,
        time: 0.0,
        distance: 0.0,
    });
    if segs.is_empty() {
        // Robot never moves: it stays at the departure pose.
        for _ in 1..n {
            out.push(out[0]);
        }
        return Ok(out);
    }
    let mut seg = 0;
    for i in 1..n {
        let s = total * i as f64 / (n - 1) as f64;
        while seg + 1 < segs.len() && s >= segs[seg + 1].2 {
            seg += 1;
        }
        let (a, b, start, len) = segs[seg];
        let frac = ((s - start) / len).clamp(0.0, 1.0);
        let x = a.x + (b.x - a.x) * frac;
        let y = a.y + (b.y - a.y) * frac;
        let heading = libm::atan2(b.y - a.y, b.x - a.x);
        out.push(TrajectorySample {
            pose: PlanarPose::new(x, y, heading)?,
            time: s / speed,
            distance: s,
        });
    }
    Ok(out)
}

/// Exact forward model: the pixel at which `led` appears from `cam2_pose`.
///
/// Inverts the observation geometry: `d = f·D/H2` by similar triangles and the
/// image bearing is the planar posterior bearing rotated by the camera yaw.
pub fn project_led(
    cam2_pose: &PlanarPose,
    h1: f64,
    led: &GroundTruthLed,
    intrinsics: &CameraIntrinsics,
) -> Result<PixelPoint, SimulationError> {
    finite(h1, "camera height")?;
    finite(led.x, "LED x")?;
    finite(led.y, "LED y")?;
    finite(led.height, "LED height")?;
    let h2 = led.height - h1;
    if !(h2 > 0.0) {
        return Err(SimulationError::LedBelowCamera {
            key: led.key.clone(),
            height: led.height,
            h1,
        });
    }
    let a = cam2_pose.x() - led.x;
    let b = cam2_pose.y() - led.y;
    let planar = libm::hypot(a, b);
    if planar == 0.0 {
        return Ok(PixelPoint {
            u: intrinsics.cx(),
            v: intrinsics.cy(),
        });
    }
    let d = intrinsics.focal() * planar / h2;
    let alpha = wrap_unchecked(bearing_unchecked(a, b) + cam2_pose.theta());
    let (s, c) = libm::sincos(alpha);
    Ok(PixelPoint {
        u: intrinsics.cx() + d * s,
        v: intrinsics.cy() + d * c,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub pixel_sigma: f64,
    pub yaw_sigma: f64,
    pub vo_position_sigma: f64,
    /// Meters of VO drift per meter traveled, along a seed-chosen direction.
    pub vo_drift_rate: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn noiseless(seed: u64) -> Self {
        Self {
            pixel_sigma: 0.0,
            yaw_sigma: 0.0,
            vo_position_sigma: 0.0,
            vo_drift_rate: 0.0,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub leds: Vec<GroundTruthLed>,
    pub trajectory: TrajectorySpec,
    pub noise: NoiseModel,
    pub intrinsics: CameraIntrinsics,
    pub cam_height_h1: f64,
    pub cam1_to_cam2: FixedTransform2D,
    pub fov_max_pixel_radius: f64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimulationError> {
        if !(self.cam_height_h1.is_finite() && self.cam_height_h1 > 0.0) {
            return Err(SimulationError::InvalidScenario("cam_height_h1 must be > 0"));
        }
        if !(self.fov_max_pixel_radius.is_finite() && self.fov_max_pixel_radius > 0.0) {
            return Err(SimulationError::InvalidScenario("fov_max_pixel_radius must be > 0"));
        }
        let n = &self.noise;
        for sigma in [n.pixel_sigma, n.yaw_sigma, n.vo_position_sigma, n.vo_drift_rate] {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return Err(SimulationError::InvalidScenario("noise parameters must be >= 0"));
            }
        }
        let mut seen = BTreeSet::new();
        for led in &self.leds {
            if !(led.x.is_finite() && led.y.is_finite() && led.height.is_finite()) {
                return Err(SimulationError::InvalidScenario("LED coordinates must be finite"));
            }
            if led.height <= self.cam_height_h1 {
                return Err(SimulationError::LedBelowCamera {
                    key: led.key.clone(),
                    height: led.height,
                    h1: self.cam_height_h1,
                });
            }
            if !seen.insert(&led.key) {
                return Err(SimulationError::DuplicateLed(led.key.clone()));
            }
        }
        Ok(())
    }
}

/// Raw sensor sample as it appears in a log: ROI center, odometer yaw and
/// the VO pose of the pose-providing camera.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorRecord {
    pub timestamp: f64,
    pub led_key: LedKey,
    pub pixel: PixelPoint,
    pub yaw: f64,
    pub cam1_pose: PlanarPose,
}

impl SensorRecord {
    /// Fuses the record into an [`Observation`].
    ///
    /// The LED camera's image axes are rotated from the odometer heading by
    /// the mount's `dtheta`, so that offset is added to the yaw here.
    pub fn to_observation(
        &self,
        intrinsics: &CameraIntrinsics,
        cam1_to_cam2: &FixedTransform2D,
    ) -> Result<Observation, GeometryError> {
        finite(self.yaw, "yaw")?;
        let cam2 = apply_fixed_transform(&self.cam1_pose, cam1_to_cam2);
        make_observation(
            self.pixel,
            self.yaw + cam1_to_cam2.dtheta(),
            intrinsics,
            cam2,
            self.led_key.clone(),
            self.timestamp,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmptyLogReason {
    EmptyTrajectory,
    NoVisibleLeds,
}

/// Output of [`synthesize_log`]: records sorted by timestamp plus the
/// ground-truth sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedLog {
    pub records: Vec<SensorRecord>,
    pub truth: Vec<GroundTruthLed>,
    pub warning: Option<EmptyLogReason>,
}

impl SimulatedLog {
    pub fn count_for(&self, key: &LedKey) -> usize {
        self.records.iter().filter(|r| &r.led_key == key).count()
    }
}

fn normal(sigma: f64) -> Result<Normal<f64>, SimulationError> {
    Normal::new(0.0, sigma).map_err(|_| SimulationError::InvalidScenario("bad noise sigma"))
}

/// Replays the trajectory and emits one record per visible LED per pose.
pub fn synthesize_log(cfg: &ScenarioConfig) -> Result<SimulatedLog, SimulationError> {
    cfg.validate()?;
    let samples = match generate_trajectory(&cfg.trajectory) {
        Ok(s) => s,
        Err(SimulationError::InvalidTrajectory(_)) if cfg.trajectory.sample_count == 0 => Vec::new(),
        Err(e) => return Err(e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise.seed);
    let pixel_noise = normal(cfg.noise.pixel_sigma)?;
    let yaw_noise = normal(cfg.noise.yaw_sigma)?;
    let vo_noise = normal(cfg.noise.vo_position_sigma)?;
    let drift_dir: f64 = rng.gen_range(-core::f64::consts::PI..core::f64::consts::PI);
    let (drift_s, drift_c) = libm::sincos(drift_dir);

    let mut records = Vec::new();
    for sample in &samples {
        let truth_cam1 = sample.pose;
        let truth_cam2 = apply_fixed_transform(&truth_cam1, &cfg.cam1_to_cam2);
        // Per-pose draws happen whether or not anything is visible so the
        // stream stays aligned across LED layouts.
        let drift = cfg.noise.vo_drift_rate * sample.distance;
        let vo_x = truth_cam1.x() + vo_noise.sample(&mut rng) + drift * drift_c;
        let vo_y = truth_cam1.y() + vo_noise.sample(&mut rng) + drift * drift_s;
        let vo_pose = PlanarPose::new(vo_x, vo_y, truth_cam1.theta())?;
        let yaw = wrap_unchecked(truth_cam1.theta() + yaw_noise.sample(&mut rng));

        for led in &cfg.leds {
            let clean = project_led(&truth_cam2, cfg.cam_height_h1, led, &cfg.intrinsics)?;
            let offset = libm::hypot(clean.u - cfg.intrinsics.cx(), clean.v - cfg.intrinsics.cy());
            if offset > cfg.fov_max_pixel_radius {
                continue;
            }
            let pixel = PixelPoint {
                u: clean.u + pixel_noise.sample(&mut rng),
                v: clean.v + pixel_noise.sample(&mut rng),
            };
            records.push(SensorRecord {
                timestamp: sample.time,
                led_key: led.key.clone(),
                pixel,
                yaw,
                cam1_pose: vo_pose,
            });
        }
    }
    let warning = if samples.is_empty() {
        Some(EmptyLogReason::EmptyTrajectory)
    } else if records.is_empty() {
        Some(EmptyLogReason::NoVisibleLeds)
    } else {
        None
    };
    Ok(SimulatedLog {
        records,
        truth: cfg.leds.clone(),
        warning,
    })
}

/// The four-LED lawnmower scenario used by the bundled defaults and tests.
pub fn reference_scenario(noise: NoiseModel) -> ScenarioConfig {
    ScenarioConfig {
        leds: alloc::vec![
            GroundTruthLed::new("led-a", 1.0, 1.0, 2.3),
            GroundTruthLed::new("led-b", 3.0, 1.2, 2.5),
            GroundTruthLed::new("led-c", 1.3, 3.0, 2.7),
            GroundTruthLed::new("led-d", 2.9, 2.8, 2.4),
        ],
        trajectory: TrajectorySpec {
            kind: TrajectoryKind::Lawnmower {
                width: 4.0,
                height: 4.0,
                lanes: 17,
            },
            sample_count: 1600,
            speed: 0.3,
        },
        noise,
        intrinsics: CameraIntrinsics::new(320.0, 240.0, 600.0).expect("valid intrinsics"),
        cam_height_h1: 0.4,
        cam1_to_cam2: FixedTransform2D::new(0.12, -0.03, 0.02).expect("valid transform"),
        fov_max_pixel_radius: 240.0,
    }
}
