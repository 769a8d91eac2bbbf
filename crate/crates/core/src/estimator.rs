//! Per-LED estimation pipeline.
//!
//! Observations taken while the ROI sits within `tau` pixels of the principal
//! point contribute the camera position as an alternative LED position. A
//! one-pass 3σ filter over those gives the rough position, which anchors the
//! pixel-per-meter scale samples `k = d_obs / D`. The filtered scale yields the
//! LED height, and a damped Gauss-Newton solve over the distance and bearing
//! residuals refines the planar position.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{
    bearing_unchecked, wrap_unchecked, CameraIntrinsics, FixedTransform2D, LedKey, Observation,
    Point2,
};

/// Rough-position shift that triggers recomputing every scale sample.
pub const K_RESAMPLE_DISTANCE: f64 = 1e-3;

/// Cap on scale/position alternations inside one refinement.
const MAX_ALTERNATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorError {
    KeyMismatch { track: LedKey, observation: LedKey },
    EmptySamples,
    NonPositiveScale(f64),
    /// Camera and candidate LED position closer than `distance_epsilon`.
    DegenerateDistance,
    NoUsableObservations,
    InvalidConfig(&'static str),
}

impl fmt::Display for EstimatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorError::KeyMismatch { track, observation } => {
                write!(f, "observation for {observation} fed to track {track}")
            }
            EstimatorError::EmptySamples => write!(f, "no samples to filter"),
            EstimatorError::NonPositiveScale(k) => write!(f, "scale must be > 0, got {k}"),
            EstimatorError::DegenerateDistance => write!(f, "camera coincides with LED position"),
            EstimatorError::NoUsableObservations => write!(f, "no usable observations"),
            EstimatorError::InvalidConfig(why) => write!(f, "invalid estimator config: {why}"),
        }
    }
}

impl core::error::Error for EstimatorError {}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub cost_tolerance: f64,
    pub initial_damping: f64,
    pub angle_weight: f64,
    pub distance_weight: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            step_tolerance: 1e-9,
            cost_tolerance: 1e-12,
            initial_damping: 1e-3,
            angle_weight: 1.0,
            distance_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Pixel radius under which the camera position counts as an LED position.
    pub alt_threshold_tau: f64,
    pub pauta_min_samples: usize,
    pub min_obs_for_solve: usize,
    pub distance_epsilon: f64,
    pub solver: SolverConfig,
    pub cam_height_h1: f64,
    pub intrinsics: CameraIntrinsics,
    pub cam1_to_cam2: FixedTransform2D,
}

impl EstimatorConfig {
    pub fn new(intrinsics: CameraIntrinsics, cam_height_h1: f64, cam1_to_cam2: FixedTransform2D) -> Self {
        Self {
            alt_threshold_tau: 40.0,
            pauta_min_samples: 3,
            min_obs_for_solve: 3,
            distance_epsilon: 1e-3,
            solver: SolverConfig::default(),
            cam_height_h1,
            intrinsics,
            cam1_to_cam2,
        }
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        use EstimatorError::InvalidConfig;
        if !(self.alt_threshold_tau.is_finite() && self.alt_threshold_tau > 0.0) {
            return Err(InvalidConfig("alt_threshold_tau must be > 0"));
        }
        if !(self.distance_epsilon.is_finite() && self.distance_epsilon > 0.0) {
            return Err(InvalidConfig("distance_epsilon must be > 0"));
        }
        if self.pauta_min_samples < 3 {
            return Err(InvalidConfig("pauta_min_samples must be >= 3"));
        }
        if !(self.cam_height_h1.is_finite() && self.cam_height_h1 > 0.0) {
            return Err(InvalidConfig("cam_height_h1 must be > 0"));
        }
        let s = &self.solver;
        if s.max_iterations == 0 {
            return Err(InvalidConfig("max_iterations must be >= 1"));
        }
        if !(s.step_tolerance > 0.0 && s.cost_tolerance > 0.0 && s.initial_damping > 0.0) {
            return Err(InvalidConfig("solver tolerances and damping must be > 0"));
        }
        if !(s.angle_weight >= 0.0 && s.distance_weight >= 0.0) {
            return Err(InvalidConfig("residual weights must be >= 0"));
        }
        Ok(())
    }
}

/// Alternative LED position: the camera position when the ROI is close to the
/// principal point.
pub fn accept_alternative(obs: &Observation, tau: f64) -> Option<Point2> {
    (obs.d_obs() < tau).then(|| obs.cam2_pose_pre().position())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PautaOutcome {
    pub kept: Vec<f64>,
    pub mean: f64,
    pub removed: usize,
    /// Set when rejection would have emptied the set and everything was kept.
    pub kept_all_fallback: bool,
}

/// One pass of the 3σ rule using the population standard deviation.
pub fn pauta_filter(samples: &[f64], min_samples: usize) -> Result<PautaOutcome, EstimatorError> {
    if samples.is_empty() {
        return Err(EstimatorError::EmptySamples);
    }
    let passthrough = |fallback| PautaOutcome {
        kept: samples.to_vec(),
        mean: mean(samples),
        removed: 0,
        kept_all_fallback: fallback,
    };
    if samples.len() < min_samples {
        return Ok(passthrough(false));
    }
    let m = mean(samples);
    let var = samples.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / samples.len() as f64;
    let bound = 3.0 * libm::sqrt(var);
    let kept: Vec<f64> = samples.iter().copied().filter(|s| libm::fabs(s - m) <= bound).collect();
    if kept.is_empty() {
        return Ok(passthrough(true));
    }
    Ok(PautaOutcome {
        mean: mean(&kept),
        removed: samples.len() - kept.len(),
        kept,
        kept_all_fallback: false,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Filters the x and y coordinates independently and returns their means.
pub fn rough_position(alt_positions: &[Point2], min_samples: usize) -> Option<Point2> {
    if alt_positions.is_empty() {
        return None;
    }
    let xs: Vec<f64> = alt_positions.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = alt_positions.iter().map(|p| p.y).collect();
    let x = pauta_filter(&xs, min_samples).ok()?.mean;
    let y = pauta_filter(&ys, min_samples).ok()?.mean;
    Some(Point2::new(x, y))
}

/// Pixel-per-meter scale sample `d_obs / D`; `None` when degenerate.
///
/// Samples with `d_obs == 0` are dropped as well since the scale must be positive.
pub fn sample_k(obs: &Observation, reference: Point2, eps: f64) -> Option<f64> {
    let distance = obs.cam2_pose_pre().position().distance(&reference);
    if distance < eps || obs.d_obs() <= 0.0 {
        return None;
    }
    Some(obs.d_obs() / distance)
}

pub fn refine_k(k_samples: &[f64], min_samples: usize) -> Option<f64> {
    pauta_filter(k_samples, min_samples).ok().map(|o| o.mean)
}

/// LED height from the refined scale: `h1 + f / k`.
pub fn estimate_height(k_tilde: f64, focal: f64, h1: f64) -> Result<f64, EstimatorError> {
    if !(k_tilde > 0.0) || !k_tilde.is_finite() {
        return Err(EstimatorError::NonPositiveScale(k_tilde));
    }
    Ok(h1 + focal / k_tilde)
}

/// Predicted `(pixel distance, bearing)` of an LED at `p` seen from `x_cam`.
pub fn posterior(x_cam: Point2, p: Point2, k_tilde: f64, eps: f64) -> Result<(f64, f64), EstimatorError> {
    let a = x_cam.x - p.x;
    let b = x_cam.y - p.y;
    let distance = libm::hypot(a, b);
    if distance < eps {
        return Err(EstimatorError::DegenerateDistance);
    }
    Ok((k_tilde * distance, bearing_unchecked(a, b)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    /// Pixels.
    pub dist: f64,
    /// Radians, wrapped into `(-π, π]`.
    pub ang: f64,
}

/// Observation minus posterior at candidate position `p`, using the
/// pre-estimated camera position.
pub fn residual(obs: &Observation, p: Point2, k_tilde: f64, eps: f64) -> Result<Residual, EstimatorError> {
    let (pred_d, pred_phi) = posterior(obs.cam2_pose_pre().position(), p, k_tilde, eps)?;
    let ang = if obs.bearing_defined() {
        wrap_unchecked(obs.phi_obs() - pred_phi)
    } else {
        0.0
    };
    Ok(Residual {
        dist: obs.d_obs() - pred_d,
        ang,
    })
}

/// One residual term with its Jacobian rows w.r.t. the LED position.
struct Term {
    r: Residual,
    dist_grad: [f64; 2],
    ang_grad: [f64; 2],
}

fn term(obs: &Observation, p: Point2, k: f64, eps: f64) -> Option<Term> {
    let cam = obs.cam2_pose_pre().position();
    let a = cam.x - p.x;
    let b = cam.y - p.y;
    let d2 = a * a + b * b;
    let d = libm::sqrt(d2);
    if d < eps {
        return None;
    }
    let r = residual(obs, p, k, eps).ok()?;
    let ang_grad = if obs.bearing_defined() {
        [b / d2, -a / d2]
    } else {
        [0.0, 0.0]
    };
    Some(Term {
        r,
        dist_grad: [k * a / d, k * b / d],
        ang_grad,
    })
}

/// `J1(p) = Σ ½ (w_d·errdist² + w_a·errang²)` over observations at least
/// `eps` away from `p`.
pub fn cost_j1(
    observations: &[Observation],
    p: Point2,
    k_tilde: f64,
    eps: f64,
    solver: &SolverConfig,
) -> Result<f64, EstimatorError> {
    let mut used = 0usize;
    let mut cost = 0.0;
    for obs in observations {
        if let Ok(r) = residual(obs, p, k_tilde, eps) {
            used += 1;
            cost += 0.5 * (solver.distance_weight * r.dist * r.dist + solver.angle_weight * r.ang * r.ang);
        }
    }
    if used == 0 {
        return Err(EstimatorError::NoUsableObservations);
    }
    Ok(cost)
}

/// Analytic gradient of [`cost_j1`] with respect to `p`.
pub fn cost_gradient(
    observations: &[Observation],
    p: Point2,
    k_tilde: f64,
    eps: f64,
    solver: &SolverConfig,
) -> Result<[f64; 2], EstimatorError> {
    let (_, g, used) = normal_equations(observations, p, k_tilde, eps, solver);
    if used == 0 {
        return Err(EstimatorError::NoUsableObservations);
    }
    Ok(g)
}

/// Returns `(JᵀWJ, JᵀWr, used)` with `J = ∂r/∂p`.
fn normal_equations(
    observations: &[Observation],
    p: Point2,
    k: f64,
    eps: f64,
    solver: &SolverConfig,
) -> ([f64; 3], [f64; 2], usize) {
    let (wd, wa) = (solver.distance_weight, solver.angle_weight);
    let mut h = [0.0; 3];
    let mut g = [0.0; 2];
    let mut used = 0;
    for t in observations.iter().filter_map(|o| term(o, p, k, eps)) {
        used += 1;
        let (jd, ja) = (t.dist_grad, t.ang_grad);
        h[0] += wd * jd[0] * jd[0] + wa * ja[0] * ja[0];
        h[1] += wd * jd[0] * jd[1] + wa * ja[0] * ja[1];
        h[2] += wd * jd[1] * jd[1] + wa * ja[1] * ja[1];
        g[0] += wd * jd[0] * t.r.dist + wa * ja[0] * t.r.ang;
        g[1] += wd * jd[1] * t.r.dist + wa * ja[1] * t.r.ang;
    }
    (h, g, used)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub position: Point2,
    pub iterations: usize,
    pub cost: f64,
    pub converged: bool,
    /// Cost after initialization and after every accepted step.
    pub cost_history: Vec<f64>,
}

/// Minimizes [`cost_j1`] over the LED position with damped Gauss-Newton,
/// starting from `init`.
///
/// A singular normal matrix returns `init` unchanged with `converged = false`.
pub fn solve_position(
    observations: &[Observation],
    k_tilde: f64,
    init: Point2,
    eps: f64,
    solver: &SolverConfig,
) -> Result<SolveReport, EstimatorError> {
    let mut p = init;
    let mut cost = cost_j1(observations, p, k_tilde, eps, solver)?;
    let mut history = alloc::vec![cost];
    let mut lambda = solver.initial_damping;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < solver.max_iterations {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let (h, g, _) = normal_equations(observations, p, k_tilde, eps, solver);
        let det_h = h[0] * h[2] - h[1] * h[1];
        let scale = (h[0] + h[2]) * (h[0] + h[2]);
        if !(det_h > 1e-12 * scale) || !det_h.is_finite() {
            return Ok(SolveReport {
                position: init,
                iterations,
                cost: history[0],
                converged: false,
                cost_history: alloc::vec![history[0]],
            });
        }

        let mut accepted = false;
        while lambda < 1e16 {
            let a = [h[0] * (1.0 + lambda), h[1], h[2] * (1.0 + lambda)];
            let det = a[0] * a[2] - a[1] * a[1];
            let step = [-(a[2] * g[0] - a[1] * g[1]) / det, -(a[0] * g[1] - a[1] * g[0]) / det];
            let step_norm = libm::hypot(step[0], step[1]);
            let candidate = Point2::new(p.x + step[0], p.y + step[1]);
            if step_norm < solver.step_tolerance {
                // Final sub-tolerance step is kept only if it does not raise the cost.
                if let Ok(c) = cost_j1(observations, candidate, k_tilde, eps, solver) {
                    if c <= cost {
                        p = candidate;
                        cost = c;
                        history.push(c);
                    }
                }
                converged = true;
                break;
            }
            match cost_j1(observations, candidate, k_tilde, eps, solver) {
                Ok(c) if c <= cost => {
                    let rel = (cost - c) / cost;
                    p = candidate;
                    cost = c;
                    history.push(c);
                    lambda = (lambda / 10.0).max(1e-15);
                    accepted = true;
                    if rel < solver.cost_tolerance {
                        converged = true;
                    }
                    break;
                }
                _ => lambda *= 10.0,
            }
        }
        if converged {
            break;
        }
        if !accepted {
            // No descent direction at working precision.
            converged = true;
            break;
        }
    }
    Ok(SolveReport {
        position: p,
        iterations,
        cost,
        converged,
        cost_history: history,
    })
}

/// Accumulated state for one LED.
#[derive(Debug, Clone, PartialEq)]
pub struct LedTrack {
    led_key: LedKey,
    observations: Vec<Observation>,
    alt_positions: Vec<Point2>,
    rough_position: Option<Point2>,
    k_reference: Option<Point2>,
    k_samples: Vec<f64>,
    k_refined: Option<f64>,
    height: Option<f64>,
    optimized_position: Option<Point2>,
    last_solve: Option<SolveReport>,
}

impl LedTrack {
    pub fn new(led_key: LedKey) -> Self {
        Self {
            led_key,
            observations: Vec::new(),
            alt_positions: Vec::new(),
            rough_position: None,
            k_reference: None,
            k_samples: Vec::new(),
            k_refined: None,
            height: None,
            optimized_position: None,
            last_solve: None,
        }
    }

    /// Processes a whole batch at once and solves a single time.
    pub fn from_observations(
        led_key: LedKey,
        observations: Vec<Observation>,
        cfg: &EstimatorConfig,
    ) -> Result<Self, EstimatorError> {
        let mut track = Self::new(led_key);
        for obs in &observations {
            track.check_key(obs)?;
        }
        track.alt_positions = observations
            .iter()
            .filter_map(|o| accept_alternative(o, cfg.alt_threshold_tau))
            .collect();
        track.observations = observations;
        track.rough_position = rough_position(&track.alt_positions, cfg.pauta_min_samples);
        if let Some(rough) = track.rough_position {
            track.resample_k(rough, cfg);
            track.refresh_scale(cfg);
            if track.observations.len() >= cfg.min_obs_for_solve {
                track.refine(cfg);
            }
        }
        Ok(track)
    }

    fn check_key(&self, obs: &Observation) -> Result<(), EstimatorError> {
        if obs.led_key() != &self.led_key {
            return Err(EstimatorError::KeyMismatch {
                track: self.led_key.clone(),
                observation: obs.led_key().clone(),
            });
        }
        Ok(())
    }

    /// Streams one observation into the track.
    pub fn update(&mut self, obs: Observation, cfg: &EstimatorConfig) -> Result<(), EstimatorError> {
        self.check_key(&obs)?;
        if let Some(alt) = accept_alternative(&obs, cfg.alt_threshold_tau) {
            self.alt_positions.push(alt);
            self.rough_position = rough_position(&self.alt_positions, cfg.pauta_min_samples);
        }
        self.observations.push(obs);

        let Some(rough) = self.rough_position else {
            return Ok(());
        };
        let reference = self.optimized_position.unwrap_or(rough);
        match self.k_reference {
            Some(prev) if prev.distance(&reference) <= K_RESAMPLE_DISTANCE => {
                let newest = self.observations.last().expect("just pushed");
                if let Some(k) = sample_k(newest, prev, cfg.distance_epsilon) {
                    self.k_samples.push(k);
                }
            }
            _ => self.resample_k(reference, cfg),
        }
        self.refresh_scale(cfg);
        if self.observations.len() >= cfg.min_obs_for_solve {
            self.refine(cfg);
        }
        Ok(())
    }

    fn resample_k(&mut self, reference: Point2, cfg: &EstimatorConfig) {
        self.k_samples = self
            .observations
            .iter()
            .filter_map(|o| sample_k(o, reference, cfg.distance_epsilon))
            .collect();
        self.k_reference = Some(reference);
    }

    fn refresh_scale(&mut self, cfg: &EstimatorConfig) {
        self.k_refined = refine_k(&self.k_samples, cfg.pauta_min_samples);
        self.height = self
            .k_refined
            .and_then(|k| estimate_height(k, cfg.intrinsics.focal(), cfg.cam_height_h1).ok());
    }

    /// Alternates scale refinement and the position solve until the position
    /// settles. Scale samples are measured against the newest position
    /// estimate; the final solve always uses the stored `k_refined`.
    pub fn refine(&mut self, cfg: &EstimatorConfig) {
        let Some(rough) = self.rough_position else {
            return;
        };
        let mut reference = self.optimized_position.unwrap_or(rough);
        let settle = cfg.solver.step_tolerance * 1e-3;
        for _ in 0..MAX_ALTERNATIONS {
            let resample = self
                .k_reference
                .map_or(true, |prev| prev.distance(&reference) > 0.0);
            if resample {
                self.resample_k(reference, cfg);
                self.refresh_scale(cfg);
            }
            let Some(k) = self.k_refined else {
                return;
            };
            let Ok(report) = solve_position(
                &self.observations,
                k,
                reference,
                cfg.distance_epsilon,
                &cfg.solver,
            ) else {
                return;
            };
            let moved = report.position.distance(&reference);
            reference = report.position;
            self.optimized_position = Some(report.position);
            self.last_solve = Some(report);
            if moved <= settle {
                break;
            }
        }
    }

    pub fn led_key(&self) -> &LedKey {
        &self.led_key
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn alt_positions(&self) -> &[Point2] {
        &self.alt_positions
    }

    pub fn rough_position(&self) -> Option<Point2> {
        self.rough_position
    }

    pub fn k_samples(&self) -> &[f64] {
        &self.k_samples
    }

    pub fn k_refined(&self) -> Option<f64> {
        self.k_refined
    }

    pub fn height(&self) -> Option<f64> {
        self.height
    }

    pub fn optimized_position(&self) -> Option<Point2> {
        self.optimized_position
    }

    pub fn last_solve(&self) -> Option<&SolveReport> {
        self.last_solve.as_ref()
    }

    /// [`cost_j1`] over this track with its refined scale.
    pub fn cost(&self, p: Point2, cfg: &EstimatorConfig) -> Result<f64, EstimatorError> {
        let k = self.k_refined.ok_or(EstimatorError::EmptySamples)?;
        cost_j1(&self.observations, p, k, cfg.distance_epsilon, &cfg.solver)
    }

    /// [`cost_gradient`] over this track with its refined scale.
    pub fn gradient(&self, p: Point2, cfg: &EstimatorConfig) -> Result<[f64; 2], EstimatorError> {
        let k = self.k_refined.ok_or(EstimatorError::EmptySamples)?;
        cost_gradient(&self.observations, p, k, cfg.distance_epsilon, &cfg.solver)
    }

    /// Root-mean-square of `‖(errdist, errang)‖` (weighted) at the solution.
    pub fn rms_residual(&self, cfg: &EstimatorConfig) -> Option<f64> {
        let p = self.optimized_position?;
        let k = self.k_refined?;
        let mut sum = 0.0;
        let mut n = 0usize;
        for obs in &self.observations {
            if let Ok(r) = residual(obs, p, k, cfg.distance_epsilon) {
                sum += cfg.solver.distance_weight * r.dist * r.dist + cfg.solver.angle_weight * r.ang * r.ang;
                n += 1;
            }
        }
        (n > 0).then(|| libm::sqrt(sum / n as f64))
    }
}

/// Final per-LED output.
#[derive(Debug, Clone, PartialEq)]
pub struct LedMapEntry {
    pub led_key: LedKey,
    pub x_hat: f64,
    pub y_hat: f64,
    pub height: f64,
    pub n_observations: usize,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    TooFewObservations,
    NoRoughPosition,
    NoScale,
    NotSolved,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapBuild {
    pub entries: Vec<LedMapEntry>,
    pub skipped: Vec<(LedKey, SkipReason)>,
}

/// Collects solved tracks into map entries sorted by key.
pub fn build_map<'a>(tracks: impl IntoIterator<Item = &'a LedTrack>, cfg: &EstimatorConfig) -> MapBuild {
    let mut out = MapBuild::default();
    for track in tracks {
        let skip = if track.observations.len() < cfg.min_obs_for_solve {
            Some(SkipReason::TooFewObservations)
        } else if track.rough_position.is_none() {
            Some(SkipReason::NoRoughPosition)
        } else if track.height.is_none() {
            Some(SkipReason::NoScale)
        } else if track.optimized_position.is_none() {
            Some(SkipReason::NotSolved)
        } else {
            None
        };
        if let Some(reason) = skip {
            out.skipped.push((track.led_key.clone(), reason));
            continue;
        }
        let p = track.optimized_position.expect("checked");
        out.entries.push(LedMapEntry {
            led_key: track.led_key.clone(),
            x_hat: p.x,
            y_hat: p.y,
            height: track.height.expect("checked"),
            n_observations: track.observations.len(),
            rms_residual: track.rms_residual(cfg).unwrap_or(0.0),
        });
    }
    out.entries.sort_by(|a, b| a.led_key.cmp(&b.led_key));
    out.skipped.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Groups observations by LED key, preserving arrival order within a key.
pub fn group_by_led(observations: impl IntoIterator<Item = Observation>) -> BTreeMap<LedKey, Vec<Observation>> {
    let mut groups: BTreeMap<LedKey, Vec<Observation>> = BTreeMap::new();
    for obs in observations {
        groups.entry(obs.led_key().clone()).or_default().push(obs);
    }
    groups
}

/// Batch pipeline: group, estimate every track, and build the map.
pub fn map_observations(
    observations: impl IntoIterator<Item = Observation>,
    cfg: &EstimatorConfig,
) -> Result<(Vec<LedTrack>, MapBuild), EstimatorError> {
    cfg.validate()?;
    let tracks = group_by_led(observations)
        .into_iter()
        .map(|(key, obs)| LedTrack::from_observations(key, obs, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let map = build_map(&tracks, cfg);
    Ok((tracks, map))
}
