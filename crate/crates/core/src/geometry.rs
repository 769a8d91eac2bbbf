//! Planar geometry shared by the simulator and the estimator.
//!
//! Angles live in the half-open range `(-π, π]`. Bearings use a two-argument
//! arctangent whose *first* argument is the sine component and whose *second*
//! argument is the cosine component, both for pixel offsets and for metric
//! offsets, so the angular residual compares like with like.

use core::f64::consts::{PI, TAU};
use core::fmt;

/// Errors raised by geometric primitives and constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryError {
    /// A value that must be finite was NaN or infinite.
    NonFinite(&'static str),
    /// Both arguments of a bearing were zero.
    UndefinedBearing,
    /// Focal length must be strictly positive.
    NonPositiveFocal(f64),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::NonFinite(what) => write!(f, "non-finite value for {what}"),
            GeometryError::UndefinedBearing => write!(f, "bearing of a zero-length offset is undefined"),
            GeometryError::NonPositiveFocal(v) => write!(f, "focal length must be > 0, got {v}"),
        }
    }
}

impl core::error::Error for GeometryError {}

pub(crate) fn finite(value: f64, what: &'static str) -> Result<f64, GeometryError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(GeometryError::NonFinite(what))
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> Result<f64, GeometryError> {
    finite(a, "angle")?;
    Ok(wrap_unchecked(a))
}

/// `wrap_angle` for values already known to be finite.
#[inline]
pub(crate) fn wrap_unchecked(a: f64) -> f64 {
    // IEEE remainder is exact and lands in [-π, π]; fold the closed end.
    let r = libm::remainder(a, TAU);
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Direction of the offset `(du, dv)` with `du` as the sine component.
///
/// Returns `α ∈ (-π, π]` such that `du = r sin α` and `dv = r cos α`.
pub fn bearing(du: f64, dv: f64) -> Result<f64, GeometryError> {
    finite(du, "bearing sine component")?;
    finite(dv, "bearing cosine component")?;
    if du == 0.0 && dv == 0.0 {
        return Err(GeometryError::UndefinedBearing);
    }
    Ok(bearing_unchecked(du, dv))
}

#[inline]
pub(crate) fn bearing_unchecked(du: f64, dv: f64) -> f64 {
    wrap_unchecked(libm::atan2(du, dv))
}

/// Pinhole intrinsics of the upward-facing camera, all in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    cx: f64,
    cy: f64,
    focal: f64,
}

impl CameraIntrinsics {
    pub fn new(cx: f64, cy: f64, focal: f64) -> Result<Self, GeometryError> {
        finite(cx, "c_x")?;
        finite(cy, "c_y")?;
        finite(focal, "focal length")?;
        if focal <= 0.0 {
            return Err(GeometryError::NonPositiveFocal(focal));
        }
        Ok(Self { cx, cy, focal })
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }

    pub fn cy(&self) -> f64 {
        self.cy
    }

    pub fn focal(&self) -> f64 {
        self.focal
    }
}

/// ROI center on the pixel plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

impl PixelPoint {
    pub fn new(u: f64, v: f64) -> Result<Self, GeometryError> {
        Ok(Self {
            u: finite(u, "pixel u")?,
            v: finite(v, "pixel v")?,
        })
    }
}

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Planar pose; `theta` is kept in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPose {
    x: f64,
    y: f64,
    theta: f64,
}

impl PlanarPose {
    pub const ORIGIN: PlanarPose = PlanarPose {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    /// Builds a pose, wrapping `theta` into range.
    pub fn new(x: f64, y: f64, theta: f64) -> Result<Self, GeometryError> {
        Ok(Self {
            x: finite(x, "pose x")?,
            y: finite(y, "pose y")?,
            theta: wrap_angle(theta)?,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Rigid planar offset of the LED camera relative to the pose-providing camera,
/// expressed in the pose-providing camera's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedTransform2D {
    dx: f64,
    dy: f64,
    dtheta: f64,
}

impl FixedTransform2D {
    pub const IDENTITY: FixedTransform2D = FixedTransform2D {
        dx: 0.0,
        dy: 0.0,
        dtheta: 0.0,
    };

    pub fn new(dx: f64, dy: f64, dtheta: f64) -> Result<Self, GeometryError> {
        Ok(Self {
            dx: finite(dx, "transform dx")?,
            dy: finite(dy, "transform dy")?,
            dtheta: wrap_angle(dtheta)?,
        })
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }
}

/// Composes the pose-providing camera pose with the fixed mount transform.
pub fn apply_fixed_transform(cam1: &PlanarPose, t: &FixedTransform2D) -> PlanarPose {
    let (s, c) = libm::sincos(cam1.theta);
    PlanarPose {
        x: cam1.x + c * t.dx - s * t.dy,
        y: cam1.y + s * t.dx + c * t.dy,
        theta: wrap_unchecked(cam1.theta + t.dtheta),
    }
}

/// Opaque identifier used only to group observations of one LED.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LedKey(alloc::string::String);

impl LedKey {
    pub fn new(key: impl Into<alloc::string::String>) -> Self {
        Self(key.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LedKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for LedKey {
    fn from(value: &str) -> Self {
        Self::new(value)
    }
}

/// One fused sensor sample: ROI center, yaw and the pre-estimated LED-camera pose,
/// with the derived polar pair `(d_obs, φ_obs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    led_key: LedKey,
    pixel: PixelPoint,
    yaw: f64,
    cam2_pose_pre: PlanarPose,
    d_obs: f64,
    phi_obs: f64,
    bearing_defined: bool,
    timestamp: f64,
}

impl Observation {
    pub fn led_key(&self) -> &LedKey {
        &self.led_key
    }

    pub fn pixel(&self) -> PixelPoint {
        self.pixel
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn cam2_pose_pre(&self) -> &PlanarPose {
        &self.cam2_pose_pre
    }

    /// Pixel distance between the principal point and the ROI center.
    pub fn d_obs(&self) -> f64 {
        self.d_obs
    }

    /// Yaw-compensated bearing of the ROI center; `0` when undefined.
    pub fn phi_obs(&self) -> f64 {
        self.phi_obs
    }

    /// False when the ROI sits exactly on the principal point.
    pub fn bearing_defined(&self) -> bool {
        self.bearing_defined
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    /// Same observation attributed to a different LED.
    pub fn with_key(mut self, key: LedKey) -> Self {
        self.led_key = key;
        self
    }
}

/// Builds an [`Observation`] from a ROI center and the camera yaw.
pub fn make_observation(
    pixel: PixelPoint,
    yaw: f64,
    intrinsics: &CameraIntrinsics,
    cam2_pose_pre: PlanarPose,
    led_key: LedKey,
    timestamp: f64,
) -> Result<Observation, GeometryError> {
    finite(pixel.u, "pixel u")?;
    finite(pixel.v, "pixel v")?;
    finite(yaw, "yaw")?;
    finite(timestamp, "timestamp")?;
    let du = pixel.u - intrinsics.cx;
    let dv = pixel.v - intrinsics.cy;
    let d_obs = libm::hypot(du, dv);
    let (phi_obs, bearing_defined) = if d_obs == 0.0 {
        (0.0, false)
    } else {
        (wrap_unchecked(bearing_unchecked(du, dv) - yaw), true)
    };
    Ok(Observation {
        led_key,
        pixel,
        yaw,
        cam2_pose_pre,
        d_obs,
        phi_obs,
        bearing_defined,
        timestamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn intr() -> CameraIntrinsics {
        CameraIntrinsics::new(320.0, 240.0, 600.0).unwrap()
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0).unwrap(), 0.0);
        assert!((wrap_angle(1.5 * PI).unwrap() + PI / 2.0).abs() < TOL);
        assert_eq!(wrap_angle(-PI).unwrap(), PI);
        assert_eq!(wrap_angle(PI).unwrap(), PI);
        assert!(wrap_angle(f64::NAN).is_err());
        assert!(wrap_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn bearing_examples() {
        assert_eq!(bearing(0.0, 1.0).unwrap(), 0.0);
        assert!((bearing(1.0, 0.0).unwrap() - PI / 2.0).abs() < TOL);
        // 3-4-5 triangle: opposite 3, adjacent 4.
        assert!((bearing(3.0, 4.0).unwrap() - libm::atan(0.75)).abs() < TOL);
        assert!((bearing(3.0, 4.0).unwrap() - 0.6435).abs() < 1e-4);
        assert_eq!(bearing(0.0, 0.0), Err(GeometryError::UndefinedBearing));
        // -0.0 on the sine axis must not produce -π.
        assert_eq!(bearing(-0.0, -1.0).unwrap(), PI);
    }

    #[test]
    fn observation_examples() {
        let pose = PlanarPose::ORIGIN;
        let at_center = make_observation(
            PixelPoint::new(320.0, 240.0).unwrap(),
            1.0,
            &intr(),
            pose,
            "a".into(),
            0.0,
        )
        .unwrap();
        assert_eq!(at_center.d_obs(), 0.0);
        assert_eq!(at_center.phi_obs(), 0.0);
        assert!(!at_center.bearing_defined());

        let px = PixelPoint::new(323.0, 244.0).unwrap();
        let obs = make_observation(px, 0.0, &intr(), pose, "a".into(), 0.0).unwrap();
        assert!((obs.d_obs() - 5.0).abs() < TOL);
        assert!((obs.phi_obs() - libm::atan2(3.0, 4.0)).abs() < TOL);

        let yaw = libm::atan2(3.0, 4.0);
        let obs = make_observation(px, yaw, &intr(), pose, "a".into(), 0.0).unwrap();
        assert!((obs.d_obs() - 5.0).abs() < TOL);
        assert!(obs.phi_obs().abs() < TOL);

        assert!(make_observation(px, f64::NAN, &intr(), pose, "a".into(), 0.0).is_err());
        let bad = PixelPoint { u: f64::INFINITY, v: 0.0 };
        assert!(make_observation(bad, 0.0, &intr(), pose, "a".into(), 0.0).is_err());
    }

    #[test]
    fn fixed_transform_examples() {
        let id = apply_fixed_transform(&PlanarPose::ORIGIN, &FixedTransform2D::IDENTITY);
        assert_eq!(id, PlanarPose::ORIGIN);

        let t = FixedTransform2D::new(0.1, 0.0, 0.0).unwrap();
        let p = apply_fixed_transform(&PlanarPose::new(1.0, 2.0, 0.0).unwrap(), &t);
        assert!((p.x() - 1.1).abs() < TOL && (p.y() - 2.0).abs() < TOL && p.theta() == 0.0);

        // Rotation-matrix oracle: R(π/2) · (0.1, 0) = (0, 0.1).
        let p = apply_fixed_transform(&PlanarPose::new(0.0, 0.0, PI / 2.0).unwrap(), &t);
        let (r00, r01, r10, r11) = (0.0, -1.0, 1.0, 0.0);
        assert!((p.x() - (r00 * 0.1 + r01 * 0.0)).abs() < TOL);
        assert!((p.y() - (r10 * 0.1 + r11 * 0.0)).abs() < TOL);
        assert!((p.theta() - PI / 2.0).abs() < TOL);
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(0.0, 0.0, 0.0).is_err());
        assert!(CameraIntrinsics::new(0.0, 0.0, -1.0).is_err());
        assert!(CameraIntrinsics::new(f64::NAN, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent_and_in_range(a in -1e6f64..1e6) {
            let w = wrap_angle(a).unwrap();
            prop_assert!(w > -PI && w <= PI);
            prop_assert_eq!(wrap_angle(w).unwrap(), w);
            let turns = (a - w) / TAU;
            prop_assert!((turns - libm::round(turns)).abs() < 1e-6);
        }

        #[test]
        fn bearing_round_trip(alpha in -PI..=PI, r in 1e-3f64..1e3) {
            let alpha = if alpha == -PI { PI } else { alpha };
            let (s, c) = libm::sincos(alpha);
            let got = bearing(r * s, r * c).unwrap();
            prop_assert!(wrap_unchecked(got - alpha).abs() < 1e-12);
        }

        #[test]
        fn observation_invariant_to_pixel_translation(
            u in 0.0f64..640.0, v in 0.0f64..480.0, yaw in -3.0f64..3.0,
            ou in -500.0f64..500.0, ov in -500.0f64..500.0,
        ) {
            let a = make_observation(PixelPoint::new(u, v).unwrap(), yaw, &intr(),
                PlanarPose::ORIGIN, "k".into(), 0.0).unwrap();
            let shifted = CameraIntrinsics::new(320.0 + ou, 240.0 + ov, 600.0).unwrap();
            let b = make_observation(PixelPoint::new(u + ou, v + ov).unwrap(), yaw, &shifted,
                PlanarPose::ORIGIN, "k".into(), 0.0).unwrap();
            prop_assert!((a.d_obs() - b.d_obs()).abs() < 1e-9);
            if a.d_obs() > 1e-6 {
                prop_assert!(wrap_unchecked(a.phi_obs() - b.phi_obs()).abs() < 1e-6);
            }
        }

        #[test]
        fn zero_transform_is_identity(x in -50.0f64..50.0, y in -50.0f64..50.0, th in -PI..PI) {
            let p = PlanarPose::new(x, y, th).unwrap();
            prop_assert_eq!(apply_fixed_transform(&p, &FixedTransform2D::IDENTITY), p);
        }
    }
}
