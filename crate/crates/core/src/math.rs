//! Rigid-body helpers shared by every module: poses, twists and frame construction.

use nalgebra::{Isometry3, Rotation3, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;

/// World "up" for the right-handed z-up convention used throughout.
pub fn world_up() -> Vec3 {
    Vec3::z()
}

/// A rigid pose: position in meters and a unit-quaternion orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: UnitQuaternion<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            position: Vec3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn new(position: Vec3, orientation: UnitQuaternion<f64>) -> Self {
        Self {
            position,
            orientation,
        }
    }

    pub fn from_isometry(iso: &Isometry3<f64>) -> Self {
        Self {
            position: iso.translation.vector,
            orientation: iso.rotation,
        }
    }

    pub fn to_isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.position), self.orientation)
    }

    /// `self * other`: express `other` (given in this frame) in the parent frame.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.position + self.orientation * other.position,
            orientation: (self.orientation * other.orientation).renormalize_fast_copy(),
        }
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose {
            position: -(inv * self.position),
            orientation: inv,
        }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.position + self.orientation * p
    }

    pub fn inverse_transform_point(&self, p: &Vec3) -> Vec3 {
        self.orientation.inverse() * (p - self.position)
    }

    pub fn x_axis(&self) -> Vec3 {
        self.orientation * Vec3::x()
    }

    pub fn y_axis(&self) -> Vec3 {
        self.orientation * Vec3::y()
    }

    /// Tool / optical axis.
    pub fn z_axis(&self) -> Vec3 {
        self.orientation * Vec3::z()
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.orientation.coords.iter().all(|v| v.is_finite())
    }

    /// Position distance and orientation angle to another pose.
    pub fn distance_to(&self, other: &Pose) -> (f64, f64) {
        (
            (self.position - other.position).norm(),
            self.orientation.angle_to(&other.orientation),
        )
    }
}

trait RenormalizeCopy {
    fn renormalize_fast_copy(self) -> Self;
}

impl RenormalizeCopy for UnitQuaternion<f64> {
    fn renormalize_fast_copy(mut self) -> Self {
        self.renormalize_fast();
        self
    }
}

/// Spatial velocity of the tool point, both parts expressed in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist {
    pub linear: Vec3,
    pub angular: Vec3,
}

impl Twist {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(linear: Vec3, angular: Vec3) -> Self {
        Self { linear, angular }
    }

    pub fn is_zero(&self) -> bool {
        self.linear.iter().chain(self.angular.iter()).all(|v| *v == 0.0)
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.linear.x,
            self.linear.y,
            self.linear.z,
            self.angular.x,
            self.angular.y,
            self.angular.z,
        ]
    }
}

/// Orientation whose z-axis is `forward` and whose y-axis points as close to
/// world-down as possible (camera convention: x right, y down, z forward).
///
/// Returns `None` when `forward` is (nearly) parallel to `up`.
pub fn look_rotation(forward: &Vec3, up: &Vec3) -> Option<UnitQuaternion<f64>> {
    let z = forward.try_normalize(1e-12)?;
    let x = z.cross(up).try_normalize(1e-9)?;
    let y = z.cross(&x);
    let rot = Rotation3::from_basis_unchecked(&[x, y, z]);
    Some(UnitQuaternion::from_rotation_matrix(&rot))
}

/// Orientation with z-axis `forward`, falling back to world x as the up hint
/// when `forward` is vertical.
pub fn look_rotation_any(forward: &Vec3) -> UnitQuaternion<f64> {
    look_rotation(forward, &world_up())
        .or_else(|| look_rotation(forward, &Vec3::x()))
        .unwrap_or_else(UnitQuaternion::identity)
}

/// Rotation of `angle` about a unit axis.
pub fn axis_angle(axis: &Vec3, angle: f64) -> UnitQuaternion<f64> {
    match Unit::try_new(*axis, 1e-12) {
        Some(a) => UnitQuaternion::from_axis_angle(&a, angle),
        None => UnitQuaternion::identity(),
    }
}

/// Roll-pitch-yaw (fixed-axis x, then y, then z) to a quaternion.
pub fn rpy(roll: f64, pitch: f64, yaw: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_euler_angles(roll, pitch, yaw)
}
