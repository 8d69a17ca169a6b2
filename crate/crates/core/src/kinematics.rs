//! Serial 6R arm with a bent distal link.
//!
//! Every joint rotates about an axis fixed in its own link frame. A link frame
//! is reached from its parent by a fixed offset and a fixed rotation, so the
//! tool pose is `base * Π (offset_i * rot_i * R(axis_i, q_i)) * distal`.
//!
//! The distal link leaves the last joint along that joint's x-axis and bends by
//! a fixed angle before the gripper. With the default right-angle bend the
//! gripper (and the collocated tip camera) looks perpendicular to the last
//! joint axis, which keeps the working poses away from the configuration where
//! the forearm roll and flange roll axes line up.

use alloc::vec::Vec;

use nalgebra::{Matrix6, Vector6, SVD};
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::KinematicsError;
use crate::geometry::Capsule;
use crate::math::{axis_angle, look_rotation_any, rpy, Pose, Twist, Vec3};

pub const JOINT_COUNT: usize = 6;

/// A point in joint space, radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointConfig {
    pub angles: [f64; JOINT_COUNT],
}

impl JointConfig {
    pub const fn new(angles: [f64; JOINT_COUNT]) -> Self {
        Self { angles }
    }

    pub const fn zeros() -> Self {
        Self {
            angles: [0.0; JOINT_COUNT],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.angles.iter().all(|a| a.is_finite())
    }

    pub fn as_vector(&self) -> Vector6<f64> {
        Vector6::from_column_slice(&self.angles)
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        let mut angles = [0.0; JOINT_COUNT];
        angles.copy_from_slice(v.as_slice());
        Self { angles }
    }

    /// Largest absolute per-joint difference.
    pub fn max_abs_diff(&self, other: &JointConfig) -> f64 {
        self.angles
            .iter()
            .zip(other.angles.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Euclidean joint-space distance.
    pub fn distance(&self, other: &JointConfig) -> f64 {
        (self.as_vector() - other.as_vector()).norm()
    }

    pub fn lerp(&self, other: &JointConfig, t: f64) -> JointConfig {
        let mut angles = [0.0; JOINT_COUNT];
        for (i, a) in angles.iter_mut().enumerate() {
            *a = self.angles[i] + (other.angles[i] - self.angles[i]) * t;
        }
        JointConfig { angles }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimit {
    pub min: f64,
    pub max: f64,
}

impl JointLimit {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.min).min(self.max)
    }
}

/// Fixed transform from the parent joint frame to this joint, plus the joint
/// axis and the radius of the link capsule spanning the offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    /// Translation from the parent frame origin, meters.
    pub offset: Vec3,
    /// Fixed roll/pitch/yaw applied after the offset, radians.
    #[serde(default)]
    pub rotation: [f64; 3],
    /// Revolute axis in this link's frame.
    pub axis: Vec3,
    /// Capsule radius of the segment from the parent origin to this origin, meters.
    pub capsule_radius: f64,
}

impl LinkGeometry {
    fn fixed_pose(&self) -> Pose {
        Pose::new(
            self.offset,
            rpy(self.rotation[0], self.rotation[1], self.rotation[2]),
        )
    }
}

/// Last link: a straight segment along the final joint's x-axis, then a bend
/// about that frame's y-axis, then the gripper pointing along the tool z-axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistalLink {
    /// Straight length from the flange to the bend, meters.
    pub length: f64,
    /// Bend angle, radians. A right angle makes the gripper perpendicular to the flange axis.
    pub bend: f64,
    /// Capsule radius of the distal segment, meters.
    pub capsule_radius: f64,
    /// Gripper finger length measured from the tip camera, meters.
    pub gripper_length: f64,
    /// Half the open finger stroke, meters.
    pub gripper_half_stroke: f64,
    /// Radius of the camera/finger housing capsule, meters.
    pub housing_radius: f64,
    /// Housing extent behind the camera along -z, meters.
    pub housing_back: f64,
}

impl DistalLink {
    /// Tool frame relative to the last joint frame. The camera sits at the origin.
    pub fn tool_pose(&self) -> Pose {
        // link direction is +x; after the bend it becomes the tool z-axis
        Pose::new(
            Vec3::new(self.length, 0.0, 0.0),
            rpy(0.0, self.bend + core::f64::consts::FRAC_PI_2, 0.0),
        )
    }
}

/// Serial-chain description. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    /// Pose of the arm base in the world.
    pub base: Pose,
    pub links: [LinkGeometry; JOINT_COUNT],
    pub limits: [JointLimit; JOINT_COUNT],
    pub distal: DistalLink,
    /// Configuration the arm rests in before a trial.
    pub home: JointConfig,
}

/// Damped-least-squares parameters for position IK.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IkParams {
    pub damping: f64,
    pub max_iterations: usize,
    pub max_step: f64,
    pub position_tolerance: f64,
    pub orientation_tolerance: f64,
}

impl Default for IkParams {
    fn default() -> Self {
        Self {
            damping: 0.05,
            max_iterations: 200,
            max_step: 0.2,
            position_tolerance: 1e-4,
            orientation_tolerance: 1e-3,
        }
    }
}

/// Limits for resolved-rate motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityLimits {
    /// rad/s, applied to every joint.
    pub joint_velocity_cap: f64,
    /// m/s, applied to the linear part of the commanded twist.
    pub tool_speed_cap: f64,
    /// Maximum damping used near singularities.
    pub damping: f64,
    /// Smallest singular value below which damping kicks in.
    pub singular_threshold: f64,
    /// Consecutive under-achieving steps before a workspace limit is reported.
    pub workspace_patience: u32,
    /// Fraction of the requested motion a step must achieve to count as progress.
    pub min_progress: f64,
}

impl Default for VelocityLimits {
    fn default() -> Self {
        Self {
            joint_velocity_cap: 1.0,
            tool_speed_cap: 0.1,
            damping: 0.05,
            singular_threshold: 0.05,
            workspace_patience: 10,
            min_progress: 0.5,
        }
    }
}

impl Default for ArmModel {
    fn default() -> Self {
        Self::lite_like()
    }
}

impl ArmModel {
    /// Generic compact 6R arm: shoulder at 0.14 m, 0.18 m upper arm, 0.18 m
    /// forearm to the wrist, short flange and a 0.08 m right-angle distal link.
    pub fn lite_like() -> Self {
        let y = Vec3::y();
        let x = Vec3::x();
        let z = Vec3::z();
        let link = |offset: Vec3, axis: Vec3, r: f64| LinkGeometry {
            offset,
            rotation: [0.0; 3],
            axis,
            capsule_radius: r,
        };
        let pi = core::f64::consts::PI;
        Self {
            base: Pose::identity(),
            links: [
                link(Vec3::new(0.0, 0.0, 0.12), z, 0.05),
                link(Vec3::new(0.0, 0.0, 0.02), y, 0.045),
                link(Vec3::new(0.0, 0.0, 0.18), y, 0.03),
                link(Vec3::new(0.08, 0.0, 0.0), x, 0.028),
                link(Vec3::new(0.10, 0.0, 0.0), y, 0.025),
                link(Vec3::new(0.02, 0.0, 0.0), x, 0.02),
            ],
            limits: [
                JointLimit::new(-pi, pi),
                JointLimit::new(-2.6, 2.6),
                JointLimit::new(-2.8, 2.8),
                JointLimit::new(-pi, pi),
                JointLimit::new(-2.6, 2.6),
                JointLimit::new(-pi, pi),
            ],
            distal: DistalLink {
                length: 0.08,
                bend: core::f64::consts::FRAC_PI_2,
                capsule_radius: 0.008,
                gripper_length: 0.04,
                gripper_half_stroke: 0.02,
                housing_radius: 0.012,
                housing_back: 0.02,
            },
            home: JointConfig::new([0.0, -0.3, 0.9, 0.0, -2.2, 0.0]),
        }
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        for (i, l) in self.links.iter().enumerate() {
            if !(l.offset.norm() > 0.0) {
                return Err(KinematicsError::InvalidModel("link offsets must be positive"));
            }
            if !(l.capsule_radius > 0.0) {
                return Err(KinematicsError::InvalidModel("capsule radii must be positive"));
            }
            if l.axis.norm() < 1e-9 {
                return Err(KinematicsError::InvalidModel("joint axis must be non-zero"));
            }
            if !(self.limits[i].min < self.limits[i].max) {
                return Err(KinematicsError::InvalidModel("joint limit min must be below max"));
            }
        }
        let d = &self.distal;
        if !(d.length > 0.0 && d.capsule_radius > 0.0 && d.gripper_length > 0.0) {
            return Err(KinematicsError::InvalidModel("distal link lengths must be positive"));
        }
        if !self.within_limits(&self.home) {
            return Err(KinematicsError::InvalidModel("home configuration outside limits"));
        }
        Ok(())
    }

    /// Sum of all link lengths from the base, including the distal link and fingers.
    pub fn total_length(&self) -> f64 {
        self.links.iter().map(|l| l.offset.norm()).sum::<f64>()
            + self.distal.length
            + self.distal.gripper_length
    }

    pub fn within_limits(&self, q: &JointConfig) -> bool {
        q.angles
            .iter()
            .zip(self.limits.iter())
            .all(|(a, l)| l.contains(*a))
    }

    pub fn clamp_to_limits(&self, q: &JointConfig) -> JointConfig {
        let mut out = *q;
        for (a, l) in out.angles.iter_mut().zip(self.limits.iter()) {
            *a = l.clamp(*a);
        }
        out
    }

    /// World poses of the six joint frames (after each joint rotation) and the tool.
    pub fn frames(&self, q: &JointConfig) -> [Pose; JOINT_COUNT + 1] {
        let mut out = [Pose::identity(); JOINT_COUNT + 1];
        let mut t = self.base;
        for (i, link) in self.links.iter().enumerate() {
            t = t
                .compose(&link.fixed_pose())
                .compose(&Pose::new(Vec3::zeros(), axis_angle(&link.axis, q.angles[i])));
            out[i] = t;
        }
        out[JOINT_COUNT] = t.compose(&self.distal.tool_pose());
        out
    }

    /// Tool-frame (tip camera) pose in the world.
    pub fn forward_kinematics(&self, q: &JointConfig) -> Pose {
        self.frames(q)[JOINT_COUNT]
    }

    /// Geometric Jacobian at the tool point, world frame. Rows 0..3 are linear
    /// velocity, rows 3..6 angular velocity.
    pub fn jacobian(&self, q: &JointConfig) -> Matrix6<f64> {
        let frames = self.frames(q);
        let tip = frames[JOINT_COUNT].position;
        let mut j = Matrix6::zeros();
        for i in 0..JOINT_COUNT {
            let axis = frames[i].orientation * self.links[i].axis.normalize();
            let lin = axis.cross(&(tip - frames[i].position));
            for r in 0..3 {
                j[(r, i)] = lin[r];
                j[(r + 3, i)] = axis[r];
            }
        }
        j
    }

    /// Collision capsules of the arm in world coordinates: one per link, the
    /// distal segment, and the camera/finger housing.
    pub fn capsules(&self, q: &JointConfig) -> Vec<Capsule> {
        self.capsules_with_housing(q, self.distal.housing_radius, 0.0)
    }

    /// Same as [`ArmModel::capsules`] with an enlarged end-effector housing,
    /// offset sideways along tool -y (an offset camera body).
    pub fn capsules_with_housing(
        &self,
        q: &JointConfig,
        housing_radius: f64,
        housing_side_offset: f64,
    ) -> Vec<Capsule> {
        let frames = self.frames(q);
        let mut caps = Vec::with_capacity(JOINT_COUNT + 3);
        let mut prev = self.base.position;
        for (i, link) in self.links.iter().enumerate() {
            let p = frames[i].position;
            caps.push(Capsule::new(prev, p, link.capsule_radius));
            prev = p;
        }
        let tool = frames[JOINT_COUNT];
        caps.push(Capsule::new(prev, tool.position, self.distal.capsule_radius));
        let side = -tool.y_axis() * housing_side_offset;
        caps.push(Capsule::new(
            tool.position - tool.z_axis() * self.distal.housing_back + side,
            tool.position + side,
            housing_radius,
        ));
        caps
    }

    /// Deterministic IK seeds for a target: the supplied seed first, then
    /// ready poses turned to face the target azimuth.
    pub fn ik_seeds(&self, target: &Pose, seed: &JointConfig) -> Vec<JointConfig> {
        let local = self.base.inverse_transform_point(&target.position);
        let yaw = local.y.atan2(local.x);
        let mut seeds = Vec::with_capacity(5);
        seeds.push(*seed);
        let ready: [[f64; JOINT_COUNT]; 4] = [
            [yaw, 0.2, 0.6, 0.0, -2.3, 0.0],
            [yaw, 0.6, 0.0, 0.0, -2.0, 0.0],
            [yaw, 0.2, 0.6, core::f64::consts::PI * 0.99, 2.3, 0.0],
            [yaw, -0.2, 1.4, 0.0, -1.0, 0.0],
        ];
        for r in ready.iter() {
            seeds.push(self.clamp_to_limits(&JointConfig::new(*r)));
        }
        seeds
    }
}

/// Stacked pose error `[position; rotation vector]`, world frame, that moves
/// `current` toward `target`.
pub fn pose_error(current: &Pose, target: &Pose) -> Vector6<f64> {
    let dp = target.position - current.position;
    let dr = (target.orientation * current.orientation.inverse()).scaled_axis();
    Vector6::new(dp.x, dp.y, dp.z, dr.x, dr.y, dr.z)
}

/// Damped-least-squares inverse kinematics from a single seed.
pub fn inverse_kinematics(
    model: &ArmModel,
    target: &Pose,
    seed: &JointConfig,
    params: &IkParams,
) -> Result<JointConfig, KinematicsError> {
    if !target.is_finite() || !seed.is_finite() {
        return Err(KinematicsError::NoSolution);
    }
    let reach = model.total_length();
    if (target.position - model.base.position).norm() > reach {
        return Err(KinematicsError::NoSolution);
    }
    // damping adapts: shrinks after a step that lowers the error, grows after one that doesn't
    let mut lambda2 = params.damping * params.damping;
    let mut q = model.clamp_to_limits(seed);
    let mut e = pose_error(&model.forward_kinematics(&q), target);
    let mut cost = e.norm_squared();
    // iterate past the acceptance tolerance so round trips land well inside it
    let tight_p = params.position_tolerance * 1e-2;
    let tight_o = params.orientation_tolerance * 1e-2;
    for _ in 0..=params.max_iterations {
        let ep = e.fixed_rows::<3>(0).norm();
        let eo = e.fixed_rows::<3>(3).norm();
        if ep <= tight_p && eo <= tight_o {
            return Ok(q);
        }
        let j = model.jacobian(&q);
        let jjt = j * j.transpose() + Matrix6::identity() * lambda2;
        let Some(chol) = jjt.cholesky() else {
            break;
        };
        let mut dq = j.transpose() * chol.solve(&e);
        let biggest = dq.amax();
        if biggest > params.max_step {
            dq *= params.max_step / biggest;
        }
        let trial = model.clamp_to_limits(&JointConfig::from_vector(&(q.as_vector() + dq)));
        let e_trial = pose_error(&model.forward_kinematics(&trial), target);
        let c = e_trial.norm_squared();
        if c < cost {
            q = trial;
            e = e_trial;
            cost = c;
            lambda2 = (lambda2 * 0.25).max(1e-12);
        } else {
            lambda2 = (lambda2 * 4.0).min(1e4);
        }
    }
    let pose = model.forward_kinematics(&q);
    let (ep, eo) = pose.distance_to(target);
    if ep <= params.position_tolerance && eo <= params.orientation_tolerance {
        Ok(q)
    } else {
        Err(KinematicsError::NoSolution)
    }
}

/// Tries every seed from [`ArmModel::ik_seeds`]; first success wins.
pub fn inverse_kinematics_multi(
    model: &ArmModel,
    target: &Pose,
    seed: &JointConfig,
    params: &IkParams,
) -> Result<JointConfig, KinematicsError> {
    let reach = model.total_length();
    if (target.position - model.base.position).norm() > reach {
        return Err(KinematicsError::NoSolution);
    }
    for s in model.ik_seeds(target, seed) {
        if let Ok(q) = inverse_kinematics(model, target, &s, params) {
            return Ok(q);
        }
    }
    Err(KinematicsError::NoSolution)
}

/// Outcome of one resolved-rate step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityStep {
    pub q: JointConfig,
    /// Fraction of the requested twist realised along its own direction.
    pub achieved: f64,
}

/// One resolved-rate step `q' = q + dt * J⁺ * twist` with a singularity-damped
/// pseudoinverse, joint-velocity cap and limit clamping.
pub fn cartesian_velocity_step(
    model: &ArmModel,
    q: &JointConfig,
    twist: &Twist,
    dt: f64,
    limits: &VelocityLimits,
) -> VelocityStep {
    if twist.is_zero() || !(dt > 0.0) {
        return VelocityStep { q: *q, achieved: 1.0 };
    }
    let mut request = *twist;
    let speed = request.linear.norm();
    if speed > limits.tool_speed_cap {
        request.linear *= limits.tool_speed_cap / speed;
    }
    let v = Vector6::from_column_slice(&request.as_array());
    let j = model.jacobian(q);
    let svd = SVD::new(j, true, true);
    let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
        return VelocityStep { q: *q, achieved: 0.0 };
    };
    let sigma_min = svd.singular_values.min();
    let lambda2 = if sigma_min >= limits.singular_threshold {
        0.0
    } else {
        let r = sigma_min / limits.singular_threshold;
        (1.0 - r * r) * limits.damping * limits.damping
    };
    let mut s_inv = Vector6::zeros();
    for i in 0..6 {
        let s = svd.singular_values[i];
        s_inv[i] = if s * s + lambda2 > 0.0 { s / (s * s + lambda2) } else { 0.0 };
    }
    let ut_v = u.transpose() * v;
    let mut qdot = vt.transpose() * ut_v.component_mul(&s_inv);
    let fastest = qdot.amax();
    if fastest > limits.joint_velocity_cap {
        qdot *= limits.joint_velocity_cap / fastest;
    }
    let next = model.clamp_to_limits(&JointConfig::from_vector(&(q.as_vector() + qdot * dt)));
    let realised = j * (next.as_vector() - q.as_vector()) / dt;
    let achieved = realised.dot(&v) / v.norm_squared();
    VelocityStep { q: next, achieved }
}

/// Resolved-rate stepper that reports a workspace limit once clamping has
/// starved the requested motion for `workspace_patience` consecutive steps.
#[derive(Debug, Clone, Default)]
pub struct VelocityController {
    pub limits: VelocityLimits,
    shortfall: u32,
}

impl VelocityController {
    pub fn new(limits: VelocityLimits) -> Self {
        Self {
            limits,
            shortfall: 0,
        }
    }

    pub fn consecutive_shortfall(&self) -> u32 {
        self.shortfall
    }

    pub fn step(
        &mut self,
        model: &ArmModel,
        q: &JointConfig,
        twist: &Twist,
        dt: f64,
    ) -> Result<JointConfig, KinematicsError> {
        if !(dt > 0.0) {
            return Err(KinematicsError::InvalidTimeStep);
        }
        let step = cartesian_velocity_step(model, q, twist, dt, &self.limits);
        // a zero twist is neither progress nor shortfall
        if !twist.is_zero() {
            if step.achieved < self.limits.min_progress {
                self.shortfall += 1;
                if self.shortfall >= self.limits.workspace_patience {
                    return Err(KinematicsError::WorkspaceLimit);
                }
            } else {
                self.shortfall = 0;
            }
        }
        Ok(step.q)
    }
}

/// The 26 face, edge and corner directions of a cube, normalised.
pub fn cube_directions() -> Vec<Vec3> {
    let mut dirs = Vec::with_capacity(26);
    for x in -1..=1 {
        for y in -1..=1 {
            for z in -1..=1 {
                if x == 0 && y == 0 && z == 0 {
                    continue;
                }
                dirs.push(Vec3::new(x as f64, y as f64, z as f64).normalize());
            }
        }
    }
    dirs
}

/// True iff IK reaches `point` with the tool axis along at least one of the
/// 26 cube directions.
pub fn in_workspace(model: &ArmModel, point: &Vec3, params: &IkParams) -> bool {
    if (point - model.base.position).norm() > model.total_length() {
        return false;
    }
    cube_directions().iter().any(|d| {
        let target = Pose::new(*point, look_rotation_any(d));
        inverse_kinematics_multi(model, &target, &model.home, params).is_ok()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_is_valid() {
        let m = ArmModel::default();
        m.validate().unwrap();
        assert!((m.total_length() - 0.64).abs() < 1e-12);
    }

    #[test]
    fn distal_link_has_one_right_angle_bend() {
        let m = ArmModel::default();
        let tool = m.distal.tool_pose();
        let link_dir = tool.position.normalize();
        assert!(link_dir.dot(&tool.z_axis()).abs() < 1e-12);
        assert!((m.distal.length - 0.08).abs() < 1e-12);
    }

    #[test]
    fn base_yaw_preserves_tool_height() {
        let m = ArmModel::default();
        let h = m.forward_kinematics(&JointConfig::zeros()).position.z;
        for k in 0..16 {
            let mut q = JointConfig::zeros();
            q.angles[0] = -3.0 + 0.4 * k as f64;
            assert!((m.forward_kinematics(&q).position.z - h).abs() < 1e-12);
        }
    }

    #[test]
    fn ik_fixed_point_returns_seed() {
        let m = ArmModel::default();
        let q = m.home;
        let target = m.forward_kinematics(&q);
        let sol = inverse_kinematics(&m, &target, &q, &IkParams::default()).unwrap();
        assert!(sol.max_abs_diff(&q) < 1e-12);
    }

    #[test]
    fn ik_rejects_far_target() {
        let m = ArmModel::default();
        let target = Pose::new(Vec3::new(m.total_length() + 1.0, 0.0, 0.0), Default::default());
        assert_eq!(
            inverse_kinematics(&m, &target, &m.home, &IkParams::default()),
            Err(KinematicsError::NoSolution)
        );
        assert!(!in_workspace(&m, &target.position, &IkParams::default()));
    }

    #[test]
    fn zero_twist_is_identity_step() {
        let m = ArmModel::default();
        let s = cartesian_velocity_step(&m, &m.home, &Twist::zero(), 1.0 / 30.0, &VelocityLimits::default());
        assert_eq!(s.q, m.home);
    }

    #[test]
    fn pushing_into_a_limit_reports_workspace_limit() {
        let m = ArmModel::default();
        let mut ctl = VelocityController::new(VelocityLimits::default());
        let mut q = m.home;
        // straight up and away from the base: saturates within a couple of seconds
        let twist = Twist::new(Vec3::new(0.1, 0.0, 0.1), Vec3::zeros());
        let mut failed_at = None;
        for k in 0..2000 {
            match ctl.step(&m, &q, &twist, 1.0 / 30.0) {
                Ok(next) => q = next,
                Err(e) => {
                    assert_eq!(e, KinematicsError::WorkspaceLimit);
                    failed_at = Some(k);
                    break;
                }
            }
        }
        assert!(failed_at.is_some());
        assert_eq!(ctl.consecutive_shortfall(), ctl.limits.workspace_patience);
    }

    #[test]
    fn cube_has_26_unit_directions() {
        let d = cube_directions();
        assert_eq!(d.len(), 26);
        assert!(d.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }
}
