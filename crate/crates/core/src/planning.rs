//! Initial approach poses, local search around them, and collision-checked
//! joint-space motions.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::PlanningError;
use crate::geometry::{point_segment_distance, segment_segment_distance, Aabb, Capsule, Sphere};
use crate::kinematics::{inverse_kinematics, ArmModel, IkParams, JointConfig};
use crate::math::{axis_angle, look_rotation_any, world_up, Pose, Vec3};
use crate::scene::{FoliageObstacle, Scene};

/// Vertical plane through the camera containing the camera-to-berry vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproachPlane {
    pub origin: Vec3,
    /// Horizontal unit vector from the camera toward the berry.
    pub horizontal: Vec3,
    pub vertical: Vec3,
}

impl ApproachPlane {
    pub fn normal(&self) -> Vec3 {
        self.horizontal.cross(&self.vertical)
    }

    /// Unit direction at `elevation` within the plane.
    pub fn direction(&self, elevation: f64) -> Vec3 {
        self.horizontal * elevation.cos() + self.vertical * elevation.sin()
    }
}

pub fn approach_plane(camera: &Vec3, berry: &Vec3) -> Result<ApproachPlane, PlanningError> {
    let d = berry - camera;
    let h = Vec3::new(d.x, d.y, 0.0);
    let n = h.norm();
    if n < 1e-9 * d.norm().max(1e-12) || n < 1e-12 {
        return Err(PlanningError::DegenerateGeometry);
    }
    Ok(ApproachPlane {
        origin: *camera,
        horizontal: h / n,
        vertical: world_up(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub point: Vec3,
    /// Approach elevation, radians, positive rising toward the berry.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CalibrationData {
    #[serde(default)]
    pivot: Vec3,
    samples: Vec<CalibrationSample>,
}

/// Boundary approach angles, interpolated over a triangulation of the sample
/// points in cylindrical `(horizontal radius, height)` coordinates about a
/// vertical axis through `pivot` (the arm base).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CalibrationData", into = "CalibrationData")]
pub struct ApproachCalibration {
    pivot: Vec3,
    samples: Vec<CalibrationSample>,
    coords: Vec<[f64; 2]>,
    hull: Vec<usize>,
    triangles: Vec<[usize; 3]>,
}

impl TryFrom<CalibrationData> for ApproachCalibration {
    type Error = PlanningError;
    fn try_from(d: CalibrationData) -> Result<Self, Self::Error> {
        ApproachCalibration::new(d.pivot, d.samples)
    }
}

impl From<ApproachCalibration> for CalibrationData {
    fn from(c: ApproachCalibration) -> Self {
        CalibrationData {
            pivot: c.pivot,
            samples: c.samples,
        }
    }
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn barycentric(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 3] {
    let area = cross2(a, b, c);
    let l0 = cross2(p, b, c) / area;
    let l1 = cross2(a, p, c) / area;
    [l0, l1, 1.0 - l0 - l1]
}

/// Convex hull, counter-clockwise, collinear boundary points dropped.
fn convex_hull(pts: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(pts[a][1].total_cmp(&pts[b][1])));
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && cross2(pts[lower[lower.len() - 2]], pts[lower[lower.len() - 1]], pts[i]) <= 0.0 {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && cross2(pts[upper[upper.len() - 2]], pts[upper[upper.len() - 1]], pts[i]) <= 0.0 {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl ApproachCalibration {
    pub fn new(pivot: Vec3, samples: Vec<CalibrationSample>) -> Result<Self, PlanningError> {
        if samples.len() < 3 {
            return Err(PlanningError::InvalidCalibration("need at least three samples"));
        }
        if samples
            .iter()
            .any(|s| !(s.angle.abs() <= core::f64::consts::FRAC_PI_2) || !s.point.iter().all(|v| v.is_finite()))
        {
            return Err(PlanningError::InvalidCalibration("angles must lie in [-pi/2, pi/2]"));
        }
        let coords: Vec<[f64; 2]> = samples.iter().map(|s| Self::coords_of(&pivot, &s.point)).collect();
        for i in 0..coords.len() {
            for j in 0..i {
                if (coords[i][0] - coords[j][0]).abs() < 1e-12 && (coords[i][1] - coords[j][1]).abs() < 1e-12 {
                    return Err(PlanningError::InvalidCalibration("duplicate sample"));
                }
            }
        }
        let hull = convex_hull(&coords);
        if hull.len() < 3 {
            return Err(PlanningError::InvalidCalibration("samples are collinear"));
        }
        let mut triangles: Vec<[usize; 3]> = (1..hull.len() - 1).map(|k| [hull[0], hull[k], hull[k + 1]]).collect();
        for i in 0..coords.len() {
            if hull.contains(&i) {
                continue;
            }
            insert_point(&coords, &mut triangles, i)?;
        }
        Ok(Self {
            pivot,
            samples,
            coords,
            hull,
            triangles,
        })
    }

    /// Default boundary calibration: 16 points on an ellipse in the
    /// radius/height plane, each aimed along the shoulder-to-point elevation
    /// clamped to ±45°.
    pub fn default_for(model: &ArmModel) -> Self {
        let shoulder = model.frames(&JointConfig::zeros())[1].position.z;
        let pivot = model.base.position;
        let (rc, zc, ra, za) = (0.26, 0.14, 0.17, 0.20);
        let samples = (0..16)
            .map(|k| {
                let t = core::f64::consts::TAU * k as f64 / 16.0;
                let rho = rc + ra * t.cos();
                let z = zc + za * t.sin();
                let limit = core::f64::consts::FRAC_PI_4;
                CalibrationSample {
                    point: pivot + Vec3::new(rho, 0.0, z),
                    angle: (z - shoulder).atan2(rho).clamp(-limit, limit),
                }
            })
            .collect();
        Self::new(pivot, samples).expect("default calibration is well formed")
    }

    pub fn samples(&self) -> &[CalibrationSample] {
        &self.samples
    }

    pub fn pivot(&self) -> Vec3 {
        self.pivot
    }

    /// Triangles over sample indices.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Hull vertices over sample indices, counter-clockwise.
    pub fn hull(&self) -> &[usize] {
        &self.hull
    }

    /// `(horizontal radius, height)` of a world point about the pivot axis.
    pub fn coords_of(pivot: &Vec3, p: &Vec3) -> [f64; 2] {
        let d = p - pivot;
        [(d.x * d.x + d.y * d.y).sqrt(), d.z]
    }

    fn interpolate_2d(&self, p: [f64; 2]) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None;
        for t in &self.triangles {
            let l = barycentric(p, self.coords[t[0]], self.coords[t[1]], self.coords[t[2]]);
            let worst = l[0].min(l[1]).min(l[2]);
            let value = l[0] * self.samples[t[0]].angle + l[1] * self.samples[t[1]].angle + l[2] * self.samples[t[2]].angle;
            if worst >= 0.0 {
                return Some(value);
            }
            if worst > -1e-10 && best.is_none_or(|b| worst > b.0) {
                best = Some((worst, value));
            }
        }
        best.map(|b| b.1)
    }

    /// Nearest point of the hull (boundary included) to `p`.
    fn clamp_to_hull(&self, p: [f64; 2]) -> [f64; 2] {
        let mut best = p;
        let mut best_d = f64::INFINITY;
        let n = self.hull.len();
        for k in 0..n {
            let a = self.coords[self.hull[k]];
            let b = self.coords[self.hull[(k + 1) % n]];
            let ab = [b[0] - a[0], b[1] - a[1]];
            let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1])).clamp(0.0, 1.0);
            let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
            let d = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }

    /// Elevation at a query, clamping to the nearest hull point outside the
    /// hull. The flag reports whether clamping happened.
    pub fn angle_clamped(&self, berry: &Vec3) -> (f64, bool) {
        let p = Self::coords_of(&self.pivot, berry);
        match self.interpolate_2d(p) {
            Some(a) => (a, false),
            None => {
                let q = self.clamp_to_hull(p);
                let a = self
                    .interpolate_2d(q)
                    .unwrap_or_else(|| self.nearest_sample_angle(q));
                (a, true)
            }
        }
    }

    fn nearest_sample_angle(&self, p: [f64; 2]) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for (c, s) in self.coords.iter().zip(&self.samples) {
            let d = (c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2);
            if d < best.0 {
                best = (d, s.angle);
            }
        }
        best.1
    }
}

fn insert_point(coords: &[[f64; 2]], tris: &mut Vec<[usize; 3]>, i: usize) -> Result<(), PlanningError> {
    let p = coords[i];
    let eps = 1e-12;
    let Some((k, l)) = tris.iter().enumerate().find_map(|(k, t)| {
        let l = barycentric(p, coords[t[0]], coords[t[1]], coords[t[2]]);
        (l.iter().all(|&x| x >= -eps)).then_some((k, l))
    }) else {
        return Err(PlanningError::InvalidCalibration("interior point outside hull"));
    };
    let t = tris[k];
    let on_edge = (0..3).find(|&e| l[e].abs() <= eps);
    match on_edge {
        None => {
            tris.swap_remove(k);
            tris.push([t[0], t[1], i]);
            tris.push([t[1], t[2], i]);
            tris.push([t[2], t[0], i]);
        }
        Some(e) => {
            // the point sits on the edge opposite vertex e; split both sides
            let (a, b) = (t[(e + 1) % 3], t[(e + 2) % 3]);
            let opp = t[e];
            tris.swap_remove(k);
            tris.push([opp, a, i]);
            tris.push([b, opp, i]);
            if let Some(k2) = tris.iter().position(|u| u.contains(&a) && u.contains(&b) && !u.contains(&i)) {
                let u = tris.swap_remove(k2);
                let other = *u.iter().find(|&&v| v != a && v != b).expect("triangle has three vertices");
                tris.push([other, a, i]);
                tris.push([b, other, i]);
            }
        }
    }
    Ok(())
}

/// Elevation by barycentric interpolation; `OutOfHull` outside the samples' hull.
pub fn interpolate_approach_angle(cal: &ApproachCalibration, berry: &Vec3) -> Result<f64, PlanningError> {
    let p = ApproachCalibration::coords_of(&cal.pivot, berry);
    cal.interpolate_2d(p).ok_or(PlanningError::OutOfHull)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStep {
    /// Offset level, 0 for the initial offset.
    pub level: u32,
    /// Signed yaw steps about the vertical through the tool point.
    pub yaw: i32,
    /// Signed pitch steps within the approach plane; positive tilts up.
    pub pitch: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidatePose {
    pub pose: Pose,
    /// Standoff along the approach line, meters.
    pub offset: f64,
    /// Position in the local-search order; 0 for the initial pose.
    pub search_index: usize,
    pub step: SearchStep,
    /// True when the elevation came from the hull boundary instead of the query.
    pub clamped: bool,
}

impl CandidatePose {
    /// Point the pose aims at: `offset` along the tool axis.
    pub fn aim_point(&self) -> Vec3 {
        self.pose.position + self.pose.z_axis() * self.offset
    }
}

/// Pose `offset` behind `berry` on the calibrated approach line, tool axis
/// aimed at the berry. No lower bound on the offset.
pub fn approach_pose(
    cal: &ApproachCalibration,
    camera: &Vec3,
    berry: &Vec3,
    offset: f64,
) -> Result<CandidatePose, PlanningError> {
    let plane = approach_plane(camera, berry)?;
    let (elevation, clamped) = cal.angle_clamped(berry);
    let dir = plane.direction(elevation);
    Ok(CandidatePose {
        pose: Pose::new(berry - dir * offset, look_rotation_any(&dir)),
        offset,
        search_index: 0,
        step: SearchStep { level: 0, yaw: 0, pitch: 0 },
        clamped,
    })
}

/// Smallest allowed standoff: the gripper length.
pub const MIN_STANDOFF: f64 = 0.04;

pub fn compute_initial_pose(
    cal: &ApproachCalibration,
    camera: &Vec3,
    berry: &Vec3,
    offset: f64,
) -> Result<CandidatePose, PlanningError> {
    if !(offset >= MIN_STANDOFF - 1e-12) {
        return Err(PlanningError::OffsetTooSmall);
    }
    approach_pose(cal, camera, berry, offset)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchParams {
    pub yaw_step: f64,
    pub pitch_step: f64,
    pub steps_per_side: u32,
    pub offset_increment: f64,
    pub max_offset: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            yaw_step: 15f64.to_radians(),
            pitch_step: 15f64.to_radians(),
            steps_per_side: 1,
            offset_increment: 0.04,
            max_offset: 0.20,
        }
    }
}

/// Candidates in search order: for each offset level, the aimed pose, then
/// yaw steps (negative first) and pitch steps (negative first) about the
/// tool point.
pub fn local_search_sequence(initial: &CandidatePose, params: &SearchParams) -> Result<Vec<CandidatePose>, PlanningError> {
    if !(params.yaw_step > 0.0 && params.pitch_step > 0.0) {
        return Err(PlanningError::InvalidSearch("rotation steps must be positive"));
    }
    if !(params.offset_increment > 0.0) {
        return Err(PlanningError::InvalidSearch("offset increment must be positive"));
    }
    let aim = initial.aim_point();
    let dir = initial.pose.z_axis();
    let horizontal = Vec3::new(dir.x, dir.y, 0.0);
    let normal = match horizontal.try_normalize(1e-9) {
        Some(h) => h.cross(&world_up()),
        None => initial.pose.x_axis(),
    };
    let mut out = Vec::new();
    let mut level = 0u32;
    loop {
        let offset = initial.offset + params.offset_increment * level as f64;
        if level > 0 && offset > params.max_offset + 1e-12 {
            break;
        }
        let base = Pose::new(aim - dir * offset, initial.pose.orientation);
        let mut push = |yaw: i32, pitch: i32, orientation| {
            out.push(CandidatePose {
                pose: Pose::new(base.position, orientation),
                offset,
                search_index: out.len(),
                step: SearchStep { level, yaw, pitch },
                clamped: initial.clamped,
            });
        };
        push(0, 0, base.orientation);
        let s = params.steps_per_side as i32;
        for k in 1..=s {
            for sign in [-1, 1] {
                let r = axis_angle(&world_up(), (sign * k) as f64 * params.yaw_step);
                push(sign * k, 0, r * base.orientation);
            }
        }
        for k in 1..=s {
            for sign in [-1, 1] {
                let r = axis_angle(&normal, (sign * k) as f64 * params.pitch_step);
                push(0, sign * k, r * base.orientation);
            }
        }
        level += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum ContactObject {
    Obstacle(u32),
    Berry(u32),
    /// Another arm capsule (self-collision).
    Link(usize),
    Ground,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    /// Index into the arm's capsule list.
    pub link: usize,
    pub object: ContactObject,
    /// Surface separation, meters; negative when penetrating.
    pub clearance: f64,
}

impl Contact {
    pub fn penetration(&self) -> f64 {
        (-self.clearance).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CollisionParams {
    pub margin: f64,
    /// Berries whose center lies within this distance of the gripper capture
    /// point are ignored; the gripper has to envelop them.
    pub berry_exclusion_radius: f64,
    pub self_collision: bool,
    pub ground_z: Option<f64>,
    /// End-effector housing; `None` takes the arm model's own.
    pub housing_radius: Option<f64>,
    /// Sideways housing offset along tool -y, meters.
    pub housing_side_offset: f64,
}

impl Default for CollisionParams {
    fn default() -> Self {
        Self {
            margin: 0.005,
            berry_exclusion_radius: 0.03,
            self_collision: true,
            ground_z: Some(-0.30),
            housing_radius: None,
            housing_side_offset: 0.0,
        }
    }
}

/// Arm capsules in order: six links, the distal segment, the housing.
pub fn arm_capsules(model: &ArmModel, q: &JointConfig, params: &CollisionParams) -> Vec<Capsule> {
    let r = params.housing_radius.unwrap_or(model.distal.housing_radius);
    model.capsules_with_housing(q, r, params.housing_side_offset)
}

/// Capsule pairs at least this far apart in the chain are checked for self-contact.
pub const SELF_PAIR_GAP: usize = 3;

/// Index of the housing capsule in [`arm_capsules`].
pub const HOUSING_INDEX: usize = 7;

pub fn capture_point(model: &ArmModel, tool: &Pose) -> Vec3 {
    tool.position + tool.z_axis() * model.distal.gripper_length
}

fn obstacle_clearance(o: &FoliageObstacle, cap: &Capsule) -> f64 {
    o.distance_to_capsule(cap)
}

pub fn check_collision(model: &ArmModel, scene: &Scene, q: &JointConfig, params: &CollisionParams) -> Vec<Contact> {
    let caps = arm_capsules(model, q, params);
    let tool = model.forward_kinematics(q);
    let capture = capture_point(model, &tool);
    let mut out = Vec::new();
    let boxes: Vec<Aabb> = caps.iter().map(|c| c.aabb()).collect();
    for (i, cap) in caps.iter().enumerate() {
        for o in &scene.obstacles {
            if !boxes[i].overlaps(&o.aabb(), params.margin) {
                continue;
            }
            let c = obstacle_clearance(o, cap);
            if c < params.margin {
                out.push(Contact {
                    link: i,
                    object: ContactObject::Obstacle(o.id),
                    clearance: c,
                });
            }
        }
        for b in &scene.berries {
            if (b.center - capture).norm() <= params.berry_exclusion_radius {
                continue;
            }
            let s = Sphere::new(b.center, b.radius);
            if !boxes[i].overlaps(&s.aabb(), params.margin) {
                continue;
            }
            let c = point_segment_distance(&b.center, &cap.p0, &cap.p1) - cap.radius - b.radius;
            if c < params.margin {
                out.push(Contact {
                    link: i,
                    object: ContactObject::Berry(b.id),
                    clearance: c,
                });
            }
        }
        if let Some(g) = params.ground_z {
            let c = cap.p0.z.min(cap.p1.z) - cap.radius - g;
            if c < params.margin {
                out.push(Contact {
                    link: i,
                    object: ContactObject::Ground,
                    clearance: c,
                });
            }
        }
        if params.self_collision {
            for j in (i + SELF_PAIR_GAP)..caps.len() {
                let other = &caps[j];
                let c = segment_segment_distance(&cap.p0, &cap.p1, &other.p0, &other.p1) - cap.radius - other.radius;
                if c < 0.0 {
                    out.push(Contact {
                        link: i,
                        object: ContactObject::Link(j),
                        clearance: c,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerParams {
    pub ik: IkParams,
    /// Largest per-joint change between consecutive waypoints, radians.
    pub max_joint_step: f64,
    pub collision: CollisionParams,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            ik: IkParams::default(),
            max_joint_step: 0.02,
            collision: CollisionParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub trajectory: Vec<JointConfig>,
    pub collision_checked: bool,
}

impl PlanResult {
    pub fn goal(&self) -> JointConfig {
        *self.trajectory.last().expect("trajectory is never empty")
    }

    /// Euclidean joint-space path length, radians.
    pub fn path_length(&self) -> f64 {
        self.trajectory.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum PlanFailure {
    WorkspaceLimit,
    CollisionPredicted { waypoint: usize, contact: Contact },
}

/// Joint-space path from `q_start` to an IK solution for `target`, with
/// every waypoint collision-checked. Tries each IK branch straight, then via
/// a base-yaw-first waypoint; the first clear path wins.
pub fn plan_motion(
    model: &ArmModel,
    scene: &Scene,
    q_start: &JointConfig,
    target: &Pose,
    params: &PlannerParams,
) -> Result<PlanResult, PlanFailure> {
    let mut goals: Vec<JointConfig> = Vec::new();
    if (target.position - model.base.position).norm() <= model.total_length() {
        for seed in model.ik_seeds(target, q_start) {
            if let Ok(g) = inverse_kinematics(model, target, &seed, &params.ik) {
                if goals.iter().all(|h| h.max_abs_diff(&g) > 1e-3) {
                    goals.push(g);
                }
            }
        }
    }
    if goals.is_empty() {
        return Err(PlanFailure::WorkspaceLimit);
    }
    let mut first_failure = None;
    for goal in &goals {
        let mut via = *q_start;
        via.angles[0] = goal.angles[0];
        let routes: [&[JointConfig]; 2] = [&[*goal], &[via, *goal]];
        for route in routes {
            match checked_path(model, scene, q_start, route, params) {
                Ok(trajectory) => {
                    return Ok(PlanResult {
                        trajectory,
                        collision_checked: true,
                    })
                }
                Err(f) => {
                    first_failure.get_or_insert(f);
                }
            }
        }
    }
    Err(first_failure.expect("at least one route was tried"))
}

fn checked_path(
    model: &ArmModel,
    scene: &Scene,
    q_start: &JointConfig,
    route: &[JointConfig],
    params: &PlannerParams,
) -> Result<Vec<JointConfig>, PlanFailure> {
    let mut trajectory = alloc::vec![*q_start];
    let mut from = *q_start;
    for to in route {
        let leg = interpolate_joints(&from, to, params.max_joint_step);
        trajectory.extend_from_slice(&leg[1..]);
        from = *to;
    }
    for (k, q) in trajectory.iter().enumerate() {
        if let Some(contact) = check_collision(model, scene, q, &params.collision).first() {
            return Err(PlanFailure::CollisionPredicted { waypoint: k, contact: *contact });
        }
    }
    Ok(trajectory)
}

/// Waypoints from `a` to `b` inclusive, no joint moving more than `max_step` per segment.
pub fn interpolate_joints(a: &JointConfig, b: &JointConfig, max_step: f64) -> Vec<JointConfig> {
    let span = a.max_abs_diff(b);
    let n = if span <= 1e-12 { 0 } else { (span / max_step).ceil() as usize };
    if n == 0 {
        return alloc::vec![*a];
    }
    (0..=n).map(|k| a.lerp(b, k as f64 / n as f64)).collect()
}
