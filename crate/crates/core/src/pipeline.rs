//! Trial execution: the collocated reaching state machine and the two
//! comparison pipelines (open-loop base depth, distal depth camera).
//!
//! The world is a mutable copy of the scene. Leaves touched by the arm are
//! pushed aside (removed) and berries swing clear; stems, vines and the
//! ground stop the trial. The planner only knows the berries and the ground.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geometry::{closest_segment_param, point_segment_distance, Disk, Sphere};
use crate::harness::{stream_seed, FailureMode, Stream, Trace};
use crate::kinematics::{ArmModel, JointConfig, VelocityController, VelocityLimits};
use crate::math::{Pose, Twist, Vec3};
use crate::planning::{
    approach_pose, arm_capsules, check_collision, compute_initial_pose, local_search_sequence, plan_motion,
    ApproachCalibration, CandidatePose, ContactObject, PlanFailure, PlannerParams, SearchParams, HOUSING_INDEX,
};
use crate::scene::{FoliageShape, FoliageTag, Scene};
use crate::sensing::{
    detect, measure_depth, select_target, CameraIntrinsics, CameraView, DepthNoiseModel, Detection, DetectorParams,
    LightingCondition,
};
use crate::servoing::{servo_tick, stopping_distance, ServoContext, ServoParams, ServoState, CONTROL_RATE_HZ};

pub const LOG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub base_intrinsics: CameraIntrinsics,
    pub tip_intrinsics: CameraIntrinsics,
    pub detector: DetectorParams,
    pub lighting: LightingCondition,
    /// Base camera range noise.
    pub depth_noise: DepthNoiseModel,
    /// Nominal berry radius used to turn a surface range into a center estimate.
    pub berry_radius_prior: f64,
    pub scan_frames: u32,
    pub tip_check_frames: u32,
    /// A tip detection this close to the image center counts as acquired, px.
    pub acquire_radius_px: f64,
    pub planner: PlannerParams,
    pub search: SearchParams,
    pub initial_offset: f64,
    pub servo: ServoParams,
    pub velocity: VelocityLimits,
    /// Joint speed during planned motions, rad/s.
    pub motion_speed: f64,
    /// Gain holding the tool orientation during servoing, 1/s.
    pub orientation_gain: f64,
    /// Per-tick chance that the moving arm drags a nearby leaf into the line of sight.
    pub leaf_brush_probability: f64,
    /// Leaves within this distance of the camera-to-target segment can be dragged, m.
    pub leaf_brush_tube: f64,
    /// Housings thicker than this catch leaves instead of sliding past them, m.
    pub leaf_snag_radius: f64,
    /// Radius of the terminal capture volume checked for foliage, m.
    pub foreign_object_radius: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            base_intrinsics: CameraIntrinsics::base_default(),
            tip_intrinsics: CameraIntrinsics::tip_default(),
            detector: DetectorParams::default(),
            lighting: LightingCondition::default(),
            depth_noise: DepthNoiseModel::default(),
            berry_radius_prior: 0.015,
            scan_frames: 3,
            tip_check_frames: 2,
            acquire_radius_px: 160.0,
            planner: PlannerParams::default(),
            search: SearchParams::default(),
            initial_offset: 0.12,
            servo: ServoParams::default(),
            velocity: VelocityLimits::default(),
            motion_speed: 1.0,
            orientation_gain: 2.0,
            leaf_brush_probability: 0.002,
            leaf_brush_tube: 0.03,
            leaf_snag_radius: 0.02,
            foreign_object_radius: 0.02,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.base_intrinsics.is_valid() || !self.tip_intrinsics.is_valid() {
            return Err(ConfigError::invalid("camera intrinsics"));
        }
        self.servo
            .validate(&self.tip_intrinsics)
            .map_err(|e| ConfigError::invalid(format!("servo: {e}")))?;
        if !self.detector.lighting_penalty.is_valid() {
            return Err(ConfigError::invalid("lighting penalty knots"));
        }
        if !(self.lighting.multiplier > 0.0) {
            return Err(ConfigError::invalid("lighting multiplier must be positive"));
        }
        if !(self.depth_noise.sigma >= 0.0) || !(0.0..=1.0).contains(&self.depth_noise.dropout) {
            return Err(ConfigError::invalid("depth noise"));
        }
        if !(self.initial_offset >= crate::planning::MIN_STANDOFF) {
            return Err(ConfigError::invalid("initial offset below the gripper length"));
        }
        if !(self.motion_speed > 0.0) || !(self.planner.max_joint_step > 0.0) {
            return Err(ConfigError::invalid("motion speed and joint step must be positive"));
        }
        if self.scan_frames == 0 || self.tip_check_frames == 0 {
            return Err(ConfigError::invalid("scan and tip-check frame counts must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.leaf_brush_probability) {
            return Err(ConfigError::invalid("leaf brush probability"));
        }
        if !(self.berry_radius_prior > 0.0) || !(self.foreign_object_radius > 0.0) {
            return Err(ConfigError::invalid("radii must be positive"));
        }
        Ok(())
    }

    /// Camera-to-berry distance at which the servo loop stops.
    pub fn stop_distance(&self) -> f64 {
        stopping_distance(self.servo.tau, &self.tip_intrinsics, self.berry_radius_prior).unwrap_or(0.035)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DepthOnlyParams {
    pub depth_noise: DepthNoiseModel,
    /// Magnitude of a per-trial calibration bias in a random direction, m.
    pub bias: f64,
    /// Extra isotropic noise on the estimate, per axis, m.
    pub position_sigma: f64,
    /// Gripper-to-berry error below which the open-loop reach counts, m.
    pub capture_radius: f64,
}

impl Default for DepthOnlyParams {
    fn default() -> Self {
        Self {
            depth_noise: DepthNoiseModel { sigma: 0.02, dropout: 0.0 },
            bias: 0.05,
            position_sigma: 0.0,
            capture_radius: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistalDepthParams {
    pub intrinsics: CameraIntrinsics,
    /// Camera offset from the tool axis along tool -y, m.
    pub mount_offset: f64,
    /// Radius of the enlarged camera-and-gripper housing, m.
    pub housing_radius: f64,
    /// Waypoint standoff before the straight insertion, m.
    pub waypoint_offset: f64,
    pub depth_noise: DepthNoiseModel,
}

impl Default for DistalDepthParams {
    fn default() -> Self {
        Self {
            intrinsics: CameraIntrinsics::new(430.0, 848, 480),
            mount_offset: 0.035,
            housing_radius: 0.03,
            waypoint_offset: 0.04,
            depth_noise: DepthNoiseModel::default(),
        }
    }
}

impl DistalDepthParams {
    pub fn mount(&self) -> Pose {
        Pose::new(Vec3::new(0.0, -self.mount_offset, 0.0), Default::default())
    }
}

/// One independent stream per noise source.
pub struct TrialRngs {
    pub base_detect: ChaCha8Rng,
    pub depth: ChaCha8Rng,
    pub estimate: ChaCha8Rng,
    pub tip_detect: ChaCha8Rng,
    pub brush: ChaCha8Rng,
}

impl TrialRngs {
    pub fn from_trial_seed(seed: u64) -> Self {
        let s = |k| ChaCha8Rng::seed_from_u64(stream_seed(seed, k));
        Self {
            base_detect: s(Stream::BaseDetect),
            depth: s(Stream::Depth),
            estimate: s(Stream::Estimate),
            tip_detect: s(Stream::TipDetect),
            brush: s(Stream::Brush),
        }
    }
}

/// One line of a trial's JSONL log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub schema: u32,
    pub tick: u64,
    pub time_s: f64,
    pub state: ServoState,
    #[serde(default)]
    pub event: Option<String>,
    #[serde(default)]
    pub bbox: Option<[f64; 4]>,
    #[serde(default)]
    pub error_px: Option<[f64; 2]>,
    pub twist: [f64; 6],
    pub q: [f64; 6],
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub trace: Trace,
    pub time_s: f64,
    pub ticks: u64,
    pub terminal_error: Option<f64>,
    pub final_q: JointConfig,
    pub final_tool: Pose,
    pub log: Vec<LogRecord>,
}

/// Mutable state of one trial.
struct World<'a> {
    model: &'a ArmModel,
    cfg: &'a PipelineConfig,
    scene: Scene,
    known: Scene,
    target: u32,
    q: JointConfig,
    time: f64,
    ticks: u64,
    state: ServoState,
    trace: Trace,
    log: Vec<LogRecord>,
    planner: PlannerParams,
    housing_radius: f64,
}

enum Move {
    Done,
    Collided,
    Unplannable(PlanFailure),
}

impl<'a> World<'a> {
    fn new(scene: &Scene, model: &'a ArmModel, cfg: &'a PipelineConfig, target: u32) -> Self {
        let mut known = scene.clone();
        known.obstacles.clear();
        Self {
            model,
            cfg,
            scene: scene.clone(),
            known,
            target,
            q: model.home,
            time: 0.0,
            ticks: 0,
            state: ServoState::ScanBase,
            trace: Trace::new(target),
            log: Vec::new(),
            planner: cfg.planner,
            housing_radius: model.distal.housing_radius,
        }
    }

    fn tool(&self) -> Pose {
        self.model.forward_kinematics(&self.q)
    }

    fn record(&mut self, event: Option<String>, det: Option<&Detection>, error: Option<[f64; 2]>, twist: &Twist) {
        self.log.push(LogRecord {
            schema: LOG_SCHEMA_VERSION,
            tick: self.ticks,
            time_s: self.time,
            state: self.state,
            event,
            bbox: det.map(|d| [d.bbox.u_min, d.bbox.v_min, d.bbox.u_max, d.bbox.v_max]),
            error_px: error,
            twist: twist.as_array(),
            q: self.q.angles,
        });
    }

    fn transition(&mut self, next: ServoState) {
        if next != self.state {
            debug_assert!(self.state.can_transition(&next), "{:?} -> {:?}", self.state, next);
            self.state = next;
            let msg = format!("enter {}", next.name());
            self.record(Some(msg), None, None, &Twist::zero());
        }
    }

    fn event(&mut self, msg: String) {
        self.record(Some(msg), None, None, &Twist::zero());
    }

    /// Applies contact at `q`: pushes leaves aside and reports anything solid.
    fn contact(&mut self) -> Option<String> {
        let mut params = self.planner.collision;
        params.margin = 0.0;
        params.self_collision = false;
        let contacts = check_collision(self.model, &self.scene, &self.q, &params);
        let mut pushed = Vec::new();
        let mut nudged = Vec::new();
        for c in contacts {
            match c.object {
                ContactObject::Obstacle(id) => {
                    let Some(o) = self.scene.obstacle(id) else { continue };
                    let snag = c.link == HOUSING_INDEX && self.housing_radius > self.cfg.leaf_snag_radius;
                    if o.is_rigid() || snag {
                        return Some(format!("{} {}", tag_name(o.tag), id));
                    }
                    pushed.push(id);
                }
                ContactObject::Berry(id) => nudged.push((id, c.link, c.clearance)),
                ContactObject::Ground => return Some("ground".into()),
                ContactObject::Link(_) => {}
            }
        }
        if !pushed.is_empty() {
            self.scene.obstacles.retain(|o| !pushed.contains(&o.id));
        }
        if !nudged.is_empty() {
            let caps = arm_capsules(self.model, &self.q, &params);
            for (id, link, clearance) in nudged {
                let cap = caps[link];
                if let Some(b) = self.scene.berries.iter_mut().find(|b| b.id == id) {
                    // berries hang on flexible stalks: push them clear of the link
                    let t = closest_segment_param(&b.center, &cap.p0, &cap.p1);
                    let away = (b.center - (cap.p0 + (cap.p1 - cap.p0) * t)).try_normalize(1e-12);
                    b.center += away.unwrap_or_else(Vec3::z) * (1e-4 - clearance);
                }
            }
        }
        None
    }

    fn collide(&mut self, what: String) {
        self.event(format!("collision {what}"));
        self.trace.collision = Some(what);
    }

    /// Plans to `pose` against the known world and executes the path.
    fn move_to(&mut self, pose: &Pose) -> Move {
        let plan = match plan_motion(self.model, &self.known, &self.q, pose, &self.planner) {
            Ok(p) => p,
            Err(f) => return Move::Unplannable(f),
        };
        let path = plan.trajectory;
        for w in path.windows(2) {
            self.time += w[0].distance(&w[1]) / self.cfg.motion_speed;
            self.q = w[1];
            if let Some(what) = self.contact() {
                self.collide(what);
                return Move::Collided;
            }
        }
        self.event(format!("motion {:.4} rad", plan_length(&path)));
        Move::Done
    }

    /// Frames the base camera until the designated berry shows up, then
    /// turns its depth into a center estimate.
    fn scan_base(&mut self, noise: &DepthNoiseModel, rngs: &mut TrialRngs) -> Option<Vec3> {
        let view = CameraView::new(self.scene.base_camera, self.cfg.base_intrinsics, crate::sensing::CameraRole::Base);
        let dt = 1.0 / CONTROL_RATE_HZ;
        let mut found = None;
        for _ in 0..self.cfg.scan_frames {
            let dets = detect(&self.scene, &view, &self.cfg.lighting, &self.cfg.detector, &mut rngs.base_detect);
            self.time += dt;
            // the operator designates the berry; only its detection is used
            if let Some(d) = dets.iter().find(|d| d.berry_id == Some(self.target)) {
                found = Some(*d);
                break;
            }
        }
        let det = found?;
        self.trace.target_detected = true;
        self.record(Some("base detection".into()), Some(&det), None, &Twist::zero());
        let (u, v) = det.bbox.center();
        let range = measure_depth(&self.scene, &view, (u, v), noise, &mut rngs.depth).ok()?;
        let ray = view.pixel_ray_world(u, v);
        Some(view.pose.position + ray * (range + self.cfg.berry_radius_prior))
    }

    fn tip_view(&self) -> CameraView {
        CameraView::tip(&self.tool(), self.cfg.tip_intrinsics)
    }

    /// Looks for any berry near the tip image center.
    fn tip_acquires(&mut self, rngs: &mut TrialRngs) -> bool {
        let k = self.cfg.tip_intrinsics;
        for _ in 0..self.cfg.tip_check_frames {
            let dets = detect(&self.scene, &self.tip_view(), &self.cfg.lighting, &self.cfg.detector, &mut rngs.tip_detect);
            self.time += 1.0 / CONTROL_RATE_HZ;
            if let Some(d) = select_target(&dets, k.center()) {
                let (u, v) = d.bbox.center();
                if ((u - k.cx).powi(2) + (v - k.cy).powi(2)).sqrt() <= self.cfg.acquire_radius_px {
                    return true;
                }
            }
        }
        false
    }

    fn finish(self, terminal_error: Option<f64>) -> PipelineRun {
        let final_tool = self.tool();
        PipelineRun {
            trace: self.trace,
            time_s: self.time,
            ticks: self.ticks,
            terminal_error,
            final_q: self.q,
            final_tool,
            log: self.log,
        }
    }

    fn fail(mut self, mode: FailureMode) -> PipelineRun {
        self.transition(ServoState::Failed(mode));
        self.finish(None)
    }

    /// Distance from the point a reached berry would occupy to the target.
    fn capture_error(&self) -> f64 {
        let tool = self.tool();
        let c = tool.position + tool.z_axis() * self.cfg.stop_distance();
        self.scene.berry(self.target).map(|b| (b.center - c).norm()).unwrap_or(f64::INFINITY)
    }

    /// Berry sitting between the fingers, nearest first.
    fn contained_berry(&self) -> Option<u32> {
        let tool = self.tool();
        let limit = self.cfg.stop_distance() + 0.005;
        let half = self.model.distal.gripper_half_stroke;
        self.scene
            .berries
            .iter()
            .filter_map(|b| {
                let p = tool.inverse_transform_point(&b.center);
                let lateral = (p.x * p.x + p.y * p.y).sqrt();
                (p.z > 0.0 && p.z <= limit && lateral < half).then_some((p.z, b.id))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, id)| id)
    }

    fn foreign_object(&self) -> Option<u32> {
        let tool = self.tool();
        let s = Sphere::new(tool.position + tool.z_axis() * self.cfg.stop_distance(), self.cfg.foreign_object_radius);
        self.scene
            .obstacles
            .iter()
            .find(|o| o.distance_to_sphere(&s) < 0.0)
            .map(|o| o.id)
    }

    fn mark_reached(&mut self) {
        self.trace.reached = true;
        self.trace.reached_berry = self.contained_berry();
        self.trace.foreign_object = self.foreign_object();
    }

    /// Tries candidates in order until one is reachable and passes `accept`.
    /// Returns `false` after recording the cause when the search runs dry.
    fn search<F>(&mut self, candidates: &[CandidatePose], rngs: &mut TrialRngs, mut accept: F) -> Result<bool, ()>
    where
        F: FnMut(&mut Self, &mut TrialRngs) -> bool,
    {
        let mut executed = 0usize;
        let mut workspace = 0usize;
        for (i, c) in candidates.iter().enumerate() {
            if i > 0 {
                self.transition(ServoState::LocalSearch);
            }
            self.transition(ServoState::MoveToPose);
            match self.move_to(&c.pose) {
                Move::Collided => return Err(()),
                Move::Unplannable(PlanFailure::WorkspaceLimit) => {
                    workspace += 1;
                    continue;
                }
                Move::Unplannable(PlanFailure::CollisionPredicted { .. }) => continue,
                Move::Done => executed += 1,
            }
            if accept(self, rngs) {
                return Ok(true);
            }
        }
        if executed == 0 {
            if workspace == candidates.len() {
                self.trace.workspace_limit = true;
            } else {
                self.trace.planning_failure = true;
            }
        }
        Ok(false)
    }

    /// Drags the nearest leaf near the camera-to-target segment onto it.
    fn brush_leaf(&mut self, rng: &mut ChaCha8Rng) {
        let roll: f64 = rng.random();
        let frac: f64 = rng.random();
        if roll >= self.cfg.leaf_brush_probability {
            return;
        }
        let Some(target) = self.scene.berry(self.target).map(|b| b.center) else { return };
        let a = self.tool().position;
        let tube = self.cfg.leaf_brush_tube;
        let best = self
            .scene
            .obstacles
            .iter()
            .filter_map(|o| match (o.tag, o.shape) {
                (FoliageTag::Leaf, FoliageShape::Disk(d)) => {
                    let dist = point_segment_distance(&d.center, &a, &target);
                    let t = closest_segment_param(&d.center, &a, &target);
                    (dist <= tube && t > 0.0 && t < 1.0).then_some((dist, o.id, d.radius))
                }
                _ => None,
            })
            .min_by(|x, y| x.0.total_cmp(&y.0));
        let Some((_, id, radius)) = best else { return };
        let Some(axis) = (target - a).try_normalize(1e-9) else { return };
        let f = 0.3 + 0.4 * frac;
        let center = a + (target - a) * f;
        if let Some(o) = self.scene.obstacles.iter_mut().find(|o| o.id == id) {
            o.shape = FoliageShape::Disk(Disk::new(center, axis, radius));
        }
        self.event(format!("leaf {id} dragged into view"));
    }

    /// Tool-frame linear command plus orientation hold, as a world twist.
    fn world_twist(&self, linear_tool: &Vec3, reference: &Pose) -> Twist {
        let tool = self.tool();
        let linear = tool.orientation * linear_tool;
        let angular = (reference.orientation * tool.orientation.inverse()).scaled_axis() * self.cfg.orientation_gain;
        Twist::new(linear, angular)
    }
}

fn plan_length(path: &[JointConfig]) -> f64 {
    path.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

fn tag_name(tag: FoliageTag) -> &'static str {
    match tag {
        FoliageTag::Leaf => "leaf",
        FoliageTag::Stem => "stem",
        FoliageTag::Vine => "vine",
    }
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let v = Vec3::new(
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    );
    v.try_normalize(1e-12).unwrap_or_else(Vec3::x)
}

fn gaussian3<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Vec3 {
    let v: [f64; 3] = [
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    ];
    Vec3::new(v[0], v[1], v[2]) * sigma
}

/// Full collocated pipeline: base scan, calibrated initial pose, local
/// search until the tip camera sees a berry, then centering and approach.
pub fn run_state_machine(
    scene: &Scene,
    model: &ArmModel,
    calibration: &ApproachCalibration,
    cfg: &PipelineConfig,
    target: u32,
    rngs: &mut TrialRngs,
) -> PipelineRun {
    let mut w = World::new(scene, model, cfg, target);
    w.record(Some("start".into()), None, None, &Twist::zero());
    let Some(estimate) = w.scan_base(&cfg.depth_noise, rngs) else {
        return w.fail(FailureMode::DetectionFailure);
    };
    w.transition(ServoState::ComputePose);
    let camera = scene.base_camera.position;
    let candidates = match compute_initial_pose(calibration, &camera, &estimate, cfg.initial_offset)
        .and_then(|c| local_search_sequence(&c, &cfg.search))
    {
        Ok(c) => c,
        Err(_) => {
            w.trace.planning_failure = true;
            return w.fail(FailureMode::PlanningFailure);
        }
    };
    let found = w.search(&candidates, rngs, |w, rngs| w.tip_acquires(rngs));
    match found {
        Err(()) => return w.fail(FailureMode::EnvironmentCollision),
        Ok(false) => {
            let mode = if w.trace.workspace_limit {
                FailureMode::WorkspaceLimit
            } else if w.trace.planning_failure {
                FailureMode::PlanningFailure
            } else {
                FailureMode::DetectionFailure
            };
            return w.fail(mode);
        }
        Ok(true) => {}
    }
    servo_loop(w, rngs)
}

fn servo_loop(mut w: World<'_>, rngs: &mut TrialRngs) -> PipelineRun {
    let cfg = w.cfg;
    let params = &cfg.servo;
    let k = cfg.tip_intrinsics;
    let reference = w.tool();
    let mut ctrl = VelocityController::new(cfg.velocity);
    let mut ctx = ServoContext::new(params);
    w.transition(ServoState::Center);
    loop {
        if w.ticks >= params.max_ticks as u64 {
            w.trace.stalled = true;
            w.event("tick budget exhausted".into());
            return w.fail(FailureMode::DetectionFailure);
        }
        w.brush_leaf(&mut rngs.brush);
        let dets = detect(&w.scene, &w.tip_view(), &cfg.lighting, &cfg.detector, &mut rngs.tip_detect);
        let out = servo_tick(&ctx, &dets, &k, params);
        ctx = out.context;
        let twist = w.world_twist(&out.linear, &reference);
        w.ticks += 1;
        w.time += params.dt;
        match ctx.state {
            ServoState::Reached => {
                w.record(None, out.target.as_ref(), out.error, &Twist::zero());
                w.transition(ServoState::Reached);
                w.mark_reached();
                let err = w.capture_error();
                return w.finish(Some(err));
            }
            ServoState::Failed(mode) => {
                w.record(None, out.target.as_ref(), out.error, &Twist::zero());
                if mode == FailureMode::TargetOcclusion {
                    w.trace.occlusion_timeout = true;
                }
                return w.fail(mode);
            }
            s => {
                match ctrl.step(w.model, &w.q, &twist, params.dt) {
                    Ok(q) => w.q = q,
                    Err(_) => {
                        w.record(None, out.target.as_ref(), out.error, &twist);
                        w.trace.workspace_limit = true;
                        return w.fail(FailureMode::WorkspaceLimit);
                    }
                }
                w.transition(s);
                w.record(None, out.target.as_ref(), out.error, &twist);
                if let Some(what) = w.contact() {
                    w.collide(what);
                    return w.fail(FailureMode::EnvironmentCollision);
                }
            }
        }
    }
}

/// Open-loop reach from the base camera estimate: the capture point is sent
/// straight to the estimated center with no tip feedback.
pub fn depth_only_baseline(
    scene: &Scene,
    model: &ArmModel,
    calibration: &ApproachCalibration,
    cfg: &PipelineConfig,
    params: &DepthOnlyParams,
    target: u32,
    rngs: &mut TrialRngs,
) -> PipelineRun {
    let mut w = World::new(scene, model, cfg, target);
    w.record(Some("start".into()), None, None, &Twist::zero());
    let scanned = w.scan_base(&params.depth_noise, rngs);
    let bias = random_unit(&mut rngs.estimate) * params.bias;
    let jitter = gaussian3(&mut rngs.estimate, params.position_sigma);
    let Some(raw) = scanned else {
        return w.fail(FailureMode::DetectionFailure);
    };
    let estimate = raw + bias + jitter;
    w.transition(ServoState::ComputePose);
    let camera = scene.base_camera.position;
    let Ok(c) = approach_pose(calibration, &camera, &estimate, cfg.stop_distance()) else {
        w.trace.planning_failure = true;
        return w.fail(FailureMode::PlanningFailure);
    };
    w.transition(ServoState::MoveToPose);
    match w.move_to(&c.pose) {
        Move::Collided => return w.fail(FailureMode::EnvironmentCollision),
        Move::Unplannable(PlanFailure::WorkspaceLimit) => {
            w.trace.workspace_limit = true;
            return w.fail(FailureMode::WorkspaceLimit);
        }
        Move::Unplannable(_) => {
            w.trace.planning_failure = true;
            return w.fail(FailureMode::PlanningFailure);
        }
        Move::Done => {}
    }
    let err = w.capture_error();
    let tool = w.tool();
    let capture = tool.position + tool.z_axis() * cfg.stop_distance();
    if err < params.capture_radius {
        w.trace.reached = true;
        w.trace.reached_berry = Some(target);
        w.trace.foreign_object = w.foreign_object();
    } else if let Some(b) = scene
        .berries
        .iter()
        .find(|b| b.id != target && (b.center - capture).norm() < params.capture_radius)
    {
        w.trace.reached = true;
        w.trace.reached_berry = Some(b.id);
    }
    let terminal = if w.trace.is_success() {
        ServoState::Reached
    } else {
        ServoState::Failed(crate::harness::classify_failure(&w.trace))
    };
    w.state = terminal;
    w.event(format!("open-loop error {err:.4} m"));
    w.finish(Some(err))
}

/// Comparison pipeline with a depth camera offset on the last link and an
/// enlarged housing: refine the estimate from the distal camera, pass a
/// standoff waypoint, then insert straight along the tool axis.
pub fn distal_depth_baseline(
    scene: &Scene,
    model: &ArmModel,
    calibration: &ApproachCalibration,
    cfg: &PipelineConfig,
    params: &DistalDepthParams,
    target: u32,
    rngs: &mut TrialRngs,
) -> PipelineRun {
    let mut w = World::new(scene, model, cfg, target);
    w.planner.collision.housing_radius = Some(params.housing_radius);
    w.planner.collision.housing_side_offset = params.mount_offset;
    w.housing_radius = params.housing_radius;
    w.record(Some("start".into()), None, None, &Twist::zero());
    let Some(estimate) = w.scan_base(&cfg.depth_noise, rngs) else {
        return w.fail(FailureMode::DetectionFailure);
    };
    w.transition(ServoState::ComputePose);
    let camera = scene.base_camera.position;
    let Ok(candidates) = compute_initial_pose(calibration, &camera, &estimate, cfg.initial_offset)
        .and_then(|c| local_search_sequence(&c, &cfg.search))
    else {
        w.trace.planning_failure = true;
        return w.fail(FailureMode::PlanningFailure);
    };
    let mount = params.mount();
    let mut refined = None;
    let found = w.search(&candidates, rngs, |w, rngs| {
        let view = CameraView::distal_depth(&w.tool(), &mount, params.intrinsics);
        let dets = detect(&w.scene, &view, &cfg.lighting, &cfg.detector, &mut rngs.tip_detect);
        w.time += 1.0 / CONTROL_RATE_HZ;
        let Some(d) = select_target(&dets, params.intrinsics.center()) else { return false };
        let (u, v) = d.bbox.center();
        let Ok(range) = measure_depth(&w.scene, &view, (u, v), &params.depth_noise, &mut rngs.depth) else {
            return false;
        };
        w.record(Some("distal detection".into()), Some(&d), None, &Twist::zero());
        refined = Some(view.pose.position + view.pixel_ray_world(u, v) * (range + cfg.berry_radius_prior));
        true
    });
    match found {
        Err(()) => return w.fail(FailureMode::EnvironmentCollision),
        Ok(false) => {
            let mode = if w.trace.workspace_limit {
                FailureMode::WorkspaceLimit
            } else if w.trace.planning_failure {
                FailureMode::PlanningFailure
            } else {
                FailureMode::DetectionFailure
            };
            return w.fail(mode);
        }
        Ok(true) => {}
    }
    let refined = refined.expect("set on acceptance");
    let Ok(waypoint) = approach_pose(calibration, &camera, &refined, params.waypoint_offset) else {
        w.trace.planning_failure = true;
        return w.fail(FailureMode::PlanningFailure);
    };
    w.transition(ServoState::LocalSearch);
    w.transition(ServoState::MoveToPose);
    match w.move_to(&waypoint.pose) {
        Move::Collided => return w.fail(FailureMode::EnvironmentCollision),
        Move::Unplannable(PlanFailure::WorkspaceLimit) => {
            w.trace.workspace_limit = true;
            return w.fail(FailureMode::WorkspaceLimit);
        }
        Move::Unplannable(_) => {
            w.trace.planning_failure = true;
            return w.fail(FailureMode::PlanningFailure);
        }
        Move::Done => {}
    }
    // straight insertion to the stopping distance
    w.transition(ServoState::Center);
    w.transition(ServoState::Approach);
    let reference = waypoint.pose;
    let goal = refined - reference.z_axis() * cfg.stop_distance();
    let mut ctrl = VelocityController::new(cfg.velocity);
    let speed = cfg.servo.approach_speed;
    let dt = cfg.servo.dt;
    loop {
        let tool = w.tool();
        let remaining = (goal - tool.position).dot(&reference.z_axis());
        if remaining <= 1e-4 {
            break;
        }
        if w.ticks >= cfg.servo.max_ticks as u64 {
            w.trace.stalled = true;
            return w.fail(FailureMode::DetectionFailure);
        }
        let v = (remaining / dt).min(speed);
        let twist = w.world_twist(&Vec3::new(0.0, 0.0, v), &reference);
        w.ticks += 1;
        w.time += dt;
        match ctrl.step(w.model, &w.q, &twist, dt) {
            Ok(q) => w.q = q,
            Err(_) => {
                w.trace.workspace_limit = true;
                return w.fail(FailureMode::WorkspaceLimit);
            }
        }
        w.record(None, None, None, &twist);
        if let Some(what) = w.contact() {
            w.collide(what);
            return w.fail(FailureMode::EnvironmentCollision);
        }
    }
    if w.contained_berry().is_none() {
        w.event("nothing between the fingers".into());
        return w.fail(FailureMode::DetectionFailure);
    }
    w.transition(ServoState::Reached);
    w.mark_reached();
    let err = w.capture_error();
    w.finish(Some(err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{PlacementClass, RigConfig};

    fn lone_berry(at: Vec3) -> (Scene, u32) {
        let mut s = Scene::empty(&RigConfig::default());
        let id = s.push_berry(at, 0.015, PlacementClass::Periphery);
        (s, id)
    }

    fn exact_cfg() -> PipelineConfig {
        PipelineConfig {
            detector: DetectorParams::ideal(),
            depth_noise: DepthNoiseModel::exact(),
            leaf_brush_probability: 0.0,
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn clear_berry_is_reached() {
        let model = ArmModel::default();
        let cal = ApproachCalibration::default_for(&model);
        let (scene, id) = lone_berry(Vec3::new(0.35, 0.0, 0.15));
        let run = run_state_machine(&scene, &model, &cal, &exact_cfg(), id, &mut TrialRngs::from_trial_seed(1));
        assert!(run.trace.is_success(), "{:?}", run.trace);
        assert_eq!(run.trace.reached_berry, Some(id));
        let p = run.final_tool.inverse_transform_point(&scene.berries[0].center);
        assert!((p.x * p.x + p.y * p.y).sqrt() < 0.015);
        assert!(run.time_s > 2.0 && run.time_s < 20.0, "{}", run.time_s);
    }

    #[test]
    fn hidden_berry_never_moves_the_arm() {
        let model = ArmModel::default();
        let cal = ApproachCalibration::default_for(&model);
        let (mut scene, id) = lone_berry(Vec3::new(0.35, 0.0, 0.15));
        let cam = scene.base_camera.position;
        let axis = (scene.berries[0].center - cam).normalize();
        scene.push_obstacle(FoliageShape::Disk(Disk::new(cam + axis * 0.2, axis, 0.08)), FoliageTag::Leaf);
        let run = run_state_machine(&scene, &model, &cal, &exact_cfg(), id, &mut TrialRngs::from_trial_seed(1));
        assert!(!run.trace.target_detected);
        assert_eq!(run.final_q, model.home);
        assert_eq!(crate::harness::classify_failure(&run.trace), FailureMode::DetectionFailure);
    }

    #[test]
    fn open_loop_exact_without_noise() {
        let model = ArmModel::default();
        let cal = ApproachCalibration::default_for(&model);
        let (scene, id) = lone_berry(Vec3::new(0.35, 0.05, 0.12));
        let p = DepthOnlyParams {
            depth_noise: DepthNoiseModel::exact(),
            bias: 0.0,
            ..DepthOnlyParams::default()
        };
        let run = depth_only_baseline(&scene, &model, &cal, &exact_cfg(), &p, id, &mut TrialRngs::from_trial_seed(3));
        assert!(run.terminal_error.unwrap() < 0.003, "{:?}", run.terminal_error);
        assert!(run.trace.is_success());
    }
}
