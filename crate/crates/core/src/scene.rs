//! Synthetic plant worlds: berries (spheres), leaves (disks) and stems or
//! vines (capsules), plus the robot rig they are seen from.
//!
//! World frame is right-handed and z-up with the arm base at the origin. The
//! base camera sits behind the arm base and looks along +x toward the plant.
//! Every generator is a pure function of `(config, seed)`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geometry::{
    point_segment_distance, segment_disk_distance, segment_segment_distance, Aabb, Capsule, Disk,
    Ray, Sphere,
};
use crate::math::{look_rotation, world_up, Pose, Vec3};

const MAX_ATTEMPTS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementClass {
    Periphery,
    UnderCanopy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Berry {
    pub id: u32,
    pub center: Vec3,
    pub radius: f64,
    pub class: PlacementClass,
}

impl Berry {
    pub fn sphere(&self) -> Sphere {
        Sphere::new(self.center, self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoliageTag {
    Leaf,
    Stem,
    Vine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FoliageShape {
    Disk(Disk),
    Capsule(Capsule),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoliageObstacle {
    pub id: u32,
    pub shape: FoliageShape,
    pub tag: FoliageTag,
}

impl FoliageObstacle {
    /// Leaves yield when brushed; stems and vines do not.
    pub fn is_rigid(&self) -> bool {
        !matches!(self.tag, FoliageTag::Leaf)
    }

    pub fn ray_hit(&self, ray: &Ray) -> Option<f64> {
        match &self.shape {
            FoliageShape::Disk(d) => d.ray_hit(ray),
            FoliageShape::Capsule(c) => c.ray_hit(ray),
        }
    }

    pub fn aabb(&self) -> Aabb {
        match &self.shape {
            FoliageShape::Disk(d) => d.aabb(),
            FoliageShape::Capsule(c) => c.aabb(),
        }
    }

    /// Distance from a capsule (segment plus radius) to this obstacle's surface.
    pub fn distance_to_capsule(&self, cap: &Capsule) -> f64 {
        match &self.shape {
            FoliageShape::Disk(d) => segment_disk_distance(&cap.p0, &cap.p1, d) - cap.radius,
            FoliageShape::Capsule(c) => {
                segment_segment_distance(&cap.p0, &cap.p1, &c.p0, &c.p1) - cap.radius - c.radius
            }
        }
    }

    pub fn distance_to_sphere(&self, s: &Sphere) -> f64 {
        match &self.shape {
            FoliageShape::Disk(d) => d.distance_to_point(&s.center) - s.radius,
            FoliageShape::Capsule(c) => {
                point_segment_distance(&s.center, &c.p0, &c.p1) - c.radius - s.radius
            }
        }
    }

    pub fn is_valid(&self) -> bool {
        match &self.shape {
            FoliageShape::Disk(d) => {
                d.radius > 0.0 && (d.normal.norm() - 1.0).abs() < 1e-9 && d.center.iter().all(|v| v.is_finite())
            }
            FoliageShape::Capsule(c) => {
                c.radius > 0.0 && (c.p1 - c.p0).norm() > 0.0 && c.p0.iter().chain(c.p1.iter()).all(|v| v.is_finite())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneKind {
    Lab,
    HangingVine,
    HighTunnel,
    Custom,
}

/// Identifies what a ray or contact touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum ObjectId {
    Berry(u32),
    Obstacle(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub object: ObjectId,
    pub distance: f64,
}

/// Mounting of the arm and the pan-tilt base camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigConfig {
    pub arm_base: Vec3,
    pub camera_position: Vec3,
    /// Pan of the base camera about world z, radians (0 looks along +x).
    pub camera_pan: f64,
    /// Tilt, radians, positive looks up.
    pub camera_tilt: f64,
}

impl Default for RigConfig {
    fn default() -> Self {
        Self {
            arm_base: Vec3::zeros(),
            camera_position: Vec3::new(-0.10, 0.0, 0.15),
            camera_pan: 0.0,
            camera_tilt: 0.0,
        }
    }
}

impl RigConfig {
    pub fn camera_pose(&self) -> Pose {
        let forward = Vec3::new(
            self.camera_tilt.cos() * self.camera_pan.cos(),
            self.camera_tilt.cos() * self.camera_pan.sin(),
            self.camera_tilt.sin(),
        );
        Pose::new(
            self.camera_position,
            look_rotation(&forward, &world_up()).expect("camera tilt must not be vertical"),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub kind: SceneKind,
    pub seed: u64,
    pub arm_base: Pose,
    pub base_camera: Pose,
    /// Corridor width between row faces, meters (high tunnel only).
    #[serde(default)]
    pub corridor_width: Option<f64>,
    /// World x of the working row face, meters (high tunnel only).
    #[serde(default)]
    pub row_face_x: Option<f64>,
    #[serde(default)]
    pub outer_foliage_removed: bool,
    pub berries: Vec<Berry>,
    pub obstacles: Vec<FoliageObstacle>,
}

impl Scene {
    pub fn empty(rig: &RigConfig) -> Self {
        Self {
            kind: SceneKind::Custom,
            seed: 0,
            arm_base: Pose::new(rig.arm_base, Default::default()),
            base_camera: rig.camera_pose(),
            corridor_width: None,
            row_face_x: None,
            outer_foliage_removed: false,
            berries: Vec::new(),
            obstacles: Vec::new(),
        }
    }

    pub fn berry(&self, id: u32) -> Option<&Berry> {
        self.berries.iter().find(|b| b.id == id)
    }

    pub fn obstacle(&self, id: u32) -> Option<&FoliageObstacle> {
        self.obstacles.iter().find(|o| o.id == id)
    }

    pub fn count_class(&self, class: PlacementClass) -> usize {
        self.berries.iter().filter(|b| b.class == class).count()
    }

    /// Adds an obstacle with the next free id and returns that id.
    pub fn push_obstacle(&mut self, shape: FoliageShape, tag: FoliageTag) -> u32 {
        let id = self.obstacles.iter().map(|o| o.id + 1).max().unwrap_or(0);
        self.obstacles.push(FoliageObstacle { id, shape, tag });
        id
    }

    pub fn push_berry(&mut self, center: Vec3, radius: f64, class: PlacementClass) -> u32 {
        let id = self.berries.iter().map(|b| b.id + 1).max().unwrap_or(0);
        self.berries.push(Berry {
            id,
            center,
            radius,
            class,
        });
        id
    }

    pub fn is_finite(&self) -> bool {
        self.berries
            .iter()
            .all(|b| b.radius > 0.0 && b.center.iter().all(|v| v.is_finite()))
            && self.obstacles.iter().all(|o| o.is_valid())
    }
}

/// Nearest positive-distance hit along a unit-direction ray.
pub fn ray_intersect(scene: &Scene, origin: &Vec3, direction: &Vec3) -> Option<RayHit> {
    ray_intersect_excluding(scene, origin, direction, None)
}

/// As [`ray_intersect`], ignoring one object.
pub fn ray_intersect_excluding(
    scene: &Scene,
    origin: &Vec3,
    direction: &Vec3,
    exclude: Option<ObjectId>,
) -> Option<RayHit> {
    let ray = Ray::new(*origin, *direction);
    let inv = Vec3::new(1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z);
    let mut best: Option<RayHit> = None;
    fn consider(best: &mut Option<RayHit>, object: ObjectId, t: Option<f64>) {
        if let Some(t) = t {
            if best.is_none_or(|b| t < b.distance) {
                *best = Some(RayHit { object, distance: t });
            }
        }
    }
    for b in &scene.berries {
        let id = ObjectId::Berry(b.id);
        if Some(id) == exclude {
            continue;
        }
        consider(&mut best, id, b.sphere().ray_hit(&ray));
    }
    for o in &scene.obstacles {
        let id = ObjectId::Obstacle(o.id);
        if Some(id) == exclude {
            continue;
        }
        match (slab_entry(&o.aabb(), origin, &inv), best) {
            (None, _) => continue,
            (Some(t), Some(b)) if t > b.distance => continue,
            _ => {}
        }
        consider(&mut best, id, o.ray_hit(&ray));
    }
    best
}

/// Entry distance of a ray into a box, `None` if it misses.
fn slab_entry(b: &Aabb, origin: &Vec3, inv: &Vec3) -> Option<f64> {
    let mut t_min = f64::NEG_INFINITY;
    let mut t_max = f64::INFINITY;
    for i in 0..3 {
        let (lo, hi) = if inv[i].is_finite() {
            let t0 = (b.min[i] - origin[i]) * inv[i];
            let t1 = (b.max[i] - origin[i]) * inv[i];
            (t0.min(t1), t0.max(t1))
        } else if origin[i] >= b.min[i] && origin[i] <= b.max[i] {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            return None;
        };
        t_min = t_min.max(lo);
        t_max = t_max.min(hi);
    }
    // small pad absorbs rounding on boxes that are flat along one axis
    if t_max + 1e-9 < t_min.max(0.0) {
        None
    } else {
        Some(t_min.max(0.0) - 1e-9)
    }
}

/// Parameters shared by every plant generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantConfig {
    pub berry_count: usize,
    pub periphery_fraction: f64,
    pub berry_radius: f64,
    /// Horizontal distance band from the base camera, meters.
    pub radial_band: (f64, f64),
    /// World z band for berry centers, meters.
    pub height_band: (f64, f64),
    /// Half-width of the azimuth window around the camera heading, radians.
    pub azimuth_half_width: f64,
    pub min_berry_separation: f64,
    pub leaf_radius: f64,
    pub stem_radius: f64,
    /// Shroud leaves per under-canopy berry, inclusive range.
    pub shroud_leaves: (usize, usize),
    /// Distance in front of the berry within which shroud leaves sit, meters.
    pub shroud_distance: (f64, f64),
    /// Probability that a shroud leaf is pushed aside far enough to leave a gap.
    pub shroud_gap_probability: f64,
    /// Extra canopy leaves scattered around the plant.
    pub canopy_leaves: usize,
    /// Lateral branches off the main stem.
    pub branches: usize,
    pub rig: RigConfig,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            berry_count: 5,
            periphery_fraction: 0.6,
            berry_radius: 0.015,
            radial_band: (0.30, 0.45),
            height_band: (0.04, 0.26),
            azimuth_half_width: 0.45,
            min_berry_separation: 0.045,
            leaf_radius: 0.04,
            stem_radius: 0.005,
            shroud_leaves: (2, 5),
            shroud_distance: (0.03, 0.09),
            shroud_gap_probability: 0.8,
            canopy_leaves: 14,
            branches: 6,
            rig: RigConfig::default(),
        }
    }
}

impl PlantConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.berry_count == 0 {
            return Err(ConfigError::invalid("berry_count must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.periphery_fraction) {
            return Err(ConfigError::invalid(format!(
                "periphery_fraction {} outside [0, 1]",
                self.periphery_fraction
            )));
        }
        if !(self.radial_band.0 > 0.0 && self.radial_band.1 > self.radial_band.0) {
            return Err(ConfigError::invalid("radial_band must be a non-empty positive interval"));
        }
        if !(self.height_band.1 > self.height_band.0) {
            return Err(ConfigError::invalid("height_band must be a non-empty interval"));
        }
        if !(self.berry_radius > 0.0 && self.leaf_radius > 0.0 && self.stem_radius > 0.0) {
            return Err(ConfigError::invalid("radii must be positive"));
        }
        if self.shroud_leaves.0 > self.shroud_leaves.1 || self.shroud_leaves.0 == 0 {
            return Err(ConfigError::invalid("shroud_leaves must be a range starting at 1 or more"));
        }
        if !(self.shroud_distance.0 > self.berry_radius && self.shroud_distance.1 > self.shroud_distance.0) {
            return Err(ConfigError::invalid("shroud_distance must clear the berry and be non-empty"));
        }
        if !(0.0..=1.0).contains(&self.shroud_gap_probability) {
            return Err(ConfigError::invalid("shroud_gap_probability outside [0, 1]"));
        }
        Ok(())
    }

    /// Periphery count: `round(n * p)`, halves rounding toward the periphery.
    pub fn periphery_count(&self) -> usize {
        let exact = self.berry_count as f64 * self.periphery_fraction;
        ((exact + 0.5 + 1e-9).floor() as usize).min(self.berry_count)
    }

    fn classes(&self) -> Vec<PlacementClass> {
        let p = self.periphery_count();
        (0..self.berry_count)
            .map(|i| {
                if i < p {
                    PlacementClass::Periphery
                } else {
                    PlacementClass::UnderCanopy
                }
            })
            .collect()
    }

    fn camera_xy(&self) -> Vec3 {
        Vec3::new(self.rig.camera_position.x, self.rig.camera_position.y, 0.0)
    }

    fn horizontal_distance(&self, p: &Vec3) -> f64 {
        let c = self.camera_xy();
        ((p.x - c.x).powi(2) + (p.y - c.y).powi(2)).sqrt()
    }

    fn in_bands(&self, p: &Vec3) -> bool {
        let d = self.horizontal_distance(p);
        d >= self.radial_band.0 - 1e-12
            && d <= self.radial_band.1 + 1e-12
            && p.z >= self.height_band.0
            && p.z <= self.height_band.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabSceneConfig {
    pub plant: PlantConfig,
    /// Horizontal distance of the main stem from the base camera, meters.
    pub stem_distance: f64,
}

impl Default for LabSceneConfig {
    fn default() -> Self {
        Self {
            plant: PlantConfig::default(),
            stem_distance: 0.52,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VineSceneConfig {
    pub plant: PlantConfig,
    pub vine_count: usize,
    pub segments_per_vine: usize,
    /// Height of the bar the vines hang from, meters.
    pub top_height: f64,
    pub bottom_height: f64,
    /// Maximum distance from a berry center to its vine axis, meters.
    pub attach_distance: f64,
    pub vine_radius: f64,
    pub leaves_per_vine: usize,
    /// Lateral wander of each vine joint, meters.
    pub sway: f64,
}

impl Default for VineSceneConfig {
    fn default() -> Self {
        let plant = PlantConfig {
            canopy_leaves: 0,
            branches: 0,
            ..PlantConfig::default()
        };
        Self {
            plant,
            vine_count: 4,
            segments_per_vine: 5,
            top_height: 0.40,
            bottom_height: -0.10,
            attach_distance: 0.03,
            vine_radius: 0.005,
            leaves_per_vine: 2,
            sway: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TunnelSceneConfig {
    pub plant: PlantConfig,
    /// Row center-line spacing equal to the corridor width between row faces, meters.
    pub row_spacing: f64,
    /// Horizontal distance from the base camera to the working row face the
    /// robot drives to, meters. In a corridor too narrow for it the robot
    /// stays on the center line.
    pub face_standoff: f64,
    pub allow_spacing_override: bool,
    pub outer_foliage_removed: bool,
    /// Depth of the canopy behind each row face, meters.
    pub row_depth: f64,
    /// How far berries may hang out of the row face into the corridor, meters.
    pub hang_out: f64,
    /// Leaves per row when foliage is not thinned.
    pub row_leaves: usize,
    /// Fraction of row leaves kept when outer foliage is removed.
    pub thinned_fraction: f64,
}

impl Default for TunnelSceneConfig {
    fn default() -> Self {
        let plant = PlantConfig {
            radial_band: (0.30, 0.50),
            ..PlantConfig::default()
        };
        Self {
            plant,
            row_spacing: 1.0,
            face_standoff: 0.43,
            allow_spacing_override: false,
            outer_foliage_removed: true,
            row_depth: 0.30,
            hang_out: 0.15,
            row_leaves: 24,
            thinned_fraction: 0.5,
        }
    }
}

pub const ROW_SPACING_BAND: (f64, f64) = (0.91, 1.22);

struct Builder<'a> {
    cfg: &'a PlantConfig,
    scene: Scene,
    rng: ChaCha8Rng,
}

impl<'a> Builder<'a> {
    fn new(cfg: &'a PlantConfig, kind: SceneKind, seed: u64) -> Self {
        let mut scene = Scene::empty(&cfg.rig);
        scene.kind = kind;
        scene.seed = seed;
        Self {
            cfg,
            scene,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            lo
        } else {
            self.rng.random_range(lo..hi)
        }
    }

    fn unit_vector(&mut self) -> Vec3 {
        loop {
            let v = Vec3::new(
                self.uniform(-1.0, 1.0),
                self.uniform(-1.0, 1.0),
                self.uniform(-1.0, 1.0),
            );
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                return v / n;
            }
        }
    }

    /// A point in the berry bands at the requested horizontal distance range.
    fn band_point(&mut self, dist: (f64, f64)) -> Vec3 {
        let cam = self.cfg.camera_xy();
        let pan = self.cfg.rig.camera_pan;
        let d = self.uniform(dist.0, dist.1);
        let az = pan + self.uniform(-self.cfg.azimuth_half_width, self.cfg.azimuth_half_width);
        let z = self.uniform(self.cfg.height_band.0, self.cfg.height_band.1);
        Vec3::new(cam.x + d * az.cos(), cam.y + d * az.sin(), z)
    }

    fn berry_fits(&self, c: &Vec3) -> bool {
        let r = self.cfg.berry_radius;
        self.cfg.in_bands(c)
            && self
                .scene
                .berries
                .iter()
                .all(|b| (b.center - c).norm() >= self.cfg.min_berry_separation.max(2.0 * r + 1e-3))
            && self
                .scene
                .obstacles
                .iter()
                .all(|o| o.distance_to_sphere(&Sphere::new(*c, r)) > 2e-3)
    }

    fn obstacle_fits(&self, o: &FoliageObstacle) -> bool {
        self.scene
            .berries
            .iter()
            .all(|b| o.distance_to_sphere(&b.sphere()) > 2e-3)
    }

    fn try_push(&mut self, shape: FoliageShape, tag: FoliageTag) -> bool {
        let probe = FoliageObstacle { id: 0, shape, tag };
        if !probe.is_valid() || !self.obstacle_fits(&probe) {
            return false;
        }
        self.scene.push_obstacle(shape, tag);
        true
    }

    /// Random leaf orientation that roughly faces the base camera.
    fn leaf_normal(&mut self, at: &Vec3) -> Vec3 {
        let to_cam = (self.cfg.rig.camera_position - at).normalize();
        (to_cam + self.unit_vector() * 0.6).normalize()
    }

    fn place_berry(&mut self, class: PlacementClass, dist: (f64, f64)) -> Result<u32, ConfigError> {
        for _ in 0..MAX_ATTEMPTS {
            let c = self.band_point(dist);
            if self.berry_fits(&c) {
                return Ok(self.scene.push_berry(c, self.cfg.berry_radius, class));
            }
        }
        Err(ConfigError::Infeasible {
            what: "berry",
            attempts: MAX_ATTEMPTS,
        })
    }

    /// Leaves between an under-canopy berry and the base camera.
    fn shroud(&mut self, berry_id: u32) -> Result<(), ConfigError> {
        let berry = *self.scene.berry(berry_id).expect("berry just placed");
        let cam = self.cfg.rig.camera_position;
        let axis = (cam - berry.center).normalize();
        let side = axis.cross(&world_up()).normalize();
        let up = side.cross(&axis);
        let (lo, hi) = self.cfg.shroud_leaves;
        let count = self.rng.random_range(lo..=hi);
        // one draw per berry: either the whole shroud leaves a gap or none of it does
        let gap = self.rng.random_bool(self.cfg.shroud_gap_probability);
        let mut placed = 0;
        let mut attempts = 0;
        while placed < count {
            attempts += 1;
            if attempts > MAX_ATTEMPTS {
                return Err(ConfigError::Infeasible {
                    what: "shroud leaf",
                    attempts: MAX_ATTEMPTS,
                });
            }
            let along = self.uniform(self.cfg.shroud_distance.0, self.cfg.shroud_distance.1);
            let lateral = if gap {
                self.uniform(1.2, 1.8) * self.cfg.leaf_radius
            } else {
                self.uniform(0.0, 0.7) * self.cfg.leaf_radius
            };
            let phi = self.uniform(0.0, core::f64::consts::TAU);
            let center = berry.center + axis * along + (side * phi.cos() + up * phi.sin()) * lateral;
            let normal = (axis + self.unit_vector() * 0.4).normalize();
            if self.try_push(
                FoliageShape::Disk(Disk::new(center, normal, self.cfg.leaf_radius)),
                FoliageTag::Leaf,
            ) {
                placed += 1;
            }
        }
        Ok(())
    }

    /// Clear line of sight from the base camera to the berry center.
    fn sight_line(&self, berry: &Berry) -> Capsule {
        Capsule::new(self.cfg.rig.camera_position, berry.center, berry.radius * 1.2)
    }

    /// True when an obstacle would sit in front of a peripheral berry.
    fn blocks_periphery(&self, o: &FoliageObstacle) -> bool {
        self.scene
            .berries
            .iter()
            .filter(|b| b.class == PlacementClass::Periphery)
            .any(|b| o.distance_to_capsule(&self.sight_line(b)) < 0.0)
    }

    fn finish(self) -> Scene {
        self.scene
    }
}

fn place_berries(b: &mut Builder<'_>, periphery: (f64, f64), canopy: (f64, f64)) -> Result<(), ConfigError> {
    for class in b.cfg.classes() {
        let band = match class {
            PlacementClass::Periphery => periphery,
            PlacementClass::UnderCanopy => canopy,
        };
        b.place_berry(class, band)?;
    }
    Ok(())
}

/// Lab plant: a main stem behind the berries, lateral branches, berries on the
/// camera-facing periphery and recessed under the canopy.
pub fn generate_lab_scene(cfg: &LabSceneConfig, seed: u64) -> Result<Scene, ConfigError> {
    let p = &cfg.plant;
    p.validate()?;
    if cfg.stem_distance <= p.radial_band.1 {
        return Err(ConfigError::invalid("stem must stand behind the berry band"));
    }
    let mut b = Builder::new(p, SceneKind::Lab, seed);
    let (near, far) = p.radial_band;
    let split = near + (far - near) * 0.6;
    place_berries(&mut b, (near, split), (near + (far - near) * 0.45, far))?;

    let cam = p.camera_xy();
    let stem_base = cam + Vec3::new(cfg.stem_distance * p.rig.camera_pan.cos(), cfg.stem_distance * p.rig.camera_pan.sin(), 0.0);
    let stem = Capsule::new(
        Vec3::new(stem_base.x, stem_base.y, p.height_band.0 - 0.25),
        Vec3::new(stem_base.x, stem_base.y, p.height_band.1 + 0.25),
        p.stem_radius * 1.6,
    );
    if !b.try_push(FoliageShape::Capsule(stem), FoliageTag::Stem) {
        return Err(ConfigError::invalid("main stem intersects a berry"));
    }

    let ids: Vec<u32> = b.scene.berries.iter().filter(|x| x.class == PlacementClass::UnderCanopy).map(|x| x.id).collect();
    for id in ids {
        b.shroud(id)?;
    }

    let mut placed = 0;
    let mut attempts = 0;
    while placed < p.branches && attempts < MAX_ATTEMPTS {
        attempts += 1;
        let z = b.uniform(p.height_band.0 - 0.05, p.height_band.1 + 0.1);
        let root = Vec3::new(stem_base.x, stem_base.y, z);
        let mut dir = b.unit_vector();
        dir.z = dir.z.abs() * 0.5;
        let dir = dir.normalize();
        let len = b.uniform(0.08, 0.18);
        let shape = FoliageShape::Capsule(Capsule::new(root, root + dir * len, p.stem_radius));
        let probe = FoliageObstacle { id: 0, shape, tag: FoliageTag::Stem };
        if b.blocks_periphery(&probe) {
            continue;
        }
        if b.try_push(shape, FoliageTag::Stem) {
            placed += 1;
        }
    }

    let mut placed = 0;
    let mut attempts = 0;
    while placed < p.canopy_leaves && attempts < MAX_ATTEMPTS {
        attempts += 1;
        let d = b.uniform(near + 0.05, cfg.stem_distance + 0.12);
        let az = p.rig.camera_pan + b.uniform(-p.azimuth_half_width * 1.3, p.azimuth_half_width * 1.3);
        let z = b.uniform(p.height_band.0 - 0.05, p.height_band.1 + 0.12);
        let center = Vec3::new(cam.x + d * az.cos(), cam.y + d * az.sin(), z);
        let normal = b.leaf_normal(&center);
        let shape = FoliageShape::Disk(Disk::new(center, normal, p.leaf_radius));
        let probe = FoliageObstacle { id: 0, shape, tag: FoliageTag::Leaf };
        if b.blocks_periphery(&probe) {
            continue;
        }
        if b.try_push(shape, FoliageTag::Leaf) {
            placed += 1;
        }
    }
    Ok(b.finish())
}

/// Vines hang as capsule chains from a bar; berries sit beside a vine axis.
pub fn generate_hanging_vine_scene(cfg: &VineSceneConfig, seed: u64) -> Result<Scene, ConfigError> {
    let p = &cfg.plant;
    p.validate()?;
    if cfg.vine_count == 0 {
        return Err(ConfigError::invalid("vine_count must be at least 1"));
    }
    if cfg.segments_per_vine == 0 || !(cfg.top_height > cfg.bottom_height) {
        return Err(ConfigError::invalid("vines need at least one segment and positive drop"));
    }
    let min_attach = p.berry_radius + cfg.vine_radius + 3e-3;
    if cfg.attach_distance < min_attach {
        return Err(ConfigError::invalid("attach_distance too small to clear the vine"));
    }
    let mut b = Builder::new(p, SceneKind::HangingVine, seed);
    let cam = p.camera_xy();
    let (near, far) = p.radial_band;

    let mut chains: Vec<Vec<Vec3>> = Vec::with_capacity(cfg.vine_count);
    for k in 0..cfg.vine_count {
        let frac = (k as f64 + 0.5) / cfg.vine_count as f64;
        let az = p.rig.camera_pan + (frac * 2.0 - 1.0) * p.azimuth_half_width * 0.9;
        let d = b.uniform(near + 0.03, far - 0.01);
        let mut pts = Vec::with_capacity(cfg.segments_per_vine + 1);
        let top = Vec3::new(cam.x + d * az.cos(), cam.y + d * az.sin(), cfg.top_height);
        pts.push(top);
        let drop = (cfg.top_height - cfg.bottom_height) / cfg.segments_per_vine as f64;
        let mut cur = top;
        for _ in 0..cfg.segments_per_vine {
            let next = Vec3::new(
                cur.x + b.uniform(-cfg.sway, cfg.sway),
                cur.y + b.uniform(-cfg.sway, cfg.sway),
                cur.z - drop,
            );
            pts.push(next);
            cur = next;
        }
        chains.push(pts);
    }
    for chain in &chains {
        for w in chain.windows(2) {
            b.scene.push_obstacle(
                FoliageShape::Capsule(Capsule::new(w[0], w[1], cfg.vine_radius)),
                FoliageTag::Vine,
            );
        }
    }

    for class in p.classes() {
        let mut ok = false;
        for _ in 0..MAX_ATTEMPTS {
            let v = b.rng.random_range(0..chains.len());
            let chain = &chains[v];
            let s = b.rng.random_range(0..chain.len() - 1);
            let t = b.uniform(0.0, 1.0);
            let on_axis = chain[s] + (chain[s + 1] - chain[s]) * t;
            let to_cam = {
                let d = cfg.plant.rig.camera_position - on_axis;
                Vec3::new(d.x, d.y, 0.0).normalize()
            };
            let side = to_cam.cross(&world_up());
            let spread = b.uniform(-1.0, 1.0);
            let facing = match class {
                PlacementClass::Periphery => to_cam,
                PlacementClass::UnderCanopy => -to_cam,
            };
            let dir = (facing + side * spread * 0.6).normalize();
            let c = on_axis + dir * b.uniform(min_attach, cfg.attach_distance);
            if b.berry_fits(&c) && vine_distance(&chains, &c) <= cfg.attach_distance {
                b.scene.push_berry(c, p.berry_radius, class);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(ConfigError::Infeasible {
                what: "vine berry",
                attempts: MAX_ATTEMPTS,
            });
        }
    }

    let ids: Vec<u32> = b.scene.berries.iter().filter(|x| x.class == PlacementClass::UnderCanopy).map(|x| x.id).collect();
    for id in ids {
        b.shroud(id)?;
    }

    for chain in &chains {
        let mut placed = 0;
        let mut attempts = 0;
        while placed < cfg.leaves_per_vine && attempts < MAX_ATTEMPTS {
            attempts += 1;
            let s = b.rng.random_range(0..chain.len() - 1);
            let t = b.uniform(0.0, 1.0);
            let at = chain[s] + (chain[s + 1] - chain[s]) * t;
            let off = b.unit_vector();
            let center = at + Vec3::new(off.x, off.y, 0.0) * p.leaf_radius;
            let normal = b.leaf_normal(&center);
            let shape = FoliageShape::Disk(Disk::new(center, normal, p.leaf_radius));
            let probe = FoliageObstacle { id: 0, shape, tag: FoliageTag::Leaf };
            if b.blocks_periphery(&probe) {
                continue;
            }
            if b.try_push(shape, FoliageTag::Leaf) {
                placed += 1;
            }
        }
    }
    Ok(b.finish())
}

fn vine_distance(chains: &[Vec<Vec3>], p: &Vec3) -> f64 {
    chains
        .iter()
        .flat_map(|c| c.windows(2).map(move |w| point_segment_distance(p, &w[0], &w[1])))
        .fold(f64::INFINITY, f64::min)
}

/// Two crop rows bounding a corridor with the robot centered between them.
/// Rows run along y; the picking row face is at `x = camera.x + spacing / 2`.
pub fn generate_high_tunnel_scene(cfg: &TunnelSceneConfig, seed: u64) -> Result<Scene, ConfigError> {
    let p = &cfg.plant;
    p.validate()?;
    let (lo, hi) = ROW_SPACING_BAND;
    if !(cfg.row_spacing > 0.0) {
        return Err(ConfigError::invalid("row_spacing must be positive"));
    }
    if !cfg.allow_spacing_override && !(cfg.row_spacing >= lo && cfg.row_spacing <= hi) {
        return Err(ConfigError::invalid(format!(
            "row_spacing {} m outside the recommended [{lo}, {hi}] m band (set allow_spacing_override to force)",
            cfg.row_spacing
        )));
    }
    let mut b = Builder::new(p, SceneKind::HighTunnel, seed);
    b.scene.corridor_width = Some(cfg.row_spacing);
    b.scene.outer_foliage_removed = cfg.outer_foliage_removed;
    let cam = p.camera_xy();
    if !(cfg.face_standoff > 0.0) {
        return Err(ConfigError::invalid("face_standoff must be positive"));
    }
    let half = cfg.row_spacing / 2.0;
    // offset off the center line toward the working row
    let offset = (half - cfg.face_standoff).max(0.0);
    let face = cam.x + half - offset;
    b.scene.row_face_x = Some(face);

    for class in p.classes() {
        let x_range = match class {
            PlacementClass::Periphery => (face - cfg.hang_out, face),
            PlacementClass::UnderCanopy => (face + 0.01, face + 0.08),
        };
        let mut ok = false;
        for _ in 0..MAX_ATTEMPTS {
            let x = b.uniform(x_range.0, x_range.1);
            let dx = x - cam.x;
            let max_dy = (p.radial_band.1.powi(2) - dx * dx)
                .max(0.0)
                .sqrt()
                .min(dx.abs() * p.azimuth_half_width.tan());
            let y = cam.y + b.uniform(-max_dy, max_dy);
            let z = b.uniform(p.height_band.0, p.height_band.1);
            let c = Vec3::new(x, y, z);
            if b.berry_fits(&c) {
                b.scene.push_berry(c, p.berry_radius, class);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(ConfigError::Infeasible {
                what: "row berry",
                attempts: MAX_ATTEMPTS,
            });
        }
    }

    // one stem per plant along each row, both sides of the corridor
    let plant_pitch = 0.3;
    for side in [1.0, -1.0] {
        let row_x = cam.x - offset + side * (half + cfg.row_depth * 0.5);
        let mut y = cam.y - 0.9;
        while y <= cam.y + 0.9 + 1e-9 {
            let shape = FoliageShape::Capsule(Capsule::new(
                Vec3::new(row_x, y, p.height_band.0 - 0.3),
                Vec3::new(row_x, y, p.height_band.1 + 0.4),
                p.stem_radius * 1.6,
            ));
            b.try_push(shape, FoliageTag::Stem);
            y += plant_pitch;
        }
    }

    let ids: Vec<u32> = b.scene.berries.iter().filter(|x| x.class == PlacementClass::UnderCanopy).map(|x| x.id).collect();
    for id in ids {
        b.shroud(id)?;
    }

    let keep = if cfg.outer_foliage_removed {
        (cfg.row_leaves as f64 * cfg.thinned_fraction).round() as usize
    } else {
        cfg.row_leaves
    };
    let mut placed = 0;
    let mut attempts = 0;
    while placed < keep && attempts < MAX_ATTEMPTS {
        attempts += 1;
        // leaves stay inside the row hull when outer foliage has been removed
        let x_lo = if cfg.outer_foliage_removed { face + p.leaf_radius } else { face - 0.1 };
        let x = b.uniform(x_lo, face + cfg.row_depth);
        let y = cam.y + b.uniform(-0.6, 0.6);
        let z = b.uniform(p.height_band.0 - 0.05, p.height_band.1 + 0.1);
        let center = Vec3::new(x, y, z);
        let normal = if cfg.outer_foliage_removed {
            // thinned rows: leaves lie edge-on to the corridor so they never cross the face
            let n = Vec3::new(0.0, b.uniform(-1.0, 1.0), b.uniform(-1.0, 1.0));
            if n.norm() < 1e-3 { Vec3::z() } else { n.normalize() }
        } else {
            b.leaf_normal(&center)
        };
        let shape = FoliageShape::Disk(Disk::new(center, normal, p.leaf_radius));
        let probe = FoliageObstacle { id: 0, shape, tag: FoliageTag::Leaf };
        if b.blocks_periphery(&probe) {
            continue;
        }
        if b.try_push(shape, FoliageTag::Leaf) {
            placed += 1;
        }
    }
    Ok(b.finish())
}

/// Face of the picking row, for scenes produced by [`generate_high_tunnel_scene`].
pub fn tunnel_row_face(scene: &Scene) -> Option<f64> {
    scene.row_face_x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_berries_split_six_four() {
        let mut cfg = LabSceneConfig::default();
        cfg.plant.berry_count = 10;
        cfg.plant.periphery_fraction = 0.6;
        cfg.plant.min_berry_separation = 0.035;
        let s = generate_lab_scene(&cfg, 3).unwrap();
        assert_eq!(s.count_class(PlacementClass::Periphery), 6);
        assert_eq!(s.count_class(PlacementClass::UnderCanopy), 4);
    }

    #[test]
    fn single_periphery_berry_needs_no_shroud() {
        let mut cfg = LabSceneConfig::default();
        cfg.plant.berry_count = 1;
        cfg.plant.periphery_fraction = 1.0;
        cfg.plant.canopy_leaves = 0;
        cfg.plant.branches = 0;
        let s = generate_lab_scene(&cfg, 11).unwrap();
        assert_eq!(s.berries.len(), 1);
        assert_eq!(s.berries[0].class, PlacementClass::Periphery);
        assert!(s.obstacles.iter().all(|o| o.tag != FoliageTag::Leaf));
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = LabSceneConfig::default();
        assert_eq!(generate_lab_scene(&cfg, 7).unwrap(), generate_lab_scene(&cfg, 7).unwrap());
        assert_ne!(generate_lab_scene(&cfg, 7).unwrap(), generate_lab_scene(&cfg, 8).unwrap());
    }

    #[test]
    fn half_rounds_toward_periphery() {
        let cfg = PlantConfig {
            berry_count: 5,
            periphery_fraction: 0.5,
            ..PlantConfig::default()
        };
        assert_eq!(cfg.periphery_count(), 3);
    }

    #[test]
    fn infeasible_fraction_and_empty_band_rejected() {
        let mut cfg = LabSceneConfig::default();
        cfg.plant.periphery_fraction = 1.5;
        assert!(generate_lab_scene(&cfg, 1).is_err());
        let mut cfg = LabSceneConfig::default();
        cfg.plant.radial_band = (0.4, 0.4);
        assert!(generate_lab_scene(&cfg, 1).is_err());
    }

    #[test]
    fn zero_vines_is_a_config_error() {
        let cfg = VineSceneConfig {
            vine_count: 0,
            ..VineSceneConfig::default()
        };
        assert!(matches!(generate_hanging_vine_scene(&cfg, 1), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn tunnel_spacing_band_enforced() {
        let cfg = TunnelSceneConfig {
            row_spacing: 0.5,
            ..TunnelSceneConfig::default()
        };
        assert!(generate_high_tunnel_scene(&cfg, 1).is_err());
        let cfg = TunnelSceneConfig {
            row_spacing: 1.0,
            ..TunnelSceneConfig::default()
        };
        let s = generate_high_tunnel_scene(&cfg, 1).unwrap();
        assert_eq!(s.corridor_width, Some(1.0));
        let face = tunnel_row_face(&s).unwrap();
        assert!((face - s.base_camera.position.x - 0.5 + 0.07).abs() < 1e-12);
    }

    #[test]
    fn empty_scene_ray_misses() {
        let s = Scene::empty(&RigConfig::default());
        assert!(ray_intersect(&s, &Vec3::zeros(), &Vec3::x()).is_none());
    }

    #[test]
    fn ray_at_sphere_center() {
        let mut s = Scene::empty(&RigConfig::default());
        s.push_berry(Vec3::new(0.4, 0.0, 0.0), 0.015, PlacementClass::Periphery);
        let hit = ray_intersect(&s, &Vec3::zeros(), &Vec3::x()).unwrap();
        assert_eq!(hit.object, ObjectId::Berry(0));
        assert!((hit.distance - 0.385).abs() < 1e-12);
    }
}
