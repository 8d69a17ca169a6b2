//! Simulated cameras: pinhole projection, sphere silhouettes, sampled
//! visibility, depth returns and a parametric berry detector.
//!
//! Camera frames follow the optical convention: x right, y down, z forward.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::SensingError;
use crate::math::{Pose, Vec3};
use crate::scene::{ray_intersect, ray_intersect_excluding, Berry, ObjectId, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(f: f64, width: u32, height: u32) -> Self {
        Self {
            fx: f,
            fy: f,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            width,
            height,
        }
    }

    pub fn tip_default() -> Self {
        Self::new(500.0, 640, 480)
    }

    pub fn base_default() -> Self {
        Self::new(610.0, 848, 480)
    }

    pub fn is_valid(&self) -> bool {
        self.fx > 0.0
            && self.fy > 0.0
            && self.width > 0
            && self.height > 0
            && self.cx > 0.0
            && self.cx < self.width as f64
            && self.cy > 0.0
            && self.cy < self.height as f64
    }

    pub fn center(&self) -> (f64, f64) {
        (self.cx, self.cy)
    }

    /// Unit ray through a pixel, camera frame.
    pub fn pixel_ray(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0).normalize()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraRole {
    Base,
    Tip,
    DistalDepth,
}

impl CameraRole {
    pub fn has_depth(&self) -> bool {
        matches!(self, CameraRole::Base | CameraRole::DistalDepth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraView {
    /// Camera pose in the world.
    pub pose: Pose,
    pub intrinsics: CameraIntrinsics,
    pub role: CameraRole,
}

impl CameraView {
    pub fn new(pose: Pose, intrinsics: CameraIntrinsics, role: CameraRole) -> Self {
        Self {
            pose,
            intrinsics,
            role,
        }
    }

    /// The tip camera is the tool frame itself.
    pub fn tip(tool: &Pose, intrinsics: CameraIntrinsics) -> Self {
        Self::new(*tool, intrinsics, CameraRole::Tip)
    }

    /// Depth camera fixed to the last link at `mount` relative to the tool frame.
    pub fn distal_depth(tool: &Pose, mount: &Pose, intrinsics: CameraIntrinsics) -> Self {
        Self::new(tool.compose(mount), intrinsics, CameraRole::DistalDepth)
    }

    /// World-frame unit ray through a pixel.
    pub fn pixel_ray_world(&self, u: f64, v: f64) -> Vec3 {
        self.pose.orientation * self.intrinsics.pixel_ray(u, v)
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub u_min: f64,
    pub v_min: f64,
    pub u_max: f64,
    pub v_max: f64,
}

impl BBox {
    pub fn center(&self) -> (f64, f64) {
        ((self.u_min + self.u_max) / 2.0, (self.v_min + self.v_max) / 2.0)
    }

    pub fn width(&self) -> f64 {
        self.u_max - self.u_min
    }

    pub fn height(&self) -> f64 {
        self.v_max - self.v_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u_min && u <= self.u_max && v >= self.v_min && v <= self.v_max
    }

    fn clamp_to(&self, k: &CameraIntrinsics) -> Option<BBox> {
        let w = k.width as f64;
        let h = k.height as f64;
        let b = BBox {
            u_min: self.u_min.clamp(0.0, w),
            v_min: self.v_min.clamp(0.0, h),
            u_max: self.u_max.clamp(0.0, w),
            v_max: self.v_max.clamp(0.0, h),
        };
        (b.u_min < b.u_max && b.v_min < b.v_max).then_some(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// Ground-truth berry behind the detection; `None` for a false positive.
    /// Only scoring code may read this.
    pub berry_id: Option<u32>,
    pub bbox: BBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightingCondition {
    /// Scene brightness relative to the indoor baseline.
    pub multiplier: f64,
}

impl Default for LightingCondition {
    fn default() -> Self {
        Self { multiplier: 1.0 }
    }
}

/// Piecewise-linear detection penalty over the lighting multiplier, flat
/// beyond the first and last knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightingPenalty {
    pub knots: Vec<(f64, f64)>,
}

impl Default for LightingPenalty {
    fn default() -> Self {
        Self {
            knots: alloc::vec![(1.0, 1.0), (13.0, 0.85), (20.0, 0.8)],
        }
    }
}

impl LightingPenalty {
    /// Knots must be sorted by multiplier, with values in (0, 1] that never
    /// increase, and must give 1 at the baseline.
    pub fn is_valid(&self) -> bool {
        !self.knots.is_empty()
            && self.knots.windows(2).all(|w| w[0].0 < w[1].0 && w[1].1 <= w[0].1)
            && self.knots.iter().all(|k| k.1 > 0.0 && k.1 <= 1.0)
            && (self.eval(1.0) - 1.0).abs() < 1e-12
    }

    pub fn eval(&self, multiplier: f64) -> f64 {
        let k = &self.knots;
        if k.is_empty() {
            return 1.0;
        }
        if multiplier <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if multiplier <= x1 {
                return y0 + (y1 - y0) * (multiplier - x0) / (x1 - x0);
            }
        }
        k[k.len() - 1].1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorParams {
    /// Berries less visible than this are never reported.
    pub min_visibility: f64,
    /// Smallest clamped bbox area reported, px².
    pub min_area_px: f64,
    /// Standard deviation of per-edge bbox jitter, px.
    pub jitter_px: f64,
    /// Probability per frame of one spurious detection.
    pub false_positive_rate: f64,
    pub visibility_samples: usize,
    pub lighting_penalty: LightingPenalty,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            min_visibility: 0.2,
            min_area_px: 16.0,
            jitter_px: 1.0,
            false_positive_rate: 0.0,
            visibility_samples: 32,
            lighting_penalty: LightingPenalty::default(),
        }
    }
}

impl DetectorParams {
    /// Noise-free detector: every visible berry, exact boxes.
    pub fn ideal() -> Self {
        Self {
            min_visibility: 0.0,
            min_area_px: 0.0,
            jitter_px: 0.0,
            false_positive_rate: 0.0,
            visibility_samples: 32,
            lighting_penalty: LightingPenalty {
                knots: alloc::vec![(1.0, 1.0)],
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DepthNoiseModel {
    /// Range noise standard deviation, meters.
    pub sigma: f64,
    /// Probability that a pixel has no return.
    pub dropout: f64,
}

impl Default for DepthNoiseModel {
    fn default() -> Self {
        Self {
            sigma: 0.01,
            dropout: 0.0,
        }
    }
}

impl DepthNoiseModel {
    pub fn exact() -> Self {
        Self {
            sigma: 0.0,
            dropout: 0.0,
        }
    }
}

pub fn project_point(view: &CameraView, p: &Vec3) -> Result<(f64, f64), SensingError> {
    let c = view.pose.inverse_transform_point(p);
    if c.z <= 0.0 {
        return Err(SensingError::BehindCamera);
    }
    let k = &view.intrinsics;
    Ok((k.fx * c.x / c.z + k.cx, k.fy * c.y / c.z + k.cy))
}

/// Range of slopes `x/z` over the part of a sphere at `(a, depth)` (in the
/// xz-plane) lying in front of the camera. Unbounded sides come back infinite.
fn slope_range(a: f64, depth: f64, r: f64) -> (f64, f64) {
    let dist = (a * a + depth * depth).sqrt();
    if dist <= r {
        return (f64::NEG_INFINITY, f64::INFINITY);
    }
    let phi = a.atan2(depth);
    let alpha = (r / dist).asin();
    let half_pi = core::f64::consts::FRAC_PI_2;
    let lo = if phi - alpha <= -half_pi { f64::NEG_INFINITY } else { (phi - alpha).tan() };
    let hi = if phi + alpha >= half_pi { f64::INFINITY } else { (phi + alpha).tan() };
    (lo, hi)
}

/// Tight bounding box of a sphere's silhouette, clamped to the image.
/// Spheres whose center is not in front of the camera are not visible.
pub fn project_sphere(view: &CameraView, center: &Vec3, radius: f64) -> Result<BBox, SensingError> {
    let c = view.pose.inverse_transform_point(center);
    if c.z <= 0.0 {
        return Err(SensingError::NotVisible);
    }
    let k = &view.intrinsics;
    let (x0, x1) = slope_range(c.x, c.z, radius);
    let (y0, y1) = slope_range(c.y, c.z, radius);
    // keep infinities out of the clamp arithmetic
    let big = 1e9;
    let raw = BBox {
        u_min: (k.cx + k.fx * x0).max(-big),
        u_max: (k.cx + k.fx * x1).min(big),
        v_min: (k.cy + k.fy * y0).max(-big),
        v_max: (k.cy + k.fy * y1).min(big),
    };
    raw.clamp_to(k).ok_or(SensingError::NotVisible)
}

pub fn project_berry(view: &CameraView, berry: &Berry) -> Result<BBox, SensingError> {
    project_sphere(view, &berry.center, berry.radius)
}

/// Low-discrepancy points on the hemisphere of `berry` that faces `eye`.
pub fn hemisphere_samples(berry: &Berry, eye: &Vec3, k: usize) -> Vec<Vec3> {
    let Some(axis) = (eye - berry.center).try_normalize(1e-12) else {
        return Vec::new();
    };
    let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = axis.cross(&helper).normalize();
    let e2 = axis.cross(&e1);
    let golden = core::f64::consts::PI * (3.0 - 5.0.sqrt());
    (0..k)
        .map(|i| {
            let h = 1.0 - (i as f64 + 0.5) / k as f64;
            let ring = (1.0 - h * h).max(0.0).sqrt();
            let phi = golden * i as f64;
            berry.center + (axis * h + (e1 * phi.cos() + e2 * phi.sin()) * ring) * berry.radius
        })
        .collect()
}

/// Fraction of hemisphere samples with a clear line to the camera.
pub fn visibility_fraction(scene: &Scene, view: &CameraView, berry: &Berry, samples: usize) -> f64 {
    let eye = view.pose.position;
    let points = hemisphere_samples(berry, &eye, samples.max(1));
    if points.is_empty() {
        return 0.0;
    }
    let me = Some(ObjectId::Berry(berry.id));
    let clear = points
        .iter()
        .filter(|p| {
            let d = *p - eye;
            let len = d.norm();
            if len < 1e-12 {
                return true;
            }
            match ray_intersect_excluding(scene, &eye, &(d / len), me) {
                Some(hit) => hit.distance >= len - 1e-9,
                None => true,
            }
        })
        .count();
    clear as f64 / points.len() as f64
}

/// Range along a pixel ray from a depth-capable camera.
pub fn measure_depth<R: Rng + ?Sized>(
    scene: &Scene,
    view: &CameraView,
    pixel: (f64, f64),
    noise: &DepthNoiseModel,
    rng: &mut R,
) -> Result<f64, SensingError> {
    if !view.role.has_depth() {
        return Err(SensingError::NoDepthSensor);
    }
    let dir = view.pixel_ray_world(pixel.0, pixel.1);
    // draw both variates every call so streams stay aligned across settings
    let drop: f64 = rng.random();
    let z: f64 = StandardNormal.sample(rng);
    let hit = ray_intersect(scene, &view.pose.position, &dir).ok_or(SensingError::NoReturn)?;
    if drop < noise.dropout {
        return Err(SensingError::NoReturn);
    }
    Ok(hit.distance + noise.sigma * z)
}

/// Simulated detector. Each berry costs the same number of draws whether or
/// not it is visible, so two settings sharing a seed see the same variates.
pub fn detect<R: Rng + ?Sized>(
    scene: &Scene,
    view: &CameraView,
    lighting: &LightingCondition,
    params: &DetectorParams,
    rng: &mut R,
) -> Vec<Detection> {
    let penalty = params.lighting_penalty.eval(lighting.multiplier);
    let jitter = Normal::new(0.0, params.jitter_px.max(0.0)).unwrap_or(Normal::new(0.0, 0.0).unwrap());
    let k = &view.intrinsics;
    let mut out = Vec::new();
    for berry in &scene.berries {
        let u: f64 = rng.random();
        let j = [
            jitter.sample(rng),
            jitter.sample(rng),
            jitter.sample(rng),
            jitter.sample(rng),
        ];
        let Ok(bbox) = project_berry(view, berry) else {
            continue;
        };
        if bbox.area() < params.min_area_px {
            continue;
        }
        let vis = visibility_fraction(scene, view, berry, params.visibility_samples);
        if vis <= 0.0 || vis < params.min_visibility {
            continue;
        }
        let p = vis.clamp(0.0, 1.0) * penalty;
        if u >= p {
            continue;
        }
        let mut b = BBox {
            u_min: bbox.u_min + j[0],
            v_min: bbox.v_min + j[1],
            u_max: bbox.u_max + j[2],
            v_max: bbox.v_max + j[3],
        };
        if b.u_min > b.u_max {
            core::mem::swap(&mut b.u_min, &mut b.u_max);
        }
        if b.v_min > b.v_max {
            core::mem::swap(&mut b.v_min, &mut b.v_max);
        }
        if let Some(b) = b.clamp_to(k) {
            out.push(Detection {
                berry_id: Some(berry.id),
                bbox: b,
                confidence: p.max(f64::MIN_POSITIVE),
            });
        }
    }
    let fp: f64 = rng.random();
    let fu: f64 = rng.random();
    let fv: f64 = rng.random();
    let fs: f64 = rng.random();
    if fp < params.false_positive_rate {
        let half = 8.0 + 40.0 * fs;
        let (w, h) = (k.width as f64, k.height as f64);
        let (cu, cv) = (fu * w, fv * h);
        let b = BBox {
            u_min: cu - half,
            v_min: cv - half,
            u_max: cu + half,
            v_max: cv + half,
        };
        if let Some(b) = b.clamp_to(k) {
            out.push(Detection {
                berry_id: None,
                bbox: b,
                confidence: 0.5,
            });
        }
    }
    out
}

/// Detection nearest the image center; ties go to the lower berry id.
pub fn select_target(detections: &[Detection], center: (f64, f64)) -> Option<Detection> {
    let key = |d: &Detection| {
        let (u, v) = d.bbox.center();
        ((u - center.0).powi(2) + (v - center.1).powi(2)).sqrt()
    };
    detections
        .iter()
        .min_by(|a, b| {
            key(a)
                .total_cmp(&key(b))
                .then(a.berry_id.unwrap_or(u32::MAX).cmp(&b.berry_id.unwrap_or(u32::MAX)))
        })
        .copied()
}
