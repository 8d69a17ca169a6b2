//! Analytic primitives: spheres (berries), disks (leaves) and capsules
//! (stems, vines and arm links). Ray casts return the nearest positive hit;
//! distance queries are exact up to floating point.

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::math::Vec3;

const PARALLEL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit direction.
    pub direction: Vec3,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Self { origin, direction }
    }

    /// Ray from `from` toward `to`; `None` when the points coincide.
    pub fn between(from: &Vec3, to: &Vec3) -> Option<(Self, f64)> {
        let d = to - from;
        let len = d.norm();
        if len < PARALLEL_EPS {
            return None;
        }
        Some((Self::new(*from, d / len), len))
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Vec3,
    /// Unit normal.
    pub normal: Vec3,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capsule {
    pub p0: Vec3,
    pub p1: Vec3,
    pub radius: f64,
}

impl Sphere {
    pub fn new(center: Vec3, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn ray_hit(&self, ray: &Ray) -> Option<f64> {
        let oc = ray.origin - self.center;
        let b = oc.dot(&ray.direction);
        let c = oc.norm_squared() - self.radius * self.radius;
        let disc = b * b - c;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        nearest_positive(-b - s, -b + s)
    }
}

impl Disk {
    pub fn new(center: Vec3, normal: Vec3, radius: f64) -> Self {
        Self {
            center,
            normal: normal.normalize(),
            radius,
        }
    }

    pub fn ray_hit(&self, ray: &Ray) -> Option<f64> {
        let denom = ray.direction.dot(&self.normal);
        if denom.abs() < PARALLEL_EPS {
            return None;
        }
        let t = (self.center - ray.origin).dot(&self.normal) / denom;
        if t <= 0.0 {
            return None;
        }
        if (ray.at(t) - self.center).norm_squared() <= self.radius * self.radius {
            Some(t)
        } else {
            None
        }
    }

    /// Distance from a point to the (zero-thickness) disk.
    pub fn distance_to_point(&self, p: &Vec3) -> f64 {
        let v = p - self.center;
        let h = v.dot(&self.normal);
        let rho = (v - self.normal * h).norm();
        if rho <= self.radius {
            h.abs()
        } else {
            let e = rho - self.radius;
            (h * h + e * e).sqrt()
        }
    }
}

impl Capsule {
    pub fn new(p0: Vec3, p1: Vec3, radius: f64) -> Self {
        Self { p0, p1, radius }
    }

    pub fn axis_length(&self) -> f64 {
        (self.p1 - self.p0).norm()
    }

    /// Ray against the capsule surface (cylinder plus hemispherical caps).
    pub fn ray_hit(&self, ray: &Ray) -> Option<f64> {
        let ba = self.p1 - self.p0;
        let oa = ray.origin - self.p0;
        let baba = ba.dot(&ba);
        if baba < PARALLEL_EPS {
            return Sphere::new(self.p0, self.radius).ray_hit(ray);
        }
        let bard = ba.dot(&ray.direction);
        let baoa = ba.dot(&oa);
        let rdoa = ray.direction.dot(&oa);
        let oaoa = oa.dot(&oa);
        let r2 = self.radius * self.radius;
        let a = baba - bard * bard;
        let b = baba * rdoa - baoa * bard;
        let c = baba * oaoa - baoa * baoa - r2 * baba;
        let mut best: Option<f64> = None;
        let mut take = |t: f64| {
            if t > 0.0 && best.is_none_or(|b| t < b) {
                best = Some(t);
            }
        };
        // infinite cylinder, restricted to the segment's span
        if a > PARALLEL_EPS {
            let disc = b * b - a * c;
            if disc >= 0.0 {
                let s = disc.sqrt();
                for t in [(-b - s) / a, (-b + s) / a] {
                    let y = baoa + t * bard;
                    if y >= 0.0 && y <= baba {
                        take(t);
                    }
                }
            }
        }
        for cap in [self.p0, self.p1] {
            if let Some(t) = Sphere::new(cap, self.radius).ray_hit(ray) {
                take(t);
            }
            // exit hits of the cap spheres count too when the origin is inside
            let oc = ray.origin - cap;
            let bb = oc.dot(&ray.direction);
            let cc = oc.norm_squared() - r2;
            let disc = bb * bb - cc;
            if disc >= 0.0 {
                let s = disc.sqrt();
                for t in [-bb - s, -bb + s] {
                    let p = ray.at(t);
                    let y = (p - self.p0).dot(&ba);
                    let outside_span = y < 0.0 || y > baba;
                    if outside_span {
                        take(t);
                    }
                }
            }
        }
        best
    }

    pub fn distance_to_point(&self, p: &Vec3) -> f64 {
        (point_segment_distance(p, &self.p0, &self.p1) - self.radius).max(0.0)
    }
}

fn nearest_positive(t0: f64, t1: f64) -> Option<f64> {
    if t0 > 0.0 {
        Some(t0)
    } else if t1 > 0.0 {
        Some(t1)
    } else {
        None
    }
}

/// Closest point on segment `[a, b]` to `p`, as the segment parameter.
pub fn closest_segment_param(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 < PARALLEL_EPS {
        return 0.0;
    }
    ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
}

pub fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let t = closest_segment_param(p, a, b);
    (p - (a + (b - a) * t)).norm()
}

/// Shortest distance between segments `[p1, q1]` and `[p2, q2]`.
pub fn segment_segment_distance(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= PARALLEL_EPS && e <= PARALLEL_EPS {
        return r.norm();
    }
    if a <= PARALLEL_EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= PARALLEL_EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > PARALLEL_EPS * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// Shortest distance between a segment and a disk. The point-to-disk distance
/// is convex along the segment, so a golden-section search on the segment
/// parameter converges to the exact minimum; a plane crossing inside the rim
/// short-circuits to zero.
pub fn segment_disk_distance(a: &Vec3, b: &Vec3, disk: &Disk) -> f64 {
    let ha = (a - disk.center).dot(&disk.normal);
    let hb = (b - disk.center).dot(&disk.normal);
    if ha * hb <= 0.0 && (ha - hb).abs() > PARALLEL_EPS {
        let t = ha / (ha - hb);
        let p = a + (b - a) * t;
        if (p - disk.center).norm_squared() <= disk.radius * disk.radius {
            return 0.0;
        }
    }
    let f = |t: f64| disk.distance_to_point(&(a + (b - a) * t));
    let inv_phi = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    f(0.0).min(f(1.0)).min(f1).min(f2)
}

/// Axis-aligned bounds used for broad-phase culling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn overlaps(&self, other: &Aabb, margin: f64) -> bool {
        (0..3).all(|i| {
            self.min[i] - margin <= other.max[i] && other.min[i] - margin <= self.max[i]
        })
    }
}

impl Sphere {
    pub fn aabb(&self) -> Aabb {
        let r = Vec3::repeat(self.radius);
        Aabb {
            min: self.center - r,
            max: self.center + r,
        }
    }
}

impl Capsule {
    pub fn aabb(&self) -> Aabb {
        let r = Vec3::repeat(self.radius);
        Aabb {
            min: self.p0.inf(&self.p1) - r,
            max: self.p0.sup(&self.p1) + r,
        }
    }
}

impl Disk {
    pub fn aabb(&self) -> Aabb {
        // extent of a circle along axis i is r * sqrt(1 - n_i^2)
        let e = Vec3::from_fn(|i, _| self.radius * (1.0 - self.normal[i] * self.normal[i]).max(0.0).sqrt());
        Aabb {
            min: self.center - e,
            max: self.center + e,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_hit_from_outside_is_distance_minus_radius() {
        let s = Sphere::new(Vec3::new(0.0, 0.0, 1.0), 0.2);
        let r = Ray::new(Vec3::zeros(), Vec3::z());
        assert!((s.ray_hit(&r).unwrap() - 0.8).abs() < 1e-15);
        let miss = Ray::new(Vec3::new(0.3, 0.0, 0.0), Vec3::z());
        assert!(s.ray_hit(&miss).is_none());
    }

    #[test]
    fn disk_edge_on_and_behind() {
        let d = Disk::new(Vec3::new(0.0, 0.0, 1.0), Vec3::z(), 0.1);
        assert!((d.ray_hit(&Ray::new(Vec3::zeros(), Vec3::z())).unwrap() - 1.0).abs() < 1e-15);
        assert!(d.ray_hit(&Ray::new(Vec3::new(0.0, 0.0, 2.0), Vec3::z())).is_none());
        assert!(d.ray_hit(&Ray::new(Vec3::new(-1.0, 0.0, 1.0), Vec3::x())).is_none());
    }

    #[test]
    fn capsule_side_and_cap_hits() {
        let c = Capsule::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0), 0.1);
        let side = Ray::new(Vec3::new(1.0, 0.0, 0.5), -Vec3::x());
        assert!((c.ray_hit(&side).unwrap() - 0.9).abs() < 1e-12);
        let top = Ray::new(Vec3::new(0.0, 0.0, 2.0), -Vec3::z());
        assert!((c.ray_hit(&top).unwrap() - 0.9).abs() < 1e-12);
        let inside = Ray::new(Vec3::new(0.0, 0.0, 0.5), Vec3::x());
        assert!((c.ray_hit(&inside).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn crossing_segments_have_zero_distance() {
        let d = segment_segment_distance(
            &Vec3::new(-1.0, 0.0, 0.0),
            &Vec3::new(1.0, 0.0, 0.0),
            &Vec3::new(0.0, -1.0, 0.0),
            &Vec3::new(0.0, 1.0, 0.0),
        );
        assert!(d < 1e-15);
        let p = segment_segment_distance(
            &Vec3::new(0.0, 0.0, 0.0),
            &Vec3::new(1.0, 0.0, 0.0),
            &Vec3::new(0.0, 0.5, 0.0),
            &Vec3::new(1.0, 0.5, 0.0),
        );
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn segment_disk_cases() {
        let d = Disk::new(Vec3::zeros(), Vec3::z(), 0.1);
        let through = segment_disk_distance(&Vec3::new(0.0, 0.0, -1.0), &Vec3::new(0.0, 0.0, 1.0), &d);
        assert_eq!(through, 0.0);
        let above = segment_disk_distance(&Vec3::new(-1.0, 0.0, 0.3), &Vec3::new(1.0, 0.0, 0.3), &d);
        assert!((above - 0.3).abs() < 1e-12);
        let beside = segment_disk_distance(&Vec3::new(0.5, 0.0, -1.0), &Vec3::new(0.5, 0.0, 1.0), &d);
        assert!((beside - 0.4).abs() < 1e-12);
    }

    #[test]
    fn disk_aabb_is_tight_for_axis_normal() {
        let d = Disk::new(Vec3::new(1.0, 2.0, 3.0), Vec3::z(), 0.5);
        let b = d.aabb();
        assert!((b.max - Vec3::new(1.5, 2.5, 3.0)).norm() < 1e-12);
    }
}
