use berryreach_core::geometry::Disk;
use berryreach_core::kinematics::{ArmModel, JointConfig, JOINT_COUNT};
use berryreach_core::math::Vec3;
use berryreach_core::planning::{
    approach_plane, check_collision, compute_initial_pose, interpolate_approach_angle, local_search_sequence,
    plan_motion, ApproachCalibration, CalibrationSample, PlanFailure, PlannerParams, SearchParams,
};
use berryreach_core::scene::{FoliageShape, FoliageTag, RigConfig, Scene};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

proptest! {
    #[test]
    fn approach_plane_contains_the_line_of_sight(
        cam in prop::array::uniform3(-1.0f64..1.0),
        berry in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let (cam, berry) = (v3(cam), v3(berry));
        let d = berry - cam;
        prop_assume!(Vec3::new(d.x, d.y, 0.0).norm() > 1e-3);
        let plane = approach_plane(&cam, &berry).unwrap();
        let n = plane.normal();
        prop_assert!((n.norm() - 1.0).abs() <= 1e-12);
        prop_assert!(n.dot(&d).abs() <= 1e-12);
        prop_assert!(n.z.abs() <= 1e-12);
    }

    #[test]
    fn zero_noise_pose_aims_through_the_berry(
        x in 0.15f64..0.45, y in -0.2f64..0.2, z in 0.0f64..0.3, offset in 0.04f64..0.2,
    ) {
        let model = ArmModel::default();
        let cal = ApproachCalibration::default_for(&model);
        let camera = RigConfig::default().camera_position;
        let berry = Vec3::new(x, y, z);
        let c = compute_initial_pose(&cal, &camera, &berry, offset).unwrap();
        let to_berry = berry - c.pose.position;
        let along = to_berry.dot(&c.pose.z_axis());
        prop_assert!((to_berry - c.pose.z_axis() * along).norm() <= 1e-9);
        prop_assert!((along - offset).abs() <= 1e-9);
    }
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn shoelace(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| pts[i][0] * pts[(i + 1) % n][1] - pts[(i + 1) % n][0] * pts[i][1]).sum::<f64>() / 2.0
}

/// Samples scattered in the radius/height plane, angles from `field`.
fn scattered(seed: u64, field: impl Fn(f64, f64) -> f64) -> ApproachCalibration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..14)
        .map(|_| {
            let (r, z) = (rng.random_range(0.1..0.45), rng.random_range(-0.1..0.35));
            CalibrationSample { point: Vec3::new(r, 0.0, z), angle: field(r, z) }
        })
        .collect();
    ApproachCalibration::new(Vec3::zeros(), samples).unwrap()
}

/// Query points strictly inside the hull, as world points at a random azimuth.
fn interior_queries(cal: &ApproachCalibration, rng: &mut impl Rng, n: usize) -> Vec<([f64; 2], Vec3)> {
    let coords: Vec<[f64; 2]> = cal.samples().iter().map(|s| ApproachCalibration::coords_of(&cal.pivot(), &s.point)).collect();
    let hull: Vec<[f64; 2]> = cal.hull().iter().map(|&i| coords[i]).collect();
    let mut out = Vec::new();
    while out.len() < n {
        let p = [rng.random_range(0.1..0.45), rng.random_range(-0.1..0.35)];
        let inside = (0..hull.len()).all(|k| cross2(hull[k], hull[(k + 1) % hull.len()], p) > 1e-9);
        if inside {
            let az: f64 = rng.random_range(-1.0..1.0);
            out.push((p, Vec3::new(p[0] * az.cos(), p[0] * az.sin(), p[1])));
        }
    }
    out
}

#[test]
fn triangulation_tiles_the_hull() {
    for seed in 0..20 {
        let cal = scattered(seed, |_, _| 0.0);
        let coords: Vec<[f64; 2]> = cal.samples().iter().map(|s| ApproachCalibration::coords_of(&cal.pivot(), &s.point)).collect();
        let hull: Vec<[f64; 2]> = cal.hull().iter().map(|&i| coords[i]).collect();
        let tri_area: f64 = cal.triangles().iter().map(|t| cross2(coords[t[0]], coords[t[1]], coords[t[2]]).abs() / 2.0).sum();
        assert!((tri_area - shoelace(&hull)).abs() <= 1e-12, "seed {seed}");
        assert!(shoelace(&hull) > 0.0, "hull is counter-clockwise");
    }
}

#[test]
fn interpolation_matches_barycentric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..20 {
        let cal = scattered(seed, |r, z| (r * 13.0).sin() * 0.5 + z);
        let coords: Vec<[f64; 2]> = cal.samples().iter().map(|s| ApproachCalibration::coords_of(&cal.pivot(), &s.point)).collect();
        for (p, world) in interior_queries(&cal, &mut rng, 50) {
            let got = interpolate_approach_angle(&cal, &world).unwrap();
            let want = cal.triangles().iter().find_map(|t| {
                let (a, b, c) = (coords[t[0]], coords[t[1]], coords[t[2]]);
                let area = cross2(a, b, c);
                let l = [cross2(p, b, c) / area, cross2(a, p, c) / area, cross2(a, b, p) / area];
                l.iter()
                    .all(|&x| x >= 0.0)
                    .then(|| (0..3).map(|k| l[k] * cal.samples()[t[k]].angle).sum::<f64>())
            });
            assert!((got - want.unwrap()).abs() <= 1e-12, "{got} vs {want:?}");
        }
    }
}

#[test]
fn linear_fields_are_reproduced() {
    let field = |r: f64, z: f64| 0.8 * r - 1.1 * z + 0.2;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..20 {
        let cal = scattered(seed, field);
        for (p, world) in interior_queries(&cal, &mut rng, 50) {
            let got = interpolate_approach_angle(&cal, &world).unwrap();
            assert!((got - field(p[0], p[1])).abs() <= 1e-12);
        }
    }
}

#[test]
fn constant_thirty_degree_calibration_matches_trig() {
    let a = 30f64.to_radians();
    let samples = [(0.1, -0.2), (0.6, -0.2), (0.6, 0.5), (0.1, 0.5)]
        .iter()
        .map(|&(r, z)| CalibrationSample { point: Vec3::new(r, 0.0, z), angle: a })
        .collect();
    let cal = ApproachCalibration::new(Vec3::zeros(), samples).unwrap();
    let camera = Vec3::new(-0.1, 0.0, 0.15);
    let berry = Vec3::new(0.3, 0.1, 0.1);
    let offset = 0.1;
    let c = compute_initial_pose(&cal, &camera, &berry, offset).unwrap();
    assert!(!c.clamped);
    let (dx, dy) = (berry.x - camera.x, berry.y - camera.y);
    let h = (dx * dx + dy * dy).sqrt();
    let want = Vec3::new(
        berry.x - offset * a.cos() * dx / h,
        berry.y - offset * a.cos() * dy / h,
        berry.z - offset * a.sin(),
    );
    assert!((c.pose.position - want).norm() <= 1e-12, "{:?}", c.pose.position);
}

#[test]
fn search_sequence_is_complete_and_distinct() {
    let model = ArmModel::default();
    let cal = ApproachCalibration::default_for(&model);
    let camera = RigConfig::default().camera_position;
    let berry = Vec3::new(0.3, 0.05, 0.12);
    for steps in [1, 2] {
        let params = SearchParams { steps_per_side: steps, ..SearchParams::default() };
        let initial = compute_initial_pose(&cal, &camera, &berry, 0.08).unwrap();
        let seq = local_search_sequence(&initial, &params).unwrap();
        let levels = 1 + ((params.max_offset - 0.08) / params.offset_increment + 1e-9).floor() as usize;
        assert_eq!(seq.len(), levels * (1 + 4 * steps as usize));
        assert_eq!(seq[0].pose, initial.pose);
        for (i, c) in seq.iter().enumerate() {
            assert_eq!(c.search_index, i);
            let same_level_origin = &seq[i - i % (1 + 4 * steps as usize)];
            assert!((c.pose.position - same_level_origin.pose.position).norm() <= 1e-12);
            for d in &seq[..i] {
                let (dp, dr) = c.pose.distance_to(&d.pose);
                assert!(dp > 1e-9 || dr > 1e-9, "{i} repeats {}", d.search_index);
            }
        }
    }
}

fn reachable_target(model: &ArmModel, rng: &mut impl Rng) -> JointConfig {
    let mut q = model.home;
    for i in 0..JOINT_COUNT {
        q.angles[i] += rng.random_range(-0.4..0.4);
    }
    model.clamp_to_limits(&q)
}

#[test]
fn planned_paths_are_clear_and_fine_grained() {
    let model = ArmModel::default();
    let scene = Scene::empty(&RigConfig::default());
    let params = PlannerParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut planned = 0;
    for _ in 0..40 {
        let q_goal = reachable_target(&model, &mut rng);
        if !check_collision(&model, &scene, &q_goal, &params.collision).is_empty() {
            continue;
        }
        let target = model.forward_kinematics(&q_goal);
        let plan = plan_motion(&model, &scene, &model.home, &target, &params).expect("clear goal plans");
        planned += 1;
        assert_eq!(plan.trajectory[0], model.home);
        for w in plan.trajectory.windows(2) {
            assert!(w[0].max_abs_diff(&w[1]) <= params.max_joint_step + 1e-12);
        }
        for q in &plan.trajectory {
            assert!(check_collision(&model, &scene, q, &params.collision).is_empty());
        }
        let (dp, dr) = model.forward_kinematics(&plan.goal()).distance_to(&target);
        assert!(dp <= params.ik.position_tolerance && dr <= params.ik.orientation_tolerance);
    }
    assert!(planned >= 20, "only {planned} clear goals sampled");
}

#[test]
fn wall_in_the_way_is_predicted() {
    let model = ArmModel::default();
    let mut scene = Scene::empty(&RigConfig::default());
    let params = PlannerParams::default();
    let target = model.forward_kinematics(&model.home);
    let goal = berryreach_core::math::Pose::new(target.position + Vec3::new(0.1, 0.0, 0.0), target.orientation);
    scene.push_obstacle(
        FoliageShape::Disk(Disk::new(Vec3::new(target.position.x + 0.05, 0.0, 0.0), Vec3::x(), 50.0)),
        FoliageTag::Leaf,
    );
    match plan_motion(&model, &scene, &model.home, &goal, &params) {
        Err(PlanFailure::CollisionPredicted { .. }) => {}
        other => panic!("expected a predicted collision, got {other:?}"),
    }
}

