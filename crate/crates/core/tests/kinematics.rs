use berryreach_core::kinematics::{
    cartesian_velocity_step, in_workspace, inverse_kinematics_multi, ArmModel, IkParams, JointConfig, VelocityLimits,
    JOINT_COUNT,
};
use berryreach_core::math::{Pose, Twist, Vec3};
use berryreach_core::planning::ApproachCalibration;
use nalgebra::{Matrix3, Rotation3, UnitQuaternion};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_q(model: &ArmModel, rng: &mut impl Rng) -> JointConfig {
    let mut a = [0.0; JOINT_COUNT];
    for (i, v) in a.iter_mut().enumerate() {
        let l = model.limits[i];
        *v = rng.random_range(l.min..l.max);
    }
    JointConfig::new(a)
}

fn skew(w: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Rigid transform as (R, p).
type Rt = (Matrix3<f64>, Vec3);

fn mul(a: &Rt, b: &Rt) -> Rt {
    (a.0 * b.0, a.0 * b.1 + a.1)
}

fn rt(p: &Pose) -> Rt {
    (p.orientation.to_rotation_matrix().into_inner(), p.position)
}

fn rpy_rt(offset: Vec3, r: [f64; 3]) -> Rt {
    (Rotation3::from_euler_angles(r[0], r[1], r[2]).into_inner(), offset)
}

/// exp of a unit revolute screw (w, v) through angle t.
fn screw_exp(w: &Vec3, v: &Vec3, t: f64) -> Rt {
    let k = skew(w);
    let r = Matrix3::identity() + k * t.sin() + k * k * (1.0 - t.cos());
    let g = Matrix3::identity() * t + k * (1.0 - t.cos()) + k * k * (t - t.sin());
    (r, g * v)
}

/// Product-of-exponentials forward kinematics: space-frame screws and the
/// home tool pose, both read off the chain at q = 0.
fn poe_fk(model: &ArmModel, q: &JointConfig) -> Rt {
    let mut t = rt(&model.base);
    let mut screws = Vec::new();
    for l in &model.links {
        t = mul(&t, &rpy_rt(l.offset, l.rotation));
        let w = (t.0 * l.axis).normalize();
        screws.push((w, -w.cross(&t.1)));
    }
    let tool = mul(&t, &rt(&model.distal.tool_pose()));
    let mut out = (Matrix3::identity(), Vec3::zeros());
    for (i, (w, v)) in screws.iter().enumerate() {
        out = mul(&out, &screw_exp(w, v, q.angles[i]));
    }
    mul(&out, &tool)
}

#[test]
fn forward_kinematics_matches_product_of_exponentials() {
    let model = ArmModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut qs = vec![JointConfig::new([0.0; JOINT_COUNT]), model.home];
    qs.extend((0..100).map(|_| random_q(&model, &mut rng)));
    for q in &qs {
        let (r, p) = poe_fk(&model, q);
        let fk = model.forward_kinematics(q);
        assert!((fk.position - p).norm() <= 1e-9, "{q:?}");
        let dr = UnitQuaternion::from_matrix(&r).angle_to(&fk.orientation);
        assert!(dr <= 1e-9, "{q:?}: {dr}");
    }
}

#[test]
fn forward_kinematics_is_bit_deterministic() {
    let model = ArmModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let q = random_q(&model, &mut rng);
        let a = model.forward_kinematics(&q);
        let b = model.clone().forward_kinematics(&q);
        assert_eq!(a.position.as_slice(), b.position.as_slice());
        assert_eq!(a.orientation.coords.as_slice(), b.orientation.coords.as_slice());
    }
}

fn well_conditioned(model: &ArmModel, rng: &mut impl Rng) -> JointConfig {
    loop {
        let q = random_q(model, rng);
        let clear = (0..JOINT_COUNT).all(|i| {
            let l = model.limits[i];
            q.angles[i] - l.min > 0.2 && l.max - q.angles[i] > 0.2
        });
        if clear && model.jacobian(&q).singular_values().min() > 0.08 {
            return q;
        }
    }
}

#[test]
fn small_translation_step_is_first_order_accurate() {
    let model = ArmModel::default();
    let limits = VelocityLimits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dt = 1.0 / 30.0;
    for _ in 0..100 {
        let q = well_conditioned(&model, &mut rng);
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            .normalize()
            * 0.02;
        let step = cartesian_velocity_step(&model, &q, &Twist::new(v, Vec3::zeros()), dt, &limits);
        let moved = model.forward_kinematics(&step.q).position - model.forward_kinematics(&q).position;
        assert!((moved - v * dt).norm() <= 1e-5, "{:e}", (moved - v * dt).norm());
    }
}

#[test]
fn resolved_rate_converges_monotonically() {
    let model = ArmModel::default();
    let limits = VelocityLimits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let dt = 1.0 / 30.0;
    for _ in 0..30 {
        let q0 = well_conditioned(&model, &mut rng);
        let q1 = {
            let mut a = q0;
            for x in a.angles.iter_mut() {
                *x += rng.random_range(-0.05..0.05);
            }
            model.clamp_to_limits(&a)
        };
        let goal = model.forward_kinematics(&q1).position;
        let mut q = q0;
        let mut errors = Vec::new();
        for _ in 0..300 {
            let err = goal - model.forward_kinematics(&q).position;
            errors.push(err.norm());
            if err.norm() < 1e-4 {
                break;
            }
            q = cartesian_velocity_step(&model, &q, &Twist::new(err * 2.0, Vec3::zeros()), dt, &limits).q;
        }
        assert!(*errors.last().unwrap() < 1e-4, "did not converge: {:?}", errors.last());
        for w in errors.windows(2).skip(5) {
            assert!(w[1] <= w[0] + 1e-12, "{errors:?}");
        }
    }
}

#[test]
fn composed_rotations_stay_normalized() {
    let step = Pose::new(Vec3::new(1e-4, 0.0, 0.0), UnitQuaternion::from_euler_angles(1e-3, 2e-3, -1.5e-3));
    let mut p = Pose::identity();
    for _ in 0..100_000 {
        p = p.compose(&step);
    }
    assert!((p.orientation.coords.norm() - 1.0).abs() <= 1e-9);
}

#[test]
fn calibration_points_are_in_the_workspace() {
    let model = ArmModel::default();
    let cal = ApproachCalibration::default_for(&model);
    let ik = IkParams::default();
    for s in cal.samples() {
        assert!(in_workspace(&model, &s.point, &ik), "{:?}", s.point);
    }
    assert!(!in_workspace(&model, &Vec3::new(2.0, 0.0, 0.0), &ik));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ik_round_trip(seed in any::<u64>()) {
        let model = ArmModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_q(&model, &mut rng);
        let target = model.forward_kinematics(&q);
        let ik = IkParams::default();
        let sol = inverse_kinematics_multi(&model, &target, &model.home, &ik);
        // from home the solver may land on another branch, but never outside tolerance
        if let Ok(sol) = sol {
            let (dp, dr) = model.forward_kinematics(&sol).distance_to(&target);
            prop_assert!(dp <= ik.position_tolerance && dr <= ik.orientation_tolerance);
            prop_assert!(model.within_limits(&sol));
        }
    }

    #[test]
    fn clamp_to_limits_is_idempotent(a in prop::array::uniform6(-10.0f64..10.0)) {
        let model = ArmModel::default();
        let once = model.clamp_to_limits(&JointConfig::new(a));
        prop_assert!(model.within_limits(&once));
        prop_assert_eq!(once, model.clamp_to_limits(&once));
    }
}
