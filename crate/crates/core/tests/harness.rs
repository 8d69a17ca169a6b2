use berryreach_core::geometry::{Disk, Sphere};
use berryreach_core::harness::{
    classify_failure, run_trial, summarize, ExperimentConfig, FailureMode, ScenarioKind, Trace, TrialResult,
};
use berryreach_core::kinematics::ArmModel;
use berryreach_core::math::Vec3;
use berryreach_core::pipeline::{distal_depth_baseline, run_state_machine, DistalDepthParams, PipelineConfig, TrialRngs};
use berryreach_core::planning::ApproachCalibration;
use berryreach_core::scene::{FoliageShape, FoliageTag, PlacementClass, RigConfig, Scene};
use berryreach_core::sensing::{DepthNoiseModel, DetectorParams};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn results(kind: ScenarioKind, n: usize) -> Vec<TrialResult> {
    let cfg = ExperimentConfig::new(kind, n, 77);
    (0..n).map(|i| run_trial(&cfg, i).unwrap().result).collect()
}

#[test]
fn failure_histogram_accounts_for_every_trial() {
    for kind in [ScenarioKind::Baseline, ScenarioKind::HangingVine, ScenarioKind::DepthOnly] {
        let r = results(kind, 40);
        let s = summarize(kind, &r);
        assert_eq!(s.n, 40);
        assert_eq!(s.successes + s.failures.values().sum::<usize>(), s.n);
        assert_eq!(s.success_rate_pct, 100.0 * s.successes as f64 / s.n as f64);
        for x in &r {
            assert_eq!(x.success, x.failure.is_none());
        }
    }
}

#[test]
fn summary_ignores_arrival_order() {
    let r = results(ScenarioKind::Lighting13x, 30);
    let want = summarize(ScenarioKind::Lighting13x, &r);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let mut shuffled = r.clone();
        shuffled.shuffle(&mut rng);
        assert_eq!(summarize(ScenarioKind::Lighting13x, &shuffled), want);
    }
}

fn arb_trace() -> impl Strategy<Value = Trace> {
    (
        any::<bool>(),
        any::<[bool; 5]>(),
        prop::option::of(0u32..3),
        prop::option::of(0u32..3),
    )
        .prop_map(|(collision, f, reached_berry, foreign)| Trace {
            target: 1,
            collision: collision.then(|| "obstacle 0".to_string()),
            occlusion_timeout: f[0],
            workspace_limit: f[1],
            planning_failure: f[2],
            stalled: f[3],
            target_detected: true,
            reached: f[4],
            reached_berry,
            foreign_object: foreign,
        })
}

proptest! {
    #[test]
    fn success_is_exactly_a_clean_reach(t in arb_trace()) {
        let clean = t.collision.is_none()
            && !t.occlusion_timeout
            && !t.workspace_limit
            && !t.planning_failure
            && t.reached
            && t.reached_berry == Some(t.target)
            && t.foreign_object.is_none();
        prop_assert_eq!(t.is_success(), clean);
    }

    #[test]
    fn collision_outranks_everything(t in arb_trace()) {
        let mut t = t;
        t.collision = Some("stem 2".into());
        prop_assert_eq!(classify_failure(&t), FailureMode::EnvironmentCollision);
    }
}

fn single_berry(center: Vec3) -> (Scene, u32) {
    let mut s = Scene::empty(&RigConfig::default());
    let id = s.push_berry(center, 0.015, PlacementClass::Periphery);
    (s, id)
}

fn exact_config() -> PipelineConfig {
    PipelineConfig {
        detector: DetectorParams::ideal(),
        depth_noise: DepthNoiseModel::exact(),
        leaf_brush_probability: 0.0,
        ..PipelineConfig::default()
    }
}

#[test]
fn foliage_in_the_capture_volume_is_flagged() {
    let model = ArmModel::default();
    let cal = ApproachCalibration::default_for(&model);
    let cfg = exact_config();
    let center = Vec3::new(0.3, 0.02, 0.12);
    let (clear, id) = single_berry(center);
    let run = run_state_machine(&clear, &model, &cal, &cfg, id, &mut TrialRngs::from_trial_seed(1));
    assert!(run.trace.is_success(), "{:?}", run.trace);
    let dir = run.final_tool.z_axis();

    let mut s = clear.clone();
    s.push_obstacle(FoliageShape::Disk(Disk::new(center + dir * 0.01, dir, 0.03)), FoliageTag::Leaf);
    let run = run_state_machine(&s, &model, &cal, &cfg, id, &mut TrialRngs::from_trial_seed(1));
    assert_eq!(classify_failure(&run.trace), FailureMode::ForeignObjectInGrip);
    let capture = Sphere::new(
        run.final_tool.position + run.final_tool.z_axis() * cfg.stop_distance(),
        cfg.foreign_object_radius,
    );
    assert!(s.obstacles[0].distance_to_sphere(&capture) < 0.0);

    // the same leaf well behind the berry stays out of the grip
    let mut s = clear.clone();
    s.push_obstacle(FoliageShape::Disk(Disk::new(center + dir * 0.08, dir, 0.03)), FoliageTag::Leaf);
    let run = run_state_machine(&s, &model, &cal, &cfg, id, &mut TrialRngs::from_trial_seed(1));
    assert!(run.trace.is_success(), "{:?}", run.trace);
}

#[test]
fn distal_and_collocated_end_at_the_same_place_without_foliage() {
    let model = ArmModel::default();
    let cal = ApproachCalibration::default_for(&model);
    let cfg = exact_config();
    let distal = DistalDepthParams { depth_noise: DepthNoiseModel::exact(), ..DistalDepthParams::default() };
    let mut worst: f64 = 0.0;
    for center in [Vec3::new(0.3, 0.02, 0.12), Vec3::new(0.28, -0.08, 0.08), Vec3::new(0.34, 0.1, 0.16)] {
        let (s, id) = single_berry(center);
        let a = run_state_machine(&s, &model, &cal, &cfg, id, &mut TrialRngs::from_trial_seed(2));
        let b = distal_depth_baseline(&s, &model, &cal, &cfg, &distal, id, &mut TrialRngs::from_trial_seed(2));
        assert!(a.trace.is_success() && b.trace.is_success(), "{:?} {:?}", a.trace, b.trace);
        let capture = |t: &berryreach_core::math::Pose| t.position + t.z_axis() * cfg.stop_distance();
        worst = worst.max((capture(&a.final_tool) - capture(&b.final_tool)).norm());
    }
    assert!(worst <= 1e-3, "capture points differ by {worst}");
}
