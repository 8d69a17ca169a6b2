//! Scenario bundles, per-trial seeding, failure classification and summary
//! statistics. File output and parallel execution live in the std crate.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::kinematics::ArmModel;
use crate::pipeline::{
    depth_only_baseline, distal_depth_baseline, run_state_machine, DepthOnlyParams, DistalDepthParams, LogRecord,
    PipelineConfig, TrialRngs,
};
use crate::planning::ApproachCalibration;
use crate::scene::{
    generate_hanging_vine_scene, generate_high_tunnel_scene, generate_lab_scene, LabSceneConfig, PlacementClass,
    Scene, TunnelSceneConfig, VineSceneConfig,
};
use crate::sensing::LightingCondition;
use crate::servoing::ServoState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    TargetOcclusion,
    EnvironmentCollision,
    WorkspaceLimit,
    PlanningFailure,
    DetectionFailure,
    ForeignObjectInGrip,
    WrongTarget,
}

impl FailureMode {
    pub const ALL: [FailureMode; 7] = [
        FailureMode::TargetOcclusion,
        FailureMode::EnvironmentCollision,
        FailureMode::WorkspaceLimit,
        FailureMode::PlanningFailure,
        FailureMode::DetectionFailure,
        FailureMode::ForeignObjectInGrip,
        FailureMode::WrongTarget,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FailureMode::TargetOcclusion => "target_occlusion",
            FailureMode::EnvironmentCollision => "environment_collision",
            FailureMode::WorkspaceLimit => "workspace_limit",
            FailureMode::PlanningFailure => "planning_failure",
            FailureMode::DetectionFailure => "detection_failure",
            FailureMode::ForeignObjectInGrip => "foreign_object_in_grip",
            FailureMode::WrongTarget => "wrong_target",
        }
    }
}

/// Highest first. Used when a trial shows several causes at once.
pub const FAILURE_PRECEDENCE: [FailureMode; 7] = [
    FailureMode::EnvironmentCollision,
    FailureMode::TargetOcclusion,
    FailureMode::WorkspaceLimit,
    FailureMode::PlanningFailure,
    FailureMode::WrongTarget,
    FailureMode::ForeignObjectInGrip,
    FailureMode::DetectionFailure,
];

/// What happened during a trial, as far as scoring is concerned.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub target: u32,
    /// Object hit during execution, if any.
    pub collision: Option<String>,
    pub occlusion_timeout: bool,
    pub workspace_limit: bool,
    pub planning_failure: bool,
    /// The servo loop ran out of ticks without a verdict.
    pub stalled: bool,
    pub target_detected: bool,
    pub reached: bool,
    pub reached_berry: Option<u32>,
    /// Foliage inside the gripper capture volume at the end.
    pub foreign_object: Option<u32>,
}

impl Trace {
    pub fn new(target: u32) -> Self {
        Self {
            target,
            ..Self::default()
        }
    }

    fn has(&self, mode: FailureMode) -> bool {
        match mode {
            FailureMode::EnvironmentCollision => self.collision.is_some(),
            FailureMode::TargetOcclusion => self.occlusion_timeout,
            FailureMode::WorkspaceLimit => self.workspace_limit,
            FailureMode::PlanningFailure => self.planning_failure,
            FailureMode::WrongTarget => self.reached && self.reached_berry != Some(self.target),
            FailureMode::ForeignObjectInGrip => self.reached && self.foreign_object.is_some(),
            FailureMode::DetectionFailure => !self.reached,
        }
    }

    pub fn is_success(&self) -> bool {
        !FailureMode::ALL.iter().any(|m| self.has(*m))
    }
}

/// Failure mode of a trace under the default precedence. A trace with no
/// recorded cause falls through to `DetectionFailure`.
pub fn classify_failure(trace: &Trace) -> FailureMode {
    classify_failure_with(trace, &FAILURE_PRECEDENCE)
}

pub fn classify_failure_with(trace: &Trace, precedence: &[FailureMode]) -> FailureMode {
    precedence
        .iter()
        .copied()
        .find(|m| trace.has(*m))
        .unwrap_or(FailureMode::DetectionFailure)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    DepthOnly,
    Baseline,
    CorruptedDepth,
    Lighting13x,
    Lighting20x,
    HangingVine,
    DistalDepth,
    HighTunnel,
}

impl ScenarioKind {
    /// In table order.
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::DepthOnly,
        ScenarioKind::Baseline,
        ScenarioKind::CorruptedDepth,
        ScenarioKind::Lighting13x,
        ScenarioKind::Lighting20x,
        ScenarioKind::HangingVine,
        ScenarioKind::DistalDepth,
        ScenarioKind::HighTunnel,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::DepthOnly => "depth_only",
            ScenarioKind::Baseline => "baseline",
            ScenarioKind::CorruptedDepth => "corrupted_depth",
            ScenarioKind::Lighting13x => "lighting_13x",
            ScenarioKind::Lighting20x => "lighting_20x",
            ScenarioKind::HangingVine => "hanging_vine",
            ScenarioKind::DistalDepth => "distal_depth",
            ScenarioKind::HighTunnel => "high_tunnel",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ScenarioKind::DepthOnly => "Base Depth Camera Only",
            ScenarioKind::Baseline => "Base VS on Artificial Plant",
            ScenarioKind::CorruptedDepth => "+ Corrupted Depth",
            ScenarioKind::Lighting13x => "+ 13x Light Intensity",
            ScenarioKind::Lighting20x => "+ 20x Light Intensity",
            ScenarioKind::HangingVine => "Hanging Vine Environment",
            ScenarioKind::DistalDepth => "Distal Depth Camera",
            ScenarioKind::HighTunnel => "Outdoor High Tunnel",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SceneSpec {
    Lab(LabSceneConfig),
    HangingVine(VineSceneConfig),
    HighTunnel(TunnelSceneConfig),
}

impl SceneSpec {
    pub fn generate(&self, seed: u64) -> Result<Scene, ConfigError> {
        match self {
            SceneSpec::Lab(c) => generate_lab_scene(c, seed),
            SceneSpec::HangingVine(c) => generate_hanging_vine_scene(c, seed),
            SceneSpec::HighTunnel(c) => generate_high_tunnel_scene(c, seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineMode {
    /// Base detection, initial pose, local search, tip-camera servoing.
    Collocated,
    /// Open loop from the base camera estimate.
    DepthOnly,
    /// Offset depth camera on the last link, 4 cm waypoint, straight insertion.
    DistalDepth,
}

/// Every parameter a trial reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub mode: PipelineMode,
    pub scene: SceneSpec,
    pub arm: ArmModel,
    pub pipeline: PipelineConfig,
    pub depth_only: DepthOnlyParams,
    pub distal: DistalDepthParams,
    /// Custom boundary calibration; `None` uses the default for the arm.
    #[serde(default)]
    pub calibration: Option<ApproachCalibration>,
    pub failure_precedence: Vec<FailureMode>,
}

impl ScenarioParams {
    /// The parameter bundle for one table row: baseline values with only the
    /// row's own change applied.
    pub fn bundle(kind: ScenarioKind) -> Self {
        let mut p = ScenarioParams {
            mode: PipelineMode::Collocated,
            scene: SceneSpec::Lab(LabSceneConfig::default()),
            arm: ArmModel::default(),
            pipeline: PipelineConfig::default(),
            depth_only: DepthOnlyParams::default(),
            distal: DistalDepthParams::default(),
            calibration: None,
            failure_precedence: FAILURE_PRECEDENCE.to_vec(),
        };
        match kind {
            ScenarioKind::Baseline => {}
            ScenarioKind::DepthOnly => p.mode = PipelineMode::DepthOnly,
            ScenarioKind::CorruptedDepth => p.pipeline.depth_noise.sigma = 0.075,
            ScenarioKind::Lighting13x => p.pipeline.lighting = LightingCondition { multiplier: 13.0 },
            ScenarioKind::Lighting20x => p.pipeline.lighting = LightingCondition { multiplier: 20.0 },
            ScenarioKind::HangingVine => p.scene = SceneSpec::HangingVine(VineSceneConfig::default()),
            ScenarioKind::DistalDepth => p.mode = PipelineMode::DistalDepth,
            ScenarioKind::HighTunnel => p.scene = SceneSpec::HighTunnel(TunnelSceneConfig::default()),
        }
        p
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.arm
            .validate()
            .map_err(|e| ConfigError::invalid(format!("arm: {e}")))?;
        self.pipeline.validate()?;
        let mut seen = self.failure_precedence.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != FailureMode::ALL.len() || self.failure_precedence.len() != FailureMode::ALL.len() {
            return Err(ConfigError::invalid("failure_precedence must list each failure mode once"));
        }
        Ok(())
    }

    pub fn calibration(&self) -> ApproachCalibration {
        self.calibration
            .clone()
            .unwrap_or_else(|| ApproachCalibration::default_for(&self.arm))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    pub trials: usize,
    pub master_seed: u64,
    pub params: ScenarioParams,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioKind, trials: usize, master_seed: u64) -> Self {
        Self {
            scenario,
            trials,
            master_seed,
            params: ScenarioParams::bundle(scenario),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::invalid("trials must be at least 1"));
        }
        self.params.validate()
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index`. Depends only on the master seed and the index,
/// so scenarios sharing a master seed see the same scenes and noise draws.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ splitmix64(index as u64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Scene = 1,
    BaseDetect = 2,
    Depth = 3,
    Estimate = 4,
    TipDetect = 5,
    Brush = 6,
}

pub fn stream_seed(trial: u64, stream: Stream) -> u64 {
    splitmix64(trial ^ (stream as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_index: usize,
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub success: bool,
    /// Simulated time from the first scan to the terminal state, seconds.
    pub reach_time_s: f64,
    pub terminal_state: ServoState,
    pub failure: Option<FailureMode>,
    pub target_id: u32,
    pub target_class: PlacementClass,
    pub reached_id: Option<u32>,
    pub ticks: u64,
    /// Gripper capture point to target center at the end, meters.
    pub terminal_error_m: Option<f64>,
    pub collision_object: Option<String>,
    /// Per-tick log file, relative to the output directory.
    pub log_ref: String,
}

pub struct TrialOutcome {
    pub result: TrialResult,
    pub trace: Trace,
    pub log: Vec<LogRecord>,
}

/// Scene seen by trial `index` of an experiment.
pub fn trial_scene(config: &ExperimentConfig, index: usize) -> Result<Scene, ConfigError> {
    let seed = trial_seed(config.master_seed, index);
    config.params.scene.generate(stream_seed(seed, Stream::Scene))
}

/// Runs one trial of an experiment. Pure in `(config, index)`.
pub fn run_trial(config: &ExperimentConfig, index: usize) -> Result<TrialOutcome, ConfigError> {
    let scene = trial_scene(config, index)?;
    run_trial_in(config, index, &scene)
}

/// Runs trial `index` against a given scene instead of the generated one.
/// The target is `scene.berries[index % len]`.
pub fn run_trial_in(config: &ExperimentConfig, index: usize, scene: &Scene) -> Result<TrialOutcome, ConfigError> {
    let p = &config.params;
    if scene.berries.is_empty() {
        return Err(ConfigError::invalid("scene has no berries"));
    }
    let seed = trial_seed(config.master_seed, index);
    let target = scene.berries[index % scene.berries.len()];
    let mut rngs = TrialRngs::from_trial_seed(seed);
    let cal = p.calibration();
    let run = match p.mode {
        PipelineMode::Collocated => run_state_machine(scene, &p.arm, &cal, &p.pipeline, target.id, &mut rngs),
        PipelineMode::DepthOnly => depth_only_baseline(scene, &p.arm, &cal, &p.pipeline, &p.depth_only, target.id, &mut rngs),
        PipelineMode::DistalDepth => distal_depth_baseline(scene, &p.arm, &cal, &p.pipeline, &p.distal, target.id, &mut rngs),
    };
    let success = run.trace.is_success();
    let failure = (!success).then(|| classify_failure_with(&run.trace, &p.failure_precedence));
    let terminal_state = match failure {
        Some(m) => ServoState::Failed(m),
        None => ServoState::Reached,
    };
    let result = TrialResult {
        trial_index: index,
        scenario: config.scenario,
        seed,
        success,
        reach_time_s: run.time_s,
        terminal_state,
        failure,
        target_id: target.id,
        target_class: target.class,
        reached_id: run.trace.reached_berry,
        ticks: run.ticks,
        terminal_error_m: run.terminal_error,
        collision_object: run.trace.collision.clone(),
        log_ref: format!("trials/{}-{:05}.jsonl", config.scenario.name(), index),
    };
    Ok(TrialOutcome {
        result,
        trace: run.trace,
        log: run.log,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub scenario: ScenarioKind,
    pub n: usize,
    pub successes: usize,
    pub success_rate_pct: f64,
    /// Mean and sample standard deviation of reach time over successes.
    pub mean_time_s: Option<f64>,
    pub std_time_s: Option<f64>,
    pub failures: BTreeMap<FailureMode, usize>,
    pub under_canopy_collisions: usize,
    pub mean_terminal_error_m: Option<f64>,
}

impl ExperimentSummary {
    pub fn failure_count(&self, mode: FailureMode) -> usize {
        self.failures.get(&mode).copied().unwrap_or(0)
    }
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

/// Aggregates results in trial order, whatever order they arrive in.
pub fn summarize(scenario: ScenarioKind, results: &[TrialResult]) -> ExperimentSummary {
    let mut sorted: Vec<&TrialResult> = results.iter().collect();
    sorted.sort_by_key(|r| r.trial_index);
    let n = sorted.len();
    let successes = sorted.iter().filter(|r| r.success).count();
    let times: Vec<f64> = sorted.iter().filter(|r| r.success).map(|r| r.reach_time_s).collect();
    let (mean_time_s, std_time_s) = mean_std(&times);
    let errors: Vec<f64> = sorted.iter().filter_map(|r| r.terminal_error_m).collect();
    let (mean_terminal_error_m, _) = mean_std(&errors);
    let mut failures = BTreeMap::new();
    for r in &sorted {
        if let Some(m) = r.failure {
            *failures.entry(m).or_insert(0) += 1;
        }
    }
    let under_canopy_collisions = sorted
        .iter()
        .filter(|r| r.target_class == PlacementClass::UnderCanopy && r.failure == Some(FailureMode::EnvironmentCollision))
        .count();
    ExperimentSummary {
        scenario,
        n,
        successes,
        success_rate_pct: if n == 0 { 0.0 } else { 100.0 * successes as f64 / n as f64 },
        mean_time_s,
        std_time_s,
        failures,
        under_canopy_collisions,
        mean_terminal_error_m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collision_beats_occlusion() {
        let mut t = Trace::new(0);
        t.collision = Some("obstacle 3".into());
        t.occlusion_timeout = true;
        assert_eq!(classify_failure(&t), FailureMode::EnvironmentCollision);
    }

    #[test]
    fn never_detected_is_detection_failure() {
        let t = Trace::new(0);
        assert!(!t.is_success());
        assert_eq!(classify_failure(&t), FailureMode::DetectionFailure);
    }

    #[test]
    fn wrong_berry_reached() {
        let mut t = Trace::new(2);
        t.reached = true;
        t.reached_berry = Some(1);
        t.foreign_object = Some(4);
        assert_eq!(classify_failure(&t), FailureMode::WrongTarget);
        t.reached_berry = Some(2);
        assert_eq!(classify_failure(&t), FailureMode::ForeignObjectInGrip);
        t.foreign_object = None;
        assert!(t.is_success());
    }

    #[test]
    fn seeds_differ_per_trial_and_stream() {
        assert_ne!(trial_seed(1, 0), trial_seed(1, 1));
        assert_ne!(trial_seed(1, 0), trial_seed(2, 0));
        let s = trial_seed(7, 3);
        assert_ne!(stream_seed(s, Stream::Scene), stream_seed(s, Stream::Depth));
    }

    #[test]
    fn scenario_names_round_trip() {
        for k in ScenarioKind::ALL {
            assert_eq!(ScenarioKind::from_name(k.name()), Some(k));
        }
        assert_eq!(ScenarioKind::from_name("nope"), None);
    }
}
