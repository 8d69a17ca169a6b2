//! Image-space PID centering and the servo part of the reaching state machine.

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::ServoError;
use crate::harness::FailureMode;
use crate::math::Vec3;
use crate::sensing::{select_target, CameraIntrinsics, Detection};

pub const CONTROL_RATE_HZ: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", content = "failure", rename_all = "snake_case")]
pub enum ServoState {
    ScanBase,
    ComputePose,
    MoveToPose,
    LocalSearch,
    Center,
    Approach,
    CreepForward,
    Reached,
    Failed(FailureMode),
}

impl ServoState {
    pub fn is_terminal(&self) -> bool {
        matches!(self, ServoState::Reached | ServoState::Failed(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ServoState::ScanBase => "ScanBase",
            ServoState::ComputePose => "ComputePose",
            ServoState::MoveToPose => "MoveToPose",
            ServoState::LocalSearch => "LocalSearch",
            ServoState::Center => "Center",
            ServoState::Approach => "Approach",
            ServoState::CreepForward => "CreepForward",
            ServoState::Reached => "Reached",
            ServoState::Failed(_) => "Failed",
        }
    }

    /// Whether `self -> next` is an edge of the state graph. Staying put is
    /// always allowed for non-terminal states.
    pub fn can_transition(&self, next: &ServoState) -> bool {
        use ServoState::*;
        if self.is_terminal() {
            return false;
        }
        if core::mem::discriminant(self) == core::mem::discriminant(next) {
            return true;
        }
        if matches!(next, Failed(_)) {
            return true;
        }
        matches!(
            (self, next),
            (ScanBase, ComputePose)
                | (ComputePose, MoveToPose)
                | (MoveToPose, LocalSearch)
                | (MoveToPose, Center)
                | (LocalSearch, MoveToPose)
                | (Center, Approach)
                | (Center, CreepForward)
                | (Center, Reached)
                | (Approach, Center)
                | (Approach, CreepForward)
                | (Approach, Reached)
                | (CreepForward, Center)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 4e-4,
            ki: 5e-5,
            kd: 1e-5,
        }
    }
}

/// Two-axis PID over pixel error with a clamped integral accumulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    pub gains: PidGains,
    /// Accumulated error, px·s, each axis within `±integral_limit`.
    pub integral: [f64; 2],
    pub previous_error: Option<[f64; 2]>,
    pub integral_limit: f64,
    pub dt: f64,
}

impl PidState {
    pub fn new(gains: PidGains, integral_limit: f64, dt: f64) -> Self {
        Self {
            gains,
            integral: [0.0; 2],
            previous_error: None,
            integral_limit,
            dt,
        }
    }

    pub fn reset(&self) -> Self {
        Self::new(self.gains, self.integral_limit, self.dt)
    }
}

/// One control step. The derivative term is zero on the first step.
pub fn pid_step(state: &PidState, error: [f64; 2]) -> ([f64; 2], PidState) {
    let mut next = *state;
    let mut out = [0.0; 2];
    for i in 0..2 {
        next.integral[i] = (state.integral[i] + error[i] * state.dt).clamp(-state.integral_limit, state.integral_limit);
        let derivative = match state.previous_error {
            Some(p) => (error[i] - p[i]) / state.dt,
            None => 0.0,
        };
        out[i] = state.gains.kp * error[i] + state.gains.ki * next.integral[i] + state.gains.kd * derivative;
    }
    next.previous_error = Some(error);
    (out, next)
}

/// Bounding-box center minus principal point, px.
pub fn centering_error(detection: &Detection, intrinsics: &CameraIntrinsics) -> [f64; 2] {
    let (u, v) = detection.bbox.center();
    [u - intrinsics.cx, v - intrinsics.cy]
}

/// Distance at which an on-axis berry's box spans `tau` of the image width.
pub fn stopping_distance(tau: f64, intrinsics: &CameraIntrinsics, radius: f64) -> Result<f64, ServoError> {
    if !(tau > 0.0 && tau < 1.0) || !(radius > 0.0) {
        return Err(ServoError::InvalidThreshold);
    }
    let half = tau * intrinsics.width as f64 / 2.0;
    let k = intrinsics.fx * radius / half;
    let d = (radius * radius + k * k).sqrt();
    if d < radius {
        return Err(ServoError::InvalidThreshold);
    }
    Ok(d)
}

/// Threshold whose stopping distance is `distance`.
pub fn threshold_for_distance(distance: f64, intrinsics: &CameraIntrinsics, radius: f64) -> Result<f64, ServoError> {
    if !(distance > radius) {
        return Err(ServoError::InvalidThreshold);
    }
    let half = intrinsics.fx * radius / (distance * distance - radius * radius).sqrt();
    let tau = 2.0 * half / intrinsics.width as f64;
    if tau >= 1.0 {
        return Err(ServoError::InvalidThreshold);
    }
    Ok(tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServoParams {
    pub dead_band_px: f64,
    /// Box width over image width at which the berry counts as reached.
    pub tau: f64,
    pub approach_speed: f64,
    pub creep_speed: f64,
    pub occlusion_timeout_ticks: u32,
    pub settle_ticks: u32,
    pub gains: PidGains,
    /// Integral accumulator clamp, px·s.
    pub integral_limit: f64,
    pub dt: f64,
    /// Hard cap on servo ticks per trial.
    pub max_ticks: u32,
    /// Once locked on, detections farther than this from the last tracked
    /// box center are ignored, px.
    pub track_gate_px: f64,
}

impl Default for ServoParams {
    fn default() -> Self {
        let gains = PidGains::default();
        let tau = threshold_for_distance(0.035, &CameraIntrinsics::tip_default(), 0.015).expect("valid default");
        Self {
            dead_band_px: 12.0,
            tau,
            approach_speed: 0.02,
            creep_speed: 0.005,
            occlusion_timeout_ticks: 60,
            settle_ticks: 5,
            gains,
            // caps the integral contribution at 0.05 m/s
            integral_limit: 0.05 / gains.ki,
            dt: 1.0 / CONTROL_RATE_HZ,
            max_ticks: 1800,
            track_gate_px: 80.0,
        }
    }
}

impl ServoParams {
    pub fn validate(&self, intrinsics: &CameraIntrinsics) -> Result<(), ServoError> {
        if !(self.dead_band_px > 0.0 && self.dead_band_px < intrinsics.cx.min(intrinsics.cy)) {
            return Err(ServoError::InvalidParams("dead band must be positive and inside the image"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(ServoError::InvalidParams("tau must lie in (0, 1)"));
        }
        if !(self.creep_speed > 0.0 && self.creep_speed < self.approach_speed) {
            return Err(ServoError::InvalidParams("creep speed must be positive and below approach speed"));
        }
        if !(self.track_gate_px > 0.0) {
            return Err(ServoError::InvalidParams("track gate must be positive"));
        }
        if !(self.dt > 0.0) || !(self.integral_limit >= 0.0) {
            return Err(ServoError::InvalidParams("dt and integral limit must be positive"));
        }
        Ok(())
    }

    pub fn pid(&self) -> PidState {
        PidState::new(self.gains, self.integral_limit, self.dt)
    }
}

/// Mutable servo bookkeeping carried between ticks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServoContext {
    pub state: ServoState,
    pub pid: PidState,
    pub settled: u32,
    pub misses: u32,
    /// Box center of the berry being tracked, px.
    pub track: Option<(f64, f64)>,
}

impl ServoContext {
    pub fn new(params: &ServoParams) -> Self {
        Self {
            state: ServoState::Center,
            pid: params.pid(),
            settled: 0,
            misses: 0,
            track: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServoTick {
    /// Commanded tool velocity in the tool frame, m/s.
    pub linear: Vec3,
    pub context: ServoContext,
    pub target: Option<Detection>,
    pub error: Option<[f64; 2]>,
}

fn norm2(e: [f64; 2]) -> f64 {
    (e[0] * e[0] + e[1] * e[1]).sqrt()
}

/// One 30 Hz step of the Center / Approach / CreepForward loop.
///
/// The lateral command moves the camera toward the berry (tool +x for a
/// berry right of center, +y below), which drives the image error toward zero.
pub fn servo_tick(
    ctx: &ServoContext,
    detections: &[Detection],
    intrinsics: &CameraIntrinsics,
    params: &ServoParams,
) -> ServoTick {
    use ServoState::*;
    let mut next = *ctx;
    let target = match ctx.track {
        None => select_target(detections, intrinsics.center()),
        Some(c) => select_target(detections, c).filter(|d| {
            let (u, v) = d.bbox.center();
            norm2([u - c.0, v - c.1]) <= params.track_gate_px
        }),
    };
    let error = target.map(|d| centering_error(&d, intrinsics));
    let idle = |next: ServoContext| ServoTick {
        linear: Vec3::zeros(),
        context: next,
        target,
        error,
    };
    if !matches!(ctx.state, Center | Approach | CreepForward) {
        return idle(next);
    }
    let (Some(det), Some(e)) = (target, error) else {
        // a dropped frame says nothing about centering, so `settled` survives it
        next.misses = ctx.misses + 1;
        if next.misses >= params.occlusion_timeout_ticks {
            next.state = Failed(FailureMode::TargetOcclusion);
            return idle(next);
        }
        next.state = CreepForward;
        return ServoTick {
            linear: Vec3::new(0.0, 0.0, params.creep_speed),
            context: next,
            target,
            error,
        };
    };
    next.misses = 0;
    next.track = Some(det.bbox.center());
    let inside = norm2(e) <= params.dead_band_px;
    let filled = det.bbox.width() / intrinsics.width as f64 >= params.tau;
    match ctx.state {
        CreepForward => {
            next.state = Center;
            next.pid = ctx.pid.reset();
            idle(next)
        }
        Center => {
            if inside {
                if filled {
                    next.state = Reached;
                    return idle(next);
                }
                next.settled = ctx.settled + 1;
                if next.settled >= params.settle_ticks {
                    next.state = Approach;
                    return idle(next);
                }
            } else {
                next.settled = 0;
            }
            // keep centering while settling so the approach starts near zero error
            let (cmd, pid) = pid_step(&ctx.pid, e);
            next.pid = pid;
            ServoTick {
                linear: Vec3::new(cmd[0], cmd[1], 0.0),
                context: next,
                target,
                error,
            }
        }
        Approach => {
            if !inside {
                next.state = Center;
                next.pid = ctx.pid.reset();
                next.settled = 0;
                return idle(next);
            }
            if filled {
                next.state = Reached;
                return idle(next);
            }
            ServoTick {
                linear: Vec3::new(0.0, 0.0, params.approach_speed),
                context: next,
                target,
                error,
            }
        }
        _ => idle(next),
    }
}
