use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum KinematicsError {
    #[error("no inverse-kinematics solution within tolerance and joint limits")]
    NoSolution,
    #[error("requested tool motion blocked by joint limits or singularity")]
    WorkspaceLimit,
    #[error("time step must be positive")]
    InvalidTimeStep,
    #[error("invalid arm model: {0}")]
    InvalidModel(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(alloc::string::String),
    #[error("could not place {what} after {attempts} attempts; constraints too tight")]
    Infeasible { what: &'static str, attempts: usize },
}

impl ConfigError {
    pub fn invalid(msg: impl Into<alloc::string::String>) -> Self {
        Self::Invalid(msg.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SensingError {
    #[error("point lies behind the camera")]
    BehindCamera,
    #[error("object not visible in the image")]
    NotVisible,
    #[error("no depth return for this pixel")]
    NoReturn,
    #[error("camera role does not provide depth")]
    NoDepthSensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PlanningError {
    #[error("camera-to-berry vector is vertical; approach plane undefined")]
    DegenerateGeometry,
    #[error("query lies outside the calibration hull")]
    OutOfHull,
    #[error("standoff offset below the gripper length")]
    OffsetTooSmall,
    #[error("invalid calibration: {0}")]
    InvalidCalibration(&'static str),
    #[error("invalid search parameters: {0}")]
    InvalidSearch(&'static str),
    #[error("local search exhausted without a usable candidate")]
    SearchExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ServoError {
    #[error("stopping threshold gives a distance inside the berry")]
    InvalidThreshold,
    #[error("invalid servo parameters: {0}")]
    InvalidParams(&'static str),
}
