//! Scene files and JSONL trial logs.
//!
//! A scene file is JSON: `{"schema_version": 1, "scenario": "baseline" | null,
//! "scene": {...}}`. Positions are meters in the right-handed z-up world frame
//! with the arm base at the origin; vectors are `[x, y, z]` arrays and
//! rotations are `[i, j, k, w]` unit quaternions.
//!
//! A trial log has one JSON object per line, one line per control tick or
//! state event:
//!
//! | field    | meaning                                          |
//! |----------|--------------------------------------------------|
//! | schema   | log schema version                               |
//! | tick     | servo ticks elapsed                              |
//! | time_s   | simulated seconds since the first scan           |
//! | state    | `{"state": name}` or `{"state": "failed", "failure": mode}` |
//! | event    | free-text note, optional                         |
//! | bbox     | `[u_min, v_min, u_max, v_max]` px, optional      |
//! | error_px | `[e_u, e_v]` centering error, optional           |
//! | twist    | world twist `[vx, vy, vz, wx, wy, wz]` at the tool point |
//! | q        | joint angles, radians                            |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use berryreach_core::pipeline::LogRecord;
use berryreach_core::scene::Scene;
use serde::{Deserialize, Serialize};

use crate::error::AppError;

pub const SCENE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub schema_version: u32,
    pub scenario: Option<String>,
    pub scene: Scene,
}

pub fn scene_to_json(scene: &Scene, scenario: Option<&str>) -> String {
    let file = SceneFile {
        schema_version: SCENE_SCHEMA_VERSION,
        scenario: scenario.map(str::to_owned),
        scene: scene.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("scene serializes");
    s.push('\n');
    s
}

pub fn scene_from_json(text: &str) -> Result<SceneFile, AppError> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| AppError::config(format!("scene: {e}")))?;
    match v.get("schema_version").and_then(|s| s.as_u64()) {
        Some(n) if n == SCENE_SCHEMA_VERSION as u64 => {}
        other => {
            return Err(AppError::Schema(format!(
                "scene schema_version {other:?}, expected {SCENE_SCHEMA_VERSION}"
            )))
        }
    }
    let file: SceneFile = serde_json::from_value(v).map_err(|e| AppError::config(format!("scene: {e}")))?;
    if !file.scene.is_finite() {
        return Err(AppError::config("scene has non-finite or degenerate geometry"));
    }
    Ok(file)
}

pub fn write_scene(path: &Path, scene: &Scene, scenario: Option<&str>) -> Result<(), AppError> {
    write_text(path, &scene_to_json(scene, scenario))
}

pub fn read_scene(path: &Path) -> Result<SceneFile, AppError> {
    scene_from_json(&read_text(path)?)
}

pub fn write_log(path: &Path, log: &[LogRecord]) -> Result<(), AppError> {
    let io = |e| AppError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for rec in log {
        serde_json::to_writer(&mut w, rec).map_err(|e| AppError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_text(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), AppError> {
    std::fs::write(path, text).map_err(|e| AppError::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(path).map_err(|e| AppError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use berryreach_core::scene::{generate_lab_scene, LabSceneConfig};

    #[test]
    fn scene_survives_json() {
        let scene = generate_lab_scene(&LabSceneConfig::default(), 11).unwrap();
        let back = scene_from_json(&scene_to_json(&scene, Some("baseline"))).unwrap();
        assert_eq!(back.scene, scene);
        assert_eq!(back.scenario.as_deref(), Some("baseline"));
    }

    #[test]
    fn scene_schema_is_checked() {
        let scene = generate_lab_scene(&LabSceneConfig::default(), 11).unwrap();
        let text = scene_to_json(&scene, None).replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
        assert!(matches!(scene_from_json(&text), Err(AppError::Schema(_))));
    }
}
