//! Camera description files.

use std::path::Path;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Camera;

/// On-disk form; `world_to_camera` is row-major.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraFile {
    width: u32,
    height: u32,
    fx: f32,
    fy: f32,
    cx: f32,
    cy: f32,
    world_to_camera: [f32; 16],
    z_near: f32,
}

pub fn camera_from_json(text: &str) -> Result<Camera> {
    let f: CameraFile = serde_json::from_str(text).map_err(|e| Error::parse("camera", e.to_string()))?;
    let m = Matrix4::from_row_slice(&f.world_to_camera);
    Camera::new(f.width, f.height, f.fx, f.fy, f.cx, f.cy, m, f.z_near).map_err(|e| match e {
        Error::Usage(msg) => Error::parse("camera", msg),
        other => other,
    })
}

pub fn camera_to_json(cam: &Camera) -> String {
    let mut rows = [0.0f32; 16];
    for r in 0..4 {
        for c in 0..4 {
            rows[r * 4 + c] = cam.world_to_camera[(r, c)];
        }
    }
    let f = CameraFile {
        width: cam.width,
        height: cam.height,
        fx: cam.fx,
        fy: cam.fy,
        cx: cam.cx,
        cy: cam.cy,
        world_to_camera: rows,
        z_near: cam.z_near,
    };
    serde_json::to_string_pretty(&f).expect("camera serializes")
}

pub fn load_camera(path: &Path) -> Result<Camera> {
    camera_from_json(&std::fs::read_to_string(path)?)
}
