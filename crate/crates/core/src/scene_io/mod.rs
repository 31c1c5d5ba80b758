//! Scene and camera inputs: checkpoint PLY files, synthetic scenes, camera JSON.

mod camera;
mod ply;
mod synth;

pub use camera::{camera_from_json, camera_to_json, load_camera};
pub use ply::{load_ply, read_ply, write_ply, write_ply_file};
pub use synth::{synth_scene, SynthSpec};

use crate::model::Gaussian3D;

#[derive(Clone, Debug, PartialEq)]
pub struct SceneSource {
    pub gaussians: Vec<Gaussian3D>,
    pub name: String,
}

impl SceneSource {
    pub fn new(name: impl Into<String>, gaussians: Vec<Gaussian3D>) -> Self {
        Self {
            gaussians,
            name: name.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }
}
