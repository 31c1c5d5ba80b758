#![allow(dead_code)]

use gstg_core::model::{ProjectedGaussian, Sym2};
use gstg_core::scene_io::{synth_scene, SynthSpec};
use gstg_core::{Camera, SceneSource};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Screen-space Gaussian with covariance `R(theta) diag(major, minor) R(theta)^T`.
pub fn projected(id: u32, center: [f32; 2], major: f32, minor: f32, theta: f32) -> ProjectedGaussian {
    let (s, c) = theta.sin_cos();
    let cov = Sym2::new(
        major * c * c + minor * s * s,
        (major - minor) * s * c,
        major * s * s + minor * c * c,
    );
    ProjectedGaussian {
        id,
        depth: 1.0,
        center,
        covariance2d: cov,
        conic: cov.inverse_pd().expect("positive definite"),
        color: [1.0, 1.0, 1.0],
        opacity: 1.0,
    }
}

/// Random anisotropic screen Gaussian (up to 10:1 axis ratio) over a `w` x `h` image.
pub fn random_projected(r: &mut ChaCha8Rng, id: u32, w: f32, h: f32) -> ProjectedGaussian {
    let sigma = r.random_range(0.5f32..12.0);
    let ratio = r.random_range(1.0f32..10.0);
    let center = [r.random_range(-10.0..w + 10.0), r.random_range(-10.0..h + 10.0)];
    let theta = r.random_range(0.0..std::f32::consts::PI);
    projected(id, center, sigma * sigma, (sigma / ratio).powi(2), theta)
}

pub fn front_camera(width: u32, height: u32, distance: f32) -> Camera {
    Camera::look_at(
        Vector3::new(0.0, 0.0, -distance),
        Vector3::zeros(),
        Vector3::new(0.0, 1.0, 0.0),
        width,
        height,
        60.0,
    )
    .unwrap()
}

pub fn scene(count: usize, seed: u64, scale_min: f32, scale_max: f32) -> SceneSource {
    synth_scene(&SynthSpec {
        scale_min,
        scale_max,
        anisotropy: 6.0,
        ..SynthSpec::with_count(count, seed)
    })
    .unwrap()
}
