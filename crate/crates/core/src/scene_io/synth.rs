//! Deterministic synthetic scenes.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SceneSource;
use crate::error::{Error, Result};
use crate::model::Gaussian3D;

/// Generator parameters. Positions are uniform in the cube `center ± extent`.
/// The major-axis scale is log-uniform in `[scale_min, scale_max]`; each other
/// axis is the major scale divided by a log-uniform ratio in `[1, anisotropy]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub count: usize,
    pub center: [f32; 3],
    pub extent: f32,
    pub scale_min: f32,
    pub scale_max: f32,
    pub opacity_min: f32,
    pub opacity_max: f32,
    pub anisotropy: f32,
    pub seed: u64,
    pub sh_degree: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            count: 1000,
            center: [0.0, 0.0, 0.0],
            extent: 1.0,
            scale_min: 0.01,
            scale_max: 0.05,
            opacity_min: 0.3,
            opacity_max: 0.95,
            anisotropy: 4.0,
            seed: 0,
            sh_degree: 0,
        }
    }
}

impl SynthSpec {
    pub fn with_count(count: usize, seed: u64) -> Self {
        Self {
            count,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::usage("synth: count must be positive"));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) || self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::usage("synth: extent must be positive and center finite"));
        }
        if !(self.scale_min > 0.0 && self.scale_min <= self.scale_max && self.scale_max.is_finite()) {
            return Err(Error::usage("synth: need 0 < scale_min <= scale_max"));
        }
        if !(0.0 <= self.opacity_min && self.opacity_min <= self.opacity_max && self.opacity_max <= 1.0) {
            return Err(Error::usage("synth: need 0 <= opacity_min <= opacity_max <= 1"));
        }
        if !(self.anisotropy >= 1.0 && self.anisotropy.is_finite()) {
            return Err(Error::usage("synth: anisotropy must be at least 1"));
        }
        if self.sh_degree > 3 {
            return Err(Error::usage("synth: sh_degree must be at most 3"));
        }
        Ok(())
    }

    /// Parse `key=value` pairs separated by commas; `center` takes `x;y;z`.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut spec = Self::default();
        for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::usage(format!("synth: expected key=value, got '{pair}'")))?;
            let bad = || Error::usage(format!("synth: bad value '{v}' for {k}"));
            let f = || v.parse::<f32>().map_err(|_| bad());
            match k.trim() {
                "count" => spec.count = v.parse().map_err(|_| bad())?,
                "seed" => spec.seed = v.parse().map_err(|_| bad())?,
                "sh_degree" => spec.sh_degree = v.parse().map_err(|_| bad())?,
                "extent" => spec.extent = f()?,
                "scale_min" => spec.scale_min = f()?,
                "scale_max" => spec.scale_max = f()?,
                "opacity_min" => spec.opacity_min = f()?,
                "opacity_max" => spec.opacity_max = f()?,
                "anisotropy" => spec.anisotropy = f()?,
                "center" => {
                    let parts: Vec<f32> = v
                        .split(';')
                        .map(|s| s.trim().parse::<f32>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad())?;
                    spec.center = parts.try_into().map_err(|_| bad())?;
                }
                other => return Err(Error::usage(format!("synth: unknown key '{other}'"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| Error::parse("synth spec", e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f32, hi: f32) -> f32 {
    if lo == hi {
        return lo;
    }
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f32, hi: f32) -> f32 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Uniformly distributed rotation (Shoemake's method).
fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f32> {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = nalgebra::Quaternion::new(b * (tau * u3).cos(), a * (tau * u2).sin(), a * (tau * u2).cos(), b * (tau * u3).sin());
    UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner().cast()
}

pub fn synth_scene(spec: &SynthSpec) -> Result<SceneSource> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let c = Vector3::from(spec.center);
    let e = spec.extent;
    let n_sh = (spec.sh_degree + 1) * (spec.sh_degree + 1);
    let gaussians = (0..spec.count)
        .map(|i| {
            let position = c + Vector3::new(
                uniform(&mut rng, -e, e),
                uniform(&mut rng, -e, e),
                uniform(&mut rng, -e, e),
            );
            let major = log_uniform(&mut rng, spec.scale_min, spec.scale_max);
            let s = Vector3::new(
                major,
                major / log_uniform(&mut rng, 1.0, spec.anisotropy),
                major / log_uniform(&mut rng, 1.0, spec.anisotropy),
            );
            let r = random_rotation(&mut rng);
            let cov = r * Matrix3::from_diagonal(&s.component_mul(&s)) * r.transpose();
            let cov = (cov + cov.transpose()) * 0.5;
            let opacity = uniform(&mut rng, spec.opacity_min, spec.opacity_max);
            let mut sh = vec![[0.0f32; 3]; n_sh];
            sh[0] = [0, 1, 2].map(|_| uniform(&mut rng, -1.7, 1.7));
            for coef in sh.iter_mut().skip(1) {
                *coef = [0, 1, 2].map(|_| uniform(&mut rng, -0.3, 0.3));
            }
            Gaussian3D {
                id: i as u32,
                position,
                covariance3d: cov,
                opacity,
                sh,
            }
        })
        .collect();
    Ok(SceneSource::new(format!("synth-{}-{}", spec.count, spec.seed), gaussians))
}
