//! Per-view feature computation and culling.

use nalgebra::{Matrix2x3, Vector3};
use rayon::prelude::*;

use crate::bounds::{Footprint, DEFAULT_RADIUS_SCALE};
use crate::error::{Error, Result};
use crate::model::{Camera, Gaussian3D, ProjectedGaussian, Rgb, Sym2};
use crate::scene_io::SceneSource;
use crate::sorting::DepthSource;

/// Low-pass dilation added to the projected covariance diagonal, in px^2.
pub const LOW_PASS: f32 = 0.3;
/// Culling keeps centers within this multiple of the AABB radius outside the image.
pub const GUARD_BAND: f32 = 1.3;

pub const SH_C0: f32 = 0.282_094_8;
pub const SH_C1: f32 = 0.488_602_52;
pub const SH_C2: [f32; 5] = [
    1.092_548_4,
    -1.092_548_4,
    0.315_391_57,
    -1.092_548_4,
    0.546_274_2,
];
pub const SH_C3: [f32; 7] = [
    -0.590_043_6,
    2.890_611_4,
    -0.457_045_8,
    0.373_176_33,
    -0.457_045_8,
    1.445_305_7,
    -0.590_043_6,
];

struct ViewGeometry {
    view: Vector3<f32>,
    center: [f32; 2],
    covariance2d: Sym2,
}

fn view_geometry(g: &Gaussian3D, cam: &Camera) -> Option<ViewGeometry> {
    let w = cam.rotation();
    let t = w * g.position + cam.translation();
    if !(t.z > cam.z_near) {
        return None;
    }
    let inv_z = 1.0 / t.z;
    let center = [cam.fx * t.x * inv_z + cam.cx, cam.fy * t.y * inv_z + cam.cy];
    let jw = projection_jacobian(cam, t) * w;
    let cov = jw * g.covariance3d * jw.transpose();
    Some(ViewGeometry {
        view: t,
        center,
        covariance2d: Sym2::new(cov[(0, 0)] + LOW_PASS, cov[(0, 1)], cov[(1, 1)] + LOW_PASS),
    })
}

/// Jacobian of the pinhole projection at view-space point `t`.
pub fn projection_jacobian(cam: &Camera, t: Vector3<f32>) -> Matrix2x3<f32> {
    let inv_z = 1.0 / t.z;
    Matrix2x3::new(
        cam.fx * inv_z,
        0.0,
        -cam.fx * t.x * inv_z * inv_z,
        0.0,
        cam.fy * inv_z,
        -cam.fy * t.y * inv_z * inv_z,
    )
}

fn inside_guard_band(geom: &ViewGeometry, cam: &Camera) -> bool {
    let r = DEFAULT_RADIUS_SCALE * geom.covariance2d.max_eigenvalue().max(0.0).sqrt();
    let band = GUARD_BAND * r;
    let [u, v] = geom.center;
    u >= -band && u <= cam.width as f32 + band && v >= -band && v <= cam.height as f32 + band
}

/// Visibility test: in front of the near plane and centered within the guard band.
pub fn cull(g: &Gaussian3D, cam: &Camera) -> bool {
    view_geometry(g, cam).is_some_and(|geom| inside_guard_band(&geom, cam))
}

/// Why a Gaussian produced no projected features.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dropped {
    Culled,
    /// Projected covariance not positive definite.
    Degenerate,
}

/// Projects a Gaussian. Does not apply the guard band; call [`cull`] first
/// or use [`preprocess`].
pub fn project(g: &Gaussian3D, cam: &Camera) -> Result<ProjectedGaussian, Dropped> {
    let geom = view_geometry(g, cam).ok_or(Dropped::Culled)?;
    finish_projection(g, cam, &geom)
}

fn finish_projection(
    g: &Gaussian3D,
    cam: &Camera,
    geom: &ViewGeometry,
) -> Result<ProjectedGaussian, Dropped> {
    let conic = geom.covariance2d.inverse_pd().ok_or(Dropped::Degenerate)?;
    let dir = (g.position - cam.position())
        .try_normalize(0.0)
        .unwrap_or_else(|| Vector3::new(0.0, 0.0, 1.0));
    let color = sh_to_rgb(&g.sh, [dir.x, dir.y, dir.z]).map_err(|_| Dropped::Degenerate)?;
    Ok(ProjectedGaussian {
        id: g.id,
        depth: geom.view.z,
        center: geom.center,
        covariance2d: geom.covariance2d,
        conic,
        color,
        opacity: g.opacity,
    })
}

/// Cull and project in one pass.
pub fn preprocess(g: &Gaussian3D, cam: &Camera) -> Result<ProjectedGaussian, Dropped> {
    let geom = view_geometry(g, cam).ok_or(Dropped::Culled)?;
    if !inside_guard_band(&geom, cam) {
        return Err(Dropped::Culled);
    }
    finish_projection(g, cam, &geom)
}

/// Real SH basis values up to `degree` for a unit direction.
pub fn sh_basis(dir: [f32; 3], degree: usize) -> Vec<f32> {
    let [x, y, z] = dir;
    let mut b = Vec::with_capacity((degree + 1) * (degree + 1));
    b.push(SH_C0);
    if degree >= 1 {
        b.extend([-SH_C1 * y, SH_C1 * z, -SH_C1 * x]);
    }
    if degree >= 2 {
        let (xx, yy, zz) = (x * x, y * y, z * z);
        b.extend([
            SH_C2[0] * x * y,
            SH_C2[1] * y * z,
            SH_C2[2] * (2.0 * zz - xx - yy),
            SH_C2[3] * x * z,
            SH_C2[4] * (xx - yy),
        ]);
    }
    if degree >= 3 {
        let (xx, yy, zz) = (x * x, y * y, z * z);
        b.extend([
            SH_C3[0] * y * (3.0 * xx - yy),
            SH_C3[1] * x * y * z,
            SH_C3[2] * y * (4.0 * zz - xx - yy),
            SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy),
            SH_C3[4] * x * (4.0 * zz - xx - yy),
            SH_C3[5] * z * (xx - yy),
            SH_C3[6] * x * (xx - 3.0 * yy),
        ]);
    }
    b
}

/// View-dependent color: SH expansion plus 0.5, clamped to `[0, 1]`.
pub fn sh_to_rgb(sh: &[[f32; 3]], view_dir: [f32; 3]) -> Result<Rgb> {
    let degree = crate::model::sh_degree_for_len(sh.len()).ok_or_else(|| {
        Error::usage(format!(
            "{} SH coefficients (expected 1, 4, 9 or 16)",
            sh.len()
        ))
    })?;
    let basis = sh_basis(view_dir, degree);
    let mut rgb = [0.0f32; 3];
    for (coef, w) in sh.iter().zip(&basis) {
        for c in 0..3 {
            rgb[c] += w * coef[c];
        }
    }
    Ok(rgb.map(|v| (v + 0.5).clamp(0.0, 1.0)))
}

/// All surviving Gaussians of one view, in scene order, with id lookup.
#[derive(Clone, Debug)]
pub struct ProjectedScene {
    pub gaussians: Vec<ProjectedGaussian>,
    pub footprints: Vec<Footprint>,
    pub gaussians_in: u64,
    pub culled: u64,
    pub degenerate: u64,
    slot_of_id: Vec<u32>,
}

impl ProjectedScene {
    pub fn get(&self, id: u32) -> Option<&ProjectedGaussian> {
        self.slot(id).map(|s| &self.gaussians[s])
    }

    pub fn slot(&self, id: u32) -> Option<usize> {
        match self.slot_of_id.get(id as usize) {
            Some(&s) if s != u32::MAX => Some(s as usize),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }
}

impl DepthSource for ProjectedScene {
    fn depth_of(&self, id: u32) -> Option<f32> {
        self.get(id).map(|g| g.depth)
    }
}

/// Preprocess a whole scene. Output order equals input order regardless of
/// how the work is scheduled.
pub fn preprocess_scene(
    scene: &SceneSource,
    cam: &Camera,
    radius_scale: f32,
) -> Result<ProjectedScene> {
    let max_id = scene.gaussians.iter().map(|g| g.id).max();
    let mut slot_of_id = vec![u32::MAX; max_id.map_or(0, |m| m as usize + 1)];
    for g in &scene.gaussians {
        if slot_of_id[g.id as usize] != u32::MAX {
            return Err(Error::usage(format!("duplicate gaussian id {}", g.id)));
        }
        slot_of_id[g.id as usize] = 0;
    }
    slot_of_id.fill(u32::MAX);

    let results: Vec<Result<ProjectedGaussian, Dropped>> = scene
        .gaussians
        .par_iter()
        .map(|g| preprocess(g, cam))
        .collect();

    let mut gaussians = Vec::new();
    let (mut culled, mut degenerate) = (0, 0);
    for r in results {
        match r {
            Ok(pg) => {
                slot_of_id[pg.id as usize] = gaussians.len() as u32;
                gaussians.push(pg);
            }
            Err(Dropped::Culled) => culled += 1,
            Err(Dropped::Degenerate) => degenerate += 1,
        }
    }
    let footprints = gaussians
        .par_iter()
        .map(|pg| Footprint::new(pg, radius_scale))
        .collect();
    Ok(ProjectedScene {
        gaussians,
        footprints,
        gaussians_in: scene.gaussians.len() as u64,
        culled,
        degenerate,
        slot_of_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix3, Matrix4};

    fn cam() -> Camera {
        Camera::new(64, 64, 100.0, 100.0, 32.0, 32.0, Matrix4::identity(), 0.1).unwrap()
    }

    fn gaussian(pos: [f32; 3], cov: Matrix3<f32>) -> Gaussian3D {
        Gaussian3D {
            id: 0,
            position: Vector3::from(pos),
            covariance3d: cov,
            opacity: 0.8,
            sh: vec![[0.0; 3]],
        }
    }

    #[test]
    fn behind_camera_is_culled() {
        assert!(!cull(&gaussian([0.0, 0.0, -1.0], Matrix3::identity()), &cam()));
    }

    #[test]
    fn centered_gaussian_is_visible() {
        assert!(cull(&gaussian([0.0, 0.0, 5.0], Matrix3::identity() * 0.01), &cam()));
    }

    #[test]
    fn guard_band_keeps_large_offscreen_gaussians() {
        // Camera x maps 0.5 world units at z = 2 to 25 px; center lands at u = -18.
        let g = gaussian([-1.0, 0.0, 2.0], Matrix3::identity() * 0.01);
        let cam = cam();
        let pg = project(&g, &cam).unwrap();
        let r = 3.0 * pg.covariance2d.max_eigenvalue().sqrt();
        assert!(pg.center[0] < 0.0);
        assert!(pg.center[0] >= -GUARD_BAND * r, "u {} r {r}", pg.center[0]);
        assert!(cull(&g, &cam));
        // The same center with a tiny footprint falls outside the band.
        let small = gaussian([-1.0, 0.0, 2.0], Matrix3::identity() * 1e-6);
        assert!(!cull(&small, &cam));
    }

    #[test]
    fn on_axis_projection() {
        let pg = project(&gaussian([0.0, 0.0, 2.0], Matrix3::identity()), &cam()).unwrap();
        assert_eq!(pg.center, [32.0, 32.0]);
        assert_eq!(pg.depth, 2.0);
        assert!((pg.covariance2d.xx - 2500.3).abs() < 1e-2);
        assert!((pg.covariance2d.yy - 2500.3).abs() < 1e-2);
        assert!(pg.covariance2d.xy.abs() < 1e-6);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let cam = Camera::new(64, 48, 80.0, 90.0, 30.0, 20.0, Matrix4::identity(), 0.1).unwrap();
        let t = Vector3::new(0.3f32, -0.2, 2.5);
        let proj = |p: [f64; 3]| {
            [
                cam.fx as f64 * p[0] / p[2] + cam.cx as f64,
                cam.fy as f64 * p[1] / p[2] + cam.cy as f64,
            ]
        };
        let j = projection_jacobian(&cam, t);
        let h = 1e-6;
        for col in 0..3 {
            let mut plus = [t.x as f64, t.y as f64, t.z as f64];
            let mut minus = plus;
            plus[col] += h;
            minus[col] -= h;
            let (a, b) = (proj(plus), proj(minus));
            for row in 0..2 {
                let fd = (a[row] - b[row]) / (2.0 * h);
                assert!((fd - j[(row, col)] as f64).abs() < 1e-3 * fd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn conic_inverts_covariance() {
        let r = nalgebra::Rotation3::from_euler_angles(0.3, -0.5, 1.1).into_inner();
        let cov = r * Matrix3::from_diagonal(&Vector3::new(0.04, 0.01, 0.002)) * r.transpose();
        let pg = project(&gaussian([0.2, 0.1, 3.0], cov), &cam()).unwrap();
        let prod = pg.conic.mul(&pg.covariance2d);
        assert!((prod[0][0] - 1.0).abs() < 1e-4 && (prod[1][1] - 1.0).abs() < 1e-4);
        assert!(prod[0][1].abs() < 1e-4 && prod[1][0].abs() < 1e-4);
    }

    #[test]
    fn scaling_covariance_scales_projection_linearly() {
        let r = nalgebra::Rotation3::from_euler_angles(0.7, 0.2, -0.4).into_inner();
        let cov = r * Matrix3::from_diagonal(&Vector3::new(0.09, 0.02, 0.01)) * r.transpose();
        let k2 = 0.25f32;
        let a = project(&gaussian([0.1, -0.3, 2.0], cov), &cam()).unwrap();
        let b = project(&gaussian([0.1, -0.3, 2.0], cov * k2), &cam()).unwrap();
        for (x, y) in [
            (a.covariance2d.xx - LOW_PASS, b.covariance2d.xx - LOW_PASS),
            (a.covariance2d.xy, b.covariance2d.xy),
            (a.covariance2d.yy - LOW_PASS, b.covariance2d.yy - LOW_PASS),
        ] {
            assert!((y - k2 * x).abs() <= 1e-5 * x.abs().max(1e-3), "{x} {y}");
        }
    }

    #[test]
    fn projected_eigenvalues_at_least_low_pass() {
        let g = gaussian([0.0, 0.0, 4.0], Matrix3::from_diagonal(&Vector3::new(0.0, 1e-3, 0.0)));
        let pg = project(&g, &cam()).unwrap();
        let (_, minor, _) = pg.covariance2d.eigen();
        assert!(minor >= LOW_PASS - 1e-6);
    }

    #[test]
    fn sh_dc_zero_gives_mid_grey() {
        assert_eq!(sh_to_rgb(&[[0.0; 3]], [0.0, 0.0, 1.0]).unwrap(), [0.5; 3]);
    }

    #[test]
    fn sh_dc_scales_by_c0_then_clamps() {
        let rgb = sh_to_rgb(&[[1.0, -1.0, 3.0]], [0.0, 0.0, 1.0]).unwrap();
        assert!((rgb[0] - (0.282_094_8 + 0.5)).abs() < 1e-7);
        assert!((rgb[1] - (0.5 - 0.282_094_8)).abs() < 1e-7);
        assert_eq!(rgb[2], 1.0);
    }

    /// Midpoint quadrature over the sphere in (theta, phi).
    fn sphere_integral(f: impl Fn([f64; 3]) -> f64) -> f64 {
        let (nt, np) = (400, 800);
        let (dt, dp) = (std::f64::consts::PI / nt as f64, std::f64::consts::TAU / np as f64);
        let mut sum = 0.0;
        for i in 0..nt {
            let t = (i as f64 + 0.5) * dt;
            for j in 0..np {
                let ph = (j as f64 + 0.5) * dp;
                let d = [t.sin() * ph.cos(), t.sin() * ph.sin(), t.cos()];
                sum += f(d) * t.sin() * dt * dp;
            }
        }
        sum
    }

    #[test]
    fn dc_constant_normalizes_over_sphere() {
        // A constant basis function with unit L2 norm on the sphere is 1/sqrt(4 pi).
        let area = sphere_integral(|_| 1.0);
        let c0 = (1.0 / area).sqrt();
        assert!((c0 - SH_C0 as f64).abs() < 1e-6, "{c0}");
        let rgb = sh_to_rgb(&[[0.4, -0.9, 0.0]], [0.0, 0.0, 1.0]).unwrap();
        assert!((rgb[0] as f64 - (c0 * 0.4 + 0.5)).abs() < 1e-6);
        assert!((rgb[1] as f64 - (0.5 - c0 * 0.9)).abs() < 1e-6);
    }

    #[test]
    fn basis_is_orthonormal() {
        let n = 16;
        let mut gram = vec![0.0f64; n * n];
        let (nt, np) = (200, 400);
        let (dt, dp) = (std::f64::consts::PI / nt as f64, std::f64::consts::TAU / np as f64);
        for i in 0..nt {
            let t = (i as f64 + 0.5) * dt;
            for j in 0..np {
                let ph = (j as f64 + 0.5) * dp;
                let d = [t.sin() * ph.cos(), t.sin() * ph.sin(), t.cos()].map(|v| v as f32);
                let b = sh_basis(d, 3);
                let w = t.sin() * dt * dp;
                for a in 0..n {
                    for c in 0..n {
                        gram[a * n + c] += b[a] as f64 * b[c] as f64 * w;
                    }
                }
            }
        }
        for a in 0..n {
            for c in 0..n {
                let want = if a == c { 1.0 } else { 0.0 };
                assert!((gram[a * n + c] - want).abs() < 2e-3, "({a},{c}) {}", gram[a * n + c]);
            }
        }
    }

    #[test]
    fn opposite_directions_differ_with_degree_one() {
        // Reference degree-1 evaluation written out in f64.
        let reference = |sh: &[[f32; 3]; 4], d: [f64; 3]| -> [f64; 3] {
            let c0 = 0.5 / std::f64::consts::PI.sqrt();
            let c1 = (3.0 / (4.0 * std::f64::consts::PI)).sqrt();
            [0, 1, 2].map(|k| {
                let v = c0 * sh[0][k] as f64 - c1 * d[1] * sh[1][k] as f64 + c1 * d[2] * sh[2][k] as f64
                    - c1 * d[0] * sh[3][k] as f64;
                (v + 0.5).clamp(0.0, 1.0)
            })
        };
        let sh = [[0.1, 0.0, -0.2], [0.3, 0.1, 0.0], [-0.2, 0.25, 0.1], [0.05, -0.3, 0.2]];
        let d = [0.48f64, -0.6, 0.64];
        let nd = d.map(|v| -v);
        let a = sh_to_rgb(&sh, d.map(|v| v as f32)).unwrap();
        let b = sh_to_rgb(&sh, nd.map(|v| v as f32)).unwrap();
        assert_ne!(a, b);
        for (got, want) in [(a, reference(&sh, d)), (b, reference(&sh, nd))] {
            for k in 0..3 {
                assert!((got[k] as f64 - want[k]).abs() < 1e-6);
            }
        }
        let flat = [sh[0], [0.0; 3], [0.0; 3], [0.0; 3]];
        assert_eq!(
            sh_to_rgb(&flat, d.map(|v| v as f32)).unwrap(),
            sh_to_rgb(&flat, nd.map(|v| v as f32)).unwrap()
        );
    }

    #[test]
    fn sh_rejects_bad_length() {
        assert!(sh_to_rgb(&[[0.0; 3]; 5], [0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn degenerate_projection_is_reported() {
        // A NaN covariance cannot be inverted.
        let g = gaussian([0.0, 0.0, 2.0], Matrix3::from_element(f32::NAN));
        assert_eq!(project(&g, &cam()), Err(Dropped::Degenerate));
    }

    #[test]
    fn scene_keeps_input_order_and_rejects_duplicates() {
        let mut gs: Vec<Gaussian3D> = (0..5)
            .map(|i| {
                let mut g = gaussian([0.0, 0.0, 2.0 + i as f32], Matrix3::identity() * 0.01);
                g.id = 4 - i;
                g
            })
            .collect();
        gs.push(gaussian([0.0, 0.0, -3.0], Matrix3::identity()));
        gs[5].id = 9;
        let scene = SceneSource::new("t", gs.clone());
        let ps = preprocess_scene(&scene, &cam(), 3.0).unwrap();
        assert_eq!(ps.gaussians.iter().map(|g| g.id).collect::<Vec<_>>(), [4, 3, 2, 1, 0]);
        assert_eq!(ps.culled, 1);
        assert_eq!(ps.get(2).unwrap().depth, 4.0);
        assert!(ps.get(9).is_none());

        gs[1].id = 4;
        let dup = SceneSource::new("t", gs);
        assert!(preprocess_scene(&dup, &cam(), 3.0).is_err());
    }
}
