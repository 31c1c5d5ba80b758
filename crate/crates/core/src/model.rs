//! Domain types shared by every stage of both pipelines.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Matrix4, Vector3};

use crate::bounds::{self, Boundary};
use crate::error::{Error, Result};
use crate::pipeline::{self, RenderPipeline};

pub type Rgb = [f32; 3];

/// Contributions below this opacity are skipped during blending.
pub const DEFAULT_ALPHA_MIN: f32 = 1.0 / 255.0;
/// Blending stops once transmittance would drop below this value.
pub const DEFAULT_TRANSMITTANCE_MIN: f32 = 1e-4;
/// Width of [`TileBitmask::mask`]; bounds the number of tiles per group.
pub const MASK_BITS: u32 = 16;

/// One scene primitive.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian3D {
    pub id: u32,
    pub position: Vector3<f32>,
    pub covariance3d: Matrix3<f32>,
    pub opacity: f32,
    /// Spherical-harmonics coefficients, one RGB triple per basis function.
    pub sh: Vec<[f32; 3]>,
}

impl Gaussian3D {
    /// SH degree implied by the coefficient count, or `None` for unsupported lengths.
    pub fn sh_degree(&self) -> Option<usize> {
        sh_degree_for_len(self.sh.len())
    }

    pub fn validate(&self) -> Result<()> {
        let id = self.id;
        if !(0.0..=1.0).contains(&self.opacity) {
            return Err(Error::usage(format!(
                "gaussian {id}: opacity {} outside [0, 1]",
                self.opacity
            )));
        }
        if self.sh_degree().is_none() {
            return Err(Error::usage(format!(
                "gaussian {id}: {} SH coefficients (expected 1, 4, 9 or 16)",
                self.sh.len()
            )));
        }
        let cov = self.covariance3d.cast::<f64>();
        if cov.iter().any(|v| !v.is_finite()) || self.position.iter().any(|v| !v.is_finite()) {
            return Err(Error::usage(format!("gaussian {id}: non-finite parameters")));
        }
        let scale = cov.abs().max().max(f64::MIN_POSITIVE);
        let asym = (cov - cov.transpose()).abs().max();
        if asym > 1e-5 * scale {
            return Err(Error::usage(format!("gaussian {id}: covariance is not symmetric")));
        }
        let eig = cov.symmetric_eigenvalues();
        if eig.min() < -1e-5 * scale {
            return Err(Error::usage(format!(
                "gaussian {id}: covariance is not positive semi-definite"
            )));
        }
        Ok(())
    }
}

pub fn sh_degree_for_len(len: usize) -> Option<usize> {
    match len {
        1 => Some(0),
        4 => Some(1),
        9 => Some(2),
        16 => Some(3),
        _ => None,
    }
}

/// Symmetric 2x2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym2 {
    pub xx: f32,
    pub xy: f32,
    pub yy: f32,
}

impl Sym2 {
    pub const fn new(xx: f32, xy: f32, yy: f32) -> Self {
        Self { xx, xy, yy }
    }

    pub const fn diag(xx: f32, yy: f32) -> Self {
        Self { xx, xy: 0.0, yy }
    }

    pub fn det(&self) -> f32 {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Inverse, or `None` when the determinant is not strictly positive.
    pub fn inverse_pd(&self) -> Option<Sym2> {
        let det = self.det();
        if !(det > 0.0) || !det.is_finite() {
            return None;
        }
        let inv = 1.0 / det;
        Some(Sym2::new(self.yy * inv, -self.xy * inv, self.xx * inv))
    }

    /// Closed-form eigen decomposition.
    ///
    /// Returns `(major, minor, major_axis)` with `major >= minor`; the minor
    /// axis is the major axis rotated by +90 degrees.
    pub fn eigen(&self) -> (f32, f32, [f32; 2]) {
        let mid = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let b = self.xy;
        let r = (half_diff * half_diff + b * b).sqrt();
        let major = mid + r;
        let minor = mid - r;
        // Pick the better-conditioned of the two equivalent eigenvector forms.
        let (vx, vy) = if half_diff >= 0.0 {
            (r + half_diff, b)
        } else {
            (b, r - half_diff)
        };
        let len = (vx * vx + vy * vy).sqrt();
        let axis = if len > 0.0 && len.is_finite() {
            [vx / len, vy / len]
        } else {
            [1.0, 0.0]
        };
        (major, minor, axis)
    }

    pub fn max_eigenvalue(&self) -> f32 {
        self.eigen().0
    }

    pub fn mul(&self, other: &Sym2) -> [[f32; 2]; 2] {
        [
            [
                self.xx * other.xx + self.xy * other.xy,
                self.xx * other.xy + self.xy * other.yy,
            ],
            [
                self.xy * other.xx + self.yy * other.xy,
                self.xy * other.xy + self.yy * other.yy,
            ],
        ]
    }
}

/// Per-view features of a Gaussian that survived culling.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedGaussian {
    pub id: u32,
    /// View-space z.
    pub depth: f32,
    /// Pixel coordinates; pixel `(x, y)` has its sample at `(x + 0.5, y + 0.5)`.
    pub center: [f32; 2],
    pub covariance2d: Sym2,
    pub conic: Sym2,
    pub color: Rgb,
    pub opacity: f32,
}

/// Pinhole camera. View space is +z forward, +y down.
#[derive(Clone, Debug, PartialEq)]
pub struct Camera {
    pub width: u32,
    pub height: u32,
    pub fx: f32,
    pub fy: f32,
    pub cx: f32,
    pub cy: f32,
    pub world_to_camera: Matrix4<f32>,
    pub z_near: f32,
}

impl Camera {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        width: u32,
        height: u32,
        fx: f32,
        fy: f32,
        cx: f32,
        cy: f32,
        world_to_camera: Matrix4<f32>,
        z_near: f32,
    ) -> Result<Self> {
        let cam = Self {
            width,
            height,
            fx,
            fy,
            cx,
            cy,
            world_to_camera,
            z_near,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Camera at `eye` looking at `target`. `up` is the world direction that
    /// appears upward in the image.
    pub fn look_at(
        eye: Vector3<f32>,
        target: Vector3<f32>,
        up: Vector3<f32>,
        width: u32,
        height: u32,
        fov_y_degrees: f32,
    ) -> Result<Self> {
        let forward = (target - eye)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::usage("look_at: eye and target coincide"))?;
        let down = (-up - forward * (-up).dot(&forward))
            .try_normalize(1e-12)
            .ok_or_else(|| Error::usage("look_at: up is parallel to the view direction"))?;
        let right = down.cross(&forward);
        let rot = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        let t = -(rot * eye);
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rot);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
        let focal = 0.5 * height as f32 / (0.5 * fov_y_degrees.to_radians()).tan();
        Camera::new(
            width,
            height,
            focal,
            focal,
            0.5 * width as f32,
            0.5 * height as f32,
            m,
            0.2,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::usage("camera: width and height must be positive"));
        }
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(Error::usage("camera: fx and fy must be positive"));
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err(Error::usage("camera: principal point must be finite"));
        }
        if !(self.z_near > 0.0 && self.z_near.is_finite()) {
            return Err(Error::usage("camera: z_near must be positive"));
        }
        let m = self.world_to_camera.cast::<f64>();
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::usage("camera: world_to_camera has non-finite entries"));
        }
        let rot = m.fixed_view::<3, 3>(0, 0).into_owned();
        if rot.determinant().abs() < 1e-6 {
            return Err(Error::usage("camera: world_to_camera is not invertible"));
        }
        let last_row_ok = m[(3, 0)].abs() < 1e-6
            && m[(3, 1)].abs() < 1e-6
            && m[(3, 2)].abs() < 1e-6
            && (m[(3, 3)] - 1.0).abs() < 1e-6;
        let orth_err = (rot * rot.transpose() - Matrix3::identity()).abs().max();
        if !last_row_ok || orth_err > 1e-4 || rot.determinant() < 0.0 {
            return Err(Error::usage("camera: world_to_camera is not a rigid transform"));
        }
        Ok(())
    }

    pub fn rotation(&self) -> Matrix3<f32> {
        self.world_to_camera.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vector3<f32> {
        self.world_to_camera.fixed_view::<3, 1>(0, 3).into_owned()
    }

    /// Camera center in world coordinates.
    pub fn position(&self) -> Vector3<f32> {
        -(self.rotation().transpose() * self.translation())
    }

    pub fn pixel_count(&self) -> u64 {
        self.width as u64 * self.height as u64
    }
}

/// Which sorting/rasterization structure a pipeline follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PipelineMode {
    Baseline,
    Grouped,
}

impl fmt::Display for PipelineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PipelineMode::Baseline => "baseline",
            PipelineMode::Grouped => "grouped",
        })
    }
}

#[derive(Clone)]
pub struct RenderConfig {
    pub tile_size: u32,
    pub group_size: u32,
    pub group_bounds: Arc<dyn Boundary>,
    pub tile_bounds: Arc<dyn Boundary>,
    pub alpha_min: f32,
    pub transmittance_min: f32,
    pub background: Rgb,
    /// Mahalanobis radius of the influence region.
    pub radius_scale: f32,
    pub pipeline: Arc<dyn RenderPipeline>,
}

impl fmt::Debug for RenderConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RenderConfig")
            .field("pipeline", &self.pipeline.name())
            .field("tile_size", &self.tile_size)
            .field("group_size", &self.group_size)
            .field("tile_bounds", &self.tile_bounds.name())
            .field("group_bounds", &self.group_bounds.name())
            .field("alpha_min", &self.alpha_min)
            .field("transmittance_min", &self.transmittance_min)
            .field("background", &self.background)
            .field("radius_scale", &self.radius_scale)
            .finish()
    }
}

impl RenderConfig {
    /// Per-tile pipeline; the group size is set equal to the tile size.
    pub fn baseline(tile_size: u32, bounds: Arc<dyn Boundary>) -> Self {
        Self {
            tile_size,
            group_size: tile_size,
            group_bounds: bounds.clone(),
            tile_bounds: bounds,
            alpha_min: DEFAULT_ALPHA_MIN,
            transmittance_min: DEFAULT_TRANSMITTANCE_MIN,
            background: [0.0; 3],
            radius_scale: bounds::DEFAULT_RADIUS_SCALE,
            pipeline: pipeline::baseline(),
        }
    }

    pub fn grouped(
        tile_size: u32,
        group_size: u32,
        group_bounds: Arc<dyn Boundary>,
        tile_bounds: Arc<dyn Boundary>,
    ) -> Self {
        Self {
            group_size,
            group_bounds,
            tile_bounds,
            pipeline: pipeline::grouped(),
            ..Self::baseline(tile_size, bounds::aabb())
        }
    }

    pub fn with_background(mut self, background: Rgb) -> Self {
        self.background = background;
        self
    }

    pub fn tiles_per_group_side(&self) -> u32 {
        self.group_size / self.tile_size.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tile_size == 0 || self.group_size == 0 {
            return Err(Error::config("tile_size and group_size must be positive"));
        }
        if !self.group_size.is_multiple_of(self.tile_size) {
            return Err(Error::config(format!(
                "group_size mod tile_size must be 0 (group_size {} , tile_size {})",
                self.group_size, self.tile_size
            )));
        }
        let side = self.tiles_per_group_side();
        if side * side > MASK_BITS {
            return Err(Error::config(format!(
                "(group_size / tile_size)^2 = {} exceeds the {MASK_BITS}-bit bitmask width",
                side * side
            )));
        }
        if self.tile_bounds.tightness() < self.group_bounds.tightness() {
            return Err(Error::config(format!(
                "tightness: tile bounds '{}' are looser than group bounds '{}'",
                self.tile_bounds.name(),
                self.group_bounds.name()
            )));
        }
        if !(0.0..1.0).contains(&self.alpha_min) {
            return Err(Error::config("alpha_min must lie in [0, 1)"));
        }
        if !(self.transmittance_min > 0.0 && self.transmittance_min < 1.0) {
            return Err(Error::config("transmittance_min must lie in (0, 1)"));
        }
        if !(self.radius_scale > 0.0 && self.radius_scale.is_finite()) {
            return Err(Error::config("radius_scale must be positive"));
        }
        if self.background.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("background must be finite"));
        }
        Ok(())
    }
}

/// Pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl Rect {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    pub fn is_empty(&self) -> bool {
        self.x1 <= self.x0 || self.y1 <= self.y0
    }

    pub fn contains_pixel(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }
}

/// Partition of the image into tiles and aligned groups of tiles.
///
/// Tiles and groups are indexed row-major from the top-left. Border cells are
/// clipped to the image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileLayout {
    pub width: u32,
    pub height: u32,
    pub tile_size: u32,
    pub group_size: u32,
    pub tiles_x: u32,
    pub tiles_y: u32,
    pub groups_x: u32,
    pub groups_y: u32,
    pub tiles_per_group_side: u32,
}

impl TileLayout {
    pub fn new(width: u32, height: u32, tile_size: u32, group_size: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::usage("layout: image must be non-empty"));
        }
        if tile_size == 0 || group_size == 0 || !group_size.is_multiple_of(tile_size) {
            return Err(Error::config(format!(
                "group_size mod tile_size must be 0 (group_size {group_size}, tile_size {tile_size})"
            )));
        }
        let side = group_size / tile_size;
        if side * side > MASK_BITS {
            return Err(Error::config(format!(
                "(group_size / tile_size)^2 = {} exceeds the {MASK_BITS}-bit bitmask width",
                side * side
            )));
        }
        Ok(Self {
            width,
            height,
            tile_size,
            group_size,
            tiles_x: width.div_ceil(tile_size),
            tiles_y: height.div_ceil(tile_size),
            groups_x: width.div_ceil(group_size),
            groups_y: height.div_ceil(group_size),
            tiles_per_group_side: side,
        })
    }

    pub fn for_config(cam: &Camera, cfg: &RenderConfig) -> Result<Self> {
        Self::new(cam.width, cam.height, cfg.tile_size, cfg.group_size)
    }

    pub fn tile_count(&self) -> usize {
        self.tiles_x as usize * self.tiles_y as usize
    }

    pub fn group_count(&self) -> usize {
        self.groups_x as usize * self.groups_y as usize
    }

    pub fn tile_grid(&self) -> CellGrid {
        CellGrid {
            cols: self.tiles_x,
            rows: self.tiles_y,
            cell_size: self.tile_size,
            width: self.width,
            height: self.height,
        }
    }

    pub fn group_grid(&self) -> CellGrid {
        CellGrid {
            cols: self.groups_x,
            rows: self.groups_y,
            cell_size: self.group_size,
            width: self.width,
            height: self.height,
        }
    }

    pub fn tile_rect(&self, tile_index: u32) -> Result<Rect> {
        self.tile_grid().rect(tile_index)
    }

    pub fn group_rect(&self, group_index: u32) -> Result<Rect> {
        self.group_grid().rect(group_index)
    }

    pub fn group_of_tile(&self, tile_index: u32) -> u32 {
        let (tx, ty) = (tile_index % self.tiles_x, tile_index / self.tiles_x);
        let side = self.tiles_per_group_side;
        (ty / side) * self.groups_x + tx / side
    }

    /// Bit position of a tile inside its group's mask (row-major within the group).
    pub fn local_bit(&self, tile_index: u32) -> u32 {
        let (tx, ty) = (tile_index % self.tiles_x, tile_index / self.tiles_x);
        let side = self.tiles_per_group_side;
        (ty % side) * side + tx % side
    }

    /// One-hot mask locating a tile within its group.
    pub fn tile_location(&self, tile_index: u32) -> u16 {
        1u16 << self.local_bit(tile_index)
    }

    /// Tiles of a group that exist inside the image, as `(tile_index, bit)`.
    pub fn tiles_in_group(&self, group_index: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        let side = self.tiles_per_group_side;
        let gx = group_index % self.groups_x;
        let gy = group_index / self.groups_x;
        (0..side).flat_map(move |ly| {
            (0..side).filter_map(move |lx| {
                let tx = gx * side + lx;
                let ty = gy * side + ly;
                (tx < self.tiles_x && ty < self.tiles_y)
                    .then(|| (ty * self.tiles_x + tx, ly * side + lx))
            })
        })
    }
}

/// A uniform grid of square cells clipped to the image; tiles and groups are both grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellGrid {
    pub cols: u32,
    pub rows: u32,
    pub cell_size: u32,
    pub width: u32,
    pub height: u32,
}

impl CellGrid {
    pub fn len(&self) -> usize {
        self.cols as usize * self.rows as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rect(&self, index: u32) -> Result<Rect> {
        if index as usize >= self.len() {
            return Err(Error::usage(format!(
                "cell index {index} out of range (grid has {} cells)",
                self.len()
            )));
        }
        Ok(self.rect_xy(index % self.cols, index / self.cols))
    }

    pub(crate) fn rect_xy(&self, cx: u32, cy: u32) -> Rect {
        let s = self.cell_size;
        Rect {
            x0: cx * s,
            y0: cy * s,
            x1: ((cx + 1) * s).min(self.width),
            y1: ((cy + 1) * s).min(self.height),
        }
    }
}

/// Which tiles of one group a Gaussian influences. Bit `t` is tile `t` of the
/// group, row-major within the group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileBitmask {
    pub gaussian_id: u32,
    pub group_index: u32,
    pub mask: u16,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(w: u32, h: u32, tile: u32, group: u32) -> TileLayout {
        TileLayout::new(w, h, tile, group).unwrap()
    }

    #[test]
    fn origin_tile_rect() {
        let l = layout(64, 64, 16, 64);
        assert_eq!(l.tile_rect(0).unwrap(), Rect { x0: 0, y0: 0, x1: 16, y1: 16 });
    }

    #[test]
    fn border_tile_is_clipped() {
        let l = layout(100, 100, 16, 16);
        assert_eq!(l.tiles_x, 7);
        let r = l.tile_rect(6).unwrap();
        assert_eq!((r.x0, r.x1), (96, 100));
    }

    #[test]
    fn tile_index_out_of_range() {
        let l = layout(100, 100, 16, 16);
        let n = l.tiles_x * l.tiles_y;
        assert!(matches!(l.tile_rect(n), Err(Error::Usage(_))));
    }

    #[test]
    fn tiles_partition_the_image() {
        for &(w, h, t, g) in &[(100, 37, 16, 64), (64, 64, 8, 16), (33, 90, 8, 24)] {
            let l = layout(w, h, t, g);
            let mut hits = vec![0u32; (w * h) as usize];
            for i in 0..l.tile_count() as u32 {
                let r = l.tile_rect(i).unwrap();
                assert!(!r.is_empty());
                for y in r.y0..r.y1 {
                    for x in r.x0..r.x1 {
                        hits[(y * w + x) as usize] += 1;
                    }
                }
            }
            assert!(hits.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn every_tile_lies_in_exactly_its_group() {
        let l = layout(100, 70, 16, 64);
        let mut seen = vec![0u32; l.tile_count()];
        for g in 0..l.group_count() as u32 {
            let gr = l.group_rect(g).unwrap();
            for (t, bit) in l.tiles_in_group(g) {
                seen[t as usize] += 1;
                assert_eq!(l.group_of_tile(t), g);
                assert_eq!(l.local_bit(t), bit);
                let tr = l.tile_rect(t).unwrap();
                assert!(tr.x0 >= gr.x0 && tr.x1 <= gr.x1 && tr.y0 >= gr.y0 && tr.y1 <= gr.y1);
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn layout_rejects_bad_group_sizes() {
        assert!(TileLayout::new(64, 64, 16, 40).is_err());
        assert!(TileLayout::new(64, 64, 8, 64).is_err());
        assert!(TileLayout::new(64, 64, 16, 48).is_ok());
    }

    #[test]
    fn config_invariants() {
        let ok = RenderConfig::grouped(16, 64, bounds::aabb(), bounds::ellipse());
        assert!(ok.validate().is_ok());

        let loose = RenderConfig::grouped(16, 64, bounds::ellipse(), bounds::aabb());
        let msg = loose.validate().unwrap_err().to_string();
        assert!(msg.contains("tightness"), "{msg}");

        let bad = RenderConfig::grouped(16, 40, bounds::ellipse(), bounds::ellipse());
        let msg = bad.validate().unwrap_err().to_string();
        assert!(msg.contains("group_size mod tile_size"), "{msg}");

        let wide = RenderConfig::grouped(8, 64, bounds::ellipse(), bounds::ellipse());
        assert!(wide.validate().is_err());
    }

    #[test]
    fn default_thresholds() {
        let cfg = RenderConfig::baseline(16, bounds::ellipse());
        assert_eq!(cfg.alpha_min, 1.0 / 255.0);
        assert_eq!(cfg.transmittance_min, 1e-4);
    }

    #[test]
    fn sym2_eigen_matches_definition() {
        let m = Sym2::new(7.0, 2.5, 3.0);
        let (l1, l2, v) = m.eigen();
        assert!(l1 >= l2);
        let mv = [m.xx * v[0] + m.xy * v[1], m.xy * v[0] + m.yy * v[1]];
        assert!((mv[0] - l1 * v[0]).abs() < 1e-5 && (mv[1] - l1 * v[1]).abs() < 1e-5);
        assert!((l1 + l2 - 10.0).abs() < 1e-5);
        assert!((l1 * l2 - m.det()).abs() < 1e-4);
    }

    #[test]
    fn look_at_identity_convention() {
        let cam = Camera::look_at(
            Vector3::zeros(),
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(0.0, -1.0, 0.0),
            64,
            64,
            60.0,
        )
        .unwrap();
        assert!((cam.world_to_camera - Matrix4::identity()).abs().max() < 1e-6);
    }

    #[test]
    fn camera_rejects_non_rigid() {
        let mut m = Matrix4::identity();
        m[(0, 0)] = 2.0;
        assert!(Camera::new(64, 64, 50.0, 50.0, 32.0, 32.0, m, 0.1).is_err());
        let mut m = Matrix4::identity();
        m[(2, 2)] = 0.0;
        let err = Camera::new(64, 64, 50.0, 50.0, 32.0, 32.0, m, 0.1).unwrap_err();
        assert!(err.to_string().contains("not invertible"));
    }
}
