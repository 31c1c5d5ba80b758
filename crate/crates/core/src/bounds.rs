//! Gaussian-versus-rectangle influence tests, tile/group identification and
//! bitmask generation.
//!
//! Three [`Boundary`] strategies ship with the crate, from loosest to tightest:
//! [`AabbBoundary`], [`ObbBoundary`] and [`EllipseBoundary`]. Each tighter test
//! is evaluated only after the looser ones accept, so the tile sets they
//! produce are nested for every Gaussian, not just in exact arithmetic.
//!
//! Rectangles are treated as closed sets and tangency counts as contact.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::Result;
use crate::model::{CellGrid, ProjectedGaussian, Rect, Sym2, TileBitmask, TileLayout};

pub const DEFAULT_RADIUS_SCALE: f32 = 3.0;

/// The truncated influence region `{ p : (p - c)^T K (p - c) <= s^2 }`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScreenEllipse {
    pub center: [f32; 2],
    pub conic: Sym2,
    pub radius_scale: f32,
}

impl ScreenEllipse {
    pub fn mahalanobis_sq(&self, p: [f32; 2]) -> f32 {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        self.conic.xx * dx * dx + 2.0 * self.conic.xy * dx * dy + self.conic.yy * dy * dy
    }
}

/// Axis-aligned square `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb2 {
    pub min: [f32; 2],
    pub max: [f32; 2],
}

impl Aabb2 {
    pub fn area(&self) -> f32 {
        (self.max[0] - self.min[0]) * (self.max[1] - self.min[1])
    }

    pub fn overlaps(&self, rect: &Rect) -> bool {
        self.min[0] <= rect.x1 as f32
            && self.max[0] >= rect.x0 as f32
            && self.min[1] <= rect.y1 as f32
            && self.max[1] >= rect.y0 as f32
    }
}

/// Oriented box aligned with the covariance eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Obb2 {
    pub center: [f32; 2],
    /// Unit axes; `axes[0]` is the major axis.
    pub axes: [[f32; 2]; 2],
    pub half_extents: [f32; 2],
}

impl Obb2 {
    pub fn area(&self) -> f32 {
        4.0 * self.half_extents[0] * self.half_extents[1]
    }

    /// Half-width of the box projected on the x and y axes.
    fn axis_aligned_extent(&self) -> [f32; 2] {
        let [u, v] = self.axes;
        let [h0, h1] = self.half_extents;
        [
            u[0].abs() * h0 + v[0].abs() * h1,
            u[1].abs() * h0 + v[1].abs() * h1,
        ]
    }

    /// Separating-axis test against a rectangle: two rectangle axes, two box axes.
    pub fn overlaps(&self, rect: &Rect) -> bool {
        let (x0, x1, y0, y1) = (rect.x0 as f32, rect.x1 as f32, rect.y0 as f32, rect.y1 as f32);
        let ext = self.axis_aligned_extent();
        let [cx, cy] = self.center;
        if cx - ext[0] > x1 || cx + ext[0] < x0 || cy - ext[1] > y1 || cy + ext[1] < y0 {
            return false;
        }
        // Rounding is monotone in each corner coordinate, so projecting the
        // corners of a larger rectangle always yields a wider interval.
        let corners = [(x0 - cx, y0 - cy), (x1 - cx, y0 - cy), (x0 - cx, y1 - cy), (x1 - cx, y1 - cy)];
        for (axis, half) in self.axes.iter().zip(self.half_extents) {
            let (mut lo, mut hi) = (f32::INFINITY, f32::NEG_INFINITY);
            for &(dx, dy) in &corners {
                let d = axis[0] * dx + axis[1] * dy;
                lo = lo.min(d);
                hi = hi.max(d);
            }
            if lo > half || hi < -half {
                return false;
            }
        }
        true
    }
}

pub fn aabb_of(pg: &ProjectedGaussian) -> Aabb2 {
    aabb_with_scale(pg, DEFAULT_RADIUS_SCALE)
}

/// Square of half-side `scale * sqrt(lambda_max)` around the center.
pub fn aabb_with_scale(pg: &ProjectedGaussian, scale: f32) -> Aabb2 {
    let r = scale * pg.covariance2d.max_eigenvalue().max(0.0).sqrt();
    let [cx, cy] = pg.center;
    Aabb2 {
        min: [cx - r, cy - r],
        max: [cx + r, cy + r],
    }
}

pub fn obb_of(pg: &ProjectedGaussian) -> Obb2 {
    obb_with_scale(pg, DEFAULT_RADIUS_SCALE)
}

pub fn obb_with_scale(pg: &ProjectedGaussian, scale: f32) -> Obb2 {
    let (major, minor, u) = pg.covariance2d.eigen();
    Obb2 {
        center: pg.center,
        axes: [u, [-u[1], u[0]]],
        half_extents: [scale * major.max(0.0).sqrt(), scale * minor.max(0.0).sqrt()],
    }
}

/// Everything the boundary tests need about one Gaussian, computed once.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Footprint {
    pub id: u32,
    pub ellipse: ScreenEllipse,
    pub aabb: Aabb2,
    pub obb: Obb2,
}

impl Footprint {
    pub fn new(pg: &ProjectedGaussian, radius_scale: f32) -> Self {
        Self {
            id: pg.id,
            ellipse: ScreenEllipse {
                center: pg.center,
                conic: pg.conic,
                radius_scale,
            },
            aabb: aabb_with_scale(pg, radius_scale),
            obb: obb_with_scale(pg, radius_scale),
        }
    }
}

/// Exact test of the truncated ellipse against a closed rectangle.
///
/// True iff the center lies in the rectangle, a corner lies in the ellipse, or
/// the ellipse boundary crosses an edge. Evaluated in f64 so that a group
/// rectangle and the tiles it contains agree even for near-tangent footprints.
pub fn ellipse_touches_rect(e: &ScreenEllipse, rect: &Rect) -> bool {
    let (cx, cy) = (e.center[0] as f64, e.center[1] as f64);
    let (a, b, c) = (e.conic.xx as f64, e.conic.xy as f64, e.conic.yy as f64);
    let s2 = (e.radius_scale as f64) * (e.radius_scale as f64);
    let (x0, x1) = (rect.x0 as f64 - cx, rect.x1 as f64 - cx);
    let (y0, y1) = (rect.y0 as f64 - cy, rect.y1 as f64 - cy);

    if x0 <= 0.0 && 0.0 <= x1 && y0 <= 0.0 && 0.0 <= y1 {
        return true;
    }
    let q = |dx: f64, dy: f64| a * dx * dx + 2.0 * b * dx * dy + c * dy * dy;
    if [(x0, y0), (x1, y0), (x0, y1), (x1, y1)]
        .iter()
        .any(|&(dx, dy)| q(dx, dy) <= s2)
    {
        return true;
    }
    // Horizontal edges: fix dy, solve a t^2 + 2 (b dy) t + (c dy^2 - s2) <= 0 for t = dx.
    for dy in [y0, y1] {
        if root_span_overlaps(a, b * dy, c * dy * dy - s2, x0, x1) {
            return true;
        }
    }
    for dx in [x0, x1] {
        if root_span_overlaps(c, b * dx, a * dx * dx - s2, y0, y1) {
            return true;
        }
    }
    false
}

/// Whether `{ t : qa t^2 + 2 half_b t + qc <= 0 }` meets `[lo, hi]`; `qa > 0`.
fn root_span_overlaps(qa: f64, half_b: f64, qc: f64, lo: f64, hi: f64) -> bool {
    let disc = half_b * half_b - qa * qc;
    if disc < 0.0 || qa <= 0.0 {
        return false;
    }
    let sq = disc.sqrt();
    let t0 = (-half_b - sq) / qa;
    let t1 = (-half_b + sq) / qa;
    t0 <= hi && t1 >= lo
}

/// A strategy deciding whether a Gaussian's footprint influences a rectangle.
pub trait Boundary: Send + Sync + Debug {
    /// Registry key, lower-case.
    fn name(&self) -> &str;

    /// Larger is tighter. A mask strategy must be at least as tight as the
    /// group strategy it is paired with.
    fn tightness(&self) -> u8;

    fn intersects(&self, fp: &Footprint, rect: &Rect) -> bool;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AabbBoundary;

#[derive(Clone, Copy, Debug, Default)]
pub struct ObbBoundary;

#[derive(Clone, Copy, Debug, Default)]
pub struct EllipseBoundary;

impl Boundary for AabbBoundary {
    fn name(&self) -> &str {
        "aabb"
    }

    fn tightness(&self) -> u8 {
        0
    }

    fn intersects(&self, fp: &Footprint, rect: &Rect) -> bool {
        fp.aabb.overlaps(rect)
    }
}

impl Boundary for ObbBoundary {
    fn name(&self) -> &str {
        "obb"
    }

    fn tightness(&self) -> u8 {
        1
    }

    fn intersects(&self, fp: &Footprint, rect: &Rect) -> bool {
        fp.aabb.overlaps(rect) && fp.obb.overlaps(rect)
    }
}

impl Boundary for EllipseBoundary {
    fn name(&self) -> &str {
        "ellipse"
    }

    fn tightness(&self) -> u8 {
        2
    }

    fn intersects(&self, fp: &Footprint, rect: &Rect) -> bool {
        fp.aabb.overlaps(rect) && fp.obb.overlaps(rect) && ellipse_touches_rect(&fp.ellipse, rect)
    }
}

pub fn aabb() -> Arc<dyn Boundary> {
    Arc::new(AabbBoundary)
}

pub fn obb() -> Arc<dyn Boundary> {
    Arc::new(ObbBoundary)
}

pub fn ellipse() -> Arc<dyn Boundary> {
    Arc::new(EllipseBoundary)
}

/// `intersects` for a bare projected Gaussian at the default 3-sigma radius.
pub fn intersects(pg: &ProjectedGaussian, rect: &Rect, method: &dyn Boundary) -> bool {
    method.intersects(&Footprint::new(pg, DEFAULT_RADIUS_SCALE), rect)
}

/// Cells touched by a footprint plus the number of boundary tests spent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Identified {
    /// Ascending cell indices.
    pub cells: Vec<u32>,
    /// Cells in the AABB prefilter, each of which got one `intersects` call.
    pub tests: u64,
}

/// Scans only the cells overlapping the footprint's AABB, then applies `method`.
pub fn identify_cells(fp: &Footprint, grid: &CellGrid, method: &dyn Boundary) -> Identified {
    let mut out = Identified::default();
    let Some((cx0, cx1, cy0, cy1)) = candidate_range(&fp.aabb, grid) else {
        return out;
    };
    for cy in cy0..=cy1 {
        for cx in cx0..=cx1 {
            let rect = grid.rect_xy(cx, cy);
            if !fp.aabb.overlaps(&rect) {
                continue;
            }
            out.tests += 1;
            if method.intersects(fp, &rect) {
                out.cells.push(cy * grid.cols + cx);
            }
        }
    }
    out
}

/// Inclusive cell range that may overlap `aabb`; one cell of slack on the low
/// side covers boxes touching a cell's closed upper edge.
fn candidate_range(aabb: &Aabb2, grid: &CellGrid) -> Option<(u32, u32, u32, u32)> {
    if !(aabb.min[0] <= grid.width as f32
        && aabb.max[0] >= 0.0
        && aabb.min[1] <= grid.height as f32
        && aabb.max[1] >= 0.0)
    {
        return None;
    }
    let s = grid.cell_size as f32;
    let lo = |v: f32| ((v / s).floor() - 1.0).max(0.0) as u32;
    let hi = |v: f32, n: u32| ((v / s).floor().max(0.0) as u32).min(n - 1);
    Some((
        lo(aabb.min[0]).min(grid.cols - 1),
        hi(aabb.max[0], grid.cols),
        lo(aabb.min[1]).min(grid.rows - 1),
        hi(aabb.max[1], grid.rows),
    ))
}

pub fn identify_tiles(fp: &Footprint, layout: &TileLayout, method: &dyn Boundary) -> Identified {
    identify_cells(fp, &layout.tile_grid(), method)
}

pub fn identify_groups(fp: &Footprint, layout: &TileLayout, method: &dyn Boundary) -> Identified {
    identify_cells(fp, &layout.group_grid(), method)
}

/// Tests every in-image tile of `group_index` with `method`.
///
/// Returns the mask and the number of tile tests performed. A zero mask is a
/// legal result; callers drop such entries.
pub fn bitmask_for(
    fp: &Footprint,
    group_index: u32,
    layout: &TileLayout,
    method: &dyn Boundary,
) -> Result<(TileBitmask, u64)> {
    layout.group_rect(group_index)?;
    let grid = layout.tile_grid();
    let mut mask = 0u16;
    let mut tests = 0;
    for (tile, bit) in layout.tiles_in_group(group_index) {
        let rect = grid.rect_xy(tile % grid.cols, tile / grid.cols);
        tests += 1;
        if method.intersects(fp, &rect) {
            mask |= 1 << bit;
        }
    }
    Ok((
        TileBitmask {
            gaussian_id: fp.id,
            group_index,
            mask,
        },
        tests,
    ))
}
