//! Per-pixel opacity, front-to-back compositing and tile rasterization.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::model::{ProjectedGaussian, Rect, RenderConfig, Rgb, Sym2, TileLayout};
use crate::preprocess::ProjectedScene;
use crate::sorting::{ListOwner, SortedList};

/// Upper clamp on per-Gaussian opacity at a pixel.
pub const ALPHA_MAX: f32 = 0.99;

#[inline]
fn alpha_raw(center: [f32; 2], conic: Sym2, opacity: f32, p: [f32; 2]) -> f32 {
    let dx = p[0] - center[0];
    let dy = p[1] - center[1];
    let power = -0.5 * (conic.xx * dx * dx + conic.yy * dy * dy) - conic.xy * dx * dy;
    (opacity * power.exp()).min(ALPHA_MAX)
}

/// Opacity of `pg` at sample point `p`.
pub fn alpha_at(pg: &ProjectedGaussian, p: [f32; 2]) -> f32 {
    alpha_raw(pg.center, pg.conic, pg.opacity, p)
}

/// Sample point of pixel `(x, y)`.
#[inline]
pub fn pixel_center(x: u32, y: u32) -> [f32; 2] {
    [x as f32 + 0.5, y as f32 + 0.5]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlendParams {
    pub alpha_min: f32,
    pub transmittance_min: f32,
    pub background: Rgb,
}

impl BlendParams {
    pub fn from_config(cfg: &RenderConfig) -> Self {
        Self {
            alpha_min: cfg.alpha_min,
            transmittance_min: cfg.transmittance_min,
            background: cfg.background,
        }
    }
}

impl Default for BlendParams {
    fn default() -> Self {
        Self {
            alpha_min: crate::model::DEFAULT_ALPHA_MIN,
            transmittance_min: crate::model::DEFAULT_TRANSMITTANCE_MIN,
            background: [0.0; 3],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlendStep {
    /// Below `alpha_min`; transmittance untouched.
    Skipped,
    Blended,
    /// Blending this contribution would push transmittance below the
    /// threshold; it was not applied and the pixel is finished.
    Exhausted,
}

/// Running state of one pixel during front-to-back compositing.
#[derive(Clone, Debug)]
pub struct Compositor {
    color: Rgb,
    transmittance: f32,
    alpha_min: f32,
    transmittance_min: f32,
    pub processed: u32,
    pub blends: u32,
    done: bool,
}

impl Compositor {
    pub fn new(alpha_min: f32, transmittance_min: f32) -> Self {
        Self {
            color: [0.0; 3],
            transmittance: 1.0,
            alpha_min,
            transmittance_min,
            processed: 0,
            blends: 0,
            done: false,
        }
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn transmittance(&self) -> f32 {
        self.transmittance
    }

    #[inline]
    pub fn push(&mut self, alpha: f32, rgb: Rgb) -> BlendStep {
        if self.done {
            return BlendStep::Exhausted;
        }
        self.processed += 1;
        if alpha < self.alpha_min {
            return BlendStep::Skipped;
        }
        let next = self.transmittance * (1.0 - alpha);
        if next < self.transmittance_min {
            self.done = true;
            return BlendStep::Exhausted;
        }
        for c in 0..3 {
            self.color[c] += rgb[c] * alpha * self.transmittance;
        }
        self.transmittance = next;
        self.blends += 1;
        BlendStep::Blended
    }

    pub fn finish(&self, background: Rgb) -> BlendResult {
        let t = self.transmittance;
        BlendResult {
            color: [
                self.color[0] + t * background[0],
                self.color[1] + t * background[1],
                self.color[2] + t * background[2],
            ],
            transmittance: t,
            processed: self.processed,
            blends: self.blends,
            exited: self.done,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlendResult {
    pub color: Rgb,
    pub transmittance: f32,
    /// Opacity values consumed, including skipped ones and the one that triggered the exit.
    pub processed: u32,
    pub blends: u32,
    pub exited: bool,
}

/// Composite a depth-ordered sequence of `(alpha, rgb)` contributions.
pub fn blend_pixel(contributions: &[(f32, Rgb)], params: &BlendParams) -> BlendResult {
    let mut comp = Compositor::new(params.alpha_min, params.transmittance_min);
    for &(alpha, rgb) in contributions {
        if comp.push(alpha, rgb) == BlendStep::Exhausted {
            break;
        }
    }
    comp.finish(params.background)
}

/// Rendered image with per-pixel final transmittance, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
    pub final_transmittance: Vec<f32>,
}

/// Pixel difference summary between two images of equal size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageDiff {
    pub differing_pixels: u64,
    pub max_abs: [f32; 3],
}

impl ImageDiff {
    pub fn is_identical(&self) -> bool {
        self.differing_pixels == 0
    }
}

impl ImageBuffer {
    pub fn filled(width: u32, height: u32, background: Rgb) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            pixels: vec![background; n],
            final_transmittance: vec![1.0; n],
        }
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn write_tile(&mut self, tile: &TileImage) {
        let r = tile.rect;
        let w = r.width() as usize;
        for (row, y) in (r.y0..r.y1).enumerate() {
            let dst = (y * self.width + r.x0) as usize;
            self.pixels[dst..dst + w].copy_from_slice(&tile.pixels[row * w..(row + 1) * w]);
            self.final_transmittance[dst..dst + w]
                .copy_from_slice(&tile.transmittance[row * w..(row + 1) * w]);
        }
    }

    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .flat_map(|p| p.map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8))
            .collect()
    }

    pub fn write_ppm<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.to_rgb8())
    }

    /// Bitwise comparison of pixel values; `max_abs` is per channel.
    pub fn diff(&self, other: &ImageBuffer) -> Result<ImageDiff> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::usage(format!(
                "image sizes differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        let mut out = ImageDiff {
            differing_pixels: 0,
            max_abs: [0.0; 3],
        };
        for (a, b) in self.pixels.iter().zip(&other.pixels) {
            if a.iter().zip(b).any(|(x, y)| x.to_bits() != y.to_bits()) {
                out.differing_pixels += 1;
            }
            for c in 0..3 {
                out.max_abs[c] = out.max_abs[c].max((a[c] - b[c]).abs());
            }
        }
        Ok(out)
    }
}

/// Output region of one tile.
#[derive(Clone, Debug)]
pub struct TileImage {
    pub rect: Rect,
    pub pixels: Vec<Rgb>,
    pub transmittance: Vec<f32>,
}

impl TileImage {
    pub fn new(rect: Rect) -> Self {
        let n = rect.width() as usize * rect.height() as usize;
        Self {
            rect,
            pixels: vec![[0.0; 3]; n],
            transmittance: vec![1.0; n],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TileCounters {
    pub alpha_computations: u64,
    pub blends: u64,
    /// Pixels whose compositing stopped on the transmittance threshold.
    pub early_exits: u64,
    /// Group-list entries rejected by the tile-location mask test.
    pub filtered_out: u64,
    /// Group-list entries examined by the mask filter.
    pub mask_scans: u64,
    /// Sum over pixels of the (filtered) list length.
    pub list_len_pixel_sum: u64,
}

impl TileCounters {
    pub fn add(&mut self, o: &TileCounters) {
        self.alpha_computations += o.alpha_computations;
        self.blends += o.blends;
        self.early_exits += o.early_exits;
        self.filtered_out += o.filtered_out;
        self.mask_scans += o.mask_scans;
        self.list_len_pixel_sum += o.list_len_pixel_sum;
    }
}

#[derive(Clone, Copy)]
struct Splat {
    center: [f32; 2],
    conic: Sym2,
    opacity: f32,
    color: Rgb,
}

/// Rasterize one tile.
///
/// Baseline mode passes the tile's own list and `tile_location = None`.
/// Grouped mode passes the enclosing group's list and the tile's one-hot
/// location; entries whose mask misses the location are dropped in order.
pub fn rasterize_tile(
    tile_index: u32,
    list: &SortedList,
    tile_location: Option<u16>,
    projected: &ProjectedScene,
    cfg: &RenderConfig,
    layout: &TileLayout,
    out: &mut TileImage,
) -> Result<TileCounters> {
    let rect = layout.tile_rect(tile_index)?;
    if out.rect != rect {
        return Err(Error::usage(format!(
            "output region {:?} does not match tile {tile_index} {rect:?}",
            out.rect
        )));
    }
    let mut counters = TileCounters::default();
    let lookup = |id: u32| {
        projected
            .get(id)
            .ok_or_else(|| Error::usage(format!("gaussian {id} has no projected features")))
    };
    let expected_owner;
    let mut splats = Vec::with_capacity(list.len());
    match tile_location {
        None => {
            expected_owner = ListOwner::Tile(tile_index);
            for e in &list.entries {
                splats.push(lookup(e.id)?);
            }
        }
        Some(loc) => {
            expected_owner = ListOwner::Group(layout.group_of_tile(tile_index));
            if loc != layout.tile_location(tile_index) {
                return Err(Error::usage(format!(
                    "tile_location {loc:#06x} does not locate tile {tile_index} in its group"
                )));
            }
            let masks = list
                .masks
                .as_ref()
                .ok_or_else(|| Error::usage("grouped rasterization needs a masked list"))?;
            counters.mask_scans = list.len() as u64;
            for (e, &m) in list.entries.iter().zip(masks) {
                if m & loc != 0 {
                    splats.push(lookup(e.id)?);
                } else {
                    counters.filtered_out += 1;
                }
            }
        }
    }
    if list.owner != expected_owner {
        return Err(Error::usage(format!(
            "list owned by {:?} passed for tile {tile_index} (expected {expected_owner:?})",
            list.owner
        )));
    }
    let splats: Vec<Splat> = splats
        .into_iter()
        .map(|pg| Splat {
            center: pg.center,
            conic: pg.conic,
            opacity: pg.opacity,
            color: pg.color,
        })
        .collect();

    let pixel_count = rect.width() as u64 * rect.height() as u64;
    counters.list_len_pixel_sum = splats.len() as u64 * pixel_count;
    let w = rect.width() as usize;
    for y in rect.y0..rect.y1 {
        for x in rect.x0..rect.x1 {
            let p = pixel_center(x, y);
            let mut comp = Compositor::new(cfg.alpha_min, cfg.transmittance_min);
            for s in &splats {
                let a = alpha_raw(s.center, s.conic, s.opacity, p);
                if comp.push(a, s.color) == BlendStep::Exhausted {
                    break;
                }
            }
            let r = comp.finish(cfg.background);
            counters.alpha_computations += r.processed as u64;
            counters.blends += r.blends as u64;
            counters.early_exits += r.exited as u64;
            let i = (y - rect.y0) as usize * w + (x - rect.x0) as usize;
            out.pixels[i] = r.color;
            out.transmittance[i] = r.transmittance;
        }
    }
    Ok(counters)
}
