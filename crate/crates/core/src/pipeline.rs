//! End-to-end orchestration of the per-tile and the tile-grouping pipelines,
//! with work instrumentation.

use std::fmt::Debug;
use std::sync::Arc;

use rayon::prelude::*;

use crate::bounds::{self, Boundary, Identified};
use crate::error::{Error, Result};
use crate::model::{Camera, PipelineMode, RenderConfig, TileLayout};
use crate::preprocess::{preprocess_scene, ProjectedScene};
use crate::raster::{
    alpha_at, blend_pixel, pixel_center, rasterize_tile, BlendParams, ImageBuffer, TileCounters,
    TileImage,
};
use crate::scene_io::SceneSource;
use crate::sorting::{self, ListOwner, SortEntry, SortedList};

/// Instrumentation record of one render.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkCounters {
    pub mode: PipelineMode,
    pub pixels: u64,
    pub gaussians_in: u64,
    /// Gaussians with projected features (culled and degenerate ones excluded).
    pub gaussians_after_cull: u64,
    pub degenerate: u64,
    /// Boundary tests spent identifying tiles (baseline) or groups (grouped).
    pub identification_tests: u64,
    /// Per-tile boundary tests spent building bitmasks; zero in baseline mode.
    pub bitmask_tests: u64,
    /// (Gaussian, tile) pairs. In grouped mode derived from the mask bits.
    pub tile_entries: u64,
    /// (Gaussian, group) pairs from group identification, before zero masks are dropped.
    pub group_entries: u64,
    /// Group entries whose mask came out zero.
    pub dropped_masks: u64,
    pub sort_lists: u64,
    pub sort_entries: u64,
    /// Sum over lists of n * log2(max(n, 2)).
    pub sort_ops: f64,
    pub mask_scans: u64,
    pub filtered_out: u64,
    pub alpha_computations: u64,
    pub blends: u64,
    pub early_exits: u64,
    /// Gaussians assigned to at least one tile.
    pub assigned_gaussians: u64,
    /// Gaussians assigned to at least two tiles.
    pub shared_gaussians: u64,
    /// Mean per-pixel list length (opacity evaluations demanded without early exit).
    pub per_pixel_processed_mean: f64,
    /// Mean per-pixel opacity evaluations actually performed.
    pub per_pixel_processed_exit_mean: f64,
    pub tiles_per_gaussian_mean: f64,
    /// Percentage of assigned Gaussians that are shared.
    pub shared_gaussian_pct: f64,
}

impl WorkCounters {
    fn empty(mode: PipelineMode, pixels: u64) -> Self {
        Self {
            mode,
            pixels,
            gaussians_in: 0,
            gaussians_after_cull: 0,
            degenerate: 0,
            identification_tests: 0,
            bitmask_tests: 0,
            tile_entries: 0,
            group_entries: 0,
            dropped_masks: 0,
            sort_lists: 0,
            sort_entries: 0,
            sort_ops: 0.0,
            mask_scans: 0,
            filtered_out: 0,
            alpha_computations: 0,
            blends: 0,
            early_exits: 0,
            assigned_gaussians: 0,
            shared_gaussians: 0,
            per_pixel_processed_mean: 0.0,
            per_pixel_processed_exit_mean: 0.0,
            tiles_per_gaussian_mean: 0.0,
            shared_gaussian_pct: 0.0,
        }
    }

    /// Zeroed counters for `mode`; useful as a cost-model input.
    pub fn zero(mode: PipelineMode) -> Self {
        Self::empty(mode, 0)
    }

    fn finish(&mut self, list_len_pixel_sum: u64) {
        let ratio = |a: f64, b: u64| if b > 0 { a / b as f64 } else { 0.0 };
        self.per_pixel_processed_mean = ratio(list_len_pixel_sum as f64, self.pixels);
        self.per_pixel_processed_exit_mean = ratio(self.alpha_computations as f64, self.pixels);
        self.tiles_per_gaussian_mean = ratio(self.tile_entries as f64, self.assigned_gaussians);
        self.shared_gaussian_pct = 100.0 * ratio(self.shared_gaussians as f64, self.assigned_gaussians);
    }

    fn absorb_raster(&mut self, c: &TileCounters) {
        self.alpha_computations += c.alpha_computations;
        self.blends += c.blends;
        self.early_exits += c.early_exits;
        self.mask_scans += c.mask_scans;
        self.filtered_out += c.filtered_out;
    }

    /// Column names and values in a fixed order.
    pub fn columns(&self) -> Vec<(&'static str, String)> {
        vec![
            ("mode", self.mode.to_string()),
            ("pixels", self.pixels.to_string()),
            ("gaussians_in", self.gaussians_in.to_string()),
            ("gaussians_after_cull", self.gaussians_after_cull.to_string()),
            ("degenerate", self.degenerate.to_string()),
            ("identification_tests", self.identification_tests.to_string()),
            ("bitmask_tests", self.bitmask_tests.to_string()),
            ("tile_entries", self.tile_entries.to_string()),
            ("group_entries", self.group_entries.to_string()),
            ("dropped_masks", self.dropped_masks.to_string()),
            ("sort_lists", self.sort_lists.to_string()),
            ("sort_entries", self.sort_entries.to_string()),
            ("sort_ops", format!("{:.3}", self.sort_ops)),
            ("mask_scans", self.mask_scans.to_string()),
            ("filtered_out", self.filtered_out.to_string()),
            ("alpha_computations", self.alpha_computations.to_string()),
            ("blends", self.blends.to_string()),
            ("early_exits", self.early_exits.to_string()),
            ("assigned_gaussians", self.assigned_gaussians.to_string()),
            ("shared_gaussians", self.shared_gaussians.to_string()),
            ("per_pixel_processed_mean", format!("{:.6}", self.per_pixel_processed_mean)),
            (
                "per_pixel_processed_exit_mean",
                format!("{:.6}", self.per_pixel_processed_exit_mean),
            ),
            ("tiles_per_gaussian_mean", format!("{:.6}", self.tiles_per_gaussian_mean)),
            ("shared_gaussian_pct", format!("{:.6}", self.shared_gaussian_pct)),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct Rendered {
    pub image: ImageBuffer,
    pub counters: WorkCounters,
}

/// A rendering strategy selectable by name.
pub trait RenderPipeline: Send + Sync + Debug {
    fn name(&self) -> &str;
    fn mode(&self) -> PipelineMode;
    fn render(&self, scene: &SceneSource, cam: &Camera, cfg: &RenderConfig) -> Result<Rendered>;
}

#[derive(Debug, Default)]
pub struct BaselinePipeline;

#[derive(Debug, Default)]
pub struct GroupedPipeline;

impl RenderPipeline for BaselinePipeline {
    fn name(&self) -> &str {
        "baseline"
    }

    fn mode(&self) -> PipelineMode {
        PipelineMode::Baseline
    }

    fn render(&self, scene: &SceneSource, cam: &Camera, cfg: &RenderConfig) -> Result<Rendered> {
        render_baseline(scene, cam, cfg)
    }
}

impl RenderPipeline for GroupedPipeline {
    fn name(&self) -> &str {
        "grouped"
    }

    fn mode(&self) -> PipelineMode {
        PipelineMode::Grouped
    }

    fn render(&self, scene: &SceneSource, cam: &Camera, cfg: &RenderConfig) -> Result<Rendered> {
        render_grouped(scene, cam, cfg)
    }
}

pub fn baseline() -> Arc<dyn RenderPipeline> {
    Arc::new(BaselinePipeline)
}

pub fn grouped() -> Arc<dyn RenderPipeline> {
    Arc::new(GroupedPipeline)
}

/// Render with whichever pipeline `cfg` selects.
pub fn render(scene: &SceneSource, cam: &Camera, cfg: &RenderConfig) -> Result<Rendered> {
    cfg.pipeline.render(scene, cam, cfg)
}

fn check_mode(cfg: &RenderConfig, want: PipelineMode) -> Result<()> {
    cfg.validate()?;
    if cfg.pipeline.mode() != want {
        return Err(Error::usage(format!(
            "configuration selects the {} pipeline, not {want}",
            cfg.pipeline.mode()
        )));
    }
    Ok(())
}

fn prepare(
    scene: &SceneSource,
    cam: &Camera,
    cfg: &RenderConfig,
    mode: PipelineMode,
) -> Result<(ProjectedScene, WorkCounters)> {
    cam.validate()?;
    let ps = preprocess_scene(scene, cam, cfg.radius_scale)?;
    let mut c = WorkCounters::empty(mode, cam.pixel_count());
    c.gaussians_in = ps.gaussians_in;
    c.gaussians_after_cull = ps.len() as u64;
    c.degenerate = ps.degenerate;
    Ok((ps, c))
}

/// Rasterize every tile in parallel, then write the results in tile order.
fn rasterize_all<F>(
    layout: &TileLayout,
    cfg: &RenderConfig,
    counters: &mut WorkCounters,
    job: F,
) -> Result<ImageBuffer>
where
    F: Fn(u32, &mut TileImage) -> Result<TileCounters> + Sync,
{
    let tiles: Vec<(TileImage, TileCounters)> = (0..layout.tile_count() as u32)
        .into_par_iter()
        .map(|t| {
            let mut img = TileImage::new(layout.tile_rect(t)?);
            let c = job(t, &mut img)?;
            Ok((img, c))
        })
        .collect::<Result<_>>()?;
    let mut image = ImageBuffer::filled(layout.width, layout.height, cfg.background);
    let mut list_len_pixel_sum = 0;
    for (img, c) in &tiles {
        image.write_tile(img);
        counters.absorb_raster(c);
        list_len_pixel_sum += c.list_len_pixel_sum;
    }
    counters.finish(list_len_pixel_sum);
    Ok(image)
}

fn record_sort(counters: &mut WorkCounters, lists: &[SortedList]) {
    counters.sort_lists = lists.len() as u64;
    counters.sort_entries = lists.iter().map(|l| l.len() as u64).sum();
    counters.sort_ops = lists.iter().map(|l| sorting::sort_cost(l.len() as u64)).sum();
}

/// Index of each owner's list, `None` for owners without entries.
fn list_index(lists: &[SortedList], owners: usize) -> Vec<Option<usize>> {
    let mut idx = vec![None; owners];
    for (i, l) in lists.iter().enumerate() {
        let (ListOwner::Tile(o) | ListOwner::Group(o)) = l.owner;
        idx[o as usize] = Some(i);
    }
    idx
}

/// Per-tile pipeline: identify tiles, sort each tile's list, rasterize.
pub fn render_baseline(scene: &SceneSource, cam: &Camera, cfg: &RenderConfig) -> Result<Rendered> {
    check_mode(cfg, PipelineMode::Baseline)?;
    let layout = TileLayout::new(cam.width, cam.height, cfg.tile_size, cfg.tile_size)?;
    let (ps, mut counters) = prepare(scene, cam, cfg, PipelineMode::Baseline)?;

    let identified: Vec<Identified> = ps
        .footprints
        .par_iter()
        .map(|fp| bounds::identify_tiles(fp, &layout, cfg.tile_bounds.as_ref()))
        .collect();
    let mut assignments = vec![Vec::new(); layout.tile_count()];
    for (fp, ident) in ps.footprints.iter().zip(&identified) {
        counters.identification_tests += ident.tests;
        counters.tile_entries += ident.cells.len() as u64;
        counters.assigned_gaussians += (!ident.cells.is_empty()) as u64;
        counters.shared_gaussians += (ident.cells.len() >= 2) as u64;
        for &t in &ident.cells {
            assignments[t as usize].push(fp.id);
        }
    }
    drop(identified);

    let lists = sorting::sort_per_tile(&assignments, &ps)?;
    record_sort(&mut counters, &lists);
    let index = list_index(&lists, layout.tile_count());

    let image = rasterize_all(&layout, cfg, &mut counters, |t, out| {
        let empty;
        let list = match index[t as usize] {
            Some(i) => &lists[i],
            None => {
                empty = SortedList {
                    owner: ListOwner::Tile(t),
                    entries: Vec::new(),
                    masks: None,
                };
                &empty
            }
        };
        rasterize_tile(t, list, None, &ps, cfg, &layout, out)
    })?;
    Ok(Rendered { image, counters })
}

struct GroupHits {
    groups: Vec<(u32, u16)>,
    identification_tests: u64,
    bitmask_tests: u64,
    identified: u64,
    tiles: u64,
}

/// Tile-grouping pipeline: identify groups, build per-group tile bitmasks,
/// sort each group's list once, rasterize tiles through their location mask.
pub fn render_grouped(scene: &SceneSource, cam: &Camera, cfg: &RenderConfig) -> Result<Rendered> {
    check_mode(cfg, PipelineMode::Grouped)?;
    let layout = TileLayout::for_config(cam, cfg)?;
    let (ps, mut counters) = prepare(scene, cam, cfg, PipelineMode::Grouped)?;

    let hits: Vec<GroupHits> = ps
        .footprints
        .par_iter()
        .map(|fp| {
            let ident = bounds::identify_groups(fp, &layout, cfg.group_bounds.as_ref());
            let mut h = GroupHits {
                groups: Vec::with_capacity(ident.cells.len()),
                identification_tests: ident.tests,
                bitmask_tests: 0,
                identified: ident.cells.len() as u64,
                tiles: 0,
            };
            for &g in &ident.cells {
                let (bm, tests) = bounds::bitmask_for(fp, g, &layout, cfg.tile_bounds.as_ref())?;
                h.bitmask_tests += tests;
                if bm.mask != 0 {
                    h.tiles += bm.mask.count_ones() as u64;
                    h.groups.push((g, bm.mask));
                }
            }
            Ok(h)
        })
        .collect::<Result<_>>()?;

    let mut assignments = vec![Vec::new(); layout.group_count()];
    for (fp, h) in ps.footprints.iter().zip(&hits) {
        counters.identification_tests += h.identification_tests;
        counters.bitmask_tests += h.bitmask_tests;
        counters.group_entries += h.identified;
        counters.dropped_masks += h.identified - h.groups.len() as u64;
        counters.tile_entries += h.tiles;
        counters.assigned_gaussians += (h.tiles >= 1) as u64;
        counters.shared_gaussians += (h.tiles >= 2) as u64;
        for &(g, mask) in &h.groups {
            assignments[g as usize].push((fp.id, mask));
        }
    }
    drop(hits);

    let lists = sorting::sort_per_group(&assignments, &ps)?;
    record_sort(&mut counters, &lists);
    let index = list_index(&lists, layout.group_count());

    let image = rasterize_all(&layout, cfg, &mut counters, |t, out| {
        let g = layout.group_of_tile(t);
        let empty;
        let list = match index[g as usize] {
            Some(i) => &lists[i],
            None => {
                empty = SortedList {
                    owner: ListOwner::Group(g),
                    entries: Vec::new(),
                    masks: Some(Vec::new()),
                };
                &empty
            }
        };
        rasterize_tile(t, list, Some(layout.tile_location(t)), &ps, cfg, &layout, out)
    })?;
    Ok(Rendered { image, counters })
}

/// Independent per-pixel renderer used as an oracle for the tiled pipelines.
///
/// Each pixel gathers every Gaussian whose tile set contains the pixel's
/// tile, orders them by (depth, id) and composites them directly.
pub fn brute_force_reference(scene: &SceneSource, cam: &Camera, cfg: &RenderConfig) -> Result<ImageBuffer> {
    cfg.validate()?;
    let layout = TileLayout::new(cam.width, cam.height, cfg.tile_size, cfg.tile_size)?;
    let ps = preprocess_scene(scene, cam, cfg.radius_scale)?;
    let tile_sets: Vec<Vec<u32>> = ps
        .footprints
        .iter()
        .map(|fp| bounds::identify_tiles(fp, &layout, cfg.tile_bounds.as_ref()).cells)
        .collect();
    let params = BlendParams::from_config(cfg);
    let ts = cfg.tile_size;
    let mut image = ImageBuffer::filled(cam.width, cam.height, cfg.background);
    for y in 0..cam.height {
        for x in 0..cam.width {
            let tile = (y / ts) * layout.tiles_x + x / ts;
            let mut members: Vec<(SortEntry, usize)> = ps
                .gaussians
                .iter()
                .enumerate()
                .filter(|(slot, _)| tile_sets[*slot].contains(&tile))
                .map(|(slot, g)| (SortEntry { id: g.id, depth: g.depth }, slot))
                .collect();
            members.sort_by(|a, b| sorting::depth_order(&a.0, &b.0));
            let p = pixel_center(x, y);
            let contribs: Vec<_> = members
                .iter()
                .map(|&(_, slot)| {
                    let g = &ps.gaussians[slot];
                    (alpha_at(g, p), g.color)
                })
                .collect();
            let r = blend_pixel(&contribs, &params);
            let i = (y * cam.width + x) as usize;
            image.pixels[i] = r.color;
            image.final_transmittance[i] = r.transmittance;
        }
    }
    Ok(image)
}

/// One row of the tile-size profiling study.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsRecord {
    pub tile_size: u32,
    pub method: String,
    pub gaussians_after_cull: u64,
    pub tile_entries: u64,
    pub tiles_per_gaussian_mean: f64,
    pub shared_gaussian_pct: f64,
    pub per_pixel_processed_mean: f64,
    pub per_pixel_processed_exit_mean: f64,
}

/// Baseline renders over every (tile size, method) pair, in argument order.
pub fn collect_stats(
    scene: &SceneSource,
    cam: &Camera,
    tile_sizes: &[u32],
    methods: &[Arc<dyn Boundary>],
) -> Result<Vec<StatsRecord>> {
    let mut out = Vec::with_capacity(tile_sizes.len() * methods.len());
    for &ts in tile_sizes {
        for m in methods {
            let cfg = RenderConfig::baseline(ts, m.clone());
            let c = render_baseline(scene, cam, &cfg)?.counters;
            out.push(StatsRecord {
                tile_size: ts,
                method: m.name().to_string(),
                gaussians_after_cull: c.gaussians_after_cull,
                tile_entries: c.tile_entries,
                tiles_per_gaussian_mean: c.tiles_per_gaussian_mean,
                shared_gaussian_pct: c.shared_gaussian_pct,
                per_pixel_processed_mean: c.per_pixel_processed_mean,
                per_pixel_processed_exit_mean: c.per_pixel_processed_exit_mean,
            });
        }
    }
    Ok(out)
}
