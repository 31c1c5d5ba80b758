//! Command-line front end: render, compare, sweep, stats and synth.
//!
//! CSV outputs start with the schema line `# gs-tg-csv v1`, followed by a
//! `#` metadata line and a header row.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gstg_core::bounds::Boundary;
use gstg_core::costmodel::{estimate, CostParams, CostReport};
use gstg_core::pipeline::{collect_stats, Rendered};
use gstg_core::raster::ImageBuffer;
use gstg_core::scene_io::{load_camera, load_ply, synth_scene, write_ply_file, SynthSpec};
use gstg_core::model::{DEFAULT_ALPHA_MIN, DEFAULT_TRANSMITTANCE_MIN};
use gstg_core::{render, Camera, PipelineMode, Registry, RenderConfig, SceneSource, WorkCounters};
use nalgebra::Vector3;

pub const CSV_SCHEMA: &str = "# gs-tg-csv v1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "gstg", version, about = "Tile-grouped Gaussian splatting renderer and benchmark harness")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render one image and its work counters.
    Render(RenderArgs),
    /// Render two configurations and report pixel and counter differences.
    Compare(CompareArgs),
    /// Counters and estimated cycles over tile sizes and tile+group combinations.
    Sweep(SweepArgs),
    /// Tile-size profiling statistics (baseline pipeline).
    Stats(StatsArgs),
    /// Write a synthetic scene as a checkpoint PLY.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone)]
struct SceneArgs {
    /// A .ply checkpoint, a .json synthetic-scene spec, or `synth:key=value,...`.
    #[arg(long)]
    scene: String,
    /// Camera JSON. Defaults to a camera on the -z side framing the scene.
    #[arg(long)]
    camera: Option<PathBuf>,
    /// Image width of the default camera.
    #[arg(long, default_value_t = 256)]
    width: u32,
    /// Image height of the default camera.
    #[arg(long, default_value_t = 256)]
    height: u32,
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    #[arg(long, default_value = "grouped")]
    pipeline: String,
    #[arg(long, default_value_t = 16)]
    tile_size: u32,
    #[arg(long, default_value_t = 64)]
    group_size: u32,
    #[arg(long, default_value = "ellipse")]
    tile_bounds: String,
    #[arg(long, default_value = "ellipse")]
    group_bounds: String,
    /// Background color `r,g,b` in [0, 1].
    #[arg(long)]
    bg: Option<String>,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Output image, PPM (P6). A `.png` path also writes a PNG; the PPM then
    /// goes next to it with the `.ppm` extension.
    #[arg(long)]
    out: PathBuf,
    /// Single-row counters CSV.
    #[arg(long)]
    counters: Option<PathBuf>,
    #[arg(long)]
    cost_params: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// First configuration, e.g. `baseline:16:ellipse`.
    #[arg(long)]
    left: String,
    /// Second configuration, e.g. `grouped:16+64:ellipse+ellipse` (group+tile bounds).
    #[arg(long)]
    right: String,
    #[arg(long)]
    bg: Option<String>,
    /// Background for the first configuration only (overrides --bg).
    #[arg(long)]
    left_bg: Option<String>,
    /// Background for the second configuration only (overrides --bg).
    #[arg(long)]
    right_bg: Option<String>,
    /// Exit 0 even when the images differ.
    #[arg(long)]
    allow_diff: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Baseline tile sizes.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    tile_sizes: Vec<u32>,
    /// Grouped tile+group combinations.
    #[arg(long, value_delimiter = ',', default_value = "8+16,8+32,16+32,16+64,32+64")]
    combos: Vec<String>,
    /// Boundary methods; each row uses one method for both groups and tiles.
    #[arg(long, value_delimiter = ',', default_value = "ellipse")]
    bounds: Vec<String>,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Drop the wall-clock column so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    cost_params: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    tile_sizes: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "aabb,obb,ellipse")]
    methods: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Spec as `key=value,...` or a path to a JSON spec.
    #[arg(long)]
    spec: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

/// Parse arguments and run, writing reports to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            // Writers need not be Send; buffer output produced inside the pool.
            Ok(pool) => {
                let mut buf = Vec::new();
                let r = pool.install(|| dispatch(cli.command, &mut buf));
                let _ = out.write_all(&buf);
                r
            }
            Err(e) => Err(anyhow!("cannot build a {n}-thread pool: {e}")),
        },
        None => dispatch(cli.command, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Render(a) => cmd_render(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Stats(a) => cmd_stats(a, out),
        Command::Synth(a) => cmd_synth(a, out),
    }
}

/// Load a scene from a flag value.
pub fn load_scene(spec: &str) -> Result<SceneSource> {
    if let Some(kv) = spec.strip_prefix("synth:") {
        return Ok(synth_scene(&SynthSpec::from_kv(kv)?)?);
    }
    let path = Path::new(spec);
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("ply") => Ok(load_ply(path).with_context(|| format!("loading {spec}"))?),
        Some("json") => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
            Ok(synth_scene(&SynthSpec::from_json(&text)?)?)
        }
        _ => bail!("scene '{spec}' is neither a .ply, a .json synth spec nor synth:key=value"),
    }
}

/// Camera on the -z side of the scene's bounding box, looking along +z with
/// the identity orientation (image y points along world +y).
pub fn default_camera(scene: &SceneSource, width: u32, height: u32) -> Result<Camera> {
    let (mut lo, mut hi) = (Vector3::repeat(f32::INFINITY), Vector3::repeat(f32::NEG_INFINITY));
    for g in &scene.gaussians {
        lo = lo.inf(&g.position);
        hi = hi.sup(&g.position);
    }
    if scene.is_empty() {
        lo = Vector3::repeat(-1.0);
        hi = Vector3::repeat(1.0);
    }
    let center = (lo + hi) * 0.5;
    let half = ((hi - lo) * 0.5).max().max(1e-3);
    let eye = center - Vector3::new(0.0, 0.0, 3.0 * half);
    Ok(Camera::look_at(eye, center, Vector3::new(0.0, -1.0, 0.0), width, height, 60.0)?)
}

fn scene_and_camera(a: &SceneArgs) -> Result<(SceneSource, Camera)> {
    let scene = load_scene(&a.scene)?;
    let cam = match &a.camera {
        Some(p) => load_camera(p).with_context(|| format!("loading camera {}", p.display()))?,
        None => default_camera(&scene, a.width, a.height)?,
    };
    Ok((scene, cam))
}

fn parse_bg(s: Option<&str>) -> Result<[f32; 3]> {
    let Some(s) = s else { return Ok([0.0; 3]) };
    let v: Vec<f32> = s
        .split(',')
        .map(|p| p.trim().parse::<f32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| anyhow!("--bg expects r,g,b, got '{s}'"))?;
    v.try_into().map_err(|_| anyhow!("--bg expects three components, got '{s}'"))
}

/// Build a render configuration from names; validates every invariant.
pub fn build_config(
    pipeline: &str,
    tile_size: u32,
    group_size: u32,
    tile_bounds: &str,
    group_bounds: &str,
    background: [f32; 3],
) -> Result<RenderConfig> {
    let reg = Registry::builtin();
    let p = reg.pipeline(pipeline)?;
    let tb = reg.boundary(tile_bounds)?;
    let mut cfg = match p.mode() {
        PipelineMode::Baseline => RenderConfig::baseline(tile_size, tb),
        PipelineMode::Grouped => RenderConfig::grouped(tile_size, group_size, reg.boundary(group_bounds)?, tb),
    };
    cfg.pipeline = p;
    cfg.background = background;
    cfg.validate()?;
    Ok(cfg)
}

/// `baseline:16:ellipse` or `grouped:16+64:aabb+ellipse` (group bounds first).
pub fn parse_config_spec(spec: &str, background: [f32; 3]) -> Result<RenderConfig> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [pipeline, sizes, bounds] = parts[..] else {
        bail!("configuration '{spec}' must look like pipeline:tile[+group]:bounds[+tile_bounds]");
    };
    let (tile, group) = match sizes.split_once('+') {
        Some((t, g)) => (t, Some(g)),
        None => (sizes, None),
    };
    let tile: u32 = tile.parse().map_err(|_| anyhow!("bad tile size in '{spec}'"))?;
    let group: u32 = match group {
        Some(g) => g.parse().map_err(|_| anyhow!("bad group size in '{spec}'"))?,
        None => tile,
    };
    let (gb, tb) = bounds.split_once('+').unwrap_or((bounds, bounds));
    build_config(pipeline, tile, group, tb, gb, background)
}

fn config_label(cfg: &RenderConfig) -> String {
    match cfg.pipeline.mode() {
        PipelineMode::Baseline => format!("baseline:{}:{}", cfg.tile_size, cfg.tile_bounds.name()),
        PipelineMode::Grouped => format!(
            "grouped:{}+{}:{}+{}",
            cfg.tile_size,
            cfg.group_size,
            cfg.group_bounds.name(),
            cfg.tile_bounds.name()
        ),
    }
}

fn load_cost_params(p: Option<&PathBuf>) -> Result<CostParams> {
    match p {
        Some(p) => Ok(CostParams::load(p).with_context(|| format!("loading {}", p.display()))?),
        None => Ok(CostParams::default()),
    }
}

fn metadata_line(cfg_alpha_min: f32, cfg_t_min: f32, scene: &SceneSource, cam: &Camera) -> String {
    format!(
        "# alpha_min={cfg_alpha_min} transmittance_min={cfg_t_min} scene={} gaussians={} image={}x{}",
        scene.name,
        scene.len(),
        cam.width,
        cam.height
    )
}

/// Writes a P6 PPM, always. A `.png` output also gets a PNG, with the PPM
/// placed next to it under the `.ppm` extension. Returns the paths written.
fn write_image(img: &ImageBuffer, path: &Path) -> Result<Vec<PathBuf>> {
    let is_png = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    let ppm = if is_png { path.with_extension("ppm") } else { path.to_path_buf() };
    let f = File::create(&ppm).with_context(|| format!("creating {}", ppm.display()))?;
    let mut w = BufWriter::new(f);
    img.write_ppm(&mut w)?;
    w.flush()?;
    let mut written = vec![ppm];
    if is_png {
        image::save_buffer(path, &img.to_rgb8(), img.width, img.height, image::ColorType::Rgb8)
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path.to_path_buf());
    }
    Ok(written)
}

/// Column names and values of a configuration.
fn config_columns(cfg: &RenderConfig) -> Vec<(&'static str, String)> {
    vec![
        ("config", config_label(cfg)),
        ("pipeline", cfg.pipeline.name().to_string()),
        ("tile_size", cfg.tile_size.to_string()),
        ("group_size", cfg.group_size.to_string()),
        ("group_bounds", cfg.group_bounds.name().to_string()),
        ("tile_bounds", cfg.tile_bounds.name().to_string()),
    ]
}

fn cost_columns(r: &CostReport) -> Vec<(&'static str, String)> {
    vec![
        ("cycles_preprocess", format!("{:.3}", r.cycles_preprocess)),
        ("cycles_bitmask", format!("{:.3}", r.cycles_bitmask)),
        ("cycles_sort", format!("{:.3}", r.cycles_sort)),
        ("cycles_raster", format!("{:.3}", r.cycles_raster)),
        ("cycles_total", format!("{:.3}", r.cycles_total)),
        ("cycles_total_serial", format!("{:.3}", r.cycles_total_serial)),
        ("dram_bytes", format!("{:.0}", r.dram_bytes)),
    ]
}

fn csv_line(values: impl IntoIterator<Item = String>) -> String {
    values.into_iter().collect::<Vec<_>>().join(",")
}

fn open_output<'a>(path: Option<&PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(stdout),
    })
}

fn cmd_render(a: RenderArgs, out: &mut dyn Write) -> Result<i32> {
    let c = &a.config;
    let bg = parse_bg(c.bg.as_deref())?;
    let cfg = build_config(&c.pipeline, c.tile_size, c.group_size, &c.tile_bounds, &c.group_bounds, bg)?;
    let params = load_cost_params(a.cost_params.as_ref())?;
    let (scene, cam) = scene_and_camera(&a.scene)?;
    let start = Instant::now();
    let Rendered { image, counters } = render(&scene, &cam, &cfg)?;
    let elapsed = start.elapsed();
    let written = write_image(&image, &a.out)?;
    if let Some(path) = &a.counters {
        let cost = estimate(&counters, counters.mode, &params)?;
        let cols: Vec<_> = config_columns(&cfg)
            .into_iter()
            .chain(counters.columns())
            .chain(cost_columns(&cost))
            .collect();
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(w, "{CSV_SCHEMA}")?;
        writeln!(w, "{}", metadata_line(cfg.alpha_min, cfg.transmittance_min, &scene, &cam))?;
        writeln!(w, "{}", csv_line(cols.iter().map(|c| c.0.to_string())))?;
        writeln!(w, "{}", csv_line(cols.into_iter().map(|c| c.1)))?;
        w.flush()?;
    }
    writeln!(
        out,
        "rendered {} ({}x{}) with {} in {:.1} ms -> {}",
        scene.name,
        cam.width,
        cam.height,
        config_label(&cfg),
        elapsed.as_secs_f64() * 1e3,
        written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ")
    )?;
    Ok(EXIT_OK)
}

fn cmd_compare(a: CompareArgs, out: &mut dyn Write) -> Result<i32> {
    let left_bg = parse_bg(a.left_bg.as_deref().or(a.bg.as_deref()))?;
    let right_bg = parse_bg(a.right_bg.as_deref().or(a.bg.as_deref()))?;
    let left = parse_config_spec(&a.left, left_bg)?;
    let right = parse_config_spec(&a.right, right_bg)?;
    let (scene, cam) = scene_and_camera(&a.scene)?;
    let l = render(&scene, &cam, &left)?;
    let r = render(&scene, &cam, &right)?;
    let d = l.image.diff(&r.image)?;
    writeln!(out, "left:  {}", config_label(&left))?;
    writeln!(out, "right: {}", config_label(&right))?;
    writeln!(out, "differing_pixels: {}", d.differing_pixels)?;
    writeln!(out, "max_abs_diff: {} {} {}", d.max_abs[0], d.max_abs[1], d.max_abs[2])?;
    writeln!(out, "counter deltas (right - left):")?;
    for ((name, lv), (_, rv)) in l.counters.columns().into_iter().zip(r.counters.columns()) {
        if lv == rv {
            continue;
        }
        match (lv.parse::<i64>(), rv.parse::<i64>(), lv.parse::<f64>(), rv.parse::<f64>()) {
            (Ok(x), Ok(y), _, _) => writeln!(out, "  {name}: {lv} -> {rv} ({:+})", y - x)?,
            (_, _, Ok(x), Ok(y)) => writeln!(out, "  {name}: {lv} -> {rv} ({:+.6})", y - x)?,
            _ => writeln!(out, "  {name}: {lv} -> {rv}")?,
        }
    }
    if d.is_identical() {
        writeln!(out, "result: identical")?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "result: different")?;
        Ok(if a.allow_diff { EXIT_OK } else { EXIT_MISMATCH })
    }
}

/// One sweep row before formatting.
struct SweepRow {
    cfg: RenderConfig,
    counters: WorkCounters,
    cost: CostReport,
    wall_ms: f64,
}

fn timed_render(scene: &SceneSource, cam: &Camera, cfg: &RenderConfig) -> Result<(WorkCounters, f64)> {
    let start = Instant::now();
    let r = render(scene, cam, cfg)?;
    Ok((r.counters, start.elapsed().as_secs_f64() * 1e3))
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let params = load_cost_params(a.cost_params.as_ref())?;
    let reg = Registry::builtin();
    let methods: Vec<Arc<dyn Boundary>> = a.bounds.iter().map(|m| reg.boundary(m)).collect::<Result<_, _>>()?;
    let combos: Vec<(u32, u32)> = a
        .combos
        .iter()
        .map(|c| {
            let (t, g) = c.split_once('+').ok_or_else(|| anyhow!("combo '{c}' must be tile+group"))?;
            Ok((t.trim().parse()?, g.trim().parse()?))
        })
        .collect::<Result<_>>()?;
    let mut configs = Vec::new();
    for m in &methods {
        for &t in &a.tile_sizes {
            configs.push(RenderConfig::baseline(t, m.clone()));
        }
        for &(t, g) in &combos {
            configs.push(RenderConfig::grouped(t, g, m.clone(), m.clone()));
        }
    }
    for cfg in &configs {
        cfg.validate()?;
    }
    let (scene, cam) = scene_and_camera(&a.scene)?;

    let mut rows = Vec::with_capacity(configs.len());
    let mut baselines: BTreeMap<(u32, String), CostReport> = BTreeMap::new();
    for cfg in configs {
        let (counters, wall_ms) = timed_render(&scene, &cam, &cfg)?;
        let cost = estimate(&counters, counters.mode, &params)?;
        if counters.mode == PipelineMode::Baseline {
            baselines.insert((cfg.tile_size, cfg.tile_bounds.name().to_string()), cost.clone());
        }
        rows.push(SweepRow {
            cfg,
            counters,
            cost,
            wall_ms,
        });
    }
    for row in &mut rows {
        let key = (row.cfg.tile_size, row.cfg.tile_bounds.name().to_string());
        if !baselines.contains_key(&key) {
            let base = RenderConfig::baseline(key.0, row.cfg.tile_bounds.clone());
            let (c, _) = timed_render(&scene, &cam, &base)?;
            baselines.insert(key.clone(), estimate(&c, c.mode, &params)?);
        }
        let base = baselines[&key].clone();
        row.cost.add_speedup("baseline", &base);
    }

    let mut w = open_output(a.out.as_ref(), out)?;
    writeln!(w, "{CSV_SCHEMA}")?;
    writeln!(w, "{}", metadata_line(DEFAULT_ALPHA_MIN, DEFAULT_TRANSMITTANCE_MIN, &scene, &cam))?;
    let mut header_written = false;
    for row in &rows {
        let mut cols: Vec<_> = config_columns(&row.cfg)
            .into_iter()
            .chain(row.counters.columns())
            .chain(cost_columns(&row.cost))
            .collect();
        cols.push(("speedup_vs_baseline", format!("{:.6}", row.cost.speedup_vs["baseline"])));
        if !a.no_timing {
            cols.push(("wall_ms", format!("{:.3}", row.wall_ms)));
        }
        if !header_written {
            writeln!(w, "{}", csv_line(cols.iter().map(|c| c.0.to_string())))?;
            header_written = true;
        }
        writeln!(w, "{}", csv_line(cols.into_iter().map(|c| c.1)))?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn cmd_stats(a: StatsArgs, out: &mut dyn Write) -> Result<i32> {
    let reg = Registry::builtin();
    let methods: Vec<Arc<dyn Boundary>> = a.methods.iter().map(|m| reg.boundary(m)).collect::<Result<_, _>>()?;
    for &t in &a.tile_sizes {
        gstg_core::TileLayout::new(1, 1, t, t)?;
    }
    let (scene, cam) = scene_and_camera(&a.scene)?;
    let records = collect_stats(&scene, &cam, &a.tile_sizes, &methods)?;
    let mut w = open_output(a.out.as_ref(), out)?;
    writeln!(w, "{CSV_SCHEMA}")?;
    writeln!(w, "{}", metadata_line(DEFAULT_ALPHA_MIN, DEFAULT_TRANSMITTANCE_MIN, &scene, &cam))?;
    writeln!(
        w,
        "tile_size,method,gaussians_after_cull,tile_entries,tiles_per_gaussian_mean,shared_gaussian_pct,per_pixel_processed_mean,per_pixel_processed_exit_mean"
    )?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
            r.tile_size,
            r.method,
            r.gaussians_after_cull,
            r.tile_entries,
            r.tiles_per_gaussian_mean,
            r.shared_gaussian_pct,
            r.per_pixel_processed_mean,
            r.per_pixel_processed_exit_mean
        )?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn cmd_synth(a: SynthArgs, out: &mut dyn Write) -> Result<i32> {
    let mut spec = match a.spec.as_deref() {
        None => SynthSpec::default(),
        Some(s) if s.ends_with(".json") => SynthSpec::from_json(&std::fs::read_to_string(s)?)?,
        Some(s) => SynthSpec::from_kv(s)?,
    };
    if let Some(c) = a.count {
        spec.count = c;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    let scene = synth_scene(&spec)?;
    write_ply_file(&scene, &a.out)?;
    writeln!(out, "wrote {} gaussians to {}", scene.len(), a.out.display())?;
    Ok(EXIT_OK)
}
