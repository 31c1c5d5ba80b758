//! Software renderer for 3D Gaussian splatting with two interchangeable
//! pipelines: the conventional per-tile pipeline and a tile-grouping
//! pipeline that sorts once per group of tiles and filters each tile's
//! Gaussians through a 16-bit mask. Both produce bit-identical images; work
//! counters and an analytical cost model expose the trade-off between them.

pub mod bounds;
pub mod costmodel;
pub mod error;
pub mod model;
pub mod pipeline;
pub mod preprocess;
pub mod raster;
pub mod registry;
pub mod scene_io;
pub mod sorting;

pub use error::{Error, Result};
pub use model::{Camera, Gaussian3D, PipelineMode, ProjectedGaussian, RenderConfig, TileLayout};
pub use pipeline::{render, render_baseline, render_grouped, Rendered, WorkCounters};
pub use registry::Registry;
pub use scene_io::SceneSource;
