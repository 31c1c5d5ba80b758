//! Analytical cycle and traffic model of a tile-grouping accelerator.
//!
//! Relative only: it ranks configurations by their measured work, it does not
//! predict absolute runtimes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PipelineMode;
use crate::pipeline::WorkCounters;

/// Bytes of one group-list mask word.
const MASK_BYTES: f64 = 2.0;
/// Bytes written per output pixel (8-bit RGB).
const PIXEL_BYTES: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    pub pm_lanes: f64,
    pub tile_check_units: f64,
    pub sort_comparators: f64,
    /// Gaussians per cycle through the mask filter.
    pub mask_filter_width: f64,
    pub raster_units: f64,
    /// Bytes per second.
    pub dram_bandwidth: f64,
    pub bytes_per_gaussian_feature: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            pm_lanes: 4.0,
            tile_check_units: 4.0,
            sort_comparators: 16.0,
            mask_filter_width: 8.0,
            raster_units: 16.0,
            dram_bandwidth: 51.2e9,
            bytes_per_gaussian_feature: 48.0,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("pm_lanes", self.pm_lanes),
            ("tile_check_units", self.tile_check_units),
            ("sort_comparators", self.sort_comparators),
            ("mask_filter_width", self.mask_filter_width),
            ("raster_units", self.raster_units),
            ("dram_bandwidth", self.dram_bandwidth),
            ("bytes_per_gaussian_feature", self.bytes_per_gaussian_feature),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("cost parameter {name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: CostParams =
            serde_json::from_str(text).map_err(|e| Error::parse("cost parameters", e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub mode: PipelineMode,
    pub cycles_preprocess: f64,
    pub cycles_bitmask: f64,
    pub cycles_sort: f64,
    pub cycles_raster: f64,
    pub cycles_total: f64,
    /// Total with bitmask generation and sorting serialized.
    pub cycles_total_serial: f64,
    pub dram_bytes: f64,
    /// Seconds to stream `dram_bytes` at the configured bandwidth.
    pub dram_seconds: f64,
    /// `other.cycles_total / self.cycles_total` per label.
    pub speedup_vs: BTreeMap<String, f64>,
}

impl CostReport {
    pub fn speedup_over(&self, other: &CostReport) -> f64 {
        if self.cycles_total > 0.0 {
            other.cycles_total / self.cycles_total
        } else if other.cycles_total > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    }

    pub fn add_speedup(&mut self, label: impl Into<String>, other: &CostReport) {
        let s = self.speedup_over(other);
        self.speedup_vs.insert(label.into(), s);
    }
}

/// Map measured work to estimated cycles.
///
/// `mode` must match the pipeline that produced `counters`.
pub fn estimate(counters: &WorkCounters, mode: PipelineMode, params: &CostParams) -> Result<CostReport> {
    params.validate()?;
    if counters.mode != mode {
        return Err(Error::usage(format!(
            "counters come from the {} pipeline but the {mode} model was requested",
            counters.mode
        )));
    }
    let c = counters;
    let cycles_preprocess = c.gaussians_after_cull as f64 / params.pm_lanes
        + c.identification_tests as f64 / params.tile_check_units;
    let cycles_bitmask = c.bitmask_tests as f64 / params.tile_check_units;
    let cycles_sort = c.sort_ops / params.sort_comparators;
    let cycles_raster =
        c.alpha_computations as f64 / params.raster_units + c.mask_scans as f64 / params.mask_filter_width;
    let serial = cycles_preprocess + cycles_bitmask + cycles_sort + cycles_raster;
    let cycles_total = match mode {
        PipelineMode::Baseline => cycles_preprocess + cycles_sort + cycles_raster,
        PipelineMode::Grouped => cycles_preprocess + cycles_bitmask.max(cycles_sort) + cycles_raster,
    };
    let mask_bytes = match mode {
        PipelineMode::Baseline => 0.0,
        PipelineMode::Grouped => MASK_BYTES,
    };
    let dram_bytes = c.gaussians_in as f64 * params.bytes_per_gaussian_feature
        + c.sort_entries as f64 * (params.bytes_per_gaussian_feature + mask_bytes)
        + c.pixels as f64 * PIXEL_BYTES;
    Ok(CostReport {
        mode,
        cycles_preprocess,
        cycles_bitmask,
        cycles_sort,
        cycles_raster,
        cycles_total,
        cycles_total_serial: serial,
        dram_bytes,
        dram_seconds: dram_bytes / params.dram_bandwidth,
        speedup_vs: BTreeMap::new(),
    })
}
