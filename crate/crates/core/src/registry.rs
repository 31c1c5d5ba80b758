//! Name lookup for boundary methods and pipelines.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bounds::{self, Boundary};
use crate::error::{Error, Result};
use crate::pipeline::{self, RenderPipeline};

/// Names are stored lowercase; lookups ignore case.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    boundaries: BTreeMap<String, Arc<dyn Boundary>>,
    pipelines: BTreeMap<String, Arc<dyn RenderPipeline>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// AABB, OBB and ellipse boundaries; baseline and grouped pipelines.
    pub fn builtin() -> Self {
        let mut r = Self::new();
        for b in [bounds::aabb(), bounds::obb(), bounds::ellipse()] {
            r.register_boundary(b).expect("builtin names are distinct");
        }
        for p in [pipeline::baseline(), pipeline::grouped()] {
            r.register_pipeline(p).expect("builtin names are distinct");
        }
        r
    }

    pub fn register_boundary(&mut self, b: Arc<dyn Boundary>) -> Result<()> {
        insert_unique(&mut self.boundaries, b.name().to_string(), b, "boundary")
    }

    pub fn register_pipeline(&mut self, p: Arc<dyn RenderPipeline>) -> Result<()> {
        insert_unique(&mut self.pipelines, p.name().to_string(), p, "pipeline")
    }

    pub fn boundary(&self, name: &str) -> Result<Arc<dyn Boundary>> {
        lookup(&self.boundaries, name, "boundary")
    }

    pub fn pipeline(&self, name: &str) -> Result<Arc<dyn RenderPipeline>> {
        lookup(&self.pipelines, name, "pipeline")
    }

    pub fn boundary_names(&self) -> impl Iterator<Item = &str> {
        self.boundaries.keys().map(String::as_str)
    }

    pub fn pipeline_names(&self) -> impl Iterator<Item = &str> {
        self.pipelines.keys().map(String::as_str)
    }
}

fn insert_unique<T>(map: &mut BTreeMap<String, T>, name: String, v: T, kind: &str) -> Result<()> {
    let key = name.to_ascii_lowercase();
    if map.contains_key(&key) {
        return Err(Error::usage(format!("{kind} '{name}' is already registered")));
    }
    map.insert(key, v);
    Ok(())
}

fn lookup<T: Clone>(map: &BTreeMap<String, T>, name: &str, kind: &str) -> Result<T> {
    map.get(&name.to_ascii_lowercase()).cloned().ok_or_else(|| {
        let known: Vec<&str> = map.keys().map(String::as_str).collect();
        Error::usage(format!("unknown {kind} '{name}' (known: {})", known.join(", ")))
    })
}
