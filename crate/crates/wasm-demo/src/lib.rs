//! Browser bindings: generate a phantom, seed it from a clicked voxel, and
//! step the level set while watching the overlay and the Dice score.

use volseg::io::{render_slice, Axis};
use volseg::levelset::Evolver;
use volseg::phantom::PhantomSpec;
use volseg::seeding::{generate_seed_stages, SeedParams, SeedStages};
use volseg::{compare, rebuild_sdf, EvolutionParams, LabelMask, Volume, VoxelIndex};
use wasm_bindgen::prelude::*;

/// Overlays selectable in [`Demo::render`].
const OVERLAYS: [&str; 7] = [
    "none",
    "truth",
    "cluster",
    "eroded",
    "component",
    "seed",
    "front",
];

#[wasm_bindgen]
pub struct Demo {
    volume: Volume,
    normalized: Volume,
    truth: LabelMask,
    stages: Option<SeedStages>,
    evolver: Option<Evolver>,
    params: EvolutionParams,
}

fn js_err(e: volseg::Error) -> JsError {
    JsError::new(&format!("{}: {e}", e.category()))
}

impl Demo {
    fn build(shape: &str, size: usize, noise: f64, rng_seed: u64) -> volseg::Result<Demo> {
        let spec = match shape {
            "tube" | "bent-tube" => {
                PhantomSpec::bent_tube(size, size as f64 / 10.0, noise, rng_seed)
            }
            _ => PhantomSpec::sphere(size, size as f64 / 4.0, noise, rng_seed),
        };
        let (volume, truth) = spec.generate()?;
        let normalized = volume.normalize()?;
        Ok(Demo {
            volume,
            normalized,
            truth,
            stages: None,
            evolver: None,
            params: EvolutionParams::default(),
        })
    }

    fn seed(
        &mut self,
        i: usize,
        j: usize,
        k: usize,
        erosion_steps: usize,
    ) -> volseg::Result<usize> {
        self.stages = None;
        self.evolver = None;
        let params = SeedParams {
            k: None,
            erosion_steps: (erosion_steps > 0).then_some(erosion_steps),
        };
        let stages = generate_seed_stages(&self.normalized, VoxelIndex::new(i, j, k), &params)?;
        let field = rebuild_sdf(&stages.dilated)?;
        self.evolver = Some(Evolver::new(self.normalized.clone(), &field, &self.params)?);
        let n = stages.dilated.count();
        self.stages = Some(stages);
        Ok(n)
    }

    fn advance(&mut self, steps: usize) -> volseg::Result<f64> {
        let Some(ev) = self.evolver.as_mut() else {
            return Ok(0.0);
        };
        for _ in 0..steps {
            if ev.finished() {
                break;
            }
            ev.step()?;
        }
        self.dice_now()
    }

    fn dice_now(&self) -> volseg::Result<f64> {
        match &self.evolver {
            Some(ev) => Ok(compare(&ev.field().to_mask(), &self.truth)?.dice),
            None => Ok(0.0),
        }
    }

    fn overlay(&self, name: &str) -> Option<LabelMask> {
        let s = self.stages.as_ref();
        match name {
            "truth" => Some(self.truth.clone()),
            "cluster" => s.map(|s| s.clustered.clone()),
            "eroded" => s.map(|s| s.eroded.clone()),
            "component" => s.map(|s| s.connected.clone()),
            "seed" => s.map(|s| s.dilated.clone()),
            "front" => self.evolver.as_ref().map(|e| e.field().to_mask()),
            _ => None,
        }
    }

    fn rgba(&self, axis: &str, index: usize, overlay: &str) -> volseg::Result<Vec<u8>> {
        let axis: Axis = axis.parse()?;
        let mask = self.overlay(overlay);
        let (_, _, rgb) = render_slice(&self.volume, mask.as_ref(), axis, index)?;
        Ok(rgb
            .chunks(3)
            .flat_map(|p| [p[0], p[1], p[2], 255])
            .collect())
    }
}

#[wasm_bindgen]
impl Demo {
    /// `shape` is `"sphere"` or `"tube"`; the volume is `size` voxels a side.
    #[wasm_bindgen(constructor)]
    pub fn new(shape: &str, size: usize, noise: f64, rng_seed: u32) -> Result<Demo, JsError> {
        Demo::build(shape, size, noise, rng_seed as u64).map_err(js_err)
    }

    pub fn size(&self) -> usize {
        self.volume.dims()[0]
    }

    pub fn overlays() -> Vec<String> {
        OVERLAYS.iter().map(|s| s.to_string()).collect()
    }

    /// Seeds from voxel `(i, j, k)`; `erosion_steps = 0` picks the default.
    /// Returns the seed size in voxels.
    #[wasm_bindgen(js_name = seedAt)]
    pub fn seed_at(
        &mut self,
        i: usize,
        j: usize,
        k: usize,
        erosion_steps: usize,
    ) -> Result<usize, JsError> {
        self.seed(i, j, k, erosion_steps).map_err(js_err)
    }

    /// Runs up to `steps` iterations and returns the Dice score against the
    /// phantom's ground truth.
    pub fn step(&mut self, steps: usize) -> Result<f64, JsError> {
        self.advance(steps).map_err(js_err)
    }

    pub fn iterations(&self) -> usize {
        self.evolver.as_ref().map_or(0, |e| e.iterations())
    }

    pub fn converged(&self) -> bool {
        self.evolver.as_ref().is_some_and(|e| e.converged())
    }

    /// RGBA pixels of a slice, ready for `ImageData`.
    pub fn render(&self, axis: &str, index: usize, overlay: &str) -> Result<Vec<u8>, JsError> {
        self.rgba(axis, index, overlay).map_err(js_err)
    }
}
