//! End-to-end runs: seed, distance init, evolution and meshing, plus the
//! file-level drivers behind the command-line tool and the two-method
//! benchmark.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::distance::{rebuild_sdf, SignedDistanceField};
use crate::error::{Error, Result};
use crate::io::{self, PipelineConfig};
use crate::levelset::evolve;
use crate::mesh::{marching_cubes, TriangleMesh};
use crate::metrics::{compare, AgreementReport};
use crate::phantom::PhantomSpec;
use crate::seeding::generate_seed_stages;
use crate::volume::{LabelMask, Volume, VoxelIndex};

/// Radius of the generic spherical seed used as the benchmark baseline.
pub const SPHERE_SEED_RADIUS: f64 = 3.0;

/// Warning attached to a report whose evolution hit `max_iters`.
pub const NON_CONVERGED: &str = "NonConverged";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedMethod {
    /// Intensity clustering followed by morphological cleanup.
    Cluster,
    /// Ball of [`SPHERE_SEED_RADIUS`] voxels around the seed point.
    Sphere,
}

/// Wall-clock seconds per phase. Kept apart from the rest of the report so
/// that reproducibility checks can drop it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub seeding: f64,
    pub distance_init: f64,
    pub evolution: f64,
    pub meshing: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub seed_point: [usize; 3],
    pub seed_method: SeedMethod,
    pub params: PipelineConfig,
    /// Cluster count and erosion steps actually used; absent for sphere seeds.
    pub resolved_k: Option<usize>,
    pub resolved_erosion_steps: Option<usize>,
    pub seed_voxels: usize,
    pub iterations: usize,
    pub converged: bool,
    pub reinits: usize,
    pub warnings: Vec<String>,
    pub volume_voxels: usize,
    /// Voxel count times the voxel volume from the header spacing.
    pub volume_physical: f64,
    pub mesh_vertices: usize,
    pub mesh_triangles: usize,
    pub agreement: Option<AgreementReport>,
    pub timings: PhaseTimings,
}

impl RunReport {
    /// JSON with the `timings` object removed, for reproducibility checks.
    pub fn without_timings(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("timings");
        v
    }
}

#[derive(Clone, Debug)]
pub struct Segmentation {
    pub seed: LabelMask,
    pub field: SignedDistanceField,
    pub mask: LabelMask,
    pub mesh: TriangleMesh,
    pub report: RunReport,
}

pub fn sphere_seed(dims: crate::volume::Dims, x0: VoxelIndex, radius: f64) -> LabelMask {
    LabelMask::from_fn(dims, |p| {
        let d = [p.i, p.j, p.k]
            .iter()
            .zip([x0.i, x0.j, x0.k])
            .map(|(&a, b)| (a as f64 - b as f64).powi(2))
            .sum::<f64>();
        d.sqrt() <= radius
    })
}

/// Runs the whole pipeline on an in-memory volume. Algorithms work on the
/// unit voxel grid; spacing only enters the reported physical volume.
pub fn segment_volume(
    volume: &Volume,
    x0: VoxelIndex,
    config: &PipelineConfig,
    method: SeedMethod,
    truth: Option<&LabelMask>,
    label: &str,
) -> Result<Segmentation> {
    config.evolution.validate()?;
    let dims = volume.dims();
    if !x0.in_bounds(dims) {
        return Err(Error::InvalidParams(format!(
            "seed point {:?} outside volume {:?}",
            x0.as_array(),
            dims
        )));
    }
    if let Some(t) = truth {
        if t.dims() != dims {
            return Err(Error::DimensionMismatch(dims, t.dims()));
        }
    }
    let mut timings = PhaseTimings::default();

    let clock = Instant::now();
    let normalized = volume.normalize()?;
    let (seed, resolved_k, resolved_steps) = match method {
        SeedMethod::Cluster => {
            let stages = generate_seed_stages(&normalized, x0, &config.seed)?;
            (stages.dilated, Some(stages.k), Some(stages.erosion_steps))
        }
        SeedMethod::Sphere => (sphere_seed(dims, x0, SPHERE_SEED_RADIUS), None, None),
    };
    timings.seeding = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let init = rebuild_sdf(&seed)?;
    timings.distance_init = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let evo = evolve(&normalized, &init, &config.evolution)?;
    timings.evolution = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mask = evo.field.to_mask();
    let mesh = marching_cubes(&evo.field)?;
    timings.meshing = clock.elapsed().as_secs_f64();

    let agreement = truth.map(|t| compare(&mask, t)).transpose()?;
    let volume_voxels = mask.count();
    let report = RunReport {
        label: label.to_string(),
        seed_point: x0.as_array(),
        seed_method: method,
        params: *config,
        resolved_k,
        resolved_erosion_steps: resolved_steps,
        seed_voxels: seed.count(),
        iterations: evo.iterations,
        converged: evo.converged,
        reinits: evo.reinits,
        warnings: if evo.converged {
            vec![]
        } else {
            vec![NON_CONVERGED.to_string()]
        },
        volume_voxels,
        volume_physical: volume_voxels as f64 * volume.spacing().iter().product::<f64>(),
        mesh_vertices: mesh.vertices.len(),
        mesh_triangles: mesh.triangles.len(),
        agreement,
        timings,
    };
    Ok(Segmentation {
        seed,
        field: evo.field,
        mask,
        mesh,
        report,
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    io::write_atomic(path, text.as_bytes())
}

#[derive(Clone, Debug)]
pub struct SegmentArgs {
    pub volume: PathBuf,
    pub header: PathBuf,
    pub seed: VoxelIndex,
    pub config: Option<PathBuf>,
    pub out_prefix: PathBuf,
    /// Ground-truth mask raw file; its header is the `.json` sidecar.
    pub truth: Option<PathBuf>,
    pub label: String,
}

/// Writes `{prefix}_mask.raw`, `{prefix}_mask.json`, `{prefix}_mesh.obj` and
/// `{prefix}_report.json`.
pub fn run_segment(args: &SegmentArgs) -> Result<RunReport> {
    let volume = io::read_volume(&args.volume, &args.header)?;
    let config = match &args.config {
        Some(p) => PipelineConfig::read(p)?,
        None => PipelineConfig::default(),
    };
    let truth = match &args.truth {
        Some(p) => Some(io::read_mask(p, &io::sidecar_path(p))?),
        None => None,
    };
    let seg = segment_volume(
        &volume,
        args.seed,
        &config,
        SeedMethod::Cluster,
        truth.as_ref(),
        &args.label,
    )?;
    io::write_mask(
        &seg.mask,
        &with_suffix(&args.out_prefix, "_mask.raw"),
        &with_suffix(&args.out_prefix, "_mask.json"),
    )?;
    io::write_mesh(&seg.mesh, &with_suffix(&args.out_prefix, "_mesh.obj"))?;
    write_json(&seg.report, &with_suffix(&args.out_prefix, "_report.json"))?;
    Ok(seg.report)
}

/// Writes `{prefix}_volume.raw/.json` and `{prefix}_truth.raw/.json`.
pub fn run_phantom(spec: &PhantomSpec, out_prefix: &Path) -> Result<()> {
    let (volume, truth) = spec.generate()?;
    io::write_volume(
        &volume,
        &with_suffix(out_prefix, "_volume.raw"),
        &with_suffix(out_prefix, "_volume.json"),
    )?;
    io::write_mask(
        &truth,
        &with_suffix(out_prefix, "_truth.raw"),
        &with_suffix(out_prefix, "_truth.json"),
    )
}

pub fn read_phantom_spec(path: &Path) -> Result<PhantomSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::MalformedConfig(format!("phantom spec: {e}")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: SeedMethod,
    pub report: RunReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub phantom: PhantomSpec,
    pub rows: Vec<BenchRow>,
}

impl BenchTable {
    pub fn row(&self, method: SeedMethod) -> Option<&RunReport> {
        self.rows
            .iter()
            .find(|r| r.method == method)
            .map(|r| &r.report)
    }

    /// Aligned plain-text rendering, one line per method.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<8} {:>10} {:>10} {:>9} {:>8} {:>8} {:>10}\n",
            "method", "seed_vox", "iterations", "converged", "dice", "overlap", "seconds"
        );
        for row in &self.rows {
            let r = &row.report;
            let (dice, overlap) = r
                .agreement
                .map_or((f64::NAN, f64::NAN), |a| (a.dice, a.overlap));
            let t = r.timings;
            let name = match row.method {
                SeedMethod::Cluster => "cluster",
                SeedMethod::Sphere => "sphere",
            };
            out.push_str(&format!(
                "{:<8} {:>10} {:>10} {:>9} {:>8.4} {:>8.4} {:>10.3}\n",
                name,
                r.seed_voxels,
                r.iterations,
                r.converged,
                dice,
                overlap,
                t.seeding + t.distance_init + t.evolution + t.meshing
            ));
        }
        out
    }
}

/// Segments a phantom from its interior point with both seeding methods.
pub fn bench_phantom(spec: &PhantomSpec, config: &PipelineConfig) -> Result<BenchTable> {
    let (volume, truth) = spec.generate()?;
    let x0 = spec.geometry.interior_point();
    let label = match spec.geometry {
        crate::phantom::Geometry::Sphere { .. } => "sphere",
        crate::phantom::Geometry::TwoBlobsBridged { .. } => "two-blobs-bridged",
        crate::phantom::Geometry::BentTube { .. } => "bent-tube",
    };
    let mut rows = Vec::new();
    for method in [SeedMethod::Cluster, SeedMethod::Sphere] {
        let seg = segment_volume(&volume, x0, config, method, Some(&truth), label)?;
        rows.push(BenchRow {
            method,
            report: seg.report,
        });
    }
    Ok(BenchTable {
        phantom: spec.clone(),
        rows,
    })
}

#[derive(Clone, Debug)]
pub struct BenchArgs {
    pub spec: PathBuf,
    pub config: Option<PathBuf>,
    /// JSON output; the text table goes next to it with a `.txt` extension.
    pub out: PathBuf,
}

pub fn run_bench(args: &BenchArgs) -> Result<BenchTable> {
    let spec = read_phantom_spec(&args.spec)?;
    let config = match &args.config {
        Some(p) => PipelineConfig::read(p)?,
        None => PipelineConfig::default(),
    };
    let table = bench_phantom(&spec, &config)?;
    write_json(&table, &args.out)?;
    io::write_atomic(&args.out.with_extension("txt"), table.to_text().as_bytes())?;
    Ok(table)
}
