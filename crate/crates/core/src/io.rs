//! File formats: raw little-endian volumes with a JSON sidecar header, u8
//! masks, ASCII OBJ meshes, binary PPM slice images and the flat
//! `key = value` parameter file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levelset::EvolutionParams;
use crate::mesh::TriangleMesh;
use crate::seeding::SeedParams;
use crate::volume::{voxel_count, Dims, LabelMask, Volume};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dtype {
    U8,
    U16,
    F32,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::U8 => 1,
            Dtype::U16 => 2,
            Dtype::F32 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dtype::U8 => "u8",
            Dtype::U16 => "u16",
            Dtype::F32 => "f32",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "u8" => Ok(Dtype::U8),
            "u16" => Ok(Dtype::U16),
            "f32" => Ok(Dtype::F32),
            other => Err(Error::UnknownDtype(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawHeader {
    dims: Dims,
    spacing: [f64; 3],
    dtype: String,
    byte_order: String,
}

/// Sidecar header for a raw payload. The byte order is always little-endian.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeHeader {
    pub dims: Dims,
    pub spacing: [f64; 3],
    pub dtype: Dtype,
}

impl VolumeHeader {
    pub fn payload_len(&self) -> u64 {
        (voxel_count(self.dims) * self.dtype.size()) as u64
    }

    pub fn to_json(&self) -> String {
        let raw = RawHeader {
            dims: self.dims,
            spacing: self.spacing,
            dtype: self.dtype.name().to_string(),
            byte_order: "little".to_string(),
        };
        serde_json::to_string_pretty(&raw).expect("header serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawHeader =
            serde_json::from_str(text).map_err(|e| Error::MalformedHeader(e.to_string()))?;
        if raw.byte_order != "little" {
            return Err(Error::MalformedHeader(format!(
                "unsupported byte order {:?}",
                raw.byte_order
            )));
        }
        if raw.dims.contains(&0) {
            return Err(Error::MalformedHeader("dims must be positive".into()));
        }
        if raw.spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::MalformedHeader("spacing must be positive".into()));
        }
        Ok(Self {
            dims: raw.dims,
            spacing: raw.spacing,
            dtype: Dtype::parse(&raw.dtype)?,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Conventional sidecar location: `foo.raw` -> `foo.json`.
pub fn sidecar_path(raw: &Path) -> PathBuf {
    raw.with_extension("json")
}

/// Writes via a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("path has no file name")))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn read_payload(raw_path: &Path, header: &VolumeHeader) -> Result<Vec<u8>> {
    let bytes = fs::read(raw_path).map_err(|e| Error::io(raw_path, e))?;
    if bytes.len() as u64 != header.payload_len() {
        return Err(Error::HeaderPayloadMismatch {
            path: raw_path.to_path_buf(),
            expected: header.payload_len(),
            actual: bytes.len() as u64,
        });
    }
    Ok(bytes)
}

/// Integer payloads are scaled to `[0, 1]` by their type maximum; `f32`
/// values are taken as they are.
pub fn read_volume(raw_path: &Path, header_path: &Path) -> Result<Volume> {
    let header = VolumeHeader::read(header_path)?;
    let bytes = read_payload(raw_path, &header)?;
    let data: Vec<f64> = match header.dtype {
        Dtype::U8 => bytes.iter().map(|&b| b as f64 / u8::MAX as f64).collect(),
        Dtype::U16 => bytes
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]) as f64 / u16::MAX as f64)
            .collect(),
        Dtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
    };
    Volume::new(header.dims, header.spacing, data)
        .map_err(|e| Error::MalformedHeader(e.to_string()))
}

/// Writes the volume as `f32` plus its header.
pub fn write_volume(volume: &Volume, raw_path: &Path, header_path: &Path) -> Result<()> {
    let header = VolumeHeader {
        dims: volume.dims(),
        spacing: volume.spacing(),
        dtype: Dtype::F32,
    };
    let mut bytes = Vec::with_capacity(volume.len() * 4);
    for &v in volume.data() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    write_atomic(raw_path, &bytes)?;
    write_atomic(header_path, header.to_json().as_bytes())
}

/// One byte per voxel, 0 outside and 1 inside, with a `u8` header.
pub fn write_mask(mask: &LabelMask, raw_path: &Path, header_path: &Path) -> Result<()> {
    let header = VolumeHeader {
        dims: mask.dims(),
        spacing: [1.0; 3],
        dtype: Dtype::U8,
    };
    let bytes: Vec<u8> = mask.data().iter().map(|&b| b as u8).collect();
    write_atomic(raw_path, &bytes)?;
    write_atomic(header_path, header.to_json().as_bytes())
}

pub fn read_mask(raw_path: &Path, header_path: &Path) -> Result<LabelMask> {
    let header = VolumeHeader::read(header_path)?;
    if header.dtype != Dtype::U8 {
        return Err(Error::MalformedHeader(format!(
            "masks are stored as u8, header says {}",
            header.dtype.name()
        )));
    }
    let bytes = read_payload(raw_path, &header)?;
    let mut data = Vec::with_capacity(bytes.len());
    for (offset, &value) in bytes.iter().enumerate() {
        match value {
            0 => data.push(false),
            1 => data.push(true),
            _ => return Err(Error::MalformedMask { offset, value }),
        }
    }
    LabelMask::from_data(header.dims, data)
}

pub fn mesh_to_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::from("# volseg zero level set\n");
    for v in &mesh.vertices {
        out.push_str(&format!("v {:.6} {:.6} {:.6}\n", v[0], v[1], v[2]));
    }
    for t in &mesh.triangles {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    out
}

pub fn write_mesh(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    write_atomic(path, mesh_to_obj(mesh).as_bytes())
}

/// Reads the `v`/`f` subset of OBJ written by [`write_mesh`].
pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let bad = |line: &str| Error::MalformedHeader(format!("bad OBJ line {line:?}"));
    let mut mesh = TriangleMesh::default();
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let xyz: Vec<f64> = parts
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(line))?;
                if xyz.len() != 3 {
                    return Err(bad(line));
                }
                mesh.vertices.push([xyz[0], xyz[1], xyz[2]]);
            }
            Some("f") => {
                let idx: Vec<u32> = parts
                    .map(|p| p.split('/').next().unwrap_or("").parse::<u32>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(line))?;
                if idx.len() != 3 || idx.contains(&0) {
                    return Err(bad(line));
                }
                mesh.triangles.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
            }
            _ => {}
        }
    }
    Ok(mesh)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidParams(format!("unknown axis {other:?}"))),
        }
    }
}

/// Slice geometry: `(width, height, index -> voxel)` where image column `c`
/// and row `r` map to the remaining two axes in ascending order.
pub(crate) fn slice_layout(
    dims: Dims,
    axis: Axis,
    index: usize,
) -> Result<(usize, usize, impl Fn(usize, usize) -> usize)> {
    let (a, extent) = match axis {
        Axis::X => (0, dims[0]),
        Axis::Y => (1, dims[1]),
        Axis::Z => (2, dims[2]),
    };
    if index >= extent {
        return Err(Error::IndexOutOfRange { index, extent });
    }
    let (u, v) = match a {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let (w, h) = (dims[u], dims[v]);
    let at = move |c: usize, r: usize| {
        let mut p = [0usize; 3];
        p[a] = index;
        p[u] = c;
        p[v] = r;
        p[0] + dims[0] * (p[1] + dims[1] * p[2])
    };
    Ok((w, h, at))
}

/// RGB pixels of one slice: gray from intensity, mask voxels tinted blue
/// (blue channel 255, red and green halved).
pub fn render_slice(
    volume: &Volume,
    mask: Option<&LabelMask>,
    axis: Axis,
    index: usize,
) -> Result<(usize, usize, Vec<u8>)> {
    if let Some(m) = mask {
        if m.dims() != volume.dims() {
            return Err(Error::DimensionMismatch(volume.dims(), m.dims()));
        }
    }
    let (w, h, at) = slice_layout(volume.dims(), axis, index)?;
    let mut rgb = Vec::with_capacity(w * h * 3);
    for r in 0..h {
        for c in 0..w {
            let l = at(c, r);
            let g = (volume.data()[l].clamp(0.0, 1.0) * 255.0).round() as u8;
            if mask.is_some_and(|m| m.data()[l]) {
                rgb.extend_from_slice(&[g / 2, g / 2, 255]);
            } else {
                rgb.extend_from_slice(&[g, g, g]);
            }
        }
    }
    Ok((w, h, rgb))
}

pub fn slice_ppm(
    volume: &Volume,
    mask: Option<&LabelMask>,
    axis: Axis,
    index: usize,
) -> Result<Vec<u8>> {
    let (w, h, rgb) = render_slice(volume, mask, axis, index)?;
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.extend_from_slice(&rgb);
    Ok(out)
}

pub fn export_slice(
    volume: &Volume,
    mask: Option<&LabelMask>,
    axis: Axis,
    index: usize,
    path: &Path,
) -> Result<()> {
    write_atomic(path, &slice_ppm(volume, mask, axis, index)?)
}

/// Seeding and evolution parameters as read from a config file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: SeedParams,
    pub evolution: EvolutionParams,
}

fn parse_auto(key: &str, value: &str) -> Result<Option<usize>> {
    if value.eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    value.parse().map(Some).map_err(|_| {
        Error::MalformedConfig(format!("{key}: expected an integer or auto, got {value:?}"))
    })
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::MalformedConfig(format!("{key}: cannot parse {value:?}")))
}

impl PipelineConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unknown or repeated
    /// keys are errors. Missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::MalformedConfig(format!("line {}: expected key = value", n + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::MalformedConfig(format!("duplicate key {key:?}")));
            }
            let e = &mut cfg.evolution;
            match key {
                "k" => cfg.seed.k = parse_auto(key, value)?,
                "erosion_steps" => cfg.seed.erosion_steps = parse_auto(key, value)?,
                "alpha" => e.alpha = parse_num(key, value)?,
                "beta" => e.beta = parse_num(key, value)?,
                "gamma1" => e.gamma1 = parse_num(key, value)?,
                "gamma2" => e.gamma2 = parse_num(key, value)?,
                "dt" => e.dt = parse_num(key, value)?,
                "band_width" => {
                    e.band_width = if value.eq_ignore_ascii_case("inf") {
                        f64::INFINITY
                    } else {
                        parse_num(key, value)?
                    }
                }
                "reinit_every" => e.reinit_every = parse_num(key, value)?,
                "max_iters" => e.max_iters = parse_num(key, value)?,
                "convergence_tol" => e.convergence_tol = parse_num(key, value)?,
                "convergence_window" => e.convergence_window = parse_num(key, value)?,
                other => return Err(Error::MalformedConfig(format!("unknown key {other:?}"))),
            }
        }
        if cfg.seed.k.is_some_and(|k| k < 2) {
            return Err(Error::MalformedConfig("k must be at least 2".into()));
        }
        cfg.evolution
            .validate()
            .map_err(|e| Error::MalformedConfig(e.to_string()))?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let auto = |v: Option<usize>| v.map_or("auto".to_string(), |x| x.to_string());
        let e = &self.evolution;
        let band = if e.band_width.is_infinite() {
            "inf".to_string()
        } else {
            e.band_width.to_string()
        };
        format!(
            "k = {}\nerosion_steps = {}\nalpha = {}\nbeta = {}\ngamma1 = {}\ngamma2 = {}\ndt = {}\n\
             band_width = {}\nreinit_every = {}\nmax_iters = {}\nconvergence_tol = {}\nconvergence_window = {}\n",
            auto(self.seed.k),
            auto(self.seed.erosion_steps),
            e.alpha,
            e.beta,
            e.gamma1,
            e.gamma2,
            e.dt,
            band,
            e.reinit_every,
            e.max_iters,
            e.convergence_tol,
            e.convergence_window
        )
    }
}

/// JSON has no infinity; an infinite band is written as the string `"inf"`.
pub(crate) mod band_width_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad band width {s:?}"))),
        }
    }
}
