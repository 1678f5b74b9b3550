//! Dense voxel grids and the indexing conventions shared by every stage.
//!
//! Data is stored row-major with `i` fastest: the linear offset of `(i, j, k)`
//! is `i + nx * (j + ny * k)`. Spacing is carried for bookkeeping only; every
//! algorithm in this crate works on the unit voxel grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Dims = [usize; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VoxelIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl VoxelIndex {
    pub const fn new(i: usize, j: usize, k: usize) -> Self {
        Self { i, j, k }
    }

    pub fn in_bounds(&self, dims: Dims) -> bool {
        self.i < dims[0] && self.j < dims[1] && self.k < dims[2]
    }

    pub fn linear(&self, dims: Dims) -> usize {
        self.i + dims[0] * (self.j + dims[1] * self.k)
    }

    pub fn from_linear(idx: usize, dims: Dims) -> Self {
        let i = idx % dims[0];
        let rest = idx / dims[0];
        Self::new(i, rest % dims[1], rest / dims[1])
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.i, self.j, self.k]
    }
}

impl From<[usize; 3]> for VoxelIndex {
    fn from(v: [usize; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

pub fn voxel_count(dims: Dims) -> usize {
    dims[0] * dims[1] * dims[2]
}

/// Length of the main diagonal in voxel units.
pub fn diagonal(dims: Dims) -> f64 {
    let [x, y, z] = dims.map(|d| d as f64);
    (x * x + y * y + z * z).sqrt()
}

/// True when the voxel lies on one of the six faces of the domain.
pub fn on_border(idx: VoxelIndex, dims: Dims) -> bool {
    idx.i == 0
        || idx.j == 0
        || idx.k == 0
        || idx.i + 1 == dims[0]
        || idx.j + 1 == dims[1]
        || idx.k + 1 == dims[2]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Face6,
    Full26,
}

const FACE_OFFSETS: [[isize; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

fn offsets(connectivity: Connectivity) -> Vec<[isize; 3]> {
    let mut out = FACE_OFFSETS.to_vec();
    if connectivity == Connectivity::Full26 {
        for di in -1..=1 {
            for dj in -1..=1 {
                for dk in -1..=1 {
                    let nonzero = (di != 0) as u8 + (dj != 0) as u8 + (dk != 0) as u8;
                    if nonzero >= 2 {
                        out.push([di, dj, dk]);
                    }
                }
            }
        }
    }
    out
}

fn shifted(idx: VoxelIndex, off: [isize; 3], dims: Dims) -> Option<VoxelIndex> {
    let i = idx.i.checked_add_signed(off[0])?;
    let j = idx.j.checked_add_signed(off[1])?;
    let k = idx.k.checked_add_signed(off[2])?;
    let n = VoxelIndex::new(i, j, k);
    n.in_bounds(dims).then_some(n)
}

/// In-bounds neighbors of `idx`: the six face neighbors in the order
/// `-i, +i, -j, +j, -k, +k`, followed for 26-connectivity by the edge and
/// corner neighbors in lexicographic offset order.
pub fn neighbors(idx: VoxelIndex, connectivity: Connectivity, dims: Dims) -> Vec<VoxelIndex> {
    offsets(connectivity)
        .into_iter()
        .filter_map(|off| shifted(idx, off, dims))
        .collect()
}

/// Calls `f` with the linear index of each in-bounds face neighbor.
#[inline]
pub(crate) fn for_each_face_neighbor(dims: Dims, lin: usize, mut f: impl FnMut(usize)) {
    let [nx, ny, nz] = dims;
    let sj = nx;
    let sk = nx * ny;
    let i = lin % nx;
    let j = (lin / nx) % ny;
    let k = lin / sk;
    if i > 0 {
        f(lin - 1);
    }
    if i + 1 < nx {
        f(lin + 1);
    }
    if j > 0 {
        f(lin - sj);
    }
    if j + 1 < ny {
        f(lin + sj);
    }
    if k > 0 {
        f(lin - sk);
    }
    if k + 1 < nz {
        f(lin + sk);
    }
}

#[inline]
pub(crate) fn is_border_linear(dims: Dims, lin: usize) -> bool {
    on_border(VoxelIndex::from_linear(lin, dims), dims)
}

/// Dense scalar volume.
#[derive(Clone, Debug, PartialEq)]
pub struct Volume {
    dims: Dims,
    spacing: [f64; 3],
    data: Vec<f64>,
}

impl Volume {
    pub fn new(dims: Dims, spacing: [f64; 3], data: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidParams(format!(
                "dims must be positive, got {dims:?}"
            )));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParams(format!(
                "spacing must be positive, got {spacing:?}"
            )));
        }
        if data.len() != voxel_count(dims) {
            return Err(Error::InvalidParams(format!(
                "data length {} does not match dims {dims:?}",
                data.len()
            )));
        }
        Ok(Self {
            dims,
            spacing,
            data,
        })
    }

    /// Unit-spaced volume.
    pub fn from_data(dims: Dims, data: Vec<f64>) -> Result<Self> {
        Self::new(dims, [1.0; 3], data)
    }

    pub fn filled(dims: Dims, value: f64) -> Self {
        Self {
            dims,
            spacing: [1.0; 3],
            data: vec![value; voxel_count(dims)],
        }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(VoxelIndex) -> f64) -> Self {
        let data = (0..voxel_count(dims))
            .map(|l| f(VoxelIndex::from_linear(l, dims)))
            .collect();
        Self {
            dims,
            spacing: [1.0; 3],
            data,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, idx: VoxelIndex) -> f64 {
        self.data[idx.linear(self.dims)]
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Value `v` at nearest-rank-low position `floor(p/100 * (N-1))` of the
    /// sorted voxel list.
    pub fn percentile(&self, p: f64) -> f64 {
        let mut sorted = self.data.clone();
        sorted.sort_by(f64::total_cmp);
        percentile_sorted(&sorted, p)
    }

    /// Maps the 2nd percentile to 0 and the 98th to 1, clamping outside that
    /// range. A flat volume maps to all zeros.
    pub fn normalize(&self) -> Result<Volume> {
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let mut sorted = self.data.clone();
        sorted.sort_by(f64::total_cmp);
        let lo = percentile_sorted(&sorted, 2.0);
        let hi = percentile_sorted(&sorted, 98.0);
        let data = if hi > lo {
            let scale = hi - lo;
            self.data
                .iter()
                .map(|&v| ((v - lo) / scale).clamp(0.0, 1.0))
                .collect()
        } else {
            vec![0.0; self.data.len()]
        };
        Ok(Volume {
            dims: self.dims,
            spacing: self.spacing,
            data,
        })
    }
}

pub(crate) fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty volume");
    let p = p.clamp(0.0, 100.0);
    let pos = (p / 100.0 * (sorted.len() - 1) as f64).floor() as usize;
    sorted[pos.min(sorted.len() - 1)]
}

/// Binary voxel set; `true` marks the inside set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelMask {
    dims: Dims,
    data: Vec<bool>,
}

impl LabelMask {
    pub fn empty(dims: Dims) -> Self {
        Self {
            dims,
            data: vec![false; voxel_count(dims)],
        }
    }

    pub fn from_data(dims: Dims, data: Vec<bool>) -> Result<Self> {
        if data.len() != voxel_count(dims) {
            return Err(Error::InvalidParams(format!(
                "mask length {} does not match dims {dims:?}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(VoxelIndex) -> bool) -> Self {
        let data = (0..voxel_count(dims))
            .map(|l| f(VoxelIndex::from_linear(l, dims)))
            .collect();
        Self { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, idx: VoxelIndex) -> bool {
        self.data[idx.linear(self.dims)]
    }

    pub fn set(&mut self, idx: VoxelIndex, value: bool) {
        let l = idx.linear(self.dims);
        self.data[l] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.data.iter().all(|&b| b)
    }

    pub fn complement(&self) -> LabelMask {
        LabelMask {
            dims: self.dims,
            data: self.data.iter().map(|b| !b).collect(),
        }
    }

    pub fn inside_indices(&self) -> impl Iterator<Item = VoxelIndex> + '_ {
        let dims = self.dims;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(l, _)| VoxelIndex::from_linear(l, dims))
    }

    pub(crate) fn data_mut(&mut self) -> &mut [bool] {
        &mut self.data
    }
}
