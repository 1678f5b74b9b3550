//! Seed generation: intensity clustering, the cluster holding the user point,
//! then erosion, a connected-component search from that point and a matching
//! dilation.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{
    for_each_face_neighbor, is_border_linear, percentile_sorted, LabelMask, Volume, VoxelIndex,
};

const HIST_BINS: usize = 256;
const MEAN_SHIFT_BANDWIDTH: f64 = 0.05;
const MEAN_SHIFT_TOL: f64 = 1e-4;
const MEAN_SHIFT_MAX_ITERS: usize = 1000;
const KMEANS_MAX_ITERS: usize = 100;

/// k-means result with centroids sorted ascending.
#[derive(Clone, Debug)]
pub struct ClusterModel {
    pub dims: crate::volume::Dims,
    pub centroids: Vec<f64>,
    pub assignment: Vec<u8>,
    /// Sum of absolute deviations from the cluster means at termination.
    pub abs_error: f64,
    /// Sum of squared deviations after each Lloyd iteration.
    pub sse_history: Vec<f64>,
    pub iterations: usize,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn cluster_of(&self, idx: VoxelIndex) -> usize {
        self.assignment[idx.linear(self.dims)] as usize
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeedParams {
    /// Cluster count; `None` estimates it by mean shift.
    pub k: Option<usize>,
    /// Erosion (and dilation) step count; `None` derives it from the volume size.
    pub erosion_steps: Option<usize>,
}

impl SeedParams {
    pub fn resolved_steps(&self, dims: crate::volume::Dims) -> usize {
        self.erosion_steps
            .unwrap_or_else(|| auto_erosion_steps(dims))
    }
}

/// `max(1, round(min(nx, ny, nz) / 64))`
pub fn auto_erosion_steps(dims: crate::volume::Dims) -> usize {
    let min = *dims.iter().min().unwrap() as f64;
    ((min / 64.0).round() as usize).max(1)
}

/// Counts intensity modes with a Gaussian mean shift over a 256-bin
/// histogram of `[0, 1]`. Result is clamped to `[2, 8]`.
pub fn estimate_k(volume: &Volume) -> Result<usize> {
    let data = volume.data();
    let first = data[0];
    if data.iter().all(|&v| v == first) {
        return Err(Error::DegenerateVolume);
    }
    let mut counts = [0u64; HIST_BINS];
    for &v in data {
        let b = ((v.clamp(0.0, 1.0) * HIST_BINS as f64) as usize).min(HIST_BINS - 1);
        counts[b] += 1;
    }
    let centers: Vec<f64> = (0..HIST_BINS)
        .map(|b| (b as f64 + 0.5) / HIST_BINS as f64)
        .collect();
    let bins: Vec<(f64, f64)> = counts
        .iter()
        .zip(&centers)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &x)| (x, c as f64))
        .collect();

    let inv_2h2 = 1.0 / (2.0 * MEAN_SHIFT_BANDWIDTH * MEAN_SHIFT_BANDWIDTH);
    let mut modes: Vec<f64> = bins.iter().map(|&(x, _)| x).collect();
    for _ in 0..MEAN_SHIFT_MAX_ITERS {
        let mut max_shift: f64 = 0.0;
        for m in modes.iter_mut() {
            let (mut num, mut den) = (0.0, 0.0);
            for &(x, w) in &bins {
                let d = x - *m;
                let kw = w * (-d * d * inv_2h2).exp();
                num += kw * x;
                den += kw;
            }
            let next = num / den;
            max_shift = max_shift.max((next - *m).abs());
            *m = next;
        }
        if max_shift < MEAN_SHIFT_TOL {
            break;
        }
    }

    modes.sort_by(f64::total_cmp);
    let mut survivors: Vec<f64> = Vec::new();
    for m in modes {
        match survivors.last() {
            Some(&last) if m - last < MEAN_SHIFT_BANDWIDTH / 2.0 => {}
            _ => survivors.push(m),
        }
    }
    Ok(survivors.len().clamp(2, 8))
}

#[inline]
fn nearest(centroids: &[f64], v: f64) -> usize {
    let mut best = 0;
    let mut best_d = (v - centroids[0]).abs();
    for (j, &c) in centroids.iter().enumerate().skip(1) {
        let d = (v - c).abs();
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

/// Lloyd k-means on voxel intensities with quantile initialization.
pub fn kmeans_cluster(volume: &Volume, k: usize) -> Result<ClusterModel> {
    if k < 2 {
        return Err(Error::InvalidParams(format!(
            "k-means needs k >= 2, got {k}"
        )));
    }
    if k > u8::MAX as usize {
        return Err(Error::InvalidParams(format!("k = {k} is too large")));
    }
    let data = volume.data();
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut centroids: Vec<f64> = (1..=k)
        .map(|j| percentile_sorted(&sorted, 100.0 * (2 * j - 1) as f64 / (2 * k) as f64))
        .collect();

    let mut assignment = vec![u8::MAX; data.len()];
    let mut reseeds = vec![0usize; k];
    let mut sse_history = Vec::new();
    let mut iterations = 0;

    loop {
        iterations += 1;
        let mut changed = false;
        for (a, &v) in assignment.iter_mut().zip(data) {
            let c = nearest(&centroids, v) as u8;
            if *a != c {
                *a = c;
                changed = true;
            }
        }

        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&a, &v) in assignment.iter().zip(data) {
            sums[a as usize] += v;
            counts[a as usize] += 1;
        }

        let empty: Vec<usize> = (0..k).filter(|&j| counts[j] == 0).collect();
        if !empty.is_empty() {
            for &j in &empty {
                reseeds[j] += 1;
                if reseeds[j] > 2 {
                    return Err(Error::EmptyClusterCollapse { cluster: j });
                }
            }
            let surviving: Vec<f64> = (0..k)
                .filter(|&j| counts[j] > 0)
                .map(|j| sums[j] / counts[j] as f64)
                .collect();
            let mut next = surviving.clone();
            for _ in &empty {
                // intensity farthest from its nearest surviving centroid
                let far = data
                    .iter()
                    .copied()
                    .max_by(|a, b| {
                        let da = (a - next[nearest(&next, *a)]).abs();
                        let db = (b - next[nearest(&next, *b)]).abs();
                        da.total_cmp(&db)
                    })
                    .unwrap();
                next.push(far);
            }
            next.sort_by(f64::total_cmp);
            centroids = next;
            if iterations >= KMEANS_MAX_ITERS {
                return Err(Error::EmptyClusterCollapse { cluster: empty[0] });
            }
            continue;
        }

        for j in 0..k {
            centroids[j] = sums[j] / counts[j] as f64;
        }
        let sse: f64 = assignment
            .iter()
            .zip(data)
            .map(|(&a, &v)| {
                let d = v - centroids[a as usize];
                d * d
            })
            .sum();
        if let Some(&prev) = sse_history.last() {
            debug_assert!(
                sse <= prev * (1.0 + 1e-12) + 1e-12,
                "k-means objective increased"
            );
        }
        sse_history.push(sse);

        if !changed || iterations >= KMEANS_MAX_ITERS {
            break;
        }
    }

    // Centroids of contiguous 1-D clusters stay ordered, but re-seeding may
    // have permuted them.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]));
    let mut remap = vec![0u8; k];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new as u8;
    }
    let centroids: Vec<f64> = order.iter().map(|&o| centroids[o]).collect();
    for a in assignment.iter_mut() {
        *a = remap[*a as usize];
    }
    let abs_error = assignment
        .iter()
        .zip(data)
        .map(|(&a, &v)| (v - centroids[a as usize]).abs())
        .sum();

    Ok(ClusterModel {
        dims: volume.dims(),
        centroids,
        assignment,
        abs_error,
        sse_history,
        iterations,
    })
}

/// Mask of the cluster that contains `x0`.
pub fn select_seed_cluster(model: &ClusterModel, x0: VoxelIndex) -> Result<LabelMask> {
    if !x0.in_bounds(model.dims) {
        return Err(Error::IndexOutOfRange {
            index: x0.linear(model.dims),
            extent: model.assignment.len(),
        });
    }
    let target = model.assignment[x0.linear(model.dims)];
    let data = model.assignment.iter().map(|&a| a == target).collect();
    LabelMask::from_data(model.dims, data)
}

/// Peels one boundary layer per step. Voxels on the domain border count as
/// touching the outside.
pub fn erode(mask: &LabelMask, steps: usize) -> LabelMask {
    let dims = mask.dims();
    let mut cur = mask.clone();
    for _ in 0..steps {
        let mut next = cur.clone();
        let src = cur.data();
        for (l, out) in next.data_mut().iter_mut().enumerate() {
            if !src[l] {
                continue;
            }
            let mut exposed = is_border_linear(dims, l);
            if !exposed {
                for_each_face_neighbor(dims, l, |n| exposed |= !src[n]);
            }
            if exposed {
                *out = false;
            }
        }
        cur = next;
    }
    cur
}

/// Grows one face-connected layer per step, clipped at the domain border.
pub fn dilate(mask: &LabelMask, steps: usize) -> LabelMask {
    let dims = mask.dims();
    let mut cur = mask.clone();
    for _ in 0..steps {
        let mut next = cur.clone();
        let src = cur.data();
        for (l, out) in next.data_mut().iter_mut().enumerate() {
            if src[l] {
                continue;
            }
            let mut touched = false;
            for_each_face_neighbor(dims, l, |n| touched |= src[n]);
            if touched {
                *out = true;
            }
        }
        cur = next;
    }
    cur
}

/// Breadth-first flood over face-connected inside voxels starting at `x0`.
pub fn connected_component(mask: &LabelMask, x0: VoxelIndex) -> Result<LabelMask> {
    let dims = mask.dims();
    if !x0.in_bounds(dims) || !mask.get(x0) {
        return Err(Error::SeedNotInMask(x0.as_array()));
    }
    let src = mask.data();
    let mut out = LabelMask::empty(dims);
    let visited = out.data_mut();
    let start = x0.linear(dims);
    visited[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(l) = queue.pop_front() {
        for_each_face_neighbor(dims, l, |n| {
            if src[n] && !visited[n] {
                visited[n] = true;
                queue.push_back(n);
            }
        });
    }
    Ok(out)
}

/// Intermediate masks of the seeding pipeline, in stage order.
#[derive(Clone, Debug)]
pub struct SeedStages {
    pub k: usize,
    pub erosion_steps: usize,
    pub model: ClusterModel,
    pub clustered: LabelMask,
    pub eroded: LabelMask,
    pub connected: LabelMask,
    pub dilated: LabelMask,
}

pub fn generate_seed_stages(
    volume: &Volume,
    x0: VoxelIndex,
    params: &SeedParams,
) -> Result<SeedStages> {
    let dims = volume.dims();
    if !x0.in_bounds(dims) {
        return Err(Error::IndexOutOfRange {
            index: x0.linear(dims),
            extent: volume.len(),
        });
    }
    let k = match params.k {
        Some(k) => k,
        None => estimate_k(volume)?,
    };
    let steps = params.resolved_steps(dims);
    let model = kmeans_cluster(volume, k)?;
    let clustered = select_seed_cluster(&model, x0)?;

    let mut eroded = clustered.clone();
    for step in 1..=steps {
        eroded = erode(&eroded, 1);
        if !eroded.get(x0) {
            return Err(Error::SeedEroded { step });
        }
    }
    let connected = connected_component(&eroded, x0)?;
    let dilated = dilate(&connected, steps);
    Ok(SeedStages {
        k,
        erosion_steps: steps,
        model,
        clustered,
        eroded,
        connected,
        dilated,
    })
}

/// Cluster, keep the cluster containing `x0`, erode, keep the component of
/// `x0`, dilate back.
pub fn generate_seed(volume: &Volume, x0: VoxelIndex, params: &SeedParams) -> Result<LabelMask> {
    generate_seed_stages(volume, x0, params).map(|s| s.dilated)
}
