//! Marching cubes over the zero level set.

use std::collections::HashMap;

use crate::distance::SignedDistanceField;
use crate::error::{Error, Result};
use crate::mc_table::TRI_TABLE;
use crate::volume::{on_border, VoxelIndex};

const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

const EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

/// Indexed triangle mesh in voxel coordinates. Triangles wind
/// counterclockwise seen from the outside (positive phi).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Undirected edges with the number of triangles using each.
    pub fn edge_use(&self) -> HashMap<(u32, u32), usize> {
        let mut uses = HashMap::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *uses.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        uses
    }

    /// Every edge is shared by exactly two triangles.
    pub fn is_watertight(&self) -> bool {
        !self.triangles.is_empty() && self.edge_use().values().all(|&n| n == 2)
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_use().len() as i64 + self.triangles.len() as i64
    }

    pub fn surface_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let n = self.face_normal(t);
                0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
            })
            .sum()
    }

    /// Unnormalized normal `(b - a) x (c - a)`.
    pub fn face_normal(&self, t: &[u32; 3]) -> [f64; 3] {
        let [a, b, c] = t.map(|i| self.vertices[i as usize]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    }

    /// Enclosed volume by the divergence theorem.
    pub fn enclosed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0]))
                    / 6.0
            })
            .sum()
    }
}

/// Triangulates `{phi = 0}` cell by cell. Vertices on shared cell edges are
/// merged by the edge's lower corner and axis.
pub fn marching_cubes(field: &SignedDistanceField) -> Result<TriangleMesh> {
    let dims = field.dims();
    let phi = field.phi();
    let any_inside = phi.iter().any(|&p| p <= 0.0);
    let any_outside = phi.iter().any(|&p| p > 0.0);
    if !any_inside || !any_outside {
        return Err(Error::NoZeroCrossing);
    }
    for (l, &p) in phi.iter().enumerate() {
        if p <= 0.0 && on_border(VoxelIndex::from_linear(l, dims), dims) {
            return Err(Error::SurfaceTouchesBorder);
        }
    }

    let [nx, ny, nz] = dims;
    let lin = |p: [usize; 3]| p[0] + nx * (p[1] + ny * p[2]);
    let mut mesh = TriangleMesh::default();
    let mut edge_vertex: HashMap<(usize, u8), u32> = HashMap::new();

    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let corner_pos: [[usize; 3]; 8] = CORNERS.map(|c| [i + c[0], j + c[1], k + c[2]]);
                let values: [f64; 8] = corner_pos.map(|p| phi[lin(p)]);
                let mut case = 0usize;
                for (bit, &v) in values.iter().enumerate() {
                    if v <= 0.0 {
                        case |= 1 << bit;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                let row = &TRI_TABLE[case];
                let mut vert_of_edge = [u32::MAX; 12];
                for t in row.chunks(3) {
                    if t[0] < 0 {
                        break;
                    }
                    let mut tri = [0u32; 3];
                    for (slot, &e) in tri.iter_mut().zip(t) {
                        let e = e as usize;
                        if vert_of_edge[e] == u32::MAX {
                            let [ca, cb] = EDGES[e];
                            let (pa, pb) = (corner_pos[ca], corner_pos[cb]);
                            let lower = if lin(pa) < lin(pb) { pa } else { pb };
                            let axis = (0..3).find(|&d| pa[d] != pb[d]).unwrap() as u8;
                            let key = (lin(lower), axis);
                            let id = *edge_vertex.entry(key).or_insert_with(|| {
                                let (va, vb) = (values[ca], values[cb]);
                                let t = va / (va - vb);
                                let pos = [0, 1, 2]
                                    .map(|d| pa[d] as f64 + t * (pb[d] as f64 - pa[d] as f64));
                                mesh.vertices.push(pos);
                                (mesh.vertices.len() - 1) as u32
                            });
                            vert_of_edge[e] = id;
                        }
                        *slot = vert_of_edge[e];
                    }
                    // table winding faces the inside; flip so normals point outward
                    mesh.triangles.push([tri[0], tri[2], tri[1]]);
                }
            }
        }
    }
    Ok(mesh)
}
