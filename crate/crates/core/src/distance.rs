//! Signed distance fields from masks: exact values on a shell around the
//! inside boundary, then eight Gauss-Seidel sweeps of the upwind eikonal
//! update to fill the rest of the domain.

use crate::error::{Error, Result};
use crate::volume::{diagonal, for_each_face_neighbor, voxel_count, Dims, LabelMask, VoxelIndex};

/// Scalar field, negative (or zero) inside and positive outside.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedDistanceField {
    dims: Dims,
    phi: Vec<f64>,
    /// Distance from the zero set within which `phi` is a true distance.
    /// `f64::INFINITY` when the whole domain is exact.
    pub band_width: f64,
}

impl SignedDistanceField {
    pub fn new(dims: Dims, phi: Vec<f64>, band_width: f64) -> Result<Self> {
        if phi.len() != voxel_count(dims) {
            return Err(Error::InvalidParams(format!(
                "field length {} does not match dims {dims:?}",
                phi.len()
            )));
        }
        Ok(Self {
            dims,
            phi,
            band_width,
        })
    }

    pub fn from_fn(dims: Dims, f: impl FnMut(VoxelIndex) -> f64) -> Self {
        let mut f = f;
        let phi = (0..voxel_count(dims))
            .map(|l| f(VoxelIndex::from_linear(l, dims)))
            .collect();
        Self {
            dims,
            phi,
            band_width: f64::INFINITY,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn get(&self, idx: VoxelIndex) -> f64 {
        self.phi[idx.linear(self.dims)]
    }

    pub(crate) fn phi_mut(&mut self) -> &mut [f64] {
        &mut self.phi
    }

    /// Inside set `{phi <= 0}`.
    pub fn to_mask(&self) -> LabelMask {
        field_to_mask(self)
    }
}

/// Membership is `phi <= 0`.
pub fn field_to_mask(field: &SignedDistanceField) -> LabelMask {
    LabelMask::from_data(field.dims, field.phi.iter().map(|&p| p <= 0.0).collect())
        .expect("field dims are consistent")
}

/// Unsigned distances after boundary initialization, before sweeping.
#[derive(Clone, Debug)]
pub struct BoundaryInit {
    pub dims: Dims,
    pub magnitude: Vec<f64>,
    pub frozen: Vec<bool>,
    pub inside: Vec<bool>,
    pub large: f64,
}

/// Inside voxels with at least one face neighbor outside.
pub fn boundary_set(mask: &LabelMask) -> Vec<bool> {
    let dims = mask.dims();
    let m = mask.data();
    (0..m.len())
        .map(|l| {
            if !m[l] {
                return false;
            }
            let mut b = false;
            for_each_face_neighbor(dims, l, |n| b |= !m[n]);
            b
        })
        .collect()
}

/// Sets exact distances on the boundary and on every voxel within its 26-neighborhood;
/// everything else starts at `10 * diagonal`.
pub fn init_boundary(mask: &LabelMask) -> Result<BoundaryInit> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    if mask.is_full() {
        return Err(Error::FullMask);
    }
    let dims = mask.dims();
    let [nx, ny, nz] = dims;
    let large = 10.0 * diagonal(dims);
    let boundary = boundary_set(mask);
    let n = boundary.len();
    let mut magnitude = vec![large; n];
    let mut frozen = vec![false; n];

    for (l, _) in boundary.iter().enumerate().filter(|(_, &b)| b) {
        let p = VoxelIndex::from_linear(l, dims);
        for dk in -1i64..=1 {
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (qi, qj, qk) = (p.i as i64 + di, p.j as i64 + dj, p.k as i64 + dk);
                    if qi < 0
                        || qj < 0
                        || qk < 0
                        || qi >= nx as i64
                        || qj >= ny as i64
                        || qk >= nz as i64
                    {
                        continue;
                    }
                    let q = qi as usize + nx * (qj as usize + ny * qk as usize);
                    let d = ((di * di + dj * dj + dk * dk) as f64).sqrt();
                    if d < magnitude[q] {
                        magnitude[q] = d;
                    }
                    frozen[q] = true;
                }
            }
        }
    }
    Ok(BoundaryInit {
        dims,
        magnitude,
        frozen,
        inside: mask.data().to_vec(),
        large,
    })
}

/// Solves `sum_d [(x - a_d)^+]^2 = 1` for `a1 <= a2 <= a3`.
#[inline]
pub fn eikonal_update(mut a: [f64; 3]) -> f64 {
    if a[0] > a[1] {
        a.swap(0, 1);
    }
    if a[1] > a[2] {
        a.swap(1, 2);
    }
    if a[0] > a[1] {
        a.swap(0, 1);
    }
    let [a1, a2, a3] = a;
    let x = a1 + 1.0;
    if x <= a2 {
        return x;
    }
    let x = 0.5 * (a1 + a2 + (2.0 - (a1 - a2) * (a1 - a2)).sqrt());
    if x <= a3 {
        return x;
    }
    let s = a1 + a2 + a3;
    let q = a1 * a1 + a2 * a2 + a3 * a3;
    (s + (s * s - 3.0 * (q - 1.0)).max(0.0).sqrt()) / 3.0
}

fn sweep_once(init: &mut BoundaryInit, dir: [bool; 3]) {
    let [nx, ny, nz] = init.dims;
    let large = init.large;
    let sj = nx;
    let sk = nx * ny;
    let range = |n: usize, fwd: bool| -> Box<dyn Iterator<Item = usize>> {
        if fwd {
            Box::new(0..n)
        } else {
            Box::new((0..n).rev())
        }
    };
    let u = &mut init.magnitude;
    for k in range(nz, dir[2]) {
        for j in range(ny, dir[1]) {
            for i in range(nx, dir[0]) {
                let l = i + sj * j + sk * k;
                if init.frozen[l] {
                    continue;
                }
                let ax = {
                    let lo = if i > 0 { u[l - 1] } else { large };
                    let hi = if i + 1 < nx { u[l + 1] } else { large };
                    lo.min(hi)
                };
                let ay = {
                    let lo = if j > 0 { u[l - sj] } else { large };
                    let hi = if j + 1 < ny { u[l + sj] } else { large };
                    lo.min(hi)
                };
                let az = {
                    let lo = if k > 0 { u[l - sk] } else { large };
                    let hi = if k + 1 < nz { u[l + sk] } else { large };
                    lo.min(hi)
                };
                let x = eikonal_update([ax, ay, az]);
                if x < u[l] {
                    u[l] = x;
                }
            }
        }
    }
}

/// The eight traversal orders, one per corner of the domain.
pub const SWEEP_DIRECTIONS: [[bool; 3]; 8] = [
    [true, true, true],
    [false, true, true],
    [true, false, true],
    [false, false, true],
    [true, true, false],
    [false, true, false],
    [true, false, false],
    [false, false, false],
];

/// Runs the eight sweeps once and applies the sign from the mask.
pub fn fast_sweep(init: BoundaryInit) -> SignedDistanceField {
    fast_sweep_traced(init, |_, _| {})
}

/// As [`fast_sweep`], calling `observe(sweep, magnitudes)` after every sweep.
pub fn fast_sweep_traced(
    mut init: BoundaryInit,
    mut observe: impl FnMut(usize, &[f64]),
) -> SignedDistanceField {
    for (s, dir) in SWEEP_DIRECTIONS.iter().enumerate() {
        sweep_once(&mut init, *dir);
        observe(s, &init.magnitude);
    }
    let phi = init
        .magnitude
        .iter()
        .zip(&init.inside)
        .map(|(&m, &inside)| if inside { -m } else { m })
        .collect();
    SignedDistanceField {
        dims: init.dims,
        phi,
        band_width: f64::INFINITY,
    }
}

/// Boundary initialization followed by fast sweeping.
pub fn rebuild_sdf(mask: &LabelMask) -> Result<SignedDistanceField> {
    Ok(fast_sweep(init_boundary(mask)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_voxel_boundary() {
        let d = [5, 5, 5];
        let mut m = LabelMask::empty(d);
        let c = VoxelIndex::new(2, 2, 2);
        m.set(c, true);
        let init = init_boundary(&m).unwrap();
        assert_eq!(init.magnitude[c.linear(d)], 0.0);
        for n in crate::volume::neighbors(c, crate::volume::Connectivity::Face6, d) {
            assert_eq!(init.magnitude[n.linear(d)], 1.0);
        }
        let f = fast_sweep(init);
        assert_eq!(f.get(c), 0.0);
        assert_eq!(f.get(VoxelIndex::new(3, 2, 2)), 1.0);
    }

    #[test]
    fn cube_corner_is_sqrt3() {
        let d = [7, 7, 7];
        let m = LabelMask::from_fn(d, |p| {
            (2..=4).contains(&p.i) && (2..=4).contains(&p.j) && (2..=4).contains(&p.k)
        });
        let init = init_boundary(&m).unwrap();
        assert_eq!(
            init.magnitude[VoxelIndex::new(5, 5, 5).linear(d)],
            3f64.sqrt()
        );
        assert_eq!(
            init.magnitude[VoxelIndex::new(5, 5, 3).linear(d)],
            2f64.sqrt()
        );
        // centre is interior, one step from the boundary
        assert_eq!(init.magnitude[VoxelIndex::new(3, 3, 3).linear(d)], 1.0);
    }

    #[test]
    fn empty_and_full_masks_are_rejected() {
        assert!(matches!(
            init_boundary(&LabelMask::empty([3, 3, 3])),
            Err(Error::EmptyMask)
        ));
        let full = LabelMask::from_fn([3, 3, 3], |_| true);
        assert!(matches!(rebuild_sdf(&full), Err(Error::FullMask)));
    }

    #[test]
    fn point_source_is_exact_on_axis() {
        let d = [21, 21, 21];
        let mut m = LabelMask::empty(d);
        m.set(VoxelIndex::new(10, 10, 10), true);
        let f = rebuild_sdf(&m).unwrap();
        for n in 1..=10usize {
            assert_eq!(f.get(VoxelIndex::new(10 + n, 10, 10)), n as f64);
            assert_eq!(f.get(VoxelIndex::new(10 - n, 10, 10)), n as f64);
            assert_eq!(f.get(VoxelIndex::new(10, 10 + n, 10)), n as f64);
            assert_eq!(f.get(VoxelIndex::new(10, 10, 10 - n)), n as f64);
        }
    }

    #[test]
    fn half_space_is_exact() {
        let d = [6, 7, 20];
        let m = LabelMask::from_fn(d, |p| p.k < 9);
        let f = rebuild_sdf(&m).unwrap();
        for l in 0..voxel_count(d) {
            let p = VoxelIndex::from_linear(l, d);
            let exact = if p.k <= 8 {
                -(8.0 - p.k as f64)
            } else {
                p.k as f64 - 8.0
            };
            assert_eq!(f.phi()[l], exact, "at {p:?}");
        }
    }

    #[test]
    fn eikonal_update_cascade() {
        assert_eq!(eikonal_update([0.0, 5.0, 5.0]), 1.0);
        let two = eikonal_update([1.0, 1.0, 9.0]);
        assert!((two - (1.0 + 0.5f64.sqrt())).abs() < 1e-15);
        let three = eikonal_update([1.0, 1.0, 1.0]);
        assert!((three - (1.0 + 1.0 / 3f64.sqrt())).abs() < 1e-15);
        // order of arguments does not matter
        assert_eq!(eikonal_update([5.0, 0.0, 5.0]), 1.0);
    }

    #[test]
    fn magnitudes_never_increase_across_sweeps() {
        let d = [16, 16, 16];
        let m = LabelMask::from_fn(d, |p| {
            let a = (p.i as f64 - 5.0).powi(2)
                + (p.j as f64 - 6.0).powi(2)
                + (p.k as f64 - 7.0).powi(2);
            let b = (p.i as f64 - 11.0).powi(2)
                + (p.j as f64 - 10.0).powi(2)
                + (p.k as f64 - 9.0).powi(2);
            a <= 9.0 || b <= 4.0
        });
        let init = init_boundary(&m).unwrap();
        let mut prev = init.magnitude.clone();
        fast_sweep_traced(init, |_, cur| {
            for (a, b) in cur.iter().zip(&prev) {
                assert!(a <= b);
            }
            prev = cur.to_vec();
        });
    }

    #[test]
    fn sign_round_trip() {
        let d = [10, 9, 8];
        let m = LabelMask::from_fn(d, |p| (p.i * 3 + p.j * 5 + p.k * 7) % 11 < 4);
        let f = rebuild_sdf(&m).unwrap();
        assert_eq!(field_to_mask(&f), m);
    }

    #[test]
    fn field_to_mask_examples() {
        let f = SignedDistanceField::from_fn([3, 3, 3], |_| 1.0);
        assert!(field_to_mask(&f).is_empty());
        let g = SignedDistanceField::from_fn([3, 3, 3], |p| {
            if p == VoxelIndex::new(1, 1, 1) {
                0.0
            } else {
                2.0
            }
        });
        let m = field_to_mask(&g);
        assert_eq!(m.count(), 1);
        assert!(m.get(VoxelIndex::new(1, 1, 1)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn round_trip_any_mask(bits in prop::collection::vec(any::<bool>(), 6 * 5 * 7)) {
                let m = LabelMask::from_data([6, 5, 7], bits).unwrap();
                prop_assume!(!m.is_empty() && !m.is_full());
                let f = rebuild_sdf(&m).unwrap();
                prop_assert_eq!(field_to_mask(&f), m);
                let diag = diagonal([6, 5, 7]);
                for &p in f.phi() {
                    prop_assert!(p.abs() <= diag);
                }
            }
        }
    }
}
