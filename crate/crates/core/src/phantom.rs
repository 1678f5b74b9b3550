//! Synthetic two-level volumes with analytic ground truth.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Dims, LabelMask, Volume, VoxelIndex};

const MARGIN: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Geometry {
    #[serde(rename_all = "camelCase")]
    Sphere { center: [f64; 3], radius: f64 },
    #[serde(rename_all = "camelCase")]
    TwoBlobsBridged {
        blob_centers: [[f64; 3]; 2],
        radii: [f64; 2],
        bridge_width: f64,
    },
    #[serde(rename_all = "camelCase")]
    BentTube {
        control_points: Vec<[f64; 3]>,
        tube_radius: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PhantomSpec {
    #[serde(flatten)]
    pub geometry: Geometry,
    pub dims: Dims,
    pub inside_intensity: f64,
    pub outside_intensity: f64,
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn segment_distance(p: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let ap = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]])
}

impl Geometry {
    pub fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            Geometry::Sphere { center, radius } => dist(p, *center) <= *radius,
            Geometry::TwoBlobsBridged {
                blob_centers,
                radii,
                bridge_width,
            } => {
                dist(p, blob_centers[0]) <= radii[0]
                    || dist(p, blob_centers[1]) <= radii[1]
                    || segment_distance(p, blob_centers[0], blob_centers[1]) <= bridge_width / 2.0
            }
            Geometry::BentTube {
                control_points,
                tube_radius,
            } => control_points
                .windows(2)
                .any(|w| segment_distance(p, w[0], w[1]) <= *tube_radius),
        }
    }

    /// Axis-aligned bounds `(min, max)` of the shape.
    fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        let mut grow = |c: [f64; 3], r: f64| {
            for d in 0..3 {
                lo[d] = lo[d].min(c[d] - r);
                hi[d] = hi[d].max(c[d] + r);
            }
        };
        match self {
            Geometry::Sphere { center, radius } => grow(*center, *radius),
            Geometry::TwoBlobsBridged {
                blob_centers,
                radii,
                bridge_width,
            } => {
                for (c, r) in blob_centers.iter().zip(radii) {
                    grow(*c, r.max(bridge_width / 2.0));
                }
            }
            Geometry::BentTube {
                control_points,
                tube_radius,
            } => {
                for c in control_points {
                    grow(*c, *tube_radius);
                }
            }
        }
        (lo, hi)
    }

    /// A voxel known to lie inside the shape, for use as the seed point.
    pub fn interior_point(&self) -> VoxelIndex {
        let p = match self {
            Geometry::Sphere { center, .. } => *center,
            Geometry::TwoBlobsBridged { blob_centers, .. } => blob_centers[0],
            Geometry::BentTube { control_points, .. } => control_points[control_points.len() / 2],
        };
        VoxelIndex::new(
            p[0].round() as usize,
            p[1].round() as usize,
            p[2].round() as usize,
        )
    }
}

impl PhantomSpec {
    /// Bright sphere filling the middle of a cube.
    pub fn sphere(n: usize, radius: f64, noise_sigma: f64, rng_seed: u64) -> Self {
        let c = (n as f64 - 1.0) / 2.0;
        Self {
            geometry: Geometry::Sphere {
                center: [c, c, c],
                radius,
            },
            dims: [n, n, n],
            inside_intensity: 0.8,
            outside_intensity: 0.2,
            noise_sigma,
            rng_seed,
        }
    }

    /// Quarter-circle tube in the mid `z` plane of an `n`-cube.
    pub fn bent_tube(n: usize, tube_radius: f64, noise_sigma: f64, rng_seed: u64) -> Self {
        let nf = n as f64;
        let pivot = 0.2 * nf;
        let bend = 0.55 * nf;
        let z = (nf - 1.0) / 2.0;
        let control_points = (0..=12)
            .map(|s| {
                let a = std::f64::consts::FRAC_PI_2 * s as f64 / 12.0;
                [pivot + bend * a.cos(), pivot + bend * a.sin(), z]
            })
            .collect();
        Self {
            geometry: Geometry::BentTube {
                control_points,
                tube_radius,
            },
            dims: [n, n, n],
            inside_intensity: 0.8,
            outside_intensity: 0.2,
            noise_sigma,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::InvalidParams("phantom dims must be positive".into()));
        }
        let unit = 0.0..=1.0;
        if !unit.contains(&self.inside_intensity) || !unit.contains(&self.outside_intensity) {
            return Err(Error::InvalidParams(
                "intensities must lie in [0, 1]".into(),
            ));
        }
        if self.inside_intensity == self.outside_intensity {
            return Err(Error::InvalidParams(
                "inside and outside intensities must differ".into(),
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParams(
                "noise sigma must be non-negative".into(),
            ));
        }
        if let Geometry::BentTube { control_points, .. } = &self.geometry {
            if control_points.len() < 2 {
                return Err(Error::InvalidParams(
                    "a tube needs at least two control points".into(),
                ));
            }
        }
        let (lo, hi) = self.geometry.bounds();
        for d in 0..3 {
            if lo[d] < MARGIN || hi[d] > self.dims[d] as f64 - 1.0 - MARGIN {
                return Err(Error::GeometryOutOfBounds);
            }
        }
        Ok(())
    }

    pub fn truth(&self) -> LabelMask {
        LabelMask::from_fn(self.dims, |p| {
            self.geometry.contains([p.i as f64, p.j as f64, p.k as f64])
        })
    }

    /// Ground-truth mask and the noisy volume. Each voxel's noise is drawn
    /// from a fixed position of the ChaCha stream keyed by `rng_seed`, so it
    /// depends only on the seed and the voxel's linear index.
    pub fn generate(&self) -> Result<(Volume, LabelMask)> {
        self.validate()?;
        let truth = self.truth();
        let base = ChaCha8Rng::seed_from_u64(self.rng_seed);
        let data = truth
            .data()
            .iter()
            .enumerate()
            .map(|(l, &inside)| {
                let level = if inside {
                    self.inside_intensity
                } else {
                    self.outside_intensity
                };
                let noise = if self.noise_sigma > 0.0 {
                    self.noise_sigma * gaussian_at(&base, l as u64)
                } else {
                    0.0
                };
                (level + noise).clamp(0.0, 1.0)
            })
            .collect();
        Ok((Volume::from_data(self.dims, data)?, truth))
    }
}

/// Standard normal sample at stream offset `index` (Box-Muller on two words).
fn gaussian_at(base: &ChaCha8Rng, index: u64) -> f64 {
    let mut rng = base.clone();
    rng.set_word_pos(u128::from(index) * 4);
    let u1 = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_volume_matches_analytic() {
        let spec = PhantomSpec::sphere(32, 8.0, 0.0, 1);
        let (_, truth) = spec.generate().unwrap();
        let analytic = 4.0 / 3.0 * std::f64::consts::PI * 512.0;
        let n = truth.count() as f64;
        assert!((n - analytic).abs() / analytic < 0.02, "{n} vs {analytic}");
    }

    #[test]
    fn noise_free_has_two_values() {
        for spec in [
            PhantomSpec::sphere(24, 6.0, 0.0, 3),
            PhantomSpec::bent_tube(48, 3.0, 0.0, 3),
        ] {
            let (v, truth) = spec.generate().unwrap();
            let mut values: Vec<f64> = v.data().to_vec();
            values.sort_by(f64::total_cmp);
            values.dedup();
            assert_eq!(values, vec![0.2, 0.8]);
            for (l, &x) in v.data().iter().enumerate() {
                assert_eq!(x == 0.8, truth.data()[l]);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = PhantomSpec::sphere(20, 5.0, 0.1, 99);
        let (a, _) = spec.generate().unwrap();
        let (b, _) = spec.generate().unwrap();
        assert_eq!(a, b);
        let other = PhantomSpec {
            rng_seed: 100,
            ..spec.clone()
        };
        assert_ne!(other.generate().unwrap().0, a);
    }

    #[test]
    fn noise_statistics() {
        let spec = PhantomSpec::sphere(40, 8.0, 0.05, 7);
        let (v, truth) = spec.generate().unwrap();
        let outside: Vec<f64> = v
            .data()
            .iter()
            .zip(truth.data())
            .filter(|(_, &t)| !t)
            .map(|(&x, _)| x)
            .collect();
        assert!(outside.len() >= 10_000);
        let n = outside.len() as f64;
        let mean = outside.iter().sum::<f64>() / n;
        let var = outside.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 0.2).abs() < 0.05 * 0.2, "mean {mean}");
        assert!((var - 0.0025).abs() < 0.05 * 0.0025, "var {var}");
    }

    #[test]
    fn out_of_bounds_geometry() {
        let spec = PhantomSpec::sphere(16, 6.0, 0.0, 0);
        assert!(matches!(spec.generate(), Err(Error::GeometryOutOfBounds)));
        let same = PhantomSpec {
            outside_intensity: 0.8,
            ..PhantomSpec::sphere(32, 5.0, 0.0, 0)
        };
        assert!(matches!(same.validate(), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn bridged_blobs_are_one_component() {
        let spec = PhantomSpec {
            geometry: Geometry::TwoBlobsBridged {
                blob_centers: [[10.0, 15.0, 15.0], [26.0, 15.0, 15.0]],
                radii: [5.0, 4.0],
                bridge_width: 3.0,
            },
            dims: [38, 30, 30],
            inside_intensity: 0.9,
            outside_intensity: 0.1,
            noise_sigma: 0.0,
            rng_seed: 0,
        };
        let (_, truth) = spec.generate().unwrap();
        let x0 = spec.geometry.interior_point();
        let cc = crate::seeding::connected_component(&truth, x0).unwrap();
        assert_eq!(cc, truth);
    }

    #[test]
    fn spec_json_field_names() {
        let spec = PhantomSpec::sphere(32, 8.0, 0.1, 5);
        let json = serde_json::to_value(&spec).unwrap();
        for key in [
            "shape",
            "dims",
            "insideIntensity",
            "outsideIntensity",
            "noiseSigma",
            "rngSeed",
            "center",
            "radius",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["shape"], "sphere");
        let back: PhantomSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec);

        let tube = PhantomSpec::bent_tube(64, 4.0, 0.1, 5);
        let json = serde_json::to_value(&tube).unwrap();
        assert_eq!(json["shape"], "bent-tube");
        assert!(json.get("controlPoints").is_some() && json.get("tubeRadius").is_some());
    }
}
