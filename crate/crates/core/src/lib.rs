//! Semi-automatic 3D segmentation of volumetric images.
//!
//! A seed region is grown from a single user point by intensity clustering
//! and morphological cleanup, converted to a signed distance field by fast
//! sweeping, and refined by a narrow-band level set driven by region means
//! and curvature. The final zero level set is exported as a voxel mask and a
//! marching-cubes surface.
//!
//! ```
//! use volseg::{phantom::PhantomSpec, pipeline::{segment_volume, SeedMethod}, io::PipelineConfig};
//!
//! let spec = PhantomSpec::sphere(24, 6.0, 0.05, 7);
//! let (volume, truth) = spec.generate().unwrap();
//! let seg = segment_volume(
//!     &volume,
//!     spec.geometry.interior_point(),
//!     &PipelineConfig::default(),
//!     SeedMethod::Cluster,
//!     Some(&truth),
//!     "demo",
//! )
//! .unwrap();
//! assert!(seg.report.agreement.unwrap().dice > 0.9);
//! ```

pub mod distance;
pub mod error;
pub mod io;
pub mod levelset;
mod mc_table;
pub mod mesh;
pub mod metrics;
pub mod phantom;
pub mod pipeline;
pub mod seeding;
pub mod volume;

pub use distance::{rebuild_sdf, SignedDistanceField};
pub use error::{Error, Result};
pub use levelset::{evolve, EvolutionParams};
pub use mesh::{marching_cubes, TriangleMesh};
pub use metrics::{compare, AgreementReport};
pub use seeding::{generate_seed, SeedParams};
pub use volume::{LabelMask, Volume, VoxelIndex};
