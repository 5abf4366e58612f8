//! Terrain surface roughness toolkit.
//!
//! The crate takes scattered elevation samples (LiDAR-style XYZ text files or
//! synthetic stand-ins), grids them into digital elevation models through one
//! of three interpolation methods (natural neighbour, nearest neighbour, or
//! TIN linear), derives five local roughness descriptor maps over
//! non-overlapping analysis windows, and quantifies how strongly the resulting
//! maps agree with each other via pairwise Pearson correlation.
//!
//! The pipeline, end to end:
//!
//! ```text
//! XYZ points -> detrend -> DemGrid -> RoughnessMap(s) -> CorrelationReport
//! ```
//!
//! Modules mirror the pipeline stages:
//!
//! - [`pointcloud`]: XYZ ingestion, global plane fitting and detrending
//! - [`geometry`]: Delaunay triangulation and Sibson (natural neighbour) weights
//! - [`grid`]: the [`grid::DemGrid`] raster type
//! - [`rasterize`]: scattered points -> DEM via the three interpolators
//! - [`descriptors`]: RMSH, locally detrended residuals, residual topography,
//!   slope and curvature standard deviations over w×w tiles
//! - [`analysis`]: map normalization, Pearson correlation, descriptor / window
//!   / interpolation comparisons
//! - [`synthterrain`]: seeded synthetic terrain archetypes
//! - [`ascii`]: Esri ASCII grid and sidecar metadata I/O

pub mod analysis;
pub mod ascii;
pub mod descriptors;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod pointcloud;
pub mod rasterize;
pub mod synthterrain;

pub use analysis::{CorrEntry, CorrelationReport, SweepReport};
pub use descriptors::{Descriptor, RoughnessMap, WindowSpec, DEFAULT_WINDOWS};
pub use error::{Result, RoughError};
pub use grid::DemGrid;
pub use pointcloud::{Plane, Point3, PointCloud};
pub use rasterize::InterpMethod;
pub use synthterrain::{Archetype, TerrainSpec};
