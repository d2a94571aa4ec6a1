//! Geodesic distance matrices as low-rank factor pairs `S·T·Sᵀ` built from a
//! few exact columns, and classical scaling (flat and spherical) computed
//! from those factors in time and memory linear in the number of vertices.

pub mod cli;
pub mod decompose;
pub mod error;
pub mod geodesics;
pub mod geometry;
pub mod laplacian;
pub mod linalg;
pub mod matrix_io;
pub mod metrics;
pub mod registry;
pub mod scaling;
pub mod sparse;

pub use error::{Error, Result};
pub use faer::Mat;

/// Default size cap for operations that materialize a `p × p` matrix.
pub const DEFAULT_DENSE_CAP: usize = 5000;

/// Dense cap, overridable through `GEOMDS_DENSE_CAP`.
pub fn dense_cap() -> usize {
    std::env::var("GEOMDS_DENSE_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_CAP)
}
