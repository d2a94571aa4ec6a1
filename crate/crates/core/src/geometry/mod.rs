//! Discrete manifold carriers: triangle meshes, point clouds and the weighted
//! graphs geodesics are computed on.

mod graph;
pub mod io;
pub(crate) mod mesh;
pub mod synth;

pub use graph::{knn_graph, mesh_to_graph, WeightedGraph};
pub use mesh::{PointCloud, TriMesh};

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
