//! Single-source geodesic distance columns and landmark selection by
//! farthest point sampling.

mod backend;
mod sampling;

pub use backend::{
    backend_registry, BackendFactory, BackendOptions, DijkstraBackend, GeodesicBackend, Manifold,
    PlaneBackend, SphereBackend,
};
pub use sampling::{
    distance_matrix, farthest_point_sampling, square_columns, DistanceColumns, Metric, SampleSet,
};
