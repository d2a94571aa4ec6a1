use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{euclidean, knn_graph, mesh_to_graph, PointCloud, TriMesh, WeightedGraph};
use crate::registry::Registry;

/// Source of exact single-source distance columns on a discrete manifold.
pub trait GeodesicBackend: Send + Sync {
    fn name(&self) -> &'static str;

    fn num_vertices(&self) -> usize;

    /// Distances from `source` to every vertex; entry `source` is 0.
    fn dist_column(&self, source: usize) -> Result<Vec<f64>>;

    /// Distance between two vertices. Analytic backends answer in O(1).
    fn distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check(j)?;
        Ok(self.dist_column(i)?[j])
    }

    /// Fails unless `v` is a valid vertex id.
    fn check(&self, v: usize) -> Result<()> {
        let p = self.num_vertices();
        if v >= p {
            return Err(Error::IndexOutOfRange { index: v, len: p });
        }
        Ok(())
    }
}

/// Binary-heap Dijkstra over a weighted graph.
pub struct DijkstraBackend {
    graph: WeightedGraph,
}

impl DijkstraBackend {
    pub fn new(graph: WeightedGraph) -> Self {
        DijkstraBackend { graph }
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }
}

/// Path length carried as an unevaluated sum `hi + lo` (double-double), so
/// the rounded length does not depend on the order weights were added in.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Length {
    hi: f64,
    lo: f64,
}

impl Length {
    const ZERO: Length = Length { hi: 0.0, lo: 0.0 };
    const INFINITE: Length = Length {
        hi: f64::INFINITY,
        lo: 0.0,
    };

    fn add(self, w: f64) -> Length {
        // two-sum, then renormalize so that hi = fl(hi + lo)
        let s = self.hi + w;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (w - bb);
        let lo = self.lo + err;
        let hi = s + lo;
        Length {
            hi,
            lo: lo - (hi - s),
        }
    }

    fn cmp(&self, other: &Length) -> Ordering {
        self.hi
            .total_cmp(&other.hi)
            .then_with(|| self.lo.total_cmp(&other.lo))
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    dist: Length,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    // Reversed so the std max-heap pops the smallest distance first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl GeodesicBackend for DijkstraBackend {
    fn name(&self) -> &'static str {
        "dijkstra"
    }

    fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    fn dist_column(&self, source: usize) -> Result<Vec<f64>> {
        self.check(source)?;
        let p = self.num_vertices();
        let mut dist = vec![Length::INFINITE; p];
        let mut heap = BinaryHeap::with_capacity(p);
        dist[source] = Length::ZERO;
        heap.push(HeapEntry {
            dist: Length::ZERO,
            vertex: source,
        });
        while let Some(HeapEntry { dist: d, vertex: v }) = heap.pop() {
            if d.cmp(&dist[v]) == Ordering::Greater {
                continue;
            }
            for (t, w) in self.graph.neighbors(v) {
                let nd = d.add(w);
                if nd.cmp(&dist[t]) == Ordering::Less {
                    dist[t] = nd;
                    heap.push(HeapEntry {
                        dist: nd,
                        vertex: t,
                    });
                }
            }
        }
        if let Some(target) = dist.iter().position(|d| d.hi.is_infinite()) {
            return Err(Error::Unreachable {
                source_vertex: source,
                target,
            });
        }
        Ok(dist.into_iter().map(|d| d.hi).collect())
    }
}

/// Closed-form Euclidean distances; the geodesic metric of a flat manifold.
pub struct PlaneBackend {
    cloud: PointCloud,
}

impl PlaneBackend {
    pub fn new(cloud: PointCloud) -> Self {
        PlaneBackend { cloud }
    }
}

impl GeodesicBackend for PlaneBackend {
    fn name(&self) -> &'static str {
        "plane"
    }

    fn num_vertices(&self) -> usize {
        self.cloud.len()
    }

    fn dist_column(&self, source: usize) -> Result<Vec<f64>> {
        self.check(source)?;
        let x = self.cloud.point(source);
        Ok(self.cloud.points().map(|y| euclidean(x, y)).collect())
    }

    fn distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i)?;
        self.check(j)?;
        Ok(euclidean(self.cloud.point(i), self.cloud.point(j)))
    }
}

/// Great-circle distances on the origin-centered sphere of radius `r`.
pub struct SphereBackend {
    cloud: PointCloud,
    radius: f64,
}

impl SphereBackend {
    /// Every point must lie within `1e-9 · r` of the sphere.
    pub fn new(cloud: PointCloud, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!("sphere radius {radius}")));
        }
        for (i, p) in cloud.points().enumerate() {
            let n = p.iter().map(|c| c * c).sum::<f64>().sqrt();
            if (n - radius).abs() > 1e-9 * radius {
                return Err(Error::InvalidCloud(format!(
                    "point {i} has norm {n}, not on the sphere of radius {radius}"
                )));
            }
        }
        Ok(SphereBackend { cloud, radius })
    }

    /// Infers the radius as the mean point norm.
    pub fn fit(cloud: PointCloud) -> Result<Self> {
        let r = cloud
            .points()
            .map(|p| p.iter().map(|c| c * c).sum::<f64>().sqrt())
            .sum::<f64>()
            / cloud.len() as f64;
        Self::new(cloud, r)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn arc(&self, x: &[f64], y: &[f64]) -> f64 {
        // Equal to r·acos(⟨x,y⟩/r²) on the sphere, without acos's loss of
        // precision for nearby points.
        let (mut diff, mut sum) = (0.0, 0.0);
        for (a, b) in x.iter().zip(y) {
            diff += (a - b) * (a - b);
            sum += (a + b) * (a + b);
        }
        self.radius * 2.0 * diff.sqrt().atan2(sum.sqrt())
    }
}

impl GeodesicBackend for SphereBackend {
    fn name(&self) -> &'static str {
        "sphere"
    }

    fn num_vertices(&self) -> usize {
        self.cloud.len()
    }

    fn dist_column(&self, source: usize) -> Result<Vec<f64>> {
        self.check(source)?;
        let x = self.cloud.point(source);
        Ok(self.cloud.points().map(|y| self.arc(x, y)).collect())
    }

    fn distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.arc(self.cloud.point(i), self.cloud.point(j)))
    }
}

/// Input a backend is built from.
pub enum Manifold {
    Mesh(TriMesh),
    Cloud(PointCloud),
}

impl Manifold {
    pub fn num_vertices(&self) -> usize {
        match self {
            Manifold::Mesh(m) => m.num_vertices(),
            Manifold::Cloud(c) => c.len(),
        }
    }

    pub fn to_cloud(&self) -> PointCloud {
        match self {
            Manifold::Mesh(m) => m.to_cloud(),
            Manifold::Cloud(c) => c.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BackendOptions {
    /// Neighbor count for point-cloud graphs.
    pub knn: usize,
    /// Sphere radius; inferred from the data when `None`.
    pub radius: Option<f64>,
}

impl Default for BackendOptions {
    fn default() -> Self {
        BackendOptions {
            knn: 10,
            radius: None,
        }
    }
}

pub type BackendFactory = fn(&Manifold, &BackendOptions) -> Result<Box<dyn GeodesicBackend>>;

fn build_dijkstra(m: &Manifold, opts: &BackendOptions) -> Result<Box<dyn GeodesicBackend>> {
    let graph = match m {
        Manifold::Mesh(mesh) => mesh_to_graph(mesh)?,
        Manifold::Cloud(cloud) => knn_graph(cloud, opts.knn)?,
    };
    let components = graph.connected_components();
    if components > 1 {
        return Err(Error::DisconnectedGraph { components });
    }
    Ok(Box::new(DijkstraBackend::new(graph)))
}

fn build_plane(m: &Manifold, _: &BackendOptions) -> Result<Box<dyn GeodesicBackend>> {
    Ok(Box::new(PlaneBackend::new(m.to_cloud())))
}

fn build_sphere(m: &Manifold, opts: &BackendOptions) -> Result<Box<dyn GeodesicBackend>> {
    let cloud = m.to_cloud();
    Ok(Box::new(match opts.radius {
        Some(r) => SphereBackend::new(cloud, r)?,
        None => SphereBackend::fit(cloud)?,
    }))
}

/// Backends available by name: `dijkstra`, `plane`, `sphere`.
pub fn backend_registry() -> Registry<BackendFactory> {
    let mut r = Registry::new("geodesic backend");
    r.register("dijkstra", build_dijkstra as BackendFactory)
        .register("plane", build_plane as BackendFactory)
        .register("sphere", build_sphere as BackendFactory);
    r
}
