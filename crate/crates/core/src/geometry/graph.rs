use std::collections::BTreeSet;

use super::{euclidean, PointCloud, TriMesh};
use crate::error::{Error, Result};

/// Undirected weighted graph in CSR form. Every edge is stored in both
/// directions with bitwise-equal weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// Builds a graph on `p` vertices from undirected edges `(i, j, w)`.
    /// Each pair must appear at most once.
    pub fn from_edges(p: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p];
        for &(i, j, w) in edges {
            if i >= p || j >= p {
                return Err(Error::IndexOutOfRange {
                    index: i.max(j),
                    len: p,
                });
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {i}")));
            }
            if w == 0.0 {
                return Err(Error::DegenerateEdge(i.min(j), i.max(j)));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i}, {j}) has invalid weight {w}"
                )));
            }
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        let mut offsets = Vec::with_capacity(p + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for mut nbrs in adj {
            nbrs.sort_by_key(|&(j, _)| j);
            if nbrs.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidParameter("duplicate edge".into()));
            }
            for (j, w) in nbrs {
                targets.push(j);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Ok(WeightedGraph {
            offsets,
            targets,
            weights,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.weights[r].iter().copied())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.neighbors(i).find(|&(t, _)| t == j).map(|(_, w)| w)
    }

    /// Undirected edges with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        (0..self.num_vertices())
            .flat_map(|i| {
                self.neighbors(i)
                    .filter(move |&(j, _)| i < j)
                    .map(move |(j, w)| (i, j, w))
            })
            .collect()
    }

    pub fn connected_components(&self) -> usize {
        let p = self.num_vertices();
        let mut seen = vec![false; p];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..p {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for (t, _) in self.neighbors(v) {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components() == 1
    }
}

/// One edge per distinct mesh edge, weighted by Euclidean length.
pub fn mesh_to_graph(mesh: &TriMesh) -> Result<WeightedGraph> {
    let mut pairs = BTreeSet::new();
    for f in mesh.faces() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let v = mesh.vertices();
    let edges: Vec<(usize, usize, f64)> = pairs
        .into_iter()
        .map(|(i, j)| (i, j, euclidean(&v[i], &v[j])))
        .collect();
    if let Some(&(i, j, _)) = edges.iter().find(|e| e.2 == 0.0) {
        return Err(Error::DegenerateEdge(i, j));
    }
    WeightedGraph::from_edges(mesh.num_vertices(), &edges)
}

/// Union-symmetrized `w`-nearest-neighbor graph: an edge is kept when either
/// endpoint lists the other. Fails when the result is disconnected.
pub fn knn_graph(cloud: &PointCloud, w: usize) -> Result<WeightedGraph> {
    let p = cloud.len();
    if w == 0 || w >= p {
        return Err(Error::InvalidParameter(format!(
            "neighbor count {w} must be in [1, {})",
            p
        )));
    }
    let mut pairs = BTreeSet::new();
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(p - 1);
    for i in 0..p {
        cand.clear();
        let xi = cloud.point(i);
        cand.extend(
            (0..p)
                .filter(|&j| j != i)
                .map(|j| (euclidean(xi, cloud.point(j)), j)),
        );
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if w < cand.len() {
            cand.select_nth_unstable_by(w - 1, by_dist);
        }
        for &(_, j) in &cand[..w] {
            pairs.insert((i.min(j), i.max(j)));
        }
    }
    // Distances recomputed from the ordered pair so both directions share one value.
    let edges: Vec<(usize, usize, f64)> = pairs
        .into_iter()
        .map(|(i, j)| (i, j, euclidean(cloud.point(i), cloud.point(j))))
        .collect();
    if let Some(&(i, j, _)) = edges.iter().find(|e| e.2 == 0.0) {
        return Err(Error::DegenerateEdge(i, j));
    }
    let g = WeightedGraph::from_edges(p, &edges)?;
    let components = g.connected_components();
    if components > 1 {
        return Err(Error::DisconnectedGraph { components });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::io::parse_off;

    fn right_triangle() -> TriMesh {
        TriMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn right_triangle_edge_lengths() {
        let g = mesh_to_graph(&right_triangle()).unwrap();
        assert_eq!(
            g.edges(),
            vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 2f64.sqrt())]
        );
    }

    #[test]
    fn tetrahedron_has_six_unit_edges() {
        let m = parse_off(
            "OFF\n4 4 0\n0 0 0\n1 0 0\n0.5 0.8660254037844386 0\n0.5 0.28867513459481287 0.816496580927726\n\
             3 0 2 1\n3 0 1 3\n3 1 2 3\n3 2 0 3\n",
        )
        .unwrap();
        let g = mesh_to_graph(&m).unwrap();
        assert_eq!(g.num_edges(), 6);
        for (_, _, w) in g.edges() {
            assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_vertices_are_degenerate() {
        let m = TriMesh::new(
            vec![[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(
            mesh_to_graph(&m),
            Err(Error::DegenerateEdge(0, 1))
        ));
    }

    #[test]
    fn knn_collinear_union() {
        let c = PointCloud::new(1, vec![0.0, 1.0, 3.0]).unwrap();
        let g = knn_graph(&c, 1).unwrap();
        assert_eq!(g.edges(), vec![(0, 1, 1.0), (1, 2, 2.0)]);
    }

    #[test]
    fn knn_complete_graph() {
        let c = PointCloud::new(2, vec![0.0, 0.0, 3.0, 0.0, 0.0, 4.0, 1.0, 1.0]).unwrap();
        let g = knn_graph(&c, 3).unwrap();
        assert_eq!(g.num_edges(), 6);
        assert_eq!(g.weight(1, 2), Some(5.0));
        for (i, j, w) in g.edges() {
            assert_eq!(w, euclidean(c.point(i), c.point(j)));
            assert_eq!(g.weight(j, i).unwrap().to_bits(), w.to_bits());
        }
    }

    #[test]
    fn knn_far_clusters_disconnect() {
        let c = PointCloud::new(1, vec![0.0, 0.1, 0.2, 100.0, 100.1, 100.2]).unwrap();
        assert!(matches!(
            knn_graph(&c, 2),
            Err(Error::DisconnectedGraph { components: 2 })
        ));
    }
}
