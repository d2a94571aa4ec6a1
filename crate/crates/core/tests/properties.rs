use proptest::prelude::*;

use geomds::decompose::{cur_decompose, nmds_decompose, reconstruct_dense};
use geomds::geodesics::{
    distance_matrix, farthest_point_sampling, square_columns, DijkstraBackend, GeodesicBackend,
    PlaneBackend,
};
use geomds::geometry::synth::{jittered_grid, uniform_cloud};
use geomds::geometry::{knn_graph, mesh_to_graph};
use geomds::scaling::{accelerated_mds, classical_mds_dense};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn knn_graph_is_symmetric(p in 12usize..60, w in 2usize..8, seed in 0u64..1000) {
        let cloud = uniform_cloud(p, 3, seed);
        if let Ok(g) = knn_graph(&cloud, w) {
            for i in 0..p {
                for (j, wt) in g.neighbors(i) {
                    prop_assert_eq!(g.weight(j, i), Some(wt));
                }
                prop_assert!(g.degree(i) >= w);
            }
        }
    }

    #[test]
    fn dijkstra_is_a_symmetric_metric(nx in 3usize..9, ny in 3usize..9, seed in 0u64..1000) {
        let mesh = jittered_grid(nx, ny, 1.0, 0.2, seed);
        let backend = DijkstraBackend::new(mesh_to_graph(&mesh).unwrap());
        let d = distance_matrix(&backend, 1000).unwrap();
        let p = nx * ny;
        for i in 0..p {
            prop_assert_eq!(d[(i, i)], 0.0);
            for j in 0..p {
                prop_assert_eq!(d[(i, j)].to_bits(), d[(j, i)].to_bits());
                for k in 0..p {
                    prop_assert!(d[(i, j)] <= d[(i, k)] + d[(k, j)] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn fps_separation_bounds_coverage(p in 20usize..80, n in 2usize..12, seed in 0u64..1000) {
        let backend = PlaneBackend::new(uniform_cloud(p, 2, seed));
        let s = farthest_point_sampling(&backend, n, 0).unwrap();
        let again = farthest_point_sampling(&backend, n, 0).unwrap();
        prop_assert_eq!(&s.indices, &again.indices);
        let mut sep = f64::INFINITY;
        for (a, &i) in s.indices.iter().enumerate() {
            for &j in &s.indices[..a] {
                sep = sep.min(backend.distance(i, j).unwrap());
            }
        }
        prop_assert!(sep >= s.covering_radius() - 1e-12);
    }

    #[test]
    fn factors_are_symmetric_and_low_rank(p in 15usize..50, n in 3usize..10, seed in 0u64..1000) {
        let backend = PlaneBackend::new(uniform_cloud(p, 3, seed));
        let cols = square_columns(&farthest_point_sampling(&backend, n, 0).unwrap());
        let fac = nmds_decompose(&cols, n.div_ceil(2)).unwrap();
        let e = reconstruct_dense(&fac, 1000).unwrap();
        for i in 0..p {
            for j in 0..p {
                prop_assert_eq!(e[(i, j)], e[(j, i)]);
            }
        }
        prop_assert!(geomds::linalg::numerical_rank(e.as_ref(), 1e-9).unwrap() <= n.div_ceil(2));
        if let Ok(cur) = cur_decompose(&cols, &[0, 1]) {
            prop_assert_eq!(cur.inner_dim(), 2 + n);
        }
    }

    #[test]
    fn accelerated_matches_dense_on_clouds(p in 20usize..60, seed in 0u64..1000) {
        let backend = PlaneBackend::new(uniform_cloud(p, 3, seed));
        let cols = square_columns(&farthest_point_sampling(&backend, 8, 0).unwrap());
        let fac = nmds_decompose(&cols, 5).unwrap();
        let dense = classical_mds_dense(reconstruct_dense(&fac, 1000).unwrap().as_ref(), 2, 1000).unwrap();
        let fast = accelerated_mds(&fac, 2).unwrap();
        for (a, b) in fast.eigenvalues.iter().zip(&dense.eigenvalues) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-12));
        }
        // distances between embedded points do not depend on sign choices
        let dz = |z: &faer::Mat<f64>, i: usize, j: usize| ((z[(i, 0)] - z[(j, 0)]).powi(2) + (z[(i, 1)] - z[(j, 1)]).powi(2)).sqrt();
        for i in 0..p {
            for j in 0..i {
                prop_assert!((dz(&fast.coords, i, j) - dz(&dense.coords, i, j)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn distances_are_nonnegative(p in 2usize..40, seed in 0u64..1000) {
        let backend = PlaneBackend::new(uniform_cloud(p, 2, seed));
        for i in 0..p {
            prop_assert!(backend.dist_column(i).unwrap().iter().all(|&d| d >= 0.0));
        }
    }
}
