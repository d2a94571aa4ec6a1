use faer::Mat;
use rayon::prelude::*;

use super::LowRankSquaredDistances;
use crate::error::{Error, Result};
use crate::geodesics::Metric;

const QUERY_CHUNK: usize = 4096;

/// Row-major copies of `S·T` and `S` so each pair costs one length-`q` dot product.
pub struct PairQuery {
    q: usize,
    p: usize,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl PairQuery {
    pub fn new(fac: &LowRankSquaredDistances) -> Result<Self> {
        fac.require_metric(Metric::SquaredGeodesic)?;
        let st = &fac.s * &fac.t;
        let (p, q) = (fac.s.nrows(), fac.s.ncols());
        let row_major = |m: &Mat<f64>| -> Vec<f64> {
            (0..p)
                .flat_map(|i| (0..q).map(move |j| m[(i, j)]))
                .collect()
        };
        Ok(PairQuery {
            q,
            p,
            left: row_major(&st),
            right: row_major(&fac.s),
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.p
    }

    /// Reconstructed squared distance `S_i T S_jᵀ`, unclamped.
    pub fn squared(&self, i: usize, j: usize) -> f64 {
        let a = &self.left[i * self.q..(i + 1) * self.q];
        let b = &self.right[j * self.q..(j + 1) * self.q];
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    /// `sqrt(max(0, S_i T S_jᵀ))`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.squared(i, j).max(0.0).sqrt()
    }

    /// Distances for every pair, in input order.
    pub fn distances(&self, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
        if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= self.p || j >= self.p) {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                len: self.p,
            });
        }
        let mut out = vec![0.0; pairs.len()];
        out.par_chunks_mut(QUERY_CHUNK)
            .zip(pairs.par_chunks(QUERY_CHUNK))
            .for_each(|(dst, src)| {
                for (d, &(i, j)) in dst.iter_mut().zip(src) {
                    *d = self.distance(i, j);
                }
            });
        Ok(out)
    }
}

/// Approximate geodesic distances for `pairs`; negative reconstructed squares clamp to 0.
pub fn query_pairs(fac: &LowRankSquaredDistances, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    PairQuery::new(fac)?.distances(pairs)
}

/// Materializes `S·T·Sᵀ`; refused above `cap` vertices.
pub fn reconstruct_dense(fac: &LowRankSquaredDistances, cap: usize) -> Result<Mat<f64>> {
    let p = fac.num_vertices();
    if p > cap {
        return Err(Error::TooLarge { p, cap });
    }
    let st = &fac.s * &fac.t;
    let mut e = &st * fac.s.transpose();
    crate::linalg::symmetrize(&mut e);
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::nmds_decompose;
    use crate::decompose::testing::euclidean_columns;

    #[test]
    fn queries_match_reconstruction() {
        let cols = euclidean_columns(20, 3, 6, 5);
        let fac = nmds_decompose(&cols, 3).unwrap();
        let e = reconstruct_dense(&fac, 100).unwrap();
        let pairs: Vec<(usize, usize)> =
            (0..20).flat_map(|i| (0..20).map(move |j| (i, j))).collect();
        let d = query_pairs(&fac, &pairs).unwrap();
        for (&(i, j), v) in pairs.iter().zip(&d) {
            let want = e[(i, j)].max(0.0).sqrt();
            assert!((v - want).abs() < 1e-9 * (1.0 + want));
        }
    }

    #[test]
    fn rejects_out_of_range_and_cosine() {
        let cols = euclidean_columns(10, 2, 3, 1);
        let mut fac = nmds_decompose(&cols, 2).unwrap();
        assert!(matches!(
            query_pairs(&fac, &[(0, 1), (3, 10)]),
            Err(Error::IndexOutOfRange { index: 10, len: 10 })
        ));
        fac.metric = Metric::Cosine;
        assert!(matches!(
            query_pairs(&fac, &[(0, 1)]),
            Err(Error::MetricMismatch { .. })
        ));
    }

    #[test]
    fn dense_cap_respected() {
        let fac = nmds_decompose(&euclidean_columns(10, 2, 3, 1), 2).unwrap();
        assert!(matches!(
            reconstruct_dense(&fac, 9),
            Err(Error::TooLarge { p: 10, cap: 9 })
        ));
    }

    #[test]
    fn sampled_pairs_reproduce_known_columns() {
        let cols = euclidean_columns(40, 3, 5, 2);
        let fac = nmds_decompose(&cols, 5).unwrap();
        let q = PairQuery::new(&fac).unwrap();
        let diameter = (0..40)
            .map(|i| cols.values[(i, 0)])
            .fold(0.0, f64::max)
            .sqrt();
        for (k, &v) in cols.indices.iter().enumerate() {
            assert!(q.distance(v, v) <= 1e-6 * diameter);
            for i in (0..40).filter(|&i| i != v) {
                let want = cols.values[(i, k)].sqrt();
                assert!((q.distance(i, v) - want).abs() <= 1e-6 * want);
            }
        }
    }

    #[test]
    fn flat_grid_pairs_close_to_analytic() {
        use crate::geodesics::{
            farthest_point_sampling, square_columns, GeodesicBackend, PlaneBackend,
        };
        let pts: Vec<f64> = (0..100)
            .flat_map(|k| [(k % 10) as f64, (k / 10) as f64])
            .collect();
        let backend = PlaneBackend::new(crate::geometry::PointCloud::new(2, pts).unwrap());
        let cols = square_columns(&farthest_point_sampling(&backend, 30, 0).unwrap());
        let q = PairQuery::new(&nmds_decompose(&cols, 15).unwrap()).unwrap();
        let mut acc = 0.0;
        let mut count = 0;
        for i in 0..100 {
            for j in 0..i {
                let d = backend.distance(i, j).unwrap();
                acc += ((q.distance(i, j) - d) / d).powi(2);
                count += 1;
            }
        }
        assert!((acc / count as f64).sqrt() <= 0.05);
    }
}
