//! Evaluation quantities: reconstruction errors, pairwise relative error,
//! triangle-inequality violation, aligned embedding error and the best
//! rank-n baseline.

use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decompose::{LowRankSquaredDistances, PairQuery};
use crate::error::{Error, Result};
use crate::geodesics::GeodesicBackend;
use crate::linalg::SymEigen;

/// `‖D̂ − D‖_F / ‖D‖_F`.
pub fn rel_frobenius_error(dhat: MatRef<'_, f64>, d: MatRef<'_, f64>) -> Result<f64> {
    if dhat.nrows() != d.nrows() || dhat.ncols() != d.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            dhat.nrows(),
            dhat.ncols(),
            d.nrows(),
            d.ncols()
        )));
    }
    let norm = d.norm_l2();
    if norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((dhat - d).norm_l2() / norm)
}

/// Seeded set of distinct-index vertex pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairSample {
    pub pairs: Vec<(usize, usize)>,
    pub seed: u64,
}

impl PairSample {
    pub fn random(p: usize, count: usize, seed: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParameter("need at least 2 vertices".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = (0..count)
            .map(|_| {
                let i = rng.gen_range(0..p);
                let mut j = rng.gen_range(0..p - 1);
                if j >= i {
                    j += 1;
                }
                (i, j)
            })
            .collect();
        Ok(PairSample { pairs, seed })
    }
}

/// Root-mean-square of `(D̂ − D) / D` over pairs, with `D̂` from the factors
/// and `D` from the backend.
pub fn rms_relative_pair_error(
    fac: &LowRankSquaredDistances,
    backend: &dyn GeodesicBackend,
    pairs: &PairSample,
) -> Result<f64> {
    if pairs.pairs.is_empty() {
        return Err(Error::InvalidParameter("empty pair sample".into()));
    }
    let query = PairQuery::new(fac)?;
    let approx = query.distances(&pairs.pairs)?;
    let exact = exact_pair_distances(backend, &pairs.pairs)?;
    rms_relative(&approx, &exact, &pairs.pairs)
}

pub(crate) fn rms_relative(approx: &[f64], exact: &[f64], pairs: &[(usize, usize)]) -> Result<f64> {
    let mut acc = 0.0;
    for ((&a, &d), &(i, j)) in approx.iter().zip(exact).zip(pairs) {
        if d <= 0.0 {
            return Err(Error::ZeroDistancePair(i, j));
        }
        acc += ((a - d) / d).powi(2);
    }
    Ok((acc / approx.len() as f64).sqrt())
}

/// True distances for `pairs`, computing one column per distinct first index.
pub fn exact_pair_distances(
    backend: &dyn GeodesicBackend,
    pairs: &[(usize, usize)],
) -> Result<Vec<f64>> {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by_key(|&k| pairs[k]);
    let mut out = vec![0.0; pairs.len()];
    let mut cached: Option<(usize, Vec<f64>)> = None;
    for k in order {
        let (i, j) = pairs[k];
        if cached.as_ref().map(|c| c.0) != Some(i) {
            cached = Some((i, backend.dist_column(i)?));
        }
        let col = &cached.as_ref().unwrap().1;
        out[k] = *col.get(j).ok_or(Error::IndexOutOfRange {
            index: j,
            len: col.len(),
        })?;
    }
    Ok(out)
}

/// Unsquared distances `sqrt(max(0, Ê))` from a factor pair.
pub fn factor_distances(fac: &LowRankSquaredDistances, cap: usize) -> Result<Mat<f64>> {
    fac.require_metric(crate::geodesics::Metric::SquaredGeodesic)?;
    let e = crate::decompose::reconstruct_dense(fac, cap)?;
    Ok(Mat::from_fn(e.nrows(), e.ncols(), |i, j| {
        e[(i, j)].max(0.0).sqrt()
    }))
}

/// Excess below this fraction of `D(b, c)` is rounding noise, not a violation.
pub const TRIANGLE_ROUNDOFF: f64 = 1e-12;

/// For each anchor `a`, `Σ_{b<c} max(0, D(b,c) − D(b,a) − D(c,a))`, sorted descending.
pub fn triangle_violation(d: MatRef<'_, f64>, anchors: &[usize], cap: usize) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let p = d.nrows();
    if p != d.ncols() {
        return Err(Error::ShapeMismatch(format!("D is {}x{}", p, d.ncols())));
    }
    if p > cap {
        return Err(Error::TooLarge { p, cap });
    }
    if let Some(&a) = anchors.iter().find(|&&a| a >= p) {
        return Err(Error::IndexOutOfRange { index: a, len: p });
    }
    let mut out: Vec<f64> = anchors
        .par_iter()
        .map(|&a| {
            let mut total = 0.0;
            for c in 0..p {
                let dca = d[(c, a)];
                let col = d.col(c);
                for b in 0..c {
                    let v = col[b] - d[(b, a)] - dca;
                    if v > TRIANGLE_ROUNDOFF * col[b] {
                        total += v;
                    }
                }
            }
            total
        })
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// `‖Z Q + 𝟙tᵀ − Z*‖_F / ‖Z*‖_F` minimized over orthogonal `Q` (reflections
/// allowed) and translations `t`. Scale is not fitted.
pub fn procrustes_error(z: MatRef<'_, f64>, zstar: MatRef<'_, f64>) -> Result<f64> {
    if z.nrows() != zstar.nrows() || z.ncols() != zstar.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            z.nrows(),
            z.ncols(),
            zstar.nrows(),
            zstar.ncols()
        )));
    }
    let reference = zstar.norm_l2();
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    let zc = crate::linalg::center_columns(z);
    let sc = crate::linalg::center_columns(zstar);
    let cross = zc.transpose() * &sc;
    let svd = cross.svd().map_err(|_| Error::Eigen)?;
    let q = svd.U() * svd.V().transpose();
    let aligned = &zc * &q;
    Ok((&aligned - &sc).norm_l2() / reference)
}

/// Best rank-`n` approximation of a symmetric matrix in Frobenius norm: the
/// `n` eigenpairs of largest magnitude.
pub fn best_rank_n(e: MatRef<'_, f64>, n: usize, cap: usize) -> Result<Mat<f64>> {
    let p = e.nrows();
    if p != e.ncols() {
        return Err(Error::ShapeMismatch(format!("E is {}x{}", p, e.ncols())));
    }
    if p > cap {
        return Err(Error::TooLarge { p, cap });
    }
    let asym = crate::linalg::relative_asymmetry(e);
    if asym > 1e-9 {
        return Err(Error::NonSymmetric(asym));
    }
    let eig = SymEigen::new(e)?;
    let idx = eig.top_magnitude(n.min(p));
    let v = eig.select_vectors(&idx);
    let scaled = Mat::from_fn(p, idx.len(), |i, c| v[(i, c)] * eig.values[idx[c]]);
    let mut out = &scaled * v.transpose();
    crate::linalg::symmetrize(&mut out);
    Ok(out)
}

/// One JSON-lines metric record.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MetricRecord {
    pub metric: String,
    pub params: serde_json::Value,
    pub value: Option<f64>,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl MetricRecord {
    pub fn new(metric: &str, params: serde_json::Value, value: f64, seed: Option<u64>) -> Self {
        MetricRecord {
            metric: metric.to_string(),
            params,
            value: Some(value),
            seed,
            warning: None,
        }
    }

    pub fn skipped(metric: &str, params: serde_json::Value, warning: String) -> Self {
        MetricRecord {
            metric: metric.to_string(),
            params,
            value: None,
            seed: None,
            warning: Some(warning),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_examples() {
        let d = Mat::from_fn(3, 3, |i, j| (i as f64 - j as f64).abs());
        assert_eq!(rel_frobenius_error(d.as_ref(), d.as_ref()).unwrap(), 0.0);
        let z = Mat::<f64>::zeros(3, 3);
        assert_eq!(rel_frobenius_error(z.as_ref(), d.as_ref()).unwrap(), 1.0);
        let scaled = &d * faer::Scale(1.1);
        assert!((rel_frobenius_error(scaled.as_ref(), d.as_ref()).unwrap() - 0.1).abs() < 1e-12);
        assert!(matches!(
            rel_frobenius_error(d.as_ref(), z.as_ref()),
            Err(Error::ZeroReference)
        ));
    }

    #[test]
    fn rms_examples() {
        assert_eq!(
            rms_relative(&[1.0, 2.0], &[1.0, 2.0], &[(0, 1), (1, 2)]).unwrap(),
            0.0
        );
        assert!((rms_relative(&[1.2], &[1.0], &[(0, 1)]).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(
            rms_relative(&[1.0], &[0.0], &[(3, 4)]),
            Err(Error::ZeroDistancePair(3, 4))
        ));
    }

    #[test]
    fn pair_sample_is_seeded() {
        let a = PairSample::random(10, 50, 4).unwrap();
        assert_eq!(a, PairSample::random(10, 50, 4).unwrap());
        assert!(a.pairs.iter().all(|&(i, j)| i != j && i < 10 && j < 10));
        assert_ne!(a, PairSample::random(10, 50, 5).unwrap());
    }

    #[test]
    fn triangle_examples() {
        // vertices: a = 0, b = 1, c = 2
        let d = Mat::from_fn(3, 3, |i, j| match (i.min(j), i.max(j)) {
            (x, y) if x == y => 0.0,
            (1, 2) => 3.0,
            _ => 1.0,
        });
        let v = triangle_violation(d.as_ref(), &[0], 10).unwrap();
        assert_eq!(v, vec![1.0]);

        let pts: Vec<[f64; 2]> = (0..15)
            .map(|k| [(k as f64).sin() * 3.0, (k * k) as f64 * 0.1])
            .collect();
        let e = Mat::from_fn(15, 15, |i, j| {
            ((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2)).sqrt()
        });
        let all: Vec<usize> = (0..15).collect();
        assert!(triangle_violation(e.as_ref(), &all, 100)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        assert!(matches!(
            triangle_violation(e.as_ref(), &all, 10),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn collinear_points_do_not_violate() {
        let xs: Vec<f64> = (0..40)
            .map(|k| 0.1 * k as f64 + 0.013 * (k as f64).sin())
            .collect();
        let d = Mat::from_fn(40, 40, |i, j| {
            let (a, b) = ([xs[i], 0.7 * xs[i]], [xs[j], 0.7 * xs[j]]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        });
        let all: Vec<usize> = (0..40).collect();
        assert!(triangle_violation(d.as_ref(), &all, 100)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn procrustes_removes_rigid_motion_only() {
        let zs = Mat::from_fn(6, 2, |i, j| ((i * 5 + j * 3) % 7) as f64 - 2.0);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rot = Mat::from_fn(2, 2, |i, j| [[c, -s], [s, c]][i][j]);
        let mut moved = &zs * &rot;
        for i in 0..6 {
            moved[(i, 0)] += 4.0;
            moved[(i, 1)] -= 1.5;
        }
        assert!(procrustes_error(moved.as_ref(), zs.as_ref()).unwrap() < 1e-10);
        let reflected = Mat::from_fn(6, 2, |i, j| if j == 0 { -zs[(i, 0)] } else { zs[(i, 1)] });
        assert!(procrustes_error(reflected.as_ref(), zs.as_ref()).unwrap() < 1e-10);

        let zc = crate::linalg::center_columns(zs.as_ref());
        let doubled = &zc * faer::Scale(2.0);
        assert!((procrustes_error(doubled.as_ref(), zc.as_ref()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn best_rank_examples() {
        let x = Mat::from_fn(5, 2, |i, j| ((i + 1) * (j + 2)) as f64 + (i as f64).sin());
        let e2 = &x * x.transpose();
        let approx = best_rank_n(e2.as_ref(), 2, 100).unwrap();
        assert!((&approx - &e2).norm_l2() <= 1e-10 * e2.norm_l2());
        let full = Mat::from_fn(4, 4, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let back = best_rank_n(full.as_ref(), 4, 100).unwrap();
        assert!((&back - &full).norm_l2() <= 1e-10);
    }

    #[test]
    fn best_rank_beats_random_competitors() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = 12;
        let a = Mat::from_fn(p, p, |_, _| rng.gen_range(-1.0..1.0));
        let e = &a + a.transpose();
        let n = 3;
        let best = (&best_rank_n(e.as_ref(), n, 100).unwrap() - &e).norm_l2();
        for _ in 0..20 {
            let v = Mat::from_fn(p, n, |_, _| rng.gen_range(-1.0..1.0));
            let w = Mat::from_fn(n, n, |i, j| {
                if i == j {
                    rng.gen_range(-3.0..3.0)
                } else {
                    0.0
                }
            });
            let cand = &(&v * &w) * v.transpose();
            assert!(best <= (&cand - &e).norm_l2());
        }
    }
}
