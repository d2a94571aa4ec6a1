use faer::{Mat, MatRef};

use super::{scaled_embedding, Embedding};
use crate::error::{Error, Result};
use crate::linalg::{double_center, relative_asymmetry, SymEigen};

/// Relative asymmetry tolerated in a dense squared-distance matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Classical scaling by full eigendecomposition of `-½ J E J`.
pub fn classical_mds_dense(e: MatRef<'_, f64>, m: usize, cap: usize) -> Result<Embedding> {
    let p = e.nrows();
    if p != e.ncols() {
        return Err(Error::ShapeMismatch(format!("E is {}x{}", p, e.ncols())));
    }
    if p > cap {
        return Err(Error::TooLarge { p, cap });
    }
    if m == 0 || m > p {
        return Err(Error::InvalidParameter(format!(
            "dimension {m} must be in [1, {p}]"
        )));
    }
    let asym = relative_asymmetry(e);
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NonSymmetric(asym));
    }
    let mut b = double_center(e);
    b *= faer::Scale(-0.5);
    let eig = SymEigen::new(b.as_ref())?;
    Ok(scaled_embedding(None, &eig, m))
}

/// `‖Z Zᵀ + ½ J E J‖_F`.
pub fn stress(z: MatRef<'_, f64>, e: MatRef<'_, f64>, cap: usize) -> Result<f64> {
    let p = e.nrows();
    if p != e.ncols() || z.nrows() != p {
        return Err(Error::ShapeMismatch(format!(
            "Z has {} rows, E is {}x{}",
            z.nrows(),
            p,
            e.ncols()
        )));
    }
    if p > cap {
        return Err(Error::TooLarge { p, cap });
    }
    let mut g: Mat<f64> = z * z.transpose();
    let jej = double_center(e);
    g += faer::Scale(0.5) * &jej;
    Ok(g.norm_l2())
}

/// The `100 / p²` scaling used when reporting stress.
pub fn display_stress(stress: f64, p: usize) -> f64 {
    100.0 * stress / (p as f64 * p as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squared_distances(points: &[Vec<f64>]) -> Mat<f64> {
        Mat::from_fn(points.len(), points.len(), |i, j| {
            points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        })
    }

    #[test]
    fn collinear_points() {
        // Centering (0, 1, 3) by its mean 4/3 gives the only nonzero direction.
        let e = squared_distances(&[vec![0.0], vec![1.0], vec![3.0]]);
        let emb = classical_mds_dense(e.as_ref(), 1, 100).unwrap();
        let z: Vec<f64> = (0..3).map(|i| emb.coords[(i, 0)]).collect();
        let want = [-4.0 / 3.0, -1.0 / 3.0, 5.0 / 3.0];
        let sign = z[2].signum();
        for (a, b) in z.iter().zip(want) {
            assert!((sign * a - b).abs() < 1e-12);
        }
        assert!((emb.eigenvalues[0] - 42.0 / 9.0).abs() < 1e-12);
        assert!(stress(emb.coords.as_ref(), e.as_ref(), 100).unwrap() <= 1e-8);
    }

    #[test]
    fn zero_matrix() {
        let e = Mat::<f64>::zeros(4, 4);
        let emb = classical_mds_dense(e.as_ref(), 2, 100).unwrap();
        assert_eq!(emb.coords, Mat::<f64>::zeros(4, 2));
        assert_eq!(emb.eigenvalues, vec![0.0, 0.0]);
        assert_eq!(emb.clamped_count, 2);
    }

    #[test]
    fn errors() {
        let e = Mat::from_fn(3, 3, |i, j| (i * 3 + j) as f64);
        assert!(matches!(
            classical_mds_dense(e.as_ref(), 1, 100),
            Err(Error::NonSymmetric(_))
        ));
        let z = Mat::<f64>::zeros(3, 3);
        assert!(matches!(
            classical_mds_dense(z.as_ref(), 1, 2),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            stress(z.as_ref(), z.as_ref(), 2),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn stress_of_zero_embedding_is_half_jej() {
        let e = squared_distances(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 2.0],
            vec![3.0, 1.0],
        ]);
        let z = Mat::<f64>::zeros(4, 2);
        let want = 0.5 * double_center(e.as_ref()).norm_l2();
        assert!((stress(z.as_ref(), e.as_ref(), 10).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn stress_matches_elementwise_loop() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let p = 12;
        let pts: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..3).map(|_| rng.gen()).collect())
            .collect();
        let e = squared_distances(&pts);
        let z = Mat::from_fn(p, 2, |_, _| rng.gen_range(-1.0..1.0));
        // Naive: J E J entry (i,j) = E_ij - rowmean_i - colmean_j + mean.
        let pf = p as f64;
        let row: Vec<f64> = (0..p)
            .map(|i| (0..p).map(|j| e[(i, j)]).sum::<f64>() / pf)
            .collect();
        let all = row.iter().sum::<f64>() / pf;
        let mut acc = 0.0;
        for i in 0..p {
            for j in 0..p {
                let zz: f64 = (0..2).map(|c| z[(i, c)] * z[(j, c)]).sum();
                let jej = e[(i, j)] - row[i] - row[j] + all;
                acc += (zz + 0.5 * jej).powi(2);
            }
        }
        let s = stress(z.as_ref(), e.as_ref(), 100).unwrap();
        assert!((s - acc.sqrt()).abs() <= 1e-12 * acc.sqrt());
    }
}
