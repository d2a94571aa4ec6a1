//! Small dense helpers on top of faer shared by the decomposition, scaling
//! and metric modules.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending as faer returns them.
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl SymEigen {
    /// Decomposes `a`, reading only its lower triangle.
    pub fn new(a: MatRef<'_, f64>) -> Result<Self> {
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::Eigen)?;
        let s = evd.S().column_vector();
        let values = (0..s.nrows()).map(|i| s[i]).collect();
        Ok(SymEigen {
            values,
            vectors: evd.U().to_owned(),
        })
    }

    /// Indices of the `k` algebraically largest eigenvalues, in descending order.
    pub fn top_algebraic(&self, k: usize) -> Vec<usize> {
        let n = self.values.len();
        (0..n).rev().take(k).collect()
    }

    /// Indices of the `k` eigenvalues of largest magnitude, ordered by
    /// decreasing magnitude. Ties prefer the lower index.
    pub fn top_magnitude(&self, k: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| {
            self.values[b]
                .abs()
                .total_cmp(&self.values[a].abs())
                .then(a.cmp(&b))
        });
        order.truncate(k);
        order
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Columns of the eigenvector matrix at `idx`, in that order.
    pub fn select_vectors(&self, idx: &[usize]) -> Mat<f64> {
        Mat::from_fn(self.vectors.nrows(), idx.len(), |i, j| {
            self.vectors[(i, idx[j])]
        })
    }
}

/// Thin QR factorization: `a = q * r` with `q` having orthonormal columns
/// and `r` square upper triangular with `min(rows, cols)` rows.
pub fn thin_qr(a: MatRef<'_, f64>) -> (Mat<f64>, Mat<f64>) {
    let qr = a.qr();
    let q = qr.compute_thin_Q();
    let r = qr.thin_R().to_owned();
    (q, r)
}

/// Replaces `a` with `(a + aᵀ) / 2`.
pub fn symmetrize(a: &mut Mat<f64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

pub fn frobenius(a: MatRef<'_, f64>) -> f64 {
    a.norm_l2()
}

pub fn max_abs(a: MatRef<'_, f64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].abs());
        }
    }
    m
}

/// Largest elementwise asymmetry relative to the largest entry.
pub fn relative_asymmetry(a: MatRef<'_, f64>) -> f64 {
    let scale = max_abs(a);
    if scale == 0.0 {
        return 0.0;
    }
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Subtracts each column's mean; equivalent to `J * a` without forming `J`.
pub fn center_columns(a: MatRef<'_, f64>) -> Mat<f64> {
    let p = a.nrows();
    let mut out = a.to_owned();
    if p == 0 {
        return out;
    }
    for j in 0..a.ncols() {
        let mean = (0..p).map(|i| a[(i, j)]).sum::<f64>() / p as f64;
        for i in 0..p {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// `J a J` for a square matrix, i.e. double centering.
pub fn double_center(a: MatRef<'_, f64>) -> Mat<f64> {
    let p = a.nrows();
    let mut out = center_columns(a);
    for i in 0..p {
        let mean = (0..p).map(|j| out[(i, j)]).sum::<f64>() / p as f64;
        for j in 0..p {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    a.singular_values().map_err(|_| Error::Eigen)
}

/// Number of singular values above `rel_tol * σ_max`.
pub fn numerical_rank(a: MatRef<'_, f64>, rel_tol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&v| v > rel_tol * top).count())
}

/// Copies the rows listed in `rows` into a new matrix.
pub fn select_rows(a: MatRef<'_, f64>, rows: &[usize]) -> Mat<f64> {
    Mat::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

/// Copies the columns listed in `cols` into a new matrix.
pub fn select_cols(a: MatRef<'_, f64>, cols: &[usize]) -> Mat<f64> {
    Mat::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

/// Horizontal concatenation `(a | b)`.
pub fn hcat(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let ka = a.ncols();
    Mat::from_fn(a.nrows(), ka + b.ncols(), |i, j| {
        if j < ka {
            a[(i, j)]
        } else {
            b[(i, j - ka)]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_magnitude_orders_by_absolute_value() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { [-5.0, 1.0, 3.0][i] } else { 0.0 });
        let eig = SymEigen::new(a.as_ref()).unwrap();
        let top = eig.top_magnitude(2);
        let vals: Vec<f64> = top.iter().map(|&k| eig.values[k]).collect();
        assert!((vals[0] + 5.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let alg: Vec<f64> = eig
            .top_algebraic(2)
            .iter()
            .map(|&k| eig.values[k])
            .collect();
        assert!((alg[0] - 3.0).abs() < 1e-12 && (alg[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn double_center_zeroes_row_and_column_means() {
        let a = Mat::from_fn(4, 4, |i, j| ((i * 7 + j * 3) % 5) as f64);
        let c = double_center(a.as_ref());
        for k in 0..4 {
            let rs: f64 = (0..4).map(|j| c[(k, j)]).sum();
            let cs: f64 = (0..4).map(|i| c[(i, k)]).sum();
            assert!(rs.abs() < 1e-12 && cs.abs() < 1e-12);
        }
    }

    #[test]
    fn thin_qr_reconstructs() {
        let a = Mat::from_fn(7, 3, |i, j| ((i + 1) as f64).powi(j as i32));
        let (q, r) = thin_qr(a.as_ref());
        assert_eq!((q.ncols(), r.nrows()), (3, 3));
        let back = &q * &r;
        assert!((&back - &a).norm_l2() < 1e-12 * a.norm_l2());
    }
}
