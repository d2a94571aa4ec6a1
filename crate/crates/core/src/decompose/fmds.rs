use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use super::{LowRankSquaredDistances, Method};
use crate::error::{Error, Result};
use crate::geodesics::DistanceColumns;
use crate::laplacian::LaplacianPair;
use crate::sparse::CsrMatrix;

/// Residual target for every column of the interpolation solve.
pub const SOLVE_TOLERANCE: f64 = 1e-8;
const MAX_REFINEMENTS: usize = 5;

/// The `n × p` 0/1 matrix `B` with `B[k, indices[k]] = 1`, kept as its index list.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionMatrix {
    indices: Vec<usize>,
    p: usize,
}

impl SelectionMatrix {
    pub fn new(indices: Vec<usize>, p: usize) -> Result<Self> {
        for (k, &v) in indices.iter().enumerate() {
            if v >= p {
                return Err(Error::IndexOutOfRange { index: v, len: p });
            }
            if indices[..k].contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "selection row {v} repeated"
                )));
            }
        }
        if indices.is_empty() {
            return Err(Error::InvalidParameter("empty selection".into()));
        }
        Ok(SelectionMatrix { indices, p })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn num_vertices(&self) -> usize {
        self.p
    }

    /// `B e`.
    pub fn apply(&self, e: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| e[i]).collect()
    }
}

/// Dense `p × n` interpolation operator: column `j` of `M r` weights sample `j`.
#[derive(Clone, Debug)]
pub struct InterpolationMatrix {
    pub values: Mat<f64>,
    pub indices: Vec<usize>,
    pub mu: f64,
}

impl InterpolationMatrix {
    /// `M r` for a vector `r` of sampled values.
    pub fn interpolate(&self, r: &[f64]) -> Vec<f64> {
        let m = &self.values;
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * r[j]).sum())
            .collect()
    }

    /// `max |M[indices[k], j] - δ_kj|`; tends to 0 as `μ` grows.
    pub fn constraint_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, &row) in self.indices.iter().enumerate() {
            for j in 0..self.values.ncols() {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((self.values[(row, j)] - target).abs());
            }
        }
        worst
    }
}

/// Solves `(W A⁻¹ W + μ BᵀB) M = μ Bᵀ` by sparse Cholesky with iterative
/// refinement until each column's relative residual is below [`SOLVE_TOLERANCE`].
pub fn compute_m(
    lap: &LaplacianPair,
    sel: &SelectionMatrix,
    mu: f64,
) -> Result<InterpolationMatrix> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mu must be positive, got {mu}"
        )));
    }
    let p = lap.num_vertices();
    if sel.num_vertices() != p {
        return Err(Error::ShapeMismatch(format!(
            "selection over {} vertices, Laplacian over {p}",
            sel.num_vertices()
        )));
    }
    let n = sel.indices().len();
    let k = lap.system_matrix(sel.indices(), mu);
    let llt = k
        .to_faer_lower()
        .sp_cholesky(Side::Lower)
        .map_err(|_| Error::SingularSystem)?;

    let rhs = Mat::from_fn(p, n, |i, j| if sel.indices()[j] == i { mu } else { 0.0 });
    let mut sol = rhs.clone();
    llt.solve_in_place(sol.as_mut());
    if sol
        .col_iter()
        .flat_map(|c| c.iter().copied().collect::<Vec<_>>())
        .any(|v| !v.is_finite())
    {
        return Err(Error::SingularSystem);
    }

    let mut residual = residuals(&k, &rhs, &sol);
    for _ in 0..MAX_REFINEMENTS {
        if worst_relative(&residual, mu) <= SOLVE_TOLERANCE {
            break;
        }
        let mut correction = residual.clone();
        llt.solve_in_place(correction.as_mut());
        sol += &correction;
        residual = residuals(&k, &rhs, &sol);
    }
    let worst = worst_relative(&residual, mu);
    if worst > SOLVE_TOLERANCE {
        return Err(Error::SolverFailure {
            residual: worst,
            target: SOLVE_TOLERANCE,
        });
    }
    Ok(InterpolationMatrix {
        values: sol,
        indices: sel.indices().to_vec(),
        mu,
    })
}

fn residuals(k: &CsrMatrix, rhs: &Mat<f64>, sol: &Mat<f64>) -> Mat<f64> {
    let mut out = rhs.clone();
    for j in 0..sol.ncols() {
        let x: Vec<f64> = sol.col(j).iter().copied().collect();
        for (i, v) in k.matvec(&x).into_iter().enumerate() {
            out[(i, j)] -= v;
        }
    }
    out
}

// Every right-hand side is μ times a unit vector, so its norm is μ.
fn worst_relative(residual: &Mat<f64>, mu: f64) -> f64 {
    residual
        .col_iter()
        .map(|c| c.norm_l2() / mu)
        .fold(0.0, f64::max)
}

/// `S = (M | R)`, `T = ½ [[0, I], [I, 0]]` so that `S T Sᵀ = ½ (M Rᵀ + R Mᵀ)`.
pub fn fmds_decompose(
    m: &InterpolationMatrix,
    r: &DistanceColumns,
) -> Result<LowRankSquaredDistances> {
    let (p, n) = (m.values.nrows(), m.values.ncols());
    if r.values.nrows() != p || r.values.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "M is {p}x{n} but R is {}x{}",
            r.values.nrows(),
            r.values.ncols()
        )));
    }
    if m.indices != r.indices {
        return Err(Error::ShapeMismatch("M and R sample orders differ".into()));
    }
    let s = crate::linalg::hcat(m.values.as_ref(), r.values.as_ref());
    let t = Mat::from_fn(
        2 * n,
        2 * n,
        |i, j| if i.abs_diff(j) == n { 0.5 } else { 0.0 },
    );
    let mut fac = LowRankSquaredDistances::new(s, t, Method::Fmds, r.metric, r.indices.clone())?;
    fac.mu = Some(m.mu);
    Ok(fac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::reconstruct_dense;
    use crate::decompose::testing::rel_diff;
    use crate::geodesics::{farthest_point_sampling, square_columns, DijkstraBackend};
    use crate::geometry::mesh_to_graph;
    use crate::geometry::synth::{grid_mesh, jittered_grid};
    use crate::linalg::numerical_rank;

    fn dense_m(lap: &LaplacianPair, idx: &[usize], mu: f64) -> Mat<f64> {
        let k = lap.system_matrix(idx, mu).to_dense();
        let p = k.nrows();
        let rhs = Mat::from_fn(p, idx.len(), |i, j| if idx[j] == i { mu } else { 0.0 });
        k.partial_piv_lu().solve(&rhs)
    }

    #[test]
    fn matches_dense_solve() {
        let mesh = jittered_grid(5, 4, 1.0, 0.2, 3);
        let lap = LaplacianPair::new(&mesh).unwrap();
        let idx = vec![0, 7, 19];
        let m = compute_m(&lap, &SelectionMatrix::new(idx.clone(), 20).unwrap(), 1e4).unwrap();
        assert!(rel_diff(&m.values, &dense_m(&lap, &idx, 1e4)) < 1e-10);
    }

    #[test]
    fn interpolates_constants_exactly() {
        let mesh = jittered_grid(6, 6, 1.0, 0.25, 9);
        let lap = LaplacianPair::new(&mesh).unwrap();
        let sel = SelectionMatrix::new(vec![0, 14, 35], 36).unwrap();
        for mu in [1e3, 1e8] {
            let m = compute_m(&lap, &sel, mu).unwrap();
            for v in m.interpolate(&[2.5, 2.5, 2.5]) {
                assert!((v - 2.5).abs() <= 1e-4 * 2.5);
            }
        }
    }

    #[test]
    fn constraints_tighten_with_mu() {
        let mesh = jittered_grid(8, 7, 1.0, 0.2, 5);
        let lap = LaplacianPair::new(&mesh).unwrap();
        let sel = SelectionMatrix::new(vec![3, 20, 41, 55], 56).unwrap();
        let dev: Vec<f64> = [1e1, 1e3, 1e5]
            .iter()
            .map(|&mu| compute_m(&lap, &sel, mu).unwrap().constraint_deviation())
            .collect();
        assert!(dev[0] > dev[1] && dev[1] > dev[2]);
        // large mu: B M approaches the identity
        assert!(compute_m(&lap, &sel, 1e10).unwrap().constraint_deviation() < 1e-6);
    }

    #[test]
    fn factors_expand_to_symmetric_average() {
        let mesh = grid_mesh(7, 6, 0.5);
        let backend = DijkstraBackend::new(mesh_to_graph(&mesh).unwrap());
        let cols = square_columns(&farthest_point_sampling(&backend, 4, 0).unwrap());
        let lap = LaplacianPair::new(&mesh).unwrap();
        let m = compute_m(
            &lap,
            &SelectionMatrix::new(cols.indices.clone(), 42).unwrap(),
            1e4,
        )
        .unwrap();
        let fac = fmds_decompose(&m, &cols).unwrap();
        assert_eq!(fac.inner_dim(), 8);
        let mr = &m.values * cols.values.transpose();
        let expect = Mat::from_fn(42, 42, |i, j| 0.5 * (mr[(i, j)] + mr[(j, i)]));
        let e = reconstruct_dense(&fac, 1000).unwrap();
        assert!(rel_diff(&e, &expect) < 1e-12);
        assert!(numerical_rank(e.as_ref(), 1e-10).unwrap() <= 8);
    }

    #[test]
    fn single_sample_expansion() {
        let mesh = grid_mesh(4, 4, 1.0);
        let lap = LaplacianPair::new(&mesh).unwrap();
        let m = compute_m(&lap, &SelectionMatrix::new(vec![5], 16).unwrap(), 1e4).unwrap();
        let r: Vec<f64> = (0..16).map(|i| (i as f64).sqrt()).collect();
        let cols = DistanceColumns {
            values: Mat::from_fn(16, 1, |i, _| r[i]),
            indices: vec![5],
            metric: crate::geodesics::Metric::SquaredGeodesic,
        };
        let e = reconstruct_dense(&fmds_decompose(&m, &cols).unwrap(), 100).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let want = 0.5 * (m.values[(i, 0)] * r[j] + r[i] * m.values[(j, 0)]);
                assert!((e[(i, j)] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rejects_bad_selection() {
        assert!(matches!(
            SelectionMatrix::new(vec![0, 9], 5),
            Err(Error::IndexOutOfRange { index: 9, len: 5 })
        ));
        assert!(SelectionMatrix::new(vec![1, 1], 5).is_err());
        assert!(SelectionMatrix::new(vec![], 5).is_err());
        let sel = SelectionMatrix::new(vec![3, 0], 5).unwrap();
        assert_eq!(sel.apply(&[10.0, 11.0, 12.0, 13.0, 14.0]), vec![13.0, 10.0]);
    }

    #[test]
    fn identity_selection_limit() {
        let mesh = jittered_grid(10, 5, 0.2, 0.2, 2);
        let lap = LaplacianPair::new(&mesh).unwrap();
        let m = compute_m(
            &lap,
            &SelectionMatrix::new((0..50).collect(), 50).unwrap(),
            1e10,
        )
        .unwrap();
        let inf_norm = (0..50)
            .map(|i| {
                (0..50)
                    .map(|j| (m.values[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        assert!(inf_norm <= 1e-4);
    }

    #[test]
    fn smooth_column_from_samples() {
        // squared distance from the grid center, known at farthest-point samples
        let mesh = grid_mesh(21, 21, 0.05);
        let center = 10 * 21 + 10;
        let truth: Vec<f64> = mesh
            .vertices()
            .iter()
            .map(|v| (v[0] - 0.5).powi(2) + (v[1] - 0.5).powi(2))
            .collect();
        let norm: f64 = truth.iter().map(|b| b * b).sum::<f64>().sqrt();
        let backend = DijkstraBackend::new(mesh_to_graph(&mesh).unwrap());
        let lap = LaplacianPair::new(&mesh).unwrap();
        let err = |n: usize| {
            let samples = farthest_point_sampling(&backend, n, center).unwrap();
            let sel = SelectionMatrix::new(samples.indices.clone(), mesh.num_vertices()).unwrap();
            let est = compute_m(&lap, &sel, 1e4)
                .unwrap()
                .interpolate(&sel.apply(&truth));
            est.iter()
                .zip(&truth)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
                / norm
        };
        assert!(err(13) <= 0.15);
        assert!(err(60) <= 0.05);
    }
}
