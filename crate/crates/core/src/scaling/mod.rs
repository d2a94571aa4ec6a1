//! Classical scaling: the dense reference solver, the factor-based solver
//! that never forms the `p × p` matrix, and embedding onto a sphere.

mod accelerated;
mod dense;
mod sphere;

use faer::{Mat, MatRef};

pub use accelerated::{accelerated_mds, SmallEigenProblem};
pub use dense::{classical_mds_dense, display_stress, stress};
pub use sphere::{cos_transform, default_radius, sphere_embed};

use crate::linalg::SymEigen;

/// Eigenvalues at or below this fraction of the largest magnitude are
/// treated as nonpositive and clamped.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

/// Embedding coordinates with the eigenvalues they were built from.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    /// `p × m`.
    pub coords: Mat<f64>,
    /// Retained eigenvalues, descending, after clamping.
    pub eigenvalues: Vec<f64>,
    /// Number of retained eigenvalues that were clamped to zero.
    pub clamped_count: usize,
}

impl Embedding {
    pub fn num_points(&self) -> usize {
        self.coords.nrows()
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }
}

/// `basis · V Λ^{1/2}` from the `m` algebraically largest eigenpairs of
/// `eig`, clamping nonpositive eigenvalues. Column signs are fixed so the
/// entry of largest magnitude is positive.
pub(crate) fn scaled_embedding(
    basis: Option<MatRef<'_, f64>>,
    eig: &SymEigen,
    m: usize,
) -> Embedding {
    let idx = eig.top_algebraic(m);
    let floor = CLAMP_TOLERANCE * eig.max_abs();
    let mut clamped_count = 0;
    let eigenvalues: Vec<f64> = idx
        .iter()
        .map(|&k| {
            let v = eig.values[k];
            if v <= floor {
                clamped_count += 1;
                0.0
            } else {
                v
            }
        })
        .collect();
    let v = eig.select_vectors(&idx);
    let mut coords = match basis {
        Some(q) => q * &v,
        None => v,
    };
    for (c, &lambda) in eigenvalues.iter().enumerate() {
        let scale = lambda.sqrt();
        let mut col = coords.col_mut(c);
        let mut pivot = 0.0f64;
        for i in 0..col.nrows() {
            if col[i].abs() > pivot.abs() {
                pivot = col[i];
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..col.nrows() {
            col[i] *= sign * scale;
        }
    }
    Embedding {
        coords,
        eigenvalues,
        clamped_count,
    }
}
