use faer::Mat;

use super::{LowRankSquaredDistances, Method};
use crate::error::{Error, Result};
use crate::geodesics::DistanceColumns;
use crate::linalg::{symmetrize, SymEigen};

/// Eigenvalues below this fraction of the largest magnitude are discarded
/// so that `Λ⁻¹` stays bounded.
pub const EIGEN_CUTOFF: f64 = 1e-12;

/// `⌈n / 2⌉`.
pub fn default_n1(n: usize) -> usize {
    n.div_ceil(2).max(1)
}

/// `S = R`, `T = Ṽ Λ̃⁻¹ Ṽᵀ` from the `n1` largest-magnitude eigenpairs of the
/// symmetrized sampled block `R_s`.
pub fn nmds_decompose(r: &DistanceColumns, n1: usize) -> Result<LowRankSquaredDistances> {
    let n = r.num_samples();
    if n1 == 0 || n1 > n {
        return Err(Error::InvalidParameter(format!(
            "n1 = {n1} must be in [1, {n}]"
        )));
    }
    if r.values.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} columns for {n} samples",
            r.values.ncols()
        )));
    }
    let mut rs = r.sampled_block();
    symmetrize(&mut rs);
    let eig = SymEigen::new(rs.as_ref())?;
    let cutoff = EIGEN_CUTOFF * eig.max_abs();
    let kept: Vec<usize> = eig
        .top_magnitude(n1)
        .into_iter()
        .filter(|&k| eig.values[k].abs() > cutoff)
        .collect();
    if kept.is_empty() {
        return Err(Error::RankDeficient);
    }
    if kept.len() < n1 {
        log::warn!(
            "sampled block supports only {} of the requested {n1} eigenpairs",
            kept.len()
        );
    }
    let v = eig.select_vectors(&kept);
    let inv: Vec<f64> = kept.iter().map(|&k| 1.0 / eig.values[k]).collect();
    let t = Mat::from_fn(n, n, |i, j| {
        (0..kept.len())
            .map(|c| v[(i, c)] * inv[c] * v[(j, c)])
            .sum()
    });
    let mut fac = LowRankSquaredDistances::new(
        r.values.clone(),
        t,
        Method::Nmds,
        r.metric,
        r.indices.clone(),
    )?;
    fac.n1 = Some(kept.len());
    fac.rank_deficient = kept.len() < n1;
    Ok(fac)
}
