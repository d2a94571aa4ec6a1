use faer::{Mat, MatRef};

use super::{scaled_embedding, Embedding};
use crate::decompose::LowRankSquaredDistances;
use crate::error::{Error, Result};
use crate::geodesics::Metric;
use crate::linalg::{center_columns, symmetrize, thin_qr, SymEigen};

/// The small eigenproblem `scale · Rq T Rqᵀ` obtained from a thin QR
/// factorization `Q Rq` of `S` (or of `J S` when centering).
pub struct SmallEigenProblem {
    pub q: Mat<f64>,
    pub r: Mat<f64>,
    pub core: Mat<f64>,
}

impl SmallEigenProblem {
    pub fn new(s: MatRef<'_, f64>, t: MatRef<'_, f64>, center: bool, scale: f64) -> Self {
        let basis = if center {
            center_columns(s)
        } else {
            s.to_owned()
        };
        let (q, r) = thin_qr(basis.as_ref());
        let mut core = &(&r * t) * r.transpose();
        core *= faer::Scale(scale);
        symmetrize(&mut core);
        SmallEigenProblem { q, r, core }
    }

    pub fn dim(&self) -> usize {
        self.core.nrows()
    }
}

/// Classical scaling of `Ê = S T Sᵀ` through the thin QR of `J S`: the
/// eigenpairs of `-½ Rq T Rqᵀ` lifted by `Q` are those of `-½ J Ê J`.
pub fn accelerated_mds(fac: &LowRankSquaredDistances, m: usize) -> Result<Embedding> {
    fac.require_metric(Metric::SquaredGeodesic)?;
    let prob = SmallEigenProblem::new(fac.s.as_ref(), fac.t.as_ref(), true, -0.5);
    if m == 0 || m > prob.dim() {
        return Err(Error::ShapeMismatch(format!(
            "dimension {m} must be in [1, {}]",
            prob.dim()
        )));
    }
    let eig = SymEigen::new(prob.core.as_ref())?;
    Ok(scaled_embedding(Some(prob.q.as_ref()), &eig, m))
}
