use faer::Mat;

use super::{LowRankSquaredDistances, Method};
use crate::error::{Error, Result};
use crate::geodesics::DistanceColumns;
use crate::linalg::{hcat, select_cols, select_rows, singular_values, thin_qr};

/// Largest admissible condition number of `C_s`.
pub const MAX_CONDITION: f64 = 1e12;

/// CUR decomposition on the sample columns listed in `subset`:
/// `U = C_s⁺` by least squares and `Ê = ½ (C U Rᵀ + R Uᵀ Cᵀ)`, exposed as
/// `S = (C | R)` with `T = ½ [[0, U], [Uᵀ, 0]]`.
pub fn cur_decompose(r: &DistanceColumns, subset: &[usize]) -> Result<LowRankSquaredDistances> {
    let n = r.num_samples();
    let n1 = subset.len();
    if n1 == 0 || n1 > n {
        return Err(Error::InvalidParameter(format!(
            "column subset of size {n1} must be in [1, {n}]"
        )));
    }
    for (k, &c) in subset.iter().enumerate() {
        if c >= n {
            return Err(Error::IndexOutOfRange { index: c, len: n });
        }
        if subset[..k].contains(&c) {
            return Err(Error::InvalidParameter(format!(
                "subset column {c} repeated"
            )));
        }
    }
    let c = select_cols(r.values.as_ref(), subset);
    let cs = select_rows(c.as_ref(), &r.indices);

    let sv = singular_values(cs.as_ref())?;
    let (top, bottom) = (sv[0], sv[sv.len() - 1]);
    let cond = if bottom > 0.0 {
        top / bottom
    } else {
        f64::INFINITY
    };
    if cond.is_nan() || cond > MAX_CONDITION {
        return Err(Error::IllConditioned(cond));
    }

    // C_s = Q Rq, so the least-squares inverse is U = Rq⁻¹ Qᵀ.
    let (q, rq) = thin_qr(cs.as_ref());
    let mut u = q.transpose().to_owned();
    for col in 0..n {
        for i in (0..n1).rev() {
            let mut acc = u[(i, col)];
            for k in (i + 1)..n1 {
                acc -= rq[(i, k)] * u[(k, col)];
            }
            u[(i, col)] = acc / rq[(i, i)];
        }
    }

    let s = hcat(c.as_ref(), r.values.as_ref());
    let q_dim = n1 + n;
    let t = Mat::from_fn(q_dim, q_dim, |i, j| match (i < n1, j < n1) {
        (true, false) => 0.5 * u[(i, j - n1)],
        (false, true) => 0.5 * u[(j, i - n1)],
        _ => 0.0,
    });
    let mut fac = LowRankSquaredDistances::new(s, t, Method::Cur, r.metric, r.indices.clone())?;
    fac.n1 = Some(n1);
    Ok(fac)
}
