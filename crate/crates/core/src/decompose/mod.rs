//! Low-rank factorizations `Ê = S·T·Sᵀ` of the squared-distance matrix from
//! a handful of exact columns, and distance queries answered from the factors.
//!
//! Three strategies are registered by name:
//!
//! * `fmds` interpolates every column with a bi-Laplacian smoothness prior
//!   and symmetrizes (`q = 2n`);
//! * `nmds` learns the interpolation from the sampled rows and keeps the
//!   `n1` dominant eigenpairs of the sampled block (`q = n`);
//! * `cur` fits a CUR decomposition on a subset of `n1` columns (`q = n1 + n`).

mod cur;
mod fmds;
mod nmds;
mod query;

use faer::Mat;
use serde::{Deserialize, Serialize};

pub use cur::cur_decompose;
pub use fmds::{compute_m, fmds_decompose, InterpolationMatrix, SelectionMatrix};
pub use nmds::{default_n1, nmds_decompose};
pub use query::{query_pairs, reconstruct_dense, PairQuery};

use crate::error::{Error, Result};
use crate::geodesics::{DistanceColumns, Metric};
use crate::geometry::TriMesh;
use crate::laplacian::LaplacianPair;
use crate::registry::Registry;

/// Default penalty weight for the FMDS constraints.
pub const DEFAULT_MU: f64 = 1e4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fmds,
    Nmds,
    Cur,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Fmds => "fmds",
            Method::Nmds => "nmds",
            Method::Cur => "cur",
        }
    }
}

/// Factor pair representing `Ê = S·T·Sᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankSquaredDistances {
    /// `p × q`.
    pub s: Mat<f64>,
    /// `q × q`, exactly symmetric.
    pub t: Mat<f64>,
    pub method: Method,
    pub metric: Metric,
    pub indices: Vec<usize>,
    pub n1: Option<usize>,
    pub mu: Option<f64>,
    /// Set when fewer than the requested `n1` eigenpairs were usable.
    pub rank_deficient: bool,
}

impl LowRankSquaredDistances {
    /// Wraps a factor pair, symmetrizing `t`.
    pub fn new(
        s: Mat<f64>,
        mut t: Mat<f64>,
        method: Method,
        metric: Metric,
        indices: Vec<usize>,
    ) -> Result<Self> {
        if t.nrows() != t.ncols() || s.ncols() != t.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "S is {}x{} but T is {}x{}",
                s.nrows(),
                s.ncols(),
                t.nrows(),
                t.ncols()
            )));
        }
        crate::linalg::symmetrize(&mut t);
        Ok(LowRankSquaredDistances {
            s,
            t,
            method,
            metric,
            indices,
            n1: None,
            mu: None,
            rank_deficient: false,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.s.nrows()
    }

    /// Inner dimension `q`.
    pub fn inner_dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn num_samples(&self) -> usize {
        self.indices.len()
    }

    pub(crate) fn require_metric(&self, metric: Metric) -> Result<()> {
        if self.metric != metric {
            return Err(Error::MetricMismatch {
                expected: metric.as_str(),
                found: self.metric.as_str(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DecomposeParams {
    /// Retained eigenpairs (NMDS) or column-subset size (CUR).
    pub n1: Option<usize>,
    pub mu: f64,
    /// Explicit CUR column subset, as positions into the sample list.
    pub subset: Option<Vec<usize>>,
}

impl Default for DecomposeParams {
    fn default() -> Self {
        DecomposeParams {
            n1: None,
            mu: DEFAULT_MU,
            subset: None,
        }
    }
}

pub struct DecomposeInput<'a> {
    pub columns: &'a DistanceColumns,
    /// Required by methods that need a surface operator.
    pub mesh: Option<&'a TriMesh>,
    pub params: &'a DecomposeParams,
}

/// A strategy that turns known columns into a factor pair.
pub trait Decomposer: Send + Sync {
    fn name(&self) -> &'static str;

    fn needs_mesh(&self) -> bool {
        false
    }

    fn decompose(&self, input: &DecomposeInput<'_>) -> Result<LowRankSquaredDistances>;
}

pub struct FmdsDecomposer;

impl Decomposer for FmdsDecomposer {
    fn name(&self) -> &'static str {
        "fmds"
    }

    fn needs_mesh(&self) -> bool {
        true
    }

    fn decompose(&self, input: &DecomposeInput<'_>) -> Result<LowRankSquaredDistances> {
        let mesh = input.mesh.ok_or_else(|| {
            Error::InvalidParameter("fmds needs a triangle mesh for its Laplacian".into())
        })?;
        let lap = LaplacianPair::new(mesh)?;
        let sel = SelectionMatrix::new(input.columns.indices.clone(), mesh.num_vertices())?;
        let m = compute_m(&lap, &sel, input.params.mu)?;
        fmds_decompose(&m, input.columns)
    }
}

pub struct NmdsDecomposer;

impl Decomposer for NmdsDecomposer {
    fn name(&self) -> &'static str {
        "nmds"
    }

    fn decompose(&self, input: &DecomposeInput<'_>) -> Result<LowRankSquaredDistances> {
        let n1 = input
            .params
            .n1
            .unwrap_or_else(|| default_n1(input.columns.num_samples()));
        nmds_decompose(input.columns, n1)
    }
}

pub struct CurDecomposer;

impl Decomposer for CurDecomposer {
    fn name(&self) -> &'static str {
        "cur"
    }

    fn decompose(&self, input: &DecomposeInput<'_>) -> Result<LowRankSquaredDistances> {
        let subset = match &input.params.subset {
            Some(s) => s.clone(),
            None => {
                let n1 = input
                    .params
                    .n1
                    .unwrap_or_else(|| default_n1(input.columns.num_samples()));
                (0..n1).collect()
            }
        };
        cur_decompose(input.columns, &subset)
    }
}

/// Decomposition methods available by name: `cur`, `fmds`, `nmds`.
pub fn decomposer_registry() -> Registry<Box<dyn Decomposer>> {
    let mut r: Registry<Box<dyn Decomposer>> = Registry::new("decomposition method");
    r.register("fmds", Box::new(FmdsDecomposer))
        .register("nmds", Box::new(NmdsDecomposer))
        .register("cur", Box::new(CurDecomposer));
    r
}
