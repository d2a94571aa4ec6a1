use faer::Mat;
use rayon::prelude::*;

use super::GeodesicBackend;
use crate::error::{Error, Result};

/// Landmarks chosen by farthest point sampling and their exact distance columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    /// Vertex ids in selection order.
    pub indices: Vec<usize>,
    /// `p × n` unsquared distances; column `k` is measured from `indices[k]`.
    pub distances: Mat<f64>,
}

impl SampleSet {
    pub fn new(indices: Vec<usize>, distances: Mat<f64>) -> Result<Self> {
        if indices.is_empty() || indices.len() != distances.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "{} sample indices for {} distance columns",
                indices.len(),
                distances.ncols()
            )));
        }
        let p = distances.nrows();
        for (k, &v) in indices.iter().enumerate() {
            if v >= p {
                return Err(Error::IndexOutOfRange { index: v, len: p });
            }
            if indices[..k].contains(&v) {
                return Err(Error::InvalidParameter(format!("sample {v} repeated")));
            }
        }
        Ok(SampleSet { indices, distances })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn num_vertices(&self) -> usize {
        self.distances.nrows()
    }

    /// Largest distance from any vertex to its nearest landmark.
    pub fn covering_radius(&self) -> f64 {
        (0..self.num_vertices())
            .map(|i| {
                (0..self.len())
                    .map(|k| self.distances[(i, k)])
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    pub fn max_distance(&self) -> f64 {
        crate::linalg::max_abs(self.distances.as_ref())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Entries are squared geodesic distances.
    SquaredGeodesic,
    /// Entries are `cos(d / r)` for a sphere of radius `r`.
    Cosine,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::SquaredGeodesic => "squared-geodesic",
            Metric::Cosine => "cosine",
        }
    }
}

/// The `p × n` matrix of known columns of the target matrix (squared
/// distances, or their cosine transform) and the landmarks they belong to.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceColumns {
    pub values: Mat<f64>,
    pub indices: Vec<usize>,
    pub metric: Metric,
}

impl DistanceColumns {
    pub fn num_vertices(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_samples(&self) -> usize {
        self.indices.len()
    }

    /// The `n × n` block of rows at the sampled vertices.
    pub fn sampled_block(&self) -> Mat<f64> {
        crate::linalg::select_rows(self.values.as_ref(), &self.indices)
    }
}

/// Greedy farthest point sampling: starts at `first`, then repeatedly picks
/// the vertex farthest from all landmarks so far (ties go to the lowest id).
pub fn farthest_point_sampling(
    backend: &dyn GeodesicBackend,
    n: usize,
    first: usize,
) -> Result<SampleSet> {
    let p = backend.num_vertices();
    if n == 0 || n > p {
        return Err(Error::InvalidParameter(format!(
            "sample count {n} must be in [1, {p}]"
        )));
    }
    backend.check(first)?;

    let mut indices = Vec::with_capacity(n);
    let mut distances = Mat::zeros(p, n);
    let mut nearest = vec![f64::INFINITY; p];
    let mut taken = vec![false; p];
    let mut next = first;
    for k in 0..n {
        let col = backend.dist_column(next)?;
        indices.push(next);
        taken[next] = true;
        for (i, &d) in col.iter().enumerate() {
            distances[(i, k)] = d;
            nearest[i] = nearest[i].min(d);
        }
        distances[(next, k)] = 0.0;

        let mut best = None;
        for i in (0..p).filter(|&i| !taken[i]) {
            match best {
                Some((_, d)) if nearest[i] <= d => {}
                _ => best = Some((i, nearest[i])),
            }
        }
        match best {
            Some((i, _)) => next = i,
            None => break,
        }
    }
    Ok(SampleSet { indices, distances })
}

/// Elementwise square of the sampled distance columns.
pub fn square_columns(samples: &SampleSet) -> DistanceColumns {
    let f = &samples.distances;
    DistanceColumns {
        values: Mat::from_fn(f.nrows(), f.ncols(), |i, j| f[(i, j)] * f[(i, j)]),
        indices: samples.indices.clone(),
        metric: Metric::SquaredGeodesic,
    }
}

/// All-pairs distance matrix, refused above `cap` vertices. Columns are
/// computed in parallel; each column is independent so the result is deterministic.
pub fn distance_matrix(backend: &dyn GeodesicBackend, cap: usize) -> Result<Mat<f64>> {
    let p = backend.num_vertices();
    if p > cap {
        return Err(Error::TooLarge { p, cap });
    }
    let cols: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|s| backend.dist_column(s))
        .collect::<Result<_>>()?;
    Ok(Mat::from_fn(p, p, |i, j| cols[j][i]))
}
