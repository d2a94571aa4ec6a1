use faer::Mat;

use super::{Embedding, CLAMP_TOLERANCE};
use crate::decompose::LowRankSquaredDistances;
use crate::error::{Error, Result};
use crate::geodesics::{DistanceColumns, Metric, SampleSet};
use crate::linalg::SymEigen;

use super::accelerated::SmallEigenProblem;

/// `cos(F / r)` elementwise; the target of a radius-`r` sphere embedding.
pub fn cos_transform(samples: &SampleSet, r: f64) -> Result<DistanceColumns> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!("sphere radius {r}")));
    }
    let f = &samples.distances;
    Ok(DistanceColumns {
        values: Mat::from_fn(f.nrows(), f.ncols(), |i, j| (f[(i, j)] / r).cos()),
        indices: samples.indices.clone(),
        metric: Metric::Cosine,
    })
}

/// Radius mapping the largest sampled distance to half a great circle.
pub fn default_radius(samples: &SampleSet) -> f64 {
    samples.max_distance() / std::f64::consts::PI
}

/// Embeds onto the `k`-sphere of radius `r` in `ℝ^{k+1}` by fitting
/// `Z_r Z_rᵀ ≈ cos(D / r)` from a cosine-metric factor pair; no centering.
/// With `normalize`, every row is projected onto the sphere.
pub fn sphere_embed(
    fac: &LowRankSquaredDistances,
    k: usize,
    r: f64,
    normalize: bool,
) -> Result<Embedding> {
    fac.require_metric(Metric::Cosine)?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!("sphere radius {r}")));
    }
    let prob = SmallEigenProblem::new(fac.s.as_ref(), fac.t.as_ref(), false, 1.0);
    let dim = k + 1;
    if dim > prob.dim() {
        return Err(Error::ShapeMismatch(format!(
            "sphere of dimension {k} needs {dim} eigenpairs, factor has {}",
            prob.dim()
        )));
    }
    let eig = SymEigen::new(prob.core.as_ref())?;
    let idx = eig.top_algebraic(dim);
    let floor = CLAMP_TOLERANCE * eig.max_abs();
    let positive = idx.iter().filter(|&&i| eig.values[i] > floor).count();
    if positive < dim {
        return Err(Error::DegenerateEmbedding(format!(
            "only {positive} positive eigenvalues for a {k}-sphere"
        )));
    }
    let emb = super::scaled_embedding(Some(prob.q.as_ref()), &eig, dim);
    let mut coords = emb.coords;
    if normalize {
        for i in 0..coords.nrows() {
            let n = (0..dim).map(|c| coords[(i, c)].powi(2)).sum::<f64>().sqrt();
            if n == 0.0 {
                return Err(Error::DegenerateEmbedding(format!("row {i} has zero norm")));
            }
            for c in 0..dim {
                coords[(i, c)] /= n;
            }
        }
    }
    coords *= faer::Scale(r);
    Ok(Embedding {
        coords,
        eigenvalues: emb.eigenvalues,
        clamped_count: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::nmds_decompose;

    #[test]
    fn cosine_values() {
        let r = 2.0;
        let pi = std::f64::consts::PI;
        let f = Mat::from_fn(3, 1, |i, _| [0.0, pi * r, pi / 2.0 * r][i]);
        let s = SampleSet::new(vec![0], f).unwrap();
        let c = cos_transform(&s, r).unwrap();
        assert_eq!(c.values[(0, 0)], 1.0);
        assert_eq!(c.values[(1, 0)], -1.0);
        assert!(c.values[(2, 0)].abs() < 1e-15);
        assert_eq!(c.metric, Metric::Cosine);
    }

    #[test]
    fn single_point_normalized() {
        let s = SampleSet::new(vec![0], Mat::zeros(1, 1)).unwrap();
        let cols = cos_transform(&s, 3.0).unwrap();
        let fac = nmds_decompose(&cols, 1).unwrap();
        let emb = sphere_embed(&fac, 0, 3.0, true).unwrap();
        assert!((emb.coords[(0, 0)].abs() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_squared_metric() {
        let f = Mat::from_fn(2, 1, |i, _| i as f64);
        let s = SampleSet::new(vec![0], f).unwrap();
        let cols = crate::geodesics::square_columns(&s);
        let fac = crate::decompose::cur_decompose(&cols, &[0]);
        // the sampled entry is zero, so C_s is singular
        assert!(matches!(fac, Err(Error::IllConditioned(_))));
        let f = Mat::from_fn(2, 2, |i, j| if i == j { 0.0 } else { 1.0 });
        let s = SampleSet::new(vec![0, 1], f).unwrap();
        let fac = nmds_decompose(&crate::geodesics::square_columns(&s), 2).unwrap();
        assert!(matches!(
            sphere_embed(&fac, 0, 1.0, false),
            Err(Error::MetricMismatch { .. })
        ));
    }

    fn arc(a: &[f64], b: &[f64], r: f64) -> f64 {
        let d: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        let s: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x + y).powi(2))
            .sum::<f64>()
            .sqrt();
        r * 2.0 * d.atan2(s)
    }

    #[test]
    fn circle_recovered_exactly() {
        use crate::geodesics::{farthest_point_sampling, GeodesicBackend, SphereBackend};
        let r = 1.7;
        let cloud = crate::geometry::synth::circle_points(24, r);
        let backend = SphereBackend::new(cloud, r).unwrap();
        let samples = farthest_point_sampling(&backend, 4, 0).unwrap();
        let fac = nmds_decompose(&cos_transform(&samples, r).unwrap(), 2).unwrap();
        for normalize in [false, true] {
            let z = sphere_embed(&fac, 1, r, normalize).unwrap().coords;
            let row = |i: usize| [z[(i, 0)], z[(i, 1)]];
            for i in 0..24 {
                assert!(((row(i)[0].powi(2) + row(i)[1].powi(2)).sqrt() - r).abs() < 1e-9);
                for j in 0..24 {
                    let want = backend.distance(i, j).unwrap();
                    assert!((arc(&row(i), &row(j), r) - want).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn too_few_positive_eigenvalues() {
        let f = Mat::from_fn(2, 2, |i, j| if i == j { 0.0 } else { 1.0 });
        let s = SampleSet::new(vec![0, 1], f).unwrap();
        // a single point repeated: cos block is rank one
        let s0 = SampleSet::new(vec![0, 1], Mat::zeros(2, 2)).unwrap();
        let fac = nmds_decompose(&cos_transform(&s0, 1.0).unwrap(), 1).unwrap();
        assert!(matches!(
            sphere_embed(&fac, 1, 1.0, false),
            Err(Error::DegenerateEmbedding(_))
        ));
        assert!(matches!(
            sphere_embed(&fac, 2, 1.0, false),
            Err(Error::ShapeMismatch(_))
        ));
        let fac = nmds_decompose(&cos_transform(&s, 1.0).unwrap(), 2).unwrap();
        assert!(sphere_embed(&fac, 1, 1.0, false).is_ok());
    }
}
