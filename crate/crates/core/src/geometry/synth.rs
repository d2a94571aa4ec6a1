//! Synthetic manifolds used as fixtures: planar grids, wavy sheets, sphere
//! and circle samples. All generators are deterministic for a given seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{PointCloud, TriMesh};

/// Regular `nx × ny` vertex grid in the z = 0 plane with spacing `h`, split
/// into triangles with alternating diagonals. Vertex `(ix, iy)` has id `iy * nx + ix`.
pub fn grid_mesh(nx: usize, ny: usize, h: f64) -> TriMesh {
    height_field(nx, ny, h, |_, _| 0.0)
}

/// Grid whose vertices are lifted to `z = f(x, y)`.
pub fn height_field(nx: usize, ny: usize, h: f64, f: impl Fn(f64, f64) -> f64) -> TriMesh {
    assert!(nx >= 2 && ny >= 2);
    let mut vertices = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let (x, y) = (ix as f64 * h, iy as f64 * h);
            vertices.push([x, y, f(x, y)]);
        }
    }
    TriMesh::new(vertices, grid_faces(nx, ny)).expect("grid is a valid mesh")
}

fn grid_faces(nx: usize, ny: usize) -> Vec<[usize; 3]> {
    let mut faces = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            let a = iy * nx + ix;
            let (b, c, d) = (a + 1, a + nx, a + nx + 1);
            if (ix + iy) % 2 == 0 {
                faces.push([a, b, d]);
                faces.push([a, d, c]);
            } else {
                faces.push([a, b, c]);
                faces.push([b, d, c]);
            }
        }
    }
    faces
}

/// Planar grid with every interior vertex displaced in-plane by up to
/// `jitter · h`, keeping triangles well-shaped for `jitter < 0.3`.
pub fn jittered_grid(nx: usize, ny: usize, h: f64, jitter: f64, seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let (mut x, mut y) = (ix as f64 * h, iy as f64 * h);
            if ix > 0 && iy > 0 && ix + 1 < nx && iy + 1 < ny {
                x += rng.gen_range(-jitter..=jitter) * h;
                y += rng.gen_range(-jitter..=jitter) * h;
            }
            vertices.push([x, y, 0.0]);
        }
    }
    TriMesh::new(vertices, grid_faces(nx, ny)).expect("grid is a valid mesh")
}

/// A gently curved sheet: a grid over `[0, (nx-1)h] × [0, (ny-1)h]` lifted
/// by two superposed sine waves of the given amplitude.
pub fn wavy_sheet(nx: usize, ny: usize, h: f64, amplitude: f64) -> TriMesh {
    let (lx, ly) = ((nx - 1) as f64 * h, (ny - 1) as f64 * h);
    height_field(nx, ny, h, |x, y| {
        use std::f64::consts::PI;
        amplitude * ((2.0 * PI * x / lx).sin() + 0.5 * (3.0 * PI * y / ly).cos())
    })
}

/// `p` points uniformly distributed on the `k`-sphere of radius `r` in `ℝ^{k+1}`.
pub fn sphere_cloud(p: usize, k: usize, r: f64, seed: u64) -> PointCloud {
    sample_sphere(p, k, r, seed, false)
}

/// Like [`sphere_cloud`] but restricted to the quarter where the first two
/// coordinates are nonnegative.
pub fn quarter_sphere_cloud(p: usize, k: usize, r: f64, seed: u64) -> PointCloud {
    sample_sphere(p, k, r, seed, true)
}

fn sample_sphere(p: usize, k: usize, r: f64, seed: u64, quarter: bool) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = k + 1;
    let mut coords = Vec::with_capacity(p * dim);
    let mut v = vec![0.0; dim];
    for _ in 0..p {
        loop {
            for c in v.iter_mut() {
                *c = rng.sample::<f64, _>(StandardNormal);
            }
            let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if n > 1e-9 {
                v.iter_mut().for_each(|c| *c /= n);
                break;
            }
        }
        if quarter {
            v[0] = v[0].abs();
            if dim > 1 {
                v[1] = v[1].abs();
            }
        }
        coords.extend(v.iter().map(|c| c * r));
    }
    PointCloud::new(dim, coords).expect("sphere samples are finite")
}

/// `p` points equally spaced on a circle of radius `r` in the plane.
pub fn circle_points(p: usize, r: f64) -> PointCloud {
    let coords = (0..p)
        .flat_map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / p as f64;
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    PointCloud::new(2, coords).expect("circle points are finite")
}

/// `p` points uniform in the unit cube of dimension `dim`.
pub fn uniform_cloud(p: usize, dim: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..p * dim).map(|_| rng.gen::<f64>()).collect();
    PointCloud::new(dim, coords).expect("uniform samples are finite")
}
