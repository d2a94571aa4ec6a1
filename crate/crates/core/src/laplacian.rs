//! Cotangent stiffness and barycentric mass matrices of a triangle mesh,
//! and the bi-Laplacian energy matrix `W A⁻¹ W` built from them.

use crate::error::{Error, Result};
use crate::geometry::mesh::{cross, dot, norm, sub};
use crate::geometry::TriMesh;
use crate::sparse::CsrMatrix;

/// Bound applied to every cotangent to tolerate near-degenerate triangles.
pub const COT_CLAMP: f64 = 1e4;

/// Stiffness `W` and lumped mass `A`; the pointwise Laplacian is `A⁻¹W`.
#[derive(Clone, Debug)]
pub struct LaplacianPair {
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
}

impl LaplacianPair {
    pub fn new(mesh: &TriMesh) -> Result<Self> {
        Ok(LaplacianPair {
            stiffness: cotan_stiffness(mesh)?,
            mass: barycentric_mass(mesh)?,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.mass.len()
    }

    /// `Lᵀ A L = W A⁻¹ W` for symmetric `W`.
    pub fn energy_matrix(&self) -> CsrMatrix {
        let w = &self.stiffness;
        let mut entries = Vec::new();
        for k in 0..w.dim() {
            let inv_a = 1.0 / self.mass[k];
            let row: Vec<(usize, f64)> = w.row(k).collect();
            for &(i, wi) in &row {
                for &(j, wj) in &row {
                    entries.push((i, j, wi * wj * inv_a));
                }
            }
        }
        CsrMatrix::from_triplets(w.dim(), entries)
    }

    /// `W A⁻¹ W + μ BᵀB` where `B` selects the vertices in `samples`.
    pub fn system_matrix(&self, samples: &[usize], mu: f64) -> CsrMatrix {
        let k = self.energy_matrix();
        let mut entries: Vec<(usize, usize, f64)> = (0..k.dim())
            .flat_map(|i| k.row(i).map(move |(j, v)| (i, j, v)).collect::<Vec<_>>())
            .collect();
        entries.extend(samples.iter().map(|&s| (s, s, mu)));
        CsrMatrix::from_triplets(k.dim(), entries)
    }
}

fn face_cotangents(mesh: &TriMesh, f: usize) -> Result<[f64; 3]> {
    let [a, b, c] = mesh.faces()[f].map(|v| mesh.vertices()[v]);
    let twice_area = norm(cross(sub(b, a), sub(c, a)));
    if twice_area == 0.0 {
        return Err(Error::ZeroAreaFace(f));
    }
    let cot = |o: [f64; 3], u: [f64; 3], v: [f64; 3]| {
        (dot(sub(u, o), sub(v, o)) / twice_area).clamp(-COT_CLAMP, COT_CLAMP)
    };
    // Cotangent at each corner; corner k is opposite edge (k+1, k+2).
    Ok([cot(a, b, c), cot(b, c, a), cot(c, a, b)])
}

/// `W_ij = -½ Σ cot(opposite angle)` over faces sharing edge `(i, j)`, with
/// `W_ii` set so that rows sum to zero.
pub fn cotan_stiffness(mesh: &TriMesh) -> Result<CsrMatrix> {
    let p = mesh.num_vertices();
    let mut entries = Vec::with_capacity(mesh.num_faces() * 12);
    for (fi, face) in mesh.faces().iter().enumerate() {
        let cots = face_cotangents(mesh, fi)?;
        for k in 0..3 {
            let (i, j) = (face[(k + 1) % 3], face[(k + 2) % 3]);
            let w = -0.5 * cots[k];
            entries.push((i, j, w));
            entries.push((j, i, w));
        }
    }
    let off = CsrMatrix::from_triplets(p, entries);
    let mut all: Vec<(usize, usize, f64)> = Vec::with_capacity(off.nnz() + p);
    for i in 0..p {
        let mut diag = 0.0;
        for (j, v) in off.row(i) {
            all.push((i, j, v));
            diag -= v;
        }
        all.push((i, i, diag));
    }
    Ok(CsrMatrix::from_triplets(p, all))
}

/// One third of the total area of the faces around each vertex.
pub fn barycentric_mass(mesh: &TriMesh) -> Result<Vec<f64>> {
    let mut mass = vec![0.0; mesh.num_vertices()];
    for (fi, face) in mesh.faces().iter().enumerate() {
        let area = mesh.face_area(fi);
        if area == 0.0 {
            return Err(Error::ZeroAreaFace(fi));
        }
        for &v in face {
            mass[v] += area / 3.0;
        }
    }
    if let Some(v) = mass.iter().position(|&a| a == 0.0) {
        return Err(Error::IsolatedVertex(v));
    }
    Ok(mass)
}
