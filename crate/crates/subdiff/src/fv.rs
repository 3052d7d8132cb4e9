//! Finite volume element assembly on the barycentric dual mesh.
//!
//! The stiffness operator integrates -grad w . n along the flux segments of
//! each interior control volume; the mass operator realizes the pairing
//! (phi, Pi*_h v) by integrating each nodal basis function exactly over the
//! control volumes (vertex average times area on every dual subtriangle,
//! exact for linears). Load functionals use sub-triangle Gauss rules. The
//! elliptic projection solves S c = b with b_i the control-volume integral
//! of -Laplacian(u0).

use crate::error::Result;
use crate::linalg::{cg_solve, CsrMatrix};
use crate::mesh::{DualMesh, PrimalMesh};

/// The two spatial operators of the scheme.
#[derive(Debug, Clone)]
pub struct FvOperators {
    pub stiff: CsrMatrix,
    pub mass: CsrMatrix,
}

impl FvOperators {
    pub fn assemble(mesh: &PrimalMesh, dual: &DualMesh) -> Result<Self> {
        Ok(Self {
            stiff: assemble_stiffness(mesh, dual)?,
            mass: assemble_fv_mass(mesh, dual)?,
        })
    }

    pub fn n_unknowns(&self) -> usize {
        self.stiff.n_rows()
    }
}

fn stiffness_triplets(
    mesh: &PrimalMesh,
    dual: &DualMesh,
    keep_boundary_columns: bool,
) -> Vec<(usize, usize, f64)> {
    let mut triplets = Vec::new();
    for (i, segs) in dual.segments.iter().enumerate() {
        for seg in segs {
            let (dx, dy) = (seg.b[0] - seg.a[0], seg.b[1] - seg.a[1]);
            // outward normal times segment length for a ccw-ordered boundary
            let normal = [dy, -dx];
            let grads = mesh.p1_gradients(seg.tri);
            for (k, &v) in mesh.triangles[seg.tri].iter().enumerate() {
                let flux = grads[k][0] * normal[0] + grads[k][1] * normal[1];
                let col = if keep_boundary_columns {
                    Some(v)
                } else {
                    mesh.interior_index[v]
                };
                if let Some(j) = col {
                    triplets.push((i, j, -flux));
                }
            }
        }
    }
    triplets
}

/// Row i: minus the net flux of each basis function's gradient through the
/// boundary of control volume i. Columns are interior unknowns.
pub fn assemble_stiffness(mesh: &PrimalMesh, dual: &DualMesh) -> Result<CsrMatrix> {
    CsrMatrix::from_triplets(
        mesh.n_interior(),
        mesh.n_interior(),
        stiffness_triplets(mesh, dual, false),
    )
}

/// Diagnostic variant keeping all vertex columns (used to check that rows
/// annihilate constants).
pub fn assemble_stiffness_all_columns(mesh: &PrimalMesh, dual: &DualMesh) -> Result<CsrMatrix> {
    CsrMatrix::from_triplets(
        mesh.n_interior(),
        mesh.vertices.len(),
        stiffness_triplets(mesh, dual, true),
    )
}

fn mass_triplets(
    mesh: &PrimalMesh,
    dual: &DualMesh,
    keep_boundary_columns: bool,
) -> Vec<(usize, usize, f64)> {
    let mut triplets = Vec::new();
    for (i, segs) in dual.segments.iter().enumerate() {
        let p = mesh.vertices[mesh.interior_nodes[i]];
        for seg in segs {
            // dual subtriangle (node, segment start, segment end)
            let sub = [p, seg.a, seg.b];
            let area = 0.5
                * ((sub[1][0] - sub[0][0]) * (sub[2][1] - sub[0][1])
                    - (sub[2][0] - sub[0][0]) * (sub[1][1] - sub[0][1]))
                    .abs();
            // vertex-average rule, exact for the linear basis functions
            let mut bary_sum = [0.0f64; 3];
            for &q in &sub {
                let b = mesh.barycentric(seg.tri, q);
                for k in 0..3 {
                    bary_sum[k] += b[k];
                }
            }
            for (k, &v) in mesh.triangles[seg.tri].iter().enumerate() {
                let col = if keep_boundary_columns {
                    Some(v)
                } else {
                    mesh.interior_index[v]
                };
                if let Some(j) = col {
                    triplets.push((i, j, area * bary_sum[k] / 3.0));
                }
            }
        }
    }
    triplets
}

/// Mass pairing rows: entry (i, j) is the integral of basis function j over
/// control volume i.
pub fn assemble_fv_mass(mesh: &PrimalMesh, dual: &DualMesh) -> Result<CsrMatrix> {
    CsrMatrix::from_triplets(
        mesh.n_interior(),
        mesh.n_interior(),
        mass_triplets(mesh, dual, false),
    )
}

/// Diagnostic variant keeping all vertex columns (partition-of-unity check).
pub fn assemble_fv_mass_all_columns(mesh: &PrimalMesh, dual: &DualMesh) -> Result<CsrMatrix> {
    CsrMatrix::from_triplets(
        mesh.n_interior(),
        mesh.vertices.len(),
        mass_triplets(mesh, dual, true),
    )
}

/// Load vector b_i = integral of g over control volume i, by a Gauss rule of
/// the requested degree on each dual subtriangle.
pub fn assemble_load(
    g: &(dyn Fn(f64, f64) -> f64 + Sync),
    mesh: &PrimalMesh,
    dual: &DualMesh,
    quad_degree: usize,
) -> Result<Vec<f64>> {
    let rule = crate::quad::triangle_rule(quad_degree)?;
    let row = |i: usize| -> f64 {
        let p = mesh.vertices[mesh.interior_nodes[i]];
        let mut acc = 0.0;
        for seg in &dual.segments[i] {
            let v = [p, seg.a, seg.b];
            let area = 0.5
                * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
                    - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
                    .abs();
            for (bary, w) in rule {
                let x = bary[0] * v[0][0] + bary[1] * v[1][0] + bary[2] * v[2][0];
                let y = bary[0] * v[0][1] + bary[1] * v[1][1] + bary[2] * v[2][1];
                acc += w * area * g(x, y);
            }
        }
        acc
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if mesh.n_interior() >= 4096 {
            return Ok((0..mesh.n_interior()).into_par_iter().map(row).collect());
        }
    }
    Ok((0..mesh.n_interior()).map(row).collect())
}

/// Finite volume elliptic projection of a smooth function with analytically
/// known Laplacian: solves S c = b, b_i = int over K*_i of (-Laplacian u0).
pub fn elliptic_projection(
    neg_laplacian_u0: &(dyn Fn(f64, f64) -> f64 + Sync),
    ops: &FvOperators,
    mesh: &PrimalMesh,
    dual: &DualMesh,
    tol: f64,
) -> Result<Vec<f64>> {
    let b = assemble_load(neg_laplacian_u0, mesh, dual, 4)?;
    let n = ops.stiff.n_rows();
    let (c, _rep) = cg_solve(&ops.stiff, &b, tol, 40 * (n as f64).sqrt() as usize + 200)?;
    Ok(c)
}
