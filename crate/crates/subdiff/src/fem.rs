//! Reference conforming P1 Galerkin operators on the primal mesh.
//!
//! The finite volume stiffness operator coincides with the conforming P1
//! stiffness matrix, and the finite volume mass pairing is norm-equivalent
//! to the consistent P1 mass matrix. These element-loop assemblies provide
//! the comparison side for both facts (the `verify` subcommand and the test
//! suites use them); they share no code with the dual-mesh flux assembly.

use crate::error::Result;
use crate::linalg::CsrMatrix;
use crate::mesh::PrimalMesh;

/// Consistent P1 stiffness matrix over interior unknowns:
/// entries int_Omega grad phi_i . grad phi_j dx.
pub fn stiffness_matrix(mesh: &PrimalMesh) -> Result<CsrMatrix> {
    let n = mesh.n_interior();
    let mut triplets = Vec::new();
    for t in 0..mesh.triangles.len() {
        let grads = mesh.p1_gradients(t);
        let area = mesh.triangle_area(t);
        let tri = mesh.triangles[t];
        for a in 0..3 {
            let Some(i) = mesh.interior_index[tri[a]] else {
                continue;
            };
            for b in 0..3 {
                if let Some(j) = mesh.interior_index[tri[b]] {
                    let v = area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                    triplets.push((i, j, v));
                }
            }
        }
    }
    CsrMatrix::from_triplets(n, n, triplets)
}

/// Consistent P1 mass matrix over interior unknowns: the element matrix is
/// |K|/12 * [[2,1,1],[1,2,1],[1,1,2]].
pub fn mass_matrix(mesh: &PrimalMesh) -> Result<CsrMatrix> {
    let n = mesh.n_interior();
    let mut triplets = Vec::new();
    for t in 0..mesh.triangles.len() {
        let area = mesh.triangle_area(t);
        let tri = mesh.triangles[t];
        for a in 0..3 {
            let Some(i) = mesh.interior_index[tri[a]] else {
                continue;
            };
            for b in 0..3 {
                if let Some(j) = mesh.interior_index[tri[b]] {
                    let v = area / 12.0 * if a == b { 2.0 } else { 1.0 };
                    triplets.push((i, j, v));
                }
            }
        }
    }
    CsrMatrix::from_triplets(n, n, triplets)
}

/// L2 norm over Omega of (piecewise-linear field with interior coefficients
/// `coeffs`, zero on the boundary) minus a smooth function g.
pub fn l2_error_against(
    mesh: &PrimalMesh,
    coeffs: &[f64],
    g: &dyn Fn(f64, f64) -> f64,
    degree: usize,
) -> Result<f64> {
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        let tri = mesh.triangles[t];
        let vals: Vec<f64> = tri
            .iter()
            .map(|&v| mesh.interior_index[v].map_or(0.0, |u| coeffs[u]))
            .collect();
        let verts = [
            mesh.vertices[tri[0]],
            mesh.vertices[tri[1]],
            mesh.vertices[tri[2]],
        ];
        let grads = mesh.p1_gradients(t);
        let origin = verts[0];
        let field = move |x: f64, y: f64| {
            // linear extension from vertex 0
            let mut val = vals[0];
            for k in 0..3 {
                val += vals[k] * (grads[k][0] * (x - origin[0]) + grads[k][1] * (y - origin[1]));
            }
            val
        };
        total += crate::quad::integrate_triangle(
            &|x, y| {
                let d = field(x, y) - g(x, y);
                d * d
            },
            verts,
            degree,
        )?;
    }
    Ok(total.sqrt())
}

/// L2 norm of the piecewise-constant interpolant that assigns each control
/// volume its node's value (boundary values are zero).
pub fn dual_interpolant_l2_norm(
    dual: &crate::mesh::DualMesh,
    coeffs: &[f64],
) -> f64 {
    coeffs
        .iter()
        .zip(&dual.cv_area)
        .map(|(c, a)| c * c * a)
        .sum::<f64>()
        .sqrt()
}
