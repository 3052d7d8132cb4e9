//! Structural identities of the finite volume operators, on the built-in
//! meshes and on an irregular mesh read from the text format.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use subdiff::fem;
use subdiff::fv;
use subdiff::linalg;
use subdiff::mesh::{DualMesh, PrimalMesh};

fn max_entry_diff(a: &linalg::CsrMatrix, b: &linalg::CsrMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            worst = worst.max((v - b.get(i, j)).abs());
        }
        let (cols, vals) = b.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            worst = worst.max((v - a.get(i, j)).abs());
        }
    }
    worst
}

/// An irregular convex-domain mesh: the structured M=4 mesh with interior
/// vertices jittered deterministically, serialized through the text format.
fn irregular_mesh() -> PrimalMesh {
    let base = PrimalMesh::uniform_unit_square(4).unwrap();
    let mut text = String::from("$nodes\n");
    let mut rng = StdRng::seed_from_u64(99);
    for (i, v) in base.vertices.iter().enumerate() {
        let (mut x, mut y) = (v[0], v[1]);
        if !base.boundary[i] {
            x += rng.gen_range(-0.06..0.06);
            y += rng.gen_range(-0.06..0.06);
        }
        text.push_str(&format!(
            "{} {:.17} {:.17} {}\n",
            i + 1,
            x,
            y,
            base.boundary[i] as u8
        ));
    }
    text.push_str("$triangles\n");
    for (t, tri) in base.triangles.iter().enumerate() {
        text.push_str(&format!(
            "{} {} {} {}\n",
            t + 1,
            tri[0] + 1,
            tri[1] + 1,
            tri[2] + 1
        ));
    }
    PrimalMesh::from_text(&text).unwrap()
}

#[test]
fn stiffness_equals_p1_galerkin_everywhere() {
    for m in [4, 8, 16] {
        let mesh = PrimalMesh::uniform_unit_square(m).unwrap();
        let dual = DualMesh::build(&mesh).unwrap();
        let diff = max_entry_diff(
            &fv::assemble_stiffness(&mesh, &dual).unwrap(),
            &fem::stiffness_matrix(&mesh).unwrap(),
        );
        assert!(diff <= 1e-12, "M={m}: {diff}");
    }
    // the identity is independent of mesh regularity
    let mesh = irregular_mesh();
    let dual = DualMesh::build(&mesh).unwrap();
    let diff = max_entry_diff(
        &fv::assemble_stiffness(&mesh, &dual).unwrap(),
        &fem::stiffness_matrix(&mesh).unwrap(),
    );
    assert!(diff <= 1e-12, "irregular mesh: {diff}");
}

#[test]
fn irregular_mesh_dual_invariants() {
    let mesh = irregular_mesh();
    let dual = DualMesh::build(&mesh).unwrap();
    assert!((mesh.total_area() - 1.0).abs() < 1e-12);
    assert!((dual.total_area() - 1.0).abs() < 1e-12);
    for (u, &v) in mesh.interior_nodes.iter().enumerate() {
        let incident: f64 = (0..mesh.triangles.len())
            .filter(|&t| mesh.triangles[t].contains(&v))
            .map(|t| mesh.triangle_area(t))
            .sum();
        assert!((dual.cv_area[u] - incident / 3.0).abs() < 1e-12);
    }
    // closed boundaries: zero net flux of constant gradients
    for segs in &dual.segments {
        let mut flux = [0.0, 0.0];
        for s in segs {
            flux[0] += s.b[1] - s.a[1];
            flux[1] -= s.b[0] - s.a[0];
        }
        assert!(flux[0].abs() < 1e-12 && flux[1].abs() < 1e-12);
    }
}

#[test]
fn mass_spd_and_norm_equivalence() {
    let mut rng = StdRng::seed_from_u64(3);
    for m in [8, 16, 32] {
        let mesh = PrimalMesh::uniform_unit_square(m).unwrap();
        let dual = DualMesh::build(&mesh).unwrap();
        let mass = fv::assemble_fv_mass(&mesh, &dual).unwrap();
        assert!(mass.max_abs_asymmetry() <= 1e-14);
        linalg::banded_cholesky_check(&mass).expect("fv mass must be SPD");
        // norm equivalence against the consistent P1 mass: the generalized
        // Rayleigh quotient stays inside fixed bounds (elementwise pencil
        // analysis gives [1, 5/3] on triangles)
        let fem_mass = fem::mass_matrix(&mesh).unwrap();
        for _ in 0..40 {
            let x: Vec<f64> = (0..mesh.n_interior())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let num = linalg::dot(&x, &mass.spmv(&x).unwrap());
            let den = linalg::dot(&x, &fem_mass.spmv(&x).unwrap());
            let ratio = num / den;
            assert!(
                (0.999..=5.0 / 3.0 + 1e-3).contains(&ratio),
                "M={m}: Rayleigh ratio {ratio}"
            );
        }
    }
}

#[test]
fn dual_interpolant_stability_constant() {
    // || Pi*_h chi || <= C || chi || with C <= 2 on the structured meshes
    let mut rng = StdRng::seed_from_u64(8);
    for m in [8, 16] {
        let mesh = PrimalMesh::uniform_unit_square(m).unwrap();
        let dual = DualMesh::build(&mesh).unwrap();
        let fem_mass = fem::mass_matrix(&mesh).unwrap();
        let mut measured = 0.0f64;
        for _ in 0..60 {
            let x: Vec<f64> = (0..mesh.n_interior())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let l2 = linalg::dot(&x, &fem_mass.spmv(&x).unwrap()).sqrt();
            let dual_l2 = fem::dual_interpolant_l2_norm(&dual, &x);
            measured = measured.max(dual_l2 / l2);
        }
        println!("measured dual-interpolant stability constant (M={m}): {measured:.4}");
        assert!(measured <= 2.0, "M={m}: constant {measured}");
    }
}

#[test]
fn stiffness_is_positive_definite_on_probes() {
    let mut rng = StdRng::seed_from_u64(4);
    let mesh = PrimalMesh::uniform_unit_square(12).unwrap();
    let dual = DualMesh::build(&mesh).unwrap();
    let stiff = fv::assemble_stiffness(&mesh, &dual).unwrap();
    for _ in 0..40 {
        let x: Vec<f64> = (0..mesh.n_interior())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        if x.iter().all(|&v| v == 0.0) {
            continue;
        }
        assert!(linalg::dot(&x, &stiff.spmv(&x).unwrap()) > 0.0);
    }
}

#[test]
fn load_matches_adaptive_quadrature() {
    let g = |x: f64, y: f64| (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin();
    let mesh = PrimalMesh::uniform_unit_square(4).unwrap();
    let dual = DualMesh::build(&mesh).unwrap();
    let got = fv::assemble_load(&g, &mesh, &dual, 4).unwrap();
    for (i, &v) in got.iter().enumerate() {
        let p = mesh.vertices[mesh.interior_nodes[i]];
        let want: f64 = dual.segments[i]
            .iter()
            .map(|seg| oracle::quad::adaptive_triangle(&g, [p, seg.a, seg.b], 1e-12))
            .sum();
        assert!((v - want).abs() < 1e-8, "node {i}: {v} vs {want}");
    }
}

#[test]
fn elliptic_projection_second_order() {
    // || R_h u0 - u0 ||_{L2} decays at rate >= 1.9 over M = 8 -> 16 -> 32
    let pi = std::f64::consts::PI;
    let u0 = move |x: f64, y: f64| (pi * x).sin() * (pi * y).sin();
    let neg_lap = move |x: f64, y: f64| 2.0 * pi * pi * (pi * x).sin() * (pi * y).sin();
    let mut errors = Vec::new();
    for m in [8, 16, 32] {
        let mesh = PrimalMesh::uniform_unit_square(m).unwrap();
        let dual = DualMesh::build(&mesh).unwrap();
        let ops = fv::FvOperators::assemble(&mesh, &dual).unwrap();
        let coeffs = fv::elliptic_projection(&neg_lap, &ops, &mesh, &dual, 1e-12).unwrap();
        errors.push(fem::l2_error_against(&mesh, &coeffs, &u0, 5).unwrap());
    }
    let r1 = (errors[0] / errors[1]).log2();
    let r2 = (errors[1] / errors[2]).log2();
    println!("elliptic projection errors {errors:?}, rates {r1:.3} {r2:.3}");
    assert!(r1 >= 1.9, "rate {r1}");
    assert!(r2 >= 1.9, "rate {r2}");
}
