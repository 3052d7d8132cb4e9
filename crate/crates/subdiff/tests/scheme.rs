//! Scheme-level validation: the production stepper against the dense
//! brute-force variational solve, memory-term quadrature checks, the global
//! space-time identity, coercivity, and manufactured-solution residuals.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use subdiff::dg::{self, TimeMesh};
use subdiff::fv::FvOperators;
use subdiff::kernel::FracKernel;
use subdiff::linalg::CsrMatrix;
use subdiff::problems::ManufacturedProblem;

fn scalar_ops(stiff_scale: f64) -> FvOperators {
    FvOperators {
        mass: CsrMatrix::from_triplets(1, 1, [(0, 0, 1.0)]).unwrap(),
        stiff: CsrMatrix::from_triplets(1, 1, [(0, 0, stiff_scale)]).unwrap(),
    }
}

/// Scalar analogue of the benchmark problem: u(t) = t^alpha solves
/// u' + s B^alpha u = alpha t^(alpha-1) + s (Gamma(alpha+1)/Gamma(2 alpha)) t^(2 alpha - 1).
fn scalar_power_source(alpha: f64, stiff_scale: f64) -> Vec<(f64, f64, Vec<f64>)> {
    let ratio = subdiff::kernel::gamma(alpha + 1.0) / subdiff::kernel::gamma(2.0 * alpha);
    vec![
        (alpha, alpha, vec![1.0]),
        (stiff_scale * ratio, 2.0 * alpha, vec![1.0]),
    ]
}

/// Two-step scalar surrogate against the dense brute-force Galerkin solve.
#[test]
fn scalar_surrogate_matches_brute_force_two_steps() {
    for (alpha, gamma) in [(0.4, 2.0), (0.6, 1.0), (0.8, 3.0)] {
        let ops = scalar_ops(1.0);
        let kern = FracKernel::new(alpha).unwrap();
        let tm = TimeMesh::graded(2, gamma, 1.0).unwrap();
        let loads = scalar_power_source(alpha, 1.0);
        let sol = dg::march(&ops, &kern, &tm, &loads, vec![0.0], 1e-13).unwrap();
        let brute_terms: Vec<oracle::brute::PowerTerm> = loads
            .iter()
            .map(|&(c, b, _)| oracle::brute::PowerTerm { coeff: c, beta: b })
            .collect();
        let brute =
            oracle::brute::solve_scalar_dg(alpha, tm.nodes(), 1.0, 0.0, &brute_terms);
        for (n, ((a, b), (wa, wb))) in sol.intervals.iter().zip(&brute).enumerate() {
            assert!(
                (a[0] - wa).abs() < 1e-7 && (b[0] - wb).abs() < 1e-7,
                "alpha={alpha} gamma={gamma} step {n}: ({}, {}) vs ({wa}, {wb})",
                a[0],
                b[0]
            );
        }
    }
}

/// Longer scalar march (four graded steps, nontrivial stiffness scale).
#[test]
fn scalar_surrogate_matches_brute_force_four_steps() {
    let (alpha, stiff_scale) = (0.5, 2.5);
    let ops = scalar_ops(stiff_scale);
    let kern = FracKernel::new(alpha).unwrap();
    let tm = TimeMesh::graded(4, 2.0, 1.0).unwrap();
    let loads = scalar_power_source(alpha, stiff_scale);
    let sol = dg::march(&ops, &kern, &tm, &loads, vec![0.0], 1e-13).unwrap();
    let brute_terms: Vec<oracle::brute::PowerTerm> = loads
        .iter()
        .map(|&(c, b, _)| oracle::brute::PowerTerm { coeff: c, beta: b })
        .collect();
    let brute =
        oracle::brute::solve_scalar_dg(alpha, tm.nodes(), stiff_scale, 0.0, &brute_terms);
    for (n, ((a, b), (wa, wb))) in sol.intervals.iter().zip(&brute).enumerate() {
        assert!(
            (a[0] - wa).abs() < 1e-7 && (b[0] - wb).abs() < 1e-7,
            "step {n}: ({}, {}) vs ({wa}, {wb})",
            a[0],
            b[0]
        );
    }
}

/// Nonzero initial data exercises the upwind jump terms of the first step.
#[test]
fn scalar_surrogate_with_initial_jump() {
    let alpha = 0.3;
    let ops = scalar_ops(1.0);
    let kern = FracKernel::new(alpha).unwrap();
    let tm = TimeMesh::graded(3, 1.0, 0.9).unwrap();
    let loads: Vec<(f64, f64, Vec<f64>)> = vec![(1.0, 1.0, vec![1.0])];
    let sol = dg::march(&ops, &kern, &tm, &loads, vec![0.7], 1e-13).unwrap();
    let brute = oracle::brute::solve_scalar_dg(
        alpha,
        tm.nodes(),
        1.0,
        0.7,
        &[oracle::brute::PowerTerm {
            coeff: 1.0,
            beta: 1.0,
        }],
    );
    for ((a, b), (wa, wb)) in sol.intervals.iter().zip(&brute) {
        assert!((a[0] - wa).abs() < 1e-7 && (b[0] - wb).abs() < 1e-7);
    }
}

/// memory_rhs against direct quadrature of the weighted memory integral for
/// a prescribed discontinuous scalar history.
#[test]
fn memory_rhs_matches_quadrature() {
    let alpha = 0.45;
    let ops = scalar_ops(1.0);
    let kern = FracKernel::new(alpha).unwrap();
    let tm = TimeMesh::graded(4, 1.5, 1.0).unwrap();
    // history with a genuine jump between intervals
    let history = vec![
        (vec![0.4], vec![0.3]),
        (vec![1.1], vec![-0.5]),
        (vec![0.2], vec![0.6]),
    ];
    let prev_trace = vec![0.2 + 0.6];
    let (m0, m1) = dg::memory_rhs(4, &tm, &history, &prev_trace, &ops, &kern).unwrap();
    // the same integral via the oracle: the trajectory extended by zero on
    // the current interval has exactly the known-history expansion
    let pieces = vec![(0.4, 0.3), (1.1, -0.5), (0.2, 0.6), (0.0, 0.0)];
    for (q, got) in [(0usize, m0[0]), (1, m1[0])] {
        let want = oracle::brute::frac_test_integral(alpha, tm.nodes(), &pieces, 3, q);
        assert!(
            (got - want).abs() < 1e-8,
            "q={q}: {got} vs {want}"
        );
    }
}

/// The completed PDE run satisfies the global space-time identity against
/// random test trajectories.
#[test]
fn global_identity_on_pde_run() {
    let mut rng = StdRng::seed_from_u64(2024);
    let problem = ManufacturedProblem::sine_power(0.5).unwrap();
    let solver = dg::Solver::on_unit_square(problem, 5).unwrap();
    let tm = TimeMesh::graded(8, 2.5, 1.0).unwrap();
    let sol = solver.run(&tm, 1e-12).unwrap();
    let nu = solver.ops.n_unknowns();
    for _ in 0..3 {
        let test: Vec<(Vec<f64>, Vec<f64>)> = (0..8)
            .map(|_| {
                (
                    (0..nu).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    (0..nu).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                )
            })
            .collect();
        let residual = dg::global_identity_residual(
            &solver.ops,
            &solver.kernel,
            &tm,
            solver.loads(),
            &sol,
            &test,
        )
        .unwrap();
        assert!(residual <= 1e-8, "residual {residual}");
    }
}

/// Coercivity witness: the assembled memory quadratic form is nonnegative
/// up to roundoff for random trajectories, both scalar and spatial.
#[test]
fn memory_quadratic_form_nonnegative() {
    let mut rng = StdRng::seed_from_u64(7);
    for alpha in [0.25, 0.5, 0.75] {
        let kern = FracKernel::new(alpha).unwrap();
        // scalar surrogate
        let ops = scalar_ops(1.0);
        for _ in 0..10 {
            let n = rng.gen_range(2..7);
            let gamma = rng.gen_range(1.0..3.5);
            let tm = TimeMesh::graded(n, gamma, 1.0).unwrap();
            let w: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
                .map(|_| {
                    (
                        vec![rng.gen_range(-1.0..1.0)],
                        vec![rng.gen_range(-1.0..1.0)],
                    )
                })
                .collect();
            let form = dg::memory_quadratic_form(&ops, &kern, &tm, &w).unwrap();
            assert!(form >= -1e-10, "scalar alpha={alpha}: {form}");
        }
    }
    // spatial operators
    let problem = ManufacturedProblem::sine_power(0.6).unwrap();
    let solver = dg::Solver::on_unit_square(problem, 4).unwrap();
    let nu = solver.ops.n_unknowns();
    let tm = TimeMesh::graded(5, 2.0, 1.0).unwrap();
    for _ in 0..5 {
        let w: Vec<(Vec<f64>, Vec<f64>)> = (0..5)
            .map(|_| {
                (
                    (0..nu).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    (0..nu).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                )
            })
            .collect();
        let form = dg::memory_quadratic_form(&solver.ops, &solver.kernel, &tm, &w).unwrap();
        assert!(form >= -1e-10, "spatial: {form}");
    }
}

/// Manufactured problems satisfy u' + B^alpha L u - f = 0, with B^alpha
/// evaluated numerically (fourth-order differentiation of the quadrature
/// fractional integral).
#[test]
fn manufactured_residual_vanishes() {
    let mut rng = StdRng::seed_from_u64(31);
    let problems: Vec<(&str, ManufacturedProblem)> = vec![
        ("sine_power", ManufacturedProblem::sine_power(0.4).unwrap()),
        (
            "sine_power_mixed",
            ManufacturedProblem::sine_power_mixed(0.7).unwrap(),
        ),
    ];
    for (name, problem) in &problems {
        let alpha = problem.alpha;
        let pi = std::f64::consts::PI;
        // 20 random samples plus the pinned one from the contract
        let mut samples: Vec<(f64, f64, f64)> = (0..20)
            .map(|_| {
                (
                    rng.gen_range(0.1..0.9),
                    rng.gen_range(0.1..0.9),
                    rng.gen_range(0.2..1.0),
                )
            })
            .collect();
        samples.push((0.3, 0.7, 0.5));
        for &(x, y, t) in &samples {
            let g = (pi * x).sin() * (pi * y).sin();
            // time factor tau(t) of the exact solution and of -Lap u = 2 pi^2 tau g
            let tau = |t: f64| (problem.exact)(x, y, t) / g;
            let u_prime = g * {
                let h = 1e-5 * t;
                (-tau(t + 2.0 * h) + 8.0 * tau(t + h) - 8.0 * tau(t - h) + tau(t - 2.0 * h))
                    / (12.0 * h)
            };
            // B^alpha of the laplacian part by differentiating I^alpha numerically
            let lap_coeff = 2.0 * pi * pi * g;
            let i_alpha = |tt: f64| {
                oracle::quad::tanh_sinh(
                    |s, _da, db| oracle::omega(alpha, db) * tau(s),
                    0.0,
                    tt,
                    1e-13,
                )
            };
            let h = 1e-3 * t;
            let b_alpha = (-i_alpha(t + 2.0 * h) + 8.0 * i_alpha(t + h) - 8.0 * i_alpha(t - h)
                + i_alpha(t - 2.0 * h))
                / (12.0 * h);
            let f = problem.source.eval(x, y, t);
            let residual = u_prime + lap_coeff * b_alpha - f;
            assert!(
                residual.abs() < 1e-8 * f.abs().max(1.0),
                "{name} at ({x:.2},{y:.2},{t:.2}): residual {residual:.3e}"
            );
        }
    }
}

/// Step counter: step n touches exactly n-1 history intervals, and the
/// total is quadratic in the step count.
#[test]
fn memory_cost_is_quadratic() {
    let problem = ManufacturedProblem::sine_power(0.5).unwrap();
    let (_, sol) = dg::run(problem, 3, 12, 2.0, 1e-10).unwrap();
    for (idx, &count) in sol.stats.history_terms.iter().enumerate() {
        assert_eq!(count, idx, "step {} visited {count} history terms", idx + 1);
    }
    assert_eq!(sol.stats.total_history_terms(), 12 * 11 / 2);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// graded meshes satisfy their width inequalities for any (N, gamma);
        /// the k_n <= gamma k t_n^(1-1/gamma) form is tied to T = 1, while
        /// general T obeys the scale-corrected bound with T^(1/gamma)/N
        #[test]
        fn graded_mesh_inequalities(n in 2usize..60, gamma in 1.0f64..6.0, t_final in 0.1f64..4.0) {
            let tm = TimeMesh::graded(n, gamma, t_final).unwrap();
            prop_assert!((tm.final_time() - t_final).abs() <= 1e-12 * t_final);
            prop_assert_eq!(tm.nodes()[0], 0.0);
            let k = tm.max_width();
            for i in 2..=n {
                let tn = tm.nodes()[i];
                if (t_final - 1.0).abs() < 1e-12 {
                    prop_assert!(
                        tm.width(i) <= gamma * k * tn.powf(1.0 - 1.0 / gamma) * (1.0 + 1e-12)
                    );
                }
                let scaled = gamma * t_final.powf(1.0 / gamma) * tn.powf(1.0 - 1.0 / gamma)
                    / n as f64;
                prop_assert!(tm.width(i) <= scaled * (1.0 + 1e-12));
                prop_assert!(tn <= 2f64.powf(gamma) * tm.nodes()[i - 1] * (1.0 + 1e-12));
            }
            let _ = k;
        }

        /// load time moments match adaptive quadrature, first intervals included
        #[test]
        fn rhs_moments_match_quadrature(
            beta in 0.2f64..3.0,
            t0 in 0.0f64..1.0,
            width in 0.01f64..1.0,
            q in 0usize..2,
        ) {
            let t1 = t0 + width;
            let got = subdiff::problems::rhs_time_moments(beta, (t0, t1), q).unwrap();
            let want = oracle::quad::tanh_sinh(
                |t, da, _db| {
                    let tv = if t0 == 0.0 { da } else { t };
                    let psi = if q == 0 { 1.0 } else { (t - t0) / width };
                    tv.powf(beta - 1.0) * psi
                },
                t0,
                t1,
                1e-13,
            );
            prop_assert!((got - want).abs() < 1e-10 * want.abs().max(1.0),
                "{got} vs {want}");
        }

        /// spmv agrees with a dense reference on arbitrary small matrices
        #[test]
        fn spmv_matches_dense(
            entries in proptest::collection::vec((0usize..6, 0usize..6, -10.0f64..10.0), 0..24),
            x in proptest::collection::vec(-5.0f64..5.0, 6),
        ) {
            let a = CsrMatrix::from_triplets(6, 6, entries.iter().copied()).unwrap();
            let mut dense = [[0.0f64; 6]; 6];
            for &(i, j, v) in &entries {
                dense[i][j] += v;
            }
            let got = a.spmv(&x).unwrap();
            for i in 0..6 {
                let want: f64 = (0..6).map(|j| dense[i][j] * x[j]).sum();
                prop_assert!((got[i] - want).abs() < 1e-12);
            }
        }

        /// P1 evaluation reproduces linear fields up to the boundary cutoff
        #[test]
        fn eval_p1_reproduces_linears(
            cx in -2.0f64..2.0,
            cy in -2.0f64..2.0,
            px in 0.26f64..0.74,
            py in 0.26f64..0.74,
        ) {
            // field values of g = cx x + cy y at the interior nodes of a mesh
            // whose boundary-adjacent band we avoid sampling
            let mesh = PrimalMesh::uniform_unit_square(8).unwrap();
            let coeffs: Vec<f64> = mesh
                .interior_nodes
                .iter()
                .map(|&v| cx * mesh.vertices[v][0] + cy * mesh.vertices[v][1])
                .collect();
            let got = mesh.eval_p1(&coeffs, [px, py]).unwrap();
            let want = cx * px + cy * py;
            prop_assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    use subdiff::mesh::PrimalMesh;
}
