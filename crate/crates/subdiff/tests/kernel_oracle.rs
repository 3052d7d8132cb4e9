//! Kernel moments against independent quadrature.
//!
//! Every closed-form moment is compared with tanh-sinh / compensated Gauss
//! references from the oracle crate, including randomized draws over orders
//! and graded meshes, the positivity of the fractional integral, the
//! left-inverse identity on power functions, and far-history gaps up to 1e6
//! source widths.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use subdiff::kernel::FracKernel;

mod common;
use common::{oracle_jump, oracle_slope, pl_quadratic_form};

/// 200 randomized moment evaluations against adaptive quadrature, 1e-9.
#[test]
fn randomized_moments_match_quadrature() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut checked = 0;
    while checked < 200 {
        let alpha: f64 = rng.gen_range(0.05..0.95);
        let gamma: f64 = rng.gen_range(1.0..4.0);
        let n_int: usize = rng.gen_range(3..8);
        let t_final: f64 = [0.3, 1.0, 2.0][rng.gen_range(0..3)];
        let nodes: Vec<f64> = (0..=n_int)
            .map(|i| (i as f64 / n_int as f64).powf(gamma) * t_final)
            .collect();
        let n = rng.gen_range(2..=n_int); // test interval (1-based)
        let j = rng.gen_range(1..=n); // source interval
        let q = rng.gen_range(0..2);
        let test = (nodes[n - 1], nodes[n]);
        let source = (nodes[j - 1], nodes[j]);
        let kern = FracKernel::new(alpha).unwrap();

        if rng.gen_bool(0.5) {
            // jump moment from the source interval's left node
            let got = kern.jump_moment(source.0, test, q).unwrap();
            let want = oracle_jump(alpha, source.0, test.0, test.1, q);
            assert!(
                (got - want).abs() < 1e-9,
                "jump alpha={alpha} n={n} j={j} q={q}: {got} vs {want}"
            );
        } else if j < n || j == n {
            let got = kern.slope_moment(source, test, q).unwrap();
            let want = oracle_slope(alpha, source.0, source.1, test.0, test.1, q);
            assert!(
                (got - want).abs() < 1e-9,
                "slope alpha={alpha} n={n} j={j} q={q}: {got} vs {want}"
            );
        }
        checked += 1;
    }
}

/// Quadratic form of the fractional integral over random piecewise-linear
/// functions on random graded meshes, evaluated with the same moment
/// machinery at order alpha + 1.
#[test]
fn fractional_integral_positivity() {
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..60 {
        let alpha: f64 = rng.gen_range(0.05..0.95);
        let gamma: f64 = rng.gen_range(1.0..3.5);
        let n_int: usize = rng.gen_range(2..7);
        let nodes: Vec<f64> = (0..=n_int)
            .map(|i| (i as f64 / n_int as f64).powf(gamma))
            .collect();
        let pieces: Vec<(f64, f64)> = (0..n_int)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let form = pl_quadratic_form(alpha, &nodes, &pieces);
        assert!(form >= -1e-12, "alpha={alpha}, form={form}");
    }
}

/// The moment-machinery quadratic form agrees with direct double quadrature.
#[test]
fn quadratic_form_matches_oracle() {
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..5 {
        let alpha: f64 = rng.gen_range(0.2..0.8);
        let nodes = vec![0.0, 0.2, 0.55, 1.0];
        let pieces: Vec<(f64, f64)> = (0..3)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let got = pl_quadratic_form(alpha, &nodes, &pieces);
        // the integrand jumps at the interior nodes, so integrate piecewise
        let want: f64 = (0..3)
            .map(|j| {
                let k = nodes[j + 1] - nodes[j];
                oracle::quad::tanh_sinh(
                    |t, _da, _db| {
                        let phi = pieces[j].0 + pieces[j].1 * (t - nodes[j]) / k;
                        oracle::brute::fractional_integral(alpha, &nodes, &pieces, t) * phi
                    },
                    nodes[j],
                    nodes[j + 1],
                    1e-11,
                )
            })
            .sum();
        assert!(
            (got - want).abs() < 1e-8,
            "alpha={alpha}: {got} vs {want}"
        );
    }
}

/// I^(1-alpha)(B^alpha phi) = phi for phi = t^beta, beta >= 1, with B^alpha
/// taken from the power rule and I^(1-alpha) applied by quadrature.
#[test]
fn left_inverse_identity_on_powers() {
    for alpha in [0.25, 0.5, 0.75] {
        for beta in [1.0, 1.5, 2.0, 3.0] {
            let coeff = oracle::gamma(beta + 1.0) / oracle::gamma(beta + alpha);
            for t in [0.3, 0.7, 1.0] {
                let got = oracle::quad::tanh_sinh(
                    |s, _da, db| {
                        // omega_{1-alpha}(t - s) * B^alpha phi(s)
                        let gap = db; // distance to the upper limit t
                        oracle::omega(1.0 - alpha, gap) * coeff * s.powf(beta + alpha - 1.0)
                    },
                    0.0,
                    t,
                    1e-12,
                );
                let want = t.powf(beta);
                assert!(
                    (got - want).abs() < 1e-8,
                    "alpha={alpha}, beta={beta}, t={t}: {got} vs {want}"
                );
            }
        }
    }
}

/// Far histories: gap-to-width ratios up to 1e6 stay within 1e-8 relative of
/// a compensated high-precision Gauss reference (both moment families, both
/// sides of the Gauss switchover).
#[test]
fn far_history_moments_are_stable() {
    for alpha in [0.1, 0.4, 0.8] {
        let kern = FracKernel::new(alpha).unwrap();
        for ratio in [50.0, 999.0, 1001.0, 1e4, 1e6] {
            let kj = 1e-6;
            let s1 = 1.0;
            let s0 = s1 - kj;
            let t0 = s1 + ratio * kj;
            let t1 = t0 + 0.05;
            for q in 0..2 {
                let got = kern.jump_moment(s0, (t0, t1), q).unwrap();
                let want = oracle_jump(alpha, s0, t0, t1, q);
                assert!(
                    ((got - want) / want).abs() < 1e-8,
                    "jump alpha={alpha} ratio={ratio} q={q}: {got} vs {want}"
                );
                if ratio >= 1e4 {
                    // glass-smooth regime: the compensated Gauss reference
                    // must agree as well
                    let gauss_ref =
                        oracle::brute::smooth_jump_reference(alpha, s0, t0, t1, q);
                    assert!(((got - gauss_ref) / gauss_ref).abs() < 1e-9);
                }
                let got = kern.slope_moment((s0, s1), (t0, t1), q).unwrap();
                let want = oracle_slope(alpha, s0, s1, t0, t1, q);
                assert!(
                    ((got - want) / want).abs() < 1e-8,
                    "slope alpha={alpha} ratio={ratio} q={q}: {got} vs {want}"
                );
            }
        }
    }
}

/// The piecewise-linear fractional integral matches brute-force quadrature
/// at arbitrary evaluation times, including mid-interval ones.
#[test]
fn fractional_integral_matches_brute_force() {
    let mut rng = StdRng::seed_from_u64(23);
    for _ in 0..10 {
        let alpha: f64 = rng.gen_range(0.1..0.9);
        let kern = FracKernel::new(alpha).unwrap();
        let nodes = vec![0.0, 0.1, 0.45, 0.8, 1.3];
        let pieces: Vec<(f64, f64)> = (0..4)
            .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        for t in [0.05, 0.1, 0.3, 0.8, 1.05, 1.3] {
            let got = kern.fractional_integral(&nodes, &pieces, t).unwrap();
            let want = oracle::brute::fractional_integral(alpha, &nodes, &pieces, t);
            assert!(
                (got - want).abs() < 1e-10,
                "alpha={alpha}, t={t}: {got} vs {want}"
            );
        }
    }
}
