//! Shared oracle-comparison helpers for the integration and acceptance
//! suites: quadrature references for the kernel moments and the
//! moment-machinery quadratic form of the fractional integral.

#![allow(dead_code)]

use subdiff::kernel::{jump_moment_of_order, slope_moment_of_order};

pub fn oracle_jump(alpha: f64, t_src: f64, t0: f64, t1: f64, q: usize) -> f64 {
    let kn = t1 - t0;
    oracle::quad::tanh_sinh(
        |t, da, _db| {
            let _ = t;
            let gap = (t0 - t_src) + da;
            let psi = if q == 0 { 1.0 } else { da / kn };
            oracle::omega(alpha, gap) * psi
        },
        t0,
        t1,
        1e-13,
    )
}

pub fn oracle_slope(alpha: f64, s0: f64, s1: f64, t0: f64, t1: f64, q: usize) -> f64 {
    let kn = t1 - t0;
    let kj = s1 - s0;
    if (s0, s1) == (t0, t1) {
        return oracle::quad::tanh_sinh(
            |_t, da, _db| {
                let inner = oracle::quad::tanh_sinh(
                    |_s, _dsa, dsb| oracle::omega(alpha, dsb),
                    t0,
                    t0 + da,
                    1e-13,
                );
                let psi = if q == 0 { 1.0 } else { da / kn };
                inner / kj * psi
            },
            t0,
            t1,
            1e-11,
        );
    }
    oracle::quad::tanh_sinh(
        |t, da, _db| {
            let _ = t;
            let inner = oracle::quad::tanh_sinh(
                |_s, _dsa, dsb| {
                    let gap = ((t0 - s1) + da) + dsb;
                    oracle::omega(alpha, gap)
                },
                s0,
                s1,
                1e-13,
            );
            let psi = if q == 0 { 1.0 } else { da / kn };
            inner / kj * psi
        },
        t0,
        t1,
        1e-11,
    )
}

/// int_0^T (I^alpha phi) phi dt for a piecewise-linear phi, assembled from
/// the order-(alpha+1) moment machinery.
pub fn pl_quadratic_form(alpha: f64, nodes: &[f64], pieces: &[(f64, f64)]) -> f64 {
    let mu = alpha + 1.0;
    let n_int = pieces.len();
    let mut total = 0.0;
    for n in 1..=n_int {
        let test = (nodes[n - 1], nodes[n]);
        for q in 0..2 {
            let mut weighted = pieces[0].0 * jump_moment_of_order(mu, 0.0, test, q).unwrap();
            for j in 2..=n {
                let jump = pieces[j - 1].0 - (pieces[j - 2].0 + pieces[j - 2].1);
                weighted += jump * jump_moment_of_order(mu, nodes[j - 1], test, q).unwrap();
            }
            for j in 1..=n {
                let source = (nodes[j - 1], nodes[j]);
                weighted += pieces[j - 1].1 * slope_moment_of_order(mu, source, test, q).unwrap();
            }
            let coeff = if q == 0 { pieces[n - 1].0 } else { pieces[n - 1].1 };
            total += coeff * weighted;
        }
    }
    total
}
