//! Brute-force dense assembly of the scalar time-stepping variational problem.
//!
//! The scalar surrogate replaces the spatial operators by 1x1 matrices
//! (mass = 1, stiffness = `stiff_scale`), so the trial space is piecewise
//! linear in time with a scalar coefficient pair per interval. Every time
//! integral here is evaluated by quadrature -- no closed-form kernel moments
//! -- which makes this an independent check of the production stepper.

use crate::quad::{gauss_panels, tanh_sinh};
use crate::{dense, omega};

/// Piecewise-linear coefficients: on interval j the value is
/// `a_j + b_j (t - t_{j-1}) / k_j`.
pub type Pieces = Vec<(f64, f64)>;

fn piece_value(nodes: &[f64], pieces: &[(f64, f64)], j: usize, s: f64) -> f64 {
    let k = nodes[j + 1] - nodes[j];
    pieces[j].0 + pieces[j].1 * (s - nodes[j]) / k
}

/// Riemann-Liouville integral of a piecewise-linear function at time t,
/// evaluated by tanh-sinh quadrature piece by piece (the kernel is singular
/// at s = t, the right endpoint of the last piece).
pub fn fractional_integral(alpha: f64, nodes: &[f64], pieces: &[(f64, f64)], t: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..pieces.len() {
        let lo = nodes[j];
        if lo >= t {
            break;
        }
        let hi = nodes[j + 1].min(t);
        let val = tanh_sinh(
            |s, _da, db| {
                // db is the stable distance to hi; the kernel argument is
                // t - s = (t - hi) + db
                let gap = (t - hi) + db;
                omega(alpha, gap) * piece_value(nodes, pieces, j, s)
            },
            lo,
            hi,
            1e-13,
        );
        total += val;
    }
    total
}

/// integral over I_n of (B^alpha u)(t) psi_q(t) dt for a piecewise-linear u,
/// via integration by parts:
///   [I^alpha u * psi_q] at the interval ends - int I^alpha u * psi_q' dt.
pub fn frac_test_integral(
    alpha: f64,
    nodes: &[f64],
    pieces: &[(f64, f64)],
    n: usize,
    q: usize,
) -> f64 {
    let (t0, t1) = (nodes[n], nodes[n + 1]);
    let kn = t1 - t0;
    let i_hi = fractional_integral(alpha, nodes, pieces, t1);
    let boundary = match q {
        0 => i_hi - fractional_integral(alpha, nodes, pieces, t0),
        1 => i_hi, // psi_1(t0) = 0, psi_1(t1) = 1
        _ => unreachable!(),
    };
    if q == 0 {
        boundary
    } else {
        // psi_1' = 1/kn; I^alpha u can behave like (t-t0)^alpha near t0, so
        // tanh-sinh again rather than plain Gauss
        let corr = tanh_sinh(
            |t, _da, _db| fractional_integral(alpha, nodes, pieces, t),
            t0,
            t1,
            1e-11,
        );
        boundary - corr / kn
    }
}

/// One power-law source term c * t^(beta-1).
#[derive(Clone, Copy)]
pub struct PowerTerm {
    pub coeff: f64,
    pub beta: f64,
}

fn load_integral(terms: &[PowerTerm], nodes: &[f64], n: usize, q: usize) -> f64 {
    let (t0, t1) = (nodes[n], nodes[n + 1]);
    let kn = t1 - t0;
    terms
        .iter()
        .map(|term| {
            tanh_sinh(
                |t, da, _db| {
                    // the only singular point is t = 0 (left end of the first interval)
                    let tv = if t0 == 0.0 { da } else { t };
                    let psi = if q == 0 { 1.0 } else { (t - t0) / kn };
                    term.coeff * tv.powf(term.beta - 1.0) * psi
                },
                t0,
                t1,
                1e-13,
            )
        })
        .sum()
}

/// Assemble the full dense 2N x 2N system for the scalar surrogate and solve
/// it. Returns the coefficient pairs (a_n, b_n) per interval.
pub fn solve_scalar_dg(
    alpha: f64,
    nodes: &[f64],
    stiff_scale: f64,
    u0: f64,
    source: &[PowerTerm],
) -> Pieces {
    let n_int = nodes.len() - 1;
    let dim = 2 * n_int;
    let mut a = vec![vec![0.0; dim]; dim];
    let mut rhs = vec![0.0; dim];
    let idx = |j: usize, p: usize| 2 * j + p;

    for n in 0..n_int {
        for q in 0..2 {
            let row = idx(n, q);
            // (U_+^{n-1}, X_+^{n-1}) with psi_0(t_{n-1}^+) = 1, psi_1 = 0
            if q == 0 {
                a[row][idx(n, 0)] += 1.0;
                if n == 0 {
                    rhs[row] += u0;
                } else {
                    a[row][idx(n - 1, 0)] -= 1.0;
                    a[row][idx(n - 1, 1)] -= 1.0;
                }
            }
            // int U' psi_q dt: U' = b_n / k_n
            a[row][idx(n, 1)] += if q == 0 { 1.0 } else { 0.5 };
            // memory term, one column at a time by quadrature
            for j in 0..=n {
                for p in 0..2 {
                    let mut pieces = vec![(0.0, 0.0); n_int];
                    pieces[j] = if p == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
                    let w = frac_test_integral(alpha, nodes, &pieces, n, q);
                    a[row][idx(j, p)] += stiff_scale * w;
                }
            }
            rhs[row] += load_integral(source, nodes, n, q);
        }
    }
    let x = dense::solve(a, rhs);
    (0..n_int).map(|j| (x[idx(j, 0)], x[idx(j, 1)])).collect()
}

/// Gauss-panel reference for smooth weighted kernel integrals
/// int over I_n of omega_mu(t - t_src) psi_q(t) dt when t_src is well outside
/// the interval; compensated summation keeps the reference near 1e-15.
pub fn smooth_jump_reference(mu: f64, t_src: f64, t0: f64, t1: f64, q: usize) -> f64 {
    let kn = t1 - t0;
    gauss_panels(
        |t| {
            let psi = if q == 0 { 1.0 } else { (t - t0) / kn };
            omega(mu, t - t_src) * psi
        },
        t0,
        t1,
        64,
        16,
    )
}
