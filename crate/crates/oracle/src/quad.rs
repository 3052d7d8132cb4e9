//! Reference quadrature: Gauss–Legendre panels with compensated summation,
//! tanh-sinh for endpoint singularities, and adaptive triangle quadrature.

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre quadrature over [a, b] with `panels` equal panels
/// and `order` points per panel, accumulated with Kahan compensation.
pub fn gauss_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (xs, ws) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (x, w) in xs.iter().zip(&ws) {
            let term = 0.5 * h * w * f(mid + 0.5 * h * x);
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    sum
}

/// Tanh-sinh (double exponential) quadrature over [a, b].
///
/// The integrand receives `(x, x - a, b - x)` with the endpoint distances
/// computed without cancellation, so integrable endpoint singularities such
/// as (x-a)^(mu-1) can be evaluated accurately. Levels are doubled until two
/// consecutive results agree to `tol` (relative to the magnitude).
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = 0.5 * std::f64::consts::PI * t.sinh();
        // 1 - tanh(u) = 2 exp(-2u) / (1 + exp(-2u)), stable near both ends
        let em = (-2.0 * u.abs()).exp();
        let dist_small = half * 2.0 * em / (1.0 + em); // distance to nearer endpoint
        let x = if u >= 0.0 {
            b - dist_small
        } else {
            a + dist_small
        };
        let (da, db) = if u >= 0.0 {
            (2.0 * half - dist_small, dist_small)
        } else {
            (dist_small, 2.0 * half - dist_small)
        };
        let sech = 1.0 / u.cosh();
        let dxdt = half * 0.5 * std::f64::consts::PI * t.cosh() * sech * sech;
        // the DE weight decays doubly exponentially; once the endpoint
        // distance underflows the contribution is zero (avoids inf * 0)
        if dist_small == 0.0 || dxdt < 1e-290 {
            return 0.0;
        }
        f(x, da, db) * dxdt
    };
    let tmax = 6.5;
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1.0;
    while k <= tmax {
        sum += eval(k) + eval(-k);
        k += 1.0;
    }
    let mut result = h * sum;
    for level in 0..12 {
        h *= 0.5;
        // add the new points at odd multiples of h
        let mut t = h;
        let mut add = 0.0;
        while t <= tmax {
            add += eval(t) + eval(-t);
            t += 2.0 * h;
        }
        sum += add;
        let prev = result;
        result = h * sum;
        if (result - prev).abs() <= tol * result.abs().max(1e-300) && level >= 2 {
            break;
        }
    }
    result
}

/// Degree-5 quadrature rule on a triangle given by its vertices.
fn tri_deg5(f: &dyn Fn(f64, f64) -> f64, v: &[[f64; 2]; 3]) -> f64 {
    const W0: f64 = 0.225;
    const A1: f64 = 0.470_142_064_105_115;
    const W1: f64 = 0.132_394_152_788_506;
    const A2: f64 = 0.101_286_507_323_456;
    const W2: f64 = 0.125_939_180_544_827;
    let pts: [([f64; 3], f64); 7] = [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], W0),
        ([A1, A1, 1.0 - 2.0 * A1], W1),
        ([A1, 1.0 - 2.0 * A1, A1], W1),
        ([1.0 - 2.0 * A1, A1, A1], W1),
        ([A2, A2, 1.0 - 2.0 * A2], W2),
        ([A2, 1.0 - 2.0 * A2, A2], W2),
        ([1.0 - 2.0 * A2, A2, A2], W2),
    ];
    let area = 0.5
        * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
            .abs();
    let mut s = 0.0;
    for (bary, w) in pts {
        let x = bary[0] * v[0][0] + bary[1] * v[1][0] + bary[2] * v[2][0];
        let y = bary[0] * v[0][1] + bary[1] * v[1][1] + bary[2] * v[2][1];
        s += w * f(x, y);
    }
    s * area
}

/// Adaptive quadrature over a triangle: recursive 4-way midpoint subdivision
/// with a degree-5 rule, refining until the subdivision correction is below
/// `tol` (absolute).
pub fn adaptive_triangle(f: &dyn Fn(f64, f64) -> f64, v: [[f64; 2]; 3], tol: f64) -> f64 {
    fn recurse(
        f: &dyn Fn(f64, f64) -> f64,
        v: [[f64; 2]; 3],
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m01 = [(v[0][0] + v[1][0]) / 2.0, (v[0][1] + v[1][1]) / 2.0];
        let m12 = [(v[1][0] + v[2][0]) / 2.0, (v[1][1] + v[2][1]) / 2.0];
        let m20 = [(v[2][0] + v[0][0]) / 2.0, (v[2][1] + v[0][1]) / 2.0];
        let kids = [
            [v[0], m01, m20],
            [m01, v[1], m12],
            [m20, m12, v[2]],
            [m01, m12, m20],
        ];
        let parts: Vec<f64> = kids.iter().map(|k| tri_deg5(f, k)).collect();
        let refined: f64 = parts.iter().sum();
        if (refined - whole).abs() <= tol || depth >= 14 {
            refined
        } else {
            kids.iter()
                .zip(&parts)
                .map(|(k, &p)| recurse(f, *k, p, tol / 4.0, depth + 1))
                .sum()
        }
    }
    let whole = tri_deg5(f, &v);
    recurse(f, v, whole, tol, 0)
}
