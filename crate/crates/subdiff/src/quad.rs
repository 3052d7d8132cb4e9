//! Quadrature rules used by assembly: symmetric Gauss rules on triangles
//! (barycentric points and weights, normalized to a unit weight sum) and a
//! small Gauss-Legendre rule on intervals for the far-history kernel path.

/// Barycentric points and weights exact for polynomials of at least the
/// requested degree (1..=5). Requests of 3 map to the degree-4 rule.
pub fn triangle_rule(degree: usize) -> crate::Result<&'static [([f64; 3], f64)]> {
    const DEG1: [([f64; 3], f64); 1] = [([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1.0)];
    const DEG2: [([f64; 3], f64); 3] = [
        ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
        ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
        ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
    ];
    const A1: f64 = 0.445_948_490_915_965;
    const W1: f64 = 0.223_381_589_678_011;
    const A2: f64 = 0.091_576_213_509_771;
    const W2: f64 = 0.109_951_743_655_322;
    const DEG4: [([f64; 3], f64); 6] = [
        ([A1, A1, 1.0 - 2.0 * A1], W1),
        ([A1, 1.0 - 2.0 * A1, A1], W1),
        ([1.0 - 2.0 * A1, A1, A1], W1),
        ([A2, A2, 1.0 - 2.0 * A2], W2),
        ([A2, 1.0 - 2.0 * A2, A2], W2),
        ([1.0 - 2.0 * A2, A2, A2], W2),
    ];
    const B1: f64 = 0.470_142_064_105_115;
    const V1: f64 = 0.132_394_152_788_506;
    const B2: f64 = 0.101_286_507_323_456;
    const V2: f64 = 0.125_939_180_544_827;
    const DEG5: [([f64; 3], f64); 7] = [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([B1, B1, 1.0 - 2.0 * B1], V1),
        ([B1, 1.0 - 2.0 * B1, B1], V1),
        ([1.0 - 2.0 * B1, B1, B1], V1),
        ([B2, B2, 1.0 - 2.0 * B2], V2),
        ([B2, 1.0 - 2.0 * B2, B2], V2),
        ([1.0 - 2.0 * B2, B2, B2], V2),
    ];
    match degree {
        1 => Ok(&DEG1),
        2 => Ok(&DEG2),
        3 | 4 => Ok(&DEG4),
        5 => Ok(&DEG5),
        _ => Err(crate::Error::InvalidParameter(format!(
            "unsupported triangle quadrature degree {degree}"
        ))),
    }
}

/// Integrate a function over the triangle (a, b, c).
pub fn integrate_triangle(
    f: &dyn Fn(f64, f64) -> f64,
    v: [[f64; 2]; 3],
    degree: usize,
) -> crate::Result<f64> {
    let rule = triangle_rule(degree)?;
    let area = 0.5
        * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
            .abs();
    let mut s = 0.0;
    for (bary, w) in rule {
        let x = bary[0] * v[0][0] + bary[1] * v[1][0] + bary[2] * v[2][0];
        let y = bary[0] * v[0][1] + bary[1] * v[1][1] + bary[2] * v[2][1];
        s += w * f(x, y);
    }
    Ok(s * area)
}

/// 4-point Gauss-Legendre nodes and weights on [-1, 1].
pub const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
];

/// Composite 4-point Gauss over [a, b] with the given panel count.
pub fn gl4_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL4 {
            sum += 0.5 * h * w * f(mid + 0.5 * h * x);
        }
    }
    sum
}
