//! Riemann-Liouville kernel moments for the memory term.
//!
//! The weak kernel omega_mu(t) = t^{mu-1}/Gamma(mu) enters the scheme only
//! through two families of time integrals over a test interval I_n with the
//! local basis {1, psi_1}, psi_1(t) = (t - t_{n-1})/k_n:
//!
//! * jump moments   int over I_n of omega(t - t_src) psi_q(t) dt,
//! * slope moments  int over I_n of [int over I_src of omega(t - s) ds / k_src] psi_q(t) dt,
//!
//! both available in closed form through the antiderivatives omega_{mu+1},
//! omega_{mu+2}, omega_{mu+3} at the gap values. Differences of
//! antiderivatives are computed through expm1/ln_1p so nearby gaps do not
//! cancel; once a source lies far behind the test interval (gap beyond 1e3
//! source widths) the remaining second-order cancellation is avoided by
//! switching to a composite 4-point Gauss rule on the then-smooth integrand.
//!
//! The moments are implemented for a general order mu because the test
//! suites reuse them at order alpha + 1 to evaluate quadratic forms of the
//! fractional integral.

use crate::error::{Error, Result};

/// Gamma by the Lanczos approximation (g = 7, n = 9 coefficient set); only
/// arguments in (0, 6) arise here.
pub fn gamma(x: f64) -> f64 {
    const P: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x));
    }
    let z = x - 1.0;
    let mut t = P[0];
    for (i, p) in P.iter().enumerate().skip(1) {
        t += p / (z + i as f64);
    }
    let w = z + 7.5;
    (2.0 * std::f64::consts::PI).sqrt() * w.powf(z + 0.5) * (-w).exp() * t
}

/// omega_mu(t) = t^{mu-1} / Gamma(mu).
///
/// t = 0 is admitted only for mu >= 1 (omega_1(0) = 1 and omega_mu(0) = 0
/// for mu > 1); mu < 1 at t = 0 is a singularity error.
pub fn omega(mu: f64, t: f64) -> Result<f64> {
    if mu <= 0.0 {
        return Err(Error::InvalidParameter(format!("omega order {mu} <= 0")));
    }
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("omega at negative t {t}")));
    }
    if t == 0.0 {
        return if mu > 1.0 {
            Ok(0.0)
        } else if mu == 1.0 {
            Ok(1.0)
        } else {
            Err(Error::Singularity(format!(
                "omega({mu}, 0) diverges for mu < 1"
            )))
        };
    }
    Ok(t.powf(mu - 1.0) / gamma(mu))
}

/// Inverse-gamma lookup for the orders mu..mu+3 used by the moment formulas.
#[derive(Debug, Clone, Copy)]
struct OrderTable {
    mu: f64,
    inv_gamma: [f64; 4],
}

impl OrderTable {
    fn new(mu: f64) -> Self {
        let mut inv_gamma = [0.0; 4];
        for (k, slot) in inv_gamma.iter_mut().enumerate() {
            *slot = 1.0 / gamma(mu + k as f64);
        }
        Self { mu, inv_gamma }
    }

    /// omega_{mu+k}(t); requires mu + k >= 1 or t > 0.
    fn om(&self, k: usize, t: f64) -> f64 {
        if t == 0.0 {
            return if self.mu + k as f64 == 1.0 { 1.0 } else { 0.0 };
        }
        t.powf(self.mu + k as f64 - 1.0) * self.inv_gamma[k]
    }

    /// omega_{mu+k}(hi) - omega_{mu+k}(lo) without cancellation (0 <= lo <= hi,
    /// k >= 1 so the antiderivative vanishes at 0).
    fn om_diff(&self, k: usize, lo: f64, hi: f64) -> f64 {
        debug_assert!(k >= 1 && lo >= 0.0 && lo <= hi);
        if lo == 0.0 || hi == 0.0 {
            return self.om(k, hi);
        }
        if lo == hi {
            return 0.0;
        }
        let e = self.mu + k as f64 - 1.0;
        let log_ratio = f64::ln_1p((lo - hi) / hi);
        -hi.powf(e) * f64::exp_m1(e * log_ratio) * self.inv_gamma[k]
    }
}

/// Sources whose gap exceeds this many source widths take the Gauss path.
const FAR_HISTORY_RATIO: f64 = 1e3;

fn gauss_panel_count(kn: f64, gap: f64) -> usize {
    // keep each panel at most a quarter of its distance to the singularity;
    // on power-law graded meshes kn/gap is bounded by 2^gamma - 1, so the
    // cap is never the binding constraint at practical gradings
    ((4.0 * kn / gap).ceil() as usize).clamp(1, 1024)
}

fn check_test_interval(t0: f64, t1: f64) -> Result<f64> {
    if !(t1 > t0) {
        return Err(Error::Ordering(format!(
            "test interval ({t0}, {t1}] is empty"
        )));
    }
    Ok(t1 - t0)
}

/// Order-mu jump moment: int over (t0, t1] of omega_mu(t - t_src) psi_q(t) dt
/// for a source time t_src <= t0.
pub fn jump_moment_of_order(mu: f64, t_src: f64, test: (f64, f64), q: usize) -> Result<f64> {
    let (t0, t1) = test;
    let kn = check_test_interval(t0, t1)?;
    if t_src > t0 {
        return Err(Error::Ordering(format!(
            "source time {t_src} after test interval start {t0}"
        )));
    }
    let g = OrderTable::new(mu);
    let d0 = t0 - t_src;
    let d1 = t1 - t_src;
    match q {
        0 => Ok(g.om_diff(1, d0, d1)),
        1 => {
            if d0 > FAR_HISTORY_RATIO * kn {
                let panels = gauss_panel_count(kn, d0);
                Ok(crate::quad::gl4_panels(
                    |t| g.om(0, t - t_src) * (t - t0) / kn,
                    t0,
                    t1,
                    panels,
                ))
            } else {
                Ok(g.om(1, d1) - g.om_diff(2, d0, d1) / kn)
            }
        }
        _ => Err(Error::InvalidParameter(format!("test degree {q} not in {{0,1}}"))),
    }
}

/// Order-mu slope moment: the weight multiplying a unit slope coefficient of
/// the source interval, tested against psi_q on the test interval. The
/// source interval must coincide with the test interval or end before it
/// starts.
pub fn slope_moment_of_order(
    mu: f64,
    source: (f64, f64),
    test: (f64, f64),
    q: usize,
) -> Result<f64> {
    let (s0, s1) = source;
    let (t0, t1) = test;
    let kn = check_test_interval(t0, t1)?;
    if !(s1 > s0) {
        return Err(Error::Ordering(format!(
            "source interval ({s0}, {s1}] is empty"
        )));
    }
    if q > 1 {
        return Err(Error::InvalidParameter(format!("test degree {q} not in {{0,1}}")));
    }
    let g = OrderTable::new(mu);
    if s0 == t0 && s1 == t1 {
        // current interval: inner integral is omega_{mu+1}(t - t0)
        return Ok(match q {
            0 => g.om(2, kn) / kn,
            _ => (mu + 1.0) * g.om(3, kn) / (kn * kn),
        });
    }
    if s1 > t0 {
        return Err(Error::Ordering(format!(
            "source interval ({s0}, {s1}] overlaps test interval ({t0}, {t1}]"
        )));
    }
    let kj = s1 - s0;
    let d0 = t0 - s1;
    if d0 > FAR_HISTORY_RATIO * kj {
        let panels = gauss_panel_count(kn, d0.max(f64::MIN_POSITIVE));
        return Ok(crate::quad::gl4_panels(
            |t| {
                let inner = g.om_diff(1, t - s1, t - s0) / kj;
                let psi = if q == 0 { 1.0 } else { (t - t0) / kn };
                inner * psi
            },
            t0,
            t1,
            panels,
        ));
    }
    let d1 = t1 - s1;
    let e0 = t0 - s0;
    let e1 = t1 - s0;
    Ok(match q {
        0 => (g.om_diff(2, e0, e1) - g.om_diff(2, d0, d1)) / kj,
        _ => {
            (g.om(2, e1) - g.om_diff(3, e0, e1) / kn - g.om(2, d1) + g.om_diff(3, d0, d1) / kn)
                / kj
        }
    })
}

/// Fractional order alpha with its cached Gamma values.
#[derive(Debug, Clone)]
pub struct FracKernel {
    alpha: f64,
    gamma_cache: [f64; 5],
}

impl FracKernel {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fractional order must lie strictly in (0, 1), got {alpha}"
            )));
        }
        let mut gamma_cache = [0.0; 5];
        for (k, slot) in gamma_cache.iter_mut().enumerate() {
            *slot = gamma(alpha + k as f64);
        }
        Ok(Self { alpha, gamma_cache })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Gamma(alpha + k) for k = 0..=4.
    pub fn gamma_alpha_plus(&self, k: usize) -> f64 {
        self.gamma_cache[k]
    }

    /// int over the test interval of omega_alpha(t - t_src) psi_q(t) dt.
    pub fn jump_moment(&self, t_src: f64, test: (f64, f64), q: usize) -> Result<f64> {
        jump_moment_of_order(self.alpha, t_src, test, q)
    }

    /// Weight of a source interval's slope coefficient against psi_q.
    pub fn slope_moment(&self, source: (f64, f64), test: (f64, f64), q: usize) -> Result<f64> {
        slope_moment_of_order(self.alpha, source, test, q)
    }

    /// Riemann-Liouville integral I^alpha of a piecewise-linear function at
    /// time t, interval-by-interval in closed form. Validation use.
    pub fn fractional_integral(
        &self,
        nodes: &[f64],
        pieces: &[(f64, f64)],
        t: f64,
    ) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("negative time {t}")));
        }
        if nodes.len() != pieces.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: pieces.len() + 1,
                got: nodes.len(),
            });
        }
        let g = OrderTable::new(self.alpha);
        let mut total = 0.0;
        for (j, &(a, b)) in pieces.iter().enumerate() {
            let (lo_node, hi_node) = (nodes[j], nodes[j + 1]);
            if t <= lo_node {
                break;
            }
            let kj = hi_node - lo_node;
            if t >= hi_node {
                let lo = t - hi_node;
                let hi = t - lo_node;
                let base = g.om_diff(1, lo, hi);
                // int tau omega(tau) dtau = [omega_{+1} tau - omega_{+2}]
                let tau_int =
                    g.om(1, hi) * hi - g.om(2, hi) - (g.om(1, lo) * lo - g.om(2, lo));
                total += (a + b * hi / kj) * base - (b / kj) * tau_int;
            } else {
                let w = t - lo_node;
                total += a * g.om(1, w) + (b / kj) * g.om(2, w);
            }
        }
        Ok(total)
    }
}
