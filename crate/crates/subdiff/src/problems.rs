//! Manufactured problems with separable power-law sources.
//!
//! Restricting the forcing to sums c_i t^{beta_i - 1} g_i(x) keeps every
//! time integral of the load exact (the first interval touches the t^{alpha-1}
//! singularity, which quadrature would handle poorly), and it is exactly the
//! structure the built-in benchmark solutions produce.

use crate::error::{Error, Result};
use std::sync::Arc;

pub type SpatialFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// One forcing term c * t^(beta-1) * g(x, y).
#[derive(Clone)]
pub struct SourceTerm {
    pub coeff: f64,
    /// temporal exponent beta > 0 (the factor is t^(beta-1))
    pub beta: f64,
    pub spatial: SpatialFn,
}

#[derive(Clone, Default)]
pub struct SeparableSource {
    pub terms: Vec<SourceTerm>,
}

impl SeparableSource {
    pub fn validate(&self) -> Result<()> {
        for term in &self.terms {
            if term.beta <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "source exponent beta must be positive, got {}",
                    term.beta
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.coeff * t.powf(term.beta - 1.0) * (term.spatial)(x, y))
            .sum()
    }
}

/// A problem with known exact solution. `exact_factored` carries the
/// time-factor / space-factor split when the solution is separable, which
/// lets the error norms hoist the spatial part out of the time loop.
#[derive(Clone)]
pub struct ManufacturedProblem {
    pub alpha: f64,
    pub exact: SpaceTimeFn,
    pub exact_factored: Option<(TimeFn, SpatialFn)>,
    pub initial: SpatialFn,
    pub initial_laplacian: SpatialFn,
    pub initial_is_zero: bool,
    pub source: SeparableSource,
    pub final_time: f64,
}

fn sine_bump() -> SpatialFn {
    Arc::new(|x, y| (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie strictly in (0, 1), got {alpha}"
        )))
    }
}

impl ManufacturedProblem {
    /// u = t^alpha sin(pi x) sin(pi y) on the unit square, T = 1.
    ///
    /// With L = -Delta the forcing is
    ///   f = alpha t^(alpha-1) g + 2 pi^2 (Gamma(alpha+1)/Gamma(2 alpha)) t^(2 alpha - 1) g,
    /// using the power rule B^alpha t^nu = Gamma(nu+1)/Gamma(nu+alpha) t^(nu+alpha-1).
    pub fn sine_power(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let g = sine_bump();
        let gamma_ratio =
            crate::kernel::gamma(alpha + 1.0) / crate::kernel::gamma(2.0 * alpha);
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let source = SeparableSource {
            terms: vec![
                SourceTerm {
                    coeff: alpha,
                    beta: alpha,
                    spatial: g.clone(),
                },
                SourceTerm {
                    coeff: 2.0 * pi2 * gamma_ratio,
                    beta: 2.0 * alpha,
                    spatial: g.clone(),
                },
            ],
        };
        source.validate()?;
        let g_exact = g.clone();
        let g_time = g.clone();
        Ok(Self {
            alpha,
            exact: Arc::new(move |x, y, t| t.powf(alpha) * g_exact(x, y)),
            exact_factored: Some((Arc::new(move |t: f64| t.powf(alpha)), g_time)),
            initial: Arc::new(|_, _| 0.0),
            initial_laplacian: Arc::new(|_, _| 0.0),
            initial_is_zero: true,
            source,
            final_time: 1.0,
        })
    }

    /// u = (t^2 + t^alpha) sin(pi x) sin(pi y): same singular exponent with a
    /// smoother component on top, for sanity runs with milder forcing.
    pub fn sine_power_mixed(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let g = sine_bump();
        let kg = crate::kernel::gamma;
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let source = SeparableSource {
            terms: vec![
                SourceTerm {
                    coeff: 2.0,
                    beta: 2.0,
                    spatial: g.clone(),
                },
                SourceTerm {
                    coeff: alpha,
                    beta: alpha,
                    spatial: g.clone(),
                },
                SourceTerm {
                    // B^alpha t^2 = (2/Gamma(alpha+2)) t^(alpha+1)
                    coeff: 2.0 * pi2 * 2.0 / kg(alpha + 2.0),
                    beta: alpha + 2.0,
                    spatial: g.clone(),
                },
                SourceTerm {
                    coeff: 2.0 * pi2 * kg(alpha + 1.0) / kg(2.0 * alpha),
                    beta: 2.0 * alpha,
                    spatial: g.clone(),
                },
            ],
        };
        source.validate()?;
        let g_exact = g.clone();
        let g_time = g.clone();
        Ok(Self {
            alpha,
            exact: Arc::new(move |x, y, t| (t * t + t.powf(alpha)) * g_exact(x, y)),
            exact_factored: Some((Arc::new(move |t: f64| t * t + t.powf(alpha)), g_time)),
            initial: Arc::new(|_, _| 0.0),
            initial_laplacian: Arc::new(|_, _| 0.0),
            initial_is_zero: true,
            source,
            final_time: 1.0,
        })
    }

    /// f = 0, u0 = 0: the solution is identically zero.
    pub fn zero(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            exact: Arc::new(|_, _, _| 0.0),
            exact_factored: Some((Arc::new(|_| 0.0), Arc::new(|_, _| 0.0))),
            initial: Arc::new(|_, _| 0.0),
            initial_laplacian: Arc::new(|_, _| 0.0),
            initial_is_zero: true,
            source: SeparableSource::default(),
            final_time: 1.0,
        })
    }
}

/// (t1^beta - t0^beta)/beta without cancellation for nearby endpoints.
fn power_diff(beta: f64, t0: f64, t1: f64) -> f64 {
    debug_assert!(t0 <= t1);
    if t0 == 0.0 {
        return t1.powf(beta) / beta;
    }
    if t0 == t1 {
        return 0.0;
    }
    -t1.powf(beta) * f64::exp_m1(beta * f64::ln_1p((t0 - t1) / t1)) / beta
}

/// int over (t0, t1] of t^(beta-1) psi_q(t) dt in closed form, valid for
/// first intervals touching t = 0.
pub fn rhs_time_moments(beta: f64, interval: (f64, f64), q: usize) -> Result<f64> {
    let (t0, t1) = interval;
    if beta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "moment exponent beta must be positive, got {beta}"
        )));
    }
    if !(t1 > t0) || t0 < 0.0 {
        return Err(Error::Ordering(format!("bad interval ({t0}, {t1}]")));
    }
    match q {
        0 => Ok(power_diff(beta, t0, t1)),
        1 => {
            let kn = t1 - t0;
            Ok((power_diff(beta + 1.0, t0, t1) - t0 * power_diff(beta, t0, t1)) / kn)
        }
        _ => Err(Error::InvalidParameter(format!(
            "test degree {q} not in {{0,1}}"
        ))),
    }
}
