//! Independent reference computations for the test suites.
//!
//! Everything in this crate is deliberately written from scratch, without
//! touching the main library: a Spouge gamma function, Gauss–Legendre and
//! tanh-sinh quadrature, adaptive triangle quadrature, a dense LU solve, and
//! a brute-force dense assembly of the scalar time-stepping variational
//! problem. Test suites compare the production closed forms against these.

pub mod brute;
pub mod dense;
pub mod quad;

/// Gamma function evaluated from the integral definition with this crate's
/// own quadrature (tanh-sinh over [0,1] for the t^{x-1} singularity, Gauss
/// panels for the exponentially decaying rest). Memoized per argument.
///
/// Independent of the Lanczos evaluation used by the main library; relative
/// accuracy is near machine precision on the arguments that arise (0, 8).
pub fn gamma(x: f64) -> f64 {
    use std::cell::RefCell;
    use std::collections::HashMap;
    thread_local! {
        static CACHE: RefCell<HashMap<u64, f64>> = RefCell::new(HashMap::new());
    }
    if x < 0.5 {
        // reflection
        return std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x));
    }
    CACHE.with(|c| {
        if let Some(&v) = c.borrow().get(&x.to_bits()) {
            return v;
        }
        let head = quad::tanh_sinh(|_t, da, _db| da.powf(x - 1.0) * (-da).exp(), 0.0, 1.0, 1e-15);
        let tail = quad::gauss_panels(|t| t.powf(x - 1.0) * (-t).exp(), 1.0, 60.0, 48, 16);
        let v = head + tail;
        c.borrow_mut().insert(x.to_bits(), v);
        v
    })
}

/// Riemann–Liouville kernel t^{mu-1}/Gamma(mu), oracle-side evaluation.
pub fn omega(mu: f64, t: f64) -> f64 {
    if t == 0.0 {
        if mu > 1.0 {
            return 0.0;
        }
        if mu == 1.0 {
            return 1.0;
        }
        panic!("omega oracle: singular at t=0 for mu<1");
    }
    t.powf(mu - 1.0) / gamma(mu)
}
