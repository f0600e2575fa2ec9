//! Globally adaptive Gauss-Kronrod (10/21 point) quadrature on finite intervals.
//!
//! Unbounded integrals are handled by the callers through explicit changes of
//! variables (`y - T_c = tan θ`, or `z = u / (1 - u)` for the rational oracle),
//! so only finite intervals are needed here.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and sampling budget shared by the quadrature and Monte-Carlo routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of interval bisections performed by the adaptive driver.
    pub max_depth: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl QuadratureSpec {
    pub const MIN_REL_TOL: f64 = 1e-13;

    pub fn new(
        rel_tol: f64,
        abs_tol: f64,
        max_depth: usize,
        mc_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(rel_tol >= Self::MIN_REL_TOL) {
            return Err(Error::domain(format!(
                "rel_tol must be >= {:e}, got {rel_tol:e}",
                Self::MIN_REL_TOL
            )));
        }
        if !(abs_tol >= 0.0) {
            return Err(Error::domain("abs_tol must be non-negative"));
        }
        if max_depth == 0 || mc_samples == 0 {
            return Err(Error::domain("max_depth and mc_samples must be positive"));
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_depth,
            mc_samples,
            seed,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, mc_samples: usize) -> Self {
        self.mc_samples = mc_samples.max(1);
        self
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-15,
            max_depth: 2000,
            mc_samples: 1_000_000,
            seed: 42,
        }
    }
}

/// Value and error estimate of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

// Published abscissae and weights, kept verbatim.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208932299962,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over `[a, b]`, bisecting the interval with the largest error
/// until the summed error is below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration limits must be finite"));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let (value, error) = gk21(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;

    for _ in 0..spec.max_depth {
        if !total.is_finite() {
            break;
        }
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(Integral {
                value: total,
                error: total_err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval cannot be split further in floating point
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }

    // re-sum to remove drift from the incremental updates
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    if value.is_finite() && error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
        return Ok(Integral {
            value,
            error,
            intervals: heap.len(),
        });
    }
    Err(Error::Numeric {
        message: format!("adaptive quadrature on [{a}, {b}] did not converge"),
        achieved: error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let spec = QuadratureSpec::default();
        // Kronrod 21 integrates degree 31 exactly on one panel
        let r = integrate(|x| x.powi(20) - 3.0 * x.powi(7), 0.0, 1.0, &spec).unwrap();
        assert!((r.value - (1.0 / 21.0 - 3.0 / 8.0)).abs() < 1e-15);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn smooth_transcendental() {
        let spec = QuadratureSpec::default();
        let r = integrate(f64::sin, 0.0, std::f64::consts::PI, &spec).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let r = integrate(|x| 1.0 / (1.0 + x * x), -50.0, 50.0, &spec).unwrap();
        assert!((r.value - 2.0 * 50f64.atan()).abs() < 1e-11);
    }

    #[test]
    fn sqrt_endpoint_singularity_converges() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &spec).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn reports_non_convergence() {
        let spec = QuadratureSpec {
            max_depth: 3,
            ..QuadratureSpec::default()
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &spec).unwrap_err();
        assert!(matches!(err, Error::Numeric { .. }));
    }

    #[test]
    fn rejects_too_tight_tolerance() {
        assert!(QuadratureSpec::new(1e-14, 0.0, 10, 10, 1).is_err());
        assert!(QuadratureSpec::new(1e-13, 0.0, 10, 10, 1).is_ok());
    }
}
