//! The one-dimensional energy profile along a ray `t ↦ I[t u]`,
//!
//! ```text
//! f(t) = a t² − θ t^{2n/(n−2)} + b t^{2(n−1)/(n−2)},
//! a = 4(n−1)ℰ/(n−2),   θ = 4(n−1)𝒜/n,   b = −4ℬ,
//! ```
//!
//! its unique maximiser, the maximum value, and its second-order expansion
//! about the flat configuration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::half_space_moments::{compute_a, compute_b};
use crate::oracle::{expand_until, golden_section_max, sign_changes};
use crate::quadrature::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyTriple {
    pub n: u32,
    /// ℰ
    pub e_cal: f64,
    /// 𝒜
    pub a_cal: f64,
    /// ℬ
    pub b_cal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelCoefficients {
    pub a: f64,
    pub theta: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxValue {
    pub t_star: f64,
    /// `f(t_*)`
    pub value: f64,
    /// `(4/(n−2)) ℰ t_*² + (4/n) 𝒜 t_*^{2n/(n−2)}`
    pub reduced: f64,
}

impl EnergyTriple {
    pub fn new(n: u32, e_cal: f64, a_cal: f64, b_cal: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain(format!("n must be >= 3, got {n}")));
        }
        if !(a_cal > 0.0 && a_cal.is_finite()) {
            return Err(Error::domain(format!(
                "A_cal must be positive, got {a_cal}"
            )));
        }
        if !(e_cal.is_finite() && b_cal.is_finite()) {
            return Err(Error::domain("E_cal and B_cal must be finite"));
        }
        Ok(Self {
            n,
            e_cal,
            a_cal,
            b_cal,
        })
    }

    /// The bubble configuration: ℰ = n(n−2)A + cB, 𝒜 = n(n−2)A, ℬ = cB.
    pub fn flat(n: u32, a: f64, b: f64, c: f64) -> Result<Self> {
        let k = (n * n.saturating_sub(2)) as f64;
        Self::new(n, k * a + c * b, k * a, c * b)
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn coefficients(&self) -> ModelCoefficients {
        let n = self.nf();
        ModelCoefficients {
            a: 4.0 * (n - 1.0) * self.e_cal / (n - 2.0),
            theta: 4.0 * (n - 1.0) * self.a_cal / n,
            b: -4.0 * self.b_cal,
        }
    }

    /// Exponents `(2n/(n−2), 2(n−1)/(n−2))`.
    fn exponents(&self) -> (f64, f64) {
        let n = self.nf();
        (2.0 * n / (n - 2.0), 2.0 * (n - 1.0) / (n - 2.0))
    }

    pub fn eval_f(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("t must be >= 0, got {t}")));
        }
        let c = self.coefficients();
        let (p, q) = self.exponents();
        Ok(c.a * t * t - c.theta * t.powf(p) + c.b * t.powf(q))
    }

    pub fn f_prime(&self, t: f64) -> f64 {
        let c = self.coefficients();
        let (p, q) = self.exponents();
        2.0 * c.a * t - p * c.theta * t.powf(p - 1.0) + q * c.b * t.powf(q - 1.0)
    }

    pub fn f_second(&self, t: f64) -> f64 {
        let c = self.coefficients();
        let (p, q) = self.exponents();
        2.0 * c.a - p * (p - 1.0) * c.theta * t.powf(p - 2.0)
            + q * (q - 1.0) * c.b * t.powf(q - 2.0)
    }

    /// `f(t) − f(s)` for `t, s > 0`, evaluated term by term without cancellation
    /// between nearby arguments.
    pub fn f_difference(&self, t: f64, s: f64) -> f64 {
        let c = self.coefficients();
        let (p, q) = self.exponents();
        let log_ratio = ((t - s) / s).ln_1p();
        let term = |coef: f64, alpha: f64| coef * s.powf(alpha) * (alpha * log_ratio).exp_m1();
        term(c.a, 2.0) - term(c.theta, p) + term(c.b, q)
    }

    fn check_positive(&self) -> Result<()> {
        if !(self.e_cal > 0.0) {
            return Err(Error::domain(format!(
                "E_cal must be positive, got {}",
                self.e_cal
            )));
        }
        Ok(())
    }

    /// `x_* = t_*^{2/(n−2)} = (−ℬ + √(ℬ² + 4ℰ𝒜)) / (2𝒜)`.
    pub fn x_star(&self) -> Result<f64> {
        self.check_positive()?;
        let (a, b, e) = (self.a_cal, self.b_cal, self.e_cal);
        let disc = (b * b + 4.0 * e * a).sqrt();
        // rationalised when −ℬ and the root nearly cancel
        Ok(if b > 0.0 {
            2.0 * e / (b + disc)
        } else {
            (disc - b) / (2.0 * a)
        })
    }

    pub fn t_star(&self) -> Result<f64> {
        Ok(self.x_star()?.powf(0.5 * (self.nf() - 2.0)))
    }

    /// `f''(t_*) = −(2/(n−2)) [(2n/(n−2)) θ x_*² + 2a]`.
    pub fn f_second_at_star(&self) -> Result<f64> {
        let x = self.x_star()?;
        let n = self.nf();
        let c = self.coefficients();
        Ok(-(2.0 / (n - 2.0)) * ((2.0 * n / (n - 2.0)) * c.theta * x * x + 2.0 * c.a))
    }

    pub fn max_value(&self) -> Result<MaxValue> {
        let t = self.t_star()?;
        let n = self.nf();
        let value = self.eval_f(t)?;
        let reduced = 4.0 / (n - 2.0) * self.e_cal * t * t
            + 4.0 / n * self.a_cal * t.powf(2.0 * n / (n - 2.0));
        let gap = (value - reduced).abs();
        if gap > 1e-10 * reduced.abs().max(value.abs()).max(1.0) {
            return Err(Error::Numeric {
                message: "the two routes to the maximum value disagree".into(),
                achieved: gap,
            });
        }
        Ok(MaxValue {
            t_star: t,
            value,
            reduced,
        })
    }

    /// Maximiser by golden-section search on `[0, t_hi]`, `t_hi` doubled until `f(t_hi) < 0`.
    pub fn argmax_by_search(&self, tol: f64) -> Result<f64> {
        self.check_positive()?;
        let hi = expand_until(1.0, |t| self.eval_f(t).map(|v| v < 0.0).unwrap_or(false))?;
        let lo = hi * 1e-12;
        Ok(golden_section_max(
            |x, y| self.f_difference(x, y),
            lo,
            hi,
            tol,
        ))
    }

    /// Sign changes of `f'` on a uniform grid over `(0, t_max]`.
    pub fn critical_point_count(&self, t_max: f64, points: usize) -> usize {
        let h = t_max / points as f64;
        sign_changes(|t| self.f_prime(t), (1..=points).map(|i| i as f64 * h))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationTriple {
    pub a_tilde: f64,
    pub b_tilde: f64,
    pub e_tilde: f64,
}

impl PerturbationTriple {
    pub const ZERO: Self = Self {
        a_tilde: 0.0,
        b_tilde: 0.0,
        e_tilde: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expansion {
    pub predicted: f64,
    pub exact: f64,
}

impl Expansion {
    pub fn remainder(&self) -> f64 {
        (self.exact - self.predicted).abs()
    }
}

fn check_n7(n: u32) -> Result<()> {
    if n < 7 {
        return Err(Error::domain(format!("n must be >= 7, got {n}")));
    }
    Ok(())
}

/// `2n(n−2)A + cB`, required positive.
fn flat_denominator(n: u32, a: f64, b: f64, c: f64) -> Result<f64> {
    let nf = n as f64;
    let d = 2.0 * nf * (nf - 2.0) * a + c * b;
    if !(d > 0.0) {
        return Err(Error::domain(format!(
            "2n(n-2)A + cB must be positive, got {d}"
        )));
    }
    Ok(d)
}

/// Second-order prediction of the perturbed maximum next to the exact maximum.
pub fn expand_max_energy(
    n: u32,
    a: f64,
    b: f64,
    c: f64,
    pert: &PerturbationTriple,
) -> Result<Expansion> {
    check_n7(n)?;
    let d = flat_denominator(n, a, b, c)?;
    let nf = n as f64;
    let s_c = 8.0 * (nf - 1.0) * a + 4.0 * c * b / (nf - 2.0);
    let lin = pert.e_tilde - c * pert.b_tilde;
    let predicted = s_c + 4.0 * (nf - 1.0) / (nf - 2.0) * pert.e_tilde
        - 4.0 * c * pert.b_tilde
        - 4.0 * (nf - 1.0) * (nf - 2.0) * pert.a_tilde
        + 2.0 * (nf - 1.0) * lin * lin / d;
    let k = nf * (nf - 2.0);
    let triple = EnergyTriple::new(
        n,
        k * a + c * b + pert.e_tilde,
        k * (a + pert.a_tilde),
        c * b + c * pert.b_tilde,
    )?;
    Ok(Expansion {
        predicted,
        exact: triple.max_value()?.value,
    })
}

/// `|exact − predicted| / s²` for the perturbation `(Ã, B̃, Ẽ) = (s², 2s, s)` at each scale.
pub fn remainder_ratios(n: u32, a: f64, b: f64, c: f64, scales: &[f64]) -> Result<Vec<f64>> {
    scales
        .iter()
        .map(|&s| {
            let pert = PerturbationTriple {
                a_tilde: s * s,
                b_tilde: 2.0 * s,
                e_tilde: s,
            };
            Ok(expand_max_energy(n, a, b, c, &pert)?.remainder() / (s * s))
        })
        .collect()
}

/// `Λ = 2 / ((n−1)(2n(n−2)A + cB))`.
pub fn lambda_const(n: u32, c: f64, a: f64, b: f64) -> Result<f64> {
    check_n7(n)?;
    let d = flat_denominator(n, a, b, c)?;
    Ok(2.0 / ((n as f64 - 1.0) * d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chain {
    /// `(Λ/4) c B`
    pub lhs: f64,
    /// `1/(2(n−1))`
    pub mid: f64,
    /// `(n+2)/(4(n−2))`
    pub rhs: f64,
}

impl Chain {
    pub fn holds(&self) -> bool {
        self.lhs <= self.mid && self.mid < self.rhs
    }
}

/// The scalar chain `(Λ/4) c B ≤ 1/(2(n−1)) < (n+2)/(4(n−2))` with A and B computed.
pub fn lambda_chain(n: u32, c: f64, quad: &QuadratureSpec) -> Result<Chain> {
    check_n7(n)?;
    if !(c >= 0.0) {
        return Err(Error::domain(format!("c must be >= 0, got {c}")));
    }
    let nf = n as f64;
    let t_c = -c / (nf - 2.0);
    let a = compute_a(n, t_c, quad)?;
    let b = compute_b(n, t_c, quad)?;
    let lambda = lambda_const(n, c, a, b)?;
    Ok(Chain {
        lhs: lambda / 4.0 * c * b,
        mid: 1.0 / (2.0 * (nf - 1.0)),
        rhs: (nf + 2.0) / (4.0 * (nf - 2.0)),
    })
}
