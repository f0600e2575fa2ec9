//! Threshold `c₀(n)` below which negative boundary constants `c ∈ [−c₀, 0)`
//! keep the energy estimate valid.
//!
//! For `c < 0` the boundary integral `B` is the volume of a spherical cap of
//! angular radius `r ∈ (π/2, π)`, `cos r = −T_c/√(1+T_c²)`, and the estimate
//! reduces to
//!
//! ```text
//! 1 + K cos r ≥ 4 (ω_{n−1}/ω_n) cos²r sin^{n−2}r,   K = (n−1)(n²+2n−4)/(n−2).
//! ```

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::half_space_moments::{b_closed_form, compute_a};
use crate::oracle::bisect;
use crate::quadrature::QuadratureSpec;
use crate::special_functions::sphere_volume;

/// Default number of points in the r-grid scans.
pub const DEFAULT_GRID: usize = 10_000;

fn check_n(n: u32, min: u32) -> Result<()> {
    if n < min {
        return Err(Error::domain(format!("n must be >= {min}, got {n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapGeometry {
    pub n: u32,
    pub c: f64,
    pub t_c: f64,
    /// Angular radius `r ∈ (π/2, π)`.
    pub r: f64,
    /// `2^{1−n} ω_{n−1} sin^{n−1} r`
    pub b_cap: f64,
}

/// Cap radius of a boundary constant `c`, `r = arccos(−T_c/√(1+T_c²))`,
/// evaluated as `atan2(1, −T_c)` to stay accurate as `r → π`.
pub fn cap_angle(n: u32, c: f64) -> f64 {
    let t = -c / (n as f64 - 2.0);
    1.0f64.atan2(-t)
}

/// Boundary constant `c = (n−2) cot r` of a cap radius.
pub fn c_of_r(n: u32, r: f64) -> f64 {
    (n as f64 - 2.0) * r.cos() / r.sin()
}

pub fn b_cap(n: u32, r: f64) -> f64 {
    2f64.powi(1 - n as i32) * sphere_volume(n - 1) * r.sin().powi(n as i32 - 1)
}

pub fn cap_from_c(n: u32, c: f64) -> Result<CapGeometry> {
    check_n(n, 3)?;
    if !(c < 0.0 && c.is_finite()) {
        return Err(Error::domain(format!(
            "the cap parameterisation needs c < 0, got {c}"
        )));
    }
    let t_c = -c / (n as f64 - 2.0);
    let r = cap_angle(n, c);
    let cap = CapGeometry {
        n,
        c,
        t_c,
        r,
        b_cap: b_cap(n, r),
    };
    let half_space = b_closed_form(n, t_c)?;
    let gap = (cap.b_cap - half_space).abs() / half_space;
    if gap > 1e-8 {
        return Err(Error::Numeric {
            message: format!("cap volume disagrees with the half-space B at n = {n}, c = {c}"),
            achieved: gap,
        });
    }
    Ok(cap)
}

/// Sharp constant `((n−2)/2) ω_{n−1}^{1/(n−1)}` of the trace inequality on the ball.
pub fn sharp_trace_constant(n: u32) -> f64 {
    let nf = n as f64;
    0.5 * (nf - 2.0) * sphere_volume(n - 1).powf(1.0 / (nf - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapIdentities {
    /// `c B^{1/(n−1)}`
    pub lhs1: f64,
    /// `((n−2)/2) ω_{n−1}^{1/(n−1)} cos r`
    pub rhs1: f64,
    /// `c² B^{n/(n−1)}`
    pub lhs2: f64,
    /// `((n−2)²/2ⁿ) ω_{n−1}^{n/(n−1)} cos²r sin^{n−2}r`
    pub rhs2: f64,
}

pub fn cap_identities(cap: &CapGeometry) -> CapIdentities {
    let nf = cap.n as f64;
    let w = sphere_volume(cap.n - 1);
    let (s, co) = cap.r.sin_cos();
    CapIdentities {
        lhs1: cap.c * cap.b_cap.powf(1.0 / (nf - 1.0)),
        rhs1: 0.5 * (nf - 2.0) * w.powf(1.0 / (nf - 1.0)) * co,
        lhs2: cap.c * cap.c * cap.b_cap.powf(nf / (nf - 1.0)),
        rhs2: (nf - 2.0).powi(2) / 2f64.powi(cap.n as i32)
            * w.powf(nf / (nf - 1.0))
            * co
            * co
            * s.powi(cap.n as i32 - 2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Inequality {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs >= rhs,
        }
    }

    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// The threshold inequality in the variables `(c, B)`.
pub fn cap_inequality(cap: &CapGeometry) -> Inequality {
    let n = cap.n;
    let nf = n as f64;
    let w1 = sphere_volume(n - 1);
    let lhs = (nf - 2.0) / (4.0 * nf * (nf - 1.0)) * w1.powf(1.0 / (nf - 1.0))
        + (nf * nf + 2.0 * nf - 4.0) / (2.0 * nf * (nf - 2.0))
            * cap.c
            * cap.b_cap.powf(1.0 / (nf - 1.0));
    let rhs = 2f64.powi(n as i32) / (nf * (nf - 1.0) * (nf - 2.0) * sphere_volume(n))
        * cap.c
        * cap.c
        * cap.b_cap.powf(nf / (nf - 1.0));
    Inequality::new(lhs, rhs)
}

/// `K = (n−1)(n²+2n−4)/(n−2)`.
pub fn trig_coefficient(n: u32) -> f64 {
    let nf = n as f64;
    (nf - 1.0) * (nf * nf + 2.0 * nf - 4.0) / (nf - 2.0)
}

/// The threshold inequality in the cap radius `r`.
pub fn trig_form(n: u32, r: f64) -> Inequality {
    let (s, co) = r.sin_cos();
    let ratio = sphere_volume(n - 1) / sphere_volume(n);
    Inequality::new(
        1.0 + trig_coefficient(n) * co,
        4.0 * ratio * co * co * s.powi(n as i32 - 2),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub n: u32,
    /// `+∞` when no violation exists on `(π/2, π)`.
    pub c0: f64,
    /// Cap radius at `c = −c₀`.
    pub r0: f64,
    pub unbounded: bool,
    /// A grid scan of `c ∈ [−c₀, 0)` found no violation.
    pub grid_verified: bool,
}

pub fn find_c0(n: u32, tol: f64) -> Result<Threshold> {
    find_c0_with_grid(n, tol, DEFAULT_GRID)
}

/// Largest `c₀` with the inequality holding on all of `[−c₀, 0)`.
///
/// Scans `r ∈ (π/2, π)` for the first violation, then bisects in `c` between
/// the last grid point where it holds and the first where it fails.
pub fn find_c0_with_grid(n: u32, tol: f64, grid: usize) -> Result<Threshold> {
    check_n(n, 7)?;
    if !(tol > 0.0) || grid < 2 {
        return Err(Error::domain("tol must be positive and grid >= 2"));
    }
    let margin_c = |c: f64| trig_form(n, cap_angle(n, c)).margin();
    let h = FRAC_PI_2 / grid as f64;
    let first_bad = (1..grid)
        .map(|i| FRAC_PI_2 + h * i as f64)
        .find(|&r| !trig_form(n, r).holds);
    let Some(r_bad) = first_bad else {
        return Ok(Threshold {
            n,
            c0: f64::INFINITY,
            r0: PI,
            unbounded: true,
            grid_verified: true,
        });
    };
    let c_bad = c_of_r(n, r_bad);
    let c_good = c_of_r(n, r_bad - h).min(0.0);
    let c_root = bisect(margin_c, c_bad, c_good, tol)?;
    // report the end of the bracket on which the inequality still holds
    let c0 = -if margin_c(c_root) >= 0.0 {
        c_root
    } else {
        c_root + tol
    };
    let grid_verified = (0..grid)
        .map(|i| -c0 * (1.0 - i as f64 / grid as f64))
        .all(|c| margin_c(c) >= 0.0);
    Ok(Threshold {
        n,
        c0,
        r0: cap_angle(n, -c0),
        unbounded: false,
        grid_verified,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ALowerBound {
    #[serde(rename = "A")]
    pub a: f64,
    /// `ω_n / 2^{n+1}`
    pub bound: f64,
    pub holds: bool,
}

pub fn a_lower_bound(n: u32, c: f64, quad: &QuadratureSpec) -> Result<ALowerBound> {
    check_n(n, 3)?;
    if !(c < 0.0) {
        return Err(Error::domain(format!("c must be negative, got {c}")));
    }
    let a = compute_a(n, -c / (n as f64 - 2.0), quad)?;
    let bound = sphere_volume(n) / 2f64.powi(n as i32 + 1);
    Ok(ALowerBound {
        a,
        bound,
        holds: a > bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_at_unit_translation() {
        let cap = cap_from_c(7, -5.0).unwrap();
        assert!((cap.r - 0.75 * PI).abs() < 1e-15);
        assert!(cap_from_c(7, 0.0).is_err());
    }

    #[test]
    fn identities_hold() {
        for c in [-0.01, -1.0, -7.0] {
            let id = cap_identities(&cap_from_c(7, c).unwrap());
            assert!((id.lhs1 - id.rhs1).abs() < 1e-12 * id.rhs1.abs());
            assert!((id.lhs2 - id.rhs2).abs() < 1e-12 * id.rhs2.abs());
        }
    }

    #[test]
    fn trig_ratio_at_seven() {
        let r = 2.0;
        let t = trig_form(7, r);
        let (s, co) = r.sin_cos();
        assert!((t.lhs - (1.0 + 6.0 * 59.0 / 5.0 * co)).abs() < 1e-13);
        assert!((t.rhs - 64.0 / (5.0 * PI) * co * co * s.powi(5)).abs() < 1e-13);
    }

    #[test]
    fn c0_values() {
        let expected = [
            (7, 0.070_571_216_363_4),
            (8, 0.067_635_868_814_7),
            (12, 0.055_424_006_474_4),
        ];
        for (n, c0) in expected {
            let th = find_c0(n, 1e-12).unwrap();
            assert!((th.c0 - c0).abs() < 1e-11, "n={n}: {}", th.c0);
            assert!(th.grid_verified && !th.unbounded);
        }
    }

    #[test]
    fn holds_just_past_right_angle() {
        for n in 7..=12 {
            assert!(trig_form(n, FRAC_PI_2 + 1e-6).holds);
        }
    }
}
