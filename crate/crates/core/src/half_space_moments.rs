//! Moments of the bubble over the half-space ℝⁿ₊ and the constants built from them.
//!
//! Every moment has the form
//!
//! ```text
//! ∫_{ℝⁿ₊} |ȳ|^p · w(yⁿ) · (1 + |y − T_c e_n|²)^{−m} dy,   w(z) = z^k or (z − T_c)^k,
//! ```
//!
//! and is computed by integrating out ȳ in closed form (a Beta function) and
//! evaluating the remaining axial integral on `[0, ∞)` after the substitution
//! `yⁿ − T_c = tan θ`.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::montecarlo::{estimate, McEstimate, StudentT};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::special_functions::{beta, sphere_volume, TrigIntegralTable};

fn check_n(n: u32, min: u32) -> Result<()> {
    if n < min {
        return Err(Error::domain(format!("n must be >= {min}, got {n}")));
    }
    Ok(())
}

fn check_t(t_c: f64) -> Result<()> {
    if !t_c.is_finite() {
        return Err(Error::domain("t_c must be finite"));
    }
    Ok(())
}

fn binomial(k: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSpec {
    /// Tangential power, even.
    pub p: u32,
    /// Axial power.
    pub k: u32,
    /// Denominator exponent.
    pub m: f64,
    /// Axial factor `(yⁿ − T_c)^k` when set, `(yⁿ)^k` otherwise.
    pub centered: bool,
}

impl MomentSpec {
    pub fn new(p: u32, k: u32, m: f64, centered: bool) -> Result<Self> {
        if !p.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "tangential power p must be even, got {p}"
            )));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::domain(format!(
                "denominator exponent m must be positive, got {m}"
            )));
        }
        Ok(Self { p, k, m, centered })
    }

    fn tangential_half_dim(&self, n: u32) -> f64 {
        0.5 * (n as f64 - 1.0 + self.p as f64)
    }
}

/// Tangential reduction of a moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reduction {
    /// `(ω_{n−2}/2) · B((n−1+p)/2, m − (n−1+p)/2)`
    pub coefficient: f64,
    /// Exponent of `s = 1 + (yⁿ − T_c)²` left in the axial integrand.
    pub axial_weight_exponent: f64,
}

impl Reduction {
    /// Exponent `l` of cos θ in the axial integrand after `yⁿ − T_c = tan θ`,
    /// once `k` powers of cos θ have been absorbed into the axial factor.
    fn cos_exponent(&self, k: u32) -> f64 {
        -2.0 * self.axial_weight_exponent - 2.0 - k as f64
    }
}

/// Integrate out ȳ: `∫|ȳ|^p (s + |ȳ|²)^{−m} dȳ = coefficient · s^{axial_weight_exponent}`.
pub fn reduce_moment(spec: &MomentSpec, n: u32, t_c: f64) -> Result<Reduction> {
    check_n(n, 2)?;
    check_t(t_c)?;
    let h = spec.tangential_half_dim(n);
    if !(h < spec.m) {
        return Err(Error::domain(format!(
            "tangential integral diverges: need n - 1 + p < 2m (n = {n}, p = {}, m = {})",
            spec.p, spec.m
        )));
    }
    let e = h - spec.m;
    if !(spec.k as f64 + 2.0 * e < -1.0) {
        return Err(Error::domain(format!(
            "axial integral diverges: need k + n - 1 + p - 2m < -1 (n = {n}, p = {}, k = {}, m = {})",
            spec.p, spec.k, spec.m
        )));
    }
    let coefficient = 0.5 * sphere_volume(n - 2) * beta(h, spec.m - h)?;
    Ok(Reduction {
        coefficient,
        axial_weight_exponent: e,
    })
}

/// The remaining 1-D integral over `yⁿ ∈ [0, ∞)`, by adaptive quadrature in θ.
pub fn axial_integral(spec: &MomentSpec, n: u32, t_c: f64, quad: &QuadratureSpec) -> Result<f64> {
    let red = reduce_moment(spec, n, t_c)?;
    let l = red.cos_exponent(spec.k);
    let k = spec.k as i32;
    let centered = spec.centered;
    let f = move |th: f64| {
        let (s, c) = th.sin_cos();
        let w = if centered { s } else { t_c * c + s };
        w.powi(k) * c.powf(l)
    };
    Ok(integrate(f, -t_c.atan(), 0.5 * PI, quad)?.value)
}

/// Full moment: reduction coefficient times the quadrature axial integral.
pub fn moment(spec: &MomentSpec, n: u32, t_c: f64, quad: &QuadratureSpec) -> Result<f64> {
    let red = reduce_moment(spec, n, t_c)?;
    Ok(red.coefficient * axial_integral(spec, n, t_c, quad)?)
}

/// Full moment with the axial integral expressed through the J table.
///
/// Requires the cos exponent of the axial integrand to be a non-negative integer.
pub fn moment_exact(spec: &MomentSpec, n: u32, t_c: f64) -> Result<f64> {
    let red = reduce_moment(spec, n, t_c)?;
    let l = red.cos_exponent(spec.k);
    if l < 0.0 || l.fract() != 0.0 {
        return Err(Error::domain(format!(
            "axial integrand has cos exponent {l}, not a non-negative integer"
        )));
    }
    let l = l as u32;
    let mut table = TrigIntegralTable::new(t_c);
    let axial = if spec.centered {
        table.get(spec.k, l)
    } else {
        (0..=spec.k)
            .map(|j| {
                binomial(spec.k, j) * t_c.powi((spec.k - j) as i32) * table.get(j, l + spec.k - j)
            })
            .sum()
    };
    Ok(red.coefficient * axial)
}

fn a_spec(n: u32) -> MomentSpec {
    MomentSpec {
        p: 0,
        k: 0,
        m: n as f64,
        centered: true,
    }
}

/// `A = ∫_{ℝⁿ₊} W_ε^{2n/(n−2)} dy`, evaluated at ε = 1.
pub fn compute_a(n: u32, t_c: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_n(n, 3)?;
    moment(&a_spec(n), n, t_c, quad)
}

/// `A` through the J table: `(ω_{n−2}/2) B((n−1)/2, (n+1)/2) J(0, n−1)`.
pub fn a_closed_form(n: u32, t_c: f64) -> Result<f64> {
    check_n(n, 3)?;
    moment_exact(&a_spec(n), n, t_c)
}

/// `∫_{ℝⁿ₊} W_ε^{2n/(n−2)} dy` at an arbitrary scale ε.
///
/// Uses the unscaled substitution `yⁿ − T_c ε = tan θ`, so the ε-dependence is
/// not removed analytically.
pub fn compute_a_at_scale(n: u32, t_c: f64, eps: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_n(n, 3)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let red = reduce_moment(&a_spec(n), n, t_c)?;
    let e = red.axial_weight_exponent;
    let e2 = eps * eps;
    // (ε² + tan²θ)^e sec²θ = (ε² cos²θ + sin²θ)^e cos^{−2e−2}θ
    let f = |th: f64| {
        let (s, c) = th.sin_cos();
        (e2 * c * c + s * s).powf(e) * c.powf(-2.0 * e - 2.0)
    };
    let axial = integrate(f, -(t_c * eps).atan(), 0.5 * PI, quad)?.value;
    Ok(eps.powi(n as i32) * red.coefficient * axial)
}

/// `B = ∫_{ℝ^{n−1}} W_ε(ȳ, 0)^{2(n−1)/(n−2)} dȳ` in closed form:
/// `(ω_{n−2}/2) B((n−1)/2, (n−1)/2) (1 + T_c²)^{−(n−1)/2}`.
pub fn b_closed_form(n: u32, t_c: f64) -> Result<f64> {
    check_n(n, 3)?;
    check_t(t_c)?;
    let h = 0.5 * (n as f64 - 1.0);
    Ok(0.5 * sphere_volume(n - 2) * beta(h, h)? * (1.0 + t_c * t_c).powf(-h))
}

/// `B` by radial quadrature, `ω_{n−2} ∫_0^∞ ρ^{n−2} (1 + T_c² + ρ²)^{1−n} dρ`,
/// mapped to `[0, 1)` by `ρ = u/(1−u)`.
pub fn b_by_quadrature(n: u32, t_c: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_n(n, 3)?;
    check_t(t_c)?;
    let a2 = 1.0 + t_c * t_c;
    let nf = n as f64;
    let f = |u: f64| {
        let v = 1.0 - u;
        // ρ^{n−2}(a² + ρ²)^{1−n} dρ with ρ = u/v, dρ = du/v²
        u.powf(nf - 2.0) * (a2 * v * v + u * u).powf(1.0 - nf) * v.powf(nf - 2.0)
    };
    Ok(sphere_volume(n - 2) * integrate(f, 0.0, 1.0, quad)?.value)
}

/// `B` from the closed form, audited against radial quadrature.
pub fn compute_b(n: u32, t_c: f64, quad: &QuadratureSpec) -> Result<f64> {
    let closed = b_closed_form(n, t_c)?;
    let audit = b_by_quadrature(n, t_c, quad)?;
    let err = (closed - audit).abs();
    if err > 100.0 * quad.rel_tol * closed + quad.abs_tol {
        return Err(Error::Numeric {
            message: format!("closed form of B disagrees with quadrature at n = {n}, t_c = {t_c}"),
            achieved: err / closed,
        });
    }
    Ok(closed)
}

/// `∫_{ℝⁿ₊} |∇W_ε|² dy` at ε = 1, as `(n−2)² ∫ |y − T_c e_n|² (1 + |y − T_c e_n|²)^{−n}`.
pub fn grad_energy(n: u32, t_c: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_n(n, 3)?;
    let m = n as f64;
    let tangential = moment(
        &MomentSpec {
            p: 2,
            k: 0,
            m,
            centered: true,
        },
        n,
        t_c,
        quad,
    )?;
    let axial = moment(
        &MomentSpec {
            p: 0,
            k: 2,
            m,
            centered: true,
        },
        n,
        t_c,
        quad,
    )?;
    Ok((n as f64 - 2.0).powi(2) * (tangential + axial))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScValues {
    /// `8(n−1)A + 4cB/(n−2)`
    pub closed: f64,
    /// `(4/(n−2)) ∫|∇W_ε|² + 4(n−2)A`
    pub integral: f64,
}

/// The energy level `S_c` by its closed form and by integrating the gradient.
pub fn compute_sc(n: u32, c: f64, quad: &QuadratureSpec) -> Result<ScValues> {
    check_n(n, 3)?;
    let nf = n as f64;
    let t_c = -c / (nf - 2.0);
    let a = compute_a(n, t_c, quad)?;
    let b = compute_b(n, t_c, quad)?;
    let grad = grad_energy(n, t_c, quad)?;
    Ok(ScValues {
        closed: 8.0 * (nf - 1.0) * a + 4.0 * c * b / (nf - 2.0),
        integral: 4.0 / (nf - 2.0) * grad + 4.0 * (nf - 2.0) * a,
    })
}

/// `A`, `B` and `S_c` for one `(n, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyConstants {
    pub n: u32,
    pub t_c: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "S_c")]
    pub s_c: f64,
}

impl EnergyConstants {
    pub fn compute(n: u32, c: f64, quad: &QuadratureSpec) -> Result<Self> {
        check_n(n, 3)?;
        let t_c = -c / (n as f64 - 2.0);
        let a = compute_a(n, t_c, quad)?;
        let b = compute_b(n, t_c, quad)?;
        Ok(Self {
            n,
            t_c,
            a,
            b,
            s_c: 8.0 * (n as f64 - 1.0) * a + 4.0 * c * b / (n as f64 - 2.0),
        })
    }

    pub fn c(&self) -> f64 {
        -(self.n as f64 - 2.0) * self.t_c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thetas {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
}

pub fn theta_specs(n: u32) -> [MomentSpec; 4] {
    let m = n as f64;
    [
        MomentSpec {
            p: 4,
            k: 2,
            m,
            centered: false,
        },
        MomentSpec {
            p: 2,
            k: 4,
            m,
            centered: false,
        },
        MomentSpec {
            p: 0,
            k: 2,
            m: m - 2.0,
            centered: false,
        },
        MomentSpec {
            p: 2,
            k: 0,
            m: m - 2.0,
            centered: false,
        },
    ]
}

/// The four curvature moments Θ₁..Θ₄.
pub fn compute_thetas(n: u32, t_c: f64, quad: &QuadratureSpec) -> Result<Thetas> {
    check_n(n, 7)?;
    let [s1, s2, s3, s4] = theta_specs(n);
    Ok(Thetas {
        theta1: moment(&s1, n, t_c, quad)?,
        theta2: moment(&s2, n, t_c, quad)?,
        theta3: moment(&s3, n, t_c, quad)?,
        theta4: moment(&s4, n, t_c, quad)?,
    })
}

/// The three axial families `I_j(k) = ∫_0^∞ (z − T_c)^k (1 + (z − T_c)²)^{−a_j} dz`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IKind {
    /// `a = (n−3)/2`, `k ≤ 2`
    I0,
    /// `a = (n−1)/2`, `k ≤ 4`
    I1,
    /// `a = (n+1)/2`, `k ≤ 4`
    I2,
}

impl IKind {
    fn max_k(self) -> u32 {
        match self {
            IKind::I0 => 2,
            IKind::I1 | IKind::I2 => 4,
        }
    }

    /// Twice the denominator exponent, minus n.
    fn offset(self) -> i64 {
        match self {
            IKind::I0 => -3,
            IKind::I1 => -1,
            IKind::I2 => 1,
        }
    }

    fn check(self, n: u32, t_c: f64, k: u32) -> Result<()> {
        check_n(n, 7)?;
        check_t(t_c)?;
        if t_c < 0.0 {
            return Err(Error::domain(format!("t_c must be >= 0, got {t_c}")));
        }
        if k > self.max_k() {
            return Err(Error::domain(format!(
                "{self:?}(k) is defined for k <= {}, got k = {k}",
                self.max_k()
            )));
        }
        Ok(())
    }
}

/// `I_j(k) = J(k, n + offset − 2 − k)`, read from `table`.
pub fn i_value(kind: IKind, n: u32, k: u32, table: &mut TrigIntegralTable) -> Result<f64> {
    kind.check(n, table.t_c(), k)?;
    table.try_get(k as i64, n as i64 + kind.offset() - 2 - k as i64)
}

pub fn i0(n: u32, t_c: f64, k: u32) -> Result<f64> {
    i_value(IKind::I0, n, k, &mut TrigIntegralTable::new(t_c))
}

pub fn i1(n: u32, t_c: f64, k: u32) -> Result<f64> {
    i_value(IKind::I1, n, k, &mut TrigIntegralTable::new(t_c))
}

pub fn i2(n: u32, t_c: f64, k: u32) -> Result<f64> {
    i_value(IKind::I2, n, k, &mut TrigIntegralTable::new(t_c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IIntegrals {
    /// Absent for `k > 2`.
    pub i0: Option<f64>,
    pub i1: f64,
    pub i2: f64,
}

pub fn i_integrals(n: u32, t_c: f64, k: u32) -> Result<IIntegrals> {
    let mut table = TrigIntegralTable::new(t_c);
    Ok(IIntegrals {
        i1: i_value(IKind::I1, n, k, &mut table)?,
        i2: i_value(IKind::I2, n, k, &mut table)?,
        i0: if k <= IKind::I0.max_k() {
            Some(i_value(IKind::I0, n, k, &mut table)?)
        } else {
            None
        },
    })
}

/// `I_j(k)` by direct quadrature of the rational integrand, with `z = u/(1−u)`.
pub fn i_oracle(kind: IKind, n: u32, t_c: f64, k: u32, quad: &QuadratureSpec) -> Result<f64> {
    kind.check(n, t_c, k)?;
    let a = 0.5 * (n as i64 + kind.offset()) as f64;
    let k = k as i32;
    let f = |u: f64| {
        let v = 1.0 - u;
        let x = u / v - t_c;
        x.powi(k) * (1.0 + x * x).powf(-a) / (v * v)
    };
    Ok(integrate(f, 0.0, 1.0, quad)?.value)
}

/// Monte-Carlo estimate of the tangential integral `∫_{ℝ^{n−1}} |ȳ|^p (1 + |ȳ|²)^{−m} dȳ`,
/// importance-sampled from a Student-t proposal with matching tail.
pub fn mc_tangential_moment(n: u32, p: u32, m: f64, quad: &QuadratureSpec) -> Result<McEstimate> {
    check_n(n, 2)?;
    let d = n as usize - 1;
    let nu = 2.0 * m - p as f64 - d as f64;
    if !(nu > 0.0) {
        return Err(Error::domain(format!(
            "tangential integral diverges: need n - 1 + p < 2m (n = {n}, p = {p}, m = {m})"
        )));
    }
    let proposal = StudentT::new(d, nu);
    let half_p = p as i32 / 2;
    let [est] = estimate(quad.mc_samples, quad.seed, |rng, out: &mut [f64; 1]| {
        let mut y = vec![0.0; d];
        let r2 = proposal.sample(rng, &mut y);
        out[0] = r2.powi(half_p) * (1.0 + r2).powf(-m) / proposal.density(r2);
    });
    Ok(est)
}

/// Monte-Carlo estimate of `A` over the half-space, proposal centred at `T_c e_n`.
pub fn mc_compute_a(n: u32, t_c: f64, quad: &QuadratureSpec) -> Result<McEstimate> {
    check_n(n, 3)?;
    check_t(t_c)?;
    let d = n as usize;
    let proposal = StudentT::new(d, n as f64);
    let m = n as f64;
    let [est] = estimate(quad.mc_samples, quad.seed, |rng, out: &mut [f64; 1]| {
        let mut y = vec![0.0; d];
        let r2 = proposal.sample(rng, &mut y);
        // a random sign keeps the draw count per sample fixed
        let y_n = t_c
            + if rng.random::<bool>() {
                y[d - 1]
            } else {
                -y[d - 1]
            };
        out[0] = if y_n >= 0.0 {
            (1.0 + r2).powf(-m) / proposal.density(r2)
        } else {
            0.0
        };
    });
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn a_in_three_dimensions() {
        let q = QuadratureSpec::default();
        let a = compute_a(3, 0.0, &q).unwrap();
        assert!(close(a, PI * PI / 8.0, 1e-12), "{a}");
        assert!(close(a_closed_form(3, 0.0).unwrap(), PI * PI / 8.0, 1e-14));
    }

    #[test]
    fn b_in_three_dimensions() {
        let q = QuadratureSpec::default();
        assert!(close(compute_b(3, 0.0, &q).unwrap(), PI, 1e-14));
    }

    #[test]
    fn reduction_coefficients() {
        let w5 = sphere_volume(5);
        let r = reduce_moment(&MomentSpec::new(4, 0, 8.0, true).unwrap(), 7, 0.0).unwrap();
        assert!(close(
            r.coefficient,
            0.5 * w5 * beta(5.0, 3.0).unwrap(),
            1e-14
        ));
        let r = reduce_moment(&MomentSpec::new(2, 0, 5.0, false).unwrap(), 7, 0.0).unwrap();
        assert!(close(
            r.coefficient,
            0.5 * w5 * beta(4.0, 1.0).unwrap(),
            1e-14
        ));
        assert_eq!(r.axial_weight_exponent, -1.0);
    }

    #[test]
    fn divergent_moments_rejected() {
        let e = reduce_moment(&MomentSpec::new(2, 0, 4.0, false).unwrap(), 6, 0.0).unwrap_err();
        assert!(matches!(e, Error::Domain(ref s) if s.contains("axial")));
        let e = reduce_moment(&MomentSpec::new(4, 0, 3.0, false).unwrap(), 7, 0.0).unwrap_err();
        assert!(matches!(e, Error::Domain(ref s) if s.contains("tangential")));
        assert!(MomentSpec::new(3, 0, 4.0, false).is_err());
    }

    #[test]
    fn quadrature_and_table_agree() {
        let q = QuadratureSpec::default();
        for t in [0.0, 0.7, 2.0, -0.5] {
            for spec in theta_specs(8) {
                let a = moment(&spec, 8, t, &q).unwrap();
                let b = moment_exact(&spec, 8, t).unwrap();
                assert!(close(a, b, 1e-10), "{spec:?} {t}: {a} {b}");
            }
        }
    }

    #[test]
    fn theta_ratio() {
        let q = QuadratureSpec::default();
        for t in [0.0, 1.0, 2.0] {
            let th = compute_thetas(7, t, &q).unwrap();
            assert!(close(th.theta1 / th.theta3, 8.0 / 20.0, 1e-9));
        }
    }

    #[test]
    fn gradient_identity() {
        let q = QuadratureSpec::default();
        for n in [3, 5, 8] {
            for c in [-1.0, 0.0, 2.0] {
                let t = -c / (n as f64 - 2.0);
                let g = grad_energy(n, t, &q).unwrap();
                let a = compute_a(n, t, &q).unwrap();
                let b = compute_b(n, t, &q).unwrap();
                let rhs = (n * (n - 2)) as f64 * a + c * b;
                assert!(close(g, rhs, 1e-9), "n={n} c={c}: {g} {rhs}");
            }
        }
    }

    #[test]
    fn i_table_examples() {
        assert!(close(i0(7, 0.0, 0).unwrap(), PI / 4.0, 1e-15));
        assert!(i0(7, 0.0, 3).is_err());
        assert!(i1(7, -1.0, 0).is_err());
        let all = i_integrals(7, 0.0, 3).unwrap();
        assert!(all.i0.is_none());
        let q = QuadratureSpec::default();
        let v = i_oracle(IKind::I1, 8, 1.0, 2, &q).unwrap();
        assert!(close(i1(8, 1.0, 2).unwrap(), v, 1e-10));
    }
}
