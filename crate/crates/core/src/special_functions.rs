//! Gamma and Beta functions, unit-sphere volumes, and the trigonometric
//! integral family
//!
//! ```text
//! J(k, l) = ∫_{-arctan T_c}^{π/2} sin^k θ cos^l θ dθ
//! ```
//!
//! evaluated by the two reduction formulae down to closed-form base cases,
//! with an adaptive-quadrature audit route.

use std::collections::HashMap;
use std::f64::consts::PI;

use twofloat::TwoFloat;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
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

/// Largest argument for which Γ is finite in double precision.
const GAMMA_OVERFLOW: f64 = 171.6;

fn lanczos_sum(z: f64) -> f64 {
    let mut s = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        s += c / (z + i as f64);
    }
    s
}

/// Γ at integer and half-integer points by exact products; `None` elsewhere.
fn gamma_lattice(x: f64) -> Option<f64> {
    let twice = 2.0 * x;
    if twice.fract() != 0.0 || x > 170.0 {
        return None;
    }
    let (mut acc, mut z) = if x.fract() == 0.0 {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while z < x {
        acc *= z;
        z += 1.0;
    }
    Some(acc)
}

/// Γ(x) for x > 0.
///
/// Integer and half-integer arguments are evaluated exactly by recurrence; all
/// others use a g = 7, nine-term Lanczos approximation.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("gamma requires x > 0, got {x}")));
    }
    if let Some(v) = gamma_lattice(x) {
        return Ok(v);
    }
    if x >= GAMMA_OVERFLOW {
        return Ok(f64::INFINITY);
    }
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos series in its accurate range
        return Ok(gamma(x + 1.0)? / x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 100.0 {
        return Ok(gamma(x)?.ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// Euler Beta function Γ(α)Γ(β)/Γ(α+β) for α, β > 0.
pub fn beta(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::domain(format!(
            "beta requires positive arguments, got ({alpha}, {beta})"
        )));
    }
    if alpha + beta < 170.0 {
        // product order chosen so that beta(a, b) and beta(b, a) round identically
        let (lo, hi) = if alpha <= beta {
            (alpha, beta)
        } else {
            (beta, alpha)
        };
        return Ok(gamma(lo)? * (gamma(hi)? / gamma(alpha + beta)?));
    }
    Ok((ln_gamma(alpha)? + ln_gamma(beta)? - ln_gamma(alpha + beta)?).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaValue {
    pub alpha: f64,
    pub beta: f64,
    pub value: f64,
}

impl BetaValue {
    pub fn new(alpha: f64, b: f64) -> Result<Self> {
        Ok(Self {
            alpha,
            beta: b,
            value: beta(alpha, b)?,
        })
    }
}

/// Surface measure ω_k of the unit sphere S^k ⊂ ℝ^{k+1}.
pub fn sphere_volume(k: u32) -> f64 {
    let h = 0.5 * (k as f64 + 1.0);
    2.0 * PI.powf(h) / gamma(h).expect("h >= 1/2")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereVolume {
    pub k: u32,
    pub value: f64,
}

impl SphereVolume {
    pub fn new(k: u32) -> Self {
        Self {
            k,
            value: sphere_volume(k),
        }
    }
}

/// Memoised values of J(k, l) for one translation parameter `T_c`.
///
/// Entries are filled lazily by the reduction formulae; the table is owned by
/// its caller, so concurrent users each hold their own.
///
/// For odd k the l-reduction subtracts nearly equal quantities, losing a
/// factor of about 1 + T_c² per step, so the table is carried in
/// double-double precision and rounded on lookup.
#[derive(Debug, Clone)]
pub struct TrigIntegralTable {
    t_c: f64,
    // sine and cosine of the lower limit -atan(T_c)
    sin_lo: TwoFloat,
    cos_lo: TwoFloat,
    entries: HashMap<(u32, u32), TwoFloat>,
}

impl TrigIntegralTable {
    pub fn new(t_c: f64) -> Self {
        let t = TwoFloat::from(t_c);
        let a = TwoFloat::from(1.0) + t * t;
        let mut cos_lo = TwoFloat::from(a.hi().sqrt().recip());
        // Newton steps for a^{-1/2}; TwoFloat::sqrt falls short of full precision
        for _ in 0..2 {
            cos_lo += cos_lo * (1.0 - a * cos_lo * cos_lo) / 2.0;
        }
        let sin_lo = -t * cos_lo;
        let mut entries = HashMap::new();
        // π/2 + atan T, written to stay accurate for T < 0
        entries.insert((0, 0), TwoFloat::from(1.0f64.atan2(-t_c)));
        entries.insert((1, 0), cos_lo);
        entries.insert((0, 1), TwoFloat::from(1.0) - sin_lo);
        entries.insert((1, 1), cos_lo * cos_lo / 2.0);
        Self {
            t_c,
            sin_lo,
            cos_lo,
            entries,
        }
    }

    pub fn t_c(&self) -> f64 {
        self.t_c
    }

    /// Negative `T_c` (positive boundary constant) lies outside the range the
    /// reduction was derived for; values remain well defined.
    pub fn is_extrapolated(&self) -> bool {
        self.t_c < 0.0
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Boundary term (-T_c)^{k+1} / (k+l+2) / (1+T_c²)^{(k+l+2)/2} of the reductions.
    fn boundary_term(&self, k: u32, l: u32) -> TwoFloat {
        self.sin_lo.powi(k as i32 + 1) * self.cos_lo.powi(l as i32 + 1) / (k + l + 2) as f64
    }

    fn get_extended(&mut self, k: u32, l: u32) -> TwoFloat {
        if let Some(&v) = self.entries.get(&(k, l)) {
            return v;
        }
        let v = if k >= 2 {
            // J(k, l) from J(k-2, l)
            let (k0, kl2) = (k - 2, (k + l) as f64);
            self.boundary_term(k0, l) + self.get_extended(k0, l) * (k0 + 1) as f64 / kl2
        } else {
            // J(k, l) from J(k, l-2); here l >= 2
            let (l0, kl2) = (l - 2, (k + l) as f64);
            self.get_extended(k, l0) * (l0 + 1) as f64 / kl2 - self.boundary_term(k, l0)
        };
        self.entries.insert((k, l), v);
        v
    }

    pub fn get(&mut self, k: u32, l: u32) -> f64 {
        self.get_extended(k, l).into()
    }

    /// Checked lookup for signed indices.
    pub fn try_get(&mut self, k: i64, l: i64) -> Result<f64> {
        if k < 0 || l < 0 {
            return Err(Error::domain(format!(
                "J({k}, {l}): indices must be non-negative"
            )));
        }
        Ok(self.get(k as u32, l as u32))
    }

    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.entries.iter().map(|(&key, &v)| (key, v.into()))
    }
}

/// J(k, l) at translation `t_c` via the reduction formulae.
pub fn j_integral(k: i64, l: i64, t_c: f64) -> Result<f64> {
    if !t_c.is_finite() {
        return Err(Error::domain("t_c must be finite"));
    }
    TrigIntegralTable::new(t_c).try_get(k, l)
}

/// J(k, l) by direct adaptive quadrature of sin^k θ cos^l θ.
pub fn j_integral_oracle(k: i64, l: i64, t_c: f64, quad: &QuadratureSpec) -> Result<f64> {
    if k < 0 || l < 0 {
        return Err(Error::domain(format!(
            "J({k}, {l}): indices must be non-negative"
        )));
    }
    // For odd k the integrand is odd, so the symmetric part of the range
    // contributes nothing and is dropped to avoid cancellation.
    let lo = if k % 2 == 1 {
        t_c.atan().abs()
    } else {
        -t_c.atan()
    };
    let (k, l) = (k as i32, l as i32);
    let r = integrate(
        |th: f64| th.sin().powi(k) * th.cos().powi(l),
        lo,
        0.5 * PI,
        quad,
    )?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert!(close(gamma(0.5).unwrap(), PI.sqrt(), 1e-15));
        assert!(close(gamma(3.5).unwrap(), 15.0 * PI.sqrt() / 8.0, 1e-15));
        // Lanczos branch
        assert!(close(gamma(0.3).unwrap(), 2.991_568_987_687_591, 1e-13));
        assert!(close(gamma(7.25).unwrap(), 1_155.381_013_919_989_7, 1e-13));
        assert!(close(gamma(2.2).unwrap(), 1.101_802_490_879_712_9, 1e-13));
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
    }

    #[test]
    fn lanczos_matches_lattice_neighbours() {
        // continuity across the exact/Lanczos switch
        for x in [3.0, 4.5, 10.0, 20.5] {
            let exact = gamma(x).unwrap();
            let nudged = gamma(x + 1e-9).unwrap();
            assert!(close(nudged, exact, 1e-7), "x = {x}");
        }
    }

    #[test]
    fn ln_gamma_large() {
        // ln Γ(200) = ln(199!)
        let direct: f64 = (1..200).map(|i| (i as f64).ln()).sum();
        assert!(close(ln_gamma(200.0).unwrap(), direct, 1e-13));
        assert!(close(ln_gamma(10.0).unwrap(), 362_880f64.ln(), 1e-15));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta(1.0, 1.0).unwrap(), 1.0);
        assert!(close(beta(0.5, 0.5).unwrap(), PI, 1e-15));
        let n = 7.0;
        let ratio = beta(4.0, 3.0).unwrap() / beta(5.0, 3.0).unwrap();
        assert!(close(ratio, 2.0 * n / (n + 1.0), 1e-14));
        assert!(beta(0.0, 1.0).is_err());
        assert!(beta(1.0, -2.0).is_err());
        assert_eq!(beta(2.3, 0.7).unwrap(), beta(0.7, 2.3).unwrap());
        // large arguments take the logarithmic branch
        let big = beta(100.0, 100.5).unwrap();
        assert!(big > 0.0 && big.is_finite());
    }

    #[test]
    fn sphere_volumes() {
        assert!(close(sphere_volume(1), 2.0 * PI, 1e-15));
        assert!(close(sphere_volume(2), 4.0 * PI, 1e-15));
        assert!(close(sphere_volume(3), 2.0 * PI * PI, 1e-15));
        assert!(close(sphere_volume(5), PI.powi(3), 1e-15));
        assert!(close(sphere_volume(0), 2.0, 1e-15));
        assert_eq!(SphereVolume::new(2).value, sphere_volume(2));
    }

    #[test]
    fn j_examples() {
        assert!(close(j_integral(0, 0, 0.0).unwrap(), 0.5 * PI, 1e-15));
        assert!(close(j_integral(2, 0, 0.0).unwrap(), 0.25 * PI, 1e-15));
        assert!(close(
            j_integral(0, 2, 1.0).unwrap(),
            0.25 + 3.0 * PI / 8.0,
            1e-15
        ));
        assert!(j_integral(-1, 0, 0.0).is_err());
        assert!(j_integral(0, -3, 1.0).is_err());
    }

    #[test]
    fn j_oracle_examples() {
        let q = QuadratureSpec::default();
        assert!(close(
            j_integral_oracle(0, 0, 1.0, &q).unwrap(),
            0.75 * PI,
            1e-13
        ));
        // Wallis: ∫_0^{π/2} sin^4 = 3π/16
        assert!(close(
            j_integral_oracle(4, 0, 0.0, &q).unwrap(),
            3.0 * PI / 16.0,
            1e-13
        ));
        assert!(close(j_integral_oracle(1, 1, 0.0, &q).unwrap(), 0.5, 1e-13));
    }

    #[test]
    fn base_cases_match_quadrature() {
        let q = QuadratureSpec::default();
        for t in [-1.5, 0.0, 0.3, 2.0, 7.0] {
            for (k, l) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let rec = j_integral(k, l, t).unwrap();
                let quad = j_integral_oracle(k, l, t, &q).unwrap();
                assert!(
                    (rec - quad).abs() < 1e-12 * (1.0 + quad.abs()),
                    "({k},{l}) t={t}"
                );
            }
        }
    }

    #[test]
    fn odd_k_survives_cancellation() {
        // J(1, l) = cos^{l+1}(lo) / (l+1) exactly
        for t in [0.5f64, 5.0, 20.0] {
            let c = (1.0 + t * t).sqrt().recip();
            let mut table = TrigIntegralTable::new(t);
            for l in 0..14u32 {
                let exact = c.powi(l as i32 + 1) / (l + 1) as f64;
                assert!(close(table.get(1, l), exact, 1e-14), "t={t} l={l}");
            }
        }
        let q = QuadratureSpec::default();
        let rec = j_integral(3, 9, 5.0).unwrap();
        assert!(close(rec, 8.146_772_881_766_54e-9, 1e-13));
        assert!(close(j_integral_oracle(3, 9, 5.0, &q).unwrap(), rec, 1e-11));
    }

    #[test]
    fn table_memoises_and_flags_extrapolation() {
        let mut table = TrigIntegralTable::new(0.5);
        let before = table.len();
        let v = table.get(6, 5);
        assert!(table.len() > before);
        assert_eq!(table.get(6, 5), v);
        assert!(!table.is_extrapolated());
        assert!(TrigIntegralTable::new(-0.1).is_extrapolated());
    }

    #[test]
    fn even_entries_positive() {
        for t in [0.0, 0.5, 3.0, 20.0] {
            let mut table = TrigIntegralTable::new(t);
            for k in (0..12).step_by(2) {
                for l in (0..12).step_by(2) {
                    assert!(table.get(k, l) > 0.0);
                }
            }
        }
    }
}
