//! The 4×4 quadratic form 𝒬(n, T_c) governing the fourth-order energy term,
//! its congruence-reduced form 𝒬̄ = ((n−2)(n+1)/(8n)) S₂ᵀS₁ᵀ 𝒬 S₁S₂, and the
//! vector κ with fourth entry 1 for which κ𝒬κᵀ < 0.
//!
//! Matrices are indexed from 0 in code; the doc comments use the 1-based
//! labels 𝒬₁₁ … 𝒬₄₄.

use nalgebra::{Matrix4, RowVector4};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::half_space_moments::{i_value, IKind};
use crate::special_functions::{beta, sphere_volume, TrigIntegralTable};

fn check(n: u32, t_c: f64) -> Result<()> {
    if n < 7 {
        return Err(Error::domain(format!(
            "J index n-7 negative: n must be >= 7, got {n}"
        )));
    }
    if !(t_c >= 0.0 && t_c.is_finite()) {
        return Err(Error::domain(format!(
            "t_c must be finite and >= 0, got {t_c}"
        )));
    }
    Ok(())
}

fn symmetric(upper: [[f64; 4]; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| if i <= j { upper[i][j] } else { upper[j][i] })
}

/// 𝒬 in both displayed forms, together with its congruence reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct QForm {
    pub n: u32,
    pub t_c: f64,
    /// Entries written through `I₀, I₁, I₂` and powers of `T_c`.
    pub form1: Matrix4<f64>,
    /// Entries written through `J` only.
    pub form2: Matrix4<f64>,
    /// 𝒬̄ from its explicit entry list.
    pub q_bar: Matrix4<f64>,
}

impl QForm {
    /// Largest entrywise difference between the two forms of 𝒬.
    pub fn form_gap(&self) -> f64 {
        (self.form1 - self.form2).amax()
    }
}

fn form1(n: u32, t: f64, table: &mut TrigIntegralTable) -> Result<Matrix4<f64>> {
    let nf = n as f64;
    let mut i0 = [0.0; 3];
    let mut i1 = [0.0; 5];
    let mut i2 = [0.0; 5];
    for k in 0..5u32 {
        if k < 3 {
            i0[k as usize] = i_value(IKind::I0, n, k, table)?;
        }
        i1[k as usize] = i_value(IKind::I1, n, k, table)?;
        i2[k as usize] = i_value(IKind::I2, n, k, table)?;
    }
    let pre = 4.0 * nf / ((nf - 2.0) * (nf + 1.0));
    let off = -4.0 * nf / (nf + 1.0);
    let den = (1.0 + t * t).powf(0.5 * (nf - 1.0));
    let t2 = t * t;
    let q11 = pre
        * ((nf - 4.0) * i1[4] - (nf - 1.0) * i2[4] + 8.0 / (nf - 3.0) * i0[2] + t.powi(5) / den);
    let q12 = pre
        * ((nf - 3.0) * i1[3] - (nf - 1.0) * i2[3] + 4.0 / (nf - 3.0) * i0[1] - t.powi(4) / den);
    let q13 = pre * ((nf - 2.0) * i1[2] - (nf - 1.0) * i2[2] + t.powi(3) / den);
    let q14 = off * (i1[4] + 2.0 * t * i1[3] + t2 * i1[2]);
    let q22 = pre
        * ((nf - 2.0) * i1[2] - (nf - 1.0) * i2[2] + 2.0 / (nf - 3.0) * i0[0] + t.powi(3) / den);
    let q23 = pre * ((nf - 1.0) * i1[1] - (nf - 1.0) * i2[1] - t2 / den);
    let q24 = off * (i1[3] + 2.0 * t * i1[2] + t2 * i1[1]);
    let q33 = pre * (nf * i1[0] - (nf - 1.0) * i2[0] + t / den);
    let q34 = off * (i1[2] + 2.0 * t * i1[1] + t2 * i1[0]);
    let q44 = (-2.0 / (nf - 3.0) * (i0[2] + 2.0 * t * i0[1] + t2 * i0[0])
        + (i1[4] + 4.0 * t * i1[3] + 6.0 * t2 * i1[2] + 4.0 * t2 * t * i1[1] + t2 * t2 * i1[0]))
        * 2.0
        * nf
        * (nf - 2.0)
        / (nf + 1.0);
    Ok(symmetric([
        [q11, q12, q13, q14],
        [0.0, q22, q23, q24],
        [0.0, 0.0, q33, q34],
        [0.0, 0.0, 0.0, q44],
    ]))
}

/// `J(k, n − m)` for the small offsets appearing in 𝒬.
fn jn(table: &mut TrigIntegralTable, n: u32, k: u32, m: u32) -> f64 {
    table.get(k, n - m)
}

fn form2(n: u32, t: f64, table: &mut TrigIntegralTable) -> Matrix4<f64> {
    let nf = n as f64;
    let mut j = |k: u32, m: u32| jn(table, n, k, m);
    let pre = 8.0 * nf / ((nf - 2.0) * (nf + 1.0));
    let off = -4.0 * nf / (nf + 1.0);
    let r = 1.0 / (nf - 3.0);
    let t2 = t * t;
    let q11 = pre * (j(4, 7) + 4.0 * r * j(2, 7));
    let q12 = pre * (j(3, 6) + 2.0 * r * j(1, 6));
    let q13 = pre * j(2, 5);
    let q14 = off * (j(4, 7) + 2.0 * t * j(3, 6) + t2 * j(2, 5));
    let q22 = pre * (j(2, 5) + r * j(0, 5));
    let q23 = pre * j(1, 4);
    let q24 = off * (j(3, 6) + 2.0 * t * j(2, 5) + t2 * j(1, 4));
    let q33 = pre * j(0, 3);
    let q34 = off * (j(2, 5) + 2.0 * t * j(1, 4) + t2 * j(0, 3));
    let q44 = (-2.0 * r * (j(2, 7) + 2.0 * t * j(1, 6) + t2 * j(0, 5))
        + (j(4, 7) + 4.0 * t * j(3, 6) + 6.0 * t2 * j(2, 5))
        + 4.0 * t2 * t * j(1, 4)
        + t2 * t2 * j(0, 3))
        * 2.0
        * nf
        * (nf - 2.0)
        / (nf + 1.0);
    symmetric([
        [q11, q12, q13, q14],
        [0.0, q22, q23, q24],
        [0.0, 0.0, q33, q34],
        [0.0, 0.0, 0.0, q44],
    ])
}

/// 𝒬̄ from its explicit entry list.
pub fn q_bar_explicit(n: u32, t: f64) -> Result<Matrix4<f64>> {
    check(n, t)?;
    let mut table = TrigIntegralTable::new(t);
    let mut j = |k: u32, m: u32| jn(&mut table, n, k, m);
    let r = 1.0 / (n as f64 - 3.0);
    let q11 = j(4, 7) + 4.0 * r * j(2, 7);
    let q12 = j(3, 6) + 2.0 * r * j(1, 6);
    let q13 = j(2, 5);
    let q14 = -4.0 * r * j(2, 7) - 4.0 * t * r * j(1, 6);
    let q22 = j(2, 5) + r * j(0, 5);
    let q23 = j(1, 4);
    let q24 = -2.0 * r * j(1, 6) - 2.0 * t * r * j(0, 5);
    let q33 = j(0, 3);
    let q44 = 2.0 * r * (j(2, 7) + 2.0 * t * j(1, 6) + t * t * j(0, 5));
    Ok(symmetric([
        [q11, q12, q13, q14],
        [0.0, q22, q23, q24],
        [0.0, 0.0, q33, 0.0],
        [0.0, 0.0, 0.0, q44],
    ]))
}

pub fn build_q(n: u32, t_c: f64) -> Result<QForm> {
    check(n, t_c)?;
    let mut table = TrigIntegralTable::new(t_c);
    Ok(QForm {
        n,
        t_c,
        form1: form1(n, t_c, &mut table)?,
        form2: form2(n, t_c, &mut table),
        q_bar: q_bar_explicit(n, t_c)?,
    })
}

/// `S₁ = diag{1, 1, 1, −2/(n−2)}`.
pub fn s1(n: u32) -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(
        1.0,
        1.0,
        1.0,
        -2.0 / (n as f64 - 2.0),
    ))
}

/// `S₂`: identity with last column `(−1, −2T_c, −T_c², 1)ᵀ`.
pub fn s2(t_c: f64) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m[(0, 3)] = -1.0;
    m[(1, 3)] = -2.0 * t_c;
    m[(2, 3)] = -t_c * t_c;
    m
}

/// `((n−2)(n+1)/(8n)) S₂ᵀS₁ᵀ 𝒬 S₁S₂`, using the first form of 𝒬.
pub fn congruence_transform(q: &QForm) -> Matrix4<f64> {
    let nf = q.n as f64;
    let s = s1(q.n) * s2(q.t_c);
    s.transpose() * q.form1 * s * ((nf - 2.0) * (nf + 1.0) / (8.0 * nf))
}

/// `𝒱 = (a, T_c, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestVector {
    pub a: f64,
    pub t_c: f64,
}

impl TestVector {
    pub fn new(a: f64, t_c: f64) -> Self {
        Self { a, t_c }
    }

    pub fn components(&self) -> RowVector4<f64> {
        RowVector4::new(self.a, self.t_c, 0.0, 1.0)
    }

    pub fn is_admissible(&self) -> bool {
        is_admissible(self.a)
    }
}

/// `7a² − 8a + 2 < 0`, i.e. `a ∈ ((4−√2)/7, (4+√2)/7)`.
pub fn is_admissible(a: f64) -> bool {
    7.0 * a * a - 8.0 * a + 2.0 < 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticValue {
    pub via_matrix: f64,
    pub via_closed_form: f64,
}

/// `𝒱 J-closed form: −((a−1)²/(n−3)) T_c³/(1+T_c²)^{(n−3)/2} + ((7a²−8a+2)/(n−3)) J(2, n−7)`.
pub fn quadratic_closed_form(n: u32, t_c: f64, a: f64) -> Result<f64> {
    check(n, t_c)?;
    let nf = n as f64;
    let j = TrigIntegralTable::new(t_c).get(2, n - 7);
    Ok(
        -(a - 1.0).powi(2) / (nf - 3.0) * t_c.powi(3) / (1.0 + t_c * t_c).powf(0.5 * (nf - 3.0))
            + (7.0 * a * a - 8.0 * a + 2.0) / (nf - 3.0) * j,
    )
}

/// `𝒱 𝒬̄ 𝒱ᵀ` from the explicit 𝒬̄ and from its closed form.
pub fn quadratic_value(q: &QForm, v: &TestVector) -> Result<QuadraticValue> {
    if v.t_c != q.t_c {
        return Err(Error::domain(format!(
            "test vector has t_c = {} but the form was built at t_c = {}",
            v.t_c, q.t_c
        )));
    }
    let c = v.components();
    Ok(QuadraticValue {
        via_matrix: (c * q.q_bar * c.transpose())[(0, 0)],
        via_closed_form: quadratic_closed_form(q.n, q.t_c, v.a)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaVector {
    pub kappa2: f64,
    pub kappa1: f64,
    pub kappa0: f64,
    pub last: f64,
}

impl KappaVector {
    pub fn as_row(&self) -> RowVector4<f64> {
        RowVector4::new(self.kappa2, self.kappa1, self.kappa0, self.last)
    }

    /// `(−(n−2)(a−1)/2, (n−2)T_c/2, (n−2)T_c²/2, 1)`.
    pub fn closed_form(n: u32, t_c: f64, a: f64) -> Self {
        let h = 0.5 * (n as f64 - 2.0);
        Self {
            kappa2: -h * (a - 1.0),
            kappa1: h * t_c,
            kappa0: h * t_c * t_c,
            last: 1.0,
        }
    }
}

/// `κ = −((n−2)/2) 𝒱 S₂ᵀ S₁ᵀ` for any `a`.
pub fn build_kappa_unchecked(n: u32, t_c: f64, a: f64) -> Result<KappaVector> {
    check(n, t_c)?;
    let row = TestVector::new(a, t_c).components()
        * s2(t_c).transpose()
        * s1(n).transpose()
        * (-(n as f64 - 2.0) / 2.0);
    let kappa = KappaVector {
        kappa2: row[0],
        kappa1: row[1],
        kappa0: row[2],
        last: row[3],
    };
    if kappa.last != 1.0 {
        return Err(Error::Numeric {
            message: format!("fourth component of kappa is {}, not 1", kappa.last),
            achieved: (kappa.last - 1.0).abs(),
        });
    }
    Ok(kappa)
}

/// κ for an admissible `a`.
pub fn build_kappa(n: u32, t_c: f64, a: f64) -> Result<KappaVector> {
    if !is_admissible(a) {
        return Err(Error::domain(format!(
            "a = {a} is not admissible: need 7a^2 - 8a + 2 < 0"
        )));
    }
    build_kappa_unchecked(n, t_c, a)
}

/// `κ 𝒬 κᵀ` with the first form of 𝒬.
pub fn kappa_q_kappa(q: &QForm, kappa: &KappaVector) -> f64 {
    let k = kappa.as_row();
    (k * q.form1 * k.transpose())[(0, 0)]
}

/// `Σ|κᵢ𝒬ᵢⱼκⱼ|`; κ𝒬κᵀ is small against this for large `T_c`.
pub fn kappa_q_kappa_magnitude(q: &QForm, kappa: &KappaVector) -> f64 {
    let k = kappa.as_row();
    let mut sum = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            sum += (k[i] * q.form1[(i, j)] * k[j]).abs();
        }
    }
    sum
}

/// Ratio `κ𝒬κᵀ / 𝒱𝒬̄𝒱ᵀ = 2n(n−2)/(n+1)` implied by the congruence.
pub fn congruence_scale(n: u32) -> f64 {
    let nf = n as f64;
    2.0 * nf * (nf - 2.0) / (nf + 1.0)
}

/// The positive factor `ω_{n−2} B((n+3)/2, (n−1)/2)` multiplying κ𝒬κᵀ in the energy.
pub fn positivity_prefactor(n: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::domain(format!("n must be >= 3, got {n}")));
    }
    let nf = n as f64;
    Ok(sphere_volume(n - 2) * beta(0.5 * (nf + 3.0), 0.5 * (nf - 1.0))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificatePoint {
    pub n: u32,
    pub t_c: f64,
    /// κ𝒬κᵀ
    pub value: f64,
    /// `2n(n−2)/(n+1) · 𝒱𝒬̄𝒱ᵀ` from the explicit 𝒬̄
    pub via_q_bar: f64,
    /// the same from the closed form of 𝒱𝒬̄𝒱ᵀ
    pub via_closed_form: f64,
    /// `Σ|κᵢ𝒬ᵢⱼκⱼ|`, the scale against which κ𝒬κᵀ cancels
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub a: f64,
    pub points: Vec<CertificatePoint>,
    /// Largest (least negative) κ𝒬κᵀ over the grid.
    pub max_value: f64,
    /// Largest relative gap between the closed form of 𝒱𝒬̄𝒱ᵀ and the matrix route.
    pub max_route_gap: f64,
    /// Largest gap between κ𝒬κᵀ and the 𝒬̄ route, relative to `magnitude`.
    pub max_kappa_gap: f64,
}

const ROUTE_TOL: f64 = 1e-10;
const KAPPA_TOL: f64 = 1e-13;

/// Evaluate κ𝒬κᵀ over `n_range × grid` evenly spaced `T_c ∈ [t_lo, t_hi]` and
/// require strict negativity at every point.
pub fn negativity_certificate(
    n_range: std::ops::RangeInclusive<u32>,
    t_range: (f64, f64),
    a: f64,
    grid: usize,
) -> Result<Certificate> {
    let (t_lo, t_hi) = t_range;
    if grid == 0 || !(t_lo >= 0.0 && t_hi >= t_lo) {
        return Err(Error::domain("grid must be positive and 0 <= t_lo <= t_hi"));
    }
    let step = if grid > 1 {
        (t_hi - t_lo) / (grid - 1) as f64
    } else {
        0.0
    };
    let tasks: Vec<(u32, f64)> = n_range
        .flat_map(|n| (0..grid).map(move |i| (n, t_lo + step * i as f64)))
        .collect();
    let points: Vec<CertificatePoint> = tasks
        .par_iter()
        .map(|&(n, t_c)| {
            let q = build_q(n, t_c)?;
            let kappa = build_kappa_unchecked(n, t_c, a)?;
            let v = quadratic_value(&q, &TestVector::new(a, t_c))?;
            Ok(CertificatePoint {
                n,
                t_c,
                value: kappa_q_kappa(&q, &kappa),
                via_q_bar: congruence_scale(n) * v.via_matrix,
                via_closed_form: congruence_scale(n) * v.via_closed_form,
                magnitude: kappa_q_kappa_magnitude(&q, &kappa),
            })
        })
        .collect::<Result<_>>()?;

    let mut max_value = f64::NEG_INFINITY;
    let mut max_route_gap: f64 = 0.0;
    let mut max_kappa_gap: f64 = 0.0;
    for p in &points {
        let gap = (p.via_closed_form - p.via_q_bar).abs()
            / p.via_closed_form.abs().max(p.via_q_bar.abs()).max(1e-300);
        let kappa_gap = (p.value - p.via_q_bar).abs() / p.magnitude.max(1e-300);
        for (what, gap, tol) in [
            ("closed-form and matrix", gap, ROUTE_TOL),
            ("direct and reduced", kappa_gap, KAPPA_TOL),
        ] {
            if !(gap <= tol) {
                return Err(Error::Numeric {
                    message: format!("{what} routes disagree at n = {}, t_c = {}", p.n, p.t_c),
                    achieved: gap,
                });
            }
        }
        max_route_gap = max_route_gap.max(gap);
        max_kappa_gap = max_kappa_gap.max(kappa_gap);
        if !(p.value < 0.0) {
            return Err(Error::Certificate {
                n: p.n,
                t_c: p.t_c,
                value: p.value,
            });
        }
        max_value = max_value.max(p.value);
    }
    Ok(Certificate {
        a,
        points,
        max_value,
        max_route_gap,
        max_kappa_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn forms_agree() {
        for n in 7..=10 {
            for t in [0.0, 0.5, 2.0] {
                let q = build_q(n, t).unwrap();
                assert!(q.form_gap() < 1e-12, "n={n} t={t}: {}", q.form_gap());
            }
        }
    }

    #[test]
    fn q13_example() {
        let q = build_q(7, 0.0).unwrap();
        let expected = 8.0 * 7.0 / (5.0 * 8.0) * PI / 16.0;
        assert!((q.form2[(0, 2)] - expected).abs() < 1e-15);
    }

    #[test]
    fn q_bar_routes_agree() {
        for n in 7..=12 {
            for t in [0.0, 0.5, 1.0, 2.0] {
                let q = build_q(n, t).unwrap();
                let gap = (congruence_transform(&q) - q.q_bar).amax();
                assert!(gap < 1e-12, "n={n} t={t}: {gap}");
                assert_eq!(q.q_bar[(2, 3)], 0.0);
            }
        }
    }

    #[test]
    fn quadratic_value_example() {
        let q = build_q(7, 0.0).unwrap();
        let v = quadratic_value(&q, &TestVector::new(2.0 / 3.0, 0.0)).unwrap();
        assert!((v.via_closed_form + PI / 72.0).abs() < 1e-15);
        assert!((v.via_matrix + PI / 72.0).abs() < 1e-14);
        assert!(quadratic_value(&q, &TestVector::new(2.0 / 3.0, 1.0)).is_err());
    }

    #[test]
    fn kappa_examples() {
        let k = build_kappa(7, 0.0, 2.0 / 3.0).unwrap();
        assert!((k.kappa2 - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!((k.kappa1, k.kappa0, k.last), (0.0, 0.0, 1.0));
        let k = build_kappa(9, 1.0, 2.0 / 3.0).unwrap();
        let c = KappaVector::closed_form(9, 1.0, 2.0 / 3.0);
        assert!((k.as_row() - c.as_row()).amax() < 1e-14);
        assert!(build_kappa(7, 0.0, 1.0).is_err());
    }

    #[test]
    fn inadmissible_certificate_fails() {
        let e = negativity_certificate(7..=7, (0.0, 0.0), 1.0, 1).unwrap_err();
        assert!(matches!(e, Error::Certificate { n: 7, .. }));
    }

    #[test]
    fn small_domain_rejected() {
        assert!(matches!(build_q(6, 0.0), Err(Error::Domain(ref s)) if s.contains("n-7")));
        assert!(build_q(7, -0.1).is_err());
    }
}
