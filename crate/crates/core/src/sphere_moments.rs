//! Integrals of polynomials over the round sphere `S^{n−2}_r ⊂ ℝ^{n−1}`.
//!
//! Provides the Laplacian identity for homogeneous polynomials,
//!
//! ```text
//! ∫_{S_r} q dσ = r² / (k(n+k−3)) ∫_{S_r} Δq dσ,      deg q = k ≥ 1,
//! ```
//!
//! and the closed forms of the quadratic and quartic tensor moments
//! `∫ M_ab y^a y^b` and `∫ M_ab M_cd y^a y^b y^c y^d`, each with a
//! Monte-Carlo counterpart.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::montecarlo::{estimate, unit_sphere_point, McEstimate};
use crate::quadrature::QuadratureSpec;
use crate::special_functions::sphere_volume;

const SYMMETRY_TOL: f64 = 1e-12;

fn check_n_r(n: u32, r: f64) -> Result<()> {
    if n < 4 {
        return Err(Error::domain(format!("n must be >= 4, got {n}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("r must be positive, got {r}")));
    }
    Ok(())
}

/// Real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    m: DMatrix<f64>,
}

impl SymmetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::domain("matrix must be square"));
        }
        let scale = m.amax().max(1.0);
        if (&m - m.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(Error::domain("matrix must be symmetric"));
        }
        Ok(Self { m })
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::domain(format!("expected {} entries", dim * dim)));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self {
            m: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    /// Symmetrised matrix with independent standard normal entries.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
        Self {
            m: (&g + g.transpose()) * 0.5,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    /// `Σ_ab M_ab²`
    pub fn frobenius_sq(&self) -> f64 {
        self.m.norm_squared()
    }

    pub fn quadratic(&self, y: &[f64]) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for j in 0..d {
            let mut row = 0.0;
            for (i, yi) in y.iter().enumerate().take(d) {
                row += self.m[(i, j)] * yi;
            }
            acc += row * y[j];
        }
        acc
    }

    /// `|My|²`
    pub fn image_norm_sq(&self, y: &[f64]) -> f64 {
        let d = self.dim();
        (0..d)
            .map(|i| {
                let v: f64 = (0..d).map(|j| self.m[(i, j)] * y[j]).sum();
                v * v
            })
            .sum()
    }

    /// Trace-free part `M − (tr M / dim) I`.
    pub fn trace_free_part(&self) -> TraceFreeSymmetricMatrix {
        let d = self.dim();
        let shift = self.trace() / d as f64;
        TraceFreeSymmetricMatrix {
            inner: Self {
                m: &self.m - DMatrix::identity(d, d) * shift,
            },
        }
    }
}

/// Symmetric matrix with vanishing trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFreeSymmetricMatrix {
    inner: SymmetricMatrix,
}

impl TraceFreeSymmetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let inner = SymmetricMatrix::new(m)?;
        let scale = inner.m.amax().max(1.0);
        if inner.trace().abs() > SYMMETRY_TOL * scale {
            return Err(Error::domain(format!(
                "matrix must be trace-free, trace = {:e}",
                inner.trace()
            )));
        }
        Ok(Self { inner })
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(SymmetricMatrix::from_row_slice(dim, entries)?.m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: SymmetricMatrix {
                m: DMatrix::zeros(dim, dim),
            },
        }
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        SymmetricMatrix::random(dim, rng).trace_free_part()
    }

    pub fn as_symmetric(&self) -> &SymmetricMatrix {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.inner.frobenius_sq()
    }
}

type PointFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Homogeneous polynomial on ℝ^{n−1} with its Laplacian.
pub struct HomogeneousPolynomial {
    degree: u32,
    eval: PointFn,
    laplacian: PointFn,
}

impl std::fmt::Debug for HomogeneousPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HomogeneousPolynomial")
            .field("degree", &self.degree)
            .finish_non_exhaustive()
    }
}

impl HomogeneousPolynomial {
    pub fn new<F, L>(degree: u32, eval: F, laplacian: L) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        L: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            degree,
            eval: Box::new(eval),
            laplacian: Box::new(laplacian),
        }
    }

    /// `(y^i)^k`
    pub fn coordinate_power(i: usize, k: u32) -> Self {
        let kf = k as f64;
        Self::new(
            k,
            move |y| y[i].powi(k as i32),
            move |y| {
                if k < 2 {
                    0.0
                } else {
                    kf * (kf - 1.0) * y[i].powi(k as i32 - 2)
                }
            },
        )
    }

    /// `yᵀ M y`, with Laplacian `2 tr M`.
    pub fn quadratic_form(m: &SymmetricMatrix) -> Self {
        let lap = 2.0 * m.trace();
        let m = m.clone();
        Self::new(2, move |y| m.quadratic(y), move |_| lap)
    }

    /// `(yᵀ M y)²`, with Laplacian `8|My|² + 4 tr M · yᵀ M y`.
    pub fn quartic_form(m: &SymmetricMatrix) -> Self {
        let (m1, m2) = (m.clone(), m.clone());
        let tr = m.trace();
        Self::new(
            4,
            move |y| m1.quadratic(y).powi(2),
            move |y| 8.0 * m2.image_norm_sq(y) + 4.0 * tr * m2.quadratic(y),
        )
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        (self.eval)(y)
    }

    pub fn laplacian(&self, y: &[f64]) -> f64 {
        (self.laplacian)(y)
    }

    /// Largest relative deviation from `q(λy) = λ^k q(y)` over the given samples.
    pub fn homogeneity_defect(&self, samples: &[(f64, Vec<f64>)]) -> f64 {
        samples
            .iter()
            .map(|(lambda, y)| {
                let scaled: Vec<f64> = y.iter().map(|x| lambda * x).collect();
                let lhs = self.eval(&scaled);
                let rhs = lambda.powi(self.degree as i32) * self.eval(y);
                (lhs - rhs).abs() / rhs.abs().max(lhs.abs()).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }
}

/// Both sides of the Laplacian identity as Monte-Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentitySides {
    pub lhs: McEstimate,
    pub rhs: McEstimate,
}

impl IdentitySides {
    /// `|lhs − rhs|` in units of the combined standard error.
    pub fn z_score(&self) -> f64 {
        let se = self.lhs.std_err.hypot(self.rhs.std_err);
        let d = (self.lhs.mean - self.rhs.mean).abs();
        if se > 0.0 {
            d / se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// `∫_{S_r} q` and `r²/(k(n+k−3)) ∫_{S_r} Δq`, both from one set of uniform sphere samples.
pub fn sphere_average_identity(
    q: &HomogeneousPolynomial,
    n: u32,
    r: f64,
    quad: &QuadratureSpec,
) -> Result<IdentitySides> {
    check_n_r(n, r)?;
    let k = q.degree();
    if k == 0 {
        return Err(Error::domain("the identity requires degree k >= 1"));
    }
    let d = n as usize - 1;
    let [lhs, lap] = estimate(quad.mc_samples, quad.seed, |rng, out: &mut [f64; 2]| {
        let mut y = vec![0.0; d];
        unit_sphere_point(rng, &mut y);
        y.iter_mut().for_each(|x| *x *= r);
        out[0] = q.eval(&y);
        out[1] = q.laplacian(&y);
    });
    let area = sphere_volume(n - 2) * r.powi(d as i32 - 1);
    let kf = k as f64;
    Ok(IdentitySides {
        lhs: lhs.scaled(area),
        rhs: lap.scaled(area * r * r / (kf * (kf + n as f64 - 3.0))),
    })
}

fn check_dim(dim: usize, n: u32) -> Result<()> {
    if dim + 1 != n as usize {
        return Err(Error::domain(format!(
            "matrix dimension {dim} does not match n - 1 = {}",
            n as i64 - 1
        )));
    }
    Ok(())
}

/// `∫_{S_r} M_ab M_cd y^a y^b y^c y^d dσ = 2 ω_{n−2} Σ M_ab² r^{n+2} / ((n−1)(n+1))`.
pub fn quartic_tensor_moment(m: &TraceFreeSymmetricMatrix, n: u32, r: f64) -> Result<f64> {
    check_n_r(n, r)?;
    check_dim(m.dim(), n)?;
    let nf = n as f64;
    Ok(
        2.0 * sphere_volume(n - 2) * m.frobenius_sq() * r.powi(n as i32 + 2)
            / ((nf - 1.0) * (nf + 1.0)),
    )
}

/// `∫_{S_r} M_ab y^a y^b dσ = (tr M / (n−1)) ω_{n−2} rⁿ`.
pub fn quadratic_tensor_moment(m: &SymmetricMatrix, n: u32, r: f64) -> Result<f64> {
    check_n_r(n, r)?;
    check_dim(m.dim(), n)?;
    Ok(m.trace() / (n as f64 - 1.0) * sphere_volume(n - 2) * r.powi(n as i32))
}

/// `Δ²(yᵀMy)² = 16 Σ M_ab² + 8 (tr M)²`.
pub fn bilaplacian_of_quartic(m: &SymmetricMatrix) -> f64 {
    16.0 * m.frobenius_sq() + 8.0 * m.trace().powi(2)
}

/// The quartic moment obtained by applying the Laplacian identity twice, down
/// to the constant `Δ²q`.
pub fn quartic_moment_by_bilaplacian(m: &SymmetricMatrix, n: u32, r: f64) -> Result<f64> {
    check_n_r(n, r)?;
    check_dim(m.dim(), n)?;
    let nf = n as f64;
    let area = sphere_volume(n - 2) * r.powi(n as i32 - 2);
    let step4 = r * r / (4.0 * (nf + 1.0));
    let step2 = r * r / (2.0 * (nf - 1.0));
    Ok(step4 * step2 * bilaplacian_of_quartic(m) * area)
}

/// Monte-Carlo estimates of `∫_{S_r} yᵀMy` and `∫_{S_r} (yᵀMy)²`.
pub fn mc_tensor_moments(
    m: &SymmetricMatrix,
    n: u32,
    r: f64,
    quad: &QuadratureSpec,
) -> Result<(McEstimate, McEstimate)> {
    check_n_r(n, r)?;
    check_dim(m.dim(), n)?;
    let d = m.dim();
    let [quadratic, quartic] = estimate(quad.mc_samples, quad.seed, |rng, out: &mut [f64; 2]| {
        let mut y = vec![0.0; d];
        unit_sphere_point(rng, &mut y);
        let v = m.quadratic(&y);
        out[0] = v;
        out[1] = v * v;
    });
    let area = sphere_volume(n - 2) * r.powi(d as i32 - 1);
    Ok((
        quadratic.scaled(area * r * r),
        quartic.scaled(area * r.powi(4)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn quartic_diagonal_example() {
        let mut diag = vec![0.0; 6];
        diag[0] = 1.0;
        diag[1] = -1.0;
        let m = SymmetricMatrix::diagonal(&diag).trace_free_part();
        let v = quartic_tensor_moment(&m, 7, 1.0).unwrap();
        assert!((v - PI.powi(3) / 12.0).abs() < 1e-13);
        assert_eq!(
            quartic_tensor_moment(&TraceFreeSymmetricMatrix::zeros(6), 7, 1.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn quadratic_identity_example() {
        let v = quadratic_tensor_moment(&SymmetricMatrix::identity(5), 6, 2.0).unwrap();
        assert!((v - sphere_volume(4) * 64.0).abs() < 1e-12 * v);
    }

    #[test]
    fn bilaplacian_route_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 5..=9u32 {
            let m = TraceFreeSymmetricMatrix::random(n as usize - 1, &mut rng);
            for r in [0.5, 1.0, 2.0] {
                let a = quartic_tensor_moment(&m, n, r).unwrap();
                let b = quartic_moment_by_bilaplacian(m.as_symmetric(), n, r).unwrap();
                assert!((a - b).abs() <= 1e-12 * a);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SymmetricMatrix::from_row_slice(2, &[1.0, 2.0, 0.0, 1.0]).is_err());
        assert!(TraceFreeSymmetricMatrix::from_row_slice(2, &[1.0, 0.0, 0.0, 1.0]).is_err());
        let q = HomogeneousPolynomial::new(0, |_| 1.0, |_| 0.0);
        assert!(sphere_average_identity(&q, 5, 1.0, &QuadratureSpec::default()).is_err());
        assert!(quadratic_tensor_moment(&SymmetricMatrix::identity(3), 5, 1.0).is_err());
    }

    #[test]
    fn homogeneity() {
        let m = SymmetricMatrix::diagonal(&[1.0, 2.0, -0.5]);
        let q = HomogeneousPolynomial::quartic_form(&m);
        let samples = vec![(2.0, vec![0.3, -1.0, 0.2]), (0.5, vec![1.0, 1.0, 1.0])];
        assert!(q.homogeneity_defect(&samples) < 1e-14);
    }
}
