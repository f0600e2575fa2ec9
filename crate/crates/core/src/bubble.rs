//! Pointwise evaluation of the half-space bubble
//!
//! ```text
//! W_ε(y) = (ε / (ε² + |y − T_c ε e_n|²))^{(n−2)/2},   T_c = −c/(n−2),
//! ```
//!
//! its gradient, the residuals of its interior and boundary equations, and the
//! explicit comparability bound against `ε^{(n−2)/2} (ε + |y|)^{2−n}`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BubbleParams {
    n: u32,
    eps: f64,
    t_c: f64,
}

impl BubbleParams {
    pub fn new(n: u32, eps: f64, t_c: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain(format!("n must be >= 3, got {n}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::domain(format!("eps must be positive, got {eps}")));
        }
        if !t_c.is_finite() {
            return Err(Error::domain("t_c must be finite"));
        }
        Ok(Self { n, eps, t_c })
    }

    /// Parameters from the boundary constant `c`, with `T_c = −c/(n−2)`.
    pub fn from_boundary_constant(n: u32, eps: f64, c: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain(format!("n must be >= 3, got {n}")));
        }
        Self::new(n, eps, -c / (n as f64 - 2.0))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn t_c(&self) -> f64 {
        self.t_c
    }

    /// Boundary constant `c = −(n−2) T_c`.
    pub fn c(&self) -> f64 {
        -(self.n as f64 - 2.0) * self.t_c
    }

    pub fn with_eps(self, eps: f64) -> Result<Self> {
        Self::new(self.n, eps, self.t_c)
    }

    fn exponent(&self) -> f64 {
        0.5 * (self.n as f64 - 2.0)
    }
}

/// A point `(ȳ, yⁿ)` of the closed half-space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfSpacePoint {
    y_bar: Vec<f64>,
    y_n: f64,
}

impl HalfSpacePoint {
    pub fn new(y_bar: Vec<f64>, y_n: f64) -> Result<Self> {
        if !(y_n >= 0.0) {
            return Err(Error::domain(format!("y_n must be >= 0, got {y_n}")));
        }
        if y_bar.iter().any(|x| !x.is_finite()) || !y_n.is_finite() {
            return Err(Error::domain("coordinates must be finite"));
        }
        Ok(Self { y_bar, y_n })
    }

    pub fn origin(n: u32) -> Self {
        Self {
            y_bar: vec![0.0; n as usize - 1],
            y_n: 0.0,
        }
    }

    /// Build from all `n` coordinates, the last being the normal one.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        let (y_n, y_bar) = coords
            .split_last()
            .ok_or_else(|| Error::domain("empty coordinate vector"))?;
        Self::new(y_bar.to_vec(), *y_n)
    }

    pub fn y_bar(&self) -> &[f64] {
        &self.y_bar
    }

    pub fn y_n(&self) -> f64 {
        self.y_n
    }

    pub fn dim(&self) -> usize {
        self.y_bar.len() + 1
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut v = self.y_bar.clone();
        v.push(self.y_n);
        v
    }

    pub fn norm(&self) -> f64 {
        (self.tangential_norm_sq() + self.y_n * self.y_n).sqrt()
    }

    pub fn tangential_norm_sq(&self) -> f64 {
        self.y_bar.iter().map(|x| x * x).sum()
    }

    /// Projection `(ȳ, 0)` onto the boundary.
    pub fn boundary_projection(&self) -> Self {
        Self {
            y_bar: self.y_bar.clone(),
            y_n: 0.0,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            y_bar: self.y_bar.iter().map(|x| x * factor).collect(),
            y_n: self.y_n * factor,
        }
    }
}

fn check_dim(p: &BubbleParams, y: &HalfSpacePoint) {
    assert_eq!(
        y.dim(),
        p.n as usize,
        "point has {} coordinates but the bubble lives in dimension {}",
        y.dim(),
        p.n
    );
}

/// `ε² + |y − T_c ε e_n|²` evaluated at raw coordinates.
fn denominator(p: &BubbleParams, coords: &[f64]) -> f64 {
    let (last, head) = coords.split_last().expect("non-empty");
    let shift = last - p.t_c * p.eps;
    p.eps * p.eps + head.iter().map(|x| x * x).sum::<f64>() + shift * shift
}

fn eval_coords(p: &BubbleParams, coords: &[f64]) -> f64 {
    (p.eps / denominator(p, coords)).powf(p.exponent())
}

pub fn eval_bubble(p: &BubbleParams, y: &HalfSpacePoint) -> f64 {
    check_dim(p, y);
    eval_coords(p, &y.coords())
}

/// Analytic gradient `−(n−2) ε^{(n−2)/2} D^{−n/2} (y − T_c ε e_n)`.
pub fn gradient(p: &BubbleParams, y: &HalfSpacePoint) -> Vec<f64> {
    check_dim(p, y);
    let coords = y.coords();
    let d = denominator(p, &coords);
    let n = p.n as f64;
    let factor = -(n - 2.0) * p.eps.powf(p.exponent()) * d.powf(-0.5 * n);
    let mut g: Vec<f64> = coords.iter().map(|x| factor * x).collect();
    *g.last_mut().unwrap() = factor * (y.y_n - p.t_c * p.eps);
    g
}

/// Closed form of `|∇W_ε|²`.
pub fn grad_norm_sq(p: &BubbleParams, y: &HalfSpacePoint) -> f64 {
    check_dim(p, y);
    let n = p.n as f64;
    let shift = y.y_n - p.t_c * p.eps;
    let numer = y.tangential_norm_sq() + shift * shift;
    let d = p.eps * p.eps + numer;
    p.eps.powf(n - 2.0) * (n - 2.0).powi(2) * numer / d.powf(n)
}

/// Central-difference gradient of [`eval_bubble`] with absolute step `h`.
pub fn central_difference_gradient(p: &BubbleParams, y: &HalfSpacePoint, h: f64) -> Vec<f64> {
    check_dim(p, y);
    let mut coords = y.coords();
    (0..coords.len())
        .map(|i| {
            let x0 = coords[i];
            coords[i] = x0 + h;
            let fp = eval_coords(p, &coords);
            coords[i] = x0 - h;
            let fm = eval_coords(p, &coords);
            coords[i] = x0;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdeResiduals {
    /// `−ΔW_ε − n(n−2) W_ε^{(n+2)/(n−2)}` at the interior point.
    pub interior: f64,
    /// `∂_n W_ε − (n−2) T_c W_ε^{n/(n−2)}` at the boundary projection.
    pub boundary: f64,
    /// Magnitude of the terms cancelled in the interior residual.
    pub interior_scale: f64,
}

/// Default relative step of the finite-difference Laplacian: `h = 1e−4 (ε + |y|)`.
pub const LAPLACIAN_REL_STEP: f64 = 1e-4;

pub fn pde_residuals(p: &BubbleParams, y: &HalfSpacePoint) -> Result<PdeResiduals> {
    pde_residuals_with_step(p, y, LAPLACIAN_REL_STEP)
}

/// As [`pde_residuals`], with the Laplacian step `h = rel_step · (ε + |y|)`.
pub fn pde_residuals_with_step(
    p: &BubbleParams,
    y: &HalfSpacePoint,
    rel_step: f64,
) -> Result<PdeResiduals> {
    let (interior, interior_scale) = interior_residual(p, y, rel_step)?;
    let boundary = boundary_residual(p, y.y_bar())?;
    Ok(PdeResiduals {
        interior,
        boundary,
        interior_scale,
    })
}

/// Interior residual via central second differences; returns `(residual, scale)`.
pub fn interior_residual(
    p: &BubbleParams,
    y: &HalfSpacePoint,
    rel_step: f64,
) -> Result<(f64, f64)> {
    check_dim(p, y);
    let h = rel_step * (p.eps + y.norm());
    if !(y.y_n > h) {
        return Err(Error::domain(format!(
            "interior residual needs y_n > h = {h:e} (got y_n = {})",
            y.y_n
        )));
    }
    let n = p.n as f64;
    let mut coords = y.coords();
    let w0 = eval_coords(p, &coords);
    let mut laplacian = 0.0;
    let mut abs_terms = 0.0;
    for i in 0..coords.len() {
        let x0 = coords[i];
        coords[i] = x0 + h;
        let fp = eval_coords(p, &coords);
        coords[i] = x0 - h;
        let fm = eval_coords(p, &coords);
        coords[i] = x0;
        let d2 = (fp - 2.0 * w0 + fm) / (h * h);
        laplacian += d2;
        abs_terms += d2.abs();
    }
    let source = n * (n - 2.0) * w0.powf((n + 2.0) / (n - 2.0));
    Ok((-laplacian - source, source + abs_terms))
}

/// Boundary residual at `(ȳ, 0)` from the analytic normal derivative.
pub fn boundary_residual(p: &BubbleParams, y_bar: &[f64]) -> Result<f64> {
    let y = HalfSpacePoint::new(y_bar.to_vec(), 0.0)?;
    check_dim(p, &y);
    let n = p.n as f64;
    let normal_derivative = *gradient(p, &y).last().unwrap();
    let w = eval_bubble(p, &y);
    Ok(normal_derivative - (n - 2.0) * p.t_c * w.powf(n / (n - 2.0)))
}

/// Explicit constant `min{1/4, 1/(2(1 + 2T_c²))}` of the lower comparability
/// bound; `1/4` for `T_c < 0`.
pub fn comparability_constant(t_c: f64) -> f64 {
    if t_c < 0.0 {
        0.25
    } else {
        0.25f64.min(0.5 / (1.0 + 2.0 * t_c * t_c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparabilityBound {
    /// `ε² + |y − T_c ε e_n|²`
    pub lhs: f64,
    /// `constant · (ε + |y|)²`
    pub rhs: f64,
    pub constant: f64,
}

impl ComparabilityBound {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

pub fn comparability_bound(p: &BubbleParams, y: &HalfSpacePoint) -> ComparabilityBound {
    check_dim(p, y);
    let constant = comparability_constant(p.t_c);
    let lhs = denominator(p, &y.coords());
    let s = p.eps + y.norm();
    ComparabilityBound {
        lhs,
        rhs: constant * s * s,
        constant,
    }
}

/// Ratio `W_ε(y) / (ε^{(n−2)/2} (ε + |y|)^{2−n})`, whose extremes are the two
/// comparability constants.
pub fn comparability_ratio(p: &BubbleParams, y: &HalfSpacePoint) -> f64 {
    check_dim(p, y);
    let s = (p.eps + y.norm()).powi(2);
    (s / denominator(p, &y.coords())).powf(p.exponent())
}
