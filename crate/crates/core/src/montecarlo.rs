//! Seeded, chunk-parallel Monte-Carlo estimation.
//!
//! Samples are split into fixed-size chunks; chunk `i` draws from a ChaCha8
//! stream `i` of the caller's seed, and chunk statistics are merged in chunk
//! order. Results are therefore identical regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::special_functions::ln_gamma;

const CHUNK: usize = 1 << 15;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            mean: self.mean * factor,
            std_err: self.std_err * factor.abs(),
            samples: self.samples,
        }
    }

    /// Number of standard errors separating the estimate from `value`.
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = (self.mean - value).abs();
        if self.std_err > 0.0 {
            diff / self.std_err
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn agrees_with(&self, value: f64, sigmas: f64) -> bool {
        self.z_score(value) <= sigmas
    }
}

#[derive(Clone, Copy)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    const EMPTY: Welford = Welford {
        n: 0.0,
        mean: 0.0,
        m2: 0.0,
    };

    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Welford {
            n,
            mean: self.mean + d * other.n / n,
            m2: self.m2 + other.m2 + d * d * self.n * other.n / n,
        }
    }

    fn estimate(&self) -> McEstimate {
        let var = if self.n > 1.0 {
            self.m2 / (self.n - 1.0)
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            std_err: (var / self.n).sqrt(),
            samples: self.n as usize,
        }
    }
}

/// Estimate `K` expectations at once from a shared stream of samples.
///
/// `draw` receives the chunk's generator and writes one realisation of each
/// of the `K` integrands into its output slot.
pub fn estimate<const K: usize, F>(samples: usize, seed: u64, draw: F) -> [McEstimate; K]
where
    F: Fn(&mut ChaCha8Rng, &mut [f64; K]) + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<[Welford; K]> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let len = CHUNK.min(samples - chunk * CHUNK);
            let mut acc = [Welford::EMPTY; K];
            let mut out = [0.0; K];
            for _ in 0..len {
                draw(&mut rng, &mut out);
                for (a, &x) in acc.iter_mut().zip(out.iter()) {
                    a.push(x);
                }
            }
            acc
        })
        .collect();

    let mut total = [Welford::EMPTY; K];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t = t.merge(p);
        }
    }
    total.map(|w| w.estimate())
}

/// Fill `point` with a uniformly distributed point on the unit sphere of `point.len()` coordinates.
pub fn unit_sphere_point<R: Rng + ?Sized>(rng: &mut R, point: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for x in point.iter_mut() {
            *x = StandardNormal.sample(rng);
            norm2 += *x * *x;
        }
        if norm2 > 1e-300 {
            let inv = norm2.sqrt().recip();
            point.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

/// Isotropic multivariate Student-t proposal with `nu` degrees of freedom and unit scale.
///
/// Used as an importance density for the algebraically decaying bubble integrands.
#[derive(Debug, Clone)]
pub struct StudentT {
    dim: usize,
    nu: f64,
    log_norm: f64,
    chi2: ChiSquared<f64>,
}

impl StudentT {
    pub fn new(dim: usize, nu: f64) -> Self {
        let d = dim as f64;
        let log_norm = ln_gamma(0.5 * (nu + d)).expect("positive argument")
            - ln_gamma(0.5 * nu).expect("positive argument")
            - 0.5 * d * (nu * std::f64::consts::PI).ln();
        Self {
            dim,
            nu,
            log_norm,
            chi2: ChiSquared::new(nu).expect("positive degrees of freedom"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Draw an offset from the centre into `point`; returns its squared norm.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, point: &mut [f64]) -> f64 {
        let w: f64 = self.chi2.sample(rng).max(f64::MIN_POSITIVE);
        let scale = (self.nu / w).sqrt();
        let mut r2 = 0.0;
        for x in point.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *x = z * scale;
            r2 += *x * *x;
        }
        r2
    }

    /// Density at an offset of squared norm `r2`.
    pub fn density(&self, r2: f64) -> f64 {
        (self.log_norm - 0.5 * (self.nu + self.dim as f64) * (r2 / self.nu).ln_1p()).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let f = |rng: &mut ChaCha8Rng, out: &mut [f64; 1]| out[0] = rng.random::<f64>();
        let a = estimate(100_000, 7, f);
        let b = estimate(100_000, 7, f);
        assert_eq!(a, b);
        assert!(a[0].agrees_with(0.5, 4.0));
        let c = estimate(100_000, 8, f);
        assert_ne!(a[0].mean, c[0].mean);
    }

    #[test]
    fn sphere_second_moment() {
        // E[x_1^2] on S^{d-1} is 1/d
        let est = estimate(200_000, 1, |rng, out: &mut [f64; 2]| {
            let mut p = [0.0; 5];
            unit_sphere_point(rng, &mut p);
            out[0] = p[0] * p[0];
            out[1] = p.iter().map(|x| x * x).sum();
        });
        assert!(est[0].agrees_with(0.2, 4.0));
        assert!((est[1].mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn student_t_is_normalised() {
        // importance-sample the constant 1 over a box: mean of 1/q·1_box equals box volume
        let t = StudentT::new(2, 3.0);
        let est = estimate(400_000, 3, |rng, out: &mut [f64; 1]| {
            let mut p = [0.0; 2];
            let r2 = t.sample(rng, &mut p);
            out[0] = if p[0].abs() < 1.0 && p[1].abs() < 1.0 {
                1.0 / t.density(r2)
            } else {
                0.0
            };
        });
        assert!(est[0].agrees_with(4.0, 4.0), "{:?}", est[0]);
    }
}
