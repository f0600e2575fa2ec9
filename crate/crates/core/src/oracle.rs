//! Small independent numerical routines used to cross-check closed forms.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximiser of a unimodal function on `[lo, hi]`.
///
/// `diff(x, y)` must return `f(x) − f(y)`; passing a difference rather than
/// `f` lets callers avoid cancellation near a flat maximum.
pub fn golden_section_max<D>(diff: D, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    D: Fn(f64, f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    for _ in 0..500 {
        if hi - lo <= tol {
            break;
        }
        if diff(x1, x2) < 0.0 {
            lo = x1;
            x1 = x2;
            x2 = lo + INV_PHI * (hi - lo);
        } else {
            hi = x2;
            x2 = x1;
            x1 = hi - INV_PHI * (hi - lo);
        }
    }
    0.5 * (lo + hi)
}

/// Double `start` until `pred` holds, giving up after 200 doublings.
pub fn expand_until<P: Fn(f64) -> bool>(start: f64, pred: P) -> Result<f64> {
    let mut x = start;
    for _ in 0..200 {
        if pred(x) {
            return Ok(x);
        }
        x *= 2.0;
    }
    Err(Error::Numeric {
        message: "bracket expansion did not terminate".into(),
        achieved: x,
    })
}

/// Root of `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::domain(format!(
            "no sign change on [{lo}, {hi}]: f = {flo:e}, {fhi:e}"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Number of strict sign changes of `f` along `grid`, zeros skipped.
pub fn sign_changes<F: Fn(f64) -> f64>(f: F, grid: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for x in grid {
        let v = f(x);
        if v == 0.0 || v.is_nan() {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_peak() {
        let f = |x: f64| -(x - 1.3) * (x - 1.3);
        let x = golden_section_max(|a, b| f(a) - f(b), 0.0, 4.0, 1e-12);
        assert!((x - 1.3).abs() < 1e-7);
    }

    #[test]
    fn bisection() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(bisect(|x| x * x + 1.0, 0.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn counts_sign_changes() {
        let grid = (0..100).map(|i| i as f64 * 0.1);
        assert_eq!(sign_changes(|x| (x - 2.05) * (x - 5.05), grid), 2);
    }
}
