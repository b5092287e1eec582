//! Scan-and-bisect root finding for the transcendental eigenvalue
//! equations of the disc spectrum.

use crate::{Error, Result};

/// A sign-change bracket `[lo, hi]` with the function values at its ends.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// Validates the bracket invariants `lo < hi`, `f_lo·f_hi ≤ 0`.
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::invalid(format!("bracket requires lo < hi: [{lo}, {hi}]")));
        }
        if f_lo * f_hi > 0.0 {
            return Err(Error::invalid(format!(
                "bracket endpoints do not straddle a sign change: f({lo}) = {f_lo}, f({hi}) = {f_hi}"
            )));
        }
        Ok(Bracket { lo, hi, f_lo, f_hi })
    }
}

/// Root-scan configuration.
#[derive(Debug, Clone, Copy)]
pub struct RootConfig {
    /// Number of uniform scan points across the interval. The default
    /// (1000) resolves features down to 1e-3 of the interval length; the
    /// disc transcendental equations have roots spaced O(π) apart.
    pub scan_points: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig { scan_points: 1000 }
    }
}

/// Finds up to `n_max` sign-change roots of `f` on `[a, b]`.
///
/// Uniform scan followed by bisection to machine precision. Roots are
/// returned strictly increasing; if no sign change is found the list is
/// empty (not an error). Each root `r` satisfies `|f(r)| ≤ 1e-12·scale`
/// where `scale` is the largest `|f|` seen over the scan.
pub fn find_roots<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n_max: usize) -> Result<Vec<f64>> {
    find_roots_with(f, a, b, n_max, RootConfig::default())
}

/// [`find_roots`] with an explicit scan resolution.
pub fn find_roots_with<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    n_max: usize,
    cfg: RootConfig,
) -> Result<Vec<f64>> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid(format!(
            "root interval must be finite with a < b, got [{a}, {b}]"
        )));
    }
    if n_max == 0 {
        return Ok(Vec::new());
    }
    let n = cfg.scan_points.max(2);
    let mut roots = Vec::new();
    let mut x_prev = a;
    let mut f_prev = f(a);
    for i in 1..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        let fx = f(x);
        if f_prev == 0.0 {
            roots.push(x_prev);
        } else if f_prev * fx < 0.0 {
            roots.push(bisect(&f, x_prev, x, f_prev));
        }
        if roots.len() >= n_max {
            return Ok(roots);
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev == 0.0 && roots.len() < n_max {
        roots.push(x_prev);
    }
    Ok(roots)
}

/// Bisection to ~machine precision inside a verified bracket.
fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval at floating-point resolution
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if f_lo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = fm;
        }
    }
    0.5 * (lo + hi)
}
