//! Bessel and Hankel functions of real and complex argument.
//!
//! Evaluation strategy:
//!
//! * `J_n`, `|z| ≤ 5`: ascending power series (largest term ~10, so
//!   cancellation costs ~1 digit).
//! * `J_n`, `5 < |z| ≤ 17`: Miller's backward recurrence normalized by
//!   the Neumann sum `J₀ + 2Σ_{m≥1} J_{2m} = 1`, which is accurate to a
//!   few ulps for real arguments (and loses ~`Im z`·log₁₀e digits for
//!   complex ones — the physical kernels only need small `Im z`).
//! * `J_n`, `|z| > 17`: Hankel asymptotic expansion (H⁽¹⁾/H⁽²⁾ average)
//!   truncated at the smallest term; its optimal-truncation error
//!   `~e^{−2|z|}` is below machine epsilon there. Orders `n ≥ 2` by
//!   upward recurrence when `n < 0.75|z|`, else Miller normalized
//!   against the asymptotic `J₀`/`J₁`.
//! * `Y₀`, `Y₁`: log-series for `|z| ≤ 13`, asymptotics beyond; both
//!   sides are good to ~1e-12 absolute at the switchover (tested).
//!   Higher orders by upward recurrence (always stable for `Y`).
//!
//! Only `Im(z) ≥ 0` is supported for complex arguments: the outgoing
//! Helmholtz kernel with an absorbing background never needs the lower
//! half plane.

use crate::{Complex, Error, Result};

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// J series → Miller switchover.
const J_SERIES_RADIUS: f64 = 5.0;
/// Miller → asymptotic switchover for J.
const J_ASYMPTOTIC_RADIUS: f64 = 17.0;
/// Y series → asymptotic switchover.
const SERIES_RADIUS: f64 = 13.0;

const MAX_SERIES_TERMS: usize = 200;

fn check_order(order: i32) -> Result<()> {
    if order < -1 {
        return Err(Error::invalid(format!(
            "Bessel order {order} < -1 is not supported"
        )));
    }
    if order > 64 {
        return Err(Error::invalid(format!(
            "Bessel order {order} > 64 is outside the supported range"
        )));
    }
    Ok(())
}

fn check_argument(z: Complex) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::invalid("non-finite Bessel argument".to_string()));
    }
    if z.norm() >= 1e4 {
        return Err(Error::invalid(format!(
            "Bessel argument |z| = {:.3e} exceeds the supported range 1e4",
            z.norm()
        )));
    }
    Ok(())
}

/// Ascending power series for J_n(z), n ≥ 0. Used for |z| ≤ 5.
fn j_series(n: u32, z: Complex) -> Complex {
    let half = 0.5 * z;
    // Leading term (z/2)^n / n!.
    let mut term = Complex::new(1.0, 0.0);
    for m in 1..=n {
        term *= half / m as f64;
    }
    let mut sum = term;
    let q = -half * half;
    for m in 1..=MAX_SERIES_TERMS {
        term *= q / (m as f64 * (n as f64 + m as f64));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    sum
}

/// Harmonic number H_m = 1 + 1/2 + … + 1/m (H_0 = 0).
fn harmonic(m: usize) -> f64 {
    (1..=m).map(|j| 1.0 / j as f64).sum()
}

/// Ascending series for Y₀(z), |z| ≲ 13, principal branch of log.
fn y0_series(z: Complex) -> Complex {
    let j0 = j_series(0, z);
    let lg = (0.5 * z).ln() + EULER_GAMMA;
    // Σ_{m≥1} (−1)^{m+1} H_m (z²/4)^m / (m!)²
    let q = 0.25 * z * z;
    let mut term = Complex::new(1.0, 0.0);
    let mut sum = Complex::new(0.0, 0.0);
    let mut h = 0.0;
    for m in 1..=MAX_SERIES_TERMS {
        term *= q / ((m * m) as f64);
        h += 1.0 / m as f64;
        let contrib = if m % 2 == 1 { term * h } else { -term * h };
        sum += contrib;
        if term.norm() * h <= 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    (lg * j0 + sum) * (2.0 / std::f64::consts::PI)
}

/// Ascending series for Y₁(z), |z| ≲ 13, principal branch of log.
fn y1_series(z: Complex) -> Complex {
    let pi = std::f64::consts::PI;
    let j1 = j_series(1, z);
    let lg = (0.5 * z).ln() + EULER_GAMMA;
    // Σ_{m≥0} (−1)^m (H_m + H_{m+1}) (z/2)^{2m+1} / (m!(m+1)!)
    let half = 0.5 * z;
    let q = -half * half;
    let mut term = half; // m = 0: (z/2) / (0!·1!)
    let mut sum = term * (harmonic(0) + harmonic(1));
    for m in 1..=MAX_SERIES_TERMS {
        term *= q / (m as f64 * (m as f64 + 1.0));
        let h = harmonic(m) + harmonic(m + 1);
        sum += term * h;
        if term.norm() * h <= 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    (2.0 / pi) * lg * j1 - (2.0 / pi) / z - sum / pi
}

/// Hankel asymptotic expansion, kind = +1 for H⁽¹⁾, −1 for H⁽²⁾.
///
/// H_ν^{(1,2)}(z) ~ sqrt(2/(πz)) e^{±iχ} Σ_k (±i)^k a_k(ν) / z^k with
/// χ = z − (ν/2 + 1/4)π and a_k(ν) the standard Hankel coefficients.
fn hankel_asymptotic(nu: u32, z: Complex, kind: f64) -> Complex {
    let pi = std::f64::consts::PI;
    let fournu2 = 4.0 * (nu * nu) as f64;
    let i = Complex::new(0.0, 1.0);
    let iz = kind * i / z;
    let mut term = Complex::new(1.0, 0.0);
    let mut sum = term;
    let mut prev_mag = f64::INFINITY;
    for k in 1..=40 {
        let odd = (2 * k - 1) as f64;
        term *= iz * (fournu2 - odd * odd) / (8.0 * k as f64);
        let mag = term.norm();
        if mag >= prev_mag {
            break; // asymptotic series started diverging
        }
        sum += term;
        prev_mag = mag;
        if mag <= 1e-17 * sum.norm() {
            break;
        }
    }
    let chi = z - (0.5 * nu as f64 + 0.25) * pi;
    (2.0 / (pi * z)).sqrt() * (kind * i * chi).exp() * sum
}

/// J_n via the H⁽¹⁾/H⁽²⁾ asymptotic average (machine-accurate for
/// |z| ≳ 17).
fn j_asymptotic(n: u32, z: Complex) -> Complex {
    0.5 * (hankel_asymptotic(n, z, 1.0) + hankel_asymptotic(n, z, -1.0))
}

/// Miller backward recurrence for J_n(z) normalized by the Neumann sum
/// `J₀(z) + 2 Σ_{m≥1} J_{2m}(z) = 1`.
fn j_miller_sum(n: u32, z: Complex) -> Complex {
    let az = z.norm();
    // Start well above both the order and the turning point |z| so the
    // unwanted second-kind component is fully suppressed on the way down.
    let start = n as usize + 25 + (2.0 * az) as usize;
    let mut fkp1 = Complex::new(0.0, 0.0); // order start+1
    let mut fk = Complex::new(1e-280, 0.0); // order start
    let mut jn = if start == n as usize { fk } else { Complex::new(0.0, 0.0) };
    let mut even_sum = if start % 2 == 0 { fk } else { Complex::new(0.0, 0.0) };
    for k in (1..=start).rev() {
        let fkm1 = (2.0 * k as f64 / z) * fk - fkp1;
        fkp1 = fk;
        fk = fkm1; // fk now holds order k−1
        if (k - 1) % 2 == 0 {
            even_sum += fk;
        }
        if k - 1 == n as usize {
            jn = fk;
        }
        if fk.norm() > 1e250 {
            fk *= 1e-250;
            fkp1 *= 1e-250;
            even_sum *= 1e-250;
            jn *= 1e-250;
        }
    }
    // even_sum = f₀ + f₂ + f₄ + …, so the Neumann sum is 2·even_sum − f₀.
    // Rescale to unit magnitude first: both sides carry the tiny Miller
    // seed and |norm|² would underflow in the complex division otherwise.
    let norm = 2.0 * even_sum - fk;
    let m = norm.norm();
    (jn / m) / (norm / m)
}

/// Y_n for n = 0, 1 over the full range.
fn y01(n: u32, z: Complex) -> Complex {
    if z.norm() <= SERIES_RADIUS {
        if n == 0 {
            y0_series(z)
        } else {
            y1_series(z)
        }
    } else {
        let i = Complex::new(0.0, 1.0);
        // Y = (H⁽¹⁾ − H⁽²⁾)/(2i)
        (hankel_asymptotic(n, z, 1.0) - hankel_asymptotic(n, z, -1.0)) / (2.0 * i)
    }
}

/// J_n(z) for n ≥ 0, all magnitudes ≤ 1e4.
fn j_general(n: u32, z: Complex) -> Complex {
    let az = z.norm();
    if az <= J_SERIES_RADIUS {
        return j_series(n, z);
    }
    if az <= J_ASYMPTOTIC_RADIUS {
        return j_miller_sum(n, z);
    }
    if n <= 1 {
        return j_asymptotic(n, z);
    }
    if (n as f64) < 0.75 * az {
        // Upward recurrence, stable while the order is below the argument.
        let mut jm1 = j_asymptotic(0, z);
        let mut j = j_asymptotic(1, z);
        for k in 1..n {
            let next = (2.0 * k as f64 / z) * j - jm1;
            jm1 = j;
            j = next;
        }
        j
    } else {
        // Miller backward recurrence normalized against the asymptotic
        // J₀ or J₁ (whichever is farther from a zero).
        let start = n as usize + 16 + (az as usize);
        let mut fkp1 = Complex::new(0.0, 0.0); // order start+1
        let mut fk = Complex::new(1e-280, 0.0); // order start
        let mut jn = if start == n as usize { fk } else { Complex::new(0.0, 0.0) };
        for k in (1..=start).rev() {
            let fkm1 = (2.0 * k as f64 / z) * fk - fkp1;
            fkp1 = fk;
            fk = fkm1; // fk now holds order k−1
            if k - 1 == n as usize {
                jn = fk;
            }
        }
        // Rescale to unit magnitude before dividing: the Miller seed is
        // tiny and |j0v|² would underflow in the complex division.
        let m = fk.norm().max(fkp1.norm());
        let (j0v, j1v, jn) = (fk / m, fkp1 / m, jn / m); // orders 0 and 1
        let (r0, r1) = (j_asymptotic(0, z), j_asymptotic(1, z));
        if j0v.norm() >= j1v.norm() {
            jn * (r0 / j0v)
        } else {
            jn * (r1 / j1v)
        }
    }
}

/// Bessel function of the first kind `J_k(x)`, real argument.
///
/// Orders `k ∈ [−1, 64]` (with `J_{−1} = −J_1`); `|x| < 1e4`.
pub fn bessel_j(order: i32, x: f64) -> Result<f64> {
    Ok(bessel_j_complex(order, Complex::new(x, 0.0))?.re)
}

/// Bessel function of the first kind `J_k(z)`, complex argument
/// (`Im(z) ≥ 0` required for `|z|` beyond the series radius).
pub fn bessel_j_complex(order: i32, z: Complex) -> Result<Complex> {
    check_order(order)?;
    check_argument(z)?;
    if z.norm() > J_ASYMPTOTIC_RADIUS && z.im < 0.0 {
        return Err(Error::invalid(
            "complex Bessel arguments with Im(z) < 0 are not supported".to_string(),
        ));
    }
    let v = if order == -1 {
        -j_general(1, z)
    } else {
        let n = order as u32;
        // Negative real axis: use J_n(−x) = (−1)^n J_n(x) to keep the
        // series/asymptotic branches on the principal domain.
        if z.re < 0.0 && z.im == 0.0 {
            let v = j_general(n, -z);
            if n % 2 == 0 {
                v
            } else {
                -v
            }
        } else {
            j_general(n, z)
        }
    };
    Ok(v)
}

/// Bessel function of the second kind `Y_k(x)` for real `x > 0`,
/// orders `k ∈ [−1, 64]` (with `Y_{−1} = −Y_1`).
pub fn bessel_y(order: i32, x: f64) -> Result<f64> {
    check_order(order)?;
    check_argument(Complex::new(x, 0.0))?;
    if x <= 0.0 {
        return Err(Error::invalid(format!(
            "Y_k requires a positive real argument, got {x}"
        )));
    }
    let z = Complex::new(x, 0.0);
    if order == -1 {
        return Ok(-y01(1, z).re);
    }
    let n = order as u32;
    if n <= 1 {
        return Ok(y01(n, z).re);
    }
    // Upward recurrence is unconditionally stable for Y.
    let mut ym1 = y01(0, z).re;
    let mut y = y01(1, z).re;
    for k in 1..n {
        let next = (2.0 * k as f64 / x) * y - ym1;
        ym1 = y;
        y = next;
    }
    Ok(y)
}

/// Hankel function of the first kind `H_k⁽¹⁾(x) = J_k(x) + i·Y_k(x)` for
/// real `x > 0`.
pub fn hankel1(order: i32, x: f64) -> Result<Complex> {
    Ok(Complex::new(bessel_j(order, x)?, bessel_y(order, x)?))
}

/// Hankel function of the first kind, order zero, complex argument with
/// `Im(z) ≥ 0` (outgoing kernel with absorption), `z ≠ 0`.
pub fn hankel1_0(z: Complex) -> Result<Complex> {
    check_argument(z)?;
    if z.norm() == 0.0 {
        return Err(Error::invalid(
            "H₀⁽¹⁾ is singular at z = 0".to_string(),
        ));
    }
    if z.im < -1e-14 * z.norm() {
        return Err(Error::invalid(
            "H₀⁽¹⁾ arguments with Im(z) < 0 are not supported".to_string(),
        ));
    }
    if z.norm() <= SERIES_RADIUS {
        Ok(j_series(0, z) + Complex::new(0.0, 1.0) * y0_series(z))
    } else {
        Ok(hankel_asymptotic(0, z, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: plain ascending power series for J₀ summed in
    /// f64 without any of the production branch logic.
    fn j0_oracle(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        let q = -0.25 * x * x;
        for m in 1..300 {
            term *= q / ((m * m) as f64);
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    }

    /// Oracle root of J₀ located by bisection on the series.
    fn j0_first_zero_oracle() -> f64 {
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if j0_oracle(lo) * j0_oracle(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn j_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn j0_first_zero_matches_series_bisection() {
        let z = j0_first_zero_oracle();
        assert!((z - 2.404825557695773).abs() < 1e-12);
        assert!(bessel_j(0, 2.404825557695773).unwrap().abs() < 1e-12);
    }

    #[test]
    fn negative_order_is_minus_j1() {
        let x = 1.7;
        assert_eq!(
            bessel_j(-1, x).unwrap(),
            -bessel_j(1, x).unwrap()
        );
        assert!(bessel_j(-2, x).is_err());
    }

    #[test]
    fn branch_overlaps() {
        // Series ↔ Miller at the J switchover.
        for &x in &[4.0, 4.5, 5.5, 6.0] {
            for n in 0..4u32 {
                let z = Complex::new(x, 0.0);
                let series = j_series(n, z).re;
                let miller = j_miller_sum(n, z).re;
                assert!(
                    (series - miller).abs() < 1e-13,
                    "J{n} series/Miller mismatch at {x}: {series} vs {miller}"
                );
            }
        }
        // Miller ↔ asymptotic at the large-argument switchover.
        for &x in &[16.5, 17.5, 18.0] {
            for n in 0..2u32 {
                let z = Complex::new(x, 0.0);
                let miller = j_miller_sum(n, z).re;
                let asym = j_asymptotic(n, z).re;
                assert!(
                    (miller - asym).abs() < 1e-13,
                    "J{n} Miller/asymptotic mismatch at {x}: {miller} vs {asym}"
                );
            }
        }
        // Y series ↔ asymptotic at its switchover.
        for &x in &[12.5, 12.9, 13.1, 13.5] {
            let z = Complex::new(x, 0.0);
            let ys = y0_series(z).re;
            let ya = ((hankel_asymptotic(0, z, 1.0) - hankel_asymptotic(0, z, -1.0))
                / Complex::new(0.0, 2.0))
            .re;
            assert!((ys - ya).abs() < 1e-11, "Y0 branch mismatch at {x}");
            let ys1 = y1_series(z).re;
            let ya1 = ((hankel_asymptotic(1, z, 1.0) - hankel_asymptotic(1, z, -1.0))
                / Complex::new(0.0, 2.0))
            .re;
            assert!((ys1 - ya1).abs() < 1e-11, "Y1 branch mismatch at {x}");
        }
    }

    #[test]
    fn hankel_small_argument_expansion() {
        // (i/4)H₀⁽¹⁾(z) = −(1/2π)log z + Γ + O(z² log z) with
        // Γ = i/4 + (1/2π)(log 2 − γ).
        let gamma_const = Complex::new(
            (2.0f64.ln() - EULER_GAMMA) / (2.0 * std::f64::consts::PI),
            0.25,
        );
        for &r in &[1e-3, 1e-4, 1e-5] {
            let z = Complex::new(r, 0.5 * r);
            let lhs = Complex::new(0.0, 0.25) * hankel1_0(z).unwrap();
            let rhs = -z.ln() / (2.0 * std::f64::consts::PI) + gamma_const;
            let err = (lhs - rhs).norm();
            assert!(
                err < 2.0 * r * r * r.ln().abs(),
                "expansion error {err} too large at |z| ~ {r}"
            );
        }
    }

    #[test]
    fn hankel_at_one_matches_series() {
        let h = hankel1_0(Complex::new(1.0, 0.0)).unwrap();
        let j0 = j0_oracle(1.0);
        assert!((h.re - j0).abs() < 1e-14);
        // Y₀(1) from the independent log-series formula.
        let y0 = y0_series(Complex::new(1.0, 0.0)).re;
        assert!((h.im - y0).abs() < 1e-14);
    }

    #[test]
    fn hankel_large_argument_magnitude() {
        // |H₀⁽¹⁾(x)| ~ sqrt(2/(πx)) for large real x.
        let x = 50.0;
        let h = hankel1_0(Complex::new(x, 0.0)).unwrap();
        let expect = (2.0 / (std::f64::consts::PI * x)).sqrt();
        assert!((h.norm() - expect).abs() < 1e-3 * expect);
    }

    #[test]
    fn hankel_rejects_lower_half_plane_and_zero() {
        assert!(hankel1_0(Complex::new(0.0, 0.0)).is_err());
        assert!(hankel1_0(Complex::new(1.0, -1.0)).is_err());
    }

    proptest! {
        #[test]
        fn recurrence_identity(k in 1i32..=20, x in 1.0f64..50.0) {
            // J_{k−1}(x) + J_{k+1}(x) = (2k/x) J_k(x)
            let jm = bessel_j(k - 1, x).unwrap();
            let jp = bessel_j(k + 1, x).unwrap();
            let jk = bessel_j(k, x).unwrap();
            let lhs = jm + jp;
            let rhs = 2.0 * k as f64 / x * jk;
            let scale = jm.abs().max(jp.abs()).max(rhs.abs()).max(1e-30);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn wronskian_identity(k in 0i32..=10, x in 0.5f64..50.0) {
            // J_{k+1} Y_k − J_k Y_{k+1} = 2/(πx)
            let w = bessel_j(k + 1, x).unwrap() * bessel_y(k, x).unwrap()
                - bessel_j(k, x).unwrap() * bessel_y(k + 1, x).unwrap();
            let expect = 2.0 / (std::f64::consts::PI * x);
            prop_assert!((w - expect).abs() <= 1e-10 * expect.abs());
        }

        #[test]
        fn complex_recurrence(k in 1i32..=12, re in 0.5f64..20.0, im in 0.0f64..5.0) {
            let z = Complex::new(re, im);
            let jm = bessel_j_complex(k - 1, z).unwrap();
            let jp = bessel_j_complex(k + 1, z).unwrap();
            let jk = bessel_j_complex(k, z).unwrap();
            let lhs = jm + jp;
            let rhs = 2.0 * k as f64 / z * jk;
            let scale = jm.norm().max(jp.norm()).max(rhs.norm()).max(1e-30);
            prop_assert!((lhs - rhs).norm() <= 1e-11 * scale);
        }
    }
}

