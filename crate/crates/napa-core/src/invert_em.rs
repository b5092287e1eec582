//! Electromagnetic inversions from phaseless internal data and from
//! resonant pressure combinations:
//!
//! * `recover_u0_abs_one_particle` — |u₀(z)| from ∫_D|u₁|² at a detuned
//!   resonance,
//! * `recover_k_abs_dimer` — |k|(z) (through log|k|) from the contrast
//!   ratio of single-particle vs dimer internal-field masses,
//! * `split_eps_sigma` — (ε_r, σ_Ω) from |k| at two distinct resonant
//!   frequencies,
//! * `localize_from_pressure` — |x−z| from the two-time quotient of the
//!   resonant pressure combination, and ẑ by intersecting two sensor
//!   circles,
//! * `recover_u0_abs_from_pressure` — |u₀(z)| directly from the
//!   combination value at one space-time point.
//!
//! All operations are pure formula evaluations; the heavy lifting
//! happened upstream (field solves, acoustic inversion).

use crate::model::OmegaDomain;
use crate::resonance::SpectralData;
use crate::{kernel_gamma, Complex, Error, Point, Result};

const PI: f64 = std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * PI;

/// Where phaseless internal data came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSource {
    AcousticInversion,
    DirectPressureFormula,
}

/// Phaseless internal quantities for one experiment (one particle or a
/// dimer): the L² mass of the internal field and/or the squared modal
/// coefficient.
#[derive(Debug, Clone)]
pub struct InternalData {
    /// ∫_D |u|² dx (per particle; a dimer carries one entry per
    /// particle, averaged where a single number is needed — the
    /// expansion does not distinguish the two centers).
    pub int_u_sq: Vec<f64>,
    /// |⟨u, e_{n₀}⟩|² where ⟨u, e⟩ = a·⟨u, e⟩_B (the scaling under
    /// which |⟨u,e⟩|² ≈ ∫_D|u|² for a single-mode field).
    pub coeff_abs_sq: Option<f64>,
    pub source: DataSource,
    /// Symbolic size of the neglected remainder, for reporting.
    pub error_order: String,
}

impl InternalData {
    pub fn new(int_u_sq: Vec<f64>, source: DataSource, error_order: &str) -> Result<Self> {
        if int_u_sq.iter().any(|&v| v < 0.0) {
            return Err(Error::invalid("internal data must be nonnegative".to_string()));
        }
        Ok(InternalData {
            int_u_sq,
            coeff_abs_sq: None,
            source,
            error_order: error_order.to_string(),
        })
    }

    /// Relative mismatch of the two stored quantities under the link
    /// `|∫_D v|² = a²(∫_B ē_{n₀})²·∫_D|v|² + O(a⁴|log a|^h)`, which in
    /// the coefficient normalization used here (⟨u,e⟩ carries one
    /// factor of a) reduces to |⟨u,e⟩|² ≈ ∫_D|u|². `None` when only one
    /// quantity is present.
    pub fn consistency_residual(&self) -> Option<f64> {
        let coeff = self.coeff_abs_sq?;
        let int = self.int_u_sq.first().copied()?;
        let scale = coeff.abs().max(int.abs()).max(f64::MIN_POSITIVE);
        Some((coeff - int).abs() / scale)
    }

    pub fn mean_int_u_sq(&self) -> Result<f64> {
        if self.int_u_sq.is_empty() {
            return Err(Error::invalid("no internal-field data".to_string()));
        }
        Ok(self.int_u_sq.iter().sum::<f64>() / self.int_u_sq.len() as f64)
    }
}

/// Everything an inversion produced, including intermediates.
#[derive(Debug, Clone, Default)]
pub struct InversionReport {
    pub z_hat: Vec<Point>,
    pub u0_abs: Option<f64>,
    pub k_abs: Option<f64>,
    pub log_k_abs: Option<f64>,
    pub eps_r_hat: Option<f64>,
    pub sigma_hat: Option<f64>,
    /// (name, value) pairs of intermediates (C, Φ₀, A₁, discarded Im C,
    /// radii, residuals …).
    pub diagnostics: Vec<(String, f64)>,
    pub warnings: Vec<String>,
    pub error_order: String,
}

/// Detuning residual with the Green-kernel constant resummed:
///
/// ```text
/// res_eff = (1 − ω²μ₀τλ_{n₀}) − ω²μ₀τ(∫_D e_{n₀})²·(−(1/2π)log k + Γ).
/// ```
///
/// The Helmholtz kernel splits into the Newtonian log part (absorbed
/// into λ_{n₀}) plus the constant −(1/2π)log k + Γ, whose rank-one
/// coupling to the mean-carrying mode shifts the resonant denominator
/// by O(|log a|^{−1}) — same order as the detuning when h → 1, and not
/// negligible against it at practical a. The recovery formulas must
/// use this resummed residual; with the bare one the relative error is
/// O(|log a|^{h−1}) and does not reach the stated tolerances.
pub fn effective_residual(
    spec: &SpectralData,
    a: f64,
    mu0: f64,
    tau: Complex,
    omega: f64,
    n0: usize,
    k: Complex,
) -> Result<Complex> {
    if k.norm() == 0.0 {
        return Err(Error::invalid("zero background wavenumber".to_string()));
    }
    let ck = -k.ln() / TWO_PI + kernel_gamma();
    let int_e = a * spec.means[n0];
    let bare = crate::resonance::detuning_residual(spec, a, mu0, tau, n0, omega);
    Ok(bare - omega * omega * mu0 * tau * int_e * int_e * ck)
}

/// |u₀(z)| from one-particle internal data:
/// `∫_D|u₁|² = |u₀(z)|²(∫_D e_{n₀})²/|res_eff|² + O(a²)` with the
/// resummed residual of [`effective_residual`] (`k` is the background
/// wavenumber).
#[allow(clippy::too_many_arguments)]
pub fn recover_u0_abs_one_particle(
    data: &InternalData,
    spec: &SpectralData,
    a: f64,
    mu0: f64,
    tau: Complex,
    omega: f64,
    n0: usize,
    k: Complex,
) -> Result<InversionReport> {
    let int_e = a * spec.means[n0];
    if int_e.abs() < 1e-12 {
        return Err(Error::invalid(format!(
            "mode {n0} has vanishing mean ∫_D e = {int_e:.3e}; unusable for recovery"
        )));
    }
    let residual = effective_residual(spec, a, mu0, tau, omega, n0, k)?;
    let u0 = residual.norm() * data.mean_int_u_sq()?.sqrt() / int_e.abs();
    Ok(InversionReport {
        u0_abs: Some(u0),
        diagnostics: vec![
            ("detuning_residual_abs".to_string(), residual.norm()),
            ("int_e".to_string(), int_e),
        ],
        error_order: "O(a^2)".to_string(),
        ..Default::default()
    })
}

/// log|k|(z) and |k|(z) from the dimer contrast ratio
/// `A₁ = ∫_D|u₁|²/∫_D|u₂|²` (single-particle to dimer mass ratio),
/// with `Φ₀ = −(1/2π)log|z₁−z₂|` and `C` the real leading part of the
/// scattering coefficient (the discarded imaginary part is reported).
///
/// Through the modal model the two experiments give
/// ∫|u₁|² ∝ 1/|1−CX|² and ∫|u₂|² ∝ 1/|1−C(Φ₀+2X)|² with
/// X = −(1/2π)log k + Γ, so
///
/// ```text
/// |1 − C(Φ₀ + 2X)|² = A₁·|1 − CX|²,
/// ```
///
/// a quadratic in Re X = −(1/2π)log|k| + γ̄ (Im X = 1/4 is fixed by
/// the kernel; `2πγ̄ = log 2 − γ_Euler` — the "Euler constant" of the
/// theorem statement is this renamed quantity). The returned log|k|
/// solves this identity exactly; the first-order truncation
///
/// ```text
/// log|k| = 2πγ̄ − (π/C)·[A₁ − (1−CΦ₀)²]/[A₁ − 2(1−CΦ₀)]
/// ```
///
/// is reported as the `log_k_linearized` diagnostic. The truncation
/// error is O(CX), only negligible once |C| = O(2π|log a|^{h−1}) is
/// small; at reachable radii |C| ≈ 3–5 and the exact solve is the
/// usable route. Only the orientation A₁ = one/two is consistent with
/// the identity; the reverse ratio fails it at leading order.
pub fn recover_k_abs_dimer(
    one: &InternalData,
    two: &InternalData,
    spec: &SpectralData,
    a: f64,
    mu0: f64,
    tau: Complex,
    omega: f64,
    n0: usize,
    z1: Point,
    z2: Point,
    h: f64,
) -> Result<InversionReport> {
    let d = crate::dist(z1, z2);
    if d <= 0.0 {
        return Err(Error::invalid("dimer centers coincide".to_string()));
    }
    let la = a.ln().abs();
    if d < (-la.powf(1.0 - h)).exp() {
        return Err(Error::invalid(format!(
            "dimer distance {d:.3e} below the admissible window exp(−|log a|^(1−h))"
        )));
    }
    let a1 = one.mean_int_u_sq()? / two.mean_int_u_sq()?;
    let c_full = crate::resonance::scattering_coefficient_c(spec, a, mu0, tau, omega, n0)?;
    let c = c_full.leading.re;
    let phi0 = -d.ln() / TWO_PI;
    let one_minus = 1.0 - c * phi0;
    let denom = a1 - 2.0 * one_minus;
    if denom.abs() < 1e-12 {
        return Err(Error::invalid(format!(
            "degenerate dimer data: A₁ − 2(1−CΦ₀) = {denom:.3e}"
        )));
    }
    let gamma_bar = kernel_gamma().re; // (log 2 − γ_Euler)/(2π)
    let log_k_linear = TWO_PI * gamma_bar - (PI / c) * (a1 - one_minus * one_minus) / denom;

    // Primary route: solve the modulus identity
    //   |1 − C(Φ₀ + 2(x + i/4))|² = A₁·|1 − C(x + i/4)|²
    // exactly for x = −(1/2π)log|k| + γ̄ (quadratic in x). The
    // linearized form above drops the i/4 of the kernel constant and
    // the O((Cx)²) terms, both of which are only negligible once
    // |C| = O(2π|log a|^{h−1}) is small — far below reachable radii.
    let qa = (4.0 - a1) * c * c;
    let qb = -4.0 * c * one_minus + 2.0 * a1 * c;
    let qc = one_minus * one_minus + c * c / 4.0 - a1 * (1.0 + c * c / 16.0);
    let roots: Vec<f64> = if qa.abs() < 1e-12 * c * c {
        if qb.abs() < 1e-14 {
            Vec::new()
        } else {
            vec![-qc / qb]
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            Vec::new()
        } else {
            let s = disc.sqrt();
            vec![(-qb + s) / (2.0 * qa), (-qb - s) / (2.0 * qa)]
        }
    };
    if roots.is_empty() {
        return Err(Error::InconsistentData(format!(
            "contrast ratio A₁ = {a1:.6} is outside the range of the dimer modulus model \
             (C = {c:.4}, Φ₀ = {phi0:.4}); no real log|k| solves it"
        )));
    }
    // Two algebraic roots; the physical one keeps |x| = |γ̄ − (1/2π)log k|
    // of order (log k)/2π, i.e. the smaller one for wavenumbers of
    // order unity. The rejected root is reported.
    let mut roots = roots;
    roots.sort_by(|p, q| p.abs().partial_cmp(&q.abs()).unwrap());
    let x = roots[0];
    let log_k = TWO_PI * (gamma_bar - x);

    let mut warnings = Vec::new();
    if h <= 0.5 {
        warnings.push(format!(
            "h = {h} ≤ 1/2: the remainder O(|log a|^max(h−1, 1−2h)) is not small"
        ));
    }
    let mut diagnostics = vec![
        ("A1".to_string(), a1),
        ("C_re".to_string(), c),
        ("C_im_discarded".to_string(), c_full.leading.im),
        ("phi0".to_string(), phi0),
        ("one_minus_c_phi0".to_string(), one_minus),
        ("log_k_linearized".to_string(), log_k_linear),
        ("x".to_string(), x),
    ];
    if roots.len() > 1 {
        diagnostics.push(("x_rejected_root".to_string(), roots[1]));
    }
    Ok(InversionReport {
        k_abs: Some(log_k.exp()),
        log_k_abs: Some(log_k),
        diagnostics,
        warnings,
        error_order: format!("O(|log a|^max({}, {}))", h - 1.0, 1.0 - 2.0 * h),
        ..Default::default()
    })
}

/// (ε_r, σ_Ω) from |k| at two resonances via
/// `(|k_i|/(ω_i²μ₀))² = ε_r² + σ_Ω²/ω_i²`.
pub fn split_eps_sigma(
    k1: f64,
    k2: f64,
    omega1: f64,
    omega2: f64,
    mu0: f64,
) -> Result<InversionReport> {
    if omega1 == omega2 {
        return Err(Error::invalid("two distinct resonances required".to_string()));
    }
    if k1 <= 0.0 || k2 <= 0.0 {
        return Err(Error::invalid("|k| values must be positive".to_string()));
    }
    let y1 = (k1 / (omega1 * omega1 * mu0)).powi(2);
    let y2 = (k2 / (omega2 * omega2 * mu0)).powi(2);
    let w1 = 1.0 / (omega1 * omega1);
    let w2 = 1.0 / (omega2 * omega2);
    let sigma_sq = (y1 - y2) / (w1 - w2);
    let eps_sq = y1 - sigma_sq * w1;
    if eps_sq < -1e-12 * y1.abs() || sigma_sq < -1e-12 * y1.abs() {
        return Err(Error::InconsistentData(format!(
            "two-resonance split gives negative squares: eps_r² = {eps_sq:.3e}, sigma² = {sigma_sq:.3e}"
        )));
    }
    Ok(InversionReport {
        eps_r_hat: Some(eps_sq.max(0.0).sqrt()),
        sigma_hat: Some(sigma_sq.max(0.0).sqrt()),
        diagnostics: vec![("y1".to_string(), y1), ("y2".to_string(), y2)],
        ..Default::default()
    })
}

/// One sensor's two-time pressure-combination measurement.
#[derive(Debug, Clone, Copy)]
pub struct TwoTimeMeasurement {
    pub sensor: Point,
    pub t1: f64,
    pub p1: f64,
    pub t2: f64,
    pub p2: f64,
}

/// Distance |x−z| from the two-time quotient of the combination
/// pressure (whose model is p̃ = −A·t/(t²−|x−z|²)^{3/2}):
///
/// ```text
/// |x−z|² = [t₁²(t₂p̃₁)^{2/3} − t₂²(t₁p̃₂)^{2/3}] / [(t₂p̃₁)^{2/3} − (t₁p̃₂)^{2/3}].
/// ```
pub fn radius_from_two_times(m: &TwoTimeMeasurement, diam: f64) -> Result<f64> {
    if m.t1 <= diam || m.t2 <= diam {
        return Err(Error::invalid(format!(
            "both times must exceed diam(Ω) = {diam}; got {} and {}",
            m.t1, m.t2
        )));
    }
    if m.t1 == m.t2 {
        return Err(Error::invalid("two distinct times required".to_string()));
    }
    if m.p1 == 0.0 || m.p2 == 0.0 {
        return Err(Error::invalid("zero pressure measurement".to_string()));
    }
    let q1 = (m.t2 * m.p1).abs().powf(2.0 / 3.0);
    let q2 = (m.t1 * m.p2).abs().powf(2.0 / 3.0);
    // The model forces the earlier time to carry the larger scaled
    // amplitude; a violated ordering means the data cannot come from
    // the leading form.
    let (ta, qa, tb, qb) = if m.t1 < m.t2 {
        (m.t1, q1, m.t2, q2)
    } else {
        (m.t2, q2, m.t1, q1)
    };
    if qa <= qb {
        return Err(Error::InconsistentData(format!(
            "two-time amplitude ordering violated: |t₂p̃₁|^(2/3) = {qa:.6e} ≤ |t₁p̃₂|^(2/3) = {qb:.6e} at t₁ < t₂"
        )));
    }
    let r_sq = (ta * ta * qa - tb * tb * qb) / (qa - qb);
    if r_sq < 0.0 {
        return Err(Error::InconsistentData(format!(
            "negative two-time radius radicand: |x−z|² = {r_sq:.6e}"
        )));
    }
    Ok(r_sq.sqrt())
}

/// Localizes the particle from one or two sensors' two-time
/// measurements: one sensor gives |x−z|; two give ẑ by circle
/// intersection (interior intersection preferred; both returned with a
/// warning when both are interior).
pub fn localize_from_pressure(
    measurements: &[TwoTimeMeasurement],
    domain: &OmegaDomain,
) -> Result<InversionReport> {
    let diam = domain.diam();
    let radii: Vec<f64> = measurements
        .iter()
        .map(|m| radius_from_two_times(m, diam))
        .collect::<Result<_>>()?;
    let mut report = InversionReport::default();
    for (m, r) in measurements.iter().zip(&radii) {
        report.diagnostics.push((
            format!("radius@({:.3},{:.3})", m.sensor[0], m.sensor[1]),
            *r,
        ));
    }
    if measurements.len() >= 2 {
        let (c1, r1) = (measurements[0].sensor, radii[0]);
        let (c2, r2) = (measurements[1].sensor, radii[1]);
        let d = crate::dist(c1, c2);
        if d == 0.0 {
            return Err(Error::invalid("sensors coincide".to_string()));
        }
        if d > r1 + r2 || d < (r1 - r2).abs() {
            return Err(Error::InconsistentData(format!(
                "sensor circles do not intersect: gap {:.3e} (d = {d:.6}, r₁ = {r1:.6}, r₂ = {r2:.6})",
                if d > r1 + r2 { d - r1 - r2 } else { (r1 - r2).abs() - d }
            )));
        }
        // Standard two-circle intersection.
        let alpha = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
        let h2 = (r1 * r1 - alpha * alpha).max(0.0).sqrt();
        let ex = [(c2[0] - c1[0]) / d, (c2[1] - c1[1]) / d];
        let mid = [c1[0] + alpha * ex[0], c1[1] + alpha * ex[1]];
        let cand = [
            [mid[0] - h2 * ex[1], mid[1] + h2 * ex[0]],
            [mid[0] + h2 * ex[1], mid[1] - h2 * ex[0]],
        ];
        let interior: Vec<Point> = cand
            .iter()
            .copied()
            .filter(|p| domain.boundary_distance(*p) > 1e-9 && inside_domain(domain, *p))
            .collect();
        match interior.len() {
            0 => {
                // Degenerate tangency on the boundary; return the closer
                // candidate anyway with a warning.
                report.z_hat = vec![cand[0]];
                report
                    .warnings
                    .push("no strictly interior intersection; returning tangent point".to_string());
            }
            1 => report.z_hat = interior,
            _ => {
                report.z_hat = interior;
                report
                    .warnings
                    .push("both circle intersections are interior to Ω".to_string());
            }
        }
    }
    Ok(report)
}

fn inside_domain(domain: &OmegaDomain, p: Point) -> bool {
    match domain {
        OmegaDomain::Disc { center, radius } => crate::dist(p, *center) < *radius,
        OmegaDomain::Rectangle { corner, size } => {
            p[0] > corner[0]
                && p[0] < corner[0] + size[0]
                && p[1] > corner[1]
                && p[1] < corner[1] + size[1]
        }
    }
}

/// |u₀(z)| directly from the combination pressure at one point:
///
/// ```text
/// |u₀(z)|² = −|1−ω²μ₀τλ_{n₀}|²·(t²−|x−z|²)^{3/2}·p̃ / (P₂·2t·Im τ·(∫_D e_{n₀})²),
/// ```
///
/// `P₂` the prefactor the pressure record carries (ωβ₀/(2π c_p), or 1
/// in constants-normalized mode). The regime exponents (h, s) of the
/// scenario are checked against the strict window 0 ≤ s < min(h, 1−h);
/// the interval up to max(h, 1−h), which some statements admit, is
/// flagged rather than rejected.
#[allow(clippy::too_many_arguments)]
pub fn recover_u0_abs_from_pressure(
    p_tilde: f64,
    t: f64,
    x: Point,
    z: Point,
    spec: &SpectralData,
    a: f64,
    mu0: f64,
    tau: Complex,
    omega: f64,
    n0: usize,
    p2: f64,
    h: f64,
    s: f64,
    k: Complex,
) -> Result<InversionReport> {
    let mut warnings = Vec::new();
    if s < 0.0 || s >= h.max(1.0 - h) {
        return Err(Error::invalid(format!(
            "regime exponent s = {s} outside [0, max(h, 1−h)) for h = {h}"
        )));
    }
    if s >= h.min(1.0 - h) {
        warnings.push(format!(
            "s = {s} lies in the contested window [min(h,1−h), max(h,1−h)) for h = {h}; \
             the remainder bound is not guaranteed"
        ));
    }
    if tau.im == 0.0 {
        return Err(Error::invalid(
            "Im τ = 0: the pressure carries no signal from the particle".to_string(),
        ));
    }
    let d = crate::dist(x, z);
    if t <= d {
        return Err(Error::invalid(format!(
            "evaluation outside the light cone: t = {t} ≤ |x−z| = {d}"
        )));
    }
    let residual = effective_residual(spec, a, mu0, tau, omega, n0, k)?;
    let int_e = a * spec.means[n0];
    if int_e.abs() < 1e-12 {
        return Err(Error::invalid("mode mean too small".to_string()));
    }
    let u0_sq = -residual.norm_sqr() * (t * t - d * d).powf(1.5) * p_tilde
        / (p2 * 2.0 * t * tau.im * int_e * int_e);
    if u0_sq < 0.0 {
        return Err(Error::InconsistentData(format!(
            "pressure-based |u₀|² came out negative ({u0_sq:.6e}); the measurement is \
             inconsistent with the model"
        )));
    }
    Ok(InversionReport {
        u0_abs: Some(u0_sq.sqrt()),
        diagnostics: vec![
            ("detuning_residual_abs".to_string(), residual.norm()),
            ("distance".to_string(), d),
        ],
        warnings,
        error_order: "O(|log a|^(-min(h,1-h)))".to_string(),
        ..Default::default()
    })
}
