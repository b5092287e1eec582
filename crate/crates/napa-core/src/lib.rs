//! Photoacoustic imaging with high-contrast dielectric nanoparticles (2D).
//!
//! This crate simulates and inverts the photoacoustic modality built on
//! small dielectric nanoparticles whose permittivity contrast is scaled so
//! that they resonate at the injected frequency:
//!
//! 1. **Resonances** — the spectrum of the logarithmic potential operator
//!    on the particle shape sets the dielectric (Mie-electric) resonance
//!    frequencies `ω_n = (μ₀ τ λ_n)^{-1/2}` ([`resonance`]).
//! 2. **Electromagnetic forward problem** — the 2D TM Helmholtz scattering
//!    problem is solved as a Lippmann–Schwinger volume integral equation on
//!    the particles, or through the reduced Foldy–Lax point-scatterer
//!    system ([`forward_em`]).
//! 3. **Acoustic forward problem** — the absorbed electromagnetic energy
//!    `(ωβ₀/c_p)·Im(ε)|u|²` acts as an initial pressure; the wave field is
//!    evaluated by the 2D Poisson formula ([`acoustic`]).
//! 4. **Inversion** — circular-mean / eigenfunction-series acoustic
//!    inversion recovers the initial pressure; closed-form asymptotic
//!    formulas then recover the internal field modulus `|u₀(z)|`, the
//!    background wavenumber modulus `|k|(z)` from particle dimers, particle
//!    positions from two-time pressure quotients, and the `(ε_r, σ_Ω)`
//!    split from two resonances ([`acoustic`], [`invert_em`]).
//!
//! Shared numerical machinery (Bessel/Hankel functions, root finding,
//! log-singular quadrature) lives in [`specfun`]; meshes in [`mesh`]; the
//! scenario/domain model in [`model`].
//!
//! All quantities are nondimensionalized "scenario units"; see the scenario
//! schema in `docs/scenario.md` at the repository root.

pub mod acoustic;
pub mod error;
pub mod forward_em;
pub mod invert_em;
pub mod mesh;
pub mod model;
pub mod resonance;
pub mod specfun;

pub use error::{Error, Result};

/// Complex scalar used throughout (f64 components).
pub type Complex = num_complex::Complex<f64>;

/// 2D point / vector in scenario units.
pub type Point = [f64; 2];

/// Euclidean distance between two points.
#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// The constant Γ of the small-argument Helmholtz kernel expansion
/// `(i/4)H₀⁽¹⁾(k|x−y|) = −(1/2π)log|x−y| − (1/2π)log k + Γ + O(r²log r)`:
/// `Γ = i/4 + (1/2π)(log 2 − γ)` with γ the Euler–Mascheroni constant.
pub fn kernel_gamma() -> Complex {
    Complex::new(
        (std::f64::consts::LN_2 - specfun::EULER_GAMMA) / (2.0 * std::f64::consts::PI),
        0.25,
    )
}
