//! Special functions, root finding, and singular quadrature.
//!
//! The numerical modules share three ingredients:
//!
//! * Bessel/Hankel functions ([`bessel_j`], [`bessel_y`], [`hankel1`],
//!   [`hankel1_0`]) — power series for small arguments, Hankel-type
//!   asymptotic expansions for large arguments.
//! * A scan-and-bisect root finder ([`find_roots`]) used for the
//!   transcendental eigenvalue equations of the disc spectrum.
//! * Quadrature for the logarithmic kernel ([`quad_log_singular`],
//!   [`Cell`]) — the kernel `−(1/2π)·log|x−y|` of the logarithmic
//!   potential operator is integrated by fanning the cell from the
//!   singular point and integrating `r·log r` exactly in the radial
//!   direction.
//!
//! All functions here are pure; they hold no state and are safe to call
//! from any number of threads.

mod bessel;
mod quad;
mod roots;

pub use bessel::{bessel_j, bessel_j_complex, bessel_y, hankel1, hankel1_0, EULER_GAMMA};
pub use quad::{gauss_legendre, quad_log_singular, Cell, Edge};
pub use roots::{find_roots, find_roots_with, Bracket, RootConfig};
