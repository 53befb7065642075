//! Special functions: Bessel functions of the first kind, their zeros,
//! spherical Bessel functions, associated Legendre functions and spherical harmonics.

mod bessel;
mod legendre;

pub(crate) use bessel::jv_scaled;
pub use bessel::{bessel_j, bessel_j_prime, bessel_j_scaled, bessel_zero, gamma_p1, ln_gamma_p1, spherical_bessel_j};
pub(crate) use legendre::ylm;
pub use legendre::{assoc_legendre, assoc_legendre_normalized, spherical_harmonic, spherical_harmonic_max};
