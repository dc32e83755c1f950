//! Sphere arithmetic, polynomials, rational maps and root finding.

mod poly;
mod rational;
mod roots;
mod sphere;

pub use poly::Polynomial;
pub use rational::RationalMap;
pub use roots::poly_roots;
pub use sphere::{exp1, exp2pii, SpherePoint};

use core::f64::consts::PI;
use num_complex::Complex64;

pub(crate) const TAU: f64 = 2.0 * PI;
pub(crate) const PI_I: Complex64 = Complex64::new(0.0, PI);
pub(crate) const TWO_PI_I: Complex64 = Complex64::new(0.0, TAU);

/// `max(1, |z|)`, the scale used for relative tolerances.
pub(crate) fn scale(z: Complex64) -> f64 {
    let n = z.norm();
    if n > 1.0 {
        n
    } else {
        1.0
    }
}
