use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::TAU;

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub const ZERO: SpherePoint = SpherePoint::Finite(Complex64::new(0.0, 0.0));
    pub const ONE: SpherePoint = SpherePoint::Finite(Complex64::new(1.0, 0.0));

    /// Wraps `z`, sending non-finite values (overflow, NaN) to `Infinity`.
    pub fn new(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn from_re_im(re: f64, im: f64) -> Self {
        Self::new(Complex64::new(re, im))
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    pub fn is_infinity(self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn is_zero(self) -> bool {
        matches!(self, SpherePoint::Finite(z) if z.re == 0.0 && z.im == 0.0)
    }

    /// `|w|`, with `∞` for the point at infinity.
    pub fn modulus(self) -> f64 {
        match self {
            SpherePoint::Finite(z) => z.norm(),
            SpherePoint::Infinity => f64::INFINITY,
        }
    }

    pub fn recip(self) -> Self {
        match self {
            SpherePoint::Infinity => SpherePoint::ZERO,
            SpherePoint::Finite(z) if z.re == 0.0 && z.im == 0.0 => SpherePoint::Infinity,
            SpherePoint::Finite(z) => SpherePoint::new(cinv(z)),
        }
    }

    pub fn conj(self) -> Self {
        match self {
            SpherePoint::Finite(z) => SpherePoint::Finite(z.conj()),
            SpherePoint::Infinity => SpherePoint::Infinity,
        }
    }

    /// Chordal distance `2|a−b| / √((1+|a|²)(1+|b|²))`, in `[0, 2]`.
    pub fn chordal(self, other: SpherePoint) -> f64 {
        match (self, other) {
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
            (SpherePoint::Finite(a), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(a)) => {
                let n = a.norm();
                if n > 1.0 {
                    2.0 / (n * (1.0 + 1.0 / (n * n)).sqrt())
                } else {
                    2.0 / (1.0 + n * n).sqrt()
                }
            }
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
                let (na, nb) = (a.norm(), b.norm());
                if na > 1e100 || nb > 1e100 {
                    return self.recip().chordal(other.recip());
                }
                2.0 * (a - b).norm() / ((1.0 + na * na).sqrt() * (1.0 + nb * nb).sqrt())
            }
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::new(z)
    }
}

/// `1/z` without intermediate overflow.
pub(crate) fn cinv(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    if a.abs() >= b.abs() {
        let r = b / a;
        let d = a + b * r;
        Complex64::new(1.0 / d, -r / d)
    } else {
        let r = a / b;
        let d = a * r + b;
        Complex64::new(r / d, -1.0 / d)
    }
}

/// `n/d` without intermediate overflow.
pub(crate) fn cdiv(n: Complex64, d: Complex64) -> Complex64 {
    let (a, b, c, e) = (n.re, n.im, d.re, d.im);
    if c.abs() >= e.abs() {
        let r = e / c;
        let den = c + e * r;
        Complex64::new((a + b * r) / den, (b - a * r) / den)
    } else {
        let r = c / e;
        let den = c * r + e;
        Complex64::new((a * r + b) / den, (b * r - a) / den)
    }
}

/// `e^{2πiz}` with the real part reduced mod 1 before the trigonometric step.
pub fn exp2pii(z: Complex64) -> Complex64 {
    let frac = z.re - z.re.round();
    let m = (-TAU * z.im).exp();
    let (s, c) = (TAU * frac).sin_cos();
    Complex64::new(m * c, m * s)
}

/// `exp₁(z) = e^{2πiz}` as a sphere point, saturating to `0` or `∞`.
pub fn exp1(z: Complex64) -> SpherePoint {
    let lm = -TAU * z.im;
    if lm > 709.0 {
        SpherePoint::Infinity
    } else if lm < -745.0 {
        SpherePoint::ZERO
    } else {
        SpherePoint::new(exp2pii(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chordal_basics() {
        let a = SpherePoint::from_re_im(1.0, 0.0);
        assert_eq!(a.chordal(a), 0.0);
        assert!((SpherePoint::ZERO.chordal(SpherePoint::Infinity) - 2.0).abs() < 1e-15);
        assert!((a.chordal(SpherePoint::Infinity) - 2f64.sqrt()).abs() < 1e-15);
        let b = SpherePoint::from_re_im(1e200, 0.0);
        assert!(b.chordal(SpherePoint::Infinity) < 1e-199);
    }

    #[test]
    fn chordal_is_inversion_invariant() {
        let a = SpherePoint::from_re_im(0.3, -2.0);
        let b = SpherePoint::from_re_im(-4.0, 0.25);
        assert!((a.chordal(b) - a.recip().chordal(b.recip())).abs() < 1e-15);
    }

    #[test]
    fn new_saturates() {
        assert_eq!(
            SpherePoint::from_re_im(f64::INFINITY, 0.0),
            SpherePoint::Infinity
        );
        assert_eq!(
            SpherePoint::from_re_im(f64::NAN, 0.0),
            SpherePoint::Infinity
        );
        assert_eq!(SpherePoint::ZERO.recip(), SpherePoint::Infinity);
    }

    #[test]
    fn exp1_quarter_turns() {
        let w = exp2pii(Complex64::new(0.25, 0.0));
        assert!((w - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let w = exp2pii(Complex64::new(1e9 + 0.5, 0.0));
        assert!((w + 1.0).norm() < 1e-6);
        assert_eq!(exp1(Complex64::new(0.0, 200.0)), SpherePoint::ZERO);
        assert_eq!(exp1(Complex64::new(0.0, -200.0)), SpherePoint::Infinity);
    }

    #[test]
    fn division_helpers() {
        let n = Complex64::new(3.0, -1.0);
        let d = Complex64::new(-0.5, 2.0);
        assert!((cdiv(n, d) - n / d).norm() < 1e-15);
        assert!((cinv(d) - d.inv()).norm() < 1e-15);
        let big = Complex64::new(1e300, 1e300);
        assert!(cinv(big).norm() > 0.0);
    }
}
