use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Complex polynomial, coefficients lowest degree first.
///
/// Trailing zero coefficients are trimmed, so the zero polynomial is the
/// empty list and the last stored coefficient is the leading one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| c.re == 0.0 && c.im == 0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `c·w^k`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut v = vec![ZERO; k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// `c0 + c1·w`.
    pub fn linear(c0: Complex64, c1: Complex64) -> Self {
        Self::new(vec![c0, c1])
    }

    /// Monic polynomial `∏(w − r)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Self::one();
        for &r in roots {
            p = &p * &Self::linear(-r, ONE);
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Index of the leading coefficient; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * w + c)
    }

    /// `w^{deg} p(1/w)` evaluated at `u = 1/w`, i.e. the reversed polynomial at `u`.
    pub fn eval_reversed(&self, u: Complex64) -> Complex64 {
        self.coeffs.iter().fold(ZERO, |acc, &c| acc * u + c)
    }

    /// `Σ |a_k| |w|^k`, the magnitude scale for relative residual tests.
    pub fn eval_abs(&self, r: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Value and first derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, w: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * w + p;
            p = p * w + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Quotient and remainder of division by a nonzero polynomial.
    pub fn div_rem(&self, d: &Polynomial) -> (Polynomial, Polynomial) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        if self.coeffs.len() < d.coeffs.len() {
            return (Self::zero(), self.clone());
        }
        let dd = d.degree();
        let lead = d.leading();
        let mut rem = self.coeffs.clone();
        let mut q = vec![ZERO; self.coeffs.len() - dd];
        for k in (0..q.len()).rev() {
            let c = rem[k + dd] / lead;
            q[k] = c;
            for (j, &dj) in d.coeffs.iter().enumerate() {
                rem[k + j] -= c * dj;
            }
            rem[k + dd] = ZERO;
        }
        rem.truncate(dd);
        (Self::new(q), Self::new(rem))
    }

    /// Quotient of synthetic division by `(w − r)`, remainder dropped.
    pub fn deflate(&self, r: Complex64) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let n = self.coeffs.len() - 1;
        let mut q = vec![ZERO; n];
        let mut acc = ZERO;
        for k in (0..n).rev() {
            acc = acc * r + self.coeffs[k + 1];
            q[k] = acc;
        }
        Self::new(q)
    }

    /// Number of exact zero coefficients at the low end, i.e. the order of the root at 0.
    pub fn low_order_zeros(&self) -> usize {
        self.coeffs
            .iter()
            .take_while(|c| c.re == 0.0 && c.im == 0.0)
            .count()
    }

    /// `p(w)/w^k` for `k` not above [`low_order_zeros`](Self::low_order_zeros).
    pub fn shift_down(&self, k: usize) -> Self {
        Self::new(self.coeffs[k.min(self.coeffs.len())..].to_vec())
    }

    /// `w^k · p(w)`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut v = vec![ZERO; k];
        v.extend_from_slice(&self.coeffs);
        Self::new(v)
    }

    /// Coefficients reversed about degree `n`: `w^n p(1/w)`.
    pub fn reversed(&self, n: usize) -> Self {
        let mut v = vec![ZERO; n + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            v[n - k] = c;
        }
        Self::new(v)
    }

    /// `p^k`.
    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut v = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Polynomial::new(v)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-ONE)
    }
}
