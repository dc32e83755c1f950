//! Newton maps of entire functions `F(z) = e^{Λz} Ψ(e^{2πiz})` and the
//! pseudotrigonometric family `N_λ(z) = z + M_λ(e^{2πiz})`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::kernel::{poly_roots, scale, Polynomial, RationalMap, SpherePoint, PI_I, TWO_PI_I};
use crate::maps::{m_lambda, ProjectableMap};
use crate::{Error, Result};
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Data `(Λ, m₀, P, Q, Q̃)` of `Ψ(w) = w^{m₀} P(w) exp(Q(w) + Q̃(1/w))`.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonSpec {
    pub lambda_cap: Complex64,
    pub m0: i64,
    pub p: Polynomial,
    pub q: Polynomial,
    pub qt: Polynomial,
    pub allow_zero_free: bool,
}

impl NewtonSpec {
    /// `F_λ(z) = e^{(λ−πi)z}(e^{2πiz} − 1)`, whose Newton map is `z + M_λ(e^{2πiz})`.
    pub fn f_lambda(lambda: Complex64) -> Self {
        NewtonSpec {
            lambda_cap: lambda - PI_I,
            m0: 0,
            p: Polynomial::linear(-one(), one()),
            q: Polynomial::zero(),
            qt: Polynomial::zero(),
            allow_zero_free: false,
        }
    }

    /// `F(z) = e^{λz} exp(e^{2πiz})`.
    pub fn buff_ruckert(lambda: Complex64) -> Self {
        NewtonSpec {
            lambda_cap: lambda,
            m0: 0,
            p: Polynomial::one(),
            q: Polynomial::monomial(one(), 1),
            qt: Polynomial::zero(),
            allow_zero_free: true,
        }
    }

    /// The parameter `λ = Λ + πi(2m₀ + deg P)`.
    pub fn lambda(&self) -> Complex64 {
        self.lambda_cap + PI_I * (2 * self.m0 + self.p.degree() as i64) as f64
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    PIsZero,
    PVanishesAtOrigin,
    NoRootInCStar,
    /// `Λ = −2πi(m₀ + deg P)` with `Q` constant.
    LambdaAtInfinityPole,
    /// `Λ = −2πi m₀` with `Q̃` constant.
    LambdaAtZeroPole,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::PIsZero => "P is the zero polynomial",
            Violation::PVanishesAtOrigin => "P(0) = 0",
            Violation::NoRootInCStar => "P has no root in C*",
            Violation::LambdaAtInfinityPole => "Λ = −2πi(m0 + deg P) while Q is constant",
            Violation::LambdaAtZeroPole => "Λ = −2πi·m0 while Q̃ is constant",
        })
    }
}

/// Every violated constraint of the spec, empty when valid.
pub fn validate_newton_spec(s: &NewtonSpec) -> Vec<Violation> {
    let mut v = Vec::new();
    if s.p.is_zero() {
        v.push(Violation::PIsZero);
    } else {
        if s.p.coeff(0).norm() <= 1e-14 * s.p.max_abs_coeff() {
            v.push(Violation::PVanishesAtOrigin);
        }
        if !s.allow_zero_free && s.p.degree() == 0 {
            v.push(Violation::NoRootInCStar);
        }
    }
    let near = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-12 * scale(b);
    let deg_p = s.p.degree() as f64;
    if s.q.degree() == 0 && near(s.lambda_cap, -TWO_PI_I * (s.m0 as f64 + deg_p)) {
        v.push(Violation::LambdaAtInfinityPole);
    }
    if s.qt.degree() == 0 && near(s.lambda_cap, -TWO_PI_I * s.m0 as f64) {
        v.push(Violation::LambdaAtZeroPole);
    }
    v
}

fn check(s: &NewtonSpec) -> Result<()> {
    let v = validate_newton_spec(s);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(v))
    }
}

/// Distinct roots of `P` with multiplicities.
fn distinct_roots(p: &Polynomial) -> Vec<(Complex64, usize)> {
    if p.degree() == 0 {
        return Vec::new();
    }
    poly_roots(p)
        .expect("degree checked")
        .into_iter()
        .map(|(r, m)| (r.finite().expect("finite root"), m))
        .collect()
}

/// Newton map `z − F(z)/F'(z) = z + R_Λ(e^{2πiz})`.
///
/// `R_Λ = −w^{q̃}P̃ / ((Λ+2πim₀)w^{q̃}P̃ + 2πi w^{q̃+1}(P'P̃/P + P̃Q') − 2πi P̃ w^{q̃−1}Q̃'(1/w))`
/// with `P̃` the monic polynomial on the distinct roots of `P`.
pub fn build_newton_map(s: &NewtonSpec) -> Result<ProjectableMap> {
    check(s)?;
    let roots = distinct_roots(&s.p);
    let distinct: Vec<Complex64> = roots.iter().map(|r| r.0).collect();
    let p_tilde = Polynomial::from_roots(&distinct);

    // P'P̃/P = Σ m_j ∏_{k≠j} (w − A_k)
    let mut log_part = Polynomial::zero();
    for (j, &(_, m)) in roots.iter().enumerate() {
        let others: Vec<Complex64> = distinct
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &a)| a)
            .collect();
        log_part =
            &log_part + &Polynomial::from_roots(&others).scale(Complex64::new(m as f64, 0.0));
    }

    let qt_deg = s.qt.degree();
    // w^{q̃−1} Q̃'(1/w) = Σ_{k≥1} k c_k w^{q̃−k}
    let mut tail = Polynomial::zero();
    for k in 1..=qt_deg {
        let term = Polynomial::monomial(s.qt.coeff(k) * k as f64, qt_deg - k);
        tail = &tail + &term;
    }

    let num = -&p_tilde.shift_up(qt_deg);
    let lam0 = s.lambda_cap + TWO_PI_I * s.m0 as f64;
    let inner = &log_part + &(&p_tilde * &s.q.derivative());
    let den = &(&p_tilde.shift_up(qt_deg).scale(lam0)
        + &inner.shift_up(qt_deg + 1).scale(TWO_PI_I))
        - &(&p_tilde * &tail).scale(TWO_PI_I);
    let phi = RationalMap::new(num, den)?;
    ProjectableMap::new(1, phi, "newton")
}

/// `(R(0), R(∞))` in closed form.
pub fn boundary_values(s: &NewtonSpec) -> Result<(SpherePoint, SpherePoint)> {
    check(s)?;
    let lam0 = s.lambda_cap + TWO_PI_I * s.m0 as f64;
    let r0 = if s.qt.degree() > 0 {
        SpherePoint::ZERO
    } else {
        neg_recip(lam0)
    };
    let rinf = if s.q.degree() > 0 {
        SpherePoint::ZERO
    } else {
        neg_recip(lam0 + TWO_PI_I * s.p.degree() as f64)
    };
    Ok((r0, rinf))
}

fn neg_recip(x: Complex64) -> SpherePoint {
    SpherePoint::Finite(-x).recip()
}

/// `λ ∈ C \ {±πi}` with the derived points `B_λ`, `C_λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudotrigParams {
    lambda: Complex64,
}

impl PseudotrigParams {
    pub fn new(lambda: Complex64) -> Result<Self> {
        if (lambda - PI_I).norm() <= 1e-12 || (lambda + PI_I).norm() <= 1e-12 {
            return Err(Error::ParamSingularity);
        }
        Ok(PseudotrigParams { lambda })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// The essential singularity `B_λ = (λ−πi)/(λ+πi)`.
    pub fn b(&self) -> Complex64 {
        (self.lambda - PI_I) / (self.lambda + PI_I)
    }

    /// The free critical point `C_λ = B_λ²`.
    pub fn c(&self) -> Complex64 {
        let b = self.b();
        b * b
    }
}

pub fn pseudotrig_map(p: &PseudotrigParams) -> Result<ProjectableMap> {
    ProjectableMap::new(1, m_lambda(p.lambda)?, "pseudotrig")
}

/// `(g'(0), g'(∞)) = (exp(2πi/(πi−λ)), exp(2πi/(πi+λ)))`.
pub fn av_multipliers(p: &PseudotrigParams) -> (Complex64, Complex64) {
    let l = p.lambda;
    ((TWO_PI_I / (PI_I - l)).exp(), (TWO_PI_I / (PI_I + l)).exp())
}

/// `w_σ* = (1+(λ−πi)σ)/(1+(λ+πi)σ)` and `g'(w_σ*) = 1 − (1+(λ−πi)σ)(1+(λ+πi)σ)`.
///
/// When `w_σ* = ∞` the multiplier is `1`.
pub fn pseudo_fixed_points(p: &PseudotrigParams, sigma: i64) -> (SpherePoint, Complex64) {
    let s = sigma as f64;
    let a = (p.lambda - PI_I) * s + 1.0;
    let b = (p.lambda + PI_I) * s + 1.0;
    if b.norm() == 0.0 {
        return (SpherePoint::Infinity, one());
    }
    (SpherePoint::new(a / b), one() - a * b)
}

/// `λ_σ^± = −1/σ ± i√(π² − 1/σ²)`, returned as `(λ⁺, λ⁻)`.
pub fn superattracting_params(sigma: i64) -> Result<(Complex64, Complex64)> {
    if sigma == 0 {
        return Err(Error::ZeroSigma);
    }
    let s = sigma as f64;
    let im = (PI * PI - 1.0 / (s * s)).sqrt();
    Ok((Complex64::new(-1.0 / s, im), Complex64::new(-1.0 / s, -im)))
}

/// Relaxed Newton map `z + M_λ(e^{2πiz})/m`.
pub fn relaxed_newton(p: &PseudotrigParams, m: u32) -> Result<ProjectableMap> {
    if m == 0 {
        return Err(Error::InvalidArgument("relaxation m must be at least 1"));
    }
    let phi = m_lambda(p.lambda)?.scale(Complex64::new(1.0 / m as f64, 0.0));
    ProjectableMap::new(1, phi, "relaxed-newton")
}

/// Canonical conjugacy class of a Newton map with a single simple pole in the strip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SinglePoleForm {
    /// Conjugate by `z ↦ z − a₀` to the Newton map of `(e^{αz} sin πz)^m`.
    Trig {
        alpha: Complex64,
        m: usize,
        a0: Complex64,
    },
    /// Conjugate to `z + β/(e^{2πiz}+1)` by `z ↦ z + shift`, preceded by
    /// `z ↦ 1/2 − z` when `reflected`.
    BuffRuckert {
        beta: Complex64,
        shift: Complex64,
        reflected: bool,
    },
}

pub fn normalize_single_pole(s: &NewtonSpec) -> Result<SinglePoleForm> {
    let map = build_newton_map(s)?;
    let phi = map.phi();
    let at_inf = phi.num().degree().saturating_sub(phi.den().degree());
    if phi.den().degree() + at_inf != 1 {
        return Err(Error::NotSinglePole);
    }
    let lambda = s.lambda();
    let log_over = |x: Complex64| x.ln() / TWO_PI_I;
    let (dq, dqt) = (s.q.degree(), s.qt.degree());
    if s.p.degree() > 0 {
        let roots = distinct_roots(&s.p);
        if roots.len() == 1 && dq == 0 && dqt == 0 {
            let (a, m) = roots[0];
            return Ok(SinglePoleForm::Trig {
                alpha: lambda / m as f64,
                m,
                a0: log_over(a),
            });
        }
    } else if dq == 1 && dqt == 0 {
        let c1 = s.q.coeff(1);
        return Ok(SinglePoleForm::BuffRuckert {
            beta: -lambda.inv(),
            shift: log_over(lambda / (TWO_PI_I * c1)),
            reflected: false,
        });
    } else if dqt == 1 && dq == 0 {
        let c1 = s.qt.coeff(1);
        return Ok(SinglePoleForm::BuffRuckert {
            beta: lambda.inv(),
            shift: log_over(lambda / (TWO_PI_I * c1)),
            reflected: true,
        });
    }
    Err(Error::NotSinglePole)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::exp2pii;
    use crate::maps::End;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: SpherePoint, b: Complex64, tol: f64) -> bool {
        a.chordal(SpherePoint::Finite(b)) <= tol
    }

    #[test]
    fn f_lambda_validation() {
        let l = c(0.0, -3.0 * PI);
        assert!(validate_newton_spec(&NewtonSpec::f_lambda(l)).is_empty());
        let v = validate_newton_spec(&NewtonSpec::f_lambda(PI_I));
        assert_eq!(v, vec![Violation::LambdaAtZeroPole]);
        let mut s = NewtonSpec::f_lambda(l);
        s.p = Polynomial::monomial(one(), 1);
        assert!(validate_newton_spec(&s).contains(&Violation::PVanishesAtOrigin));
    }

    #[test]
    fn f_lambda_builds_m_lambda() {
        let l = c(0.7, -1.3);
        let built = build_newton_map(&NewtonSpec::f_lambda(l)).unwrap();
        let direct = pseudotrig_map(&PseudotrigParams::new(l).unwrap()).unwrap();
        for k in 0..2 {
            assert!((built.phi().num().coeff(k) - direct.phi().num().coeff(k)).norm() < 1e-12);
            assert!((built.phi().den().coeff(k) - direct.phi().den().coeff(k)).norm() < 1e-12);
        }
        assert_eq!(built.phi().den().degree(), 1);
    }

    #[test]
    fn buff_ruckert_spec() {
        let l = c(0.4, 1.1);
        let map = build_newton_map(&NewtonSpec::buff_ruckert(l)).unwrap();
        let w = c(0.3, -0.2);
        let v = map.phi().eval_finite(w).finite().unwrap();
        assert!((v + (l + TWO_PI_I * w).inv()).norm() < 1e-14);
        let (r0, rinf) = boundary_values(&NewtonSpec::buff_ruckert(l)).unwrap();
        assert_eq!(rinf, SpherePoint::ZERO);
        assert!(close(r0, -l.inv(), 1e-15));
        match normalize_single_pole(&NewtonSpec::buff_ruckert(l)).unwrap() {
            SinglePoleForm::BuffRuckert {
                beta,
                shift,
                reflected,
            } => {
                assert!((beta + l.inv()).norm() < 1e-14);
                assert!(!reflected);
                // conjugated map z + β/(e^{2πiz}+1)
                let z = c(0.1, 0.05);
                let lhs = map.lift_eval(z + shift).unwrap().finite().unwrap() - shift;
                let rhs = z + beta / (exp2pii(z) + 1.0);
                assert!((lhs - rhs).norm() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn boundary_values_for_baker_parameter() {
        let s = NewtonSpec::f_lambda(c(0.0, -3.0 * PI));
        let (r0, rinf) = boundary_values(&s).unwrap();
        assert!(close(r0, c(0.0, -1.0 / (4.0 * PI)), 1e-15));
        // −1/(Λ + 2πi) with Λ = −4πi is 1/(2πi) = −i/(2π)
        assert!(close(rinf, c(0.0, -1.0 / (2.0 * PI)), 1e-15));
        let g0 = exp2pii(r0.finite().unwrap());
        assert!((g0.norm() - 0.5f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn multipliers_at_baker_parameter() {
        let p = PseudotrigParams::new(c(0.0, -3.0 * PI)).unwrap();
        let (m0, minf) = av_multipliers(&p);
        assert!((m0 - 0.5f64.exp()).norm() < 1e-14);
        assert!((minf - (-1.0f64).exp()).norm() < 1e-14);
        let map = pseudotrig_map(&p).unwrap();
        assert!((map.end_multiplier(End::Zero).unwrap() - m0).norm() < 1e-14);
        assert!((map.end_multiplier(End::Infinity).unwrap() - minf).norm() < 1e-14);
        let (a, b) = av_multipliers(&PseudotrigParams::new(c(0.0, 0.0)).unwrap());
        assert!((a - 2f64.exp()).norm() < 1e-13 && (b - 2f64.exp()).norm() < 1e-13);
    }

    #[test]
    fn pseudo_fixed_points_closed_form() {
        let (lp, lm) = superattracting_params(1).unwrap();
        assert!((lp - c(-1.0, 2.97819)).norm() < 1e-5);
        let p = PseudotrigParams::new(lm).unwrap();
        let (w, mult) = pseudo_fixed_points(&p, 1);
        let s = (PI * PI - 1.0).sqrt();
        let oracle = 1.0 - 2.0 * PI * (PI + s);
        assert!(close(w, c(oracle, 0.0), 1e-12));
        assert!((w.finite().unwrap().re + 37.45171656).abs() < 1e-8);
        assert!(mult.norm() < 1e-12);
        assert!((p.c() - w.finite().unwrap()).norm() < 1e-8 * 37.0);

        let (w0, m0) = pseudo_fixed_points(&p, 0);
        assert_eq!((w0, m0), (SpherePoint::ONE, c(0.0, 0.0)));
        let q = PseudotrigParams::new(c(-1.0, -PI)).unwrap();
        assert_eq!(pseudo_fixed_points(&q, 1), (SpherePoint::Infinity, one()));
        assert_eq!(superattracting_params(0), Err(Error::ZeroSigma));
        let (a, _) = superattracting_params(2).unwrap();
        assert!((a - c(-0.5, 3.1015487100945807)).norm() < 1e-14);
    }

    #[test]
    fn relaxed_multiplier() {
        let p = PseudotrigParams::new(c(0.0, 0.0)).unwrap();
        for (m, want) in [(1u32, 0.0), (2, 0.5), (3, 2.0 / 3.0)] {
            let f = relaxed_newton(&p, m).unwrap();
            let h = 1e-6;
            let d = (f.lift_eval(c(h, 0.0)).unwrap().finite().unwrap()
                - f.lift_eval(c(-h, 0.0)).unwrap().finite().unwrap())
                / (2.0 * h);
            assert!((d - want).norm() < 1e-6, "m={m} d={d}");
        }
        assert_eq!(relaxed_newton(&p, 1).unwrap(), pseudotrig_map(&p).unwrap());
    }

    #[test]
    fn single_pole_trig_case() {
        let a = exp2pii(c(0.3, 0.0));
        let mut s = NewtonSpec::f_lambda(c(0.5, -0.5));
        s.p = Polynomial::linear(-a, one());
        match normalize_single_pole(&s).unwrap() {
            SinglePoleForm::Trig { alpha, m, a0 } => {
                assert_eq!(m, 1);
                assert!((alpha - s.lambda()).norm() < 1e-14);
                assert!((a0 - c(0.3, 0.0)).norm() < 1e-14);
            }
            other => panic!("{other:?}"),
        }
        let mut s = NewtonSpec::buff_ruckert(c(1.0, 0.0));
        s.q = Polynomial::monomial(one(), 2);
        assert_eq!(normalize_single_pole(&s), Err(Error::NotSinglePole));
    }

    #[test]
    fn reflected_case_conjugates() {
        let l = c(0.8, -0.3);
        let s = NewtonSpec {
            lambda_cap: l,
            m0: 0,
            p: Polynomial::one(),
            q: Polynomial::zero(),
            qt: Polynomial::monomial(c(1.5, 0.5), 1),
            allow_zero_free: true,
        };
        let map = build_newton_map(&s).unwrap();
        let SinglePoleForm::BuffRuckert {
            beta,
            shift,
            reflected,
        } = normalize_single_pole(&s).unwrap()
        else {
            panic!()
        };
        assert!(reflected);
        // h(z) = 1/2 − z − shift conjugates N to z + β/(e^{2πiz}+1)
        let h = |z: Complex64| c(0.5, 0.0) - z - shift;
        let z = c(0.13, 0.02);
        let lhs = map.lift_eval(h(z)).unwrap().finite().unwrap();
        let rhs = h(z + beta / (exp2pii(z) + 1.0));
        assert!((lhs - rhs).norm() < 1e-12, "{lhs} {rhs}");
    }
}
