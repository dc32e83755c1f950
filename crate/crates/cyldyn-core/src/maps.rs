//! Projectable maps `f(z) = ℓz + Φ(e^{2πiz})` and their projections
//! `g(w) = w^ℓ e^{2πiΦ(w)}`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::kernel::{exp1, exp2pii, poly_roots, scale, Polynomial, RationalMap, SpherePoint};
use crate::kernel::{PI_I, TAU, TWO_PI_I};
use crate::{Error, Result};

/// `|2π Im z|` above which `e^{2πiz}` is refused.
pub const EXP_GUARD: f64 = 700.0;
/// Chordal radius around `E(g)` inside which `g` is not evaluated.
pub const ESSENTIAL_RADIUS: f64 = 1e-12;

/// Behaviour of `g` at one of the ends `0`, `∞` of the cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndStatus {
    /// `g` extends holomorphically and the end is not critical.
    Regular,
    /// The end is an essential singularity of `g`.
    Essential,
    /// Critical and fixed (`ℓ ≥ 2`).
    CriticalFixed,
    /// Critical and on the 2-cycle `{0, ∞}` (`ℓ ≤ −2`).
    Critical2Cycle,
    /// Critical but neither fixed nor on `{0, ∞}`: `ℓ = 0` with `Φ' = 0` there,
    /// or `ℓ ≤ −2` with the other end essential.
    Critical,
}

impl EndStatus {
    pub fn name(self) -> &'static str {
        match self {
            EndStatus::Regular => "regular",
            EndStatus::Essential => "essential",
            EndStatus::CriticalFixed => "critical-fixed",
            EndStatus::Critical2Cycle => "critical-2-cycle",
            EndStatus::Critical => "critical",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Zero,
    Infinity,
}

/// Essential singularities, critical points and singular values of `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularData {
    pub essential_singularities: Vec<SpherePoint>,
    pub critical_points: Vec<SpherePoint>,
    pub critical_values: Vec<SpherePoint>,
    pub asymptotic_values: Vec<SpherePoint>,
    pub end_status_zero: EndStatus,
    pub end_status_infinity: EndStatus,
}

/// Which of the class-R conditions hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassRReport {
    pub class_r: bool,
    pub finite_at_zero: bool,
    pub finite_at_infinity: bool,
    pub pole_in_cstar: bool,
}

/// The named families.
#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    /// Newton map of `e^{λz} sin πz`: `ℓ = 1`, `Φ = M_λ`.
    Pseudotrig { lambda: Complex64 },
    /// `z + β/(e^{2πiz}+1)`.
    BuffRuckert { beta: Complex64 },
    /// Blaschke-factor standard map, `a` in the punctured unit disk.
    MeroStandard { a: Complex64, alpha: f64, beta: f64 },
    /// `(β/2π) sin 2πz`.
    SineFamily { beta: Complex64 },
    /// `2z + 1 − (1/π) sin 2πz`.
    DoubleStandard,
    /// `z + α − (β/2π) sin 2πz`.
    ArnoldStandard { alpha: f64, beta: f64 },
}

impl Preset {
    pub fn build(&self) -> Result<ProjectableMap> {
        match *self {
            Preset::Pseudotrig { lambda } => {
                let phi = m_lambda(lambda)?;
                ProjectableMap::new(1, phi, "pseudotrig")
            }
            Preset::BuffRuckert { beta } => {
                let phi =
                    RationalMap::new(Polynomial::constant(beta), Polynomial::linear(one(), one()))?;
                ProjectableMap::new(1, phi, "buff-ruckert")
            }
            Preset::MeroStandard { a, alpha, beta } => {
                if (a.norm() - 1.0).abs() < 1e-12 {
                    return Err(Error::InvalidArgument("|a| must differ from 1"));
                }
                // B_a = (w−a)/(1−āw);  B − 1/B = ((w−a)² − (1−āw)²)/((w−a)(1−āw))
                let p = Polynomial::linear(-a, one());
                let q = Polynomial::linear(one(), -a.conj());
                let den = &p * &q;
                let n = &(&p * &p) - &(&q * &q);
                let k = Complex64::new(beta, 0.0) / (Complex64::new(4.0, 0.0) * PI_I);
                let num = &den.scale(Complex64::new(alpha, 0.0)) - &n.scale(k);
                ProjectableMap::new(1, RationalMap::new(num, den)?, "mero-standard")
            }
            Preset::SineFamily { beta } => {
                let phi = sine_part(
                    beta / (Complex64::new(4.0, 0.0) * PI_I),
                    Complex64::new(0.0, 0.0),
                )?;
                ProjectableMap::new(0, phi, "sine")
            }
            Preset::DoubleStandard => {
                let phi = sine_part(-(TWO_PI_I.inv()), one())?;
                ProjectableMap::new(2, phi, "double-standard")
            }
            Preset::ArnoldStandard { alpha, beta } => {
                let k = -Complex64::new(beta, 0.0) / (Complex64::new(4.0, 0.0) * PI_I);
                let phi = sine_part(k, Complex64::new(alpha, 0.0))?;
                ProjectableMap::new(1, phi, "arnold-standard")
            }
        }
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `c0 + k (w² − 1)/w`.
fn sine_part(k: Complex64, c0: Complex64) -> Result<RationalMap> {
    let num = Polynomial::new(vec![-k, c0, k]);
    RationalMap::new(num, Polynomial::monomial(one(), 1))
}

/// `M_λ(w) = −(w−1)/((λ+πi)w − (λ−πi))`.
pub fn m_lambda(lambda: Complex64) -> Result<RationalMap> {
    if (lambda - PI_I).norm() <= 1e-12 || (lambda + PI_I).norm() <= 1e-12 {
        return Err(Error::ParamSingularity);
    }
    RationalMap::new(
        Polynomial::linear(one(), -one()),
        Polynomial::linear(-(lambda - PI_I), lambda + PI_I),
    )
}

/// `z^ℓ e^{2πiu}`, saturating to `0`/`∞` outside the floating range.
fn power_exp(ell: i64, z: Complex64, u: Complex64) -> SpherePoint {
    let zpow_mod = ell as f64 * z.norm().ln();
    let e_mod = -TAU * u.im;
    let log_mod = zpow_mod + e_mod;
    if log_mod > 709.0 {
        return SpherePoint::Infinity;
    }
    if log_mod < -745.0 {
        return SpherePoint::ZERO;
    }
    if e_mod.abs() < 700.0 && zpow_mod.abs() < 700.0 {
        SpherePoint::new(z.powi(ell as i32) * exp2pii(u))
    } else {
        let frac = u.re - u.re.round();
        let arg = ell as f64 * z.arg() + TAU * frac;
        SpherePoint::new(Complex64::from_polar(log_mod.exp(), arg))
    }
}

/// A projectable map with rational `Φ` and cached singular structure.
#[derive(Clone, Debug)]
pub struct ProjectableMap {
    ell: i64,
    phi: RationalMap,
    dphi: RationalMap,
    label: String,
    poles: Vec<Complex64>,
    phi_zero: Option<Complex64>,
    phi_inf: Option<Complex64>,
}

impl PartialEq for ProjectableMap {
    fn eq(&self, other: &Self) -> bool {
        self.ell == other.ell && self.phi == other.phi
    }
}

impl ProjectableMap {
    /// `f(z) = ℓz + Φ(e^{2πiz})`. A constant `Φ` gives a rigid translation,
    /// kept so that degenerate family members stay representable.
    pub fn new(ell: i64, phi: RationalMap, label: &str) -> Result<Self> {
        if ell.unsigned_abs() > 64 {
            return Err(Error::InvalidArgument("|ℓ| must be at most 64"));
        }
        let dphi = phi.derivative();
        let poles = phi
            .poles()
            .into_iter()
            .filter_map(|(p, _)| p.finite())
            .filter(|p| p.norm() > 0.0)
            .collect();
        let phi_zero = phi.eval(SpherePoint::ZERO).finite();
        let phi_inf = phi.at_infinity().finite();
        Ok(ProjectableMap {
            ell,
            phi,
            dphi,
            label: label.to_string(),
            poles,
            phi_zero,
            phi_inf,
        })
    }

    pub fn ell(&self) -> i64 {
        self.ell
    }

    pub fn phi(&self) -> &RationalMap {
        &self.phi
    }

    pub fn dphi(&self) -> &RationalMap {
        &self.dphi
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `E(g) ∩ C*`, the poles of `Φ` off the origin.
    pub fn poles_in_cstar(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn phi_at_zero(&self) -> Option<Complex64> {
        self.phi_zero
    }

    pub fn phi_at_infinity(&self) -> Option<Complex64> {
        self.phi_inf
    }

    pub fn zero_is_essential(&self) -> bool {
        self.phi_zero.is_none()
    }

    pub fn infinity_is_essential(&self) -> bool {
        self.phi_inf.is_none()
    }

    /// `E(g)` on the sphere.
    pub fn essential_singularities(&self) -> Vec<SpherePoint> {
        let mut out: Vec<SpherePoint> =
            self.poles.iter().map(|&p| SpherePoint::Finite(p)).collect();
        if self.zero_is_essential() {
            out.push(SpherePoint::ZERO);
        }
        if self.infinity_is_essential() {
            out.push(SpherePoint::Infinity);
        }
        out
    }

    /// Chordal distance from `w` to the nearest point of `E(g)`, `∞` if empty.
    pub fn distance_to_essential(&self, w: SpherePoint) -> f64 {
        let mut d = f64::INFINITY;
        for &p in &self.poles {
            d = d.min(w.chordal(SpherePoint::Finite(p)));
        }
        if self.zero_is_essential() {
            d = d.min(w.chordal(SpherePoint::ZERO));
        }
        if self.infinity_is_essential() {
            d = d.min(w.chordal(SpherePoint::Infinity));
        }
        d
    }

    /// `f(z) = ℓz + Φ(e^{2πiz})`; `∞` at poles of `f`.
    pub fn lift_eval(&self, z: Complex64) -> Result<SpherePoint> {
        if (TAU * z.im).abs() > EXP_GUARD {
            return Err(Error::ExpOverflow);
        }
        let w = exp2pii(z);
        if self
            .poles
            .iter()
            .any(|&p| SpherePoint::Finite(w).chordal(SpherePoint::Finite(p)) <= ESSENTIAL_RADIUS)
        {
            return Ok(SpherePoint::Infinity);
        }
        Ok(match self.phi.eval_finite(w) {
            SpherePoint::Infinity => SpherePoint::Infinity,
            SpherePoint::Finite(u) => SpherePoint::new(z * self.ell as f64 + u),
        })
    }

    /// `f'(z) = ℓ + 2πi w Φ'(w)` with `w = e^{2πiz}`.
    pub fn lift_derivative(&self, z: Complex64) -> Result<SpherePoint> {
        if (TAU * z.im).abs() > EXP_GUARD {
            return Err(Error::ExpOverflow);
        }
        let w = exp2pii(z);
        Ok(match self.dphi.eval_finite(w) {
            SpherePoint::Infinity => SpherePoint::Infinity,
            SpherePoint::Finite(d) => SpherePoint::new(TWO_PI_I * w * d + self.ell as f64),
        })
    }

    /// `g(w) = w^ℓ e^{2πiΦ(w)}` on the sphere.
    ///
    /// Moduli beyond the floating range saturate to `0` or `∞`.
    pub fn project_eval(&self, w: SpherePoint) -> Result<SpherePoint> {
        if self.distance_to_essential(w) <= ESSENTIAL_RADIUS {
            return Err(Error::AtEssentialSingularity);
        }
        match w {
            SpherePoint::Infinity => Ok(self.end_value(self.phi_inf, -1)),
            SpherePoint::Finite(z) if z.re == 0.0 && z.im == 0.0 => {
                Ok(self.end_value(self.phi_zero, 1))
            }
            SpherePoint::Finite(z) => match self.phi.eval_finite(z) {
                SpherePoint::Infinity => Err(Error::AtEssentialSingularity),
                SpherePoint::Finite(u) => Ok(power_exp(self.ell, z, u)),
            },
        }
    }

    /// Value at an end; `sign` is `+1` at zero and `−1` at infinity.
    fn end_value(&self, phi: Option<Complex64>, sign: i64) -> SpherePoint {
        let u = phi.expect("end is regular");
        match (self.ell * sign).signum() {
            1 => SpherePoint::ZERO,
            -1 => SpherePoint::Infinity,
            _ => exp1(u),
        }
    }

    /// `g'(w) = w^{ℓ−1} e^{2πiΦ(w)} (ℓ + 2πi w Φ'(w))` for finite `w`.
    ///
    /// At `w = 0` the value is the limit when it exists.
    pub fn project_derivative(&self, w: Complex64) -> Result<SpherePoint> {
        if self.distance_to_essential(SpherePoint::Finite(w)) <= ESSENTIAL_RADIUS {
            return Err(Error::AtEssentialSingularity);
        }
        if w.re == 0.0 && w.im == 0.0 {
            let u = self.phi_zero.expect("regular end");
            return Ok(match self.ell {
                1 => SpherePoint::new(exp2pii(u)),
                l if l >= 2 => SpherePoint::ZERO,
                0 => {
                    let d = self.dphi.eval(SpherePoint::ZERO);
                    match d {
                        SpherePoint::Finite(d) => SpherePoint::new(TWO_PI_I * d * exp2pii(u)),
                        SpherePoint::Infinity => SpherePoint::Infinity,
                    }
                }
                _ => SpherePoint::Infinity,
            });
        }
        let u = match self.phi.eval_finite(w) {
            SpherePoint::Finite(u) => u,
            SpherePoint::Infinity => return Err(Error::AtEssentialSingularity),
        };
        let d = match self.dphi.eval_finite(w) {
            SpherePoint::Finite(d) => d,
            SpherePoint::Infinity => return Err(Error::AtEssentialSingularity),
        };
        let factor = TWO_PI_I * w * d + self.ell as f64;
        Ok(match power_exp(self.ell - 1, w, u) {
            SpherePoint::Finite(v) => SpherePoint::new(v * factor),
            SpherePoint::Infinity => SpherePoint::Infinity,
        })
    }

    /// Multiplier of `g` at a fixed end (`ℓ ≥ 1` and the end regular).
    ///
    /// For `ℓ = 1`: `g'(0) = e^{2πiΦ(0)}`, and `e^{−2πiΦ(∞)}` in the chart `1/w`.
    pub fn end_multiplier(&self, end: End) -> Option<Complex64> {
        let u = match end {
            End::Zero => self.phi_zero?,
            End::Infinity => self.phi_inf?,
        };
        match self.ell {
            1 => Some(match end {
                End::Zero => exp2pii(u),
                End::Infinity => exp2pii(-u),
            }),
            l if l >= 2 => Some(Complex64::new(0.0, 0.0)),
            _ => None,
        }
    }

    /// Whether the end is critical for `g` (only meaningful when regular).
    fn end_critical(&self, end: End) -> bool {
        if self.ell.unsigned_abs() >= 2 {
            return true;
        }
        if self.ell != 0 {
            return false;
        }
        let d = match end {
            End::Zero => self.dphi.eval(SpherePoint::ZERO),
            End::Infinity => self
                .phi
                .invert_variable()
                .derivative()
                .eval(SpherePoint::ZERO),
        };
        matches!(d, SpherePoint::Finite(v) if v.norm() <= 1e-12)
    }

    pub fn end_status(&self, end: End) -> EndStatus {
        let (regular, other_regular) = match end {
            End::Zero => (!self.zero_is_essential(), !self.infinity_is_essential()),
            End::Infinity => (!self.infinity_is_essential(), !self.zero_is_essential()),
        };
        if !regular {
            return EndStatus::Essential;
        }
        if !self.end_critical(end) {
            return EndStatus::Regular;
        }
        if self.ell >= 2 {
            EndStatus::CriticalFixed
        } else if self.ell <= -2 && other_regular {
            EndStatus::Critical2Cycle
        } else {
            EndStatus::Critical
        }
    }

    pub fn singular_data(&self) -> SingularData {
        let essential = self.essential_singularities();

        // critical points in C*: roots of ℓ·D + 2πi w N with Φ' = N/D
        let crit_poly = &self.dphi.den().scale(Complex64::new(self.ell as f64, 0.0))
            + &self.dphi.num().shift_up(1).scale(TWO_PI_I);
        let mut critical: Vec<SpherePoint> = Vec::new();
        if crit_poly.degree() > 0 {
            for (r, _) in poly_roots(&crit_poly).unwrap_or_default() {
                let Some(z) = r.finite() else { continue };
                if z.norm() == 0.0 || self.distance_to_essential(r) <= 1e-9 {
                    continue;
                }
                if critical.iter().all(|c| c.chordal(r) > 1e-9) {
                    critical.push(r);
                }
            }
        }
        let sz = self.end_status(End::Zero);
        let si = self.end_status(End::Infinity);
        let is_crit = |s: EndStatus| !matches!(s, EndStatus::Regular | EndStatus::Essential);
        if is_crit(sz) {
            critical.push(SpherePoint::ZERO);
        }
        if is_crit(si) {
            critical.push(SpherePoint::Infinity);
        }

        let mut values: Vec<SpherePoint> = Vec::new();
        for &c in &critical {
            if let Ok(v) = self.project_eval(c) {
                if values.iter().all(|x| x.chordal(v) > 1e-9) {
                    values.push(v);
                }
            }
        }

        let asymptotic = if self.poles.is_empty()
            && !self.zero_is_essential()
            && !self.infinity_is_essential()
        {
            Vec::new()
        } else {
            vec![SpherePoint::ZERO, SpherePoint::Infinity]
        };

        SingularData {
            essential_singularities: essential,
            critical_points: critical,
            critical_values: values,
            asymptotic_values: asymptotic,
            end_status_zero: sz,
            end_status_infinity: si,
        }
    }

    pub fn class_r_report(&self) -> ClassRReport {
        let finite_at_zero = !self.zero_is_essential();
        let finite_at_infinity = !self.infinity_is_essential();
        let pole_in_cstar = !self.poles.is_empty();
        ClassRReport {
            class_r: finite_at_zero && finite_at_infinity && pole_in_cstar,
            finite_at_zero,
            finite_at_infinity,
            pole_in_cstar,
        }
    }

    pub fn is_class_r(&self) -> bool {
        self.class_r_report().class_r
    }

    /// Chordal distance between `exp₁(f(z))` and `g(exp₁(z))`.
    pub fn semiconjugacy_residual(&self, z: Complex64) -> Result<f64> {
        let fz = self.lift_eval(z)?;
        let lhs = match fz {
            SpherePoint::Finite(v) => exp1(v),
            SpherePoint::Infinity => return Err(Error::AtEssentialSingularity),
        };
        let rhs = self.project_eval(exp1(z))?;
        Ok(lhs.chordal(rhs))
    }

    /// `g^n(w)`, failing if the orbit meets `E(g)`.
    pub fn project_iterate(&self, w: SpherePoint, n: usize) -> Result<SpherePoint> {
        let mut v = w;
        for _ in 0..n {
            v = self.project_eval(v)?;
        }
        Ok(v)
    }

    /// `f^n(z)`, failing at poles or on exponent overflow.
    pub fn lift_iterate(&self, z: Complex64, n: usize) -> Result<Complex64> {
        let mut v = z;
        for _ in 0..n {
            v = self
                .lift_eval(v)?
                .finite()
                .ok_or(Error::AtEssentialSingularity)?;
        }
        Ok(v)
    }

    /// `(g^n)'(w)` by the chain rule along the orbit, together with `g^n(w)`.
    pub fn project_iterate_derivative(
        &self,
        w: Complex64,
        n: usize,
    ) -> Result<(SpherePoint, Complex64)> {
        let mut v = SpherePoint::Finite(w);
        let mut d = Complex64::new(1.0, 0.0);
        for _ in 0..n {
            let z = v.finite().ok_or(Error::AtEssentialSingularity)?;
            d *= self
                .project_derivative(z)?
                .finite()
                .ok_or(Error::AtEssentialSingularity)?;
            v = self.project_eval(v)?;
        }
        Ok((v, d))
    }

    /// True when `w` sits on a zero of `Φ` (a fixed point lifting to fixed points of `f`).
    pub fn is_phi_zero(&self, w: Complex64, tol: f64) -> bool {
        matches!(self.phi.eval_finite(w), SpherePoint::Finite(u) if u.norm() <= tol * scale(w))
    }
}
