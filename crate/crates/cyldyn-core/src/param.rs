//! The `λ`-plane of the pseudotrigonometric Newton family: membership in `M̃`,
//! internal rays, multiplier maps, the `μ`-chart, symmetries and root searches.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::kernel::{scale, SpherePoint, PI_I, TWO_PI_I};
use crate::maps::{m_lambda, ProjectableMap};
use crate::newton::{av_multipliers, pseudo_fixed_points, PseudotrigParams};
use crate::orbit::{
    classify_orbit, component_lift_diagnosis, LiftDiagnosis, OrbitConfig, OrbitKind,
};
use crate::{Error, Result};

/// Legend slot of a classification: `0` white (root), `1..=7` periods,
/// `8` black (period ≥ 8), `9` gray (`0`/`∞`), `10` undetermined, `11` singular.
pub fn color_index(kind: &OrbitKind) -> u8 {
    match kind {
        OrbitKind::FixedRoot => 0,
        OrbitKind::Cycle { period, .. } => (*period).min(8) as u8,
        OrbitKind::ZeroAv | OrbitKind::InfinityAv => 9,
        OrbitKind::Undetermined => 10,
        OrbitKind::Prepole { .. } | OrbitKind::Escaped => 11,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamClassification {
    pub member: bool,
    pub kind: OrbitKind,
    pub iterations: usize,
    pub color_index: u8,
}

pub fn pseudotrig(lambda: Complex64) -> Result<(PseudotrigParams, ProjectableMap)> {
    let p = PseudotrigParams::new(lambda)?;
    let map = ProjectableMap::new(1, m_lambda(lambda)?, "pseudotrig")?;
    Ok((p, map))
}

/// Classifies the free critical orbit `g_λ^n(C_λ)`.
pub fn mtilde_classify(lambda: Complex64, cfg: &OrbitConfig) -> Result<ParamClassification> {
    let (p, map) = pseudotrig(lambda)?;
    let r = classify_orbit(&map, SpherePoint::new(p.c()), cfg);
    Ok(ParamClassification {
        member: r.kind.is_definitive() && r.kind != OrbitKind::FixedRoot,
        kind: r.kind,
        iterations: r.iterations,
        color_index: color_index(&r.kind),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Theta {
    Rational { r: i64, p: i64 },
    Real(f64),
}

impl Theta {
    pub fn rational(r: i64, p: i64) -> Result<Self> {
        if p <= 0 || r < 0 || r >= p || gcd(r, p) != 1 {
            return Err(Error::InvalidArgument(
                "θ = r/p needs 0 ≤ r < p, gcd(r, p) = 1",
            ));
        }
        Ok(Theta::Rational { r, p })
    }

    pub fn value(self) -> f64 {
        match self {
            Theta::Rational { r, p } => r as f64 / p as f64,
            Theta::Real(x) => x,
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RayComponent {
    /// `0` attracting, `Im λ > π`.
    OmegaPlus,
    /// `∞` attracting, `Im λ < −π`.
    OmegaMinus,
    /// Attracting pseudo-fixed point `w_k*`; `sign` picks the half-plane.
    Omega0k { sign: i8, k: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayQuery {
    pub component: RayComponent,
    pub theta: Theta,
    /// Lift index of the ray for `Ω±`.
    pub k: i64,
    /// Log-radius `t ≤ 0` of the multiplier; `t = 1` asks for the landing point.
    pub t: f64,
}

/// Point at log-radius `t` on an internal ray.
///
/// On `Ω±` the multiplier satisfies `exp⁻¹ρ(λ) = t + 2πi(θ + k)`; on `Ω₀ₖ`,
/// `ρ(λ) = e^{t + 2πiθ}`.
pub fn internal_ray_point(q: &RayQuery) -> Result<Complex64> {
    let t = if q.t == 1.0 {
        0.0
    } else if q.t <= 0.0 {
        q.t
    } else {
        return Err(Error::InvalidArgument(
            "t must be ≤ 0, or 1 for the landing point",
        ));
    };
    let theta = q.theta.value();
    match q.component {
        RayComponent::OmegaPlus | RayComponent::OmegaMinus => {
            let turns = match q.theta {
                Theta::Rational { r, p } => (r + q.k * p) as f64 / p as f64,
                Theta::Real(x) => x + q.k as f64,
            };
            if t == 0.0 && turns == 0.0 {
                return Err(Error::DegenerateRay);
            }
            let s = Complex64::new(t, 0.0) + TWO_PI_I * turns;
            Ok(if q.component == RayComponent::OmegaPlus {
                PI_I - TWO_PI_I / s
            } else {
                -PI_I + TWO_PI_I / s
            })
        }
        RayComponent::Omega0k { sign, k } => {
            if k == 0 || sign == 0 {
                return Err(Error::InvalidArgument("Ω₀ₖ needs k ≠ 0 and a sign"));
            }
            let sigma = k as f64;
            let rho = Complex64::from_polar(t.exp(), core::f64::consts::TAU * theta);
            let u = (Complex64::new(1.0 - core::f64::consts::PI.powi(2) * sigma * sigma, 0.0)
                - rho)
                .sqrt();
            let cands = [(u - 1.0) / sigma, (-u - 1.0) / sigma];
            let pick = cands
                .into_iter()
                .max_by(|a, b| {
                    (a.im * sign as f64)
                        .partial_cmp(&(b.im * sign as f64))
                        .unwrap()
                })
                .unwrap();
            Ok(pick)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultiplierKind {
    Zero,
    Infinity,
    Pseudo(i64),
}

/// Closed-form multiplier of the fixed point `0`, `∞` or `w_σ*` of `g_λ`.
pub fn omega_multiplier(lambda: Complex64, which: MultiplierKind) -> Result<Complex64> {
    let p = PseudotrigParams::new(lambda)?;
    Ok(match which {
        MultiplierKind::Zero => av_multipliers(&p).0,
        MultiplierKind::Infinity => av_multipliers(&p).1,
        MultiplierKind::Pseudo(s) => pseudo_fixed_points(&p, s).1,
    })
}

/// `μ = (λ + 2πi)/λ`.
pub fn mu_transform(lambda: SpherePoint) -> SpherePoint {
    match lambda {
        SpherePoint::Infinity => SpherePoint::ONE,
        SpherePoint::Finite(l) if l.norm() == 0.0 => SpherePoint::Infinity,
        SpherePoint::Finite(l) => SpherePoint::new((l + TWO_PI_I) / l),
    }
}

/// `λ = 2πi/(μ − 1)`.
pub fn mu_inverse(mu: SpherePoint) -> SpherePoint {
    match mu {
        SpherePoint::Infinity => SpherePoint::ZERO,
        SpherePoint::Finite(m) if m == Complex64::new(1.0, 0.0) => SpherePoint::Infinity,
        SpherePoint::Finite(m) => SpherePoint::new(TWO_PI_I / (m - 1.0)),
    }
}

/// Residuals of `g_{−λ}(1/w) = 1/g_λ(w)` and `g_{−λ̄}(w̄) = conj g_λ(w)`.
pub fn symmetry_check(lambda: Complex64, w: Complex64) -> Result<(f64, f64)> {
    let (_, g) = pseudotrig(lambda)?;
    let (_, g_neg) = pseudotrig(-lambda)?;
    let (_, g_bar) = pseudotrig(-lambda.conj())?;
    let wp = SpherePoint::new(w);
    let gw = g.project_eval(wp)?;
    let r1 = g_neg.project_eval(wp.recip())?.chordal(gw.recip());
    let r2 = g_bar.project_eval(wp.conj())?.chordal(gw.conj());
    Ok((r1, r2))
}

/// Newton's method on `ρ(λ) = 1` with the closed-form multiplier.
pub fn component_root_search(near: Complex64, which: MultiplierKind) -> Result<Complex64> {
    let mut l = near;
    for _ in 0..100 {
        let rho = omega_multiplier(l, which)?;
        let f = rho - 1.0;
        if f.norm() <= 1e-13 {
            return Ok(l);
        }
        let d = match which {
            MultiplierKind::Zero => rho * TWO_PI_I / ((PI_I - l) * (PI_I - l)),
            MultiplierKind::Infinity => -rho * TWO_PI_I / ((PI_I + l) * (PI_I + l)),
            MultiplierKind::Pseudo(s) => {
                let s = s as f64;
                -(l * s * 2.0 + 2.0) * s
            }
        };
        if d.norm() == 0.0 {
            break;
        }
        let mut step = f / d;
        let cap = 0.5 * scale(l);
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        l -= step;
    }
    match omega_multiplier(l, which) {
        Ok(rho) if (rho - 1.0).norm() <= 1e-10 => Ok(l),
        _ => Err(Error::NoConvergence),
    }
}

/// `g_λ^m(C_λ) − B_λ`, the prepole defect of order `m`.
pub fn prepole_defect(lambda: Complex64, m: usize) -> Result<Complex64> {
    let (p, map) = pseudotrig(lambda)?;
    let v = map.project_iterate(SpherePoint::new(p.c()), m)?;
    v.finite()
        .map(|v| v - p.b())
        .ok_or(Error::AtEssentialSingularity)
}

/// `λ` with `g_λ^m(C_λ) = B_λ`, by damped Newton with a central-difference derivative.
pub fn prepole_search(m: usize, seed: Complex64) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::InvalidArgument("order must be at least 1"));
    }
    let mut l = seed;
    let mut f = prepole_defect(l, m)?;
    for _ in 0..200 {
        if f.norm() <= 1e-13 * scale(l) {
            return Ok(l);
        }
        let h = 1e-7 * scale(l);
        let dh = Complex64::new(h, 0.0);
        let d = (prepole_defect(l + dh, m)? - prepole_defect(l - dh, m)?) / (2.0 * h);
        if d.norm() == 0.0 || !d.re.is_finite() {
            return Err(Error::NoConvergence);
        }
        let mut step = f / d;
        let cap = 0.25 * scale(l);
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        let mut moved = false;
        for _ in 0..40 {
            if let Ok(f2) = prepole_defect(l - step, m) {
                if f2.norm() < f.norm() {
                    l -= step;
                    f = f2;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if f.norm() <= 1e-9 * scale(l) {
        Ok(l)
    } else {
        Err(Error::NoConvergence)
    }
}

/// Fixed point `w_σ*` of `g_λ` with its multiplier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoFixed {
    pub sigma: i64,
    pub point: SpherePoint,
    pub multiplier: Complex64,
}

/// Everything known about one parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub lambda: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub classification: ParamClassification,
    pub zero_multiplier: Complex64,
    pub infinity_multiplier: Complex64,
    pub pseudo: Vec<PseudoFixed>,
    pub diagnosis: LiftDiagnosis,
}

/// Range of `σ` reported by [`analyze`].
pub const ANALYSIS_SIGMAS: core::ops::RangeInclusive<i64> = -3..=3;

pub fn analyze(lambda: Complex64, cfg: &OrbitConfig) -> Result<Analysis> {
    let (p, map) = pseudotrig(lambda)?;
    let orbit = classify_orbit(&map, SpherePoint::new(p.c()), cfg);
    let (zero_multiplier, infinity_multiplier) = av_multipliers(&p);
    let pseudo = ANALYSIS_SIGMAS
        .map(|sigma| {
            let (point, multiplier) = pseudo_fixed_points(&p, sigma);
            PseudoFixed {
                sigma,
                point,
                multiplier,
            }
        })
        .collect();
    Ok(Analysis {
        lambda,
        b: p.b(),
        c: p.c(),
        classification: ParamClassification {
            member: orbit.kind.is_definitive() && orbit.kind != OrbitKind::FixedRoot,
            kind: orbit.kind,
            iterations: orbit.iterations,
            color_index: color_index(&orbit.kind),
        },
        zero_multiplier,
        infinity_multiplier,
        pseudo,
        diagnosis: component_lift_diagnosis(&map, &orbit),
    })
}
