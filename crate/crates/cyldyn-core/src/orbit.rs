//! Orbit classification, periodic and pseudoperiodic points, rotation numbers,
//! and diagnosis of lifted Fatou components.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::kernel::{exp1, exp2pii, scale, SpherePoint, TAU, TWO_PI_I};
use crate::maps::{End, ProjectableMap};
use crate::{Error, Result};

/// Tolerance for calling an end multiplier equal to one.
const PARABOLIC_TOL: f64 = 1e-9;
/// Consecutive confirmations required by every stopping rule.
const CONFIRM: usize = 3;
/// Periodic points accumulate at `E(g)`; those closer than this are dropped.
const ESSENTIAL_EXCLUSION: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitConfig {
    pub max_iter: usize,
    pub escape_radius: f64,
    pub zero_radius: f64,
    pub singularity_radius: f64,
    pub cycle_tol: f64,
    pub period_cap: usize,
    /// Modulus beyond which a monotone orbit counts as caught by a parabolic end.
    pub parabolic_radius: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            max_iter: 5000,
            escape_radius: 1e12,
            zero_radius: 1e-12,
            singularity_radius: 1e-10,
            cycle_tol: 1e-9,
            period_cap: 64,
            parabolic_radius: 1e4,
        }
    }
}

impl OrbitConfig {
    pub fn validate(&self) -> Result<()> {
        let radii = [
            self.escape_radius,
            self.zero_radius,
            self.singularity_radius,
            self.cycle_tol,
            self.parabolic_radius,
        ];
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidArgument(
                "orbit radii must be positive and finite",
            ));
        }
        if self.period_cap == 0 || self.period_cap > self.max_iter {
            return Err(Error::InvalidArgument("period_cap must be in 1..=max_iter"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OrbitKind {
    FixedRoot,
    ZeroAv,
    InfinityAv,
    Cycle {
        period: usize,
        representative: SpherePoint,
        multiplier: Complex64,
    },
    Prepole {
        order: usize,
    },
    Escaped,
    Undetermined,
}

impl OrbitKind {
    pub fn name(&self) -> &'static str {
        match self {
            OrbitKind::FixedRoot => "FixedRoot",
            OrbitKind::ZeroAv => "ZeroAV",
            OrbitKind::InfinityAv => "InfinityAV",
            OrbitKind::Cycle { .. } => "Cycle",
            OrbitKind::Prepole { .. } => "Prepole",
            OrbitKind::Escaped => "Escaped",
            OrbitKind::Undetermined => "Undetermined",
        }
    }

    pub fn is_definitive(&self) -> bool {
        !matches!(self, OrbitKind::Undetermined)
    }

    pub fn period(&self) -> Option<usize> {
        match self {
            OrbitKind::Cycle { period, .. } => Some(*period),
            OrbitKind::FixedRoot => Some(1),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitClassification {
    pub kind: OrbitKind,
    pub iterations: usize,
    pub final_point: SpherePoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum EndMode {
    Inert,
    Attracting,
    Parabolic,
}

/// Per-map data reused across many orbits.
#[derive(Clone, Debug)]
pub struct Classifier<'a> {
    map: &'a ProjectableMap,
    cfg: OrbitConfig,
    roots: Vec<Complex64>,
    zero: EndMode,
    infinity: EndMode,
    /// Multiplier of the `{0, ∞}` 2-cycle when it attracts (`ℓ ≤ −1`).
    swap: Option<Complex64>,
}

fn end_mode(map: &ProjectableMap, end: End) -> EndMode {
    let regular = match end {
        End::Zero => !map.zero_is_essential(),
        End::Infinity => !map.infinity_is_essential(),
    };
    if !regular || map.ell() < 1 {
        return EndMode::Inert;
    }
    match map.end_multiplier(end) {
        Some(m) if m.norm() < 1.0 - PARABOLIC_TOL => EndMode::Attracting,
        Some(m) if (m - 1.0).norm() <= PARABOLIC_TOL => EndMode::Parabolic,
        _ => EndMode::Inert,
    }
}

/// Multiplier of the `{0, ∞}` 2-cycle for `ℓ ≤ −1` with both ends regular.
fn swap_multiplier(map: &ProjectableMap) -> Option<Complex64> {
    if map.ell() > -1 {
        return None;
    }
    let (a, b) = (map.phi_at_zero()?, map.phi_at_infinity()?);
    if map.ell() <= -2 {
        Some(Complex64::new(0.0, 0.0))
    } else {
        Some(exp2pii(b - a))
    }
}

impl<'a> Classifier<'a> {
    pub fn new(map: &'a ProjectableMap, cfg: OrbitConfig) -> Self {
        let mut roots = Vec::new();
        if map.ell() == 1 && map.phi().num().degree() > 0 {
            for (r, _) in crate::poly_roots(map.phi().num()).unwrap_or_default() {
                let Some(w) = r.finite() else { continue };
                if w.norm() == 0.0 {
                    continue;
                }
                if let Ok(SpherePoint::Finite(d)) = map.project_derivative(w) {
                    if d.norm() < 1.0 {
                        roots.push(w);
                    }
                }
            }
        }
        let swap = swap_multiplier(map).filter(|m| m.norm() < 1.0);
        Classifier {
            map,
            cfg,
            roots,
            zero: end_mode(map, End::Zero),
            infinity: end_mode(map, End::Infinity),
            swap,
        }
    }

    pub fn config(&self) -> &OrbitConfig {
        &self.cfg
    }

    /// Attracting fixed points of `g` at zeros of `Φ`.
    pub fn attracting_roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn classify(&self, w0: SpherePoint) -> OrbitClassification {
        self.classify_from(w0, 0)
    }

    fn near_essential(&self, w: SpherePoint) -> Option<bool> {
        if self.map.distance_to_essential(w) > self.cfg.singularity_radius {
            return None;
        }
        let at_pole = self
            .map
            .poles_in_cstar()
            .iter()
            .any(|&p| w.chordal(SpherePoint::Finite(p)) <= self.cfg.singularity_radius);
        Some(at_pole)
    }

    fn singular_stop(&self, at_pole: bool, n: usize, w: SpherePoint) -> OrbitClassification {
        let kind = if at_pole {
            OrbitKind::Prepole { order: n }
        } else {
            OrbitKind::Escaped
        };
        OrbitClassification {
            kind,
            iterations: n,
            final_point: w,
        }
    }

    fn is_root(&self, w: SpherePoint) -> bool {
        self.roots
            .iter()
            .any(|&r| w.chordal(SpherePoint::Finite(r)) <= self.cfg.cycle_tol)
    }

    /// Cycle multiplier through `rep`, analytic along the cycle.
    fn cycle_multiplier(&self, rep: SpherePoint, p: usize) -> Option<Complex64> {
        match rep {
            SpherePoint::Finite(w) if w.norm() > 0.0 => {
                let (_, d) = self.map.project_iterate_derivative(w, p).ok()?;
                Some(d)
            }
            end => {
                let e = if end.is_zero() {
                    End::Zero
                } else {
                    End::Infinity
                };
                if self.map.ell() >= 1 {
                    Some(self.map.end_multiplier(e)?.powi(p as i32))
                } else if self.map.ell() <= -1 && p.is_multiple_of(2) {
                    Some(swap_multiplier(self.map)?.powi((p / 2) as i32))
                } else {
                    None
                }
            }
        }
    }

    /// Continues classification from `w0`, counting iterations from `start`.
    fn classify_from(&self, w0: SpherePoint, start: usize) -> OrbitClassification {
        let cfg = &self.cfg;
        let window = 2 * cfg.period_cap + CONFIRM + 1;
        let mut ring: VecDeque<SpherePoint> = VecDeque::with_capacity(window + 1);
        let mut w = w0;
        let (mut zc, mut ic, mut sc) = (0usize, 0usize, 0usize);
        let mut prev_mod = w.modulus();
        let mut prev_side = 0i8;
        let stop = |kind, n, w| OrbitClassification {
            kind,
            iterations: n,
            final_point: w,
        };

        for n in start..=cfg.max_iter {
            if let Some(at_pole) = self.near_essential(w) {
                return self.singular_stop(at_pole, n, w);
            }
            if self.is_root(w) {
                return stop(OrbitKind::FixedRoot, n, w);
            }

            let r = w.modulus();
            let side = if r <= cfg.zero_radius {
                -1
            } else if r >= cfg.escape_radius {
                1
            } else {
                0
            };
            zc = match self.zero {
                EndMode::Attracting if side == -1 => zc + 1,
                EndMode::Parabolic if r * cfg.parabolic_radius <= 1.0 && r < prev_mod => zc + 1,
                _ => 0,
            };
            ic = match self.infinity {
                EndMode::Attracting if side == 1 => ic + 1,
                EndMode::Parabolic if r >= cfg.parabolic_radius && r > prev_mod => ic + 1,
                _ => 0,
            };
            sc = if self.swap.is_some() && side != 0 && side == -prev_side {
                sc + 1
            } else {
                0
            };
            prev_mod = r;
            prev_side = side;
            if zc >= CONFIRM {
                return stop(OrbitKind::ZeroAv, n, w);
            }
            if ic >= CONFIRM {
                return stop(OrbitKind::InfinityAv, n, w);
            }
            if sc >= CONFIRM {
                let multiplier = self.swap.unwrap_or_default();
                let kind = OrbitKind::Cycle {
                    period: 2,
                    representative: SpherePoint::ZERO,
                    multiplier,
                };
                return stop(kind, n, w);
            }

            if ring.len() == window {
                ring.pop_front();
            }
            ring.push_back(w);
            let found = if ring.len() > CONFIRM && (n % 8 == 0 || ring.len() == window) {
                detect_cycle(ring.make_contiguous(), cfg)
            } else if ring.len() > CONFIRM {
                sustained(ring.make_contiguous(), 1, cfg.cycle_tol).then_some((1, w))
            } else {
                None
            };
            if let Some((period, rep)) = found {
                match self.cycle_multiplier(rep, period) {
                    Some(mult) if mult.norm() < 1.0 + cfg.cycle_tol => {
                        if period == 1
                            && self.map.ell() == 1
                            && rep.finite().is_some_and(|z| self.map.is_phi_zero(z, 1e-9))
                        {
                            return stop(OrbitKind::FixedRoot, n, w);
                        }
                        let kind = OrbitKind::Cycle {
                            period,
                            representative: rep,
                            multiplier: mult,
                        };
                        return stop(kind, n, w);
                    }
                    // sitting exactly on a repelling cycle never resolves
                    _ => return stop(OrbitKind::Undetermined, n, w),
                }
            }

            if n == cfg.max_iter {
                break;
            }
            w = match self.map.project_eval(w) {
                Ok(v) => v,
                Err(_) => {
                    let at_pole = self.map.poles_in_cstar().iter().any(|&p| {
                        w.chordal(SpherePoint::Finite(p)) <= self.cfg.singularity_radius.max(1e-12)
                    });
                    return self.singular_stop(at_pole, n, w);
                }
            };
        }
        stop(OrbitKind::Undetermined, cfg.max_iter, w)
    }
}

/// Chordal closeness, plus relative closeness so that slowly escaping
/// orbits near `∞` are not mistaken for cycles.
fn cycle_close(a: SpherePoint, b: SpherePoint, tol: f64) -> bool {
    if a.chordal(b) > tol {
        return false;
    }
    match (a, b) {
        (SpherePoint::Finite(x), SpherePoint::Finite(y)) => {
            (x - y).norm() <= tol * x.norm().max(y.norm()).max(1e-300) || x == y
        }
        (SpherePoint::Infinity, SpherePoint::Infinity) => true,
        _ => false,
    }
}

fn sustained(tail: &[SpherePoint], p: usize, tol: f64) -> bool {
    let n = tail.len();
    n >= p + CONFIRM && (0..CONFIRM).all(|j| cycle_close(tail[n - 1 - j], tail[n - 1 - j - p], tol))
}

/// Least period `p ≤ period_cap` with `d(wₙ, wₙ₊ₚ) ≤ cycle_tol` on the last
/// three positions of the window, and the first cycle point in the window.
pub fn detect_cycle(tail: &[SpherePoint], cfg: &OrbitConfig) -> Option<(usize, SpherePoint)> {
    let cap = cfg.period_cap.min(tail.len().saturating_sub(CONFIRM));
    (1..=cap)
        .find(|&p| sustained(tail, p, cfg.cycle_tol))
        .map(|p| (p, tail[tail.len() - p]))
}

pub fn classify_orbit(
    map: &ProjectableMap,
    w0: SpherePoint,
    cfg: &OrbitConfig,
) -> OrbitClassification {
    Classifier::new(map, *cfg).classify(w0)
}

/// Distance of `a − b` to the nearest integer translate.
fn dist_mod1(a: Complex64, b: Complex64) -> f64 {
    let d = a - b;
    Complex64::new(d.re - d.re.round(), d.im).norm()
}

fn reduce(z: Complex64) -> Complex64 {
    Complex64::new(z.re - z.re.floor(), z.im)
}

/// Classifies the orbit of `z0` under the lift `f`, with real parts reduced
/// modulo one. Orbits that leave the exponent range continue in the projection.
pub fn classify_lift_orbit(
    map: &ProjectableMap,
    z0: Complex64,
    cfg: &OrbitConfig,
) -> OrbitClassification {
    Classifier::new(map, *cfg).classify_lift(z0)
}

impl Classifier<'_> {
    /// Lift-orbit version of [`Classifier::classify`]; see [`classify_lift_orbit`].
    pub fn classify_lift(&self, z0: Complex64) -> OrbitClassification {
        let (c, map, cfg) = (self, self.map, &self.cfg);
        let zero_im = -cfg.zero_radius.ln() / TAU;
        let inf_im = cfg.escape_radius.ln() / TAU;
        let root_lifts: Vec<Complex64> = c.roots.iter().map(|r| r.ln() / TWO_PI_I).collect();
        let window = 2 * cfg.period_cap + CONFIRM + 1;
        let mut ring: VecDeque<Complex64> = VecDeque::with_capacity(window + 1);
        let mut z = reduce(z0);
        let (mut zc, mut ic) = (0usize, 0usize);
        let stop = |kind, n, z| OrbitClassification {
            kind,
            iterations: n,
            final_point: exp1(z),
        };

        for n in 0..=cfg.max_iter {
            if (TAU * z.im).abs() > crate::maps::EXP_GUARD - 50.0 {
                return c.classify_from(exp1(z), n);
            }
            let w = exp1(z);
            if let Some(at_pole) = c.near_essential(w) {
                return c.singular_stop(at_pole, n, w);
            }
            if root_lifts.iter().any(|&r| dist_mod1(z, r) <= cfg.cycle_tol) {
                return stop(OrbitKind::FixedRoot, n, z);
            }
            zc = if c.zero == EndMode::Attracting && z.im >= zero_im {
                zc + 1
            } else {
                0
            };
            ic = if c.infinity == EndMode::Attracting && z.im <= -inf_im {
                ic + 1
            } else {
                0
            };
            if zc >= CONFIRM {
                return stop(OrbitKind::ZeroAv, n, z);
            }
            if ic >= CONFIRM {
                return stop(OrbitKind::InfinityAv, n, z);
            }
            if c.zero == EndMode::Parabolic || c.infinity == EndMode::Parabolic || c.swap.is_some()
            {
                // slow end behaviour is tracked by the projection
                let far = z.im.abs() * TAU >= cfg.parabolic_radius.ln();
                if far {
                    return c.classify_from(w, n);
                }
            }

            if ring.len() == window {
                ring.pop_front();
            }
            ring.push_back(z);
            let tail = ring.make_contiguous();
            let cap = if n % 8 == 0 { cfg.period_cap } else { 1 };
            let found = (1..=cap.min(tail.len().saturating_sub(CONFIRM))).find(|&p| {
                let k = tail.len();
                (0..CONFIRM)
                    .all(|j| dist_mod1(tail[k - 1 - j], tail[k - 1 - j - p]) <= cfg.cycle_tol)
            });
            if let Some(p) = found {
                let start = tail[tail.len() - p];
                let mut mult = Complex64::new(1.0, 0.0);
                let mut v = start;
                let mut ok = true;
                for _ in 0..p {
                    match (map.lift_derivative(v), map.lift_eval(v)) {
                        (Ok(SpherePoint::Finite(d)), Ok(SpherePoint::Finite(next))) => {
                            mult *= d;
                            v = next;
                        }
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok || mult.norm() >= 1.0 + cfg.cycle_tol {
                    return stop(OrbitKind::Undetermined, n, z);
                }
                let kind = OrbitKind::Cycle {
                    period: p,
                    representative: exp1(start),
                    multiplier: mult,
                };
                return stop(kind, n, z);
            }

            if n == cfg.max_iter {
                break;
            }
            z = match map.lift_eval(z) {
                Ok(SpherePoint::Finite(v)) => reduce(v),
                Ok(SpherePoint::Infinity) => return c.singular_stop(true, n, w),
                Err(_) => return c.classify_from(w, n),
            };
        }
        stop(OrbitKind::Undetermined, cfg.max_iter, z)
    }
}

/// Rectangular seed grid in the `w`-plane; also the search window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedGrid {
    pub center: Complex64,
    pub half_width: f64,
    pub half_height: f64,
    pub nx: usize,
    pub ny: usize,
}

impl SeedGrid {
    pub fn contains(&self, w: Complex64) -> bool {
        let d = w - self.center;
        d.re.abs() <= self.half_width && d.im.abs() <= self.half_height
    }

    pub fn seeds(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.ny).flat_map(move |j| {
            (0..self.nx).map(move |i| {
                let x = self.center.re - self.half_width
                    + (i as f64 + 0.5) * 2.0 * self.half_width / self.nx as f64;
                let y = self.center.im - self.half_height
                    + (j as f64 + 0.5) * 2.0 * self.half_height / self.ny as f64;
                Complex64::new(x, y)
            })
        })
    }
}

/// A periodic point found by Newton's method and the number of steps taken.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonHit {
    pub point: Complex64,
    pub multiplier: Complex64,
    pub steps: usize,
}

/// Damped Newton iteration on `g^p(w) − w`.
pub fn newton_periodic(map: &ProjectableMap, seed: Complex64, p: usize) -> Option<NewtonHit> {
    let residual = |w: Complex64| -> Option<(Complex64, Complex64, f64)> {
        let (gp, d) = map.project_iterate_derivative(w, p).ok()?;
        let gp = gp.finite()?;
        Some((gp - w, d, gp.norm().max(w.norm()).max(1.0)))
    };
    let mut w = seed;
    let (mut h, mut d, _) = residual(w)?;
    for steps in 0..=80 {
        if h.norm() <= 4.0 * f64::EPSILON * scale(w) {
            return accept(map, w, d, p, steps);
        }
        let denom = d - 1.0;
        if denom.norm() == 0.0 {
            return None;
        }
        let mut step = -h / denom;
        let cap = 0.5 * w.norm().max(1e-3);
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        let mut moved = false;
        for _ in 0..30 {
            let next = w + step;
            if next.norm() > 0.0 {
                if let Some((h2, d2, _)) = residual(next) {
                    if h2.norm() < h.norm() {
                        w = next;
                        h = h2;
                        d = d2;
                        moved = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !moved {
            return accept(map, w, d, p, steps);
        }
    }
    accept(map, w, d, p, 80)
}

fn accept(
    map: &ProjectableMap,
    w: Complex64,
    mult: Complex64,
    p: usize,
    steps: usize,
) -> Option<NewtonHit> {
    let gp = map.project_iterate(SpherePoint::Finite(w), p).ok()?;
    (gp.chordal(SpherePoint::Finite(w)) <= 1e-9).then_some(NewtonHit {
        point: w,
        multiplier: mult,
        steps,
    })
}

/// Whether `end` is a `p`-periodic point of `g`, with its multiplier.
fn end_periodic(map: &ProjectableMap, end: End, p: usize) -> Option<Complex64> {
    let regular = |e| match e {
        End::Zero => !map.zero_is_essential(),
        End::Infinity => !map.infinity_is_essential(),
    };
    if !regular(end) {
        return None;
    }
    if map.ell() >= 1 {
        return Some(map.end_multiplier(end)?.powi(p as i32));
    }
    if map.ell() <= -1 && p.is_multiple_of(2) && regular(End::Zero) && regular(End::Infinity) {
        return Some(swap_multiplier(map)?.powi((p / 2) as i32));
    }
    None
}

/// Periodic points of period dividing `p` found from the seed grid, restricted
/// to its window, plus the ends `0` and `∞` when they are `p`-periodic.
pub fn find_periodic_points(
    map: &ProjectableMap,
    p: usize,
    seeds: &SeedGrid,
    cfg: &OrbitConfig,
) -> Result<Vec<(SpherePoint, Complex64)>> {
    if p == 0 {
        return Err(Error::InvalidArgument("period must be at least 1"));
    }
    let mut out: Vec<(SpherePoint, Complex64)> = Vec::new();
    for (end, pt) in [
        (End::Zero, SpherePoint::ZERO),
        (End::Infinity, SpherePoint::Infinity),
    ] {
        if let Some(m) = end_periodic(map, end, p) {
            out.push((pt, m));
        }
    }
    for s in seeds.seeds() {
        let Some(hit) = newton_periodic(map, s, p) else {
            continue;
        };
        let pt = SpherePoint::Finite(hit.point);
        if !seeds.contains(hit.point)
            || map.distance_to_essential(pt) <= ESSENTIAL_EXCLUSION.max(cfg.singularity_radius)
        {
            continue;
        }
        if out.iter().all(|(q, _)| q.chordal(pt) > 1e-7) {
            out.push((pt, hit.multiplier));
        }
    }
    Ok(out)
}

/// A pseudoperiodic point `z*` of type `(p, σ)`: `f^p(z*) = z* + σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoPoint {
    pub z_star: Complex64,
    pub p: usize,
    pub sigma: i64,
    pub w_star: SpherePoint,
}

pub fn lift_periodic_point(map: &ProjectableMap, w: SpherePoint, p: usize) -> Result<PseudoPoint> {
    let wf = w
        .finite()
        .filter(|z| z.norm() > 0.0)
        .ok_or(Error::NotPeriodic)?;
    if p == 0 {
        return Err(Error::InvalidArgument("period must be at least 1"));
    }
    let gp = map.project_iterate(w, p).map_err(|_| Error::NotPeriodic)?;
    if gp.chordal(w) > 1e-8 {
        return Err(Error::NotPeriodic);
    }
    // +0.0 keeps the principal branch on the negative axis at arg = π
    let z = Complex64::new(wf.re, wf.im + 0.0).ln() / TWO_PI_I;
    let fz = map.lift_iterate(z, p)?;
    let d = fz - z;
    let sigma = d.re.round();
    let residual = (d - sigma).norm();
    if residual > 1e-6 {
        return Err(Error::NonIntegerSigma { residual });
    }
    Ok(PseudoPoint {
        z_star: z,
        p,
        sigma: sigma as i64,
        w_star: w,
    })
}

/// Offset `f^{mp}(z* + k) − (z* + k)` for a pseudoperiodic point of type `(p, σ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslateOffset {
    Exact(i128),
    /// `ℓ = 0`: every translate lands on `z*_σ = z* + σ`, an offset of `σ − k`.
    Collapses {
        offset: i128,
    },
    Overflow,
}

/// Translate `z* + k` goes to `z* + σ + ℓ^p k` under `f^p`; iterating gives
/// `(L^m − 1)k + σ(1 + L + … + L^{m−1})` with `L = ℓ^p`.
pub fn predict_translate_orbit(ell: i64, p: u32, sigma: i64, k: i64, m: u32) -> TranslateOffset {
    if m == 0 {
        return TranslateOffset::Exact(0);
    }
    let Some(l) = (ell as i128).checked_pow(p) else {
        return TranslateOffset::Overflow;
    };
    let (sigma, k) = (sigma as i128, k as i128);
    if l == 0 {
        return TranslateOffset::Collapses { offset: sigma - k };
    }
    let mut power: i128 = 1;
    let mut sum: i128 = 0;
    for _ in 0..m {
        let Some(s) = sum.checked_add(power) else {
            return TranslateOffset::Overflow;
        };
        sum = s;
        let Some(pw) = power.checked_mul(l) else {
            return TranslateOffset::Overflow;
        };
        power = pw;
    }
    let offset = (power - 1)
        .checked_mul(k)
        .zip(sigma.checked_mul(sum))
        .and_then(|(a, b)| a.checked_add(b));
    offset.map_or(TranslateOffset::Overflow, TranslateOffset::Exact)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftVerdict {
    BakerInvariant,
    BakerChain,
    WanderingEscaping(i64),
    PeriodicSameType,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiftDiagnosis {
    pub verdict: LiftVerdict,
    pub summary: String,
    pub rationale: String,
}

fn diagnosis(verdict: LiftVerdict, rationale: String) -> LiftDiagnosis {
    let summary = match verdict {
        LiftVerdict::BakerInvariant => String::from("invariant Baker domain"),
        LiftVerdict::BakerChain => String::from("chain of Baker domains"),
        LiftVerdict::WanderingEscaping(s) => format!("wandering (σ={s})"),
        LiftVerdict::PeriodicSameType => String::from("periodic (same type)"),
        LiftVerdict::Unknown => String::from("unknown"),
    };
    LiftDiagnosis {
        verdict,
        summary,
        rationale,
    }
}

/// Type of the lifted components over the basin of `attractor`.
pub fn component_lift_diagnosis(
    map: &ProjectableMap,
    attractor: &OrbitClassification,
) -> LiftDiagnosis {
    let ell = map.ell();
    match attractor.kind {
        OrbitKind::ZeroAv | OrbitKind::InfinityAv => {
            let (end, name, phi) = if attractor.kind == OrbitKind::ZeroAv {
                (End::Zero, "0", map.phi_at_zero())
            } else {
                (End::Infinity, "∞", map.phi_at_infinity())
            };
            let mult = map.end_multiplier(end);
            match mult {
                Some(m) if m.norm() < 1.0 - PARABOLIC_TOL => diagnosis(
                    LiftVerdict::BakerInvariant,
                    format!(
                        "basin contains a punctured neighbourhood of {name} (|multiplier| = {:.6}), so fill(V) contains 0 and the lift is one invariant component escaping to an end of the cylinder; unbounded: likely",
                        m.norm()
                    ),
                ),
                Some(m) if (m - 1.0).norm() <= PARABOLIC_TOL && phi.is_some_and(|u| u.norm() <= 1e-9) => diagnosis(
                    LiftVerdict::BakerChain,
                    format!(
                        "parabolic end {name} with Φ({name}) = 0: each petal lifts to its own invariant component, translates by integers give infinitely many Baker domains; unbounded: likely"
                    ),
                ),
                _ => diagnosis(
                    LiftVerdict::Unknown,
                    format!("orbit tends to {name} without an attracting or Φ-vanishing parabolic multiplier; unbounded: unknown"),
                ),
            }
        }
        OrbitKind::Cycle { period, representative, .. } => {
            if representative.is_zero() || representative.is_infinity() {
                return diagnosis(
                    LiftVerdict::Unknown,
                    format!("attracting {{0, ∞}} cycle of period {period} for ℓ = {ell}; lifted components alternate between half-planes; unbounded: likely"),
                );
            }
            if ell == 0 {
                return diagnosis(
                    LiftVerdict::PeriodicSameType,
                    String::from("ℓ = 0: lifts of periodic components are periodic of the same type; unbounded: unknown"),
                );
            }
            match lift_periodic_point(map, representative, period) {
                Ok(pp) if pp.sigma == 0 => diagnosis(
                    LiftVerdict::PeriodicSameType,
                    format!("cycle lifts to a genuine {period}-cycle (σ = 0); unbounded: unknown"),
                ),
                Ok(pp) => {
                    let l = (ell as i128).checked_pow(period as u32);
                    if l == Some(1) {
                        diagnosis(
                            LiftVerdict::WanderingEscaping(pp.sigma),
                            format!(
                                "cycle lifts to a pseudoperiodic point of type ({period}, {}): f^{period}(U) ⊂ U + {}, so the lifted components wander; unbounded: unknown",
                                pp.sigma, pp.sigma
                            ),
                        )
                    } else {
                        diagnosis(
                            LiftVerdict::Unknown,
                            format!(
                                "pseudoperiodic point of type ({period}, {}) with ℓ^p ≠ 1: translates z* + k move by (ℓ^p − 1)k + σ per step; unbounded: unknown",
                                pp.sigma
                            ),
                        )
                    }
                }
                Err(e) => diagnosis(LiftVerdict::Unknown, format!("could not lift the cycle: {e}; unbounded: unknown")),
            }
        }
        OrbitKind::FixedRoot => diagnosis(
            LiftVerdict::PeriodicSameType,
            String::from("all components are root basins: the fixed root lifts to fixed points z* + k; unbounded: unknown"),
        ),
        OrbitKind::Prepole { order } => diagnosis(
            LiftVerdict::Unknown,
            format!("orbit reaches a pole of Φ after {order} steps; the point lies in the Julia set; unbounded: unknown"),
        ),
        OrbitKind::Escaped => diagnosis(
            LiftVerdict::Unknown,
            String::from("orbit approaches an essential end; unbounded: unknown"),
        ),
        OrbitKind::Undetermined => diagnosis(
            LiftVerdict::Unknown,
            String::from(
                "no convergence within budget: possibly a rotation domain (Siegel disk or Herman ring) or a near-indifferent cycle, not certified; unbounded: unknown",
            ),
        ),
    }
}

/// Whether two classifications name the same attractor.
pub fn same_attractor(map: &ProjectableMap, a: &OrbitKind, b: &OrbitKind, tol: f64) -> bool {
    match (a, b) {
        (
            OrbitKind::Cycle {
                period: p,
                representative: r,
                ..
            },
            OrbitKind::Cycle {
                period: q,
                representative: s,
                ..
            },
        ) => {
            if p != q {
                return false;
            }
            let mut v = *r;
            for _ in 0..*p {
                if v.chordal(*s) <= tol {
                    return true;
                }
                v = match map.project_eval(v) {
                    Ok(x) => x,
                    Err(_) => return false,
                };
            }
            false
        }
        (OrbitKind::Prepole { .. }, OrbitKind::Prepole { .. }) => true,
        _ => core::mem::discriminant(a) == core::mem::discriminant(b),
    }
}

/// True iff every sample on `|w| = radius` classifies to `attractor`.
pub fn basin_surrounds_origin(
    map: &ProjectableMap,
    attractor: &OrbitKind,
    radius: f64,
    samples: usize,
    cfg: &OrbitConfig,
) -> Result<bool> {
    if radius.is_nan() || radius <= 0.0 || samples < 16 {
        return Err(Error::InvalidArgument(
            "radius must be positive and samples at least 16",
        ));
    }
    let c = Classifier::new(map, *cfg);
    Ok((0..samples).all(|j| {
        let w = Complex64::from_polar(radius, TAU * j as f64 / samples as f64);
        same_attractor(
            map,
            &c.classify(SpherePoint::Finite(w)).kind,
            attractor,
            1e-6,
        )
    }))
}

fn check_circle(map: &ProjectableMap) -> Result<()> {
    if map.ell() != 1 {
        return Err(Error::NotCirclePreserving);
    }
    for j in 0..32 {
        let w = exp2pii(Complex64::new((j as f64 + 0.25) / 32.0, 0.0));
        let v = map
            .project_eval(SpherePoint::Finite(w))
            .map_err(|_| Error::NotCirclePreserving)?;
        if (v.modulus() - 1.0).abs() > 1e-9 {
            return Err(Error::NotCirclePreserving);
        }
    }
    Ok(())
}

/// Rotation number of the circle map `θ ↦ Re f(θ)` averaged over `n` steps.
pub fn rotation_number(map: &ProjectableMap, theta0: f64, n: usize) -> Result<f64> {
    check_circle(map)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive"));
    }
    let mut x = theta0 - theta0.floor();
    let mut turns: i64 = 0;
    for _ in 0..n {
        let fx = match map.lift_eval(Complex64::new(x, 0.0))? {
            SpherePoint::Finite(v) => v.re,
            SpherePoint::Infinity => return Err(Error::NotCirclePreserving),
        };
        let k = fx.floor();
        turns += k as i64;
        x = fx - k;
    }
    Ok((turns as f64 + x - (theta0 - theta0.floor())) / n as f64)
}

/// Evaluations per rotation-number measurement during tuning.
pub const TUNE_ITERATIONS: usize = 1_000_000;

/// `α ∈ [0, 1]` whose meromorphic standard map has rotation number `target`.
pub fn tune_rotation_number(a: Complex64, beta: f64, target: f64, tol: f64) -> Result<f64> {
    tune_rotation_number_with(a, beta, target, tol, TUNE_ITERATIONS)
}

pub fn tune_rotation_number_with(
    a: Complex64,
    beta: f64,
    target: f64,
    tol: f64,
    n: usize,
) -> Result<f64> {
    if tol.is_nan() || tol < 1e-8 {
        return Err(Error::InvalidArgument("tol must be at least 1e-8"));
    }
    let rho = |alpha: f64| -> Result<f64> {
        let map = crate::Preset::MeroStandard { a, alpha, beta }.build()?;
        rotation_number(&map, 0.0, n)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (rlo, rhi) = (rho(lo)?, rho(hi)?);
    if !(rlo <= target && target <= rhi) {
        return Err(Error::NonMonotoneBracket);
    }
    if (rlo - target).abs() <= tol && beta == 0.0 {
        return Ok(lo);
    }
    let mut mid = 0.5;
    for _ in 0..64 {
        mid = 0.5 * (lo + hi);
        let r = rho(mid)?;
        if beta == 0.0 && (r - target).abs() <= tol {
            return Ok(mid);
        }
        if r < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-10 {
            break;
        }
    }
    Ok(mid)
}
