use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{scale, Polynomial, SpherePoint, TAU};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 200;
const MERGE_TOL: f64 = 1e-6;

/// All roots of `p` with multiplicity, by Aberth–Ehrlich simultaneous iteration.
///
/// Exact zero roots are split off first. Roots closer than the attainable
/// accuracy of a cluster of that size are merged into one root of summed
/// multiplicity; for simple and double roots that radius is `1e-6`.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<(SpherePoint, usize)>> {
    if p.degree() == 0 {
        return Err(Error::InvalidDegree);
    }
    let k = p.low_order_zeros();
    let q = p.shift_down(k);
    let mut out = Vec::new();
    if k > 0 {
        out.push((SpherePoint::ZERO, k));
    }
    let raw = match q.degree() {
        0 => Vec::new(),
        1 => vec![-q.coeff(0) / q.coeff(1)],
        2 => quadratic(&q).to_vec(),
        _ => aberth(&q),
    };
    for (r, m) in cluster(&q, raw) {
        out.push((SpherePoint::Finite(r), m));
    }
    Ok(out)
}

fn quadratic(q: &Polynomial) -> [Complex64; 2] {
    let (c, b, a) = (q.coeff(0), q.coeff(1), q.coeff(2));
    let disc = (b * b - a * c * 4.0).sqrt();
    // pick the sign that avoids cancellation
    let s = if (b.conj() * disc).re >= 0.0 {
        -b - disc
    } else {
        -b + disc
    };
    if s.norm() == 0.0 {
        let r = -b / (a * 2.0);
        return [r, r];
    }
    [s / (a * 2.0), (c * 2.0) / s]
}

fn aberth(q: &Polynomial) -> Vec<Complex64> {
    let n = q.degree();
    let lead = q.leading();
    let monic = q.scale(lead.inv());
    let centroid = -monic.coeff(n - 1) / n as f64;
    let spread = monic.eval(centroid).norm().powf(1.0 / n as f64);
    let radius = if spread > 0.0 && spread.is_finite() {
        spread
    } else {
        1.0
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0ab3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|j| {
            let jitter = (rng.next_u32() as f64 / u32::MAX as f64 - 0.5) * 0.5;
            let theta = TAU * (j as f64 + 0.25 + jitter) / n as f64;
            centroid + Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; n];

    for _ in 0..MAX_SWEEPS {
        let mut all = true;
        for j in 0..n {
            if done[j] {
                continue;
            }
            let (v, dv) = monic.eval_with_derivative(z[j]);
            if v.norm() == 0.0 {
                done[j] = true;
                continue;
            }
            let ratio = v / dv;
            let mut sum = Complex64::new(0.0, 0.0);
            for k in 0..n {
                if k != j {
                    let d = z[j] - z[k];
                    if d.norm() > 0.0 {
                        sum += d.inv();
                    }
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            z[j] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * scale(z[j]) {
                done[j] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    z
}

/// Attainable separation for a cluster of `m` coincident roots near `c`.
fn merge_radius(q: &Polynomial, c: Complex64, m: usize) -> f64 {
    let kappa = q.eval_abs(c.norm()) / q.leading().norm() / scale(c).powi(q.degree() as i32);
    let attainable = 10.0 * (kappa * f64::EPSILON).powf(1.0 / m as f64);
    MERGE_TOL.max(attainable) * scale(c)
}

fn span(v: &[Complex64]) -> f64 {
    v.iter()
        .flat_map(|x| v.iter().map(move |y| (x - y).norm()))
        .fold(0.0, f64::max)
}

/// Repeatedly takes the largest (then tightest) group of nearest neighbours
/// that fits inside its own merge radius.
fn cluster(q: &Polynomial, mut rest: Vec<Complex64>) -> Vec<(Complex64, usize)> {
    let mut out = Vec::new();
    loop {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for i in 0..rest.len() {
            let mut order: Vec<usize> = (0..rest.len()).collect();
            order.sort_by(|&a, &b| {
                (rest[a] - rest[i])
                    .norm()
                    .partial_cmp(&(rest[b] - rest[i]).norm())
                    .unwrap()
            });
            for k in (2..=rest.len()).rev() {
                if best.as_ref().is_some_and(|(b, _)| b.len() > k) {
                    break;
                }
                let pts: Vec<Complex64> = order[..k].iter().map(|&j| rest[j]).collect();
                let s = span(&pts);
                if s <= merge_radius(q, mean(&pts), k) {
                    if best.as_ref().is_none_or(|(b, d)| k > b.len() || s < *d) {
                        best = Some((order[..k].to_vec(), s));
                    }
                    break;
                }
            }
        }
        let Some((mut idx, _)) = best else { break };
        idx.sort_unstable_by(|a, b| b.cmp(a));
        let pts: Vec<Complex64> = idx.iter().map(|&j| rest.swap_remove(j)).collect();
        out.push((polish_multiple(q, mean(&pts), pts.len()), pts.len()));
    }
    out.extend(rest.into_iter().map(|r| (polish(q, r), 1)));
    out
}

fn mean(v: &[Complex64]) -> Complex64 {
    v.iter().fold(Complex64::new(0.0, 0.0), |a, &b| a + b) / v.len() as f64
}

// a root of multiplicity m is simple for the (m−1)-th derivative
fn polish_multiple(q: &Polynomial, c: Complex64, m: usize) -> Complex64 {
    let mut d = q.clone();
    for _ in 1..m {
        d = d.derivative();
    }
    let z = polish(&d, c);
    if (z - c).norm() <= merge_radius(q, c, m) {
        z
    } else {
        c
    }
}

fn polish(q: &Polynomial, mut z: Complex64) -> Complex64 {
    for _ in 0..3 {
        let (v, dv) = q.eval_with_derivative(z);
        if dv.norm() == 0.0 {
            break;
        }
        let next = z - v / dv;
        if q.eval(next).norm() >= v.norm() {
            break;
        }
        z = next;
    }
    z
}
