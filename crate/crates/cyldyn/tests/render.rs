use std::f64::consts::PI;

use cyldyn::render::*;
use cyldyn_core::orbit::OrbitConfig;
use cyldyn_core::param::pseudotrig;
use cyldyn_core::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cfg(max_iter: usize) -> OrbitConfig {
    OrbitConfig {
        max_iter,
        ..Default::default()
    }
}

/// `px` is `base` scaled by some brightness in `[min, 1]`.
fn is_shade_of(px: Rgb, base: Rgb, pal: &Palette) -> bool {
    let top = base.iter().copied().max().unwrap_or(0) as f64;
    if top == 0.0 {
        return px == base;
    }
    let b = px.iter().copied().max().unwrap() as f64 / top;
    (pal.brightness_min - 0.01..=1.0).contains(&b)
        && px
            .iter()
            .zip(base)
            .all(|(&p, q)| (p as f64 - q as f64 * b).abs() <= 1.5)
}

#[test]
fn renders_are_deterministic() {
    let pal = Palette::default();
    let v = Viewport::new(c(-1.0, -2.6), 0.6, 0.5, 48, 40).unwrap();
    let a = render_parameter(&v, &cfg(500), &pal, false).unwrap();
    let b = render_parameter(&v, &cfg(500), &pal, false).unwrap();
    assert_eq!(a.to_png(), b.to_png());
    let (_, map) = pseudotrig(c(-1.0, -(PI * PI - 1.0).sqrt())).unwrap();
    let dv = Viewport::new(c(0.0, -0.2), 1.5, 1.0, 45, 30).unwrap();
    let a = render_dynamical(&map, &dv, &cfg(500), &pal, DynPlane::Z, &[]).unwrap();
    let b = render_dynamical(&map, &dv, &cfg(500), &pal, DynPlane::Z, &[]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn origin_neighbourhood_is_white() {
    let pal = Palette::default();
    let v = Viewport::new(c(0.0, 0.0), 0.1, 0.1, 3, 3).unwrap();
    let img = render_parameter(&v, &cfg(2000), &pal, false).unwrap();
    for j in 0..3 {
        for i in 0..3 {
            assert_eq!(img.get(i, j), pal.root);
        }
    }
}

#[test]
fn legend_pixels() {
    let pal = Palette::default();
    for (l, color) in [
        (c(-1.0, -(PI * PI - 1.0).sqrt()), pal.periods[0]),
        (c(0.0, -3.0 * PI), pal.asymptotic),
        (c(0.0, 3.0 * PI), pal.asymptotic),
    ] {
        let v = Viewport::new(l, 1e-6, 1e-6, 1, 1).unwrap();
        let img = render_parameter(&v, &cfg(2000), &pal, false).unwrap();
        assert_eq!(img.get(0, 0), color, "λ={l}");
    }
}

#[test]
fn parameter_plane_symmetry() {
    // λ ↦ −λ̄ preserves the critical-orbit type; in pixels that is a left-right flip
    let pal = Palette::default();
    let (w, h) = (41u32, 33u32);
    let center = c(-0.9, -2.4);
    let v = Viewport::new(center, 0.8, 0.6, w, h).unwrap();
    let mirrored = Viewport::new(-center.conj(), 0.8, 0.6, w, h).unwrap();
    let a = render_parameter(&v, &cfg(800), &pal, false).unwrap();
    let b = render_parameter(&mirrored, &cfg(800), &pal, false).unwrap();
    let undetermined = |p: Rgb| pal.undetermined.contains(&p);
    for j in 0..h {
        for i in 0..w {
            let (p, q) = (a.get(i, j), b.get(w - 1 - i, j));
            assert!(
                p == q || (undetermined(p) && undetermined(q)),
                "pixel ({i},{j}): {p:?} vs {q:?}"
            );
        }
    }
}

#[test]
fn mu_chart_maps_omega_minus_inside_the_disk() {
    let pal = Palette::default();
    // μ = 0 ↔ λ = −2πi, the centre of the ∞-attracting region
    let v = Viewport::new(c(0.0, 0.0), 1e-3, 1e-3, 1, 1).unwrap();
    let img = render_parameter(&v, &cfg(500), &pal, true).unwrap();
    assert_eq!(img.get(0, 0), pal.asymptotic);
}

#[test]
fn newton_zero_has_only_root_basins() {
    let pal = Palette::default();
    let (_, map) = pseudotrig(c(0.0, 0.0)).unwrap();
    let v = Viewport::from_bounds(-1.5, 1.5, -0.75, 0.75, 60, 30).unwrap();
    let img = render_dynamical(&map, &v, &cfg(500), &pal, DynPlane::Z, &[]).unwrap();
    for j in 0..30 {
        for i in 0..60 {
            let px = img.get(i, j);
            assert!(
                px == pal.julia || pal.dyn_roots.iter().any(|&r| is_shade_of(px, r, &pal)),
                "pixel ({i},{j}) at {} is {px:?}",
                v.pixel(i as u64, j as u64)
            );
        }
    }
    // integer translates land in the same basin shade
    let a = img.get(5, 10);
    assert_eq!(img.get(25, 10), a);
    assert_eq!(img.get(45, 10), a);
}

#[test]
fn baker_region_below_quarter_line() {
    let pal = Palette::default();
    let (_, map) = pseudotrig(c(0.0, -3.0 * PI)).unwrap();
    let v = Viewport::from_bounds(-0.75, 1.25, -2.0, 0.5, 40, 50).unwrap();
    let img = render_dynamical(&map, &v, &cfg(2000), &pal, DynPlane::Z, &[]).unwrap();
    // the half-line Re z = 1/4, Im z ≤ −1
    for y in [-1.0, -1.5, -1.95] {
        let (fi, fj) = v.locate(c(0.25, y));
        let px = img.get(fi.round() as u32, fj.round() as u32);
        assert!(is_shade_of(px, pal.dyn_infinity, &pal), "Im z={y}: {px:?}");
    }
}

#[test]
fn wandering_chain_markers() {
    let pal = Palette::default();
    let lambda = c(-1.0, -(PI * PI - 1.0).sqrt());
    let (_, map) = pseudotrig(lambda).unwrap();
    let v = Viewport::from_bounds(-1.5, 1.5, -1.15, 0.85, 90, 60).unwrap();
    let markers = pseudotrig_markers(lambda, DynPlane::Z, &v);
    let img = render_dynamical(&map, &v, &cfg(500), &pal, DynPlane::Z, &markers).unwrap();
    let w1 = 2.0 * PI * (PI + (PI * PI - 1.0).sqrt()) - 1.0;
    let y1 = -w1.ln() / (2.0 * PI);
    // z₁* ± 2 and z₁* + 1 sit on the image edges
    for k in [-1.0, 0.0] {
        let z = c(0.5 + k, y1);
        assert!(markers.iter().any(|m| (m - z).norm() < 1e-9), "z₁*{k:+}");
        let (fi, fj) = v.locate(z);
        assert_eq!(img.get(fi.round() as u32, fj.round() as u32), pal.marker);
    }
    // the chain itself is the period-1 cycle colour, away from the marker arms
    let (fi, fj) = v.locate(c(0.5, -0.7));
    let px = img.get(fi.round() as u32, fj.round() as u32);
    assert!(is_shade_of(px, pal.dyn_cycle, &pal), "{px:?}");
}

#[test]
fn sidecar_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("img.png");
    let img = Image::new(3, 2);
    let v = Viewport::new(c(0.0, 0.0), 1.0, 1.0, 3, 2).unwrap();
    let meta = cyldyn::formats::RenderMeta {
        viewport: v,
        cfg_hash: cfg_hash(&cfg(10), &Palette::default()),
        palette_version: PALETTE_VERSION,
        timing_ms: 1.0,
    };
    let side = write_png_with_sidecar(&path, &img, &meta).unwrap();
    assert_eq!(side, dir.path().join("img.png.json"));
    let back: cyldyn::formats::RenderMeta =
        serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
    assert_eq!(back, meta);
    assert_eq!(Image::from_png(&std::fs::read(path).unwrap()).unwrap(), img);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn locate_inverts_pixel(
        cx in -5.0..5.0f64, cy in -5.0..5.0f64, hw in 1e-3..10.0f64, hh in 1e-3..10.0f64,
        w in 1u32..2000, h in 1u32..2000, fi in 0.0..1.0f64, fj in 0.0..1.0f64,
    ) {
        let v = Viewport::new(c(cx, cy), hw, hh, w, h).unwrap();
        let (i, j) = ((fi * w as f64) as u64, (fj * h as f64) as u64);
        let (li, lj) = v.locate(v.pixel(i, j));
        prop_assert!((li - i as f64).abs() < 1e-6 && (lj - j as f64).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn any_partition_stitches(
        w in 8u32..80, h in 8u32..80, fx in 0.05..0.95f64, fy in 0.05..0.95f64,
        re in -1.0..1.0f64, im in -3.0..-1.5f64, dynamical in any::<bool>(),
    ) {
        let pal = Palette::default();
        let o = cfg(200);
        let v = Viewport::new(c(re, im), 0.5, 0.4, w, h).unwrap();
        let (_, map) = pseudotrig(c(re, im)).unwrap();
        let scene = if dynamical {
            Scene::Dynamical { map: &map, plane: DynPlane::W, markers: vec![c(re, im)] }
        } else {
            Scene::Parameter { mu: false }
        };
        let whole = render_region(&scene, &v, v.full(), &o, &pal).unwrap();
        let (sx, sy) = (((w as f64 * fx) as u32).max(1), ((h as f64 * fy) as u32).max(1));
        let mut stitched = Image::new(w, h);
        for (x0, ww) in [(0, sx), (sx, w - sx)] {
            for (y0, hh) in [(0, sy), (sy, h - sy)] {
                let r = Region { x0: x0 as u64, y0: y0 as u64, width: ww, height: hh };
                stitched.blit(&render_region(&scene, &v, r, &o, &pal).unwrap(), x0, y0);
            }
        }
        prop_assert_eq!(stitched, whole);
    }
}
