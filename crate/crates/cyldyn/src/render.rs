//! Tiled rendering of the parameter plane and of dynamical planes.

use std::io::Write;
use std::path::{Path, PathBuf};

use cyldyn_core::newton::{pseudo_fixed_points, PseudotrigParams};
use cyldyn_core::orbit::{Classifier, OrbitClassification, OrbitConfig, OrbitKind};
use cyldyn_core::param::{mtilde_classify, mu_inverse, ANALYSIS_SIGMAS};
use cyldyn_core::{Complex64, ProjectableMap, SpherePoint};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::formats::{pair, OrbitConfigJson, Pair, RenderMeta};

pub const MAX_PX: u32 = 16384;
pub const TILE: u32 = 64;
pub const PALETTE_VERSION: u32 = 1;

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq)]
pub enum RenderError {
    Viewport(String),
    Io(String),
}

impl std::fmt::Display for RenderError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RenderError::Viewport(m) => write!(f, "invalid viewport: {m}"),
            RenderError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl std::error::Error for RenderError {}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub center: Pair,
    pub half_width: f64,
    pub half_height: f64,
    pub px_width: u64,
    pub px_height: u64,
}

impl Viewport {
    pub fn new(
        center: Complex64,
        half_width: f64,
        half_height: f64,
        px_width: u32,
        px_height: u32,
    ) -> Result<Self, RenderError> {
        let v = Viewport {
            center: pair(center),
            half_width,
            half_height,
            px_width: px_width as u64,
            px_height: px_height as u64,
        };
        v.validate()?;
        Ok(v)
    }

    /// `[x0, x1] × [y0, y1]`.
    pub fn from_bounds(
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        px_width: u32,
        px_height: u32,
    ) -> Result<Self, RenderError> {
        let c = Complex64::new((x0 + x1) / 2.0, (y0 + y1) / 2.0);
        Self::new(c, (x1 - x0) / 2.0, (y1 - y0) / 2.0, px_width, px_height)
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        self.validate_extent()?;
        if self.px_width > MAX_PX as u64 || self.px_height > MAX_PX as u64 {
            return Err(RenderError::Viewport(format!(
                "pixel dimensions above {MAX_PX}"
            )));
        }
        Ok(())
    }

    /// Like [`Viewport::validate`] without the pixel cap; tile pyramids use
    /// virtual viewports far larger than any single image.
    pub fn validate_extent(&self) -> Result<(), RenderError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(self.center[0].is_finite() && self.center[1].is_finite()) {
            return Err(RenderError::Viewport("center must be finite".into()));
        }
        if !(ok(self.half_width) && ok(self.half_height)) {
            return Err(RenderError::Viewport(
                "extents must be positive and finite".into(),
            ));
        }
        if self.px_width == 0 || self.px_height == 0 {
            return Err(RenderError::Viewport(
                "pixel dimensions must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Center of pixel `(i, j)`; row `0` is the top edge.
    pub fn pixel(&self, i: u64, j: u64) -> Complex64 {
        let x = self.center[0] - self.half_width
            + (i as f64 + 0.5) * (2.0 * self.half_width / self.px_width as f64);
        let y = self.center[1] + self.half_height
            - (j as f64 + 0.5) * (2.0 * self.half_height / self.px_height as f64);
        Complex64::new(x, y)
    }

    /// Fractional pixel coordinates of a plane point.
    pub fn locate(&self, z: Complex64) -> (f64, f64) {
        let i = (z.re - (self.center[0] - self.half_width)) * self.px_width as f64
            / (2.0 * self.half_width)
            - 0.5;
        let j = ((self.center[1] + self.half_height) - z.im) * self.px_height as f64
            / (2.0 * self.half_height)
            - 0.5;
        (i, j)
    }

    /// Unchecked pixel dimensions; see [`Viewport::validate_extent`].
    pub fn virtual_window(
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        px_width: u64,
        px_height: u64,
    ) -> Result<Self, RenderError> {
        let v = Viewport {
            center: [(x0 + x1) / 2.0, (y0 + y1) / 2.0],
            half_width: (x1 - x0) / 2.0,
            half_height: (y1 - y0) / 2.0,
            px_width,
            px_height,
        };
        v.validate_extent()?;
        Ok(v)
    }

    /// The whole viewport; only meaningful after [`Viewport::validate`].
    pub fn full(&self) -> Region {
        Region {
            x0: 0,
            y0: 0,
            width: self.px_width as u32,
            height: self.px_height as u32,
        }
    }
}

/// Pixel rectangle of a (possibly virtual) viewport.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    pub x0: u64,
    pub y0: u64,
    pub width: u32,
    pub height: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB8.
    pub data: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Image {
            width,
            height,
            data: vec![0; width as usize * height as usize * 3],
        }
    }

    pub fn get(&self, i: u32, j: u32) -> Rgb {
        let k = (j as usize * self.width as usize + i as usize) * 3;
        [self.data[k], self.data[k + 1], self.data[k + 2]]
    }

    pub fn put(&mut self, i: u32, j: u32, c: Rgb) {
        let k = (j as usize * self.width as usize + i as usize) * 3;
        self.data[k..k + 3].copy_from_slice(&c);
    }

    /// Copies `src` with its top-left corner at `(i0, j0)`.
    pub fn blit(&mut self, src: &Image, i0: u32, j0: u32) {
        let row = src.width as usize * 3;
        for j in 0..src.height as usize {
            let d = ((j0 as usize + j) * self.width as usize + i0 as usize) * 3;
            self.data[d..d + row].copy_from_slice(&src.data[j * row..(j + 1) * row]);
        }
    }

    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().expect("in-memory png header");
            w.write_image_data(&self.data).expect("in-memory png data");
        }
        out
    }

    pub fn from_png(bytes: &[u8]) -> Result<Self, RenderError> {
        let dec = png::Decoder::new(std::io::Cursor::new(bytes));
        let mut r = dec
            .read_info()
            .map_err(|e| RenderError::Io(e.to_string()))?;
        let mut buf = vec![0; r.output_buffer_size().unwrap_or(0)];
        let info = r
            .next_frame(&mut buf)
            .map_err(|e| RenderError::Io(e.to_string()))?;
        if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
            return Err(RenderError::Io("expected 8-bit RGB".into()));
        }
        buf.truncate(info.buffer_size());
        Ok(Image {
            width: info.width,
            height: info.height,
            data: buf,
        })
    }
}

/// Colors of both plane types. Partial JSON overrides keep the other defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Palette {
    /// Parameter plane: critical orbit in the root basin.
    pub root: Rgb,
    /// Parameter plane: periods `1..=7`.
    pub periods: [Rgb; 7],
    pub high_period: Rgb,
    /// Parameter plane: critical orbit attracted to `0` or `∞`.
    pub asymptotic: Rgb,
    pub undetermined: [Rgb; 2],
    pub singular: Rgb,
    /// Dynamical planes: one shade per attracting root.
    pub dyn_roots: Vec<Rgb>,
    pub dyn_zero: Rgb,
    pub dyn_infinity: Rgb,
    pub dyn_cycle: Rgb,
    pub julia: Rgb,
    pub marker: Rgb,
    /// Brightness of the fastest orbits; the slowest reach `1`.
    pub brightness_min: f64,
    /// Iteration count that maps to full brightness.
    pub ramp_iterations: usize,
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            root: [255, 255, 255],
            periods: [
                [230, 25, 25],
                [255, 140, 0],
                [255, 230, 0],
                [40, 180, 60],
                [100, 190, 255],
                [20, 40, 160],
                [130, 40, 170],
            ],
            high_period: [0, 0, 0],
            asymptotic: [160, 160, 160],
            undetermined: [[100, 100, 100], [120, 120, 120]],
            singular: [255, 0, 255],
            dyn_roots: vec![
                [150, 60, 200],
                [200, 110, 230],
                [110, 40, 150],
                [230, 160, 250],
            ],
            dyn_zero: [90, 170, 255],
            dyn_infinity: [30, 80, 220],
            dyn_cycle: [255, 140, 0],
            julia: [0, 0, 0],
            marker: [255, 255, 255],
            brightness_min: 0.4,
            ramp_iterations: 200,
        }
    }
}

impl Palette {
    /// Legend color of a [`cyldyn_core::param::color_index`].
    pub fn legend(&self, index: u8) -> Rgb {
        match index {
            0 => self.root,
            1..=7 => self.periods[index as usize - 1],
            8 => self.high_period,
            9 => self.asymptotic,
            10 => self.undetermined[0],
            _ => self.singular,
        }
    }

    fn checker(&self, i: u64, j: u64) -> Rgb {
        self.undetermined[((i / 2 + j / 2) % 2) as usize]
    }

    /// `brightness_min` at one iteration, affine in `log` up to `ramp_iterations`.
    pub fn brightness(&self, iterations: usize) -> f64 {
        let top = (1.0 + self.ramp_iterations.max(1) as f64).ln();
        let s = ((1.0 + iterations as f64).ln() / top).clamp(0.0, 1.0);
        self.brightness_min + (1.0 - self.brightness_min) * s
    }

    fn shade(&self, c: Rgb, iterations: usize) -> Rgb {
        let b = self.brightness(iterations);
        c.map(|x| (x as f64 * b).round().clamp(0.0, 255.0) as u8)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynPlane {
    /// The lift `f` on `C`.
    Z,
    /// The projection `g` on `C*`.
    W,
}

/// What one pixel shows.
#[derive(Clone, Debug)]
pub enum Scene<'a> {
    /// `λ`-plane, or the `μ`-chart of it.
    Parameter { mu: bool },
    Dynamical {
        map: &'a ProjectableMap,
        plane: DynPlane,
        markers: Vec<Complex64>,
    },
}

/// Marker positions for a pseudotrigonometric map in the given plane: `B`, `C`
/// and the fixed points `w_σ*`, with all integer translates inside `v` in `z`.
pub fn pseudotrig_markers(lambda: Complex64, plane: DynPlane, v: &Viewport) -> Vec<Complex64> {
    let Ok(p) = PseudotrigParams::new(lambda) else {
        return Vec::new();
    };
    let mut pts = vec![p.b(), p.c()];
    for sigma in ANALYSIS_SIGMAS {
        if let (SpherePoint::Finite(w), _) = pseudo_fixed_points(&p, sigma) {
            pts.push(w);
        }
    }
    match plane {
        DynPlane::W => pts,
        DynPlane::Z => {
            let (lo, hi) = (
                v.center[0] - v.half_width - 1.0,
                v.center[0] + v.half_width + 1.0,
            );
            let mut out = Vec::new();
            for w in pts.into_iter().filter(|w| w.norm() > 0.0) {
                let z = Complex64::new(w.re, w.im + 0.0).ln()
                    / Complex64::new(0.0, std::f64::consts::TAU);
                let mut k = (lo - z.re).ceil();
                while z.re + k <= hi {
                    out.push(z + k);
                    k += 1.0;
                }
            }
            out
        }
    }
}

enum Prepared<'a> {
    Parameter {
        mu: bool,
    },
    Dynamical {
        classifier: Classifier<'a>,
        plane: DynPlane,
    },
}

fn param_color(lambda: SpherePoint, cfg: &OrbitConfig, pal: &Palette, i: u64, j: u64) -> Rgb {
    match lambda.finite().map(|l| mtilde_classify(l, cfg)) {
        Some(Ok(c)) if c.kind == OrbitKind::Undetermined => pal.checker(i, j),
        Some(Ok(c)) => pal.legend(c.color_index),
        _ => pal.singular,
    }
}

fn dyn_color(c: &OrbitClassification, roots: &[Complex64], pal: &Palette, i: u64, j: u64) -> Rgb {
    let n = c.iterations;
    match c.kind {
        OrbitKind::FixedRoot => {
            let k = c
                .final_point
                .finite()
                .and_then(|w| {
                    (0..roots.len())
                        .min_by(|&a, &b| (roots[a] - w).norm().total_cmp(&(roots[b] - w).norm()))
                })
                .unwrap_or(0);
            let base = pal
                .dyn_roots
                .get(k % pal.dyn_roots.len().max(1))
                .copied()
                .unwrap_or(pal.root);
            pal.shade(base, n)
        }
        OrbitKind::ZeroAv => pal.shade(pal.dyn_zero, n),
        OrbitKind::InfinityAv => pal.shade(pal.dyn_infinity, n),
        OrbitKind::Cycle { .. } => pal.shade(pal.dyn_cycle, n),
        OrbitKind::Undetermined => pal.checker(i, j),
        OrbitKind::Prepole { .. } | OrbitKind::Escaped => pal.julia,
    }
}

impl Prepared<'_> {
    fn color(&self, v: &Viewport, i: u64, j: u64, pal: &Palette, cfg: &OrbitConfig) -> Rgb {
        let x = v.pixel(i, j);
        match self {
            Prepared::Parameter { mu: false } => param_color(SpherePoint::new(x), cfg, pal, i, j),
            Prepared::Parameter { mu: true } => {
                param_color(mu_inverse(SpherePoint::new(x)), cfg, pal, i, j)
            }
            Prepared::Dynamical { classifier, plane } => {
                let c = match plane {
                    DynPlane::Z => classifier.classify_lift(x),
                    DynPlane::W => classifier.classify(SpherePoint::new(x)),
                };
                dyn_color(&c, classifier.attracting_roots(), pal, i, j)
            }
        }
    }
}

/// Renders `region` of `v`. Pixels depend only on their global indices, so any
/// partition of a viewport into regions stitches to the monolithic image.
pub fn render_region(
    scene: &Scene,
    v: &Viewport,
    region: Region,
    cfg: &OrbitConfig,
    pal: &Palette,
) -> Result<Image, RenderError> {
    v.validate_extent()?;
    if region.width == 0 || region.height == 0 || region.width > MAX_PX || region.height > MAX_PX {
        return Err(RenderError::Viewport(
            "region dimensions must be in 1..=16384".into(),
        ));
    }
    if region.x0 + region.width as u64 > v.px_width
        || region.y0 + region.height as u64 > v.px_height
    {
        return Err(RenderError::Viewport("region exceeds the viewport".into()));
    }
    let prepared = match scene {
        Scene::Parameter { mu } => Prepared::Parameter { mu: *mu },
        Scene::Dynamical { map, plane, .. } => Prepared::Dynamical {
            classifier: Classifier::new(map, *cfg),
            plane: *plane,
        },
    };

    let mut tiles = Vec::new();
    for ty in (0..region.height).step_by(TILE as usize) {
        for tx in (0..region.width).step_by(TILE as usize) {
            tiles.push((
                tx,
                ty,
                TILE.min(region.width - tx),
                TILE.min(region.height - ty),
            ));
        }
    }
    // orbit cost varies wildly near the Julia set, so tiles are stolen one by one
    let rendered: Vec<(u32, u32, Image)> = tiles
        .into_par_iter()
        .with_max_len(1)
        .map(|(tx, ty, w, h)| {
            let mut img = Image::new(w, h);
            for j in 0..h {
                for i in 0..w {
                    let (gi, gj) = (region.x0 + (tx + i) as u64, region.y0 + (ty + j) as u64);
                    img.put(i, j, prepared.color(v, gi, gj, pal, cfg));
                }
            }
            (tx, ty, img)
        })
        .collect();

    let mut out = Image::new(region.width, region.height);
    for (tx, ty, img) in &rendered {
        out.blit(img, *tx, *ty);
    }
    if let Scene::Dynamical { markers, .. } = scene {
        draw_markers(&mut out, v, region, markers, pal.marker);
    }
    Ok(out)
}

fn draw_markers(img: &mut Image, v: &Viewport, region: Region, markers: &[Complex64], color: Rgb) {
    const ARM: i64 = 3;
    for &m in markers {
        let (fi, fj) = v.locate(m);
        if !(fi.is_finite() && fj.is_finite()) {
            continue;
        }
        let (ci, cj) = (fi.round() as i64, fj.round() as i64);
        for d in -ARM..=ARM {
            for (gi, gj) in [(ci + d, cj), (ci, cj + d)] {
                let (li, lj) = (gi - region.x0 as i64, gj - region.y0 as i64);
                if (0..region.width as i64).contains(&li) && (0..region.height as i64).contains(&lj)
                {
                    img.put(li as u32, lj as u32, color);
                }
            }
        }
    }
}

/// `mtilde_classify` per pixel of the `λ`-plane (or the `μ`-chart).
pub fn render_parameter(
    v: &Viewport,
    cfg: &OrbitConfig,
    pal: &Palette,
    mu: bool,
) -> Result<Image, RenderError> {
    v.validate()?;
    render_region(&Scene::Parameter { mu }, v, v.full(), cfg, pal)
}

pub fn render_dynamical(
    map: &ProjectableMap,
    v: &Viewport,
    cfg: &OrbitConfig,
    pal: &Palette,
    plane: DynPlane,
    markers: &[Complex64],
) -> Result<Image, RenderError> {
    v.validate()?;
    let scene = Scene::Dynamical {
        map,
        plane,
        markers: markers.to_vec(),
    };
    render_region(&scene, v, v.full(), cfg, pal)
}

/// Short hex digest of everything besides the viewport that affects pixels.
pub fn cfg_hash(cfg: &OrbitConfig, pal: &Palette) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        orbit: OrbitConfigJson,
        palette: &'a Palette,
        version: u32,
    }
    let key = Key {
        orbit: (*cfg).into(),
        palette: pal,
        version: PALETTE_VERSION,
    };
    let bytes = serde_json::to_vec(&key).expect("config serializes");
    hex::encode(&Sha256::digest(&bytes)[..8])
}

/// Writes `path` and its sidecar `path.json`; returns the sidecar path.
pub fn write_png_with_sidecar(
    path: &Path,
    img: &Image,
    meta: &RenderMeta,
) -> Result<PathBuf, RenderError> {
    let io = |e: std::io::Error| RenderError::Io(format!("{}: {e}", path.display()));
    std::fs::write(path, img.to_png()).map_err(io)?;
    let mut side = path.as_os_str().to_owned();
    side.push(".json");
    let side = PathBuf::from(side);
    let mut f = std::fs::File::create(&side).map_err(io)?;
    serde_json::to_writer_pretty(&mut f, meta).map_err(|e| RenderError::Io(e.to_string()))?;
    writeln!(f).map_err(io)?;
    Ok(side)
}
