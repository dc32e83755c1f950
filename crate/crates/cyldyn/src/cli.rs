//! The `cyldyn` command line.

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cyldyn_core::newton::{build_newton_map, pseudo_fixed_points, NewtonSpec};
use cyldyn_core::orbit::{
    find_periodic_points, lift_periodic_point, rotation_number, tune_rotation_number_with,
    OrbitConfig, SeedGrid, TUNE_ITERATIONS,
};
use cyldyn_core::param::{analyze, prepole_defect, prepole_search, pseudotrig};
use cyldyn_core::{Complex64, Preset, ProjectableMap};
use serde::{Deserialize, Serialize};

use crate::formats::{
    checked_lambda, format_complex_raw, pair, parse_complex, parse_target, AnalysisRecord,
    ConfigFile, ErrorRecord, MapSpec, NewtonSpecJson, PrepoleRecord, PseudoPointRecord, RenderMeta,
    RotationRecord,
};
use crate::render::{
    cfg_hash, pseudotrig_markers, render_dynamical, render_parameter, write_png_with_sidecar,
    DynPlane, Palette, Viewport, PALETTE_VERSION,
};
use crate::service::{self, ray_record, RayError, ServiceConfig, Window};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

fn complex_arg(s: &str) -> Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.0)
}

fn target_arg(s: &str) -> Result<f64, String> {
    parse_target(s).map_err(|e| e.0)
}

#[derive(Debug, Parser)]
#[command(
    name = "cyldyn",
    version,
    about = "Dynamics of projectable meromorphic maps and their Newton families"
)]
pub struct Cli {
    /// JSON file with `orbit` and `palette` overrides.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Print a single formatted value instead of JSON.
    #[arg(long, global = true)]
    pub raw: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analysis record of a pseudotrigonometric parameter.
    Analyze {
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, value_name = "RE,IM")]
        lambda: Complex64,
    },
    /// Render the parameter plane.
    RenderParam(RenderParamArgs),
    /// Render a dynamical plane.
    RenderDyn(RenderDynArgs),
    /// Point (or sampled polyline) of an internal ray.
    Ray(RayArgs),
    /// Pseudoperiodic point of type (p, σ).
    Pseudo(PseudoArgs),
    /// Rotation numbers of the Blaschke standard family.
    #[command(subcommand)]
    Rotation(RotationCommand),
    /// Parameter whose free critical value is a prepole of the given order.
    PrepoleSearch {
        #[arg(long)]
        order: usize,
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, value_name = "RE,IM")]
        seed: Complex64,
    },
    /// Start the tile service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, value_name = "RE,IM")]
    pub center: Option<Complex64>,
    #[arg(long, allow_hyphen_values = true)]
    pub half_width: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub half_height: Option<f64>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    /// Overrides `orbit.max_iter`.
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_name = "PNG")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderParamArgs {
    #[command(flatten)]
    pub window: WindowArgs,
    /// Render the `μ = (λ+2πi)/λ` chart.
    #[arg(long)]
    pub mu: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PlaneArg {
    Z,
    W,
}

#[derive(Debug, Args)]
pub struct RenderDynArgs {
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, value_name = "RE,IM")]
    pub lambda: Option<Complex64>,
    /// Map spec JSON file.
    #[arg(long, value_name = "PATH")]
    pub map: Option<PathBuf>,
    /// Newton spec JSON file.
    #[arg(long, value_name = "PATH")]
    pub newton: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "z")]
    pub plane: PlaneArg,
    /// Mark `B`, `C` and the fixed points `w_σ*` (pseudotrigonometric maps only).
    #[arg(long)]
    pub markers: bool,
}

#[derive(Debug, Args)]
pub struct RayArgs {
    /// omega-minus, omega-plus or omega0k.
    #[arg(long)]
    pub component: String,
    /// `r/p` or a decimal in [0, 1).
    #[arg(long, default_value = "0")]
    pub theta: String,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub k: i64,
    /// Log-radius `t ≤ 0`, or `1` for the landing point.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub t: f64,
    /// Half-plane of an omega0k component.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub sign: i8,
    /// Sample the whole ray at this many points.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PseudoArgs {
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, value_name = "RE,IM")]
    pub lambda: Option<Complex64>,
    #[arg(long, value_name = "PATH")]
    pub map: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: i64,
}

#[derive(Debug, Subcommand)]
pub enum RotationCommand {
    /// Bisect `α` until the rotation number hits the target.
    Tune {
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, default_value = "0.5,0", value_name = "RE,IM")]
        a: Complex64,
        #[arg(long)]
        beta: f64,
        /// A number in (0, 1) or `golden`.
        #[arg(long, value_parser = target_arg)]
        target: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = TUNE_ITERATIONS)]
        iterations: usize,
    },
    /// Rotation number of one map.
    Measure {
        #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, default_value = "0.5,0", value_name = "RE,IM")]
        a: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta0: f64,
        #[arg(long, default_value_t = TUNE_ITERATIONS)]
        iterations: usize,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Directory served at `/`.
    #[arg(long, value_name = "DIR")]
    pub static_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    pub cache_mib: usize,
    /// Concurrent computations before 503; defaults to four per worker.
    #[arg(long)]
    pub queue: Option<usize>,
    /// Allowed CORS origin; any origin when absent.
    #[arg(long)]
    pub cors_origin: Option<String>,
}

/// Printed after a render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderOutput {
    pub png: String,
    pub sidecar: String,
    #[serde(flatten)]
    pub meta: RenderMeta,
}

/// A failure with its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute(ErrorRecord),
}

impl From<cyldyn_core::Error> for Failure {
    fn from(e: cyldyn_core::Error) -> Self {
        Failure::Compute(ErrorRecord::new(e.kind(), &e))
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Compute(ErrorRecord::new("Io", format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

struct Settings {
    orbit: OrbitConfig,
    palette: Palette,
    raw: bool,
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let text = e.to_string();
            let line = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            let _ = writeln!(err, "{line}");
            return EXIT_USAGE;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Compute(rec)) => {
            let _ = writeln!(
                err,
                "{}",
                serde_json::to_string(&rec).expect("error record serializes")
            );
            EXIT_FAILURE
        }
    }
}

fn settings(cli: &Cli) -> Result<Settings, Failure> {
    let file = match &cli.config {
        Some(p) => ConfigFile::parse(&read_text(p)?).map_err(|e| Failure::Usage(e.0))?,
        None => ConfigFile::default(),
    };
    Ok(Settings {
        orbit: file.orbit.into(),
        palette: file.palette,
        raw: cli.raw,
    })
}

fn print_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).expect("records serialize");
    writeln!(out, "{s}").map_err(|e| io_failure(Path::new("<stdout>"), e))
}

fn print_line(out: &mut dyn Write, s: &str) -> Result<(), Failure> {
    writeln!(out, "{s}").map_err(|e| io_failure(Path::new("<stdout>"), e))
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let s = settings(&cli)?;
    match cli.command {
        Command::Analyze { lambda } => {
            let a = analyze(checked_lambda(lambda)?, &s.orbit)?;
            let rec = AnalysisRecord::from(&a);
            if s.raw {
                print_line(
                    out,
                    &format!(
                        "{} period={}",
                        rec.kind,
                        rec.period.map_or("-".into(), |p| p.to_string())
                    ),
                )
            } else {
                print_json(out, &rec)
            }
        }
        Command::RenderParam(a) => render_param_cmd(&a, &s, out),
        Command::RenderDyn(a) => render_dyn_cmd(&a, &s, out),
        Command::Ray(a) => {
            let rec = ray_record(&a.component, &a.theta, a.k, a.sign, a.t, a.samples).map_err(
                |e| match e {
                    RayError::Syntax(m) => Failure::Usage(m),
                    RayError::Domain(e) => e.into(),
                },
            )?;
            if s.raw {
                for p in &rec.points {
                    print_line(out, &format_complex_raw(Complex64::new(p[0], p[1])))?;
                }
                Ok(())
            } else {
                print_json(out, &rec)
            }
        }
        Command::Pseudo(a) => pseudo_cmd(&a, &s, out),
        Command::Rotation(RotationCommand::Tune {
            a,
            beta,
            target,
            tol,
            iterations,
        }) => {
            if !(0.0..1.0).contains(&target) || tol <= 0.0 {
                return Err(Failure::Usage(
                    "target must lie in [0, 1) and tol must be positive".into(),
                ));
            }
            let alpha = tune_rotation_number_with(a, beta, target, tol, iterations)?;
            let map = Preset::MeroStandard { a, alpha, beta }.build()?;
            let rho = rotation_number(&map, 0.0, iterations)?;
            let rec = RotationRecord {
                a: pair(a),
                beta,
                alpha,
                rotation_number: Some(rho),
                iterations,
            };
            if s.raw {
                print_line(out, &format!("alpha={alpha:.6}"))
            } else {
                print_json(out, &rec)
            }
        }
        Command::Rotation(RotationCommand::Measure {
            a,
            alpha,
            beta,
            theta0,
            iterations,
        }) => {
            let map = Preset::MeroStandard { a, alpha, beta }.build()?;
            let rho = rotation_number(&map, theta0, iterations)?;
            let rec = RotationRecord {
                a: pair(a),
                beta,
                alpha,
                rotation_number: Some(rho),
                iterations,
            };
            if s.raw {
                print_line(out, &format!("rho={rho:.6}"))
            } else {
                print_json(out, &rec)
            }
        }
        Command::PrepoleSearch { order, seed } => {
            if order == 0 {
                return Err(Failure::Usage("order must be at least 1".into()));
            }
            let lambda = prepole_search(order, seed)?;
            let defect = prepole_defect(lambda, order)
                .map(|d| d.norm())
                .unwrap_or(f64::INFINITY);
            if s.raw {
                print_line(out, &format_complex_raw(lambda))
            } else {
                print_json(
                    out,
                    &PrepoleRecord {
                        order,
                        lambda: pair(lambda),
                        defect,
                    },
                )
            }
        }
        Command::Serve(a) => serve_cmd(&a, &s),
    }
}

fn viewport(w: &WindowArgs, root: Window, default_px: (u32, u32)) -> Result<Viewport, Failure> {
    let c = w.center.unwrap_or(Complex64::new(
        (root.x0 + root.x1) / 2.0,
        (root.y0 + root.y1) / 2.0,
    ));
    let hw = w.half_width.unwrap_or((root.x1 - root.x0) / 2.0);
    let hh = w.half_height.unwrap_or((root.y1 - root.y0) / 2.0);
    let (pw, ph) = (
        w.width.unwrap_or(default_px.0),
        w.height.unwrap_or(default_px.1),
    );
    Viewport::new(c, hw, hh, pw, ph).map_err(|e| Failure::Usage(e.to_string()))
}

fn orbit_with(s: &Settings, w: &WindowArgs) -> Result<OrbitConfig, Failure> {
    let mut cfg = s.orbit;
    if let Some(n) = w.max_iter {
        cfg.max_iter = n;
        cfg.period_cap = cfg.period_cap.min(n.max(1));
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn finish_render(
    img: crate::render::Image,
    v: Viewport,
    cfg: &OrbitConfig,
    pal: &Palette,
    started: Instant,
    path: &Path,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let meta = RenderMeta {
        viewport: v,
        cfg_hash: cfg_hash(cfg, pal),
        palette_version: PALETTE_VERSION,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    let side = write_png_with_sidecar(path, &img, &meta).map_err(|e| io_failure(path, e))?;
    let rec = RenderOutput {
        png: path.display().to_string(),
        sidecar: side.display().to_string(),
        meta,
    };
    print_json(out, &rec)
}

fn render_param_cmd(a: &RenderParamArgs, s: &Settings, out: &mut dyn Write) -> Result<(), Failure> {
    let root = if a.mu { Window::MU } else { Window::PARAM };
    let v = viewport(&a.window, root, (750, 650))?;
    let cfg = orbit_with(s, &a.window)?;
    let started = Instant::now();
    let img =
        render_parameter(&v, &cfg, &s.palette, a.mu).map_err(|e| Failure::Usage(e.to_string()))?;
    finish_render(img, v, &cfg, &s.palette, started, &a.window.out, out)
}

fn load_map(
    lambda: Option<Complex64>,
    map: &Option<PathBuf>,
    newton: &Option<PathBuf>,
) -> Result<ProjectableMap, Failure> {
    let given = lambda.is_some() as u8 + map.is_some() as u8 + newton.is_some() as u8;
    if given != 1 {
        return Err(Failure::Usage("give exactly one map source".into()));
    }
    if let Some(l) = lambda {
        return Ok(pseudotrig(checked_lambda(l)?)?.1);
    }
    if let Some(p) = map {
        let spec = MapSpec::parse(&read_text(p)?).map_err(|e| Failure::Usage(e.0))?;
        return Ok(spec.build()?);
    }
    if let Some(p) = newton {
        let j: NewtonSpecJson = serde_json::from_str(&read_text(p)?)
            .map_err(|e| Failure::Usage(format!("newton spec: {e}")))?;
        return Ok(build_newton_map(&NewtonSpec::from(&j))?);
    }
    unreachable!("exactly one source was checked above")
}

fn render_dyn_cmd(a: &RenderDynArgs, s: &Settings, out: &mut dyn Write) -> Result<(), Failure> {
    let (plane, root) = match a.plane {
        PlaneArg::Z => (DynPlane::Z, Window::DYN),
        PlaneArg::W => (
            DynPlane::W,
            Window {
                x0: -3.0,
                x1: 3.0,
                y0: -3.0,
                y1: 3.0,
            },
        ),
    };
    let v = viewport(&a.window, root, (900, 600))?;
    let cfg = orbit_with(s, &a.window)?;
    let map = load_map(a.lambda, &a.map, &a.newton)?;
    let markers = match (a.markers, a.lambda) {
        (true, Some(l)) => pseudotrig_markers(l, plane, &v),
        (true, None) => return Err(Failure::Usage("--markers needs --lambda".into())),
        _ => Vec::new(),
    };
    let started = Instant::now();
    let img = render_dynamical(&map, &v, &cfg, &s.palette, plane, &markers)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    finish_render(img, v, &cfg, &s.palette, started, &a.window.out, out)
}

/// Search window for periodic points of period ≥ 2.
const PSEUDO_GRID: SeedGrid = SeedGrid {
    center: Complex64::new(0.0, 0.0),
    half_width: 4.0,
    half_height: 4.0,
    nx: 48,
    ny: 48,
};

fn pseudo_cmd(a: &PseudoArgs, s: &Settings, out: &mut dyn Write) -> Result<(), Failure> {
    if a.p == 0 {
        return Err(Failure::Usage("p must be at least 1".into()));
    }
    let (map, params) = match (a.lambda, &a.map) {
        (Some(l), None) => {
            let (p, m) = pseudotrig(checked_lambda(l)?)?;
            (m, Some(p))
        }
        _ => (load_map(a.lambda, &a.map, &None)?, None),
    };
    let found = match params {
        // closed form for the fixed points of the pseudotrigonometric family
        Some(p) if a.p == 1 => {
            let (w, mult) = pseudo_fixed_points(&p, a.sigma);
            let pp = lift_periodic_point(&map, w, 1)?;
            (pp.sigma == a.sigma).then_some((pp, mult))
        }
        _ => find_periodic_points(&map, a.p, &PSEUDO_GRID, &s.orbit)?
            .into_iter()
            .filter_map(|(w, m)| lift_periodic_point(&map, w, a.p).ok().map(|pp| (pp, m)))
            .filter(|(pp, _)| pp.sigma == a.sigma)
            .min_by(|x, y| x.1.norm().total_cmp(&y.1.norm())),
    };
    let (pp, mult) = found.ok_or(cyldyn_core::Error::NoConvergence)?;
    if s.raw {
        print_line(out, &format_complex_raw(pp.z_star))
    } else {
        print_json(out, &PseudoPointRecord::new(&pp, Some(mult)))
    }
}

fn serve_cmd(a: &ServeArgs, s: &Settings) -> Result<(), Failure> {
    let workers = rayon::current_num_threads();
    let cfg = ServiceConfig {
        orbit: s.orbit,
        palette: s.palette.clone(),
        cache_bytes: a.cache_mib << 20,
        queue_capacity: a.queue.unwrap_or(4 * workers).max(1),
        static_dir: a.static_dir.clone(),
        cors_origin: a.cors_origin.clone(),
        ..ServiceConfig::default()
    };
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::Compute(ErrorRecord::new("Io", e)))?;
    rt.block_on(service::serve(cfg, SocketAddr::new(a.host, a.port)))
        .map_err(|e| Failure::Compute(ErrorRecord::new("Io", e)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("cyldyn").chain(args.iter().copied()),
            &mut o,
            &mut e,
        );
        (
            code,
            String::from_utf8(o).unwrap(),
            String::from_utf8(e).unwrap(),
        )
    }

    #[test]
    fn usage_errors_are_one_line() {
        let (code, _, err) = run_str(&["analyze", "--lambda", "nope"]);
        assert_eq!(code, EXIT_USAGE);
        assert_eq!(err.lines().count(), 1, "{err}");
        let (code, _, _) = run_str(&["frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn ray_raw_landing() {
        let (code, out, _) = run_str(&[
            "--raw",
            "ray",
            "--component",
            "omega-minus",
            "--theta",
            "0",
            "--k",
            "-1",
            "--t",
            "1",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "-1.000000 -3.141593i");
    }

    #[test]
    fn compute_errors_are_json() {
        let (code, _, err) = run_str(&["analyze", "--lambda", "0,3.141592653589793"]);
        assert_eq!(code, EXIT_FAILURE);
        let rec: ErrorRecord = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(rec.error, "ParamSingularity");
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("render-param"));
    }
}
