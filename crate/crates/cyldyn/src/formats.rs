//! JSON records shared by the CLI and the HTTP service, plus the small text
//! syntaxes used on the command line and in query strings.

use cyldyn_core::maps::Preset;
use cyldyn_core::newton::NewtonSpec;
use cyldyn_core::orbit::{
    LiftDiagnosis, LiftVerdict, OrbitClassification, OrbitConfig, OrbitKind, PseudoPoint,
};
use cyldyn_core::param::{Analysis, RayComponent, Theta};
use cyldyn_core::{Complex64, Polynomial, ProjectableMap, RationalMap, SpherePoint};
use serde::{Deserialize, Serialize};

use crate::render::{Palette, Viewport};

/// `[re, im]`.
pub type Pair = [f64; 2];

pub fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

pub fn from_pair(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// `∞` is written as `null`.
pub fn sphere_pair(w: SpherePoint) -> Option<Pair> {
    w.finite().map(pair)
}

pub fn sphere_from_pair(p: Option<Pair>) -> SpherePoint {
    p.map_or(SpherePoint::Infinity, |p| SpherePoint::new(from_pair(p)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError(pub String);

impl std::fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SyntaxError {}

fn finite(s: &str, what: &str) -> Result<f64, SyntaxError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| SyntaxError(format!("{what}: `{s}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SyntaxError(format!("{what}: `{s}` is not finite")))
    }
}

/// Distance from `±πi` inside which a parameter is refused.
pub const SINGULAR_TOL: f64 = 1e-7;

/// Refuses `λ` within [`SINGULAR_TOL`] of `±πi`, where `M_λ` degenerates.
pub fn checked_lambda(l: Complex64) -> Result<Complex64, cyldyn_core::Error> {
    let pi_i = Complex64::new(0.0, std::f64::consts::PI);
    if (l - pi_i).norm() <= SINGULAR_TOL || (l + pi_i).norm() <= SINGULAR_TOL {
        Err(cyldyn_core::Error::ParamSingularity)
    } else {
        Ok(l)
    }
}

/// `re,im`.
pub fn parse_complex(s: &str) -> Result<Complex64, SyntaxError> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| SyntaxError(format!("expected `re,im`, got `{s}`")))?;
    Ok(Complex64::new(
        finite(re, "real part")?,
        finite(im, "imaginary part")?,
    ))
}

/// `r/p` for a reduced rational in `[0, 1)`, or a decimal.
pub fn parse_theta(s: &str) -> Result<Theta, SyntaxError> {
    if let Some((r, p)) = s.split_once('/') {
        let r: i64 = r
            .trim()
            .parse()
            .map_err(|_| SyntaxError(format!("bad numerator in `{s}`")))?;
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| SyntaxError(format!("bad denominator in `{s}`")))?;
        Theta::rational(r, p).map_err(|e| SyntaxError(format!("theta `{s}`: {e}")))
    } else {
        let v = finite(s, "theta")?;
        if (0.0..1.0).contains(&v) {
            Ok(Theta::Real(v))
        } else {
            Err(SyntaxError(format!("theta must lie in [0, 1), got {v}")))
        }
    }
}

pub fn format_theta(t: Theta) -> String {
    match t {
        Theta::Rational { r, p } => format!("{r}/{p}"),
        Theta::Real(x) => format!("{x}"),
    }
}

/// `golden` is `(√5 − 1)/2`.
pub fn parse_target(s: &str) -> Result<f64, SyntaxError> {
    if s.eq_ignore_ascii_case("golden") {
        Ok((5f64.sqrt() - 1.0) / 2.0)
    } else {
        finite(s, "target")
    }
}

/// `omega-plus`, `omega-minus` or `omega0k`; the last needs `sign` and uses `k`.
pub fn parse_component(name: &str, sign: i8, k: i64) -> Result<RayComponent, SyntaxError> {
    match name {
        "omega-plus" => Ok(RayComponent::OmegaPlus),
        "omega-minus" => Ok(RayComponent::OmegaMinus),
        "omega0k" => {
            if sign != 1 && sign != -1 {
                return Err(SyntaxError("omega0k needs sign 1 or -1".into()));
            }
            Ok(RayComponent::Omega0k { sign, k })
        }
        other => Err(SyntaxError(format!(
            "unknown component `{other}` (expected omega-plus, omega-minus, omega0k)"
        ))),
    }
}

/// `-1.000000 -3.141593i`.
pub fn format_complex_raw(z: Complex64) -> String {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    format!(
        "{:.6} {}{:.6}i",
        z.re,
        if im < 0.0 { '-' } else { '+' },
        im.abs()
    )
}

/// `{ "ell": int, "phi": { "num": [...], "den": [...] } }` or a preset shorthand
/// such as `{ "preset": "pseudotrig", "lambda": [re, im] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Preset(PresetSpec),
    Explicit { ell: i64, phi: PhiSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiSpec {
    pub num: Vec<Pair>,
    pub den: Vec<Pair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PresetSpec {
    Pseudotrig { lambda: Pair },
    BuffRuckert { beta: Pair },
    MeroStandard { a: Pair, alpha: f64, beta: f64 },
    SineFamily { beta: Pair },
    DoubleStandard,
    ArnoldStandard { alpha: f64, beta: f64 },
}

fn poly(c: &[Pair]) -> Polynomial {
    Polynomial::new(c.iter().copied().map(from_pair).collect())
}

fn coeffs(p: &Polynomial) -> Vec<Pair> {
    p.coeffs().iter().copied().map(pair).collect()
}

impl MapSpec {
    pub fn parse(text: &str) -> Result<Self, SyntaxError> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SyntaxError(format!("map spec: {e}")))?;
        // the untagged error hides the real cause, so dispatch by hand
        if v.get("preset").is_some() {
            serde_json::from_value(v).map(MapSpec::Preset)
        } else {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Explicit {
                ell: i64,
                phi: PhiSpec,
            }
            serde_json::from_value::<Explicit>(v).map(|e| MapSpec::Explicit {
                ell: e.ell,
                phi: e.phi,
            })
        }
        .map_err(|e| SyntaxError(format!("map spec: {e}")))
    }

    pub fn preset(&self) -> Option<Preset> {
        let MapSpec::Preset(p) = self else {
            return None;
        };
        Some(match *p {
            PresetSpec::Pseudotrig { lambda } => Preset::Pseudotrig {
                lambda: from_pair(lambda),
            },
            PresetSpec::BuffRuckert { beta } => Preset::BuffRuckert {
                beta: from_pair(beta),
            },
            PresetSpec::MeroStandard { a, alpha, beta } => Preset::MeroStandard {
                a: from_pair(a),
                alpha,
                beta,
            },
            PresetSpec::SineFamily { beta } => Preset::SineFamily {
                beta: from_pair(beta),
            },
            PresetSpec::DoubleStandard => Preset::DoubleStandard,
            PresetSpec::ArnoldStandard { alpha, beta } => Preset::ArnoldStandard { alpha, beta },
        })
    }

    pub fn build(&self) -> cyldyn_core::Result<ProjectableMap> {
        match self {
            MapSpec::Preset(_) => self.preset().expect("preset variant").build(),
            MapSpec::Explicit { ell, phi } => {
                let r = RationalMap::new(poly(&phi.num), poly(&phi.den))?;
                ProjectableMap::new(*ell, r, "custom")
            }
        }
    }

    pub fn from_map(m: &ProjectableMap) -> Self {
        MapSpec::Explicit {
            ell: m.ell(),
            phi: PhiSpec {
                num: coeffs(m.phi().num()),
                den: coeffs(m.phi().den()),
            },
        }
    }
}

/// `{ "Lambda": [re,im], "m0": int, "P": [...], "Q": [...], "Qt": [...], "allow_zero_free": bool }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSpecJson {
    #[serde(rename = "Lambda")]
    pub lambda_cap: Pair,
    pub m0: i64,
    #[serde(rename = "P")]
    pub p: Vec<Pair>,
    #[serde(rename = "Q", default)]
    pub q: Vec<Pair>,
    #[serde(rename = "Qt", default)]
    pub qt: Vec<Pair>,
    #[serde(default)]
    pub allow_zero_free: bool,
}

impl From<&NewtonSpecJson> for NewtonSpec {
    fn from(j: &NewtonSpecJson) -> Self {
        NewtonSpec {
            lambda_cap: from_pair(j.lambda_cap),
            m0: j.m0,
            p: poly(&j.p),
            q: poly(&j.q),
            qt: poly(&j.qt),
            allow_zero_free: j.allow_zero_free,
        }
    }
}

impl From<&NewtonSpec> for NewtonSpecJson {
    fn from(s: &NewtonSpec) -> Self {
        NewtonSpecJson {
            lambda_cap: pair(s.lambda_cap),
            m0: s.m0,
            p: coeffs(&s.p),
            q: coeffs(&s.q),
            qt: coeffs(&s.qt),
            allow_zero_free: s.allow_zero_free,
        }
    }
}

/// Orbit parameters; absent fields keep their defaults.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitConfigJson {
    pub max_iter: usize,
    pub escape_radius: f64,
    pub zero_radius: f64,
    pub singularity_radius: f64,
    pub cycle_tol: f64,
    pub period_cap: usize,
    pub parabolic_radius: f64,
}

impl Default for OrbitConfigJson {
    fn default() -> Self {
        OrbitConfig::default().into()
    }
}

impl From<OrbitConfig> for OrbitConfigJson {
    fn from(c: OrbitConfig) -> Self {
        OrbitConfigJson {
            max_iter: c.max_iter,
            escape_radius: c.escape_radius,
            zero_radius: c.zero_radius,
            singularity_radius: c.singularity_radius,
            cycle_tol: c.cycle_tol,
            period_cap: c.period_cap,
            parabolic_radius: c.parabolic_radius,
        }
    }
}

impl From<OrbitConfigJson> for OrbitConfig {
    fn from(c: OrbitConfigJson) -> Self {
        OrbitConfig {
            max_iter: c.max_iter,
            escape_radius: c.escape_radius,
            zero_radius: c.zero_radius,
            singularity_radius: c.singularity_radius,
            cycle_tol: c.cycle_tol,
            period_cap: c.period_cap,
            parabolic_radius: c.parabolic_radius,
        }
    }
}

/// Contents of a `--config` file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub orbit: OrbitConfigJson,
    pub palette: Palette,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, SyntaxError> {
        let c: ConfigFile =
            serde_json::from_str(text).map_err(|e| SyntaxError(format!("config: {e}")))?;
        OrbitConfig::from(c.orbit)
            .validate()
            .map_err(|e| SyntaxError(format!("config: {e}")))?;
        Ok(c)
    }
}

/// `{kind, period, rep, multiplier, iters}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub kind: String,
    pub period: Option<usize>,
    /// Cycle representative, the root reached, or the last orbit point.
    pub rep: Option<Pair>,
    pub multiplier: Option<Pair>,
    pub iters: usize,
}

impl ClassificationRecord {
    pub fn new(map: &ProjectableMap, c: &OrbitClassification) -> Self {
        use cyldyn_core::maps::End;
        let (rep, multiplier) = match c.kind {
            OrbitKind::Cycle {
                representative,
                multiplier,
                ..
            } => (representative, Some(multiplier)),
            OrbitKind::ZeroAv => (SpherePoint::ZERO, map.end_multiplier(End::Zero)),
            OrbitKind::InfinityAv => (SpherePoint::Infinity, map.end_multiplier(End::Infinity)),
            OrbitKind::FixedRoot => {
                let m = c
                    .final_point
                    .finite()
                    .and_then(|w| map.project_derivative(w).ok()?.finite());
                (c.final_point, m)
            }
            _ => (c.final_point, None),
        };
        ClassificationRecord {
            kind: c.kind.name().to_string(),
            period: c.kind.period(),
            rep: sphere_pair(rep),
            multiplier: multiplier.map(pair),
            iters: c.iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisRecord {
    pub verdict: String,
    pub sigma: Option<i64>,
    pub summary: String,
    pub rationale: String,
}

impl From<&LiftDiagnosis> for DiagnosisRecord {
    fn from(d: &LiftDiagnosis) -> Self {
        let (verdict, sigma) = match d.verdict {
            LiftVerdict::BakerInvariant => ("BakerInvariant", None),
            LiftVerdict::BakerChain => ("BakerChain", None),
            LiftVerdict::WanderingEscaping(s) => ("WanderingEscaping", Some(s)),
            LiftVerdict::PeriodicSameType => ("PeriodicSameType", None),
            LiftVerdict::Unknown => ("Unknown", None),
        };
        DiagnosisRecord {
            verdict: verdict.to_string(),
            sigma,
            summary: d.summary.clone(),
            rationale: d.rationale.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoFixedRecord {
    pub sigma: i64,
    pub point: Option<Pair>,
    pub multiplier: Pair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub zero: Pair,
    pub infinity: Pair,
    pub pseudo: Vec<PseudoFixedRecord>,
}

/// `{lambda, B, C, member, kind, period, multipliers:{zero,infinity,pseudo}, diagnosis}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub lambda: Pair,
    #[serde(rename = "B")]
    pub b: Pair,
    #[serde(rename = "C")]
    pub c: Pair,
    pub member: bool,
    pub kind: String,
    pub period: Option<usize>,
    pub iters: usize,
    pub multipliers: Multipliers,
    pub diagnosis: DiagnosisRecord,
}

impl From<&Analysis> for AnalysisRecord {
    fn from(a: &Analysis) -> Self {
        AnalysisRecord {
            lambda: pair(a.lambda),
            b: pair(a.b),
            c: pair(a.c),
            member: a.classification.member,
            kind: a.classification.kind.name().to_string(),
            period: a.classification.kind.period(),
            iters: a.classification.iterations,
            multipliers: Multipliers {
                zero: pair(a.zero_multiplier),
                infinity: pair(a.infinity_multiplier),
                pseudo: a
                    .pseudo
                    .iter()
                    .map(|p| PseudoFixedRecord {
                        sigma: p.sigma,
                        point: sphere_pair(p.point),
                        multiplier: pair(p.multiplier),
                    })
                    .collect(),
            },
            diagnosis: (&a.diagnosis).into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayRecord {
    pub component: String,
    pub theta: String,
    pub k: i64,
    /// Log-radii of the returned points, `0` at the landing point.
    pub t: Vec<f64>,
    pub points: Vec<Pair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoPointRecord {
    pub z_star: Pair,
    pub p: usize,
    pub sigma: i64,
    pub w_star: Option<Pair>,
    pub multiplier: Option<Pair>,
}

impl PseudoPointRecord {
    pub fn new(pp: &PseudoPoint, multiplier: Option<Complex64>) -> Self {
        PseudoPointRecord {
            z_star: pair(pp.z_star),
            p: pp.p,
            sigma: pp.sigma,
            w_star: sphere_pair(pp.w_star),
            multiplier: multiplier.map(pair),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationRecord {
    pub a: Pair,
    pub beta: f64,
    pub alpha: f64,
    pub rotation_number: Option<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrepoleRecord {
    pub order: usize,
    pub lambda: Pair,
    pub defect: f64,
}

/// Sidecar written next to every PNG.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderMeta {
    pub viewport: Viewport,
    pub cfg_hash: String,
    pub palette_version: u32,
    pub timing_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub error: String,
    pub message: String,
}

impl ErrorRecord {
    pub fn new(kind: &str, message: impl std::fmt::Display) -> Self {
        ErrorRecord {
            error: kind.to_string(),
            message: message.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_syntax() {
        assert_eq!(
            parse_complex("-1,-2.5").unwrap(),
            Complex64::new(-1.0, -2.5)
        );
        assert_eq!(
            parse_complex(" 0 , 3.1 ").unwrap(),
            Complex64::new(0.0, 3.1)
        );
        assert!(parse_complex("1").is_err());
        assert!(parse_complex("1,x").is_err());
        assert!(parse_complex("nan,0").is_err());
        assert!(parse_complex("1,inf").is_err());
    }

    #[test]
    fn theta_syntax() {
        assert_eq!(parse_theta("1/2").unwrap(), Theta::Rational { r: 1, p: 2 });
        assert_eq!(parse_theta("0").unwrap(), Theta::Real(0.0));
        assert!(parse_theta("2/4").is_err());
        assert!(parse_theta("3/2").is_err());
        assert!(parse_theta("1.5").is_err());
        assert_eq!(format_theta(Theta::Rational { r: 2, p: 3 }), "2/3");
    }

    #[test]
    fn golden_keyword() {
        assert_eq!(parse_target("golden").unwrap(), 0.6180339887498949);
        assert_eq!(parse_target("0.25").unwrap(), 0.25);
    }

    #[test]
    fn raw_complex() {
        assert_eq!(
            format_complex_raw(Complex64::new(-1.0, -std::f64::consts::PI)),
            "-1.000000 -3.141593i"
        );
        assert_eq!(
            format_complex_raw(Complex64::new(0.5, 0.0)),
            "0.500000 +0.000000i"
        );
        assert_eq!(
            format_complex_raw(Complex64::new(0.5, -0.0)),
            "0.500000 +0.000000i"
        );
    }

    #[test]
    fn map_spec_preset_and_explicit() {
        let m = MapSpec::parse(r#"{ "preset": "pseudotrig", "lambda": [0, -9.42477796076938] }"#)
            .unwrap();
        let map = m.build().unwrap();
        assert_eq!(map.ell(), 1);
        let e = MapSpec::from_map(&map);
        let text = serde_json::to_string(&e).unwrap();
        let back = MapSpec::parse(&text).unwrap().build().unwrap();
        for w in [Complex64::new(0.3, 0.1), Complex64::new(-2.0, 5.0)] {
            let (a, b) = (back.phi().eval(w.into()), map.phi().eval(w.into()));
            assert!(a.chordal(b) < 1e-14);
        }
        assert!(MapSpec::parse(r#"{ "preset": "nope" }"#).is_err());
        assert!(
            MapSpec::parse(r#"{ "ell": 1, "phi": { "num": [[1,0]], "den": [] } }"#)
                .unwrap()
                .build()
                .is_err()
        );
        let m = MapSpec::parse(r#"{ "preset": "double-standard" }"#).unwrap();
        assert_eq!(m.build().unwrap().ell(), 2);
    }

    #[test]
    fn newton_spec_round_trip() {
        let s = NewtonSpec::f_lambda(Complex64::new(0.3, -1.0));
        let j = NewtonSpecJson::from(&s);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"Lambda\""));
        let back: NewtonSpecJson = serde_json::from_str(&text).unwrap();
        assert_eq!(NewtonSpec::from(&back), s);
    }

    #[test]
    fn config_overrides_are_partial() {
        let c = ConfigFile::parse(r#"{ "orbit": { "max_iter": 100 } }"#).unwrap();
        let cfg = OrbitConfig::from(c.orbit);
        assert_eq!(cfg.max_iter, 100);
        assert_eq!(cfg.cycle_tol, OrbitConfig::default().cycle_tol);
        assert_eq!(c.palette, Palette::default());
        assert!(ConfigFile::parse(r#"{ "orbit": { "max_iter": 0 } }"#).is_err());
        assert!(ConfigFile::parse(r#"{ "orbitz": {} }"#).is_err());
    }
}
