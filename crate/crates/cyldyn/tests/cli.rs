use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Command, Output, Stdio};

use cyldyn::cli::RenderOutput;
use cyldyn::formats::{AnalysisRecord, ErrorRecord, PseudoPointRecord, RayRecord, RenderMeta};
use cyldyn::render::Image;

fn cyldyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyldyn"))
        .args(args)
        .env("CYLDYN_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn analyze_wandering_parameter() {
    let o = cyldyn(&["analyze", "--lambda", "-1,-2.9781808"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rec: AnalysisRecord = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rec.member);
    assert_eq!(rec.period, Some(1));
    let s1 = rec
        .multipliers
        .pseudo
        .iter()
        .find(|p| p.sigma == 1)
        .unwrap();
    assert!(s1.multiplier[0].hypot(s1.multiplier[1]) < 1e-3);
    assert_eq!(rec.diagnosis.verdict, "WanderingEscaping");
}

#[test]
fn analyze_raw() {
    let o = cyldyn(&["--raw", "analyze", "--lambda", "0,0"]);
    assert_eq!(stdout(&o).trim(), "FixedRoot period=1");
}

#[test]
fn ray_landings() {
    let o = cyldyn(&[
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
    assert_eq!(stdout(&o).trim(), "-1.000000 -3.141593i");
    let o = cyldyn(&[
        "ray",
        "--component",
        "omega-minus",
        "--theta",
        "1/2",
        "--k",
        "-1",
        "--t",
        "1",
    ]);
    let rec: RayRecord = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rec.points, vec![[-2.0, -std::f64::consts::PI]]);
}

#[test]
fn pseudo_point() {
    let o = cyldyn(&[
        "pseudo",
        "--lambda",
        "-1,-2.9781881070693568",
        "--p",
        "1",
        "--sigma",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rec: PseudoPointRecord = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rec.p, 1);
    assert_eq!(rec.sigma, 1);
    let w = rec.w_star.unwrap();
    assert!((w[0] + 37.4517).abs() < 1e-3 && w[1].abs() < 1e-6);
    assert!((rec.z_star[0] - 0.5).abs() < 1e-12);
}

#[test]
fn rotation_measure_raw() {
    let o = cyldyn(&[
        "--raw",
        "rotation",
        "measure",
        "--alpha",
        "0.25",
        "--beta",
        "0",
        "--iterations",
        "1000",
    ]);
    assert_eq!(stdout(&o).trim(), "rho=0.250000");
}

#[test]
fn rotation_tune_golden() {
    let o = cyldyn(&[
        "--raw", "rotation", "tune", "--a", "0.5,0", "--beta", "0.25", "--target", "golden",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let alpha: f64 = out.trim().strip_prefix("alpha=").unwrap().parse().unwrap();
    assert!((alpha - 0.617831).abs() <= 2e-5, "{out}");
}

#[test]
fn prepole_search_first_order() {
    let o = cyldyn(&["prepole-search", "--order", "1", "--seed", "-1,-2.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["defect"].as_f64().unwrap() < 1e-9);
}

#[test]
fn render_param_writes_png_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let png = dir.path().join("param.png");
    let o = cyldyn(&[
        "render-param",
        "--width",
        "60",
        "--height",
        "52",
        "--max-iter",
        "300",
        "--out",
        png.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out: RenderOutput = serde_json::from_str(&stdout(&o)).unwrap();
    let img = Image::from_png(&std::fs::read(&png).unwrap()).unwrap();
    assert_eq!((img.width, img.height), (60, 52));
    let side: RenderMeta =
        serde_json::from_str(&std::fs::read_to_string(&out.sidecar).unwrap()).unwrap();
    assert_eq!(side.viewport.px_width, 60);
    assert_eq!(side.viewport.center, [0.0, 0.0]);
    assert_eq!(side.cfg_hash, out.meta.cfg_hash);
}

#[test]
fn render_dyn_sources() {
    let dir = tempfile::tempdir().unwrap();
    let png = dir.path().join("dyn.png");
    let spec = dir.path().join("map.json");
    std::fs::write(
        &spec,
        r#"{"preset": "pseudotrig", "lambda": [0, -9.42477796]}"#,
    )
    .unwrap();
    let newton = dir.path().join("newton.json");
    std::fs::write(
        &newton,
        r#"{"Lambda": [0, -12.566370614359172], "m0": 0, "P": [[-1, 0], [1, 0]], "Q": [], "Qt": []}"#,
    )
    .unwrap();
    let common = [
        "--width",
        "40",
        "--height",
        "30",
        "--max-iter",
        "300",
        "--out",
    ];
    let mut images = Vec::new();
    for src in [
        vec!["--lambda", "0,-9.42477796"],
        vec!["--map", spec.to_str().unwrap()],
        vec!["--newton", newton.to_str().unwrap()],
    ] {
        let mut args = vec!["render-dyn"];
        args.extend(common);
        args.push(png.to_str().unwrap());
        args.extend(src);
        let o = cyldyn(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        images.push(std::fs::read(&png).unwrap());
    }
    assert_eq!(images[0], images[1]);
    assert_eq!(images[0], images[2]);

    let o = cyldyn(&[
        "render-dyn",
        "--out",
        png.to_str().unwrap(),
        "--lambda",
        "0,0",
        "--map",
        spec.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"orbit": {"max_iter": 100}, "palette": {"root": [1, 2, 3]}}"#,
    )
    .unwrap();
    let png = dir.path().join("p.png");
    let o = cyldyn(&[
        "--config",
        cfg.to_str().unwrap(),
        "render-param",
        "--width",
        "8",
        "--height",
        "8",
        "--center",
        "0,0",
        "--half-width",
        "0.01",
        "--half-height",
        "0.01",
        "--out",
        png.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let img = Image::from_png(&std::fs::read(&png).unwrap()).unwrap();
    assert_eq!(img.get(4, 4), [1, 2, 3]);

    std::fs::write(&cfg, r#"{"orbit": {"max_iterations": 1}}"#).unwrap();
    let o = cyldyn(&[
        "--config",
        cfg.to_str().unwrap(),
        "analyze",
        "--lambda",
        "0,0",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2_with_one_line() {
    for args in [
        vec!["analyze", "--lambda", "1;2"],
        vec!["analyze"],
        vec!["ray", "--component", "omega-minus", "--theta", "3/2"],
        vec!["ray", "--component", "omega-minus", "--t", "0.5"],
        vec!["render-param", "--width", "20000", "--out", "/tmp/x.png"],
        vec!["rotation", "tune", "--beta", "0.25", "--target", "silver"],
        vec!["bogus"],
    ] {
        let o = cyldyn(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert_eq!(
            stderr(&o).trim().lines().count(),
            1,
            "{args:?}: {}",
            stderr(&o)
        );
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn computation_failures_exit_3_with_json() {
    for (args, kind) in [
        (
            vec!["analyze", "--lambda", "0,3.14159265"],
            "ParamSingularity",
        ),
        (
            vec![
                "ray",
                "--component",
                "omega-minus",
                "--theta",
                "0",
                "--k",
                "0",
            ],
            "DegenerateRay",
        ),
    ] {
        let o = cyldyn(&args);
        assert_eq!(o.status.code(), Some(3), "{args:?}");
        let rec: ErrorRecord = serde_json::from_str(stderr(&o).trim()).unwrap();
        assert_eq!(rec.error, kind);
    }
}

#[test]
fn invalid_thread_count_is_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_cyldyn"))
        .args(["analyze", "--lambda", "0,0"])
        .env("CYLDYN_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn serve_answers_http() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cyldyn"))
        .args(["serve", "--port", "0"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line.trim().rsplit("http://").next().unwrap().to_string();
    let mut s = TcpStream::connect(&addr).unwrap();
    write!(
        s,
        "GET /healthz HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut resp = String::new();
    s.read_to_string(&mut resp).unwrap();
    child.kill().unwrap();
    let _ = child.wait();
    assert!(resp.starts_with("HTTP/1.1 200"), "{resp}");
    assert!(resp.ends_with("ok"), "{resp}");
}
