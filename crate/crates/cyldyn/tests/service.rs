use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use cyldyn::formats::{AnalysisRecord, ErrorRecord, RayRecord};
use cyldyn::render::{render_parameter, Image, Palette, Viewport};
use cyldyn::service::{router, AppState, ServiceConfig, Stats, Window};
use cyldyn_core::orbit::OrbitConfig;
use http_body_util::BodyExt;
use tower::ServiceExt;

fn config() -> ServiceConfig {
    ServiceConfig {
        orbit: OrbitConfig {
            max_iter: 300,
            ..Default::default()
        },
        queue_capacity: 8,
        ..Default::default()
    }
}

fn start(cfg: ServiceConfig) -> (Arc<AppState>, Router) {
    let st = AppState::new(cfg);
    (st.clone(), router(st))
}

struct Reply {
    status: StatusCode,
    headers: axum::http::HeaderMap,
    body: Vec<u8>,
}

impl Reply {
    fn json<T: serde::de::DeserializeOwned>(&self) -> T {
        serde_json::from_slice(&self.body).expect("json body")
    }

    fn header(&self, name: header::HeaderName) -> Option<&str> {
        self.headers.get(name).and_then(|v| v.to_str().ok())
    }
}

async fn send(app: &Router, req: Request<Body>) -> Reply {
    let r = app.clone().oneshot(req).await.unwrap();
    let status = r.status();
    let headers = r.headers().clone();
    let body = r.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply {
        status,
        headers,
        body,
    }
}

async fn get(app: &Router, uri: &str) -> Reply {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

#[tokio::test]
async fn healthz() {
    let (_, app) = start(config());
    let r = get(&app, "/healthz").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body, b"ok");
}

#[tokio::test]
async fn analyze_non_member() {
    let (_, app) = start(config());
    let r = get(&app, "/api/analyze?lambda=0,0").await;
    assert_eq!(r.status, StatusCode::OK);
    let v: serde_json::Value = r.json();
    assert_eq!(v["member"], false);
    let rec: AnalysisRecord = r.json();
    assert_eq!(rec.kind, "FixedRoot");
    assert!(r.header(header::ETAG).is_some());
    assert!(r.headers.contains_key("x-timing-ms"));
}

#[tokio::test]
async fn analyze_wandering_parameter() {
    let (_, app) = start(config());
    let r = get(&app, "/api/analyze?lambda=-1,-2.978180795").await;
    let rec: AnalysisRecord = r.json();
    assert!(rec.member);
    assert_eq!(rec.period, Some(1));
    assert_eq!(rec.diagnosis.summary, "wandering (σ=1)");
}

#[tokio::test]
async fn excluded_parameter_is_422() {
    let (_, app) = start(config());
    for uri in [
        "/api/analyze?lambda=0,3.14159265",
        "/api/analyze?lambda=0,-3.14159265",
        "/api/tile/dyn/0/0/0?lambda=0,3.14159265",
    ] {
        let r = get(&app, uri).await;
        assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY, "{uri}");
        let e: ErrorRecord = r.json();
        assert_eq!(e.error, "ParamSingularity");
    }
}

#[tokio::test]
async fn malformed_requests_are_400() {
    let (_, app) = start(config());
    for uri in [
        "/api/analyze",
        "/api/analyze?lambda=abc",
        "/api/tile/param/0/1/0",
        "/api/tile/param/1/0/x",
        "/api/tile/param/99/0/0",
        "/api/tile/dyn/0/0/0",
        "/api/ray?component=omega-minus&theta=2/1",
        "/api/ray?component=sideways",
    ] {
        let r = get(&app, uri).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST, "{uri}");
        let e: ErrorRecord = r.json();
        assert_eq!(e.error, "BadRequest", "{uri}");
    }
}

#[tokio::test]
async fn unknown_routes_are_404() {
    let (_, app) = start(config());
    for uri in ["/nope", "/api/tile/sky/0/0/0", "/api"] {
        let r = get(&app, uri).await;
        assert_eq!(r.status, StatusCode::NOT_FOUND, "{uri}");
        let _: ErrorRecord = r.json();
    }
}

#[tokio::test]
async fn root_tile_equals_direct_render() {
    let cfg = config();
    let (orbit, pal) = (cfg.orbit, cfg.palette.clone());
    let (_, app) = start(cfg);
    let r = get(&app, "/api/tile/param/0/0/0.png").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.header(header::CONTENT_TYPE), Some("image/png"));
    let w = Window::PARAM;
    let v = Viewport::from_bounds(w.x0, w.x1, w.y0, w.y1, 256, 256).unwrap();
    let direct = render_parameter(&v, &orbit, &pal, false).unwrap();
    assert_eq!(r.body, direct.to_png());
}

#[tokio::test]
async fn tiles_stitch_to_the_next_zoom_level() {
    let cfg = config();
    let (orbit, pal) = (cfg.orbit, cfg.palette.clone());
    let (_, app) = start(cfg);
    let w = Window::PARAM;
    let v = Viewport::from_bounds(w.x0, w.x1, w.y0, w.y1, 512, 512).unwrap();
    let direct = render_parameter(&v, &orbit, &pal, false).unwrap();
    let mut stitched = Image::new(512, 512);
    for y in 0..2 {
        for x in 0..2 {
            let r = get(&app, &format!("/api/tile/param/1/{x}/{y}")).await;
            let img = Image::from_png(&r.body).unwrap();
            assert_eq!((img.width, img.height), (256, 256));
            stitched.blit(&img, x * 256, y * 256);
        }
    }
    assert_eq!(stitched, direct);
}

#[tokio::test]
async fn etag_and_not_modified() {
    let (st, app) = start(config());
    let r = get(&app, "/api/tile/mu/0/0/0").await;
    let etag = r.header(header::ETAG).unwrap().to_string();
    assert_eq!(etag, format!("\"{}:mu/0/0/0\"", st.cfg_hash()));
    assert!(r.header(header::CACHE_CONTROL).is_some());
    let req = Request::get("/api/tile/mu/0/0/0")
        .header(header::IF_NONE_MATCH, &etag)
        .body(Body::empty())
        .unwrap();
    let again = send(&app, req).await;
    assert_eq!(again.status, StatusCode::NOT_MODIFIED);
    assert!(again.body.is_empty());
    assert_eq!(again.header(header::ETAG), Some(etag.as_str()));
}

#[tokio::test]
async fn etag_is_deterministic_across_instances() {
    let (_, a) = start(config());
    let (_, b) = start(config());
    let uri = "/api/tile/dyn/1/1/0?lambda=-1,-2.978180795";
    let (ra, rb) = (get(&a, uri).await, get(&b, uri).await);
    assert_eq!(ra.header(header::ETAG), rb.header(header::ETAG));
    assert_eq!(ra.body, rb.body);
    let other = get(&a, "/api/tile/dyn/1/1/0?lambda=-1,-2.9").await;
    assert_ne!(ra.header(header::ETAG), other.header(header::ETAG));
}

#[tokio::test]
async fn cache_is_transparent() {
    let (st, app) = start(config());
    let uri = "/api/tile/dyn/1/0/1?lambda=0,0";
    let cold = get(&app, uri).await;
    let warm = get(&app, uri).await;
    assert_eq!(cold.status, StatusCode::OK);
    assert_eq!(cold.body, warm.body);
    assert_eq!(st.stats().renders, 1);
    assert_eq!(st.stats().cache_entries, 1);

    let (st0, uncached) = start(ServiceConfig {
        cache_bytes: 0,
        ..config()
    });
    let a = get(&uncached, uri).await;
    let b = get(&uncached, uri).await;
    assert_eq!(a.body, cold.body);
    assert_eq!(b.body, cold.body);
    assert_eq!(st0.stats().renders, 2);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_coalesce() {
    let (st, app) = start(ServiceConfig {
        queue_capacity: 1,
        ..config()
    });
    let uri = "/api/tile/param/2/1/3";
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let app = app.clone();
            tokio::spawn(async move { get(&app, uri).await })
        })
        .collect();
    let mut bodies = Vec::new();
    for h in handles {
        let r = h.await.unwrap();
        assert_eq!(r.status, StatusCode::OK);
        bodies.push(r.body);
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
    let s = st.stats();
    assert_eq!(s.renders, 1);
    assert_eq!(s.in_flight, 0);
}

#[tokio::test]
async fn full_queue_is_503() {
    let (_, app) = start(ServiceConfig {
        queue_capacity: 0,
        ..config()
    });
    for uri in ["/api/tile/param/0/0/0", "/api/analyze?lambda=0,0"] {
        let r = get(&app, uri).await;
        assert_eq!(r.status, StatusCode::SERVICE_UNAVAILABLE, "{uri}");
        assert_eq!(r.header(header::RETRY_AFTER), Some("1"));
        let e: ErrorRecord = r.json();
        assert_eq!(e.error, "Busy");
    }
    assert_eq!(get(&app, "/healthz").await.status, StatusCode::OK);
}

#[tokio::test]
async fn ray_mirrors_cli() {
    let (_, app) = start(config());
    let r = get(&app, "/api/ray?component=omega-minus&theta=1/2&k=-1&t=1").await;
    assert_eq!(r.status, StatusCode::OK);
    let rec: RayRecord = r.json();
    assert_eq!(rec.points.len(), 1);
    let [re, im] = rec.points[0];
    assert!((re + 2.0).abs() < 1e-12 && (im + std::f64::consts::PI).abs() < 1e-12);

    let r = get(
        &app,
        "/api/ray?component=omega-minus&theta=0&k=-1&samples=64",
    )
    .await;
    let rec: RayRecord = r.json();
    assert_eq!(rec.points.len(), 64);
    let [re, im] = *rec.points.last().unwrap();
    assert!((re + 1.0).abs() < 1e-12 && (im + std::f64::consts::PI).abs() < 1e-12);
    assert!(rec.t.windows(2).all(|w| w[0] < w[1]));
}

#[tokio::test]
async fn stats_report_config_hash() {
    let (st, app) = start(config());
    let s: Stats = get(&app, "/api/stats").await.json();
    assert_eq!(s.cfg_hash, st.cfg_hash());
    assert_eq!(s.queue_capacity, 8);
}

#[tokio::test]
async fn cors_headers() {
    let (_, app) = start(config());
    let req = Request::get("/healthz")
        .header(header::ORIGIN, "http://example.test")
        .body(Body::empty())
        .unwrap();
    let r = send(&app, req).await;
    assert_eq!(r.header(header::ACCESS_CONTROL_ALLOW_ORIGIN), Some("*"));

    let (_, strict) = start(ServiceConfig {
        cors_origin: Some("http://ui.test".into()),
        ..config()
    });
    let ok = Request::get("/healthz")
        .header(header::ORIGIN, "http://ui.test")
        .body(Body::empty())
        .unwrap();
    let r = send(&strict, ok).await;
    assert_eq!(
        r.header(header::ACCESS_CONTROL_ALLOW_ORIGIN),
        Some("http://ui.test")
    );
    let other = Request::get("/healthz")
        .header(header::ORIGIN, "http://elsewhere.test")
        .body(Body::empty())
        .unwrap();
    let r = send(&strict, other).await;
    assert_ne!(
        r.header(header::ACCESS_CONTROL_ALLOW_ORIGIN),
        Some("http://elsewhere.test")
    );
}

#[tokio::test]
async fn static_files_are_served() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>explorer</html>").unwrap();
    let (_, app) = start(ServiceConfig {
        static_dir: Some(dir.path().to_path_buf()),
        ..config()
    });
    let r = get(&app, "/").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body, b"<html>explorer</html>");
    assert_eq!(get(&app, "/missing.js").await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/healthz").await.status, StatusCode::OK);
}

#[test]
fn palette_default_is_hashed() {
    let a = AppState::new(config());
    let b = AppState::new(ServiceConfig {
        palette: Palette {
            brightness_min: 0.5,
            ..Default::default()
        },
        ..config()
    });
    assert_ne!(a.cfg_hash(), b.cfg_hash());
}
