//! HTTP tile and analysis service.
//!
//! Tiles are 256×256 regions of a virtual image of the plane's root window at
//! `256·2^z` pixels per side, so every zoom level uses the same pixel centers
//! as a direct render of that virtual image.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use cyldyn_core::orbit::OrbitConfig;
use cyldyn_core::param::{analyze, internal_ray_point, RayQuery};
use cyldyn_core::{Complex64, Error};
use lru::LruCache;
use serde::{Deserialize, Serialize};
use tokio::sync::{OnceCell, Semaphore};
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use crate::formats::{
    checked_lambda, format_theta, pair, parse_complex, parse_component, parse_theta,
    AnalysisRecord, ErrorRecord, RayRecord,
};
use crate::render::{cfg_hash, render_region, Palette, Region, Scene, Viewport};

pub const TILE_PX: u32 = 256;
pub const MAX_ZOOM: u32 = 32;
pub const DEFAULT_CACHE_BYTES: usize = 512 << 20;

/// `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub const PARAM: Window = Window {
        x0: -3.75,
        x1: 3.75,
        y0: -3.25,
        y1: 3.25,
    };
    pub const DYN: Window = Window {
        x0: -1.5,
        x1: 1.5,
        y0: -1.15,
        y1: 0.85,
    };
    /// The `μ`-chart: `Ω⁻` fills the unit disk.
    pub const MU: Window = Window {
        x0: -2.0,
        x1: 2.0,
        y0: -2.0,
        y1: 2.0,
    };
}

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub orbit: OrbitConfig,
    pub palette: Palette,
    pub cache_bytes: usize,
    /// Tile and analysis computations allowed at once; more get 503.
    pub queue_capacity: usize,
    pub param_root: Window,
    pub dyn_root: Window,
    pub mu_root: Window,
    pub static_dir: Option<PathBuf>,
    /// `None` allows any origin.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            orbit: OrbitConfig::default(),
            palette: Palette::default(),
            cache_bytes: DEFAULT_CACHE_BYTES,
            queue_capacity: 4 * rayon::current_num_threads(),
            param_root: Window::PARAM,
            dyn_root: Window::DYN,
            mu_root: Window::MU,
            static_dir: None,
            cors_origin: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TilePlane {
    Param,
    Mu,
    Dyn,
}

impl TilePlane {
    fn name(self) -> &'static str {
        match self {
            TilePlane::Param => "param",
            TilePlane::Mu => "mu",
            TilePlane::Dyn => "dyn",
        }
    }
}

/// Cache key; `λ` is compared bitwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TileKey {
    pub plane: TilePlane,
    pub z: u32,
    pub x: u64,
    pub y: u64,
    pub lambda: Option<[u64; 2]>,
}

impl TileKey {
    fn lambda(&self) -> Option<Complex64> {
        self.lambda
            .map(|[a, b]| Complex64::new(f64::from_bits(a), f64::from_bits(b)))
    }

    fn label(&self) -> String {
        let mut s = format!("{}/{}/{}/{}", self.plane.name(), self.z, self.x, self.y);
        if let Some(l) = self.lambda() {
            s.push_str(&format!("@{:?},{:?}", l.re, l.im));
        }
        s
    }
}

/// Byte-bounded LRU of encoded tiles.
struct TileCache {
    lru: LruCache<TileKey, Arc<Vec<u8>>>,
    bytes: usize,
    cap: usize,
}

impl TileCache {
    fn get(&mut self, k: &TileKey) -> Option<Arc<Vec<u8>>> {
        self.lru.get(k).cloned()
    }

    fn insert(&mut self, k: TileKey, v: Arc<Vec<u8>>) {
        if v.len() > self.cap {
            return;
        }
        if let Some(old) = self.lru.put(k, v.clone()) {
            self.bytes -= old.len();
        }
        self.bytes += v.len();
        while self.bytes > self.cap {
            let Some((_, old)) = self.lru.pop_lru() else {
                break;
            };
            self.bytes -= old.len();
        }
    }
}

type Inflight = Arc<OnceCell<Result<Arc<Vec<u8>>, String>>>;

pub struct AppState {
    cfg: ServiceConfig,
    hash: String,
    cache: Mutex<TileCache>,
    inflight: Mutex<HashMap<TileKey, Inflight>>,
    permits: Arc<Semaphore>,
    renders: AtomicU64,
}

/// Counters exposed at `/api/stats`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub cfg_hash: String,
    pub renders: u64,
    pub cache_entries: usize,
    pub cache_bytes: usize,
    pub in_flight: usize,
    pub queue_capacity: usize,
}

impl AppState {
    pub fn new(cfg: ServiceConfig) -> Arc<Self> {
        let hash = cfg_hash(&cfg.orbit, &cfg.palette);
        Arc::new(AppState {
            hash,
            cache: Mutex::new(TileCache {
                lru: LruCache::unbounded(),
                bytes: 0,
                cap: cfg.cache_bytes,
            }),
            inflight: Mutex::new(HashMap::new()),
            permits: Arc::new(Semaphore::new(cfg.queue_capacity)),
            renders: AtomicU64::new(0),
            cfg,
        })
    }

    pub fn cfg_hash(&self) -> &str {
        &self.hash
    }

    pub fn stats(&self) -> Stats {
        let cache = self.cache.lock().unwrap();
        Stats {
            cfg_hash: self.hash.clone(),
            renders: self.renders.load(Ordering::SeqCst),
            cache_entries: cache.lru.len(),
            cache_bytes: cache.bytes,
            in_flight: self.cfg.queue_capacity - self.permits.available_permits(),
            queue_capacity: self.cfg.queue_capacity,
        }
    }

    /// Encoded PNG for `key`, rendered on a blocking thread.
    pub fn render_tile(&self, key: &TileKey) -> Result<Vec<u8>, String> {
        let root = match key.plane {
            TilePlane::Param => self.cfg.param_root,
            TilePlane::Mu => self.cfg.mu_root,
            TilePlane::Dyn => self.cfg.dyn_root,
        };
        let side = (TILE_PX as u64) << key.z;
        let v = Viewport::virtual_window(root.x0, root.x1, root.y0, root.y1, side, side)
            .map_err(|e| e.to_string())?;
        let region = Region {
            x0: key.x * TILE_PX as u64,
            y0: key.y * TILE_PX as u64,
            width: TILE_PX,
            height: TILE_PX,
        };
        let built;
        let scene = match key.plane {
            TilePlane::Param => Scene::Parameter { mu: false },
            TilePlane::Mu => Scene::Parameter { mu: true },
            TilePlane::Dyn => {
                let lambda = key.lambda().ok_or("dyn tiles need lambda")?;
                built = cyldyn_core::param::pseudotrig(lambda)
                    .map_err(|e| e.to_string())?
                    .1;
                Scene::Dynamical {
                    map: &built,
                    plane: crate::render::DynPlane::Z,
                    markers: Vec::new(),
                }
            }
        };
        self.renders.fetch_add(1, Ordering::SeqCst);
        let img = render_region(&scene, &v, region, &self.cfg.orbit, &self.cfg.palette)
            .map_err(|e| e.to_string())?;
        Ok(img.to_png())
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = match &state.cfg.cors_origin {
        Some(o) => match HeaderValue::from_str(o) {
            Ok(v) => CorsLayer::new().allow_origin(AllowOrigin::exact(v)),
            Err(_) => CorsLayer::new(),
        },
        None => CorsLayer::new().allow_origin(AllowOrigin::any()),
    }
    .expose_headers([header::ETAG]);

    let api = Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/api/tile/{plane}/{z}/{x}/{y}", get(tile))
        .route("/api/analyze", get(analyze_handler))
        .route("/api/ray", get(ray_handler))
        .route("/api/stats", get(stats_handler));
    let app = match &state.cfg.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir).fallback(get(not_found))),
        None => api.fallback(not_found),
    };
    app.layer(cors).with_state(state)
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(cfg: ServiceConfig, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(cfg)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn error(status: StatusCode, kind: &str, message: impl std::fmt::Display) -> Response {
    (status, Json(ErrorRecord::new(kind, message))).into_response()
}

async fn not_found() -> Response {
    error(StatusCode::NOT_FOUND, "NotFound", "no such route")
}

fn busy() -> Response {
    let mut r = error(
        StatusCode::SERVICE_UNAVAILABLE,
        "Busy",
        "work queue is full",
    );
    r.headers_mut()
        .insert(header::RETRY_AFTER, HeaderValue::from_static("1"));
    r
}

fn bad(message: impl std::fmt::Display) -> Response {
    error(StatusCode::BAD_REQUEST, "BadRequest", message)
}

fn domain(e: &Error) -> Response {
    error(StatusCode::UNPROCESSABLE_ENTITY, e.kind(), e)
}

#[allow(clippy::result_large_err)]
fn parse_lambda(raw: Option<&String>) -> Result<Complex64, Response> {
    let raw = raw.ok_or_else(|| bad("missing `lambda=re,im`"))?;
    let l = parse_complex(raw).map_err(bad)?;
    checked_lambda(l).map_err(|e| domain(&e))
}

fn with_etag(mut r: Response, etag: &str) -> Response {
    if let Ok(v) = HeaderValue::from_str(etag) {
        r.headers_mut().insert(header::ETAG, v);
    }
    r
}

fn not_modified(headers: &HeaderMap, etag: &str) -> bool {
    headers
        .get(header::IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(',').any(|t| t.trim() == etag || t.trim() == "*"))
}

async fn tile(
    State(st): State<Arc<AppState>>,
    Path((plane, z, x, y)): Path<(String, String, String, String)>,
    Query(q): Query<HashMap<String, String>>,
    headers: HeaderMap,
) -> Response {
    let plane = match plane.as_str() {
        "param" => TilePlane::Param,
        "mu" => TilePlane::Mu,
        "dyn" => TilePlane::Dyn,
        _ => return not_found().await,
    };
    let y = y.strip_suffix(".png").unwrap_or(&y);
    let (Ok(z), Ok(x), Ok(y)) = (z.parse::<u32>(), x.parse::<u64>(), y.parse::<u64>()) else {
        return bad("tile coordinates must be non-negative integers");
    };
    if z > MAX_ZOOM {
        return bad(format!("zoom above {MAX_ZOOM}"));
    }
    if x >= 1u64 << z || y >= 1u64 << z {
        return bad(format!("x and y must be below 2^{z}"));
    }
    let lambda = if plane == TilePlane::Dyn {
        match parse_lambda(q.get("lambda")) {
            Ok(l) => Some([l.re.to_bits(), l.im.to_bits()]),
            Err(r) => return r,
        }
    } else {
        None
    };
    let key = TileKey {
        plane,
        z,
        x,
        y,
        lambda,
    };
    let etag = format!("\"{}:{}\"", st.hash, key.label());
    if not_modified(&headers, &etag) {
        return with_etag(StatusCode::NOT_MODIFIED.into_response(), &etag);
    }

    let cached = st.cache.lock().unwrap().get(&key);
    let bytes = match cached {
        Some(b) => b,
        None => match fetch(&st, key).await {
            Ok(b) => b,
            Err(r) => return r,
        },
    };
    let mut r = (
        StatusCode::OK,
        [(header::CONTENT_TYPE, "image/png")],
        bytes.as_ref().clone(),
    )
        .into_response();
    r.headers_mut().insert(
        header::CACHE_CONTROL,
        HeaderValue::from_static("public, max-age=86400"),
    );
    with_etag(r, &etag)
}

/// Joins an in-flight render of `key` or starts one; only starters need a permit.
async fn fetch(st: &Arc<AppState>, key: TileKey) -> Result<Arc<Vec<u8>>, Response> {
    let (cell, permit) = {
        let mut m = st.inflight.lock().unwrap();
        match m.get(&key) {
            Some(c) => (c.clone(), None),
            None => {
                let Ok(p) = st.permits.clone().try_acquire_owned() else {
                    return Err(busy());
                };
                let c: Inflight = Arc::new(OnceCell::new());
                m.insert(key, c.clone());
                (c, Some(p))
            }
        }
    };
    let worker = st.clone();
    let result = cell
        .get_or_init(|| async move {
            let st = worker.clone();
            let out = tokio::task::spawn_blocking(move || st.render_tile(&key))
                .await
                .map_err(|e| e.to_string())
                .and_then(|r| r)
                .map(Arc::new);
            if let Ok(b) = &out {
                worker.cache.lock().unwrap().insert(key, b.clone());
            }
            worker.inflight.lock().unwrap().remove(&key);
            out
        })
        .await
        .clone();
    drop(permit);
    result.map_err(|m| error(StatusCode::INTERNAL_SERVER_ERROR, "RenderFailed", m))
}

async fn analyze_handler(
    State(st): State<Arc<AppState>>,
    Query(q): Query<HashMap<String, String>>,
    headers: HeaderMap,
) -> Response {
    let lambda = match parse_lambda(q.get("lambda")) {
        Ok(l) => l,
        Err(r) => return r,
    };
    let etag = format!("\"{}:analyze@{:?},{:?}\"", st.hash, lambda.re, lambda.im);
    if not_modified(&headers, &etag) {
        return with_etag(StatusCode::NOT_MODIFIED.into_response(), &etag);
    }
    let Ok(permit) = st.permits.clone().try_acquire_owned() else {
        return busy();
    };
    let cfg = st.cfg.orbit;
    let started = Instant::now();
    let out = tokio::task::spawn_blocking(move || analyze(lambda, &cfg)).await;
    drop(permit);
    let r = match out {
        Ok(Ok(a)) => Json(AnalysisRecord::from(&a)).into_response(),
        Ok(Err(e)) => return domain(&e),
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, "AnalysisFailed", e),
    };
    let mut r = with_etag(r, &etag);
    if let Ok(v) = HeaderValue::from_str(&format!("{:.3}", started.elapsed().as_secs_f64() * 1e3)) {
        r.headers_mut().insert("x-timing-ms", v);
    }
    r
}

#[derive(Debug, Deserialize)]
struct RayParams {
    component: Option<String>,
    theta: Option<String>,
    k: Option<String>,
    t: Option<String>,
    sign: Option<String>,
    samples: Option<String>,
}

/// `t` values of a sampled ray: `log(j/n)` for `j = 1..=n`, ending at the landing point.
pub fn ray_samples(n: usize) -> Vec<f64> {
    (1..=n).map(|j| (j as f64 / n as f64).ln()).collect()
}

/// Points of one internal ray; `samples` overrides `t`.
pub fn ray_record(
    component: &str,
    theta: &str,
    k: i64,
    sign: i8,
    t: f64,
    samples: Option<usize>,
) -> Result<RayRecord, RayError> {
    let comp = parse_component(component, sign, k).map_err(|e| RayError::Syntax(e.0))?;
    let th = parse_theta(theta).map_err(|e| RayError::Syntax(e.0))?;
    if !(t <= 0.0 || t == 1.0) {
        return Err(RayError::Syntax(
            "t must be ≤ 0, or 1 for the landing point".into(),
        ));
    }
    let ts = match samples {
        Some(n) if (2..=4096).contains(&n) => ray_samples(n),
        Some(_) => return Err(RayError::Syntax("samples must be in 2..=4096".into())),
        None => vec![t],
    };
    let points = ts
        .iter()
        .map(|&t| {
            internal_ray_point(&RayQuery {
                component: comp,
                theta: th,
                k,
                t,
            })
            .map(pair)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(RayError::Domain)?;
    let t_out = ts.iter().map(|&t| if t == 1.0 { 0.0 } else { t }).collect();
    Ok(RayRecord {
        component: component.to_string(),
        theta: format_theta(th),
        k,
        t: t_out,
        points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum RayError {
    Syntax(String),
    Domain(Error),
}

#[allow(clippy::result_large_err)]
async fn ray_handler(Query(p): Query<RayParams>) -> Response {
    fn num<T: std::str::FromStr>(
        v: &Option<String>,
        name: &str,
        default: T,
    ) -> Result<T, Response> {
        match v {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| bad(format!("`{name}` is malformed"))),
        }
    }
    let parsed = (|| {
        let component = p
            .component
            .clone()
            .ok_or_else(|| bad("missing `component`"))?;
        let theta = p.theta.clone().unwrap_or_else(|| "0".into());
        let k: i64 = num(&p.k, "k", 0)?;
        let t: f64 = num(&p.t, "t", 1.0)?;
        let sign: i8 = num(&p.sign, "sign", 1)?;
        let samples: Option<usize> = match &p.samples {
            None => None,
            Some(_) => Some(num(&p.samples, "samples", 0)?),
        };
        Ok::<_, Response>((component, theta, k, t, sign, samples))
    })();
    let (component, theta, k, t, sign, samples) = match parsed {
        Ok(v) => v,
        Err(r) => return r,
    };
    match ray_record(&component, &theta, k, sign, t, samples) {
        Ok(r) => Json(r).into_response(),
        Err(RayError::Syntax(m)) => bad(m),
        Err(RayError::Domain(e)) => domain(&e),
    }
}

async fn stats_handler(State(st): State<Arc<AppState>>) -> Json<Stats> {
    Json(st.stats())
}
