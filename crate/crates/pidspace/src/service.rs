//! Read-only HTTP API over a loaded project.
//!
//! - `GET /api/project`
//! - `GET /api/region` with optional override query parameters
//! - `POST /api/region` with a JSON body of overrides
//! - `GET /api/analyze?kp=&ki=&kd=`
//! - `GET /api/simulate?kp=&ki=&kd=&ref=step|ramp&n=&force=`
//!
//! Errors come back as `{"error": kind, "message": text}` with 400 for bad
//! input, 409 for violated preconditions and 500 for numerical failures.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use serde::Serialize;
use tokio::sync::{OnceCell, Semaphore};
use tower_http::services::ServeDir;

use crate::error::{AppError, AppResult};
use crate::project::{Overrides, Project, ProjectConfig, Reference};
use crate::schema::{self, TfDoc, SCHEMA_VERSION};

/// Default simulation length for `/api/simulate`.
pub const DEFAULT_SIM_STEPS: usize = 500;
pub const MAX_SIM_STEPS: usize = 1_000_000;

#[derive(Debug)]
pub struct ApiError(pub AppError);

impl From<AppError> for ApiError {
    fn from(e: AppError) -> Self {
        ApiError(e)
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind, message) = match self.0 {
            AppError::Config(m) => (StatusCode::BAD_REQUEST, "config", m),
            AppError::Precondition(m) => (StatusCode::CONFLICT, "precondition", m),
            AppError::Numerics(m) => (StatusCode::INTERNAL_SERVER_ERROR, "numerics", m),
            AppError::Io(m) => (StatusCode::INTERNAL_SERVER_ERROR, "io", m),
        };
        (status, json_body(schema::to_json(&ErrorBody { error: kind, message }))).into_response()
    }
}

fn json_body(s: String) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], s)
}

#[derive(Serialize)]
struct ProjectDoc<'a> {
    version: u32,
    config: &'a ProjectConfig,
    sample_time: f64,
    /// Discretized plants, nominal first.
    plants: Vec<TfDoc>,
}

/// Shared immutable state. The default region map is computed once.
pub struct AppState {
    project: Project,
    project_json: String,
    region: OnceCell<String>,
    workers: Semaphore,
}

impl AppState {
    /// `workers` bounds concurrent computations.
    pub fn new(project: Project, workers: usize) -> Self {
        let doc = ProjectDoc {
            version: SCHEMA_VERSION,
            config: &project.config,
            sample_time: project.sample_time,
            plants: project.plants.iter().map(TfDoc::from_tf).collect(),
        };
        let project_json = schema::to_json(&doc);
        Self {
            project,
            project_json,
            region: OnceCell::new(),
            workers: Semaphore::new(workers.max(1)),
        }
    }

    async fn compute<T, F>(self: &Arc<Self>, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&Project) -> AppResult<T> + Send + 'static,
    {
        let _permit = self
            .workers
            .acquire()
            .await
            .map_err(|_| AppError::Io("service is shutting down".into()))?;
        let state = Arc::clone(self);
        tokio::task::spawn_blocking(move || f(&state.project))
            .await
            .map_err(|e| AppError::Numerics(format!("worker failed: {e}")))?
            .map_err(ApiError)
    }

    async fn region_json(self: &Arc<Self>, o: Overrides) -> Result<String, ApiError> {
        let empty = o.is_empty();
        let build = move |p: &Project| {
            let map = if o.is_empty() { p.region_map()? } else { p.with_overrides(&o)?.region_map()? };
            Ok(schema::to_json(&schema::RegionMapDoc::from_map(&map)))
        };
        if !empty {
            return self.compute(build).await;
        }
        // Only successes are cached.
        let s = self.region.get_or_try_init(|| self.compute(build)).await?;
        Ok(s.clone())
    }
}

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/project", get(project))
        .route("/api/region", get(region_get).post(region_post))
        .route("/api/analyze", get(analyze))
        .route("/api/simulate", get(simulate))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(state: Arc<AppState>, addr: SocketAddr, static_dir: Option<PathBuf>) -> AppResult<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

type Params = Query<HashMap<String, String>>;

fn check_keys(q: &HashMap<String, String>, allowed: &[&str]) -> AppResult<()> {
    let mut keys: Vec<&String> = q.keys().filter(|k| !allowed.contains(&k.as_str())).collect();
    keys.sort();
    match keys.first() {
        Some(k) => Err(AppError::Config(format!("unknown query parameter {k:?}"))),
        None => Ok(()),
    }
}

fn number(q: &HashMap<String, String>, key: &str) -> AppResult<Option<f64>> {
    q.get(key)
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| AppError::Config(format!("{key}: expected a finite number, got {v:?}")))
        })
        .transpose()
}

/// `null` or an empty value clears the constraint.
fn nullable(q: &HashMap<String, String>, key: &str) -> AppResult<Option<Option<f64>>> {
    match q.get(key).map(|v| v.trim()) {
        None => Ok(None),
        Some("" | "null" | "none") => Ok(Some(None)),
        Some(_) => Ok(Some(number(q, key)?)),
    }
}

fn range(q: &HashMap<String, String>, key: &str) -> AppResult<Option<[f64; 2]>> {
    q.get(key)
        .map(|v| {
            let parts: Vec<Option<f64>> = v.split(',').map(|s| s.trim().parse::<f64>().ok()).collect();
            match parts.as_slice() {
                [Some(a), Some(b)] => Ok([*a, *b]),
                _ => Err(AppError::Config(format!("{key}: expected lo,hi, got {v:?}"))),
            }
        })
        .transpose()
}

fn count(q: &HashMap<String, String>, key: &str) -> AppResult<Option<usize>> {
    q.get(key)
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| AppError::Config(format!("{key}: expected a count, got {v:?}")))
        })
        .transpose()
}

/// Overrides from query parameters, with the same names as the JSON body.
pub fn overrides_from_query(q: &HashMap<String, String>) -> AppResult<Overrides> {
    check_keys(
        q,
        &["stability", "pm_min", "pm_max", "gm_min", "fixed", "sample_time", "x_range", "y_range", "nx", "ny"],
    )?;
    let stability = q
        .get("stability")
        .map(|v| match v.as_str() {
            "true" | "1" => Ok(true),
            "false" | "0" => Ok(false),
            _ => Err(AppError::Config(format!("stability: expected true or false, got {v:?}"))),
        })
        .transpose()?;
    Ok(Overrides {
        stability,
        pm_min: nullable(q, "pm_min")?,
        pm_max: nullable(q, "pm_max")?,
        gm_min: nullable(q, "gm_min")?,
        weights: None,
        fixed: number(q, "fixed")?,
        sample_time: number(q, "sample_time")?,
        x_range: range(q, "x_range")?,
        y_range: range(q, "y_range")?,
        nx: count(q, "nx")?,
        ny: count(q, "ny")?,
    })
}

/// Gains from `kp`, `ki`, `kd`; absent gains are zero.
fn gains(q: &HashMap<String, String>) -> AppResult<(f64, f64, f64)> {
    Ok((
        number(q, "kp")?.unwrap_or(0.0),
        number(q, "ki")?.unwrap_or(0.0),
        number(q, "kd")?.unwrap_or(0.0),
    ))
}

async fn project(State(s): State<Arc<AppState>>) -> impl IntoResponse {
    json_body(s.project_json.clone())
}

async fn region_get(State(s): State<Arc<AppState>>, Query(q): Params) -> Result<impl IntoResponse, ApiError> {
    let o = overrides_from_query(&q)?;
    Ok(json_body(s.region_json(o).await?))
}

async fn region_post(State(s): State<Arc<AppState>>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let o: Overrides = if body.iter().all(u8::is_ascii_whitespace) {
        Overrides::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| AppError::Config(format!("overrides: {e}")))?
    };
    Ok(json_body(s.region_json(o).await?))
}

async fn analyze(State(s): State<Arc<AppState>>, Query(q): Params) -> Result<impl IntoResponse, ApiError> {
    check_keys(&q, &["kp", "ki", "kd"])?;
    let (kp, ki, kd) = gains(&q)?;
    Ok(json_body(s.compute(move |p| p.analysis_json(kp, ki, kd)).await?))
}

async fn simulate(State(s): State<Arc<AppState>>, Query(q): Params) -> Result<impl IntoResponse, ApiError> {
    check_keys(&q, &["kp", "ki", "kd", "ref", "n", "force"])?;
    let (kp, ki, kd) = gains(&q)?;
    let reference: Reference = q.get("ref").map(|r| r.parse()).transpose()?.unwrap_or(Reference::Step);
    let n = count(&q, "n")?.unwrap_or(DEFAULT_SIM_STEPS);
    if n > MAX_SIM_STEPS {
        return Err(AppError::Config(format!("n: at most {MAX_SIM_STEPS} steps")).into());
    }
    let force = matches!(q.get("force").map(String::as_str), Some("true" | "1"));
    Ok(json_body(
        s.compute(move |p| p.simulation_json(kp, ki, kd, reference, n, force)).await?,
    ))
}
