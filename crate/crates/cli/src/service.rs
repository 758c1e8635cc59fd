//! Local HTTP service used by the Figma plugin.
//!
//! - `POST /generate` `{"prompt": ..., "schema"?: "flat"|"nested"}` → `{"json": ..., "instructions": [...]}`
//! - `POST /describe` `{"json": ..., "seed"?: n}` → `{"prompt": ...}`
//! - `GET /health` → `{"status": "ok"}`
//!
//! Errors are `{"error": ..., "kind": ...}` with status 400 (bad body),
//! 422 (no component kind in the prompt) or 500.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cogen_core::emitter::{emit_flat, map_to_figma, nest, validate_value, PluginInstruction, Schema, StylePresetTable};
use cogen_core::parser::{Lexicon, ParseError};
use cogen_core::synth::Synthesizer;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};

/// Origins allowed to call the service: the plugin iframe (`null`) and the
/// Figma web app.
pub const ALLOWED_ORIGINS: &[&str] = &["null", "https://www.figma.com"];

#[derive(Debug, Clone)]
pub struct AppState {
    pub presets: Arc<StylePresetTable>,
    pub lexicon: Arc<Lexicon>,
    pub schema: Schema,
    pub seed: u64,
}

impl Default for AppState {
    fn default() -> Self {
        AppState {
            presets: Arc::new(StylePresetTable::builtin().clone()),
            lexicon: Arc::new(Lexicon::builtin().clone()),
            schema: Schema::Flat,
            seed: 0,
        }
    }
}

#[derive(Debug, Deserialize)]
struct GenerateBody {
    prompt: String,
    #[serde(default)]
    schema: Option<Schema>,
}

#[derive(Debug, Serialize)]
pub struct GenerateResponse {
    pub json: Value,
    pub instructions: PluginInstruction,
}

#[derive(Debug, Deserialize)]
struct DescribeBody {
    json: Value,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl ToString) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, kind: "invalid_body", message: message.to_string() }
    }

    fn internal(message: impl ToString) -> Self {
        ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, kind: "internal", message: message.to_string() }
    }
}

impl From<ParseError> for ApiError {
    fn from(e: ParseError) -> Self {
        ApiError { status: StatusCode::UNPROCESSABLE_ENTITY, kind: "no_component_kind", message: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message, "kind": self.kind }))).into_response()
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(ApiError::bad_request)
}

async fn generate(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<GenerateResponse>, ApiError> {
    let req: GenerateBody = parse_body(&body)?;
    if req.prompt.trim().is_empty() {
        return Err(ApiError::bad_request("prompt is empty"));
    }
    let intent = state.lexicon.parse_intent(&req.prompt)?;
    let flat = emit_flat(&intent, &state.presets);
    let tree = nest(&flat);
    let json = match req.schema.unwrap_or(state.schema) {
        Schema::Flat => flat.to_value(),
        Schema::Nested => tree.to_value(),
    };
    let instructions = map_to_figma(&tree);
    instructions.check().map_err(ApiError::internal)?;
    Ok(Json(GenerateResponse { json, instructions }))
}

async fn describe(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let req: DescribeBody = parse_body(&body)?;
    let doc = validate_value(req.json).map_err(ApiError::bad_request)?;
    let prompt = Synthesizer::new(cogen_core::synth::TEMPLATES, &state.lexicon)
        .synthesize(&doc.to_flat(), req.seed.unwrap_or(state.seed))
        .map_err(ApiError::internal)?;
    Ok(Json(json!({ "prompt": prompt.text })))
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

pub fn cors() -> CorsLayer {
    let origins: Vec<HeaderValue> = ALLOWED_ORIGINS.iter().map(|o| HeaderValue::from_static(o)).collect();
    CorsLayer::new()
        .allow_origin(AllowOrigin::list(origins))
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers([header::CONTENT_TYPE])
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/generate", post(generate))
        .route("/describe", post(describe))
        .route("/health", get(health))
        .layer(cors())
        .with_state(Arc::new(state))
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("cogen service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
