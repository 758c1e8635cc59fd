//! Figma file retrieval and component extraction.
//!
//! A [`RawDocument`] comes either from the REST API through [`FigmaClient`]
//! or from a verbatim file-response dump through [`load_file`]. Component sets
//! are located with [`find_component_sets`]; each variant is then turned into
//! a [`FlatComponentSpec`] and a [`NestedNode`] tree.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use chrono::{DateTime, Utc};
use once_cell::sync::Lazy;
use rand::Rng;
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    parse_full_name, ColorValue, EffectSpec, FlatComponentSpec, FullComponentName, NestedNode, NodeKind, VariantMap,
};

pub const FIGMA_API_BASE: &str = "https://api.figma.com/v1";
pub const DEFAULT_MAX_DEPTH: usize = 32;
pub const MAX_RETRIES: u32 = 3;

const INDEX_FILE: &str = "index.json";

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("figma rejected the token (HTTP {0})")]
    Auth(u16),
    #[error("figma file {0} not found")]
    NotFound(String),
    #[error("rate limited by figma (retry after {retry_after:?}s)")]
    RateLimited { retry_after: Option<u64> },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("a figma token is required (use --token or FIGMA_TOKEN)")]
    MissingToken,
    #[error("offline mode: no cached copy of {0}")]
    CacheMiss(String),
    #[error("node {0:?} has no absoluteBoundingBox")]
    MissingGeometry(String),
    #[error("node tree deeper than {0} levels")]
    DepthLimitExceeded(usize),
    #[error("node type {0} cannot be the root of a component tree")]
    UnsupportedRoot(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExtractError + '_ {
    move |source| ExtractError::Io { path: path.to_path_buf(), source }
}

/// A parsed Figma file response.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDocument {
    pub file_key: String,
    pub retrieved_at: DateTime<Utc>,
    pub json: Value,
}

impl RawDocument {
    pub fn from_json(
        file_key: impl Into<String>,
        json: Value,
        retrieved_at: DateTime<Utc>,
    ) -> Result<Self, ExtractError> {
        match json.get("document") {
            Some(Value::Object(_)) => Ok(RawDocument { file_key: file_key.into(), retrieved_at, json }),
            Some(_) => Err(ExtractError::MalformedDocument("`document` is not an object".into())),
            None => Err(ExtractError::MalformedDocument("missing `document` root".into())),
        }
    }

    pub fn parse(file_key: impl Into<String>, raw: &str, retrieved_at: DateTime<Utc>) -> Result<Self, ExtractError> {
        if raw.trim().is_empty() {
            return Err(ExtractError::MalformedDocument("empty input".into()));
        }
        let json = serde_json::from_str(raw).map_err(|e| ExtractError::MalformedDocument(e.to_string()))?;
        Self::from_json(file_key, json, retrieved_at)
    }

    pub fn document(&self) -> &Value {
        &self.json["document"]
    }
}

/// Reads an offline dump. The file stem becomes the file key and the file's
/// modification time the retrieval time.
pub fn load_file(path: &Path) -> Result<RawDocument, ExtractError> {
    let raw = fs::read_to_string(path).map_err(io_err(path))?;
    let retrieved_at =
        fs::metadata(path).and_then(|m| m.modified()).map(DateTime::<Utc>::from).unwrap_or_else(|_| Utc::now());
    let key = path.file_stem().and_then(|s| s.to_str()).unwrap_or("local");
    RawDocument::parse(key, &raw, retrieved_at)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct CacheIndex {
    files: BTreeMap<String, CacheEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CacheEntry {
    path: String,
    retrieved_at: DateTime<Utc>,
}

static KEY_LOCKS: Lazy<Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>> = Lazy::new(Default::default);

fn lock_for(path: PathBuf) -> Arc<Mutex<()>> {
    KEY_LOCKS.lock().unwrap_or_else(|e| e.into_inner()).entry(path).or_default().clone()
}

/// On-disk cache of file responses: `<file_key>.json` beside `index.json`.
#[derive(Debug, Clone)]
pub struct FileCache {
    dir: PathBuf,
}

impl FileCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FileCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn file_path(&self, key: &str) -> PathBuf {
        let safe: String =
            key.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
        self.dir.join(format!("{safe}.json"))
    }

    fn read_index(&self) -> CacheIndex {
        fs::read_to_string(self.dir.join(INDEX_FILE))
            .ok()
            .and_then(|s| serde_json::from_str(&s).ok())
            .unwrap_or_default()
    }

    pub fn get(&self, key: &str) -> Result<Option<RawDocument>, ExtractError> {
        let path = self.file_path(key);
        let lock = lock_for(path.clone());
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        if !path.exists() {
            return Ok(None);
        }
        let raw = fs::read_to_string(&path).map_err(io_err(&path))?;
        let retrieved_at = self.read_index().files.get(key).map(|e| e.retrieved_at).unwrap_or_else(Utc::now);
        RawDocument::parse(key, &raw, retrieved_at).map(Some)
    }

    /// Stores `raw` verbatim and records it in the index. Writers of the same
    /// key are serialized; files are replaced atomically.
    pub fn put(&self, key: &str, raw: &str, retrieved_at: DateTime<Utc>) -> Result<(), ExtractError> {
        fs::create_dir_all(&self.dir).map_err(io_err(&self.dir))?;
        let path = self.file_path(key);
        {
            let lock = lock_for(path.clone());
            let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
            write_atomic(&path, raw.as_bytes())?;
        }
        let index_path = self.dir.join(INDEX_FILE);
        let lock = lock_for(index_path.clone());
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut index = self.read_index();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        index.files.insert(key.to_string(), CacheEntry { path: name, retrieved_at });
        let body = serde_json::to_string_pretty(&index).expect("index serializes");
        write_atomic(&index_path, body.as_bytes())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ExtractError> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Blocking REST client for `GET /v1/files/{key}`.
#[derive(Debug, Clone)]
pub struct FigmaClient {
    http: Client,
    base_url: String,
    token: Option<String>,
    cache: Option<FileCache>,
    offline: bool,
    backoff: Duration,
}

impl FigmaClient {
    pub fn new(token: Option<String>) -> Self {
        FigmaClient {
            http: Client::builder()
                .user_agent(concat!("cogen/", env!("CARGO_PKG_VERSION")))
                .timeout(Duration::from_secs(60))
                .build()
                .expect("http client builds"),
            base_url: FIGMA_API_BASE.to_string(),
            token: token.filter(|t| !t.is_empty()),
            cache: None,
            offline: false,
            backoff: Duration::from_millis(500),
        }
    }

    pub fn with_base_url(mut self, url: impl Into<String>) -> Self {
        self.base_url = url.into().trim_end_matches('/').to_string();
        self
    }

    pub fn with_cache(mut self, cache: FileCache) -> Self {
        self.cache = Some(cache);
        self
    }

    /// Serve from the cache only; no network access.
    pub fn offline(mut self, offline: bool) -> Self {
        self.offline = offline;
        self
    }

    /// Base delay of the exponential backoff on 429 and 5xx responses.
    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.backoff = base;
        self
    }

    pub fn fetch_file(&self, file_key: &str) -> Result<RawDocument, ExtractError> {
        if self.offline {
            let cache = self.cache.as_ref().ok_or_else(|| ExtractError::CacheMiss(file_key.into()))?;
            return cache.get(file_key)?.ok_or_else(|| ExtractError::CacheMiss(file_key.into()));
        }
        let token = self.token.as_deref().ok_or(ExtractError::MissingToken)?;
        let url = format!("{}/files/{}", self.base_url, file_key);

        let mut attempt = 0;
        let body = loop {
            let response = self
                .http
                .get(&url)
                .header("X-Figma-Token", token)
                .send()
                .map_err(|e| ExtractError::Transport(e.to_string()))?;
            let status = response.status();
            let retry_after = response
                .headers()
                .get(reqwest::header::RETRY_AFTER)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<u64>().ok());
            let retryable = status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error();
            if retryable && attempt < MAX_RETRIES {
                thread::sleep(self.delay(attempt, retry_after));
                attempt += 1;
                continue;
            }
            match status {
                s if s.is_success() => break response.text().map_err(|e| ExtractError::Transport(e.to_string()))?,
                StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => return Err(ExtractError::Auth(status.as_u16())),
                StatusCode::NOT_FOUND => return Err(ExtractError::NotFound(file_key.into())),
                StatusCode::TOO_MANY_REQUESTS => return Err(ExtractError::RateLimited { retry_after }),
                s => return Err(ExtractError::Transport(format!("unexpected HTTP status {s}"))),
            }
        };

        let retrieved_at = Utc::now();
        let doc = RawDocument::parse(file_key, &body, retrieved_at)?;
        if let Some(cache) = &self.cache {
            cache.put(file_key, &body, retrieved_at)?;
        }
        Ok(doc)
    }

    fn delay(&self, attempt: u32, retry_after: Option<u64>) -> Duration {
        if let Some(secs) = retry_after {
            return Duration::from_secs(secs);
        }
        let base = self.backoff.saturating_mul(1 << attempt);
        let jitter_ms = self.backoff.as_millis() as u64;
        base + Duration::from_millis(rand::rng().random_range(0..=jitter_ms))
    }
}

/// A located component set.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSet<'a> {
    pub name: FullComponentName,
    pub node: &'a Value,
}

impl<'a> ComponentSet<'a> {
    /// COMPONENT children of the set, i.e. its variants.
    pub fn variants(&self) -> impl Iterator<Item = &'a Value> {
        children(self.node).iter().filter(|c| node_type(c) == "COMPONENT")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetScan<'a> {
    pub sets: Vec<ComponentSet<'a>>,
    pub warnings: Vec<String>,
}

fn node_type(node: &Value) -> &str {
    node.get("type").and_then(Value::as_str).unwrap_or("")
}

fn node_name(node: &Value) -> &str {
    node.get("name").and_then(Value::as_str).unwrap_or("")
}

fn children(node: &Value) -> &[Value] {
    node.get("children").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[])
}

/// Depth-first search for COMPONENT_SET nodes whose names follow the
/// `Style/Kind[/Subtype]` convention, in document order.
pub fn find_component_sets(doc: &RawDocument) -> SetScan<'_> {
    let mut scan = SetScan { sets: Vec::new(), warnings: Vec::new() };
    let mut stack = vec![doc.document()];
    while let Some(node) = stack.pop() {
        if node_type(node) == "COMPONENT_SET" {
            match parse_full_name(node_name(node)) {
                Ok(name) => scan.sets.push(ComponentSet { name, node }),
                Err(e) => scan.warnings.push(format!("skipping component set {:?}: {e}", node_name(node))),
            }
        }
        stack.extend(children(node).iter().rev());
    }
    scan
}

/// Parses `State=Default, Size=Large` into an ordered map. Segments without
/// `=` become keys with an empty value and produce a warning.
pub fn parse_variant_name(raw: &str) -> (VariantMap, Vec<String>) {
    let mut map = VariantMap::new();
    let mut warnings = Vec::new();
    for segment in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match segment.split_once('=') {
            Some((k, v)) => {
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
            None => {
                warnings.push(format!("variant segment {segment:?} has no value"));
                map.insert(segment.to_string(), String::new());
            }
        }
    }
    (map, warnings)
}

fn num(node: &Value, key: &str) -> Option<f64> {
    node.get(key).and_then(Value::as_f64)
}

fn paint_color(paint: &Value) -> Option<ColorValue> {
    let c = paint.get("color")?;
    let opacity = num(paint, "opacity").unwrap_or(1.0);
    let a = num(c, "a").unwrap_or(1.0) * opacity;
    ColorValue::new(num(c, "r")?, num(c, "g")?, num(c, "b")?, a).ok()
}

fn first_paint(node: &Value, key: &str) -> Option<ColorValue> {
    node.get(key)?.as_array()?.first().and_then(paint_color)
}

fn first_effect(node: &Value) -> Option<EffectSpec> {
    let effect = node.get("effects")?.as_array()?.first()?;
    let name = effect.get("type")?.as_str()?.to_string();
    let color = effect
        .get("color")
        .and_then(|c| ColorValue::new(num(c, "r")?, num(c, "g")?, num(c, "b")?, num(c, "a").unwrap_or(1.0)).ok())
        .unwrap_or(ColorValue { r: 0.0, g: 0.0, b: 0.0, a: 0.0 });
    Some(EffectSpec { effect_name: name, effect_color: color })
}

struct Geometry {
    x: f64,
    y: f64,
    width: f64,
    height: f64,
}

fn geometry(node: &Value) -> Option<Geometry> {
    let b = node.get("absoluteBoundingBox")?;
    Some(Geometry { x: num(b, "x")?, y: num(b, "y")?, width: num(b, "width")?, height: num(b, "height")? })
}

fn first_text_node(node: &Value) -> Option<&Value> {
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        if node_type(n) == "TEXT" {
            return Some(n);
        }
        stack.extend(children(n).iter().rev());
    }
    None
}

struct FontFields {
    family: Option<String>,
    weight: Option<f64>,
    size: Option<f64>,
}

fn font_fields(text: &Value) -> FontFields {
    let style = text.get("style");
    FontFields {
        family: style.and_then(|s| s.get("fontFamily")).and_then(Value::as_str).map(String::from),
        weight: style.and_then(|s| num(s, "fontWeight")),
        size: style.and_then(|s| num(s, "fontSize")),
    }
}

/// Flat spec of one variant node of the set `set_name`.
pub fn extract_flat(node: &Value, set_name: &FullComponentName) -> Result<FlatComponentSpec, ExtractError> {
    let g = geometry(node).ok_or_else(|| ExtractError::MissingGeometry(node_name(node).into()))?;
    let mut spec = FlatComponentSpec::new(set_name.clone());
    spec.variant_properties = parse_variant_name(node_name(node)).0;
    spec.color = first_paint(node, "fills");
    spec.stroke_color = first_paint(node, "strokes");
    if spec.stroke_color.is_some() {
        spec.stroke_weight = num(node, "strokeWeight");
    }
    if let Some(text) = first_text_node(node) {
        spec.text_color = first_paint(text, "fills");
        let f = font_fields(text);
        spec.font_family = f.family;
        spec.font_weight = f.weight;
        spec.font_size = f.size;
    }
    spec.effect = first_effect(node);
    spec.x = g.x;
    spec.y = g.y;
    spec.width = g.width;
    spec.height = g.height;
    spec.border_radius = num(node, "cornerRadius");
    Ok(spec.normalized())
}

/// Node types extracted as [`NodeKind::Vector`].
pub const VECTOR_LIKE: &[&str] = &["VECTOR", "RECTANGLE", "ELLIPSE", "LINE", "STAR", "REGULAR_POLYGON"];

const FRAME_LIKE: &[&str] = &["FRAME", "COMPONENT", "INSTANCE", "COMPONENT_SET"];

/// Maps a Figma node to a supported kind, or `None` for skipped types.
pub fn classify(node: &Value) -> Option<NodeKind> {
    let t = node_type(node);
    if FRAME_LIKE.contains(&t) {
        let auto = matches!(node.get("layoutMode").and_then(Value::as_str), Some("HORIZONTAL" | "VERTICAL"));
        Some(if auto { NodeKind::AutoLayout } else { NodeKind::Frame })
    } else if t == "GROUP" {
        Some(NodeKind::Group)
    } else if t == "TEXT" {
        Some(NodeKind::Text)
    } else if VECTOR_LIKE.contains(&t) {
        Some(NodeKind::Vector)
    } else {
        None
    }
}

/// Number of nodes in a raw tree that map to a supported kind.
pub fn supported_node_count(node: &Value) -> usize {
    usize::from(classify(node).is_some()) + children(node).iter().map(supported_node_count).sum::<usize>()
}

/// An extraction result with its non-fatal warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct Extracted<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

fn convert(
    node: &Value,
    depth: usize,
    max_depth: usize,
    warnings: &mut Vec<String>,
) -> Result<Vec<NestedNode>, ExtractError> {
    if depth > max_depth {
        return Err(ExtractError::DepthLimitExceeded(max_depth));
    }
    let mut converted = Vec::new();
    for child in children(node) {
        converted.extend(convert(child, depth + 1, max_depth, warnings)?);
    }
    let Some(kind) = classify(node) else {
        warnings.push(format!(
            "skipping {} node {:?}; its {} supported descendants are kept",
            node_type(node),
            node_name(node),
            converted.len()
        ));
        return Ok(converted);
    };

    let mut out = NestedNode::new(kind, node_name(node));
    if let Some(g) = geometry(node) {
        out = out.with_geometry(g.x, g.y, g.width, g.height);
    } else {
        warnings.push(format!("node {:?} has no bounding box; using zero geometry", node_name(node)));
    }
    match kind {
        NodeKind::Text => {
            let f = font_fields(node);
            out.font_family = f.family;
            out.font_weight = f.weight;
            out.font_size = f.size;
            out.text_color = first_paint(node, "fills");
            out.characters = node.get("characters").and_then(Value::as_str).map(String::from);
        }
        NodeKind::Vector => {
            out.color = first_paint(node, "fills");
        }
        NodeKind::Frame | NodeKind::AutoLayout | NodeKind::Group => {
            out.color = first_paint(node, "fills");
            out.stroke_color = first_paint(node, "strokes");
            if out.stroke_color.is_some() {
                out.stroke_weight = num(node, "strokeWeight");
            }
            out.effect = first_effect(node);
            out.border_radius = num(node, "cornerRadius");
        }
    }

    if kind.is_grouping() {
        out.children = converted;
        Ok(vec![out])
    } else {
        if !converted.is_empty() {
            warnings.push(format!("{} node {:?} has children; hoisting them", node_type(node), node_name(node)));
        }
        let mut all = vec![out];
        all.extend(converted);
        Ok(all)
    }
}

/// Nested tree of `node` with the default depth cap.
pub fn extract_nested(node: &Value) -> Result<Extracted<NestedNode>, ExtractError> {
    extract_nested_with_depth(node, DEFAULT_MAX_DEPTH)
}

/// Nested tree of `node`. Nodes of unsupported types are dropped and their
/// supported descendants attached to the nearest supported ancestor.
pub fn extract_nested_with_depth(node: &Value, max_depth: usize) -> Result<Extracted<NestedNode>, ExtractError> {
    if classify(node).is_none() {
        return Err(ExtractError::UnsupportedRoot(node_type(node).to_string()));
    }
    let mut warnings = Vec::new();
    let mut nodes = convert(node, 1, max_depth, &mut warnings)?;
    let mut root = nodes.remove(0);
    if !nodes.is_empty() {
        // only leaf roots can have hoisted siblings; wrap them in a group
        let mut group =
            NestedNode::new(NodeKind::Group, root.name.clone()).with_geometry(root.x, root.y, root.width, root.height);
        group.children.push(root);
        group.children.extend(nodes);
        root = group;
    }
    Ok(Extracted { value: root.normalized(), warnings })
}

/// Nested tree of one variant: the root carries the full component name and
/// the variant properties.
pub fn extract_component_nested(
    node: &Value,
    set_name: &FullComponentName,
) -> Result<Extracted<NestedNode>, ExtractError> {
    if geometry(node).is_none() {
        return Err(ExtractError::MissingGeometry(node_name(node).into()));
    }
    let mut out = extract_nested(node)?;
    let (variants, warnings) = parse_variant_name(node_name(node));
    out.value.name = set_name.to_string();
    out.value.variant_properties = variants;
    out.warnings.extend(warnings);
    Ok(out)
}

/// Every variant of every conforming component set in both representations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtractedComponents {
    pub flat: Vec<FlatComponentSpec>,
    pub nested: Vec<NestedNode>,
    pub warnings: Vec<String>,
}

pub fn extract_document(doc: &RawDocument) -> ExtractedComponents {
    let scan = find_component_sets(doc);
    let mut out = ExtractedComponents { warnings: scan.warnings, ..Default::default() };
    for set in &scan.sets {
        for variant in set.variants() {
            let flat = extract_flat(variant, &set.name);
            let nested = extract_component_nested(variant, &set.name);
            match (flat, nested) {
                (Ok(f), Ok(n)) => {
                    out.flat.push(f);
                    out.warnings.extend(n.warnings);
                    out.nested.push(n.value);
                }
                (Err(e), _) | (_, Err(e)) => out.warnings.push(format!("{} / {:?}: {e}", set.name, node_name(variant))),
            }
        }
    }
    out
}
