use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use cogen_core::extract::{
    extract_component_nested, extract_document, extract_flat, extract_nested, extract_nested_with_depth,
    find_component_sets, load_file, parse_variant_name, ExtractError, FigmaClient, FileCache, RawDocument,
};
use cogen_core::{parse_full_name, NodeKind};
use serde_json::{json, Value};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn design_system() -> RawDocument {
    load_file(&fixture("design_system.json")).unwrap()
}

#[test]
fn loads_fixture_document() {
    let doc = design_system();
    assert_eq!(doc.file_key, "design_system");
    assert_eq!(doc.document()["type"], "DOCUMENT");
}

#[test]
fn empty_and_rootless_files_are_malformed() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    assert!(matches!(load_file(&empty), Err(ExtractError::MalformedDocument(_))));

    let rootless = dir.path().join("rootless.json");
    std::fs::write(&rootless, r#"{"name": "x"}"#).unwrap();
    assert!(matches!(load_file(&rootless), Err(ExtractError::MalformedDocument(_))));

    assert!(matches!(load_file(&dir.path().join("missing.json")), Err(ExtractError::Io { .. })));
}

#[test]
fn finds_conforming_sets_in_document_order() {
    let doc = design_system();
    let scan = find_component_sets(&doc);
    let names: Vec<String> = scan.sets.iter().map(|s| s.name.to_string()).collect();
    assert_eq!(names, ["Professional/Button/Default", "Basic/Label", "Trendy/Icon button/Dark"]);
    assert_eq!(scan.warnings.len(), 1);
    assert!(scan.warnings[0].contains("Fancy Widget"));
    assert_eq!(scan.sets[0].name, parse_full_name("Professional/Button/Default").unwrap());
    assert_eq!(scan.sets[0].variants().count(), 2);
}

#[test]
fn document_without_sets_yields_nothing() {
    let doc = load_file(&fixture("no_sets.json")).unwrap();
    let scan = find_component_sets(&doc);
    assert!(scan.sets.is_empty());
    assert!(scan.warnings.is_empty());
    assert!(extract_document(&doc).flat.is_empty());
}

#[test]
fn variant_names() {
    let (map, warnings) = parse_variant_name("State=Default, Size=Large");
    assert_eq!(map.get("State").map(String::as_str), Some("Default"));
    assert_eq!(map.get("Size").map(String::as_str), Some("Large"));
    assert_eq!(map.keys().collect::<Vec<_>>(), ["State", "Size"]);
    assert!(warnings.is_empty());

    let (map, warnings) = parse_variant_name("");
    assert!(map.is_empty() && warnings.is_empty());

    let (map, warnings) = parse_variant_name("Dark");
    assert_eq!(map.get("Dark").map(String::as_str), Some(""));
    assert_eq!(warnings.len(), 1);
}

#[test]
fn flat_extraction_matches_hand_traced_golden() {
    let doc = design_system();
    let scan = find_component_sets(&doc);
    let set = &scan.sets[0];
    let variant = set.variants().next().unwrap();
    let spec = extract_flat(variant, &set.name).unwrap();
    assert_eq!(spec.border_radius, Some(10.0));
    let golden = std::fs::read_to_string(fixture("professional_button_default.flat.json")).unwrap();
    assert_eq!(spec.to_pretty_json(), golden.trim_end());
    // deterministic
    assert_eq!(extract_flat(variant, &set.name).unwrap().to_canonical_json(), spec.to_canonical_json());
}

#[test]
fn flat_extraction_details() {
    let doc = design_system();
    let scan = find_component_sets(&doc);

    let hover = scan.sets[0].variants().nth(1).unwrap();
    let spec = extract_flat(hover, &scan.sets[0].name).unwrap();
    assert_eq!(spec.stroke_weight, Some(2.0));
    assert_eq!(spec.stroke_color.unwrap().to_hex(), "#FFFFFF");
    assert_eq!(spec.color.unwrap().to_hex(), "#1E3A8A");

    let label = scan.sets[1].variants().next().unwrap();
    let spec = extract_flat(label, &scan.sets[1].name).unwrap();
    assert!(spec.effect.is_none());
    assert!(spec.color.is_none());
    assert_eq!(spec.text_color.unwrap().to_hex(), "#111827");
    assert_eq!(spec.font_family.as_deref(), Some("Roboto"));

    let icon = scan.sets[2].variants().next().unwrap();
    let spec = extract_flat(icon, &scan.sets[2].name).unwrap();
    let fill = spec.color.unwrap();
    assert_eq!(fill.a, 0.5);
    let effect = spec.effect.unwrap();
    assert_eq!(effect.effect_name, "LAYER_BLUR");
    assert_eq!(effect.effect_color.a, 0.0);
    assert!(spec.font_size.is_none());
}

#[test]
fn missing_geometry_is_an_error() {
    let name = parse_full_name("Basic/Button").unwrap();
    let node = json!({"type": "COMPONENT", "name": "State=Default"});
    assert!(matches!(extract_flat(&node, &name), Err(ExtractError::MissingGeometry(_))));
}

#[test]
fn text_leaf_and_frame_with_text() {
    let text = json!({
        "type": "TEXT", "name": "T", "characters": "Hi",
        "absoluteBoundingBox": {"x": 1, "y": 2, "width": 3, "height": 4},
        "style": {"fontFamily": "Inter", "fontWeight": 500, "fontSize": 12}
    });
    let node = extract_nested(&text).unwrap().value;
    assert_eq!(node.kind, NodeKind::Text);
    assert_eq!(node.font_family.as_deref(), Some("Inter"));
    assert_eq!(node.font_size, Some(12.0));
    assert_eq!(node.characters.as_deref(), Some("Hi"));
    assert!(node.children.is_empty());

    let frame = json!({
        "type": "FRAME", "name": "F",
        "absoluteBoundingBox": {"x": 0, "y": 0, "width": 10, "height": 10},
        "children": [text]
    });
    let tree = extract_nested(&frame).unwrap().value;
    assert_eq!(tree.node_count(), 2);
    assert_eq!(tree.kind, NodeKind::Frame);
}

const SUPPORTED: &[&str] = &[
    "FRAME",
    "COMPONENT",
    "INSTANCE",
    "COMPONENT_SET",
    "GROUP",
    "TEXT",
    "VECTOR",
    "RECTANGLE",
    "ELLIPSE",
    "LINE",
    "STAR",
    "REGULAR_POLYGON",
];

fn count_supported(v: &Value) -> usize {
    let own = usize::from(SUPPORTED.contains(&v["type"].as_str().unwrap_or("")));
    own + v["children"].as_array().map(|c| c.iter().map(count_supported).sum()).unwrap_or(0)
}

#[test]
fn deep_tree_preserves_supported_nodes() {
    let raw: Value = serde_json::from_str(&std::fs::read_to_string(fixture("deep_tree.json")).unwrap()).unwrap();
    // hand count: Root, Stack, Cluster, Card, Title, Glyph, A, B, Caption
    assert_eq!(count_supported(&raw), 9);
    let out = extract_nested(&raw).unwrap();
    assert_eq!(out.value.node_count(), 9);
    assert_eq!(out.value.depth(), 5);
    assert_eq!(out.warnings.len(), 2, "{:?}", out.warnings);

    let stack = &out.value.children[0];
    assert_eq!(stack.kind, NodeKind::AutoLayout);
    let cluster = &stack.children[0];
    assert_eq!(cluster.kind, NodeKind::Group);
    let names: Vec<_> = cluster.children.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["Card", "A", "B"]);
    assert_eq!(cluster.children[0].stroke_weight, Some(1.5));
    assert_eq!(cluster.children[0].children[1].kind, NodeKind::Vector);

    assert!(matches!(extract_nested_with_depth(&raw, 4), Err(ExtractError::DepthLimitExceeded(4))));
    assert!(extract_nested_with_depth(&raw, 5).is_ok());
}

#[test]
fn unsupported_root_is_rejected() {
    let node = json!({"type": "BOOLEAN_OPERATION", "name": "x", "children": []});
    assert!(matches!(extract_nested(&node), Err(ExtractError::UnsupportedRoot(_))));
}

#[test]
fn fixture_sets_preserve_counts() {
    let doc = design_system();
    for set in find_component_sets(&doc).sets {
        for variant in set.variants() {
            let tree = extract_component_nested(variant, &set.name).unwrap().value;
            assert_eq!(tree.node_count(), count_supported(variant));
            assert_eq!(tree.name, set.name.to_string());
            tree.validate().unwrap();
        }
    }
}

#[test]
fn extract_document_collects_everything() {
    let out = extract_document(&design_system());
    assert_eq!(out.flat.len(), 4);
    assert_eq!(out.nested.len(), 4);
    assert_eq!(out.nested[0].variant_properties.get("Size").map(String::as_str), Some("Large"));
    assert!(out.warnings.iter().any(|w| w.contains("BOOLEAN_OPERATION")));
}

/// Minimal HTTP/1.1 server answering successive connections from `responses`.
struct MockServer {
    url: String,
    requests: Arc<Mutex<Vec<String>>>,
}

/// Status, extra headers, body.
type Canned = (u16, Vec<(&'static str, String)>, String);

fn serve(responses: Vec<Canned>) -> MockServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let log = requests.clone();
    thread::spawn(move || {
        for (status, headers, body) in responses {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut head = String::new();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                head.push_str(&line);
            }
            log.lock().unwrap().push(head);
            let mut extra = String::new();
            for (k, v) in headers {
                extra.push_str(&format!("{k}: {v}\r\n"));
            }
            let reply = format!(
                "HTTP/1.1 {status} X\r\ncontent-length: {}\r\nconnection: close\r\n{extra}\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
            let _ = stream.flush();
            let mut sink = [0u8; 1];
            let _ = stream.set_read_timeout(Some(Duration::from_millis(50)));
            let _ = stream.read(&mut sink);
        }
    });
    MockServer { url, requests }
}

fn body() -> String {
    std::fs::read_to_string(fixture("design_system.json")).unwrap()
}

fn client(server: &MockServer) -> FigmaClient {
    FigmaClient::new(Some("secret".into())).with_base_url(&server.url).with_backoff(Duration::from_millis(1))
}

#[test]
fn fetch_sends_token_and_caches() {
    let server = serve(vec![(200, vec![], body())]);
    let dir = tempfile::tempdir().unwrap();
    let cache = FileCache::new(dir.path());
    let doc = client(&server).with_cache(cache.clone()).fetch_file("abc123").unwrap();
    assert_eq!(find_component_sets(&doc).sets.len(), 3);

    let request = server.requests.lock().unwrap()[0].clone();
    assert!(request.starts_with("GET /files/abc123 "), "{request}");
    assert!(request.to_lowercase().contains("x-figma-token: secret"));

    assert_eq!(std::fs::read_to_string(dir.path().join("abc123.json")).unwrap(), body());
    let index: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("index.json")).unwrap()).unwrap();
    assert_eq!(index["files"]["abc123"]["path"], "abc123.json");

    let offline = FigmaClient::new(None).with_cache(cache).offline(true);
    let again = offline.fetch_file("abc123").unwrap();
    assert_eq!(serde_json::to_string(&again.json).unwrap(), serde_json::to_string(&doc.json).unwrap());
    assert_eq!(again.retrieved_at, doc.retrieved_at);
    assert!(matches!(offline.fetch_file("other"), Err(ExtractError::CacheMiss(_))));
}

#[test]
fn status_codes_map_to_errors() {
    let server = serve(vec![(403, vec![], "{}".into()), (401, vec![], "{}".into()), (404, vec![], "{}".into())]);
    let c = client(&server);
    assert!(matches!(c.fetch_file("k"), Err(ExtractError::Auth(403))));
    assert!(matches!(c.fetch_file("k"), Err(ExtractError::Auth(401))));
    assert!(matches!(c.fetch_file("k"), Err(ExtractError::NotFound(_))));
}

#[test]
fn rate_limit_retries_then_succeeds() {
    let limited = || (429, vec![("retry-after", "0".to_string())], "{}".to_string());
    let server = serve(vec![limited(), limited(), (200, vec![], body())]);
    let doc = client(&server).fetch_file("k").unwrap();
    assert_eq!(doc.file_key, "k");
    assert_eq!(server.requests.lock().unwrap().len(), 3);
}

#[test]
fn rate_limit_gives_up_after_three_retries() {
    let limited = || (429, vec![("retry-after", "0".to_string())], "{}".to_string());
    let server = serve(vec![limited(), limited(), limited(), limited()]);
    let err = client(&server).fetch_file("k").unwrap_err();
    assert!(matches!(err, ExtractError::RateLimited { retry_after: Some(0) }));
    assert_eq!(server.requests.lock().unwrap().len(), 4);
}

#[test]
fn missing_token_and_transport_errors() {
    assert!(matches!(FigmaClient::new(None).fetch_file("k"), Err(ExtractError::MissingToken)));
    assert!(matches!(FigmaClient::new(Some(String::new())).fetch_file("k"), Err(ExtractError::MissingToken)));
    let closed = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", closed.local_addr().unwrap());
    drop(closed);
    let c = FigmaClient::new(Some("t".into())).with_base_url(url);
    assert!(matches!(c.fetch_file("k"), Err(ExtractError::Transport(_))));
}

#[test]
fn concurrent_cache_writers_serialize() {
    let dir = tempfile::tempdir().unwrap();
    let cache = FileCache::new(dir.path());
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let cache = cache.clone();
            thread::spawn(move || {
                let raw = format!(r#"{{"document": {{"type": "DOCUMENT", "id": "{i}"}}}}"#);
                cache.put(&format!("k{}", i % 2), &raw, chrono::Utc::now()).unwrap();
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    for key in ["k0", "k1"] {
        let doc = cache.get(key).unwrap().unwrap();
        assert_eq!(doc.document()["type"], "DOCUMENT");
    }
    let index: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("index.json")).unwrap()).unwrap();
    assert_eq!(index["files"].as_object().unwrap().len(), 2);
}
