//! Intent to component JSON: preset lookup, property overlay, per-kind node
//! templates, strict validation and the Figma plugin instruction payload.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use indexmap::IndexMap;
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    parse_full_name, round_px, ColorValue, ComponentIntent, ComponentKind, EffectSpec, FlatComponentSpec,
    FullComponentName, NameError, NestedNode, NodeKind, PropertyKey, PropertyValue, StyleTheme, Subtype, FLAT_KEYS,
    FLAT_REQUIRED_KEYS, NESTED_KEYS, NESTED_REQUIRED_KEYS, SIZE_VARIANT_KEY,
};

const BUILTIN_PRESETS: &str = include_str!("../data/presets.json");
const SUPPORTED_PRESET_VERSION: u32 = 1;

/// Number of list items under a generated menu list.
pub const MENU_ITEM_COUNT: usize = 3;

/// Effect color used when a prompt asks for an effect the preset lacks.
pub const DEFAULT_EFFECT_COLOR: ColorValue = ColorValue { r: 0.0, g: 0.0, b: 0.0, a: 0.25 };

static BUILTIN: Lazy<StylePresetTable> =
    Lazy::new(|| StylePresetTable::from_json_str(BUILTIN_PRESETS).expect("builtin presets are valid"));

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("reading presets: {0}")]
    Io(#[from] std::io::Error),
    #[error("preset syntax: {0}")]
    Syntax(String),
    #[error("unsupported preset version {0}")]
    Version(u32),
    #[error("bad preset key {key:?}: {source}")]
    Key { key: String, source: NameError },
    #[error("preset {key:?}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("missing preset for {0}")]
    Missing(String),
}

#[derive(Deserialize)]
struct PresetFile {
    version: u32,
    presets: IndexMap<String, serde_json::Map<String, Value>>,
}

/// Default flat spec for every (kind, style) pair.
#[derive(Debug, Clone)]
pub struct StylePresetTable {
    version: u32,
    entries: HashMap<(ComponentKind, StyleTheme), FlatComponentSpec>,
}

impl StylePresetTable {
    pub fn builtin() -> &'static StylePresetTable {
        &BUILTIN
    }

    pub fn load(path: &Path) -> Result<Self, PresetError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Parses a `{"version": 1, "presets": {"<Style>/<Kind>": {...}}}` document.
    pub fn from_json_str(raw: &str) -> Result<Self, PresetError> {
        let file: PresetFile = serde_json::from_str(raw).map_err(|e| PresetError::Syntax(e.to_string()))?;
        if file.version != SUPPORTED_PRESET_VERSION {
            return Err(PresetError::Version(file.version));
        }
        let mut entries = HashMap::new();
        for (key, mut body) in file.presets {
            let name = parse_full_name(&key).map_err(|source| PresetError::Key { key: key.clone(), source })?;
            body.insert("name".into(), Value::String(name.to_string()));
            let spec: FlatComponentSpec = serde_json::from_value(Value::Object(body))
                .map_err(|e| PresetError::Invalid { key: key.clone(), reason: e.to_string() })?;
            spec.validate().map_err(|e| PresetError::Invalid { key: key.clone(), reason: e.to_string() })?;
            entries.insert((name.kind, name.style), spec);
        }
        for kind in ComponentKind::ALL {
            for style in StyleTheme::ALL {
                if !entries.contains_key(&(kind, style)) {
                    return Err(PresetError::Missing(format!("{style}/{kind}")));
                }
            }
        }
        Ok(StylePresetTable { version: file.version, entries })
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn get(&self, kind: ComponentKind, style: StyleTheme) -> &FlatComponentSpec {
        // totality is checked at load time
        &self.entries[&(kind, style)]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Preset for (kind, style) with the intent's explicit properties laid on top.
pub fn emit_flat(intent: &ComponentIntent, presets: &StylePresetTable) -> FlatComponentSpec {
    let mut spec = presets.get(intent.kind, intent.style).clone();
    let subtype = intent.subtype.clone().unwrap_or_else(|| Subtype::new("Default").expect("valid"));
    spec.name = FullComponentName::new(intent.style, intent.kind, Some(subtype));

    for (key, value) in &intent.explicit_properties {
        match (key, value) {
            (PropertyKey::Size, PropertyValue::Size(size)) => {
                spec.width *= size.factor();
                spec.height *= size.factor();
                spec.variant_properties.insert(SIZE_VARIANT_KEY.into(), size.as_str().into());
            }
            (PropertyKey::BorderRadius, PropertyValue::Number(n)) => spec.border_radius = Some(*n),
            (PropertyKey::StrokeWeight, PropertyValue::Number(n)) => spec.stroke_weight = Some(*n),
            (PropertyKey::FontSize, PropertyValue::Number(n)) => spec.font_size = Some(*n),
            (PropertyKey::FontWeight, PropertyValue::Number(n)) => spec.font_weight = Some(*n),
            (PropertyKey::FontFamily, PropertyValue::Text(f)) => spec.font_family = Some(f.clone()),
            (PropertyKey::Color, PropertyValue::Color(c)) => spec.color = Some(*c),
            (PropertyKey::StrokeColor, PropertyValue::Color(c)) => spec.stroke_color = Some(*c),
            (PropertyKey::TextColor, PropertyValue::Color(c)) => spec.text_color = Some(*c),
            (PropertyKey::Effect, PropertyValue::Effect(name)) => {
                let effect_color = spec.effect.as_ref().map(|e| e.effect_color).unwrap_or(DEFAULT_EFFECT_COLOR);
                spec.effect = Some(EffectSpec { effect_name: name.clone(), effect_color });
            }
            _ => {}
        }
    }
    spec.normalized()
}

/// Nested tree for an intent: the kind template applied to [`emit_flat`].
pub fn emit_nested(intent: &ComponentIntent, presets: &StylePresetTable) -> NestedNode {
    nest(&emit_flat(intent, presets))
}

fn text_node(spec: &FlatComponentSpec, label: &str, x: f64, y: f64, width: f64, height: f64) -> NestedNode {
    let font_size = spec.font_size.unwrap_or(14.0);
    let line = (font_size * 1.5).min(height);
    let pad = (width * 0.1).min(16.0);
    let mut text = NestedNode::new(NodeKind::Text, label).with_geometry(
        x + pad,
        y + (height - line) / 2.0,
        width - 2.0 * pad,
        line,
    );
    text.characters = Some(label.to_string());
    text.font_family = spec.font_family.clone();
    text.font_weight = spec.font_weight;
    text.font_size = spec.font_size;
    text.text_color = spec.text_color;
    text
}

fn frame_node(spec: &FlatComponentSpec, name: &str) -> NestedNode {
    let mut frame = NestedNode::new(NodeKind::Frame, name).with_geometry(spec.x, spec.y, spec.width, spec.height);
    frame.color = spec.color;
    frame.stroke_color = spec.stroke_color;
    frame.stroke_weight = spec.stroke_weight;
    frame.effect = spec.effect.clone();
    frame.border_radius = spec.border_radius;
    frame
}

/// Applies the node template of `spec`'s kind.
///
/// Button, InputField and ListItem are a frame holding one text node; an
/// IconButton holds a vector placeholder instead. A Label is a lone text node
/// and a MenuList holds [`MENU_ITEM_COUNT`] list-item subtrees.
pub fn nest(spec: &FlatComponentSpec) -> NestedNode {
    let name = spec.name.to_string();
    let (x, y, w, h) = (spec.x, spec.y, spec.width, spec.height);
    let mut root = match spec.name.kind {
        ComponentKind::Label => {
            let mut t = text_node(spec, "Label", x, y, w, h).with_geometry(x, y, w, h);
            t.name = name;
            t
        }
        ComponentKind::Button | ComponentKind::InputField | ComponentKind::ListItem => {
            let label = match spec.name.kind {
                ComponentKind::Button => "Button",
                ComponentKind::InputField => "Placeholder",
                _ => "List item",
            };
            let mut frame = frame_node(spec, &name);
            frame.children.push(text_node(spec, label, x, y, w, h));
            frame
        }
        ComponentKind::IconButton => {
            let mut frame = frame_node(spec, &name);
            let side = w.min(h) * 0.6;
            let mut icon = NestedNode::new(NodeKind::Vector, "Icon").with_geometry(
                x + (w - side) / 2.0,
                y + (h - side) / 2.0,
                side,
                side,
            );
            icon.color = spec.text_color;
            frame.children.push(icon);
            frame
        }
        ComponentKind::MenuList => {
            let mut frame = frame_node(spec, &name);
            let item_h = h / MENU_ITEM_COUNT as f64;
            for i in 0..MENU_ITEM_COUNT {
                let item_y = y + item_h * i as f64;
                let mut item = NestedNode::new(NodeKind::Frame, format!("List item {}", i + 1))
                    .with_geometry(x, item_y, w, item_h);
                item.color = spec.color;
                item.children.push(text_node(spec, &format!("Item {}", i + 1), x, item_y, w, item_h));
                frame.children.push(item);
            }
            frame
        }
    };
    root.variant_properties = spec.variant_properties.clone();
    root.normalized()
}

/// Flat view of a nested tree: root geometry and paint, fonts from the first
/// text node. Without a text node, the first vector's color stands in for
/// `text_color` (icon buttons carry their glyph color there).
pub fn flatten(tree: &NestedNode) -> Result<FlatComponentSpec, NameError> {
    let name = parse_full_name(&tree.name)?;
    let mut spec = FlatComponentSpec::new(name);
    spec.variant_properties = tree.variant_properties.clone();
    (spec.x, spec.y, spec.width, spec.height) = (tree.x, tree.y, tree.width, tree.height);
    if tree.kind.is_grouping() {
        spec.color = tree.color;
        spec.stroke_color = tree.stroke_color;
        spec.stroke_weight = tree.stroke_weight;
        spec.effect = tree.effect.clone();
        spec.border_radius = tree.border_radius;
    }
    if let Some(text) = tree.first_text() {
        spec.font_family = text.font_family.clone();
        spec.font_weight = text.font_weight;
        spec.font_size = text.font_size;
        spec.text_color = text.text_color;
    } else if let Some(vector) = tree.iter().find(|n| n.kind == NodeKind::Vector) {
        spec.text_color = vector.color;
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("invalid character {found:?} at byte {offset}")]
    InvalidCharacter { offset: usize, found: char },
    #[error("schema violation at {key}: {reason}")]
    SchemaViolation { key: String, reason: String },
}

impl ValidationError {
    fn schema(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ValidationError::SchemaViolation { key: key.into(), reason: reason.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    Flat,
    Nested,
}

impl Schema {
    pub fn as_str(self) -> &'static str {
        match self {
            Schema::Flat => "flat",
            Schema::Nested => "nested",
        }
    }
}

impl std::str::FromStr for Schema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "flat" => Ok(Schema::Flat),
            "nested" => Ok(Schema::Nested),
            _ => Err(format!("unknown schema {s:?}; expected flat or nested")),
        }
    }
}

impl std::fmt::Display for Schema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A document that passed [`validate_json`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedDocument {
    pub value: Value,
    pub schema: Schema,
    pub warnings: Vec<String>,
    name: FullComponentName,
}

impl ValidatedDocument {
    pub fn name(&self) -> &FullComponentName {
        &self.name
    }

    pub fn kind(&self) -> ComponentKind {
        self.name.kind
    }

    pub fn style(&self) -> StyleTheme {
        self.name.style
    }

    /// Top-level keys.
    pub fn keys(&self) -> BTreeSet<String> {
        self.value.as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default()
    }

    /// Flat view of the document (nested trees go through [`flatten`]).
    pub fn to_flat(&self) -> FlatComponentSpec {
        match self.schema {
            Schema::Flat => serde_json::from_value(self.value.clone()).expect("checked by validator"),
            Schema::Nested => flatten(&self.to_nested().expect("nested")).expect("checked by validator"),
        }
    }

    pub fn to_nested(&self) -> Option<NestedNode> {
        match self.schema {
            Schema::Nested => Some(serde_json::from_value(self.value.clone()).expect("checked by validator")),
            Schema::Flat => None,
        }
    }
}

fn scan_characters(raw: &str) -> Result<(), ValidationError> {
    let mut in_string = false;
    let mut escaped = false;
    for (offset, c) in raw.char_indices() {
        let bad = match c {
            '\u{feff}' | '\u{7f}' => true,
            '\t' | '\n' | '\r' => in_string,
            c if (c as u32) < 0x20 => true,
            _ => false,
        };
        if bad {
            return Err(ValidationError::InvalidCharacter { offset, found: c });
        }
        if in_string {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_string = false,
                _ => {}
            }
        } else if c == '"' {
            in_string = true;
        }
    }
    Ok(())
}

fn byte_offset(raw: &str, line: usize, column: usize) -> usize {
    let line_start: usize = raw.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(raw.len())
}

/// Validates raw bytes; invalid UTF-8 is reported as an invalid character.
pub fn validate_json_bytes(raw: &[u8]) -> Result<ValidatedDocument, ValidationError> {
    match std::str::from_utf8(raw) {
        Ok(s) => validate_json(s),
        Err(e) => {
            Err(ValidationError::InvalidCharacter { offset: e.valid_up_to(), found: char::REPLACEMENT_CHARACTER })
        }
    }
}

/// Strict parse plus schema check against the flat or nested vocabulary.
/// A top-level `kind` key selects the nested schema.
pub fn validate_json(raw: &str) -> Result<ValidatedDocument, ValidationError> {
    scan_characters(raw)?;
    let value: Value = serde_json::from_str(raw).map_err(|e| ValidationError::Syntax {
        offset: byte_offset(raw, e.line(), e.column()),
        message: e.to_string(),
    })?;
    validate_value(value)
}

/// Schema check of an already-parsed document.
/// Nested documents carry a top-level `kind` or `children` key; anything else is flat.
pub fn detect_schema(obj: &serde_json::Map<String, Value>) -> Schema {
    if obj.contains_key("kind") || obj.contains_key("children") {
        Schema::Nested
    } else {
        Schema::Flat
    }
}

pub fn validate_value(value: Value) -> Result<ValidatedDocument, ValidationError> {
    let obj = value.as_object().ok_or_else(|| ValidationError::schema("$", "top level must be an object"))?;
    let mut warnings = Vec::new();
    let (schema, name) = if detect_schema(obj) == Schema::Nested {
        let name = check_node(obj, "", true, &mut warnings)?;
        let tree: NestedNode =
            serde_json::from_value(value.clone()).map_err(|e| ValidationError::schema("$", e.to_string()))?;
        tree.validate().map_err(|e| ValidationError::schema("$", e.to_string()))?;
        (Schema::Nested, name.expect("root name checked"))
    } else {
        let name = check_flat(obj, &mut warnings)?;
        let spec: FlatComponentSpec =
            serde_json::from_value(value.clone()).map_err(|e| ValidationError::schema("$", e.to_string()))?;
        spec.validate().map_err(|e| ValidationError::schema("$", e.to_string()))?;
        (Schema::Flat, name)
    };
    Ok(ValidatedDocument { value, schema, warnings, name })
}

type Object = serde_json::Map<String, Value>;

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn check_number(v: &Value, path: &str, positive: bool) -> Result<(), ValidationError> {
    let n = v.as_f64().ok_or_else(|| ValidationError::schema(path, "expected a number"))?;
    if positive && n <= 0.0 {
        return Err(ValidationError::schema(path, "must be > 0"));
    }
    if n < 0.0 {
        return Err(ValidationError::schema(path, "must be >= 0"));
    }
    Ok(())
}

fn check_color(v: &Value, path: &str) -> Result<(), ValidationError> {
    serde_json::from_value::<ColorValue>(v.clone())
        .map(|_| ())
        .map_err(|e| ValidationError::schema(path, format!("invalid color: {e}")))
}

fn check_effect(v: &Value, path: &str) -> Result<(), ValidationError> {
    let obj = v.as_object().ok_or_else(|| ValidationError::schema(path, "expected an object"))?;
    match obj.get("effect_name").and_then(Value::as_str) {
        Some(n) if !n.trim().is_empty() => {}
        Some(_) => return Err(ValidationError::schema(join(path, "effect_name"), "must be nonempty")),
        None => return Err(ValidationError::schema(join(path, "effect_name"), "missing required key")),
    }
    let color = obj
        .get("effect_color")
        .ok_or_else(|| ValidationError::schema(join(path, "effect_color"), "missing required key"))?;
    check_color(color, &join(path, "effect_color"))
}

fn check_variants(v: &Value, path: &str) -> Result<(), ValidationError> {
    let obj = v.as_object().ok_or_else(|| ValidationError::schema(path, "expected an object"))?;
    for (k, val) in obj {
        if !val.is_string() {
            return Err(ValidationError::schema(join(path, k), "expected a string"));
        }
    }
    Ok(())
}

fn check_string(v: &Value, path: &str) -> Result<(), ValidationError> {
    v.as_str().map(|_| ()).ok_or_else(|| ValidationError::schema(path, "expected a string"))
}

/// Checks one shared key; returns false when the key is not shared vocabulary.
fn check_common(key: &str, v: &Value, path: &str) -> Result<bool, ValidationError> {
    match key {
        "variant_properties" => check_variants(v, path)?,
        "color" | "stroke_color" | "text_color" => check_color(v, path)?,
        "stroke_weight" | "font_weight" | "height" | "width" | "border_radius" => check_number(v, path, false)?,
        "font_size" => check_number(v, path, true)?,
        "x" | "y" => {
            v.as_f64().ok_or_else(|| ValidationError::schema(path, "expected a number"))?;
        }
        "font_family" | "characters" => check_string(v, path)?,
        "effect" => check_effect(v, path)?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn check_name(obj: &Object, path: &str) -> Result<FullComponentName, ValidationError> {
    let raw =
        obj.get("name").and_then(Value::as_str).ok_or_else(|| ValidationError::schema(path, "expected a string"))?;
    parse_full_name(raw).map_err(|e| ValidationError::schema(path, e.to_string()))
}

fn check_flat(obj: &Object, warnings: &mut Vec<String>) -> Result<FullComponentName, ValidationError> {
    for key in FLAT_REQUIRED_KEYS {
        if !obj.contains_key(*key) {
            return Err(ValidationError::schema(*key, "missing required key"));
        }
    }
    let name = check_name(obj, "name")?;
    for (key, v) in obj {
        if key == "name" {
            continue;
        }
        if !FLAT_KEYS.contains(&key.as_str()) || !check_common(key, v, key)? {
            warnings.push(format!("unknown key {key:?}"));
        }
    }
    Ok(name)
}

fn check_node(
    obj: &Object,
    prefix: &str,
    is_root: bool,
    warnings: &mut Vec<String>,
) -> Result<Option<FullComponentName>, ValidationError> {
    for key in NESTED_REQUIRED_KEYS {
        if !obj.contains_key(*key) {
            return Err(ValidationError::schema(join(prefix, key), "missing required key"));
        }
    }
    let kind_path = join(prefix, "kind");
    let kind: NodeKind = serde_json::from_value(obj["kind"].clone())
        .map_err(|_| ValidationError::schema(&kind_path, "expected one of frame, auto_layout, group, text, vector"))?;
    let name_path = join(prefix, "name");
    let name = if is_root {
        Some(check_name(obj, &name_path)?)
    } else {
        check_string(&obj["name"], &name_path)?;
        None
    };
    for (key, v) in obj {
        let path = join(prefix, key);
        match key.as_str() {
            "kind" | "name" => {}
            "children" => {
                let children = v.as_array().ok_or_else(|| ValidationError::schema(&path, "expected an array"))?;
                if !kind.is_grouping() && !children.is_empty() {
                    return Err(ValidationError::schema(&path, format!("{kind} nodes cannot have children")));
                }
                for (i, child) in children.iter().enumerate() {
                    let child_path = format!("{path}[{i}]");
                    let child_obj =
                        child.as_object().ok_or_else(|| ValidationError::schema(&child_path, "expected an object"))?;
                    check_node(child_obj, &child_path, false, warnings)?;
                }
            }
            _ => {
                if !NESTED_KEYS.contains(&key.as_str()) || !check_common(key, v, &path)? {
                    warnings.push(format!("unknown key {path:?}"));
                }
            }
        }
    }
    Ok(name)
}

/// Node-creation operation understood by the plugin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PluginOp {
    CreateFrame,
    CreateText,
    CreateRectangle,
}

/// One command of the plugin payload. Coordinates are relative to the parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PluginCommand {
    pub op: PluginOp,
    pub parent: Option<usize>,
    pub name: String,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub autolayout: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<ColorValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stroke: Option<ColorValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stroke_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect: Option<EffectSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characters: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_size: Option<f64>,
}

/// Ordered, parent-linked command list; serializes as a bare JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PluginInstruction(pub Vec<PluginCommand>);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstructionError {
    #[error("instruction payload: {0}")]
    Malformed(String),
    #[error("command {index}: parent {parent} does not precede it")]
    ForwardParent { index: usize, parent: usize },
    #[error("command {index}: parent {parent} is not a frame")]
    LeafParent { index: usize, parent: usize },
    #[error("command {index}: only the first command may be a root")]
    ExtraRoot { index: usize },
}

impl PluginInstruction {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn commands(&self) -> &[PluginCommand] {
        &self.0
    }

    /// Parses and checks a wire payload.
    pub fn from_value(value: Value) -> Result<Self, InstructionError> {
        let payload: PluginInstruction =
            serde_json::from_value(value).map_err(|e| InstructionError::Malformed(e.to_string()))?;
        payload.check()?;
        Ok(payload)
    }

    /// Every parent precedes its child, is a frame, and only command 0 is a root.
    pub fn check(&self) -> Result<(), InstructionError> {
        if self.0.is_empty() {
            return Err(InstructionError::Malformed("empty payload".into()));
        }
        for (index, cmd) in self.0.iter().enumerate() {
            match cmd.parent {
                None if index > 0 => return Err(InstructionError::ExtraRoot { index }),
                None => {}
                Some(parent) if parent >= index => return Err(InstructionError::ForwardParent { index, parent }),
                Some(parent) if self.0[parent].op != PluginOp::CreateFrame => {
                    return Err(InstructionError::LeafParent { index, parent })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

/// Pre-order walk emitting one command per node.
pub fn map_to_figma(tree: &NestedNode) -> PluginInstruction {
    fn walk(node: &NestedNode, parent: Option<(usize, f64, f64)>, out: &mut Vec<PluginCommand>) {
        let (parent_index, px, py) = match parent {
            Some((i, x, y)) => (Some(i), x, y),
            None => (None, node.x, node.y),
        };
        let op = match node.kind {
            NodeKind::Frame | NodeKind::AutoLayout | NodeKind::Group => PluginOp::CreateFrame,
            NodeKind::Text => PluginOp::CreateText,
            NodeKind::Vector => PluginOp::CreateRectangle,
        };
        let text = node.kind == NodeKind::Text;
        let cmd = PluginCommand {
            op,
            parent: parent_index,
            name: node.name.clone(),
            x: round_px(node.x - px),
            y: round_px(node.y - py),
            width: node.width,
            height: node.height,
            autolayout: (op == PluginOp::CreateFrame).then_some(node.kind == NodeKind::AutoLayout),
            fill: if text { node.text_color } else { node.color },
            stroke: node.stroke_color,
            stroke_weight: node.stroke_weight,
            corner_radius: node.border_radius,
            effect: node.effect.clone(),
            characters: if text { Some(node.characters.clone().unwrap_or_else(|| node.name.clone())) } else { None },
            font_family: node.font_family.clone(),
            font_weight: node.font_weight,
            font_size: node.font_size,
        };
        let index = out.len();
        out.push(cmd);
        for child in &node.children {
            walk(child, Some((index, node.x, node.y)), out);
        }
    }
    let mut out = Vec::with_capacity(tree.node_count());
    walk(tree, None, &mut out);
    PluginInstruction(out)
}
