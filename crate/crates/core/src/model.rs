//! Domain vocabulary shared by every stage of the pipeline.
//!
//! Components are identified by a `Style/ComponentName/Subtype` triple. Their
//! properties come in two shapes: a flat property map ([`FlatComponentSpec`])
//! and a recursive node tree ([`NestedNode`]) mirroring the Figma hierarchy.
//! Both serialize to canonical JSON with snake_case keys, lengths rounded to
//! two decimals and color channels rounded to four.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Ordered variant properties, e.g. `State=Default, Size=Large`.
pub type VariantMap = IndexMap<String, String>;

/// Variant key carrying the Small/Large size.
pub const SIZE_VARIANT_KEY: &str = "Size";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("component name is empty")]
    Empty,
    #[error("expected 2 or 3 '/'-separated parts, found {0}")]
    WrongPartCount(usize),
    #[error("empty segment in component name {0:?}")]
    EmptySegment(String),
    #[error("unknown style {0:?}")]
    UnknownStyle(String),
    #[error("unknown component kind {0:?}")]
    UnknownKind(String),
    #[error("invalid subtype {0:?}")]
    InvalidSubtype(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("{field} must be a finite number >= 0, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("font_size must be > 0, got {0}")]
    FontSize(f64),
    #[error("color channel {channel} out of range [0,1]: {value}")]
    ColorChannel { channel: char, value: f64 },
    #[error("invalid hex color {0:?}")]
    Hex(String),
    #[error("effect_name must be nonempty")]
    EmptyEffectName,
    #[error("{kind} node {name:?} is a leaf and cannot have children")]
    LeafWithChildren { kind: NodeKind, name: String },
}

fn squash(raw: &str) -> String {
    raw.chars().filter(|c| !matches!(c, ' ' | '_' | '-')).flat_map(char::to_lowercase).collect()
}

/// The six atomic component kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentKind {
    Button,
    InputField,
    IconButton,
    MenuList,
    ListItem,
    Label,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 6] = [
        ComponentKind::Button,
        ComponentKind::InputField,
        ComponentKind::IconButton,
        ComponentKind::MenuList,
        ComponentKind::ListItem,
        ComponentKind::Label,
    ];

    /// Spelling used in component-set names and prompts.
    pub fn display_name(self) -> &'static str {
        match self {
            ComponentKind::Button => "Button",
            ComponentKind::InputField => "Input field",
            ComponentKind::IconButton => "Icon button",
            ComponentKind::MenuList => "Menu list",
            ComponentKind::ListItem => "List items",
            ComponentKind::Label => "Label",
        }
    }

    /// Single-token identifier.
    pub fn ident(self) -> &'static str {
        match self {
            ComponentKind::Button => "Button",
            ComponentKind::InputField => "InputField",
            ComponentKind::IconButton => "IconButton",
            ComponentKind::MenuList => "MenuList",
            ComponentKind::ListItem => "ListItem",
            ComponentKind::Label => "Label",
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for ComponentKind {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = squash(s);
        ComponentKind::ALL
            .into_iter()
            .find(|k| {
                squash(k.display_name()) == key
                    || squash(k.ident()) == key
                    // "List items" vs "ListItem"
                    || (key.ends_with('s') && squash(k.ident()) == key[..key.len() - 1])
            })
            .ok_or_else(|| NameError::UnknownKind(s.trim().to_string()))
    }
}

/// The four style themes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StyleTheme {
    Basic,
    Trendy,
    Playful,
    Professional,
}

impl StyleTheme {
    pub const ALL: [StyleTheme; 4] =
        [StyleTheme::Basic, StyleTheme::Trendy, StyleTheme::Playful, StyleTheme::Professional];

    pub fn as_str(self) -> &'static str {
        match self {
            StyleTheme::Basic => "Basic",
            StyleTheme::Trendy => "Trendy",
            StyleTheme::Playful => "Playful",
            StyleTheme::Professional => "Professional",
        }
    }
}

impl fmt::Display for StyleTheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StyleTheme {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = squash(s);
        StyleTheme::ALL
            .into_iter()
            .find(|t| squash(t.as_str()) == key)
            .ok_or_else(|| NameError::UnknownStyle(s.trim().to_string()))
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(d)?;
                raw.parse().map_err(de::Error::custom)
            }
        }
    };
}

string_serde!(ComponentKind);
string_serde!(StyleTheme);

/// Free-text third segment of a component-set name (Light, Dark, Default, ...).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subtype(String);

impl Subtype {
    pub fn new(raw: impl AsRef<str>) -> Result<Self, NameError> {
        let trimmed = raw.as_ref().trim();
        if trimmed.is_empty() || trimmed.contains('/') {
            return Err(NameError::InvalidSubtype(raw.as_ref().to_string()));
        }
        Ok(Subtype(trimmed.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Subtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Subtype {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subtype::new(s)
    }
}

string_serde!(Subtype);

/// A parsed `Style/ComponentName/Subtype` component-set name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FullComponentName {
    pub style: StyleTheme,
    pub kind: ComponentKind,
    pub subtype: Option<Subtype>,
}

impl FullComponentName {
    pub fn new(style: StyleTheme, kind: ComponentKind, subtype: Option<Subtype>) -> Self {
        FullComponentName { style, kind, subtype }
    }
}

/// Splits a component-set name on `/`. Styles and kinds match case-insensitively.
pub fn parse_full_name(raw: &str) -> Result<FullComponentName, NameError> {
    if raw.trim().is_empty() {
        return Err(NameError::Empty);
    }
    let parts: Vec<&str> = raw.split('/').map(str::trim).collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(NameError::WrongPartCount(parts.len()));
    }
    if parts.iter().any(|p| p.is_empty()) {
        return Err(NameError::EmptySegment(raw.to_string()));
    }
    let style = parts[0].parse()?;
    let kind = parts[1].parse()?;
    let subtype = parts.get(2).map(Subtype::new).transpose()?;
    Ok(FullComponentName { style, kind, subtype })
}

pub fn serialize_full_name(name: &FullComponentName) -> String {
    name.to_string()
}

impl fmt::Display for FullComponentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.style, self.kind)?;
        if let Some(sub) = &self.subtype {
            write!(f, "/{sub}")?;
        }
        Ok(())
    }
}

impl FromStr for FullComponentName {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_full_name(s)
    }
}

string_serde!(FullComponentName);

/// Rounds a length to two decimals.
pub fn round_px(v: f64) -> f64 {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Rounds a color channel to four decimals.
pub fn round_channel(v: f64) -> f64 {
    (v * 10_000.0).round() / 10_000.0
}

fn ser_px<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_px(*v))
}

fn ser_opt_px<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_f64(round_px(*v)),
        None => s.serialize_none(),
    }
}

/// RGBA color with channels in `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorValue {
    pub r: f64,
    pub g: f64,
    pub b: f64,
    pub a: f64,
}

impl ColorValue {
    pub fn new(r: f64, g: f64, b: f64, a: f64) -> Result<Self, SpecError> {
        let c = ColorValue { r, g, b, a };
        c.validate()?;
        Ok(c)
    }

    pub fn rgb(r: f64, g: f64, b: f64) -> Result<Self, SpecError> {
        Self::new(r, g, b, 1.0)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        for (channel, value) in [('r', self.r), ('g', self.g), ('b', self.b), ('a', self.a)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SpecError::ColorChannel { channel, value });
            }
        }
        Ok(())
    }

    /// Accepts `#RGB`, `#RRGGBB` and `#RRGGBBAA` (leading `#` optional).
    pub fn from_hex(raw: &str) -> Result<Self, SpecError> {
        let bad = || SpecError::Hex(raw.to_string());
        let hex = raw.trim().trim_start_matches('#');
        if !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(bad());
        }
        let expanded: String = match hex.len() {
            3 => hex.chars().flat_map(|c| [c, c]).collect(),
            6 | 8 => hex.to_string(),
            _ => return Err(bad()),
        };
        let byte = |i: usize| -> Result<f64, SpecError> {
            u8::from_str_radix(&expanded[i..i + 2], 16).map(|b| f64::from(b) / 255.0).map_err(|_| bad())
        };
        let a = if expanded.len() == 8 { byte(6)? } else { 1.0 };
        Ok(ColorValue { r: byte(0)?, g: byte(2)?, b: byte(4)?, a })
    }

    /// `#RRGGBB`, or `#RRGGBBAA` when the color is not fully opaque.
    pub fn to_hex(&self) -> String {
        let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        let mut out = format!("#{:02X}{:02X}{:02X}", q(self.r), q(self.g), q(self.b));
        if q(self.a) != 255 {
            out.push_str(&format!("{:02X}", q(self.a)));
        }
        out
    }

    pub fn normalized(&self) -> Self {
        ColorValue {
            r: round_channel(self.r),
            g: round_channel(self.g),
            b: round_channel(self.b),
            a: round_channel(self.a),
        }
    }

    /// Channel-wise comparison at 8-bit resolution.
    pub fn approx_eq(&self, other: &ColorValue) -> bool {
        let tol = 1.0 / 255.0 + 1e-9;
        (self.r - other.r).abs() <= tol
            && (self.g - other.g).abs() <= tol
            && (self.b - other.b).abs() <= tol
            && (self.a - other.a).abs() <= tol
    }
}

impl Serialize for ColorValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let n = self.normalized();
        let mut st = s.serialize_struct("ColorValue", 5)?;
        st.serialize_field("r", &n.r)?;
        st.serialize_field("g", &n.g)?;
        st.serialize_field("b", &n.b)?;
        st.serialize_field("a", &n.a)?;
        st.serialize_field("hex", &self.to_hex())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ColorValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Hex(String),
            Channels {
                r: f64,
                g: f64,
                b: f64,
                #[serde(default = "opaque")]
                a: f64,
            },
        }
        fn opaque() -> f64 {
            1.0
        }
        match Repr::deserialize(d)? {
            Repr::Hex(h) => ColorValue::from_hex(&h).map_err(de::Error::custom),
            Repr::Channels { r, g, b, a } => ColorValue::new(r, g, b, a).map_err(de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSpec {
    pub effect_name: String,
    pub effect_color: ColorValue,
}

impl EffectSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.effect_name.trim().is_empty() {
            return Err(SpecError::EmptyEffectName);
        }
        self.effect_color.validate()
    }
}

fn check_nonneg(field: &'static str, value: f64) -> Result<(), SpecError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(SpecError::Negative { field, value })
    }
}

/// Flat property map of a single component variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatComponentSpec {
    pub name: FullComponentName,
    #[serde(default)]
    pub variant_properties: VariantMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<ColorValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stroke_color: Option<ColorValue>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_px")]
    pub stroke_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_color: Option<ColorValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_px")]
    pub font_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_px")]
    pub font_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect: Option<EffectSpec>,
    #[serde(serialize_with = "ser_px")]
    pub height: f64,
    #[serde(serialize_with = "ser_px")]
    pub width: f64,
    #[serde(serialize_with = "ser_px")]
    pub x: f64,
    #[serde(serialize_with = "ser_px")]
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_px")]
    pub border_radius: Option<f64>,
}

/// Keys a flat document may carry, in canonical order.
pub const FLAT_KEYS: &[&str] = &[
    "name",
    "variant_properties",
    "color",
    "stroke_color",
    "stroke_weight",
    "text_color",
    "font_family",
    "font_weight",
    "font_size",
    "effect",
    "height",
    "width",
    "x",
    "y",
    "border_radius",
];

/// Keys every flat document must carry.
pub const FLAT_REQUIRED_KEYS: &[&str] = &["name", "variant_properties", "height", "width", "x", "y"];

/// Keys a nested node may carry, in canonical order.
pub const NESTED_KEYS: &[&str] = &[
    "kind",
    "name",
    "variant_properties",
    "height",
    "width",
    "x",
    "y",
    "color",
    "stroke_color",
    "stroke_weight",
    "effect",
    "border_radius",
    "font_family",
    "font_weight",
    "font_size",
    "text_color",
    "characters",
    "children",
];

/// Keys every nested node must carry.
pub const NESTED_REQUIRED_KEYS: &[&str] = &["kind", "name", "height", "width", "x", "y", "children"];

impl FlatComponentSpec {
    /// An empty spec with zero geometry.
    pub fn new(name: FullComponentName) -> Self {
        FlatComponentSpec {
            name,
            variant_properties: VariantMap::new(),
            color: None,
            stroke_color: None,
            stroke_weight: None,
            text_color: None,
            font_family: None,
            font_weight: None,
            font_size: None,
            effect: None,
            height: 0.0,
            width: 0.0,
            x: 0.0,
            y: 0.0,
            border_radius: None,
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        check_nonneg("height", self.height)?;
        check_nonneg("width", self.width)?;
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err(SpecError::Negative { field: "x/y", value: f64::NAN });
        }
        if let Some(w) = self.stroke_weight {
            check_nonneg("stroke_weight", w)?;
        }
        if let Some(r) = self.border_radius {
            check_nonneg("border_radius", r)?;
        }
        if let Some(w) = self.font_weight {
            check_nonneg("font_weight", w)?;
        }
        if let Some(fs) = self.font_size {
            if !(fs.is_finite() && fs > 0.0) {
                return Err(SpecError::FontSize(fs));
            }
        }
        for c in [&self.color, &self.stroke_color, &self.text_color].into_iter().flatten() {
            c.validate()?;
        }
        if let Some(e) = &self.effect {
            e.validate()?;
        }
        Ok(())
    }

    /// The `Size` variant value, if any (case-insensitive key lookup).
    pub fn size_variant(&self) -> Option<&str> {
        self.variant_properties.iter().find(|(k, _)| k.eq_ignore_ascii_case(SIZE_VARIANT_KEY)).map(|(_, v)| v.as_str())
    }

    /// Copy with every number rounded the way serialization rounds it.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        out.color = out.color.map(|c| c.normalized());
        out.stroke_color = out.stroke_color.map(|c| c.normalized());
        out.text_color = out.text_color.map(|c| c.normalized());
        out.stroke_weight = out.stroke_weight.map(round_px);
        out.font_weight = out.font_weight.map(round_px);
        out.font_size = out.font_size.map(round_px);
        out.border_radius = out.border_radius.map(round_px);
        if let Some(e) = &mut out.effect {
            e.effect_color = e.effect_color.normalized();
        }
        out.height = round_px(out.height);
        out.width = round_px(out.width);
        out.x = round_px(out.x);
        out.y = round_px(out.y);
        out
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("flat spec serializes")
    }

    /// Compact canonical JSON.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("flat spec serializes")
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("flat spec serializes")
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, serde_json::Error> {
        serde_json::from_value(value)
    }
}

/// The five node kinds of a nested component tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Frame,
    AutoLayout,
    Group,
    Text,
    Vector,
}

impl NodeKind {
    /// Grouping kinds may carry children; text and vector nodes are leaves.
    pub fn is_grouping(self) -> bool {
        matches!(self, NodeKind::Frame | NodeKind::AutoLayout | NodeKind::Group)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Frame => "frame",
            NodeKind::AutoLayout => "auto_layout",
            NodeKind::Group => "group",
            NodeKind::Text => "text",
            NodeKind::Vector => "vector",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One node of a nested component tree.
///
/// Grouping nodes use the geometry, fill, stroke, effect and radius slots.
/// Text nodes use the font slots, `text_color` and `characters` (the text
/// content). Vector nodes use geometry and `color` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedNode {
    pub kind: NodeKind,
    pub name: String,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub variant_properties: VariantMap,
    #[serde(serialize_with = "ser_px")]
    pub height: f64,
    #[serde(serialize_with = "ser_px")]
    pub width: f64,
    #[serde(serialize_with = "ser_px")]
    pub x: f64,
    #[serde(serialize_with = "ser_px")]
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<ColorValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stroke_color: Option<ColorValue>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_px")]
    pub stroke_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect: Option<EffectSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_px")]
    pub border_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_px")]
    pub font_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_px")]
    pub font_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_color: Option<ColorValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characters: Option<String>,
    #[serde(default)]
    pub children: Vec<NestedNode>,
}

impl NestedNode {
    pub fn new(kind: NodeKind, name: impl Into<String>) -> Self {
        NestedNode {
            kind,
            name: name.into(),
            variant_properties: VariantMap::new(),
            height: 0.0,
            width: 0.0,
            x: 0.0,
            y: 0.0,
            color: None,
            stroke_color: None,
            stroke_weight: None,
            effect: None,
            border_radius: None,
            font_family: None,
            font_weight: None,
            font_size: None,
            text_color: None,
            characters: None,
            children: Vec::new(),
        }
    }

    pub fn with_geometry(mut self, x: f64, y: f64, width: f64, height: f64) -> Self {
        self.x = x;
        self.y = y;
        self.width = width;
        self.height = height;
        self
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(NestedNode::node_count).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(NestedNode::depth).max().unwrap_or(0)
    }

    /// Pre-order iteration over the tree.
    pub fn iter(&self) -> impl Iterator<Item = &NestedNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    /// First text node in document order, the root included.
    pub fn first_text(&self) -> Option<&NestedNode> {
        self.iter().find(|n| n.kind == NodeKind::Text)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        for node in self.iter() {
            if !node.kind.is_grouping() && !node.children.is_empty() {
                return Err(SpecError::LeafWithChildren { kind: node.kind, name: node.name.clone() });
            }
            check_nonneg("height", node.height)?;
            check_nonneg("width", node.width)?;
            if let Some(w) = node.stroke_weight {
                check_nonneg("stroke_weight", w)?;
            }
            if let Some(r) = node.border_radius {
                check_nonneg("border_radius", r)?;
            }
            if let Some(fs) = node.font_size {
                if !(fs.is_finite() && fs > 0.0) {
                    return Err(SpecError::FontSize(fs));
                }
            }
            for c in [&node.color, &node.stroke_color, &node.text_color].into_iter().flatten() {
                c.validate()?;
            }
            if let Some(e) = &node.effect {
                e.validate()?;
            }
        }
        Ok(())
    }

    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        out.normalize_in_place();
        out
    }

    fn normalize_in_place(&mut self) {
        self.height = round_px(self.height);
        self.width = round_px(self.width);
        self.x = round_px(self.x);
        self.y = round_px(self.y);
        self.color = self.color.map(|c| c.normalized());
        self.stroke_color = self.stroke_color.map(|c| c.normalized());
        self.text_color = self.text_color.map(|c| c.normalized());
        self.stroke_weight = self.stroke_weight.map(round_px);
        self.border_radius = self.border_radius.map(round_px);
        self.font_weight = self.font_weight.map(round_px);
        self.font_size = self.font_size.map(round_px);
        if let Some(e) = &mut self.effect {
            e.effect_color = e.effect_color.normalized();
        }
        for child in &mut self.children {
            child.normalize_in_place();
        }
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("nested node serializes")
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("nested node serializes")
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("nested node serializes")
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, serde_json::Error> {
        serde_json::from_value(value)
    }
}

/// Small/Large size requested in a prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SizeToken {
    Small,
    Large,
}

impl SizeToken {
    /// Geometry scale applied on top of a preset.
    pub fn factor(self) -> f64 {
        match self {
            SizeToken::Small => 0.75,
            SizeToken::Large => 1.25,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SizeToken::Small => "Small",
            SizeToken::Large => "Large",
        }
    }
}

impl FromStr for SizeToken {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "small" => Ok(SizeToken::Small),
            "large" => Ok(SizeToken::Large),
            other => Err(format!("unknown size {other:?}")),
        }
    }
}

/// Property names a prompt may set explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropertyKey {
    Size,
    BorderRadius,
    StrokeWeight,
    Effect,
    Color,
    StrokeColor,
    TextColor,
    FontFamily,
    FontWeight,
    FontSize,
}

impl PropertyKey {
    pub const ALL: [PropertyKey; 10] = [
        PropertyKey::Size,
        PropertyKey::BorderRadius,
        PropertyKey::StrokeWeight,
        PropertyKey::Effect,
        PropertyKey::Color,
        PropertyKey::StrokeColor,
        PropertyKey::TextColor,
        PropertyKey::FontFamily,
        PropertyKey::FontWeight,
        PropertyKey::FontSize,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PropertyKey::Size => "size",
            PropertyKey::BorderRadius => "border_radius",
            PropertyKey::StrokeWeight => "stroke_weight",
            PropertyKey::Effect => "effect",
            PropertyKey::Color => "color",
            PropertyKey::StrokeColor => "stroke_color",
            PropertyKey::TextColor => "text_color",
            PropertyKey::FontFamily => "font_family",
            PropertyKey::FontWeight => "font_weight",
            PropertyKey::FontSize => "font_size",
        }
    }

    /// Whether the property takes a number bound from the prompt.
    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            PropertyKey::BorderRadius | PropertyKey::StrokeWeight | PropertyKey::FontWeight | PropertyKey::FontSize
        )
    }

    pub fn is_color(self) -> bool {
        matches!(self, PropertyKey::Color | PropertyKey::StrokeColor | PropertyKey::TextColor)
    }
}

impl fmt::Display for PropertyKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropertyKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PropertyKey::ALL.into_iter().find(|k| k.as_str() == s.trim()).ok_or_else(|| format!("unknown property {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue {
    Size(SizeToken),
    Number(f64),
    Effect(String),
    Color(ColorValue),
    Text(String),
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Size(s) => f.write_str(s.as_str()),
            PropertyValue::Number(n) => write!(f, "{n}"),
            PropertyValue::Effect(e) => f.write_str(e),
            PropertyValue::Color(c) => f.write_str(&c.to_hex()),
            PropertyValue::Text(t) => f.write_str(t),
        }
    }
}

/// What a prompt asks for.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentIntent {
    pub kind: ComponentKind,
    pub style: StyleTheme,
    pub subtype: Option<Subtype>,
    pub explicit_properties: BTreeMap<PropertyKey, PropertyValue>,
}

impl ComponentIntent {
    pub fn new(kind: ComponentKind, style: StyleTheme) -> Self {
        ComponentIntent { kind, style, subtype: None, explicit_properties: BTreeMap::new() }
    }

    pub fn with(mut self, key: PropertyKey, value: PropertyValue) -> Self {
        self.explicit_properties.insert(key, value);
        self
    }

    pub fn property(&self, key: PropertyKey) -> Option<&PropertyValue> {
        self.explicit_properties.get(&key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_three_part_name() {
        let name = parse_full_name("Professional/Button/Default").unwrap();
        assert_eq!(name.style, StyleTheme::Professional);
        assert_eq!(name.kind, ComponentKind::Button);
        assert_eq!(name.subtype.as_ref().map(Subtype::as_str), Some("Default"));
    }

    #[test]
    fn parses_two_part_name() {
        let name = parse_full_name("Basic/Label").unwrap();
        assert_eq!(name, FullComponentName::new(StyleTheme::Basic, ComponentKind::Label, None));
    }

    #[test]
    fn rejects_unknown_style_and_kind() {
        assert_eq!(parse_full_name("Fancy/Button/Default"), Err(NameError::UnknownStyle("Fancy".into())));
        assert!(matches!(parse_full_name("Basic/Slider"), Err(NameError::UnknownKind(_))));
    }

    #[test]
    fn rejects_wrong_part_counts() {
        assert_eq!(parse_full_name("Basic"), Err(NameError::WrongPartCount(1)));
        assert_eq!(parse_full_name("Basic/Button/Dark/Extra"), Err(NameError::WrongPartCount(4)));
        assert_eq!(parse_full_name("  "), Err(NameError::Empty));
        assert!(matches!(parse_full_name("Basic/Button/"), Err(NameError::EmptySegment(_))));
    }

    #[test]
    fn trims_and_matches_case_insensitively() {
        let name = parse_full_name(" trendy / input FIELD / Dark ").unwrap();
        assert_eq!(name.to_string(), "Trendy/Input field/Dark");
        assert_eq!(parse_full_name("Basic/ListItem").unwrap().kind, ComponentKind::ListItem);
        assert_eq!(parse_full_name("Basic/List items").unwrap().kind, ComponentKind::ListItem);
    }

    #[test]
    fn serializes_display_spellings() {
        let name = FullComponentName::new(StyleTheme::Trendy, ComponentKind::InputField, None);
        assert_eq!(serialize_full_name(&name), "Trendy/Input field");
        let name = FullComponentName::new(
            StyleTheme::Professional,
            ComponentKind::Button,
            Some(Subtype::new("Default").unwrap()),
        );
        assert_eq!(serialize_full_name(&name), "Professional/Button/Default");
    }

    #[test]
    fn full_grid_round_trips() {
        for style in StyleTheme::ALL {
            for kind in ComponentKind::ALL {
                for sub in [None, Some("Default"), Some("Light"), Some("Dark")] {
                    let name = FullComponentName::new(style, kind, sub.map(|s| Subtype::new(s).unwrap()));
                    assert_eq!(parse_full_name(&serialize_full_name(&name)).unwrap(), name);
                }
            }
        }
    }

    #[test]
    fn hex_round_trip() {
        let c = ColorValue::from_hex("#2563EB").unwrap();
        assert_eq!(c.to_hex(), "#2563EB");
        assert_eq!(ColorValue::from_hex("#fff").unwrap().to_hex(), "#FFFFFF");
        let translucent = ColorValue::from_hex("#00000040").unwrap();
        assert_eq!(translucent.to_hex(), "#00000040");
        assert!(ColorValue::from_hex("#12345").is_err());
        assert!(ColorValue::from_hex("#GGGGGG").is_err());
    }

    #[test]
    fn color_channel_range_enforced() {
        assert!(ColorValue::new(1.2, 0.0, 0.0, 1.0).is_err());
        assert!(serde_json::from_str::<ColorValue>(r#"{"r":0.5,"g":-0.1,"b":0}"#).is_err());
        let c: ColorValue = serde_json::from_str(r#"{"r":0.5,"g":0.1,"b":0}"#).unwrap();
        assert_eq!(c.a, 1.0);
        let c: ColorValue = serde_json::from_str(r##""#FF0000""##).unwrap();
        assert_eq!(c.r, 1.0);
    }

    #[test]
    fn color_serializes_with_hex() {
        let c = ColorValue::rgb(1.0, 0.0, 0.0).unwrap();
        assert_eq!(serde_json::to_string(&c).unwrap(), r##"{"r":1.0,"g":0.0,"b":0.0,"a":1.0,"hex":"#FF0000"}"##);
    }

    #[test]
    fn flat_serialization_emits_only_vocabulary() {
        let mut spec = FlatComponentSpec::new(parse_full_name("Basic/Button/Default").unwrap());
        spec.border_radius = Some(10.0);
        spec.width = 120.123;
        let v = spec.to_value();
        let obj = v.as_object().unwrap();
        for key in obj.keys() {
            assert!(FLAT_KEYS.contains(&key.as_str()), "{key}");
        }
        assert_eq!(obj["width"], serde_json::json!(120.12));
        assert_eq!(obj["name"], "Basic/Button/Default");
        assert!(!obj.contains_key("effect"));
    }

    #[test]
    fn validate_flags_bad_geometry() {
        let mut spec = FlatComponentSpec::new(parse_full_name("Basic/Button").unwrap());
        spec.height = -1.0;
        assert!(spec.validate().is_err());
        spec.height = 1.0;
        spec.font_size = Some(0.0);
        assert!(matches!(spec.validate(), Err(SpecError::FontSize(_))));
    }

    #[test]
    fn leaf_with_children_is_invalid() {
        let mut text = NestedNode::new(NodeKind::Text, "t");
        text.children.push(NestedNode::new(NodeKind::Vector, "v"));
        assert!(matches!(text.validate(), Err(SpecError::LeafWithChildren { .. })));
    }

    #[test]
    fn preorder_iteration() {
        let mut root = NestedNode::new(NodeKind::Frame, "root");
        let mut a = NestedNode::new(NodeKind::Group, "a");
        a.children.push(NestedNode::new(NodeKind::Text, "a1"));
        root.children.push(a);
        root.children.push(NestedNode::new(NodeKind::Vector, "b"));
        let names: Vec<_> = root.iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, ["root", "a", "a1", "b"]);
        assert_eq!(root.node_count(), 4);
        assert_eq!(root.depth(), 3);
    }

    fn arb_px() -> impl Strategy<Value = f64> {
        (0u32..100_000).prop_map(|v| f64::from(v) / 100.0)
    }

    fn arb_color() -> impl Strategy<Value = ColorValue> {
        (0u8..=255, 0u8..=255, 0u8..=255, 0u8..=255).prop_map(|(r, g, b, a)| {
            ColorValue::new(f64::from(r) / 255.0, f64::from(g) / 255.0, f64::from(b) / 255.0, f64::from(a) / 255.0)
                .unwrap()
        })
    }

    fn arb_name() -> impl Strategy<Value = FullComponentName> {
        (
            prop::sample::select(StyleTheme::ALL.to_vec()),
            prop::sample::select(ComponentKind::ALL.to_vec()),
            prop::option::of("[A-Za-z][A-Za-z ]{0,8}[A-Za-z]"),
        )
            .prop_map(|(s, k, sub)| FullComponentName::new(s, k, sub.map(|x| Subtype::new(x).unwrap())))
    }

    fn arb_flat() -> impl Strategy<Value = FlatComponentSpec> {
        (
            arb_name(),
            prop::option::of(arb_color()),
            prop::option::of(arb_color()),
            prop::option::of(arb_px()),
            prop::option::of("[A-Z][a-z]{2,8}"),
            prop::option::of(("[A-Z_]{3,12}", arb_color())),
            (arb_px(), arb_px(), arb_px(), arb_px()),
            prop::option::of(arb_px()),
        )
            .prop_map(|(name, color, text_color, stroke, font, effect, geo, radius)| {
                let mut s = FlatComponentSpec::new(name);
                s.variant_properties.insert("State".into(), "Default".into());
                s.color = color;
                s.text_color = text_color;
                s.stroke_weight = stroke;
                s.font_family = font;
                s.font_size = Some(14.0);
                s.effect = effect.map(|(n, c)| EffectSpec { effect_name: n, effect_color: c });
                (s.height, s.width, s.x, s.y) = geo;
                s.border_radius = radius;
                s
            })
    }

    proptest! {
        #[test]
        fn flat_json_round_trip(spec in arb_flat()) {
            let json = spec.to_canonical_json();
            let back: FlatComponentSpec = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back.normalized(), spec.normalized());
            prop_assert_eq!(back.to_canonical_json(), json);
        }

        #[test]
        fn hex_within_one_step(c in arb_color()) {
            let back = ColorValue::from_hex(&c.to_hex()).unwrap();
            prop_assert!(back.approx_eq(&c));
        }

        #[test]
        fn name_round_trip(name in arb_name()) {
            prop_assert_eq!(parse_full_name(&serialize_full_name(&name)).unwrap(), name);
        }

        #[test]
        fn nested_round_trip_preserves_count(width in 1usize..5, depth in 1usize..4) {
            fn build(depth: usize, width: usize) -> NestedNode {
                let mut n = NestedNode::new(NodeKind::Frame, format!("f{depth}"));
                if depth == 0 {
                    return NestedNode::new(NodeKind::Text, "leaf");
                }
                for _ in 0..width {
                    n.children.push(build(depth - 1, width));
                }
                n
            }
            let tree = build(depth, width);
            let back: NestedNode = serde_json::from_str(&tree.to_canonical_json()).unwrap();
            prop_assert_eq!(back.node_count(), tree.node_count());
            prop_assert_eq!(back, tree);
        }
    }
}
