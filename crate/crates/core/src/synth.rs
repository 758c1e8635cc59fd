//! Rule-based prompt synthesis from component specs and the paired
//! JSON/prompt dataset built from it.
//!
//! Every prompt mentions the kind and style of the spec plus up to two of its
//! optional properties (border radius, size variant, effect, stroke weight).
//! Only phrases the prompt parser understands are ever emitted.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::emitter::{flatten, StylePresetTable};
use crate::model::{
    round_px, ComponentKind, EffectSpec, FlatComponentSpec, FullComponentName, NameError, NestedNode, PropertyKey,
    SizeToken, StyleTheme, Subtype, SIZE_VARIANT_KEY,
};
use crate::parser::{Lexicon, Term};

/// Most optional properties a single prompt mentions.
pub const MAX_MENTIONS: usize = 2;

/// A sentence pattern with `{style}`, `{kind}`, `{property}` and `{property2}` slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: &'static str,
    pub pattern: &'static str,
    /// Number of property slots; the template applies to specs with exactly
    /// that many mentioned properties.
    pub mentions: usize,
}

pub const TEMPLATES: &[PromptTemplate] = &[
    PromptTemplate { id: "create-0", pattern: "Create a {style} {kind}", mentions: 0 },
    PromptTemplate { id: "generate-0", pattern: "Generate a {style} {kind}", mentions: 0 },
    PromptTemplate { id: "make-0", pattern: "Make a {style} {kind}", mentions: 0 },
    PromptTemplate { id: "need-0", pattern: "I need a {style} {kind}", mentions: 0 },
    PromptTemplate { id: "create-1", pattern: "Create a {style} {kind} with {property}", mentions: 1 },
    PromptTemplate { id: "generate-1", pattern: "Generate a {style} {kind} with {property}", mentions: 1 },
    PromptTemplate { id: "make-1", pattern: "Make a {style} {kind} that has {property}", mentions: 1 },
    PromptTemplate { id: "create-2", pattern: "Create a {style} {kind} with {property} and {property2}", mentions: 2 },
    PromptTemplate {
        id: "generate-2",
        pattern: "Generate a {style} {kind} with {property} and {property2}",
        mentions: 2,
    },
    PromptTemplate { id: "make-2", pattern: "Make a {style} {kind} that has {property} and {property2}", mentions: 2 },
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("no template applies to a spec with {0} mentioned properties")]
    NoApplicableTemplate(usize),
}

/// A property a prompt can verbalize.
#[derive(Debug, Clone, PartialEq)]
pub enum Mention {
    BorderRadius(f64),
    Size(SizeToken),
    Effect { name: String, phrase: String },
    StrokeWeight(f64),
}

impl Mention {
    pub fn key(&self) -> PropertyKey {
        match self {
            Mention::BorderRadius(_) => PropertyKey::BorderRadius,
            Mention::Size(_) => PropertyKey::Size,
            Mention::Effect { .. } => PropertyKey::Effect,
            Mention::StrokeWeight(_) => PropertyKey::StrokeWeight,
        }
    }

    fn verbalize(&self) -> String {
        match self {
            Mention::BorderRadius(v) => format!("a border radius of {}", format_number(*v)),
            Mention::StrokeWeight(v) => format!("a stroke weight of {}", format_number(*v)),
            Mention::Size(s) => format!("a size of {}", s.as_str().to_lowercase()),
            Mention::Effect { phrase, .. } => {
                let article = if phrase.starts_with(['a', 'e', 'i', 'o', 'u']) { "an" } else { "a" };
                format!("{article} {phrase}")
            }
        }
    }
}

impl fmt::Display for Mention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.verbalize())
    }
}

/// Two-decimal rendering that keeps at least one decimal: `10.0`, `10.5`, `10.25`.
pub fn format_number(v: f64) -> String {
    let s = format!("{:.2}", round_px(v));
    let trimmed = s.trim_end_matches('0');
    if trimmed.ends_with('.') {
        format!("{trimmed}0")
    } else {
        trimmed.to_string()
    }
}

/// Properties of `spec` that can be mentioned, in canonical order.
pub fn mentionable(spec: &FlatComponentSpec, lexicon: &Lexicon) -> Vec<Mention> {
    let mut out = Vec::new();
    if let Some(r) = spec.border_radius {
        out.push(Mention::BorderRadius(round_px(r)));
    }
    if let Some(size) = spec.size_variant().and_then(|s| s.parse::<SizeToken>().ok()) {
        out.push(Mention::Size(size));
    }
    if let Some(effect) = &spec.effect {
        let phrase = effect.effect_name.to_lowercase().replace('_', " ");
        if lexicon.lookup(&phrase) == Some(&Term::Effect(effect.effect_name.clone())) {
            out.push(Mention::Effect { name: effect.effect_name.clone(), phrase });
        }
    }
    if let Some(w) = spec.stroke_weight {
        out.push(Mention::StrokeWeight(round_px(w)));
    }
    out
}

/// A synthesized prompt and what it mentions.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedPrompt {
    pub text: String,
    pub template_id: &'static str,
    pub mentioned: Vec<Mention>,
}

/// Seeded prompt generator over a template inventory.
#[derive(Debug, Clone)]
pub struct Synthesizer<'a> {
    templates: &'a [PromptTemplate],
    lexicon: &'a Lexicon,
}

impl Default for Synthesizer<'static> {
    fn default() -> Self {
        Synthesizer { templates: TEMPLATES, lexicon: Lexicon::builtin() }
    }
}

impl<'a> Synthesizer<'a> {
    pub fn new(templates: &'a [PromptTemplate], lexicon: &'a Lexicon) -> Self {
        Synthesizer { templates, lexicon }
    }

    pub fn synthesize(&self, spec: &FlatComponentSpec, seed: u64) -> Result<SynthesizedPrompt, SynthError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mentions = mentionable(spec, self.lexicon);
        mentions.shuffle(&mut rng);
        mentions.truncate(MAX_MENTIONS);

        let applicable: Vec<&PromptTemplate> = self.templates.iter().filter(|t| t.mentions == mentions.len()).collect();
        if applicable.is_empty() {
            return Err(SynthError::NoApplicableTemplate(mentions.len()));
        }
        let template = applicable[rng.random_range(0..applicable.len())];

        let mut text = template
            .pattern
            .replace("{style}", spec.name.style.as_str())
            .replace("{kind}", spec.name.kind.display_name());
        if let Some(m) = mentions.first() {
            text = text.replace("{property}", &m.verbalize());
        }
        if let Some(m) = mentions.get(1) {
            text = text.replace("{property2}", &m.verbalize());
        }
        Ok(SynthesizedPrompt { text, template_id: template.id, mentioned: mentions })
    }
}

/// Prompt for `spec` from the shipped templates. Deterministic in `seed`.
pub fn synthesize_prompt(spec: &FlatComponentSpec, seed: u64) -> String {
    Synthesizer::default().synthesize(spec, seed).expect("shipped templates cover 0..=2 mentions").text
}

/// A spec in either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecDocument {
    Flat(FlatComponentSpec),
    Nested(NestedNode),
}

impl SpecDocument {
    pub fn to_value(&self) -> Value {
        match self {
            SpecDocument::Flat(s) => s.to_value(),
            SpecDocument::Nested(n) => n.to_value(),
        }
    }

    pub fn flat_view(&self) -> Result<FlatComponentSpec, NameError> {
        match self {
            SpecDocument::Flat(s) => Ok(s.clone()),
            SpecDocument::Nested(n) => flatten(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// One JSONL line: `{"json": ..., "prompt": ..., "split": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub json: Value,
    pub prompt: String,
    pub split: Split,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("no specs to build a dataset from")]
    EmptyInput,
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    BadRatios([f64; 3]),
    #[error("spec {index}: {source}")]
    InvalidSpec { index: usize, source: NameError },
    #[error("variants per spec must be at least 1")]
    NoVariants,
    #[error("dataset io: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self, DatasetError> {
        let all = [train, val, test];
        if all.iter().any(|r| !r.is_finite() || *r < 0.0) || (train + val + test - 1.0).abs() > 1e-9 {
            return Err(DatasetError::BadRatios(all));
        }
        Ok(SplitRatios { train, val, test })
    }

    /// Record counts for `n` records; test takes the remainder.
    pub fn counts(&self, n: usize) -> (usize, usize, usize) {
        let train = ((n as f64) * self.train).round() as usize;
        let train = train.min(n);
        let val = (((n as f64) * self.val).round() as usize).min(n - train);
        (train, val, n - train - val)
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios { train: 0.8, val: 0.1, test: 0.1 }
    }
}

// keeps the shuffle stream independent of the per-record prompt seeds
const SHUFFLE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Pairs every spec with `variants_per_spec` synthesized prompts, shuffles the
/// records by `seed` and assigns train/val/test splits in that order.
pub fn build_dataset(
    specs: &[SpecDocument],
    seed: u64,
    ratios: SplitRatios,
    variants_per_spec: usize,
) -> Result<Vec<DatasetRecord>, DatasetError> {
    if specs.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    if variants_per_spec == 0 {
        return Err(DatasetError::NoVariants);
    }
    let synth = Synthesizer::default();
    let mut prompt_seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(specs.len() * variants_per_spec);
    for (index, doc) in specs.iter().enumerate() {
        let flat = doc.flat_view().map_err(|source| DatasetError::InvalidSpec { index, source })?;
        let json = doc.to_value();
        for _ in 0..variants_per_spec {
            let prompt =
                synth.synthesize(&flat, prompt_seeds.random()).expect("shipped templates cover 0..=2 mentions").text;
            records.push(DatasetRecord { json: json.clone(), prompt, split: Split::Train });
        }
    }

    records.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ SHUFFLE_SALT));
    let (train, val, _) = ratios.counts(records.len());
    for (i, record) in records.iter_mut().enumerate() {
        record.split = if i < train {
            Split::Train
        } else if i < train + val {
            Split::Val
        } else {
            Split::Test
        };
    }
    Ok(records)
}

pub fn write_jsonl<W: Write>(records: &[DatasetRecord], mut out: W) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn to_jsonl(records: &[DatasetRecord]) -> String {
    let mut buf = Vec::new();
    write_jsonl(records, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<DatasetRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record =
            serde_json::from_str(&line).map_err(|e| DatasetError::Line { line: i + 1, message: e.to_string() })?;
        out.push(record);
    }
    Ok(out)
}

pub fn load_jsonl(path: &Path) -> Result<Vec<DatasetRecord>, DatasetError> {
    read_jsonl(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// Random but valid flat specs built on the preset table: every (kind, style)
/// pair is reachable and each optional mentionable property is toggled at random.
pub fn synthetic_corpus(n: usize, seed: u64, presets: &StylePresetTable) -> Vec<FlatComponentSpec> {
    const SUBTYPES: [Option<&str>; 4] = [None, Some("Default"), Some("Light"), Some("Dark")];
    const EFFECTS: [&str; 4] = ["DROP_SHADOW", "INNER_SHADOW", "LAYER_BLUR", "BACKGROUND_BLUR"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let kind = ComponentKind::ALL[rng.random_range(0..ComponentKind::ALL.len())];
            let style = StyleTheme::ALL[rng.random_range(0..StyleTheme::ALL.len())];
            let subtype =
                SUBTYPES[rng.random_range(0..SUBTYPES.len())].map(|s| Subtype::new(s).expect("valid subtype"));
            let mut spec = presets.get(kind, style).clone();
            spec.name = FullComponentName::new(style, kind, subtype);
            spec.border_radius = rng.random_bool(0.5).then(|| f64::from(rng.random_range(0u32..4000)) / 100.0);
            if rng.random_bool(0.5) {
                let size = if rng.random_bool(0.5) { SizeToken::Small } else { SizeToken::Large };
                spec.width *= size.factor();
                spec.height *= size.factor();
                spec.variant_properties.insert(SIZE_VARIANT_KEY.into(), size.as_str().into());
            }
            if rng.random_bool(0.4) {
                let name = EFFECTS[rng.random_range(0..EFFECTS.len())];
                let color =
                    spec.effect.as_ref().map(|e| e.effect_color).unwrap_or(crate::emitter::DEFAULT_EFFECT_COLOR);
                spec.effect = Some(EffectSpec { effect_name: name.into(), effect_color: color });
            } else {
                spec.effect = None;
            }
            spec.stroke_weight = rng.random_bool(0.4).then(|| f64::from(rng.random_range(0u32..800)) / 100.0);
            spec.normalized()
        })
        .collect()
}
