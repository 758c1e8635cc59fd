//! Bidirectional translation between short textual commands and
//! Figma-compatible component JSON for atomic UI components.
//!
//! The pipeline is split into stages:
//!
//! - [`model`]: component names, flat specs, nested node trees, intents
//! - [`extract`]: Figma file retrieval and flat/nested extraction
//! - [`synth`]: rule-based prompt synthesis and JSONL dataset building
//! - [`parser`]: lexicon-driven prompt parsing into a [`ComponentIntent`]
//! - [`emitter`]: preset-based JSON emission, validation, plugin instructions
//! - [`adapter`]: interchangeable text-to-text generators
//! - [`eval`]: BLEU/ROUGE, classification metrics, success-rate scoring

pub mod adapter;
pub mod emitter;
pub mod eval;
pub mod extract;
pub mod model;
pub mod parser;
pub mod synth;

pub use model::{
    parse_full_name, serialize_full_name, ColorValue, ComponentIntent, ComponentKind, EffectSpec, FlatComponentSpec,
    FullComponentName, NestedNode, NodeKind, PropertyKey, PropertyValue, SizeToken, StyleTheme, Subtype, VariantMap,
};
