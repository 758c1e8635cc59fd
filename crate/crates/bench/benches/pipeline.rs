use std::hint::black_box;

use cogen_core::emitter::{emit_flat, emit_nested, validate_json, StylePresetTable};
use cogen_core::eval::{bleu, rouge_l};
use cogen_core::parser::parse_intent;
use cogen_core::synth::{synthesize_prompt, synthetic_corpus};
use cogen_core::{ComponentIntent, ComponentKind, StyleTheme};
use criterion::{criterion_group, criterion_main, Criterion};

const PROMPT: &str = "generate a professional button with a size of small";

fn parsing(c: &mut Criterion) {
    c.bench_function("parse_intent", |b| b.iter(|| parse_intent(black_box(PROMPT)).unwrap()));
    let specs = synthetic_corpus(64, 1, StylePresetTable::builtin());
    c.bench_function("synthesize_prompt x64", |b| {
        b.iter(|| specs.iter().enumerate().map(|(i, s)| synthesize_prompt(s, i as u64).len()).sum::<usize>())
    });
}

fn emission(c: &mut Criterion) {
    let presets = StylePresetTable::builtin();
    let intent = ComponentIntent::new(ComponentKind::MenuList, StyleTheme::Playful);
    c.bench_function("emit_flat", |b| b.iter(|| emit_flat(black_box(&intent), presets)));
    c.bench_function("emit_nested", |b| b.iter(|| emit_nested(black_box(&intent), presets)));
    let flat = emit_flat(&intent, presets).to_canonical_json();
    let nested = emit_nested(&intent, presets).to_canonical_json();
    c.bench_function("validate_json flat", |b| b.iter(|| validate_json(black_box(&flat)).unwrap()));
    c.bench_function("validate_json nested", |b| b.iter(|| validate_json(black_box(&nested)).unwrap()));
}

fn metrics(c: &mut Criterion) {
    let cand = "create a trendy button with a border radius of 12 and a drop shadow";
    let reference = "generate a trendy button with a drop shadow and a border radius of 12";
    c.bench_function("bleu", |b| b.iter(|| bleu(black_box(cand), &[reference], 4).unwrap()));
    c.bench_function("rouge_l", |b| b.iter(|| rouge_l(black_box(cand), reference)));
}

criterion_group!(benches, parsing, emission, metrics);
criterion_main!(benches);
