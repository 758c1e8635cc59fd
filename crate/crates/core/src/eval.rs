//! Evaluation metrics and protocols: BLEU, ROUGE-1/2/L, component-name
//! classification, subset sweeps and the four-criterion success rate.
//!
//! All text metrics share the prompt tokenizer ([`token_texts`]).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapter::{Adapter, Direction, GenerationRequest};
use crate::emitter::{detect_schema, validate_json, validate_value, Schema, ValidatedDocument};
use crate::model::{
    round_px, ComponentKind, FlatComponentSpec, PropertyKey, PropertyValue, FLAT_REQUIRED_KEYS, NESTED_REQUIRED_KEYS,
};
use crate::parser::{token_texts, Lexicon, ParseError};
use crate::synth::DatasetRecord;

/// Floor for zero n-gram precisions.
pub const BLEU_EPSILON: f64 = 1e-9;
pub const DEFAULT_MAX_N: usize = 4;
pub const DEFAULT_SIZES: [usize; 5] = [100, 200, 300, 400, 500];
pub const SUITE_SIZE: usize = 5;

const SMOOTHING: &str = "epsilon 1e-9 floor on zero precisions";
const AVERAGING: &str = "weighted";
const NONE_CLASS: &str = "none";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("metric input is empty")]
    EmptyInput,
    #[error("dataset has {available} records but {needed} are required")]
    InsufficientData { needed: usize, available: usize },
    #[error("subset sizes must be positive and strictly ascending, got {0:?}")]
    BadSizes(Vec<usize>),
    #[error("prompt cannot be parsed: {0}")]
    UnparseablePrompt(#[from] ParseError),
    #[error("prompt suite must hold exactly {SUITE_SIZE} prompts per kind: {0}")]
    WrongSuiteShape(String),
    #[error("dataset record {index} is not a valid component document: {message}")]
    BadRecord { index: usize, message: String },
}

fn ngrams<T: Eq + Hash + Clone>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped matches and candidate n-gram total for one order.
fn clipped(candidate: &[String], references: &[Vec<String>], n: usize) -> (usize, usize) {
    let cand = ngrams(candidate, n);
    let refs: Vec<_> = references.iter().map(|r| ngrams(r, n)).collect();
    let matched =
        cand.iter().map(|(g, &c)| c.min(refs.iter().map(|r| r.get(g).copied().unwrap_or(0)).max().unwrap_or(0))).sum();
    (matched, candidate.len().saturating_sub(n - 1))
}

/// Reference length closest to `c`; ties go to the shorter reference.
fn closest_ref_len(c: usize, references: &[Vec<String>]) -> usize {
    references.iter().map(Vec::len).min_by_key(|&r| (r.abs_diff(c), r)).unwrap_or(0)
}

fn combine(matches: &[usize], totals: &[usize], c: usize, r: usize) -> f64 {
    let log_mean = matches
        .iter()
        .zip(totals)
        .map(|(&m, &t)| {
            let p = if m == 0 || t == 0 { BLEU_EPSILON } else { m as f64 / t as f64 };
            p.ln()
        })
        .sum::<f64>()
        / matches.len() as f64;
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    (bp * log_mean.exp()).clamp(0.0, 1.0)
}

/// Sentence BLEU over pre-tokenized text.
pub fn bleu_tokens(candidate: &[String], references: &[Vec<String>], max_n: usize) -> Result<f64, EvalError> {
    if candidate.is_empty() || references.is_empty() || references.iter().all(Vec::is_empty) || max_n == 0 {
        return Err(EvalError::EmptyInput);
    }
    let (matches, totals): (Vec<_>, Vec<_>) = (1..=max_n).map(|n| clipped(candidate, references, n)).unzip();
    Ok(combine(&matches, &totals, candidate.len(), closest_ref_len(candidate.len(), references)))
}

/// Sentence BLEU with modified n-gram precisions up to `max_n`, brevity
/// penalty against the closest reference length and epsilon smoothing.
pub fn bleu(candidate: &str, references: &[&str], max_n: usize) -> Result<f64, EvalError> {
    let refs: Vec<_> = references.iter().map(|r| token_texts(r)).collect();
    bleu_tokens(&token_texts(candidate), &refs, max_n)
}

/// Corpus BLEU: clipped counts and lengths are summed over all segments
/// before the precisions are combined.
pub fn corpus_bleu(segments: &[(Vec<String>, Vec<Vec<String>>)], max_n: usize) -> Result<f64, EvalError> {
    if segments.is_empty() || max_n == 0 {
        return Err(EvalError::EmptyInput);
    }
    let mut matches = vec![0; max_n];
    let mut totals = vec![0; max_n];
    let (mut c, mut r) = (0, 0);
    for (cand, refs) in segments {
        for n in 1..=max_n {
            let (m, t) = clipped(cand, refs, n);
            matches[n - 1] += m;
            totals[n - 1] += t;
        }
        c += cand.len();
        r += closest_ref_len(cand.len(), refs);
    }
    if c == 0 {
        return Ok(0.0);
    }
    Ok(combine(&matches, &totals, c, r))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PrfScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PrfScore {
    fn from_counts(overlap: usize, cand: usize, reference: usize) -> Self {
        if overlap == 0 || cand == 0 || reference == 0 {
            return PrfScore::default();
        }
        let precision = overlap as f64 / cand as f64;
        let recall = overlap as f64 / reference as f64;
        PrfScore { precision, recall, f1: 2.0 * precision * recall / (precision + recall) }
    }

    fn mean(scores: &[PrfScore]) -> PrfScore {
        if scores.is_empty() {
            return PrfScore::default();
        }
        let n = scores.len() as f64;
        PrfScore {
            precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
            recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
            f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
        }
    }
}

pub fn rouge_n_tokens(candidate: &[String], reference: &[String], n: usize) -> PrfScore {
    if n == 0 || candidate.len() < n || reference.len() < n {
        return PrfScore::default();
    }
    let cand = ngrams(candidate, n);
    let refs = ngrams(reference, n);
    let overlap = cand.iter().map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0))).sum();
    PrfScore::from_counts(overlap, candidate.len() - n + 1, reference.len() - n + 1)
}

/// N-gram overlap precision/recall/F1; zeros when either side has fewer than `n` tokens.
pub fn rouge_n(candidate: &str, reference: &str, n: usize) -> PrfScore {
    rouge_n_tokens(&token_texts(candidate), &token_texts(reference), n)
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

pub fn rouge_l_tokens(candidate: &[String], reference: &[String]) -> PrfScore {
    PrfScore::from_counts(lcs_len(candidate, reference), candidate.len(), reference.len())
}

/// Longest-common-subsequence precision/recall/F1.
pub fn rouge_l(candidate: &str, reference: &str) -> PrfScore {
    rouge_l_tokens(&token_texts(candidate), &token_texts(reference))
}

/// Multi-class metrics averaged by gold-class support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub total: usize,
    /// Gold support per class label.
    pub support: BTreeMap<String, usize>,
    pub averaging: String,
}

/// Weighted P/R/F1 over parallel gold and predicted labels.
pub fn classification_report<L: Ord + Clone + ToString>(
    gold: &[L],
    predicted: &[L],
) -> Result<ClassificationReport, EvalError> {
    if gold.is_empty() || gold.len() != predicted.len() {
        return Err(EvalError::EmptyInput);
    }
    let mut support: BTreeMap<&L, usize> = BTreeMap::new();
    let mut predicted_count: BTreeMap<&L, usize> = BTreeMap::new();
    let mut hits: BTreeMap<&L, usize> = BTreeMap::new();
    for (g, p) in gold.iter().zip(predicted) {
        *support.entry(g).or_default() += 1;
        *predicted_count.entry(p).or_default() += 1;
        if g == p {
            *hits.entry(g).or_default() += 1;
        }
    }
    let n = gold.len() as f64;
    let (mut precision, mut recall, mut f1) = (0.0, 0.0, 0.0);
    for (class, &s) in &support {
        let tp = hits.get(class).copied().unwrap_or(0) as f64;
        let pc = predicted_count.get(class).copied().unwrap_or(0) as f64;
        let p = if pc > 0.0 { tp / pc } else { 0.0 };
        let r = tp / s as f64;
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        let w = s as f64 / n;
        precision += w * p;
        recall += w * r;
        f1 += w * f;
    }
    Ok(ClassificationReport {
        accuracy: hits.values().sum::<usize>() as f64 / n,
        precision,
        recall,
        f1,
        total: gold.len(),
        support: support.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        averaging: AVERAGING.into(),
    })
}

/// Class label of an optional kind; missing kinds form the `none` class.
pub fn kind_label(kind: Option<ComponentKind>) -> String {
    kind.map_or_else(|| NONE_CLASS.to_string(), |k| k.display_name().to_string())
}

/// Compares the first kind mentioned in each generated prompt with the gold kind.
pub fn component_name_accuracy(pairs: &[(String, ComponentKind)]) -> Result<ClassificationReport, EvalError> {
    let lexicon = Lexicon::builtin();
    let gold: Vec<_> = pairs.iter().map(|(_, k)| kind_label(Some(*k))).collect();
    let predicted: Vec<_> = pairs.iter().map(|(p, _)| kind_label(lexicon.first_kind(p))).collect();
    classification_report(&gold, &predicted)
}

/// One row of a subset sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRow {
    pub size: usize,
    pub classification: ClassificationReport,
    pub bleu: f64,
    pub rouge_1: PrfScore,
    pub rouge_2: PrfScore,
    pub rouge_l: PrfScore,
    /// Records whose generation failed; they score as the `none` class and empty output.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetReport {
    pub adapter: String,
    pub direction: Direction,
    pub tokenizer: String,
    pub bleu_max_n: usize,
    pub smoothing: String,
    pub averaging: String,
    pub rows: Vec<SubsetRow>,
}

impl SubsetReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned-column text table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "adapter: {}  direction: {}", self.adapter, self.direction);
        let _ = writeln!(
            out,
            "{:>6}  {:>8}  {:>9}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}",
            "size", "accuracy", "precision", "recall", "f1", "bleu", "rouge-1", "rouge-2", "rouge-l"
        );
        for r in &self.rows {
            let c = &r.classification;
            let _ = writeln!(
                out,
                "{:>6}  {:>8.4}  {:>9.4}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}  {:>8.4}",
                r.size, c.accuracy, c.precision, c.recall, c.f1, r.bleu, r.rouge_1.f1, r.rouge_2.f1, r.rouge_l.f1
            );
        }
        out
    }
}

struct Scored {
    gold: String,
    predicted: String,
    candidate: Vec<String>,
    reference: Vec<String>,
    failed: bool,
}

/// Runs `adapter` over the first N records for every N in `sizes` and scores
/// the outputs against the paired side of each record.
pub fn subset_eval(
    records: &[DatasetRecord],
    adapter: &mut dyn Adapter,
    direction: Direction,
    sizes: &[usize],
) -> Result<SubsetReport, EvalError> {
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::BadSizes(sizes.to_vec()));
    }
    let needed = *sizes.last().expect("sizes is nonempty");
    if records.len() < needed {
        return Err(EvalError::InsufficientData { needed, available: records.len() });
    }

    let lexicon = Lexicon::builtin();
    let mut scored = Vec::with_capacity(needed);
    for (index, record) in records[..needed].iter().enumerate() {
        let gold_doc =
            validate_value(record.json.clone()).map_err(|e| EvalError::BadRecord { index, message: e.to_string() })?;
        let json_text = serde_json::to_string(&record.json).expect("record json serializes");
        let (input, reference) = match direction {
            Direction::JsonToPrompt => (json_text, record.prompt.clone()),
            Direction::PromptToJson => (record.prompt.clone(), json_text),
        };
        let output = adapter.generate(&GenerationRequest::new(direction, input)).ok();
        let predicted = output.as_deref().and_then(|out| match direction {
            Direction::JsonToPrompt => lexicon.first_kind(out),
            Direction::PromptToJson => validate_json(out).ok().map(|d| d.kind()),
        });
        scored.push(Scored {
            gold: kind_label(Some(gold_doc.kind())),
            predicted: kind_label(predicted),
            candidate: output.as_deref().map(token_texts).unwrap_or_default(),
            reference: token_texts(&reference),
            failed: output.is_none(),
        });
    }

    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let subset = &scored[..size];
        let gold: Vec<_> = subset.iter().map(|s| s.gold.clone()).collect();
        let predicted: Vec<_> = subset.iter().map(|s| s.predicted.clone()).collect();
        let segments: Vec<_> = subset.iter().map(|s| (s.candidate.clone(), vec![s.reference.clone()])).collect();
        let mean = |f: fn(&[String], &[String]) -> PrfScore| {
            PrfScore::mean(&subset.iter().map(|s| f(&s.candidate, &s.reference)).collect::<Vec<_>>())
        };
        rows.push(SubsetRow {
            size,
            classification: classification_report(&gold, &predicted)?,
            bleu: corpus_bleu(&segments, DEFAULT_MAX_N)?,
            rouge_1: mean(|c, r| rouge_n_tokens(c, r, 1)),
            rouge_2: mean(|c, r| rouge_n_tokens(c, r, 2)),
            rouge_l: mean(rouge_l_tokens),
            failures: subset.iter().filter(|s| s.failed).count(),
        });
    }

    Ok(SubsetReport {
        adapter: adapter.name(),
        direction,
        tokenizer: "prompt lexicon tokenizer".into(),
        bleu_max_n: DEFAULT_MAX_N,
        smoothing: SMOOTHING.into(),
        averaging: AVERAGING.into(),
        rows,
    })
}

/// Top-level keys a generated document must carry, per schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetKeys {
    pub flat: BTreeSet<String>,
    pub nested: BTreeSet<String>,
}

impl DatasetKeys {
    /// The required keys of each schema.
    pub fn required() -> Self {
        DatasetKeys {
            flat: FLAT_REQUIRED_KEYS.iter().map(|k| k.to_string()).collect(),
            nested: NESTED_REQUIRED_KEYS.iter().map(|k| k.to_string()).collect(),
        }
    }

    /// Keys present in every record of each schema; falls back to the
    /// required keys for a schema with no records.
    pub fn from_records(records: &[DatasetRecord]) -> Self {
        let mut flat: Option<BTreeSet<String>> = None;
        let mut nested: Option<BTreeSet<String>> = None;
        for record in records {
            let Some(obj) = record.json.as_object() else { continue };
            let keys: BTreeSet<String> = obj.keys().cloned().collect();
            let slot = if detect_schema(obj) == Schema::Nested { &mut nested } else { &mut flat };
            *slot = Some(match slot.take() {
                Some(acc) => acc.intersection(&keys).cloned().collect(),
                None => keys,
            });
        }
        let base = Self::required();
        DatasetKeys { flat: flat.unwrap_or(base.flat), nested: nested.unwrap_or(base.nested) }
    }

    pub fn for_schema(&self, schema: Schema) -> &BTreeSet<String> {
        match schema {
            Schema::Flat => &self.flat,
            Schema::Nested => &self.nested,
        }
    }
}

impl Default for DatasetKeys {
    fn default() -> Self {
        Self::required()
    }
}

/// The four pass/fail criteria of one prompt, each worth a quarter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub properties: bool,
    pub component_name: bool,
    pub style: bool,
    pub dataset_keys: bool,
    pub success_rate: f64,
}

impl CriterionResult {
    pub fn new(properties: bool, component_name: bool, style: bool, dataset_keys: bool) -> Self {
        let passed = [properties, component_name, style, dataset_keys].iter().filter(|&&b| b).count();
        CriterionResult { properties, component_name, style, dataset_keys, success_rate: 0.25 * passed as f64 }
    }

    pub fn failed() -> Self {
        Self::new(false, false, false, false)
    }
}

fn property_matches(spec: &FlatComponentSpec, key: PropertyKey, expected: &PropertyValue) -> bool {
    let number = |v: Option<f64>, want: f64| v.is_some_and(|v| round_px(v) == round_px(want));
    let color =
        |v: Option<crate::model::ColorValue>, want: &crate::model::ColorValue| v.is_some_and(|v| v.approx_eq(want));
    match (key, expected) {
        (PropertyKey::Size, PropertyValue::Size(s)) => spec.size_variant() == Some(s.as_str()),
        (PropertyKey::BorderRadius, PropertyValue::Number(n)) => number(spec.border_radius, *n),
        (PropertyKey::StrokeWeight, PropertyValue::Number(n)) => number(spec.stroke_weight, *n),
        (PropertyKey::FontWeight, PropertyValue::Number(n)) => number(spec.font_weight, *n),
        (PropertyKey::FontSize, PropertyValue::Number(n)) => number(spec.font_size, *n),
        (PropertyKey::Effect, PropertyValue::Effect(e)) => spec.effect.as_ref().is_some_and(|x| &x.effect_name == e),
        (PropertyKey::Color, PropertyValue::Color(c)) => color(spec.color, c),
        (PropertyKey::StrokeColor, PropertyValue::Color(c)) => color(spec.stroke_color, c),
        (PropertyKey::TextColor, PropertyValue::Color(c)) => color(spec.text_color, c),
        (PropertyKey::FontFamily, PropertyValue::Text(t)) => {
            spec.font_family.as_deref().is_some_and(|f| f.eq_ignore_ascii_case(t))
        }
        _ => false,
    }
}

/// Scores a generated document against the prompt it was generated from.
pub fn success_rate_score(
    prompt: &str,
    generated: &ValidatedDocument,
    keys: &DatasetKeys,
) -> Result<CriterionResult, EvalError> {
    let intent = Lexicon::builtin().parse_intent(prompt)?;
    let flat = generated.to_flat();
    let properties = intent.explicit_properties.iter().all(|(k, v)| property_matches(&flat, *k, v));
    let present = generated.keys();
    Ok(CriterionResult::new(
        properties,
        generated.kind() == intent.kind,
        generated.style() == intent.style,
        keys.for_schema(generated.schema).is_subset(&present),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRow {
    pub kind: ComponentKind,
    /// Sum of per-prompt success rates, on a 0 to 5 scale.
    pub pass: f64,
    pub fail: f64,
    pub rate: f64,
    pub prompts: Vec<(String, CriterionResult)>,
}

/// Scores `adapter` on five prompts per kind. A prompt whose generation or
/// validation fails scores zero.
pub fn success_rate_table(
    suite: &[(ComponentKind, Vec<String>)],
    adapter: &mut dyn Adapter,
    keys: &DatasetKeys,
) -> Result<Vec<SuccessRow>, EvalError> {
    if suite.is_empty() {
        return Err(EvalError::WrongSuiteShape("the suite is empty".into()));
    }
    let mut rows = Vec::with_capacity(suite.len());
    for (kind, prompts) in suite {
        if prompts.len() != SUITE_SIZE {
            return Err(EvalError::WrongSuiteShape(format!("{} has {} prompts", kind.display_name(), prompts.len())));
        }
        let mut scored = Vec::with_capacity(SUITE_SIZE);
        for prompt in prompts {
            let result = adapter
                .generate(&GenerationRequest::new(Direction::PromptToJson, prompt.clone()))
                .ok()
                .and_then(|out| validate_json(&out).ok())
                .and_then(|doc| success_rate_score(prompt, &doc, keys).ok())
                .unwrap_or_else(CriterionResult::failed);
            scored.push((prompt.clone(), result));
        }
        let pass: f64 = scored.iter().map(|(_, r)| r.success_rate).sum();
        rows.push(SuccessRow {
            kind: *kind,
            pass,
            fail: SUITE_SIZE as f64 - pass,
            rate: pass / SUITE_SIZE as f64,
            prompts: scored,
        });
    }
    Ok(rows)
}

/// Aligned-column rendering of a success-rate table.
pub fn success_table_text(rows: &[SuccessRow]) -> String {
    let mut out = format!("{:<12}  {:>5}  {:>5}  {:>7}\n", "component", "pass", "fail", "rate");
    for r in rows {
        let _ = writeln!(out, "{:<12}  {:>5}  {:>5}  {:>6.0}%", r.kind.display_name(), r.pass, r.fail, r.rate * 100.0);
    }
    out
}

/// Five prompts per kind covering sizes, radii, effects, stroke weights,
/// colors and fonts.
pub fn default_prompt_suite() -> Vec<(ComponentKind, Vec<String>)> {
    let table: [(ComponentKind, [&str; SUITE_SIZE]); 6] = [
        (
            ComponentKind::Button,
            [
                "generate a professional button with a size of small",
                "Create a basic button with a border radius of 10.0",
                "Make a trendy button that has a drop shadow",
                "I need a playful button with a stroke weight of 3",
                "Generate a professional button with a blue fill and a font size of 16",
            ],
        ),
        (
            ComponentKind::InputField,
            [
                "Create a basic input field",
                "Generate a professional input field with a size of large",
                "Make a trendy input field with a border radius of 6",
                "I need a playful text field with a stroke weight of 2.5",
                "Create a basic input field with a text color of #333333",
            ],
        ),
        (
            ComponentKind::IconButton,
            [
                "Create a trendy icon button",
                "Generate a basic icon button with a size of small",
                "Make a playful icon button that has an inner shadow",
                "I need a professional icon button with a border radius of 20",
                "Create a trendy icon button with a red fill",
            ],
        ),
        (
            ComponentKind::MenuList,
            [
                "Create a professional menu list",
                "Generate a playful menu list with a drop shadow",
                "Make a basic menu list with a size of large and a border radius of 4",
                "I need a trendy dropdown with a stroke weight of 1",
                "Create a basic menu list with a font family of montserrat",
            ],
        ),
        (
            ComponentKind::ListItem,
            [
                "Create a basic list item",
                "Generate a trendy list item with a size of small",
                "Make a professional list item with a border radius of 2",
                "I need a playful list item with a font size of 18",
                "Create a basic list item with a background blur",
            ],
        ),
        (
            ComponentKind::Label,
            [
                "Create a basic label",
                "Generate a professional label with a font size of 12",
                "Make a trendy label with a size of large",
                "I need a playful label with a text color of purple",
                "Create a basic label with a font weight of 700",
            ],
        ),
    ];
    table.into_iter().map(|(k, prompts)| (k, prompts.iter().map(|p| p.to_string()).collect())).collect()
}
