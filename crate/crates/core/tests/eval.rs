use cogen_core::adapter::{Adapter, AdapterError, Describer, Direction, GenerationRequest, Generator};
use cogen_core::emitter::{validate_json, Schema, StylePresetTable};
use cogen_core::eval::{
    bleu, classification_report, component_name_accuracy, default_prompt_suite, lcs_len, rouge_l, rouge_n, subset_eval,
    success_rate_score, success_rate_table, DatasetKeys, EvalError, BLEU_EPSILON, DEFAULT_SIZES,
};
use cogen_core::synth::{build_dataset, synthetic_corpus, DatasetRecord, SpecDocument, SplitRatios};
use cogen_core::ComponentKind;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// --- independent oracles: plain loops over whitespace-split words ---

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn count_occurrences(hay: &[&str], gram: &[&str]) -> usize {
    let mut count = 0;
    let mut i = 0;
    while i + gram.len() <= hay.len() {
        let mut same = true;
        for k in 0..gram.len() {
            if hay[i + k] != gram[k] {
                same = false;
            }
        }
        if same {
            count += 1;
        }
        i += 1;
    }
    count
}

fn distinct_grams<'a>(tokens: &[&'a str], n: usize) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = Vec::new();
    if tokens.len() < n {
        return out;
    }
    for i in 0..=tokens.len() - n {
        let g = tokens[i..i + n].to_vec();
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

fn oracle_bleu(cand: &str, reference: &str) -> f64 {
    let c = words(cand);
    let r = words(reference);
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let mut clipped = 0;
        for g in distinct_grams(&c, n) {
            clipped += count_occurrences(&c, &g).min(count_occurrences(&r, &g));
        }
        let total = if c.len() >= n { c.len() - n + 1 } else { 0 };
        let p = if clipped == 0 { 1e-9 } else { clipped as f64 / total as f64 };
        log_sum += p.ln();
    }
    let bp = if c.len() > r.len() { 1.0 } else { (1.0 - r.len() as f64 / c.len() as f64).exp() };
    bp * (log_sum / 4.0).exp()
}

fn oracle_rouge_n(cand: &str, reference: &str, n: usize) -> (f64, f64, f64) {
    let c = words(cand);
    let r = words(reference);
    if c.len() < n || r.len() < n {
        return (0.0, 0.0, 0.0);
    }
    let mut overlap = 0;
    for g in distinct_grams(&c, n) {
        overlap += count_occurrences(&c, &g).min(count_occurrences(&r, &g));
    }
    prf(overlap, c.len() - n + 1, r.len() - n + 1)
}

fn prf(overlap: usize, c: usize, r: usize) -> (f64, f64, f64) {
    if overlap == 0 {
        return (0.0, 0.0, 0.0);
    }
    let p = overlap as f64 / c as f64;
    let rec = overlap as f64 / r as f64;
    (p, rec, 2.0 * p * rec / (p + rec))
}

/// Longest common subsequence by enumerating every subsequence of the shorter side.
fn brute_lcs(a: &[&str], b: &[&str]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut best = 0;
    for mask in 0u32..(1 << short.len()) {
        let sub: Vec<&str> = (0..short.len()).filter(|i| mask & (1 << i) != 0).map(|i| short[i]).collect();
        let mut j = 0;
        for w in long {
            if j < sub.len() && sub[j] == *w {
                j += 1;
            }
        }
        if j == sub.len() {
            best = best.max(sub.len());
        }
    }
    best
}

fn oracle_rouge_l(cand: &str, reference: &str) -> (f64, f64, f64) {
    let c = words(cand);
    let r = words(reference);
    if c.is_empty() || r.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    prf(brute_lcs(&c, &r), c.len(), r.len())
}

// words that are not lexicon phrases, so tokenization is plain word splitting
const VOCAB: &[&str] =
    &["zeta", "quill", "morrow", "tansy", "vorn", "plume", "kestrel", "ardent", "brisk", "lumen", "north", "ember"];

fn random_sentence(rng: &mut ChaCha8Rng, vocab: &[&str]) -> String {
    let len = rng.random_range(4..13);
    (0..len).map(|_| vocab[rng.random_range(0..vocab.len())]).collect::<Vec<_>>().join(" ")
}

#[test]
fn metrics_agree_with_oracles_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..50 {
        let c = random_sentence(&mut rng, &VOCAB[..6]);
        let r = random_sentence(&mut rng, &VOCAB[..6]);
        let got = bleu(&c, &[&r], 4).unwrap();
        assert!((got - oracle_bleu(&c, &r)).abs() < 1e-9, "bleu {c:?} / {r:?}");
        for n in [1, 2] {
            let s = rouge_n(&c, &r, n);
            let (p, rec, f) = oracle_rouge_n(&c, &r, n);
            assert!((s.precision - p).abs() < 1e-9 && (s.recall - rec).abs() < 1e-9 && (s.f1 - f).abs() < 1e-9);
        }
        let s = rouge_l(&c, &r);
        let (p, rec, f) = oracle_rouge_l(&c, &r);
        assert!((s.precision - p).abs() < 1e-9 && (s.recall - rec).abs() < 1e-9 && (s.f1 - f).abs() < 1e-9);
    }
}

#[test]
fn bleu_fixed_points() {
    assert_eq!(bleu("zeta quill morrow tansy vorn", &["zeta quill morrow tansy vorn"], 4).unwrap(), 1.0);
    assert!(bleu("zeta quill morrow tansy", &["plume kestrel ardent brisk"], 4).unwrap() < 1e-6);
    // p = 3/4, 2/3, 1/2 and an epsilon-floored 4-gram precision; no brevity penalty
    let expected = (0.75 * (2.0 / 3.0) * 0.5 * BLEU_EPSILON).powf(0.25);
    let got = bleu("create a basic label", &["generate a basic label"], 4).unwrap();
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    assert!(matches!(bleu("", &["x"], 4), Err(EvalError::EmptyInput)));
    assert!(matches!(bleu("x", &[], 4), Err(EvalError::EmptyInput)));
}

#[test]
fn bleu_uses_closest_reference_and_clips() {
    // candidate repeats one word; clipping caps the unigram count at the reference count
    let got = bleu("zeta zeta zeta zeta", &["zeta quill morrow tansy"], 1).unwrap();
    assert!((got - 0.25).abs() < 1e-12);
    // two references: the 4-word one is closest, so no brevity penalty applies
    let got =
        bleu("zeta quill morrow tansy", &["zeta quill morrow tansy vorn plume", "zeta quill morrow tansy"], 4).unwrap();
    assert_eq!(got, 1.0);
}

#[test]
fn rouge_fixed_points() {
    let s = rouge_n("zeta quill morrow", "zeta quill morrow", 1);
    assert_eq!(s.f1, 1.0);
    assert_eq!(rouge_n("zeta quill", "plume kestrel", 1).f1, 0.0);
    // 2 shared unigrams of 3 on each side
    let s = rouge_n("zeta quill morrow", "zeta vorn morrow", 1);
    assert!((s.precision - 2.0 / 3.0).abs() < 1e-12 && (s.f1 - 2.0 / 3.0).abs() < 1e-12);
    // reference shorter than n
    assert_eq!(rouge_n("zeta quill", "zeta", 2).f1, 0.0);

    let s = rouge_l("a b c", "a x c");
    assert!((s.precision - 2.0 / 3.0).abs() < 1e-12);
    assert!((s.recall - 2.0 / 3.0).abs() < 1e-12);
    assert!((s.f1 - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(rouge_l("", "a b").f1, 0.0);
    assert_eq!(rouge_l("zeta quill", "zeta quill").f1, 1.0);
    assert_eq!(lcs_len(&[1, 2, 3, 4], &[2, 4, 1, 3]), 2);
}

#[test]
fn hand_computed_confusion_matrix() {
    let gold = ["A", "A", "A", "B", "B", "C"];
    let pred = ["A", "A", "B", "B", "C", "C"];
    let r = classification_report(&gold, &pred).unwrap();
    assert!((r.accuracy - 4.0 / 6.0).abs() < 1e-12);
    assert!((r.recall - 4.0 / 6.0).abs() < 1e-12);
    assert!((r.precision - 0.75).abs() < 1e-12);
    let f1 = (3.0 * 0.8 + 2.0 * 0.5 + 1.0 * (2.0 / 3.0)) / 6.0;
    assert!((r.f1 - f1).abs() < 1e-12);
    assert_eq!(r.support["A"], 3);
    assert_eq!(r.averaging, "weighted");
}

#[test]
fn component_name_accuracy_counts() {
    let mut pairs: Vec<(String, ComponentKind)> =
        (0..98).map(|_| ("Create a basic button".to_string(), ComponentKind::Button)).collect();
    pairs.push(("Create a basic label".into(), ComponentKind::Button));
    pairs.push(("Create a basic menu".into(), ComponentKind::Button));
    assert!((component_name_accuracy(&pairs).unwrap().accuracy - 0.98).abs() < 1e-12);

    let none: Vec<_> = (0..4).map(|_| ("something pretty".to_string(), ComponentKind::Label)).collect();
    let r = component_name_accuracy(&none).unwrap();
    assert_eq!(r.accuracy, 0.0);
    assert!(matches!(component_name_accuracy(&[]), Err(EvalError::EmptyInput)));
}

proptest! {
    #[test]
    fn weighted_recall_equals_accuracy(pairs in prop::collection::vec((0u8..5, 0u8..5), 1..200)) {
        let gold: Vec<u8> = pairs.iter().map(|p| p.0).collect();
        let pred: Vec<u8> = pairs.iter().map(|p| p.1).collect();
        let r = classification_report(&gold, &pred).unwrap();
        prop_assert!((r.accuracy - r.recall).abs() < 1e-12);
        for v in [r.accuracy, r.precision, r.recall, r.f1] {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn text_metrics_are_bounded(a in "[a-e ]{1,40}", b in "[a-e ]{1,40}") {
        if let Ok(v) = bleu(&a, &[&b], 4) {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        for s in [rouge_n(&a, &b, 1), rouge_n(&a, &b, 2), rouge_l(&a, &b)] {
            prop_assert!((0.0..=1.0).contains(&s.f1));
        }
    }
}

fn corpus(n: usize) -> Vec<DatasetRecord> {
    let specs: Vec<_> =
        synthetic_corpus(n, 9, StylePresetTable::builtin()).into_iter().map(SpecDocument::Flat).collect();
    build_dataset(&specs, 9, SplitRatios::default(), 1).unwrap()
}

#[test]
fn subset_sweep_is_deterministic_and_exact() {
    let records = corpus(500);
    let run =
        || subset_eval(&records, &mut Generator::new(Schema::Flat), Direction::PromptToJson, &DEFAULT_SIZES).unwrap();
    let a = run();
    assert_eq!(a.to_json(), run().to_json());
    assert_eq!(a.rows.len(), 5);
    for row in &a.rows {
        assert_eq!(row.classification.accuracy, 1.0);
        assert_eq!(row.failures, 0);
    }
    assert!(a.to_table().lines().count() == 7);

    let d = subset_eval(&records, &mut Describer::new(0), Direction::JsonToPrompt, &[100, 500]).unwrap();
    assert!(d.rows.iter().all(|r| r.classification.accuracy == 1.0));
}

#[test]
fn subset_sweep_errors() {
    let records = corpus(50);
    let mut g = Generator::default();
    assert!(matches!(
        subset_eval(&records, &mut g, Direction::PromptToJson, &[100]),
        Err(EvalError::InsufficientData { needed: 100, available: 50 })
    ));
    assert!(matches!(subset_eval(&records, &mut g, Direction::PromptToJson, &[20, 10]), Err(EvalError::BadSizes(_))));
    assert!(matches!(subset_eval(&records, &mut g, Direction::PromptToJson, &[]), Err(EvalError::BadSizes(_))));
}

#[test]
fn reference_prompt_scores_full_marks() {
    let prompt = "generate a professional button with a size of small";
    for schema in [Schema::Flat, Schema::Nested] {
        let out = Generator::new(schema).generate(&GenerationRequest::new(Direction::PromptToJson, prompt)).unwrap();
        let doc = validate_json(&out).unwrap();
        let r = success_rate_score(prompt, &doc, &DatasetKeys::required()).unwrap();
        assert_eq!(r.success_rate, 1.0, "{r:?}");
    }
    let doc = validate_json(&basic_button_json()).unwrap();
    assert!(matches!(
        success_rate_score("nothing here", &doc, &DatasetKeys::required()),
        Err(EvalError::UnparseablePrompt(_))
    ));
}

fn basic_button_json() -> String {
    cogen_core::FlatComponentSpec::new("Basic/Button".parse().unwrap()).to_canonical_json()
}

/// Rewrites the style segment of the generated name to a different style.
struct WrongStyle(Generator);

impl Adapter for WrongStyle {
    fn name(&self) -> String {
        "wrong-style".into()
    }

    fn generate(&mut self, request: &GenerationRequest) -> Result<String, AdapterError> {
        let out = self.0.generate(request)?;
        let mut value: serde_json::Value = serde_json::from_str(&out).unwrap();
        let name = value["name"].as_str().unwrap().to_string();
        let (style, rest) = name.split_once('/').unwrap();
        let other = if style == "Basic" { "Trendy" } else { "Basic" };
        value["name"] = format!("{other}/{rest}").into();
        Ok(value.to_string())
    }
}

#[test]
fn success_table_full_and_corrupted() {
    let suite = default_prompt_suite();
    let keys = DatasetKeys::required();
    for schema in [Schema::Flat, Schema::Nested] {
        let rows = success_rate_table(&suite, &mut Generator::new(schema), &keys).unwrap();
        assert_eq!(rows.len(), 6);
        for row in &rows {
            assert_eq!((row.pass, row.fail, row.rate), (5.0, 0.0, 1.0), "{schema:?} {row:?}");
        }
        let rows = success_rate_table(&suite, &mut WrongStyle(Generator::new(schema)), &keys).unwrap();
        for row in &rows {
            assert_eq!((row.pass, row.fail, row.rate), (3.75, 1.25, 0.75), "{row:?}");
            assert!(row.prompts.iter().all(|(_, r)| !r.style && r.properties && r.component_name && r.dataset_keys));
        }
    }
}

#[test]
fn success_table_shape_errors() {
    let mut g = Generator::default();
    let keys = DatasetKeys::required();
    assert!(matches!(success_rate_table(&[], &mut g, &keys), Err(EvalError::WrongSuiteShape(_))));
    let short = vec![(ComponentKind::Button, vec!["a basic button".to_string()])];
    assert!(matches!(success_rate_table(&short, &mut g, &keys), Err(EvalError::WrongSuiteShape(_))));
}

#[test]
fn failed_generations_score_zero() {
    let suite = vec![(ComponentKind::Button, vec!["gibberish".to_string(); 5])];
    let rows = success_rate_table(&suite, &mut Generator::default(), &DatasetKeys::required()).unwrap();
    assert_eq!((rows[0].pass, rows[0].fail), (0.0, 5.0));
}

#[test]
fn dataset_keys_from_records() {
    let records = corpus(20);
    let keys = DatasetKeys::from_records(&records);
    assert!(DatasetKeys::required().flat.is_subset(&keys.flat));
    assert_eq!(keys.nested, DatasetKeys::required().nested);
}
