//! Lexicon-driven parsing of free-text prompts into a [`ComponentIntent`].
//!
//! Prompts are lowercased and split into word, number and hex-color tokens.
//! Multi-word lexicon phrases are then merged greedily, longest match first,
//! so `"border radius of 10.0"` becomes `[border_radius, of, 10.0]`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::Deserialize;
use thiserror::Error;

use crate::model::{
    ColorValue, ComponentIntent, ComponentKind, PropertyKey, PropertyValue, SizeToken, StyleTheme, Subtype,
};

const BUILTIN_LEXICON: &str = include_str!("../data/lexicon.toml");
const SUPPORTED_LEXICON_VERSION: u32 = 1;

/// How far back (in tokens) a number or color may look for its property phrase.
pub const BIND_WINDOW: usize = 3;

static RAW_TOKEN: Lazy<Regex> = Lazy::new(|| Regex::new(r"#[0-9a-z]+|\d+(?:\.\d+)?|[a-z0-9]+").expect("valid regex"));

static BUILTIN: Lazy<Lexicon> =
    Lazy::new(|| Lexicon::from_toml_str(BUILTIN_LEXICON).expect("builtin lexicon is valid"));

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("lexicon syntax: {0}")]
    Syntax(String),
    #[error("unsupported lexicon version {0}")]
    Version(u32),
    #[error("phrase {phrase:?} maps to both {first} and {second}")]
    Conflict { phrase: String, first: Term, second: Term },
    #[error("bad target {target:?} for phrase {phrase:?}: {reason}")]
    BadTarget { phrase: String, target: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no component kind found in prompt (try e.g. \"create a basic button\")")]
    NoComponentKind,
}

/// Canonical target of a lexicon phrase.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Kind(ComponentKind),
    Style(StyleTheme),
    Subtype(String),
    Property(PropertyKey),
    Size(SizeToken),
    Effect(String),
    Color(ColorValue),
    FontFamily(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Kind(k) => write!(f, "kind:{}", k.ident()),
            Term::Style(s) => write!(f, "style:{s}"),
            Term::Subtype(s) => write!(f, "subtype:{s}"),
            Term::Property(p) => write!(f, "property:{p}"),
            Term::Size(s) => write!(f, "size:{}", s.as_str()),
            Term::Effect(e) => write!(f, "effect:{e}"),
            Term::Color(c) => write!(f, "color:{}", c.to_hex()),
            Term::FontFamily(ff) => write!(f, "font_family:{ff}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Word,
    Number(f64),
    Hex(ColorValue),
    Term(Term),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    /// Lowercased surface text; merged phrases are joined with `_`.
    pub text: String,
    pub kind: TokenKind,
}

impl Token {
    fn term(&self) -> Option<&Term> {
        match &self.kind {
            TokenKind::Term(t) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Default, Deserialize)]
struct LexiconFile {
    version: u32,
    #[serde(default)]
    kinds: BTreeMap<String, String>,
    #[serde(default)]
    styles: BTreeMap<String, String>,
    #[serde(default)]
    subtypes: BTreeMap<String, String>,
    #[serde(default)]
    properties: BTreeMap<String, String>,
    #[serde(default)]
    sizes: BTreeMap<String, String>,
    #[serde(default)]
    effects: BTreeMap<String, String>,
    #[serde(default)]
    colors: BTreeMap<String, String>,
    #[serde(default)]
    font_families: BTreeMap<String, String>,
}

/// Immutable synonym table.
#[derive(Debug, Clone)]
pub struct Lexicon {
    version: u32,
    phrases: HashMap<Vec<String>, Term>,
    max_phrase_words: usize,
}

fn raw_words(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    RAW_TOKEN.find_iter(&lower).map(|m| m.as_str().to_string()).collect()
}

impl Lexicon {
    /// The lexicon shipped with the crate.
    pub fn builtin() -> &'static Lexicon {
        &BUILTIN
    }

    pub fn from_toml_str(raw: &str) -> Result<Self, LexiconError> {
        let file: LexiconFile = toml::from_str(raw).map_err(|e| LexiconError::Syntax(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_json_str(raw: &str) -> Result<Self, LexiconError> {
        let file: LexiconFile = serde_json::from_str(raw).map_err(|e| LexiconError::Syntax(e.to_string()))?;
        Self::from_file(file)
    }

    /// Loads a `.json` or `.toml` lexicon file.
    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let raw = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&raw),
            _ => Self::from_toml_str(&raw),
        }
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    fn from_file(file: LexiconFile) -> Result<Self, LexiconError> {
        if file.version != SUPPORTED_LEXICON_VERSION {
            return Err(LexiconError::Version(file.version));
        }
        let mut lex = Lexicon { version: file.version, phrases: HashMap::new(), max_phrase_words: 1 };

        fn bad(phrase: &str, target: &str, reason: impl ToString) -> LexiconError {
            LexiconError::BadTarget {
                phrase: phrase.to_string(),
                target: target.to_string(),
                reason: reason.to_string(),
            }
        }

        for (phrase, target) in &file.kinds {
            let kind = target.parse().map_err(|e| bad(phrase, target, e))?;
            lex.insert(phrase, Term::Kind(kind))?;
        }
        for (phrase, target) in &file.styles {
            let style = target.parse().map_err(|e| bad(phrase, target, e))?;
            lex.insert(phrase, Term::Style(style))?;
        }
        for (phrase, target) in &file.subtypes {
            Subtype::new(target).map_err(|e| bad(phrase, target, e))?;
            lex.insert(phrase, Term::Subtype(target.clone()))?;
        }
        for (phrase, target) in &file.properties {
            let key = target.parse().map_err(|e| bad(phrase, target, e))?;
            lex.insert(phrase, Term::Property(key))?;
        }
        for (phrase, target) in &file.sizes {
            let size = target.parse().map_err(|e| bad(phrase, target, e))?;
            lex.insert(phrase, Term::Size(size))?;
        }
        for (phrase, target) in &file.effects {
            if target.trim().is_empty() {
                return Err(bad(phrase, target, "empty effect name"));
            }
            lex.insert(phrase, Term::Effect(target.clone()))?;
        }
        for (phrase, target) in &file.colors {
            let color = ColorValue::from_hex(target).map_err(|e| bad(phrase, target, e))?;
            lex.insert(phrase, Term::Color(color))?;
        }
        for (phrase, target) in &file.font_families {
            lex.insert(phrase, Term::FontFamily(target.clone()))?;
        }
        Ok(lex)
    }

    fn insert(&mut self, phrase: &str, term: Term) -> Result<(), LexiconError> {
        let key = raw_words(phrase);
        if key.is_empty() {
            return Err(LexiconError::BadTarget {
                phrase: phrase.to_string(),
                target: term.to_string(),
                reason: "phrase has no words".into(),
            });
        }
        if let Some(existing) = self.phrases.get(&key) {
            if *existing != term {
                return Err(LexiconError::Conflict {
                    phrase: phrase.to_string(),
                    first: existing.clone(),
                    second: term,
                });
            }
            return Ok(());
        }
        self.max_phrase_words = self.max_phrase_words.max(key.len());
        self.phrases.insert(key, term);
        Ok(())
    }

    /// Looks a phrase up after normalizing it like the tokenizer would.
    pub fn lookup(&self, phrase: &str) -> Option<&Term> {
        self.phrases.get(&raw_words(phrase))
    }

    pub fn tokenize(&self, prompt: &str) -> Vec<Token> {
        let raw = raw_words(prompt);
        let mut out = Vec::with_capacity(raw.len());
        let mut i = 0;
        while i < raw.len() {
            let longest = (1..=self.max_phrase_words.min(raw.len() - i)).rev().find_map(|len| {
                let window = &raw[i..i + len];
                if window.iter().any(|w| w.starts_with('#')) {
                    return None;
                }
                self.phrases.get(window).map(|t| (len, t))
            });
            if let Some((len, term)) = longest {
                out.push(Token { text: raw[i..i + len].join("_"), kind: TokenKind::Term(term.clone()) });
                i += len;
                continue;
            }
            out.push(classify(&raw[i]));
            i += 1;
        }
        out
    }

    /// First component kind mentioned in `text`, if any.
    pub fn first_kind(&self, text: &str) -> Option<ComponentKind> {
        self.tokenize(text).iter().find_map(|t| match t.term() {
            Some(Term::Kind(k)) => Some(*k),
            _ => None,
        })
    }

    pub fn parse_intent(&self, prompt: &str) -> Result<ComponentIntent, ParseError> {
        self.parse_intent_verbose(prompt).map(|p| p.intent)
    }

    /// Like [`Lexicon::parse_intent`] but also reports ignored or conflicting mentions.
    pub fn parse_intent_verbose(&self, prompt: &str) -> Result<ParsedIntent, ParseError> {
        let tokens = self.tokenize(prompt);
        let mut warnings = Vec::new();
        let mut kind = None;
        let mut style = None;
        let mut subtype = None;
        let mut props: BTreeMap<PropertyKey, PropertyValue> = BTreeMap::new();

        let mut set_prop = |key: PropertyKey, value: PropertyValue, warnings: &mut Vec<String>| match props.get(&key) {
            Some(existing) if *existing != value => {
                warnings.push(format!("conflicting {key}: keeping {existing}, ignoring {value}"))
            }
            Some(_) => {}
            None => {
                props.insert(key, value);
            }
        };

        for (i, token) in tokens.iter().enumerate() {
            match &token.kind {
                TokenKind::Term(Term::Kind(k)) => match kind {
                    None => kind = Some(*k),
                    Some(first) if first != *k => warnings.push(format!("ignoring additional component {}", k.ident())),
                    _ => {}
                },
                TokenKind::Term(Term::Style(s)) => match style {
                    None => style = Some(*s),
                    Some(first) if first != *s => {
                        warnings.push(format!("conflicting style: keeping {first}, ignoring {s}"))
                    }
                    _ => {}
                },
                TokenKind::Term(Term::Subtype(s)) => {
                    if subtype.is_none() {
                        subtype = Subtype::new(s).ok();
                    }
                }
                TokenKind::Term(Term::Size(s)) => set_prop(PropertyKey::Size, PropertyValue::Size(*s), &mut warnings),
                TokenKind::Term(Term::Effect(e)) => {
                    set_prop(PropertyKey::Effect, PropertyValue::Effect(e.clone()), &mut warnings)
                }
                TokenKind::Term(Term::FontFamily(f)) => {
                    set_prop(PropertyKey::FontFamily, PropertyValue::Text(f.clone()), &mut warnings)
                }
                TokenKind::Number(n) => match bound_property(&tokens, i, PropertyKey::is_numeric) {
                    Some(key) => set_prop(key, PropertyValue::Number(*n), &mut warnings),
                    None => warnings.push(format!("ignoring unbound number {}", token.text)),
                },
                TokenKind::Term(Term::Color(c)) | TokenKind::Hex(c) => {
                    let key = bound_property(&tokens, i, PropertyKey::is_color).unwrap_or(PropertyKey::Color);
                    set_prop(key, PropertyValue::Color(*c), &mut warnings)
                }
                TokenKind::Term(Term::Property(_)) | TokenKind::Word => {}
            }
        }

        let kind = kind.ok_or(ParseError::NoComponentKind)?;
        Ok(ParsedIntent {
            intent: ComponentIntent {
                kind,
                style: style.unwrap_or(StyleTheme::Basic),
                subtype,
                explicit_properties: props,
            },
            warnings,
        })
    }
}

fn classify(word: &str) -> Token {
    if let Some(hex) = word.strip_prefix('#') {
        if matches!(hex.len(), 3 | 6 | 8) {
            if let Ok(c) = ColorValue::from_hex(hex) {
                return Token { text: word.to_string(), kind: TokenKind::Hex(c) };
            }
        }
        return classify(hex);
    }
    match word.parse::<f64>() {
        Ok(n) if word.chars().next().is_some_and(|c| c.is_ascii_digit()) => {
            Token { text: word.to_string(), kind: TokenKind::Number(n) }
        }
        _ => Token { text: word.to_string(), kind: TokenKind::Word },
    }
}

/// Nearest preceding property phrase accepted by `accepts`, within [`BIND_WINDOW`].
/// A value of the same class in between means the phrase is already taken.
fn bound_property(tokens: &[Token], at: usize, accepts: fn(PropertyKey) -> bool) -> Option<PropertyKey> {
    let same_class = |t: &Token| match (&tokens[at].kind, &t.kind) {
        (TokenKind::Number(_), TokenKind::Number(_)) => true,
        (TokenKind::Number(_), _) => false,
        (_, TokenKind::Hex(_) | TokenKind::Term(Term::Color(_))) => true,
        _ => false,
    };
    let start = at.saturating_sub(BIND_WINDOW);
    for t in tokens[start..at].iter().rev() {
        if same_class(t) {
            return None;
        }
        if let Some(Term::Property(p)) = t.term() {
            if accepts(*p) {
                return Some(*p);
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedIntent {
    pub intent: ComponentIntent,
    pub warnings: Vec<String>,
}

/// Tokenizes with the builtin lexicon.
pub fn tokenize(prompt: &str) -> Vec<Token> {
    Lexicon::builtin().tokenize(prompt)
}

/// Token texts only; the tokenization every metric uses.
pub fn token_texts(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

/// Renders tokens back to a normalized prompt.
pub fn tokens_to_text(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ")
}

/// Parses with the builtin lexicon.
pub fn parse_intent(prompt: &str) -> Result<ComponentIntent, ParseError> {
    Lexicon::builtin().parse_intent(prompt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(prompt: &str) -> Vec<String> {
        token_texts(prompt)
    }

    #[test]
    fn tokenizes_and_drops_punctuation() {
        assert_eq!(texts("Generate a Professional Button."), ["generate", "a", "professional", "button"]);
        assert!(texts("").is_empty());
        assert!(texts("?!,.").is_empty());
    }

    #[test]
    fn merges_longest_phrase() {
        assert_eq!(texts("border radius of 10.0"), ["border_radius", "of", "10.0"]);
        assert_eq!(texts("an icon button"), ["an", "icon_button"]);
        assert_eq!(texts("a background blur"), ["a", "background_blur"]);
        let toks = tokenize("border radius of 10.0");
        assert_eq!(toks[0].kind, TokenKind::Term(Term::Property(PropertyKey::BorderRadius)));
        assert_eq!(toks[2].kind, TokenKind::Number(10.0));
    }

    #[test]
    fn hex_tokens() {
        let toks = tokenize("fill #2563EB now");
        assert_eq!(toks[1].text, "#2563eb");
        assert!(matches!(toks[1].kind, TokenKind::Hex(_)));
        // not a valid hex length: falls back to a plain word
        assert_eq!(tokenize("#12345")[0].kind, TokenKind::Number(12345.0));
    }

    #[test]
    fn reference_prompt_with_size() {
        let intent = parse_intent("generate a professional button with a size of small").unwrap();
        assert_eq!(intent.kind, ComponentKind::Button);
        assert_eq!(intent.style, StyleTheme::Professional);
        assert_eq!(
            intent.explicit_properties,
            BTreeMap::from([(PropertyKey::Size, PropertyValue::Size(SizeToken::Small))])
        );
    }

    #[test]
    fn reference_prompt_with_radius() {
        let intent = parse_intent("Generate a Professional Button with a border radius of 10.0").unwrap();
        assert_eq!(intent.kind, ComponentKind::Button);
        assert_eq!(intent.style, StyleTheme::Professional);
        assert_eq!(intent.property(PropertyKey::BorderRadius), Some(&PropertyValue::Number(10.0)));
        assert_eq!(intent.explicit_properties.len(), 1);
    }

    #[test]
    fn rejects_prompt_without_kind() {
        assert_eq!(parse_intent("make something nice"), Err(ParseError::NoComponentKind));
        assert_eq!(parse_intent(""), Err(ParseError::NoComponentKind));
    }

    #[test]
    fn first_kind_wins() {
        assert_eq!(parse_intent("button label").unwrap().kind, ComponentKind::Button);
        assert_eq!(parse_intent("a label and a button").unwrap().kind, ComponentKind::Label);
    }

    #[test]
    fn style_defaults_to_basic() {
        assert_eq!(parse_intent("create a menu list").unwrap().style, StyleTheme::Basic);
    }

    #[test]
    fn contradictory_size_keeps_first_and_warns() {
        let parsed = Lexicon::builtin().parse_intent_verbose("small large button").unwrap();
        assert_eq!(parsed.intent.property(PropertyKey::Size), Some(&PropertyValue::Size(SizeToken::Small)));
        assert_eq!(parsed.warnings.len(), 1);
    }

    #[test]
    fn numbers_bind_within_window() {
        let intent = parse_intent("button with a stroke weight of 2 and border radius 12.5").unwrap();
        assert_eq!(intent.property(PropertyKey::StrokeWeight), Some(&PropertyValue::Number(2.0)));
        assert_eq!(intent.property(PropertyKey::BorderRadius), Some(&PropertyValue::Number(12.5)));
        // four tokens away: too far
        let intent = parse_intent("button border radius is set to 4").unwrap();
        assert_eq!(intent.property(PropertyKey::BorderRadius), None);
        let intent = parse_intent("a button of 10").unwrap();
        assert!(intent.explicit_properties.is_empty());
    }

    #[test]
    fn colors_effects_fonts_and_subtypes() {
        let intent = parse_intent(
            "a dark trendy input field with text color #ff0000, a blue fill, a drop shadow and inter font size 16",
        )
        .unwrap();
        assert_eq!(intent.kind, ComponentKind::InputField);
        assert_eq!(intent.style, StyleTheme::Trendy);
        assert_eq!(intent.subtype.as_ref().map(Subtype::as_str), Some("Dark"));
        assert_eq!(
            intent.property(PropertyKey::TextColor),
            Some(&PropertyValue::Color(ColorValue::from_hex("#FF0000").unwrap()))
        );
        assert_eq!(
            intent.property(PropertyKey::Color),
            Some(&PropertyValue::Color(ColorValue::from_hex("#2563EB").unwrap()))
        );
        assert_eq!(intent.property(PropertyKey::Effect), Some(&PropertyValue::Effect("DROP_SHADOW".into())));
        assert_eq!(intent.property(PropertyKey::FontFamily), Some(&PropertyValue::Text("Inter".into())));
        assert_eq!(intent.property(PropertyKey::FontSize), Some(&PropertyValue::Number(16.0)));
    }

    #[test]
    fn normalization_is_idempotent() {
        for prompt in [
            "Generate a Professional Button with a border radius of 10.0!",
            "make a PLAYFUL icon-button that has an inner shadow and a stroke weight of 1.5",
            "Create a dark Trendy list item, size: large; text colour #abc",
        ] {
            let normalized = tokens_to_text(&tokenize(prompt));
            assert_eq!(parse_intent(prompt), parse_intent(&normalized), "{prompt}");
            assert_eq!(tokens_to_text(&tokenize(&normalized)), normalized);
        }
    }

    #[test]
    fn lexicon_rejects_conflicts() {
        let err = Lexicon::from_toml_str("version = 1\n[kinds]\nbutton = \"Button\"\n[styles]\nbutton = \"Basic\"\n")
            .unwrap_err();
        assert!(matches!(err, LexiconError::Conflict { .. }));
    }

    #[test]
    fn lexicon_rejects_bad_version_and_targets() {
        assert!(matches!(Lexicon::from_toml_str("version = 7"), Err(LexiconError::Version(7))));
        assert!(matches!(
            Lexicon::from_toml_str("version = 1\n[kinds]\nslider = \"Slider\"\n"),
            Err(LexiconError::BadTarget { .. })
        ));
    }

    #[test]
    fn lexicon_from_json() {
        let lex = Lexicon::from_json_str(r#"{"version":1,"kinds":{"knopf":"Button"}}"#).unwrap();
        assert_eq!(lex.parse_intent("ein knopf").unwrap().kind, ComponentKind::Button);
    }

    #[test]
    fn builtin_lexicon_loads() {
        let lex = Lexicon::builtin();
        assert_eq!(lex.version(), 1);
        assert_eq!(lex.lookup("Drop Shadow"), Some(&Term::Effect("DROP_SHADOW".into())));
        assert_eq!(lex.first_kind("Create a Basic Menu list"), Some(ComponentKind::MenuList));
    }
}
