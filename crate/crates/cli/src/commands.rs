//! Subcommand implementations. Each writes its primary payload to `out` so
//! the commands can be driven from tests as well as from `main`.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use cogen_core::adapter::{AdapterError, AdapterSpec, Direction, GenerationRequest, Generator};
use cogen_core::emitter::{map_to_figma, nest, validate_json, ValidationError};
use cogen_core::eval::{
    default_prompt_suite, subset_eval, success_rate_table, success_table_text, DatasetKeys, EvalError,
};
use cogen_core::extract::{extract_document, load_file, ExtractError, FigmaClient, FileCache};
use cogen_core::parser::ParseError;
use cogen_core::synth::{build_dataset, load_jsonl, synthetic_corpus, write_jsonl, SpecDocument, SplitRatios};
use cogen_core::{FlatComponentSpec, NestedNode};

use crate::config::RunConfig;
use crate::service::{self, AppState};

/// A command failure with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Auth(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    NoComponentKind(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Auth(_) => 2,
            CliError::Invalid(_) => 3,
            CliError::NoComponentKind(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

impl From<ExtractError> for CliError {
    fn from(e: ExtractError) -> Self {
        match e {
            ExtractError::Auth(_) | ExtractError::MissingToken => CliError::Auth(e.to_string()),
            ExtractError::MalformedDocument(_) => CliError::Invalid(e.to_string()),
            other => CliError::Other(other.into()),
        }
    }
}

impl From<ValidationError> for CliError {
    fn from(e: ValidationError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::NoComponentKind(e.to_string())
    }
}

impl From<AdapterError> for CliError {
    fn from(e: AdapterError) -> Self {
        match e {
            AdapterError::Parse(p) => p.into(),
            AdapterError::Validation(v) => v.into(),
            other => CliError::Other(other.into()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::BadRecord { .. } => CliError::Invalid(e.to_string()),
            other => CliError::Other(other.into()),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// Where `extract` reads the Figma file from.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtractSource {
    Path(PathBuf),
    FileKey { key: String, offline: bool },
}

/// `Professional/Button/Default` + `State=Hover` → `professional-button-default--state-hover`.
pub fn file_stem(spec: &FlatComponentSpec) -> String {
    let slug = |s: &str| {
        let mut out = String::new();
        for c in s.chars() {
            if c.is_ascii_alphanumeric() {
                out.push(c.to_ascii_lowercase());
            } else if !out.ends_with('-') && !out.is_empty() {
                out.push('-');
            }
        }
        out.trim_end_matches('-').to_string()
    };
    let mut stem = slug(&spec.name.to_string());
    let variant: Vec<String> = spec.variant_properties.iter().map(|(k, v)| slug(&format!("{k} {v}"))).collect();
    if !variant.is_empty() {
        stem.push_str("--");
        stem.push_str(&variant.join("-"));
    }
    stem
}

/// Writes `<stem>.flat.json` and `<stem>.nested.json` per variant and reports
/// the written paths on `out`, warnings on stderr.
pub fn extract(
    source: &ExtractSource,
    config: &RunConfig,
    out_dir: &Path,
    out: &mut dyn Write,
) -> CliResult<Vec<PathBuf>> {
    let doc = match source {
        ExtractSource::Path(path) => load_file(path)?,
        ExtractSource::FileKey { key, offline } => FigmaClient::new(config.token.clone())
            .with_base_url(&config.figma_api)
            .with_cache(FileCache::new(&config.cache_dir))
            .offline(*offline)
            .fetch_file(key)?,
    };
    let found = extract_document(&doc);
    for w in &found.warnings {
        eprintln!("warning: {w}");
    }
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for (flat, nested) in found.flat.iter().zip(&found.nested) {
        let mut stem = file_stem(flat);
        let mut n = 2;
        while written.contains(&out_dir.join(format!("{stem}.flat.json"))) {
            stem = format!("{}-{n}", file_stem(flat));
            n += 1;
        }
        for (suffix, body) in [("flat", flat.to_pretty_json()), ("nested", nested.to_pretty_json())] {
            let path = out_dir.join(format!("{stem}.{suffix}.json"));
            fs::write(&path, body + "\n")?;
            writeln!(out, "{}", path.display())?;
            written.push(path);
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthInput {
    /// Extracted `*.json` component documents in a directory.
    Dir(PathBuf),
    /// `n` random specs drawn from the preset table.
    Synthetic(usize),
}

pub struct SynthOptions {
    pub input: SynthInput,
    pub ratios: SplitRatios,
    pub variants: usize,
}

fn read_spec_dir(dir: &Path) -> CliResult<Vec<SpecDocument>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut specs = Vec::with_capacity(paths.len());
    for path in paths {
        let doc = validate_json(&fs::read_to_string(&path)?)
            .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        specs.push(match doc.to_nested() {
            Some(tree) => SpecDocument::Nested(tree),
            None => SpecDocument::Flat(doc.to_flat()),
        });
    }
    Ok(specs)
}

/// Builds the JSONL dataset and writes it to `out`.
pub fn synth(opts: &SynthOptions, config: &RunConfig, out: &mut dyn Write) -> CliResult<usize> {
    let specs = match &opts.input {
        SynthInput::Dir(dir) => read_spec_dir(dir)?,
        SynthInput::Synthetic(n) => {
            synthetic_corpus(*n, config.seed, &config.load_presets()?).into_iter().map(SpecDocument::Flat).collect()
        }
    };
    let records = build_dataset(&specs, config.seed, opts.ratios, opts.variants).map_err(anyhow::Error::from)?;
    write_jsonl(&records, out)?;
    Ok(records.len())
}

/// Prints the component JSON for `prompt`; optionally writes plugin instructions.
pub fn generate(prompt: &str, config: &RunConfig, emit_instructions: Option<&Path>, out: &mut dyn Write) -> CliResult {
    let mut adapter = match &config.adapter {
        AdapterSpec::Generator(schema) => {
            Box::new(Generator::new(*schema).with_presets(config.load_presets()?).with_lexicon(config.load_lexicon()?))
        }
        AdapterSpec::Describer => {
            return Err(CliError::Other(anyhow::anyhow!("the describer adapter cannot generate JSON")))
        }
        spec => spec.build(config.seed, config.timeout),
    };
    let json = adapter.generate(&GenerationRequest::new(Direction::PromptToJson, prompt))?;
    let doc = validate_json(&json)?;
    let canonical = match doc.to_nested() {
        Some(tree) => tree.to_canonical_json(),
        None => doc.to_flat().to_canonical_json(),
    };
    writeln!(out, "{canonical}")?;
    if let Some(path) = emit_instructions {
        let tree: NestedNode = doc.to_nested().unwrap_or_else(|| nest(&doc.to_flat()));
        let body = serde_json::to_string_pretty(&map_to_figma(&tree)).expect("instructions serialize");
        fs::write(path, body + "\n")?;
    }
    Ok(())
}

/// Prints one synthesized prompt for the component document at `path`.
pub fn describe(path: &Path, config: &RunConfig, out: &mut dyn Write) -> CliResult {
    let raw = fs::read(path)?;
    let doc = cogen_core::emitter::validate_json_bytes(&raw)?;
    let mut adapter = match &config.adapter {
        AdapterSpec::Exec(_) => config.adapter.build(config.seed, config.timeout),
        _ => AdapterSpec::Describer.build(config.seed, config.timeout),
    };
    let json = serde_json::to_string(&doc.value).expect("document serializes");
    let prompt = adapter.generate(&GenerationRequest::new(Direction::JsonToPrompt, json))?;
    writeln!(out, "{prompt}")?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Subset sweep over the dataset.
    Subset,
    /// Five-prompts-per-kind success-rate table.
    SuccessRate,
}

pub struct EvalOptions {
    pub dataset: Option<PathBuf>,
    pub sizes: Vec<usize>,
    pub direction: Direction,
    pub protocol: Protocol,
    pub report: Option<PathBuf>,
}

/// Runs an evaluation protocol, prints the text table on `out` and writes the
/// JSON report when requested.
pub fn eval(opts: &EvalOptions, config: &RunConfig, out: &mut dyn Write) -> CliResult {
    let mut adapter = config.adapter.build(config.seed, config.timeout);
    let (json, table) = match opts.protocol {
        Protocol::Subset => {
            let path = opts
                .dataset
                .as_ref()
                .ok_or_else(|| CliError::Other(anyhow::anyhow!("--dataset is required for the subset protocol")))?;
            let records = load_jsonl(path).map_err(|e| CliError::Invalid(e.to_string()))?;
            let report = subset_eval(&records, adapter.as_mut(), opts.direction, &opts.sizes)?;
            (report.to_json(), report.to_table())
        }
        Protocol::SuccessRate => {
            let keys = match &opts.dataset {
                Some(path) => {
                    DatasetKeys::from_records(&load_jsonl(path).map_err(|e| CliError::Invalid(e.to_string()))?)
                }
                None => DatasetKeys::required(),
            };
            let rows = success_rate_table(&default_prompt_suite(), adapter.as_mut(), &keys)?;
            (serde_json::to_string_pretty(&rows).expect("rows serialize"), success_table_text(&rows))
        }
    };
    write!(out, "{table}")?;
    if let Some(path) = &opts.report {
        fs::write(path, json + "\n")?;
    }
    Ok(())
}

/// Runs the HTTP service until interrupted.
pub fn serve(config: &RunConfig) -> CliResult {
    let state = AppState {
        presets: config.load_presets()?.into(),
        lexicon: config.load_lexicon()?.into(),
        schema: config.schema,
        seed: config.seed,
    };
    let addr = SocketAddr::new(config.bind, config.port);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(service::serve(addr, state))?;
    Ok(())
}
