//! Interchangeable text-to-text generators.
//!
//! [`Describer`] turns component JSON into a prompt, [`Generator`] turns a
//! prompt into component JSON, and [`ExternalAdapter`] forwards requests to a
//! child process over a one-line-per-message JSON protocol.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emitter::{emit_flat, emit_nested, validate_json, Schema, StylePresetTable, ValidationError};
use crate::parser::{token_texts, Lexicon, ParseError};
use crate::synth::{SynthError, Synthesizer};

pub const DEFAULT_MAX_LENGTH: usize = 512;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    JsonToPrompt,
    PromptToJson,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::JsonToPrompt => "JsonToPrompt",
            Direction::PromptToJson => "PromptToJson",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationRequest {
    pub direction: Direction,
    pub input: String,
    /// Output budget in tokenizer tokens.
    pub max_length: usize,
}

impl GenerationRequest {
    pub fn new(direction: Direction, input: impl Into<String>) -> Self {
        GenerationRequest { direction, input: input.into(), max_length: DEFAULT_MAX_LENGTH }
    }

    pub fn with_max_length(mut self, max_length: usize) -> Self {
        self.max_length = max_length;
        self
    }
}

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("empty generation input")]
    EmptyInput,
    #[error("{adapter} does not support {direction}")]
    Unsupported { adapter: String, direction: Direction },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("output has {tokens} tokens, over the limit of {limit}")]
    OutputTooLong { tokens: usize, limit: usize },
    #[error("could not start adapter command {command:?}: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("adapter did not answer within {0:?}")]
    Timeout(Duration),
    #[error("adapter protocol violation: {0}")]
    Protocol(String),
    #[error("adapter reported an error: {0}")]
    Remote(String),
}

/// A text-to-text generator.
pub trait Adapter {
    fn name(&self) -> String;

    fn generate(&mut self, request: &GenerationRequest) -> Result<String, AdapterError>;
}

fn check_request(request: &GenerationRequest) -> Result<(), AdapterError> {
    if request.input.trim().is_empty() {
        return Err(AdapterError::EmptyInput);
    }
    Ok(())
}

fn check_length(output: String, limit: usize) -> Result<String, AdapterError> {
    let tokens = token_texts(&output).len();
    if tokens > limit {
        return Err(AdapterError::OutputTooLong { tokens, limit });
    }
    Ok(output)
}

/// JSON → prompt: validate, flatten, synthesize.
#[derive(Debug, Clone)]
pub struct Describer {
    pub seed: u64,
}

impl Describer {
    pub fn new(seed: u64) -> Self {
        Describer { seed }
    }
}

impl Default for Describer {
    fn default() -> Self {
        Describer::new(0)
    }
}

impl Adapter for Describer {
    fn name(&self) -> String {
        "describer".into()
    }

    fn generate(&mut self, request: &GenerationRequest) -> Result<String, AdapterError> {
        check_request(request)?;
        if request.direction != Direction::JsonToPrompt {
            return Err(AdapterError::Unsupported { adapter: self.name(), direction: request.direction });
        }
        let doc = validate_json(&request.input)?;
        let prompt = Synthesizer::default().synthesize(&doc.to_flat(), self.seed)?.text;
        check_length(prompt, request.max_length)
    }
}

/// Prompt → JSON: parse, emit from presets, serialize compactly.
#[derive(Debug, Clone)]
pub struct Generator {
    pub schema: Schema,
    presets: StylePresetTable,
    lexicon: Lexicon,
}

impl Generator {
    pub fn new(schema: Schema) -> Self {
        Generator { schema, presets: StylePresetTable::builtin().clone(), lexicon: Lexicon::builtin().clone() }
    }

    pub fn with_presets(mut self, presets: StylePresetTable) -> Self {
        self.presets = presets;
        self
    }

    pub fn with_lexicon(mut self, lexicon: Lexicon) -> Self {
        self.lexicon = lexicon;
        self
    }
}

impl Default for Generator {
    fn default() -> Self {
        Generator::new(Schema::Flat)
    }
}

impl Adapter for Generator {
    fn name(&self) -> String {
        format!("generator({})", self.schema.as_str())
    }

    fn generate(&mut self, request: &GenerationRequest) -> Result<String, AdapterError> {
        check_request(request)?;
        if request.direction != Direction::PromptToJson {
            return Err(AdapterError::Unsupported { adapter: self.name(), direction: request.direction });
        }
        let intent = self.lexicon.parse_intent(&request.input)?;
        let json = match self.schema {
            Schema::Flat => emit_flat(&intent, &self.presets).to_canonical_json(),
            Schema::Nested => emit_nested(&intent, &self.presets).to_canonical_json(),
        };
        check_length(json, request.max_length)
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    direction: Direction,
    input: &'a str,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireResponse {
    output: Option<String>,
    error: Option<String>,
}

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A child process speaking the line protocol: one
/// `{"direction": ..., "input": ...}` per request line on stdin, one
/// `{"output": ...}` or `{"error": ...}` per response line on stdout.
///
/// The process is started lazily, run through `sh -c`, and restarted after a
/// timeout or protocol failure.
pub struct ExternalAdapter {
    command: String,
    timeout: Duration,
    session: Option<Session>,
}

impl fmt::Debug for ExternalAdapter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternalAdapter")
            .field("command", &self.command)
            .field("timeout", &self.timeout)
            .field("running", &self.session.is_some())
            .finish()
    }
}

impl ExternalAdapter {
    pub fn new(command: impl Into<String>, timeout: Duration) -> Self {
        ExternalAdapter { command: command.into(), timeout, session: None }
    }

    /// Starts the child now instead of on the first request.
    pub fn spawn(command: impl Into<String>, timeout: Duration) -> Result<Self, AdapterError> {
        let mut adapter = Self::new(command, timeout);
        adapter.session()?;
        Ok(adapter)
    }

    fn session(&mut self) -> Result<&mut Session, AdapterError> {
        if self.session.is_none() {
            let spawn_err = |source| AdapterError::Spawn { command: self.command.clone(), source };
            let mut child = Command::new("sh")
                .arg("-c")
                .arg(&self.command)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::inherit())
                .spawn()
                .map_err(spawn_err)?;
            let stdin = child.stdin.take().expect("stdin is piped");
            let stdout = child.stdout.take().expect("stdout is piped");
            let (tx, rx) = mpsc::channel();
            thread::spawn(move || {
                for line in BufReader::new(stdout).lines() {
                    if tx.send(line).is_err() {
                        break;
                    }
                }
            });
            self.session = Some(Session { child, stdin, lines: rx });
        }
        Ok(self.session.as_mut().expect("session was just set"))
    }

    fn exchange(&mut self, request: &GenerationRequest) -> Result<String, AdapterError> {
        let timeout = self.timeout;
        let line = serde_json::to_string(&WireRequest { direction: request.direction, input: &request.input })
            .expect("request serializes");
        let session = self.session()?;
        writeln!(session.stdin, "{line}")
            .and_then(|_| session.stdin.flush())
            .map_err(|e| AdapterError::Protocol(format!("write failed: {e}")))?;
        let reply = match session.lines.recv_timeout(timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => return Err(AdapterError::Protocol(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => return Err(AdapterError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                return Err(AdapterError::Protocol("adapter closed its output".into()))
            }
        };
        let response: WireResponse = serde_json::from_str(&reply)
            .map_err(|e| AdapterError::Protocol(format!("bad response line {reply:?}: {e}")))?;
        match response {
            WireResponse { output: Some(out), error: None } => Ok(out),
            WireResponse { output: None, error: Some(err) } => Err(AdapterError::Remote(err)),
            _ => Err(AdapterError::Protocol(format!("expected exactly one of output/error in {reply:?}"))),
        }
    }
}

impl Adapter for ExternalAdapter {
    fn name(&self) -> String {
        format!("exec:{}", self.command)
    }

    fn generate(&mut self, request: &GenerationRequest) -> Result<String, AdapterError> {
        check_request(request)?;
        match self.exchange(request) {
            Ok(out) => check_length(out, request.max_length),
            Err(e @ (AdapterError::Timeout(_) | AdapterError::Protocol(_))) => {
                // the child's state is unknown; restart it on the next request
                self.session = None;
                Err(e)
            }
            Err(e) => Err(e),
        }
    }
}

/// Adapter selection: `describer`, `generator`, `generator:nested` or `exec:<command>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdapterSpec {
    Describer,
    Generator(Schema),
    Exec(String),
}

impl FromStr for AdapterSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "describer" => Ok(AdapterSpec::Describer),
            "generator" | "generator:flat" => Ok(AdapterSpec::Generator(Schema::Flat)),
            "generator:nested" => Ok(AdapterSpec::Generator(Schema::Nested)),
            _ => match s.strip_prefix("exec:") {
                Some(cmd) if !cmd.trim().is_empty() => Ok(AdapterSpec::Exec(cmd.to_string())),
                _ => Err(format!("unknown adapter {s:?}; expected describer, generator[:flat|:nested] or exec:<cmd>")),
            },
        }
    }
}

impl AdapterSpec {
    pub fn build(&self, seed: u64, timeout: Duration) -> Box<dyn Adapter + Send> {
        match self {
            AdapterSpec::Describer => Box::new(Describer::new(seed)),
            AdapterSpec::Generator(schema) => Box::new(Generator::new(*schema)),
            AdapterSpec::Exec(cmd) => Box::new(ExternalAdapter::new(cmd.clone(), timeout)),
        }
    }
}
