use std::collections::HashMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cogen_cli::commands::{self, CliError, EvalOptions, ExtractSource, Protocol, SynthInput, SynthOptions};
use cogen_cli::config::{ConfigLayer, RunConfig, DEFAULT_CONFIG_FILE};
use cogen_core::adapter::{AdapterSpec, Direction};
use cogen_core::eval::DEFAULT_SIZES;
use cogen_core::synth::SplitRatios;

/// Translate between text prompts and Figma component JSON.
///
/// Exit codes: 0 ok, 1 other error, 2 authentication, 3 parse/validation,
/// 4 no component kind in the prompt.
#[derive(Debug, Parser)]
#[command(name = "cogen", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Config file (default: ./cogen.toml if present).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// describer | generator[:flat|:nested] | exec:<command>
    #[arg(long, global = true)]
    adapter: Option<String>,
    /// Output schema of generated JSON: flat or nested.
    #[arg(long, global = true)]
    schema: Option<String>,
    /// Style preset table (JSON).
    #[arg(long, global = true)]
    presets: Option<PathBuf>,
    /// Prompt lexicon (TOML or JSON).
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Timeout for external adapters, in seconds.
    #[arg(long, global = true)]
    timeout_secs: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract flat and nested component JSON from a Figma file.
    Extract {
        /// Offline Figma file-response dump.
        #[arg(long, conflicts_with = "key", required_unless_present = "key")]
        file: Option<PathBuf>,
        /// Figma file key to fetch over the REST API.
        #[arg(long)]
        key: Option<String>,
        /// Figma personal access token (or FIGMA_TOKEN).
        #[arg(long)]
        token: Option<String>,
        /// Serve the file from the cache without network access.
        #[arg(long, requires = "key")]
        offline: bool,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = "components")]
        out: PathBuf,
    },
    /// Build a JSONL prompt/JSON dataset.
    Synth {
        /// Directory of component JSON files.
        #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
        input: Option<PathBuf>,
        /// Number of random specs to draw from the preset table instead.
        #[arg(long)]
        synthetic: Option<usize>,
        /// train,val,test fractions.
        #[arg(long, default_value = "0.8,0.1,0.1")]
        ratios: String,
        /// Prompts per spec.
        #[arg(long, default_value_t = 1)]
        variants: usize,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print component JSON for a prompt.
    Generate {
        prompt: String,
        /// Also write the plugin instruction list to this file.
        #[arg(long)]
        emit_instructions: Option<PathBuf>,
    },
    /// Print a prompt describing a component JSON file.
    Describe { json: PathBuf },
    /// Score an adapter.
    Eval {
        /// JSONL dataset (required for the subset protocol).
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Comma-separated subset sizes.
        #[arg(long, default_value = "100,200,300,400,500")]
        sizes: String,
        #[arg(long, value_enum)]
        direction: Option<DirectionArg>,
        #[arg(long, value_enum, default_value = "subset")]
        protocol: ProtocolArg,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the local HTTP service for the Figma plugin.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        /// Address to bind instead of 127.0.0.1.
        #[arg(long)]
        bind: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    PromptToJson,
    JsonToPrompt,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Subset,
    SuccessRate,
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Other(anyhow::anyhow!("invalid {what} {s:?}"))))
        .collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = cli.global;
    let mut flags = ConfigLayer {
        adapter: g.adapter,
        schema: g.schema,
        presets: g.presets,
        lexicon: g.lexicon,
        seed: g.seed,
        timeout_secs: g.timeout_secs,
        ..Default::default()
    };
    match &cli.command {
        Command::Extract { token, cache_dir, out, .. } => {
            flags.token = token.clone();
            flags.cache_dir = cache_dir.clone();
            flags.out = Some(out.clone());
        }
        Command::Serve { port, bind } => {
            flags.port = port.map(u64::from);
            flags.bind = bind.clone();
        }
        _ => {}
    }
    let file = match &g.config {
        Some(path) => ConfigLayer::load(path, true),
        None => ConfigLayer::load(Path::new(DEFAULT_CONFIG_FILE), false),
    }
    .map_err(anyhow::Error::from)?;
    let env: HashMap<String, String> = std::env::vars().collect();
    let config = RunConfig::layered(flags, &env, file).map_err(anyhow::Error::from)?;

    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Extract { file, key, offline, out: out_dir, .. } => {
            let source = match (file, key) {
                (Some(path), _) => ExtractSource::Path(path),
                (None, Some(key)) => ExtractSource::FileKey { key, offline },
                (None, None) => unreachable!("clap requires --file or --key"),
            };
            commands::extract(&source, &config, &out_dir, &mut out)?;
        }
        Command::Synth { input, synthetic, ratios, variants, out: path } => {
            let r: Vec<f64> = parse_list(&ratios, "ratio")?;
            let [train, val, test] = r[..] else {
                return Err(CliError::Other(anyhow::anyhow!("--ratios needs three values")));
            };
            let opts = SynthOptions {
                input: match (input, synthetic) {
                    (Some(dir), _) => SynthInput::Dir(dir),
                    (None, Some(n)) => SynthInput::Synthetic(n),
                    (None, None) => unreachable!("clap requires --input or --synthetic"),
                },
                ratios: SplitRatios::new(train, val, test).map_err(anyhow::Error::from)?,
                variants,
            };
            let n = match path {
                Some(path) => commands::synth(&opts, &config, &mut io::BufWriter::new(std::fs::File::create(path)?))?,
                None => commands::synth(&opts, &config, &mut out)?,
            };
            eprintln!("wrote {n} records");
        }
        Command::Generate { prompt, emit_instructions } => {
            commands::generate(&prompt, &config, emit_instructions.as_deref(), &mut out)?;
        }
        Command::Describe { json } => commands::describe(&json, &config, &mut out)?,
        Command::Eval { dataset, sizes, direction, protocol, out: report } => {
            let direction = match direction {
                Some(DirectionArg::PromptToJson) => Direction::PromptToJson,
                Some(DirectionArg::JsonToPrompt) => Direction::JsonToPrompt,
                None if config.adapter == AdapterSpec::Describer => Direction::JsonToPrompt,
                None => Direction::PromptToJson,
            };
            let opts = EvalOptions {
                dataset,
                sizes: if sizes.is_empty() { DEFAULT_SIZES.to_vec() } else { parse_list(&sizes, "size")? },
                direction,
                protocol: match protocol {
                    ProtocolArg::Subset => Protocol::Subset,
                    ProtocolArg::SuccessRate => Protocol::SuccessRate,
                },
                report,
            };
            commands::eval(&opts, &config, &mut out)?;
        }
        Command::Serve { .. } => commands::serve(&config)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
