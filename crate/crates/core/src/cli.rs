//! Command-line surface.
//!
//! Exit codes: 0 success, 1 bad input or failed validation, 2 runtime or
//! provider failure.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{AgentError, Agents, TemplateSet};
use crate::assets::AssetStore;
use crate::domain::{new_id, validate_outline, Clock, OutlineId, SteppingClock, StoryOutline};
use crate::insight::{aggregate_coping, read_coping_csv, read_sus_csv, render_sus_report, sus_stats};
use crate::provider::{Gateway, ProviderConfig};
use crate::service::{ServiceConfig, ServiceOptions};
use crate::session::{read_log, replay};
use crate::sim::{self, ResponseScript, SimOptions};
use crate::storybook::{self, ExportFormat, StorybookError, Variant};

#[derive(Debug, Parser)]
#[command(name = "taleweave", version, about = "Co-created storybook sessions")]
pub struct Cli {
    /// Provider config document; all-mock when omitted.
    #[arg(long, global = true, env = "TALEWEAVE_PROVIDER_CONFIG")]
    pub provider_config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Headless sessions.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Outline authoring.
    #[command(subcommand)]
    Outline(OutlineCommand),
    /// Compile and write a storybook for a finished session.
    Export(ExportArgs),
    /// Analysis instruments.
    #[command(subcommand)]
    Stats(StatsCommand),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080", env = "TALEWEAVE_LISTEN")]
    pub listen: SocketAddr,
    #[arg(long, default_value = "data", env = "TALEWEAVE_DATA_DIR")]
    pub data_dir: PathBuf,
    #[arg(long, env = "TALEWEAVE_TOKEN_FILE")]
    pub tokens: PathBuf,
    /// Wait for an explicit advance call after each response.
    #[arg(long)]
    pub manual_advance: bool,
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    /// Play one scripted session with mock providers.
    Run {
        #[arg(long)]
        outline: PathBuf,
        #[arg(long)]
        responses: PathBuf,
        #[arg(long, default_value_t = 0, env = "TALEWEAVE_SEED")]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum OutlineCommand {
    /// Extend a brief into a draft outline.
    Gen {
        #[arg(long)]
        brief: String,
        #[arg(long, default_value = "")]
        note: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "TALEWEAVE_SEED")]
        seed: Option<u64>,
    },
    /// Check an outline and list its violations.
    Validate { file: PathBuf },
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// A session log, or a directory holding exactly one under `sessions/`.
    #[arg(long)]
    pub session: PathBuf,
    #[arg(long, default_value = "print")]
    pub variant: Variant,
    #[arg(long, default_value = "plain_text")]
    pub format: ExportFormat,
    /// Root for `exports/`; defaults to the session's data directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Usability scores, spread and normality.
    Sus {
        #[arg(long)]
        input: PathBuf,
    },
    /// Coping-strategy distribution over coded responses.
    Coping {
        #[arg(long)]
        input: PathBuf,
        /// Print the distribution document instead of the table.
        #[arg(long)]
        json: bool,
    },
}

/// A failed command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(1),
            CliError::Runtime(_) => ExitCode::from(2),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Runtime(m) => m,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn provider_config(path: Option<&Path>, seed: Option<u64>) -> Result<ProviderConfig, CliError> {
    let mut cfg = match path {
        Some(p) => ProviderConfig::load(p).map_err(input)?,
        None => ProviderConfig::default(),
    }
    .from_env_overrides()
    .map_err(input)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(input)?;
    Ok(cfg)
}

fn load_outline(path: &Path) -> Result<StoryOutline, CliError> {
    StoryOutline::from_document(&read_input(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// Runs a parsed command line; `out` receives normal output.
pub fn run(cli: Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let config_path = cli.provider_config.as_deref();
    match cli.command {
        Command::Serve(args) => {
            let cfg = ServiceConfig {
                listen: args.listen,
                data_dir: args.data_dir,
                provider_config: cli.provider_config.clone(),
                token_file: args.tokens,
                options: ServiceOptions { auto_advance: !args.manual_advance, ..Default::default() },
            };
            let rt = tokio::runtime::Runtime::new().map_err(runtime)?;
            rt.block_on(crate::service::serve(cfg)).map_err(runtime)
        }
        Command::Sim(SimCommand::Run { outline, responses, seed, out: dir }) => {
            let outline = load_outline(&outline)?;
            let script = ResponseScript::load(&responses).map_err(input)?;
            let result = sim::run(&outline, &script, SimOptions::seeded(seed), &dir);
            match result {
                Ok(run) => {
                    writeln!(
                        out,
                        "{} {} events={} chapters={}",
                        run.summary.session_id,
                        run.summary.state,
                        run.summary.event_count,
                        run.summary.chapters
                    )
                    .map_err(runtime)?;
                    Ok(())
                }
                Err(e) if e.is_input() => Err(input(e)),
                Err(e) => Err(runtime(e)),
            }
        }
        Command::Outline(OutlineCommand::Gen { brief, note, out: path, seed }) => {
            let cfg = provider_config(config_path, seed)?;
            let outline = generate_outline(&cfg, &brief, &note)?;
            let text = outline.to_document().map_err(runtime)?;
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(runtime)?;
            }
            fs::write(&path, text).map_err(runtime)?;
            let result = validate_outline(&outline);
            writeln!(out, "{} \"{}\" -> {}", outline.outline_id, outline.title, path.display()).map_err(runtime)?;
            if !result.is_ok() {
                return Err(input(format!("generated outline is invalid:\n{result}")));
            }
            Ok(())
        }
        Command::Outline(OutlineCommand::Validate { file }) => {
            let outline = load_outline(&file)?;
            let result = validate_outline(&outline);
            if result.is_ok() {
                writeln!(out, "ok").map_err(runtime)?;
                Ok(())
            } else {
                Err(input(result))
            }
        }
        Command::Export(args) => export(args, out),
        Command::Stats(StatsCommand::Sus { input: path }) => {
            let file = fs::File::open(&path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            let responses = read_sus_csv(file).map_err(input)?;
            let analysis = sus_stats(&responses).map_err(input)?;
            write!(out, "{}", render_sus_report(&analysis)).map_err(runtime)
        }
        Command::Stats(StatsCommand::Coping { input: path, json }) => {
            let file = fs::File::open(&path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            let rows = read_coping_csv(file).map_err(input)?;
            let tags: Vec<_> = rows.iter().map(|r| r.tag()).collect();
            let dist = aggregate_coping(&tags).map_err(input)?;
            if json {
                write!(out, "{}", dist.to_document().map_err(runtime)?).map_err(runtime)
            } else {
                write!(out, "{}", dist.render_table()).map_err(runtime)
            }
        }
    }
}

/// Runs the outline agent against a scratch asset store so nothing is
/// written beside the output file.
fn generate_outline(cfg: &ProviderConfig, brief: &str, note: &str) -> Result<StoryOutline, CliError> {
    let scratch = std::env::temp_dir().join(format!("taleweave-outline-{}", std::process::id()));
    let result = (|| {
        let assets = Arc::new(AssetStore::open(&scratch).map_err(runtime)?);
        let gateway = Gateway::from_config(cfg, assets).map_err(input)?;
        let agents = Agents::new(gateway, TemplateSet::builtin());
        let clock = SteppingClock::default();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let id = OutlineId::new(new_id("out", clock.now(), &mut rng));
        agents.outline(id, brief, note, clock.now()).map(|(o, _)| o).map_err(|e| match e {
            AgentError::Precondition { .. } => input(e),
            e => runtime(e),
        })
    })();
    let _ = fs::remove_dir_all(&scratch);
    result
}

fn find_log(session: &Path) -> Result<PathBuf, CliError> {
    if session.is_file() {
        return Ok(session.to_path_buf());
    }
    let dir = session.join("sessions");
    let mut logs: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("log"))
        .collect();
    logs.sort();
    match logs.len() {
        1 => Ok(logs.remove(0)),
        0 => Err(input(format!("no session log under {}", dir.display()))),
        n => Err(input(format!("{n} session logs under {}; pass one log file", dir.display()))),
    }
}

fn export(args: ExportArgs, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let log = find_log(&args.session)?;
    let events = read_log(&log).map_err(input)?;
    let session = replay(&events).map_err(|e| input(format!("{}: {e}", log.display())))?;
    let book = storybook::compile(&session, args.variant).map_err(|e| match e {
        StorybookError::Incomplete { .. } | StorybookError::MissingAnalysis => input(e),
        e => runtime(e),
    })?;
    let root = match args.out {
        Some(root) => root,
        // <root>/sessions/<id>.log
        None => log.parent().and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default(),
    };
    let path = storybook::export(&book, args.format, &root).map_err(runtime)?;
    writeln!(out, "{}", path.display()).map_err(runtime)
}

/// Parses `std::env::args`, runs, and reports errors on stderr.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are input errors; help and version are not errors.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
