//! The `modelgate` command line.

use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};
use modelgate_core::assessor::watch;
use modelgate_core::{
    AssessmentReport, Assessor, Hat, Library, QualityAttribute, ReportFormat, ReviewStatus, Stage, StoreError, Verdict,
    WatchEvent, WatchSession,
};

use crate::api::{self, AppState};
use crate::{DEFAULT_AUTHOR, DEFAULT_PORT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
/// `assess` on an entry whose stage is vague.
pub const EXIT_VAGUE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "modelgate", version, about = "Quality-gated library of class models")]
pub struct Cli {
    /// Library root directory.
    #[arg(long, global = true, env = "MODELGATE_ROOT", default_value = ".")]
    pub root: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an empty library in <dir>.
    Init { dir: PathBuf },
    /// Add a new entry from a model file.
    Add {
        entry: String,
        file: PathBuf,
        #[arg(long, default_value = DEFAULT_AUTHOR)]
        author: String,
    },
    /// Commit a model file as the next snapshot of an entry.
    Commit {
        entry: String,
        file: PathBuf,
        #[arg(long, default_value = DEFAULT_AUTHOR)]
        author: String,
    },
    /// Print the assessment of an entry's head snapshot. Exits 3 when vague.
    Assess {
        entry: String,
        #[arg(long, default_value = "text")]
        format: ReportFormat,
    },
    /// Commit and assess a model file every time it is saved.
    Watch {
        entry: String,
        file: PathBuf,
        #[arg(long, default_value = DEFAULT_AUTHOR)]
        author: String,
        #[arg(long, default_value_t = 200)]
        debounce_ms: u64,
    },
    /// Print an entry's stage, e.g. `fine (green)`.
    Stage { entry: String },
    /// File, list and resolve hat reviews.
    #[command(subcommand)]
    Review(ReviewCommand),
    /// Record a pass/fail verdict on a weak attribute of the head snapshot.
    Attest {
        entry: String,
        attribute: QualityAttribute,
        #[arg(long)]
        verdict: Verdict,
        #[arg(long, default_value = DEFAULT_AUTHOR)]
        reviewer: String,
    },
    /// Accept or revoke acceptance of a medium finding.
    #[command(subcommand)]
    Override(OverrideCommand),
    /// Serve the HTTP API and event stream.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Serve GETs only; no writer lock is taken.
        #[arg(long)]
        read_only: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReviewCommand {
    Add {
        entry: String,
        #[arg(long)]
        hat: Hat,
        #[arg(long)]
        text: String,
        #[arg(long, default_value = DEFAULT_AUTHOR)]
        author: String,
    },
    List { entry: String },
    Done { id: String },
    Reopen { id: String },
}

#[derive(Debug, Subcommand)]
pub enum OverrideCommand {
    Add {
        entry: String,
        metric: String,
        path: String,
        #[arg(long)]
        why: String,
        #[arg(long, default_value = DEFAULT_AUTHOR)]
        author: String,
    },
    Revoke { entry: String, metric: String, path: String },
}

enum Failure {
    Store(StoreError),
    Other(String),
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        Failure::Store(e)
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => return usage_error(e, &args, out, err),
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(Failure::Store(e)) => {
            let _ = writeln!(err, "error[{}]: {e}", e.code());
            EXIT_DOMAIN
        }
        Err(Failure::Other(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DOMAIN
        }
    }
}

fn usage_error(e: clap::Error, args: &[OsString], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
        let _ = write!(out, "{}", e.render());
        return EXIT_OK;
    }
    let _ = writeln!(err, "{}", e.render());
    // follow the subcommand path as far as it goes and show its help
    let mut current = Cli::command();
    let mut path = vec![current.get_name().to_string()];
    for arg in args.iter().skip(1).filter_map(|a| a.to_str()) {
        match current.find_subcommand(arg).cloned() {
            Some(sub) => {
                path.push(arg.to_string());
                current = sub;
            }
            None if arg.starts_with('-') => continue,
            None => break,
        }
    }
    if path.len() > 1 {
        let _ = writeln!(err, "{}", current.bin_name(path.join(" ")).render_help());
    }
    EXIT_USAGE
}

fn read_model(file: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(file).map_err(|e| Failure::Other(format!("cannot read {}: {e}", file.display())))
}

fn writer(root: &Path) -> Result<Assessor, StoreError> {
    Ok(Assessor::new(Library::open(root)?))
}

fn reader(root: &Path) -> Result<Assessor, StoreError> {
    Ok(Assessor::new(Library::open_read_only(root)?))
}

fn summary(out: &mut dyn Write, r: &AssessmentReport) -> std::io::Result<()> {
    writeln!(out, "{} @ snapshot {}", r.entry_id, r.seq_no)?;
    writeln!(out, "stage: {}", r.stage.label())?;
    writeln!(out, "findings: {} ({} new, {} resolved)", r.findings.len(), r.delta.new.len(), r.delta.resolved.len())
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let root = cli.root;
    let io = |e: std::io::Error| Failure::Other(e.to_string());
    match cli.command {
        Command::Init { dir } => {
            Library::init(&dir)?;
            writeln!(out, "initialized library at {}", dir.display()).map_err(io)?;
        }
        Command::Add { entry, file, author } => {
            let src = read_model(&file)?;
            let (_, _, report) = writer(&root)?.create_entry(&entry, &src, &author)?;
            summary(out, &report).map_err(io)?;
        }
        Command::Commit { entry, file, author } => {
            let src = read_model(&file)?;
            let (outcome, report) = writer(&root)?.commit(&entry, &src, &author)?;
            if outcome.no_op {
                writeln!(out, "no content change; head stays at snapshot {}", outcome.snapshot.seq_no).map_err(io)?;
            }
            summary(out, &report).map_err(io)?;
        }
        Command::Assess { entry, format } => {
            // with `serve` holding the lock, evaluate without caching
            let report = match writer(&root) {
                Ok(a) => {
                    a.assess(&entry)?;
                    a.full_report(&entry, format)?
                }
                Err(StoreError::Locked { .. }) => {
                    let a = reader(&root)?;
                    let r = a.evaluate(&entry)?;
                    match format {
                        ReportFormat::Json => serde_json::to_string_pretty(&r).map_err(|e| Failure::Other(e.to_string()))?,
                        ReportFormat::Text => modelgate_core::assessor::render_text(&r),
                    }
                }
                Err(e) => return Err(e.into()),
            };
            write!(out, "{report}").map_err(io)?;
            if !report.ends_with('\n') {
                writeln!(out).map_err(io)?;
            }
            let stage = reader(&root)?.latest(&entry)?.stage;
            if stage == Stage::Vague {
                return Ok(EXIT_VAGUE);
            }
        }
        Command::Watch { entry, file, author, debounce_ms } => {
            let a = writer(&root)?;
            let mut session = WatchSession::new(&file, &entry);
            session.author = author;
            session.debounce = Duration::from_millis(debounce_ms);
            let stop = AtomicBool::new(false);
            writeln!(out, "watching {} for entry {entry}", file.display()).map_err(io)?;
            watch(&a, &session, &stop, |ev| {
                let _ = match ev {
                    WatchEvent::Report(r) => summary(out, &r).and_then(|_| out.flush()),
                    WatchEvent::ParseFailure(e) => writeln!(err, "parse error (not committed): {e}"),
                    WatchEvent::Ended { reason } => writeln!(out, "watch ended: {reason}"),
                };
            })?;
        }
        Command::Stage { entry } => {
            let report = reader(&root)?.latest(&entry)?;
            writeln!(out, "{}", report.stage.label()).map_err(io)?;
        }
        Command::Review(cmd) => match cmd {
            ReviewCommand::Add { entry, hat, text, author } => {
                let (review, report) = writer(&root)?.add_review(&entry, hat, &text, &author)?;
                writeln!(out, "{}", review.review_id).map_err(io)?;
                writeln!(out, "stage: {}", report.stage.label()).map_err(io)?;
            }
            ReviewCommand::List { entry } => {
                for r in reader(&root)?.library().meta(&entry)?.reviews {
                    writeln!(out, "{}\t{}\t{}\tsnapshot {}\t{}", r.review_id, r.hat.as_str(), r.status, r.snapshot_ref, r.text)
                        .map_err(io)?;
                }
            }
            ReviewCommand::Done { id } => set_status(&root, &id, ReviewStatus::Done, out)?,
            ReviewCommand::Reopen { id } => set_status(&root, &id, ReviewStatus::Reopened, out)?,
        },
        Command::Attest { entry, attribute, verdict, reviewer } => {
            let (att, report) = writer(&root)?.record_attestation(&entry, attribute, verdict, &reviewer)?;
            writeln!(out, "{} {} on {}", att.attribute, verdict_str(att.verdict), att.content_hash).map_err(io)?;
            writeln!(out, "stage: {}", report.stage.label()).map_err(io)?;
        }
        Command::Override(cmd) => match cmd {
            OverrideCommand::Add { entry, metric, path, why, author } => {
                let (_, report) = writer(&root)?.record_override(&entry, &metric, &path, &why, &author)?;
                writeln!(out, "overridden {metric} at {path}").map_err(io)?;
                writeln!(out, "stage: {}", report.stage.label()).map_err(io)?;
            }
            OverrideCommand::Revoke { entry, metric, path } => {
                let (_, report) = writer(&root)?.revoke_override(&entry, &metric, &path)?;
                writeln!(out, "revoked override of {metric} at {path}").map_err(io)?;
                writeln!(out, "stage: {}", report.stage.label()).map_err(io)?;
            }
        },
        Command::Serve { port, bind, read_only } => {
            let assessor = if read_only { reader(&root)? } else { writer(&root)? };
            let state = Arc::new(AppState::new(assessor));
            let rt = tokio::runtime::Runtime::new().map_err(io)?;
            let mode = if read_only { " (read-only)" } else { "" };
            rt.block_on(api::serve(state, SocketAddr::new(bind, port), |addr| {
                let _ = writeln!(out, "listening on http://{addr}{mode}");
                let _ = out.flush();
            }))
            .map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
    }
}

fn set_status(root: &Path, id: &str, to: ReviewStatus, out: &mut dyn Write) -> Result<(), Failure> {
    let (review, report) = writer(root)?.set_review_status(id, to)?;
    let io = |e: std::io::Error| Failure::Other(e.to_string());
    writeln!(out, "{}: {}", review.review_id, review.status).map_err(io)?;
    writeln!(out, "stage: {}", report.stage.label()).map_err(io)
}
