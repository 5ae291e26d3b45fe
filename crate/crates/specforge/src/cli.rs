//! The `specforge` command line: `sc` constructs a formula, `ma` checks and
//! repairs a vocabulary, `serve` runs the session API.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use specforge_core::formula::parse::parse_formula_with;
use specforge_core::synthesis::{DerivedRegistry, Membership, Oracle, SpecOracle};
use specforge_core::{Phase, Sort};

use crate::bridge::ProcessSolver;
use crate::config::Config;
use crate::script::OracleScript;
use crate::service::{BoxSolver, SessionManager, SolverFactory};
use crate::session::{
    render_rows, render_text, Quantifier, Reply, Session, SessionError, SessionMode, SessionOptions,
    SessionRequest, Status,
};
use crate::store::SessionStore;

#[derive(Debug, Parser)]
#[command(name = "specforge", version, about = "Construct specifications from classified behaviors")]
pub struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a formula from a theory and an oracle.
    Sc(ScArgs),
    /// Check a vocabulary for adequacy and emit corrections.
    Ma(MaArgs),
    /// Serve the session API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleChoice {
    Interactive,
    Script(PathBuf),
}

impl FromStr for OracleChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "interactive" => Ok(OracleChoice::Interactive),
            _ => match s.strip_prefix("script:") {
                Some(p) if !p.is_empty() => Ok(OracleChoice::Script(PathBuf::from(p))),
                _ => Err("expected `interactive` or `script:FILE`".into()),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantifierArg {
    Exists,
    Forall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MembershipArg {
    Vtt,
    Vff,
}

#[derive(Debug, Args)]
pub struct ScArgs {
    #[arg(long)]
    pub theory: PathBuf,
    /// Derived clause definitions (`def name(params) := formula;`).
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Array length used for every query.
    #[arg(long)]
    pub bound: Option<u32>,
    /// Maximum operators per generated clause.
    #[arg(long)]
    pub k: Option<usize>,
    /// Quantified index variables to introduce.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub quantifier: Option<QuantifierArg>,
    /// `interactive` or `script:FILE`.
    #[arg(long, default_value = "interactive")]
    pub oracle: OracleChoice,
    #[arg(long)]
    pub fragment_check: bool,
    /// Build a precondition and a postcondition from a three-way oracle.
    #[arg(long)]
    pub spec: bool,
    /// Where don't-care behaviors go in the postcondition.
    #[arg(long, value_enum)]
    pub dont_care: Option<MembershipArg>,
    /// Serve the session over HTTP on this port instead of asking here.
    #[arg(long)]
    pub serve: Option<u16>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Append the result to the library under this name.
    #[arg(long, requires = "library")]
    pub define: Option<String>,
}

#[derive(Debug, Args)]
pub struct MaArgs {
    #[arg(long)]
    pub theory: PathBuf,
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Theory file whose `equiv` block is used instead of the main one's.
    #[arg(long)]
    pub equiv: Option<PathBuf>,
    #[arg(long, conflicts_with = "auto_threshold")]
    pub bound: Option<u32>,
    /// Find the bound by checking thresholds up to this value.
    #[arg(long)]
    pub auto_threshold: Option<u32>,
    #[arg(long, default_value = "interactive")]
    pub oracle: OracleChoice,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub port: Option<u16>,
    /// Directory of session logs.
    #[arg(long)]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("aborted: {0}")]
    Aborted(String),
    #[error("{0}")]
    Threshold(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Aborted(_) => 4,
            CliError::Threshold(_) => 5,
        }
    }
}

impl From<SessionError> for CliError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Setup(m) | SessionError::InvalidAnswer(m) => CliError::Parse(m),
            SessionError::Threshold(m) => CliError::Threshold(m),
            SessionError::Solver(m) => CliError::Solver(m),
            SessionError::Conflict(m) | SessionError::Log(m) => CliError::Io(m),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    let c = match path {
        Some(p) => Config::load(p).map_err(|e| CliError::Parse(e.to_string()))?,
        None => Config::default(),
    };
    Ok(c.with_env())
}

fn factory(config: &Config) -> SolverFactory {
    let config = config.clone();
    Arc::new(move || ProcessSolver::new(config.clone()).map(|s| Box::new(s) as BoxSolver))
}

fn registry(library: Option<&str>) -> Result<DerivedRegistry, CliError> {
    let mut r = DerivedRegistry::new();
    if let Some(lib) = library {
        r.parse_library(lib).map_err(|e| CliError::Parse(e.to_string()))?;
    }
    Ok(r)
}

/// Where answers come from.
enum Answers<'a> {
    Script(OracleScript),
    Interactive { input: &'a mut dyn BufRead },
}

enum Turn {
    Reply(Reply, Option<BTreeSet<String>>),
    Undo,
    Quit(String),
}

fn ask(session: &Session, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<Turn, CliError> {
    let b = session.pending().expect("a pending query");
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    write!(out, "\n{}", render_text(&render_rows(b, session.decls()))).map_err(io)?;
    let choices = if session.mode() == SessionMode::ConstructSpec { "g/b/d" } else { "t/f" };
    let mut reason = None;
    loop {
        write!(out, "{choices} (reason: v1,v2 | undo | quit)? ").map_err(io)?;
        out.flush().map_err(io)?;
        let mut line = String::new();
        if input.read_line(&mut line).map_err(io)? == 0 {
            return Ok(Turn::Quit("end of input".into()));
        }
        let (head, tail) = match line.find("reason:") {
            Some(k) => (&line[..k], Some(&line[k + "reason:".len()..])),
            None => (line.as_str(), None),
        };
        if let Some(t) = tail {
            reason = Some(t.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect());
        }
        match head.trim() {
            // A bare `reason:` line applies to the next reply.
            "" => continue,
            "undo" | "u" => return Ok(Turn::Undo),
            "quit" | "q" => return Ok(Turn::Quit("stopped by the user".into())),
            word => match word.parse::<Reply>() {
                Ok(r) => return Ok(Turn::Reply(r, reason)),
                Err(e) => writeln!(out, "{e}").map_err(io)?,
            },
        }
    }
}

/// Answer queries until the session finishes.
fn drive(
    session: &mut Session,
    answers: &mut Answers<'_>,
    solver: &mut ProcessSolver,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    while session.status() == Status::AwaitingAnswer {
        let b = session.pending().expect("a pending query").clone();
        let turn = match answers {
            Answers::Script(s) => {
                let r = if session.mode() == SessionMode::ConstructSpec {
                    SpecOracle::classify(s, &b).map(Reply::from)
                } else {
                    Oracle::classify(s, &b).map(|a| Reply::from(a.membership))
                };
                match r {
                    Ok(r) => Turn::Reply(r, None),
                    Err(a) => Turn::Quit(a.0),
                }
            }
            Answers::Interactive { input } => ask(session, *input, out)?,
        };
        let step = match turn {
            Turn::Reply(r, reason) => session.answer(r, reason, None, solver).map(|_| ()),
            Turn::Undo => session.undo(solver),
            Turn::Quit(m) => {
                session.abort(m.clone())?;
                return Err(CliError::Aborted(m));
            }
        };
        match step {
            Ok(()) => {}
            Err(SessionError::InvalidAnswer(m) | SessionError::Conflict(m))
                if matches!(answers, Answers::Interactive { .. }) =>
            {
                writeln!(out, "{m}").map_err(|e| CliError::Io(e.to_string()))?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    match session.status() {
        Status::Done => Ok(()),
        Status::Failed => Err(CliError::Solver(session.message().unwrap_or("failed").to_string())),
        s => Err(CliError::Aborted(format!("session ended {s:?}"))),
    }
}

fn answers_for<'a>(
    choice: &OracleChoice,
    reg: &DerivedRegistry,
    bound: Option<u32>,
    input: &'a mut dyn BufRead,
) -> Result<Answers<'a>, CliError> {
    Ok(match choice {
        OracleChoice::Interactive => Answers::Interactive { input },
        OracleChoice::Script(p) => Answers::Script(
            OracleScript::parse(&read(p)?, reg)
                .map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?
                .with_bound(bound),
        ),
    })
}

/// Run one session locally and print its result.
fn run_local(
    request: SessionRequest,
    choice: &OracleChoice,
    config: &Config,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<Session, CliError> {
    let reg = registry(request.library.as_deref())?;
    let mut solver = ProcessSolver::new(config.clone()).map_err(|e| CliError::Solver(e.to_string()))?;
    let mut session = Session::create(request, &mut solver)?;
    let mut answers = answers_for(choice, &reg, session.bound(), input)?;
    drive(&mut session, &mut answers, &mut solver, out)?;
    Ok(session)
}

fn define(name: &str, library: &Path, formula: &str, session: &Session) -> Result<(), CliError> {
    let text = read(library)?;
    let reg = registry(Some(&text))?;
    let resolver = |n: &str, args: &[String]| reg.instantiate(n, args).map_err(|e| e.to_string());
    let f = parse_formula_with(formula, Some(&resolver), None).map_err(|e| CliError::Parse(e.to_string()))?;
    let free = f.free_vars();
    let params: Vec<String> = session
        .decls()
        .iter()
        .filter(|d| d.phase != Phase::Dummy && free.contains(&d.name))
        .map(|d| {
            let sort = match d.sort {
                Sort::Bool => "bool",
                Sort::Int => "int",
                Sort::ArrayOfInt => "int[]",
            };
            format!("{sort} {}", d.name)
        })
        .collect();
    let mut text = text;
    if !text.is_empty() && !text.ends_with('\n') {
        text.push('\n');
    }
    text.push_str(&format!("def {name}({}) := {formula};\n", params.join(", ")));
    // Check the result loads before replacing the file.
    registry(Some(&text))?;
    write_file(library, &text)
}

fn serve_blocking(manager: Arc<SessionManager>, port: u16) -> Result<(), CliError> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    rt.block_on(crate::http::serve(manager, addr)).map_err(|e| CliError::Io(e.to_string()))
}

fn store_for(config: &Config, dir: Option<&Path>) -> Result<Option<SessionStore>, CliError> {
    match dir.or(config.session_dir.as_deref()) {
        Some(d) => SessionStore::open(d).map(Some).map_err(|e| CliError::Io(format!("{}: {e}", d.display()))),
        None => Ok(None),
    }
}

pub fn run_sc(a: &ScArgs, config: &Config, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    let library = a.library.as_deref().map(read).transpose()?;
    let mode = if a.spec {
        SessionMode::ConstructSpec
    } else if a.quantifier == Some(QuantifierArg::Forall) {
        SessionMode::ConstructUniversal
    } else {
        SessionMode::Construct
    };
    let request = SessionRequest {
        theory: read(&a.theory)?,
        library,
        options: SessionOptions {
            mode,
            bound: a.bound,
            k: a.k,
            n: a.n,
            quantifier: a.quantifier.map(|q| match q {
                QuantifierArg::Exists => Quantifier::Exists,
                QuantifierArg::Forall => Quantifier::Forall,
            }),
            fragment_check: a.fragment_check.then_some(true),
            dont_care: a.dont_care.map(|m| match m {
                MembershipArg::Vtt => Membership::Vtt,
                MembershipArg::Vff => Membership::Vff,
            }),
            ..SessionOptions::default()
        },
    };
    if let Some(port) = a.serve {
        let manager = SessionManager::new(factory(config), store_for(config, None)?)
            .map_err(|e| CliError::Io(e.to_string()))?;
        let view = manager.create(request).map_err(|e| match e {
            crate::service::ServiceError::Session(s) => CliError::from(s),
            e => CliError::Solver(e.to_string()),
        })?;
        writeln!(out, "session {} at http://127.0.0.1:{port}/sessions/{}", view.id, view.id)
            .map_err(|e| CliError::Io(e.to_string()))?;
        return serve_blocking(Arc::new(manager), port);
    }
    let session = run_local(request, &a.oracle, config, input, out)?;
    let result = session.result().expect("finished sessions have a result");
    let text = result.render();
    if matches!(a.oracle, OracleChoice::Interactive) {
        writeln!(out).map_err(|e| CliError::Io(e.to_string()))?;
    }
    write!(out, "{text}").map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(p) = &a.out {
        write_file(p, &text)?;
    }
    if let (Some(name), Some(lib), Some(f)) = (&a.define, &a.library, &result.formula) {
        define(name, lib, f, &session)?;
    }
    Ok(())
}

pub fn run_ma(a: &MaArgs, config: &Config, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    let request = SessionRequest {
        theory: read(&a.theory)?,
        library: a.library.as_deref().map(read).transpose()?,
        options: SessionOptions {
            mode: SessionMode::MakeAdequate,
            bound: a.bound,
            equivalence: a.equiv.as_deref().map(read).transpose()?,
            auto_threshold: a.auto_threshold,
            ..SessionOptions::default()
        },
    };
    let session = run_local(request, &a.oracle, config, input, out)?;
    let text = session.result().expect("finished sessions have a result").render();
    write!(out, "{text}").map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(p) = &a.out {
        write_file(p, &text)?;
    }
    Ok(())
}

pub fn run_serve(a: &ServeArgs, config: &Config) -> Result<(), CliError> {
    let manager = SessionManager::new(factory(config), store_for(config, a.dir.as_deref())?)
        .map_err(|e| CliError::Io(e.to_string()))?;
    serve_blocking(Arc::new(manager), a.port.unwrap_or(config.port))
}

pub fn run(cli: &Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    let config = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Sc(a) => run_sc(a, &config, input, out),
        Command::Ma(a) => run_ma(a, &config, input, out),
        Command::Serve(a) => run_serve(a, &config),
    }
}
