//! A [`Solver`] backed by an SMT-LIB2 solver process.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use specforge_core::formula::smtlib::{declarations, len_symbol, symbol};
use specforge_core::formula::SmtWriter;
use specforge_core::solver::{Solver, SolverError, SolverVerdict};
use specforge_core::{Behavior, Formula, Sort, Value, VariableDecl};

use crate::config::Config;
use crate::sexpr::{Reader, Sexp};

/// Longest array read back from a model when no bound fixes the length.
pub const MAX_MODEL_ARRAY: i64 = 256;

struct Process {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    reader: Reader,
}

impl Drop for Process {
    fn drop(&mut self) {
        let _ = writeln!(self.stdin, "(exit)");
        let _ = self.stdin.flush();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Talks to the solver over stdin/stdout, one reply per command.
///
/// Assertions are remembered per scope, so after the process dies the
/// bridge starts a new one, replays them and retries the check once. An
/// `unknown` answer is retried once with twice the timeout.
pub struct ProcessSolver {
    config: Config,
    proc: Option<Process>,
    decls: Vec<VariableDecl>,
    bound: Option<u32>,
    frames: Vec<Vec<String>>,
    writer: SmtWriter,
    /// Every command sent, when enabled.
    pub transcript: Option<Vec<String>>,
    pub checks: u64,
}

impl ProcessSolver {
    pub fn new(config: Config) -> Result<Self, SolverError> {
        let mut s = ProcessSolver {
            config,
            proc: None,
            decls: Vec::new(),
            bound: None,
            frames: vec![Vec::new()],
            writer: SmtWriter::total(),
            transcript: None,
            checks: 0,
        };
        s.start()?;
        Ok(s)
    }

    /// Uses the default configuration with `SPECFORGE_SOLVER` applied.
    pub fn from_env() -> Result<Self, SolverError> {
        ProcessSolver::new(Config::default().with_env())
    }

    fn start(&mut self) -> Result<(), SolverError> {
        self.proc = None;
        let mut child = Command::new(&self.config.solver)
            .args(&self.config.solver_args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolverError::Transport(format!("cannot start {}: {e}", self.config.solver.display())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        self.proc = Some(Process { child, stdin, stdout, reader: Reader::new() });
        self.command("(set-option :print-success true)")?;
        self.command("(set-option :produce-models true)")?;
        self.command("(set-option :produce-unsat-cores true)")?;
        self.set_timeout(self.config.timeout_ms)?;
        Ok(())
    }

    fn set_timeout(&mut self, ms: u64) -> Result<(), SolverError> {
        self.command(&format!("(set-option :timeout {ms})"))
    }

    fn send(&mut self, cmd: &str) -> Result<Sexp, SolverError> {
        log::trace!("smt> {cmd}");
        if let Some(t) = &mut self.transcript {
            t.push(cmd.to_string());
        }
        let p = self.proc.as_mut().ok_or_else(|| SolverError::Transport("solver not running".into()))?;
        writeln!(p.stdin, "{cmd}").and_then(|_| p.stdin.flush()).map_err(|e| SolverError::Transport(e.to_string()))?;
        loop {
            if let Some(x) = p.reader.next().map_err(SolverError::Protocol)? {
                log::trace!("smt< {x}");
                if let Some([Sexp::Atom(e), msg]) = x.list() {
                    if e == "error" {
                        return Err(SolverError::Protocol(format!("{msg} (after `{cmd}`)")));
                    }
                }
                return Ok(x);
            }
            let mut line = String::new();
            let n = p.stdout.read_line(&mut line).map_err(|e| SolverError::Transport(e.to_string()))?;
            if n == 0 {
                return Err(SolverError::Transport("solver closed its output".into()));
            }
            p.reader.feed(&line);
        }
    }

    /// A command whose reply must be `success`.
    fn command(&mut self, cmd: &str) -> Result<(), SolverError> {
        match self.send(cmd)? {
            Sexp::Atom(a) if a == "success" => Ok(()),
            other => Err(SolverError::Protocol(format!("expected success after `{cmd}`, got {other}"))),
        }
    }

    fn declare(&mut self) -> Result<(), SolverError> {
        self.command("(reset)")?;
        // `reset` clears options too.
        self.command("(set-option :print-success true)")?;
        self.command("(set-option :produce-models true)")?;
        self.command("(set-option :produce-unsat-cores true)")?;
        self.set_timeout(self.config.timeout_ms)?;
        for line in declarations(&self.decls, self.bound) {
            self.command(&line)?;
        }
        Ok(())
    }

    fn replay(&mut self) -> Result<(), SolverError> {
        self.start()?;
        self.declare()?;
        let frames = self.frames.clone();
        for (i, frame) in frames.iter().enumerate() {
            if i > 0 {
                self.command("(push 1)")?;
            }
            for cmd in frame {
                self.command(cmd)?;
            }
        }
        Ok(())
    }

    fn check_once(&mut self) -> Result<SolverVerdict, SolverError> {
        self.checks += 1;
        let reply = self.send("(check-sat)")?;
        match reply.atom() {
            Some("sat") => self.model().map(SolverVerdict::Sat),
            Some("unsat") => {
                let core = self.send("(get-unsat-core)")?;
                let names = core
                    .list()
                    .ok_or_else(|| SolverError::Protocol(format!("bad unsat core {core}")))?
                    .iter()
                    .filter_map(|x| x.atom().map(String::from))
                    .collect::<BTreeSet<String>>();
                Ok(SolverVerdict::Unsat(names))
            }
            Some("unknown") => {
                let why = self.send("(get-info :reason-unknown)")?;
                let reason = match why.list() {
                    Some([_, Sexp::Str(s)]) | Some([_, Sexp::Atom(s)]) => s.clone(),
                    _ => why.to_string(),
                };
                Ok(SolverVerdict::Unknown(reason))
            }
            _ => Err(SolverError::Protocol(format!("unexpected check-sat reply {reply}"))),
        }
    }

    fn get_values(&mut self, terms: &[String]) -> Result<Vec<Sexp>, SolverError> {
        if terms.is_empty() {
            return Ok(Vec::new());
        }
        let reply = self.send(&format!("(get-value ({}))", terms.join(" ")))?;
        let pairs = reply.list().ok_or_else(|| SolverError::Protocol(format!("bad get-value reply {reply}")))?;
        if pairs.len() != terms.len() {
            return Err(SolverError::Protocol(format!("get-value returned {} values", pairs.len())));
        }
        pairs
            .iter()
            .map(|p| match p.list() {
                Some([_, v]) => Ok(v.clone()),
                _ => Err(SolverError::Protocol(format!("bad get-value pair {p}"))),
            })
            .collect()
    }

    fn model(&mut self) -> Result<Behavior, SolverError> {
        let mut names = Vec::new();
        for d in &self.decls {
            names.push(match d.sort {
                Sort::ArrayOfInt => len_symbol(&d.name),
                _ => symbol(&d.name),
            });
        }
        let values = self.get_values(&names)?;
        let bad = |v: &Sexp| SolverError::Protocol(format!("unexpected model value {v}"));
        let mut b = Behavior::new();
        let decls = self.decls.clone();
        for (d, v) in decls.iter().zip(&values) {
            let value = match d.sort {
                Sort::Bool => Value::Bool(v.bool().ok_or_else(|| bad(v))?),
                Sort::Int => Value::Int(v.int().ok_or_else(|| bad(v))?),
                Sort::ArrayOfInt => {
                    let len = v.int().ok_or_else(|| bad(v))?.clamp(0, MAX_MODEL_ARRAY);
                    let reads: Vec<String> =
                        (0..len).map(|k| format!("(select {} {k})", symbol(&d.name))).collect();
                    let elems = self.get_values(&reads)?;
                    Value::Array(elems.iter().map(|e| e.int().ok_or_else(|| bad(e))).collect::<Result<_, _>>()?)
                }
            };
            b.insert(d.name.clone(), value);
        }
        Ok(b)
    }
}

impl Solver for ProcessSolver {
    fn reset(&mut self, decls: &[VariableDecl], bound: Option<u32>) -> Result<(), SolverError> {
        self.decls = decls.to_vec();
        self.bound = bound;
        self.frames = vec![Vec::new()];
        if self.declare().is_err() {
            // One fresh process before giving up.
            self.start()?;
            self.declare()?;
        }
        Ok(())
    }

    fn push(&mut self) -> Result<(), SolverError> {
        self.command("(push 1)")?;
        self.frames.push(Vec::new());
        Ok(())
    }

    fn pop(&mut self) -> Result<(), SolverError> {
        if self.frames.len() == 1 {
            return Err(SolverError::Protocol("pop without push".into()));
        }
        self.frames.pop();
        self.command("(pop 1)")
    }

    fn assert(&mut self, f: &Formula, label: Option<&str>) -> Result<(), SolverError> {
        let body = self.writer.formula(f);
        let cmd = match label {
            Some(l) => format!("(assert (! {body} :named {}))", symbol(l)),
            None => format!("(assert {body})"),
        };
        self.command(&cmd)?;
        self.frames.last_mut().expect("base frame").push(cmd);
        Ok(())
    }

    fn check(&mut self) -> Result<SolverVerdict, SolverError> {
        let first = match self.check_once() {
            Err(SolverError::Transport(e)) => {
                log::warn!("solver transport failed ({e}); restarting");
                self.replay()?;
                self.check_once()?
            }
            r => r?,
        };
        if let SolverVerdict::Unknown(reason) = &first {
            log::warn!("solver returned unknown ({reason}); retrying with a longer timeout");
            self.set_timeout(self.config.timeout_ms.saturating_mul(2))?;
            let second = self.check_once();
            self.set_timeout(self.config.timeout_ms)?;
            return second;
        }
        Ok(first)
    }
}

/// The solver the configuration names, if it answers.
pub fn probe(config: &Config) -> Result<String, SolverError> {
    let mut s = ProcessSolver::new(config.clone())?;
    let v = s.send("(get-info :version)")?;
    Ok(match v.list() {
        Some([_, Sexp::Str(s)]) => s.clone(),
        _ => v.to_string(),
    })
}
