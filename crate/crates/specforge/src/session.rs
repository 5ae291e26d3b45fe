//! Event-sourced sessions.
//!
//! A session is its event log. Engine state is never stored: it is rebuilt
//! by running the construction again with every answer that was not
//! retracted. The solver sees the same commands in the same order, so the
//! rebuilt state matches the original one.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use specforge_core::adequacy::AdequacySurvey;
use specforge_core::equivalence::{
    compute_threshold, expand_bounded, EquivalenceError, ThresholdEncoding, ThresholdResult,
};
use specforge_core::solver::Solver;
use specforge_core::synthesis::{
    final_formula, Answer, Classification, ConstructError, DerivedRegistry, FormulaConstruction,
    Membership, Mode, SpecConstruction, SpecPhase, Statistics, Step,
};
use specforge_core::theory::{parse_theory, QuantifierKind, TheoryFile, Vocabulary};
use specforge_core::{Behavior, Formula, Phase, Sort, Value, VariableDecl};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionMode {
    #[default]
    Construct,
    ConstructUniversal,
    MakeAdequate,
    ConstructSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn kind(self) -> QuantifierKind {
        match self {
            Quantifier::Exists => QuantifierKind::Existential,
            Quantifier::Forall => QuantifierKind::Universal,
        }
    }
}

/// Overrides for the options block of the theory, plus what only some
/// modes use.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionOptions {
    pub mode: SessionMode,
    pub bound: Option<u32>,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub quantifier: Option<Quantifier>,
    pub fragment_check: Option<bool>,
    /// Where don't-care behaviors go in the postcondition.
    pub dont_care: Option<Membership>,
    /// A theory file whose `equiv` block replaces the main theory's.
    pub equivalence: Option<String>,
    /// Search for the bound instead of taking it, up to this value.
    pub auto_threshold: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionRequest {
    pub theory: String,
    /// Derived clause definitions the theory may import.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub library: Option<String>,
    #[serde(default)]
    pub options: SessionOptions,
}

impl SessionRequest {
    pub fn new(theory: impl Into<String>) -> Self {
        SessionRequest { theory: theory.into(), library: None, options: SessionOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reply {
    Vtt,
    Vff,
    Good,
    Bad,
    #[serde(rename = "dontcare")]
    DontCare,
}

impl fmt::Display for Reply {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reply::Vtt => "vtt",
            Reply::Vff => "vff",
            Reply::Good => "good",
            Reply::Bad => "bad",
            Reply::DontCare => "dontcare",
        })
    }
}

impl FromStr for Reply {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "t" | "vtt" | "true" => Reply::Vtt,
            "f" | "vff" | "false" => Reply::Vff,
            "g" | "good" => Reply::Good,
            "b" | "bad" => Reply::Bad,
            "d" | "dontcare" => Reply::DontCare,
            other => return Err(format!("unknown classification `{other}`")),
        })
    }
}

impl From<Membership> for Reply {
    fn from(m: Membership) -> Self {
        match m {
            Membership::Vtt => Reply::Vtt,
            Membership::Vff => Reply::Vff,
        }
    }
}

impl From<Classification> for Reply {
    fn from(c: Classification) -> Self {
        match c {
            Classification::Good => Reply::Good,
            Classification::Bad => Reply::Bad,
            Classification::DontCare => Reply::DontCare,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Created {
        request: SessionRequest,
    },
    QueryPosed {
        behavior: Behavior,
    },
    Answered {
        reply: Reply,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<BTreeSet<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nonce: Option<String>,
    },
    /// Takes back the answer at this log position.
    Retracted {
        event: usize,
    },
    SolverStat {
        smt_queries: u64,
        oracle_queries: u64,
    },
    Completed {
        formula: String,
    },
    Failed {
        message: String,
    },
    Aborted {
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    AwaitingAnswer,
    Running,
    Done,
    Failed,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    /// The request does not describe a runnable session.
    #[error("{0}")]
    Setup(String),
    #[error("{0}")]
    Threshold(String),
    #[error("{0}")]
    InvalidAnswer(String),
    /// The session is not in a state that allows the request.
    #[error("{0}")]
    Conflict(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("event log: {0}")]
    Log(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultStatistics {
    pub clauses: usize,
    pub smt_queries: u64,
    pub oracle_queries: u64,
    pub pa_uses: u64,
    pub core_eliminated: u128,
    pub pa_eliminated: u128,
    pub auto_accepted: u64,
}

impl ResultStatistics {
    fn add(&mut self, clauses: usize, s: &Statistics) {
        self.clauses += clauses;
        self.smt_queries += s.smt_queries;
        self.oracle_queries += s.oracle_queries;
        self.pa_uses += s.pa_uses;
        self.core_eliminated += s.core_eliminated;
        self.pa_eliminated += s.pa_eliminated;
        self.auto_accepted += s.auto_accepted;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdequacyOutcome {
    pub bound: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdResult>,
    pub adequate: bool,
    pub summary: String,
    /// One per straddling vocabulary class, minimized.
    pub corrections: Vec<String>,
    /// The vocabulary with the corrections appended.
    pub vocabulary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionResult {
    pub mode: SessionMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre: Option<String>,
    pub statistics: ResultStatistics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adequacy: Option<AdequacyOutcome>,
}

impl SessionResult {
    /// The text the command line tools print and write.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(pre) = &self.pre {
            out.push_str(&format!("Pre: {pre}\n"));
        }
        if let Some(f) = &self.formula {
            out.push_str(&format!("Spec: {f}\n"));
        }
        if let Some(a) = &self.adequacy {
            if let Some(t) = &a.threshold {
                out.push_str(&format!("threshold: {}\n", t.theta));
            }
            out.push_str(&format!("bound: {}\n{}\n", a.bound, a.summary));
            for c in &a.corrections {
                out.push_str(&format!("correction: {c}\n"));
            }
            out.push_str("vocabulary {\n");
            for v in &a.vocabulary {
                out.push_str(&format!("    {v};\n"));
            }
            out.push_str("}\n");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableRow {
    pub name: String,
    pub sort: String,
    pub phase: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryView {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<SpecPhase>,
    pub replies: Vec<Reply>,
    pub variables: Vec<VariableRow>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub clauses: usize,
    /// Valuations of the current vocabulary, or `None` while surveying
    /// equivalence classes.
    pub total: Option<u128>,
    pub processed: u128,
    pub smt_queries: u64,
    pub oracle_queries: u64,
    pub pa_uses: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub theory: String,
    pub mode: SessionMode,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending: Option<QueryView>,
    pub progress: Progress,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub events: usize,
}

/// Rows for the visible variables: inputs first, then outputs, each
/// alphabetical. Dummies are left out.
pub fn render_rows(b: &Behavior, decls: &[VariableDecl]) -> Vec<VariableRow> {
    let sort_of = |n: &str| decls.iter().find(|d| d.name == n).map(|d| (d.sort, d.phase));
    b.visible(decls)
        .into_iter()
        .map(|(name, value)| {
            let (sort, phase) = sort_of(&name).expect("visible names are declared");
            VariableRow {
                sort: match sort {
                    Sort::Bool => "bool",
                    Sort::Int => "int",
                    Sort::ArrayOfInt => "int[]",
                }
                .into(),
                phase: match phase {
                    Phase::Input => "input",
                    Phase::Output => "output",
                    Phase::Dummy => "dummy",
                }
                .into(),
                name,
                value,
            }
        })
        .collect()
}

/// `name = value` lines, in row order.
pub fn render_text(rows: &[VariableRow]) -> String {
    rows.iter().map(|r| format!("{} = {}\n", r.name, r.value)).collect()
}

#[derive(Debug, Clone)]
struct Setup {
    name: String,
    decls: Vec<VariableDecl>,
    bound: Option<u32>,
    mode: SessionMode,
}

#[derive(Debug, Clone)]
enum Engine {
    Construct(FormulaConstruction),
    Spec(SpecConstruction),
    Adequacy { survey: AdequacySurvey, base: Vocabulary, bound: u32, threshold: Option<ThresholdResult> },
}

fn setup_err(e: impl fmt::Display) -> SessionError {
    SessionError::Setup(e.to_string())
}

fn construct_err(e: ConstructError) -> SessionError {
    match e {
        ConstructError::UnknownReason(_) => SessionError::InvalidAnswer(e.to_string()),
        ConstructError::NotPending | ConstructError::Pending => SessionError::Conflict(e.to_string()),
        ConstructError::EmptyVocabulary | ConstructError::TooWide(_) => SessionError::Setup(e.to_string()),
        ConstructError::Solver(_) | ConstructError::SolverUnknown(_) => SessionError::Solver(e.to_string()),
    }
}

fn load_theory(request: &SessionRequest) -> Result<(TheoryFile, DerivedRegistry), SessionError> {
    let mut registry = DerivedRegistry::new();
    if let Some(lib) = &request.library {
        registry.parse_library(lib).map_err(setup_err)?;
    }
    let mut t = parse_theory(&request.theory, &registry).map_err(setup_err)?;
    let o = &request.options;
    if let Some(k) = o.k {
        t.options.max_ops = k;
    }
    if let Some(n) = o.n {
        t.options.quantified = n;
    }
    if let Some(q) = o.quantifier {
        t.options.quantifier = Some(q.kind());
    }
    if let Some(f) = o.fragment_check {
        t.options.fragment_check = f;
    }
    if o.bound.is_some() {
        t.options.bound = o.bound;
    }
    Ok((t, registry))
}

fn build<S: Solver + ?Sized>(request: &SessionRequest, solver: &mut S) -> Result<(Setup, Engine), SessionError> {
    let (t, registry) = load_theory(request)?;
    let (types, vocab) = t.vocabulary().map_err(setup_err)?;
    let mode = request.options.mode;
    let mut setup = Setup { name: t.name.clone(), decls: types.variables.clone(), bound: t.options.bound, mode };
    let engine = match mode {
        SessionMode::Construct | SessionMode::ConstructUniversal => {
            let universal =
                mode == SessionMode::ConstructUniversal || t.quantifier() == Some(QuantifierKind::Universal);
            let m = if universal { Mode::Universal } else { Mode::Existential };
            Engine::Construct(
                FormulaConstruction::new(vocab.formulas(), setup.decls.clone(), setup.bound, m)
                    .map_err(construct_err)?,
            )
        }
        SessionMode::ConstructSpec => {
            let pre_decls: Vec<VariableDecl> =
                setup.decls.iter().filter(|d| d.phase != Phase::Output).cloned().collect();
            let known: BTreeSet<&str> = pre_decls.iter().map(|d| d.name.as_str()).collect();
            let mut pre_vocab: Vec<Formula> = vocab
                .formulas()
                .into_iter()
                .filter(|f| f.free_vars().iter().all(|v| known.contains(v.as_str())))
                .collect();
            if pre_vocab.is_empty() {
                // One query decides between `true` and `false`.
                pre_vocab.push(Formula::True);
            }
            let dont_care = request.options.dont_care.unwrap_or(Membership::Vtt);
            Engine::Spec(
                SpecConstruction::new(
                    (pre_vocab, pre_decls),
                    (vocab.formulas(), setup.decls.clone()),
                    setup.bound,
                    dont_care,
                )
                .map_err(construct_err)?,
            )
        }
        SessionMode::MakeAdequate => {
            let (eq, extra) = match &request.options.equivalence {
                Some(src) => {
                    let e = parse_theory(src, &registry).map_err(setup_err)?;
                    (e.equivalence, e.types.variables)
                }
                None => (t.equivalence.clone(), Vec::new()),
            };
            let eq = eq.ok_or_else(|| SessionError::Setup("no equiv block to survey".into()))?;
            for d in extra {
                if !setup.decls.iter().any(|x| x.name == d.name) {
                    setup.decls.push(d);
                }
            }
            let (bound, threshold) = match request.options.auto_threshold {
                Some(max) => match compute_threshold(&eq, max, ThresholdEncoding::PerSide, solver) {
                    Ok(r) => (r.theta, Some(r)),
                    Err(e @ EquivalenceError::Exhausted { .. }) => return Err(SessionError::Threshold(e.to_string())),
                    Err(EquivalenceError::Solver(e)) => return Err(SessionError::Solver(e.to_string())),
                    Err(e) => return Err(setup_err(e)),
                },
                None => (setup.bound.ok_or_else(|| SessionError::Setup("make-adequate needs a bound".into()))?, None),
            };
            setup.bound = Some(bound);
            let bounded = expand_bounded(&eq, bound).map_err(setup_err)?;
            Engine::Adequacy {
                survey: AdequacySurvey::new(vocab.formulas(), bounded.formulas(), setup.decls.clone(), bound),
                base: vocab,
                bound,
                threshold,
            }
        }
    };
    Ok((setup, engine))
}

impl Engine {
    fn advance<S: Solver + ?Sized>(&mut self, solver: &mut S) -> Result<Option<Behavior>, SessionError> {
        let step = match self {
            Engine::Construct(c) => c.advance(solver).map_err(construct_err)?,
            Engine::Spec(s) => s.advance(solver).map_err(construct_err)?,
            Engine::Adequacy { survey, .. } => {
                survey.advance(solver).map_err(|e| SessionError::Solver(e.to_string()))?
            }
        };
        Ok(match step {
            Step::Query(b) => Some(b.clone()),
            Step::Done => None,
        })
    }

    fn replies(&self) -> Vec<Reply> {
        match self {
            Engine::Spec(_) => vec![Reply::Good, Reply::Bad, Reply::DontCare],
            _ => vec![Reply::Vtt, Reply::Vff],
        }
    }

    fn apply(&mut self, reply: Reply, reason: Option<BTreeSet<String>>) -> Result<(), SessionError> {
        let expected = self.replies().iter().map(Reply::to_string).collect::<Vec<_>>().join(", ");
        let wrong =
            || SessionError::InvalidAnswer(format!("`{reply}` does not answer this query; expected one of {expected}"));
        match self {
            Engine::Construct(c) => {
                let membership = match reply {
                    Reply::Vtt => Membership::Vtt,
                    Reply::Vff => Membership::Vff,
                    _ => return Err(wrong()),
                };
                c.answer(&Answer { membership, reason }).map_err(construct_err)
            }
            Engine::Spec(s) => {
                let class = match reply {
                    Reply::Good => Classification::Good,
                    Reply::Bad => Classification::Bad,
                    Reply::DontCare => Classification::DontCare,
                    _ => return Err(wrong()),
                };
                s.answer(class, reason).map_err(construct_err)
            }
            Engine::Adequacy { survey, .. } => {
                let m = match reply {
                    Reply::Vtt => Membership::Vtt,
                    Reply::Vff => Membership::Vff,
                    _ => return Err(wrong()),
                };
                if reason.is_some() {
                    return Err(SessionError::InvalidAnswer("reasons only apply to constructions".into()));
                }
                survey.answer(m).map_err(|e| SessionError::Conflict(e.to_string()))
            }
        }
    }

    fn progress(&self) -> Progress {
        let of = |c: &FormulaConstruction, p: &mut Progress| {
            let n = c.vocabulary().len();
            let s = c.stats();
            p.clauses = n;
            p.total = Some(1u128 << n);
            p.processed = s.accounted();
            p.smt_queries += s.smt_queries;
            p.oracle_queries += s.oracle_queries;
            p.pa_uses += s.pa_uses;
        };
        let mut p = Progress::default();
        match self {
            Engine::Construct(c) => of(c, &mut p),
            Engine::Spec(s) => {
                let (pre, post) = s.results();
                p.smt_queries = pre.stats.smt_queries;
                p.oracle_queries = pre.stats.oracle_queries;
                p.pa_uses = pre.stats.pa_uses;
                if s.phase() == SpecPhase::Post {
                    p.smt_queries += post.stats.smt_queries;
                    p.oracle_queries += post.stats.oracle_queries;
                    p.pa_uses += post.stats.pa_uses;
                }
                let cur = s.current();
                p.clauses = cur.vocabulary().len();
                p.total = Some(1u128 << p.clauses);
                p.processed = cur.stats().accounted();
            }
            Engine::Adequacy { survey, .. } => {
                let s = survey.stats();
                p.clauses = survey.report().vocabulary.len();
                p.processed = survey.classes().len() as u128;
                p.smt_queries = s.smt_queries;
                p.oracle_queries = s.oracle_queries;
            }
        }
        p
    }

    fn counts(&self) -> (u64, u64) {
        let p = self.progress();
        (p.smt_queries, p.oracle_queries)
    }

    fn result(&self, mode: SessionMode) -> SessionResult {
        let mut statistics = ResultStatistics::default();
        match self {
            Engine::Construct(c) => {
                let r = c.result();
                statistics.add(r.vocabulary.len(), &r.stats);
                SessionResult {
                    mode,
                    formula: Some(final_formula(&r).to_string()),
                    pre: None,
                    statistics,
                    adequacy: None,
                }
            }
            Engine::Spec(s) => {
                let (pre, post) = s.results();
                statistics.add(pre.vocabulary.len(), &pre.stats);
                statistics.add(post.vocabulary.len(), &post.stats);
                let spec = s.specification();
                SessionResult {
                    mode,
                    formula: Some(spec.post.to_string()),
                    pre: Some(spec.pre.to_string()),
                    statistics,
                    adequacy: None,
                }
            }
            Engine::Adequacy { survey, base, bound, threshold } => {
                let report = survey.report();
                statistics.clauses = report.vocabulary.len();
                statistics.smt_queries = report.stats.smt_queries;
                statistics.oracle_queries = report.stats.oracle_queries;
                SessionResult {
                    mode,
                    formula: None,
                    pre: None,
                    statistics,
                    adequacy: Some(AdequacyOutcome {
                        bound: *bound,
                        threshold: threshold.clone(),
                        adequate: report.is_adequate(),
                        summary: report.summary(),
                        corrections: report.simplified_corrections().iter().map(|f| f.to_string()).collect(),
                        vocabulary: report.augmented(base, true).formulas().iter().map(|f| f.to_string()).collect(),
                    }),
                }
            }
        }
    }

    fn phase(&self) -> Option<SpecPhase> {
        match self {
            Engine::Spec(s) => Some(s.phase()),
            _ => None,
        }
    }
}

/// Answers still in force, with their log positions.
fn effective_answers(events: &[Event]) -> Vec<(usize, Reply, Option<BTreeSet<String>>)> {
    let retracted: BTreeSet<usize> = events
        .iter()
        .filter_map(|e| match e {
            Event::Retracted { event } => Some(*event),
            _ => None,
        })
        .collect();
    events
        .iter()
        .enumerate()
        .filter_map(|(k, e)| match e {
            Event::Answered { reply, reason, .. } if !retracted.contains(&k) => Some((k, *reply, reason.clone())),
            _ => None,
        })
        .collect()
}

pub struct Session {
    events: Vec<Event>,
    saved: usize,
    setup: Setup,
    engine: Engine,
    status: Status,
    message: Option<String>,
    result: Option<SessionResult>,
}

impl Session {
    /// Start a session and run it up to its first query.
    pub fn create<S: Solver + ?Sized>(request: SessionRequest, solver: &mut S) -> Result<Session, SessionError> {
        let (setup, engine) = build(&request, solver)?;
        let mut s = Session {
            events: vec![Event::Created { request }],
            saved: 0,
            setup,
            engine,
            status: Status::Running,
            message: None,
            result: None,
        };
        s.drive(solver);
        Ok(s)
    }

    /// Rebuild a session from its log. Events that the log is missing at
    /// the end (a query or completion not yet written) are appended.
    pub fn replay<S: Solver + ?Sized>(events: Vec<Event>, solver: &mut S) -> Result<Session, SessionError> {
        let request = match events.first() {
            Some(Event::Created { request }) => request.clone(),
            _ => return Err(SessionError::Log("the log does not start with a created event".into())),
        };
        let (setup, engine) = Self::rebuild(&request, &events, solver)?;
        let last_change = events
            .iter()
            .rposition(|e| matches!(e, Event::Answered { .. } | Event::Retracted { .. }))
            .unwrap_or(0);
        let mut s = Session {
            saved: events.len(),
            events,
            setup,
            engine,
            status: Status::Running,
            message: None,
            result: None,
        };
        for e in &s.events[last_change..] {
            match e {
                Event::Failed { message } => {
                    s.status = Status::Failed;
                    s.message = Some(message.clone());
                }
                Event::Aborted { message } => {
                    s.status = Status::Aborted;
                    s.message = Some(message.clone());
                }
                _ => {}
            }
        }
        if matches!(s.status, Status::Failed | Status::Aborted) {
            return Ok(s);
        }
        let logged = s.events[last_change..].iter().rev().find_map(|e| match e {
            Event::QueryPosed { behavior } => Some(behavior.clone()),
            _ => None,
        });
        let completed = s.events[last_change..].iter().any(|e| matches!(e, Event::Completed { .. }));
        match s.engine.advance(solver) {
            Ok(Some(b)) => {
                if logged.as_ref() == Some(&b) {
                    s.status = Status::AwaitingAnswer;
                } else {
                    if logged.is_some() {
                        log::warn!("replayed query differs from the logged one; posing it again");
                    }
                    s.pose(b);
                }
            }
            Ok(None) => {
                if completed {
                    s.result = Some(s.engine.result(s.setup.mode));
                    s.status = Status::Done;
                } else {
                    s.complete();
                }
            }
            Err(e) => s.fail(e.to_string()),
        }
        Ok(s)
    }

    fn rebuild<S: Solver + ?Sized>(
        request: &SessionRequest,
        events: &[Event],
        solver: &mut S,
    ) -> Result<(Setup, Engine), SessionError> {
        let (setup, mut engine) = build(request, solver)?;
        for (k, reply, reason) in effective_answers(events) {
            if engine.advance(solver)?.is_none() {
                return Err(SessionError::Log(format!("event {k} answers a finished session")));
            }
            engine.apply(reply, reason).map_err(|e| SessionError::Log(format!("event {k}: {e}")))?;
        }
        Ok((setup, engine))
    }

    fn pose(&mut self, b: Behavior) {
        let (smt_queries, oracle_queries) = self.engine.counts();
        self.events.push(Event::SolverStat { smt_queries, oracle_queries });
        self.events.push(Event::QueryPosed { behavior: b });
        self.status = Status::AwaitingAnswer;
    }

    fn complete(&mut self) {
        let (smt_queries, oracle_queries) = self.engine.counts();
        self.events.push(Event::SolverStat { smt_queries, oracle_queries });
        let r = self.engine.result(self.setup.mode);
        let text = match (&r.formula, &r.adequacy) {
            (Some(f), _) => f.clone(),
            (None, Some(a)) => a.summary.clone(),
            (None, None) => String::new(),
        };
        self.events.push(Event::Completed { formula: text });
        self.result = Some(r);
        self.status = Status::Done;
    }

    fn fail(&mut self, message: String) {
        log::error!("session failed: {message}");
        self.events.push(Event::Failed { message: message.clone() });
        self.message = Some(message);
        self.status = Status::Failed;
    }

    fn drive<S: Solver + ?Sized>(&mut self, solver: &mut S) {
        self.status = Status::Running;
        match self.engine.advance(solver) {
            Ok(Some(b)) => self.pose(b),
            Ok(None) => self.complete(),
            Err(e) => self.fail(e.to_string()),
        }
    }

    /// Record an answer to the pending query and run to the next one.
    /// A nonce seen before makes this a no-op that returns `false`.
    pub fn answer<S: Solver + ?Sized>(
        &mut self,
        reply: Reply,
        reason: Option<BTreeSet<String>>,
        nonce: Option<String>,
        solver: &mut S,
    ) -> Result<bool, SessionError> {
        if let Some(n) = &nonce {
            let seen = self.events.iter().any(|e| matches!(e, Event::Answered { nonce: Some(m), .. } if m == n));
            if seen {
                return Ok(false);
            }
        }
        if self.status != Status::AwaitingAnswer {
            return Err(SessionError::Conflict(format!("session is {:?}, not awaiting an answer", self.status)));
        }
        self.engine.apply(reply, reason.clone())?;
        self.events.push(Event::Answered { reply, reason, nonce });
        self.drive(solver);
        Ok(true)
    }

    /// Retract the latest answer in force and return to its query.
    pub fn undo<S: Solver + ?Sized>(&mut self, solver: &mut S) -> Result<(), SessionError> {
        if matches!(self.status, Status::Aborted | Status::Running) {
            return Err(SessionError::Conflict(format!("cannot undo in a session that is {:?}", self.status)));
        }
        let (k, _, _) = effective_answers(&self.events)
            .pop()
            .ok_or_else(|| SessionError::Conflict("there is no answer to undo".into()))?;
        let mut events = self.events.clone();
        events.push(Event::Retracted { event: k });
        let request = match &events[0] {
            Event::Created { request } => request.clone(),
            _ => unreachable!("sessions start with a created event"),
        };
        let (setup, engine) = Self::rebuild(&request, &events, solver)?;
        self.events = events;
        self.setup = setup;
        self.engine = engine;
        self.message = None;
        self.result = None;
        self.drive(solver);
        Ok(())
    }

    /// Stop the session for good.
    pub fn abort(&mut self, message: impl Into<String>) -> Result<(), SessionError> {
        if matches!(self.status, Status::Done | Status::Aborted) {
            return Err(SessionError::Conflict(format!("session is already {:?}", self.status)));
        }
        let message = message.into();
        self.events.push(Event::Aborted { message: message.clone() });
        self.message = Some(message);
        self.status = Status::Aborted;
        Ok(())
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn message(&self) -> Option<&str> {
        self.message.as_deref()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Events not yet handed out by this method.
    pub fn take_unsaved(&mut self) -> Vec<Event> {
        let out = self.events[self.saved..].to_vec();
        self.saved = self.events.len();
        out
    }

    pub fn decls(&self) -> &[VariableDecl] {
        &self.setup.decls
    }

    pub fn bound(&self) -> Option<u32> {
        self.setup.bound
    }

    pub fn mode(&self) -> SessionMode {
        self.setup.mode
    }

    pub fn phase(&self) -> Option<SpecPhase> {
        self.engine.phase()
    }

    /// The behavior awaiting classification, dummies included.
    pub fn pending(&self) -> Option<&Behavior> {
        if self.status != Status::AwaitingAnswer {
            return None;
        }
        self.events.iter().rev().find_map(|e| match e {
            Event::QueryPosed { behavior } => Some(behavior),
            _ => None,
        })
    }

    pub fn result(&self) -> Option<&SessionResult> {
        self.result.as_ref()
    }

    pub fn view(&self, id: &str) -> SessionView {
        SessionView {
            id: id.to_string(),
            theory: self.setup.name.clone(),
            mode: self.setup.mode,
            status: self.status,
            bound: self.setup.bound,
            pending: self.pending().map(|b| QueryView {
                phase: self.engine.phase(),
                replies: self.engine.replies(),
                variables: render_rows(b, &self.setup.decls),
            }),
            progress: self.engine.progress(),
            message: self.message.clone(),
            events: self.events.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use specforge_core::solver::FiniteDomainSolver;

    const THEORY: &str = "theory t { int x, y; vocab { x = 0; y = 0; x = y; } }";

    fn solver() -> FiniteDomainSolver {
        FiniteDomainSolver::new((-2, 2), (0, 1))
    }

    fn oracle(b: &Behavior) -> Reply {
        // x = 0 or y = 0
        if b.int("x") == Some(0) || b.int("y") == Some(0) {
            Reply::Vtt
        } else {
            Reply::Vff
        }
    }

    fn finish(s: &mut Session, slv: &mut FiniteDomainSolver) {
        while let Some(b) = s.pending().cloned() {
            s.answer(oracle(&b), None, None, slv).unwrap();
        }
    }

    #[test]
    fn runs_to_completion() {
        let mut slv = solver();
        let mut s = Session::create(SessionRequest::new(THEORY), &mut slv).unwrap();
        assert_eq!(s.status(), Status::AwaitingAnswer);
        finish(&mut s, &mut slv);
        assert_eq!(s.status(), Status::Done);
        let r = s.result().unwrap();
        assert_eq!(r.statistics.smt_queries as u128 + r.statistics.core_eliminated + r.statistics.pa_eliminated, 8);
        assert!(matches!(s.events().last(), Some(Event::Completed { .. })));
    }

    #[test]
    fn replay_reproduces_state() {
        let mut slv = solver();
        let mut s = Session::create(SessionRequest::new(THEORY), &mut slv).unwrap();
        let b = s.pending().cloned().unwrap();
        s.answer(oracle(&b), None, None, &mut slv).unwrap();
        let r = Session::replay(s.events().to_vec(), &mut slv).unwrap();
        assert_eq!(r.events(), s.events());
        assert_eq!(r.pending(), s.pending());
        assert_eq!(r.view("x"), s.view("x"));
    }

    #[test]
    fn undo_returns_to_the_previous_query() {
        let mut slv = solver();
        let mut s = Session::create(SessionRequest::new(THEORY), &mut slv).unwrap();
        let first = s.pending().cloned().unwrap();
        s.answer(Reply::Vff, None, None, &mut slv).unwrap();
        s.undo(&mut slv).unwrap();
        assert_eq!(s.pending(), Some(&first));
        finish(&mut s, &mut slv);
        let mut clean = Session::create(SessionRequest::new(THEORY), &mut slv).unwrap();
        finish(&mut clean, &mut slv);
        assert_eq!(s.result(), clean.result());
        let replayed = Session::replay(s.events().to_vec(), &mut slv).unwrap();
        assert_eq!(replayed.result(), clean.result());
    }

    #[test]
    fn nonces_make_answers_idempotent() {
        let mut slv = solver();
        let mut s = Session::create(SessionRequest::new(THEORY), &mut slv).unwrap();
        assert!(s.answer(Reply::Vtt, None, Some("n1".into()), &mut slv).unwrap());
        let before = s.events().len();
        assert!(!s.answer(Reply::Vtt, None, Some("n1".into()), &mut slv).unwrap());
        assert_eq!(s.events().len(), before);
    }

    #[test]
    fn wrong_replies_and_states() {
        let mut slv = solver();
        let mut s = Session::create(SessionRequest::new(THEORY), &mut slv).unwrap();
        assert!(matches!(s.answer(Reply::Good, None, None, &mut slv), Err(SessionError::InvalidAnswer(_))));
        let bad_reason = Some(BTreeSet::from(["zz".to_string()]));
        assert!(matches!(s.answer(Reply::Vtt, bad_reason, None, &mut slv), Err(SessionError::InvalidAnswer(_))));
        finish(&mut s, &mut slv);
        assert!(matches!(s.answer(Reply::Vtt, None, None, &mut slv), Err(SessionError::Conflict(_))));
        let fresh = Session::create(SessionRequest::new(THEORY), &mut slv).unwrap();
        let mut fresh = fresh;
        assert!(matches!(fresh.undo(&mut slv), Err(SessionError::Conflict(_))));
    }

    #[test]
    fn setup_errors() {
        let mut slv = solver();
        assert!(matches!(Session::create(SessionRequest::new("theory {"), &mut slv), Err(SessionError::Setup(_))));
        let empty = SessionRequest::new("theory e { int x; }");
        assert!(matches!(Session::create(empty, &mut slv), Err(SessionError::Setup(_))));
        let mut ma = SessionRequest::new(THEORY);
        ma.options.mode = SessionMode::MakeAdequate;
        assert!(matches!(Session::create(ma, &mut slv), Err(SessionError::Setup(_))));
    }

    #[test]
    fn rows_hide_dummies_and_order_by_phase() {
        let decls = vec![
            VariableDecl::output("rv", Sort::Int),
            VariableDecl::input("e", Sort::Int),
            VariableDecl::input("a", Sort::ArrayOfInt),
            VariableDecl::dummy("i"),
        ];
        let b = Behavior::new()
            .with("rv", Value::Int(-1))
            .with("e", Value::Int(5))
            .with("a", Value::Array(vec![3, 5, 5]))
            .with("i", Value::Int(1));
        let rows = render_rows(&b, &decls);
        let names: Vec<&str> = rows.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["a", "e", "rv"]);
        assert_eq!(render_text(&rows), "a = [3, 5, 5]\ne = 5\nrv = -1\n");
        assert_eq!(rows[0].sort, "int[]");
    }

    #[test]
    fn reply_spellings() {
        assert_eq!("t".parse::<Reply>().unwrap(), Reply::Vtt);
        assert_eq!("dontcare".parse::<Reply>().unwrap(), Reply::DontCare);
        assert!("maybe".parse::<Reply>().is_err());
        assert_eq!(serde_json::to_string(&Reply::DontCare).unwrap(), "\"dontcare\"");
    }

    #[test]
    fn events_round_trip_as_json() {
        let e = Event::Answered { reply: Reply::Vtt, reason: None, nonce: Some("a".into()) };
        let text = serde_json::to_string(&e).unwrap();
        assert_eq!(text, r#"{"type":"answered","reply":"vtt","nonce":"a"}"#);
        assert_eq!(serde_json::from_str::<Event>(&text).unwrap(), e);
    }
}
