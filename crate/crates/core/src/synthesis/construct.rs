//! The formula construction loop: pick the least unprocessed valuation,
//! ask the solver for a behavior in its class, ask the oracle about that
//! behavior, and repeat until every valuation is decided.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::cube::{mask, Cube, Frontier, MAX_WIDTH};
use crate::formula::{Behavior, Formula, Term, VariableDecl};
use crate::solver::{complete_model, Solver, SolverError, SolverVerdict};
use crate::valuation::{valuation_formula, Valuation};

use super::oracle::{Answer, Membership};

/// Whether accepted classes are joined (`or` of `vtt` classes) or the
/// rejected ones are excluded (`and` of negated `vff` classes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Existential,
    Universal,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statistics {
    pub smt_queries: u64,
    pub oracle_queries: u64,
    pub pa_uses: u64,
    pub core_eliminated: u128,
    pub pa_eliminated: u128,
    pub auto_accepted: u64,
}

impl Statistics {
    /// Solver calls plus eliminated valuations. Equals `2^n` once the
    /// construction is done.
    pub fn accounted(&self) -> u128 {
        self.smt_queries as u128 + self.core_eliminated + self.pa_eliminated
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub behavior: Behavior,
    pub bits: u64,
    pub membership: Membership,
    pub reason: Option<BTreeSet<String>>,
    /// Decided by an earlier partial-assignment answer, without a query.
    pub automatic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step<'a> {
    Query(&'a Behavior),
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructError {
    #[error("the vocabulary is empty")]
    EmptyVocabulary,
    #[error("{0} clauses exceed the {MAX_WIDTH}-clause limit")]
    TooWide(usize),
    #[error("solver gave up: {0}")]
    SolverUnknown(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("no query is pending")]
    NotPending,
    #[error("a query is pending")]
    Pending,
    #[error("reason mentions unknown variable `{0}`")]
    UnknownReason(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct PendingQuery {
    bits: u64,
    behavior: Behavior,
}

/// The construction as a resumable state machine. Drive it with
/// [`FormulaConstruction::advance`] and [`FormulaConstruction::answer`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaConstruction {
    vocabulary: Vec<Formula>,
    decls: Vec<VariableDecl>,
    bound: Option<u32>,
    mode: Mode,
    frontier: Frontier,
    accepted: Vec<u64>,
    rejected: Vec<Cube>,
    unsat: Vec<Cube>,
    auto_accept: Vec<Cube>,
    log: Vec<LogEntry>,
    stats: Statistics,
    pending: Option<PendingQuery>,
}

impl FormulaConstruction {
    pub fn new(
        vocabulary: Vec<Formula>,
        decls: Vec<VariableDecl>,
        bound: Option<u32>,
        mode: Mode,
    ) -> Result<Self, ConstructError> {
        if vocabulary.is_empty() {
            return Err(ConstructError::EmptyVocabulary);
        }
        if vocabulary.len() > MAX_WIDTH {
            return Err(ConstructError::TooWide(vocabulary.len()));
        }
        Ok(FormulaConstruction {
            frontier: Frontier::full(vocabulary.len()),
            vocabulary,
            decls,
            bound,
            mode,
            accepted: Vec::new(),
            rejected: Vec::new(),
            unsat: Vec::new(),
            auto_accept: Vec::new(),
            log: Vec::new(),
            stats: Statistics::default(),
            pending: None,
        })
    }

    pub fn vocabulary(&self) -> &[Formula] {
        &self.vocabulary
    }

    pub fn decls(&self) -> &[VariableDecl] {
        &self.decls
    }

    pub fn bound(&self) -> Option<u32> {
        self.bound
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn stats(&self) -> &Statistics {
        &self.stats
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn frontier(&self) -> &Frontier {
        &self.frontier
    }

    pub fn pending(&self) -> Option<&Behavior> {
        self.pending.as_ref().map(|p| &p.behavior)
    }

    pub fn is_done(&self) -> bool {
        self.pending.is_none() && self.frontier.is_empty()
    }

    /// Runs solver checks until a behavior needs classifying or nothing
    /// is left. A pending query is returned again unchanged.
    pub fn advance<S: Solver + ?Sized>(&mut self, solver: &mut S) -> Result<Step<'_>, ConstructError> {
        if self.pending.is_none() {
            if self.frontier.is_empty() {
                return Ok(Step::Done);
            }
            solver.reset(&self.decls, self.bound)?;
            while let Some(v) = self.frontier.min_point() {
                if let Some(p) = self.check_point(solver, v)? {
                    self.pending = Some(p);
                    break;
                }
            }
        }
        Ok(match &self.pending {
            Some(p) => Step::Query(&p.behavior),
            None => Step::Done,
        })
    }

    fn check_point<S: Solver + ?Sized>(
        &mut self,
        solver: &mut S,
        v: u64,
    ) -> Result<Option<PendingQuery>, ConstructError> {
        let n = self.vocabulary.len();
        self.frontier.remove(&Cube::point(n, v));
        self.stats.smt_queries += 1;
        let verdict = (|| {
            solver.push()?;
            let r = (|| {
                for (i, f) in self.vocabulary.iter().enumerate() {
                    let lit = if v >> i & 1 == 1 { f.clone() } else { Formula::not(f.clone()) };
                    solver.assert(&lit, Some(&label(i)))?;
                }
                solver.check()
            })();
            solver.pop()?;
            r
        })();
        let verdict = match verdict {
            Ok(x) => x,
            Err(e) => {
                self.unwind(v);
                return Err(e.into());
            }
        };
        match verdict {
            SolverVerdict::Sat(model) => {
                let behavior = complete_model(&model, &self.decls, self.bound);
                if self.auto_accept.iter().any(|c| c.contains_point(v)) {
                    self.accepted.push(v);
                    self.stats.auto_accepted += 1;
                    self.log.push(LogEntry {
                        behavior,
                        bits: v,
                        membership: Membership::Vtt,
                        reason: None,
                        automatic: true,
                    });
                    Ok(None)
                } else {
                    Ok(Some(PendingQuery { bits: v, behavior }))
                }
            }
            SolverVerdict::Unsat(core) => {
                let mut care = 0u64;
                for l in &core {
                    if let Some(i) = l.strip_prefix('c').and_then(|x| x.parse::<usize>().ok()) {
                        if i < n {
                            care |= 1 << i;
                        }
                    }
                }
                let cube = Cube::new(care, v);
                self.stats.core_eliminated += self.frontier.remove(&cube);
                self.unsat.push(cube);
                Ok(None)
            }
            SolverVerdict::Unknown(reason) => {
                self.unwind(v);
                Err(ConstructError::SolverUnknown(reason))
            }
        }
    }

    fn unwind(&mut self, v: u64) {
        self.frontier.restore(v);
        self.stats.smt_queries -= 1;
    }

    /// Records the oracle's answer for the pending behavior. With a
    /// reason, every clause whose value is decided by the named variables
    /// stays fixed and all valuations agreeing on those clauses share the
    /// answer.
    pub fn answer(&mut self, answer: &Answer) -> Result<(), ConstructError> {
        if let Some(reason) = &answer.reason {
            for r in reason {
                if !self.decls.iter().any(|d| &d.name == r) {
                    return Err(ConstructError::UnknownReason(r.clone()));
                }
            }
        }
        let p = self.pending.take().ok_or(ConstructError::NotPending)?;
        let n = self.vocabulary.len();
        self.stats.oracle_queries += 1;
        match answer.membership {
            Membership::Vtt => self.accepted.push(p.bits),
            Membership::Vff => self.rejected.push(Cube::point(n, p.bits)),
        }
        if let Some(reason) = &answer.reason {
            let care = self.fixed_by(reason);
            if care == 0 {
                log::warn!("reason {reason:?} decides no clause; ignored");
            } else if care != mask(n) {
                let cube = Cube::new(care, p.bits);
                self.stats.pa_uses += 1;
                match answer.membership {
                    Membership::Vff => {
                        self.stats.pa_eliminated += self.frontier.remove(&cube);
                        self.rejected.push(cube);
                    }
                    Membership::Vtt => self.auto_accept.push(cube),
                }
            }
        }
        self.log.push(LogEntry {
            behavior: p.behavior,
            bits: p.bits,
            membership: answer.membership,
            reason: answer.reason.clone(),
            automatic: false,
        });
        Ok(())
    }

    /// Positions whose clause mentions only variables in `reason`. Array
    /// lengths are known when the bound is fixed.
    pub fn fixed_by(&self, reason: &BTreeSet<String>) -> u64 {
        let mut care = 0;
        for (i, f) in self.vocabulary.iter().enumerate() {
            if needed_vars(f, self.bound).iter().all(|v| reason.contains(v)) {
                care |= 1 << i;
            }
        }
        care
    }

    /// Snapshot of the current state. Only meaningful as a final answer
    /// once [`Self::is_done`] holds.
    pub fn result(&self) -> SynthesisResult {
        let n = self.vocabulary.len();
        let valuations: Vec<Formula> = match self.mode {
            Mode::Existential => self
                .accepted
                .iter()
                .map(|&v| cube_formula(&self.vocabulary, &Cube::point(n, v)))
                .collect(),
            Mode::Universal => self
                .rejected
                .iter()
                .map(|c| Formula::not(cube_formula(&self.vocabulary, c)))
                .collect(),
        };
        let formula = match self.mode {
            Mode::Existential => Formula::or(valuations),
            Mode::Universal => Formula::and(valuations),
        };
        SynthesisResult {
            vocabulary: self.vocabulary.clone(),
            decls: self.decls.clone(),
            bound: self.bound,
            mode: self.mode,
            formula,
            accepted: self.accepted.clone(),
            rejected: self.rejected.clone(),
            unsat: self.unsat.clone(),
            log: self.log.clone(),
            stats: self.stats,
            complete: self.is_done(),
        }
    }
}

fn label(i: usize) -> String {
    let mut s = String::from("c");
    s.push_str(&i.to_string());
    s
}

/// The variables whose values decide `f`.
fn needed_vars(f: &Formula, bound: Option<u32>) -> BTreeSet<String> {
    let f = match bound {
        Some(b) => f.map_terms(&mut |t| {
            t.rewrite(&mut |t| match t {
                Term::Len(_) => Term::Int(b as i64),
                t => t,
            })
        }),
        None => f.clone(),
    };
    f.free_vars()
}

/// The conjunction of the literals a cube fixes.
pub fn cube_formula(vocabulary: &[Formula], c: &Cube) -> Formula {
    let (domain, values): (Vec<Formula>, Vec<bool>) = (0..vocabulary.len())
        .filter_map(|i| c.value(i).map(|v| (vocabulary[i].clone(), v)))
        .unzip();
    valuation_formula(&domain, &values)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub vocabulary: Vec<Formula>,
    pub decls: Vec<VariableDecl>,
    pub bound: Option<u32>,
    pub mode: Mode,
    /// Before minimization: the `or` of accepted valuation formulas, or
    /// the `and` of negated rejected ones.
    pub formula: Formula,
    pub accepted: Vec<u64>,
    /// Rejected valuations, and the cubes rejected through reasons.
    pub rejected: Vec<Cube>,
    /// Cubes of valuations with no behavior.
    pub unsat: Vec<Cube>,
    pub log: Vec<LogEntry>,
    pub stats: Statistics,
    pub complete: bool,
}

impl SynthesisResult {
    pub fn accepted_valuations(&self) -> Vec<Valuation> {
        self.accepted.iter().map(|&v| Valuation::from_bits(&self.vocabulary, v)).collect()
    }

    pub fn dummies(&self) -> Vec<VariableDecl> {
        self.decls.iter().filter(|d| d.phase == crate::formula::Phase::Dummy).cloned().collect()
    }
}

/// The oracle failed to answer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("oracle aborted: {0}")]
pub struct Abort(pub String);

/// Why [`construct_formula`] stopped early. The construction is returned
/// so it can be resumed.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Setup(ConstructError),
    #[error("{error}")]
    Failure { error: ConstructError, partial: Box<FormulaConstruction> },
    #[error("{abort}")]
    Aborted { abort: Abort, partial: Box<FormulaConstruction> },
}

impl RunError {
    pub fn partial(&self) -> Option<&FormulaConstruction> {
        match self {
            RunError::Setup(_) => None,
            RunError::Failure { partial, .. } | RunError::Aborted { partial, .. } => Some(partial),
        }
    }
}

/// Drive `c` to completion with `oracle`.
pub fn run<S, O>(mut c: FormulaConstruction, oracle: &mut O, solver: &mut S) -> Result<SynthesisResult, RunError>
where
    S: Solver + ?Sized,
    O: super::oracle::Oracle + ?Sized,
{
    loop {
        let behavior = match c.advance(solver) {
            Ok(Step::Done) => return Ok(c.result()),
            Ok(Step::Query(b)) => b.clone(),
            Err(error) => return Err(RunError::Failure { error, partial: Box::new(c) }),
        };
        match oracle.classify(&behavior) {
            Ok(a) => {
                if let Err(error) = c.answer(&a) {
                    return Err(RunError::Failure { error, partial: Box::new(c) });
                }
            }
            Err(abort) => return Err(RunError::Aborted { abort, partial: Box::new(c) }),
        }
    }
}

/// Build the formula over `vocabulary` that the oracle's answers describe.
pub fn construct_formula<S, O>(
    vocabulary: Vec<Formula>,
    decls: Vec<VariableDecl>,
    bound: Option<u32>,
    oracle: &mut O,
    solver: &mut S,
) -> Result<SynthesisResult, RunError>
where
    S: Solver + ?Sized,
    O: super::oracle::Oracle + ?Sized,
{
    let c = FormulaConstruction::new(vocabulary, decls, bound, Mode::Existential)
        .map_err(RunError::Setup)?;
    run(c, oracle, solver)
}

/// Like [`construct_formula`], but trimming `true` by the rejected classes.
pub fn construct_universal<S, O>(
    vocabulary: Vec<Formula>,
    decls: Vec<VariableDecl>,
    bound: Option<u32>,
    oracle: &mut O,
    solver: &mut S,
) -> Result<SynthesisResult, RunError>
where
    S: Solver + ?Sized,
    O: super::oracle::Oracle + ?Sized,
{
    let c = FormulaConstruction::new(vocabulary, decls, bound, Mode::Universal)
        .map_err(RunError::Setup)?;
    run(c, oracle, solver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{eval, parse_formula, Sort, Value};
    use crate::solver::FiniteDomainSolver;
    use crate::synthesis::finish::{final_formula, minimized_formula};
    use crate::synthesis::oracle::{FnOracle, FormulaOracle, Oracle};
    use alloc::vec;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn ints(names: &[&str]) -> Vec<VariableDecl> {
        names.iter().map(|n| VariableDecl::input(*n, Sort::Int)).collect()
    }

    fn solver() -> FiniteDomainSolver {
        FiniteDomainSolver::new((-2, 2), (0, 1))
    }

    #[test]
    fn two_clause_example() {
        let vocab = vec![f("x = 0"), f("0 < x")];
        let mut oracle = FormulaOracle::new(f("0 <= x"), None);
        let r = construct_formula(vocab.clone(), ints(&["x"]), None, &mut oracle, &mut solver()).unwrap();
        // Bit 0 is `x = 0`, bit 1 is `0 < x`.
        let mut acc = r.accepted.clone();
        acc.sort();
        assert_eq!(acc, vec![0b01, 0b10]);
        assert_eq!(r.unsat, vec![Cube::new(0b11, 0b11)]);
        // Processing order is false-first, so (F,T) comes before (T,F).
        assert_eq!(r.formula.to_string(), "x != 0 and 0 < x or x = 0 and not (0 < x)");
        assert_eq!(r.stats.accounted(), 4);
        assert_eq!(r.stats.oracle_queries, 3);
        for x in -2..=2 {
            let b = Behavior::new().with("x", Value::Int(x));
            assert_eq!(eval(&r.formula, &b, None).unwrap(), x >= 0);
        }
    }

    #[test]
    fn always_vff_gives_false() {
        let vocab = vec![f("x = 0"), f("0 < x")];
        let mut oracle = FnOracle(|_: &Behavior| Membership::Vff);
        let r = construct_formula(vocab, ints(&["x"]), None, &mut oracle, &mut solver()).unwrap();
        assert_eq!(r.formula, Formula::False);
        assert_eq!(minimized_formula(&r), Formula::False);
    }

    #[test]
    fn always_vtt_universal_gives_true() {
        let vocab = vec![f("x = 0"), f("0 < x")];
        let mut oracle = FnOracle(|_: &Behavior| Membership::Vtt);
        let r = construct_universal(vocab, ints(&["x"]), None, &mut oracle, &mut solver()).unwrap();
        assert_eq!(r.formula, Formula::True);
        assert_eq!(final_formula(&r), Formula::True);
    }

    #[test]
    fn unsat_core_removes_its_extensions() {
        let vocab = vec![f("x = 0"), f("0 < x"), f("x < 5")];
        let mut oracle = FnOracle(|_: &Behavior| Membership::Vtt);
        let r = construct_formula(vocab, ints(&["x"]), None, &mut oracle, &mut solver()).unwrap();
        // (T,T,*) share the core {x = 0, 0 < x}.
        assert!(r.unsat.contains(&Cube::new(0b011, 0b011)));
        assert_eq!(r.stats.accounted(), 8);
        assert!(r.stats.core_eliminated >= 1);
    }

    /// Replays a fixed list of answers.
    struct Scripted(Vec<Answer>);

    impl Oracle for Scripted {
        fn classify(&mut self, _: &Behavior) -> Result<Answer, Abort> {
            if self.0.is_empty() {
                return Err(Abort("script exhausted".into()));
            }
            Ok(self.0.remove(0))
        }
    }

    #[test]
    fn reason_decides_matching_valuations() {
        // With l = -1, `0 <= l` and `l = 0` are false whatever r is.
        let vocab = vec![f("0 <= l"), f("l = 0"), f("l <= r")];
        let decls = ints(&["l", "r"]);
        let mut c = FormulaConstruction::new(vocab, decls, None, Mode::Existential).unwrap();
        let mut s = solver();
        let first = match c.advance(&mut s).unwrap() {
            Step::Query(b) => b.clone(),
            Step::Done => panic!(),
        };
        // The least valuation is all-false: l < 0 and r < l.
        assert!(first.int("l").unwrap() < 0);
        assert!(c.fixed_by(&["l".into()].into_iter().collect()) == 0b011);
        c.answer(&Answer::because(Membership::Vff, ["l"])).unwrap();
        // (F,F,T) shares the fixed clauses and is gone without a query.
        assert!(!c.frontier().contains(0b100));
        assert_eq!(c.stats().pa_eliminated, 1);
        let r = run(c, &mut FnOracle(|_: &Behavior| Membership::Vtt), &mut s).unwrap();
        assert_eq!(r.stats.accounted(), 8);
        assert_eq!(r.stats.pa_uses, 1);
    }

    #[test]
    fn reason_fixing_two_of_four_decides_four() {
        let vocab = vec![f("x = 0"), f("x = 1"), f("y = 0"), f("y = 1")];
        let mut c = FormulaConstruction::new(vocab, ints(&["x", "y"]), None, Mode::Existential).unwrap();
        let mut s = solver();
        c.advance(&mut s).unwrap();
        c.answer(&Answer::because(Membership::Vff, ["x"])).unwrap();
        // The queried point plus three more.
        assert_eq!(c.stats().pa_eliminated + 1, 4);
        assert_eq!(c.stats().smt_queries, 1);
    }

    #[test]
    fn vtt_reason_accepts_without_queries() {
        let vocab = vec![f("0 <= x"), f("0 <= y"), f("y <= 1")];
        let mut c = FormulaConstruction::new(vocab, ints(&["x", "y"]), None, Mode::Existential).unwrap();
        let mut s = solver();
        let mut answers = vec![];
        let mut asked = 0;
        while let Step::Query(b) = c.advance(&mut s).unwrap() {
            let x = b.int("x").unwrap();
            asked += 1;
            let a = if x >= 0 { Answer::because(Membership::Vtt, ["x"]) } else { Answer::plain(Membership::Vff) };
            answers.push(a.clone());
            c.answer(&a).unwrap();
        }
        let r = c.result();
        assert!(r.stats.auto_accepted > 0);
        assert_eq!(asked as u64, r.stats.oracle_queries);
        assert_eq!(r.stats.accounted(), 8);
        for x in -2..=2 {
            for y in -2..=2 {
                let b = Behavior::new().with("x", Value::Int(x)).with("y", Value::Int(y));
                assert_eq!(eval(&r.formula, &b, None).unwrap(), x >= 0);
            }
        }
    }

    #[test]
    fn unknown_reason_is_rejected() {
        let mut c = FormulaConstruction::new(vec![f("x = 0")], ints(&["x"]), None, Mode::Existential).unwrap();
        c.advance(&mut solver()).unwrap();
        let e = c.answer(&Answer::because(Membership::Vff, ["zz"])).unwrap_err();
        assert_eq!(e, ConstructError::UnknownReason("zz".into()));
        assert!(c.pending().is_some());
    }

    #[test]
    fn abort_returns_resumable_state() {
        let vocab = vec![f("x = 0"), f("0 < x")];
        let mut s = solver();
        let e = construct_formula(vocab, ints(&["x"]), None, &mut Scripted(vec![Answer::plain(Membership::Vtt)]), &mut s)
            .unwrap_err();
        let partial = e.partial().unwrap().clone();
        assert!(matches!(e, RunError::Aborted { .. }));
        assert_eq!(partial.stats().oracle_queries, 1);
        let r = run(partial, &mut FormulaOracle::new(f("0 <= x"), None), &mut s).unwrap();
        assert_eq!(r.stats.accounted(), 4);
    }

    #[test]
    fn universal_matches_existential() {
        let vocab = vec![f("x <= y"), f("x = 0"), f("y = 0")];
        let target = f("x <= y and (x = 0 or y = 0)");
        let decls = ints(&["x", "y"]);
        let mut s = solver();
        let e = construct_formula(vocab.clone(), decls.clone(), None, &mut FormulaOracle::new(target.clone(), None), &mut s)
            .unwrap();
        let u = construct_universal(vocab, decls, None, &mut FormulaOracle::new(target.clone(), None), &mut s).unwrap();
        for x in -2..=2 {
            for y in -2..=2 {
                let b = Behavior::new().with("x", Value::Int(x)).with("y", Value::Int(y));
                let want = eval(&target, &b, None).unwrap();
                assert_eq!(eval(&e.formula, &b, None).unwrap(), want);
                assert_eq!(eval(&u.formula, &b, None).unwrap(), want);
                assert_eq!(eval(&final_formula(&e), &b, None).unwrap(), want);
                assert_eq!(eval(&final_formula(&u), &b, None).unwrap(), want);
            }
        }
    }

    #[test]
    fn dummies_are_closed_over() {
        let decls = vec![VariableDecl::input("a", Sort::ArrayOfInt), VariableDecl::dummy("i")];
        let vocab = vec![f("0 <= i"), f("i <= |a| - 1"), f("a[i] = 1")];
        let matrix = f("0 <= i and i <= |a| - 1 and a[i] = 1");
        let mut s = FiniteDomainSolver::new((-1, 3), (0, 1));
        let r = construct_formula(vocab, decls, Some(2), &mut FormulaOracle::new(matrix, Some(2)), &mut s).unwrap();
        let out = final_formula(&r);
        // Reads outside the array give 0, so the range clauses drop out.
        assert_eq!(out.to_string(), "exists i. a[i] = 1");
    }
}
