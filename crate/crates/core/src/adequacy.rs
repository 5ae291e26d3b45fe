//! Checking that a vocabulary can tell apart everything the oracle does,
//! and repairing it when it cannot.
//!
//! Every satisfiable class of the bounded equivalence theory gets one
//! representative, which the oracle classifies. A vocabulary class that
//! holds both `vtt` and `vff` representatives is split by a correction
//! formula: the disjunction of its `vtt` equivalence classes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::cube::MAX_WIDTH;
use crate::formula::{eval, Behavior, Formula, VariableDecl};
use crate::minimizer::separate;
use crate::solver::{complete_model, Solver, SolverError, SolverVerdict};
use crate::synthesis::{Abort, Membership, Oracle, Step};
use crate::theory::{Provenance, Vocabulary};
use crate::valuation::valuation_formula;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdequacyError {
    #[error("solver gave up: {0}")]
    SolverUnknown(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("cannot evaluate `{formula}` on a representative: {reason}")]
    Eval { formula: String, reason: String },
    #[error("no query is pending")]
    NotPending,
    #[error("oracle aborted: {0}")]
    Aborted(String),
}

/// One satisfiable equivalence class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceClass {
    /// Truth values of the equivalence formulas.
    pub values: Vec<bool>,
    /// Truth values of the vocabulary on the representative.
    pub vocabulary_values: Vec<bool>,
    pub representative: Behavior,
    pub side: Option<Membership>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyStatistics {
    pub smt_queries: u64,
    pub oracle_queries: u64,
    /// `2^|e|` minus the satisfiable classes, when that fits.
    pub eliminated: Option<u128>,
}

/// The survey as a resumable state machine, like the formula
/// construction: [`AdequacySurvey::advance`] finds the next class,
/// [`AdequacySurvey::answer`] records its side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdequacySurvey {
    vocabulary: Vec<Formula>,
    equivalence: Vec<Formula>,
    decls: Vec<VariableDecl>,
    bound: u32,
    classes: Vec<EquivalenceClass>,
    pending: bool,
    exhausted: bool,
    stats: SurveyStatistics,
    /// Number of blocking clauses the solver holds, when known.
    #[serde(skip)]
    synced: Option<usize>,
}

impl AdequacySurvey {
    pub fn new(vocabulary: Vec<Formula>, equivalence: Vec<Formula>, decls: Vec<VariableDecl>, bound: u32) -> Self {
        AdequacySurvey {
            vocabulary: vocabulary.iter().map(Formula::inline).collect(),
            equivalence: equivalence.iter().map(Formula::inline).collect(),
            decls,
            bound,
            classes: Vec::new(),
            pending: false,
            exhausted: false,
            stats: SurveyStatistics::default(),
            synced: None,
        }
    }

    /// Forget what the solver holds; the next advance starts over.
    pub fn resync(&mut self) {
        self.synced = None;
    }

    pub fn classes(&self) -> &[EquivalenceClass] {
        &self.classes
    }

    pub fn stats(&self) -> &SurveyStatistics {
        &self.stats
    }

    pub fn pending(&self) -> Option<&Behavior> {
        self.pending.then(|| &self.classes.last().expect("pending class").representative)
    }

    pub fn is_done(&self) -> bool {
        self.exhausted && !self.pending
    }

    /// Asks the solver for a behavior outside every class seen so far.
    ///
    /// Blocking clauses stay asserted between calls. Call
    /// [`AdequacySurvey::resync`] if the solver was used for anything else
    /// in the meantime.
    pub fn advance<S: Solver + ?Sized>(&mut self, solver: &mut S) -> Result<Step<'_>, AdequacyError> {
        if !self.pending && !self.exhausted {
            let verdict = (|| {
                if self.synced != Some(self.classes.len()) {
                    self.synced = None;
                    solver.reset(&self.decls, Some(self.bound))?;
                    for c in &self.classes {
                        solver.assert(&Formula::not(valuation_formula(&self.equivalence, &c.values)), None)?;
                    }
                    self.synced = Some(self.classes.len());
                }
                solver.check()
            })();
            self.stats.smt_queries += 1;
            let verdict = verdict.map_err(|e| {
                self.synced = None;
                e
            })?;
            match verdict {
                SolverVerdict::Sat(model) => {
                    let rep = complete_model(&model, &self.decls, Some(self.bound));
                    let values = self.values_of(&self.equivalence, &rep)?;
                    let vocabulary_values = self.values_of(&self.vocabulary, &rep)?;
                    let block = Formula::not(valuation_formula(&self.equivalence, &values));
                    self.classes.push(EquivalenceClass { values, vocabulary_values, representative: rep, side: None });
                    self.pending = true;
                    self.synced = None;
                    solver.assert(&block, None)?;
                    self.synced = Some(self.classes.len());
                }
                SolverVerdict::Unsat(_) => {
                    self.exhausted = true;
                    let n = self.equivalence.len() as u32;
                    self.stats.eliminated =
                        (n < 127).then(|| (1u128 << n) - self.classes.len() as u128);
                }
                SolverVerdict::Unknown(r) => {
                    self.synced = None;
                    return Err(AdequacyError::SolverUnknown(r));
                }
            }
        }
        Ok(match self.pending() {
            Some(b) => Step::Query(b),
            None => Step::Done,
        })
    }

    fn values_of(&self, fs: &[Formula], b: &Behavior) -> Result<Vec<bool>, AdequacyError> {
        fs.iter()
            .map(|f| {
                eval(f, b, Some(self.bound))
                    .map_err(|e| AdequacyError::Eval { formula: f.to_string(), reason: e.to_string() })
            })
            .collect()
    }

    pub fn answer(&mut self, m: Membership) -> Result<(), AdequacyError> {
        if !self.pending {
            return Err(AdequacyError::NotPending);
        }
        self.classes.last_mut().expect("pending class").side = Some(m);
        self.pending = false;
        self.stats.oracle_queries += 1;
        Ok(())
    }

    pub fn report(&self) -> AdequacyReport {
        let mut sides: BTreeMap<Vec<bool>, Sides> = BTreeMap::new();
        for c in &self.classes {
            let s = sides.entry(c.vocabulary_values.clone()).or_default();
            match c.side {
                Some(Membership::Vtt) => s.vtt = true,
                Some(Membership::Vff) => s.vff = true,
                None => {}
            }
        }
        let mut corrections = BTreeMap::new();
        for (v, s) in &sides {
            let f = if s.vtt && s.vff {
                Formula::or(
                    self.classes
                        .iter()
                        .filter(|c| &c.vocabulary_values == v && c.side == Some(Membership::Vtt))
                        .map(|c| valuation_formula(&self.equivalence, &c.values))
                        .collect(),
                )
            } else {
                Formula::True
            };
            corrections.insert(v.clone(), f);
        }
        AdequacyReport {
            vocabulary: self.vocabulary.clone(),
            equivalence: self.equivalence.clone(),
            classes: self.classes.clone(),
            sides,
            corrections,
            stats: self.stats,
            complete: self.is_done(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sides {
    pub vtt: bool,
    pub vff: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdequacyReport {
    pub vocabulary: Vec<Formula>,
    pub equivalence: Vec<Formula>,
    /// The side of each satisfiable equivalence class. Unsatisfiable
    /// classes are empty and not listed.
    pub classes: Vec<EquivalenceClass>,
    /// Per vocabulary valuation, the sides its classes fell on.
    pub sides: BTreeMap<Vec<bool>, Sides>,
    /// `true` unless the vocabulary valuation straddles both sides.
    pub corrections: BTreeMap<Vec<bool>, Formula>,
    pub stats: SurveyStatistics,
    pub complete: bool,
}

impl AdequacyReport {
    /// No vocabulary valuation holds both `vtt` and `vff` behaviors.
    pub fn is_adequate(&self) -> bool {
        self.sides.values().all(|s| !(s.vtt && s.vff))
    }

    /// The corrections that are not `true`, in vocabulary valuation
    /// order.
    pub fn needed_corrections(&self) -> Vec<(&Vec<bool>, &Formula)> {
        self.corrections.iter().filter(|(_, f)| **f != Formula::True).collect()
    }

    /// Shorter corrections: each separates the `vtt` classes of its
    /// vocabulary valuation from the `vff` ones, treating everything else
    /// as free. Falls back to the full disjunction for theories wider
    /// than a cube.
    pub fn simplified_corrections(&self) -> Vec<Formula> {
        let n = self.equivalence.len();
        self.needed_corrections()
            .into_iter()
            .map(|(v, full)| {
                if n > MAX_WIDTH {
                    return full.clone();
                }
                let bits = |xs: &[bool]| xs.iter().enumerate().fold(0u64, |a, (i, b)| a | (*b as u64) << i);
                let mut on = Vec::new();
                let mut off = Vec::new();
                for c in self.classes.iter().filter(|c| &c.vocabulary_values == v) {
                    match c.side {
                        Some(Membership::Vtt) => on.push(bits(&c.values)),
                        Some(Membership::Vff) => off.push(bits(&c.values)),
                        None => {}
                    }
                }
                crate::minimizer::cover_to_formula(&separate(n, &on, &off), &self.equivalence)
            })
            .collect()
    }

    /// The vocabulary with the corrections appended.
    pub fn augmented(&self, base: &Vocabulary, simplified: bool) -> Vocabulary {
        let mut v = base.clone();
        let extra: Vec<Formula> = if simplified {
            self.simplified_corrections()
        } else {
            self.needed_corrections().into_iter().map(|(_, f)| f.clone()).collect()
        };
        for f in extra {
            v.push(f, Provenance::Correction);
        }
        v
    }

    pub fn summary(&self) -> String {
        format!(
            "{} equivalence classes, {} vocabulary classes, {} corrections",
            self.classes.len(),
            self.sides.len(),
            self.needed_corrections().len()
        )
    }
}

/// Survey every class with `oracle` and report.
pub fn make_adequate<S, O>(
    vocabulary: Vec<Formula>,
    equivalence: Vec<Formula>,
    decls: Vec<VariableDecl>,
    bound: u32,
    oracle: &mut O,
    solver: &mut S,
) -> Result<AdequacyReport, (AdequacyError, AdequacyReport)>
where
    S: Solver + ?Sized,
    O: Oracle + ?Sized,
{
    let mut s = AdequacySurvey::new(vocabulary, equivalence, decls, bound);
    loop {
        let b = match s.advance(solver) {
            Ok(Step::Done) => return Ok(s.report()),
            Ok(Step::Query(b)) => b.clone(),
            Err(e) => return Err((e, s.report())),
        };
        let m = match oracle.classify(&b) {
            Ok(a) => a.membership,
            Err(Abort(msg)) => return Err((AdequacyError::Aborted(msg), s.report())),
        };
        s.answer(m).map_err(|e| (e, s.report()))?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Sort, Value};
    use crate::solver::FiniteDomainSolver;
    use crate::synthesis::FormulaOracle;
    use alloc::vec;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn run(nu: &[&str], eps: &[&str], target: &str) -> AdequacyReport {
        let mut s = FiniteDomainSolver::new((-3, 3), (0, 1));
        let mut o = FormulaOracle::new(f(target), Some(1));
        make_adequate(
            nu.iter().map(|x| f(x)).collect(),
            eps.iter().map(|x| f(x)).collect(),
            vec![VariableDecl::input("x", Sort::Int)],
            1,
            &mut o,
            &mut s,
        )
        .unwrap()
    }

    const EPS: [&str; 5] = ["x = 0", "x = 1", "x = 2", "0 <= x", "x <= 2"];

    #[test]
    fn coarse_vocabulary_gets_a_correction() {
        let r = run(&["0 <= x and x <= 2"], &EPS, "x = 0 or x = 2");
        // Classes: x<0, x=0, x=1, x=2, x>2.
        assert_eq!(r.classes.len(), 5);
        assert!(!r.is_adequate());
        let fixes = r.needed_corrections();
        assert_eq!(fixes.len(), 1);
        assert_eq!(fixes[0].0, &vec![true]);
        // The x=0 and x=2 classes.
        for x in -3..=3 {
            let b = Behavior::new().with("x", Value::Int(x));
            assert_eq!(eval(fixes[0].1, &b, Some(1)).unwrap(), x == 0 || x == 2, "x = {x}");
        }
        let s = &r.simplified_corrections()[0];
        for x in 0..=2 {
            let b = Behavior::new().with("x", Value::Int(x));
            assert_eq!(eval(s, &b, Some(1)).unwrap(), x != 1);
        }
    }

    #[test]
    fn corrections_make_it_adequate() {
        let r = run(&["0 <= x and x <= 2"], &EPS, "x = 0 or x = 2");
        let mut base = Vocabulary::new();
        base.push(f("0 <= x and x <= 2"), Provenance::User);
        for simplified in [false, true] {
            let nu: Vec<String> = r.augmented(&base, simplified).formulas().iter().map(|g| g.to_string()).collect();
            let nu: Vec<&str> = nu.iter().map(String::as_str).collect();
            assert!(run(&nu, &EPS, "x = 0 or x = 2").is_adequate());
        }
    }

    #[test]
    fn equivalence_as_vocabulary_is_adequate() {
        let r = run(&EPS, &EPS, "x = 0 or x = 2");
        assert!(r.is_adequate());
        assert!(r.corrections.values().all(|c| *c == Formula::True));
        assert_eq!(r.summary(), "5 equivalence classes, 5 vocabulary classes, 0 corrections");
    }

    #[test]
    fn representatives_satisfy_their_class() {
        let r = run(&["0 <= x"], &EPS, "0 <= x");
        for c in &r.classes {
            assert!(eval(&valuation_formula(&r.equivalence, &c.values), &c.representative, Some(1)).unwrap());
        }
        assert_eq!(r.stats.smt_queries, 6);
        assert_eq!(r.stats.eliminated, Some(32 - 5));
    }
}
