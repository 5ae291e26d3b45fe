//! Building a precondition and postcondition from one three-way oracle.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::formula::{Behavior, Formula, VariableDecl};
use crate::solver::Solver;
use crate::valuation::Specification;

use super::construct::{Abort, ConstructError, FormulaConstruction, Mode, Step, SynthesisResult};
use super::finish::final_formula;
use super::oracle::{Answer, Classification, Membership, SpecOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecPhase {
    Pre,
    Post,
}

/// Two constructions in sequence. The precondition separates don't-care
/// inputs from the rest; the postcondition separates good from bad, with
/// don't-care behaviors sent to `dont_care` (by default `vtt`, which
/// gives the weakest postcondition).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecConstruction {
    pre: FormulaConstruction,
    post: FormulaConstruction,
    phase: SpecPhase,
    dont_care: Membership,
}

impl SpecConstruction {
    pub fn new(
        pre: (Vec<Formula>, Vec<VariableDecl>),
        post: (Vec<Formula>, Vec<VariableDecl>),
        bound: Option<u32>,
        dont_care: Membership,
    ) -> Result<Self, ConstructError> {
        Ok(SpecConstruction {
            pre: FormulaConstruction::new(pre.0, pre.1, bound, Mode::Existential)?,
            post: FormulaConstruction::new(post.0, post.1, bound, Mode::Existential)?,
            phase: SpecPhase::Pre,
            dont_care,
        })
    }

    pub fn phase(&self) -> SpecPhase {
        self.phase
    }

    pub fn current(&self) -> &FormulaConstruction {
        match self.phase {
            SpecPhase::Pre => &self.pre,
            SpecPhase::Post => &self.post,
        }
    }

    pub fn is_done(&self) -> bool {
        self.phase == SpecPhase::Post && self.post.is_done()
    }

    pub fn advance<S: Solver + ?Sized>(&mut self, solver: &mut S) -> Result<Step<'_>, ConstructError> {
        if self.phase == SpecPhase::Pre {
            if let Step::Query(_) = self.pre.advance(solver)? {
                return self.pre.advance(solver);
            }
            self.phase = SpecPhase::Post;
        }
        self.post.advance(solver)
    }

    pub fn answer(
        &mut self,
        c: Classification,
        reason: Option<BTreeSet<String>>,
    ) -> Result<(), ConstructError> {
        let membership = match (self.phase, c) {
            (SpecPhase::Pre, Classification::DontCare) => Membership::Vff,
            (SpecPhase::Pre, _) => Membership::Vtt,
            (SpecPhase::Post, Classification::Good) => Membership::Vtt,
            (SpecPhase::Post, Classification::Bad) => Membership::Vff,
            (SpecPhase::Post, Classification::DontCare) => self.dont_care,
        };
        let answer = Answer { membership, reason };
        match self.phase {
            SpecPhase::Pre => self.pre.answer(&answer),
            SpecPhase::Post => self.post.answer(&answer),
        }
    }

    pub fn results(&self) -> (SynthesisResult, SynthesisResult) {
        (self.pre.result(), self.post.result())
    }

    pub fn specification(&self) -> Specification {
        let (pre, post) = self.results();
        Specification { pre: final_formula(&pre), post: final_formula(&post) }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error("{abort}")]
    Aborted { abort: Abort, partial: alloc::boxed::Box<SpecConstruction> },
}

/// Run both phases with `oracle`.
pub fn construct_specification<S, O>(
    mut c: SpecConstruction,
    oracle: &mut O,
    solver: &mut S,
) -> Result<SpecConstruction, SpecError>
where
    S: Solver + ?Sized,
    O: SpecOracle + ?Sized,
{
    loop {
        let behavior: Behavior = match c.advance(solver)? {
            Step::Done => return Ok(c),
            Step::Query(b) => b.clone(),
        };
        match oracle.classify(&behavior) {
            Ok(k) => c.answer(k, None)?,
            Err(abort) => return Err(SpecError::Aborted { abort, partial: alloc::boxed::Box::new(c) }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{eval, parse_formula, Sort, Value};
    use crate::solver::FiniteDomainSolver;
    use crate::synthesis::oracle::FormulaSpecOracle;
    use alloc::vec;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn build(dont_care: &str, good: &str, split: Membership) -> Specification {
        let x = VariableDecl::input("x", Sort::Int);
        let y = VariableDecl::output("y", Sort::Int);
        let c = SpecConstruction::new(
            (vec![f("0 <= x")], vec![x.clone()]),
            (vec![f("0 <= x"), f("y = x")], vec![x, y]),
            None,
            split,
        )
        .unwrap();
        let mut oracle = FormulaSpecOracle { dont_care: f(dont_care), good: f(good), bound: None };
        let mut s = FiniteDomainSolver::new((-2, 2), (0, 1));
        construct_specification(c, &mut oracle, &mut s).unwrap().specification()
    }

    fn table(g: &Formula) -> Vec<bool> {
        let mut out = vec![];
        for x in -2..=2 {
            for y in -2..=2 {
                let b = Behavior::new().with("x", Value::Int(x)).with("y", Value::Int(y));
                out.push(eval(g, &b, None).unwrap());
            }
        }
        out
    }

    #[test]
    fn precondition_and_weakest_postcondition() {
        let s = build("x < 0", "y = x", Membership::Vtt);
        assert_eq!(table(&s.pre), table(&f("0 <= x")));
        assert_eq!(table(&s.post), table(&f("x < 0 or y = x")));
    }

    #[test]
    fn dontcare_split_is_configurable() {
        let s = build("x < 0", "y = x", Membership::Vff);
        assert_eq!(table(&s.post), table(&f("0 <= x and y = x")));
    }

    #[test]
    fn no_dontcare_gives_true_precondition() {
        let s = build("false", "y = x", Membership::Vtt);
        assert_eq!(s.pre, Formula::True);
    }

    #[test]
    fn nothing_good_leaves_only_dontcare() {
        let s = build("x < 0", "false", Membership::Vtt);
        assert_eq!(table(&s.post), table(&f("x < 0")));
    }
}
