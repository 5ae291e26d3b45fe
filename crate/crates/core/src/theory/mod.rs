//! Type theories, grammars and vocabulary generation.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::formula::{Formula, Phase, Sort, Term, VariableDecl};

mod fragment;
mod parse;

pub use fragment::{check_fragment, FragmentError};
pub use parse::{parse_theory, TheoryError, TheoryFile, TheoryOptions};

/// Declared variables with their sorts and phases.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeTheory {
    pub variables: Vec<VariableDecl>,
}

impl TypeTheory {
    pub fn new(variables: Vec<VariableDecl>) -> Self {
        TypeTheory { variables }
    }

    pub fn get(&self, name: &str) -> Option<&VariableDecl> {
        self.variables.iter().find(|d| d.name == name)
    }

    pub fn sort_of(&self, name: &str) -> Option<Sort> {
        self.get(name).map(|d| d.sort)
    }

    pub fn arrays(&self) -> impl Iterator<Item = &VariableDecl> {
        self.variables.iter().filter(|d| d.sort == Sort::ArrayOfInt)
    }

    pub fn with_phase(&self, phase: Phase) -> Vec<VariableDecl> {
        self.variables.iter().filter(|d| d.phase == phase).cloned().collect()
    }

    pub fn dummies(&self) -> Vec<String> {
        self.variables.iter().filter(|d| d.phase == Phase::Dummy).map(|d| d.name.clone()).collect()
    }

    /// Inputs only, for precondition construction.
    pub fn inputs(&self) -> TypeTheory {
        TypeTheory { variables: self.with_phase(Phase::Input) }
    }
}

/// Operators a grammar rule may license.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GrammarOp {
    /// The variable is an index into the array (also written `[]`).
    Index,
    /// The variable is kept within the array bounds.
    Bound,
    Le,
    Lt,
    Eq,
    Add,
    Sub,
    Mul,
}

impl GrammarOp {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "index" | "[]" => GrammarOp::Index,
            "bound" => GrammarOp::Bound,
            "<=" => GrammarOp::Le,
            "<" => GrammarOp::Lt,
            "=" => GrammarOp::Eq,
            "+" => GrammarOp::Add,
            "-" => GrammarOp::Sub,
            "*" => GrammarOp::Mul,
            _ => return None,
        })
    }

    pub fn is_relational(self) -> bool {
        matches!(self, GrammarOp::Le | GrammarOp::Lt | GrammarOp::Eq)
    }

    fn apply(self, a: Term, b: Term) -> Formula {
        match self {
            GrammarOp::Le => Formula::le(a, b),
            GrammarOp::Lt => Formula::lt(a, b),
            _ => Formula::eq(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleTarget {
    Var(String),
    Int(i64),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarRule {
    pub left: String,
    pub right: RuleTarget,
    pub ops: BTreeSet<GrammarOp>,
}

impl GrammarRule {
    pub fn new(left: impl Into<String>, right: RuleTarget, ops: &[GrammarOp]) -> Self {
        GrammarRule { left: left.into(), right, ops: ops.iter().copied().collect() }
    }

    fn right_var(&self) -> Option<&str> {
        match &self.right {
            RuleTarget::Var(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarSpec {
    pub rules: Vec<GrammarRule>,
    pub literals: BTreeSet<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantifierKind {
    Existential,
    Universal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    User,
    Generated,
    Derived(String),
    Correction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub formula: Formula,
    pub provenance: Provenance,
}

/// An ordered, duplicate-free list of clauses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub clauses: Vec<Clause>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Vocabulary::default()
    }

    /// Adds the clause unless an equal formula is already present.
    pub fn push(&mut self, formula: Formula, provenance: Provenance) -> bool {
        if self.clauses.iter().any(|c| c.formula == formula) {
            return false;
        }
        self.clauses.push(Clause { formula, provenance });
        true
    }

    pub fn extend(&mut self, other: &Vocabulary) {
        for c in &other.clauses {
            self.push(c.formula.clone(), c.provenance.clone());
        }
    }

    pub fn formulas(&self) -> Vec<Formula> {
        self.clauses.iter().map(|c| c.formula.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

fn grammar_error(msg: String) -> TheoryError {
    TheoryError::Grammar(msg)
}

fn check_rules(tt: &TypeTheory, g: &GrammarSpec) -> Result<(), TheoryError> {
    for r in &g.rules {
        let left = tt
            .sort_of(&r.left)
            .ok_or_else(|| grammar_error(format!("rule mentions undeclared `{}`", r.left)))?;
        let right = match &r.right {
            RuleTarget::Var(v) => Some(
                tt.sort_of(v).ok_or_else(|| grammar_error(format!("rule mentions undeclared `{v}`")))?,
            ),
            _ => None,
        };
        let structural = r.ops.contains(&GrammarOp::Index) || r.ops.contains(&GrammarOp::Bound);
        if structural && (left != Sort::ArrayOfInt || right != Some(Sort::Int)) {
            return Err(grammar_error(format!(
                "index and bound rules relate an array to an int variable (rule on `{}`)",
                r.left
            )));
        }
        let is_bool = left == Sort::Bool || right == Some(Sort::Bool) || matches!(r.right, RuleTarget::Bool(_));
        if is_bool {
            let ok = left == Sort::Bool
                && (right == Some(Sort::Bool) || matches!(r.right, RuleTarget::Bool(_)))
                && r.ops.iter().all(|o| *o == GrammarOp::Eq);
            if !ok {
                return Err(grammar_error(format!("boolean rule on `{}` may only use `=`", r.left)));
            }
        }
    }
    Ok(())
}

/// Offsets licensed for index arithmetic: the absolute values of the
/// nonzero literals, plus 1.
fn offsets(g: &GrammarSpec) -> Vec<i64> {
    let mut c: BTreeSet<i64> = g.literals.iter().filter(|v| **v != 0).map(|v| v.saturating_abs()).collect();
    c.insert(1);
    c.into_iter().collect()
}

fn push_unique(out: &mut Vec<String>, name: &str) {
    if !out.iter().any(|n| n == name) {
        out.push(name.to_string());
    }
}

/// Generate every atom licensed by the grammar with at most `max_ops`
/// operators, in a fixed order: per array the bound and range atoms and
/// the ordering of its index variables, then the remaining rules in
/// declaration order.
pub fn generate_vocabulary(
    tt: &TypeTheory,
    g: &GrammarSpec,
    max_ops: usize,
) -> Result<Vocabulary, TheoryError> {
    check_rules(tt, g)?;
    let cs = offsets(g);
    let mut vocab = Vocabulary::new();
    let mut add = |f: Formula| {
        if f.op_count() <= max_ops && !matches!(f, Formula::True | Formula::False) {
            vocab.push(f, Provenance::Generated);
        }
    };

    let index_terms = |a: &str| -> Vec<Term> {
        let mut vars = Vec::new();
        for r in &g.rules {
            if r.left == a && r.ops.contains(&GrammarOp::Index) {
                if let Some(x) = r.right_var() {
                    push_unique(&mut vars, x);
                }
            }
        }
        let mut terms = Vec::new();
        for x in &vars {
            terms.push(Term::var(x.clone()));
        }
        for x in &vars {
            for c in &cs {
                terms.push(Term::add(Term::var(x.clone()), Term::Int(*c)));
            }
            for c in &cs {
                terms.push(Term::sub(Term::var(x.clone()), Term::Int(*c)));
            }
        }
        terms
    };

    for a in tt.arrays() {
        let a = a.name.as_str();
        let mut family = Vec::new();
        for r in &g.rules {
            if r.left == a && r.ops.contains(&GrammarOp::Bound) {
                if let Some(x) = r.right_var() {
                    push_unique(&mut family, x);
                    add(Formula::le(Term::Int(0), Term::var(x)));
                    add(Formula::le(Term::var(x), Term::last_index(a)));
                }
            }
        }
        for t in index_terms(a) {
            add(Formula::le(Term::Int(0), t.clone()));
            add(Formula::le(t, Term::last_index(a)));
        }
        for r in &g.rules {
            if r.left == a && r.ops.contains(&GrammarOp::Index) {
                if let Some(x) = r.right_var() {
                    push_unique(&mut family, x);
                }
            }
        }
        for x in &family {
            for y in &family {
                if x != y {
                    add(Formula::le(Term::var(x.clone()), Term::var(y.clone())));
                }
            }
        }
    }

    let sort = |n: &str| tt.sort_of(n);
    for r in &g.rules {
        let rels: Vec<GrammarOp> = r.ops.iter().copied().filter(|o| o.is_relational()).collect();
        if rels.is_empty() {
            continue;
        }
        let left_sort = sort(&r.left).unwrap();
        // Terms standing for each side of the rule.
        let side = |name: &str| -> Vec<Term> {
            match sort(name) {
                Some(Sort::ArrayOfInt) => {
                    index_terms(name).into_iter().map(|t| Term::read(name, t)).collect()
                }
                _ => alloc::vec![Term::var(name)],
            }
        };
        match (&r.right, left_sort) {
            (RuleTarget::Bool(true), Sort::Bool) => add(Formula::var(r.left.clone())),
            (RuleTarget::Bool(false), Sort::Bool) => add(Formula::not(Formula::var(r.left.clone()))),
            (RuleTarget::Var(y), Sort::Bool) => {
                add(Formula::iff(Formula::var(r.left.clone()), Formula::var(y.clone())))
            }
            (RuleTarget::Int(c), _) => {
                for l in side(&r.left) {
                    for op in &rels {
                        add(op.apply(l.clone(), Term::Int(*c)));
                    }
                }
            }
            (RuleTarget::Var(y), _) => {
                let lefts = side(&r.left);
                let rights = side(y);
                for l in &lefts {
                    for rt in &rights {
                        if l == rt {
                            continue;
                        }
                        for op in &rels {
                            add(op.apply(l.clone(), rt.clone()));
                        }
                    }
                }
                let scalar = left_sort == Sort::Int && sort(y) == Some(Sort::Int);
                if scalar {
                    let x = Term::var(r.left.clone());
                    let yt = Term::var(y.clone());
                    for op in &rels {
                        if r.ops.contains(&GrammarOp::Add) {
                            for c in &cs {
                                add(op.apply(Term::add(x.clone(), Term::Int(*c)), yt.clone()));
                            }
                        }
                        if r.ops.contains(&GrammarOp::Sub) {
                            for c in &cs {
                                add(op.apply(Term::sub(x.clone(), Term::Int(*c)), yt.clone()));
                            }
                        }
                        if r.ops.contains(&GrammarOp::Mul) {
                            for c in g.literals.iter().filter(|c| **c != 0 && **c != 1) {
                                add(op.apply(Term::scale(*c, x.clone()), yt.clone()));
                            }
                        }
                    }
                }
            }
            (RuleTarget::Bool(_), _) => {}
        }
    }
    Ok(vocab)
}

/// Add `n` fresh dummy index variables and license each as an index into
/// every array. One variable is called `i`; several are `i1`, `i2`, ...
pub fn inject_quantifier_vars(
    tt: &TypeTheory,
    g: &GrammarSpec,
    n: usize,
) -> (TypeTheory, GrammarSpec, Vec<String>) {
    let mut tt = tt.clone();
    let mut g = g.clone();
    let mut names = Vec::new();
    for k in 1..=n {
        let mut name = if n == 1 { "i".to_string() } else { format!("i{k}") };
        while tt.get(&name).is_some() {
            name.push('_');
        }
        tt.variables.push(VariableDecl::dummy(name.clone()));
        names.push(name);
    }
    let arrays: Vec<String> = tt.arrays().map(|d| d.name.clone()).collect();
    for a in &arrays {
        for x in &names {
            g.rules.push(GrammarRule::new(a.clone(), RuleTarget::Var(x.clone()), &[GrammarOp::Index]));
        }
    }
    (tt, g, names)
}
