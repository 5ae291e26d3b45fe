//! Sorted terms and formulas over integer, boolean and integer-array
//! variables.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

mod eval;
pub mod parse;
mod print;
pub mod smtlib;

pub use eval::{eval, eval_term, Behavior, EvalError, Value};
pub use parse::{parse_formula, ParseError};
pub use smtlib::{to_smtlib, SmtWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sort {
    Bool,
    Int,
    ArrayOfInt,
}

/// Role of a variable in a behavior. Dummies are the quantified
/// witnesses introduced for array properties; they are hidden from users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Input,
    Output,
    Dummy,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VariableDecl {
    pub name: String,
    pub sort: Sort,
    pub phase: Phase,
}

impl VariableDecl {
    pub fn new(name: impl Into<String>, sort: Sort, phase: Phase) -> Self {
        VariableDecl { name: name.into(), sort, phase }
    }

    pub fn input(name: impl Into<String>, sort: Sort) -> Self {
        Self::new(name, sort, Phase::Input)
    }

    pub fn output(name: impl Into<String>, sort: Sort) -> Self {
        Self::new(name, sort, Phase::Output)
    }

    pub fn dummy(name: impl Into<String>) -> Self {
        Self::new(name, Sort::Int, Phase::Dummy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Int(i64),
    Var(String),
    /// Length of an array variable.
    Len(String),
    Read(String, Box<Term>),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Scale(i64, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn len(array: impl Into<String>) -> Term {
        Term::Len(array.into())
    }

    pub fn read(array: impl Into<String>, index: Term) -> Term {
        Term::Read(array.into(), Box::new(index))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sub(Box::new(a), Box::new(b))
    }

    pub fn scale(k: i64, t: Term) -> Term {
        Term::Scale(k, Box::new(t))
    }

    /// `|a| - 1`
    pub fn last_index(array: impl Into<String>) -> Term {
        Term::sub(Term::len(array), Term::Int(1))
    }

    pub fn is_last_index(&self) -> bool {
        matches!(self, Term::Sub(a, b) if matches!(**a, Term::Len(_)) && **b == Term::Int(1))
    }

    /// Arithmetic operator count. `|a| - 1` is treated as a single
    /// atomic term, as are reads and lengths.
    pub fn op_count(&self) -> usize {
        if self.is_last_index() {
            return 0;
        }
        match self {
            Term::Int(_) | Term::Var(_) | Term::Len(_) => 0,
            Term::Read(_, i) => i.op_count(),
            Term::Add(a, b) | Term::Sub(a, b) => 1 + a.op_count() + b.op_count(),
            Term::Scale(_, t) => 1 + t.op_count(),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(v) => Some(*v),
            _ => None,
        }
    }

    /// Constant folding.
    pub fn fold(&self) -> Term {
        match self {
            Term::Int(_) | Term::Var(_) | Term::Len(_) => self.clone(),
            Term::Read(a, i) => Term::Read(a.clone(), Box::new(i.fold())),
            Term::Add(a, b) => {
                let (a, b) = (a.fold(), b.fold());
                match (a.as_int(), b.as_int()) {
                    (Some(x), Some(y)) => Term::Int(x.wrapping_add(y)),
                    (_, Some(0)) => a,
                    (Some(0), _) => b,
                    _ => Term::add(a, b),
                }
            }
            Term::Sub(a, b) => {
                let (a, b) = (a.fold(), b.fold());
                match (a.as_int(), b.as_int()) {
                    (Some(x), Some(y)) => Term::Int(x.wrapping_sub(y)),
                    (_, Some(0)) => a,
                    _ => Term::sub(a, b),
                }
            }
            Term::Scale(k, t) => {
                let t = t.fold();
                match (k, t.as_int()) {
                    (_, Some(v)) => Term::Int(k.wrapping_mul(v)),
                    (1, _) => t,
                    (0, _) => Term::Int(0),
                    _ => Term::scale(*k, t),
                }
            }
        }
    }

    fn collect_vars(&self, bound: &[String], out: &mut BTreeSet<String>) {
        match self {
            Term::Int(_) => {}
            Term::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            Term::Len(a) => {
                out.insert(a.clone());
            }
            Term::Read(a, i) => {
                out.insert(a.clone());
                i.collect_vars(bound, out);
            }
            Term::Add(a, b) | Term::Sub(a, b) => {
                a.collect_vars(bound, out);
                b.collect_vars(bound, out);
            }
            Term::Scale(_, t) => t.collect_vars(bound, out),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&[], &mut out);
        out
    }

    /// Bottom-up rewrite; `f` sees every subterm after its children were
    /// rewritten and may replace it.
    pub fn rewrite(&self, f: &mut dyn FnMut(Term) -> Term) -> Term {
        let t = match self {
            Term::Int(_) | Term::Var(_) | Term::Len(_) => self.clone(),
            Term::Read(a, i) => Term::Read(a.clone(), Box::new(i.rewrite(f))),
            Term::Add(a, b) => Term::add(a.rewrite(f), b.rewrite(f)),
            Term::Sub(a, b) => Term::sub(a.rewrite(f), b.rewrite(f)),
            Term::Scale(k, t) => Term::scale(*k, t.rewrite(f)),
        };
        f(t)
    }

    /// True if any read occurs inside the index of another read.
    pub fn has_nested_read(&self) -> bool {
        match self {
            Term::Read(_, i) => i.has_read(),
            Term::Add(a, b) | Term::Sub(a, b) => a.has_nested_read() || b.has_nested_read(),
            Term::Scale(_, t) => t.has_nested_read(),
            _ => false,
        }
    }

    pub fn has_read(&self) -> bool {
        match self {
            Term::Read(..) => true,
            Term::Add(a, b) | Term::Sub(a, b) => a.has_read() || b.has_read(),
            Term::Scale(_, t) => t.has_read(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Binder {
    pub name: String,
    pub sort: Sort,
}

impl Binder {
    pub fn int(name: impl Into<String>) -> Self {
        Binder { name: name.into(), sort: Sort::Int }
    }

    pub fn bool(name: impl Into<String>) -> Self {
        Binder { name: name.into(), sort: Sort::Bool }
    }
}

/// Call of a registered derived clause. It prints as the call but is
/// evaluated and sent to solvers as the inlined body.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DerivedCall {
    pub name: String,
    pub args: Vec<String>,
    pub body: Box<Formula>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Var(String),
    Eq(Term, Term),
    Le(Term, Term),
    Lt(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Quant { kind: Quantifier, binders: Vec<Binder>, body: Box<Formula> },
    Derived(DerivedCall),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    /// Equality with its arguments in canonical order, so that `x = y`
    /// and `y = x` compare equal.
    pub fn eq(a: Term, b: Term) -> Formula {
        // Reads first, constants last: `a[i] = e`, `x = 0`.
        let rank = |t: &Term| match t {
            Term::Read(..) => 0,
            Term::Len(_) => 1,
            Term::Var(_) => 2,
            Term::Add(..) | Term::Sub(..) | Term::Scale(..) => 3,
            Term::Int(_) => 4,
        };
        if (rank(&b), &b) < (rank(&a), &a) {
            Formula::Eq(b, a)
        } else {
            Formula::Eq(a, b)
        }
    }

    pub fn le(a: Term, b: Term) -> Formula {
        Formula::Le(a, b)
    }

    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::Lt(a, b)
    }

    pub fn ne(a: Term, b: Term) -> Formula {
        Formula::not(Formula::eq(a, b))
    }

    /// Negation; removes a double negation.
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::Not(inner) => *inner,
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            f => Formula::Not(Box::new(f)),
        }
    }

    /// Conjunction; an empty list is `true`, a singleton is its element.
    pub fn and(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::True,
            1 => fs.pop().unwrap(),
            _ => Formula::And(fs),
        }
    }

    /// Disjunction; an empty list is `false`, a singleton is its element.
    pub fn or(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::False,
            1 => fs.pop().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn quant(kind: Quantifier, binders: Vec<Binder>, body: Formula) -> Formula {
        if binders.is_empty() {
            return body;
        }
        Formula::Quant { kind, binders, body: Box::new(body) }
    }

    pub fn exists(binders: Vec<Binder>, body: Formula) -> Formula {
        Formula::quant(Quantifier::Exists, binders, body)
    }

    pub fn forall(binders: Vec<Binder>, body: Formula) -> Formula {
        Formula::quant(Quantifier::Forall, binders, body)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Quant { .. } => false,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Derived(d) => d.body.is_quantifier_free(),
            _ => true,
        }
    }

    /// Relational and boolean operators plus arithmetic inside terms.
    /// A derived call counts as one operator.
    pub fn op_count(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Var(_) => 0,
            Formula::Eq(a, b) | Formula::Le(a, b) | Formula::Lt(a, b) => {
                1 + a.op_count() + b.op_count()
            }
            Formula::Not(f) => 1 + f.op_count(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.len().saturating_sub(1) + fs.iter().map(Formula::op_count).sum::<usize>()
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => 1 + a.op_count() + b.op_count(),
            Formula::Quant { body, .. } => 1 + body.op_count(),
            Formula::Derived(_) => 1,
        }
    }

    fn collect_vars(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            Formula::Eq(a, b) | Formula::Le(a, b) | Formula::Lt(a, b) => {
                a.collect_vars(bound, out);
                b.collect_vars(bound, out);
            }
            Formula::Not(f) => f.collect_vars(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_vars(bound, out);
                }
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_vars(bound, out);
                b.collect_vars(bound, out);
            }
            Formula::Quant { binders, body, .. } => {
                let depth = bound.len();
                bound.extend(binders.iter().map(|b| b.name.clone()));
                body.collect_vars(bound, out);
                bound.truncate(depth);
            }
            Formula::Derived(d) => d.body.collect_vars(bound, out),
        }
    }

    /// Free variable names, including arrays that are read or measured.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut Vec::new(), &mut out);
        out
    }

    /// Rewrite every top-level term of every atom. Binder shadowing is
    /// the caller's concern.
    pub fn map_terms(&self, f: &mut dyn FnMut(&Term) -> Term) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Var(_) => self.clone(),
            Formula::Eq(a, b) => Formula::eq(f(a), f(b)),
            Formula::Le(a, b) => Formula::Le(f(a), f(b)),
            Formula::Lt(a, b) => Formula::Lt(f(a), f(b)),
            Formula::Not(x) => Formula::Not(Box::new(x.map_terms(f))),
            Formula::And(fs) => Formula::And(fs.iter().map(|x| x.map_terms(f)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|x| x.map_terms(f)).collect()),
            Formula::Implies(a, b) => {
                Formula::Implies(Box::new(a.map_terms(f)), Box::new(b.map_terms(f)))
            }
            Formula::Iff(a, b) => Formula::Iff(Box::new(a.map_terms(f)), Box::new(b.map_terms(f))),
            Formula::Quant { kind, binders, body } => Formula::Quant {
                kind: *kind,
                binders: binders.clone(),
                body: Box::new(body.map_terms(f)),
            },
            Formula::Derived(d) => Formula::Derived(DerivedCall {
                name: d.name.clone(),
                args: d.args.clone(),
                body: Box::new(d.body.map_terms(f)),
            }),
        }
    }

    /// Capture-avoiding renaming of free variables (scalars, booleans and
    /// arrays alike). Names bound by an inner quantifier are left alone.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Formula {
        self.rename_in(map, &mut Vec::new())
    }

    fn rename_in(&self, map: &BTreeMap<String, String>, bound: &mut Vec<String>) -> Formula {
        let lookup = |name: &String, bound: &Vec<String>| -> String {
            if bound.contains(name) {
                return name.clone();
            }
            map.get(name).cloned().unwrap_or_else(|| name.clone())
        };
        match self {
            Formula::Var(v) => Formula::Var(lookup(v, bound)),
            Formula::Quant { kind, binders, body } => {
                let depth = bound.len();
                bound.extend(binders.iter().map(|b| b.name.clone()));
                let body = body.rename_in(map, bound);
                bound.truncate(depth);
                Formula::Quant { kind: *kind, binders: binders.clone(), body: Box::new(body) }
            }
            Formula::Derived(d) => Formula::Derived(DerivedCall {
                name: d.name.clone(),
                args: d.args.iter().map(|a| lookup(a, bound)).collect(),
                body: Box::new(d.body.rename_in(map, bound)),
            }),
            Formula::Not(x) => Formula::Not(Box::new(x.rename_in(map, bound))),
            Formula::And(fs) => Formula::And(fs.iter().map(|x| x.rename_in(map, bound)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|x| x.rename_in(map, bound)).collect()),
            Formula::Implies(a, b) => Formula::Implies(
                Box::new(a.rename_in(map, bound)),
                Box::new(b.rename_in(map, bound)),
            ),
            Formula::Iff(a, b) => Formula::Iff(
                Box::new(a.rename_in(map, bound)),
                Box::new(b.rename_in(map, bound)),
            ),
            _ => {
                let bound_now = bound.clone();
                self.map_terms(&mut |t| {
                    t.rewrite(&mut |t| match t {
                        Term::Var(v) => Term::Var(lookup(&v, &bound_now)),
                        Term::Len(a) => Term::Len(lookup(&a, &bound_now)),
                        Term::Read(a, i) => Term::Read(lookup(&a, &bound_now), i),
                        t => t,
                    })
                })
            }
        }
    }

    /// Replace free integer variables by terms. Names bound inside are
    /// skipped.
    pub fn substitute(&self, map: &BTreeMap<String, Term>) -> Formula {
        self.substitute_in(map, &mut Vec::new())
    }

    fn substitute_in(&self, map: &BTreeMap<String, Term>, bound: &mut Vec<String>) -> Formula {
        match self {
            Formula::Quant { kind, binders, body } => {
                let depth = bound.len();
                bound.extend(binders.iter().map(|b| b.name.clone()));
                let body = body.substitute_in(map, bound);
                bound.truncate(depth);
                Formula::Quant { kind: *kind, binders: binders.clone(), body: Box::new(body) }
            }
            Formula::Derived(d) => Formula::Derived(DerivedCall {
                name: d.name.clone(),
                args: d.args.clone(),
                body: Box::new(d.body.substitute_in(map, bound)),
            }),
            Formula::Not(x) => Formula::Not(Box::new(x.substitute_in(map, bound))),
            Formula::And(fs) => {
                Formula::And(fs.iter().map(|x| x.substitute_in(map, bound)).collect())
            }
            Formula::Or(fs) => Formula::Or(fs.iter().map(|x| x.substitute_in(map, bound)).collect()),
            Formula::Implies(a, b) => Formula::Implies(
                Box::new(a.substitute_in(map, bound)),
                Box::new(b.substitute_in(map, bound)),
            ),
            Formula::Iff(a, b) => Formula::Iff(
                Box::new(a.substitute_in(map, bound)),
                Box::new(b.substitute_in(map, bound)),
            ),
            _ => {
                let bound_now = bound.clone();
                self.map_terms(&mut |t| {
                    t.rewrite(&mut |t| match t {
                        Term::Var(v) if !bound_now.contains(&v) => match map.get(&v) {
                            Some(r) => r.clone(),
                            None => Term::Var(v),
                        },
                        t => t,
                    })
                })
            }
        }
    }

    /// Fold constant subterms and decide ground comparisons.
    pub fn fold(&self) -> Formula {
        match self {
            Formula::Eq(a, b) | Formula::Le(a, b) | Formula::Lt(a, b) => {
                let (a, b) = (a.fold(), b.fold());
                if let (Some(x), Some(y)) = (a.as_int(), b.as_int()) {
                    let holds = match self {
                        Formula::Eq(..) => x == y,
                        Formula::Le(..) => x <= y,
                        _ => x < y,
                    };
                    return if holds { Formula::True } else { Formula::False };
                }
                match self {
                    Formula::Eq(..) => Formula::eq(a, b),
                    Formula::Le(..) => Formula::Le(a, b),
                    _ => Formula::Lt(a, b),
                }
            }
            Formula::Not(x) => Formula::not(x.fold()),
            Formula::And(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    match f.fold() {
                        Formula::True => {}
                        Formula::False => return Formula::False,
                        f => out.push(f),
                    }
                }
                Formula::and(out)
            }
            Formula::Or(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    match f.fold() {
                        Formula::False => {}
                        Formula::True => return Formula::True,
                        f => out.push(f),
                    }
                }
                Formula::or(out)
            }
            Formula::Implies(a, b) => match (a.fold(), b.fold()) {
                (Formula::False, _) | (_, Formula::True) => Formula::True,
                (Formula::True, b) => b,
                (a, Formula::False) => Formula::not(a),
                (a, b) => Formula::implies(a, b),
            },
            Formula::Iff(a, b) => match (a.fold(), b.fold()) {
                (Formula::True, x) | (x, Formula::True) => x,
                (Formula::False, x) | (x, Formula::False) => Formula::not(x),
                (a, b) => Formula::iff(a, b),
            },
            Formula::Quant { kind, binders, body } => match body.fold() {
                b @ (Formula::True | Formula::False) => b,
                b => Formula::quant(*kind, binders.clone(), b),
            },
            Formula::Derived(d) => Formula::Derived(DerivedCall {
                name: d.name.clone(),
                args: d.args.clone(),
                body: Box::new(d.body.fold()),
            }),
            _ => self.clone(),
        }
    }

    /// Inline derived calls into their bodies.
    pub fn inline(&self) -> Formula {
        match self {
            Formula::Derived(d) => d.body.inline(),
            Formula::Not(x) => Formula::Not(Box::new(x.inline())),
            Formula::And(fs) => Formula::And(fs.iter().map(Formula::inline).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(Formula::inline).collect()),
            Formula::Implies(a, b) => Formula::implies(a.inline(), b.inline()),
            Formula::Iff(a, b) => Formula::iff(a.inline(), b.inline()),
            Formula::Quant { kind, binders, body } => Formula::Quant {
                kind: *kind,
                binders: binders.clone(),
                body: Box::new(body.inline()),
            },
            _ => self.clone(),
        }
    }

    /// Visit every term occurring in an atom (not inside derived bodies
    /// unless `into_derived`).
    pub fn for_each_term(&self, into_derived: bool, f: &mut dyn FnMut(&Term)) {
        match self {
            Formula::Eq(a, b) | Formula::Le(a, b) | Formula::Lt(a, b) => {
                f(a);
                f(b);
            }
            Formula::Not(x) => x.for_each_term(into_derived, f),
            Formula::And(fs) | Formula::Or(fs) => {
                for x in fs {
                    x.for_each_term(into_derived, f);
                }
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.for_each_term(into_derived, f);
                b.for_each_term(into_derived, f);
            }
            Formula::Quant { body, .. } => body.for_each_term(into_derived, f),
            Formula::Derived(d) if into_derived => d.body.for_each_term(into_derived, f),
            _ => {}
        }
    }
}

impl From<bool> for Formula {
    fn from(b: bool) -> Self {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }
}

/// Sort of each declared name, for lookups while parsing and checking.
pub fn sort_map(decls: &[VariableDecl]) -> BTreeMap<String, Sort> {
    decls.iter().map(|d| (d.name.clone(), d.sort)).collect()
}

/// Names in `decls` with the given phase.
pub fn names_with_phase(decls: &[VariableDecl], phase: Phase) -> Vec<String> {
    decls.iter().filter(|d| d.phase == phase).map(|d| d.name.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn equality_is_canonical() {
        let a = Formula::eq(Term::var("x"), Term::var("y"));
        let b = Formula::eq(Term::var("y"), Term::var("x"));
        assert_eq!(a, b);
    }

    #[test]
    fn op_counts() {
        let last = Formula::le(Term::var("right"), Term::last_index("a"));
        assert_eq!(last.op_count(), 1);
        let off = Formula::le(Term::add(Term::var("i"), Term::Int(1)), Term::last_index("a"));
        assert_eq!(off.op_count(), 2);
        let cmp = Formula::le(
            Term::read("a", Term::var("i")),
            Term::read("a", Term::add(Term::var("i"), Term::Int(1))),
        );
        assert_eq!(cmp.op_count(), 2);
        let both = Formula::le(
            Term::read("a", Term::add(Term::var("i"), Term::Int(1))),
            Term::read("a", Term::sub(Term::var("i"), Term::Int(1))),
        );
        assert_eq!(both.op_count(), 3);
    }

    #[test]
    fn free_vars_skip_binders() {
        let f = Formula::exists(
            vec![Binder::int("i")],
            Formula::eq(Term::read("a", Term::var("i")), Term::var("e")),
        );
        let fv: Vec<_> = f.free_vars().into_iter().collect();
        assert_eq!(fv, vec!["a".to_string(), "e".to_string()]);
    }

    #[test]
    fn rename_respects_binders() {
        let f = Formula::and(vec![
            Formula::le(Term::var("i"), Term::var("x")),
            Formula::exists(vec![Binder::int("i")], Formula::le(Term::var("i"), Term::var("x"))),
        ]);
        let mut m = BTreeMap::new();
        m.insert("i".to_string(), "k".to_string());
        m.insert("x".to_string(), "y".to_string());
        let g = f.rename(&m);
        let expect = Formula::and(vec![
            Formula::le(Term::var("k"), Term::var("y")),
            Formula::exists(vec![Binder::int("i")], Formula::le(Term::var("i"), Term::var("y"))),
        ]);
        assert_eq!(g, expect);
    }

    #[test]
    fn substitution_and_folding() {
        let f = Formula::le(Term::var("r"), Term::last_index("a"));
        let g = f.map_terms(&mut |t| {
            t.rewrite(&mut |t| match t {
                Term::Len(_) => Term::Int(5),
                t => t,
            })
        });
        assert_eq!(g.fold(), Formula::le(Term::var("r"), Term::Int(4)));
        let mut m = BTreeMap::new();
        m.insert("r".to_string(), Term::Int(2));
        assert_eq!(g.substitute(&m).fold(), Formula::True);
    }

    #[test]
    fn negation_cancels() {
        let x = Formula::var("p");
        assert_eq!(Formula::not(Formula::not(x.clone())), x);
    }
}
