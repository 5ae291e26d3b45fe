use alloc::collections::btree_map::{self, BTreeMap};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{Formula, Phase, Quantifier, Sort, Term, VariableDecl};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Array(Vec<i64>),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Bool(_) => Sort::Bool,
            Value::Int(_) => Sort::Int,
            Value::Array(_) => Sort::ArrayOfInt,
        }
    }

    pub fn default_for(sort: Sort, bound: Option<u32>) -> Value {
        match sort {
            Sort::Bool => Value::Bool(false),
            Sort::Int => Value::Int(0),
            Sort::ArrayOfInt => Value::Array(alloc::vec![0; bound.unwrap_or(0) as usize]),
        }
    }
}

impl core::fmt::Display for Value {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Array(xs) => {
                f.write_str("[")?;
                for (k, x) in xs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// An assignment of values to variables. Dummy witnesses are kept in the
/// map; presentation layers hide them.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Behavior(BTreeMap<String, Value>);

impl Behavior {
    pub fn new() -> Self {
        Behavior(BTreeMap::new())
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) -> Option<Value> {
        self.0.insert(name.into(), value)
    }

    pub fn with(mut self, name: impl Into<String>, value: Value) -> Self {
        self.insert(name, value);
        self
    }

    pub fn remove(&mut self, name: &str) -> Option<Value> {
        self.0.remove(name)
    }

    pub fn iter(&self) -> btree_map::Iter<'_, String, Value> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn int(&self, name: &str) -> Option<i64> {
        match self.0.get(name) {
            Some(Value::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn array(&self, name: &str) -> Option<&[i64]> {
        match self.0.get(name) {
            Some(Value::Array(v)) => Some(v),
            _ => None,
        }
    }

    /// The behavior restricted to declared inputs and outputs, ordered
    /// inputs first and alphabetically inside each phase.
    pub fn visible(&self, decls: &[VariableDecl]) -> Vec<(String, Value)> {
        let mut out = Vec::new();
        for phase in [Phase::Input, Phase::Output] {
            let mut names: Vec<&VariableDecl> = decls.iter().filter(|d| d.phase == phase).collect();
            names.sort_by(|a, b| a.name.cmp(&b.name));
            for d in names {
                if let Some(v) = self.0.get(&d.name) {
                    out.push((d.name.clone(), v.clone()));
                }
            }
        }
        out
    }

    /// Keep only the given names.
    pub fn restrict(&self, names: &[String]) -> Behavior {
        Behavior(
            self.0.iter().filter(|(k, _)| names.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
        )
    }
}

impl FromIterator<(String, Value)> for Behavior {
    fn from_iter<T: IntoIterator<Item = (String, Value)>>(iter: T) -> Self {
        Behavior(iter.into_iter().collect())
    }
}

impl core::fmt::Display for Behavior {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("{")?;
        for (k, (name, v)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name} = {v}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("variable `{0}` has no value")]
    Unbound(String),
    #[error("variable `{name}` is not of sort {expected:?}")]
    SortMismatch { name: String, expected: Sort },
    #[error("quantifier over `{0}` needs an array bound")]
    Unbounded(String),
}

struct Scope<'a> {
    behavior: &'a Behavior,
    locals: Vec<(String, Value)>,
    bound: Option<u32>,
}

impl Scope<'_> {
    fn lookup(&self, name: &str) -> Result<&Value, EvalError> {
        if let Some((_, v)) = self.locals.iter().rev().find(|(n, _)| n == name) {
            return Ok(v);
        }
        self.behavior.get(name).ok_or_else(|| EvalError::Unbound(name.to_string()))
    }

    fn int(&self, name: &str) -> Result<i64, EvalError> {
        match self.lookup(name)? {
            Value::Int(v) => Ok(*v),
            _ => Err(EvalError::SortMismatch { name: name.to_string(), expected: Sort::Int }),
        }
    }

    fn array(&self, name: &str) -> Result<&[i64], EvalError> {
        match self.lookup(name)? {
            Value::Array(v) => Ok(v),
            _ => Err(EvalError::SortMismatch { name: name.to_string(), expected: Sort::ArrayOfInt }),
        }
    }

    fn term(&self, t: &Term) -> Result<i64, EvalError> {
        Ok(match t {
            Term::Int(v) => *v,
            Term::Var(x) => self.int(x)?,
            Term::Len(a) => self.array(a)?.len() as i64,
            Term::Read(a, i) => {
                let i = self.term(i)?;
                let xs = self.array(a)?;
                // Reads outside the array see 0, matching the solver encoding.
                usize::try_from(i).ok().and_then(|i| xs.get(i)).copied().unwrap_or(0)
            }
            Term::Add(a, b) => self.term(a)?.wrapping_add(self.term(b)?),
            Term::Sub(a, b) => self.term(a)?.wrapping_sub(self.term(b)?),
            Term::Scale(k, t) => k.wrapping_mul(self.term(t)?),
        })
    }

    fn formula(&mut self, f: &Formula) -> Result<bool, EvalError> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Var(x) => match self.lookup(x)? {
                Value::Bool(b) => *b,
                _ => return Err(EvalError::SortMismatch { name: x.clone(), expected: Sort::Bool }),
            },
            Formula::Eq(a, b) => self.term(a)? == self.term(b)?,
            Formula::Le(a, b) => self.term(a)? <= self.term(b)?,
            Formula::Lt(a, b) => self.term(a)? < self.term(b)?,
            Formula::Not(x) => !self.formula(x)?,
            Formula::And(fs) => {
                for x in fs {
                    if !self.formula(x)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for x in fs {
                    if self.formula(x)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(a, b) => !self.formula(a)? || self.formula(b)?,
            Formula::Iff(a, b) => self.formula(a)? == self.formula(b)?,
            Formula::Quant { kind, binders, body } => self.quant(*kind, binders, 0, body)?,
            Formula::Derived(d) => self.formula(&d.body)?,
        })
    }

    fn quant(
        &mut self,
        kind: Quantifier,
        binders: &[super::Binder],
        at: usize,
        body: &Formula,
    ) -> Result<bool, EvalError> {
        let Some(b) = binders.get(at) else {
            return self.formula(body);
        };
        let domain: Vec<Value> = match b.sort {
            Sort::Bool => alloc::vec![Value::Bool(false), Value::Bool(true)],
            Sort::Int => {
                let n = self.bound.ok_or_else(|| EvalError::Unbounded(b.name.clone()))?;
                (0..n as i64).map(Value::Int).collect()
            }
            Sort::ArrayOfInt => return Err(EvalError::Unbounded(b.name.clone())),
        };
        let want = kind == Quantifier::Exists;
        for v in domain {
            self.locals.push((b.name.clone(), v));
            let r = self.quant(kind, binders, at + 1, body);
            self.locals.pop();
            if r? == want {
                return Ok(want);
            }
        }
        Ok(!want)
    }
}

/// Evaluate `f` on a behavior. Integer quantifiers range over
/// `0..bound`; this is the bounded semantics used for checking
/// synthesized formulas against behaviors of fixed array length.
pub fn eval(f: &Formula, behavior: &Behavior, bound: Option<u32>) -> Result<bool, EvalError> {
    Scope { behavior, locals: Vec::new(), bound }.formula(f)
}

pub fn eval_term(t: &Term, behavior: &Behavior) -> Result<i64, EvalError> {
    Scope { behavior, locals: Vec::new(), bound: None }.term(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Binder;
    use alloc::vec;

    fn b() -> Behavior {
        Behavior::new()
            .with("a", Value::Array(vec![3, 1, 4]))
            .with("e", Value::Int(4))
            .with("i", Value::Int(1))
            .with("p", Value::Bool(true))
    }

    #[test]
    fn reads_and_lengths() {
        let f = Formula::eq(Term::read("a", Term::Int(2)), Term::var("e"));
        assert!(eval(&f, &b(), None).unwrap());
        let last = Formula::eq(Term::last_index("a"), Term::Int(2));
        assert!(eval(&last, &b(), None).unwrap());
        let out = Formula::eq(Term::read("a", Term::Int(7)), Term::Int(0));
        assert!(eval(&out, &b(), None).unwrap());
    }

    #[test]
    fn quantifiers_range_over_bound() {
        let f = Formula::exists(
            vec![Binder::int("k")],
            Formula::eq(Term::read("a", Term::var("k")), Term::var("e")),
        );
        assert!(eval(&f, &b(), Some(3)).unwrap());
        assert!(!eval(&f, &b(), Some(2)).unwrap());
        assert!(matches!(eval(&f, &b(), None), Err(EvalError::Unbounded(_))));
    }

    #[test]
    fn locals_shadow_behavior() {
        let f = Formula::forall(vec![Binder::int("i")], Formula::le(Term::Int(0), Term::var("i")));
        assert!(eval(&f, &b(), Some(3)).unwrap());
    }

    #[test]
    fn sort_errors() {
        let f = Formula::var("e");
        assert!(matches!(eval(&f, &b(), None), Err(EvalError::SortMismatch { .. })));
        let g = Formula::le(Term::var("zz"), Term::Int(0));
        assert_eq!(eval(&g, &b(), None), Err(EvalError::Unbound("zz".into())));
    }

    #[test]
    fn visible_orders_inputs_first() {
        let decls = vec![
            VariableDecl::output("rv", Sort::Int),
            VariableDecl::input("e", Sort::Int),
            VariableDecl::input("a", Sort::ArrayOfInt),
            VariableDecl::dummy("i"),
        ];
        let beh = b().with("rv", Value::Int(-1));
        let names: Vec<String> = beh.visible(&decls).into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, vec!["a", "e", "rv"]);
    }
}
