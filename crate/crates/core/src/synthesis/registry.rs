//! Named derived clauses that later vocabularies can call.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;
use serde::{Deserialize, Serialize};

use crate::formula::parse::{lex, ParseError, Parser, Tok};
use crate::formula::{DerivedCall, Formula, Sort, VariableDecl};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedDefinition {
    pub name: String,
    pub params: Vec<VariableDecl>,
    pub body: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("derived clause `{0}` is already registered")]
    Duplicate(String),
    #[error("unknown derived clause `{0}`")]
    Unknown(String),
    #[error("`{name}` takes {expected} arguments, got {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("body of `{name}` mentions `{var}`, which is not a parameter")]
    FreeVariable { name: String, var: String },
    #[error("parameter `{param}` of `{name}` has sort {expected:?}, but `{arg}` has sort {found:?}")]
    ArgumentSort { name: String, param: String, arg: String, expected: Sort, found: Sort },
    #[error("{0}")]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedRegistry {
    defs: BTreeMap<String, DerivedDefinition>,
}

impl DerivedRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(
        &mut self,
        name: &str,
        params: Vec<VariableDecl>,
        body: Formula,
    ) -> Result<(), RegistryError> {
        if self.defs.contains_key(name) {
            return Err(RegistryError::Duplicate(name.to_string()));
        }
        for v in body.free_vars() {
            if !params.iter().any(|p| p.name == v) {
                return Err(RegistryError::FreeVariable { name: name.to_string(), var: v });
            }
        }
        self.defs.insert(name.to_string(), DerivedDefinition { name: name.to_string(), params, body });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&DerivedDefinition> {
        self.defs.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// `name(args)` with the body's parameters replaced by `args`.
    pub fn instantiate(&self, name: &str, args: &[String]) -> Result<Formula, RegistryError> {
        let def = self.defs.get(name).ok_or_else(|| RegistryError::Unknown(name.to_string()))?;
        if def.params.len() != args.len() {
            return Err(RegistryError::Arity {
                name: name.to_string(),
                expected: def.params.len(),
                found: args.len(),
            });
        }
        let body = avoid_capture(&def.body, args);
        let map: BTreeMap<String, String> =
            def.params.iter().map(|p| p.name.clone()).zip(args.iter().cloned()).collect();
        Ok(Formula::Derived(DerivedCall {
            name: name.to_string(),
            args: args.to_vec(),
            body: Box::new(body.rename(&map)),
        }))
    }

    /// Like [`Self::instantiate`], also checking argument sorts.
    pub fn instantiate_checked(
        &self,
        name: &str,
        args: &[String],
        sort_of: &dyn Fn(&str) -> Option<Sort>,
    ) -> Result<Formula, RegistryError> {
        let def = self.defs.get(name).ok_or_else(|| RegistryError::Unknown(name.to_string()))?;
        for (p, a) in def.params.iter().zip(args) {
            let found = sort_of(a).ok_or_else(|| RegistryError::FreeVariable {
                name: name.to_string(),
                var: a.clone(),
            })?;
            if found != p.sort {
                return Err(RegistryError::ArgumentSort {
                    name: name.to_string(),
                    param: p.name.clone(),
                    arg: a.clone(),
                    expected: p.sort,
                    found,
                });
            }
        }
        self.instantiate(name, args)
    }

    /// Read `def name(int[] a, int x, bool p) := formula;` entries.
    /// Bodies may call earlier definitions. Returns how many were added.
    pub fn parse_library(&mut self, src: &str) -> Result<usize, RegistryError> {
        let mut p = Parser::new(lex(src)?);
        let mut added = 0;
        while !p.at_eof() {
            p.expect_word("def")?;
            let name = p.name()?;
            p.expect_sym("(")?;
            let mut params = Vec::new();
            if !p.is_sym(")") {
                loop {
                    let sort = parse_sort(&mut p)?;
                    let pname = p.name()?;
                    params.push(VariableDecl::input(pname, sort));
                    if !p.eat_sym(",") {
                        break;
                    }
                }
            }
            p.expect_sym(")")?;
            p.expect_sym(":")?;
            p.expect_sym("=")?;
            let body_toks = p.take_until_sym(";");
            let body = {
                let resolver =
                    |n: &str, args: &[String]| self.instantiate(n, args).map_err(|e| e.to_string());
                let sorts = |n: &str| params.iter().find(|d| d.name == n).map(|d| d.sort);
                let mut sub =
                    Parser::new(body_toks).with_resolver(Some(&resolver)).with_sorts(Some(&sorts));
                let f = sub.formula()?;
                if !sub.at_eof() {
                    return Err(sub.error(format!("unexpected {} in definition", sub.peek())).into());
                }
                f
            };
            p.expect_sym(";")?;
            self.register(&name, params, body)?;
            added += 1;
        }
        Ok(added)
    }

    /// The registry in the format [`Self::parse_library`] reads. Bodies
    /// are written with derived calls inlined so entries load in any
    /// order.
    pub fn render_library(&self) -> String {
        let mut out = String::new();
        for d in self.defs.values() {
            let params: Vec<String> = d
                .params
                .iter()
                .map(|p| {
                    let s = match p.sort {
                        Sort::Int => "int",
                        Sort::Bool => "bool",
                        Sort::ArrayOfInt => "int[]",
                    };
                    format!("{s} {}", p.name)
                })
                .collect();
            let _ = writeln!(out, "def {}({}) := {};", d.name, params.join(", "), d.body.inline());
        }
        out
    }
}

pub(crate) fn parse_sort(p: &mut Parser<'_>) -> Result<Sort, ParseError> {
    let word = match p.peek() {
        Tok::Ident(w) => w.clone(),
        t => return Err(p.error(format!("expected a sort, found {t}"))),
    };
    let sort = match word.as_str() {
        "int" => {
            p.bump();
            if p.eat_sym("[") {
                p.expect_sym("]")?;
                Sort::ArrayOfInt
            } else {
                Sort::Int
            }
        }
        "bool" => {
            p.bump();
            Sort::Bool
        }
        w => return Err(p.error(format!("expected a sort, found `{w}`"))),
    };
    Ok(sort)
}

/// Rename binders of `body` that clash with `names`.
fn avoid_capture(body: &Formula, names: &[String]) -> Formula {
    match body {
        Formula::Quant { kind, binders, body } => {
            let mut map = BTreeMap::new();
            let mut new_binders = Vec::new();
            for b in binders {
                let mut b2 = b.clone();
                if names.contains(&b.name) {
                    let mut fresh = b.name.clone();
                    while names.contains(&fresh) || body.free_vars().contains(&fresh) {
                        fresh.push('_');
                    }
                    map.insert(b.name.clone(), fresh.clone());
                    b2.name = fresh;
                }
                new_binders.push(b2);
            }
            let inner = avoid_capture(body, names).rename(&map);
            Formula::Quant { kind: *kind, binders: new_binders, body: Box::new(inner) }
        }
        Formula::Not(x) => Formula::Not(Box::new(avoid_capture(x, names))),
        Formula::And(fs) => Formula::And(fs.iter().map(|x| avoid_capture(x, names)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|x| avoid_capture(x, names)).collect()),
        Formula::Implies(a, b) => Formula::implies(avoid_capture(a, names), avoid_capture(b, names)),
        Formula::Iff(a, b) => Formula::iff(avoid_capture(a, names), avoid_capture(b, names)),
        Formula::Derived(d) => Formula::Derived(DerivedCall {
            name: d.name.clone(),
            args: d.args.clone(),
            body: Box::new(avoid_capture(&d.body, names)),
        }),
        f => f.clone(),
    }
}

/// Register `f` under `name` with the given parameters.
pub fn register_derived_clause(
    name: &str,
    params: Vec<VariableDecl>,
    f: Formula,
    registry: &mut DerivedRegistry,
) -> Result<(), RegistryError> {
    registry.register(name, params, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{eval, parse_formula, Behavior, Value};
    use alloc::vec;

    const LIB: &str = "
        def eina(int[] a, int left, int right, int e) :=
            exists i. left <= i and i <= right and a[i] = e;
    ";

    #[test]
    fn library_round_trip() {
        let mut r = DerivedRegistry::new();
        assert_eq!(r.parse_library(LIB).unwrap(), 1);
        let text = r.render_library();
        let mut r2 = DerivedRegistry::new();
        r2.parse_library(&text).unwrap();
        assert_eq!(r, r2);
    }

    #[test]
    fn instantiation_renames_and_prints_as_call() {
        let mut r = DerivedRegistry::new();
        r.parse_library(LIB).unwrap();
        let f = r.instantiate("eina", &["b".into(), "lo".into(), "hi".into(), "x".into()]).unwrap();
        assert_eq!(f.to_string(), "eina(b, lo, hi, x)");
        let beh = Behavior::new()
            .with("b", Value::Array(vec![5, 6, 7]))
            .with("lo", Value::Int(1))
            .with("hi", Value::Int(2))
            .with("x", Value::Int(7));
        assert!(eval(&f, &beh, Some(3)).unwrap());
    }

    #[test]
    fn capture_is_avoided() {
        let mut r = DerivedRegistry::new();
        r.parse_library(LIB).unwrap();
        let f = r.instantiate("eina", &["a".into(), "i".into(), "right".into(), "e".into()]).unwrap();
        let beh = Behavior::new()
            .with("a", Value::Array(vec![9, 4, 4]))
            .with("i", Value::Int(1))
            .with("right", Value::Int(2))
            .with("e", Value::Int(9));
        // 9 only sits at index 0, left of `i`.
        assert!(!eval(&f, &beh, Some(3)).unwrap());
    }

    #[test]
    fn errors() {
        let mut r = DerivedRegistry::new();
        r.parse_library(LIB).unwrap();
        assert!(matches!(r.parse_library(LIB), Err(RegistryError::Duplicate(_))));
        assert!(matches!(r.instantiate("eina", &["a".into()]), Err(RegistryError::Arity { .. })));
        assert!(matches!(r.instantiate("nope", &[]), Err(RegistryError::Unknown(_))));
        let body = parse_formula("x <= y").unwrap();
        let e = r.register("half", vec![VariableDecl::input("x", Sort::Int)], body).unwrap_err();
        assert!(matches!(e, RegistryError::FreeVariable { .. }));
        let sorts = |n: &str| if n == "a" { Some(Sort::Int) } else { Some(Sort::Int) };
        let e = r
            .instantiate_checked("eina", &["a".into(), "l".into(), "r".into(), "e".into()], &sorts)
            .unwrap_err();
        assert!(matches!(e, RegistryError::ArgumentSort { .. }));
    }

    #[test]
    fn calls_nest() {
        let mut r = DerivedRegistry::new();
        r.parse_library(LIB).unwrap();
        r.parse_library("def missing(int[] a, int l, int r, int e) := !eina(a, l, r, e);").unwrap();
        let f = r.instantiate("missing", &["a".into(), "l".into(), "r".into(), "e".into()]).unwrap();
        assert_eq!(f.to_string(), "missing(a, l, r, e)");
        assert!(f.inline().to_string().starts_with("not (exists i."));
    }
}
