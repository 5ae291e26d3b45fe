//! Theory files.
//!
//! ```text
//! theory search-post {
//!     int [] a;
//!     input int left, right, e;
//!     output int rv;
//!     bool eina(a, left, right, e);
//!     grammar { (a, left, bound); (a, rv, index); (rv, -1, =); }
//!     literals { 0, 1 }
//!     vocab { rv = -1; }
//!     options { k = 1; n = 1; quantifier = exists; bound = 4; }
//!     equiv { scalar l = r; indexed c: l = c where 0 <= c and c < a.size; }
//! }
//! ```
//!
//! Variables default to the input phase. `bool f(args);` imports a
//! registered derived clause as a vocabulary entry.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{
    check_fragment, generate_vocabulary, inject_quantifier_vars, FragmentError, GrammarOp,
    GrammarRule, GrammarSpec, Provenance, QuantifierKind, RuleTarget, TypeTheory, Vocabulary,
};
use crate::equivalence::{EquivalenceTheory, IndexedSet};
use crate::formula::parse::{lex, ParseError, Parser, Tok};
use crate::formula::{Formula, Phase, Sort, VariableDecl};
use crate::synthesis::registry::{parse_sort, DerivedRegistry, RegistryError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TheoryError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("grammar: {0}")]
    Grammar(String),
    #[error("{0}")]
    Registry(#[from] RegistryError),
    #[error("{0}")]
    Fragment(#[from] FragmentError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoryOptions {
    /// Maximum operators per generated atom.
    pub max_ops: usize,
    /// Number of quantified index variables to inject.
    pub quantified: usize,
    pub quantifier: Option<QuantifierKind>,
    pub fragment_check: bool,
    pub bound: Option<u32>,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        TheoryOptions { max_ops: 1, quantified: 0, quantifier: None, fragment_check: false, bound: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoryFile {
    pub name: String,
    pub types: TypeTheory,
    pub grammar: GrammarSpec,
    pub options: TheoryOptions,
    /// Imports and `vocab` entries, in file order.
    pub clauses: Vocabulary,
    pub equivalence: Option<EquivalenceTheory>,
}

impl TheoryFile {
    /// The quantifier kind in effect; injecting variables without naming
    /// a kind means existential.
    pub fn quantifier(&self) -> Option<QuantifierKind> {
        match (self.options.quantifier, self.options.quantified) {
            (Some(k), _) => Some(k),
            (None, 0) => None,
            (None, _) => Some(QuantifierKind::Existential),
        }
    }

    /// Declared variables plus injected dummies, and the vocabulary:
    /// explicit clauses first, then generated atoms.
    pub fn vocabulary(&self) -> Result<(TypeTheory, Vocabulary), TheoryError> {
        let quantified = if self.quantifier().is_some() { self.options.quantified.max(1) } else { 0 };
        let has_dummies = !self.types.dummies().is_empty();
        let (types, grammar) = if quantified > 0 && !has_dummies {
            let (t, g, _) = inject_quantifier_vars(&self.types, &self.grammar, quantified);
            (t, g)
        } else {
            (self.types.clone(), self.grammar.clone())
        };
        let mut vocab = self.clauses.clone();
        if !grammar.rules.is_empty() {
            vocab.extend(&generate_vocabulary(&types, &grammar, self.options.max_ops)?);
        }
        if self.options.fragment_check {
            let kind = self.quantifier().unwrap_or(QuantifierKind::Existential);
            check_fragment(&vocab.formulas(), &types.dummies(), kind)?;
        }
        Ok((types, vocab))
    }
}

fn theory_name(p: &mut Parser<'_>) -> Result<String, ParseError> {
    let mut last_end = p.token().end;
    // Keywords are fine here: `not-sorted`.
    let mut name = match p.peek() {
        Tok::Ident(w) => {
            let w = w.clone();
            p.bump();
            w
        }
        t => return Err(p.error(format!("expected a theory name, found {t}"))),
    };
    // Dashes join segments when written without spaces.
    loop {
        let dash = p.token().clone();
        if dash.tok != Tok::Sym("-") || dash.start != last_end {
            break;
        }
        p.bump();
        let next = p.token().clone();
        match &next.tok {
            Tok::Ident(w) if next.start == dash.end => {
                name.push('-');
                name.push_str(w);
                last_end = next.end;
                p.bump();
            }
            _ => return Err(p.error("malformed theory name")),
        }
    }
    Ok(name)
}

fn rule_target(p: &mut Parser<'_>) -> Result<RuleTarget, ParseError> {
    match p.peek().clone() {
        Tok::Ident(w) if w == "true" || w == "false" => {
            p.bump();
            Ok(RuleTarget::Bool(w == "true"))
        }
        Tok::Ident(_) => Ok(RuleTarget::Var(p.name()?)),
        _ => Ok(RuleTarget::Int(p.int()?)),
    }
}

fn grammar_op(p: &mut Parser<'_>) -> Result<GrammarOp, ParseError> {
    let text = match p.peek().clone() {
        Tok::Sym("[") => {
            p.bump();
            p.expect_sym("]")?;
            "[]".to_string()
        }
        Tok::Sym(s) => {
            p.bump();
            s.to_string()
        }
        Tok::Ident(w) => {
            p.bump();
            w
        }
        t => return Err(p.error(format!("expected a grammar operator, found {t}"))),
    };
    GrammarOp::parse(&text).ok_or_else(|| p.error(format!("unknown grammar operator `{text}`")))
}

fn grammar_block(p: &mut Parser<'_>, g: &mut GrammarSpec) -> Result<(), ParseError> {
    p.expect_sym("{")?;
    while !p.eat_sym("}") {
        p.expect_sym("(")?;
        let left = p.name()?;
        p.expect_sym(",")?;
        let right = rule_target(p)?;
        p.expect_sym(",")?;
        let mut ops = Vec::new();
        if p.eat_sym("{") {
            loop {
                ops.push(grammar_op(p)?);
                if !p.eat_sym(",") {
                    break;
                }
            }
            p.expect_sym("}")?;
        } else {
            ops.push(grammar_op(p)?);
        }
        p.expect_sym(")")?;
        p.eat_sym(";");
        if let RuleTarget::Int(c) = right {
            g.literals.insert(c);
        }
        g.rules.push(GrammarRule::new(left, right, &ops));
    }
    Ok(())
}

fn literals_block(p: &mut Parser<'_>, g: &mut GrammarSpec) -> Result<(), ParseError> {
    p.expect_sym("{")?;
    while !p.eat_sym("}") {
        g.literals.insert(p.int()?);
        if !p.eat_sym(",") {
            p.eat_sym(";");
        }
    }
    Ok(())
}

fn options_block(p: &mut Parser<'_>, o: &mut TheoryOptions) -> Result<(), ParseError> {
    p.expect_sym("{")?;
    while !p.eat_sym("}") {
        let key = p.name()?;
        p.expect_sym("=")?;
        match key.as_str() {
            "k" => o.max_ops = nonneg(p)? as usize,
            "n" => o.quantified = nonneg(p)? as usize,
            "bound" => o.bound = Some(u32::try_from(nonneg(p)?).map_err(|_| p.error("bound too large"))?),
            "quantifier" => {
                let w = match p.bump() {
                    Tok::Ident(w) => w,
                    t => return Err(p.error(format!("expected exists, forall or none, found {t}"))),
                };
                o.quantifier = match w.as_str() {
                    "exists" => Some(QuantifierKind::Existential),
                    "forall" => Some(QuantifierKind::Universal),
                    "none" => None,
                    _ => return Err(p.error(format!("unknown quantifier `{w}`"))),
                };
            }
            "fragment_check" => {
                o.fragment_check = match p.bump() {
                    Tok::Ident(w) if w == "true" => true,
                    Tok::Ident(w) if w == "false" => false,
                    t => return Err(p.error(format!("expected true or false, found {t}"))),
                }
            }
            _ => return Err(p.error(format!("unknown option `{key}`"))),
        }
        p.eat_sym(";");
    }
    Ok(())
}

fn nonneg(p: &mut Parser<'_>) -> Result<i64, ParseError> {
    let v = p.int()?;
    if v < 0 {
        return Err(p.error("expected a non-negative number"));
    }
    Ok(v)
}

struct Ctx<'a> {
    types: &'a TypeTheory,
    registry: &'a DerivedRegistry,
}

impl Ctx<'_> {
    fn formula(&self, p: &mut Parser<'_>, extra: &[String]) -> Result<Formula, ParseError> {
        let toks = p.take_until_any(&[";", "where"]);
        let resolver = |n: &str, args: &[String]| {
            self.registry
                .instantiate_checked(n, args, &|a| self.types.sort_of(a))
                .map_err(|e| e.to_string())
        };
        let sorts = |n: &str| {
            if extra.iter().any(|e| e == n) {
                Some(Sort::Int)
            } else {
                self.types.sort_of(n)
            }
        };
        let mut sub = Parser::new(toks).with_resolver(Some(&resolver)).with_sorts(Some(&sorts));
        let f = sub.formula()?;
        if !sub.at_eof() {
            return Err(sub.error(format!("unexpected {} after formula", sub.peek())));
        }
        let unknown = f.free_vars().into_iter().find(|v| sorts(v).is_none());
        if let Some(v) = unknown {
            return Err(p.error(format!("formula mentions undeclared `{v}`")));
        }
        Ok(f)
    }
}

fn vocab_block(p: &mut Parser<'_>, ctx: &Ctx<'_>, out: &mut Vocabulary) -> Result<(), ParseError> {
    p.expect_sym("{")?;
    while !p.eat_sym("}") {
        let f = ctx.formula(p, &[])?;
        p.expect_sym(";")?;
        out.push(f, Provenance::User);
    }
    Ok(())
}

fn equiv_block(p: &mut Parser<'_>, ctx: &Ctx<'_>) -> Result<EquivalenceTheory, ParseError> {
    p.expect_sym("{")?;
    let mut eq = EquivalenceTheory::default();
    while !p.eat_sym("}") {
        if p.eat_word("scalar") {
            eq.scalars.push(ctx.formula(p, &[])?);
        } else if p.eat_word("indexed") {
            let mut indices = Vec::new();
            loop {
                indices.push(p.name()?);
                if !p.eat_sym(",") {
                    break;
                }
            }
            p.expect_sym(":")?;
            let formula = ctx.formula(p, &indices)?;
            p.expect_word("where")?;
            let range = ctx.formula(p, &indices)?;
            eq.indexed.push(IndexedSet { indices, formula, range });
        } else {
            return Err(p.error(format!("expected `scalar` or `indexed`, found {}", p.peek())));
        }
        p.expect_sym(";")?;
    }
    Ok(eq)
}

/// Parse a theory file. Imports and calls are resolved in `registry`.
pub fn parse_theory(src: &str, registry: &DerivedRegistry) -> Result<TheoryFile, TheoryError> {
    let mut p = Parser::new(lex(src)?);
    p.expect_word("theory")?;
    let name = theory_name(&mut p)?;
    p.expect_sym("{")?;
    let mut types = TypeTheory::default();
    let mut grammar = GrammarSpec::default();
    let mut options = TheoryOptions::default();
    let mut clauses = Vocabulary::new();
    let mut equivalence = None;
    // Clauses are resolved after all declarations are known.
    let mut pending: Vec<(String, Vec<String>, usize, usize)> = Vec::new();
    let mut blocks: Vec<(&'static str, usize)> = Vec::new();

    while !p.eat_sym("}") {
        if p.at_eof() {
            return Err(p.error("missing `}` at end of theory").into());
        }
        let phase = if p.eat_word("input") {
            Some(Phase::Input)
        } else if p.eat_word("output") {
            Some(Phase::Output)
        } else if p.eat_word("dummy") {
            Some(Phase::Dummy)
        } else {
            None
        };
        let word = match p.peek() {
            Tok::Ident(w) => w.clone(),
            t => return Err(p.error(format!("expected a declaration or block, found {t}")).into()),
        };
        match word.as_str() {
            "int" | "bool" => {
                let at = (p.token().line, p.token().column);
                let sort = parse_sort(&mut p)?;
                let first = p.name()?;
                if sort == Sort::Bool && p.is_sym("(") && phase.is_none() {
                    p.bump();
                    let mut args = Vec::new();
                    if !p.is_sym(")") {
                        loop {
                            args.push(p.name()?);
                            if !p.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    p.expect_sym(")")?;
                    p.expect_sym(";")?;
                    pending.push((first, args, at.0, at.1));
                    blocks.push(("import", pending.len() - 1));
                    continue;
                }
                let mut names = alloc::vec![first];
                while p.eat_sym(",") {
                    names.push(p.name()?);
                }
                p.expect_sym(";")?;
                let phase = phase.unwrap_or(Phase::Input);
                for n in names {
                    if types.get(&n).is_some() {
                        return Err(p.error(format!("`{n}` is declared twice")).into());
                    }
                    if phase == Phase::Dummy && sort != Sort::Int {
                        return Err(p.error("dummy variables are ints").into());
                    }
                    types.variables.push(VariableDecl::new(n, sort, phase));
                }
            }
            "grammar" if phase.is_none() => {
                p.bump();
                grammar_block(&mut p, &mut grammar)?;
            }
            "literals" if phase.is_none() => {
                p.bump();
                literals_block(&mut p, &mut grammar)?;
            }
            "options" if phase.is_none() => {
                p.bump();
                options_block(&mut p, &mut options)?;
            }
            "vocab" | "equiv" if phase.is_none() => {
                // Skip for now; these need every declaration.
                p.bump();
                let start = p.position();
                skip_block(&mut p)?;
                blocks.push((if word == "vocab" { "vocab" } else { "equiv" }, start));
            }
            _ => return Err(p.error(format!("unexpected `{word}`")).into()),
        }
    }
    if !p.at_eof() {
        return Err(p.error("text after the end of the theory").into());
    }

    let ctx = Ctx { types: &types, registry };
    for (kind, at) in blocks {
        match kind {
            "import" => {
                let (fname, args, line, column) = &pending[at];
                let f = registry.instantiate_checked(fname, args, &|a| types.sort_of(a)).map_err(
                    |e| match e {
                        RegistryError::Unknown(n) => TheoryError::Parse(ParseError {
                            line: *line,
                            column: *column,
                            message: format!("unknown theory name `{n}`"),
                        }),
                        e => TheoryError::Registry(e),
                    },
                )?;
                clauses.push(f, Provenance::Derived(fname.clone()));
            }
            "vocab" => {
                p.seek(at);
                vocab_block(&mut p, &ctx, &mut clauses)?;
            }
            _ => {
                p.seek(at);
                let e = equiv_block(&mut p, &ctx)?;
                match &mut equivalence {
                    None => equivalence = Some(e),
                    Some(prev) => {
                        let prev: &mut EquivalenceTheory = prev;
                        prev.scalars.extend(e.scalars);
                        prev.indexed.extend(e.indexed);
                    }
                }
            }
        }
    }
    Ok(TheoryFile { name, types, grammar, options, clauses, equivalence })
}

fn skip_block(p: &mut Parser<'_>) -> Result<(), ParseError> {
    p.expect_sym("{")?;
    let mut depth = 1;
    while depth > 0 {
        if p.at_eof() {
            return Err(p.error("unterminated block"));
        }
        if p.is_sym("{") {
            depth += 1;
        } else if p.is_sym("}") {
            depth -= 1;
        }
        p.bump();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const EINA: &str = "
        theory eina {
            int [] a;
            int left, right, e;
            grammar {
                (a, left, bound);
                (a, right, bound);
                (a, e, =);
            }
            options { k = 1; n = 1; quantifier = exists; bound = 4; }
        }
    ";

    #[test]
    fn parses_declarations_and_grammar() {
        let t = parse_theory(EINA, &DerivedRegistry::new()).unwrap();
        assert_eq!(t.name, "eina");
        assert_eq!(t.types.variables.len(), 4);
        assert_eq!(t.grammar.rules.len(), 3);
        assert_eq!(t.options.bound, Some(4));
        let (types, vocab) = t.vocabulary().unwrap();
        assert_eq!(types.dummies(), vec!["i".to_string()]);
        assert_eq!(vocab.len(), 13);
    }

    #[test]
    fn dashed_names_and_imports() {
        let mut reg = DerivedRegistry::new();
        reg.parse_library(
            "def eina(int[] a, int left, int right, int e) := exists i. left <= i and i <= right and a[i] = e;",
        )
        .unwrap();
        let src = "
            theory ls-post {
                int [] a; int left, right, e;
                output int rv;
                bool eina(a, left, right, e);
                vocab { rv = -1; rv != -1 => a[rv] = e; }
            }";
        let t = parse_theory(src, &reg).unwrap();
        assert_eq!(t.name, "ls-post");
        assert_eq!(t.types.get("rv").unwrap().phase, Phase::Output);
        let shown: Vec<String> = t.clauses.clauses.iter().map(|c| c.formula.to_string()).collect();
        assert_eq!(shown, ["eina(a, left, right, e)", "rv = -1", "rv != -1 => a[rv] = e"]);
        assert_eq!(t.clauses.clauses[0].provenance, Provenance::Derived("eina".into()));
    }

    #[test]
    fn unknown_import_is_reported() {
        let src = "theory t { int x; bool foo(x); }";
        let e = parse_theory(src, &DerivedRegistry::new()).unwrap_err();
        assert!(e.to_string().contains("unknown theory name `foo`"), "{e}");
    }

    #[test]
    fn errors_have_positions() {
        let src = "theory t {\n  int x;\n  grammar { (x, y, <=) }\n}";
        let t = parse_theory(src, &DerivedRegistry::new()).unwrap();
        assert!(matches!(t.vocabulary(), Err(TheoryError::Grammar(_))));
        let e = parse_theory("theory t {\n int x\n}", &DerivedRegistry::new()).unwrap_err();
        match e {
            TheoryError::Parse(pe) => assert_eq!(pe.line, 3),
            e => panic!("{e:?}"),
        }
        let e = parse_theory("theory t { int x; vocab { y <= 1; } }", &DerivedRegistry::new())
            .unwrap_err();
        assert!(e.to_string().contains("`y`"), "{e}");
    }

    #[test]
    fn equivalence_blocks() {
        let src = "
            theory search {
                int [] a; int l, r, e;
                equiv {
                    scalar l = r;
                    scalar l < r;
                    indexed c: l = c where 0 <= c and c < a.size;
                    indexed i: a[i] = e where 0 <= i and i < a.size;
                }
            }";
        let t = parse_theory(src, &DerivedRegistry::new()).unwrap();
        let eq = t.equivalence.unwrap();
        assert_eq!(eq.scalars.len(), 2);
        assert_eq!(eq.indexed.len(), 2);
        assert_eq!(eq.indexed[0].indices, vec!["c".to_string()]);
        assert_eq!(eq.indexed[1].range.to_string(), "0 <= i and i < a.size");
    }
}
