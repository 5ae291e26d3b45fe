//! Lexer and recursive-descent parser for the surface syntax.
//!
//! ```text
//! formula := quant | iff
//! quant   := ("exists" | "forall") binder ("," binder)* "." formula
//! iff     := implies ("<=>" implies)*
//! implies := or ("=>" implies)?
//! or      := and (("or" | "||") and)*
//! and     := unary (("and" | "&&") unary)*
//! unary   := ("not" | "!") unary | atom
//! atom    := "true" | "false" | "(" formula ")" | name "(" names ")"
//!          | term (rel term)+ | boolvar
//! term    := prod (("+" | "-") prod)*
//! prod    := neg ("*" neg)*
//! neg     := "-" neg | name "[" term "]" | name ".size" | "|" name "|"
//!          | name | int | "(" term ")"
//! ```

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{Binder, Formula, Quantifier, Sort, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Int(i64),
    Ident(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(v) => write!(f, "`{v}`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
    /// Byte offsets in the source.
    pub start: usize,
    pub end: usize,
}

// Longest first so that `<=>` wins over `<=`.
const SYMBOLS: &[&str] = &[
    "<=>", "=>", "<=", ">=", "!=", "==", "&&", "||", "<", ">", "=", "!", "(", ")", "[", "]", "{",
    "}", ",", ";", ":", ".", "+", "-", "*", "|",
];

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut pos, mut line, mut line_start) = (0usize, 1usize, 0usize);
    while pos < bytes.len() {
        let c = bytes[pos];
        let column = pos - line_start + 1;
        if c == b'\n' {
            pos += 1;
            line += 1;
            line_start = pos;
            continue;
        }
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        if c == b'/' && bytes.get(pos + 1) == Some(&b'/') || c == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        let tok = if c.is_ascii_digit() {
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            let text = &src[start..pos];
            let v = text.parse::<i64>().map_err(|_| ParseError {
                line,
                column,
                message: format!("integer literal `{text}` out of range"),
            })?;
            Tok::Int(v)
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            Tok::Ident(src[start..pos].to_string())
        } else if let Some(sym) = SYMBOLS.iter().find(|s| src[pos..].starts_with(**s)) {
            pos += sym.len();
            Tok::Sym(sym)
        } else {
            let ch = src[pos..].chars().next().unwrap_or('?');
            return Err(ParseError { line, column, message: format!("unexpected character `{ch}`") });
        };
        out.push(Token { tok, line, column, start, end: pos });
    }
    let column = pos - line_start + 1;
    out.push(Token { tok: Tok::Eof, line, column, start: pos, end: pos });
    Ok(out)
}

pub(crate) const KEYWORDS: &[&str] =
    &["and", "or", "not", "true", "false", "exists", "forall"];

/// Resolves `name(args)` calls to derived clauses.
pub type Resolver<'r> = &'r dyn Fn(&str, &[String]) -> Result<Formula, String>;

pub(crate) struct Parser<'r> {
    toks: Vec<Token>,
    pos: usize,
    resolver: Option<Resolver<'r>>,
    /// Names known to be boolean; anything else standing alone is an error.
    bools: Option<&'r dyn Fn(&str) -> Option<Sort>>,
}

impl<'r> Parser<'r> {
    pub(crate) fn new(toks: Vec<Token>) -> Self {
        Parser { toks, pos: 0, resolver: None, bools: None }
    }

    pub(crate) fn with_resolver(mut self, r: Option<Resolver<'r>>) -> Self {
        self.resolver = r;
        self
    }

    pub(crate) fn with_sorts(mut self, s: Option<&'r dyn Fn(&str) -> Option<Sort>>) -> Self {
        self.bools = s;
        self
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub(crate) fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub(crate) fn token(&self) -> &Token {
        &self.toks[self.pos]
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> ParseError {
        let t = self.token();
        ParseError { line: t.line, column: t.column, message: message.into() }
    }

    pub(crate) fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub(crate) fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == w)
    }

    pub(crate) fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", self.peek())))
        }
    }

    pub(crate) fn expect_word(&mut self, w: &str) -> Result<(), ParseError> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{w}`, found {}", self.peek())))
        }
    }

    pub(crate) fn name(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            t => Err(self.error(format!("expected a name, found {t}"))),
        }
    }

    pub(crate) fn int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            t => Err(self.error(format!("expected an integer, found {t}"))),
        }
    }

    /// Tokens up to (not including) the next `sym`, followed by an end
    /// marker; the parser moves past `sym`'s position.
    pub(crate) fn take_until_sym(&mut self, sym: &str) -> Vec<Token> {
        self.take_until_any(&[sym])
    }

    /// Like [`Self::take_until_sym`], stopping at any of `stops` (symbols
    /// or words) outside parentheses and brackets.
    pub(crate) fn take_until_any(&mut self, stops: &[&str]) -> Vec<Token> {
        let mut out = Vec::new();
        let mut depth = 0i32;
        loop {
            if self.at_eof() {
                break;
            }
            let stop = depth == 0 && stops.iter().any(|s| self.is_sym(s) || self.is_word(s));
            if stop || (depth == 0 && self.is_sym("}")) {
                break;
            }
            if self.is_sym("(") || self.is_sym("[") {
                depth += 1;
            } else if self.is_sym(")") || self.is_sym("]") {
                depth -= 1;
            }
            out.push(self.token().clone());
            self.bump();
        }
        let mut end = self.token().clone();
        end.tok = Tok::Eof;
        out.push(end);
        out
    }

    pub(crate) fn position(&self) -> usize {
        self.pos
    }

    pub(crate) fn seek(&mut self, pos: usize) {
        self.pos = pos.min(self.toks.len() - 1);
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub(crate) fn formula(&mut self) -> Result<Formula, ParseError> {
        if self.is_word("exists") || self.is_word("forall") {
            let kind = if self.eat_word("exists") {
                Quantifier::Exists
            } else {
                self.bump();
                Quantifier::Forall
            };
            let mut binders = Vec::new();
            loop {
                let name = self.name()?;
                let sort = if self.eat_sym(":") {
                    match self.name()?.as_str() {
                        "int" => Sort::Int,
                        "bool" => Sort::Bool,
                        s => return Err(self.error(format!("binders are int or bool, not `{s}`"))),
                    }
                } else {
                    Sort::Int
                };
                binders.push(Binder { name, sort });
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(".")?;
            let body = self.formula()?;
            return Ok(Formula::Quant { kind, binders, body: Box::new(body) });
        }
        let mut f = self.implies()?;
        while self.eat_sym("<=>") {
            let g = self.implies()?;
            f = Formula::Iff(Box::new(f), Box::new(g));
        }
        Ok(f)
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let f = self.or()?;
        if self.eat_sym("=>") {
            let g = if self.is_word("exists") || self.is_word("forall") {
                self.formula()?
            } else {
                self.implies()?
            };
            return Ok(Formula::Implies(Box::new(f), Box::new(g)));
        }
        Ok(f)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut fs = alloc::vec![self.and()?];
        while self.eat_word("or") || self.eat_sym("||") {
            fs.push(self.and()?);
        }
        Ok(if fs.len() == 1 { fs.pop().unwrap() } else { Formula::Or(fs) })
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut fs = alloc::vec![self.unary()?];
        while self.eat_word("and") || self.eat_sym("&&") {
            fs.push(self.unary()?);
        }
        Ok(if fs.len() == 1 { fs.pop().unwrap() } else { Formula::And(fs) })
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat_word("not") || self.eat_sym("!") {
            let f = self.unary()?;
            return Ok(Formula::Not(Box::new(f)));
        }
        if self.is_word("exists") || self.is_word("forall") {
            return Err(self.error("quantifier needs parentheses here"));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        if self.eat_word("true") {
            return Ok(Formula::True);
        }
        if self.eat_word("false") {
            return Ok(Formula::False);
        }
        if self.is_sym("(") {
            // Either a parenthesized formula or the start of a term.
            let save = self.pos;
            self.bump();
            if let Ok(f) = self.formula() {
                if self.eat_sym(")") && !self.at_term_continuation() {
                    return Ok(f);
                }
            }
            self.pos = save;
            return self.comparison();
        }
        if let (Tok::Ident(name), Tok::Sym("(")) = (self.peek().clone(), self.peek_at(1).clone()) {
            if !KEYWORDS.contains(&name.as_str()) {
                return self.call(name);
            }
        }
        self.comparison()
    }

    fn at_term_continuation(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Sym("+" | "-" | "*" | "<=" | "<" | ">=" | ">" | "=" | "==" | "!=")
        )
    }

    fn call(&mut self, name: String) -> Result<Formula, ParseError> {
        let at = self.token().clone();
        self.bump();
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if !self.is_sym(")") {
            loop {
                args.push(self.name()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        let Some(resolver) = self.resolver else {
            return Err(ParseError {
                line: at.line,
                column: at.column,
                message: format!("unknown derived clause `{name}`"),
            });
        };
        resolver(&name, &args).map_err(|message| ParseError {
            line: at.line,
            column: at.column,
            message,
        })
    }

    fn comparison(&mut self) -> Result<Formula, ParseError> {
        let first_tok = self.token().clone();
        let first = self.term()?;
        let mut parts = Vec::new();
        let mut left = first.clone();
        loop {
            let op = match self.peek() {
                Tok::Sym(s @ ("<=" | "<" | ">=" | ">" | "=" | "==" | "!=")) => *s,
                _ => break,
            };
            self.bump();
            let right = self.term()?;
            parts.push(match op {
                "<=" => Formula::Le(left.clone(), right.clone()),
                "<" => Formula::Lt(left.clone(), right.clone()),
                ">=" => Formula::Le(right.clone(), left.clone()),
                ">" => Formula::Lt(right.clone(), left.clone()),
                "!=" => Formula::Not(Box::new(Formula::eq(left.clone(), right.clone()))),
                _ => Formula::eq(left.clone(), right.clone()),
            });
            left = right;
        }
        match (parts.len(), first) {
            (0, Term::Var(name)) => {
                if let Some(sorts) = self.bools {
                    match sorts(&name) {
                        Some(Sort::Bool) => {}
                        Some(s) => {
                            return Err(ParseError {
                                line: first_tok.line,
                                column: first_tok.column,
                                message: format!("`{name}` has sort {s:?}, not a formula"),
                            })
                        }
                        None => {
                            return Err(ParseError {
                                line: first_tok.line,
                                column: first_tok.column,
                                message: format!("unknown variable `{name}`"),
                            })
                        }
                    }
                }
                Ok(Formula::Var(name))
            }
            (0, _) => Err(self.error(format!("expected a comparison, found {}", self.peek()))),
            (1, _) => Ok(parts.pop().unwrap()),
            _ => Ok(Formula::And(parts)),
        }
    }

    pub(crate) fn term(&mut self) -> Result<Term, ParseError> {
        let mut t = self.product()?;
        loop {
            if self.eat_sym("+") {
                t = Term::add(t, self.product()?);
            } else if self.eat_sym("-") {
                t = Term::sub(t, self.product()?);
            } else {
                return Ok(t);
            }
        }
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        let mut t = self.negation()?;
        while self.is_sym("*") {
            self.bump();
            let r = self.negation()?;
            t = match (t, r) {
                (Term::Int(k), r) => Term::scale(k, r),
                (l, Term::Int(k)) => Term::scale(k, l),
                _ => return Err(self.error("only multiplication by a literal is linear")),
            };
        }
        Ok(t)
    }

    fn negation(&mut self) -> Result<Term, ParseError> {
        if self.eat_sym("-") {
            return Ok(match self.negation()? {
                Term::Int(v) => Term::Int(v.wrapping_neg()),
                t => Term::scale(-1, t),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Term::Int(v))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Sym("|") => {
                self.bump();
                let a = self.name()?;
                self.expect_sym("|")?;
                Ok(Term::Len(a))
            }
            Tok::Ident(_) => {
                let name = self.name()?;
                if self.eat_sym("[") {
                    let i = self.term()?;
                    self.expect_sym("]")?;
                    return Ok(Term::read(name, i));
                }
                if self.is_sym(".") && matches!(self.peek_at(1), Tok::Ident(s) if s == "size" || s == "length")
                {
                    self.bump();
                    self.bump();
                    return Ok(Term::Len(name));
                }
                Ok(Term::Var(name))
            }
            t => Err(self.error(format!("expected a term, found {t}"))),
        }
    }
}

/// Parse a formula. Calls `name(args)` are resolved through `resolver`;
/// without one they are errors.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    parse_formula_with(src, None, None)
}

/// Parse with a derived-clause resolver and a sort lookup used to reject
/// non-boolean names standing alone as formulas.
pub fn parse_formula_with(
    src: &str,
    resolver: Option<Resolver<'_>>,
    sorts: Option<&dyn Fn(&str) -> Option<Sort>>,
) -> Result<Formula, ParseError> {
    let mut p = Parser::new(lex(src)?).with_resolver(resolver).with_sorts(sorts);
    let f = p.formula()?;
    if !p.at_eof() {
        return Err(p.error(format!("unexpected {} after formula", p.peek())));
    }
    Ok(f)
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(lex(src)?);
    let t = p.term()?;
    if !p.at_eof() {
        return Err(p.error(format!("unexpected {} after term", p.peek())));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn parses_figure_style_formulas() {
        let f = parse_formula("exists i. left <= i and i <= right and a[i] = e").unwrap();
        assert_eq!(f.to_string(), "exists i. left <= i and i <= right and a[i] = e");
        let g = parse_formula("0 <= left and right <= a.size - 1").unwrap();
        assert_eq!(
            g,
            Formula::And(vec![
                Formula::le(Term::Int(0), Term::var("left")),
                Formula::le(Term::var("right"), Term::last_index("a")),
            ])
        );
        assert_eq!(parse_formula("l >= 0").unwrap(), Formula::le(Term::Int(0), Term::var("l")));
        assert_eq!(
            parse_formula("rv != -1").unwrap(),
            Formula::not(Formula::eq(Term::var("rv"), Term::Int(-1)))
        );
    }

    #[test]
    fn parentheses_are_formula_or_term() {
        let f = parse_formula("(x + 1) <= y").unwrap();
        assert_eq!(f, Formula::le(Term::add(Term::var("x"), Term::Int(1)), Term::var("y")));
        let g = parse_formula("(p or q) and r").unwrap();
        assert_eq!(
            g,
            Formula::And(vec![
                Formula::Or(vec![Formula::var("p"), Formula::var("q")]),
                Formula::var("r")
            ])
        );
        let h = parse_formula("(x) = 2").unwrap();
        assert_eq!(h, Formula::eq(Term::var("x"), Term::Int(2)));
    }

    #[test]
    fn chains_split_into_conjunctions() {
        let f = parse_formula("0 <= l <= r").unwrap();
        assert_eq!(
            f,
            Formula::And(vec![
                Formula::le(Term::Int(0), Term::var("l")),
                Formula::le(Term::var("l"), Term::var("r")),
            ])
        );
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_formula("x <= \n  y +").unwrap_err();
        assert_eq!((e.line, e.column), (2, 6));
        let e = parse_formula("x * y <= 1").unwrap_err();
        assert!(e.message.contains("linear"));
        let e = parse_formula("eina(a, l)").unwrap_err();
        assert!(e.message.contains("eina"));
    }

    #[test]
    fn derived_calls_resolve() {
        let r = |name: &str, args: &[String]| -> Result<Formula, String> {
            if name == "pos" && args.len() == 1 {
                Ok(Formula::Derived(crate::formula::DerivedCall {
                    name: name.into(),
                    args: args.to_vec(),
                    body: Box::new(Formula::lt(Term::Int(0), Term::var(args[0].clone()))),
                }))
            } else {
                Err(format!("unknown derived clause `{name}`"))
            }
        };
        let f = parse_formula_with("!pos(x) and y = 1", Some(&r), None).unwrap();
        assert_eq!(f.to_string(), "!pos(x) and y = 1");
    }

    #[test]
    fn sorts_reject_bare_ints() {
        let s = |n: &str| match n {
            "p" => Some(Sort::Bool),
            "x" => Some(Sort::Int),
            _ => None,
        };
        assert!(parse_formula_with("p", None, Some(&s)).is_ok());
        assert!(parse_formula_with("x", None, Some(&s)).is_err());
        assert!(parse_formula_with("q", None, Some(&s)).is_err());
    }
}
