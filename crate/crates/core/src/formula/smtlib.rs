//! SMT-LIB2 rendering.
//!
//! Arrays are `(Array Int Int)` with a companion integer constant
//! `len_<name>` holding the length.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{Formula, Quantifier, Sort, Term, VariableDecl};

#[derive(Debug, Clone, Copy, Default)]
pub struct SmtWriter {
    /// Render `a[t]` as `(ite (and (<= 0 t) (< t len_a)) (select a t) 0)`
    /// so the solver agrees with evaluation on out-of-range reads.
    pub total_reads: bool,
}

impl SmtWriter {
    pub fn total() -> Self {
        SmtWriter { total_reads: true }
    }

    pub fn formula(&self, f: &Formula) -> String {
        let mut out = String::new();
        self.write_formula(f, &mut out);
        out
    }

    pub fn term(&self, t: &Term) -> String {
        let mut out = String::new();
        self.write_term(t, &mut out);
        out
    }

    fn write_term(&self, t: &Term, out: &mut String) {
        match t {
            Term::Int(v) => write_int(*v, out),
            Term::Var(x) => out.push_str(&symbol(x)),
            Term::Len(a) => out.push_str(&len_symbol(a)),
            Term::Read(a, i) => {
                if self.total_reads {
                    let idx = self.term(i);
                    let _ = write!(
                        out,
                        "(ite (and (<= 0 {idx}) (< {idx} {len})) (select {a} {idx}) 0)",
                        len = len_symbol(a),
                        a = symbol(a)
                    );
                } else {
                    let _ = write!(out, "(select {} ", symbol(a));
                    self.write_term(i, out);
                    out.push(')');
                }
            }
            Term::Add(a, b) => self.binary("+", a, b, out),
            Term::Sub(a, b) => self.binary("-", a, b, out),
            Term::Scale(k, t) => {
                out.push_str("(* ");
                write_int(*k, out);
                out.push(' ');
                self.write_term(t, out);
                out.push(')');
            }
        }
    }

    fn binary(&self, op: &str, a: &Term, b: &Term, out: &mut String) {
        let _ = write!(out, "({op} ");
        self.write_term(a, out);
        out.push(' ');
        self.write_term(b, out);
        out.push(')');
    }

    fn relation(&self, op: &str, a: &Term, b: &Term, out: &mut String) {
        self.binary(op, a, b, out)
    }

    fn write_formula(&self, f: &Formula, out: &mut String) {
        match f {
            Formula::True => out.push_str("true"),
            Formula::False => out.push_str("false"),
            Formula::Var(x) => out.push_str(&symbol(x)),
            Formula::Eq(a, b) => self.relation("=", a, b, out),
            Formula::Le(a, b) => self.relation("<=", a, b, out),
            Formula::Lt(a, b) => self.relation("<", a, b, out),
            Formula::Not(x) => {
                out.push_str("(not ");
                self.write_formula(x, out);
                out.push(')');
            }
            Formula::And(fs) | Formula::Or(fs) => {
                if fs.is_empty() {
                    out.push_str(if matches!(f, Formula::And(_)) { "true" } else { "false" });
                    return;
                }
                out.push_str(if matches!(f, Formula::And(_)) { "(and" } else { "(or" });
                for x in fs {
                    out.push(' ');
                    self.write_formula(x, out);
                }
                out.push(')');
            }
            Formula::Implies(a, b) => {
                out.push_str("(=> ");
                self.write_formula(a, out);
                out.push(' ');
                self.write_formula(b, out);
                out.push(')');
            }
            Formula::Iff(a, b) => {
                out.push_str("(= ");
                self.write_formula(a, out);
                out.push(' ');
                self.write_formula(b, out);
                out.push(')');
            }
            Formula::Quant { kind, binders, body } => {
                out.push_str(match kind {
                    Quantifier::Forall => "(forall (",
                    Quantifier::Exists => "(exists (",
                });
                for (k, b) in binders.iter().enumerate() {
                    if k > 0 {
                        out.push(' ');
                    }
                    let _ = write!(out, "({} {})", symbol(&b.name), sort_name(b.sort));
                }
                out.push_str(") ");
                self.write_formula(body, out);
                out.push(')');
            }
            Formula::Derived(d) => self.write_formula(&d.body, out),
        }
    }
}

pub fn to_smtlib(f: &Formula) -> String {
    SmtWriter::default().formula(f)
}

fn write_int(v: i64, out: &mut String) {
    if v < 0 {
        let _ = write!(out, "(- {})", v.unsigned_abs());
    } else {
        let _ = write!(out, "{v}");
    }
}

pub fn sort_name(s: Sort) -> &'static str {
    match s {
        Sort::Bool => "Bool",
        Sort::Int => "Int",
        Sort::ArrayOfInt => "(Array Int Int)",
    }
}

/// A simple symbol when legal, otherwise a `|quoted|` one.
pub fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c))
        && !is_reserved(name);
    if simple {
        String::from(name)
    } else {
        format!("|{}|", name.replace('|', "_").replace('\\', "_"))
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(
        name,
        "true" | "false" | "and" | "or" | "not" | "ite" | "let" | "forall" | "exists" | "select"
            | "store" | "distinct" | "par" | "as" | "_" | "!"
    )
}

pub fn len_symbol(array: &str) -> String {
    symbol(&format!("len_{array}"))
}

/// Declarations for `decls` plus the length constraints of every array.
/// With a bound every array has exactly that length.
pub fn declarations(decls: &[VariableDecl], bound: Option<u32>) -> Vec<String> {
    let mut out = Vec::new();
    for d in decls {
        out.push(format!("(declare-const {} {})", symbol(&d.name), sort_name(d.sort)));
        if d.sort == Sort::ArrayOfInt {
            let len = len_symbol(&d.name);
            out.push(format!("(declare-const {len} Int)"));
            match bound {
                Some(b) => out.push(format!("(assert (= {len} {b}))")),
                None => out.push(format!("(assert (<= 0 {len}))")),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Binder;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn renders_atoms() {
        let f = Formula::le(Term::var("l"), Term::var("r"));
        assert_eq!(to_smtlib(&f), "(<= l r)");
        let g = Formula::eq(Term::read("a", Term::var("i")), Term::var("e"));
        assert_eq!(to_smtlib(&g), "(= (select a i) e)");
        let n = Formula::eq(Term::var("rv"), Term::Int(-1));
        assert_eq!(to_smtlib(&n), "(= rv (- 1))");
    }

    #[test]
    fn renders_quantifiers_and_lengths() {
        let f = Formula::exists(
            vec![Binder::int("i")],
            Formula::le(Term::var("i"), Term::last_index("a")),
        );
        assert_eq!(to_smtlib(&f), "(exists ((i Int)) (<= i (- len_a 1)))");
    }

    #[test]
    fn total_reads_guard_the_index() {
        let f = Formula::eq(Term::read("a", Term::var("i")), Term::Int(0));
        assert_eq!(
            SmtWriter::total().formula(&f),
            "(= (ite (and (<= 0 i) (< i len_a)) (select a i) 0) 0)"
        );
    }

    #[test]
    fn quotes_odd_symbols() {
        assert_eq!(symbol("x"), "x");
        assert_eq!(symbol("th!b"), "th!b");
        assert_eq!(symbol("and"), "|and|");
        assert_eq!(symbol("a b"), "|a b|");
        assert_eq!(symbol("1x"), "|1x|");
    }

    #[test]
    fn declares_lengths() {
        let d = declarations(&[VariableDecl::input("a", Sort::ArrayOfInt)], Some(3));
        assert_eq!(
            d,
            vec![
                "(declare-const a (Array Int Int))".to_string(),
                "(declare-const len_a Int)".to_string(),
                "(assert (= len_a 3))".to_string()
            ]
        );
    }
}
