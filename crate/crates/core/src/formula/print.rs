//! Surface syntax printer. The output parses back with
//! [`super::parse_formula`].

use core::fmt::{self, Display, Formatter};

use super::{Formula, Quantifier, Sort, Term};

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Add(..) | Term::Sub(..) => 1,
        Term::Scale(..) => 2,
        Term::Int(v) if *v < 0 => 2,
        _ => 3,
    }
}

fn write_term(t: &Term, f: &mut Formatter<'_>, min: u8) -> fmt::Result {
    let paren = term_prec(t) < min;
    if paren {
        f.write_str("(")?;
    }
    match t {
        Term::Int(v) => write!(f, "{v}")?,
        Term::Var(x) => f.write_str(x)?,
        Term::Len(a) => write!(f, "{a}.size")?,
        Term::Read(a, i) => {
            write!(f, "{a}[")?;
            write_term(i, f, 0)?;
            f.write_str("]")?;
        }
        Term::Add(a, b) => {
            write_term(a, f, 1)?;
            f.write_str(" + ")?;
            write_term(b, f, 2)?;
        }
        Term::Sub(a, b) => {
            write_term(a, f, 1)?;
            f.write_str(" - ")?;
            write_term(b, f, 2)?;
        }
        Term::Scale(k, t) => {
            write!(f, "{k} * ")?;
            write_term(t, f, 3)?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_term(self, f, 0)
    }
}

// Precedence, loosest first: quantifier, <=>, =>, or, and, not, atom.
fn prec(x: &Formula) -> u8 {
    match x {
        Formula::Quant { .. } => 0,
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(fs) if fs.len() > 1 => 3,
        Formula::And(fs) if fs.len() > 1 => 4,
        Formula::Not(_) => 5,
        _ => 6,
    }
}

fn write_formula(x: &Formula, f: &mut Formatter<'_>, min: u8) -> fmt::Result {
    let paren = prec(x) < min;
    if paren {
        f.write_str("(")?;
    }
    match x {
        Formula::True => f.write_str("true")?,
        Formula::False => f.write_str("false")?,
        Formula::Var(v) => f.write_str(v)?,
        Formula::Eq(a, b) => write!(f, "{a} = {b}")?,
        Formula::Le(a, b) => write!(f, "{a} <= {b}")?,
        Formula::Lt(a, b) => write!(f, "{a} < {b}")?,
        Formula::Not(inner) => match &**inner {
            Formula::Eq(a, b) => write!(f, "{a} != {b}")?,
            Formula::Derived(d) => write!(f, "!{}({})", d.name, d.args.join(", "))?,
            inner @ (Formula::Le(..) | Formula::Lt(..)) => write!(f, "not ({inner})")?,
            inner => {
                f.write_str("not ")?;
                write_formula(inner, f, 6)?;
            }
        },
        Formula::And(fs) | Formula::Or(fs) => {
            if fs.is_empty() {
                f.write_str(if matches!(x, Formula::And(_)) { "true" } else { "false" })?;
            } else {
                let (sep, p) = if matches!(x, Formula::And(_)) { (" and ", 5) } else { (" or ", 4) };
                for (k, g) in fs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(sep)?;
                    }
                    write_formula(g, f, p)?;
                }
            }
        }
        Formula::Implies(a, b) => {
            write_formula(a, f, 3)?;
            f.write_str(" => ")?;
            write_formula(b, f, 2)?;
        }
        Formula::Iff(a, b) => {
            write_formula(a, f, 2)?;
            f.write_str(" <=> ")?;
            write_formula(b, f, 2)?;
        }
        Formula::Quant { kind, binders, body } => {
            f.write_str(match kind {
                Quantifier::Exists => "exists ",
                Quantifier::Forall => "forall ",
            })?;
            for (k, b) in binders.iter().enumerate() {
                if k > 0 {
                    f.write_str(", ")?;
                }
                f.write_str(&b.name)?;
                if b.sort == Sort::Bool {
                    f.write_str(": bool")?;
                }
            }
            f.write_str(". ")?;
            write_formula(body, f, 0)?;
        }
        Formula::Derived(d) => write!(f, "{}({})", d.name, d.args.join(", "))?,
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl Display for Formula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_formula(self, f, 0)
    }
}
