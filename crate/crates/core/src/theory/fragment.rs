//! Syntactic check that a vocabulary stays inside the decidable
//! array-property fragment.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::QuantifierKind;
use crate::formula::{Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("clause `{clause}` is outside the array-property fragment: {reason}")]
pub struct FragmentError {
    pub clause: String,
    pub reason: String,
}

fn mentions(t: &Term, names: &[String]) -> bool {
    t.free_vars().iter().any(|v| names.contains(v))
}

fn check_term(t: &Term, dummies: &[String], kind: QuantifierKind) -> Result<(), String> {
    if t.has_nested_read() {
        return Err("nested array read".into());
    }
    if kind == QuantifierKind::Universal {
        let mut bad = None;
        let _ = t.rewrite(&mut |t| {
            if let Term::Read(_, i) = &t {
                if mentions(i, dummies) && !matches!(**i, Term::Var(_)) {
                    bad = Some(format!("universally quantified index `{i}` is not a bare variable"));
                }
            }
            t
        });
        if let Some(b) = bad {
            return Err(b);
        }
    }
    Ok(())
}

fn check_formula(f: &Formula, dummies: &[String], kind: QuantifierKind) -> Result<(), String> {
    let mut err = Ok(());
    f.for_each_term(true, &mut |t| {
        if err.is_ok() {
            err = check_term(t, dummies, kind);
        }
    });
    err?;
    if kind == QuantifierKind::Universal {
        // A dummy outside a read may only occur in a guard: an atom
        // without reads.
        let mut atoms = Vec::new();
        collect_atoms(f, &mut atoms);
        for (a, b) in atoms {
            let reads = a.has_read() || b.has_read();
            let free_dummy = |t: &Term| match t {
                Term::Read(..) => false,
                t => mentions(t, dummies),
            };
            if reads && (free_dummy(a) || free_dummy(b)) {
                return Err("a universally quantified index is used outside a read".into());
            }
        }
    }
    Ok(())
}

fn collect_atoms<'f>(f: &'f Formula, out: &mut Vec<(&'f Term, &'f Term)>) {
    match f {
        Formula::Eq(a, b) | Formula::Le(a, b) | Formula::Lt(a, b) => out.push((a, b)),
        Formula::Not(x) => collect_atoms(x, out),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|x| collect_atoms(x, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
        Formula::Quant { body, .. } => collect_atoms(body, out),
        Formula::Derived(d) => collect_atoms(&d.body, out),
        _ => {}
    }
}

/// Reject clauses that leave the fragment: nested reads always, and for
/// universal quantification any dummy used as an index with arithmetic
/// or compared against array contents.
pub fn check_fragment(
    clauses: &[Formula],
    dummies: &[String],
    kind: QuantifierKind,
) -> Result<(), FragmentError> {
    for c in clauses {
        check_formula(c, dummies, kind)
            .map_err(|reason| FragmentError { clause: format!("{c}"), reason })?;
    }
    Ok(())
}
