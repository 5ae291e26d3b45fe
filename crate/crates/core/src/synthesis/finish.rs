//! Turning a finished construction into its final formula.

use alloc::vec::Vec;

use crate::cube::Cube;
use crate::formula::{Binder, Formula, Quantifier, Sort, VariableDecl};
use crate::minimizer::{cover_to_formula, minimize, CubeCover};

use super::construct::{cube_formula, Mode, SynthesisResult};

/// The result as an on-set and a don't-care set. The on-set holds the
/// accepted valuations, or in universal mode the rejected ones;
/// valuations without behaviors are don't-cares.
pub fn dnf_of_result(r: &SynthesisResult) -> (CubeCover, CubeCover) {
    let n = r.vocabulary.len();
    let on = match r.mode {
        Mode::Existential => r.accepted.iter().map(|&v| Cube::point(n, v)).collect(),
        Mode::Universal => r.rejected.clone(),
    };
    (CubeCover::new(n, on), CubeCover::new(n, r.unsat.clone()))
}

/// The formula a cover stands for under the result's mode.
pub fn formula_of_cover(cover: &CubeCover, vocabulary: &[Formula], mode: Mode) -> Formula {
    match mode {
        Mode::Existential => cover_to_formula(cover, vocabulary),
        Mode::Universal => {
            Formula::and(cover.cubes.iter().map(|c| Formula::not(cube_formula(vocabulary, c))).collect())
        }
    }
}

/// The minimized, still unquantified formula.
pub fn minimized_formula(r: &SynthesisResult) -> Formula {
    let (on, dc) = dnf_of_result(r);
    formula_of_cover(&minimize(&on, &dc), &r.vocabulary, r.mode)
}

fn binders(dummies: &[VariableDecl]) -> Vec<Binder> {
    dummies
        .iter()
        .map(|d| match d.sort {
            Sort::Bool => Binder::bool(d.name.clone()),
            _ => Binder::int(d.name.clone()),
        })
        .collect()
}

/// One `exists` block over the dummies that occur in `f`.
pub fn quantify_existential(f: Formula, dummies: &[VariableDecl]) -> Formula {
    quantify(f, dummies, Quantifier::Exists)
}

pub fn quantify_universal(f: Formula, dummies: &[VariableDecl]) -> Formula {
    quantify(f, dummies, Quantifier::Forall)
}

fn quantify(f: Formula, dummies: &[VariableDecl], kind: Quantifier) -> Formula {
    let free = f.free_vars();
    let used: Vec<VariableDecl> = dummies.iter().filter(|d| free.contains(&d.name)).cloned().collect();
    Formula::quant(kind, binders(&used), f)
}

/// Minimized and closed over the dummies: `exists` for existential
/// runs, `forall` for universal ones.
pub fn final_formula(r: &SynthesisResult) -> Formula {
    let f = minimized_formula(r);
    let dummies = r.dummies();
    match r.mode {
        Mode::Existential => quantify_existential(f, &dummies),
        Mode::Universal => quantify_universal(f, &dummies),
    }
}
