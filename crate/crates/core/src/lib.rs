//! Specification construction from classified behaviors.
//!
//! The crate is `no_std` (it needs `alloc`) and never talks to a solver
//! directly: every algorithm is written against the [`solver::Solver`]
//! trait, so the same code drives an SMT process, a finite-domain model
//! finder, or anything else that can answer satisfiability queries.
//!
//! The pieces, bottom-up:
//!
//! * [`formula`]: sorted terms and formulas, behaviors, evaluation,
//!   SMT-LIB2 emission and the surface syntax.
//! * [`valuation`]: truth assignments over a formula set and the class
//!   formula they induce.
//! * [`cube`]: ternary cubes and the frontier of unprocessed valuations.
//! * [`theory`]: theory files, grammar-driven vocabulary generation and
//!   the array-property fragment check.
//! * [`equivalence`]: equivalence theories, bounded expansion, projection
//!   and threshold search.
//! * [`synthesis`]: formula and specification construction.
//! * [`adequacy`]: vocabulary adequacy checking and correction.
//! * [`minimizer`]: two-level minimization of the synthesized DNF.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adequacy;
pub mod cube;
pub mod equivalence;
pub mod formula;
pub mod minimizer;
pub mod solver;
pub mod synthesis;
pub mod theory;
pub mod valuation;

pub use formula::{eval, Behavior, Formula, Phase, Sort, Term, Value, VariableDecl};
pub use valuation::{Specification, Valuation};
