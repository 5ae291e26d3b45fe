//! The solver interface and a brute-force finite-domain implementation.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::formula::{eval, Behavior, Formula, Sort, Value, VariableDecl};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverVerdict {
    /// A model; it may omit variables the solver did not constrain.
    Sat(Behavior),
    /// Labels of an unsatisfiable subset of the labeled assertions.
    Unsat(BTreeSet<String>),
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("solver transport failed: {0}")]
    Transport(String),
    #[error("solver protocol error: {0}")]
    Protocol(String),
    #[error("solver does not support this query: {0}")]
    Unsupported(String),
}

/// An incremental satisfiability checker over the formula language.
///
/// Reads outside `[0, |a|)` must evaluate to 0, and when a bound is given
/// every array has exactly that length. Quantified integer variables range
/// over all integers.
pub trait Solver {
    /// Drop all assertions and declare `decls`.
    fn reset(&mut self, decls: &[VariableDecl], bound: Option<u32>) -> Result<(), SolverError>;
    fn push(&mut self) -> Result<(), SolverError>;
    fn pop(&mut self) -> Result<(), SolverError>;
    /// Labeled assertions may appear in unsat cores.
    fn assert(&mut self, f: &Formula, label: Option<&str>) -> Result<(), SolverError>;
    fn check(&mut self) -> Result<SolverVerdict, SolverError>;
}

impl<S: Solver + ?Sized> Solver for &mut S {
    fn reset(&mut self, decls: &[VariableDecl], bound: Option<u32>) -> Result<(), SolverError> {
        (**self).reset(decls, bound)
    }
    fn push(&mut self) -> Result<(), SolverError> {
        (**self).push()
    }
    fn pop(&mut self) -> Result<(), SolverError> {
        (**self).pop()
    }
    fn assert(&mut self, f: &Formula, label: Option<&str>) -> Result<(), SolverError> {
        (**self).assert(f, label)
    }
    fn check(&mut self) -> Result<SolverVerdict, SolverError> {
        (**self).check()
    }
}

/// Check the conjunction of `assertions` in a fresh scope.
pub fn check_assertions<S: Solver + ?Sized>(
    solver: &mut S,
    assertions: &[(Option<String>, Formula)],
) -> Result<SolverVerdict, SolverError> {
    solver.push()?;
    let mut run = || {
        for (label, f) in assertions {
            solver.assert(f, label.as_deref())?;
        }
        solver.check()
    };
    let r = run();
    solver.pop()?;
    r
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid(Behavior),
    Unknown(String),
}

/// Validity of `f` over `decls`: `f` is valid when its negation is
/// unsatisfiable.
pub fn check_validity<S: Solver + ?Sized>(
    solver: &mut S,
    f: &Formula,
    decls: &[VariableDecl],
    bound: Option<u32>,
) -> Result<Validity, SolverError> {
    solver.reset(decls, bound)?;
    let v = check_assertions(solver, &[(None, Formula::not(f.clone()))])?;
    Ok(match v {
        SolverVerdict::Sat(m) => Validity::Invalid(complete_model(&m, decls, bound)),
        SolverVerdict::Unsat(_) => Validity::Valid,
        SolverVerdict::Unknown(r) => Validity::Unknown(r),
    })
}

/// Fill in variables the model left open. Integers default to 0,
/// booleans to false, and arrays are padded or cut to the bound.
pub fn complete_model(partial: &Behavior, decls: &[VariableDecl], bound: Option<u32>) -> Behavior {
    let mut out = Behavior::new();
    for d in decls {
        let v = match (partial.get(&d.name), d.sort) {
            (Some(Value::Array(xs)), Sort::ArrayOfInt) => {
                let mut xs = xs.clone();
                if let Some(b) = bound {
                    xs.resize(b as usize, 0);
                }
                Value::Array(xs)
            }
            (Some(v), s) if v.sort() == s => v.clone(),
            (_, s) => Value::default_for(s, bound),
        };
        out.insert(d.name.clone(), v);
    }
    out
}

/// Exhaustive search over small domains. Integers range over
/// `int_range`, array elements over `elem_range`; arrays take the bound
/// as their length (or lengths `0..=max_len` without one). Quantifiers
/// range over `0..bound`, so this models the bounded semantics; it is a
/// test double for the real solver.
#[derive(Debug, Clone)]
pub struct FiniteDomainSolver {
    pub int_range: (i64, i64),
    pub elem_range: (i64, i64),
    pub max_len: u32,
    decls: Vec<VariableDecl>,
    bound: Option<u32>,
    frames: Vec<Vec<(Option<String>, Formula)>>,
    pub checks: usize,
}

impl FiniteDomainSolver {
    pub fn new(int_range: (i64, i64), elem_range: (i64, i64)) -> Self {
        FiniteDomainSolver {
            int_range,
            elem_range,
            max_len: 3,
            decls: Vec::new(),
            bound: None,
            frames: alloc::vec![Vec::new()],
            checks: 0,
        }
    }

    fn domain(&self, d: &VariableDecl) -> Vec<Value> {
        match d.sort {
            Sort::Bool => alloc::vec![Value::Bool(false), Value::Bool(true)],
            Sort::Int => (self.int_range.0..=self.int_range.1).map(Value::Int).collect(),
            Sort::ArrayOfInt => {
                let lens: Vec<u32> = match self.bound {
                    Some(b) => alloc::vec![b],
                    None => (0..=self.max_len).collect(),
                };
                let mut out = Vec::new();
                for len in lens {
                    let mut cur = alloc::vec![self.elem_range.0; len as usize];
                    loop {
                        out.push(Value::Array(cur.clone()));
                        // odometer increment
                        let mut k = 0;
                        while k < cur.len() && cur[k] == self.elem_range.1 {
                            cur[k] = self.elem_range.0;
                            k += 1;
                        }
                        if k == cur.len() {
                            break;
                        }
                        cur[k] += 1;
                    }
                }
                out
            }
        }
    }

    /// Every behavior over the declared variables.
    pub fn behaviors(&self) -> Vec<Behavior> {
        let mut out = alloc::vec![Behavior::new()];
        for d in &self.decls {
            let dom = self.domain(d);
            let mut next = Vec::with_capacity(out.len() * dom.len());
            for b in &out {
                for v in &dom {
                    next.push(b.clone().with(d.name.clone(), v.clone()));
                }
            }
            out = next;
        }
        out
    }

    fn find(&self, fs: &[&Formula]) -> Result<Option<Behavior>, SolverError> {
        // Quantifiers need a range; without a bound use the largest length.
        let qbound = Some(self.bound.unwrap_or(self.max_len));
        for b in self.behaviors() {
            let mut ok = true;
            for f in fs {
                if !eval(f, &b, qbound).map_err(|e| SolverError::Unsupported(e.to_string()))? {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(Some(b));
            }
        }
        Ok(None)
    }
}

impl Solver for FiniteDomainSolver {
    fn reset(&mut self, decls: &[VariableDecl], bound: Option<u32>) -> Result<(), SolverError> {
        self.decls = decls.to_vec();
        self.bound = bound;
        self.frames = alloc::vec![Vec::new()];
        Ok(())
    }

    fn push(&mut self) -> Result<(), SolverError> {
        self.frames.push(Vec::new());
        Ok(())
    }

    fn pop(&mut self) -> Result<(), SolverError> {
        if self.frames.len() == 1 {
            return Err(SolverError::Protocol("pop without push".into()));
        }
        self.frames.pop();
        Ok(())
    }

    fn assert(&mut self, f: &Formula, label: Option<&str>) -> Result<(), SolverError> {
        self.frames.last_mut().unwrap().push((label.map(String::from), f.clone()));
        Ok(())
    }

    fn check(&mut self) -> Result<SolverVerdict, SolverError> {
        self.checks += 1;
        let all: Vec<&(Option<String>, Formula)> = self.frames.iter().flatten().collect();
        let fs: Vec<&Formula> = all.iter().map(|(_, f)| f).collect();
        if let Some(b) = self.find(&fs)? {
            return Ok(SolverVerdict::Sat(b));
        }
        // Deletion-based core over the labeled assertions.
        let mut keep: Vec<bool> = alloc::vec![true; all.len()];
        for i in 0..all.len() {
            if all[i].0.is_none() {
                continue;
            }
            keep[i] = false;
            let fs: Vec<&Formula> =
                all.iter().zip(&keep).filter(|(_, k)| **k).map(|((_, f), _)| f).collect();
            if self.find(&fs)?.is_some() {
                keep[i] = true;
            }
        }
        let core = all
            .iter()
            .zip(&keep)
            .filter_map(|((l, _), k)| if *k { l.clone() } else { None })
            .collect();
        Ok(SolverVerdict::Unsat(core))
    }
}
