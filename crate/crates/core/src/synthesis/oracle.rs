//! Oracles classify behaviors for the construction loop.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::formula::{eval, Behavior, Formula};

use super::construct::Abort;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Vtt,
    Vff,
}

impl Membership {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Membership::Vtt
        } else {
            Membership::Vff
        }
    }

    pub fn is_vtt(self) -> bool {
        self == Membership::Vtt
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::Vtt => "vtt",
            Membership::Vff => "vff",
        })
    }
}

/// Three-way classification used when building a specification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Good,
    Bad,
    #[serde(rename = "dontcare")]
    DontCare,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Good => "good",
            Classification::Bad => "bad",
            Classification::DontCare => "dontcare",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub membership: Membership,
    /// Variables that alone justify the answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<BTreeSet<String>>,
}

impl Answer {
    pub fn plain(membership: Membership) -> Self {
        Answer { membership, reason: None }
    }

    pub fn because<I, S>(membership: Membership, reason: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Answer { membership, reason: Some(reason.into_iter().map(Into::into).collect()) }
    }
}

pub trait Oracle {
    fn classify(&mut self, behavior: &Behavior) -> Result<Answer, Abort>;
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn classify(&mut self, behavior: &Behavior) -> Result<Answer, Abort> {
        (**self).classify(behavior)
    }
}

pub trait SpecOracle {
    /// During the precondition phase the behavior carries inputs only;
    /// anything but `DontCare` counts as inside the precondition.
    fn classify(&mut self, behavior: &Behavior) -> Result<Classification, Abort>;
}

impl<O: SpecOracle + ?Sized> SpecOracle for &mut O {
    fn classify(&mut self, behavior: &Behavior) -> Result<Classification, Abort> {
        (**self).classify(behavior)
    }
}

/// An oracle from a closure.
pub struct FnOracle<F>(pub F);

impl<F: FnMut(&Behavior) -> Membership> Oracle for FnOracle<F> {
    fn classify(&mut self, behavior: &Behavior) -> Result<Answer, Abort> {
        Ok(Answer::plain((self.0)(behavior)))
    }
}

impl<F: FnMut(&Behavior) -> Classification> SpecOracle for FnOracle<F> {
    fn classify(&mut self, behavior: &Behavior) -> Result<Classification, Abort> {
        Ok((self.0)(behavior))
    }
}

/// `vtt` exactly where a formula holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaOracle {
    pub formula: Formula,
    pub bound: Option<u32>,
}

impl FormulaOracle {
    pub fn new(formula: Formula, bound: Option<u32>) -> Self {
        FormulaOracle { formula, bound }
    }
}

impl Oracle for FormulaOracle {
    fn classify(&mut self, behavior: &Behavior) -> Result<Answer, Abort> {
        eval(&self.formula, behavior, self.bound)
            .map(Membership::from_bool)
            .map(Answer::plain)
            .map_err(|e| Abort(e.to_string()))
    }
}

/// Three-way oracle from formulas: `dontcare` is checked first and may
/// mention inputs only; then `good`; everything else is bad.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaSpecOracle {
    pub dont_care: Formula,
    pub good: Formula,
    pub bound: Option<u32>,
}

impl SpecOracle for FormulaSpecOracle {
    fn classify(&mut self, behavior: &Behavior) -> Result<Classification, Abort> {
        let e = |f: &Formula| eval(f, behavior, self.bound).map_err(|e| Abort(e.to_string()));
        if e(&self.dont_care)? {
            return Ok(Classification::DontCare);
        }
        // Input-only behaviors during the precondition phase.
        if self.good.free_vars().iter().any(|v| behavior.get(v).is_none()) {
            return Ok(Classification::Good);
        }
        Ok(if e(&self.good)? { Classification::Good } else { Classification::Bad })
    }
}
