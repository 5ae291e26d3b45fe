//! Truth assignments over a vocabulary and the classes they induce.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::formula::{eval, Behavior, EvalError, Formula};

/// A truth value for every formula of a vocabulary, in vocabulary order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Valuation {
    pub domain: Vec<Formula>,
    pub values: Vec<bool>,
}

impl Valuation {
    pub fn new(domain: Vec<Formula>, values: Vec<bool>) -> Self {
        assert_eq!(domain.len(), values.len(), "valuation arity");
        Valuation { domain, values }
    }

    /// Bit `i` of `bits` is the value of `domain[i]`.
    pub fn from_bits(domain: &[Formula], bits: u64) -> Self {
        let values = (0..domain.len()).map(|i| bits >> i & 1 == 1).collect();
        Valuation { domain: domain.to_vec(), values }
    }

    pub fn bits(&self) -> u64 {
        assert!(self.values.len() <= 64, "too many formulas for a bit mask");
        self.values.iter().enumerate().fold(0, |acc, (i, v)| acc | (*v as u64) << i)
    }

    pub fn get(&self, f: &Formula) -> Option<bool> {
        self.domain.iter().position(|g| g == f).map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The valuation a behavior induces.
    pub fn of_behavior(
        domain: &[Formula],
        behavior: &Behavior,
        bound: Option<u32>,
    ) -> Result<Self, EvalError> {
        let values = domain.iter().map(|f| eval(f, behavior, bound)).collect::<Result<_, _>>()?;
        Ok(Valuation { domain: domain.to_vec(), values })
    }

    /// The conjunction of literals describing this class.
    pub fn formula(&self) -> Formula {
        valuation_formula(&self.domain, &self.values)
    }
}

/// `for(V)`: the conjunction of `f` or `not f` for each formula. An empty
/// domain gives `true`.
pub fn valuation_formula(domain: &[Formula], values: &[bool]) -> Formula {
    Formula::and(
        domain
            .iter()
            .zip(values)
            .map(|(f, v)| if *v { f.clone() } else { Formula::not(f.clone()) })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Specification {
    pub pre: Formula,
    pub post: Formula,
}

impl Specification {
    /// A behavior models the specification when it satisfies `pre => post`.
    pub fn models(&self, behavior: &Behavior, bound: Option<u32>) -> Result<bool, EvalError> {
        Ok(!eval(&self.pre, behavior, bound)? || eval(&self.post, behavior, bound)?)
    }
}
