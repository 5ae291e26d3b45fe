//! Scripted oracles.
//!
//! ```text
//! // eina: e occurs in a[left..right]
//! vtt 0 <= left and left <= right and right <= a.size - 1
//!     and left <= i and i <= right and a[i] = e;
//! ```
//!
//! A membership script has one `vtt` or `vff` rule. A three-way script has
//! `good` or `bad` and optionally `dontcare`. Rules are formulas over the
//! theory's variables and may mention its quantified dummies, which the
//! construction keeps in every behavior it asks about. Derived clauses
//! from the library can be called by name.

use std::collections::BTreeMap;

use specforge_core::formula::parse::parse_formula_with;
use specforge_core::synthesis::{
    Abort, Answer, Classification, DerivedRegistry, Membership, Oracle, SpecOracle,
};
use specforge_core::{eval, Behavior, Formula};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScriptError {
    #[error("rule {rule}: {message}")]
    Rule { rule: usize, message: String },
    #[error("`{0}` appears twice")]
    Duplicate(String),
    #[error("{0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleScript {
    /// Where the behavior is `vtt` (or good).
    pub accept: Formula,
    pub dont_care: Option<Formula>,
    pub bound: Option<u32>,
}

impl OracleScript {
    pub fn parse(src: &str, registry: &DerivedRegistry) -> Result<Self, ScriptError> {
        let resolver = |n: &str, args: &[String]| registry.instantiate(n, args).map_err(|e| e.to_string());
        let text: String = src
            .lines()
            .map(|l| match l.find("//") {
                Some(k) => &l[..k],
                None => l,
            })
            .collect::<Vec<_>>()
            .join("\n");
        let mut rules: BTreeMap<&str, Formula> = BTreeMap::new();
        for (k, stmt) in text.split(';').map(str::trim).enumerate() {
            if stmt.is_empty() {
                continue;
            }
            let (key, body) = stmt.split_once(char::is_whitespace).unwrap_or((stmt, ""));
            let key = match key {
                "vtt" | "vff" | "good" | "bad" | "dontcare" => key,
                other => {
                    return Err(ScriptError::Rule {
                        rule: k + 1,
                        message: format!("expected vtt, vff, good, bad or dontcare, found `{other}`"),
                    })
                }
            };
            let f = parse_formula_with(body, Some(&resolver), None)
                .map_err(|e| ScriptError::Rule { rule: k + 1, message: e.to_string() })?;
            if rules.insert(key, f).is_some() {
                return Err(ScriptError::Duplicate(key.into()));
            }
        }
        let mut accept = None;
        for (key, negated) in [("vtt", false), ("vff", true), ("good", false), ("bad", true)] {
            if let Some(f) = rules.remove(key) {
                if accept.is_some() {
                    return Err(ScriptError::Shape("give exactly one of vtt, vff, good, bad".into()));
                }
                accept = Some(if negated { Formula::not(f) } else { f });
            }
        }
        let accept = accept.ok_or_else(|| ScriptError::Shape("no vtt, vff, good or bad rule".into()))?;
        Ok(OracleScript { accept, dont_care: rules.remove("dontcare"), bound: None })
    }

    pub fn with_bound(mut self, bound: Option<u32>) -> Self {
        self.bound = bound;
        self
    }

    fn holds(&self, f: &Formula, b: &Behavior) -> Result<bool, Abort> {
        eval(f, b, self.bound).map_err(|e| Abort(format!("oracle script: {e}")))
    }

    fn dont_care(&self, b: &Behavior) -> Result<bool, Abort> {
        match &self.dont_care {
            Some(f) => self.holds(f, b),
            None => Ok(false),
        }
    }
}

impl Oracle for OracleScript {
    fn classify(&mut self, behavior: &Behavior) -> Result<Answer, Abort> {
        let vtt = !self.dont_care(behavior)? && self.holds(&self.accept, behavior)?;
        Ok(Answer::plain(Membership::from_bool(vtt)))
    }
}

impl SpecOracle for OracleScript {
    fn classify(&mut self, behavior: &Behavior) -> Result<Classification, Abort> {
        if self.dont_care(behavior)? {
            return Ok(Classification::DontCare);
        }
        // Input-only behaviors during the precondition phase.
        if self.accept.free_vars().iter().any(|v| behavior.get(v).is_none()) {
            return Ok(Classification::Good);
        }
        Ok(if self.holds(&self.accept, behavior)? { Classification::Good } else { Classification::Bad })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use specforge_core::Value;

    fn beh(x: i64) -> Behavior {
        Behavior::new().with("x", Value::Int(x))
    }

    #[test]
    fn membership_rules() {
        let mut s = OracleScript::parse("// even-ish\nvtt x = 0 or x = 2;\n", &DerivedRegistry::new()).unwrap();
        assert_eq!(Oracle::classify(&mut s, &beh(2)).unwrap().membership, Membership::Vtt);
        assert_eq!(Oracle::classify(&mut s, &beh(1)).unwrap().membership, Membership::Vff);
        let mut n = OracleScript::parse("vff x = 0;", &DerivedRegistry::new()).unwrap();
        assert_eq!(Oracle::classify(&mut n, &beh(0)).unwrap().membership, Membership::Vff);
    }

    #[test]
    fn three_way_rules() {
        let mut s = OracleScript::parse("dontcare x < 0; good x = 1;", &DerivedRegistry::new()).unwrap();
        assert_eq!(SpecOracle::classify(&mut s, &beh(-1)).unwrap(), Classification::DontCare);
        assert_eq!(SpecOracle::classify(&mut s, &beh(1)).unwrap(), Classification::Good);
        assert_eq!(SpecOracle::classify(&mut s, &beh(2)).unwrap(), Classification::Bad);
    }

    #[test]
    fn derived_calls_resolve() {
        let mut reg = DerivedRegistry::new();
        reg.parse_library("def pos(int x) := 0 < x;").unwrap();
        let mut s = OracleScript::parse("vtt !pos(x);", &reg).unwrap();
        assert_eq!(Oracle::classify(&mut s, &beh(0)).unwrap().membership, Membership::Vtt);
    }

    #[test]
    fn malformed_scripts() {
        let reg = DerivedRegistry::new();
        assert!(matches!(OracleScript::parse("maybe x = 0;", &reg), Err(ScriptError::Rule { rule: 1, .. })));
        assert!(matches!(OracleScript::parse("vtt x = 0; vtt x = 1;", &reg), Err(ScriptError::Duplicate(_))));
        assert!(matches!(OracleScript::parse("vtt x = 0; good x = 1;", &reg), Err(ScriptError::Shape(_))));
        assert!(matches!(OracleScript::parse("dontcare x = 0;", &reg), Err(ScriptError::Shape(_))));
        assert!(matches!(OracleScript::parse("vtt x = ;", &reg), Err(ScriptError::Rule { .. })));
    }

    #[test]
    fn missing_variables_abort() {
        let mut s = OracleScript::parse("vtt y = 0;", &DerivedRegistry::new()).unwrap();
        assert!(Oracle::classify(&mut s, &beh(0)).is_err());
    }
}
