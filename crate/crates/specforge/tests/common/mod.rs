#![allow(dead_code)]

use std::path::PathBuf;

use specforge::bridge::ProcessSolver;
use specforge::script::OracleScript;
use specforge::session::{Reply, Session, SessionMode, SessionRequest, Status};
use specforge_core::formula::parse::parse_formula_with;
use specforge_core::synthesis::{DerivedRegistry, Oracle, SpecOracle};
use specforge_core::{Behavior, Formula, Phase, Sort, Value, VariableDecl};

pub fn path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn solver() -> ProcessSolver {
    ProcessSolver::from_env().expect("z3 on PATH or SPECFORGE_SOLVER")
}

pub fn library() -> DerivedRegistry {
    let mut r = DerivedRegistry::new();
    r.parse_library(&read("theories/library.lib")).unwrap();
    r
}

/// Parse with the library's derived clauses in scope.
pub fn formula(src: &str) -> Formula {
    let reg = library();
    let resolver = |n: &str, args: &[String]| reg.instantiate(n, args).map_err(|e| e.to_string());
    parse_formula_with(src, Some(&resolver), None).unwrap_or_else(|e| panic!("{src}: {e}"))
}

pub fn request(theory: &str) -> SessionRequest {
    let mut r = SessionRequest::new(read(&format!("theories/{theory}")));
    r.library = Some(read("theories/library.lib"));
    r
}

pub fn script(oracle: &str, bound: Option<u32>) -> OracleScript {
    OracleScript::parse(&read(&format!("oracles/{oracle}")), &library()).unwrap().with_bound(bound)
}

/// What the script says about a session's pending query.
pub fn reply(script: &mut OracleScript, mode: SessionMode, b: &Behavior) -> Reply {
    if mode == SessionMode::ConstructSpec {
        Reply::from(SpecOracle::classify(script, b).unwrap())
    } else {
        Reply::from(Oracle::classify(script, b).unwrap().membership)
    }
}

/// Answer every query from an oracle script and return the finished session.
pub fn run_scripted(request: SessionRequest, oracle: &str) -> Session {
    let mut s = solver();
    let mut session = Session::create(request, &mut s).unwrap();
    let mut script = script(oracle, session.bound());
    while session.status() == Status::AwaitingAnswer {
        let r = reply(&mut script, session.mode(), session.pending().unwrap());
        session.answer(r, None, None, &mut s).unwrap();
    }
    assert_eq!(session.status(), Status::Done, "{:?}", session.message());
    session
}

pub fn result_formula(session: &Session) -> Formula {
    formula(session.result().unwrap().formula.as_deref().unwrap())
}

/// Declarations without the quantified dummies.
pub fn visible(decls: &[VariableDecl]) -> Vec<VariableDecl> {
    decls.iter().filter(|d| d.phase != Phase::Dummy).cloned().collect()
}

/// Every behavior with integers in [-3, 3], booleans both ways and
/// arrays of length `len` with elements in [0, 3].
pub fn all_behaviors(decls: &[VariableDecl], len: usize) -> Vec<Behavior> {
    let mut out = vec![Behavior::new()];
    for d in visible(decls) {
        let values: Vec<Value> = match d.sort {
            Sort::Int => (-3..=3).map(Value::Int).collect(),
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Sort::ArrayOfInt => {
                let mut arrays = vec![Vec::new()];
                for _ in 0..len {
                    arrays = arrays
                        .into_iter()
                        .flat_map(|a: Vec<i64>| (0..=3).map(move |x| [a.clone(), vec![x]].concat()))
                        .collect();
                }
                arrays.into_iter().map(Value::Array).collect()
            }
        };
        out = out
            .into_iter()
            .flat_map(|b| values.iter().map(|v| b.clone().with(d.name.clone(), v.clone())).collect::<Vec<_>>())
            .collect();
    }
    out
}
