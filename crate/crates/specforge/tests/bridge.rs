use proptest::prelude::*;
use specforge::bridge::ProcessSolver;
use specforge::config::Config;
use specforge_core::formula::parse_formula;
use specforge_core::solver::{check_assertions, check_validity, FiniteDomainSolver, Solver, SolverVerdict, Validity};
use specforge_core::{eval, Formula, Sort, Term, VariableDecl};

fn decls() -> Vec<VariableDecl> {
    vec![
        VariableDecl::input("a", Sort::ArrayOfInt),
        VariableDecl::input("x", Sort::Int),
        VariableDecl::input("y", Sort::Int),
        VariableDecl::input("p", Sort::Bool),
    ]
}

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn solver() -> ProcessSolver {
    ProcessSolver::from_env().expect("z3 on PATH or SPECFORGE_SOLVER")
}

#[test]
fn models_satisfy_assertions() {
    let mut s = solver();
    s.reset(&decls(), Some(3)).unwrap();
    let fs = [f("a[x] = 7"), f("x + 1 = y"), f("a[y] < a[x]"), f("p")];
    let v = check_assertions(&mut s, &fs.iter().map(|g| (None, g.clone())).collect::<Vec<_>>()).unwrap();
    let SolverVerdict::Sat(m) = v else { panic!("{v:?}") };
    assert_eq!(m.array("a").unwrap().len(), 3);
    for g in &fs {
        assert!(eval(g, &m, Some(3)).unwrap(), "{g} on {m}");
    }
}

#[test]
fn cores_name_the_conflict() {
    let mut s = solver();
    s.reset(&decls(), Some(3)).unwrap();
    let v = check_assertions(
        &mut s,
        &[
            (Some("c0".into()), f("x < 0")),
            (Some("c1".into()), f("y = 2")),
            (Some("c2".into()), f("0 <= x")),
        ],
    )
    .unwrap();
    let SolverVerdict::Unsat(core) = v else { panic!("{v:?}") };
    assert_eq!(core.into_iter().collect::<Vec<_>>(), vec!["c0".to_string(), "c2".to_string()]);
}

#[test]
fn reads_out_of_range_are_zero() {
    let mut s = solver();
    s.reset(&decls(), Some(2)).unwrap();
    // Index 5 is outside a length-2 array, so the read is 0.
    let v = check_assertions(&mut s, &[(None, f("a[5] = 1"))]).unwrap();
    assert!(matches!(v, SolverVerdict::Unsat(_)));
    assert_eq!(
        check_validity(&mut s, &f("a[x] != 0 => 0 <= x and x <= |a| - 1"), &decls(), Some(2)).unwrap(),
        Validity::Valid
    );
}

#[test]
fn unbounded_lengths_and_quantifiers() {
    let mut s = solver();
    let g = f("(forall i. 0 <= i and i < |a| - 1 => a[i] <= a[i + 1]) and |a| = 4 and a[0] = 5 and a[3] = 2");
    s.reset(&decls(), None).unwrap();
    let v = check_assertions(&mut s, &[(None, g)]).unwrap();
    assert!(matches!(v, SolverVerdict::Unsat(_)), "{v:?}");
    let h = f("exists i. 0 <= i and i <= |a| - 1 and a[i] = 9");
    s.reset(&decls(), None).unwrap();
    let SolverVerdict::Sat(m) = check_assertions(&mut s, &[(None, h.clone())]).unwrap() else { panic!() };
    let n = m.array("a").unwrap().len() as u32;
    assert!(eval(&h, &m, Some(n)).unwrap());
}

#[test]
fn scopes_nest() {
    let mut s = solver();
    s.reset(&decls(), Some(1)).unwrap();
    s.assert(&f("x = 1"), None).unwrap();
    s.push().unwrap();
    s.assert(&f("x = 2"), None).unwrap();
    assert!(matches!(s.check().unwrap(), SolverVerdict::Unsat(_)));
    s.pop().unwrap();
    assert!(matches!(s.check().unwrap(), SolverVerdict::Sat(_)));
    assert!(s.pop().is_err());
}

#[test]
fn missing_solver_is_a_transport_error() {
    let cfg = Config { solver: "/nonexistent/solver".into(), ..Config::default() };
    assert!(matches!(ProcessSolver::new(cfg), Err(specforge_core::solver::SolverError::Transport(_))));
}

#[test]
fn restarts_after_the_process_dies() {
    // A wrapper that lets z3 answer the first few commands only.
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("flaky.py");
    let marker = dir.path().join("died");
    std::fs::write(
        &script,
        format!(
            r#"#!/usr/bin/env python3
import os, subprocess, sys
marker = "{m}"
if os.path.exists(marker):
    os.execvp("z3", ["z3", "-in", "-smt2"])
open(marker, "w").close()
z3 = subprocess.Popen(["z3", "-in", "-smt2"], stdin=subprocess.PIPE, stdout=sys.stdout, text=True)
for n, line in enumerate(sys.stdin):
    if n == 12:
        break
    z3.stdin.write(line)
    z3.stdin.flush()
z3.kill()
"#,
            m = marker.display()
        ),
    )
    .unwrap();
    std::fs::set_permissions(&script, std::os::unix::fs::PermissionsExt::from_mode(0o755)).unwrap();
    let cfg = Config { solver: script, solver_args: vec![], ..Config::default() };
    let mut s = ProcessSolver::new(cfg).unwrap();
    s.reset(&decls(), Some(1)).unwrap();
    s.assert(&f("x = 3"), Some("c0")).unwrap();
    s.push().unwrap();
    s.assert(&f("y = x"), None).unwrap();
    let SolverVerdict::Sat(m) = s.check().unwrap() else { panic!() };
    assert_eq!(m.int("y"), Some(3));
    assert!(marker.exists());
}

fn atom() -> impl Strategy<Value = Formula> {
    let term = prop_oneof![
        Just(Term::var("x")),
        Just(Term::var("y")),
        (-2i64..3).prop_map(Term::Int),
        Just(Term::read("a", Term::var("x"))),
        Just(Term::read("a", Term::add(Term::var("y"), Term::Int(1)))),
        Just(Term::last_index("a")),
    ];
    (term.clone(), term, 0..3).prop_map(|(l, r, k)| match k {
        0 => Formula::eq(l, r),
        1 => Formula::le(l, r),
        _ => Formula::lt(l, r),
    })
}

fn formula() -> impl Strategy<Value = Formula> {
    atom().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            proptest::collection::vec(inner.clone(), 1..3).prop_map(Formula::and),
            proptest::collection::vec(inner, 1..3).prop_map(Formula::or),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn agrees_with_evaluator_and_brute_force(g in formula()) {
        let ds: Vec<VariableDecl> = decls().into_iter().filter(|d| d.sort != Sort::Bool).collect();
        let mut z = solver();
        z.reset(&ds, Some(2)).unwrap();
        let v = check_assertions(&mut z, &[(None, g.clone())]).unwrap();
        let mut fd = FiniteDomainSolver::new((-3, 3), (-2, 2));
        fd.reset(&ds, Some(2)).unwrap();
        let w = check_assertions(&mut fd, &[(None, g.clone())]).unwrap();
        match v {
            SolverVerdict::Sat(m) => prop_assert!(eval(&g, &m, Some(2)).unwrap(), "{} on {}", g, m),
            SolverVerdict::Unsat(_) => prop_assert!(!matches!(w, SolverVerdict::Sat(_)), "{}", g),
            SolverVerdict::Unknown(r) => prop_assert!(false, "unknown: {}", r),
        }
    }
}
