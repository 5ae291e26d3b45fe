//! One line per acceptance criterion. Runs with scripted oracles and the
//! solver named by `SPECFORGE_SOLVER` (default `z3`).

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use specforge::session::{Session, SessionMode, SessionRequest};
use specforge_core::cube::{mask, Cube};
use specforge_core::equivalence::{compute_threshold, ThresholdEncoding, ThresholdVerdict};
use specforge_core::minimizer::{minimize, CubeCover};
use specforge_core::solver::{check_validity, Validity};
use specforge_core::synthesis::{quantify_existential, quantify_universal, DerivedRegistry};
use specforge_core::theory::parse_theory;
use specforge_core::{eval, Formula, Phase, VariableDecl};

const EINA: &str =
    "exists i. 0 <= left and left <= right and right <= |a| - 1 and left <= i and i <= right and a[i] = e";
const NOT_SORTED: &str =
    "exists i. 0 <= i and i <= |a| - 1 and 0 <= i + 1 and i + 1 <= |a| - 1 and not (a[i] <= a[i + 1])";
const LS_POST: &str = "0 <= left and left <= right and right <= |a| - 1 and \
    (rv = -1 and !eina(a, left, right, e) or rv != -1 and eina(a, left, right, e) and a[rv] = e)";

type Check = Result<String, String>;

fn valid(f: &Formula, g: &Formula, decls: &[VariableDecl], bound: Option<u32>) -> Result<(), String> {
    match check_validity(&mut solver(), &Formula::iff(f.clone(), g.clone()), &visible(decls), bound) {
        Ok(Validity::Valid) => Ok(()),
        Ok(v) => Err(format!("{f} vs {g} at bound {bound:?}: {v:?}")),
        Err(e) => Err(e.to_string()),
    }
}

fn conserved(s: &Session) -> Result<(), String> {
    let st = &s.result().unwrap().statistics;
    let total = st.smt_queries as u128 + st.core_eliminated + st.pa_eliminated;
    if total == 1u128 << st.clauses {
        Ok(())
    } else {
        Err(format!("{total} accounted, 2^{} expected", st.clauses))
    }
}

fn eina() -> Check {
    let t = Instant::now();
    let s = run_scripted(request("eina.thy"), "eina.orc");
    let f = result_formula(&s);
    valid(&f, &formula(EINA), s.decls(), Some(3))?;
    valid(&f, &formula(EINA), s.decls(), None)?;
    conserved(&s)?;
    if t.elapsed() > Duration::from_secs(60) {
        return Err(format!("took {:?}", t.elapsed()));
    }
    Ok(format!("{f}"))
}

fn not_sorted() -> Check {
    let s = run_scripted(request("not-sorted.thy"), "inversion.orc");
    let f = result_formula(&s);
    valid(&f, &formula(NOT_SORTED), s.decls(), None)?;
    let u = run_scripted(request("sorted.thy"), "sorted.orc");
    let g = result_formula(&u);
    if !matches!(&g, Formula::Quant { kind: specforge_core::formula::Quantifier::Forall, .. }) {
        return Err(format!("universal run gave {g}"));
    }
    valid(&g, &Formula::not(formula(NOT_SORTED)), u.decls(), None)?;
    Ok(format!("{f} / {g}"))
}

fn hierarchical() -> Check {
    // Synthesize eina first and use the result as the library for ls-post.
    let e = run_scripted(request("eina.thy"), "eina.orc");
    let body = e.result().unwrap().formula.clone().unwrap();
    let mut r = request("ls-post.thy");
    r.library = Some(format!("def eina(int[] a, int left, int right, int e) := {body};\n"));
    let s = run_scripted(r, "ls-post.orc");
    let text = s.result().unwrap().formula.clone().unwrap();
    if !text.contains("eina(a, left, right, e)") {
        return Err(format!("no eina call in {text}"));
    }
    valid(&result_formula(&s), &formula(LS_POST), s.decls(), None)?;
    Ok(text)
}

fn thresholds() -> Check {
    let mut out = Vec::new();
    for (theory, theta, verdicts) in [
        ("search-equiv.thy", 2, vec![(1, ThresholdVerdict::Invalid), (2, ThresholdVerdict::Valid)]),
        (
            "search-equiv-gap.thy",
            3,
            vec![(1, ThresholdVerdict::Invalid), (2, ThresholdVerdict::Invalid), (3, ThresholdVerdict::Valid)],
        ),
    ] {
        let t = parse_theory(&read(&format!("theories/{theory}")), &DerivedRegistry::new()).unwrap();
        let r = compute_threshold(&t.equivalence.unwrap(), 6, ThresholdEncoding::PerSide, &mut solver())
            .map_err(|e| e.to_string())?;
        if r.theta != theta || r.verdicts != verdicts {
            return Err(format!("{theory}: theta {} {:?}", r.theta, r.verdicts));
        }
        out.push(format!("theta {theta}"));
    }
    Ok(out.join(", "))
}

fn query_counts() -> Check {
    let s = run_scripted(request("eina-user.thy"), "eina-user.orc");
    let st = s.result().unwrap().statistics.clone();
    conserved(&s)?;
    if st.clauses != 3 || st.oracle_queries > 8 || st.smt_queries > 14 {
        return Err(format!("{st:?}"));
    }
    Ok(format!("{} oracle, {} smt", st.oracle_queries, st.smt_queries))
}

/// The oracle as a function of visible variables: its rule closed over
/// the theory's dummies.
fn visible_oracle(oracle: &str, decls: &[VariableDecl], universal: bool) -> Formula {
    let accept = script(oracle, None).accept;
    let dummies: Vec<VariableDecl> = decls.iter().filter(|d| d.phase == Phase::Dummy).cloned().collect();
    if universal {
        quantify_universal(accept, &dummies)
    } else {
        quantify_existential(accept, &dummies)
    }
}

fn brute_force() -> Check {
    let t = Instant::now();
    let mut checked = 0usize;
    for (theory, oracle, universal) in [
        ("eina.thy", "eina.orc", false),
        ("not-sorted.thy", "inversion.orc", false),
        ("sorted.thy", "sorted.orc", true),
        ("eina-user.thy", "eina-user.orc", false),
        ("ls-post.thy", "ls-post.orc", false),
    ] {
        let s = run_scripted(request(theory), oracle);
        let f = result_formula(&s);
        let o = visible_oracle(oracle, s.decls(), universal);
        for len in 0..=3u32 {
            for b in all_behaviors(s.decls(), len as usize) {
                let (x, y) = (eval(&f, &b, Some(len)).unwrap(), eval(&o, &b, Some(len)).unwrap());
                if x != y {
                    return Err(format!("{theory}: formula says {x}, oracle {y} on {b:?}"));
                }
                checked += 1;
            }
        }
    }
    if t.elapsed() > Duration::from_secs(300) {
        return Err(format!("took {:?}", t.elapsed()));
    }
    Ok(format!("{checked} behaviors"))
}

fn make_adequate() -> Check {
    let mut r = request("sort.thy");
    r.options.mode = SessionMode::MakeAdequate;
    let first = run_scripted(r, "sort.orc").result().unwrap().adequacy.clone().unwrap();
    if first.adequate || first.corrections.is_empty() {
        return Err(format!("sort vocabulary reported adequate: {}", first.summary));
    }
    let src = read("theories/sort.thy");
    let start = src.find("vocab {").unwrap();
    let end = start + src[start..].find('}').unwrap() + 1;
    let vocab: String = first.vocabulary.iter().map(|v| format!("        {v};\n")).collect();
    let mut r = SessionRequest::new(format!("{}vocab {{\n{vocab}    }}{}", &src[..start], &src[end..]));
    r.options.mode = SessionMode::MakeAdequate;
    let second = run_scripted(r, "sort.orc").result().unwrap().adequacy.clone().unwrap();
    if !second.adequate {
        return Err(format!("augmented vocabulary still inadequate: {}", second.summary));
    }
    Ok(format!("{} -> {}", first.summary, second.summary))
}

fn table(c: &CubeCover) -> Vec<bool> {
    (0..1u64 << c.n).map(|v| c.cubes.iter().any(|q| v & q.care == q.bits & q.care)).collect()
}

fn minimizer() -> Check {
    let seeds = proptest::collection::vec((proptest::num::u64::ANY, proptest::num::u64::ANY), 0..16);
    let strategy = (1usize..=10, seeds.clone(), proptest::collection::vec((proptest::num::u64::ANY, proptest::num::u64::ANY), 0..4));
    let mut runner = TestRunner::deterministic();
    let mut failures = 0;
    for _ in 0..100 {
        let (n, on, dc) = strategy.new_tree(&mut runner).unwrap().current();
        let cover = |s: &[(u64, u64)]| {
            CubeCover::new(n, s.iter().map(|&(c, b)| Cube::new(c & mask(n), b & c & mask(n))).collect())
        };
        let dc = cover(&dc);
        let on = cover(&on);
        let on = CubeCover::new(n, on.cubes.into_iter().filter(|c| !dc.cubes.iter().any(|d| d.intersects(c))).collect());
        let m = minimize(&on, &dc);
        let (want, got, free) = (table(&on), table(&m), table(&dc));
        if (0..want.len()).any(|v| !free[v] && want[v] != got[v]) {
            failures += 1;
        }
    }
    if failures == 0 {
        Ok("100 covers".into())
    } else {
        Err(format!("{failures} of 100 covers changed"))
    }
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 7] = [
        &["sc", "--theory", "theories/eina.thy", "--oracle", "script:oracles/eina.orc"],
        &["sc", "--theory", "theories/not-sorted.thy", "--oracle", "script:oracles/inversion.orc"],
        &["sc", "--theory", "theories/sorted.thy", "--oracle", "script:oracles/sorted.orc"],
        &["sc", "--theory", "theories/ls-post.thy", "--library", "theories/library.lib", "--oracle", "script:oracles/ls-post.orc"],
        &["sc", "--spec", "--theory", "theories/ls-post.thy", "--library", "theories/library.lib", "--oracle", "script:oracles/ls-spec.orc"],
        &["ma", "--theory", "theories/sort.thy", "--oracle", "script:oracles/sort.orc"],
        &["ma", "--theory", "theories/search-equiv-gap.thy", "--auto-threshold", "5", "--oracle", "script:oracles/search.orc"],
    ];
    for (k, args) in runs.iter().enumerate() {
        let mut outs = Vec::new();
        for run in 0..2 {
            let p = dir.path().join(format!("{k}-{run}.txt"));
            let o = Command::new(env!("CARGO_BIN_EXE_specforge"))
                .args(*args)
                .args(["--out", p.to_str().unwrap()])
                .current_dir(env!("CARGO_MANIFEST_DIR"))
                .output()
                .map_err(|e| e.to_string())?;
            if !o.status.success() {
                return Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)));
            }
            outs.push(std::fs::read(&p).map_err(|e| e.to_string())?);
        }
        if outs[0] != outs[1] || outs[0].is_empty() {
            return Err(format!("{args:?} differs between runs"));
        }
    }
    Ok(format!("{} sessions", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("eina reconstruction", eina),
        ("not-sorted and universal sorted", not_sorted),
        ("hierarchical linear search postcondition", hierarchical),
        ("threshold values", thresholds),
        ("query counts for the user eina vocabulary", query_counts),
        ("brute-force oracle equivalence", brute_force),
        ("make adequate on sorting", make_adequate),
        ("minimizer on random covers", minimizer),
        ("determinism of scripted sessions", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let r = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match r {
            Ok(detail) => println!("PASS {name} ({:.1?}): {detail}", t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({:.1?}): {why}", t.elapsed());
            }
        }
    }
    println!("{} of {} criteria pass", 9 - failed, 9);
    if failed > 0 {
        std::process::exit(1);
    }
}
