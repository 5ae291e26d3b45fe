//! Equivalence theories: formula sets whose valuations partition
//! behaviors, their expansion at a fixed array length, and the search for
//! a length threshold beyond which nothing new happens.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::formula::{eval, Behavior, Binder, Formula, Sort, Term, Value, VariableDecl};
use crate::solver::{check_validity, Solver, SolverError, Validity};
use crate::valuation::Valuation;

/// `{ formula | range }` over the index variables `indices`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedSet {
    pub indices: Vec<String>,
    pub formula: Formula,
    pub range: Formula,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceTheory {
    pub scalars: Vec<Formula>,
    pub indexed: Vec<IndexedSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Origin {
    Scalar(usize),
    Indexed { set: usize, values: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedEntry {
    pub formula: Formula,
    pub origin: Origin,
}

/// The theory at array length `bound`: scalar entries first, then the
/// indexed instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedTheory {
    pub bound: u32,
    pub entries: Vec<BoundedEntry>,
}

impl BoundedTheory {
    pub fn formulas(&self) -> Vec<Formula> {
        self.entries.iter().map(|e| e.formula.clone()).collect()
    }

    pub fn scalar_part(&self) -> impl Iterator<Item = &BoundedEntry> {
        self.entries.iter().filter(|e| matches!(e.origin, Origin::Scalar(_)))
    }

    pub fn indexed_part(&self) -> impl Iterator<Item = &BoundedEntry> {
        self.entries.iter().filter(|e| matches!(e.origin, Origin::Indexed { .. }))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquivalenceError {
    #[error("range `{range}` does not bound index `{index}`")]
    UnboundedRange { range: String, index: String },
    #[error("range `{0}` is not monotone in the array length")]
    NotMonotone(String),
    #[error("cannot encode `{0}` for the threshold check: reads must use constant indices")]
    Fragment(String),
    #[error("no threshold up to {max}")]
    Exhausted { max: u32, verdicts: Vec<(u32, ThresholdVerdict)> },
    #[error("bound must be at least 1")]
    ZeroBound,
    #[error("valuation does not match the bounded theory")]
    Mismatch,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Replace every array length by `len`.
pub fn with_length(f: &Formula, len: &Term) -> Formula {
    f.map_terms(&mut |t| {
        t.rewrite(&mut |t| match t {
            Term::Len(_) => len.clone(),
            t => t,
        })
    })
}

fn instantiate(f: &Formula, indices: &[String], values: &[i64]) -> Formula {
    let map: BTreeMap<String, Term> =
        indices.iter().cloned().zip(values.iter().map(|v| Term::Int(*v))).collect();
    f.substitute(&map).fold()
}

fn conjuncts(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::And(fs) => fs.iter().for_each(|g| conjuncts(g, out)),
        Formula::True => {}
        f => out.push(f.clone()),
    }
}

/// `v + c` with `v` an index variable, or a constant.
fn affine(t: &Term) -> Option<(Option<&str>, i64)> {
    match t {
        Term::Int(c) => Some((None, *c)),
        Term::Var(v) => Some((Some(v), 0)),
        Term::Add(a, b) => match (&**a, &**b) {
            (Term::Var(v), Term::Int(c)) | (Term::Int(c), Term::Var(v)) => Some((Some(v), *c)),
            _ => None,
        },
        Term::Sub(a, b) => match (&**a, &**b) {
            (Term::Var(v), Term::Int(c)) => Some((Some(v), -c)),
            _ => None,
        },
        _ => None,
    }
}

/// Interval bounds for each index implied by the (ground in everything
/// but the indices) conjunction `range`.
fn index_box(range: &Formula, indices: &[String]) -> Result<Vec<(i64, i64)>, EquivalenceError> {
    let mut atoms = Vec::new();
    conjuncts(range, &mut atoms);
    let n = indices.len();
    let mut lo: Vec<Option<i64>> = alloc::vec![None; n];
    let mut hi: Vec<Option<i64>> = alloc::vec![None; n];
    let pos = |v: &str| indices.iter().position(|x| x == v);
    // x + c <= y + d, as (x, c, y, d, strict)
    let mut edges = Vec::new();
    for a in &atoms {
        let (l, r, strict) = match a {
            Formula::Le(l, r) => (l, r, false),
            Formula::Lt(l, r) => (l, r, true),
            Formula::Eq(l, r) => {
                if let (Some(x), Some(y)) = (affine(l), affine(r)) {
                    edges.push((x.0.and_then(pos), x.1, y.0.and_then(pos), y.1, false));
                    edges.push((y.0.and_then(pos), y.1, x.0.and_then(pos), x.1, false));
                }
                continue;
            }
            _ => continue,
        };
        if let (Some(x), Some(y)) = (affine(l), affine(r)) {
            edges.push((x.0.and_then(pos), x.1, y.0.and_then(pos), y.1, strict));
        }
    }
    for _ in 0..=n + 1 {
        for &(x, c, y, d, strict) in &edges {
            let s = i64::from(strict);
            // x + c <= y + d - s
            match (x, y) {
                (Some(x), None) => {
                    let b = d - s - c;
                    hi[x] = Some(hi[x].map_or(b, |h| h.min(b)));
                }
                (None, Some(y)) => {
                    let b = c + s - d;
                    lo[y] = Some(lo[y].map_or(b, |l| l.max(b)));
                }
                (Some(x), Some(y)) => {
                    if let Some(hy) = hi[y] {
                        let b = hy + d - s - c;
                        hi[x] = Some(hi[x].map_or(b, |h| h.min(b)));
                    }
                    if let Some(lx) = lo[x] {
                        let b = lx + c + s - d;
                        lo[y] = Some(lo[y].map_or(b, |l| l.max(b)));
                    }
                }
                (None, None) => {}
            }
        }
    }
    (0..n)
        .map(|k| match (lo[k], hi[k]) {
            (Some(l), Some(h)) => Ok((l, h)),
            _ => Err(EquivalenceError::UnboundedRange {
                range: range.to_string(),
                index: indices[k].clone(),
            }),
        })
        .collect()
}

/// Index tuples satisfying `range` at length `b`, in lexicographic order.
pub fn range_tuples(set: &IndexedSet, b: u32) -> Result<Vec<Vec<i64>>, EquivalenceError> {
    let range = with_length(&set.range, &Term::Int(b as i64)).fold();
    if range == Formula::False {
        return Ok(Vec::new());
    }
    let bx = index_box(&range, &set.indices)?;
    let mut out = Vec::new();
    if bx.iter().any(|(l, h)| l > h) {
        return Ok(out);
    }
    let mut cur: Vec<i64> = bx.iter().map(|(l, _)| *l).collect();
    loop {
        let beh: Behavior =
            set.indices.iter().cloned().zip(cur.iter().map(|v| Value::Int(*v))).collect();
        if eval(&range, &beh, None).unwrap_or(false) {
            out.push(cur.clone());
        }
        // odometer, last index fastest
        let mut k = cur.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if cur[k] < bx[k].1 {
                cur[k] += 1;
                for j in k + 1..cur.len() {
                    cur[j] = bx[j].0;
                }
                break;
            }
        }
        if cur.is_empty() {
            return Ok(out);
        }
    }
}

/// The theory at length `b`.
pub fn expand_bounded(e: &EquivalenceTheory, b: u32) -> Result<BoundedTheory, EquivalenceError> {
    if b == 0 {
        return Err(EquivalenceError::ZeroBound);
    }
    let len = Term::Int(b as i64);
    let mut entries = Vec::new();
    for (j, g) in e.scalars.iter().enumerate() {
        entries.push(BoundedEntry { formula: with_length(g, &len).fold(), origin: Origin::Scalar(j) });
    }
    for (k, set) in e.indexed.iter().enumerate() {
        let body = with_length(&set.formula, &len);
        for values in range_tuples(set, b)? {
            entries.push(BoundedEntry {
                formula: instantiate(&body, &set.indices, &values),
                origin: Origin::Indexed { set: k, values },
            });
        }
    }
    Ok(BoundedTheory { bound: b, entries })
}

/// Restrict a valuation over `from` to the entries of `to`, matching
/// entries by origin.
pub fn project_valuation(
    v: &Valuation,
    from: &BoundedTheory,
    to: &BoundedTheory,
) -> Result<Valuation, EquivalenceError> {
    if v.len() != from.len() {
        return Err(EquivalenceError::Mismatch);
    }
    let index: BTreeMap<&Origin, usize> =
        from.entries.iter().enumerate().map(|(i, e)| (&e.origin, i)).collect();
    let values = to
        .entries
        .iter()
        .map(|e| index.get(&e.origin).map(|i| v.values[*i]).ok_or(EquivalenceError::Mismatch))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Valuation::new(to.formulas(), values))
}

/// Check that each range keeps its tuples when the length grows:
/// `r(b, i) and b <= b' => r(b', i)` for symbolic `b`, `b'`.
pub fn verify_monotone<S: Solver + ?Sized>(
    e: &EquivalenceTheory,
    solver: &mut S,
) -> Result<(), EquivalenceError> {
    for set in &e.indexed {
        let b = "mono!b";
        let b2 = "mono!b2";
        let lhs = Formula::and(alloc::vec![
            with_length(&set.range, &Term::var(b)),
            Formula::le(Term::var(b), Term::var(b2)),
        ]);
        let f = Formula::implies(lhs, with_length(&set.range, &Term::var(b2)));
        let mut decls: Vec<VariableDecl> =
            set.indices.iter().map(|i| VariableDecl::input(i.clone(), Sort::Int)).collect();
        decls.push(VariableDecl::input(b, Sort::Int));
        decls.push(VariableDecl::input(b2, Sort::Int));
        match check_validity(solver, &f, &decls, None)? {
            Validity::Valid => {}
            _ => return Err(EquivalenceError::NotMonotone(set.range.to_string())),
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdVerdict {
    Valid,
    Invalid,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub theta: u32,
    pub checked_up_to: u32,
    pub verdicts: Vec<(u32, ThresholdVerdict)>,
}

/// How the indexed instances enter the threshold formula.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdEncoding {
    /// Only the scalar selectors are shared between the two sides; the
    /// truth values of indexed instances are chosen inside each side.
    #[default]
    PerSide,
    /// Indexed instances share one selector across both sides as well.
    /// This version is unsatisfiable for the usual search theory because
    /// an index equal to the threshold has no representative.
    SharedIndexed,
}

/// Flatten `a[c]` with constant `c` into the integer variable `a!c`.
fn flatten_reads(f: &Formula, vars: &mut BTreeSet<String>) -> Result<Formula, EquivalenceError> {
    let mut bad = false;
    let g = f.map_terms(&mut |t| {
        t.fold().rewrite(&mut |t| match t {
            Term::Read(a, i) => match *i {
                Term::Int(c) => {
                    let name = format!("{a}!{c}");
                    vars.insert(name.clone());
                    Term::Var(name)
                }
                i => {
                    bad = true;
                    Term::Read(a, Box::new(i))
                }
            },
            t => t,
        })
    });
    if bad {
        return Err(EquivalenceError::Fragment(f.to_string()));
    }
    Ok(g)
}

/// The formula whose validity says that every scalar class realizable at
/// some positive length is realizable at length `theta`, with the
/// indexed instances up to `theta` alongside.
pub fn build_threshold_formula(
    e: &EquivalenceTheory,
    theta: u32,
    encoding: ThresholdEncoding,
) -> Result<Formula, EquivalenceError> {
    let b = Term::var("th!b");
    let theta_t = Term::Int(theta as i64);
    let at_theta = expand_bounded(e, theta)?;
    let indexed: Vec<Formula> = at_theta.indexed_part().map(|x| x.formula.clone()).collect();

    let mut inner_vars = BTreeSet::new();
    let mut side = |len: &Term, tag: &str| -> Result<Formula, EquivalenceError> {
        let mut parts = Vec::new();
        for (j, g) in e.scalars.iter().enumerate() {
            let g = flatten_reads(&with_length(g, len).fold(), &mut inner_vars)?;
            parts.push(Formula::iff(Formula::var(format!("th!s{j}")), g));
        }
        for (k, f) in indexed.iter().enumerate() {
            let f = flatten_reads(f, &mut inner_vars)?;
            let sel = match encoding {
                ThresholdEncoding::PerSide => format!("th!{tag}{k}"),
                ThresholdEncoding::SharedIndexed => format!("th!x{k}"),
            };
            parts.push(Formula::iff(Formula::var(sel), f));
        }
        Ok(Formula::and(parts))
    };
    let lhs = side(&b, "p")?;
    let rhs = side(&theta_t, "q")?;

    let mut free = BTreeSet::new();
    for g in e.scalars.iter().chain(e.indexed.iter().map(|s| &s.formula)) {
        free.extend(g.free_vars());
    }
    for set in &e.indexed {
        for i in &set.indices {
            free.remove(i);
        }
    }
    // Arrays enter only through flattened reads and the length.
    let arrays: BTreeSet<String> = e
        .scalars
        .iter()
        .chain(e.indexed.iter().map(|s| &s.formula))
        .chain(e.indexed.iter().map(|s| &s.range))
        .flat_map(array_names)
        .collect();
    let bool_vars: BTreeSet<String> = e
        .scalars
        .iter()
        .chain(e.indexed.iter().map(|s| &s.formula))
        .flat_map(bool_names)
        .collect();
    let mut binders: Vec<Binder> = Vec::new();
    for v in free.iter().filter(|v| !arrays.contains(*v)) {
        binders.push(if bool_vars.contains(v) { Binder::bool(v.clone()) } else { Binder::int(v.clone()) });
    }
    for v in &inner_vars {
        binders.push(Binder::int(v.clone()));
    }
    let bits = |tag: &str| -> Vec<Binder> {
        (0..indexed.len()).map(|k| Binder::bool(format!("th!{tag}{k}"))).collect()
    };
    let (lhs_binders, rhs_binders, shared) = match encoding {
        ThresholdEncoding::PerSide => {
            let mut l = binders.clone();
            l.extend(bits("p"));
            let mut r = binders.clone();
            r.extend(bits("q"));
            (l, r, Vec::new())
        }
        ThresholdEncoding::SharedIndexed => (binders.clone(), binders, bits("x")),
    };
    let premise = Formula::and(alloc::vec![
        Formula::lt(Term::Int(0), b.clone()),
        Formula::exists(lhs_binders, lhs),
    ]);
    let body = Formula::implies(premise, Formula::exists(rhs_binders, rhs));
    let mut outer = alloc::vec![Binder::int("th!b")];
    outer.extend((0..e.scalars.len()).map(|j| Binder::bool(format!("th!s{j}"))));
    outer.extend(shared);
    Ok(Formula::forall(outer, body))
}

fn array_names(f: &Formula) -> Vec<String> {
    let mut out = Vec::new();
    f.for_each_term(true, &mut |t| {
        let _ = t.rewrite(&mut |t| {
            if let Term::Len(a) | Term::Read(a, _) = &t {
                out.push(a.clone());
            }
            t
        });
    });
    out
}

fn bool_names(f: &Formula) -> Vec<String> {
    match f {
        Formula::Var(v) => alloc::vec![v.clone()],
        Formula::Not(x) => bool_names(x),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().flat_map(bool_names).collect(),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            let mut v = bool_names(a);
            v.extend(bool_names(b));
            v
        }
        Formula::Quant { body, .. } => bool_names(body),
        Formula::Derived(d) => bool_names(&d.body),
        _ => Vec::new(),
    }
}

/// Least `theta <= max` whose threshold formula is valid.
pub fn compute_threshold<S: Solver + ?Sized>(
    e: &EquivalenceTheory,
    max: u32,
    encoding: ThresholdEncoding,
    solver: &mut S,
) -> Result<ThresholdResult, EquivalenceError> {
    let mut verdicts = Vec::new();
    for theta in 1..=max {
        let f = build_threshold_formula(e, theta, encoding)?;
        let v = match check_validity(solver, &f, &[], None)? {
            Validity::Valid => ThresholdVerdict::Valid,
            Validity::Invalid(_) => ThresholdVerdict::Invalid,
            Validity::Unknown(r) => {
                log::warn!("threshold check at {theta} returned unknown: {r}");
                ThresholdVerdict::Unknown
            }
        };
        verdicts.push((theta, v));
        if v == ThresholdVerdict::Valid {
            return Ok(ThresholdResult { theta, checked_up_to: theta, verdicts });
        }
    }
    Err(EquivalenceError::Exhausted { max, verdicts })
}

/// Equivalence theory from a vocabulary: atoms without dummies become
/// scalar formulas, atoms over one dummy become indexed sets over the
/// array range, and every bound or index variable `x` of array `a` gets
/// `{ x = c | 0 <= c < |a| }`.
pub fn equivalence_from_vocabulary(
    vocab: &[Formula],
    dummies: &[String],
    bounded: &[(String, String)],
) -> EquivalenceTheory {
    let mut e = EquivalenceTheory::default();
    for f in vocab {
        let fv = f.free_vars();
        let ds: Vec<&String> = dummies.iter().filter(|d| fv.contains(*d)).collect();
        match ds.as_slice() {
            [] => e.scalars.push(f.clone()),
            [d] => {
                let arrays = array_names(f);
                if let Some(a) = arrays.first() {
                    let range = Formula::and(alloc::vec![
                        Formula::le(Term::Int(0), Term::var((*d).clone())),
                        Formula::lt(Term::var((*d).clone()), Term::len(a.clone())),
                    ]);
                    e.indexed.push(IndexedSet { indices: alloc::vec![(*d).clone()], formula: f.clone(), range });
                }
            }
            _ => {}
        }
    }
    for (a, x) in bounded {
        let c = "c".to_string();
        e.indexed.push(IndexedSet {
            indices: alloc::vec![c.clone()],
            formula: Formula::eq(Term::var(x.clone()), Term::var(c.clone())),
            range: Formula::and(alloc::vec![
                Formula::le(Term::Int(0), Term::var(c.clone())),
                Formula::lt(Term::var(c), Term::len(a.clone())),
            ]),
        });
    }
    e
}
